//! Discretized Riemann-Liouville integrals and Weyl (Marchaud-form)
//! derivatives on uniform grids.
//!
//! All four operators integrate the piecewise-linear interpolant of the node
//! data exactly against their power kernels (see [`weights`]), so they are
//! exact for linear data and linear in the data. The complex phases that
//! appear in the right-sided definitions are dropped: every operator returns
//! real values.

pub mod special;
pub mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use special::{beta, beta_b1, gamma, ln_gamma};

/// Order of a fractional operator, `0 < α < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The order `1 − α` used for the integrator side of the pairing.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }

    /// Checks the solver window `1 − H < α < 1/2` together with `1/2 < H < 1`.
    pub fn check_solver_range(self, hurst: f64) -> Result<()> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidHurst(hurst));
        }
        let lo = 1.0 - hurst;
        if self.0 > lo && self.0 < 0.5 {
            Ok(())
        } else {
            Err(Error::OrderOutOfRange {
                alpha: self.0,
                lo,
                hi: 0.5,
            })
        }
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(value: FractionalOrder) -> f64 {
        value.0
    }
}

/// Real values sampled at the nodes `x_i = a + i (b − a)/n`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl GridFunction {
    /// Validates `b > a`, at least two cells and finite values.
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        let f = Self::new_unchecked(a, b, values)?;
        if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteNode(i));
        }
        Ok(f)
    }

    /// Like [`GridFunction::new`] but allows non-finite node values. Used for
    /// operator outputs that flag a singular endpoint.
    pub(crate) fn new_unchecked(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInterval { a, b });
        }
        if values.len() < 3 {
            return Err(Error::GridTooSmall(values.len().saturating_sub(1)));
        }
        Ok(Self { a, b, values })
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (b - a) / n as f64;
        Self::new(a, b, (0..=n).map(|i| f(a + i as f64 * h)).collect())
    }

    pub fn zeros(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(a, b, vec![0.0; n + 1])
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    #[inline]
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.n() as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n() {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n()).map(move |i| self.node(i))
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Index of the node at `x`, if `x` lies on the grid (to 1e-9 cells).
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.a) / self.step();
        let i = s.round();
        if (s - i).abs() <= 1e-9 && i >= 0.0 && i <= self.n() as f64 {
            Some(i as usize)
        } else {
            None
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n() == other.n() && self.a == other.a && self.b == other.b
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            a: self.a,
            b: self.b,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `c1·self + c2·other` on a shared grid.
    pub fn linear_combination(&self, c1: f64, other: &Self, c2: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("linear combination of different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| c1 * x + c2 * y)
            .collect();
        Ok(Self {
            a: self.a,
            b: self.b,
            values,
        })
    }

    /// The reflection `x ↦ a + b − x`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            a: self.a,
            b: self.b,
            values,
        }
    }

    /// Restriction to the nodes `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Self> {
        if hi > self.n() || hi < lo + 2 {
            return Err(Error::GridTooSmall(hi.saturating_sub(lo)));
        }
        Self::new_unchecked(self.node(lo), self.node(hi), self.values[lo..=hi].to_vec())
    }
}

/// How a Weyl derivative treats the endpoint the integral starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// Differentiate `f − f(endpoint)`; the endpoint node is then exactly 0.
    Subtract,
    /// Differentiate `f` itself; the endpoint node is singular and set to NaN.
    Raw,
}

// ---------------------------------------------------------------------------
// slice kernels shared with norms, stieltjes and solver

/// `I^α_{0+} v` at every node of a slice with spacing `h`.
pub(crate) fn rl_left_slice(v: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let w = weights::rl_weights(alpha, n);
    let scale = h.powf(alpha) / gamma(alpha);
    (0..=n)
        .map(|i| scale * w.weighted_sum(i, |d| v[i - d], false))
        .collect()
}

/// `Σ` of the Marchaud product weights against `v_i − v_j`, `j < i`, without
/// the `h^{−β}` factor. With `abs` the differences enter in absolute value.
#[inline]
pub(crate) fn marchaud_left_sum(v: &[f64], i: usize, w: &weights::KernelWeights, abs: bool) -> f64 {
    let vi = v[i];
    if abs {
        w.weighted_sum(i, |d| (vi - v[i - d]).abs(), true)
    } else {
        w.weighted_sum(i, |d| vi - v[i - d], true)
    }
}

/// `D^β_{0+}` of a slice, with the endpoint convention applied.
pub(crate) fn weyl_left_slice(v: &[f64], h: f64, order: f64, endpoint: Endpoint) -> Vec<f64> {
    let n = v.len() - 1;
    let w = weights::marchaud_weights(order, n);
    let shift = match endpoint {
        Endpoint::Subtract => v[0],
        Endpoint::Raw => 0.0,
    };
    let f: Vec<f64> = v.iter().map(|x| x - shift).collect();
    let g1 = 1.0 / gamma(1.0 - order);
    let hb = h.powf(-order);
    let mut out: Vec<f64> = crate::par::map_indexed(n + 1, |i| {
        if i == 0 {
            return 0.0;
        }
        let first = f[i] * (i as f64 * h).powf(-order);
        g1 * (first + order * hb * marchaud_left_sum(&f, i, &w, false))
    });
    if endpoint == Endpoint::Raw {
        out[0] = f64::NAN;
    }
    out
}

fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

// ---------------------------------------------------------------------------
// public operators

/// Left-sided Riemann-Liouville integral
/// `I^α_{a+} f(x) = Γ(α)^{-1} ∫_a^x f(y) (x−y)^{α−1} dy` on the grid of `f`.
pub fn rl_integral_left(f: &GridFunction, alpha: FractionalOrder) -> Result<GridFunction> {
    let values = rl_left_slice(f.values(), f.step(), alpha.value());
    GridFunction::new_unchecked(f.a, f.b, values)
}

/// Right-sided Riemann-Liouville integral
/// `Γ(α)^{-1} ∫_x^b f(y) (y−x)^{α−1} dy`, phase dropped.
pub fn rl_integral_right(f: &GridFunction, alpha: FractionalOrder) -> Result<GridFunction> {
    let mut values = rl_left_slice(&reversed(f.values()), f.step(), alpha.value());
    values.reverse();
    GridFunction::new_unchecked(f.a, f.b, values)
}

/// Left Weyl derivative in Marchaud form,
/// `Γ(1−α)^{-1} [f(x)(x−a)^{−α} + α ∫_a^x (f(x)−f(y))(x−y)^{−α−1} dy]`.
///
/// With [`Endpoint::Subtract`] the operator is applied to `f − f(a)` and the
/// node at `a` is 0; with [`Endpoint::Raw`] the node at `a` is NaN.
pub fn weyl_derivative_left(
    f: &GridFunction,
    alpha: FractionalOrder,
    endpoint: Endpoint,
) -> Result<GridFunction> {
    let values = weyl_left_slice(f.values(), f.step(), alpha.value(), endpoint);
    GridFunction::new_unchecked(f.a, f.b, values)
}

/// Right Weyl derivative in Marchaud form,
/// `Γ(1−α)^{-1} [f(x)(b−x)^{−α} + α ∫_x^b (f(x)−f(y))(y−x)^{−α−1} dy]`,
/// phase dropped. The endpoint conventions mirror the left-sided operator.
pub fn weyl_derivative_right(
    f: &GridFunction,
    alpha: FractionalOrder,
    endpoint: Endpoint,
) -> Result<GridFunction> {
    let mut values = weyl_left_slice(&reversed(f.values()), f.step(), alpha.value(), endpoint);
    values.reverse();
    GridFunction::new_unchecked(f.a, f.b, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn order_validation() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        let a = order(0.3);
        assert!(a.check_solver_range(0.75).is_ok());
        assert!(a.check_solver_range(0.65).is_err());
        assert!(order(0.5).check_solver_range(0.9).is_err());
        assert!(a.check_solver_range(0.5).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::new(0.0, 1.0, vec![0.0, 1.0]).is_err());
        assert!(GridFunction::new(1.0, 1.0, vec![0.0; 4]).is_err());
        assert_eq!(
            GridFunction::new(0.0, 1.0, vec![0.0, f64::NAN, 1.0]),
            Err(Error::NonFiniteNode(1))
        );
        let f = GridFunction::from_fn(0.0, 2.0, 4, |x| x).unwrap();
        assert_eq!(f.node_index(1.5), Some(3));
        assert_eq!(f.node_index(1.2), None);
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = GridFunction::zeros(0.0, 1.0, 16).unwrap();
        let a = order(0.4);
        for out in [
            rl_integral_left(&z, a).unwrap(),
            rl_integral_right(&z, a).unwrap(),
            weyl_derivative_left(&z, a, Endpoint::Subtract).unwrap(),
            weyl_derivative_right(&z, a, Endpoint::Subtract).unwrap(),
        ] {
            assert!(out.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rl_of_one_and_x_at_half_order() {
        let a = order(0.5);
        let one = GridFunction::from_fn(0.0, 1.0, 64, |_| 1.0).unwrap();
        let i1 = rl_integral_left(&one, a).unwrap();
        assert!((i1.values()[64] - 1.0 / gamma(1.5)).abs() < 1e-13);
        assert!((1.0 / gamma(1.5) - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let x = GridFunction::from_fn(0.0, 1.0, 64, |x| x).unwrap();
        let ix = rl_integral_left(&x, a).unwrap();
        assert!((ix.values()[64] - gamma(2.0) / gamma(2.5)).abs() < 1e-13);
        assert!((gamma(2.0) / gamma(2.5) - 0.752252).abs() < 1e-6);
        let r1 = rl_integral_right(&one, a).unwrap();
        assert!((r1.values()[0] - 1.0 / gamma(1.5)).abs() < 1e-13);
    }

    #[test]
    fn right_integral_of_reflection_is_reflected_left_integral() {
        let f = GridFunction::from_fn(0.0, 1.0, 40, |x| (3.0 * x).sin() + x * x).unwrap();
        let a = order(0.35);
        let left = rl_integral_left(&f, a).unwrap();
        let right = rl_integral_right(&f.reflected(), a).unwrap().reflected();
        for (l, r) in left.values().iter().zip(right.values()) {
            assert!((l - r).abs() < 1e-14);
        }
        let dl = weyl_derivative_left(&f, a, Endpoint::Subtract).unwrap();
        let dr = weyl_derivative_right(&f.reflected(), a, Endpoint::Subtract)
            .unwrap()
            .reflected();
        for (l, r) in dl.values().iter().zip(dr.values()) {
            assert!((l - r).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_input_gives_reflected_results() {
        let f = GridFunction::from_fn(0.0, 1.0, 32, |x| (x - 0.5) * (x - 0.5)).unwrap();
        let a = order(0.3);
        let left = rl_integral_left(&f, a).unwrap();
        let right = rl_integral_right(&f, a).unwrap();
        for (l, r) in left.values().iter().zip(right.reflected().values()) {
            assert!((l - r).abs() < 1e-14);
        }
    }

    #[test]
    fn weyl_of_constant_is_pure_boundary_term() {
        let c = 2.5;
        let f = GridFunction::from_fn(0.0, 1.0, 50, |_| c).unwrap();
        let a = order(0.3);
        let d = weyl_derivative_left(&f, a, Endpoint::Raw).unwrap();
        assert!(d.values()[0].is_nan());
        for i in 1..=50 {
            let x = f.node(i);
            let expected = c * x.powf(-0.3) / gamma(0.7);
            assert!((d.values()[i] - expected).abs() < 1e-12 * expected.abs());
        }
        let ds = weyl_derivative_left(&f, a, Endpoint::Subtract).unwrap();
        assert!(ds.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weyl_of_linear_is_exact() {
        let f = GridFunction::from_fn(0.0, 1.0, 50, |x| x).unwrap();
        let d = weyl_derivative_left(&f, order(0.5), Endpoint::Raw).unwrap();
        for i in 1..=50 {
            let x = f.node(i);
            let expected = 2.0 * x.sqrt() / std::f64::consts::PI.sqrt();
            assert!((d.values()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn right_weyl_of_linear_closed_form() {
        // g(x) = x on (0, ξ) with ξ = 0.8; order 1 − α applied to g − g(ξ)
        let alpha = 0.3;
        let g = GridFunction::from_fn(0.0, 0.8, 40, |x| x).unwrap();
        let d = weyl_derivative_right(&g, order(1.0 - alpha), Endpoint::Subtract).unwrap();
        for i in 0..40 {
            let eta = g.node(i);
            let magnitude = (0.8 - eta).powf(alpha) / gamma(alpha + 1.0);
            let two_terms = (0.8 - eta).powf(alpha) * (1.0 + (1.0 - alpha) / alpha) / gamma(alpha);
            assert!((magnitude - two_terms).abs() < 1e-14);
            assert!(d.values()[i] < 0.0);
            assert!((d.values()[i].abs() - magnitude).abs() < 1e-12);
        }
        assert_eq!(d.values()[40], 0.0);
    }

    #[test]
    fn right_weyl_closed_form_against_dense_quadrature() {
        // independent check of a generic value: midpoint quadrature of the
        // Marchaud integral after the substitution u = (y − η)^{α}
        let alpha = 0.3;
        let xi: f64 = 0.8;
        let eta: f64 = 0.3;
        let beta = 1.0 - alpha;
        let gf = |x: f64| (2.0 * x).sin();
        let steps = 400_000;
        let span = (xi - eta).powf(alpha);
        let mut integral = 0.0;
        for j in 0..steps {
            let u = (j as f64 + 0.5) * span / steps as f64;
            let s = u.powf(1.0 / alpha);
            // (g(η) − g(η+s)) s^{−β−1} ds, ds = u^{1/α − 1}/α du
            let ds = u.powf(1.0 / alpha - 1.0) / alpha;
            integral += (gf(eta) - gf(eta + s)) * s.powf(-beta - 1.0) * ds * span / steps as f64;
        }
        let reference =
            ((gf(eta) - gf(xi)) * (xi - eta).powf(-beta) + beta * integral) / gamma(1.0 - beta);
        let g = GridFunction::from_fn(0.0, xi, 2000, gf).unwrap();
        let d = weyl_derivative_right(&g, order(beta), Endpoint::Subtract).unwrap();
        let i = g.node_index(eta).unwrap();
        assert!((d.values()[i] - reference).abs() < 1e-4 * reference.abs(), "{} vs {reference}", d.values()[i]);
    }

    #[test]
    fn inversion_recovers_smooth_input() {
        let g = |x: f64| (2.0 * x).cos() * x;
        let a = order(0.5);
        let mut prev = f64::INFINITY;
        for n in [128, 256, 512] {
            let f = GridFunction::from_fn(0.0, 1.0, n, g).unwrap();
            let i = rl_integral_left(&f, a).unwrap();
            let d = weyl_derivative_left(&i, a, Endpoint::Subtract).unwrap();
            let err = (1..n)
                .map(|k| (d.values()[k] - f.values()[k]).abs())
                .fold(0.0, f64::max);
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn semigroup_under_refinement() {
        let (a, b) = (order(0.3), order(0.4));
        let ab = order(0.7);
        let f = GridFunction::from_fn(0.0, 1.0, 2048, f64::sin).unwrap();
        let lhs = rl_integral_left(&rl_integral_left(&f, b).unwrap(), a).unwrap();
        let rhs = rl_integral_left(&f, ab).unwrap();
        let err = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "semigroup discrepancy {err}");
    }

    #[test]
    fn positivity_of_left_integral() {
        let f = GridFunction::from_fn(0.0, 1.0, 100, |x| (10.0 * x).sin().abs()).unwrap();
        let i = rl_integral_left(&f, order(0.2)).unwrap();
        assert!(i.values().iter().all(|&v| v >= 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn grid_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-5.0f64..5.0, n + 1)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn operators_are_linear(
                v1 in grid_values(24),
                v2 in grid_values(24),
                c1 in -3.0f64..3.0,
                c2 in -3.0f64..3.0,
                alpha in 0.05f64..0.95,
            ) {
                let f1 = GridFunction::new(0.0, 1.0, v1).unwrap();
                let f2 = GridFunction::new(0.0, 1.0, v2).unwrap();
                let comb = f1.linear_combination(c1, &f2, c2).unwrap();
                let a = order(alpha);
                type Op = fn(&GridFunction, FractionalOrder) -> Result<GridFunction>;
                let ops: [Op; 4] = [
                    rl_integral_left,
                    rl_integral_right,
                    |f, a| weyl_derivative_left(f, a, Endpoint::Subtract),
                    |f, a| weyl_derivative_right(f, a, Endpoint::Subtract),
                ];
                for op in ops {
                    let lhs = op(&comb, a).unwrap();
                    let r1 = op(&f1, a).unwrap();
                    let r2 = op(&f2, a).unwrap();
                    for i in 0..=24 {
                        let expected = c1 * r1.values()[i] + c2 * r2.values()[i];
                        let scale = 1.0 + r1.values()[i].abs() + r2.values()[i].abs();
                        prop_assert!((lhs.values()[i] - expected).abs() <= 1e-11 * scale * 10.0);
                    }
                }
            }

            #[test]
            fn left_integral_preserves_sign(v in prop::collection::vec(0.0f64..5.0, 33), alpha in 0.05f64..0.95) {
                let f = GridFunction::new(0.0, 1.0, v).unwrap();
                let i = rl_integral_left(&f, order(alpha)).unwrap();
                prop_assert!(i.values().iter().all(|&x| x >= 0.0));
            }
        }
    }
}
