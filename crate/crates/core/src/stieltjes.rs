//! Generalized Stieltjes integral
//! `∫_c^d f dg = ± ∫_c^d D^α_{c+} f_{c+}(x) D^{1−α}_{d−} g_{d−}(x) dx + f(c)(g(d) − g(c))`
//! on grid data, with `f_{c+} = f − f(c)` and `g_{d−} = g − g(d)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_calc::{weyl_left_slice, Endpoint, FractionalOrder, GridFunction};
use crate::norms::{self, right_sweep};
use crate::par;

/// Global sign of the pairing term. Both derivative fields are real with
/// their phases dropped; the sign is the one that makes `∫_0^1 x dx = 1/2`.
/// [`calibrate_pairing_sign`] recomputes it from data.
pub const PAIRING_SIGN: f64 = -1.0;

/// `D^{1−α}_{ξ−} g_{ξ−}(η)` for every node pair `η < ξ` of one slice, built
/// in `O(n²)` by one outward sweep per `η`.
#[derive(Debug, Clone)]
pub struct RightDerivativeTable {
    g: Vec<f64>,
    h: f64,
    alpha: f64,
    cols: Vec<Vec<f64>>,
    max_right: f64,
    holder_norm: f64,
}

impl RightDerivativeTable {
    pub fn new(g: &[f64], h: f64, alpha: FractionalOrder) -> Self {
        let sweep = right_sweep(g, h, alpha.value(), true);
        Self {
            g: g.to_vec(),
            h,
            alpha: alpha.value(),
            cols: sweep.cols.unwrap_or_default(),
            max_right: sweep.max_right,
            holder_norm: sweep.holder_norm,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.g.len() - 1
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `D^{1−α}_{ξ−} g_{ξ−}(η)` at `η = x_eta`, `ξ = x_xi`; zero when `eta ≥ xi`.
    #[inline]
    pub fn value(&self, eta: usize, xi: usize) -> f64 {
        if eta >= xi {
            0.0
        } else {
            self.cols[eta][xi - eta - 1]
        }
    }

    /// `Λ_α` of the slice.
    pub fn lambda(&self) -> f64 {
        self.max_right / crate::frac_calc::gamma(1.0 - self.alpha)
    }

    /// `‖g‖_{1−α,∞,0}` of the slice.
    pub fn holder_norm(&self) -> f64 {
        self.holder_norm
    }

    /// Pairing `∫_c^d L(x) R(x) dx` where `left[k] = D^α_{c+} f_{c+}(x_{c+k})`.
    ///
    /// Interior cells use the trapezoid rule. The two end cells use the local
    /// models `L ~ (x−c)^{1−α}` and `R ~ (d−x)^α`, where the factors vanish at
    /// the end nodes but are not smooth.
    fn pairing(&self, left: &[f64], c: usize, d: usize) -> f64 {
        let len = d - c;
        if len < 2 {
            return 0.0;
        }
        let a = self.alpha;
        let lr = |k: usize| left[k] * self.value(c + k, d);
        let first = 1.0 / (2.0 - a);
        let last = 1.0 / (1.0 + a);
        if len == 2 {
            return self.h * lr(1) * (first + last);
        }
        let mut acc = lr(1) * (0.5 + first);
        for k in 2..len - 1 {
            acc += lr(k);
        }
        acc += lr(len - 1) * (0.5 + last);
        self.h * acc
    }

    /// `∫_{x_c}^{x_d} f dg` for node data `f` on the same grid.
    pub fn integral(&self, f: &[f64], c: usize, d: usize) -> f64 {
        if d <= c {
            return 0.0;
        }
        let left = weyl_left_slice(&f[c..=d], self.h, self.alpha, Endpoint::Subtract);
        PAIRING_SIGN * self.pairing(&left, c, d) + f[c] * (self.g[d] - self.g[c])
    }

    /// `∫_0^{ξ_i} f dg` for every node `ξ_i`, in `O(n²)`.
    pub fn integrals_from_zero(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.g.len());
        let left = weyl_left_slice(f, self.h, self.alpha, Endpoint::Subtract);
        let f0 = f[0];
        let g0 = self.g[0];
        par::map_indexed(f.len(), |i| {
            PAIRING_SIGN * self.pairing(&left[..=i], 0, i) + f0 * (self.g[i] - g0)
        })
    }
}

fn check_pair(f: &GridFunction, g: &GridFunction) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("integrand and integrator grids differ".into()));
    }
    for v in [f.values(), g.values()] {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteNode(i));
        }
    }
    Ok(())
}

fn aligned(f: &GridFunction, c: f64, d: f64) -> Result<(usize, usize)> {
    match (f.node_index(c), f.node_index(d)) {
        (Some(ci), Some(di)) if ci <= di => Ok((ci, di)),
        _ => Err(Error::Misaligned { c, d }),
    }
}

/// The generalized Stieltjes integral `∫_c^d f dg`; `c` and `d` must be nodes.
pub fn stieltjes_integral(
    f: &GridFunction,
    g: &GridFunction,
    alpha: FractionalOrder,
    c: f64,
    d: f64,
) -> Result<f64> {
    check_pair(f, g)?;
    let (ci, di) = aligned(f, c, d)?;
    let table = RightDerivativeTable::new(&g.values()[..=di], f.step(), alpha);
    Ok(table.integral(f.values(), ci, di))
}

/// Recomputes the pairing sign from `f = g = x` on `(0, 1)`, where the
/// classical value is `1/2` and the boundary term vanishes.
pub fn calibrate_pairing_sign(n: usize, alpha: FractionalOrder) -> Result<f64> {
    let x = GridFunction::from_fn(0.0, 1.0, n, |x| x)?;
    let table = RightDerivativeTable::new(x.values(), x.step(), alpha);
    let left = weyl_left_slice(x.values(), x.step(), alpha.value(), Endpoint::Subtract);
    let raw = table.pairing(&left, 0, n);
    Ok((0.5 / raw).signum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorReport {
    /// `∫_c^d f dg` computed on the subinterval.
    pub direct: f64,
    /// `∫_a^b 1_{(c,d)} f dg` on the full grid.
    pub indicator: f64,
    pub gap: f64,
}

/// Both sides of `∫_c^d f dg = ∫_a^b 1_{(c,d)} f dg`.
///
/// The indicator is applied at node level, with weight 1/2 on the nodes `c`
/// and `d` so that the interpolated jump is centred on the edge.
pub fn stieltjes_indicator_consistency(
    f: &GridFunction,
    g: &GridFunction,
    alpha: FractionalOrder,
    c: f64,
    d: f64,
) -> Result<IndicatorReport> {
    check_pair(f, g)?;
    let (ci, di) = aligned(f, c, d)?;
    let n = f.n();
    let direct = stieltjes_integral(f, g, alpha, c, d)?;
    let indicator = if ci == 0 && di == n {
        direct
    } else {
        let masked: Vec<f64> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if (i == ci && ci > 0) || (i == di && di < n) {
                    0.5 * v
                } else if i >= ci && i <= di {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        let table = RightDerivativeTable::new(g.values(), f.step(), alpha);
        table.integral(&masked, 0, n)
    };
    Ok(IndicatorReport {
        direct,
        indicator,
        gap: (direct - indicator).abs(),
    })
}

/// Relative slack applied to every a priori bound check.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + BOUND_SLACK),
        }
    }

    /// `rhs − lhs`.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `max_ξ |∫_0^ξ f dg| ≤ Λ_α(g) ‖f‖_{α,1}` over grid `ξ`.
pub fn integral_bound_check(f: &GridFunction, g: &GridFunction, alpha: FractionalOrder) -> Result<BoundCheck> {
    check_pair(f, g)?;
    if f.a() != 0.0 || f.b() != 1.0 {
        return Err(Error::InvalidInterval { a: f.a(), b: f.b() });
    }
    let table = RightDerivativeTable::new(g.values(), f.step(), alpha);
    Ok(bound_with_table(f.values(), &table))
}

pub(crate) fn bound_with_table(f: &[f64], table: &RightDerivativeTable) -> BoundCheck {
    let lhs = table
        .integrals_from_zero(f)
        .into_iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let rhs = table.lambda() * norms::slice_norm_alpha_1(f, table.step(), table.alpha());
    BoundCheck::new(lhs, rhs)
}

/// `|∫_0^1 u dB^H| ≤ G ‖u‖_{α,1}` with `G` the realized `Λ_α` of the driver
/// slice at time node `t_index`.
pub fn pathwise_integral_bound_check(
    u: &[f64],
    driver: &crate::fbm::DrivingField,
    t_index: usize,
) -> Result<BoundCheck> {
    let table = driver.table(t_index)?;
    if u.len() != table.g().len() {
        return Err(Error::GridMismatch("integrand and driver slice lengths differ".into()));
    }
    if let Some(i) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteNode(i));
    }
    let n = table.n();
    let lhs = table.integral(u, 0, n).abs();
    let rhs = table.lambda() * norms::slice_norm_alpha_1(u, table.step(), table.alpha());
    Ok(BoundCheck::new(lhs, rhs))
}
