//! Discretized `‖·‖_{α,∞}`, `‖·‖_{1−α,∞,0}`, `‖·‖_{α,1}` and `Λ_α`.
//!
//! Suprema over the continuum become maxima over grid nodes and node pairs.
//! Singular integrals use the product weights of [`crate::frac_calc::weights`],
//! with the absolute differences interpolated linearly between nodes.

use crate::field::SpaceTimeField;
use crate::frac_calc::weights::{kernel_weights, marchaud_weights};
use crate::frac_calc::{gamma, marchaud_left_sum, FractionalOrder, GridFunction};
use crate::par;

/// `max_i |v_i| + ∫_0^{ξ_i} |v(ξ_i) − v(η)| (ξ_i − η)^{−α−1} dη` for one slice.
pub fn slice_norm_alpha_infty(v: &[f64], h: f64, alpha: f64) -> f64 {
    let n = v.len() - 1;
    let w = marchaud_weights(alpha, n);
    let hb = h.powf(-alpha);
    par::max_indexed(n + 1, |i| v[i].abs() + hb * marchaud_left_sum(v, i, &w, true))
}

/// `‖f‖_{α,∞} = sup_t sup_ξ (|f(t,ξ)| + ∫_0^ξ |f(t,ξ) − f(t,η)| (ξ−η)^{−α−1} dη)`.
pub fn norm_alpha_infty(f: &SpaceTimeField, alpha: FractionalOrder) -> f64 {
    let n = f.n();
    let w = marchaud_weights(alpha.value(), n);
    let hb = f.h().powf(-alpha.value());
    par::max_indexed((f.m() + 1) * (n + 1), |k| {
        let (j, i) = (k / (n + 1), k % (n + 1));
        let v = f.slice(j);
        v[i].abs() + hb * marchaud_left_sum(v, i, &w, true)
    })
}

/// `sup_ξ` of the `‖·‖_{α,∞}` integrand at each time node.
pub fn norm_alpha_infty_per_slice(f: &SpaceTimeField, alpha: FractionalOrder) -> Vec<f64> {
    let n = f.n();
    let w = marchaud_weights(alpha.value(), n);
    let hb = f.h().powf(-alpha.value());
    let per_node = par::map_indexed((f.m() + 1) * (n + 1), |k| {
        let (j, i) = (k / (n + 1), k % (n + 1));
        let v = f.slice(j);
        v[i].abs() + hb * marchaud_left_sum(v, i, &w, true)
    });
    per_node
        .chunks_exact(n + 1)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect()
}

/// Result of the outward sweep from every left node `η = x_j`.
pub(crate) struct RightSweep {
    /// `cols[j][K−1] = D^{1−α}_{ξ−} g_{ξ−}(η)` with `ξ = x_{j+K}`, phase dropped.
    pub cols: Option<Vec<Vec<f64>>>,
    /// `max |D^{1−α}_{ξ−} g_{ξ−}(η)|` over all node pairs.
    pub max_right: f64,
    /// Discrete `‖g‖_{1−α,∞,0}` of the slice.
    pub holder_norm: f64,
}

/// Sweeps `ξ` outward from each `η`, accumulating the tail integral
/// `∫_η^ξ (g(η) − g(y)) (y−η)^{α−2} dy` cell by cell, so all `O(n²)` pairs
/// cost one multiply-add each.
pub(crate) fn right_sweep(g: &[f64], h: f64, alpha: f64, store: bool) -> RightSweep {
    let n = g.len() - 1;
    let w = kernel_weights(alpha - 2.0, n);
    let (near, far) = (w.near(), w.far());
    let hp = h.powf(alpha - 1.0);
    let pow: Vec<f64> = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { (k as f64).powf(alpha - 1.0) })
        .collect();
    let inv_gamma = 1.0 / gamma(alpha);
    let beta = 1.0 - alpha;
    let per_eta = par::map_indexed(n, |j| {
        let gj = g[j];
        let kmax = n - j;
        let mut col = if store { Vec::with_capacity(kmax) } else { Vec::new() };
        let (mut tail, mut atail) = (0.0, 0.0);
        let (mut max_r, mut max_norm) = (0.0f64, 0.0f64);
        let mut prev = 0.0;
        for k in 1..=kmax {
            let dk = gj - g[j + k];
            if k > 1 {
                tail += prev * near[k - 1];
                atail += prev.abs() * near[k - 1];
            }
            tail += dk * far[k - 1];
            atail += dk.abs() * far[k - 1];
            let q = hp * pow[k];
            let r = inv_gamma * (dk * q + beta * hp * tail);
            max_r = max_r.max(r.abs());
            max_norm = max_norm.max(dk.abs() * q + hp * atail);
            if store {
                col.push(r);
            }
            prev = dk;
        }
        (col, max_r, max_norm)
    });
    let mut max_right = 0.0f64;
    let mut holder_norm = 0.0f64;
    let mut cols = Vec::with_capacity(if store { n } else { 0 });
    for (col, r, q) in per_eta {
        max_right = max_right.max(r);
        holder_norm = holder_norm.max(q);
        if store {
            cols.push(col);
        }
    }
    RightSweep {
        cols: store.then_some(cols),
        max_right,
        holder_norm,
    }
}

/// `‖g‖_{1−α,∞,0}` of one slice.
pub fn slice_norm_1malpha_infty0(g: &[f64], h: f64, alpha: f64) -> f64 {
    right_sweep(g, h, alpha, false).holder_norm
}

/// `‖g‖_{1−α,∞,0} = sup_t sup_{η<ξ} (|g(ξ)−g(η)|/(ξ−η)^{1−α}
/// + ∫_η^ξ |g(y)−g(η)| (y−η)^{α−2} dy)`.
pub fn norm_1malpha_infty0(g: &SpaceTimeField, alpha: FractionalOrder) -> f64 {
    g.slices()
        .map(|s| slice_norm_1malpha_infty0(s, g.h(), alpha.value()))
        .fold(0.0, f64::max)
}

/// `Λ_α` of one slice: `max |D^{1−α}_{ξ−} g_{ξ−}(η)| / Γ(1−α)`.
pub fn slice_lambda_alpha(g: &[f64], h: f64, alpha: f64) -> f64 {
    right_sweep(g, h, alpha, false).max_right / gamma(1.0 - alpha)
}

/// `Λ_α(g) = Γ(1−α)^{-1} sup_t sup_{0<η<ξ≤1} |D^{1−α}_{ξ−} g_{ξ−}(t,·)(η)|`.
pub fn lambda_alpha(g: &SpaceTimeField, alpha: FractionalOrder) -> f64 {
    g.slices()
        .map(|s| slice_lambda_alpha(s, g.h(), alpha.value()))
        .fold(0.0, f64::max)
}

/// `‖f‖_{α,1} = ∫_0^1 |f(η)| η^{−α} dη
/// + ∫_0^1 ∫_0^η |f(η) − f(γ)| (η−γ)^{−α−1} dγ dη`.
pub fn norm_alpha_1(f: &GridFunction, alpha: FractionalOrder) -> f64 {
    slice_norm_alpha_1(f.values(), f.step(), alpha.value())
}

pub fn slice_norm_alpha_1(v: &[f64], h: f64, alpha: f64) -> f64 {
    let n = v.len() - 1;
    let w0 = kernel_weights(-alpha, n);
    let first = h.powf(1.0 - alpha) * w0.weighted_sum(n, |d| v[d].abs(), false);
    let w = marchaud_weights(alpha, n);
    let hb = h.powf(-alpha);
    let inner = par::map_indexed(n + 1, |i| hb * marchaud_left_sum(v, i, &w, true));
    let mut second = 0.5 * (inner[0] + inner[n]);
    second += inner[1..n].iter().sum::<f64>();
    first + h * second
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_calc::gamma;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    fn field(n: usize, f: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        SpaceTimeField::from_fn(0.0, 1.0, 3, n, f).unwrap()
    }

    #[test]
    fn zero_and_constant_fields() {
        let a = order(0.3);
        let z = field(32, |_, _| 0.0);
        assert_eq!(norm_alpha_infty(&z, a), 0.0);
        assert_eq!(norm_1malpha_infty0(&z, a), 0.0);
        assert_eq!(lambda_alpha(&z, a), 0.0);
        let c = field(32, |_, _| -1.5);
        assert_eq!(norm_alpha_infty(&c, a), 1.5);
        assert_eq!(norm_1malpha_infty0(&c, a), 0.0);
        assert_eq!(lambda_alpha(&c, a), 0.0);
        let g0 = GridFunction::zeros(0.0, 1.0, 32).unwrap();
        assert_eq!(norm_alpha_1(&g0, a), 0.0);
    }

    #[test]
    fn linear_closed_forms() {
        let x = field(64, |_, x| x);
        assert!((norm_alpha_infty(&x, order(0.5)) - 3.0).abs() < 1e-12);
        assert!((norm_1malpha_infty0(&x, order(0.25)) - 5.0).abs() < 1e-12);
        let expected = 1.0 / (gamma(0.5) * gamma(1.5));
        assert!((expected - std::f64::consts::FRAC_2_PI).abs() < 1e-14);
        assert!((lambda_alpha(&x, order(0.5)) - expected).abs() < 1e-12);
    }

    #[test]
    fn alpha_1_closed_forms() {
        let one = GridFunction::from_fn(0.0, 1.0, 64, |_| 1.0).unwrap();
        assert!((norm_alpha_1(&one, order(0.25)) - 4.0 / 3.0).abs() < 1e-12);
        let x = GridFunction::from_fn(0.0, 1.0, 1024, |x| x).unwrap();
        // first term exact, trapezoid of η^{1/2} in the second
        let v = norm_alpha_1(&x, order(0.5));
        assert!((v - 2.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn homogeneity_is_exact_for_powers_of_two() {
        let f = field(40, |t, x| (3.0 * x + t).sin());
        let a = order(0.35);
        let g = f.map(|v| -4.0 * v);
        assert_eq!(norm_alpha_infty(&g, a), 4.0 * norm_alpha_infty(&f, a));
        assert_eq!(norm_1malpha_infty0(&g, a), 4.0 * norm_1malpha_infty0(&f, a));
        assert_eq!(lambda_alpha(&g, a), 4.0 * lambda_alpha(&f, a));
    }

    #[test]
    fn per_slice_max_matches_global() {
        let f = field(40, |t, x| (1.0 + t) * x * x);
        let a = order(0.3);
        let per = norm_alpha_infty_per_slice(&f, a);
        assert_eq!(per.len(), 4);
        assert_eq!(per.iter().copied().fold(0.0, f64::max), norm_alpha_infty(&f, a));
        assert!(per.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sweep_matches_operator() {
        // the sweep must agree with weyl_derivative_right on each sub-interval [0, ξ]
        use crate::frac_calc::{weyl_derivative_right, Endpoint};
        let n = 24;
        let g: Vec<f64> = (0..=n).map(|i| ((i as f64) * 0.37).sin() * 0.3).collect();
        let h = 1.0 / n as f64;
        let alpha = 0.3;
        let sweep = right_sweep(&g, h, alpha, true);
        let cols = sweep.cols.unwrap();
        for end in 2..=n {
            let gf = GridFunction::new(0.0, end as f64 * h, g[..=end].to_vec()).unwrap();
            let r = weyl_derivative_right(&gf, order(1.0 - alpha), Endpoint::Subtract).unwrap();
            for j in 0..end {
                let tab = cols[j][end - j - 1];
                assert!((tab - r.values()[j]).abs() < 1e-11 * (1.0 + tab.abs()), "{end} {j}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn slices(n: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-2.0f64..2.0, 2 * (n + 1))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn triangle_inequality(v1 in slices(16), v2 in slices(16), alpha in 0.05f64..0.5) {
                let a = order(alpha);
                let f = SpaceTimeField::new(0.0, 1.0, 1, 16, v1).unwrap();
                let g = SpaceTimeField::new(0.0, 1.0, 1, 16, v2).unwrap();
                let s = f.linear_combination(1.0, &g, 1.0).unwrap();
                let eps = 1e-12;
                prop_assert!(norm_alpha_infty(&s, a) <= norm_alpha_infty(&f, a) + norm_alpha_infty(&g, a) + eps);
                prop_assert!(norm_1malpha_infty0(&s, a) <= norm_1malpha_infty0(&f, a) + norm_1malpha_infty0(&g, a) + eps);
                prop_assert!(lambda_alpha(&s, a) <= lambda_alpha(&f, a) + lambda_alpha(&g, a) + eps);
                let f1 = f.slice_function(0);
                let g1 = g.slice_function(0);
                let s1 = s.slice_function(0);
                prop_assert!(norm_alpha_1(&s1, a) <= norm_alpha_1(&f1, a) + norm_alpha_1(&g1, a) + eps);
            }

            #[test]
            fn lambda_is_dominated_by_holder_norm(
                c in prop::collection::vec(-1.0f64..1.0, 4),
                alpha in 0.05f64..0.5,
            ) {
                let a = order(alpha);
                let g = SpaceTimeField::from_fn(0.0, 1.0, 1, 64, |t, x| {
                    (1.0 + t) * (c[0] * x + c[1] * (3.0 * x).sin() + c[2] * x * x + c[3] * (7.0 * x).cos() - c[3])
                }).unwrap();
                let lhs = lambda_alpha(&g, a);
                let rhs = norm_1malpha_infty0(&g, a) / (gamma(1.0 - alpha) * gamma(alpha));
                prop_assert!(lhs <= rhs * (1.0 + 1e-6), "{lhs} > {rhs}");
            }
        }
    }
}
