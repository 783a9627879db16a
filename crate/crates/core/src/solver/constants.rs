//! The constants of the existence argument, evaluated for a concrete
//! coefficient, driver and initial condition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_calc::{beta_b1, FractionalOrder};

use super::coefficient::Coefficient;

/// `C = b⁽⁵⁾ T₂`, the target contraction factor per window.
pub const CONTRACTION_TARGET: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofConstants {
    pub alpha: f64,
    pub lambda: f64,
    pub m1: f64,
    pub m2: f64,
    /// `M_N` at `N = R₁`.
    pub m_r: f64,
    pub phi_norm: f64,
    pub r1: f64,
    /// `B(2α, 1−α)`
    pub b1: f64,
    /// `[M₂(1/(1−α) + b1/(1−2α)) + M₁(1 + 1/(α(1−α)))]·Λ`
    pub b2: f64,
    /// `max(1, b1)`
    pub b3: f64,
    /// `(M₁ + M_{R₁})(1 + 2R₁)`
    pub b4: f64,
    /// `Λ·b3·b4·(2−3α)/((1−2α)(1−α))`, used for `T₂`.
    pub b5: f64,
    /// `b1·b4·(2−3α)/((1−2α)(1−α))`, the expression as printed without the
    /// `Λ` factor and with `b1` in place of `b3`. Reported, not used.
    pub b5_b1: f64,
    pub t1: f64,
    pub t2: f64,
    pub t0: f64,
    /// Gronwall rate, equal to `b2`.
    pub k: f64,
    /// `(1/(1−α) + b1/(1−2α))`
    pub c1: f64,
    /// `(1 + 1/(α(1−α)))`
    pub c2: f64,
    /// `true` when `T₁` or `T₂` had a zero denominator and was replaced by
    /// the horizon.
    pub t1_unbounded: bool,
    pub t2_unbounded: bool,
}

/// Default working radius `2·max(1, ‖φ‖_{α,∞})`.
pub fn default_r1(phi_norm: f64) -> f64 {
    2.0 * phi_norm.max(1.0)
}

/// `b⁽⁴⁾` and `b⁽⁵⁾` for a working radius `radius`.
pub fn contraction_constants(
    alpha: FractionalOrder,
    coeff: &Coefficient,
    lambda: f64,
    radius: f64,
) -> Result<(f64, f64)> {
    let a = alpha.value();
    let b1 = beta_b1(alpha)?;
    let b3 = b1.max(1.0);
    let b4 = (coeff.m1() + coeff.m_n(radius)) * (1.0 + 2.0 * radius);
    let shape = (2.0 - 3.0 * a) / ((1.0 - 2.0 * a) * (1.0 - a));
    Ok((b4, lambda * b3 * b4 * shape))
}

/// All constants for the window `[0, horizon]`. `T₁`, `T₂` fall back to
/// `horizon` when their denominators vanish.
pub fn compute_constants(
    alpha: FractionalOrder,
    coeff: &Coefficient,
    lambda: f64,
    phi_norm: f64,
    r1: f64,
    horizon: f64,
) -> Result<ProofConstants> {
    if !(r1 > phi_norm) {
        return Err(Error::InvalidParameter(format!(
            "R1 = {r1} must exceed the initial norm {phi_norm}"
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("Lambda = {lambda} must be finite")));
    }
    let a = alpha.value();
    let b1 = beta_b1(alpha)?;
    let (m1, m2) = (coeff.m1(), coeff.m2());
    let c1 = 1.0 / (1.0 - a) + b1 / (1.0 - 2.0 * a);
    let c2 = 1.0 + 1.0 / (a * (1.0 - a));
    let b2 = (m2 * c1 + m1 * c2) * lambda;
    let b3 = b1.max(1.0);
    let (b4, b5) = contraction_constants(alpha, coeff, lambda, r1)?;
    let shape = (2.0 - 3.0 * a) / ((1.0 - 2.0 * a) * (1.0 - a));
    let b5_b1 = b1 * b4 * shape;
    let t1_unbounded = b2 == 0.0;
    let t1 = if t1_unbounded {
        horizon
    } else {
        (r1 - phi_norm) / (b2 * (1.0 + r1))
    };
    let t2_unbounded = b5 == 0.0;
    let t2 = if t2_unbounded {
        horizon
    } else {
        CONTRACTION_TARGET / b5
    };
    Ok(ProofConstants {
        alpha: a,
        lambda,
        m1,
        m2,
        m_r: coeff.m_n(r1),
        phi_norm,
        r1,
        b1,
        b2,
        b3,
        b4,
        b5,
        b5_b1,
        t1,
        t2,
        t0: t1.min(t2),
        k: b2,
        c1,
        c2,
        t1_unbounded,
        t2_unbounded,
    })
}

impl ProofConstants {
    /// `‖φ‖ e^{Kt}`, valid as an a priori bound when `‖φ‖ ≥ 1`.
    pub fn exponential_envelope(&self, t: f64) -> f64 {
        self.phi_norm * (self.k * t).exp()
    }

    /// Solution of `u = ‖φ‖ + ∫_0^t (B + C u)` with `B = Λ M₂ c1` and
    /// `C = Λ M₁ c2`, which bounds the solution norm for every `‖φ‖`.
    pub fn envelope(&self, t: f64) -> f64 {
        let b = self.lambda * self.m2 * self.c1;
        let c = self.lambda * self.m1 * self.c2;
        if c == 0.0 {
            self.phi_norm + b * t
        } else {
            let e = (c * t).exp();
            self.phi_norm * e + b / c * (e - 1.0)
        }
    }
}
