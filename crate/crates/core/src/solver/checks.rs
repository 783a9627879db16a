//! Numerical checks of the inequalities behind the existence argument.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbm::DrivingField;
use crate::field::SpaceTimeField;
use crate::norms::{norm_alpha_infty, norm_alpha_infty_per_slice};
use crate::stieltjes::BOUND_SLACK;

use super::coefficient::Coefficient;
use super::constants::{compute_constants, contraction_constants, default_r1};
use super::operator::FixedPointOperator;
use super::solve::{SolverConfig, SolverReport, CONTRACTION_SLACK};

/// Absolute rounding allowance in the quadruple inequality.
pub const QUADRUPLE_ROUNDING: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionProbe {
    pub ratio: f64,
    /// `b⁽⁵⁾·T` for the probe window.
    pub ceiling: f64,
    pub window: f64,
    pub b5: f64,
    /// `ratio ≤ ceiling·(1 + 0.1)`.
    pub within: bool,
}

/// `‖F(Y₁) − F(Y₂)‖_{α,∞} / ‖Y₁ − Y₂‖_{α,∞}` on the window of `y1`, which
/// must start at time 0, against `b⁽⁵⁾T` at working radius `radius`.
pub fn contraction_probe(
    y1: &SpaceTimeField,
    y2: &SpaceTimeField,
    cfg: &SolverConfig,
    driver: &DrivingField,
    radius: f64,
) -> Result<ContractionProbe> {
    let a = cfg.alpha;
    for y in [y1, y2] {
        let norm = norm_alpha_infty(y, a);
        if norm > radius * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "probe field norm {norm} lies outside the ball of radius {radius}"
            )));
        }
    }
    let denom = norm_alpha_infty(&y1.sub(y2)?, a);
    if denom == 0.0 {
        return Err(Error::InvalidParameter("contraction probe needs Y1 != Y2".into()));
    }
    let op = FixedPointOperator::new(&cfg.phi, &cfg.coeff, driver, 0);
    let diff = op.apply(y1)?.sub(&op.apply(y2)?)?;
    let ratio = norm_alpha_infty(&diff, a) / denom;
    let lambda = (0..=y1.m()).map(|j| driver.lambda_at(j)).fold(0.0, f64::max);
    let (_, b5) = contraction_constants(a, &cfg.coeff, lambda, radius)?;
    let window = y1.t_end() - y1.t_start();
    let ceiling = b5 * window;
    Ok(ContractionProbe {
        ratio,
        ceiling,
        window,
        b5,
        within: ratio <= ceiling * (1.0 + CONTRACTION_SLACK),
    })
}

/// Random smooth field on `[t0, t1] × [0, 1]` scaled to `‖Y‖_{α,∞} = radius·u`,
/// `u ∈ [0.05, 1]`.
pub fn random_ball_field(
    rng: &mut ChaCha8Rng,
    t0: f64,
    t1: f64,
    m: usize,
    n: usize,
    alpha: crate::FractionalOrder,
    radius: f64,
) -> Result<SpaceTimeField> {
    let a: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let b: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let span = t1 - t0;
    let z = SpaceTimeField::from_fn(t0, t1, m, n, |t, x| {
        let s = (t - t0) / span;
        let mut v = a[0] + b[0] * s;
        for k in 1..5 {
            v += (a[k] + b[k] * s) * (k as f64 * std::f64::consts::PI * x).sin() / k as f64;
        }
        v
    })?;
    let norm = norm_alpha_infty(&z, alpha);
    let u: f64 = rng.random_range(0.05..=1.0);
    Ok(z.map(|v| v * u * radius / norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallCheck {
    pub r1: f64,
    pub t1: f64,
    pub window: f64,
    pub steps: usize,
    pub samples: usize,
    pub violations: usize,
    /// `min (R₁ − ‖F(Y)‖_{α,∞})`.
    pub worst_margin: f64,
    pub holds: bool,
}

/// Samples `Y` in `B_{R₁}` on `[0, T₁]` (the flat extension of `φ` first)
/// and checks `‖F(Y)‖_{α,∞} ≤ R₁`.
pub fn ball_invariance_check(
    cfg: &SolverConfig,
    driver: &DrivingField,
    r1: f64,
    samples: usize,
    seed: u64,
) -> Result<BallCheck> {
    let a = cfg.alpha;
    let c = compute_constants(a, &cfg.coeff, driver.lambda(), cfg.phi_norm(), r1, cfg.horizon)?;
    let g = driver.field();
    let steps = ((c.t1 / g.dt()) * (1.0 + 1e-12)).floor() as usize;
    let steps = steps.min(g.m());
    if steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "time step {} exceeds T1 = {}",
            g.dt(),
            c.t1
        )));
    }
    let t_end = g.time(steps);
    let op = FixedPointOperator::new(&cfg.phi, &cfg.coeff, driver, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_margin = f64::INFINITY;
    let mut violations = 0;
    for s in 0..samples.max(1) {
        let y = if s == 0 {
            SpaceTimeField::flat(0.0, t_end, steps, &cfg.phi)?
        } else {
            random_ball_field(&mut rng, 0.0, t_end, steps, g.n(), a, r1)?
        };
        let norm = norm_alpha_infty(&op.apply(&y)?, a);
        worst_margin = worst_margin.min(r1 - norm);
        if norm > r1 * (1.0 + BOUND_SLACK) {
            violations += 1;
        }
    }
    Ok(BallCheck {
        r1,
        t1: c.t1,
        window: t_end,
        steps,
        samples: samples.max(1),
        violations,
        worst_margin,
        holds: violations == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallVerdict {
    pub k: f64,
    pub phi_norm: f64,
    pub nodes: usize,
    /// Violations of the envelope `‖φ‖e^{Ct} + (B/C)(e^{Ct} − 1)`.
    pub violations: usize,
    pub worst_margin: f64,
    pub holds: bool,
    /// `‖φ‖_{α,∞} ≥ 1`, where `‖φ‖e^{Kt}` is itself a valid bound.
    pub exponential_applicable: bool,
    pub exponential_violations: usize,
    pub exponential_worst_margin: f64,
    pub exponential_holds: bool,
    /// `‖Y(t_j)‖_{α,∞}` at every time node.
    pub norms: Vec<f64>,
}

impl GronwallVerdict {
    pub(crate) fn empty() -> Self {
        Self {
            k: 0.0,
            phi_norm: 0.0,
            nodes: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            holds: true,
            exponential_applicable: false,
            exponential_violations: 0,
            exponential_worst_margin: f64::INFINITY,
            exponential_holds: true,
            norms: Vec::new(),
        }
    }
}

/// Compares `‖Y(t_j)‖_{α,∞}` with both Gronwall envelopes at every node.
pub fn gronwall_check(report: &SolverReport, cfg: &SolverConfig, driver: &DrivingField) -> Result<GronwallVerdict> {
    let phi_norm = cfg.phi_norm();
    let c = compute_constants(cfg.alpha, &cfg.coeff, driver.lambda(), phi_norm, default_r1(phi_norm), cfg.horizon)?;
    let y = &report.solution;
    let norms = norm_alpha_infty_per_slice(y, cfg.alpha);
    let mut v = GronwallVerdict {
        k: c.k,
        phi_norm,
        nodes: norms.len(),
        exponential_applicable: phi_norm >= 1.0,
        ..GronwallVerdict::empty()
    };
    for (j, &norm) in norms.iter().enumerate() {
        let t = y.time(j);
        let env = c.envelope(t);
        v.worst_margin = v.worst_margin.min(env - norm);
        if norm > env * (1.0 + BOUND_SLACK) {
            v.violations += 1;
        }
        let exponential = c.exponential_envelope(t);
        v.exponential_worst_margin = v.exponential_worst_margin.min(exponential - norm);
        if norm > exponential * (1.0 + BOUND_SLACK) {
            v.exponential_violations += 1;
        }
    }
    v.holds = v.violations == 0;
    v.exponential_holds = v.exponential_violations == 0;
    v.norms = norms;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrupleVerdict {
    pub radius: f64,
    pub m1: f64,
    pub m_n: f64,
    pub trials: usize,
    pub violations: usize,
    /// `min (rhs − lhs)`.
    pub worst_slack: f64,
    pub holds: bool,
}

impl QuadrupleVerdict {
    pub(crate) fn empty() -> Self {
        Self {
            radius: 0.0,
            m1: 0.0,
            m_n: 0.0,
            trials: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            holds: true,
        }
    }
}

/// `|h(X₁) − h(X₂) − h(X₃) + h(X₄)| ≤ M₁|X₁ − X₂ − X₃ + X₄|
/// + M_N|X₁ − X₃|(|X₁ − X₂| + |X₃ − X₄|)` on uniform quadruples in `[−N, N]`.
pub fn quadruple_inequality_check(
    h: &Coefficient,
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<QuadrupleVerdict> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    h.validate()?;
    let (m1, m_n) = (h.m1(), h.m_n(radius));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..trials {
        let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-radius..=radius));
        let lhs = (h.eval(x[0]) - h.eval(x[1]) - h.eval(x[2]) + h.eval(x[3])).abs();
        let rhs = m1 * (x[0] - x[1] - x[2] + x[3]).abs()
            + m_n * (x[0] - x[2]).abs() * ((x[0] - x[1]).abs() + (x[2] - x[3]).abs());
        worst_slack = worst_slack.min(rhs - lhs);
        if lhs > rhs + QUADRUPLE_ROUNDING {
            violations += 1;
        }
    }
    Ok(QuadrupleVerdict {
        radius,
        m1,
        m_n,
        trials,
        violations,
        worst_slack,
        holds: violations == 0,
    })
}
