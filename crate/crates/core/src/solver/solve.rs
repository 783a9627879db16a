//! Windowed Picard iteration with continuation across `[0, T]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::DrivingField;
use crate::field::SpaceTimeField;
use crate::frac_calc::FractionalOrder;
use crate::norms::{norm_alpha_infty, slice_norm_alpha_infty};

use super::checks::{gronwall_check, quadruple_inequality_check, GronwallVerdict, QuadrupleVerdict};
use super::coefficient::Coefficient;
use super::constants::{compute_constants, default_r1, ProofConstants};
use super::operator::FixedPointOperator;

/// Quadruples drawn for the spot check attached to every report.
pub const QUADRUPLE_SPOT_TRIALS: usize = 1000;

/// Slack on contraction ratios against `b⁽⁵⁾·len`.
pub const CONTRACTION_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// Windows of `floor(T₀/Δt)` steps, recomputed per window.
    Theoretical,
    /// Start from the theoretical length and double or halve on the measured
    /// contraction ratio.
    Adaptive,
}

/// Starting point of the Picard iteration in every window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialGuess {
    /// The window's initial slice, constant in time.
    Flat,
    /// Flat plus `amplitude·sin(πξ)` at every time node.
    Shifted { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: FractionalOrder,
    pub hurst: f64,
    pub m: usize,
    pub n: usize,
    pub horizon: f64,
    pub phi: Vec<f64>,
    pub coeff: Coefficient,
    pub tol: f64,
    pub max_iter: usize,
    pub window_policy: WindowPolicy,
    pub initial_guess: InitialGuess,
    /// Seed of the quadruple spot check.
    pub check_seed: u64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.alpha.check_solver_range(self.hurst)?;
        self.coeff.validate()?;
        if self.m < 1 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::GridTooSmall(self.n));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if self.phi.len() != self.n + 1 {
            return Err(Error::GridMismatch(format!(
                "phi has {} values, grid has {} nodes",
                self.phi.len(),
                self.n + 1
            )));
        }
        if let Some(i) = self.phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteNode(i));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.m as f64
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn phi_norm(&self) -> f64 {
        slice_norm_alpha_infty(&self.phi, self.h(), self.alpha.value())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRecord {
    pub index: usize,
    pub start_index: usize,
    pub steps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// Largest ratio of consecutive residuals above the rounding floor.
    pub contraction_ratio: f64,
    /// `b⁽⁵⁾·(t_end − t_start)`.
    pub contraction_ceiling: f64,
    /// Largest `‖F(Y_k)‖_{α,∞}` over the iterates.
    pub max_iterate_norm: f64,
    /// Windows halved after non-convergence under the adaptive policy.
    pub retries: usize,
    pub constants: ProofConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallVerdict {
    pub checked_windows: usize,
    pub violations: usize,
    /// `min (R₁ − max ‖F(Y_k)‖)` over checked windows.
    pub worst_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionVerdict {
    pub checked_windows: usize,
    pub violations: usize,
    /// `max ratio/(b⁽⁵⁾·len)` over checked windows.
    pub worst_fraction: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub ball: BallVerdict,
    pub contraction: ContractionVerdict,
    pub gronwall: GronwallVerdict,
    pub quadruple: QuadrupleVerdict,
}

impl Verdicts {
    pub fn all_hold(&self) -> bool {
        self.ball.holds && self.contraction.holds && self.gronwall.holds && self.quadruple.holds
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    #[serde(skip)]
    pub solution: SpaceTimeField,
    /// Constants on `[0, T]` with `Λ` the sup over all time nodes.
    pub constants: ProofConstants,
    pub lambda: f64,
    pub windows: Vec<WindowRecord>,
    pub total_iterations: usize,
    /// Iterations of the final full-horizon pass.
    pub polish_iterations: usize,
    /// `‖F(Y) − Y‖_{α,∞}` of the returned solution on `[0, T]`.
    pub residual: f64,
    pub verdicts: Verdicts,
}

struct PicardOutcome {
    solution: SpaceTimeField,
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
    max_ratio: f64,
    max_iterate_norm: f64,
}

/// Ratios below this multiple of the iterate scale are rounding noise.
const RATIO_FLOOR: f64 = 1e-10;

fn picard(
    op: &FixedPointOperator<'_>,
    start: SpaceTimeField,
    alpha: FractionalOrder,
    tol: f64,
    max_iter: usize,
    window: usize,
) -> Result<PicardOutcome> {
    let mut y = start;
    let mut history = Vec::new();
    let mut max_ratio = 0.0f64;
    let mut max_iterate_norm = 0.0f64;
    for it in 1..=max_iter {
        let fy = op.apply(&y)?;
        let norm_fy = norm_alpha_infty(&fy, alpha);
        max_iterate_norm = max_iterate_norm.max(norm_fy);
        let r = norm_alpha_infty(&fy.sub(&y)?, alpha);
        if let Some(&prev) = history.last() {
            if prev > RATIO_FLOOR * norm_fy.max(1.0) {
                max_ratio = max_ratio.max(r / prev);
            }
        }
        history.push(r);
        if r <= tol {
            return Ok(PicardOutcome {
                solution: y,
                iterations: it,
                residual: r,
                history,
                max_ratio,
                max_iterate_norm,
            });
        }
        y = fy;
    }
    Err(Error::NonConvergence {
        window,
        iterations: max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

fn initial_field(guess: InitialGuess, t0: f64, t1: f64, steps: usize, phi: &[f64]) -> Result<SpaceTimeField> {
    match guess {
        InitialGuess::Flat => SpaceTimeField::flat(t0, t1, steps, phi),
        InitialGuess::Shifted { amplitude } => {
            let n = phi.len() - 1;
            let shifted: Vec<f64> = phi
                .iter()
                .enumerate()
                .map(|(i, p)| p + amplitude * (std::f64::consts::PI * i as f64 / n as f64).sin())
                .collect();
            SpaceTimeField::flat(t0, t1, steps, &shifted)
        }
    }
}

fn check_driver(cfg: &SolverConfig, driver: &DrivingField) -> Result<()> {
    let g = driver.field();
    if g.m() != cfg.m || g.n() != cfg.n || g.t_start() != 0.0 || (g.t_end() - cfg.horizon).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "driver grid (m = {}, n = {}, T = {}) does not match the solver grid (m = {}, n = {}, T = {})",
            g.m(),
            g.n(),
            g.t_end(),
            cfg.m,
            cfg.n,
            cfg.horizon
        )));
    }
    if driver.alpha() != cfg.alpha {
        return Err(Error::InvalidParameter("driver tables were built for another alpha".into()));
    }
    Ok(())
}

/// Solves `Y = F(Y)` on `[0, T]` window by window, then runs Picard on the
/// full horizon from the stitched field until the global residual is at most
/// `tol`.
pub fn solve(cfg: &SolverConfig, driver: &DrivingField) -> Result<SolverReport> {
    cfg.validate()?;
    check_driver(cfg, driver)?;
    let g = driver.field();
    let dt = cfg.dt();
    let h = cfg.h();
    let a = cfg.alpha;
    let mut slices: Vec<Vec<f64>> = vec![cfg.phi.clone()];
    let mut windows: Vec<WindowRecord> = Vec::new();
    let mut next_steps: Option<usize> = None;
    let mut j = 0;
    while j < cfg.m {
        let phi_w = slices[j].clone();
        let phi_norm = slice_norm_alpha_infty(&phi_w, h, a.value());
        let r1 = default_r1(phi_norm);
        let lambda = driver.lambda_from(j);
        let constants = compute_constants(a, &cfg.coeff, lambda, phi_norm, r1, cfg.horizon - g.time(j))?;
        let theory_steps = (constants.t0 / dt * (1.0 + 1e-12)).floor() as usize;
        let remaining = cfg.m - j;
        let mut steps = match cfg.window_policy {
            WindowPolicy::Theoretical => {
                if theory_steps == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "time step {dt} exceeds T0 = {} in window {}; refine the time grid or use the adaptive policy",
                        constants.t0,
                        windows.len()
                    )));
                }
                theory_steps.min(remaining)
            }
            WindowPolicy::Adaptive => next_steps.unwrap_or(theory_steps.max(1)).clamp(1, remaining),
        };
        let mut retries = 0;
        let outcome = loop {
            let op = FixedPointOperator::new(&phi_w, &cfg.coeff, driver, j);
            let start = initial_field(cfg.initial_guess, g.time(j), g.time(j + steps), steps, &phi_w)?;
            match picard(&op, start, a, cfg.tol, cfg.max_iter, windows.len()) {
                Ok(o) => break o,
                Err(Error::NonConvergence { .. }) if cfg.window_policy == WindowPolicy::Adaptive && steps > 1 => {
                    steps /= 2;
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if cfg.window_policy == WindowPolicy::Adaptive {
            next_steps = Some(if outcome.max_ratio < 0.25 {
                steps * 2
            } else if outcome.max_ratio > 0.75 {
                (steps / 2).max(1)
            } else {
                steps
            });
        }
        let len = g.time(j + steps) - g.time(j);
        windows.push(WindowRecord {
            index: windows.len(),
            start_index: j,
            steps,
            t_start: g.time(j),
            t_end: g.time(j + steps),
            iterations: outcome.iterations,
            residual: outcome.residual,
            residual_history: outcome.history,
            contraction_ratio: outcome.max_ratio,
            contraction_ceiling: constants.b5 * len,
            max_iterate_norm: outcome.max_iterate_norm,
            retries,
            constants,
        });
        for k in 1..=steps {
            slices.push(outcome.solution.slice(k).to_vec());
        }
        j += steps;
    }

    let stitched = SpaceTimeField::from_slices(0.0, cfg.horizon, &slices)?;
    let global = FixedPointOperator::new(&cfg.phi, &cfg.coeff, driver, 0);
    let polished = picard(&global, stitched, a, cfg.tol, cfg.max_iter, windows.len())?;

    let phi_norm = cfg.phi_norm();
    let constants = compute_constants(
        a,
        &cfg.coeff,
        driver.lambda(),
        phi_norm,
        default_r1(phi_norm),
        cfg.horizon,
    )?;
    let total_iterations = windows.iter().map(|w| w.iterations).sum::<usize>() + polished.iterations;
    let mut report = SolverReport {
        solution: polished.solution,
        constants,
        lambda: driver.lambda(),
        windows,
        total_iterations,
        polish_iterations: polished.iterations,
        residual: polished.residual,
        verdicts: Verdicts {
            ball: BallVerdict {
                checked_windows: 0,
                violations: 0,
                worst_margin: f64::INFINITY,
                holds: true,
            },
            contraction: ContractionVerdict {
                checked_windows: 0,
                violations: 0,
                worst_fraction: 0.0,
                holds: true,
            },
            gronwall: GronwallVerdict::empty(),
            quadruple: QuadrupleVerdict::empty(),
        },
    };
    report.verdicts = verdicts(&report, cfg, driver)?;
    Ok(report)
}

fn verdicts(report: &SolverReport, cfg: &SolverConfig, driver: &DrivingField) -> Result<Verdicts> {
    let mut ball = BallVerdict {
        checked_windows: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        holds: true,
    };
    let mut contraction = ContractionVerdict {
        checked_windows: 0,
        violations: 0,
        worst_fraction: 0.0,
        holds: true,
    };
    let mut radius = 0.0f64;
    for w in &report.windows {
        let c = &w.constants;
        let len = w.t_end - w.t_start;
        radius = radius.max(c.r1);
        if len <= c.t1 * (1.0 + 1e-12) {
            ball.checked_windows += 1;
            let margin = c.r1 - w.max_iterate_norm;
            ball.worst_margin = ball.worst_margin.min(margin);
            if w.max_iterate_norm > c.r1 * (1.0 + crate::stieltjes::BOUND_SLACK) {
                ball.violations += 1;
            }
        }
        if len <= c.t2 * (1.0 + 1e-12) && w.contraction_ratio > 0.0 {
            contraction.checked_windows += 1;
            let ceiling = w.contraction_ceiling * (1.0 + CONTRACTION_SLACK);
            contraction.worst_fraction = contraction.worst_fraction.max(w.contraction_ratio / w.contraction_ceiling);
            if w.contraction_ratio > ceiling {
                contraction.violations += 1;
            }
        }
    }
    ball.holds = ball.violations == 0;
    contraction.holds = contraction.violations == 0;
    Ok(Verdicts {
        ball,
        contraction,
        gronwall: gronwall_check(report, cfg, driver)?,
        quadruple: quadruple_inequality_check(&cfg.coeff, radius.max(1.0), QUADRUPLE_SPOT_TRIALS, cfg.check_seed)?,
    })
}
