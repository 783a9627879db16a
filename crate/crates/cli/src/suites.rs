//! Verification suites run by `fracfbm verify`.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fracfbm_core::fbm::{driving_field, fbm_path, split_seed, DrivingField, FbmConfig, TimeModel};
use fracfbm_core::solver::{
    ball_invariance_check, compute_constants, contraction_probe, default_r1, quadruple_inequality_check,
    random_ball_field, solve, Coefficient, InitialGuess, SolverConfig, WindowPolicy,
};
use fracfbm_core::stieltjes::{
    integral_bound_check, pathwise_integral_bound_check, stieltjes_indicator_consistency, stieltjes_integral,
};
use fracfbm_core::{FractionalOrder, GridFunction, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bounds,
    Contraction,
    Gronwall,
    /// Also accepted as `prop2`.
    #[value(alias = "prop2")]
    Quadruple,
    Stieltjes,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Self::All => vec![Self::Bounds, Self::Contraction, Self::Gronwall, Self::Quadruple, Self::Stieltjes],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Smallest slack over all cases; negative on violation.
    pub worst_margin: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(suite: Suite, name: &str, cases: usize, violations: usize, worst_margin: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            cases,
            violations,
            worst_margin,
            passed: violations == 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

const ALPHA: f64 = 0.3;
const HURST: f64 = 0.75;

fn order() -> FractionalOrder {
    FractionalOrder::new(ALPHA).expect("fixed order is valid")
}

pub fn run(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for s in suite.members() {
        let seed = split_seed(seed, s as u64);
        match s {
            Suite::Bounds => {
                checks.push(integral_bound(seed)?);
                checks.push(pathwise(seed)?);
                checks.push(ball(seed)?);
            }
            Suite::Contraction => checks.push(contraction(seed)?),
            Suite::Gronwall => checks.extend(gronwall(seed)?),
            Suite::Quadruple => checks.extend(quadruple(seed)?),
            Suite::Stieltjes => checks.extend(stieltjes()?),
            Suite::All => unreachable!(),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        suite,
        seed,
        checks,
        passed,
    })
}

fn random_smooth(rng: &mut ChaCha8Rng, n: usize) -> Result<GridFunction> {
    let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
    GridFunction::from_fn(0.0, 1.0, n, |x| {
        c[0] + c[1] * x + c[2] * (3.0 * x).sin() + c[3] * (7.0 * x).cos()
    })
}

fn fbm_driver(m: usize, n: usize, horizon: f64, seed: u64) -> Result<DrivingField> {
    let cfg = FbmConfig {
        hurst: HURST,
        n,
        m,
        horizon,
        seed,
        time_model: TimeModel::Frozen,
    };
    driving_field(&cfg, order())
}

fn sine_config(m: usize, n: usize, horizon: f64, amplitude: f64, offset: f64) -> SolverConfig {
    SolverConfig {
        alpha: order(),
        hurst: HURST,
        m,
        n,
        horizon,
        phi: (0..=n)
            .map(|i| offset + amplitude * (std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect(),
        coeff: Coefficient::Tanh { scale: 1.0 },
        tol: 1e-10,
        max_iter: 200,
        window_policy: WindowPolicy::Theoretical,
        initial_guess: InitialGuess::Flat,
        check_seed: 0,
    }
}

fn integral_bound(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for k in 0..100 {
        let g = fbm_path(HURST, 256, split_seed(seed, k))?;
        let f = random_smooth(&mut rng, 256)?;
        let b = integral_bound_check(&f, &g, order())?;
        violations += usize::from(!b.holds);
        worst = worst.min(b.margin() / b.rhs);
    }
    Ok(CheckResult::new(Suite::Bounds, "integral-bound", 100, violations, worst))
}

fn pathwise(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for k in 0..20 {
        let d = fbm_driver(1, 128, 1.0, split_seed(seed ^ 1, k))?;
        let u = random_smooth(&mut rng, 128)?;
        let b = pathwise_integral_bound_check(u.values(), &d, 0)?;
        violations += usize::from(!b.holds);
        worst = worst.min(b.margin() / b.rhs);
    }
    Ok(CheckResult::new(Suite::Bounds, "pathwise-integral-bound", 20, violations, worst))
}

fn ball(seed: u64) -> Result<CheckResult> {
    let n = 64;
    let probe = sine_config(1, n, 1.0, 0.8, 0.0);
    let d0 = fbm_driver(1, n, 1.0, seed)?;
    let r1 = default_r1(probe.phi_norm());
    let c = compute_constants(probe.alpha, &probe.coeff, d0.lambda(), probe.phi_norm(), r1, 1.0)?;
    let m = 8;
    let d = fbm_driver(m, n, c.t1, seed)?;
    let cfg = sine_config(m, n, c.t1, 0.8, 0.0);
    let v = ball_invariance_check(&cfg, &d, r1, 100, seed)?;
    Ok(CheckResult::new(Suite::Bounds, "ball-invariance", v.samples, v.violations, v.worst_margin))
}

fn contraction(seed: u64) -> Result<CheckResult> {
    let n = 64;
    let cfg0 = sine_config(1, n, 1.0, 0.8, 0.0);
    let d0 = fbm_driver(1, n, 1.0, seed)?;
    let radius = default_r1(cfg0.phi_norm());
    let c = compute_constants(cfg0.alpha, &cfg0.coeff, d0.lambda(), cfg0.phi_norm(), radius, 1.0)?;
    let m = 8;
    let d = fbm_driver(m, n, c.t2, seed)?;
    let cfg = sine_config(m, n, c.t2, 0.8, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for _ in 0..100 {
        let y1 = random_ball_field(&mut rng, 0.0, c.t2, m, n, cfg.alpha, radius)?;
        let y2 = random_ball_field(&mut rng, 0.0, c.t2, m, n, cfg.alpha, radius)?;
        let p = contraction_probe(&y1, &y2, &cfg, &d, radius)?;
        violations += usize::from(!p.within);
        worst = worst.min(1.0 - p.ratio / p.ceiling);
    }
    Ok(CheckResult::new(Suite::Contraction, "contraction-ratio", 100, violations, worst))
}

fn gronwall(seed: u64) -> Result<Vec<CheckResult>> {
    let (m, n, horizon) = (400, 64, 0.2);
    let mut corrected = (0, f64::INFINITY);
    let mut exponential = (0, f64::INFINITY);
    for k in 0..20 {
        let d = fbm_driver(m, n, horizon, split_seed(seed, k))?;
        let cfg = sine_config(m, n, horizon, 0.8, 1.0);
        let v = solve(&cfg, &d)?.verdicts.gronwall;
        corrected.0 += usize::from(!v.holds);
        corrected.1 = corrected.1.min(v.worst_margin);
        exponential.0 += usize::from(!(v.exponential_applicable && v.exponential_holds));
        exponential.1 = exponential.1.min(v.exponential_worst_margin);
    }
    Ok(vec![
        CheckResult::new(Suite::Gronwall, "envelope", 20, corrected.0, corrected.1),
        CheckResult::new(Suite::Gronwall, "exponential-envelope", 20, exponential.0, exponential.1),
    ])
}

fn quadruple(seed: u64) -> Result<Vec<CheckResult>> {
    let coefficients = [
        ("tanh", Coefficient::Tanh { scale: 1.0 }),
        (
            "gaussian-bump",
            Coefficient::GaussianBump {
                center: 0.3,
                width: 0.6,
                amplitude: 1.5,
            },
        ),
        ("smoothed-biot-savart", Coefficient::SmoothedBiotSavart { epsilon: 0.3 }),
    ];
    coefficients
        .iter()
        .enumerate()
        .map(|(k, (name, h))| {
            let v = quadruple_inequality_check(h, 2.0, 10_000, split_seed(seed, k as u64))?;
            Ok(CheckResult::new(
                Suite::Quadruple,
                &format!("quadruple-{name}"),
                v.trials,
                v.violations,
                v.worst_slack,
            ))
        })
        .collect()
}

type Pair = (fn(f64) -> f64, fn(f64) -> f64);

const PAIRS: [Pair; 5] = [
    (f64::sin, |x| x * x),
    (|x| x, |x| x),
    (f64::exp, f64::sin),
    (|x| (2.0 * x).cos(), |x| x * x * x),
    (|x| 1.0 / (1.0 + x), |x| x.exp() - 1.0),
];

fn midpoint_sum(f: fn(f64) -> f64, g: fn(f64) -> f64, c: f64, d: f64, n: usize) -> f64 {
    let h = (d - c) / n as f64;
    (0..n)
        .map(|k| {
            let x0 = c + k as f64 * h;
            f(x0 + 0.5 * h) * (g(x0 + h) - g(x0))
        })
        .sum()
}

fn stieltjes() -> Result<Vec<CheckResult>> {
    let a = order();
    let (mut rs, mut ind) = ((0, f64::INFINITY), (0, f64::INFINITY));
    for (f, g) in PAIRS {
        let fg = GridFunction::from_fn(0.0, 1.0, 2048, f)?;
        let gg = GridFunction::from_fn(0.0, 1.0, 2048, g)?;
        let v = stieltjes_integral(&fg, &gg, a, 0.0, 1.0)?;
        let oracle = midpoint_sum(f, g, 0.0, 1.0, 100_000);
        let slack = 1e-3 - (v - oracle).abs() / oracle.abs();
        rs.0 += usize::from(slack < 0.0);
        rs.1 = rs.1.min(slack);
        let r = stieltjes_indicator_consistency(&fg, &gg, a, 0.25, 0.75)?;
        let slack = 1e-2 - r.gap;
        ind.0 += usize::from(slack < 0.0);
        ind.1 = ind.1.min(slack);
    }
    Ok(vec![
        CheckResult::new(Suite::Stieltjes, "riemann-stieltjes", PAIRS.len(), rs.0, rs.1),
        CheckResult::new(Suite::Stieltjes, "indicator", PAIRS.len(), ind.0, ind.1),
    ])
}
