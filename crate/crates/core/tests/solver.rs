use fracfbm_core::fbm::{driving_field, DriverStub, DrivingField, FbmConfig, TimeModel};
use fracfbm_core::norms::norm_alpha_infty;
use fracfbm_core::solver::*;
use fracfbm_core::{Error, FractionalOrder, SpaceTimeField};

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn sine_phi(n: usize, amp: f64) -> Vec<f64> {
    (0..=n)
        .map(|i| amp * (std::f64::consts::PI * i as f64 / n as f64).sin())
        .collect()
}

fn config(m: usize, n: usize, horizon: f64, phi: Vec<f64>, coeff: Coefficient) -> SolverConfig {
    SolverConfig {
        alpha: order(0.3),
        hurst: 0.75,
        m,
        n,
        horizon,
        phi,
        coeff,
        tol: 1e-10,
        max_iter: 200,
        window_policy: WindowPolicy::Theoretical,
        initial_guess: InitialGuess::Flat,
        check_seed: 7,
    }
}

/// Picard iteration of `Y = φ + ∫∫ tanh(Y) g'(γ) dγ ds` with trapezoid rules
/// in `γ` and `s`; `g' = ξ` for the quadratic stub.
fn classical_reference(m: usize, n: usize, horizon: f64) -> Vec<Vec<f64>> {
    let phi = sine_phi(n, 0.5);
    let h = 1.0 / n as f64;
    let dt = horizon / m as f64;
    let mut y = vec![phi.clone(); m + 1];
    for _ in 0..200 {
        let inner: Vec<Vec<f64>> = y
            .iter()
            .map(|s| {
                let mut acc = 0.0;
                let mut out = vec![0.0; n + 1];
                for i in 1..=n {
                    let a = s[i - 1].tanh() * ((i - 1) as f64 * h);
                    let b = s[i].tanh() * (i as f64 * h);
                    acc += 0.5 * h * (a + b);
                    out[i] = acc;
                }
                out
            })
            .collect();
        let mut next = vec![phi.clone()];
        let mut acc = vec![0.0; n + 1];
        for j in 1..=m {
            for i in 0..=n {
                acc[i] += 0.5 * dt * (inner[j - 1][i] + inner[j][i]);
            }
            next.push(phi.iter().zip(&acc).map(|(p, a)| p + a).collect());
        }
        let diff = next
            .iter()
            .flatten()
            .zip(y.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        y = next;
        if diff < 1e-14 {
            break;
        }
    }
    y
}

#[test]
fn zero_coefficient_keeps_phi() {
    let n = 64;
    let cfg = config(16, n, 0.5, sine_phi(n, 0.7), Coefficient::Zero);
    let g = DrivingField::stub(DriverStub::Sine, 16, n, 0.5, cfg.alpha).unwrap();
    let r = solve(&cfg, &g).unwrap();
    for s in r.solution.slices() {
        assert_eq!(s, &cfg.phi[..]);
    }
    assert!(r.windows.iter().all(|w| w.iterations == 1));
    assert!(r.verdicts.all_hold());
}

#[test]
fn constant_coefficient_linear_driver_closed_form() {
    let n = 64;
    let cfg = config(20, n, 1.0, vec![0.0; n + 1], Coefficient::Const { value: 1.0 });
    let g = DrivingField::stub(DriverStub::Linear, 20, n, 1.0, cfg.alpha).unwrap();
    let r = solve(&cfg, &g).unwrap();
    let y = &r.solution;
    let err = (0..=20)
        .flat_map(|j| (0..=n).map(move |i| (j, i)))
        .map(|(j, i)| (y.get(j, i) - y.time(j) * y.xi(i)).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-12, "{err}");
    assert!(r.residual <= cfg.tol);
    // φ = 0 with A ≡ 1 leaves the exponential envelope from 0 behind
    assert!(!r.verdicts.gronwall.exponential_applicable);
    assert!(!r.verdicts.gronwall.exponential_holds);
    assert!(r.verdicts.gronwall.holds);
}

#[test]
fn tanh_matches_classical_reference() {
    let (m, n, horizon) = (64, 128, 0.5);
    let cfg = config(m, n, horizon, sine_phi(n, 0.5), Coefficient::Tanh { scale: 1.0 });
    let g = DrivingField::stub(DriverStub::Polynomial, m, n, horizon, cfg.alpha).unwrap();
    let r = solve(&cfg, &g).unwrap();
    let reference = classical_reference(4 * m, 4 * n, horizon);
    let mut err = 0.0f64;
    for j in 0..=m {
        for i in 0..=n {
            err = err.max((r.solution.get(j, i) - reference[4 * j][4 * i]).abs());
        }
    }
    eprintln!("reference sup error {err:e}");
    assert!(err <= 5e-3, "sup error {err}");
    assert!(r.verdicts.all_hold(), "{:?}", r.verdicts);
}

#[test]
fn distinct_initial_guesses_agree() {
    let (m, n) = (32, 128);
    let a = order(0.3);
    let g = driving_field(
        &FbmConfig {
            hurst: 0.75,
            n,
            m,
            horizon: 0.5,
            seed: 21,
            time_model: TimeModel::Frozen,
        },
        a,
    )
    .unwrap();
    let mut cfg = config(m, n, 0.5, sine_phi(n, 0.5), Coefficient::Tanh { scale: 1.0 });
    cfg.window_policy = WindowPolicy::Adaptive;
    let flat = solve(&cfg, &g).unwrap();
    cfg.initial_guess = InitialGuess::Shifted { amplitude: 0.3 };
    let shifted = solve(&cfg, &g).unwrap();
    let gap = norm_alpha_infty(&flat.solution.sub(&shifted.solution).unwrap(), a);
    assert!(gap <= 10.0 * cfg.tol, "{gap}");
}

#[test]
fn grid_refinement_converges() {
    let m = 64;
    let mut solutions = Vec::new();
    for n in [128, 256, 512, 1024] {
        let cfg = config(m, n, 0.5, sine_phi(n, 0.5), Coefficient::Tanh { scale: 1.0 });
        let g = DrivingField::stub(DriverStub::Polynomial, m, n, 0.5, cfg.alpha).unwrap();
        solutions.push(solve(&cfg, &g).unwrap().solution);
    }
    let gaps: Vec<f64> = solutions
        .windows(2)
        .map(|w| {
            let (c, f) = (&w[0], &w[1]);
            let mut e = 0.0f64;
            for j in 0..=m {
                for i in 0..=c.n() {
                    e = e.max((c.get(j, i) - f.get(j, 2 * i)).abs());
                }
            }
            e
        })
        .collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
}

#[test]
fn continuation_covers_unit_horizon_with_fbm_driver() {
    let (m, n) = (2000, 128);
    let a = order(0.3);
    let g = driving_field(
        &FbmConfig {
            hurst: 0.75,
            n,
            m,
            horizon: 1.0,
            seed: 4,
            time_model: TimeModel::Frozen,
        },
        a,
    )
    .unwrap();
    let cfg = config(m, n, 1.0, sine_phi(n, 1.0), Coefficient::Tanh { scale: 1.0 });
    let r = solve(&cfg, &g).unwrap();
    eprintln!("windows {} polish {} T0 {} gronwall margin {}", r.windows.len(), r.polish_iterations, r.windows[0].constants.t0, r.verdicts.gronwall.worst_margin);
    let last = r.windows.last().unwrap();
    assert_eq!(last.t_end, 1.0);
    assert!(r.windows.len() > 5);
    assert!(r.windows.iter().all(|w| w.t_end - w.t_start <= w.constants.t0 * (1.0 + 1e-12)));
    assert!(r.residual <= cfg.tol);
    assert!(r.verdicts.all_hold(), "{:?}", r.verdicts);
}

#[test]
fn theoretical_policy_rejects_coarse_time_grid() {
    let n = 64;
    let cfg = config(2, n, 1.0, sine_phi(n, 1.0), Coefficient::Tanh { scale: 1.0 });
    let g = DrivingField::stub(DriverStub::Linear, 2, n, 1.0, cfg.alpha).unwrap();
    assert!(matches!(solve(&cfg, &g), Err(Error::InvalidParameter(_))));
}

#[test]
fn non_convergence_carries_history() {
    let n = 64;
    let mut cfg = config(8, n, 0.2, sine_phi(n, 1.0), Coefficient::Tanh { scale: 1.0 });
    cfg.max_iter = 2;
    cfg.tol = 1e-15;
    cfg.window_policy = WindowPolicy::Adaptive;
    let g = DrivingField::stub(DriverStub::Sine, 8, n, 0.2, cfg.alpha).unwrap();
    match solve(&cfg, &g) {
        Err(Error::NonConvergence { history, iterations, .. }) => {
            assert_eq!(iterations, 2);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn config_outside_admissible_window_is_rejected() {
    let n = 32;
    let mut cfg = config(4, n, 0.2, vec![0.0; n + 1], Coefficient::Zero);
    cfg.alpha = order(0.2);
    let g = DrivingField::stub(DriverStub::Linear, 4, n, 0.2, cfg.alpha).unwrap();
    assert!(matches!(solve(&cfg, &g), Err(Error::OrderOutOfRange { .. })));
}

#[test]
fn contraction_probe_properties() {
    let (m, n) = (8, 64);
    let a = order(0.3);
    let cfg = config(m, n, 0.02, sine_phi(n, 0.5), Coefficient::Tanh { scale: 1.0 });
    let g = DrivingField::stub(DriverStub::Polynomial, m, n, 0.02, a).unwrap();
    let y1 = SpaceTimeField::from_fn(0.0, 0.02, m, n, |t, x| 0.3 * (3.0 * x).sin() + t).unwrap();
    assert!(contraction_probe(&y1, &y1, &cfg, &g, 2.0).is_err());
    let c = Coefficient::Const { value: 0.7 };
    let cfg_c = SolverConfig { coeff: c, ..cfg.clone() };
    let y2 = y1.map(|v| v + 0.25);
    let p = contraction_probe(&y1, &y2, &cfg_c, &g, 2.0).unwrap();
    assert_eq!(p.ratio, 0.0);
    let y3 = SpaceTimeField::from_fn(0.0, 0.02, m, n, |_, x| 0.2 * x * x).unwrap();
    let full = contraction_probe(&y1, &y3, &cfg, &g, 2.0).unwrap();
    let half = contraction_probe(
        &y1.time_window(0, m / 2).unwrap(),
        &y3.time_window(0, m / 2).unwrap(),
        &cfg,
        &g,
        2.0,
    )
    .unwrap();
    let slope = full.ratio / half.ratio;
    assert!((slope - 2.0).abs() <= 0.4, "{slope}");
    assert!(full.within && half.within);
}

#[test]
fn solve_is_deterministic() {
    let (m, n) = (16, 64);
    let a = order(0.3);
    let fc = FbmConfig {
        hurst: 0.75,
        n,
        m,
        horizon: 0.3,
        seed: 77,
        time_model: TimeModel::Sheet { hurst_t: 0.95 },
    };
    let cfg = config(m, n, 0.3, sine_phi(n, 1.0), Coefficient::GaussianBump { center: 0.2, width: 0.8, amplitude: 1.0 });
    let run = || {
        let g = driving_field(&fc, a).unwrap();
        solve(&SolverConfig { window_policy: WindowPolicy::Adaptive, ..cfg.clone() }, &g).unwrap()
    };
    let (r1, r2) = (run(), run());
    assert_eq!(r1.solution, r2.solution);
    assert_eq!(r1.windows, r2.windows);
}
