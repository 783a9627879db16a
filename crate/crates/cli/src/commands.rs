use std::path::Path;

use serde::Serialize;
use serde_json::json;

use fracfbm_core::fbm::{covariance_validator, fbm_path, split_seed, DriverKind};
use fracfbm_core::solver::{solve, SolverReport};
use fracfbm_core::SpaceTimeField;

use crate::config::{DriverModel, SolveConfig};
use crate::output::{config_hash, num, OutDir};
use crate::suites;
use crate::{Cli, CliError, Command};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let out = OutDir::create(cli.out_dir())?;
    match &cli.command {
        Command::Fbm {
            hurst,
            n,
            seed,
            samples,
            validate,
            strict,
        } => fbm(&out, *hurst, *n, *seed, validate.then_some(*samples), *strict),
        Command::Solve { config } => solve_cmd(&out, config),
        Command::Verify { suite, seed } => verify(&out, *suite, *seed),
        Command::Ensemble { config, count, seed } => ensemble(&out, config, *count, *seed),
        Command::Convergence { config, resolutions } => convergence(&out, config, resolutions),
    }
}

fn announce(path: &Path) {
    println!("{}", path.display());
}

fn fbm(out: &OutDir, hurst: f64, n: usize, seed: u64, samples: Option<usize>, strict: bool) -> Result<(), CliError> {
    let hash = config_hash(&json!({"command": "fbm", "hurst": hurst, "n": n, "seed": seed, "samples": samples}));
    let path = fbm_path(hurst, n, seed)?;
    let rows: Vec<Vec<String>> = path.nodes().zip(path.values()).map(|(x, v)| vec![num(x), num(*v)]).collect();
    announce(&out.csv("fbm_path.csv", &hash, &["xi", "value"], &rows)?);
    let Some(samples) = samples else {
        return Ok(());
    };
    let report = covariance_validator(hurst, n, samples, seed)?;
    announce(&out.json("covariance_report.json", &json!({"config_hash": hash, "report": report}))?);
    if strict && !report.passed {
        return Err(CliError::Failure(format!("max |z| = {} exceeds the limit", report.max_abs_z)));
    }
    Ok(())
}

fn solution_rows(y: &SpaceTimeField) -> Vec<Vec<String>> {
    (0..=y.m())
        .flat_map(|j| (0..=y.n()).map(move |i| vec![num(y.time(j)), num(y.xi(i)), num(y.get(j, i))]))
        .collect()
}

#[derive(Serialize)]
struct DriverSummary {
    kind: DriverKind,
    lambda: f64,
    norm: f64,
    time_homogeneous: bool,
}

fn solve_one(cfg: &SolveConfig, n: usize, seed: Option<u64>) -> Result<(SolverReport, DriverSummary), CliError> {
    let solver = cfg.solver_config(n)?;
    let driver = cfg.driver(n, seed)?;
    let report = solve(&solver, &driver)?;
    let summary = DriverSummary {
        kind: driver.kind(),
        lambda: driver.lambda(),
        norm: driver.norm(),
        time_homogeneous: driver.time_homogeneous(),
    };
    Ok((report, summary))
}

fn solve_cmd(out: &OutDir, path: &Path) -> Result<(), CliError> {
    let cfg = SolveConfig::from_file(path)?;
    let hash = config_hash(&cfg);
    let (report, driver) = solve_one(&cfg, cfg.grid.n, None)?;
    announce(&out.csv("solution.csv", &hash, &["t", "xi", "Y"], &solution_rows(&report.solution))?);
    announce(&out.json(
        "report.json",
        &json!({"config_hash": hash, "driver": driver, "report": report}),
    )?);
    if !report.verdicts.all_hold() {
        eprintln!("fracfbm: warning: not every verdict holds, see report.json");
    }
    Ok(())
}

fn verify(out: &OutDir, suite: suites::Suite, seed: u64) -> Result<(), CliError> {
    let hash = config_hash(&json!({"command": "verify", "suite": suite, "seed": seed}));
    let report = suites::run(suite, seed).map_err(|e| CliError::Failure(e.to_string()))?;
    let name = serde_json::to_value(suite)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    announce(&out.json(&format!("verify_{name}.json"), &json!({"config_hash": hash, "report": report}))?);
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Failure(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Debug, Clone, Serialize)]
struct EnsembleRow {
    run: usize,
    seed: u64,
    lambda: Option<f64>,
    sup_norm: Option<f64>,
    iterations: Option<usize>,
    gronwall_margin: Option<f64>,
    status: String,
}

impl EnsembleRow {
    fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            self.run.to_string(),
            self.seed.to_string(),
            opt(self.lambda),
            opt(self.sup_norm),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(self.gronwall_margin),
            self.status.clone(),
        ]
    }

    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn ensemble_row(cfg: &SolveConfig, run: usize, seed: u64) -> EnsembleRow {
    let mut row = EnsembleRow {
        run,
        seed,
        lambda: None,
        sup_norm: None,
        iterations: None,
        gronwall_margin: None,
        status: String::new(),
    };
    match solve_one(cfg, cfg.grid.n, Some(seed)) {
        Ok((report, driver)) => {
            let g = &report.verdicts.gronwall;
            row.lambda = Some(driver.lambda);
            row.sup_norm = Some(report.solution.sup_abs());
            row.iterations = Some(report.total_iterations);
            row.gronwall_margin = Some(g.worst_margin);
            row.status = if g.holds { "ok" } else { "gronwall-violation" }.into();
        }
        Err(CliError::NonConvergence(_)) => row.status = "non-convergence".into(),
        Err(_) => row.status = "error".into(),
    }
    row
}

#[derive(Serialize)]
struct Summary {
    min: f64,
    max: f64,
    mean: f64,
}

fn summarize(values: impl Iterator<Item = f64>) -> Option<Summary> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    Some(Summary {
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: v.iter().sum::<f64>() / v.len() as f64,
    })
}

fn ensemble(out: &OutDir, path: &Path, count: usize, seed: u64) -> Result<(), CliError> {
    let cfg = SolveConfig::from_file(path)?;
    if cfg.driver.model == DriverModel::Stub {
        return Err(CliError::Usage("ensembles need an fbm driver (model frozen or sheet)".into()));
    }
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    // config errors surface once, before any run
    cfg.solver_config(cfg.grid.n)?;
    let hash = config_hash(&json!({"command": "ensemble", "config": cfg, "count": count, "seed": seed}));
    let run = |k: usize| ensemble_row(&cfg, k, split_seed(seed, k as u64));
    #[cfg(feature = "parallel")]
    let mut rows: Vec<EnsembleRow> = {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<EnsembleRow> = (0..count).map(run).collect();
    rows.sort_by_key(|r| (r.seed, r.run));
    let cells: Vec<Vec<String>> = rows.iter().map(EnsembleRow::cells).collect();
    announce(&out.csv(
        "ensemble_summary.csv",
        &hash,
        &["run", "seed", "lambda", "sup_norm", "iterations", "gronwall_margin", "status"],
        &cells,
    )?);
    let good: Vec<&EnsembleRow> = rows.iter().filter(|r| r.ok()).collect();
    let failed: Vec<&EnsembleRow> = rows.iter().filter(|r| !r.ok()).collect();
    let stats = json!({
        "config_hash": hash,
        "count": count,
        "seed": seed,
        "succeeded": good.len(),
        "failed": failed.len(),
        "failures": failed,
        "lambda": summarize(good.iter().filter_map(|r| r.lambda)),
        "sup_norm": summarize(good.iter().filter_map(|r| r.sup_norm)),
        "iterations": summarize(good.iter().filter_map(|r| r.iterations.map(|i| i as f64))),
        "gronwall_margin": summarize(rows.iter().filter_map(|r| r.gronwall_margin)),
    });
    announce(&out.json("ensemble_stats.json", &stats)?);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("{} of {count} runs failed", failed.len())))
    }
}

/// Relative growth tolerated between successive errors.
const MONOTONE_SLACK: f64 = 0.1;
/// Errors below this count as exact.
const ERROR_FLOOR: f64 = 1e-12;

fn convergence(out: &OutDir, path: &Path, resolutions: &[usize]) -> Result<(), CliError> {
    let cfg = SolveConfig::from_file(path)?;
    if cfg.driver.model != DriverModel::Stub {
        return Err(CliError::Usage(
            "convergence studies need a deterministic stub driver: an fbm path regenerated at a finer \
             grid is a different sample"
                .into(),
        ));
    }
    let mut ns = resolutions.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(CliError::Usage("need at least two distinct resolutions".into()));
    }
    let finest = ns[ns.len() - 1];
    if let Some(bad) = ns.iter().find(|&&n| !finest.is_multiple_of(n)) {
        return Err(CliError::Usage(format!("resolution {bad} does not divide the finest {finest}")));
    }
    let hash = config_hash(&json!({"command": "convergence", "config": cfg, "resolutions": ns}));
    let mut solutions = Vec::with_capacity(ns.len());
    for &n in &ns {
        solutions.push(solve_one(&cfg, n, None)?.0.solution);
    }
    let reference = &solutions[solutions.len() - 1];
    let errors: Vec<f64> = solutions[..solutions.len() - 1]
        .iter()
        .map(|y| {
            let step = finest / y.n();
            let mut e = 0.0f64;
            for j in 0..=y.m() {
                for i in 0..=y.n() {
                    e = e.max((y.get(j, i) - reference.get(j, step * i)).abs());
                }
            }
            e
        })
        .collect();
    let monotone = errors
        .windows(2)
        .all(|w| w[1] <= ERROR_FLOOR || w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    let rows: Vec<Vec<String>> = ns.iter().zip(&errors).map(|(n, e)| vec![n.to_string(), num(*e)]).collect();
    announce(&out.csv("convergence.csv", &hash, &["n", "error"], &rows)?);
    announce(&out.json(
        "convergence.json",
        &json!({
            "config_hash": hash,
            "reference_n": finest,
            "resolutions": &ns[..ns.len() - 1],
            "errors": errors,
            "monotone": monotone,
        }),
    )?);
    if monotone {
        Ok(())
    } else {
        Err(CliError::Failure("error sequence is not monotone within 10% slack".into()))
    }
}
