//! Solve configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fracfbm_core::fbm::{driving_field, DriverStub, DrivingField, FbmConfig, TimeModel};
use fracfbm_core::solver::{Coefficient, InitialGuess, SolverConfig, WindowPolicy};
use fracfbm_core::FractionalOrder;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverModel {
    Frozen,
    Sheet,
    Stub,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSpec {
    pub model: DriverModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stub: Option<DriverStub>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum PhiSpec {
    Zero,
    /// `amplitude·sin(kπξ)`
    Sine { k: f64, amplitude: f64 },
    /// `slope·ξ`
    Ramp { slope: f64 },
    /// Two columns `xi,value` (comment lines start with `#`), interpolated
    /// linearly onto the grid. Relative paths resolve against the config file.
    SampledFromFile { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Picard {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub hurst: f64,
    pub alpha: f64,
    pub grid: Grid,
    pub driver: DriverSpec,
    pub phi: PhiSpec,
    #[serde(rename = "A")]
    pub coeff: Coefficient,
    pub picard: Picard,
    pub window_policy: WindowPolicy,
    #[serde(default = "flat_guess")]
    pub initial_guess: InitialGuess,
    #[serde(default)]
    pub check_seed: u64,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn flat_guess() -> InitialGuess {
    InitialGuess::Flat
}

impl SolveConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn order(&self) -> Result<FractionalOrder, CliError> {
        Ok(FractionalOrder::new(self.alpha)?)
    }

    /// Builds `φ` on the uniform grid with `n` cells.
    pub fn phi_values(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let x = |i: usize| i as f64 / n as f64;
        Ok(match &self.phi {
            PhiSpec::Zero => vec![0.0; n + 1],
            PhiSpec::Sine { k, amplitude } => (0..=n)
                .map(|i| amplitude * (k * std::f64::consts::PI * x(i)).sin())
                .collect(),
            PhiSpec::Ramp { slope } => (0..=n).map(|i| slope * x(i)).collect(),
            PhiSpec::SampledFromFile { path } => {
                let samples = read_samples(&self.base_dir.join(path))?;
                (0..=n).map(|i| interpolate(&samples, x(i))).collect()
            }
        })
    }

    pub fn solver_config(&self, n: usize) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            alpha: self.order()?,
            hurst: self.hurst,
            m: self.grid.m,
            n,
            horizon: self.grid.horizon,
            phi: self.phi_values(n)?,
            coeff: self.coeff,
            tol: self.picard.tol,
            max_iter: self.picard.max_iter,
            window_policy: self.window_policy,
            initial_guess: self.initial_guess,
            check_seed: self.check_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// FBM seed of the configured driver; `None` for stubs.
    pub fn fbm_seed(&self) -> Result<Option<u64>, CliError> {
        match self.driver.model {
            DriverModel::Stub => Ok(None),
            _ => self
                .driver
                .seed
                .map(Some)
                .ok_or_else(|| CliError::Usage("driver.seed is required for fbm drivers".into())),
        }
    }

    /// Driver at resolution `n`, with the FBM seed replaced by `seed` when given.
    pub fn driver(&self, n: usize, seed: Option<u64>) -> Result<DrivingField, CliError> {
        let alpha = self.order()?;
        alpha.check_solver_range(self.hurst)?;
        let (m, horizon) = (self.grid.m, self.grid.horizon);
        let time_model = match self.driver.model {
            DriverModel::Stub => {
                let stub = self
                    .driver
                    .stub
                    .ok_or_else(|| CliError::Usage("driver.stub is required for the stub model".into()))?;
                return Ok(DrivingField::stub(stub, m, n, horizon, alpha)?);
            }
            DriverModel::Frozen => TimeModel::Frozen,
            DriverModel::Sheet => TimeModel::Sheet {
                hurst_t: self
                    .driver
                    .hurst_t
                    .ok_or_else(|| CliError::Usage("driver.hurst_t is required for the sheet model".into()))?,
            },
        };
        let seed = match seed {
            Some(s) => s,
            None => self.fbm_seed()?.unwrap_or_default(),
        };
        let cfg = FbmConfig {
            hurst: self.hurst,
            n,
            m,
            horizon,
            seed,
            time_model,
        };
        Ok(driving_field(&cfg, alpha)?)
    }
}

fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(CliError::Usage(format!("{}:{}: expected two columns", path.display(), k + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(v)) if x.is_finite() && v.is_finite() => out.push((x, v)),
            // a header row
            _ if out.is_empty() => continue,
            _ => {
                return Err(CliError::Usage(format!("{}:{}: not a number", path.display(), k + 1)));
            }
        }
    }
    if out.len() < 2 {
        return Err(CliError::Usage(format!("{}: need at least two samples", path.display())));
    }
    if out.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Usage(format!("{}: xi must increase", path.display())));
    }
    if out[0].0 > 0.0 || out[out.len() - 1].0 < 1.0 {
        return Err(CliError::Usage(format!("{}: samples must cover [0, 1]", path.display())));
    }
    Ok(out)
}

fn interpolate(samples: &[(f64, f64)], x: f64) -> f64 {
    let k = samples.partition_point(|s| s.0 <= x).clamp(1, samples.len() - 1);
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
