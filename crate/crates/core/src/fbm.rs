//! Fractional Brownian motion on `[0, 1]` and space-time driving fields.
//!
//! Paths are sampled by circulant embedding of the fractional Gaussian noise
//! covariance (Davies-Harte) with a dense Cholesky fallback. Each path is
//! driven by its own ChaCha8 stream; ensemble member `k` of a run seeded with
//! `seed` uses the stream [`split_seed`]`(seed, k)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::frac_calc::{FractionalOrder, GridFunction};
use crate::par;
use crate::stieltjes::RightDerivativeTable;

/// Largest time grid accepted by the sheet model.
pub const SHEET_MAX_STEPS: usize = 64;

/// Relative size of a negative circulant eigenvalue treated as rounding.
const EMBEDDING_TOLERANCE: f64 = 1e-10;

/// SplitMix64 finalizer applied to `seed ⊕ golden·(k+1)`.
pub fn split_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`, the unit-spacing fGn covariance.
fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// `R_H(γ, η) = ½(γ^{2H} + η^{2H} − |γ−η|^{2H})`.
pub fn fbm_covariance(gamma: f64, eta: f64, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (gamma.abs().powf(e) + eta.abs().powf(e) - (gamma - eta).abs().powf(e))
}

/// In-place lower Cholesky factor of a row-major `dim × dim` matrix.
pub(crate) fn cholesky(a: &mut [f64], dim: usize) -> Result<()> {
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            d -= a[j * dim + k] * a[j * dim + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite(j));
        }
        let d = d.sqrt();
        a[j * dim + j] = d;
        for i in j + 1..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = s / d;
        }
        for k in j + 1..dim {
            a[j * dim + k] = 0.0;
        }
    }
    Ok(())
}

enum Method {
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(Vec<f64>),
}

/// Reusable sampler for paths with fixed `(H, n)`.
pub struct FbmGenerator {
    hurst: f64,
    n: usize,
    method: Method,
}

impl std::fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("n", &self.n)
            .field("circulant", &self.uses_circulant())
            .finish()
    }
}

impl FbmGenerator {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidHurst(hurst));
        }
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        let size = 2 * n;
        let mut c: Vec<Complex<f64>> = (0..size)
            .map(|k| Complex::new(fgn_autocovariance(k.min(size - k), hurst), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut c);
        let max = c.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
        let min = c.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
        let method = if min >= -EMBEDDING_TOLERANCE * max {
            let sqrt_eig = c
                .iter()
                .map(|z| (z.re.max(0.0) / size as f64).sqrt())
                .collect();
            Method::Circulant { sqrt_eig, fft }
        } else {
            Method::Cholesky(Self::toeplitz_factor(hurst, n)?)
        };
        Ok(Self { hurst, n, method })
    }

    /// Forces the dense Cholesky path.
    pub fn with_cholesky(hurst: f64, n: usize) -> Result<Self> {
        let mut g = Self::new(hurst, n)?;
        g.method = Method::Cholesky(Self::toeplitz_factor(hurst, n)?);
        Ok(g)
    }

    fn toeplitz_factor(hurst: f64, n: usize) -> Result<Vec<f64>> {
        let mut a: Vec<f64> = (0..n * n)
            .map(|k| fgn_autocovariance((k / n).abs_diff(k % n), hurst))
            .collect();
        cholesky(&mut a, n)?;
        Ok(a)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Unit-spacing fGn increments `X_1..X_n`.
    fn noise(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.n;
        match &self.method {
            Method::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut w);
                w[..n].iter().map(|z| z.re).collect()
            }
            Method::Cholesky(l) => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                (0..n)
                    .map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum())
                    .collect()
            }
        }
    }

    /// Node values `B(i/n)`, `i = 0..=n`, with `B(0) = 0`.
    pub fn sample_values(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = (self.n as f64).powf(-self.hurst);
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for x in self.noise(&mut rng) {
            acc += scale * x;
            out.push(acc);
        }
        out
    }

    pub fn path(&self, seed: u64) -> GridFunction {
        GridFunction::new_unchecked(0.0, 1.0, self.sample_values(seed))
            .expect("n >= 2 is checked at construction")
    }
}

/// One fBm path on the uniform grid of `[0, 1]` with `n` cells.
pub fn fbm_path(hurst: f64, n: usize, seed: u64) -> Result<GridFunction> {
    Ok(FbmGenerator::new(hurst, n)?.path(seed))
}

/// Joint law of the driver across time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeModel {
    /// One spatial path, constant in time.
    Frozen,
    /// Fractional Brownian sheet with temporal Hurst index `hurst_t`.
    /// Not implied by the equation; provided for experiments.
    Sheet { hurst_t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmConfig {
    pub hurst: f64,
    pub n: usize,
    pub m: usize,
    pub horizon: f64,
    pub seed: u64,
    pub time_model: TimeModel,
}

/// Deterministic drivers with `g(0) = 0`, constant in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverStub {
    /// `g(ξ) = ξ`
    Linear,
    /// `g(ξ) = ξ²/2`
    Polynomial,
    /// `g(ξ) = sin(2πξ)/(2π)`
    Sine,
}

impl DriverStub {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Linear => x,
            Self::Polynomial => 0.5 * x * x,
            Self::Sine => (std::f64::consts::TAU * x).sin() / std::f64::consts::TAU,
        }
    }

    pub fn deriv(self, x: f64) -> f64 {
        match self {
            Self::Linear => 1.0,
            Self::Polynomial => x,
            Self::Sine => (std::f64::consts::TAU * x).cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriverKind {
    Fbm {
        hurst: f64,
        seed: u64,
        model: TimeModel,
    },
    Stub {
        stub: DriverStub,
    },
    Custom,
}

/// A driver `g` with `g(t, 0) = 0`, its right-derivative tables per time
/// node, and the realized `Λ_α(g)` and `‖g‖_{1−α,∞,0}`.
#[derive(Debug, Clone)]
pub struct DrivingField {
    field: SpaceTimeField,
    alpha: FractionalOrder,
    kind: DriverKind,
    tables: Vec<Arc<RightDerivativeTable>>,
    lambda: f64,
    norm: f64,
    time_homogeneous: bool,
}

impl DrivingField {
    /// Builds the tables for an arbitrary field. Slices identical to the first
    /// share one table.
    pub fn from_field(field: SpaceTimeField, alpha: FractionalOrder, kind: DriverKind) -> Result<Self> {
        if let Some(j) = (0..=field.m()).find(|&j| field.get(j, 0) != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "driver must vanish at xi = 0 (time node {j})"
            )));
        }
        let first = field.slice(0);
        let time_homogeneous = field.slices().all(|s| s == first);
        let h = field.h();
        let tables: Vec<Arc<RightDerivativeTable>> = if time_homogeneous {
            let t = Arc::new(RightDerivativeTable::new(first, h, alpha));
            vec![t; field.m() + 1]
        } else {
            par::map_indexed(field.m() + 1, |j| {
                Arc::new(RightDerivativeTable::new(field.slice(j), h, alpha))
            })
        };
        let lambda = tables.iter().map(|t| t.lambda()).fold(0.0, f64::max);
        let norm = tables.iter().map(|t| t.holder_norm()).fold(0.0, f64::max);
        if !(lambda.is_finite() && norm.is_finite()) {
            return Err(Error::InvalidParameter("driver has non-finite Lambda or norm".into()));
        }
        Ok(Self {
            field,
            alpha,
            kind,
            tables,
            lambda,
            norm,
            time_homogeneous,
        })
    }

    pub fn stub(
        stub: DriverStub,
        m: usize,
        n: usize,
        horizon: f64,
        alpha: FractionalOrder,
    ) -> Result<Self> {
        let field = SpaceTimeField::from_fn(0.0, horizon, m, n, |_, x| stub.eval(x))?;
        Self::from_field(field, alpha, DriverKind::Stub { stub })
    }

    pub fn field(&self) -> &SpaceTimeField {
        &self.field
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }

    /// `Λ_α(g)`, the sup over all time nodes.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_at(&self, j: usize) -> f64 {
        self.tables[j].lambda()
    }

    /// `sup` of the per-slice `Λ_α` over time nodes `from..`.
    pub fn lambda_from(&self, from: usize) -> f64 {
        self.tables[from.min(self.tables.len() - 1)..]
            .iter()
            .map(|t| t.lambda())
            .fold(0.0, f64::max)
    }

    /// `‖g‖_{1−α,∞,0}`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn time_homogeneous(&self) -> bool {
        self.time_homogeneous
    }

    pub fn table(&self, j: usize) -> Result<&RightDerivativeTable> {
        self.tables
            .get(j)
            .map(|t| t.as_ref())
            .ok_or_else(|| Error::InvalidParameter(format!("time node {j} out of range")))
    }
}

/// Samples the driver described by `cfg` and records its `Λ_α` and norm.
pub fn driving_field(cfg: &FbmConfig, alpha: FractionalOrder) -> Result<DrivingField> {
    alpha.check_solver_range(cfg.hurst)?;
    let generator = FbmGenerator::new(cfg.hurst, cfg.n)?;
    let kind = DriverKind::Fbm {
        hurst: cfg.hurst,
        seed: cfg.seed,
        model: cfg.time_model,
    };
    let field = match cfg.time_model {
        TimeModel::Frozen => {
            let path = generator.sample_values(cfg.seed);
            SpaceTimeField::flat(0.0, cfg.horizon, cfg.m, &path)?
        }
        TimeModel::Sheet { hurst_t } => {
            if !(0.9..1.0).contains(&hurst_t) {
                return Err(Error::InvalidHurst(hurst_t));
            }
            if cfg.m > SHEET_MAX_STEPS {
                return Err(Error::InvalidParameter(format!(
                    "sheet model supports at most {SHEET_MAX_STEPS} time steps, got {}",
                    cfg.m
                )));
            }
            sheet_field(&generator, cfg, hurst_t)?
        }
    };
    DrivingField::from_field(field, alpha, kind)
}

/// `g(t_j, ·) = Σ_k L[j,k] P_k` with `L L^T` the temporal fBm covariance over
/// `t_1..t_m` and `P_k` independent spatial paths; `g(0, ·) = 0`.
fn sheet_field(generator: &FbmGenerator, cfg: &FbmConfig, hurst_t: f64) -> Result<SpaceTimeField> {
    let m = cfg.m;
    let dt = cfg.horizon / m as f64;
    let mut l: Vec<f64> = (0..m * m)
        .map(|k| {
            let (j, i) = (k / m, k % m);
            fbm_covariance((j + 1) as f64 * dt, (i + 1) as f64 * dt, hurst_t)
        })
        .collect();
    cholesky(&mut l, m)?;
    let paths = par::map_indexed(m, |k| generator.sample_values(split_seed(cfg.seed, k as u64)));
    let width = cfg.n + 1;
    let mut slices = vec![vec![0.0; width]];
    for j in 0..m {
        let mut s = vec![0.0; width];
        for (k, p) in paths.iter().enumerate().take(j + 1) {
            let c = l[j * m + k];
            for (x, v) in s.iter_mut().zip(p) {
                *x += c * v;
            }
        }
        slices.push(s);
    }
    SpaceTimeField::from_slices(0.0, cfg.horizon, &slices)
}

/// One z-score of the covariance validator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEntry {
    /// `"covariance"` for `E[B_γ B_η]`, `"increment"` for `E|B_{η+Δ} − B_η|²`.
    pub kind: &'static str,
    pub gamma: f64,
    pub eta: f64,
    pub empirical: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub hurst: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub entries: Vec<CovarianceEntry>,
    pub max_abs_z: f64,
    pub passed: bool,
}

/// Largest accepted `|z|`.
pub const Z_LIMIT: f64 = 4.0;

/// Number of subset nodes on each side of the validator grid.
const SUBSET: usize = 8;

fn z_entry(kind: &'static str, gamma: f64, eta: f64, data: &[f64], expected: f64) -> CovarianceEntry {
    let count = data.len() as f64;
    let mean = data.iter().sum::<f64>() / count;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0);
    let std_error = (var / count).sqrt();
    let diff = mean - expected;
    let z = if std_error > 0.0 {
        diff / std_error
    } else if diff.abs() <= 1e-14 * (1.0 + expected.abs()) {
        0.0
    } else {
        f64::INFINITY
    };
    CovarianceEntry {
        kind,
        gamma,
        eta,
        empirical: mean,
        expected,
        std_error,
        z,
    }
}

/// Monte Carlo check of the covariance law on a node subset
/// `{0, 1/8, …, 1}` and of the increment variances `|Δ|^{2H}` at dyadic lags
/// starting from `ξ = 1/2`. Path `k` uses the stream `split_seed(seed, k)`.
pub fn covariance_validator(hurst: f64, n: usize, samples: usize, seed: u64) -> Result<CovarianceReport> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "covariance validator needs at least 1000 samples, got {samples}"
        )));
    }
    if n < 2 * SUBSET || !n.is_multiple_of(SUBSET) {
        return Err(Error::InvalidParameter(format!(
            "validator grid must be a multiple of {SUBSET} with at least {} cells",
            2 * SUBSET
        )));
    }
    let generator = FbmGenerator::new(hurst, n)?;
    let nodes: Vec<usize> = (0..=SUBSET).map(|k| k * n / SUBSET).collect();
    let mid = n / 2;
    let lags: Vec<usize> = std::iter::successors(Some(1usize), |l| Some(l * 2))
        .take_while(|&l| l <= n - mid)
        .collect();
    let draws = par::map_indexed(samples, |k| {
        let path = generator.sample_values(split_seed(seed, k as u64));
        let at: Vec<f64> = nodes.iter().map(|&i| path[i]).collect();
        let inc: Vec<f64> = lags.iter().map(|&l| path[mid + l] - path[mid]).collect();
        (at, inc)
    });
    let h = 1.0 / n as f64;
    let mut entries = Vec::new();
    for a in 0..nodes.len() {
        for b in a..nodes.len() {
            let (gamma, eta) = (nodes[a] as f64 * h, nodes[b] as f64 * h);
            let data: Vec<f64> = draws.iter().map(|(at, _)| at[a] * at[b]).collect();
            entries.push(z_entry("covariance", gamma, eta, &data, fbm_covariance(gamma, eta, hurst)));
        }
    }
    for (q, &l) in lags.iter().enumerate() {
        let delta = l as f64 * h;
        let data: Vec<f64> = draws.iter().map(|(_, inc)| inc[q] * inc[q]).collect();
        entries.push(z_entry(
            "increment",
            mid as f64 * h,
            (mid + l) as f64 * h,
            &data,
            delta.powf(2.0 * hurst),
        ));
    }
    let max_abs_z = entries.iter().fold(0.0f64, |m, e| m.max(e.z.abs()));
    Ok(CovarianceReport {
        hurst,
        n,
        samples,
        seed,
        entries,
        max_abs_z,
        passed: max_abs_z <= Z_LIMIT,
    })
}
