//! Product-integration weights for power kernels on a uniform grid.
//!
//! Every singular integral in the crate integrates `s^p` against the
//! piecewise-linear interpolant of node data. Measuring distance from the
//! kernel's singular point in cells, the interpolant on the cell `[k, k+1]`
//! splits into two hat halves with moments
//!
//! ```text
//! near[k] = ∫_k^{k+1} s^p (k+1-s) ds    (node at distance k)
//! far[k]  = ∫_k^{k+1} s^p (s-k)   ds    (node at distance k+1)
//! ```
//!
//! Tables depend only on the exponent and the length, so they are computed
//! once and shared through a process-wide cache.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Cells closer than this to the singular point use closed forms; farther
/// cells use 8-point Gauss-Legendre, which avoids the cancellation in the
/// closed forms and is exact to rounding there.
const CLOSED_FORM_CELLS: usize = 8;

fn cell_moments(k: usize, p: f64) -> (f64, f64) {
    if k == 0 {
        let near = if p > -1.0 {
            1.0 / ((p + 1.0) * (p + 2.0))
        } else {
            f64::NAN
        };
        return (near, 1.0 / (p + 2.0));
    }
    let kf = k as f64;
    if k < CLOSED_FORM_CELLS {
        let k1 = kf + 1.0;
        let m0 = (k1.powf(p + 1.0) - kf.powf(p + 1.0)) / (p + 1.0);
        let m1 = (k1.powf(p + 2.0) - kf.powf(p + 2.0)) / (p + 2.0);
        ((k1 * m0 - m1), (m1 - kf * m0))
    } else {
        let mid = kf + 0.5;
        let mut near = 0.0;
        let mut far = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for s in [mid - 0.5 * x, mid + 0.5 * x] {
                let f = s.powf(p);
                near += w * f * (kf + 1.0 - s);
                far += w * f * (s - kf);
            }
        }
        (0.5 * near, 0.5 * far)
    }
}

/// Hat-function moments of `s^p` for cells `0..len`.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    exponent: f64,
    near: Vec<f64>,
    far: Vec<f64>,
    /// `toeplitz[m] = near[m] + far[m-1]`: total weight of an interior node at
    /// distance `m`. `toeplitz[0] = near[0]`.
    toeplitz: Vec<f64>,
}

impl KernelWeights {
    fn build(exponent: f64, len: usize) -> Self {
        let (near, far): (Vec<f64>, Vec<f64>) =
            (0..len).map(|k| cell_moments(k, exponent)).unzip();
        let mut toeplitz = Vec::with_capacity(len + 1);
        toeplitz.push(near.first().copied().unwrap_or(f64::NAN));
        for m in 1..len {
            toeplitz.push(near[m] + far[m - 1]);
        }
        Self {
            exponent,
            near,
            far,
            toeplitz,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.near.len()
    }

    pub fn is_empty(&self) -> bool {
        self.near.is_empty()
    }

    pub fn near(&self) -> &[f64] {
        &self.near
    }

    pub fn far(&self) -> &[f64] {
        &self.far
    }

    pub fn toeplitz(&self) -> &[f64] {
        &self.toeplitz
    }

    /// `Σ_k c(node at distance k) · s^p` over cells `0..i` for data laid out
    /// so that `at(d)` returns the value at distance `d` from the singular
    /// point. The weight of the distance-0 node is omitted when `skip_origin`.
    #[inline]
    pub(crate) fn weighted_sum<F: Fn(usize) -> f64>(&self, i: usize, at: F, skip_origin: bool) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut acc = if skip_origin { 0.0 } else { at(0) * self.near[0] };
        for m in 1..i {
            acc += at(m) * self.toeplitz[m];
        }
        acc + at(i) * self.far[i - 1]
    }
}

type CacheKey = (u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<KernelWeights>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<KernelWeights>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Weights for exponent `p` over `len` cells, from the shared cache.
pub fn kernel_weights(p: f64, len: usize) -> Arc<KernelWeights> {
    let key = (p.to_bits(), len);
    if let Some(w) = cache().read().expect("weight cache poisoned").get(&key) {
        return Arc::clone(w);
    }
    let built = Arc::new(KernelWeights::build(p, len));
    let mut guard = cache().write().expect("weight cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Weights for the Riemann-Liouville kernel `(x-y)^{α-1}`.
pub fn rl_weights(alpha: f64, len: usize) -> Arc<KernelWeights> {
    kernel_weights(alpha - 1.0, len)
}

/// Weights for the Marchaud kernel `(x-y)^{-β-1}` of order `β`.
pub fn marchaud_weights(order: f64, len: usize) -> Arc<KernelWeights> {
    kernel_weights(-order - 1.0, len)
}
