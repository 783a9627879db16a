//! Scalar coefficient functions `A` with certified constants: `M₁` (Lipschitz
//! constant of `A`), `M₂` (bound of `|A|`) and `M_N` (Lipschitz constant of
//! `A'` on `[−N, N]`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Coefficient {
    Zero,
    Const {
        value: f64,
    },
    /// `tanh(scale·x)`
    Tanh {
        scale: f64,
    },
    /// `amplitude·exp(−z²/2)`, `z = (x − center)/width`
    GaussianBump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `ε²/(x² + ε²)`, a bounded mollification of an inverse-square profile.
    SmoothedBiotSavart {
        epsilon: f64,
    },
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive")))
    }
}

/// `argmax_y 2 tanh(y) sech²(y) = atanh(1/√3)`.
fn tanh_second_peak() -> f64 {
    (1.0 / 3f64.sqrt()).atanh()
}

impl Coefficient {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Zero => Ok(()),
            Self::Const { value } => finite("value", value),
            Self::Tanh { scale } => finite("scale", scale),
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                finite("center", center)?;
                finite("amplitude", amplitude)?;
                positive("width", width)
            }
            Self::SmoothedBiotSavart { epsilon } => positive("epsilon", epsilon),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Const { .. } => "const",
            Self::Tanh { .. } => "tanh",
            Self::GaussianBump { .. } => "gaussian-bump",
            Self::SmoothedBiotSavart { .. } => "smoothed-biot-savart",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Const { value } => value,
            Self::Tanh { scale } => (scale * x).tanh(),
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Self::SmoothedBiotSavart { epsilon } => {
                let e2 = epsilon * epsilon;
                e2 / (x * x + e2)
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            Self::Zero | Self::Const { .. } => 0.0,
            Self::Tanh { scale } => {
                let c = (scale * x).cosh();
                scale / (c * c)
            }
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let z = (x - center) / width;
                -amplitude * z / width * (-0.5 * z * z).exp()
            }
            Self::SmoothedBiotSavart { epsilon } => {
                let e2 = epsilon * epsilon;
                let d = x * x + e2;
                -2.0 * e2 * x / (d * d)
            }
        }
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        match *self {
            Self::Zero | Self::Const { .. } => 0.0,
            Self::Tanh { scale } => {
                let y = scale * x;
                let c = y.cosh();
                -2.0 * scale * scale * y.tanh() / (c * c)
            }
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let z = (x - center) / width;
                amplitude / (width * width) * (z * z - 1.0) * (-0.5 * z * z).exp()
            }
            Self::SmoothedBiotSavart { epsilon } => {
                let e2 = epsilon * epsilon;
                let d = x * x + e2;
                e2 * (6.0 * x * x - 2.0 * e2) / (d * d * d)
            }
        }
    }

    /// `M₁ = sup |A'|`.
    pub fn m1(&self) -> f64 {
        match *self {
            Self::Zero | Self::Const { .. } => 0.0,
            Self::Tanh { scale } => scale.abs(),
            Self::GaussianBump {
                width, amplitude, ..
            } => amplitude.abs() * (-0.5f64).exp() / width,
            Self::SmoothedBiotSavart { epsilon } => 3.0 * 3f64.sqrt() / (8.0 * epsilon),
        }
    }

    /// `M₂ = sup |A|`.
    pub fn m2(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Const { value } => value.abs(),
            Self::Tanh { scale } => {
                if scale == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Self::GaussianBump { amplitude, .. } => amplitude.abs(),
            Self::SmoothedBiotSavart { .. } => 1.0,
        }
    }

    /// `M_N = sup_{|x| ≤ N} |A''|`.
    pub fn m_n(&self, radius: f64) -> f64 {
        let radius = radius.abs();
        match *self {
            Self::Zero | Self::Const { .. } => 0.0,
            Self::Tanh { scale } => {
                let y = (scale.abs() * radius).min(tanh_second_peak());
                let c = y.cosh();
                scale * scale * 2.0 * y.tanh() / (c * c)
            }
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let lo = (-radius - center) / width;
                let hi = (radius - center) / width;
                let profile = |z: f64| (z * z - 1.0).abs() * (-0.5 * z * z).exp();
                let mut best = profile(lo).max(profile(hi));
                for z in [0.0, 3f64.sqrt(), -(3f64.sqrt())] {
                    if z >= lo && z <= hi {
                        best = best.max(profile(z));
                    }
                }
                amplitude.abs() / (width * width) * best
            }
            Self::SmoothedBiotSavart { epsilon } => 2.0 / (epsilon * epsilon),
        }
    }
}
