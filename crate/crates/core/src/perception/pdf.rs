//! Parametric densities used by perception variables.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Offset from a support endpoint at which unbounded densities are read.
pub const EDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Gaussian,
    Beta,
    Gamma,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::Beta => "beta",
            FamilyKind::Gamma => "gamma",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gaussian" | "normal" => Some(FamilyKind::Gaussian),
            "beta" => Some(FamilyKind::Beta),
            "gamma" => Some(FamilyKind::Gamma),
            _ => None,
        }
    }
}

/// A density with its parameters: `Gaussian(mu, sigma)`, `Beta(alpha, beta)`
/// on `[0, 1]`, `Gamma(shape k, scale theta)` on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pdf {
    Gaussian { mu: f64, sigma: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl Pdf {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::from_params(FamilyKind::Gaussian, &[mu, sigma])
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::from_params(FamilyKind::Beta, &[alpha, beta])
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::from_params(FamilyKind::Gamma, &[shape, scale])
    }

    pub fn from_params(kind: FamilyKind, params: &[f64]) -> Result<Self> {
        let [a, b] = params else {
            return Err(param_err(kind, format!("expected 2 parameters, got {}", params.len())));
        };
        let p = match kind {
            FamilyKind::Gaussian => Pdf::Gaussian { mu: *a, sigma: *b },
            FamilyKind::Beta => Pdf::Beta { alpha: *a, beta: *b },
            FamilyKind::Gamma => Pdf::Gamma { shape: *a, scale: *b },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.params()[0], self.params()[1]);
        let ok = match self {
            Pdf::Gaussian { .. } => a.is_finite() && b.is_finite() && b > 0.0,
            _ => a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            let what = match self {
                Pdf::Gaussian { .. } => "need finite mu and sigma > 0",
                Pdf::Beta { .. } => "need alpha > 0 and beta > 0",
                Pdf::Gamma { .. } => "need shape > 0 and scale > 0",
            };
            Err(param_err(self.kind(), format!("{what} (got {a}, {b})")))
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            Pdf::Gaussian { .. } => FamilyKind::Gaussian,
            Pdf::Beta { .. } => FamilyKind::Beta,
            Pdf::Gamma { .. } => FamilyKind::Gamma,
        }
    }

    pub fn params(&self) -> [f64; 2] {
        match *self {
            Pdf::Gaussian { mu, sigma } => [mu, sigma],
            Pdf::Beta { alpha, beta } => [alpha, beta],
            Pdf::Gamma { shape, scale } => [shape, scale],
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Pdf::Gaussian { mu, .. } => mu,
            Pdf::Beta { alpha, beta } => alpha / (alpha + beta),
            Pdf::Gamma { shape, scale } => shape * scale,
        }
    }

    /// Log density; `-inf` outside the support. Where the density is
    /// unbounded at an endpoint it is read at `EDGE` from that endpoint.
    pub fn ln_density(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Pdf::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Pdf::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let mut x = x;
                if alpha < 1.0 {
                    x = x.max(EDGE);
                }
                if beta < 1.0 {
                    x = x.min(1.0 - EDGE);
                }
                power_term(alpha, x) + power_term(beta, 1.0 - x) + ln_gamma(alpha + beta)
                    - ln_gamma(alpha)
                    - ln_gamma(beta)
            }
            Pdf::Gamma { shape, scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let x = if shape < 1.0 { x.max(EDGE) } else { x };
                power_term(shape, x) - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// Log of the supremum of the density over its support, with unbounded
    /// densities capped as in [`Pdf::ln_density`].
    pub fn ln_mode_density(&self) -> f64 {
        match *self {
            Pdf::Gaussian { mu, .. } => self.ln_density(mu),
            Pdf::Beta { alpha, beta } => {
                if alpha > 1.0 && beta > 1.0 {
                    self.ln_density((alpha - 1.0) / (alpha + beta - 2.0))
                } else {
                    self.ln_density(0.0).max(self.ln_density(1.0))
                }
            }
            Pdf::Gamma { shape, scale } => {
                if shape >= 1.0 {
                    self.ln_density((shape - 1.0) * scale)
                } else {
                    self.ln_density(0.0)
                }
            }
        }
    }

    pub fn mode_density(&self) -> f64 {
        self.ln_mode_density().exp()
    }
}

/// `(a - 1) ln x`, with `0^0 = 1`.
fn power_term(a: f64, x: f64) -> f64 {
    if a == 1.0 {
        0.0
    } else if x == 0.0 {
        if a > 1.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        (a - 1.0) * x.ln()
    }
}

fn param_err(kind: FamilyKind, reason: String) -> Error {
    Error::Parameter {
        family: kind.name().to_string(),
        reason,
    }
}

/// Density of `p` at `x`, rejecting invalid parameters.
pub fn pdf_eval(p: &Pdf, x: f64) -> Result<f64> {
    p.validate()?;
    Ok(p.density(x))
}

pub fn pdf_mode_density(p: &Pdf) -> Result<f64> {
    p.validate()?;
    Ok(p.mode_density())
}

/// Second derivative of `ln Gamma`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2 / 2.0
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}
