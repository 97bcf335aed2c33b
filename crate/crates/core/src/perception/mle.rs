//! Maximum-likelihood fits and the confidence-weighted parameter blend.

use statrs::function::gamma::digamma;

use super::pdf::{trigamma, FamilyKind, Pdf};
use crate::error::{Error, Result};

/// Smallest standard deviation a Gaussian fit may return.
pub const SIGMA_FLOOR: f64 = 1e-3;
/// Variance assumed for Beta and Gamma fits when the sample has (almost) none.
pub const VARIANCE_FLOOR: f64 = 1e-3;
/// Beta and Gamma shapes are kept at or above 1 so every density stays bounded.
pub const SHAPE_MIN: f64 = 1.0;
pub const BETA_MAX: f64 = 1e4;
pub const GAMMA_SHAPE_MAX: f64 = 1e5;
pub const GAMMA_SCALE_RANGE: (f64, f64) = (1e-6, 1e3);

const NEWTON_STEPS: usize = 50;
const UNIT_CLAMP: f64 = 1e-6;

pub fn fit_mle(kind: FamilyKind, samples: &[f64]) -> Result<Pdf> {
    if samples.is_empty() {
        return Err(Error::Parameter {
            family: kind.name().to_string(),
            reason: "cannot fit an empty sample".into(),
        });
    }
    match kind {
        FamilyKind::Gaussian => {
            let (mean, var) = moments(samples);
            Pdf::gaussian(mean, var.sqrt().max(SIGMA_FLOOR))
        }
        FamilyKind::Beta => fit_beta(samples),
        FamilyKind::Gamma => fit_gamma(samples),
    }
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn fit_beta(samples: &[f64]) -> Result<Pdf> {
    let xs: Vec<f64> = samples
        .iter()
        .map(|x| x.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP))
        .collect();
    let (m, var) = moments(&xs);
    let degenerate = var < VARIANCE_FLOOR;
    let v = var.max(VARIANCE_FLOOR).min(m * (1.0 - m) / 2.0);
    let c = m * (1.0 - m) / v - 1.0;
    let (mut a, mut b) = (m * c, (1.0 - m) * c);
    if !degenerate {
        let n = xs.len() as f64;
        let la = xs.iter().map(|x| x.ln()).sum::<f64>() / n;
        let lb = xs.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n;
        for _ in 0..NEWTON_STEPS {
            let ab = digamma(a + b);
            let g1 = la - digamma(a) + ab;
            let g2 = lb - digamma(b) + ab;
            let t = trigamma(a + b);
            let h11 = t - trigamma(a);
            let h22 = t - trigamma(b);
            let det = h11 * h22 - t * t;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let da = -(h22 * g1 - t * g2) / det;
            let db = -(h11 * g2 - t * g1) / det;
            let mut step = 1.0;
            while a + step * da <= 0.0 || b + step * db <= 0.0 {
                step /= 2.0;
            }
            a += step * da;
            b += step * db;
            if (step * da).abs() < 1e-10 * a && (step * db).abs() < 1e-10 * b {
                break;
            }
        }
    }
    Pdf::beta(a.clamp(SHAPE_MIN, BETA_MAX), b.clamp(SHAPE_MIN, BETA_MAX))
}

fn fit_gamma(samples: &[f64]) -> Result<Pdf> {
    let xs: Vec<f64> = samples.iter().map(|x| x.max(UNIT_CLAMP)).collect();
    let (m, var) = moments(&xs);
    let degenerate = var < VARIANCE_FLOOR;
    let v = var.max(VARIANCE_FLOOR);
    let mut k = m * m / v;
    if !degenerate {
        let n = xs.len() as f64;
        let s = m.ln() - xs.iter().map(|x| x.ln()).sum::<f64>() / n;
        if s > 0.0 {
            for _ in 0..NEWTON_STEPS {
                let f = k.ln() - digamma(k) - s;
                let df = 1.0 / k - trigamma(k);
                let mut next = k - f / df;
                if next <= 0.0 {
                    next = k / 2.0;
                }
                let done = (next - k).abs() < 1e-10 * k;
                k = next;
                if done {
                    break;
                }
            }
        }
    }
    let k = k.clamp(SHAPE_MIN, GAMMA_SHAPE_MAX);
    let scale = (m / k).clamp(GAMMA_SCALE_RANGE.0, GAMMA_SCALE_RANGE.1);
    Pdf::gamma(k, scale)
}

/// `beta * old + (1 - beta) * fitted`. Gaussian and Beta blend their own
/// parameters; Gamma blends shape and rate so the blended mean lies between
/// the two means.
pub fn blend_update(old: &Pdf, fitted: &Pdf, beta: f64) -> Result<Pdf> {
    if old.kind() != fitted.kind() {
        return Err(Error::Parameter {
            family: old.kind().name().to_string(),
            reason: format!("cannot blend with a {} density", fitted.kind().name()),
        });
    }
    let mix = |a: f64, b: f64| {
        if beta == 1.0 {
            a
        } else if beta == 0.0 {
            b
        } else {
            beta * a + (1.0 - beta) * b
        }
    };
    match (*old, *fitted) {
        (Pdf::Gaussian { mu: m0, sigma: s0 }, Pdf::Gaussian { mu: m1, sigma: s1 }) => {
            Pdf::gaussian(mix(m0, m1), mix(s0, s1).max(SIGMA_FLOOR))
        }
        (Pdf::Beta { alpha: a0, beta: b0 }, Pdf::Beta { alpha: a1, beta: b1 }) => {
            Pdf::beta(mix(a0, a1), mix(b0, b1))
        }
        (Pdf::Gamma { shape: k0, scale: t0 }, Pdf::Gamma { shape: k1, scale: t1 }) => {
            if beta == 1.0 {
                return Ok(*old);
            }
            if beta == 0.0 {
                return Ok(*fitted);
            }
            let k = mix(k0, k1);
            let rate = mix(1.0 / t0, 1.0 / t1);
            Pdf::gamma(k, 1.0 / rate)
        }
        _ => unreachable!("kinds checked above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_single_sample_hits_floor() {
        let p = fit_mle(FamilyKind::Gaussian, &[1.5]).unwrap();
        assert_eq!(p, Pdf::Gaussian { mu: 1.5, sigma: SIGMA_FLOOR });
    }

    #[test]
    fn gaussian_matches_sample_statistics() {
        let xs = [0.2, 0.4, 0.9, 1.3];
        let p = fit_mle(FamilyKind::Gaussian, &xs).unwrap();
        let mean = xs.iter().sum::<f64>() / 4.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert_eq!(p.params(), [mean, var.sqrt()]);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(fit_mle(FamilyKind::Beta, &[]).is_err());
    }

    #[test]
    fn degenerate_bounded_fits_stay_finite() {
        for kind in [FamilyKind::Beta, FamilyKind::Gamma] {
            for x in [0.0, 1e-9, 0.5, 1.0] {
                let p = fit_mle(kind, &[x, x, x]).unwrap();
                assert!(p.mode_density().is_finite(), "{kind:?} at {x}: {p:?}");
            }
        }
    }

    #[test]
    fn blend_extremes_and_midpoint() {
        let old = Pdf::gaussian(1.0, 0.3).unwrap();
        let fit = Pdf::gaussian(2.0, 0.1).unwrap();
        assert_eq!(blend_update(&old, &fit, 1.0).unwrap(), old);
        assert_eq!(blend_update(&old, &fit, 0.0).unwrap(), fit);
        assert_eq!(blend_update(&old, &fit, 0.5).unwrap().params()[0], 1.5);
        assert!(blend_update(&old, &Pdf::beta(1.0, 1.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn gamma_blend_keeps_mean_between() {
        let old = Pdf::gamma(100.0, 0.01).unwrap();
        let fit = Pdf::gamma(1000.0, 0.001).unwrap();
        let b = blend_update(&old, &fit, 0.9).unwrap();
        assert!((b.mean() - 1.0).abs() < 1e-12);
    }
}
