//! Phase-space densities carried along real classical characteristics.
//!
//! A density is represented by weighted samples `(x, p, w)`; transport moves
//! each sample with the classical flow and leaves its weight alone, which is
//! Liouville's theorem in particle form. For quadratic potentials the
//! Wigner function follows exactly the same flow, so Gaussian Wigner data
//! transported this way is exact up to integration error.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate, IntegratorConfig, Termination};
use crate::error::{usage, Error, Result};
use crate::hamiltonians::{ExtendedSystem, Flavor, PhasePoint};
use crate::potentials::PotentialKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub x: f64,
    pub p: f64,
    pub weight: f64,
}

/// Samples of a Gaussian Wigner function plus its widths.
#[derive(Debug, Clone)]
pub struct GaussianEnsemble {
    pub samples: Vec<WeightedSample>,
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// `σ_x σ_p`; a physical state needs this to be at least `ħ/2`.
    pub uncertainty_product: f64,
}

impl GaussianEnsemble {
    pub fn respects_uncertainty(&self, hbar: f64) -> bool {
        self.uncertainty_product >= 0.5 * hbar * (1.0 - 1e-12)
    }
}

/// Draws `n` equally weighted samples from the product Gaussian centred at
/// `(x0, p0)`. Deterministic for a given seed.
pub fn sample_gaussian_wigner(
    x0: f64,
    p0: f64,
    sigma_x: f64,
    sigma_p: f64,
    n: usize,
    seed: u64,
) -> Result<GaussianEnsemble> {
    if n == 0 {
        return usage("ensemble.samples must be at least 1");
    }
    if !(sigma_x > 0.0 && sigma_p > 0.0) {
        return usage("ensemble.sigma_x and ensemble.sigma_p must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = Normal::new(x0, sigma_x).map_err(|e| Error::Usage(e.to_string()))?;
    let np = Normal::new(p0, sigma_p).map_err(|e| Error::Usage(e.to_string()))?;
    let weight = 1.0 / n as f64;
    let samples = (0..n)
        .map(|_| WeightedSample {
            x: nx.sample(&mut rng),
            p: np.sample(&mut rng),
            weight,
        })
        .collect();
    Ok(GaussianEnsemble {
        samples,
        sigma_x,
        sigma_p,
        uncertainty_product: sigma_x * sigma_p,
    })
}

/// Advances every sample by time `t` along the real classical flow.
///
/// Samples are independent and are integrated in parallel; output order
/// matches input order.
pub fn transport(
    samples: &[WeightedSample],
    sys: &ExtendedSystem,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<WeightedSample>> {
    if sys.flavor() != Flavor::ClassicalReal {
        return usage("transport requires a classical_real system");
    }
    if t == 0.0 {
        return Ok(samples.to_vec());
    }
    if !(t > 0.0) {
        return usage(format!("transport time must be positive, got {t}"));
    }
    samples
        .par_iter()
        .map(|s| {
            let tr = propagate(sys, PhasePoint::new(s.x, 0.0, s.p, 0.0), (0.0, t), cfg)?;
            if tr.termination != Termination::Completed {
                return Err(Error::Numeric(format!(
                    "sample ({}, {}) terminated early ({:?}) at t = {}",
                    s.x,
                    s.p,
                    tr.termination,
                    tr.end_time()
                )));
            }
            let end = tr.last_point();
            Ok(WeightedSample {
                x: end.x,
                p: end.p,
                weight: s.weight,
            })
        })
        .collect()
}

/// Weighted means and covariances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean_x: f64,
    pub mean_p: f64,
    pub cov_xx: f64,
    pub cov_xp: f64,
    pub cov_pp: f64,
}

impl MomentSummary {
    pub fn of(samples: &[WeightedSample]) -> Self {
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        let mean_x = samples.iter().map(|s| s.weight * s.x).sum::<f64>() / total;
        let mean_p = samples.iter().map(|s| s.weight * s.p).sum::<f64>() / total;
        let mut cov = [0.0; 3];
        for s in samples {
            let (dx, dp) = (s.x - mean_x, s.p - mean_p);
            cov[0] += s.weight * dx * dx;
            cov[1] += s.weight * dx * dp;
            cov[2] += s.weight * dp * dp;
        }
        Self {
            mean_x,
            mean_p,
            cov_xx: cov[0] / total,
            cov_xp: cov[1] / total,
            cov_pp: cov[2] / total,
        }
    }

    /// Push-forward under the linear map `(x, p) → M (x, p)`.
    pub fn pushforward(&self, m: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Self {
            mean_x: a * self.mean_x + b * self.mean_p,
            mean_p: c * self.mean_x + d * self.mean_p,
            cov_xx: a * a * self.cov_xx + 2.0 * a * b * self.cov_xp + b * b * self.cov_pp,
            cov_xp: a * c * self.cov_xx + (a * d + b * c) * self.cov_xp + b * d * self.cov_pp,
            cov_pp: c * c * self.cov_xx + 2.0 * c * d * self.cov_xp + d * d * self.cov_pp,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.mean_x - other.mean_x,
            self.mean_p - other.mean_p,
            self.cov_xx - other.cov_xx,
            self.cov_xp - other.cov_xp,
            self.cov_pp - other.cov_pp,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Time-`t` flow map of `V = ½ k x²` at mass `m`: a rotation for `k > 0`, a
/// hyperbolic shear for `k < 0`, free drift for `k = 0`.
///
/// Returns `None` when the potential is not a pure quadratic (plus constant).
pub fn quadratic_flow_map(sys: &ExtendedSystem, t: f64) -> Option<[[f64; 2]; 2]> {
    let c = sys.potential().coefficients();
    if c.len() > 3 || c.get(1).copied().unwrap_or(0.0) != 0.0 {
        return None;
    }
    let k = 2.0 * c.get(2).copied().unwrap_or(0.0);
    let m = sys.mass();
    let w2 = k / m;
    Some(if w2 > 0.0 {
        let w = w2.sqrt();
        let (s, co) = (w * t).sin_cos();
        [[co, s / (m * w)], [-m * w * s, co]]
    } else if w2 < 0.0 {
        let g = (-w2).sqrt();
        let (s, ch) = ((g * t).sinh(), (g * t).cosh());
        [[ch, s / (m * g)], [m * g * s, ch]]
    } else {
        [[1.0, t / m], [0.0, 1.0]]
    })
}

/// Weighted fraction of samples above the barrier of the inverted
/// oscillator, i.e. with `H_cl(x, p) > V(0)`; at unit mass and `V = -x²/2`
/// this is the side `p² - x² > 0` of the separatrix.
pub fn separatrix_fraction(samples: &[WeightedSample], sys: &ExtendedSystem) -> Result<f64> {
    if sys.potential().kind() != PotentialKind::InvertedHarmonic {
        return usage("separatrix_fraction requires the inverted_harmonic potential");
    }
    let top = sys.potential().eval(0.0);
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    if total == 0.0 {
        return usage("ensemble has zero total weight");
    }
    let above: f64 = samples
        .iter()
        .filter(|s| sys.h_classical(s.x, s.p) > top)
        .map(|s| s.weight)
        .sum();
    Ok(above / total)
}

/// CSV `x,p,weight`.
pub fn write_csv<W: Write>(samples: &[WeightedSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,p,weight")?;
    for s in samples {
        writeln!(w, "{},{},{}", s.x, s.p, s.weight)?;
    }
    Ok(())
}
