use std::f64::consts::TAU;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{usage, Result};
use crate::hamiltonians::{ExtendedSystem, Flavor};

/// `x = A sin(ωt + α₁)`, `y = B sin(ωt + α₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShoEllipseParams {
    pub a: f64,
    pub b: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub omega: f64,
    /// Larger of the x and y RMS fit residuals.
    pub residual_rms: f64,
    /// `k A B cos(α₁ - α₂)`, the value the constraint must carry.
    pub predicted_constraint: f64,
}

/// Least-squares fit of `c sin ωt + d cos ωt`; returns amplitude, phase and
/// RMS residual.
fn fit_sinusoid(times: &[f64], values: &[f64], omega: f64) -> (f64, f64, f64) {
    let (mut ss, mut sc, mut cc, mut sv, mut cv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        sv += s * v;
        cv += c * v;
    }
    let det = ss * cc - sc * sc;
    let (c, d) = if det.abs() > 1e-300 {
        ((sv * cc - cv * sc) / det, (cv * ss - sv * sc) / det)
    } else {
        (0.0, 0.0)
    };
    let amplitude = c.hypot(d);
    let phase = if amplitude == 0.0 {
        0.0
    } else {
        d.atan2(c).rem_euclid(TAU)
    };
    let sq: f64 = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| {
            let (s, co) = (omega * t).sin_cos();
            (v - c * s - d * co).powi(2)
        })
        .sum();
    (amplitude, phase, (sq / times.len() as f64).sqrt())
}

/// Fits the tilted-ellipse closed form to a harmonic run of either flavor.
pub fn fit_sho_ellipse(sys: &ExtendedSystem, traj: &Trajectory) -> Result<ShoEllipseParams> {
    if sys.flavor() == Flavor::ClassicalReal {
        return usage("ellipse fit needs an mfqm or ccm system");
    }
    let c = sys.potential().coefficients();
    let k = 2.0 * c.get(2).copied().unwrap_or(0.0);
    if c.len() != 3 || c[1] != 0.0 || k <= 0.0 {
        return usage("ellipse fit requires a harmonic potential");
    }
    if traj.len() < 3 {
        return usage("ellipse fit needs at least three samples");
    }
    let omega = (k / sys.mass()).sqrt();
    let xs: Vec<f64> = traj.points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = traj.points.iter().map(|p| p.y).collect();
    let (a, alpha1, rx) = fit_sinusoid(&traj.times, &xs, omega);
    let (b, alpha2, ry) = fit_sinusoid(&traj.times, &ys, omega);
    Ok(ShoEllipseParams {
        a,
        b,
        alpha1,
        alpha2,
        omega,
        residual_rms: rx.max(ry),
        predicted_constraint: k * a * b * (alpha1 - alpha2).cos(),
    })
}
