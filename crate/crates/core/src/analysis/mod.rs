//! Numerical experiments on the extended phase space: SHO ellipse fits,
//! double-well flipping and dwell times, uncertainty-product and
//! classical-limit sweeps, the inverted-oscillator rebound, the
//! boundedness survey and the comparison against the quantum oracle.

mod checks;
mod dwell;
mod ellipse;
mod report;
mod runs;
mod sweeps;

#[cfg(test)]
mod tests;

pub use checks::{
    barrier_run, dichotomy_survey, identity_battery, rebound_check, BarrierRun, DichotomyReport,
    DichotomySettings, IdentityResiduals, SurveyRun,
};
pub use dwell::{dwell_analysis, DwellSummary};
pub use ellipse::{fit_sho_ellipse, ShoEllipseParams};
pub use report::text_table;
pub use runs::{
    ccm_double_well_run, ccm_initial_point, mfqm_double_well_run, mfqm_initial_point,
};
pub use sweeps::{
    ccm_vs_quantum_report, classical_limit_sweep, uncertainty_sweep, ClassicalLimitRow,
    ClassicalLimitSweep, ComparisonReport, ComparisonRow, StateConvention, UncertaintySweep,
    UncertaintySweepRow,
};

use crate::dynamics::Trajectory;
use crate::error::{domain, Result};
use crate::hamiltonians::ExtendedSystem;
use crate::potentials::Potential;

/// Barrier height `E_0 = V(0)` when the origin is a local maximum of `V`.
pub fn barrier_height(v: &Potential) -> Option<f64> {
    let d = v.derivative();
    let curvature = d.derivative().eval(0.0);
    (d.eval(0.0) == 0.0 && curvature < 0.0).then(|| v.eval(0.0))
}

fn golden_min(v: &Potential, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..200 {
        if v.eval(c) < v.eval(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

fn min_on(v: &Potential, lo: f64, hi: f64) -> (f64, f64) {
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let best = (0..=n)
        .min_by(|&i, &j| v.eval(xs[i]).total_cmp(&v.eval(xs[j])))
        .expect("scan is non-empty");
    let x = golden_min(v, xs[best.saturating_sub(1)], xs[(best + 1).min(n)]);
    (x, v.eval(x))
}

fn confinement_radius(v: &Potential) -> Result<f64> {
    match v.sublevel_radius(v.eval(0.0)) {
        Some(r) => Ok(r.max(1e-6)),
        None => domain("potential is not confining (bounded below with growing walls)"),
    }
}

/// Location and value of the global minimum of a confining potential.
pub fn global_minimum(v: &Potential) -> Result<(f64, f64)> {
    let r = confinement_radius(v)?;
    Ok(min_on(v, -r, r))
}

/// Bottom of the well on the side `sign(side)` of the origin.
pub fn well_bottom(v: &Potential, side: f64) -> Result<f64> {
    let r = confinement_radius(v)?;
    let (x, _) = if side < 0.0 {
        min_on(v, -r, 0.0)
    } else {
        min_on(v, 0.0, r)
    };
    Ok(x)
}

/// Max-norm radius containing the whole level set `H⁺ = E`.
///
/// Each chord end satisfies `V(x ± y) ≤ 2E - V_min` and the momenta satisfy
/// `(p² + q²)/2m ≤ E - V_min`, so `|x|, |y| ≤ R(2E - V_min)` and
/// `|p|, |q| ≤ √(2m(E - V_min))` where `R(e)` is the sublevel radius of `V`.
pub fn mfqm_level_set_bound(sys: &ExtendedSystem, energy: f64) -> Result<f64> {
    let v = sys.potential();
    let (_, vmin) = global_minimum(v)?;
    if energy < vmin {
        return domain(format!("energy {energy} lies below min V = {vmin}"));
    }
    let rx = v
        .sublevel_radius(2.0 * energy - vmin)
        .expect("confining potential has bounded sublevel sets");
    Ok(rx.max((2.0 * sys.mass() * (energy - vmin)).sqrt()))
}

/// Largest relative drift of the two chord-end energies along a run.
pub fn chord_energy_drift(sys: &ExtendedSystem, traj: &Trajectory) -> f64 {
    let (p0, m0) = sys.chord_energies(&traj.points[0]);
    traj.points.iter().fold(0.0f64, |acc, pt| {
        let (p, m) = sys.chord_energies(pt);
        acc.max((p - p0).abs() / p0.abs().max(1.0))
            .max((m - m0).abs() / m0.abs().max(1.0))
    })
}
