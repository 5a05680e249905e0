use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ccm_initial_point, chord_energy_drift, global_minimum, mfqm_level_set_bound, well_bottom};
use crate::dynamics::{integrate, refine_crossing, IntegratorConfig, Termination};
use crate::error::{usage, Result};
use crate::hamiltonians::{
    complexification_identity, poisson_bracket, ExtendedSystem, Flavor, PhasePoint,
};
use crate::potentials::PotentialKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierRun {
    /// Energy of the `(x, p)` sector measured from the barrier top.
    pub e_x: f64,
    /// Refined crossings of `x = 0`.
    pub crossings: usize,
    pub min_abs_x: f64,
    pub termination: Termination,
}

/// Integrates `start` and records how close `x` gets to the barrier at 0.
pub fn barrier_run(
    sys: &ExtendedSystem,
    start: PhasePoint,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<BarrierRun> {
    let traj = integrate(sys, start, (0.0, t_max), cfg)?;
    let crossings = traj.crossings(0.0).len();
    let mut min_abs_x = traj.points.iter().fold(f64::INFINITY, |m, p| m.min(p.x.abs()));
    if crossings > 0 {
        min_abs_x = 0.0;
    }
    // Turning points of x sit where ẋ = p/m changes sign.
    for i in 0..traj.len().saturating_sub(1) {
        let (a, b) = (traj.points[i].p, traj.points[i + 1].p);
        if a * b < 0.0 {
            let bracket = (traj.times[i], traj.times[i + 1]);
            if let Ok(t) = refine_crossing(|t| traj.component_in(i, 2, t).0, bracket) {
                min_abs_x = min_abs_x.min(traj.component_in(i, 0, t).0.abs());
            }
        }
    }
    Ok(BarrierRun {
        e_x: sys.h_classical(start.x, start.p) - sys.potential().eval(0.0),
        crossings,
        min_abs_x,
        termination: traj.termination,
    })
}

/// Barrier run for the inverted oscillator started on the left below the
/// separatrix, where the real particle must turn back.
pub fn rebound_check(
    sys: &ExtendedSystem,
    start: PhasePoint,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<BarrierRun> {
    if sys.potential().kind() != PotentialKind::InvertedHarmonic {
        return usage("rebound check requires the inverted_harmonic potential");
    }
    if sys.flavor() != Flavor::Mfqm {
        return usage("rebound check runs the mfqm flavor");
    }
    let e_x = sys.h_classical(start.x, start.p) - sys.potential().eval(0.0);
    if !(e_x < 0.0) {
        return usage(format!(
            "initial.x/initial.p must lie below the separatrix (E_x < 0), got E_x = {e_x}"
        ));
    }
    if !(start.x < 0.0) {
        return usage(format!("initial.x must be negative, got {}", start.x));
    }
    barrier_run(sys, start, t_max, cfg)
}

/// Parameters of the random MFQM/CCM boundedness survey on a confining
/// potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomySettings {
    pub runs: usize,
    /// Fixed `H⁺` of the MFQM runs.
    pub mfqm_energy: f64,
    pub ccm_e_r: f64,
    pub ccm_delta_e: f64,
    pub t_max: f64,
    /// CCM runs count as escaped once they leave this multiple of the MFQM
    /// level-set bound.
    pub radius_factor: f64,
}

impl Default for DichotomySettings {
    fn default() -> Self {
        Self {
            runs: 50,
            mfqm_energy: 0.6,
            ccm_e_r: 0.3,
            ccm_delta_e: 0.1,
            t_max: 100.0,
            radius_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurveyRun {
    pub start: PhasePoint,
    pub termination: Termination,
    pub end_time: f64,
    pub max_norm: f64,
    /// End time of the same run at halved tolerances, for early terminations.
    pub end_time_halved: Option<f64>,
    pub generator_drift: f64,
    pub constraint_drift: f64,
    /// Relative drift of `H_cl(z±)`, MFQM runs only.
    pub chord_drift: Option<f64>,
}

impl SurveyRun {
    pub fn terminated_early(&self) -> bool {
        matches!(
            self.termination,
            Termination::Escaped | Termination::StepUnderflow
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub settings: DichotomySettings,
    pub bound: f64,
    pub detection_radius: f64,
    pub mfqm: Vec<SurveyRun>,
    pub ccm: Vec<SurveyRun>,
}

impl DichotomyReport {
    pub fn mfqm_bounded_fraction(&self) -> f64 {
        let inside = self.mfqm.iter().filter(|r| r.max_norm <= self.bound).count();
        inside as f64 / self.mfqm.len().max(1) as f64
    }

    pub fn ccm_escape_fraction(&self) -> f64 {
        let out = self.ccm.iter().filter(|r| r.terminated_early()).count();
        out as f64 / self.ccm.len().max(1) as f64
    }

    /// Largest relative change of an early termination time under
    /// tolerance halving.
    pub fn max_escape_time_change(&self) -> f64 {
        self.ccm
            .iter()
            .filter_map(|r| r.end_time_halved.map(|h| (h - r.end_time).abs() / r.end_time))
            .fold(0.0, f64::max)
    }
}

fn shell_point(sys: &ExtendedSystem, energy: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let v = sys.potential();
    let r = v.sublevel_radius(energy).expect("confining potential");
    loop {
        let x = rng.random_range(-r..=r);
        let vx = v.eval(x);
        if vx <= energy {
            let p = (2.0 * sys.mass() * (energy - vx)).sqrt();
            return (x, if rng.random::<bool>() { p } else { -p });
        }
    }
}

/// Random MFQM starts on `H⁺ = mfqm_energy` and random CCM starts
/// `(x₀, 0, p, q)` with `x₀` near either well bottom.
pub fn dichotomy_survey(
    potential_sys: &ExtendedSystem,
    settings: &DichotomySettings,
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<DichotomyReport> {
    if settings.runs == 0 {
        return usage("dichotomy.runs must be at least 1");
    }
    let mfqm = potential_sys.with_flavor(Flavor::Mfqm);
    let ccm = potential_sys.with_flavor(Flavor::Ccm);
    let (_, vmin) = global_minimum(mfqm.potential())?;
    let bound = mfqm_level_set_bound(&mfqm, settings.mfqm_energy)?;
    let detection_radius = settings.radius_factor * bound;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mfqm_starts = Vec::with_capacity(settings.runs);
    for _ in 0..settings.runs {
        let split = rng.random_range(0.0..(settings.mfqm_energy - vmin));
        let (xp, pp) = shell_point(&mfqm, settings.mfqm_energy + split, &mut rng);
        let (xm, pm) = shell_point(&mfqm, settings.mfqm_energy - split, &mut rng);
        mfqm_starts.push(PhasePoint::new(
            0.5 * (xp + xm),
            0.5 * (xp - xm),
            0.5 * (pp + pm),
            0.5 * (pp - pm),
        ));
    }
    let mut ccm_starts = Vec::with_capacity(settings.runs);
    for _ in 0..settings.runs {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let xw = well_bottom(ccm.potential(), side)?;
        let x0 = xw * rng.random_range(0.6..1.4);
        ccm_starts.push(ccm_initial_point(
            &ccm,
            settings.ccm_e_r,
            settings.ccm_delta_e,
            x0,
        )?);
    }

    let ccm_cfg = IntegratorConfig {
        escape_radius: detection_radius,
        ..cfg.clone()
    };
    let run = |sys: &ExtendedSystem, start: PhasePoint, cfg: &IntegratorConfig| {
        let traj = integrate(sys, start, (0.0, settings.t_max), cfg)?;
        let report = traj.conservation_report();
        let mut out = SurveyRun {
            start,
            termination: traj.termination,
            end_time: traj.end_time(),
            max_norm: traj.points.iter().map(|p| p.max_norm()).fold(0.0, f64::max),
            end_time_halved: None,
            generator_drift: report.max_generator_drift,
            constraint_drift: report.max_constraint_drift,
            chord_drift: (sys.flavor() == Flavor::Mfqm).then(|| chord_energy_drift(sys, &traj)),
        };
        if out.terminated_early() {
            let again = integrate(sys, start, (0.0, settings.t_max), &cfg.halved_tolerances())?;
            out.end_time_halved = Some(again.end_time());
        }
        Ok::<_, crate::Error>(out)
    };
    let mfqm_runs = mfqm_starts
        .par_iter()
        .map(|&s| run(&mfqm, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ccm_runs = ccm_starts
        .par_iter()
        .map(|&s| run(&ccm, s, &ccm_cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(DichotomyReport {
        settings: *settings,
        bound,
        detection_radius,
        mfqm: mfqm_runs,
        ccm: ccm_runs,
    })
}

/// Largest residuals of the structural identities over random points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub points: usize,
    /// `|{H⁻, H⁺}|`.
    pub mfqm_bracket: f64,
    /// `|{H_I, H_R}|`.
    pub ccm_bracket: f64,
    pub gamma_relation: f64,
    pub lambda_relation: f64,
    /// `|H⁺(x, iy, p, -iq) - H_R|`.
    pub complexified_plus: f64,
    /// `|H⁻(x, iy, p, -iq) - i H_I|`.
    pub complexified_minus: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.mfqm_bracket,
            self.ccm_bracket,
            self.gamma_relation,
            self.lambda_relation,
            self.complexified_plus,
            self.complexified_minus,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates every identity at `n` points drawn uniformly from `[-half_width, half_width]⁴`.
pub fn identity_battery(
    sys: &ExtendedSystem,
    n: usize,
    half_width: f64,
    seed: u64,
) -> Result<IdentityResiduals> {
    if n == 0 || !(half_width > 0.0) {
        return usage("identity.points must be at least 1 and identity.half_width positive");
    }
    let mfqm = sys.with_flavor(Flavor::Mfqm);
    let ccm = sys.with_flavor(Flavor::Ccm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IdentityResiduals {
        points: n,
        mfqm_bracket: 0.0,
        ccm_bracket: 0.0,
        gamma_relation: 0.0,
        lambda_relation: 0.0,
        complexified_plus: 0.0,
        complexified_minus: 0.0,
    };
    for _ in 0..n {
        let pt = PhasePoint::from_array(std::array::from_fn(|_| {
            rng.random_range(-half_width..=half_width)
        }));
        let bracket = poisson_bracket(&mfqm.h_minus(&pt)?, &mfqm.h_plus(&pt)?);
        out.mfqm_bracket = out.mfqm_bracket.max(bracket.abs());
        let bracket = poisson_bracket(&ccm.h_imag(&pt)?, &ccm.h_real(&pt)?);
        out.ccm_bracket = out.ccm_bracket.max(bracket.abs());
        out.gamma_relation = out.gamma_relation.max(mfqm.check_gamma_relation(&pt)?);
        out.lambda_relation = out.lambda_relation.max(ccm.check_lambda_relation(&pt)?);
        let (plus, minus) = complexification_identity(&mfqm, &ccm, &pt)?;
        out.complexified_plus = out.complexified_plus.max(plus);
        out.complexified_minus = out.complexified_minus.max(minus);
    }
    Ok(out)
}
