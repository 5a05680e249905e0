use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use xphase_core::analysis::{
    ccm_double_well_run, ccm_vs_quantum_report, classical_limit_sweep, dwell_analysis,
    fit_sho_ellipse, identity_battery, mfqm_double_well_run, rebound_check, uncertainty_sweep,
};
use xphase_core::dynamics::integrate;
use xphase_core::ensemble::{
    quadratic_flow_map, sample_gaussian_wigner, separatrix_fraction, transport, write_csv,
    MomentSummary,
};
use xphase_core::oracle::eigensolve;
use xphase_core::potentials::PotentialKind;
use xphase_core::{Error, ExtendedSystem, Flavor, PhasePoint, Potential, Result};

use crate::config::ExperimentConfig;

/// Files and the one-line summary produced by a subcommand.
pub struct Outcome {
    pub summary: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new(summary: String) -> Self {
        Self {
            summary,
            files: Vec::new(),
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    fn with<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn system(cfg: &ExperimentConfig, flavor: Flavor) -> Result<ExtendedSystem> {
    let v = Potential::try_from(&cfg.potential)?;
    ExtendedSystem::new(v, cfg.mass, flavor, cfg.hbar)
}

fn point(a: [f64; 4]) -> PhasePoint {
    PhasePoint::from_array(a)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = system(cfg, cfg.flavor)?;
    let mut start = point(cfg.simulate.initial);
    if cfg.simulate.scaled {
        start = sys.scale_chord(start);
    }
    let traj = integrate(&sys, start, (0.0, cfg.simulate.t_max), &cfg.integrator)?;
    let report = traj.conservation_report();
    let mut out = Outcome::new(format!(
        "simulate: {} steps, termination {:?}, generator drift {:.3e}, constraint drift {:.3e}",
        traj.len() - 1,
        traj.termination,
        report.max_generator_drift,
        report.max_constraint_drift
    ));
    out.with("trajectory.csv", |w| traj.write_csv(w))?;
    let mut events = traj.events_json();
    events["conservation"] = serde_json::to_value(report)?;
    out.json("events.json", &events)?;
    Ok(out)
}

pub fn dwell(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = &cfg.dwell;
    let sys = system(cfg, cfg.flavor)?;
    let traj = match cfg.flavor {
        Flavor::Ccm => ccm_double_well_run(&sys, d.energy, d.delta_e, d.x0, d.t_max, &cfg.integrator)?,
        Flavor::Mfqm => {
            mfqm_double_well_run(&sys, d.energy, d.delta_e, d.x0, d.t_max, &cfg.integrator)?
        }
        Flavor::ClassicalReal => {
            return Err(Error::Usage(
                "config field `flavor` must be mfqm or ccm for dwell".into(),
            ))
        }
    };
    let summary = dwell_analysis(&traj, cfg.integrator.crossing_surface, d.x_well_max);
    let mut out = Outcome::new(format!(
        "dwell: flips {}, left {:.6}, right {:.6}, excursion {:.6}, ratio {}",
        summary.flips,
        summary.time_left,
        summary.time_right,
        summary.excursion_time,
        summary.ratio.map_or("undefined".into(), |r| format!("{r:.6}"))
    ));
    out.json(
        "dwell.json",
        &json!({
            "flavor": cfg.flavor,
            "initial": traj.points[0],
            "summary": summary,
            "conservation": traj.conservation_report(),
        }),
    )?;
    out.with("trajectory.csv", |w| traj.write_csv(w))?;
    Ok(out)
}

pub fn sweep_uncertainty(cfg: &ExperimentConfig) -> Result<Outcome> {
    let u = &cfg.uncertainty;
    let sys = system(cfg, Flavor::Ccm)?;
    let sweep = uncertainty_sweep(&sys, u.e_r, u.x0, &u.delta_e, u.span_factor, &u.integrator)?;
    let complete = sweep.rows.iter().filter(|r| r.delta_t.is_some()).count();
    let mut out = Outcome::new(format!(
        "sweep-uncertainty: {complete}/{} rows with delta_t, constancy factor {}",
        sweep.rows.len(),
        sweep
            .constancy_factor
            .map_or("undefined".into(), |c| format!("{c:.6}"))
    ));
    out.with("uncertainty.csv", |w| sweep.write_csv(w))?;
    out.json("uncertainty.json", &sweep)?;
    out.text("uncertainty.txt", sweep.to_text());
    Ok(out)
}

pub fn sweep_hbar(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = &cfg.classical_limit;
    let sys = system(cfg, Flavor::Mfqm)?;
    let sweep = classical_limit_sweep(&sys, &c.hbar, point(c.start), c.t_max, &cfg.integrator)?;
    let mut out = Outcome::new(format!(
        "sweep-hbar: {} rows, strictly decreasing: {}",
        sweep.rows.len(),
        sweep.strictly_decreasing()
    ));
    out.with("classical_limit.csv", |w| sweep.write_csv(w))?;
    out.json(
        "classical_limit.json",
        &json!({
            "rows": sweep.rows,
            "orders": sweep.orders,
            "strictly_decreasing": sweep.strictly_decreasing(),
        }),
    )?;
    out.text("classical_limit.txt", sweep.to_text());
    Ok(out)
}

pub fn ellipse_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.potential.kind != PotentialKind::Harmonic {
        return Err(Error::Usage(
            "config field `potential.kind` must be harmonic for ellipse-check".into(),
        ));
    }
    let mfqm = system(cfg, Flavor::Mfqm)?;
    let ccm = system(cfg, Flavor::Ccm)?;
    let start = point(cfg.ellipse.initial);
    let matched = PhasePoint::new(start.x, start.y, start.p, -start.q);
    let k = 2.0 * mfqm.potential().coefficients()[2];
    let period = TAU / (k / cfg.mass).sqrt();
    let span = (0.0, cfg.ellipse.periods * period);
    let tm = integrate(&mfqm, start, span, &cfg.integrator)?;
    let tc = integrate(&ccm, matched, span, &cfg.integrator)?;
    let fm = fit_sho_ellipse(&mfqm, &tm)?;
    let fc = fit_sho_ellipse(&ccm, &tc)?;
    let gap = |log: &[f64], v: f64| log.iter().fold(0.0f64, |m, c| m.max((c - v).abs()));
    let xy_gap = tm
        .times
        .iter()
        .zip(&tm.points)
        .filter_map(|(&t, a)| {
            tc.interpolate(t)
                .map(|b| (a.x - b.x).abs().max((a.y - b.y).abs()))
        })
        .fold(0.0, f64::max);
    let constraint_gap = gap(&tm.constraint_log, fm.predicted_constraint)
        .max(gap(&tc.constraint_log, fc.predicted_constraint));
    let mut out = Outcome::new(format!(
        "ellipse-check: A {:.9}, B {:.9}, residual {:.3e}, constraint gap {:.3e}, xy gap {:.3e}",
        fm.a,
        fm.b,
        fm.residual_rms.max(fc.residual_rms),
        constraint_gap,
        xy_gap
    ));
    out.json(
        "ellipse.json",
        &json!({
            "mfqm": fm,
            "ccm": fc,
            "mfqm_constraint_gap": gap(&tm.constraint_log, fm.predicted_constraint),
            "ccm_constraint_gap": gap(&tc.constraint_log, fc.predicted_constraint),
            "xy_gap": xy_gap,
        }),
    )?;
    Ok(out)
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let v = Potential::try_from(&cfg.potential)?;
    let s = &cfg.spectrum;
    let result = eigensolve(&v, &s.grid, cfg.hbar, cfg.mass, s.levels)?;
    let mut out = Outcome::new(format!(
        "spectrum: {} levels, E0 {:.12}, splitting {}",
        result.energies.len(),
        result.energies[0],
        result
            .splitting()
            .map_or("-".into(), |d| format!("{d:.6e}"))
    ));
    out.json("spectrum.json", &result.to_json())?;
    if s.wavefunctions {
        out.with("wavefunctions.csv", |w| result.write_wavefunctions_csv(w))?;
    }
    Ok(out)
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let v = Potential::try_from(&cfg.potential)?;
    let c = &cfg.compare;
    let spectrum = eigensolve(&v, &cfg.spectrum.grid, cfg.hbar, cfg.mass, cfg.spectrum.levels.max(2))?;
    let sys = system(cfg, Flavor::Ccm)?;
    let report = ccm_vs_quantum_report(
        &sys,
        &spectrum,
        c.state,
        c.e_r,
        c.x0,
        &c.delta_e,
        c.span_factor,
        c.x_well_max,
        &cfg.integrator,
    )?;
    let flagged = report.rows.iter().filter(|r| r.flagged).count();
    let mut out = Outcome::new(format!(
        "compare: {} rows ({flagged} flagged), extrapolated ratio {}, quantum ratio {}",
        report.rows.len(),
        report
            .extrapolated_ratio
            .map_or("undefined".into(), |r| format!("{r:.6}")),
        report
            .quantum_ratio
            .map_or("undefined".into(), |r| format!("{r:.6}"))
    ));
    out.json("compare.json", &report)?;
    out.text("compare.txt", report.to_text());
    Ok(out)
}

pub fn ensemble(cfg: &ExperimentConfig) -> Result<Outcome> {
    let e = &cfg.ensemble;
    let sys = system(cfg, Flavor::ClassicalReal)?;
    let cloud = sample_gaussian_wigner(
        e.center[0],
        e.center[1],
        e.sigma_x,
        e.sigma_p,
        e.samples,
        cfg.seed,
    )?;
    let moved = transport(&cloud.samples, &sys, e.t, &cfg.integrator)?;
    let initial = MomentSummary::of(&cloud.samples);
    let fin = MomentSummary::of(&moved);
    let mut report = json!({
        "samples": e.samples,
        "seed": cfg.seed,
        "t": e.t,
        "uncertainty_product": cloud.uncertainty_product,
        "respects_uncertainty": cloud.respects_uncertainty(cfg.hbar),
        "initial_moments": initial,
        "final_moments": fin,
    });
    if let Some(m) = quadratic_flow_map(&sys, e.t) {
        report["predicted_moments"] = serde_json::to_value(initial.pushforward(m))?;
    }
    let mut summary = format!(
        "ensemble: {} samples transported to t = {}, mean ({:.6}, {:.6})",
        e.samples, e.t, fin.mean_x, fin.mean_p
    );
    if sys.potential().kind() == PotentialKind::InvertedHarmonic {
        let fraction = separatrix_fraction(&cloud.samples, &sys)?;
        let mfqm = sys.with_flavor(Flavor::Mfqm);
        let rebound = rebound_check(
            &mfqm,
            point(e.rebound_initial),
            e.rebound_t_max,
            &cfg.integrator,
        )
        .map_err(|err| match err {
            Error::Usage(m) => Error::Usage(format!("ensemble.rebound_initial: {m}")),
            other => other,
        })?;
        report["separatrix_fraction"] = Value::from(fraction);
        report["rebound"] = serde_json::to_value(rebound)?;
        summary.push_str(&format!(
            ", separatrix fraction {fraction:.6}, rebound crossings {}",
            rebound.crossings
        ));
    }
    let mut out = Outcome::new(summary);
    out.with("ensemble.csv", |w| write_csv(&moved, w))?;
    out.json("ensemble.json", &report)?;
    Ok(out)
}

pub fn identity_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = system(cfg, Flavor::Mfqm)?;
    let r = identity_battery(&sys, cfg.identity.points, cfg.identity.half_width, cfg.seed)?;
    let mut out = Outcome::new(format!(
        "identity-check: {} points, brackets {:.3e}/{:.3e}, gamma {:.3e}, lambda {:.3e}, complexification {:.3e}/{:.3e}",
        r.points,
        r.mfqm_bracket,
        r.ccm_bracket,
        r.gamma_relation,
        r.lambda_relation,
        r.complexified_plus,
        r.complexified_minus
    ));
    out.json("identity.json", &r)?;
    Ok(out)
}
