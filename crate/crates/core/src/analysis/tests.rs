use std::f64::consts::{FRAC_PI_2, PI};

use super::sweeps::deviation_from_classical;
use super::*;
use crate::dynamics::{integrate, IntegratorConfig, Termination};
use crate::error::Error;
use crate::hamiltonians::{ExtendedSystem, Flavor, PhasePoint};
use crate::oracle::{eigensolve, Grid1D};
use crate::potentials::Potential;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn sys(v: Potential, flavor: Flavor) -> ExtendedSystem {
    ExtendedSystem::unit(v, flavor)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[test]
fn potential_landmarks() {
    let dw = Potential::double_well();
    assert_eq!(barrier_height(&dw), Some(1.0));
    assert_eq!(barrier_height(&Potential::harmonic()), None);
    assert!((well_bottom(&dw, 1.0).unwrap() - 1.0).abs() < 1e-7);
    assert!((well_bottom(&dw, -1.0).unwrap() + 1.0).abs() < 1e-7);
    let (x, v) = global_minimum(&Potential::harmonic()).unwrap();
    assert!(x.abs() < 1e-7 && v.abs() < 1e-14);
    assert!(global_minimum(&Potential::inverted_harmonic()).is_err());
    let bound = mfqm_level_set_bound(&sys(dw, Flavor::Mfqm), 0.6).unwrap();
    assert!((bound - (1.0 + 1.2f64.sqrt()).sqrt()).abs() < 1e-10);
}

#[test]
fn ellipse_of_unit_circle_start() {
    let s = sys(Potential::harmonic(), Flavor::Mfqm);
    let traj = integrate(&s, PhasePoint::new(1.0, 0.0, 0.0, 1.0), (0.0, 20.0 * PI), &cfg()).unwrap();
    let fit = fit_sho_ellipse(&s, &traj).unwrap();
    assert!((fit.a - 1.0).abs() < 1e-8 && (fit.b - 1.0).abs() < 1e-8);
    assert!(angle_diff(fit.alpha1, FRAC_PI_2) < 1e-8);
    assert!(angle_diff(fit.alpha2, 0.0) < 1e-8);
    assert!(fit.predicted_constraint.abs() < 1e-8);
    assert!(fit.residual_rms < 1e-8);
    assert!(traj.constraint_log.iter().all(|c| (c - fit.predicted_constraint).abs() < 1e-8));
}

#[test]
fn ellipse_degenerate_line() {
    let s = sys(Potential::harmonic(), Flavor::Mfqm);
    let traj = integrate(&s, PhasePoint::new(1.0, 0.0, 0.0, 0.0), (0.0, 4.0 * PI), &cfg()).unwrap();
    let fit = fit_sho_ellipse(&s, &traj).unwrap();
    assert!(fit.b < 1e-12);
    assert!(fit.predicted_constraint.abs() < 1e-12);
}

#[test]
fn ellipse_identical_for_both_flavors() {
    let mfqm = sys(Potential::harmonic(), Flavor::Mfqm);
    let ccm = sys(Potential::harmonic(), Flavor::Ccm);
    let span = (0.0, 20.0 * PI);
    let tm = integrate(&mfqm, PhasePoint::new(1.0, 0.5, 0.0, 0.0), span, &cfg()).unwrap();
    let tc = integrate(&ccm, PhasePoint::new(1.0, 0.5, 0.0, 0.0), span, &cfg()).unwrap();
    let fm = fit_sho_ellipse(&mfqm, &tm).unwrap();
    let fc = fit_sho_ellipse(&ccm, &tc).unwrap();
    assert!((fm.a - fc.a).abs() < 1e-8 && (fm.b - fc.b).abs() < 1e-8);
    for (traj, fit) in [(&tm, &fm), (&tc, &fc)] {
        assert!(fit.residual_rms < 1e-8);
        assert!(traj
            .constraint_log
            .iter()
            .all(|c| (c - fit.predicted_constraint).abs() < 1e-8));
    }
    for &t in &tm.times {
        let (a, b) = (tm.interpolate(t).unwrap(), tc.interpolate(t).unwrap());
        assert!((a.x - b.x).abs() < 1e-8 && (a.y - b.y).abs() < 1e-8);
    }
}

#[test]
fn ellipse_rejects_other_systems() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    let traj = integrate(&s, PhasePoint::new(1.0, 0.0, 0.0, 0.0), (0.0, 1.0), &cfg()).unwrap();
    assert!(matches!(fit_sho_ellipse(&s, &traj), Err(Error::Usage(_))));
}

#[test]
fn dwell_of_sine() {
    let s = sys(Potential::harmonic(), Flavor::ClassicalReal);
    let traj = integrate(&s, PhasePoint::new(0.0, 0.0, 1.0, 0.0), (0.0, 2.0 * PI), &cfg()).unwrap();
    let d = dwell_analysis(&traj, 0.0, f64::INFINITY);
    assert!((d.time_left - PI).abs() < 1e-8, "{d:?}");
    assert!((d.time_right - PI).abs() < 1e-8);
    assert_eq!(d.flips, 2);
    assert_eq!(d.excursion_time, 0.0);
}

#[test]
fn dwell_without_crossing() {
    let s = sys(Potential::double_well(), Flavor::ClassicalReal);
    let traj = integrate(&s, PhasePoint::new(1.1, 0.0, 0.0, 0.0), (0.0, 10.0), &cfg()).unwrap();
    let d = dwell_analysis(&traj, 0.0, 2.0);
    assert_eq!(d.flips, 0);
    assert_eq!(d.time_left, 0.0);
    assert!((d.time_right - 10.0).abs() < 1e-12);
    let left = dwell_analysis(
        &integrate(&s, PhasePoint::new(-1.1, 0.0, 0.0, 0.0), (0.0, 10.0), &cfg()).unwrap(),
        0.0,
        2.0,
    );
    assert_eq!(left.ratio, None);
}

#[test]
fn dwell_of_ccm_double_well_is_tolerance_stable() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    let a = dwell_analysis(&ccm_double_well_run(&s, 0.3, 0.1, 1.0, 100.0, &cfg()).unwrap(), 0.0, 2.0);
    let b = dwell_analysis(
        &ccm_double_well_run(&s, 0.3, 0.1, 1.0, 100.0, &cfg().halved_tolerances()).unwrap(),
        0.0,
        2.0,
    );
    assert!(a.flips >= 1);
    for (u, v) in [(a.time_left, b.time_left), (a.time_right, b.time_right)] {
        assert!((u - v).abs() < 1e-4 * u.max(v), "{a:?} {b:?}");
    }
}

#[test]
fn ccm_start_for_harmonic_example() {
    let s = sys(Potential::harmonic(), Flavor::Ccm);
    let pt = ccm_initial_point(&s, 0.5, 0.25, 1.0).unwrap();
    assert!((pt.p + 0.5).abs() < 1e-14 && (pt.q - 0.5).abs() < 1e-14, "{pt:?}");
    assert!((s.h_real(&pt).unwrap().value - 0.5).abs() < 1e-14);
    assert!((s.h_imag(&pt).unwrap().value - 0.25).abs() < 1e-14);
    let mirror = ccm_initial_point(&s, 0.5, 0.25, -1.0).unwrap();
    assert_eq!(mirror, pt.reflected());
    let traj = ccm_double_well_run(&s, 0.5, 0.25, 1.0, 10.0, &cfg()).unwrap();
    assert!(traj.generator_log.iter().all(|h| (h - 0.5).abs() < 1e-9));
    assert!(traj.constraint_log.iter().all(|h| (h - 0.25).abs() < 1e-9));
}

#[test]
fn ccm_start_small_delta_at_turning_point() {
    let v = Potential::double_well();
    let s = sys(v.clone(), Flavor::Ccm);
    let x0 = 1.2;
    let pt = ccm_initial_point(&s, v.eval(x0), 1e-10, x0).unwrap();
    assert!(pt.p.abs() < 1e-4 && pt.q.abs() < 1e-4);
    let traj = ccm_double_well_run(&s, v.eval(x0), 1e-10, x0, 20.0, &cfg()).unwrap();
    assert!(traj.points.iter().all(|p| p.x > 0.5), "left the well");
}

#[test]
fn ccm_start_preconditions() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    assert!(matches!(ccm_initial_point(&s, 1.2, 0.1, 1.0), Err(Error::Domain(_))));
    assert!(matches!(ccm_initial_point(&s, 0.3, 0.0, 1.0), Err(Error::Usage(_))));
    let wrong = sys(Potential::double_well(), Flavor::Mfqm);
    assert!(ccm_initial_point(&wrong, 0.3, 0.1, 1.0).is_err());
}

#[test]
fn ccm_double_well_flips_or_escapes() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    for de in [0.05, 0.1, 0.2] {
        let traj = ccm_double_well_run(&s, 0.3, de, 1.0, 100.0, &cfg()).unwrap();
        let flips = traj.crossings(0.0).len();
        assert!(flips >= 1 || traj.termination != Termination::Completed, "{de}");
        let pt = traj.points[0];
        assert!((s.h_real(&pt).unwrap().value - 0.3).abs() < 1e-14);
        assert!((s.h_imag(&pt).unwrap().value - de).abs() < 1e-14);
    }
}

#[test]
fn mfqm_without_split_is_classical() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    let traj = mfqm_double_well_run(&s, 0.6, 0.0, 1.0, 30.0, &cfg()).unwrap();
    assert!(traj.points.iter().all(|p| p.y == 0.0 && p.q == 0.0));
    assert_eq!(traj.crossings(0.0).len(), 0);
    let c = sys(Potential::double_well(), Flavor::ClassicalReal);
    let start = traj.points[0];
    let real = integrate(&c, PhasePoint::new(start.x, 0.0, start.p, 0.0), (0.0, 30.0), &cfg()).unwrap();
    assert!(deviation_from_classical(&traj, &real) < 1e-8);
}

#[test]
fn mfqm_asymmetric_flipping() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    let start = mfqm_initial_point(&s, 0.6, 0.6, 1.0).unwrap();
    let (plus, minus) = s.chord_energies(&start);
    assert!((plus - 1.2).abs() < 1e-12 && minus.abs() < 1e-12);
    let traj = mfqm_double_well_run(&s, 0.6, 0.6, 1.0, 100.0, &cfg()).unwrap();
    assert!(traj.points.iter().all(|p| s.chord_energies(p).1.abs() < 1e-8));
    assert!(chord_energy_drift(&s, &traj) < 1e-8);
    let d = dwell_analysis(&traj, 0.0, 2.0);
    assert!(d.flips >= 2);
    assert!(d.time_right > 2.0 * d.time_left, "{d:?}");
}

#[test]
fn mfqm_start_preconditions() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    assert!(matches!(mfqm_initial_point(&s, 0.6, 0.7, 1.0), Err(Error::Domain(_))));
    assert!(matches!(mfqm_initial_point(&s, 1.5, 0.1, 1.0), Err(Error::Domain(_))));
    assert!(mfqm_initial_point(&s, 0.6, -0.1, 1.0).is_err());
}

#[test]
fn sweep_on_harmonic_control() {
    let s = sys(Potential::harmonic(), Flavor::Ccm);
    let list = [0.4, 0.2, 0.1];
    let sweep = uncertainty_sweep(&s, 0.5, 1.0, &list, 4.0, &cfg()).unwrap();
    for (row, de) in sweep.rows.iter().zip(list) {
        assert_eq!(row.delta_e, de);
        let dt = row.delta_t.unwrap();
        assert!((dt - PI).abs() < 1e-8, "{row:?}");
        assert!((row.product.unwrap() - PI * de).abs() < 1e-8);
    }
    assert!((sweep.constancy_factor.unwrap() - 4.0).abs() < 1e-7);
}

#[test]
fn sweep_rejects_nonpositive_entries() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    assert!(matches!(
        uncertainty_sweep(&s, 0.3, 1.0, &[0.1, 0.0], 40.0, &cfg()),
        Err(Error::Usage(_))
    ));
}

#[test]
fn sweep_reports_missing_intervals() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    let sweep = uncertainty_sweep(&s, 0.3, 1.0, &[0.2, 0.02], 1.0, &cfg()).unwrap();
    assert!(sweep.rows.iter().all(|r| r.delta_t.is_none() && r.product.is_none()));
    assert_eq!(sweep.constancy_factor, None);
    let mut csv = Vec::new();
    sweep.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "delta_E,delta_t,product\n0.2,,\n0.02,,\n");
}

#[test]
fn classical_limit_on_harmonic_is_exact() {
    let s = sys(Potential::harmonic(), Flavor::Mfqm);
    let sweep =
        classical_limit_sweep(&s, &[0.4, 0.2, 0.1], PhasePoint::new(1.0, 1.0, 0.3, 0.0), 10.0, &cfg())
            .unwrap();
    assert!(sweep.rows.iter().all(|r| r.deviation < 1e-8), "{sweep:?}");
}

#[test]
fn classical_limit_on_double_well_contracts() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    let sweep = classical_limit_sweep(
        &s,
        &[0.4, 0.2, 0.1, 0.05],
        PhasePoint::new(1.0, 1.0, 0.3, 0.0),
        10.0,
        &cfg(),
    )
    .unwrap();
    assert!(sweep.strictly_decreasing(), "{sweep:?}");
    assert!(sweep.orders.last().unwrap() > &1.5);
    let c = sys(Potential::double_well(), Flavor::ClassicalReal);
    let real = integrate(&c, PhasePoint::new(1.0, 0.0, 0.3, 0.0), (0.0, 10.0), &cfg()).unwrap();
    assert_eq!(deviation_from_classical(&real, &real), 0.0);
}

#[test]
fn rebound_below_separatrix() {
    let s = sys(Potential::inverted_harmonic(), Flavor::Mfqm);
    let r = rebound_check(&s, PhasePoint::new(-3.0, 0.0, 0.0, 0.0), 20.0, &cfg()).unwrap();
    assert_eq!(r.crossings, 0);
    assert!((r.e_x + 4.5).abs() < 1e-14);
    assert!((r.min_abs_x - 3.0).abs() < 1e-6);
    let r = rebound_check(&s, PhasePoint::new(-3.0, 1.0, 0.0, 2.0), 20.0, &cfg()).unwrap();
    assert_eq!(r.crossings, 0);
    let r = rebound_check(&s, PhasePoint::new(-3.0, 0.0, 2.0, 0.0), 20.0, &cfg()).unwrap();
    // E_x = 2 - 4.5, turning point at √5.
    assert!((r.min_abs_x - 5f64.sqrt()).abs() < 1e-6, "{r:?}");
}

#[test]
fn rebound_control_crosses() {
    let s = sys(Potential::inverted_harmonic(), Flavor::Mfqm);
    let start = PhasePoint::new(-1.0, 0.0, 2.0, 0.0);
    assert!(matches!(rebound_check(&s, start, 20.0, &cfg()), Err(Error::Usage(_))));
    let r = barrier_run(&s, start, 20.0, &cfg()).unwrap();
    assert!((r.e_x - 1.5).abs() < 1e-14);
    assert_eq!(r.crossings, 1);
    assert_eq!(r.min_abs_x, 0.0);
}

fn small_spectrum() -> crate::oracle::SpectrumResult {
    eigensolve(
        &Potential::double_well(),
        &Grid1D::new(-2.5, 2.5, 1001).unwrap(),
        0.1,
        1.0,
        2,
    )
    .unwrap()
}

#[test]
fn comparison_report() {
    let s = sys(Potential::double_well(), Flavor::Ccm);
    let spectrum = small_spectrum();
    let list = [0.2, 0.1, 0.05];
    let run = |x0: f64, conv| {
        ccm_vs_quantum_report(&s, &spectrum, conv, 0.3, x0, &list, 10.0, 2.0, &cfg()).unwrap()
    };
    let right = run(1.0, StateConvention::Symmetric);
    assert!((right.quantum_left - 0.5).abs() < 1e-8 && (right.quantum_right - 0.5).abs() < 1e-8);
    let left = run(-1.0, StateConvention::Symmetric);
    for (a, b) in right.rows.iter().zip(&left.rows) {
        let m = b.dwell.mirrored();
        assert!((a.dwell.time_left - m.time_left).abs() < 1e-6);
        assert!((a.dwell.time_right - m.time_right).abs() < 1e-6);
        assert_eq!(a.dwell.flips, b.dwell.flips);
    }
    let again = run(1.0, StateConvention::Symmetric);
    assert_eq!(
        serde_json::to_string(&right).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    let localized = run(1.0, StateConvention::LocalizedLeft);
    assert!(localized.quantum_left > 0.99);
    assert!((localized.quantum_left + localized.quantum_right - 1.0).abs() < 1e-12);
    assert!(right.to_text().contains("quantum"));
}

#[test]
fn small_dichotomy_survey() {
    let s = sys(Potential::double_well(), Flavor::Mfqm);
    let settings = DichotomySettings {
        runs: 8,
        radius_factor: 3.0,
        ..Default::default()
    };
    let r = dichotomy_survey(&s, &settings, &cfg(), 3).unwrap();
    assert_eq!(r.mfqm.len(), 8);
    assert_eq!(r.mfqm_bounded_fraction(), 1.0);
    assert!(r.ccm_escape_fraction() >= 0.8);
    for run in &r.mfqm {
        let h = s.generator(&run.start).value;
        assert!((h - 0.6).abs() < 1e-12);
    }
    let again = dichotomy_survey(&s, &settings, &cfg(), 3).unwrap();
    assert_eq!(r, again);
}

#[test]
fn text_table_alignment() {
    let t = text_table(&["a", "long"], &[vec!["123".into(), "x".into()]]);
    assert_eq!(t, "  a  long\n123     x\n");
}

#[test]
fn identity_battery_is_tight() {
    for v in [Potential::harmonic(), Potential::inverted_harmonic(), Potential::double_well()] {
        let r = identity_battery(&sys(v, Flavor::Mfqm), 200, 2.0, 9).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
    }
    assert!(identity_battery(&sys(Potential::harmonic(), Flavor::Mfqm), 0, 2.0, 9).is_err());
}
