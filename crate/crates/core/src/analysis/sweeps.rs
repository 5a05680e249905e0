use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{fmt_opt, text_table};
use super::{ccm_double_well_run, dwell_analysis, DwellSummary};
use crate::dynamics::{integrate, IntegratorConfig, Termination, Trajectory};
use crate::error::{usage, Result};
use crate::hamiltonians::{ExtendedSystem, Flavor, PhasePoint};
use crate::oracle::SpectrumResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintySweepRow {
    pub delta_e: f64,
    /// Interval between the first two refined crossings; `None` with fewer
    /// than two crossings.
    pub delta_t: Option<f64>,
    pub product: Option<f64>,
    pub crossings: usize,
    pub span: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintySweep {
    pub rows: Vec<UncertaintySweepRow>,
    /// `max(product) / min(product)` over rows with a product.
    pub constancy_factor: Option<f64>,
}

fn check_positive_list(list: &[f64], name: &str) -> Result<()> {
    if list.is_empty() {
        return usage(format!("{name} must not be empty"));
    }
    if let Some(bad) = list.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return usage(format!("{name} entries must be positive, got {bad}"));
    }
    Ok(())
}

/// Runs the CCM start for every `ΔE` over `span_factor / ΔE` and measures the
/// first crossing interval of `x = cfg.crossing_surface`.
pub fn uncertainty_sweep(
    sys: &ExtendedSystem,
    e_r: f64,
    x0: f64,
    delta_e_list: &[f64],
    span_factor: f64,
    cfg: &IntegratorConfig,
) -> Result<UncertaintySweep> {
    check_positive_list(delta_e_list, "delta_E list")?;
    if !(span_factor > 0.0) {
        return usage("span_factor must be positive");
    }
    let rows = delta_e_list
        .par_iter()
        .map(|&de| {
            let span = span_factor / de;
            let traj = ccm_double_well_run(sys, e_r, de, x0, span, cfg)?;
            let cross = traj.crossings(cfg.crossing_surface);
            let delta_t = (cross.len() >= 2).then(|| cross[1].time - cross[0].time);
            Ok(UncertaintySweepRow {
                delta_e: de,
                delta_t,
                product: delta_t.map(|t| t * de),
                crossings: cross.len(),
                span,
                termination: traj.termination,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let products: Vec<f64> = rows.iter().filter_map(|r| r.product).collect();
    let constancy_factor = (!products.is_empty()).then(|| {
        let max = products.iter().copied().fold(f64::MIN, f64::max);
        let min = products.iter().copied().fold(f64::MAX, f64::min);
        max / min
    });
    Ok(UncertaintySweep {
        rows,
        constancy_factor,
    })
}

impl UncertaintySweep {
    /// CSV `delta_E,delta_t,product`; missing values are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delta_E,delta_t,product")?;
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.delta_e, cell(r.delta_t), cell(r.product))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{:.6e}", r.delta_e),
                    fmt_opt(r.delta_t),
                    fmt_opt(r.product),
                    r.crossings.to_string(),
                    format!("{:?}", r.termination),
                ]
            })
            .collect();
        let mut out = text_table(
            &["delta_E", "delta_t", "product", "crossings", "termination"],
            &rows,
        );
        out.push_str(&format!("constancy factor: {}\n", fmt_opt(self.constancy_factor)));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalLimitRow {
    pub hbar: f64,
    /// Max-norm distance of `(x, p)` from the real classical run.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalLimitSweep {
    pub rows: Vec<ClassicalLimitRow>,
    /// `log(d_i / d_{i+1}) / log(ħ_i / ħ_{i+1})` for consecutive rows.
    pub orders: Vec<f64>,
}

impl ClassicalLimitSweep {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].deviation < w[0].deviation)
    }

    /// CSV `hbar,deviation`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "hbar,deviation")?;
        for r in &self.rows {
            writeln!(w, "{},{}", r.hbar, r.deviation)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    format!("{}", r.hbar),
                    format!("{:.6e}", r.deviation),
                    self.orders.get(i.wrapping_sub(1)).map_or("-".into(), |o| format!("{o:.3}")),
                ]
            })
            .collect();
        text_table(&["hbar", "deviation", "order"], &rows)
    }
}

pub(super) fn deviation_from_classical(traj: &Trajectory, classical: &Trajectory) -> f64 {
    traj.times
        .iter()
        .zip(&traj.points)
        .filter_map(|(&t, pt)| {
            let c = classical.interpolate(t.min(classical.end_time()))?;
            Some((pt.x - c.x).abs().max((pt.p - c.p).abs()))
        })
        .fold(0.0, f64::max)
}

/// MFQM runs from the chord-scaled start `(x₀, ħȳ₀, p₀, ħq̄₀)` compared with
/// the real classical run from `(x₀, p₀)`, in the order of `hbar_list`.
pub fn classical_limit_sweep(
    sys: &ExtendedSystem,
    hbar_list: &[f64],
    scaled_start: PhasePoint,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<ClassicalLimitSweep> {
    check_positive_list(hbar_list, "hbar list")?;
    let classical_sys = sys.with_flavor(Flavor::ClassicalReal);
    let classical = integrate(
        &classical_sys,
        PhasePoint::new(scaled_start.x, 0.0, scaled_start.p, 0.0),
        (0.0, t_max),
        cfg,
    )?;
    let rows = hbar_list
        .par_iter()
        .map(|&hbar| {
            let run_sys =
                ExtendedSystem::new(sys.potential().clone(), sys.mass(), Flavor::Mfqm, hbar)?;
            let start = run_sys.scale_chord(scaled_start);
            let traj = integrate(&run_sys, start, (0.0, t_max), cfg)?;
            Ok(ClassicalLimitRow {
                hbar,
                deviation: deviation_from_classical(&traj, &classical),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = rows
        .windows(2)
        .map(|w| (w[0].deviation / w[1].deviation).ln() / (w[0].hbar / w[1].hbar).ln())
        .collect();
    Ok(ClassicalLimitSweep { rows, orders })
}

/// Which quantum state the dwell ratios are set against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StateConvention {
    /// Ground state `ψ₀`.
    #[default]
    Symmetric,
    /// First excited state `ψ₁`.
    Antisymmetric,
    /// `(ψ₀ + ψ₁)/√2`, or its negative combination when that is the one
    /// concentrated on the left.
    LocalizedLeft,
    LocalizedRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub delta_e: f64,
    pub dwell: DwellSummary,
    pub ratio: Option<f64>,
    /// Set when the run has no flip or no time on the right.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub convention: StateConvention,
    pub hbar: f64,
    pub e_r: f64,
    pub x0: f64,
    pub rows: Vec<ComparisonRow>,
    /// Intercept of a least-squares line through the three smallest `ΔE`
    /// with a ratio.
    pub extrapolated_ratio: Option<f64>,
    pub quantum_left: f64,
    pub quantum_right: f64,
    pub quantum_ratio: Option<f64>,
    pub splitting: Option<f64>,
}

fn linear_intercept(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}

/// CCM dwell ratios over `ΔE` next to the quantum well probabilities of the
/// chosen state. Runs last `span_factor / ΔE`.
#[allow(clippy::too_many_arguments)]
pub fn ccm_vs_quantum_report(
    sys: &ExtendedSystem,
    spectrum: &SpectrumResult,
    convention: StateConvention,
    e_r: f64,
    x0: f64,
    delta_e_list: &[f64],
    span_factor: f64,
    x_well_max: f64,
    cfg: &IntegratorConfig,
) -> Result<ComparisonReport> {
    check_positive_list(delta_e_list, "delta_E list")?;
    if spectrum.energies.len() < 2 && convention != StateConvention::Symmetric {
        return usage("the chosen state convention needs at least two levels");
    }
    let split = cfg.crossing_surface;
    let (quantum_left, quantum_right) = match convention {
        StateConvention::Symmetric => spectrum.well_probabilities(0, split)?,
        StateConvention::Antisymmetric => spectrum.well_probabilities(1, split)?,
        StateConvention::LocalizedLeft | StateConvention::LocalizedRight => {
            let plus = spectrum.probabilities_of(&spectrum.combination(0, 1, 1.0)?, split);
            let minus = spectrum.probabilities_of(&spectrum.combination(0, 1, -1.0)?, split);
            let (l, r) = if plus.0 >= minus.0 { (plus, minus) } else { (minus, plus) };
            if convention == StateConvention::LocalizedLeft { l } else { r }
        }
    };
    let rows = delta_e_list
        .par_iter()
        .map(|&de| {
            let traj = ccm_double_well_run(sys, e_r, de, x0, span_factor / de, cfg)?;
            let dwell = dwell_analysis(&traj, split, x_well_max);
            Ok(ComparisonRow {
                delta_e: de,
                dwell,
                ratio: dwell.ratio,
                flagged: dwell.flips == 0 || dwell.ratio.is_none(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.flagged)
        .filter_map(|r| r.ratio.map(|q| (r.delta_e, q)))
        .collect();
    usable.sort_by(|a, b| a.0.total_cmp(&b.0));
    usable.truncate(3);
    Ok(ComparisonReport {
        convention,
        hbar: spectrum.hbar,
        e_r,
        x0,
        rows,
        extrapolated_ratio: linear_intercept(&usable),
        quantum_left,
        quantum_right,
        quantum_ratio: (quantum_right > 0.0).then(|| quantum_left / quantum_right),
        splitting: spectrum.splitting(),
    })
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{:.6e}", r.delta_e),
                    format!("{:.6e}", r.dwell.time_left),
                    format!("{:.6e}", r.dwell.time_right),
                    format!("{:.6e}", r.dwell.excursion_time),
                    r.dwell.flips.to_string(),
                    fmt_opt(r.ratio),
                    if r.flagged { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        let mut out = text_table(
            &["delta_E", "time_left", "time_right", "excursion", "flips", "ratio", "flagged"],
            &rows,
        );
        out.push_str(&format!(
            "extrapolated ratio (delta_E -> 0): {}\n",
            fmt_opt(self.extrapolated_ratio)
        ));
        out.push_str(&format!(
            "quantum ({:?}, hbar = {}): P_left = {:.9}, P_right = {:.9}, ratio = {}\n",
            self.convention,
            self.hbar,
            self.quantum_left,
            self.quantum_right,
            fmt_opt(self.quantum_ratio)
        ));
        out
    }
}
