//! Integration of the flavor-selected Hamilton flow.
//!
//! The default method is the explicit Dormand-Prince 5(4) pair with
//! embedded error control; implicit midpoint is available at a fixed step
//! for conservation studies. Trajectories stop early when the state leaves
//! the escape radius or the step size collapses below `min_step`, which is
//! how finite-time excursions of complex classical trajectories show up.

mod events;
mod steppers;

pub use events::{hermite, hermite_rate, refine_crossing, side, CROSSING_TOL};
pub use steppers::implicit_midpoint_step;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::hamiltonians::{ExtendedSystem, Flavor, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AdaptiveRk,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Rejected steps shrinking below this end the run with `StepUnderflow`.
    pub min_step: f64,
    pub escape_radius: f64,
    pub method: Method,
    /// Disables step-size control when set. Required by `ImplicitMidpoint`.
    pub fixed_step: Option<f64>,
    /// Position `x = s` of the dividing surface for `WellCrossing` events.
    pub crossing_surface: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            min_step: 1e-12,
            escape_radius: 1e6,
            method: Method::AdaptiveRk,
            fixed_step: None,
            crossing_surface: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return usage("integrator.rel_tol and integrator.abs_tol must be positive");
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return usage("integrator.min_step must be positive and below integrator.max_step");
        }
        if !(self.escape_radius > 0.0) {
            return usage("integrator.escape_radius must be positive");
        }
        match self.fixed_step {
            Some(h) if !(h > 0.0 && h.is_finite()) => {
                usage("integrator.fixed_step must be positive")
            }
            None if self.method == Method::ImplicitMidpoint => {
                usage("integrator.fixed_step is required for method implicit_midpoint")
            }
            _ => Ok(()),
        }
    }

    /// The same configuration with both tolerances halved.
    pub fn halved_tolerances(&self) -> Self {
        Self {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.5 * self.abs_tol,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Escaped,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    WellCrossing { direction: i8 },
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    pub point: PhasePoint,
}

/// Maximum drift of the two conserved quantities, each normalized by
/// `max(1, |initial value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub max_generator_drift: f64,
    pub max_constraint_drift: f64,
}

/// A refined crossing of a surface `x = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub direction: i8,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub flavor: Flavor,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Vector field at each stored point; feeds the Hermite dense output.
    pub velocities: Vec<[f64; 4]>,
    /// `H⁺`, `H_R` or `H_cl` per point.
    pub generator_log: Vec<f64>,
    /// `H⁻`, `H_I` or zero per point.
    pub constraint_log: Vec<f64>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    fn new(flavor: Flavor) -> Self {
        Self {
            flavor,
            times: Vec::new(),
            points: Vec::new(),
            velocities: Vec::new(),
            generator_log: Vec::new(),
            constraint_log: Vec::new(),
            events: Vec::new(),
            termination: Termination::Completed,
        }
    }

    fn push(&mut self, sys: &ExtendedSystem, t: f64, pt: PhasePoint, f: [f64; 4]) {
        self.times.push(t);
        self.points.push(pt);
        self.velocities.push(f);
        self.generator_log.push(sys.generator(&pt).value);
        self.constraint_log.push(sys.constraint(&pt).value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn last_point(&self) -> PhasePoint {
        *self.points.last().expect("trajectory is never empty")
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` containing `t`.
    fn segment_of(&self, t: f64) -> Option<usize> {
        if self.len() < 2 || t < self.start_time() || t > self.end_time() {
            return None;
        }
        let i = self.times.partition_point(|&s| s <= t);
        Some(i.saturating_sub(1).min(self.len() - 2))
    }

    /// Hermite dense output on segment `i`.
    pub fn interpolate_in(&self, i: usize, t: f64) -> PhasePoint {
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (y0, y1) = (self.points[i].to_array(), self.points[i + 1].to_array());
        let (f0, f1) = (&self.velocities[i], &self.velocities[i + 1]);
        PhasePoint::from_array(std::array::from_fn(|k| {
            hermite(t0, t1 - t0, y0[k], y1[k], f0[k], f1[k], t)
        }))
    }

    /// Component `k` of the dense output on segment `i` and its rate.
    pub fn component_in(&self, i: usize, k: usize, t: f64) -> (f64, f64) {
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (y0, y1) = (self.points[i].to_array()[k], self.points[i + 1].to_array()[k]);
        let (f0, f1) = (self.velocities[i][k], self.velocities[i + 1][k]);
        (
            hermite(t0, t1 - t0, y0, y1, f0, f1, t),
            hermite_rate(t0, t1 - t0, y0, y1, f0, f1, t),
        )
    }

    /// Dense output at time `t`, or `None` outside the stored span.
    pub fn interpolate(&self, t: f64) -> Option<PhasePoint> {
        if self.len() == 1 && t == self.start_time() {
            return Some(self.points[0]);
        }
        self.segment_of(t).map(|i| self.interpolate_in(i, t))
    }

    /// All refined crossings of `x = surface` along the dense output.
    pub fn crossings(&self, surface: f64) -> Vec<Crossing> {
        let mut out = Vec::new();
        for i in 0..self.len().saturating_sub(1) {
            if let Some(c) = self.crossing_in(i, surface) {
                out.push(c);
            }
        }
        out
    }

    fn crossing_in(&self, i: usize, surface: f64) -> Option<Crossing> {
        let (a, b) = (self.times[i], self.times[i + 1]);
        let sa = side(self.points[i].x - surface, self.velocities[i][0]);
        let sb = side(self.points[i + 1].x - surface, self.velocities[i + 1][0]);
        if sa == sb {
            return None;
        }
        let offset = |t: f64| self.component_in(i, 0, t).0 - surface;
        let time = if (self.points[i + 1].x - surface).abs() <= CROSSING_TOL {
            b
        } else if (self.points[i].x - surface).abs() <= CROSSING_TOL {
            a
        } else {
            refine_crossing(offset, (a, b)).ok()?
        };
        Some(Crossing {
            time,
            direction: sb,
        })
    }

    pub fn conservation_report(&self) -> ConservationReport {
        let drift = |log: &[f64]| {
            let first = log[0];
            let scale = first.abs().max(1.0);
            log.iter().fold(0.0f64, |m, v| m.max((v - first).abs())) / scale
        };
        ConservationReport {
            max_generator_drift: drift(&self.generator_log),
            max_constraint_drift: drift(&self.constraint_log),
        }
    }

    /// One row per stored sample: `t,x,y,p,q,generator,constraint`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y,p,q,generator,constraint")?;
        for i in 0..self.len() {
            let pt = &self.points[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                self.times[i],
                pt.x,
                pt.y,
                pt.p,
                pt.q,
                self.generator_log[i],
                self.constraint_log[i]
            )?;
        }
        Ok(())
    }

    /// Sidecar document `{ "events": [...], "termination": "..." }`.
    pub fn events_json(&self) -> serde_json::Value {
        let events: Vec<_> = self
            .events
            .iter()
            .map(|e| {
                let mut v = serde_json::to_value(e.kind).expect("event kinds serialize");
                let obj = v.as_object_mut().expect("tagged enum is an object");
                obj.insert("t".into(), e.time.into());
                obj.insert("x".into(), e.point.x.into());
                obj.insert("y".into(), e.point.y.into());
                obj.insert("p".into(), e.point.p.into());
                obj.insert("q".into(), e.point.q.into());
                v
            })
            .collect();
        serde_json::json!({
            "events": events,
            "termination": self.termination,
        })
    }
}

/// Integrates `sys` from `x0` over `span`, storing every accepted step.
pub fn integrate(
    sys: &ExtendedSystem,
    x0: PhasePoint,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    drive(sys, x0, span, cfg, true)
}

/// Like [`integrate`] but keeps only the first and last samples (and events).
pub fn propagate(
    sys: &ExtendedSystem,
    x0: PhasePoint,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    drive(sys, x0, span, cfg, false)
}

struct Accepted {
    t: f64,
    y: [f64; 4],
    f: [f64; 4],
}

fn drive(
    sys: &ExtendedSystem,
    x0: PhasePoint,
    (t0, t1): (f64, f64),
    cfg: &IntegratorConfig,
    record_all: bool,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return usage(format!("invalid time span [{t0}, {t1}]"));
    }
    if !x0.is_finite() {
        return usage(format!("initial point {x0:?} is not finite"));
    }

    let mut traj = Trajectory::new(sys.flavor());
    let mut t = t0;
    let mut y = x0.to_array();
    let mut f = sys.vector_field(&x0);
    traj.push(sys, t, x0, f);
    if x0.max_norm() >= cfg.escape_radius {
        traj.events.push(Event {
            kind: EventKind::Escape,
            time: t0,
            point: x0,
        });
        traj.termination = Termination::Escaped;
        return Ok(traj);
    }

    let mut h = match (cfg.fixed_step, cfg.method) {
        (Some(h), _) => h,
        (None, _) => steppers::initial_step(sys, &y, &f, cfg.rel_tol, cfg.abs_tol, cfg.max_step),
    };
    let end_tol = 1e-13 * t1.abs().max(1.0);

    while t1 - t > end_tol {
        let mut trial = h.min(cfg.max_step.max(cfg.fixed_step.unwrap_or(0.0)));
        let landing = trial >= t1 - t - end_tol;
        if landing {
            trial = t1 - t;
        }
        let next = match (cfg.method, cfg.fixed_step) {
            (Method::AdaptiveRk, None) => {
                let step = steppers::dopri_step(sys, &y, &f, trial);
                let finite = step.y.iter().chain(&step.f).all(|v| v.is_finite());
                let err = if finite {
                    steppers::error_norm(&step.err, &y, &step.y, cfg.rel_tol, cfg.abs_tol)
                } else {
                    f64::INFINITY
                };
                if err <= 1.0 {
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if !landing {
                        h = trial * factor;
                    } else {
                        h = h.max(trial * factor);
                    }
                    Some(Accepted {
                        t: if landing { t1 } else { t + trial },
                        y: step.y,
                        f: step.f,
                    })
                } else {
                    let factor = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
                    } else {
                        0.25
                    };
                    h = trial * factor;
                    if h < cfg.min_step {
                        traj.termination = Termination::StepUnderflow;
                        break;
                    }
                    None
                }
            }
            (Method::AdaptiveRk, Some(_)) => {
                let step = steppers::dopri_step(sys, &y, &f, trial);
                Some(Accepted {
                    t: if landing { t1 } else { t + trial },
                    y: step.y,
                    f: step.f,
                })
            }
            (Method::ImplicitMidpoint, _) => {
                let pt = implicit_midpoint_step(sys, &PhasePoint::from_array(y), trial)?;
                Some(Accepted {
                    t: if landing { t1 } else { t + trial },
                    y: pt.to_array(),
                    f: sys.vector_field(&pt),
                })
            }
        };
        let Some(acc) = next else { continue };
        if !acc.y.iter().chain(&acc.f).all(|v| v.is_finite()) {
            // Fixed-step methods have no way to retreat from a blow-up.
            traj.termination = Termination::StepUnderflow;
            break;
        }

        let (ta, ya, fa) = (t, y, f);
        let seg_h = acc.t - ta;
        let dense = |s: f64| -> PhasePoint {
            PhasePoint::from_array(std::array::from_fn(|k| {
                hermite(ta, seg_h, ya[k], acc.y[k], fa[k], acc.f[k], s)
            }))
        };

        // Escape: refine the first time the max-norm reaches the radius.
        let new_pt = PhasePoint::from_array(acc.y);
        let escaped = new_pt.max_norm() >= cfg.escape_radius;
        let (t_end, end_pt, end_f) = if escaped {
            let (mut lo, mut hi) = (ta, acc.t);
            for _ in 0..200 {
                if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if dense(mid).max_norm() >= cfg.escape_radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if hi == acc.t {
                (acc.t, new_pt, acc.f)
            } else {
                let pt = dense(hi);
                (hi, pt, sys.vector_field(&pt))
            }
        } else {
            (acc.t, new_pt, acc.f)
        };

        // Well crossings of x = s between the previous sample and the new one.
        let s = cfg.crossing_surface;
        let sa = side(ya[0] - s, fa[0]);
        let sb = side(end_pt.x - s, end_f[0]);
        if sa != sb {
            let time = if (end_pt.x - s).abs() <= CROSSING_TOL {
                t_end
            } else if (ya[0] - s).abs() <= CROSSING_TOL {
                ta
            } else {
                refine_crossing(|u| dense(u).x - s, (ta, t_end))?
            };
            traj.events.push(Event {
                kind: EventKind::WellCrossing { direction: sb },
                time,
                point: dense(time),
            });
        }

        t = t_end;
        y = end_pt.to_array();
        f = end_f;
        if record_all || escaped || t1 - t <= end_tol {
            traj.push(sys, t, end_pt, f);
        }
        if escaped {
            traj.events.push(Event {
                kind: EventKind::Escape,
                time: t,
                point: end_pt,
            });
            traj.termination = Termination::Escaped;
            break;
        }
    }

    if !record_all && traj.end_time() != t {
        traj.push(sys, t, PhasePoint::from_array(y), f);
    }
    Ok(traj)
}
