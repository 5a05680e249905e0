use serde::Serialize;

use crate::dynamics::{Termination, Trajectory};

/// Time spent on each side of `x_split`, excluding excursions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DwellSummary {
    pub time_left: f64,
    pub time_right: f64,
    /// Time with `|x| > x_well_max`.
    pub excursion_time: f64,
    pub flips: usize,
    /// `time_left / time_right`; `None` when `time_right` is zero.
    pub ratio: Option<f64>,
    pub termination: Termination,
}

impl DwellSummary {
    /// Left and right swapped, as produced by the reflected run.
    pub fn mirrored(&self) -> Self {
        Self {
            time_left: self.time_right,
            time_right: self.time_left,
            ratio: (self.time_left > 0.0).then(|| self.time_right / self.time_left),
            ..*self
        }
    }
}

/// Partitions the run at refined crossings of `x_split` and `±x_well_max`.
pub fn dwell_analysis(traj: &Trajectory, x_split: f64, x_well_max: f64) -> DwellSummary {
    let splits = traj.crossings(x_split);
    let mut cuts: Vec<f64> = vec![traj.start_time(), traj.end_time()];
    cuts.extend(splits.iter().map(|c| c.time));
    if x_well_max.is_finite() {
        for s in [x_well_max, -x_well_max] {
            cuts.extend(traj.crossings(s).iter().map(|c| c.time));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (mut left, mut right, mut out) = (0.0, 0.0, 0.0);
    for w in cuts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let x = traj
            .interpolate(0.5 * (w[0] + w[1]))
            .expect("midpoint lies inside the run")
            .x;
        if x.abs() > x_well_max {
            out += dt;
        } else if x < x_split {
            left += dt;
        } else {
            right += dt;
        }
    }
    DwellSummary {
        time_left: left,
        time_right: right,
        excursion_time: out,
        flips: splits.len(),
        ratio: (right > 0.0).then(|| left / right),
        termination: traj.termination,
    }
}
