//! Single-step kernels: the Dormand-Prince 5(4) pair and implicit midpoint.

use crate::error::{Error, Result};
use crate::hamiltonians::{ExtendedSystem, PhasePoint};

type State = [f64; 4];

// The flows are autonomous, so the node coefficients c_i never appear.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn field(sys: &ExtendedSystem, y: &State) -> State {
    sys.vector_field(&PhasePoint::from_array(*y))
}

#[inline]
fn combine(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = terms.iter().map(|(c, k)| c * k[i]).sum();
        *o += h * s;
    }
    out
}

/// Result of one Dormand-Prince step.
pub(crate) struct RkStep {
    pub y: State,
    pub f: State,
    /// Embedded local error estimate, unscaled.
    pub err: State,
}

/// One Dormand-Prince 5(4) step from `(y, f = F(y))`. The returned `f` is
/// the field at the new point (first-same-as-last).
pub(crate) fn dopri_step(sys: &ExtendedSystem, y: &State, k1: &State, h: f64) -> RkStep {
    let k2 = field(sys, &combine(y, h, &[(A21, k1)]));
    let k3 = field(sys, &combine(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field(sys, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = field(
        sys,
        &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = field(
        sys,
        &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = combine(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = field(sys, &y_new);
    let mut err = [0.0; 4];
    for i in 0..4 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    RkStep {
        y: y_new,
        f: k7,
        err,
    }
}

/// Scaled RMS error norm used for step acceptance.
pub(crate) fn error_norm(err: &State, y0: &State, y1: &State, rel_tol: f64, abs_tol: f64) -> f64 {
    let sum: f64 = (0..4)
        .map(|i| {
            let sc = abs_tol + rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 4.0).sqrt()
}

/// Starting step size heuristic (Hairer, Nørsett & Wanner, II.4).
pub(crate) fn initial_step(
    sys: &ExtendedSystem,
    y0: &State,
    f0: &State,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> f64 {
    let scaled = |v: &State, y: &State| {
        let s: f64 = (0..4)
            .map(|i| (v[i] / (abs_tol + rel_tol * y[i].abs())).powi(2))
            .sum();
        (s / 4.0).sqrt()
    };
    let d0 = scaled(y0, y0);
    let d1 = scaled(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = field(sys, &y1);
    let diff: State = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(max_step)
}

/// One implicit-midpoint step `y₁ = y₀ + h F((y₀ + y₁)/2)`, solved by
/// fixed-point iteration.
pub fn implicit_midpoint_step(sys: &ExtendedSystem, y: &PhasePoint, h: f64) -> Result<PhasePoint> {
    let y0 = y.to_array();
    let f0 = field(sys, &y0);
    let mut y1 = combine(&y0, h, &[(1.0, &f0)]);
    for _ in 0..100 {
        let mid: State = std::array::from_fn(|i| 0.5 * (y0[i] + y1[i]));
        let next = combine(&y0, h, &[(1.0, &field(sys, &mid))]);
        let change = (0..4).fold(0.0f64, |m, i| m.max((next[i] - y1[i]).abs()));
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        y1 = next;
        if !y1.iter().all(|v| v.is_finite()) {
            break;
        }
        if change <= 4.0 * f64::EPSILON * scale {
            return Ok(PhasePoint::from_array(y1));
        }
    }
    Err(Error::Numeric(format!(
        "implicit midpoint iteration did not converge with step {h} from {y:?}"
    )))
}
