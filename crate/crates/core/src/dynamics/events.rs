//! Root refinement and dense output for event location.

use crate::error::{usage, Result};

/// Samples closer than this to a dividing surface are assigned to the side
/// they are moving toward.
pub const CROSSING_TOL: f64 = 1e-9;

/// Locates a sign change of `f` inside `(t_a, t_b)`.
///
/// Illinois-modified regula falsi with a bisection fallback whenever the
/// bracket fails to halve. Stops once `|f| < 1e-15`-ish or the bracket is
/// narrower than `1e-12` relative to `max(1, |t|)`; both are tighter than the
/// `|f| < 1e-9` guarantee callers rely on.
pub fn refine_crossing<F>(mut f: F, bracket: (f64, f64)) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) || !(a < b) {
        return usage(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
        ));
    }
    // Which endpoint moved on the previous iteration: -1 left, +1 right.
    let mut last = 0i8;
    let mut width = b - a;
    for iter in 0..300 {
        let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
        if b - a < tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        // Every third iteration, bisect if the bracket has not halved.
        if iter % 3 == 2 {
            if b - a > 0.5 * width {
                c = 0.5 * (a + b);
            }
            width = b - a;
        }
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc.abs() < 1e-15 {
            return Ok(c);
        }
        if fc * fa > 0.0 {
            a = c;
            fa = fc;
            if last == -1 {
                fb *= 0.5;
            }
            last = -1;
        } else {
            b = c;
            fb = fc;
            if last == 1 {
                fa *= 0.5;
            }
            last = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Which side of a surface a sample is on: `+1`, `-1`.
///
/// `offset` is the signed distance to the surface and `rate` its time
/// derivative; within [`CROSSING_TOL`] the direction of motion decides.
pub fn side(offset: f64, rate: f64) -> i8 {
    if offset.abs() <= CROSSING_TOL && rate != 0.0 {
        if rate > 0.0 {
            1
        } else {
            -1
        }
    } else if offset >= 0.0 {
        1
    } else {
        -1
    }
}

/// Cubic Hermite interpolation of one component on `[t0, t0 + h]`.
#[inline]
pub fn hermite(t0: f64, h: f64, y0: f64, y1: f64, f0: f64, f1: f64, t: f64) -> f64 {
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
}

/// Time derivative of [`hermite`].
#[inline]
pub fn hermite_rate(t0: f64, h: f64, y0: f64, y1: f64, f0: f64, f1: f64, t: f64) -> f64 {
    let s = (t - t0) / h;
    let s2 = s * s;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    (d00 * y0 + d01 * y1) / h + d10 * f0 + d11 * f1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::f64::consts::PI;

    #[test]
    fn linear_root() {
        let t = refine_crossing(|t| t - 0.5, (0.0, 1.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sine_root() {
        let t = refine_crossing(f64::sin, (3.0, 3.3)).unwrap();
        assert!((t - PI).abs() < 1e-9);
        assert!(t.sin().abs() < 1e-9);
    }

    #[test]
    fn flat_and_steep_roots() {
        // Nearly flat near the root: regula falsi alone would stall here.
        let t = refine_crossing(|t: f64| (t - 0.3).powi(3), (0.0, 2.0)).unwrap();
        assert!((t - 0.3).abs() < 1e-4);
        assert!((t - 0.3).powi(3).abs() < 1e-9);
        let t = refine_crossing(|t: f64| (50.0 * (t - 0.7)).tanh(), (0.0, 1.0)).unwrap();
        assert!((t - 0.7).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_usage_error() {
        assert!(matches!(refine_crossing(|t| t * t + 1.0, (-1.0, 1.0)), Err(Error::Usage(_))));
    }

    #[test]
    fn side_tie_break() {
        assert_eq!(side(0.5, -1.0), 1);
        assert_eq!(side(-0.5, 1.0), -1);
        assert_eq!(side(1e-11, -1.0), -1);
        assert_eq!(side(-1e-11, 1.0), 1);
        assert_eq!(side(0.0, 0.0), 1);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let y = |t: f64| 2.0 * t * t * t - t + 0.5;
        let dy = |t: f64| 6.0 * t * t - 1.0;
        let (t0, h) = (0.3, 0.9);
        for k in 0..=10 {
            let t = t0 + h * k as f64 / 10.0;
            let v = hermite(t0, h, y(t0), y(t0 + h), dy(t0), dy(t0 + h), t);
            let d = hermite_rate(t0, h, y(t0), y(t0 + h), dy(t0), dy(t0 + h), t);
            assert!((v - y(t)).abs() < 1e-14);
            assert!((d - dy(t)).abs() < 1e-13);
        }
    }
}
