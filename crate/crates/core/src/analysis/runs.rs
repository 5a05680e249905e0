use num_complex::Complex64;

use super::{barrier_height, well_bottom};
use crate::dynamics::{integrate, IntegratorConfig, Trajectory};
use crate::error::{domain, usage, Error, Result};
use crate::hamiltonians::{ExtendedSystem, Flavor, PhasePoint};

fn require(sys: &ExtendedSystem, flavor: Flavor) -> Result<()> {
    if sys.flavor() != flavor {
        return usage(format!(
            "expected a {flavor:?} system, got {:?}",
            sys.flavor()
        ));
    }
    Ok(())
}

fn below_barrier(sys: &ExtendedSystem, energy: f64, name: &str) -> Result<()> {
    if let Some(e0) = barrier_height(sys.potential()) {
        if energy >= e0 {
            return domain(format!("{name} = {energy} must lie below the barrier E_0 = {e0}"));
        }
    }
    Ok(())
}

/// CCM start `(x₀, 0, p, q)` with `H_R = e_r` and `H_I = delta_e`.
///
/// On `y = 0` the conditions collapse to `P² = 2m(e_r - V(x₀)) + 2imΔE` with
/// `P = p - iq`, which Newton solves from the real turning-point seed. Of
/// the two roots the one whose `p` points toward the origin is kept, so
/// starts at `±x₀` are exact reflections of each other.
pub fn ccm_initial_point(
    sys: &ExtendedSystem,
    e_r: f64,
    delta_e: f64,
    x0: f64,
) -> Result<PhasePoint> {
    require(sys, Flavor::Ccm)?;
    if delta_e == 0.0 || !delta_e.is_finite() {
        return usage("delta_E must be finite and nonzero");
    }
    below_barrier(sys, e_r, "E_r")?;
    let m = sys.mass();
    let v0 = sys.potential().eval_real(x0)?;
    let target = Complex64::new(2.0 * m * (e_r - v0), 2.0 * m * delta_e);
    let seed_p = (2.0 * m * (e_r - v0)).max(0.0).sqrt();
    let seed_q = if seed_p > (m * delta_e.abs()).sqrt() {
        -m * delta_e / seed_p
    } else {
        -(m * delta_e.abs()).sqrt() * delta_e.signum()
    };
    let mut big_p = Complex64::new(seed_p.max((m * delta_e.abs()).sqrt()), -seed_q);
    let mut converged = false;
    for _ in 0..100 {
        let next = 0.5 * (big_p + target / big_p);
        let change = (next - big_p).norm();
        big_p = next;
        if change <= 4.0 * f64::EPSILON * big_p.norm() {
            converged = true;
            break;
        }
    }
    if !converged || !big_p.is_finite() {
        return Err(Error::Numeric(format!(
            "momentum solve at x0 = {x0} did not converge (E_r = {e_r}, delta_E = {delta_e})"
        )));
    }
    let (mut p, mut q) = (big_p.re, -big_p.im);
    if p * x0 > 0.0 {
        p = -p;
        q = -q;
    }
    Ok(PhasePoint::new(x0, 0.0, p, q))
}

pub fn ccm_double_well_run(
    sys: &ExtendedSystem,
    e_r: f64,
    delta_e: f64,
    x0: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let start = ccm_initial_point(sys, e_r, delta_e, x0)?;
    integrate(sys, start, (0.0, t_max), cfg)
}

/// MFQM start with `H_cl(z₋) = e - ΔE′` at the bottom of the chosen well and
/// `H_cl(z₊) = e + ΔE′` at the same position, so `H⁺ = e` and `H⁻ = ΔE′`.
pub fn mfqm_initial_point(
    sys: &ExtendedSystem,
    energy: f64,
    delta_e_prime: f64,
    side: f64,
) -> Result<PhasePoint> {
    require(sys, Flavor::Mfqm)?;
    below_barrier(sys, energy, "E")?;
    if !(delta_e_prime >= 0.0) {
        return domain(format!("delta_E' = {delta_e_prime} must be nonnegative"));
    }
    let v = sys.potential();
    let xw = well_bottom(v, side)?;
    let vw = v.eval(xw);
    let low = energy - delta_e_prime;
    if low < vw {
        return domain(format!(
            "H_cl(z-) = {low} lies below the well bottom V({xw}) = {vw}"
        ));
    }
    let m = sys.mass();
    let p_minus = (2.0 * m * (low - vw)).sqrt();
    let p_plus = (2.0 * m * (energy + delta_e_prime - vw)).sqrt();
    Ok(PhasePoint::new(
        xw,
        0.0,
        0.5 * (p_plus + p_minus),
        0.5 * (p_plus - p_minus),
    ))
}

pub fn mfqm_double_well_run(
    sys: &ExtendedSystem,
    energy: f64,
    delta_e_prime: f64,
    side: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let start = mfqm_initial_point(sys, energy, delta_e_prime, side)?;
    integrate(sys, start, (0.0, t_max), cfg)
}
