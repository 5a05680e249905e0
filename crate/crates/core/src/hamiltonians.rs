//! Hamiltonians on the doubled phase space `X = (x, y, p, q)`.
//!
//! Two flows share this space and the same symplectic matrix `Ω`:
//!
//! * the mean-field quantum flow (MFQM) generated by
//!   `H⁺ = ½[H_cl(x+y, p+q) + H_cl(x-y, p-q)]` with first-class constraint
//!   `H⁻ = ½[H_cl(x+y, p+q) - H_cl(x-y, p-q)]`;
//! * the complex classical flow (CCM) generated by `H_R = Re H_cl(P, Z)`
//!   with constraint `H_I = Im H_cl(P, Z)`, where `Z = x + iy` and
//!   `P = p - iq`.
//!
//! All gradients are exact polynomial derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::potentials::Potential;

/// A point `(x, y, p, q)` of the extended phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, y: f64, p: f64, q: f64) -> Self {
        Self { x, y, p, q }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p, self.q]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance to another point.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Spatial reflection `X → -X`.
    pub fn reflected(self) -> Self {
        Self::new(-self.x, -self.y, -self.p, -self.q)
    }

    /// Momentum reversal `(p, q) → (-p, -q)`, the time-reversal map of both flows.
    pub fn momentum_reversed(self) -> Self {
        Self::new(self.x, self.y, -self.p, -self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Mean-field quantum mechanics: flow of `H⁺`, constraint `H⁻`.
    Mfqm,
    /// Complex classical mechanics: flow of `H_R`, constraint `H_I`.
    Ccm,
    /// Real classical flow on `(x, p)`; `y` and `q` stay frozen.
    ClassicalReal,
}

/// A scalar together with its gradient `(∂x, ∂y, ∂p, ∂q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedValue {
    pub value: f64,
    pub gradient: [f64; 4],
}

impl GradedValue {
    /// The coordinate function `X^index`.
    pub fn coordinate(index: usize) -> Self {
        let mut gradient = [0.0; 4];
        gradient[index] = 1.0;
        Self {
            value: 0.0,
            gradient,
        }
    }
}

pub type Matrix4 = [[f64; 4]; 4];

/// Constant matrices of the bracket and the constraint relations.
pub struct StructureMatrices;

impl StructureMatrices {
    /// `Ω = [[0, I], [-I, 0]]` in the ordering `(x, y, p, q)`.
    pub const OMEGA: Matrix4 = [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ];

    /// `Γ = diag(σ₁, σ₁)`, with `∂H⁻ = Γ ∂H⁺`.
    pub const GAMMA: Matrix4 = [
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];

    /// `Λ = diag(-iσ₂, iσ₂)`, with `∂H_I = Λ ∂H_R`.
    ///
    /// `-iσ₂ = [[0, -1], [1, 0]]` and `iσ₂ = [[0, 1], [-1, 0]]` are already
    /// real, so Λ acts on real gradients directly. Check against the
    /// Cauchy-Riemann equations of `V(x + iy)` with `V' = a + ib`:
    /// `∂H_R = (a, -b, p/m, -q/m)` and `∂H_I = (b, a, -q/m, -p/m)`.
    pub const LAMBDA: Matrix4 = [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ];

    /// `ω = iσ₂`, the symplectic matrix of the real `(x, p)` plane.
    pub const OMEGA2: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
}

pub fn mat_vec(m: &Matrix4, v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn mat_mul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn is_antisymmetric(m: &Matrix4) -> bool {
    (0..4).all(|i| (0..4).all(|j| m[i][j] == -m[j][i]))
}

/// `{{A, B}} = Ω^{ab} ∂_a A ∂_b B`.
pub fn poisson_bracket(f: &GradedValue, g: &GradedValue) -> f64 {
    let og = mat_vec(&StructureMatrices::OMEGA, &g.gradient);
    f.gradient.iter().zip(og).map(|(a, b)| a * b).sum()
}

/// Chord ends `z± = (x ± y, p ± q)`.
pub fn chord_ends(point: &PhasePoint) -> ((f64, f64), (f64, f64)) {
    (
        (point.x + point.y, point.p + point.q),
        (point.x - point.y, point.p - point.q),
    )
}

/// Potential, mass, flavor and ħ scale; owns the flow.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    potential: Potential,
    dpotential: Potential,
    mass: f64,
    flavor: Flavor,
    hbar: f64,
}

impl ExtendedSystem {
    pub fn new(potential: Potential, mass: f64, flavor: Flavor, hbar: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return domain(format!("mass must be positive, got {mass}"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return domain(format!("hbar must be positive, got {hbar}"));
        }
        let dpotential = potential.derivative();
        Ok(Self {
            potential,
            dpotential,
            mass,
            flavor,
            hbar,
        })
    }

    /// Unit mass, unit ħ.
    pub fn unit(potential: Potential, flavor: Flavor) -> Self {
        Self::new(potential, 1.0, flavor, 1.0).expect("unit parameters are valid")
    }

    pub fn with_flavor(&self, flavor: Flavor) -> Self {
        Self {
            flavor,
            ..self.clone()
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Maps KvN-scaled data `(x, ȳ, p, q̄)` to `(x, ħȳ, p, ħq̄)`.
    pub fn scale_chord(&self, scaled: PhasePoint) -> PhasePoint {
        PhasePoint::new(scaled.x, self.hbar * scaled.y, scaled.p, self.hbar * scaled.q)
    }

    /// `H_cl = p²/2m + V(x)`.
    pub fn h_classical(&self, x: f64, p: f64) -> f64 {
        0.5 * p * p / self.mass + self.potential.eval(x)
    }

    /// Classical energies `(H_cl(z₊), H_cl(z₋))` of the two chord ends.
    pub fn chord_energies(&self, point: &PhasePoint) -> (f64, f64) {
        let (plus, minus) = chord_ends(point);
        (
            self.h_classical(plus.0, plus.1),
            self.h_classical(minus.0, minus.1),
        )
    }

    fn require(&self, flavor: Flavor, what: &str) -> Result<()> {
        if self.flavor != flavor {
            return usage(format!(
                "{what} requires flavor {flavor:?}, system has {:?}",
                self.flavor
            ));
        }
        Ok(())
    }

    fn mfqm_parts(&self, pt: &PhasePoint) -> (f64, f64, f64, f64) {
        let (vp, vm) = (
            self.potential.eval(pt.x + pt.y),
            self.potential.eval(pt.x - pt.y),
        );
        let (dp, dm) = (
            self.dpotential.eval(pt.x + pt.y),
            self.dpotential.eval(pt.x - pt.y),
        );
        (vp, vm, dp, dm)
    }

    fn h_plus_unchecked(&self, pt: &PhasePoint) -> GradedValue {
        let m = self.mass;
        let (vp, vm, dp, dm) = self.mfqm_parts(pt);
        GradedValue {
            value: 0.5 * (pt.p * pt.p + pt.q * pt.q) / m + 0.5 * (vp + vm),
            gradient: [0.5 * (dp + dm), 0.5 * (dp - dm), pt.p / m, pt.q / m],
        }
    }

    fn h_minus_unchecked(&self, pt: &PhasePoint) -> GradedValue {
        let m = self.mass;
        let (vp, vm, dp, dm) = self.mfqm_parts(pt);
        GradedValue {
            value: pt.p * pt.q / m + 0.5 * (vp - vm),
            gradient: [0.5 * (dp - dm), 0.5 * (dp + dm), pt.q / m, pt.p / m],
        }
    }

    /// Real and imaginary parts of `H_cl(P, Z)` with their gradients.
    fn ccm_parts(&self, pt: &PhasePoint) -> (GradedValue, GradedValue) {
        let m = self.mass;
        let z = Complex64::new(pt.x, pt.y);
        let v = self.potential.eval_c(z);
        let dv = self.dpotential.eval_c(z);
        let (a, b) = (dv.re, dv.im);
        let real = GradedValue {
            value: 0.5 * (pt.p * pt.p - pt.q * pt.q) / m + v.re,
            gradient: [a, -b, pt.p / m, -pt.q / m],
        };
        let imag = GradedValue {
            value: -pt.p * pt.q / m + v.im,
            gradient: [b, a, -pt.q / m, -pt.p / m],
        };
        (real, imag)
    }

    pub fn h_plus(&self, pt: &PhasePoint) -> Result<GradedValue> {
        self.require(Flavor::Mfqm, "H+")?;
        Ok(self.h_plus_unchecked(pt))
    }

    pub fn h_minus(&self, pt: &PhasePoint) -> Result<GradedValue> {
        self.require(Flavor::Mfqm, "H-")?;
        Ok(self.h_minus_unchecked(pt))
    }

    pub fn h_real(&self, pt: &PhasePoint) -> Result<GradedValue> {
        self.require(Flavor::Ccm, "H_R")?;
        Ok(self.ccm_parts(pt).0)
    }

    pub fn h_imag(&self, pt: &PhasePoint) -> Result<GradedValue> {
        self.require(Flavor::Ccm, "H_I")?;
        Ok(self.ccm_parts(pt).1)
    }

    /// The flavor's flow generator: `H⁺`, `H_R`, or `H_cl(x, p)`.
    pub fn generator(&self, pt: &PhasePoint) -> GradedValue {
        match self.flavor {
            Flavor::Mfqm => self.h_plus_unchecked(pt),
            Flavor::Ccm => self.ccm_parts(pt).0,
            Flavor::ClassicalReal => GradedValue {
                value: self.h_classical(pt.x, pt.p),
                gradient: [self.dpotential.eval(pt.x), 0.0, pt.p / self.mass, 0.0],
            },
        }
    }

    /// The flavor's conserved constraint: `H⁻`, `H_I`, or zero for the real flow.
    pub fn constraint(&self, pt: &PhasePoint) -> GradedValue {
        match self.flavor {
            Flavor::Mfqm => self.h_minus_unchecked(pt),
            Flavor::Ccm => self.ccm_parts(pt).1,
            Flavor::ClassicalReal => GradedValue {
                value: 0.0,
                gradient: [0.0; 4],
            },
        }
    }

    /// `Ẋ = Ω ∂H` for the flavor's generator.
    #[inline]
    pub fn vector_field(&self, pt: &PhasePoint) -> [f64; 4] {
        let m = self.mass;
        match self.flavor {
            Flavor::Mfqm => {
                let (_, _, dp, dm) = self.mfqm_parts(pt);
                [pt.p / m, pt.q / m, -0.5 * (dp + dm), -0.5 * (dp - dm)]
            }
            Flavor::Ccm => {
                let dv = self.dpotential.eval_c(Complex64::new(pt.x, pt.y));
                [pt.p / m, -pt.q / m, -dv.re, dv.im]
            }
            Flavor::ClassicalReal => [pt.p / m, 0.0, -self.dpotential.eval(pt.x), 0.0],
        }
    }

    /// Max-norm of `∂H⁻ - Γ ∂H⁺`.
    pub fn check_gamma_relation(&self, pt: &PhasePoint) -> Result<f64> {
        let plus = self.h_plus(pt)?;
        let minus = self.h_minus(pt)?;
        let mapped = mat_vec(&StructureMatrices::GAMMA, &plus.gradient);
        Ok(max_abs_diff(&minus.gradient, &mapped))
    }

    /// Max-norm of `∂H_I - Λ ∂H_R`.
    pub fn check_lambda_relation(&self, pt: &PhasePoint) -> Result<f64> {
        let real = self.h_real(pt)?;
        let imag = self.h_imag(pt)?;
        let mapped = mat_vec(&StructureMatrices::LAMBDA, &real.gradient);
        Ok(max_abs_diff(&imag.gradient, &mapped))
    }

    /// `H⁺` evaluated at complex arguments `(x, y, p, q)`.
    pub fn h_plus_complex(&self, args: [Complex64; 4]) -> Complex64 {
        let [x, y, p, q] = args;
        (p * p + q * q) / (2.0 * self.mass)
            + 0.5 * (self.potential.eval_c(x + y) + self.potential.eval_c(x - y))
    }

    /// `H⁻` evaluated at complex arguments `(x, y, p, q)`.
    pub fn h_minus_complex(&self, args: [Complex64; 4]) -> Complex64 {
        let [x, y, p, q] = args;
        p * q / self.mass + 0.5 * (self.potential.eval_c(x + y) - self.potential.eval_c(x - y))
    }
}

fn max_abs_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()))
}

/// Residuals of `H⁺(x, iy, p, -iq) = H_R(x, y, p, q)` and
/// `H⁻(x, iy, p, -iq) = i H_I(x, y, p, q)`.
pub fn complexification_identity(
    mfqm: &ExtendedSystem,
    ccm: &ExtendedSystem,
    pt: &PhasePoint,
) -> Result<(f64, f64)> {
    if mfqm.potential != ccm.potential || mfqm.mass != ccm.mass {
        return usage("complexification identity needs the same potential and mass in both systems");
    }
    let real = ccm.h_real(pt)?;
    let imag = ccm.h_imag(pt)?;
    mfqm.require(Flavor::Mfqm, "complexification identity")?;
    let i = Complex64::new(0.0, 1.0);
    let args = [
        Complex64::new(pt.x, 0.0),
        i * pt.y,
        Complex64::new(pt.p, 0.0),
        -i * pt.q,
    ];
    let plus = mfqm.h_plus_complex(args);
    let minus = mfqm.h_minus_complex(args);
    Ok((
        (plus - real.value).norm(),
        (minus - i * imag.value).norm(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn mfqm(v: Potential) -> ExtendedSystem {
        ExtendedSystem::unit(v, Flavor::Mfqm)
    }

    fn ccm(v: Potential) -> ExtendedSystem {
        ExtendedSystem::unit(v, Flavor::Ccm)
    }

    #[test]
    fn classical_energy() {
        let s = mfqm(Potential::harmonic());
        assert_eq!(s.h_classical(1.0, 0.0), 0.5);
        assert_eq!(s.h_classical(0.7, 0.0), Potential::harmonic().eval(0.7));
        let d = mfqm(Potential::double_well());
        assert_eq!(d.h_classical(0.0, 2.0), 3.0);
    }

    #[test]
    fn h_plus_values() {
        let s = mfqm(Potential::harmonic());
        assert_eq!(s.h_plus(&PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap().value, 0.5);
        assert_eq!(s.h_plus(&PhasePoint::new(1.0, 1.0, 1.0, 1.0)).unwrap().value, 2.0);
        let d = mfqm(Potential::double_well());
        assert_eq!(d.h_plus(&PhasePoint::new(0.0, 1.0, 0.0, 0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn h_minus_values() {
        let s = mfqm(Potential::harmonic());
        assert_eq!(s.h_minus(&PhasePoint::new(0.3, 0.0, -1.2, 0.0)).unwrap().value, 0.0);
        assert_eq!(s.h_minus(&PhasePoint::new(1.0, 0.5, 0.0, 0.0)).unwrap().value, 0.5);
        assert_eq!(s.h_minus(&PhasePoint::new(1.0, 2.0, 3.0, 4.0)).unwrap().value, 14.0);
        let d = mfqm(Potential::double_well());
        assert_eq!(d.h_minus(&PhasePoint::new(0.4, 0.0, 2.0, 0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn ccm_values() {
        let s = ccm(Potential::harmonic());
        let x = PhasePoint::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(s.h_real(&x).unwrap().value, 0.5);
        assert_eq!(s.h_imag(&x).unwrap().value, 0.0);
        assert_eq!(s.h_real(&PhasePoint::new(1.0, 1.0, 1.0, 1.0)).unwrap().value, 0.0);
        assert_eq!(s.h_imag(&PhasePoint::new(1.0, 2.0, 3.0, 4.0)).unwrap().value, -10.0);
    }

    #[test]
    fn wrong_flavor_is_usage_error() {
        let pt = PhasePoint::default();
        assert!(matches!(ccm(Potential::harmonic()).h_plus(&pt), Err(Error::Usage(_))));
        assert!(matches!(ccm(Potential::harmonic()).h_minus(&pt), Err(Error::Usage(_))));
        assert!(matches!(mfqm(Potential::harmonic()).h_real(&pt), Err(Error::Usage(_))));
        assert!(matches!(mfqm(Potential::harmonic()).h_imag(&pt), Err(Error::Usage(_))));
        assert!(mfqm(Potential::harmonic()).check_lambda_relation(&pt).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(ExtendedSystem::new(Potential::harmonic(), 0.0, Flavor::Mfqm, 1.0).is_err());
        assert!(ExtendedSystem::new(Potential::harmonic(), 1.0, Flavor::Mfqm, -1.0).is_err());
    }

    #[test]
    fn canonical_brackets() {
        let [x, y, p, q] = [0, 1, 2, 3].map(GradedValue::coordinate);
        assert_eq!(poisson_bracket(&x, &p), 1.0);
        assert_eq!(poisson_bracket(&y, &q), 1.0);
        assert_eq!(poisson_bracket(&x, &y), 0.0);
        assert_eq!(poisson_bracket(&x, &q), 0.0);
        assert_eq!(poisson_bracket(&p, &x), -1.0);
    }

    #[test]
    fn structure_matrix_properties() {
        let o = StructureMatrices::OMEGA;
        assert!(is_antisymmetric(&o));
        let o2 = mat_mul(&o, &o);
        for (i, row) in o2.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { -1.0 } else { 0.0 });
            }
        }
        assert!(is_antisymmetric(&mat_mul(&o, &StructureMatrices::GAMMA)));
        assert!(is_antisymmetric(&mat_mul(&o, &StructureMatrices::LAMBDA)));
        // Ω pairs (x, p) and (y, q) as the upper-right identity block.
        for i in 0..2 {
            assert_eq!(o[i][i + 2], 1.0);
            assert_eq!(o[i + 2][i], -1.0);
        }
    }

    #[test]
    fn vector_fields() {
        let s = mfqm(Potential::harmonic());
        assert_eq!(s.vector_field(&PhasePoint::new(1.0, 0.0, 0.0, 0.0)), [0.0, 0.0, -1.0, 0.0]);
        let c = ccm(Potential::harmonic());
        assert_eq!(c.vector_field(&PhasePoint::new(0.0, 1.0, 0.0, 0.0)), [0.0, 0.0, 0.0, 1.0]);
        let free = ExtendedSystem::unit(Potential::custom(vec![0.0]).unwrap(), Flavor::ClassicalReal);
        assert_eq!(free.vector_field(&PhasePoint::new(0.0, 0.0, 1.0, 0.0)), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_potential_relations_vanish() {
        let v = Potential::custom(vec![2.5]).unwrap();
        let pt = PhasePoint::new(0.3, -1.1, 0.7, 2.0);
        assert_eq!(mfqm(v.clone()).check_gamma_relation(&pt).unwrap(), 0.0);
        assert_eq!(ccm(v).check_lambda_relation(&pt).unwrap(), 0.0);
    }

    #[test]
    fn complexification_examples() {
        let v = Potential::harmonic();
        let (rp, rm) =
            complexification_identity(&mfqm(v.clone()), &ccm(v.clone()), &PhasePoint::new(1.0, 1.0, 1.0, 1.0))
                .unwrap();
        assert!(rp < 1e-15 && rm < 1e-15);
        let plus = mfqm(v.clone()).h_plus_complex([
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ]);
        assert!(plus.norm() < 1e-15);
        let dw = Potential::double_well();
        let (rp, rm) = complexification_identity(
            &mfqm(dw.clone()),
            &ccm(dw.clone()),
            &PhasePoint::new(0.4, 0.0, -0.3, 0.0),
        )
        .unwrap();
        assert_eq!((rp, rm), (0.0, 0.0));
        assert!(complexification_identity(&mfqm(dw), &ccm(v), &PhasePoint::default()).is_err());
    }

    #[test]
    fn chord_end_examples() {
        assert_eq!(
            chord_ends(&PhasePoint::new(1.0, 0.5, 0.0, 0.0)),
            ((1.5, 0.0), (0.5, 0.0))
        );
        assert_eq!(
            chord_ends(&PhasePoint::new(0.2, 0.0, -0.7, 0.0)),
            ((0.2, -0.7), (0.2, -0.7))
        );
    }

    #[test]
    fn generator_decomposes_into_chord_energies() {
        let s = mfqm(Potential::double_well());
        let pt = PhasePoint::new(0.3, 0.8, -0.2, 0.5);
        let (ep, em) = s.chord_energies(&pt);
        assert!((s.generator(&pt).value - 0.5 * (ep + em)).abs() < 1e-14);
        assert!((s.constraint(&pt).value - 0.5 * (ep - em)).abs() < 1e-14);
    }

    #[test]
    fn real_slice_reduces_to_classical_field() {
        let dw = Potential::double_well();
        let real = ExtendedSystem::unit(dw.clone(), Flavor::ClassicalReal);
        for &(x, p) in &[(0.3, -1.0), (-1.7, 0.4), (2.0, 0.0)] {
            let pt = PhasePoint::new(x, 0.0, p, 0.0);
            let r = real.vector_field(&pt);
            for s in [mfqm(dw.clone()), ccm(dw.clone())] {
                let f = s.vector_field(&pt);
                assert_eq!((f[0], f[2]), (r[0], r[2]));
                assert_eq!((f[1], f[3]), (0.0, 0.0));
            }
        }
    }
}
