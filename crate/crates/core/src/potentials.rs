//! Polynomial potentials with exact differentiation and evaluation at real
//! and complex arguments.
//!
//! Every potential is stored as its coefficient list `c_0..c_d` with
//! `V(x) = Σ c_k x^k`. Restricting to polynomials keeps the analytic
//! continuation `V(x + iy)` exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Harmonic,
    InvertedHarmonic,
    DoubleWell,
    Custom,
}

/// A real polynomial potential `V(x) = Σ c_k x^k` of degree at most 8.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coefficients: Vec<f64>,
    kind: PotentialKind,
}

impl Potential {
    /// Builds a potential, trimming trailing zero coefficients.
    pub fn new(kind: PotentialKind, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return domain("potential coefficients must be finite");
        }
        let mut coefficients = coefficients;
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0.0 {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(0.0);
        }
        if coefficients.len() > MAX_DEGREE + 1 {
            return usage(format!(
                "potential degree {} exceeds the maximum of {MAX_DEGREE}",
                coefficients.len() - 1
            ));
        }
        Ok(Self { coefficients, kind })
    }

    pub fn custom(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(PotentialKind::Custom, coefficients)
    }

    /// `V(x) = x²/2`, the unit-frequency oscillator at unit mass.
    pub fn harmonic() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, 0.5],
            kind: PotentialKind::Harmonic,
        }
    }

    /// `V(x) = -x²/2`.
    pub fn inverted_harmonic() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, -0.5],
            kind: PotentialKind::InvertedHarmonic,
        }
    }

    /// `V(x) = (x² - 1)²`: wells at ±1, barrier height 1 at the origin.
    pub fn double_well() -> Self {
        Self {
            coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0],
            kind: PotentialKind::DoubleWell,
        }
    }

    /// `V(x) = barrier · (x²/a² - 1)²` with wells at `±a`.
    pub fn double_well_with(well: f64, barrier: f64) -> Result<Self> {
        if !(well.is_finite() && well > 0.0 && barrier.is_finite() && barrier > 0.0) {
            return domain("double well needs a positive well position and barrier height");
        }
        let a2 = well * well;
        Self::new(
            PotentialKind::DoubleWell,
            vec![barrier, 0.0, -2.0 * barrier / a2, 0.0, barrier / (a2 * a2)],
        )
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// True when only even powers carry weight, i.e. `V(-x) = V(x)`.
    pub fn is_even(&self) -> bool {
        self.coefficients
            .iter()
            .enumerate()
            .all(|(k, c)| k % 2 == 0 || *c == 0.0)
    }

    /// Horner evaluation without input checks.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Horner evaluation at a complex argument without input checks.
    #[inline]
    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cannot evaluate potential at {x}")));
        }
        Ok(self.eval(x))
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("cannot evaluate potential at {z}")));
        }
        Ok(self.eval_c(z))
    }

    /// Exact derivative. The derivative of a constant is the zero polynomial.
    pub fn derivative(&self) -> Potential {
        let coefficients = if self.coefficients.len() == 1 {
            vec![0.0]
        } else {
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect()
        };
        Potential::new(PotentialKind::Custom, coefficients)
            .expect("derivative of a valid polynomial is valid")
    }

    /// Largest `|x|` on the sublevel set `{V(x) ≤ energy}`, found by outward
    /// bracketing and bisection from each side of the global sample minimum.
    ///
    /// Returns `None` when the sublevel set is unbounded (non-confining
    /// potential) or empty.
    pub fn sublevel_radius(&self, energy: f64) -> Option<f64> {
        let lead = *self.coefficients.last().unwrap();
        if self.degree() == 0 || self.degree() % 2 == 1 || lead <= 0.0 {
            return None;
        }
        // Coarse scan to find some admissible point.
        let scan = 4000;
        let span = 1.0 + self.coefficients.iter().map(|c| c.abs()).sum::<f64>() / lead.abs();
        let seed = (0..=scan)
            .map(|i| -span + 2.0 * span * i as f64 / scan as f64)
            .filter(|&x| self.eval(x) <= energy)
            .fold(None::<(f64, f64)>, |acc, x| match acc {
                None => Some((x, x)),
                Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
            })?;
        let outward = |start: f64, dir: f64| {
            let mut inside = start;
            let mut step = 1.0;
            let mut outside = start + dir * step;
            while self.eval(outside) <= energy {
                inside = outside;
                step *= 2.0;
                outside = start + dir * step;
            }
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if self.eval(mid) <= energy {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            outside
        };
        let right = outward(seed.1, 1.0);
        let left = outward(seed.0, -1.0);
        Some(right.abs().max(left.abs()))
    }
}

/// Config-file representation of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            kind: PotentialKind::DoubleWell,
            coefficients: None,
        }
    }
}

impl TryFrom<&PotentialSpec> for Potential {
    type Error = Error;

    fn try_from(spec: &PotentialSpec) -> Result<Self> {
        match (spec.kind, &spec.coefficients) {
            (PotentialKind::Custom, None) => {
                usage("potential.coefficients is required for kind \"custom\"")
            }
            (kind, Some(c)) => Potential::new(kind, c.clone()),
            (PotentialKind::Harmonic, None) => Ok(Potential::harmonic()),
            (PotentialKind::InvertedHarmonic, None) => Ok(Potential::inverted_harmonic()),
            (PotentialKind::DoubleWell, None) => Ok(Potential::double_well()),
        }
    }
}

impl From<&Potential> for PotentialSpec {
    fn from(v: &Potential) -> Self {
        Self {
            kind: v.kind,
            coefficients: Some(v.coefficients.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn real_evaluation() {
        assert_eq!(Potential::harmonic().eval_real(1.0).unwrap(), 0.5);
        let dw = Potential::double_well();
        assert_eq!(dw.eval_real(1.0).unwrap(), 0.0);
        assert_eq!(dw.eval_real(-1.0).unwrap(), 0.0);
        assert_eq!(dw.eval_real(0.0).unwrap(), 1.0);
        assert!(matches!(dw.eval_real(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(dw.eval_real(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn complex_evaluation() {
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(Potential::harmonic().eval_complex(i).unwrap(), Complex64::new(-0.5, 0.0));
        // ((1+i)² - 1)² = (2i - 1)² = -4i² ... expanded independently:
        // (1+i)² = 2i, 2i - 1 = -1 + 2i, (-1 + 2i)² = 1 - 4i - 4 = -3 - 4i.
        let z = Complex64::new(1.0, 1.0);
        let got = Potential::double_well().eval_complex(z).unwrap();
        assert!((got - Complex64::new(-3.0, -4.0)).norm() < 1e-14);
        assert!(Potential::harmonic()
            .eval_complex(Complex64::new(f64::NAN, 0.0))
            .is_err());
    }

    #[test]
    fn derivatives() {
        assert_eq!(Potential::harmonic().derivative().coefficients(), &[0.0, 1.0]);
        assert_eq!(Potential::custom(vec![5.0]).unwrap().derivative().coefficients(), &[0.0]);
        assert_eq!(
            Potential::double_well().derivative().coefficients(),
            &[0.0, -4.0, 0.0, 4.0]
        );
        let d = Potential::double_well().derivative();
        assert_eq!(d.degree(), 3);
    }

    #[test]
    fn construction_rules() {
        let v = Potential::custom(vec![1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.degree(), 1);
        assert!(Potential::custom(vec![0.0; 10]).is_ok());
        assert!(matches!(Potential::custom(vec![1.0; 10]), Err(Error::Usage(_))));
        assert!(Potential::custom(vec![1.0, f64::NAN]).is_err());
        let dw = Potential::double_well_with(2.0, 3.0).unwrap();
        assert!((dw.eval(2.0)).abs() < 1e-15);
        assert!((dw.eval(0.0) - 3.0).abs() < 1e-15);
        assert!(dw.is_even());
        assert!(!Potential::custom(vec![0.0, 1.0, 1.0]).unwrap().is_even());
    }

    #[test]
    fn spec_conversion() {
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"double_well"}"#).unwrap();
        assert_eq!(Potential::try_from(&spec).unwrap(), Potential::double_well());
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"kind":"custom","coefficients":[0,0,1]}"#).unwrap();
        assert_eq!(Potential::try_from(&spec).unwrap().coefficients(), &[0.0, 0.0, 1.0]);
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"custom"}"#).unwrap();
        assert!(matches!(Potential::try_from(&spec), Err(Error::Usage(_))));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"custom","foo":1}"#).is_err());
    }

    #[test]
    fn sublevel_radius_of_double_well() {
        let dw = Potential::double_well();
        // (x² - 1)² = 1.2  =>  x² = 1 + √1.2
        let expect = (1.0 + 1.2f64.sqrt()).sqrt();
        assert!((dw.sublevel_radius(1.2).unwrap() - expect).abs() < 1e-12);
        assert!(Potential::inverted_harmonic().sublevel_radius(1.0).is_none());
        assert!((Potential::harmonic().sublevel_radius(2.0).unwrap() - 2.0).abs() < 1e-12);
    }

    fn arb_potential() -> impl Strategy<Value = Potential> {
        prop::collection::vec(-3.0f64..3.0, 1..=9)
            .prop_map(|c| Potential::custom(c).unwrap())
    }

    fn naive(v: &Potential, x: f64) -> f64 {
        v.coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| c * x.powi(k as i32))
            .sum()
    }

    proptest! {
        #[test]
        fn complex_matches_real_on_axis(v in arb_potential(), x in -3.0f64..3.0) {
            let r = v.eval_real(x).unwrap();
            let c = v.eval_complex(Complex64::new(x, 0.0)).unwrap();
            prop_assert_eq!(c.im, 0.0);
            prop_assert!((c.re - r).abs() <= 1e-15 * r.abs().max(1.0));
        }

        #[test]
        fn derivative_matches_finite_difference(v in arb_potential(), x in -3.0f64..3.0) {
            let h = 1e-6;
            let fd = (v.eval(x + h) - v.eval(x - h)) / (2.0 * h);
            let exact = v.derivative().eval(x);
            // Scale by the size of the terms so cancellation near zero slopes is not penalised.
            let scale: f64 = v.coefficients().iter().enumerate()
                .map(|(k, c)| (k as f64 * c * x.abs().powi(k as i32 - 1)).abs()).sum::<f64>().max(1.0);
            prop_assert!((fd - exact).abs() / scale < 1e-6, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn horner_matches_power_sum(v in arb_potential(), x in -3.0f64..3.0) {
            let h = v.eval(x);
            let n = naive(&v, x);
            let scale: f64 = v.coefficients().iter().enumerate()
                .map(|(k, c)| (c * x.powi(k as i32)).abs()).sum::<f64>().max(1e-300);
            prop_assert!((h - n).abs() <= 1e-12 * scale);
        }
    }
}
