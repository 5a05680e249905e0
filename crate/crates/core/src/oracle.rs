//! Finite-difference eigensolver for the 1D Schrödinger equation.
//!
//! The Hamiltonian `-ħ²/2m ∂² + V` is discretised with the three-point
//! stencil on the interior points of a uniform grid (Dirichlet walls at both
//! edges). Eigenvalues come from Sturm-sequence bisection, eigenvectors from
//! inverse iteration with a pivoted tridiagonal solve; vectors of clustered
//! eigenvalues (tunnelling doublets) are re-orthogonalised against each other.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::potentials::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 64;

    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < Self::MIN_POINTS {
            return usage(format!(
                "grid.n must be at least {}, got {}",
                Self::MIN_POINTS,
                self.n
            ));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return usage("grid.x_max must exceed grid.x_min");
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        // Symmetric formula so mirrored grids are mirrored to the last bit.
        let t = i as f64 / (self.n - 1) as f64;
        0.5 * ((self.x_min + self.x_max) + (self.x_max - self.x_min) * (2.0 * t - 1.0))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Same extent with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// Lowest eigenpairs of the discretised Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    /// One vector per level over all grid points, edges included (zero),
    /// normalised so that `Σ ψ² h = 1`.
    #[serde(skip)]
    pub wavefunctions: Vec<Vec<f64>>,
    pub grid: Grid1D,
    pub hbar: f64,
    pub mass: f64,
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (len n-1).
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    fn len(&self) -> usize {
        self.d.len()
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm count).
    fn count_below(&self, lambda: f64) -> usize {
        // Exact zero pivots are nudged negative, as in LAPACK's dstebz.
        let pivmin = f64::MIN_POSITIVE.sqrt();
        let guard = |q: f64| if q.abs() < pivmin { -pivmin } else { q };
        let mut q = guard(self.d[0] - lambda);
        let mut count = usize::from(q < 0.0);
        for i in 1..self.len() {
            q = guard(self.d[i] - lambda - self.e[i - 1] * self.e[i - 1] / q);
            count += usize::from(q < 0.0);
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue by bisection.
    fn eigenvalue(&self, j: usize, bounds: (f64, f64)) -> f64 {
        let (mut lo, mut hi) = bounds;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T - shift) x = b` by Gaussian elimination with partial
    /// pivoting; zero pivots are replaced by a tiny perturbation.
    fn solve_shifted(&self, shift: f64, b: &[f64], pivot_floor: f64) -> Vec<f64> {
        let n = self.len();
        // Rows after pivoting hold up to three nonzeros: diag, super, super-super.
        let mut a0: Vec<f64> = self.d.iter().map(|d| d - shift).collect();
        let mut a1: Vec<f64> = self.e.clone();
        a1.push(0.0);
        let mut a2 = vec![0.0; n];
        let mut sub: Vec<f64> = self.e.clone();
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if sub[i].abs() > a0[i].abs() {
                // Swap row i with row i+1.
                let (r0, r1, r2) = (sub[i], a0[i + 1], a1[i + 1]);
                let (s0, s1, s2) = (a0[i], a1[i], a2[i]);
                a0[i] = r0;
                a1[i] = r1;
                a2[i] = r2;
                rhs.swap(i, i + 1);
                let m = s0 / r0;
                a0[i + 1] = s1 - m * r1;
                a1[i + 1] = s2 - m * r2;
                rhs[i + 1] -= m * rhs[i];
            } else {
                if a0[i] == 0.0 {
                    a0[i] = pivot_floor;
                }
                let m = sub[i] / a0[i];
                a0[i + 1] -= m * a1[i];
                rhs[i + 1] -= m * rhs[i];
            }
            sub[i] = 0.0;
        }
        if a0[n - 1] == 0.0 {
            a0[n - 1] = pivot_floor;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= a1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= a2[i] * x[i + 2];
            }
            x[i] = s / a0[i];
        }
        x
    }

    fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.d[i] - lambda) * x[i];
                if i > 0 {
                    r += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    r += self.e[i] * x[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest `k` eigenpairs of `t`, eigenvectors unit-normalised.
fn lowest_pairs(t: &Tridiagonal, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let bounds = t.gershgorin();
    let norm_t = bounds.0.abs().max(bounds.1.abs());
    let energies: Vec<f64> = (0..k).map(|j| t.eigenvalue(j, bounds)).collect();
    let m = t.len();
    let cluster_gap = 1e-3 * norm_t;
    let pivot_floor = f64::EPSILON * norm_t;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, &lambda) in energies.iter().enumerate() {
        let mut x: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (j as f64 + 1.3)).sin())
            .collect();
        normalize(&mut x);
        let partners: Vec<usize> = (0..j)
            .filter(|&i| (energies[i] - lambda).abs() < cluster_gap)
            .collect();
        let mut converged = false;
        for _ in 0..20 {
            let mut y = t.solve_shifted(lambda, &x, pivot_floor);
            for &i in &partners {
                let c = dot(&y, &vectors[i]);
                y.iter_mut().zip(&vectors[i]).for_each(|(a, b)| *a -= c * b);
            }
            normalize(&mut y);
            let sign = if dot(&y, &x) < 0.0 { -1.0 } else { 1.0 };
            let change = y
                .iter()
                .zip(&x)
                .fold(0.0f64, |acc, (a, b)| acc.max((sign * a - b).abs()));
            x = y;
            if change < 1e-13 {
                converged = true;
                break;
            }
        }
        let res = t.residual(lambda, &x);
        if !converged && res > 1e-9 * norm_t {
            return Err(Error::Numeric(format!(
                "inverse iteration for level {j} (E = {lambda}) did not converge: \
                 residual {res:e}, matrix norm {norm_t:e}"
            )));
        }
        vectors.push(x);
    }
    Ok((energies, vectors))
}

/// Lowest `k` eigenpairs of `-ħ²/2m ∂² + V` on `grid`.
///
/// Even potentials on grids symmetric about the origin are solved in
/// separate parity sectors, so tunnelling doublets keep exact parity even
/// when their splitting is far below the rounding level of the full matrix.
pub fn eigensolve(
    v: &Potential,
    grid: &Grid1D,
    hbar: f64,
    mass: f64,
    k: usize,
) -> Result<SpectrumResult> {
    grid.validate()?;
    if !(hbar > 0.0 && mass > 0.0) {
        return usage("hbar and mass must be positive");
    }
    if k == 0 || k > grid.n / 4 {
        return usage(format!("levels must be in 1..={}, got {k}", grid.n / 4));
    }
    let h = grid.spacing();
    let xs = grid.points();
    let interior = &xs[1..grid.n - 1];
    let potential: Vec<f64> = interior.iter().map(|&x| v.eval(x)).collect();
    let edge_min = v.eval(grid.x_min).min(v.eval(grid.x_max));
    let inner_min = potential.iter().cloned().fold(f64::INFINITY, f64::min);
    if edge_min < inner_min - 1e-12 * inner_min.abs().max(1.0) {
        return domain(format!(
            "potential is not confining on [{}, {}]: it falls to {edge_min} at the grid edge, \
             below the interior minimum {inner_min}",
            grid.x_min, grid.x_max
        ));
    }

    let kinetic = hbar * hbar / (mass * h * h);
    let off = -0.5 * kinetic;
    let m = potential.len();
    let symmetric = v.is_even() && grid.x_min == -grid.x_max;

    let (energies, vectors) = if symmetric {
        // Even and odd sectors on the right half; exact parity by construction.
        let c = m / 2;
        let diag: Vec<f64> = potential[c..].iter().map(|vx| kinetic + vx).collect();
        let (even, odd) = if m % 2 == 1 {
            let mut e = vec![off; diag.len() - 1];
            e[0] *= std::f64::consts::SQRT_2;
            (
                Tridiagonal { d: diag.clone(), e },
                Tridiagonal {
                    d: diag[1..].to_vec(),
                    e: vec![off; diag.len() - 2],
                },
            )
        } else {
            let mut de = diag.clone();
            de[0] += off;
            let mut dodd = diag.clone();
            dodd[0] -= off;
            (
                Tridiagonal { d: de, e: vec![off; diag.len() - 1] },
                Tridiagonal { d: dodd, e: vec![off; diag.len() - 1] },
            )
        };
        let (ev_even, vec_even) = lowest_pairs(&even, k.min(even.len()))?;
        let (ev_odd, vec_odd) = lowest_pairs(&odd, k.min(odd.len()))?;
        let expand = |half: &[f64], parity: f64| -> Vec<f64> {
            let mut full = vec![0.0; m];
            if m % 2 == 1 {
                if parity > 0.0 {
                    full[c] = std::f64::consts::SQRT_2 * half[0];
                    for j in 1..half.len() {
                        full[c + j] = half[j];
                        full[c - j] = half[j];
                    }
                } else {
                    for j in 0..half.len() {
                        full[c + 1 + j] = half[j];
                        full[c - 1 - j] = -half[j];
                    }
                }
            } else {
                for j in 0..half.len() {
                    full[c + j] = half[j];
                    full[c - 1 - j] = parity * half[j];
                }
            }
            normalize(&mut full);
            full
        };
        let mut merged: Vec<(f64, Vec<f64>)> = ev_even
            .into_iter()
            .zip(vec_even.iter().map(|h| expand(h, 1.0)))
            .chain(ev_odd.into_iter().zip(vec_odd.iter().map(|h| expand(h, -1.0))))
            .collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        merged.truncate(k);
        merged.into_iter().unzip()
    } else {
        let t = Tridiagonal {
            d: potential.iter().map(|vx| kinetic + vx).collect(),
            e: vec![off; m - 1],
        };
        lowest_pairs(&t, k)?
    };
    for w in energies.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Numeric(format!(
                "eigenvalues {} and {} failed to separate",
                w[0], w[1]
            )));
        }
    }

    let scale = 1.0 / h.sqrt();
    let wavefunctions = vectors
        .into_iter()
        .map(|vec| {
            let peak = vec.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let lead = vec.iter().find(|v| v.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
            let s = scale * lead.signum();
            let mut full = Vec::with_capacity(grid.n);
            full.push(0.0);
            full.extend(vec.iter().map(|v| v * s));
            full.push(0.0);
            full
        })
        .collect();

    Ok(SpectrumResult {
        energies,
        wavefunctions,
        grid: *grid,
        hbar,
        mass,
    })
}

impl SpectrumResult {
    /// `(P_left, P_right)` of an arbitrary grid function normalised like the
    /// eigenvectors. A grid point lying exactly on `split_at` contributes
    /// half of its weight to each side.
    pub fn probabilities_of(&self, psi: &[f64], split_at: f64) -> (f64, f64) {
        let h = self.grid.spacing();
        let left: f64 = psi
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = self.grid.point(i);
                let w = if x < split_at {
                    1.0
                } else if x == split_at {
                    0.5
                } else {
                    0.0
                };
                w * v * v * h
            })
            .sum();
        (left, 1.0 - left)
    }

    pub fn well_probabilities(&self, level: usize, split_at: f64) -> Result<(f64, f64)> {
        let psi = self
            .wavefunctions
            .get(level)
            .ok_or_else(|| Error::Usage(format!("level {level} was not computed")))?;
        Ok(self.probabilities_of(psi, split_at))
    }

    /// `(ψ_i + sign·ψ_j)/√2`.
    pub fn combination(&self, i: usize, j: usize, sign: f64) -> Result<Vec<f64>> {
        let (a, b) = match (self.wavefunctions.get(i), self.wavefunctions.get(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return usage(format!("levels {i} and {j} were not both computed")),
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Ok(a.iter().zip(b).map(|(u, v)| r * (u + sign * v)).collect())
    }

    /// `⟨ψ_i, ψ_j⟩ h`.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        dot(&self.wavefunctions[i], &self.wavefunctions[j]) * self.grid.spacing()
    }

    /// Sign changes of `ψ_level`, ignoring entries below `1e-8` of the peak.
    pub fn node_count(&self, level: usize) -> usize {
        let psi = &self.wavefunctions[level];
        let peak = psi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut last = 0.0;
        let mut nodes = 0;
        for &v in psi.iter().filter(|v| v.abs() > 1e-8 * peak) {
            if last != 0.0 && v.signum() != last {
                nodes += 1;
            }
            last = v.signum();
        }
        nodes
    }

    /// `E_1 - E_0`, when at least two levels were computed.
    pub fn splitting(&self) -> Option<f64> {
        (self.energies.len() >= 2).then(|| self.energies[1] - self.energies[0])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "energies": self.energies,
            "hbar": self.hbar,
            "mass": self.mass,
            "grid": self.grid,
        })
    }

    /// Wavefunctions as CSV `x,psi0,psi1,...`.
    pub fn write_wavefunctions_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.wavefunctions.len())
            .map(|i| format!("psi{i}"))
            .collect();
        writeln!(w, "x,{}", header.join(","))?;
        for i in 0..self.grid.n {
            write!(w, "{}", self.grid.point(i))?;
            for psi in &self.wavefunctions {
                write!(w, ",{}", psi[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
