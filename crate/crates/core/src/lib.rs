//! Mean-field quantum (MFQM) and complex classical (CCM) dynamics on the
//! shared extended phase space `(x, y, p, q)`, with a finite-difference
//! Schrödinger eigensolver as the quantum reference.
//!
//! Module map:
//!
//! * [`potentials`]: polynomial potentials, exact derivatives, complex continuation.
//! * [`hamiltonians`]: `H±`, `H_R`/`H_I`, the Ω bracket and the Γ/Λ relations.
//! * [`dynamics`]: adaptive integration with crossing and escape events.
//! * [`ensemble`]: Liouville transport of phase-space samples along characteristics.
//! * [`oracle`]: the 1D Schrödinger eigensolver.
//! * [`analysis`]: ellipse fits, dwell times, sweeps and comparison tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod hamiltonians;
pub mod oracle;
pub mod potentials;

pub use error::{Error, Result};
pub use hamiltonians::{ExtendedSystem, Flavor, PhasePoint};
pub use potentials::Potential;
