//! Two-level Friedrichs model of neutral-meson decay.
//!
//! The crate builds the effective non-Hermitian Hamiltonian obtained by
//! eliminating the decay continuum, checks the CPT constraints in the
//! flavour basis, derives the CP-violation parameter `ε` and its
//! decay-rate renormalization `ε^th`, and evaluates the temporal
//! two-component wave function whose squared components are the decay
//! densities in the CP = +1 and CP = −1 sectors.
//!
//! On top of that sit a Monte Carlo event generator, a damped
//! least-squares fitter for the oscillating decay intensity and the
//! built-in K, B_s and D datasets.
//!
//! ```
//! use friedrichs::{cp, dataio};
//!
//! let kaon = dataio::builtin_dataset("kaon").unwrap();
//! let eps_th = cp::epsilon_renormalized(&kaon.params).unwrap();
//! assert!((eps_th.value.norm() - 1.22e-3).abs() < 1e-5);
//! ```

pub mod cli;
pub mod cp;
pub mod dataio;
mod error;
pub mod estimation;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod temporal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
