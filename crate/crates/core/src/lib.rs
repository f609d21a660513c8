//! Bound states of the two-dimensional massless Dirac equation in an
//! energy-dependent hyperbolic Scarf potential.
//!
//! The crate computes stationary energies, closed-form spinors, modified norms
//! and orthogonality overlaps, and cross-checks them against an independent
//! shooting-method integration of the decoupled equation.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod wavefunction;

pub use error::{Error, Result};
pub use potential::{ParameterProfile, ScarfPotential, SignReport};
pub use spectrum::{Branch, EnergyLevel, QuantumNumbers, Validity};
pub use wavefunction::{BoundState, SpinorSample};
