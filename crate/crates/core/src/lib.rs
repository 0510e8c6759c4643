//! Exact and semiclassical propagation of coherent states in the quartic
//! (Kerr) oscillator `H = gamma hbar^2 (n + 1/2)^2`.
//!
//! - [`exact`]: truncated Fock-basis evolution, the reference oracle.
//! - [`vanvleck`]: periodic-orbit sums from the Van Vleck propagator.
//! - [`theta`]: Jacobi theta-function forms of the autocorrelation.
//! - [`tdwkb`]: time-dependent WKB on an evolving Lagrangian manifold.
//! - [`cli`]: run configuration and commands of the `kerr-revival` binary.

pub mod cli;
pub mod error;
pub mod exact;
pub mod hermite;
pub mod kernel;
mod roots;
pub mod theta;
pub mod tdwkb;
pub mod vanvleck;

pub use error::{Error, Result};
pub use kernel::{derive_times, classical_hamiltonian, CoherentState, ModelParams, Picture, Timescales};
