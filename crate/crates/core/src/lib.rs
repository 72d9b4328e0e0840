//! Desk-scale laboratory for the covariant quantization of the free bosonic
//! string.
//!
//! The crate builds level-truncated indefinite-metric Fock spaces in an
//! exact-rational PBW oscillator basis, imposes the Virasoro constraints at
//! fixed momentum to extract physical state spaces and their signatures,
//! and numerically verifies the locality and covariance properties of the
//! free string field: invariant mass-shell measures, smeared commutators
//! against a closed-form commutator-function oracle, and a second-quantized
//! multi-string layer with observable fields on the physical quotient.

pub mod field;
pub mod fock;
pub mod lorentz;
pub mod mass_shell;
pub mod metric;
pub mod orbits;
pub mod propagator;
pub mod quad;
pub mod scalar;
pub mod spectrum;
pub mod virasoro;
