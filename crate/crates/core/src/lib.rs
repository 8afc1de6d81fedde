//! Closed-form simulation of entanglement swapping with hybrid cat-state pairs.
//!
//! The analytic engine ([`states`], [`optics`], [`protocol`]) represents every
//! state as a finite superposition of multimode coherent states with qubit
//! labels. [`fock_oracle`] re-runs the same protocol in a truncated Fock
//! basis with no shared transform code, and serves as the cross-check.

pub mod cli;
pub mod error;
pub mod fock_oracle;
pub mod metrics;
pub mod optics;
pub mod protocol;
pub mod quadrature;
pub mod states;

pub use error::{Error, Result};
