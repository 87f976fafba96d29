//! Directed-wave propagation of 1D electromagnetic pulses in a Drude
//! metamaterial with a Kerr nonlinearity.

pub mod error;
pub mod evolution;
pub mod medium;
pub mod projectors;
pub mod reference;
pub mod scenario;
pub mod spectral;
pub mod stationary;
pub mod waves;

pub use error::{Error, Result};
pub use medium::DrudeParams;
pub use spectral::{Signal, Spectrum, TimeGrid};
pub use waves::DirectedPair;
