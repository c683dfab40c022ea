//! Decoherence of spin registers coupled to an ohmic boson bath: the
//! pair decoherence function, hierarchically encoded registers, Haar-averaged
//! register fidelities and two-spin Bloch-Redfield dynamics.

pub mod encoding;
pub mod error;
pub mod fidelity;
pub mod kernel;
pub mod quadrature;
pub mod redfield;
pub mod special;

pub use error::{Error, Result};
pub use kernel::BathSpec;
