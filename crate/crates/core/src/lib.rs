//! Holonomic gates on networks of Josephson charge qubits.
//!
//! Junction couplings ([`junction`]) feed block Hamiltonians in the charge
//! basis ([`network`]). Their degenerate eigenspaces ([`spectrum`]) carry
//! non-Abelian holonomies along closed flux loops ([`holonomy`]), which are
//! checked against finite-time evolution ([`evolution`]), compared with the
//! target logical gates ([`gates`]) and turned into error estimates
//! ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod gates;
pub mod holonomy;
pub mod junction;
pub mod linalg;
pub mod network;
pub mod quadrature;
pub mod spectrum;

pub use error::{HoloError, Result};
