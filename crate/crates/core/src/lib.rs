//! Dipole polarizabilities of model quantum systems, computed by several
//! independent methods, and the law α = C·(4μq²/ħ²)·L⁴ relating them to the
//! position spread L.
//!
//! All quantities are in Hartree atomic units.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod manybody;
pub mod models;
pub mod numfmt;
pub mod policy;
pub mod quad;
pub mod scaling;
pub mod solver;
pub mod tsmodel;
pub mod types;
pub mod validate;

pub use error::{Error, Result};
pub use models::{ModelSpec, Potential, StateDescriptor};
pub use policy::NumericPolicy;
pub use types::{c_from_alpha, reduce_isotropic, CharacteristicLength, ParticleParams, PolarizabilityTensor};
