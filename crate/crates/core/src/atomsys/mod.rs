//! Five-level atom: configuration, density matrix and nonlinear dynamics.

mod config;
mod density;
mod model;

pub use config::{
    DecayNetwork, DriveConfig, LevelScheme, MediumConfig, MediumConstants, Polarization,
    ProbeConfig, SystemConfig, Transition, TransitionClass, LEVELS,
};
pub(crate) use config::linspace;
pub use density::{CMatrix5, DensityMatrix};
pub(crate) use density::frobenius;
pub use model::{
    liouvillian_rhs, local_fields, rotating_frame_generator, unvectorize, vec_index, vectorize,
    CouplingDirection, Couplings, Model, ProbeFields, StateVec, Superop, DIM,
};
pub use crate::units::dipole_from_decay;
