//! Photoassociation by adiabatic passage in cold Rb2.
//!
//! Radial bound and scattering solvers (renormalized Numerov on mapped
//! grids), Franck-Condon overlaps, amplitude dynamics with the continuum
//! either eliminated or discretized, and Maxwell-Boltzmann averaging.
//! All quantities are in atomic units; [`units`] converts at the boundary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod franckcondon;
pub mod grid;
pub mod models;
pub mod numerov;
pub mod potentials;
pub mod scattering;
pub mod spectrum;
pub mod spline;
pub mod units;

pub use dynamics::{
    BoundLevel, ContinuumEdge, ContinuumGrid, ContinuumPacket, Coupling, FcProfile, IntegrationOptions, LinkageScheme, PulseEnvelope,
    PulseShape, SimulationResult,
};
pub use ensemble::{EnsembleRun, EnsembleSpec, ThermalQuadrature};
pub use error::{Error, Result};
pub use franckcondon::{FcEntry, FcKind, FcValue};
pub use potentials::{CoupledPotential, InnerBoundary, LoadedPotential, Potential, RadialPotential};
pub use scattering::{ContinuumOptions, ContinuumState, ScatteringLength};
pub use spectrum::{BoundState, SolverOptions};
pub use units::{Dimension, Quantity, Unit};
