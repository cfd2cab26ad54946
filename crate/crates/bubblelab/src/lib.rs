//! Spherical gas bubble in a liquid shell: equilibria, modal Galerkin
//! dynamics, energy audits and the linear spectrum.

pub mod config;
pub mod dynamics;
pub mod energy;
pub mod equilibrium;
pub mod error;
pub mod fd;
pub mod integrator;
pub mod linear;
pub mod modal;
pub mod params;
pub mod quadrature;
pub mod simulate;
pub mod spectrum;

pub use error::{BubbleError, ErrorKind, Result};
