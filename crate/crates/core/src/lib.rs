//! Structure-preserving spectral stochastic-Galerkin simulator for the
//! sphere-constrained modified Swift-Hohenberg equation with Stratonovich
//! multiplicative noise, plus Monte Carlo checks of its analytic properties.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod brownian;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod field;
pub mod geometry;
pub mod integrator;
pub mod manifest;
pub mod rng;
pub mod sampling;
pub mod snapshot;
pub mod verification;

pub use basis::{build_basis, BasisSpec, Domain};
pub use config::{parse_config, parse_config_str, RunConfig};
pub use error::{Result, ShsimError};
pub use field::{GridField, Norms, SpectralField};
pub use geometry::NoiseModel;
pub use integrator::{Scheme, SimConfig, Trajectory};
