//! Quasi-3D (Q3D) magneto-thermal quench simulation.
//!
//! The cross-section of a conductor is discretized with first-order triangular
//! finite elements (nodal functions for the temperature and the longitudinal
//! vector potential, Whitney edge functions for the transversal vector
//! potential). The longitudinal direction uses high-order spectral elements
//! with a hierarchical Lobatto basis. Every discrete operator is a sum of
//! Kronecker products of 1D and 2D factors; temperature-dependent materials
//! enter through Chebyshev expansions along `z` contracted against
//! precomputed reference tensors.
//!
//! Module map:
//! - [`spectral1d`]: Lobatto basis, Chebyshev transform, quadrature, reference tensors.
//! - [`fem2d`]: triangle meshes and cross-section element matrices.
//! - [`materials`]: material curves, quench flag, effective properties.
//! - [`assembly`]: Q3D system matrices, sources, losses, Dirichlet reduction.
//! - [`solver`]: implicit Euler steps, Picard coupling, z-adaptation, energies.
//! - [`cli`]: run configuration, wire benchmark, cache management, output files.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod fem2d;
pub mod linsolve;
pub mod materials;
pub mod solver;
pub mod sparse;
pub mod spectral1d;

pub use error::{Error, Result};
