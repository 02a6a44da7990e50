//! Q3D discrete systems: DoF layout, Kronecker and block-wise assembly of the
//! magnetic and thermal matrices, source and loss vectors, Dirichlet reduction.

mod coefficient;
mod dofmap;
mod loss;
mod q3d;

pub use coefficient::{
    assemble_nonlinear_se_matrices, centroid_chebyshev_samples, nodal_chebyshev_traces, ChebyshevField,
    CoefficientField,
};
pub use dofmap::{apply_dirichlet, DirichletData, DofMap, FieldKind, ReducedSystem};
pub use loss::{compute_loss_vector, loss_quadrature_points, LossContext, LossQuadrature};
pub use q3d::{
    assemble_q3d_curlcurl, assemble_q3d_mass, assemble_source, assemble_thermal_system, regularization_weight,
};

use crate::sparse::CsrMatrix;

/// Matrices and vectors of one working point.
#[derive(Debug, Clone)]
pub struct Q3DSystem {
    pub k_nu: CsrMatrix,
    pub k_tau: CsrMatrix,
    pub m_sigma: CsrMatrix,
    /// Full vector-potential mass used for regularization.
    pub m_reg: CsrMatrix,
    pub j_source: Vec<f64>,
    pub k_thermal: CsrMatrix,
    pub m_thermal: CsrMatrix,
    pub q_loss: Vec<f64>,
}
