//! First-order triangular finite elements on the conductor cross-section.
//!
//! Nodal hat functions carry the temperature and the longitudinal vector
//! potential; Whitney edge functions carry the transversal vector potential.

mod assemble;
mod element;
mod mesh;

pub use assemble::{
    assemble_coupling, assemble_edge_matrices, assemble_nodal_mass, assemble_nodal_stiffness,
    assemble_winding_vector, fe_loss_vector, FEMatrixBundle,
};
pub(crate) use assemble::geometry;
pub use element::{TriangleGeometry, TriangleRule};
pub use mesh::{
    graded_lines, structured_grid, structured_rect, Region, TriMesh2D, Triangle,
    DEGENERATE_AREA_TOL, LOCAL_EDGES,
};
