//! One-dimensional spectral-element machinery along the conductor axis.

mod chebyshev;
mod lobatto;
mod mesh;
mod quadrature;
mod reference;

pub use chebyshev::{
    chebyshev, chebyshev_coeffs, chebyshev_coeffs_direct, chebyshev_mean, chebyshev_points, chebyshev_series,
    chebyshev_series_min, limit_nonnegative,
};
pub use lobatto::{
    legendre, lobatto, lobatto_all, lobatto_derivative, BASIS_ID, MAX_BASIS_ORDER,
};
pub use mesh::{se_matrices_constant, SpectralLineMesh};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use reference::{CacheStatus, ReferenceTensorSet};
