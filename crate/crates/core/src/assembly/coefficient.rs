use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem2d::TriMesh2D;
use crate::spectral1d::{chebyshev_coeffs, chebyshev_points, limit_nonnegative, lobatto_all, ReferenceTensorSet, SpectralLineMesh};

/// Material coefficient sampled on (triangle × SE element) pairs.
#[derive(Debug, Clone)]
pub enum CoefficientField {
    /// One z-independent value per triangle of the mesh; assembled with
    /// global Kronecker products.
    PerTriangle(Vec<f64>),
    /// Chebyshev expansions along z; assembled element block by element block.
    Chebyshev(ChebyshevField),
}

/// Chebyshev coefficients `α̃_m` for every listed triangle and every SE
/// element. Triangles that are not listed carry a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevField {
    triangles: Vec<usize>,
    n_elements: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl ChebyshevField {
    pub fn new(triangles: Vec<usize>, n_elements: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = triangles.len() * n_elements * (order + 1);
        if coeffs.len() != expected {
            return Err(Error::Dimension(format!(
                "{} Chebyshev coefficients, expected {} triangles × {n_elements} elements × {}",
                coeffs.len(),
                triangles.len(),
                order + 1
            )));
        }
        Ok(Self {
            triangles,
            n_elements,
            order,
            coeffs,
        })
    }

    /// z-constant value per listed triangle.
    pub fn constant(triangles: Vec<usize>, n_elements: usize, values: &[f64]) -> Result<Self> {
        if values.len() != triangles.len() {
            return Err(Error::Dimension("one value per listed triangle expected".into()));
        }
        let coeffs = values
            .iter()
            .flat_map(|&v| std::iter::repeat(v).take(n_elements))
            .collect();
        Self::new(triangles, n_elements, 0, coeffs)
    }

    /// Transforms pointwise values `values[(i, k, j)]` at the Chebyshev points
    /// (transform order) into coefficients.
    pub fn from_values(triangles: Vec<usize>, n_elements: usize, order: usize, values: &[f64]) -> Result<Self> {
        let per = order + 1;
        if values.len() != triangles.len() * n_elements * per {
            return Err(Error::Dimension("sample array does not match the field layout".into()));
        }
        let coeffs: Vec<f64> = values
            .par_chunks(per)
            .map(chebyshev_coeffs)
            .collect::<Result<Vec<_>>>()?
            .concat();
        Self::new(triangles, n_elements, order, coeffs)
    }

    /// [`Self::from_values`] for a quantity that cannot be negative: every
    /// expansion that dips below zero is pulled towards its element mean.
    pub fn from_nonnegative_values(triangles: Vec<usize>, n_elements: usize, order: usize, values: &[f64]) -> Result<Self> {
        let mut f = Self::from_values(triangles, n_elements, order, values)?;
        let limited = f.coeffs.par_chunks_mut(order + 1).map(limit_nonnegative).filter(|&s| s < 1.0).count();
        if limited > 0 {
            log::debug!("positivity limiter active on {limited} expansions");
        }
        Ok(f)
    }

    pub fn triangles(&self) -> &[usize] {
        &self.triangles
    }

    pub fn num_elements(&self) -> usize {
        self.n_elements
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients on the `i`-th listed triangle and SE element `k`.
    pub fn coeffs(&self, i: usize, k: usize) -> &[f64] {
        let per = self.order + 1;
        let start = (i * self.n_elements + k) * per;
        &self.coeffs[start..start + per]
    }

    pub fn all_coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl CoefficientField {
    pub(crate) fn check(&self, mesh: &TriMesh2D, zmesh: &SpectralLineMesh) -> Result<()> {
        match self {
            CoefficientField::PerTriangle(v) => {
                if v.len() != mesh.num_triangles() {
                    return Err(Error::Dimension(format!(
                        "{} triangle coefficients for {} triangles",
                        v.len(),
                        mesh.num_triangles()
                    )));
                }
            }
            CoefficientField::Chebyshev(f) => {
                if f.n_elements != zmesh.num_elements() {
                    return Err(Error::Dimension(format!(
                        "coefficient sampled on {} SE elements, mesh has {}",
                        f.n_elements,
                        zmesh.num_elements()
                    )));
                }
                if let Some(&t) = f.triangles.iter().find(|&&t| t >= mesh.num_triangles()) {
                    return Err(Error::Dimension(format!("coefficient on missing triangle {t}")));
                }
            }
        }
        Ok(())
    }
}

/// Element-wise nonlinear SE matrices by contraction with the reference
/// tensors: `K = (2/h) Σ α̃_m refK[m]`, `M = (h/2) Σ α̃_m refM[m]`,
/// `D = Σ α̃_m refD[m]`.
pub fn assemble_nonlinear_se_matrices(
    zmesh: &SpectralLineMesh,
    k: usize,
    coeffs: &[f64],
    refs: &ReferenceTensorSet,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    if k >= zmesh.num_elements() {
        return Err(Error::InvalidInput(format!("element {k} out of range")));
    }
    let h = zmesh.element_length(k);
    let (mut kk, mut mm, dd) = refs.contract_with(coeffs, zmesh.order(k))?;
    kk *= 2.0 / h;
    mm *= h / 2.0;
    Ok((kk, mm, dd))
}

/// Values of a nodal × spectral field at the Chebyshev points of every SE
/// element: `out[(k · n_nodes + j) · (M+1) + i]`.
pub fn nodal_chebyshev_traces(
    zmesh: &SpectralLineMesh,
    u: &[f64],
    n_nodes: usize,
    offset: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if u.len() < offset + zmesh.num_functions() * n_nodes {
        return Err(Error::Dimension("field shorter than its DoF layout".into()));
    }
    let pts = chebyshev_points(order);
    let per = order + 1;
    let mut out = vec![0.0; zmesh.num_elements() * n_nodes * per];
    out.par_chunks_mut(n_nodes * per).enumerate().for_each(|(k, block)| {
        let p = zmesh.order(k);
        let map = zmesh.local_to_global(k);
        let mut v = vec![0.0; p + 1];
        let mut d = vec![0.0; p + 1];
        for (i, &xi) in pts.iter().enumerate() {
            lobatto_all(p, xi, &mut v, &mut d);
            for (a, &w) in map.iter().enumerate() {
                let base = offset + w * n_nodes;
                for j in 0..n_nodes {
                    block[j * per + i] += v[a] * u[base + j];
                }
            }
        }
    });
    Ok(out)
}

/// Temperature at triangle centroids × Chebyshev points of every SE element,
/// laid out as [`ChebyshevField::from_values`] expects for `triangles`.
pub fn centroid_chebyshev_samples(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    u: &[f64],
    order: usize,
    triangles: &[usize],
) -> Result<Vec<f64>> {
    let n_nodes = mesh.num_nodes();
    let traces = nodal_chebyshev_traces(zmesh, u, n_nodes, 0, order)?;
    let per = order + 1;
    let n_el = zmesh.num_elements();
    let mut out = Vec::with_capacity(triangles.len() * n_el * per);
    for &t in triangles {
        let nodes = mesh.triangle(t).nodes;
        for k in 0..n_el {
            for i in 0..per {
                let s: f64 = nodes.iter().map(|&j| traces[(k * n_nodes + j) * per + i]).sum();
                out.push(s / 3.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral1d::{se_matrices_constant, gauss_legendre, lobatto, lobatto_derivative, chebyshev};

    #[test]
    fn constant_coefficient_reduces_to_linear_matrices() {
        let z = SpectralLineMesh::new(vec![0.0, 0.3, 1.0], vec![3, 5]).unwrap();
        let refs = ReferenceTensorSet::build(6, 4).unwrap();
        for k in 0..2 {
            let (a, b, c) = assemble_nonlinear_se_matrices(&z, k, &[2.5, 0.0, 0.0], &refs).unwrap();
            let (x, y, w) = se_matrices_constant(&z, k, 2.5, &refs).unwrap();
            assert_eq!(a, x);
            assert_eq!(b, y);
            assert_eq!(c, w);
        }
    }

    #[test]
    fn t1_coefficient_matches_quadrature() {
        let z = SpectralLineMesh::new(vec![0.0, 0.4], vec![4]).unwrap();
        let refs = ReferenceTensorSet::build(4, 3).unwrap();
        let (k, m, d) = assemble_nonlinear_se_matrices(&z, 0, &[0.0, 1.0], &refs).unwrap();
        let g = gauss_legendre(12).unwrap();
        let h = 0.4;
        for p in 0..=4 {
            for q in 0..=4 {
                let kk = g.integrate(|x| chebyshev(1, x).unwrap() * lobatto_derivative(q, x).unwrap() * lobatto_derivative(p, x).unwrap()) * 2.0 / h;
                let mq = g.integrate(|x| chebyshev(1, x).unwrap() * lobatto(q, x).unwrap() * lobatto(p, x).unwrap()) * h / 2.0;
                let dq = g.integrate(|x| chebyshev(1, x).unwrap() * lobatto_derivative(q, x).unwrap() * lobatto(p, x).unwrap());
                assert!((k[(p, q)] - kk).abs() < 1e-12);
                assert!((m[(p, q)] - mq).abs() < 1e-12);
                assert!((d[(p, q)] - dq).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contraction_is_linear() {
        let z = SpectralLineMesh::uniform(0.0, 1.0, 1, 5).unwrap();
        let refs = ReferenceTensorSet::build(5, 6).unwrap();
        let a = [0.3, -1.0, 0.25, 0.0, 0.5];
        let b = [1.0, 0.5, 0.0, 2.0, -0.1];
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ra = assemble_nonlinear_se_matrices(&z, 0, &a, &refs).unwrap();
        let rb = assemble_nonlinear_se_matrices(&z, 0, &b, &refs).unwrap();
        let rab = assemble_nonlinear_se_matrices(&z, 0, &ab, &refs).unwrap();
        assert!((rab.0 - (ra.0 + rb.0)).abs().max() < 1e-13);
        assert!((rab.1 - (ra.1 + rb.1)).abs().max() < 1e-14);
        assert!((rab.2 - (ra.2 + rb.2)).abs().max() < 1e-13);
    }

    #[test]
    fn traces_reproduce_field() {
        let z = SpectralLineMesh::new(vec![0.0, 0.5, 1.0], vec![3, 4]).unwrap();
        let n_nodes = 2;
        let f0 = z.interpolate(|s| s * s).unwrap();
        let f1 = z.interpolate(|s| 1.0 - s).unwrap();
        let mut u = vec![0.0; z.num_functions() * n_nodes];
        for w in 0..z.num_functions() {
            u[w * n_nodes] = f0[w];
            u[w * n_nodes + 1] = f1[w];
        }
        let tr = nodal_chebyshev_traces(&z, &u, n_nodes, 0, 6).unwrap();
        for k in 0..2 {
            for (i, zz) in z.chebyshev_samples(k, 6).into_iter().enumerate() {
                assert!((tr[(k * n_nodes) * 7 + i] - zz * zz).abs() < 1e-14);
                assert!((tr[(k * n_nodes + 1) * 7 + i] - (1.0 - zz)).abs() < 1e-14);
            }
        }
    }
}
