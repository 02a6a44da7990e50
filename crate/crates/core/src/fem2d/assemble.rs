//! Global cross-section matrices. Every routine takes one coefficient per
//! triangle.

use rayon::prelude::*;

use super::element::{TriangleGeometry, TriangleRule};
use super::mesh::TriMesh2D;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

fn check_alpha(mesh: &TriMesh2D, alpha: &[f64]) -> Result<()> {
    if alpha.len() != mesh.num_triangles() {
        return Err(Error::Dimension(format!(
            "{} element coefficients for {} triangles",
            alpha.len(),
            mesh.num_triangles()
        )));
    }
    if let Some(t) = alpha.iter().position(|a| !a.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite coefficient on triangle {t}")));
    }
    Ok(())
}

pub(crate) fn geometry(mesh: &TriMesh2D, t: usize) -> TriangleGeometry {
    TriangleGeometry::new(mesh.triangle_coords(t))
}

/// Runs `local` on every triangle in parallel and sums the 3×3 blocks into a
/// sparse matrix. `rows(t)`/`cols(t)` give global indices and signs.
fn assemble_3x3(
    mesh: &TriMesh2D,
    shape: (usize, usize),
    dofs: impl Fn(usize) -> Result<([usize; 3], [f64; 3], [usize; 3], [f64; 3])> + Sync,
    local: impl Fn(usize, &TriangleGeometry) -> [[f64; 3]; 3] + Sync,
) -> Result<CsrMatrix> {
    let blocks: Vec<[(usize, usize, f64); 9]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let (ri, rs, ci, cs) = dofs(t)?;
            let k = local(t, &geometry(mesh, t));
            let mut out = [(0, 0, 0.0); 9];
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] = (ri[i], ci[j], rs[i] * cs[j] * k[i][j]);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut tb = TripletBuilder::with_capacity(shape.0, shape.1, 9 * blocks.len());
    for b in blocks {
        tb.extend(b);
    }
    Ok(tb.build())
}

fn nodal_dofs(mesh: &TriMesh2D) -> impl Fn(usize) -> Result<([usize; 3], [f64; 3], [usize; 3], [f64; 3])> + Sync + '_ {
    |t| {
        let n = mesh.triangle(t).nodes;
        Ok((n, [1.0; 3], n, [1.0; 3]))
    }
}

fn edge_dofs(mesh: &TriMesh2D) -> impl Fn(usize) -> Result<([usize; 3], [f64; 3], [usize; 3], [f64; 3])> + Sync + '_ {
    |t| {
        let e = mesh.triangle_edges(t);
        let s = mesh.edge_signs(t)?;
        Ok((e, s, e, s))
    }
}

/// `∫ α ∇N_i·∇N_j dA`. Also serves as the gradient–gradient factor of the
/// longitudinal curl–curl block.
pub fn assemble_nodal_stiffness(mesh: &TriMesh2D, alpha: &[f64]) -> Result<CsrMatrix> {
    check_alpha(mesh, alpha)?;
    let n = mesh.num_nodes();
    assemble_3x3(mesh, (n, n), nodal_dofs(mesh), |t, g| scale(g.nodal_stiffness(), alpha[t]))
}

/// `∫ α N_i N_j dA`.
pub fn assemble_nodal_mass(mesh: &TriMesh2D, alpha: &[f64]) -> Result<CsrMatrix> {
    check_alpha(mesh, alpha)?;
    let n = mesh.num_nodes();
    assemble_3x3(mesh, (n, n), nodal_dofs(mesh), |t, g| scale(g.nodal_mass(), alpha[t]))
}

/// `(∫ α curl w_e curl w_f dA, ∫ α w_e·w_f dA)`.
pub fn assemble_edge_matrices(mesh: &TriMesh2D, alpha: &[f64]) -> Result<(CsrMatrix, CsrMatrix)> {
    check_alpha(mesh, alpha)?;
    let n = mesh.num_edges();
    let k = assemble_3x3(mesh, (n, n), edge_dofs(mesh), |t, g| scale(g.edge_curl_curl(), alpha[t]))?;
    let m = assemble_3x3(mesh, (n, n), edge_dofs(mesh), |t, g| scale(g.edge_mass(), alpha[t]))?;
    Ok((k, m))
}

/// Edge × node matrix `∫ α w_e·∇N_j dA`.
pub fn assemble_coupling(mesh: &TriMesh2D, alpha: &[f64]) -> Result<CsrMatrix> {
    check_alpha(mesh, alpha)?;
    let shape = (mesh.num_edges(), mesh.num_nodes());
    assemble_3x3(
        mesh,
        shape,
        |t| {
            let e = mesh.triangle_edges(t);
            let s = mesh.edge_signs(t)?;
            Ok((e, s, mesh.triangle(t).nodes, [1.0; 3]))
        },
        |t, g| scale(g.edge_node_coupling(), alpha[t]),
    )
}

/// `X[j] = ∫_conductor N_j dA / S` for a single stranded conductor made of the
/// regions whose conductor flag is set.
pub fn assemble_winding_vector(mesh: &TriMesh2D) -> Result<Vec<f64>> {
    let area = mesh.area_where(|t| mesh.region(t.region).is_some_and(|r| r.conductor));
    if !(area > 0.0) {
        return Err(Error::InvalidInput("conductor region is empty".into()));
    }
    let mut x = vec![0.0; mesh.num_nodes()];
    for t in 0..mesh.num_triangles() {
        if mesh.is_conductor(t) {
            let share = mesh.triangle_area(t) / (3.0 * area);
            for n in mesh.triangle(t).nodes {
                x[n] += share;
            }
        }
    }
    Ok(x)
}

/// `∫ q N_j dA` from loss densities sampled at the points of `rule` on every
/// triangle (`samples[t * rule.len() + i]`).
pub fn fe_loss_vector(mesh: &TriMesh2D, rule: &TriangleRule, samples: &[f64]) -> Result<Vec<f64>> {
    let np = rule.len();
    if samples.len() != np * mesh.num_triangles() {
        return Err(Error::Dimension(format!(
            "{} loss samples, expected {} triangles × {np} points",
            samples.len(),
            mesh.num_triangles()
        )));
    }
    if let Some(i) = samples.iter().position(|q| !(*q >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "loss density {} on triangle {} is negative or NaN",
            samples[i],
            i / np
        )));
    }
    let mut out = vec![0.0; mesh.num_nodes()];
    for t in 0..mesh.num_triangles() {
        let area = mesh.triangle_area(t);
        let nodes = mesh.triangle(t).nodes;
        for (i, (bary, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let q = samples[t * np + i];
            for a in 0..3 {
                out[nodes[a]] += w * area * q * bary[a];
            }
        }
    }
    Ok(out)
}

/// All cross-section factors for one element-wise coefficient.
#[derive(Debug, Clone)]
pub struct FEMatrixBundle {
    pub k_nodal: CsrMatrix,
    pub m_nodal: CsrMatrix,
    pub k_t: CsrMatrix,
    pub m_t: CsrMatrix,
    pub k_ell: CsrMatrix,
    pub c_tl: CsrMatrix,
    pub x_ell: Vec<f64>,
}

impl FEMatrixBundle {
    pub fn assemble(mesh: &TriMesh2D, alpha: &[f64]) -> Result<Self> {
        let k_nodal = assemble_nodal_stiffness(mesh, alpha)?;
        let (k_t, m_t) = assemble_edge_matrices(mesh, alpha)?;
        Ok(Self {
            m_nodal: assemble_nodal_mass(mesh, alpha)?,
            k_ell: k_nodal.clone(),
            k_nodal,
            k_t,
            m_t,
            c_tl: assemble_coupling(mesh, alpha)?,
            x_ell: assemble_winding_vector(mesh)?,
        })
    }
}

fn scale(mut k: [[f64; 3]; 3], a: f64) -> [[f64; 3]; 3] {
    for row in &mut k {
        for v in row {
            *v *= a;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::{structured_grid, structured_rect, Region};

    fn two_region_mesh() -> TriMesh2D {
        let regions = vec![
            Region { id: 0, label: "wire".into(), conductor: true },
            Region { id: 1, label: "air".into(), conductor: false },
        ];
        let xs = [0.0, 0.3, 0.7, 1.2, 2.0];
        let ys = [0.0, 0.4, 1.0, 1.5];
        structured_grid(&xs, &ys, regions, |x, y| usize::from(x > 0.7 || y > 1.0)).unwrap()
    }

    #[test]
    fn stiffness_row_sums_vanish_and_scale() {
        let m = two_region_mesh();
        let ones = vec![1.0; m.num_triangles()];
        let k = assemble_nodal_stiffness(&m, &ones).unwrap();
        for r in k.mul_vec(&vec![1.0; m.num_nodes()]) {
            assert!(r.abs() < 1e-14);
        }
        let k2 = assemble_nodal_stiffness(&m, &vec![2.0; m.num_triangles()]).unwrap();
        assert_eq!(k2, k.scaled(2.0));
        assert_eq!(k.max_asymmetry(), 0.0);
    }

    #[test]
    fn mass_sums_to_weighted_area() {
        let m = two_region_mesh();
        let alpha: Vec<f64> = (0..m.num_triangles()).map(|t| 1.0 + t as f64).collect();
        let mm = assemble_nodal_mass(&m, &alpha).unwrap();
        let total: f64 = mm.values().iter().sum();
        let expected: f64 = (0..m.num_triangles()).map(|t| alpha[t] * m.triangle_area(t)).sum();
        assert!((total - expected).abs() < 1e-13);
    }

    #[test]
    fn coupling_annihilates_constants() {
        let m = two_region_mesh();
        let c = assemble_coupling(&m, &vec![1.5; m.num_triangles()]).unwrap();
        for r in c.mul_vec(&vec![1.0; m.num_nodes()]) {
            assert!(r.abs() < 1e-14);
        }
        let zero = assemble_coupling(&m, &vec![0.0; m.num_triangles()]).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn curl_curl_kills_gradients() {
        // the discrete gradient of a nodal field lies in the kernel of K_t
        let m = two_region_mesh();
        let (k, _) = assemble_edge_matrices(&m, &vec![1.0; m.num_triangles()]).unwrap();
        let phi: Vec<f64> = m.nodes().iter().map(|p| p[0] * p[0] - 3.0 * p[1]).collect();
        let grad: Vec<f64> = m.edges().iter().map(|&[a, b]| phi[b] - phi[a]).collect();
        for r in k.mul_vec(&grad) {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn winding_vector_two_triangle_square() {
        let m = structured_rect(0.0, 2.0, 0.0, 2.0, 1, 1, true).unwrap();
        let x = assemble_winding_vector(&m).unwrap();
        // the diagonal nodes 0 and 3 touch both triangles
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((x[3] - 1.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!((x[2] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn winding_vector_ignores_air() {
        let m = two_region_mesh();
        let x = assemble_winding_vector(&m).unwrap();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let far = m.nodes().iter().position(|p| p[0] == 2.0 && p[1] == 1.5).unwrap();
        assert_eq!(x[far], 0.0);
    }

    #[test]
    fn loss_vector_unit_triangle() {
        let m = TriMesh2D::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![([0, 1, 2], 0)],
            vec![Region { id: 0, label: "w".into(), conductor: true }],
        )
        .unwrap();
        let rule = TriangleRule::dunavant5();
        let q = fe_loss_vector(&m, &rule, &vec![1.0; rule.len()]).unwrap();
        for v in q {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        let mut bad = vec![1.0; rule.len()];
        bad[3] = -1e-3;
        assert!(fe_loss_vector(&m, &rule, &bad).is_err());
    }
}
