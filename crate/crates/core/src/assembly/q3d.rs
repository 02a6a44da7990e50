//! Q3D system matrices as sums of `SE ⊗ FE` products.
//!
//! A z-independent coefficient goes through global Kronecker products. A
//! Chebyshev-expanded coefficient is applied element block by element block:
//! every (triangle, SE element) pair contributes `S_k(α̃) ⊗ F_t(1)`, where the
//! SE factor comes from tensor contraction.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::coefficient::{assemble_nonlinear_se_matrices, ChebyshevField, CoefficientField};
use super::dofmap::{DofMap, FieldKind};
use crate::error::{Error, Result};
use crate::fem2d::{
    assemble_coupling, assemble_edge_matrices, assemble_nodal_mass, assemble_nodal_stiffness, geometry, TriMesh2D,
};
use crate::sparse::{kron_sparse, CsrMatrix, TripletBuilder};
use crate::spectral1d::{se_matrices_constant, ReferenceTensorSet, SpectralLineMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Se {
    Stiffness,
    Mass,
    Damping,
    /// `D_pq = ∫ φ_q' φ_p` transposed.
    DampingT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fe {
    EdgeCurl,
    EdgeMass,
    NodalStiffness,
    NodalMass,
    Coupling,
    CouplingT,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    se: Se,
    fe: Fe,
    scale: f64,
}

const CURLCURL: [Term; 5] = [
    Term { se: Se::Mass, fe: Fe::EdgeCurl, scale: 1.0 },
    Term { se: Se::Stiffness, fe: Fe::EdgeMass, scale: 1.0 },
    Term { se: Se::DampingT, fe: Fe::Coupling, scale: -1.0 },
    Term { se: Se::Damping, fe: Fe::CouplingT, scale: -1.0 },
    Term { se: Se::Mass, fe: Fe::NodalStiffness, scale: 1.0 },
];

const EDGE_NODE_MASS: [Term; 2] = [
    Term { se: Se::Mass, fe: Fe::EdgeMass, scale: 1.0 },
    Term { se: Se::Mass, fe: Fe::NodalMass, scale: 1.0 },
];

const NODAL_STIFFNESS: [Term; 2] = [
    Term { se: Se::Mass, fe: Fe::NodalStiffness, scale: 1.0 },
    Term { se: Se::Stiffness, fe: Fe::NodalMass, scale: 1.0 },
];

const NODAL_MASS: [Term; 1] = [Term { se: Se::Mass, fe: Fe::NodalMass, scale: 1.0 }];

impl Fe {
    fn uses_edges(self) -> (bool, bool) {
        match self {
            Fe::EdgeCurl | Fe::EdgeMass => (true, true),
            Fe::NodalStiffness | Fe::NodalMass => (false, false),
            Fe::Coupling => (true, false),
            Fe::CouplingT => (false, true),
        }
    }
}

type Local = ([usize; 3], [f64; 3], [usize; 3], [f64; 3], [[f64; 3]; 3]);

fn fe_local(mesh: &TriMesh2D, t: usize, fe: Fe) -> Result<Local> {
    let g = geometry(mesh, t);
    let nodes = mesh.triangle(t).nodes;
    let edges = mesh.triangle_edges(t);
    let ones = [1.0; 3];
    Ok(match fe {
        Fe::EdgeCurl => {
            let s = mesh.edge_signs(t)?;
            (edges, s, edges, s, g.edge_curl_curl())
        }
        Fe::EdgeMass => {
            let s = mesh.edge_signs(t)?;
            (edges, s, edges, s, g.edge_mass())
        }
        Fe::NodalStiffness => (nodes, ones, nodes, ones, g.nodal_stiffness()),
        Fe::NodalMass => (nodes, ones, nodes, ones, g.nodal_mass()),
        Fe::Coupling => (edges, mesh.edge_signs(t)?, nodes, ones, g.edge_node_coupling()),
        Fe::CouplingT => {
            let c = g.edge_node_coupling();
            let ct = [0, 1, 2].map(|i| [0, 1, 2].map(|j| c[j][i]));
            (nodes, ones, edges, mesh.edge_signs(t)?, ct)
        }
    })
}

fn check_layout(mesh: &TriMesh2D, zmesh: &SpectralLineMesh, dofs: &DofMap, terms: &[Term]) -> Result<()> {
    let needs_edges = terms.iter().any(|t| t.fe.uses_edges() != (false, false));
    if needs_edges && dofs.kind() != FieldKind::Magnetic {
        return Err(Error::Dimension("edge terms need a magnetic DoF map".into()));
    }
    if dofs.num_z() != zmesh.num_functions()
        || dofs.num_nodes() != mesh.num_nodes()
        || (dofs.kind() == FieldKind::Magnetic && dofs.num_edges() != mesh.num_edges())
    {
        return Err(Error::Dimension(format!(
            "DoF map ({} z × {} edges / {} nodes) does not match meshes ({} z × {} edges / {} nodes)",
            dofs.num_z(),
            dofs.num_edges(),
            dofs.num_nodes(),
            zmesh.num_functions(),
            mesh.num_edges(),
            mesh.num_nodes()
        )));
    }
    Ok(())
}

fn block_offset(dofs: &DofMap, edge: bool) -> (usize, usize) {
    if edge {
        (0, dofs.num_edges())
    } else {
        (dofs.num_transversal(), dofs.num_nodes())
    }
}

fn assemble_terms(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    field: &CoefficientField,
    refs: &ReferenceTensorSet,
    terms: &[Term],
) -> Result<CsrMatrix> {
    check_layout(mesh, zmesh, dofs, terms)?;
    field.check(mesh, zmesh)?;
    match field {
        CoefficientField::PerTriangle(alpha) => assemble_kronecker(mesh, zmesh, dofs, alpha, refs, terms),
        CoefficientField::Chebyshev(f) => assemble_blockwise(mesh, zmesh, dofs, f, refs, terms),
    }
}

fn assemble_kronecker(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    alpha: &[f64],
    refs: &ReferenceTensorSet,
    terms: &[Term],
) -> Result<CsrMatrix> {
    let locals = (0..zmesh.num_elements())
        .map(|k| se_matrices_constant(zmesh, k, 1.0, refs))
        .collect::<Result<Vec<_>>>()?;
    let se_global = |se: Se| -> CsrMatrix {
        match se {
            Se::Stiffness => zmesh.assemble(|k| locals[k].0.clone()),
            Se::Mass => zmesh.assemble(|k| locals[k].1.clone()),
            Se::Damping => zmesh.assemble(|k| locals[k].2.clone()),
            Se::DampingT => zmesh.assemble(|k| locals[k].2.transpose()),
        }
    };
    let mut edge_pair = None;
    let mut coupling = None;
    let mut tb = TripletBuilder::new(dofs.len(), dofs.len());
    for term in terms {
        let fe = match term.fe {
            Fe::EdgeCurl | Fe::EdgeMass => {
                if edge_pair.is_none() {
                    edge_pair = Some(assemble_edge_matrices(mesh, alpha)?);
                }
                let (k, m) = edge_pair.as_ref().unwrap();
                if term.fe == Fe::EdgeCurl { k.clone() } else { m.clone() }
            }
            Fe::NodalStiffness => assemble_nodal_stiffness(mesh, alpha)?,
            Fe::NodalMass => assemble_nodal_mass(mesh, alpha)?,
            Fe::Coupling | Fe::CouplingT => {
                if coupling.is_none() {
                    coupling = Some(assemble_coupling(mesh, alpha)?);
                }
                let c = coupling.as_ref().unwrap();
                if term.fe == Fe::Coupling { c.clone() } else { c.transpose() }
            }
        };
        let product = kron_sparse(&se_global(term.se), &fe)?;
        let (re, ce) = term.fe.uses_edges();
        let (r0, _) = block_offset(dofs, re);
        let (c0, _) = block_offset(dofs, ce);
        tb.extend(product.triplets().map(|(i, j, v)| (r0 + i, c0 + j, term.scale * v)));
    }
    Ok(tb.build())
}

fn se_entry(mats: &(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>), se: Se, a: usize, b: usize) -> f64 {
    match se {
        Se::Stiffness => mats.0[(a, b)],
        Se::Mass => mats.1[(a, b)],
        Se::Damping => mats.2[(a, b)],
        Se::DampingT => mats.2[(b, a)],
    }
}

fn assemble_blockwise(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    field: &ChebyshevField,
    refs: &ReferenceTensorSet,
    terms: &[Term],
) -> Result<CsrMatrix> {
    let n_el = zmesh.num_elements();
    let pairs: Vec<(usize, usize)> = (0..field.triangles().len())
        .flat_map(|i| (0..n_el).map(move |k| (i, k)))
        .collect();
    let chunks: Vec<Vec<(usize, usize, f64)>> = pairs
        .par_iter()
        .map(|&(i, k)| {
            let t = field.triangles()[i];
            let se = assemble_nonlinear_se_matrices(zmesh, k, field.coeffs(i, k), refs)?;
            let zmap = zmesh.local_to_global(k);
            let nz = zmap.len();
            let mut out = Vec::with_capacity(terms.len() * 9 * nz * nz);
            for term in terms {
                let (rows, rs, cols, cs, f) = fe_local(mesh, t, term.fe)?;
                let (re, ce) = term.fe.uses_edges();
                let (r0, rn) = block_offset(dofs, re);
                let (c0, cn) = block_offset(dofs, ce);
                for a in 0..nz {
                    for b in 0..nz {
                        let s = term.scale * se_entry(&se, term.se, a, b);
                        for i in 0..3 {
                            for j in 0..3 {
                                out.push((
                                    r0 + zmap[a] * rn + rows[i],
                                    c0 + zmap[b] * cn + cols[j],
                                    s * (rs[i] * cs[j] * f[i][j]),
                                ));
                            }
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let total = chunks.iter().map(Vec::len).sum();
    let mut tb = TripletBuilder::with_capacity(dofs.len(), dofs.len(), total);
    for c in chunks {
        tb.extend(c);
    }
    Ok(tb.build())
}

/// Blocked curl–curl matrix
///
/// ```text
/// [ M⊗K_t + K⊗M_t   −Dᵀ⊗C ]
/// [ (−Dᵀ⊗C)ᵀ         M⊗K_ℓ ]
/// ```
///
/// with `D_pq = ∫ φ_q' φ_p`. The coupling block pairs the row's derivative
/// with the column's value, hence the transpose.
pub fn assemble_q3d_curlcurl(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    alpha: &CoefficientField,
    refs: &ReferenceTensorSet,
) -> Result<CsrMatrix> {
    assemble_terms(mesh, zmesh, dofs, alpha, refs, &CURLCURL)
}

/// Block-diagonal vector-potential mass `diag(M⊗M_t, M⊗M_n)`.
pub fn assemble_q3d_mass(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    alpha: &CoefficientField,
    refs: &ReferenceTensorSet,
) -> Result<CsrMatrix> {
    assemble_terms(mesh, zmesh, dofs, alpha, refs, &EDGE_NODE_MASS)
}

/// Heat-conduction matrices `(M_λ⊗K_n + K_λ⊗M_n, M_C⊗M_n)`.
pub fn assemble_thermal_system(
    mesh: &TriMesh2D,
    zmesh: &SpectralLineMesh,
    dofs: &DofMap,
    conductivity: &CoefficientField,
    heat_capacity: &CoefficientField,
    refs: &ReferenceTensorSet,
) -> Result<(CsrMatrix, CsrMatrix)> {
    if dofs.kind() != FieldKind::Thermal {
        return Err(Error::Dimension("thermal assembly needs a thermal DoF map".into()));
    }
    let k = assemble_terms(mesh, zmesh, dofs, conductivity, refs, &NODAL_STIFFNESS)?;
    let m = assemble_terms(mesh, zmesh, dofs, heat_capacity, refs, &NODAL_MASS)?;
    Ok((k, m))
}

/// `[0, q₁ ⊗ (X i_s)]` with `q₁[w] = ∫ φ_w dz`.
pub fn assemble_source(zmesh: &SpectralLineMesh, dofs: &DofMap, winding: &[f64], current: f64) -> Result<Vec<f64>> {
    if dofs.kind() != FieldKind::Magnetic || winding.len() != dofs.num_nodes() {
        return Err(Error::Dimension("source needs a magnetic DoF map and one winding entry per node".into()));
    }
    let q1 = zmesh.uniform_load();
    let mut j = vec![0.0; dofs.len()];
    for (w, &qw) in q1.iter().enumerate() {
        for (n, &x) in winding.iter().enumerate() {
            j[dofs.node_index(w, n)] = qw * x * current;
        }
    }
    Ok(j)
}

/// Absolute regularization weight `ε_rel · ν_max / L²`, with `L` the diagonal
/// of the cross-section bounding box. `ν/L²` is the order of the smallest
/// physical curl–curl eigenvalue relative to the mass, so `ε_rel` measures the
/// relative perturbation of the field directly, independent of mesh grading.
pub fn regularization_weight(mesh: &TriMesh2D, nu_max: f64, eps_rel: f64) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in mesh.nodes() {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let l2 = (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2);
    eps_rel * nu_max / l2
}
