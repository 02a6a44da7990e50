//! Q3D curl–curl assembly two ways: global Kronecker products for a
//! z-independent coefficient, and element-block contraction with Chebyshev
//! coefficients. A constant Chebyshev field must reproduce the former.

use q3d::assembly::{assemble_q3d_curlcurl, assemble_q3d_mass, ChebyshevField, CoefficientField, DofMap};
use q3d::fem2d::structured_rect;
use q3d::spectral1d::{ReferenceTensorSet, SpectralLineMesh};

pub fn run() -> q3d::Result<()> {
    let mesh = structured_rect(0.0, 1e-3, 0.0, 1e-3, 3, 2, true)?;
    let z = SpectralLineMesh::new(vec![0.0, 0.2, 0.5, 1.0], vec![4, 2, 3])?;
    let refs = ReferenceTensorSet::build(4, 8)?;
    let dofs = DofMap::magnetic(z.num_functions(), mesh.num_edges(), mesh.num_nodes());
    println!(
        "{} triangles × {} z-functions: {} magnetic DoFs ({} transversal)",
        mesh.num_triangles(),
        z.num_functions(),
        dofs.len(),
        dofs.num_transversal()
    );

    let alpha: Vec<f64> = (0..mesh.num_triangles()).map(|t| 1.0 + 0.1 * t as f64).collect();
    let per_triangle = CoefficientField::PerTriangle(alpha.clone());
    let all: Vec<usize> = (0..mesh.num_triangles()).collect();
    let cheb = CoefficientField::Chebyshev(ChebyshevField::constant(all, z.num_elements(), &alpha)?);

    let k1 = assemble_q3d_curlcurl(&mesh, &z, &dofs, &per_triangle, &refs)?;
    let k2 = assemble_q3d_curlcurl(&mesh, &z, &dofs, &cheb, &refs)?;
    let diff = k1.add_scaled(&k2, -1.0)?.max_abs() / k1.max_abs();
    println!("curl-curl: {} nonzeros, Kronecker vs contraction max rel. difference {diff:.1e}", k1.nnz());
    println!("symmetry defect {:.1e}", k1.max_asymmetry());

    let m1 = assemble_q3d_mass(&mesh, &z, &dofs, &per_triangle, &refs)?;
    let m2 = assemble_q3d_mass(&mesh, &z, &dofs, &cheb, &refs)?;
    println!("mass: max rel. difference {:.1e}", m1.add_scaled(&m2, -1.0)?.max_abs() / m1.max_abs());

    // a coefficient varying along z only enters through the contraction path
    let varying = ChebyshevField::new(
        (0..mesh.num_triangles()).collect(),
        z.num_elements(),
        1,
        (0..mesh.num_triangles() * z.num_elements()).flat_map(|_| [1.0, 0.5]).collect(),
    )?;
    let k3 = assemble_q3d_curlcurl(&mesh, &z, &dofs, &CoefficientField::Chebyshev(varying), &refs)?;
    println!("alpha = 1 + xi/2 per element: {} nonzeros, symmetry defect {:.1e}", k3.nnz(), k3.max_asymmetry());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
