//! Hierarchical Lobatto basis on a line of spectral elements: basis values,
//! element matrices and p-convergence of the interpolant of a smooth profile.

use q3d::spectral1d::{gauss_legendre, lobatto, ReferenceTensorSet, SpectralLineMesh, se_matrices_constant};

pub fn run() -> q3d::Result<()> {
    println!("phi_q(xi) for q = 0..4");
    for xi in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let row: Vec<String> = (0..5).map(|q| lobatto(q, xi).map(|v| format!("{v:+.4}"))).collect::<q3d::Result<_>>()?;
        println!("  xi = {xi:+.1}: {}", row.join(" "));
    }

    let refs = ReferenceTensorSet::build(4, 0)?;
    let z = SpectralLineMesh::uniform(0.0, 1.0, 2, 4)?;
    let (k, m, _) = se_matrices_constant(&z, 0, 1.0, &refs)?;
    println!("element 0 (h = 0.5, p = 4) stiffness diagonal: {:.4?}", k.diagonal().as_slice());
    println!("element 0 mass diagonal: {:.4?}", m.diagonal().as_slice());

    // interpolation error of sin(2πz) on 4 elements
    let f = |z: f64| (2.0 * std::f64::consts::PI * z).sin();
    let g = gauss_legendre(20)?;
    for p in 1..=8 {
        let z = SpectralLineMesh::uniform(0.0, 1.0, 4, p)?;
        let c = z.interpolate(f)?;
        let mut err2 = 0.0;
        for k in 0..z.num_elements() {
            let (a, b) = z.element_bounds(k);
            err2 += g.integrate_on(a, b, |s| (z.eval(&c, s).unwrap() - f(s)).powi(2));
        }
        println!("  p = {p}: {} functions, L2 error {:.3e}", z.num_functions(), err2.sqrt());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
