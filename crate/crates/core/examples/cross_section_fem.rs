//! First-order cross-section matrices on a triangulated rectangle, and the
//! 2D magnetostatic potential of a square conductor in a box under uniform
//! refinement.

use q3d::assembly::{apply_dirichlet, DirichletData};
use q3d::fem2d::{structured_grid, FEMatrixBundle, Region};
use q3d::linsolve::solve_spd;

pub fn run() -> q3d::Result<()> {
    let mu0 = 4e-7 * std::f64::consts::PI;
    let j = 1e6;
    let lines: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
    let regions = vec![
        Region { id: 0, label: "wire".into(), conductor: true },
        Region { id: 1, label: "air".into(), conductor: false },
    ];
    let mut mesh = structured_grid(&lines, &lines, regions, |x, y| usize::from(x.abs() > 0.25 || y.abs() > 0.25))?;
    let mut previous: Option<f64> = None;
    for level in 0..4 {
        let nu = vec![1.0 / mu0; mesh.num_triangles()];
        let fe = FEMatrixBundle::assemble(&mesh, &nu)?;
        if level == 0 {
            println!(
                "{} nodes, {} edges, {} triangles; asymmetry K_t {:.1e}, C_tl {}×{}",
                mesh.num_nodes(),
                mesh.num_edges(),
                mesh.num_triangles(),
                fe.k_t.max_asymmetry(),
                fe.c_tl.nrows(),
                fe.c_tl.ncols()
            );
        }
        // -div(ν grad A_z) = J on the conductor, A_z = 0 on the box
        let rhs: Vec<f64> = fe.x_ell.iter().map(|x| x * j).collect();
        let mut mask = vec![false; mesh.num_nodes()];
        for n in mesh.boundary_nodes() {
            mask[n] = true;
        }
        let reduced = apply_dirichlet(&fe.k_nodal, &rhs, &DirichletData::from_mask(mask))?;
        let a = reduced.expand(&solve_spd(&reduced.matrix, &reduced.rhs)?.solution);
        let energy = 0.5 * fe.k_nodal.bilinear(&a, &a);
        match previous {
            Some(e) => println!("level {level}: {:>6} nodes, W' = {energy:.8e} J/m (change {:.2e})", mesh.num_nodes(), energy - e),
            None => println!("level {level}: {:>6} nodes, W' = {energy:.8e} J/m", mesh.num_nodes()),
        }
        previous = Some(energy);
        mesh = mesh.refined()?.0;
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
