//! Linear heat conduction along a wire with isothermal ends: the decay of the
//! sin(πz/ℓ) mode against the exact solution, showing first-order accuracy
//! of implicit Euler.

use q3d::assembly::{assemble_thermal_system, CoefficientField, DirichletData, DofMap};
use q3d::fem2d::structured_rect;
use q3d::linsolve::SpdSolver;
use q3d::solver::{implicit_euler_step, thermal_energy};
use q3d::spectral1d::{ReferenceTensorSet, SpectralLineMesh};

/// Relative error of E_th at `t_end` for `n` steps.
pub fn decay_error(n: usize) -> q3d::Result<f64> {
    let (lambda, cv, t_end) = (400.0, 2.0e6, 500.0);
    let mesh = structured_rect(0.0, 1e-3, 0.0, 1e-3, 2, 2, true)?;
    let z = SpectralLineMesh::uniform(0.0, 1.0, 4, 6)?;
    let refs = ReferenceTensorSet::build(6, 0)?;
    let mut dofs = DofMap::thermal(z.num_functions(), mesh.num_nodes());
    for w in [z.vertex_index(0), z.vertex_index(z.num_elements())] {
        for j in 0..mesh.num_nodes() {
            dofs.constrain(dofs.node_index(w, j));
        }
    }
    let nt = mesh.num_triangles();
    let (k, m) = assemble_thermal_system(
        &mesh,
        &z,
        &dofs,
        &CoefficientField::PerTriangle(vec![lambda; nt]),
        &CoefficientField::PerTriangle(vec![cv; nt]),
        &refs,
    )?;
    let profile = z.interpolate(|s| (std::f64::consts::PI * s).sin())?;
    let mut u = vec![0.0; dofs.len()];
    for (w, c) in profile.iter().enumerate() {
        for j in 0..mesh.num_nodes() {
            u[dofs.node_index(w, j)] = *c;
        }
    }
    let bc = DirichletData::new(&dofs);
    let mut solver = SpdSolver::default();
    let f = vec![0.0; dofs.len()];
    for _ in 0..n {
        u = implicit_euler_step(&k, &m, &f, &u, t_end / n as f64, &bc, &mut solver)?;
    }
    let rate = lambda * std::f64::consts::PI.powi(2) / cv;
    let exact = cv * 1e-6 * (2.0 / std::f64::consts::PI) * (-rate * t_end).exp();
    Ok((thermal_energy(&m, &u, &z, mesh.num_nodes()) - exact).abs() / exact)
}

pub fn run() -> q3d::Result<()> {
    let mut last: Option<f64> = None;
    for n in [10, 20, 40, 80] {
        let e = decay_error(n)?;
        match last {
            Some(p) => println!("{n:>3} steps: relative E_th error {e:.4e}, ratio {:.3}", p / e),
            None => println!("{n:>3} steps: relative E_th error {e:.4e}"),
        }
        last = Some(e);
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
