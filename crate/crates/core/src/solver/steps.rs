use super::model::{MagneticSystem, ThermalSystem};
use crate::assembly::{apply_dirichlet, DirichletData, DofMap};
use crate::error::{Error, Result};
use crate::linsolve::SpdSolver;
use crate::sparse::CsrMatrix;
use crate::spectral1d::SpectralLineMesh;

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("{what}: non-finite entry at {i}"))),
        None => Ok(()),
    }
}

/// One implicit Euler step of `M ẋ + K x = f`:
/// `(K + M/Δt) x_new = f + (M/Δt) x_old` on the free DoFs of `bc`.
pub fn implicit_euler_step(
    k: &CsrMatrix,
    m: &CsrMatrix,
    f: &[f64],
    x_old: &[f64],
    dt: f64,
    bc: &DirichletData,
    solver: &mut SpdSolver,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    check_finite(x_old, "previous state")?;
    check_finite(f, "source")?;
    let a = k.add_scaled(m, 1.0 / dt)?;
    let mut rhs = m.mul_vec(x_old);
    for (r, fi) in rhs.iter_mut().zip(f) {
        *r = *r / dt + fi;
    }
    let reduced = apply_dirichlet(&a, &rhs, bc)?;
    let report = solver.solve(&reduced.matrix, &reduced.rhs)?;
    Ok(reduced.expand(&report.solution))
}

/// `(K_ν + εM + (K_ντ + M_σ)/Δt) a_new = j_s + ((K_ντ + M_σ)/Δt) a_old`.
pub fn magnetic_step(
    sys: &MagneticSystem,
    dofs: &DofMap,
    a_old: &[f64],
    dt: f64,
    solver: &mut SpdSolver,
) -> Result<Vec<f64>> {
    let m = sys.k_tau.add_scaled(&sys.m_sigma, 1.0)?;
    let lin = &sys.linear;
    implicit_euler_step(&lin.k_static, &m, &lin.j_source, a_old, dt, &DirichletData::new(dofs), solver)
}

/// `(K_ν + εM) a = j_s`.
pub fn magnetostatic_solve(sys: &MagneticSystem, dofs: &DofMap, solver: &mut SpdSolver) -> Result<Vec<f64>> {
    let lin = &sys.linear;
    let reduced = apply_dirichlet(&lin.k_static, &lin.j_source, &DirichletData::new(dofs))?;
    let report = solver.solve(&reduced.matrix, &reduced.rhs)?;
    Ok(reduced.expand(&report.solution))
}

/// `(K_λ + M_C/Δt) u_new = q + (M_C/Δt) u_old` with prescribed values from `bc`.
pub fn thermal_step(
    sys: &ThermalSystem,
    bc: &DirichletData,
    u_old: &[f64],
    dt: f64,
    q_loss: &[f64],
    solver: &mut SpdSolver,
) -> Result<Vec<f64>> {
    implicit_euler_step(&sys.k, &sys.m, q_loss, u_old, dt, bc, solver)
}

/// `½ aᵀ K_ν a`.
pub fn magnetic_energy(k_nu: &CsrMatrix, a: &[f64]) -> f64 {
    0.5 * k_nu.bilinear(a, a)
}

/// `uᵀ M_C 1`, the heat content `∫ C_V θ dV`.
pub fn thermal_energy(m_thermal: &CsrMatrix, u: &[f64], zmesh: &SpectralLineMesh, n_nodes: usize) -> f64 {
    let dofs = DofMap::thermal(zmesh.num_functions(), n_nodes);
    let mut ones = vec![0.0; dofs.len()];
    for k in 0..=zmesh.num_elements() {
        let w = zmesh.vertex_index(k);
        for j in 0..n_nodes {
            ones[dofs.node_index(w, j)] = 1.0;
        }
    }
    m_thermal.bilinear(u, &ones)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> CsrMatrix {
        CsrMatrix::from_triplets(1, 1, vec![(0, 0, v)])
    }

    #[test]
    fn scalar_implicit_euler() {
        let mut s = SpdSolver::default();
        let bc = DirichletData::from_mask(vec![false]);
        let x = implicit_euler_step(&scalar(1.0), &scalar(1.0), &[0.0], &[1.0], 0.1, &bc, &mut s).unwrap();
        assert!((x[0] - 1.0 / 1.1).abs() < 1e-15);
        assert!(implicit_euler_step(&scalar(1.0), &scalar(1.0), &[0.0], &[1.0], 0.0, &bc, &mut s).is_err());
    }

    #[test]
    fn first_order_in_time() {
        // x' = -x, x(0) = 1 on [0, 1]
        let bc = DirichletData::from_mask(vec![false]);
        let err = |n: usize| {
            let mut x = vec![1.0];
            let mut solver = SpdSolver::default();
            for _ in 0..n {
                x = implicit_euler_step(&scalar(1.0), &scalar(1.0), &[0.0], &x, 1.0 / n as f64, &bc, &mut solver).unwrap();
            }
            (x[0] - (-1.0f64).exp()).abs()
        };
        let e: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| err(n)).collect();
        for w in e.windows(2) {
            let r = w[0] / w[1];
            assert!((r - 2.0).abs() < 0.2, "{r}");
        }
    }

    #[test]
    fn steady_source_reaches_fixed_point() {
        let k = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        let m = CsrMatrix::identity(2);
        let f = [1.0, 0.0];
        let bc = DirichletData::from_mask(vec![false; 2]);
        let mut s = SpdSolver::default();
        let mut x = vec![0.0; 2];
        for _ in 0..200 {
            x = implicit_euler_step(&k, &m, &f, &x, 1.0, &bc, &mut s).unwrap();
        }
        let r = k.mul_vec(&x);
        assert!((r[0] - 1.0).abs() < 1e-10 && r[1].abs() < 1e-10);
    }
}
