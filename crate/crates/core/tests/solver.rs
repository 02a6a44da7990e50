use std::sync::Arc;

use proptest::prelude::*;
use q3d::assembly::DirichletData;
use q3d::cli::{build_wire_benchmark, RunConfig};
use q3d::linsolve::SpdSolver;
use q3d::materials::{ConductorMaterial, MaterialCurve, MaterialSet};
use q3d::solver::{
    initial_state, magnetic_energy, magnetic_step, picard_iterate, run_transient, thermal_energy, thermal_step,
    update_quench_state, LinearSolvers, MagneticLinear, MagneticSystem, PicardOptions, Q3DModel,
};
use q3d::sparse::CsrMatrix;
use q3d::spectral1d::ReferenceTensorSet;

fn small_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.discretization.wire_nx = 2;
    c.discretization.wire_ny = 2;
    c.discretization.air_nx = 3;
    c.discretization.air_ny = 3;
    c.discretization.z_elements = 4;
    c.discretization.z_order = 4;
    c.discretization.cheb_order = 6;
    c.transient.adapt.enabled = false;
    c
}

fn small_model(config: &RunConfig) -> Q3DModel {
    let d = &config.discretization;
    let refs = Arc::new(ReferenceTensorSet::build(d.z_order, d.cheb_order).unwrap());
    build_wire_benchmark(config, refs).unwrap().0
}

/// Temperature-independent conductor: the quench flag still depends on θ,
/// but stays below 1e-20 near the bath temperature.
fn linear_model(config: &RunConfig) -> Q3DModel {
    let mut m = small_model(config);
    let cond = ConductorMaterial {
        resistivity: MaterialCurve::Constant(1e-10),
        thermal_conductivity: MaterialCurve::Constant(300.0),
        heat_capacity: MaterialCurve::Constant(1e3),
        quench: config.quench,
    };
    m.materials = MaterialSet::wire_in_air(q3d::cli::WIRE_REGION, q3d::cli::AIR_REGION, cond);
    m
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn scalar_magnetic_step() {
    let one = CsrMatrix::identity(1);
    let sys = MagneticSystem {
        linear: Arc::new(MagneticLinear {
            k_nu: one.clone(),
            m_reg: CsrMatrix::zeros(1, 1),
            eps: 0.0,
            k_static: one.clone(),
            j_source: vec![0.0],
        }),
        k_tau: CsrMatrix::zeros(1, 1),
        m_sigma: one,
    };
    let dofs = q3d::assembly::DofMap::magnetic(1, 1, 0);
    let a = magnetic_step(&sys, &dofs, &[1.0], 0.1, &mut SpdSolver::default()).unwrap();
    assert!((a[0] - 1.0 / 1.1).abs() < 1e-14);
}

#[test]
fn lumped_heating_raises_mean_temperature() {
    let mut config = small_config();
    config.discretization.z_elements = 1;
    let mut model = linear_model(&config);
    model.end_temperature = None;
    let u0 = model.temperature_from_profile(|_| 4.0).unwrap();
    let wp = model.working_point(&u0).unwrap();
    let th = model.assemble_thermal(&wp).unwrap();
    // uniform power density P tested against the functions: P · M_C · 1 / C
    let (p, c, dt) = (2e5, 1e3, 0.01);
    let ones = model.thermal_ones();
    let q: Vec<f64> = th.m.mul_vec(&ones).iter().map(|v| v * p / c).collect();
    let bc = DirichletData::new(&model.thermal_dofs());
    let u1 = thermal_step(&th, &bc, &u0, dt, &q, &mut SpdSolver::default()).unwrap();
    let n = model.thermal_mesh.num_nodes();
    let volume = model.conductor_area() * model.zmesh.length();
    let mean = |u: &[f64]| thermal_energy(&th.m, u, &model.zmesh, n) / (c * volume);
    assert!((mean(&u1) - mean(&u0) - p * dt / c).abs() < 1e-10);
}

#[test]
fn thermal_equilibrium_is_preserved() {
    let model = linear_model(&small_config());
    let theta_b = model.end_temperature.unwrap();
    let u0 = model.temperature_from_profile(|_| theta_b).unwrap();
    let wp = model.working_point(&u0).unwrap();
    let th = model.assemble_thermal(&wp).unwrap();
    let bc = model.thermal_dirichlet().unwrap();
    let q = vec![0.0; u0.len()];
    let u1 = thermal_step(&th, &bc, &u0, 0.04, &q, &mut SpdSolver::default()).unwrap();
    let ones = model.thermal_ones();
    // solves are accepted at a 1e-10 backward error
    for (a, o) in u1.iter().zip(&ones) {
        assert!((a - theta_b * o).abs() < 1e-8 * theta_b, "{a} {o} {theta_b}");
    }
}

#[test]
fn nonnegative_losses_respect_the_minimum() {
    let config = small_config();
    let model = small_model(&config);
    let bump = |z: f64| 1.9 + 6.0 * (-((z - 0.5) / 0.1f64).powi(2)).exp();
    let mut u0 = model.temperature_from_profile(bump).unwrap();
    let bc = model.thermal_dirichlet().unwrap();
    for (i, &c) in bc.mask().iter().enumerate() {
        if c {
            u0[i] = 1.9;
        }
    }
    let wp = model.working_point(&u0).unwrap();
    let th = model.assemble_thermal(&wp).unwrap();
    let q = vec![0.0; u0.len()];
    let u1 = thermal_step(&th, &bc, &u0, 0.04, &q, &mut SpdSolver::default()).unwrap();
    // sampled at the material points, the traces of the Lobatto expansion
    let min0 = model.temperature_samples(&u0).unwrap().into_iter().fold(f64::INFINITY, f64::min);
    let min1 = model.temperature_samples(&u1).unwrap().into_iter().fold(f64::INFINITY, f64::min);
    assert!(min1 >= min0.min(1.9) - 1e-10, "{min1} < {min0}");
}

#[test]
fn linear_materials_converge_in_two_iterations() {
    let config = small_config();
    let mut model = linear_model(&config);
    let bump = q3d::solver::GaussianBump { theta_bath: 1.9, theta_peak: 3.0, center_m: 0.5, width_m: 0.1 };
    let state = initial_state(&mut model, &bump, &config.transient).unwrap();
    let out = picard_iterate(
        &model,
        &state.a.values,
        &state.u.values,
        0.04,
        &PicardOptions::default(),
        &mut LinearSolvers::default(),
    )
    .unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 2, "{:?}", out.changes);
}

#[test]
fn equilibrium_needs_one_iteration() {
    let config = small_config();
    let mut model = linear_model(&config);
    model.current = 0.0;
    let u = model.temperature_from_profile(|_| 1.9).unwrap();
    let a = vec![0.0; model.magnetic_dofs().len()];
    let out = picard_iterate(&model, &a, &u, 0.04, &PicardOptions::default(), &mut LinearSolvers::default()).unwrap();
    assert_eq!(out.iterations, 1);
    assert!(inf(&out.a) < 1e-30);
    for (x, y) in out.u.iter().zip(&u) {
        assert!((x - y).abs() < 1e-8 * 1.9, "{x} {y}");
    }
}

#[test]
fn converged_state_is_a_fixed_point() {
    let config = small_config();
    let mut model = small_model(&config);
    let bump = q3d::solver::GaussianBump { theta_bath: 1.9, theta_peak: 11.2, center_m: 0.5, width_m: 0.05 };
    let state = initial_state(&mut model, &bump, &config.transient).unwrap();
    let (a0, u0, dt) = (&state.a.values, &state.u.values, 0.04);
    let opts = PicardOptions::default();
    let out = picard_iterate(&model, a0, u0, dt, &opts, &mut LinearSolvers::default()).unwrap();
    assert!(out.converged, "{:?}", out.changes);
    // one more pass of the iteration from the converged temperature
    let mut solvers = LinearSolvers::default();
    let wp = model.working_point(&out.u).unwrap();
    let mag = model.assemble_magnetic(&wp, opts.eps_rel).unwrap();
    let a = magnetic_step(&mag, &model.magnetic_dofs(), a0, dt, &mut solvers.magnetic).unwrap();
    let q = model.loss_vector(&a, a0, dt, &out.u).unwrap();
    let th = model.assemble_thermal(&wp).unwrap();
    let u = thermal_step(&th, &model.thermal_dirichlet().unwrap(), u0, dt, &q, &mut solvers.thermal).unwrap();
    let diff: Vec<f64> = u.iter().zip(&out.u).map(|(x, y)| x - y).collect();
    // the loop measures its change on the relaxed iterate
    let relaxed = opts.fallback_relaxation * inf(&diff) / inf(&out.u);
    assert!(relaxed < opts.tol, "{relaxed} {:?}", out.changes);
}

#[test]
fn quench_state_examples() {
    let model = small_model(&small_config());
    let p = model.conductor().quench;
    let cold = update_quench_state(&model, &model.temperature_from_profile(|_| 1.9).unwrap()).unwrap();
    assert!(cold.front.is_none());
    assert!(cold.flags.iter().all(|&f| f < 1e-10));
    let hot_t = p.theta_crit() + (p.theta_crit() - p.theta_cs()) + 0.01;
    let hot = update_quench_state(&model, &model.temperature_from_profile(|_| hot_t).unwrap()).unwrap();
    assert!(hot.flags.iter().all(|&f| f > 0.99));
    assert_eq!(hot.front, Some((model.zmesh.start(), model.zmesh.end())));
    let lz = model.zmesh.length();
    let bump = |z: f64| 1.9 + 10.0 * (-((z - 0.5 * lz) / (0.2 * lz)).powi(2)).exp();
    let s = update_quench_state(&model, &model.temperature_from_profile(bump).unwrap()).unwrap();
    let (lo, hi) = s.front.unwrap();
    assert!((lo + hi - lz).abs() < 1e-10, "{lo} {hi}");
    assert!(s.front_spacing > 0.0 && s.front_spacing < lz);
}

#[test]
fn energy_examples() {
    let model = small_model(&small_config());
    let nu = q3d::assembly::CoefficientField::PerTriangle(model.materials.nu_per_triangle(&model.mesh).unwrap());
    let k = q3d::assembly::assemble_q3d_curlcurl(&model.mesh, &model.zmesh, &model.magnetic_dofs(), &nu, &model.refs)
        .unwrap();
    let a: Vec<f64> = (0..k.nrows()).map(|i| ((i * 37) % 11) as f64 * 1e-6).collect();
    assert_eq!(magnetic_energy(&k, &vec![0.0; k.nrows()]), 0.0);
    let a2: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
    let (e1, e2) = (magnetic_energy(&k, &a), magnetic_energy(&k, &a2));
    assert!((e2 - 4.0 * e1).abs() <= 1e-14 * e2);

    let lm = linear_model(&small_config());
    let u = lm.temperature_from_profile(|_| 5.0).unwrap();
    let th = lm.assemble_thermal(&lm.working_point(&u).unwrap()).unwrap();
    let n = lm.thermal_mesh.num_nodes();
    let e = thermal_energy(&th.m, &u, &lm.zmesh, n);
    let expected = 1e3 * 5.0 * lm.conductor_area() * lm.zmesh.length();
    assert!((e - expected).abs() < 1e-12 * expected);
    assert_eq!(thermal_energy(&th.m, &vec![0.0; u.len()], &lm.zmesh, n), 0.0);
}

#[test]
fn zero_steps_give_the_initial_record() {
    let mut config = small_config();
    config.transient.n_steps = 0;
    let mut model = small_model(&config);
    let bump = q3d::solver::GaussianBump { theta_bath: 1.9, theta_peak: 11.2, center_m: 0.5, width_m: 0.05 };
    let state = initial_state(&mut model, &bump, &config.transient).unwrap();
    let (r, _) = run_transient(&mut model, state, &config.transient, |_, _, _| Ok(())).unwrap();
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.records[0].t, 0.0);
    assert!(r.records[0].e_mag > 0.0 && r.records[0].e_th > 0.0);
}

#[test]
fn short_runs_are_deterministic_and_heat_up() {
    let mut config = small_config();
    config.transient.n_steps = 3;
    config.transient.t_end_s = 0.12;
    let go = || {
        let mut model = small_model(&config);
        let bump = q3d::solver::GaussianBump { theta_bath: 1.9, theta_peak: 11.2, center_m: 0.5, width_m: 0.05 };
        let state = initial_state(&mut model, &bump, &config.transient).unwrap();
        run_transient(&mut model, state, &config.transient, |_, _, _| Ok(())).unwrap().0
    };
    let (r1, r2) = (go(), go());
    assert_eq!(r1.records, r2.records);
    assert!(r1.records.windows(2).all(|w| w[1].e_th >= w[0].e_th));
    assert!(r1.all_converged);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn total_loss_power_is_nonnegative(seed in 0u64..1000, theta in 1.9f64..40.0) {
        use rand::{Rng, SeedableRng};
        let model = small_model(&small_config());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = model.magnetic_dofs().len();
        let a_old: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e-4..1e-4)).collect();
        let a_new: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e-4..1e-4)).collect();
        let u = model.temperature_from_profile(|_| theta).unwrap();
        let q = model.loss_vector(&a_new, &a_old, 0.04, &u).unwrap();
        let total: f64 = q.iter().zip(model.thermal_ones()).map(|(a, b)| a * b).sum();
        prop_assert!(total >= 0.0);
    }

    #[test]
    fn thermal_energy_is_linear_in_uniform_temperature(t1 in 2.0f64..50.0, t2 in 2.0f64..50.0) {
        let lm = linear_model(&small_config());
        let n = lm.thermal_mesh.num_nodes();
        let u = lm.temperature_from_profile(|_| 1.0).unwrap();
        let th = lm.assemble_thermal(&lm.working_point(&u).unwrap()).unwrap();
        let e = |t: f64| thermal_energy(&th.m, &lm.temperature_from_profile(|_| t).unwrap(), &lm.zmesh, n);
        prop_assert!((e(t1) + e(t2) - e(t1 + t2)).abs() <= 1e-12 * e(t1 + t2));
    }
}
