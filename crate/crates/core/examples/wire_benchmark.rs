//! The quarter-wire quench benchmark through the library API: a central hot
//! spot quenches and the normal zone spreads under a constant transport
//! current. Pass the number of steps as the first argument (default 25).

use std::sync::Arc;

use q3d::cli::{build_wire_benchmark, RunConfig};
use q3d::solver::{initial_state, run_transient};
use q3d::spectral1d::ReferenceTensorSet;

pub fn run(config: &RunConfig) -> q3d::Result<()> {
    let d = &config.discretization;
    let refs = Arc::new(ReferenceTensorSet::build(d.z_order, d.cheb_order)?);
    let (mut model, bump) = build_wire_benchmark(config, refs)?;
    println!(
        "cross-section: {} triangles ({} in the wire), {} edges; i_s = {} A",
        model.mesh.num_triangles(),
        model.thermal_mesh.num_triangles(),
        model.mesh.num_edges(),
        config.current()
    );
    let state = initial_state(&mut model, &bump, &config.transient)?;
    println!(
        "initial z-mesh: {} elements, {} magnetic / {} thermal DoFs",
        model.zmesh.num_elements(),
        model.magnetic_dofs().len(),
        model.thermal_dofs().len()
    );
    let (result, _) = run_transient(&mut model, state, &config.transient, |r, _, _| {
        let front = r.front.map_or("-".to_string(), |(a, b)| format!("[{a:.4}, {b:.4}]"));
        println!(
            "t = {:.3} s  E_mag = {:.6e} J  E_th = {:.6e} J  theta_max = {:>7.1} K  Picard {:>2}  front {front}",
            r.t, r.e_mag, r.e_th, r.theta_max, r.picard_iters
        );
        Ok(())
    })?;
    println!("all steps converged: {}", result.all_converged);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    let mut config = RunConfig::default();
    config.transient.t_end_s = config.transient.dt() * steps.max(1) as f64;
    config.transient.n_steps = steps;
    if let Err(e) = run(&config) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
