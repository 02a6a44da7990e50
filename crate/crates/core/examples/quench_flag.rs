//! The smooth quench flag and the quench-weighted material properties of the
//! default NbTi/Cu wire.

use q3d::materials::{quench_flag, ConductorMaterial, QuenchParams};

pub fn run() -> q3d::Result<()> {
    let params = QuenchParams::new(6.5, 9.2, 10e-3)?;
    let wire = ConductorMaterial::default_wire(params);
    println!("theta_cs = {} K, theta_crit = {} K, flag = 1/2 at {:.2} K", params.theta_cs(), params.theta_crit(), params.midpoint());
    println!("{:>7} {:>11} {:>11} {:>11} {:>11}", "T (K)", "flag", "tau (s)", "sigma (S/m)", "rho (Ohm m)");
    for t in [1.9, 6.5, 8.0, 9.2, 9.5, 9.7, 10.0, 11.2, 20.0, 300.0] {
        let e = wire.effective(t);
        println!("{t:>7.2} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}", e.flag, e.tau, e.sigma, e.rho);
    }
    println!("saturation: flag(-1e308) = {}, flag(1e308) = {}", quench_flag(-1e308, &params), quench_flag(1e308, &params));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
