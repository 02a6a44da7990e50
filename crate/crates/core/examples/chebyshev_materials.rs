//! Chebyshev expansion of temperature-dependent materials along one spectral
//! element: FFT versus direct transform, coefficient decay, and the effect
//! of the quench flag on the effective conductivity.

use q3d::materials::{material_chebyshev_coeffs, ConductorMaterial, QuenchParams};
use q3d::spectral1d::{chebyshev_coeffs, chebyshev_coeffs_direct, chebyshev_points, chebyshev_series, limit_nonnegative};

pub fn run() -> q3d::Result<()> {
    let wire = ConductorMaterial::default_wire(QuenchParams::default());
    let xs = chebyshev_points(16);

    // temperature rising linearly from 10 K to 20 K across the element
    let theta: Vec<f64> = xs.iter().map(|&x| 15.0 + 5.0 * x).collect();
    let rho = material_chebyshev_coeffs(|t| wire.resistivity.eval(t), &theta, 16)?;
    let samples: Vec<f64> = theta.iter().map(|&t| wire.resistivity.eval(t)).collect();
    let direct = chebyshev_coeffs_direct(&samples)?;
    let fft_vs_direct = rho.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("copper resistivity over 10..20 K, |FFT - direct| = {fft_vs_direct:.1e}");
    for (m, c) in rho.iter().enumerate().step_by(2) {
        println!("  rho~_{m:<2} = {c:+.3e}");
    }

    // a hot spot crossing the current-sharing range makes σ_eff nearly a kink
    let hot: Vec<f64> = xs.iter().map(|&x| 6.0 + 5.0 * (1.0 + x)).collect();
    let sigma: Vec<f64> = hot.iter().map(|&t| wire.effective(t).sigma).collect();
    let mut c = chebyshev_coeffs(&sigma)?;
    let dip = |c: &[f64]| (0..=1000).map(|i| chebyshev_series(c, -1.0 + i as f64 / 500.0)).fold(f64::INFINITY, f64::min);
    println!("sigma_eff over 6..16 K: max {:.3e} S/m, interpolant minimum {:.3e}", sigma.iter().cloned().fold(0.0, f64::max), dip(&c));
    let s = limit_nonnegative(&mut c);
    println!("after the positivity limiter (scale {s:.4}): minimum {:.3e}", dip(&c));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
