//! Builds (or loads) the reference tensors `∫ T_m φ_p φ_q`, `∫ T_m φ'_p φ'_q`
//! and `∫ T_m φ'_q φ_p`, shows the cache round trip and a contraction.

use q3d::spectral1d::{CacheStatus, ReferenceTensorSet};

pub fn run() -> q3d::Result<()> {
    let dir = std::env::temp_dir().join("q3d_reference_tensors_example");
    let (set, status) = ReferenceTensorSet::load_or_build(&dir, 6, 16)?;
    println!("P = 6, M = 16: {status:?} at {}", ReferenceTensorSet::cache_path(&dir, 6, 16).display());
    println!("sha256 {}", set.checksum_hex());
    let (_, again) = ReferenceTensorSet::load_or_build(&dir, 6, 16)?;
    assert_eq!(again, CacheStatus::Loaded);

    // T_0 slice = constant-coefficient matrices
    println!("refM[0] vertex block: {:.6} {:.6}", set.mass(0, 0, 0), set.mass(0, 0, 1));
    println!("refK[0] vertex block: {:.6} {:.6}", set.stiffness(0, 0, 0), set.stiffness(0, 0, 1));

    // α(ξ) = 2 + ξ contracts to 2·slice0 + slice1
    let (k, m, d) = set.contract_with(&[2.0, 1.0], 3)?;
    println!("contracted with 2 + xi (p = 3):\n  K = {k:.4}  M = {m:.4}  D = {d:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
