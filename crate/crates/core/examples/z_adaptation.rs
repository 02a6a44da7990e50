//! Coefficient-decay refinement of the spectral z-mesh around a steep
//! temperature front, and exact field transfer under bisection.

use q3d::solver::{refinement_indicators, transfer_block};
use q3d::spectral1d::SpectralLineMesh;

pub fn run() -> q3d::Result<()> {
    let front = |z: f64| 1.9 + 10.0 / (1.0 + (-(z - 0.62) / 0.004).exp());
    let mut z = SpectralLineMesh::uniform(0.0, 1.0, 5, 6)?;
    for pass in 0..12 {
        let c = z.interpolate(front)?;
        let ind = refinement_indicators(&z, &c, 1)?;
        let flagged: Vec<usize> = (0..z.num_elements()).filter(|&k| ind[k] > 1e-3).collect();
        println!(
            "pass {pass}: {:>2} elements, worst indicator {:.2e}, refine {flagged:?}",
            z.num_elements(),
            ind.iter().cloned().fold(0.0, f64::max)
        );
        if flagged.is_empty() {
            break;
        }
        let finer = z.bisect(&flagged)?;
        let mut moved = vec![0.0; finer.num_functions()];
        transfer_block(&z, &finer, &c, 0, 1, &mut moved, 0)?;
        let gap = (0..=200)
            .map(|i| i as f64 / 200.0)
            .map(|s| (z.eval(&c, s).unwrap() - finer.eval(&moved, s).unwrap()).abs())
            .fold(0.0, f64::max);
        println!("         transfer defect {gap:.1e}");
        z = finer;
    }
    let short = (0..z.num_elements()).map(|k| z.element_length(k)).fold(f64::INFINITY, f64::min);
    println!("final breakpoints near the front: {:?}", z.breakpoints().iter().filter(|b| (**b - 0.62).abs() < 0.05).map(|b| format!("{b:.4}")).collect::<Vec<_>>());
    println!("shortest element {short:.5} m");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
