use serde::{Deserialize, Serialize};

use super::model::Q3DModel;
use crate::assembly::DofMap;
use crate::error::Result;
use crate::spectral1d::{gauss_legendre, legendre, lobatto_all, SpectralLineMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptOptions {
    pub enabled: bool,
    /// Elements whose indicator exceeds this value are bisected.
    pub threshold: f64,
    /// Smallest admissible element length as a fraction of the conductor length.
    pub min_length_fraction: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            enabled: true,
            threshold: 1e-3,
            min_length_fraction: 1.0 / 1024.0,
        }
    }
}

/// Per element: the largest over all cross-section nodes of
/// `‖(c_{p−1}, c_p)‖ / θ_max`, where `c` are the Legendre coefficients of the
/// temperature trace on the element and `θ_max` is the largest magnitude of
/// the field on the whole line.
pub fn refinement_indicators(zmesh: &SpectralLineMesh, u: &[f64], n_nodes: usize) -> Result<Vec<f64>> {
    let dofs = DofMap::thermal(zmesh.num_functions(), n_nodes);
    let mut scale = 0.0f64;
    let tops = (0..zmesh.num_elements())
        .map(|k| {
            let p = zmesh.order(k);
            let map = zmesh.local_to_global(k);
            let g = gauss_legendre(p + 1)?;
            let mut v = vec![0.0; p + 1];
            let mut d = vec![0.0; p + 1];
            let shapes: Vec<Vec<f64>> = g
                .nodes
                .iter()
                .map(|&x| {
                    lobatto_all(p, x, &mut v, &mut d);
                    v.clone()
                })
                .collect();
            let mut worst = 0.0f64;
            for j in 0..n_nodes {
                let trace: Vec<f64> = shapes
                    .iter()
                    .map(|s| map.iter().enumerate().map(|(a, &w)| s[a] * u[dofs.node_index(w, j)]).sum())
                    .collect();
                scale = trace.iter().fold(scale, |m, t: &f64| m.max(t.abs()));
                let coeff = |n: usize| -> f64 {
                    let s: f64 = g.nodes.iter().zip(&g.weights).zip(&trace).map(|((&x, &w), &t)| w * t * legendre(n, x)).sum();
                    s * (2 * n + 1) as f64 / 2.0
                };
                let top = coeff(p).hypot(if p >= 1 { coeff(p - 1) } else { 0.0 });
                worst = worst.max(top);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(tops.into_iter().map(|t| if scale > 0.0 { t / scale } else { 0.0 }).collect())
}

/// Elements to bisect, or an empty list when the mesh is adequate. Elements
/// that would fall below the minimum length are skipped with a warning.
pub fn elements_to_refine(model: &Q3DModel, u: &[f64], opts: &AdaptOptions) -> Result<Vec<usize>> {
    if !opts.enabled {
        return Ok(Vec::new());
    }
    let ind = refinement_indicators(&model.zmesh, u, model.thermal_mesh.num_nodes())?;
    let min_len = opts.min_length_fraction * model.zmesh.length();
    let mut out = Vec::new();
    for (k, &e) in ind.iter().enumerate() {
        if e > opts.threshold {
            if 0.5 * model.zmesh.element_length(k) < min_len * (1.0 - 1e-12) {
                log::warn!("z-element {k} at minimum length; not refined (indicator {e:.2e})");
            } else {
                out.push(k);
            }
        }
    }
    Ok(out)
}

/// Re-expresses `n_entities` interleaved z-functions (`offset + w · n_entities + j`)
/// on a nested mesh by interpolation; exact for refinements of `old`.
pub fn transfer_block(
    old: &SpectralLineMesh,
    new: &SpectralLineMesh,
    coeffs: &[f64],
    offset: usize,
    n_entities: usize,
    out: &mut [f64],
    out_offset: usize,
) -> Result<()> {
    let n_old = old.num_functions();
    for j in 0..n_entities {
        let col: Vec<f64> = (0..n_old).map(|w| coeffs[offset + w * n_entities + j]).collect();
        let c = new.interpolate(|z| old.eval(&col, z).expect("z inside the mesh"))?;
        for (w, cw) in c.into_iter().enumerate() {
            out[out_offset + w * n_entities + j] = cw;
        }
    }
    Ok(())
}

/// Bisects the flagged elements and transfers the magnetic and thermal fields.
/// Returns `true` when the mesh changed.
pub fn adapt_z_mesh(model: &mut Q3DModel, a: &mut Vec<f64>, u: &mut Vec<f64>, opts: &AdaptOptions) -> Result<bool> {
    let flagged = elements_to_refine(model, u, opts)?;
    if flagged.is_empty() {
        return Ok(false);
    }
    let old = model.zmesh.clone();
    let new = old.bisect(&flagged)?;
    let nz = new.num_functions();
    let (ne, nn) = (model.mesh.num_edges(), model.mesh.num_nodes());
    let mut a_new = vec![0.0; nz * (ne + nn)];
    transfer_block(&old, &new, a, 0, ne, &mut a_new, 0)?;
    transfer_block(&old, &new, a, old.num_functions() * ne, nn, &mut a_new, nz * ne)?;
    let nt = model.thermal_mesh.num_nodes();
    let mut u_new = vec![0.0; nz * nt];
    transfer_block(&old, &new, u, 0, nt, &mut u_new, 0)?;
    log::info!("z-mesh refined: elements {flagged:?} bisected, {} → {} elements", old.num_elements(), new.num_elements());
    model.zmesh = new;
    *a = a_new;
    *u = u_new;
    Ok(true)
}
