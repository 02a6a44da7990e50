use std::sync::Arc;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::fem2d::{graded_lines, structured_grid, Region, TriMesh2D};
use crate::materials::{ConductorMaterial, MaterialLibrary, MaterialSet};
use crate::solver::{GaussianBump, Q3DModel};
use crate::spectral1d::{ReferenceTensorSet, SpectralLineMesh};

pub const WIRE_REGION: usize = 0;
pub const AIR_REGION: usize = 1;

/// Quarter wire `[0, lx] × [0, ly]` inside the air box `[0, s·lx] × [0, s·ly]`:
/// uniform cells in the wire, geometrically graded cells in the air.
pub fn wire_cross_section(config: &RunConfig) -> Result<TriMesh2D> {
    let g = &config.geometry;
    let d = &config.discretization;
    if !(g.air_box_scale > 1.0) {
        return Err(Error::Config(format!("air box (scale {}) must be larger than the wire", g.air_box_scale)));
    }
    let lines = |l: f64, n_wire: usize, n_air: usize| -> Result<Vec<f64>> {
        let mut v: Vec<f64> = (0..=n_wire).map(|i| l * i as f64 / n_wire as f64).collect();
        let air = graded_lines(l, g.air_box_scale * l, n_air, l / n_wire as f64)?;
        v.extend_from_slice(&air[1..]);
        Ok(v)
    };
    let xs = lines(g.lx_m, d.wire_nx, d.air_nx)?;
    let ys = lines(g.ly_m, d.wire_ny, d.air_ny)?;
    let regions = vec![
        Region { id: WIRE_REGION, label: "wire".into(), conductor: true },
        Region { id: AIR_REGION, label: "air".into(), conductor: false },
    ];
    let (lx, ly) = (g.lx_m, g.ly_m);
    structured_grid(&xs, &ys, regions, |x, y| if x < lx && y < ly { WIRE_REGION } else { AIR_REGION })
}

pub fn conductor_material(config: &RunConfig) -> Result<ConductorMaterial> {
    let lib = match &config.materials_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            MaterialLibrary::parse(&text)?
        }
        None => MaterialLibrary::default_wire(),
    };
    ConductorMaterial::from_library(&lib, config.quench)
}

/// Wire model with its boundary conditions and initial hot spot:
/// zero tangential vector potential on the outer air box and on the `x = 0`
/// cut, natural conditions on `y = 0`, zero transversal potential on the end
/// faces; bath temperature on the end faces of the wire.
pub fn build_wire_benchmark(config: &RunConfig, refs: Arc<ReferenceTensorSet>) -> Result<(Q3DModel, GaussianBump)> {
    config.validate()?;
    let mesh = wire_cross_section(config)?;
    let g = &config.geometry;
    let d = &config.discretization;
    let zmesh = SpectralLineMesh::uniform(0.0, g.lz_m, d.z_elements, d.z_order)?;
    let materials = MaterialSet::wire_in_air(WIRE_REGION, AIR_REGION, conductor_material(config)?);
    let mut model = Q3DModel::new(mesh, zmesh, materials, refs, d.cheb_order, config.current())?;

    let (xmax, ymax) = (g.air_box_scale * g.lx_m, g.air_box_scale * g.ly_m);
    let tol = 1e-9 * xmax.max(ymax);
    let fixed = |p: [f64; 2]| p[0].abs() < tol || (p[0] - xmax).abs() < tol || (p[1] - ymax).abs() < tol;
    // an edge is constrained when it lies on a constrained line, not merely touches it
    let on_same_line = |a: [f64; 2], b: [f64; 2]| {
        (a[0].abs() < tol && b[0].abs() < tol)
            || ((a[0] - xmax).abs() < tol && (b[0] - xmax).abs() < tol)
            || ((a[1] - ymax).abs() < tol && (b[1] - ymax).abs() < tol)
    };
    for j in 0..model.mesh.num_nodes() {
        model.dirichlet_nodes[j] = fixed(model.mesh.node(j));
    }
    for e in 0..model.mesh.num_edges() {
        let [a, b] = model.mesh.edges()[e];
        model.dirichlet_edges[e] = on_same_line(model.mesh.node(a), model.mesh.node(b));
    }
    model.fix_transversal_ends = true;
    model.end_temperature = Some(config.initial.theta_bath_K);
    model.loss_mode = config.loss_quadrature;

    let bump = GaussianBump {
        theta_bath: config.initial.theta_bath_K,
        theta_peak: config.theta_peak(),
        center_m: 0.5 * g.lz_m,
        width_m: config.initial.width_fraction * g.lz_m,
    };
    Ok((model, bump))
}
