use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::LossQuadrature;
use crate::error::{Error, Result};
use crate::materials::QuenchParams;
use crate::solver::TransientConfig;
use crate::spectral1d::MAX_BASIS_ORDER;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Width of the modeled (quarter) wire cross-section.
    pub lx_m: f64,
    pub ly_m: f64,
    pub lz_m: f64,
    /// Air box extent as a multiple of the wire extent.
    pub air_box_scale: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            lx_m: 1e-4,
            ly_m: 1e-4,
            lz_m: 1.0,
            air_box_scale: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    pub wire_nx: usize,
    pub wire_ny: usize,
    /// Graded cells between the wire and the outer air-box boundary.
    pub air_nx: usize,
    pub air_ny: usize,
    pub z_elements: usize,
    pub z_order: usize,
    pub cheb_order: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            wire_nx: 4,
            wire_ny: 4,
            air_nx: 6,
            air_ny: 6,
            z_elements: 5,
            z_order: 6,
            cheb_order: 16,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Source {
    /// Engineering current density over the modeled wire cross-section.
    pub current_density_A_per_mm2: f64,
}

impl Default for Source {
    fn default() -> Self {
        Self {
            current_density_A_per_mm2: 500.0,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialCondition {
    pub theta_bath_K: f64,
    /// Peak of the initial hot spot; `θ_crit + 2 K` when absent.
    pub theta_peak_K: Option<f64>,
    /// Width of the hot spot as a fraction of `lz_m`.
    pub width_fraction: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            theta_bath_K: 1.9,
            theta_peak_K: None,
            width_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    /// Steps written as VTK snapshots.
    pub snapshot_steps: Vec<usize>,
    /// Sampling points of the snapshot grid along x, y, z.
    pub snapshot_dims: [usize; 3],
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("q3d_out"),
            snapshot_steps: Vec::new(),
            snapshot_dims: [9, 9, 101],
        }
    }
}

/// Complete description of a wire run. Field names carry their units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub discretization: Discretization,
    /// Material library file; the bundled wire data when absent.
    pub materials_file: Option<PathBuf>,
    pub quench: QuenchParams,
    pub source: Source,
    pub initial: InitialCondition,
    pub transient: TransientConfig,
    pub loss_quadrature: LossQuadrature,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            discretization: Discretization::default(),
            materials_file: None,
            quench: QuenchParams::default(),
            source: Source::default(),
            initial: InitialCondition::default(),
            transient: TransientConfig::default(),
            loss_quadrature: LossQuadrature::Joint,
            output: Output::default(),
        }
    }
}

impl RunConfig {
    /// Cross-section with 12 × 1 wire cells (26 thermal nodes) and 5 SE of
    /// order 6: 806 thermal DoFs.
    pub fn table_one() -> Self {
        let mut c = Self::default();
        c.discretization.wire_nx = 12;
        c.discretization.wire_ny = 1;
        c.discretization.air_nx = 3;
        c.discretization.air_ny = 10;
        c.transient.adapt.enabled = false;
        c
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for (name, v) in [("lx_m", g.lx_m), ("ly_m", g.ly_m), ("lz_m", g.lz_m)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        if !(g.air_box_scale > 1.0) || !g.air_box_scale.is_finite() {
            return Err(Error::Config(format!(
                "geometry.air_box_scale must exceed 1 (air box larger than the wire), got {}",
                g.air_box_scale
            )));
        }
        let d = &self.discretization;
        if d.wire_nx == 0 || d.wire_ny == 0 || d.air_nx == 0 || d.air_ny == 0 || d.z_elements == 0 {
            return Err(Error::Config("all cell and element counts must be ≥ 1".into()));
        }
        if d.z_order == 0 || d.z_order > MAX_BASIS_ORDER {
            return Err(Error::Config(format!("z_order must lie in 1..={MAX_BASIS_ORDER}, got {}", d.z_order)));
        }
        if d.cheb_order == 0 {
            return Err(Error::Config("cheb_order must be ≥ 1".into()));
        }
        if !self.source.current_density_A_per_mm2.is_finite() {
            return Err(Error::Config("current density must be finite".into()));
        }
        let ic = &self.initial;
        if !(ic.theta_bath_K > 0.0) || !(ic.width_fraction > 0.0) {
            return Err(Error::Config("bath temperature and hot-spot width must be positive".into()));
        }
        if let Some(p) = ic.theta_peak_K {
            if !(p > 0.0) {
                return Err(Error::Config("peak temperature must be positive".into()));
            }
        }
        if self.output.snapshot_dims.iter().any(|&n| n < 2) {
            return Err(Error::Config("snapshot_dims needs at least 2 points per direction".into()));
        }
        self.transient.validate()
    }

    pub fn theta_peak(&self) -> f64 {
        self.initial.theta_peak_K.unwrap_or(self.quench.theta_crit() + 2.0)
    }

    /// Transport current through the modeled cross-section (A).
    pub fn current(&self) -> f64 {
        self.source.current_density_A_per_mm2 * 1e6 * self.geometry.lx_m * self.geometry.ly_m
    }
}
