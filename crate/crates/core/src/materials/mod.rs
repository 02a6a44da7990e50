//! Temperature-dependent material models, the quench flag and the Chebyshev
//! expansion of material fields along the conductor axis.

mod curve;
mod quench;

use std::collections::BTreeMap;
use std::f64::consts::PI;

pub use curve::{bloch_gruneisen_j5, BlochGruneisen, MaterialCurve, MaterialLibrary, Pchip};
pub use quench::{effective_materials, quench_flag, EffectiveMaterials, QuenchParams};

use crate::error::{Error, Result};
use crate::fem2d::TriMesh2D;
use crate::spectral1d::chebyshev_coeffs;

/// Vacuum permeability (H/m).
pub const MU0: f64 = 4e-7 * PI;

/// Homogenized superconducting wire.
#[derive(Debug, Clone)]
pub struct ConductorMaterial {
    pub resistivity: MaterialCurve,
    pub thermal_conductivity: MaterialCurve,
    pub heat_capacity: MaterialCurve,
    pub quench: QuenchParams,
}

impl ConductorMaterial {
    /// Default NbTi/Cu wire: copper fit with RRR 100 and the bundled tables.
    pub fn default_wire(quench: QuenchParams) -> Self {
        let lib = MaterialLibrary::default_wire();
        Self::from_library(&lib, quench).expect("bundled data has the thermal curves")
    }

    /// Picks `thermal_conductivity`, `heat_capacity` and (if present)
    /// `copper_resistivity` from a library; the default copper fit fills in a
    /// missing resistivity.
    pub fn from_library(lib: &MaterialLibrary, quench: QuenchParams) -> Result<Self> {
        let resistivity = lib
            .get("copper_resistivity")
            .cloned()
            .unwrap_or(MaterialCurve::CopperResistivity(BlochGruneisen::copper_default()));
        Ok(Self {
            resistivity,
            thermal_conductivity: lib.get("thermal_conductivity")?.clone(),
            heat_capacity: lib.get("heat_capacity")?.clone(),
            quench,
        })
    }

    pub fn copper_conductivity(&self, theta: f64) -> f64 {
        1.0 / self.resistivity.eval(theta)
    }

    pub fn effective(&self, theta: f64) -> EffectiveMaterials {
        effective_materials(theta, &self.quench, &self.resistivity)
    }
}

#[derive(Debug, Clone)]
pub struct RegionMaterial {
    pub label: String,
    /// Reluctivity (m/H); nonmagnetic regions use `1/μ0`.
    pub nu: f64,
    pub conductor: Option<ConductorMaterial>,
}

/// Region id → material.
#[derive(Debug, Clone, Default)]
pub struct MaterialSet {
    regions: BTreeMap<usize, RegionMaterial>,
}

impl MaterialSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wire in region `wire`, air in region `air`.
    pub fn wire_in_air(wire: usize, air: usize, conductor: ConductorMaterial) -> Self {
        let mut set = Self::new();
        set.insert(
            wire,
            RegionMaterial {
                label: "wire".into(),
                nu: 1.0 / MU0,
                conductor: Some(conductor),
            },
        );
        set.insert(
            air,
            RegionMaterial {
                label: "air".into(),
                nu: 1.0 / MU0,
                conductor: None,
            },
        );
        set
    }

    pub fn insert(&mut self, region: usize, material: RegionMaterial) {
        self.regions.insert(region, material);
    }

    pub fn get(&self, region: usize) -> Result<&RegionMaterial> {
        self.regions
            .get(&region)
            .ok_or_else(|| Error::MaterialData(format!("no material for region {region}")))
    }

    /// Checks that every triangle's region resolves and that conductor flags
    /// agree with the mesh.
    pub fn validate(&self, mesh: &TriMesh2D) -> Result<()> {
        for r in mesh.regions() {
            let m = self.get(r.id)?;
            if m.conductor.is_some() != r.conductor {
                return Err(Error::MaterialData(format!(
                    "region {} ('{}'): conductor flag disagrees with its material",
                    r.id, r.label
                )));
            }
            if !(m.nu > 0.0) {
                return Err(Error::MaterialData(format!("region {}: reluctivity must be positive", r.id)));
            }
        }
        Ok(())
    }

    pub fn nu_per_triangle(&self, mesh: &TriMesh2D) -> Result<Vec<f64>> {
        mesh.triangles().iter().map(|t| Ok(self.get(t.region)?.nu)).collect()
    }

    /// The material of the first conductor region.
    pub fn conductor(&self) -> Result<&ConductorMaterial> {
        self.regions
            .values()
            .find_map(|r| r.conductor.as_ref())
            .ok_or_else(|| Error::MaterialData("material set has no conductor".into()))
    }
}

/// Chebyshev coefficients of `α(θ(z))` on one element from the temperature at
/// its `M + 1` Chebyshev points (transform order). `available` is the order of
/// the reference-tensor cache the coefficients will be contracted with.
pub fn material_chebyshev_coeffs(
    alpha: impl Fn(f64) -> f64,
    theta_samples: &[f64],
    available: usize,
) -> Result<Vec<f64>> {
    if theta_samples.is_empty() {
        return Err(Error::InvalidInput("no temperature samples".into()));
    }
    let order = theta_samples.len() - 1;
    if order > available {
        return Err(Error::ChebyshevOrder {
            requested: order,
            available,
        });
    }
    let values: Vec<f64> = theta_samples.iter().map(|&t| alpha(t)).collect();
    chebyshev_coeffs(&values)
}
