use std::sync::Arc;

use rayon::prelude::*;

use crate::assembly::{
    assemble_q3d_curlcurl, assemble_q3d_mass, assemble_source, assemble_thermal_system, centroid_chebyshev_samples,
    compute_loss_vector, regularization_weight, ChebyshevField, CoefficientField, DirichletData, DofMap,
    LossContext, LossQuadrature, Q3DSystem,
};
use crate::error::{Error, Result};
use crate::fem2d::{assemble_winding_vector, TriMesh2D};
use crate::materials::{ConductorMaterial, MaterialSet};
use crate::sparse::CsrMatrix;
use crate::spectral1d::{ReferenceTensorSet, SpectralLineMesh};

/// Magnetic and thermal discretization of one conductor with its boundary
/// conditions.
#[derive(Debug, Clone)]
pub struct Q3DModel {
    /// Cross-section of the magnetic problem (conductor and air).
    pub mesh: TriMesh2D,
    /// Conductor part of `mesh`, carrying the temperature.
    pub thermal_mesh: TriMesh2D,
    /// Node of `mesh` for every node of `thermal_mesh`.
    pub parent_nodes: Vec<usize>,
    /// Triangle of `mesh` for every triangle of `thermal_mesh`.
    pub parent_triangles: Vec<usize>,
    pub zmesh: SpectralLineMesh,
    pub materials: MaterialSet,
    pub refs: Arc<ReferenceTensorSet>,
    /// Chebyshev order of the material expansions along z.
    pub cheb_order: usize,
    /// Transport current `i_s` (A).
    pub current: f64,
    /// Edges with zero tangential vector potential.
    pub dirichlet_edges: Vec<bool>,
    /// Nodes with zero longitudinal vector potential.
    pub dirichlet_nodes: Vec<bool>,
    /// Zero transversal vector potential on the two end faces.
    pub fix_transversal_ends: bool,
    /// Prescribed temperature on the two end faces.
    pub end_temperature: Option<f64>,
    pub loss_mode: LossQuadrature,
}

/// Material fields at one temperature iterate.
#[derive(Debug, Clone)]
pub struct WorkingPoint {
    pub nu: CoefficientField,
    pub nu_tau: CoefficientField,
    pub sigma: CoefficientField,
    pub conductivity: CoefficientField,
    pub heat_capacity: CoefficientField,
    /// Quench flag at the sampling points, laid out like [`ChebyshevField::from_values`]
    /// over the thermal triangles.
    pub flags: Vec<f64>,
}

/// Temperature-independent part of the magnetic system.
#[derive(Debug, Clone)]
pub struct MagneticLinear {
    pub k_nu: CsrMatrix,
    pub m_reg: CsrMatrix,
    /// Absolute regularization weight multiplying `m_reg`.
    pub eps: f64,
    /// `K_ν + ε M`.
    pub k_static: CsrMatrix,
    pub j_source: Vec<f64>,
}

/// Magnetic matrices at a working point.
#[derive(Debug, Clone)]
pub struct MagneticSystem {
    pub linear: Arc<MagneticLinear>,
    pub k_tau: CsrMatrix,
    pub m_sigma: CsrMatrix,
}

#[derive(Debug, Clone)]
pub struct ThermalSystem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
}

impl Q3DModel {
    /// Builds a model from a magnetic cross-section; the thermal mesh is its
    /// conductor part. Boundary masks start empty.
    pub fn new(
        mesh: TriMesh2D,
        zmesh: SpectralLineMesh,
        materials: MaterialSet,
        refs: Arc<ReferenceTensorSet>,
        cheb_order: usize,
        current: f64,
    ) -> Result<Self> {
        materials.validate(&mesh)?;
        materials.conductor()?;
        if zmesh.max_order() > refs.max_basis_order() {
            return Err(Error::InvalidInput(format!(
                "SE order {} exceeds the reference tensors (P = {})",
                zmesh.max_order(),
                refs.max_basis_order()
            )));
        }
        if cheb_order > refs.max_cheb_order() {
            return Err(Error::ChebyshevOrder {
                requested: cheb_order,
                available: refs.max_cheb_order(),
            });
        }
        if !current.is_finite() {
            return Err(Error::InvalidInput("transport current must be finite".into()));
        }
        let (thermal_mesh, parent_nodes, parent_triangles) =
            mesh.submesh(|t| mesh.region(t.region).is_some_and(|r| r.conductor))?;
        let (ne, nn) = (mesh.num_edges(), mesh.num_nodes());
        Ok(Self {
            mesh,
            thermal_mesh,
            parent_nodes,
            parent_triangles,
            zmesh,
            materials,
            refs,
            cheb_order,
            current,
            dirichlet_edges: vec![false; ne],
            dirichlet_nodes: vec![false; nn],
            fix_transversal_ends: false,
            end_temperature: None,
            loss_mode: LossQuadrature::Joint,
        })
    }

    pub fn conductor(&self) -> &ConductorMaterial {
        self.materials.conductor().expect("validated at construction")
    }

    pub fn conductor_area(&self) -> f64 {
        self.thermal_mesh.area_where(|_| true)
    }

    pub fn current_density(&self) -> f64 {
        self.current / self.conductor_area()
    }

    pub fn magnetic_dofs(&self) -> DofMap {
        let nz = self.zmesh.num_functions();
        let mut d = DofMap::magnetic(nz, self.mesh.num_edges(), self.mesh.num_nodes());
        for w in 0..nz {
            for (e, &c) in self.dirichlet_edges.iter().enumerate() {
                if c {
                    d.constrain(d.t_index(w, e));
                }
            }
            for (j, &c) in self.dirichlet_nodes.iter().enumerate() {
                if c {
                    d.constrain(d.node_index(w, j));
                }
            }
        }
        if self.fix_transversal_ends {
            for w in [self.zmesh.vertex_index(0), self.zmesh.vertex_index(self.zmesh.num_elements())] {
                for e in 0..self.mesh.num_edges() {
                    d.constrain(d.t_index(w, e));
                }
            }
        }
        d
    }

    pub fn thermal_dofs(&self) -> DofMap {
        let mut d = DofMap::thermal(self.zmesh.num_functions(), self.thermal_mesh.num_nodes());
        if self.end_temperature.is_some() {
            for w in [self.zmesh.vertex_index(0), self.zmesh.vertex_index(self.zmesh.num_elements())] {
                for j in 0..self.thermal_mesh.num_nodes() {
                    d.constrain(d.node_index(w, j));
                }
            }
        }
        d
    }

    pub fn thermal_dirichlet(&self) -> Result<DirichletData> {
        let dofs = self.thermal_dofs();
        let mut bc = DirichletData::new(&dofs);
        if let Some(theta) = self.end_temperature {
            for (i, &c) in dofs.constrained_mask().iter().enumerate() {
                if c {
                    bc.set(i, theta)?;
                }
            }
        }
        Ok(bc)
    }

    /// Thermal coefficients of a temperature profile `θ(z)`, uniform over the
    /// cross-section.
    pub fn temperature_from_profile(&self, profile: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let c = self.zmesh.interpolate(profile)?;
        let dofs = self.thermal_dofs();
        let mut u = vec![0.0; dofs.len()];
        for (w, &cw) in c.iter().enumerate() {
            for j in 0..dofs.num_nodes() {
                u[dofs.node_index(w, j)] = cw;
            }
        }
        Ok(u)
    }

    /// Coefficients of the constant-1 temperature.
    pub fn thermal_ones(&self) -> Vec<f64> {
        let dofs = self.thermal_dofs();
        let mut ones = vec![0.0; dofs.len()];
        for k in 0..=self.zmesh.num_elements() {
            let w = self.zmesh.vertex_index(k);
            for j in 0..dofs.num_nodes() {
                ones[dofs.node_index(w, j)] = 1.0;
            }
        }
        ones
    }

    /// Temperature at the sampling points (thermal triangle centroids × the
    /// Chebyshev points of every SE element).
    pub fn temperature_samples(&self, u: &[f64]) -> Result<Vec<f64>> {
        let tris: Vec<usize> = (0..self.thermal_mesh.num_triangles()).collect();
        centroid_chebyshev_samples(&self.thermal_mesh, &self.zmesh, u, self.cheb_order, &tris)
    }

    /// Evaluates every material at the temperature iterate `u` and expands it
    /// along z.
    pub fn working_point(&self, u: &[f64]) -> Result<WorkingPoint> {
        let theta = self.temperature_samples(u)?;
        let cond = self.conductor();
        let per = self.cheb_order + 1;
        let n_el = self.zmesh.num_elements();
        let nu = self.materials.nu_per_triangle(&self.mesh)?;
        let evaluated: Vec<[f64; 5]> = theta
            .par_iter()
            .enumerate()
            .map(|(idx, &th)| {
                let t = idx / (n_el * per);
                let e = cond.effective(th);
                [
                    nu[self.parent_triangles[t]] * e.tau,
                    e.sigma,
                    cond.thermal_conductivity.eval(th),
                    cond.heat_capacity.eval(th),
                    e.flag,
                ]
            })
            .collect();
        let column = |c: usize| -> Vec<f64> { evaluated.iter().map(|v| v[c]).collect() };
        let tm = (0..self.thermal_mesh.num_triangles()).collect::<Vec<_>>();
        let field = |tris: &[usize], c: usize| -> Result<CoefficientField> {
            Ok(CoefficientField::Chebyshev(ChebyshevField::from_nonnegative_values(
                tris.to_vec(),
                n_el,
                self.cheb_order,
                &column(c),
            )?))
        };
        Ok(WorkingPoint {
            nu: CoefficientField::PerTriangle(nu),
            nu_tau: field(&self.parent_triangles, 0)?,
            sigma: field(&self.parent_triangles, 1)?,
            conductivity: field(&tm, 2)?,
            heat_capacity: field(&tm, 3)?,
            flags: column(4),
        })
    }

    /// `K_ν`, the regularization and the source; valid until the z-mesh changes.
    pub fn assemble_magnetic_linear(&self, eps_rel: f64) -> Result<MagneticLinear> {
        let dofs = self.magnetic_dofs();
        let nu = self.materials.nu_per_triangle(&self.mesh)?;
        let nu_max = nu.iter().cloned().fold(0.0, f64::max);
        let k_nu = assemble_q3d_curlcurl(&self.mesh, &self.zmesh, &dofs, &CoefficientField::PerTriangle(nu), &self.refs)?;
        let ones = CoefficientField::PerTriangle(vec![1.0; self.mesh.num_triangles()]);
        let m_reg = assemble_q3d_mass(&self.mesh, &self.zmesh, &dofs, &ones, &self.refs)?;
        let eps = regularization_weight(&self.mesh, nu_max, eps_rel);
        let k_static = k_nu.add_scaled(&m_reg, eps)?;
        let winding = assemble_winding_vector(&self.mesh)?;
        let j_source = assemble_source(&self.zmesh, &dofs, &winding, self.current)?;
        Ok(MagneticLinear {
            k_nu,
            m_reg,
            eps,
            k_static,
            j_source,
        })
    }

    /// Adds the temperature-dependent matrices of `wp` to `linear`.
    pub fn assemble_magnetic_with(&self, linear: &Arc<MagneticLinear>, wp: &WorkingPoint) -> Result<MagneticSystem> {
        let dofs = self.magnetic_dofs();
        if linear.j_source.len() != dofs.len() {
            return Err(Error::Dimension("linear magnetic system belongs to another z-mesh".into()));
        }
        Ok(MagneticSystem {
            linear: Arc::clone(linear),
            k_tau: assemble_q3d_curlcurl(&self.mesh, &self.zmesh, &dofs, &wp.nu_tau, &self.refs)?,
            m_sigma: assemble_q3d_mass(&self.mesh, &self.zmesh, &dofs, &wp.sigma, &self.refs)?,
        })
    }

    pub fn assemble_magnetic(&self, wp: &WorkingPoint, eps_rel: f64) -> Result<MagneticSystem> {
        self.assemble_magnetic_with(&Arc::new(self.assemble_magnetic_linear(eps_rel)?), wp)
    }

    pub fn assemble_thermal(&self, wp: &WorkingPoint) -> Result<ThermalSystem> {
        let dofs = self.thermal_dofs();
        let (k, m) = assemble_thermal_system(
            &self.thermal_mesh,
            &self.zmesh,
            &dofs,
            &wp.conductivity,
            &wp.heat_capacity,
            &self.refs,
        )?;
        Ok(ThermalSystem { k, m })
    }

    pub fn loss_vector(&self, a_new: &[f64], a_old: &[f64], dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let md = self.magnetic_dofs();
        let td = self.thermal_dofs();
        let nu = self.materials.nu_per_triangle(&self.mesh)?;
        let ctx = LossContext {
            mesh: &self.mesh,
            magnetic_dofs: &md,
            thermal_mesh: &self.thermal_mesh,
            thermal_dofs: &td,
            parent_triangles: &self.parent_triangles,
            zmesh: &self.zmesh,
            conductor: self.conductor(),
            nu: &nu,
            current_density: self.current_density(),
            mode: self.loss_mode,
        };
        compute_loss_vector(&ctx, a_new, a_old, dt, u)
    }

    /// All matrices and vectors of one working point.
    pub fn assemble_system(
        &self,
        u: &[f64],
        a_new: &[f64],
        a_old: &[f64],
        dt: f64,
        eps_rel: f64,
    ) -> Result<Q3DSystem> {
        let wp = self.working_point(u)?;
        let mag = self.assemble_magnetic(&wp, eps_rel)?;
        let th = self.assemble_thermal(&wp)?;
        let q_loss = self.loss_vector(a_new, a_old, dt, u)?;
        let lin = Arc::try_unwrap(mag.linear).unwrap_or_else(|shared| (*shared).clone());
        Ok(Q3DSystem {
            k_nu: lin.k_nu,
            k_tau: mag.k_tau,
            m_sigma: mag.m_sigma,
            m_reg: lin.m_reg.scaled(lin.eps),
            j_source: lin.j_source,
            k_thermal: th.k,
            m_thermal: th.m,
            q_loss,
        })
    }
}
