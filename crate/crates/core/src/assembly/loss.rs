use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dofmap::{DofMap, FieldKind};
use crate::error::{Error, Result};
use crate::fem2d::{geometry, TriMesh2D, TriangleRule};
use crate::materials::ConductorMaterial;
use crate::spectral1d::{gauss_legendre, lobatto_all, SpectralLineMesh};

/// How the loss density is tested against the nodal × spectral functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossQuadrature {
    /// Quadrature over every (triangle × SE element) prism.
    #[default]
    Joint,
    /// Replaces `q(x, y, z)` by `Q_z(z) Q_xy(x, y) / Q` (equal total power)
    /// and tests the two factors separately.
    Separable,
}

/// Everything the loss evaluation needs besides the fields themselves.
#[derive(Debug, Clone, Copy)]
pub struct LossContext<'a> {
    pub mesh: &'a TriMesh2D,
    pub magnetic_dofs: &'a DofMap,
    /// Conductor submesh carrying the temperature.
    pub thermal_mesh: &'a TriMesh2D,
    pub thermal_dofs: &'a DofMap,
    /// Parent triangle in `mesh` of every thermal triangle.
    pub parent_triangles: &'a [usize],
    pub zmesh: &'a SpectralLineMesh,
    pub conductor: &'a ConductorMaterial,
    /// Reluctivity per triangle of `mesh`.
    pub nu: &'a [f64],
    /// Engineering current density `i_s / S` (A/m²).
    pub current_density: f64,
    pub mode: LossQuadrature,
}

/// Gauss points per SE element used for products of loss density and test
/// functions.
pub fn loss_quadrature_points(order: usize) -> usize {
    (3 * order).div_ceil(2) + 4
}

struct PrismSamples {
    /// `q[((k · n_g) + g) · n_xy + ip]`
    q: Vec<f64>,
    /// Test-function weights per sample: area × triangle weight × h/2 × Gauss weight.
    weight: Vec<f64>,
}

impl LossContext<'_> {
    fn check(&self, a_new: &[f64], a_old: &[f64], dt: f64, theta: &[f64]) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let md = self.magnetic_dofs;
        let td = self.thermal_dofs;
        if md.kind() != FieldKind::Magnetic || td.kind() != FieldKind::Thermal {
            return Err(Error::Dimension("loss needs a magnetic and a thermal DoF map".into()));
        }
        if a_new.len() != md.len() || a_old.len() != md.len() || theta.len() != td.len() {
            return Err(Error::Dimension("field lengths do not match their DoF maps".into()));
        }
        if self.parent_triangles.len() != self.thermal_mesh.num_triangles()
            || self.nu.len() != self.mesh.num_triangles()
            || md.num_z() != self.zmesh.num_functions()
            || td.num_z() != self.zmesh.num_functions()
        {
            return Err(Error::Dimension("loss context layouts are inconsistent".into()));
        }
        Ok(())
    }

    /// Local vertex of the parent triangle for each local vertex of thermal triangle `t`.
    fn vertex_map(&self, t: usize) -> Result<[usize; 3]> {
        let parent = self.parent_triangles[t];
        let th = self.thermal_mesh.triangle_coords(t);
        let mg = self.mesh.triangle_coords(parent);
        let mut map = [0; 3];
        for (i, p) in th.iter().enumerate() {
            map[i] = mg
                .iter()
                .position(|q| q[0] == p[0] && q[1] == p[1])
                .ok_or_else(|| Error::Dimension(format!("thermal triangle {t} is not a copy of triangle {parent}")))?;
        }
        Ok(map)
    }

    fn sample(&self, t: usize, a_new: &[f64], a_old: &[f64], dt: f64, theta: &[f64], rule: &TriangleRule) -> Result<PrismSamples> {
        let parent = self.parent_triangles[t];
        let vmap = self.vertex_map(t)?;
        let gm = geometry(self.mesh, parent);
        let gt = geometry(self.thermal_mesh, t);
        let signs = self.mesh.edge_signs(parent)?;
        let edges = self.mesh.triangle_edges(parent);
        let mnodes = self.mesh.triangle(parent).nodes;
        let tnodes = self.thermal_mesh.triangle(t).nodes;
        let md = self.magnetic_dofs;
        let td = self.thermal_dofs;
        let nu = self.nu[parent];
        let js2 = self.current_density * self.current_density;
        let n_xy = rule.len();
        let mut q = Vec::new();
        let mut weight = Vec::new();
        for k in 0..self.zmesh.num_elements() {
            let p = self.zmesh.order(k);
            let h = self.zmesh.element_length(k);
            let zmap = self.zmesh.local_to_global(k);
            let gauss = gauss_legendre(loss_quadrature_points(p))?;
            let dt_coeff = |i: usize| (a_new[i] - a_old[i]) / dt;
            let ct: Vec<[f64; 3]> = zmap
                .iter()
                .map(|&w| [0, 1, 2].map(|i| signs[i] * dt_coeff(md.t_index(w, edges[i]))))
                .collect();
            let cl: Vec<[f64; 3]> = zmap.iter().map(|&w| mnodes.map(|j| dt_coeff(md.node_index(w, j)))).collect();
            let cu: Vec<[f64; 3]> = zmap.iter().map(|&w| tnodes.map(|j| theta[td.node_index(w, j)])).collect();
            let mut v = vec![0.0; p + 1];
            let mut d = vec![0.0; p + 1];
            for (&xi, &wg) in gauss.nodes.iter().zip(&gauss.weights) {
                lobatto_all(p, xi, &mut v, &mut d);
                let along = |c: &[[f64; 3]], f: &[f64]| -> [f64; 3] {
                    let mut s = [0.0; 3];
                    for (ca, fa) in c.iter().zip(f) {
                        for i in 0..3 {
                            s[i] += ca[i] * fa;
                        }
                    }
                    s
                };
                let t_val = along(&ct, &v);
                let t_dz = along(&ct, &d).map(|x| x * 2.0 / h);
                let l_val = along(&cl, &v);
                let u_val = along(&cu, &v);
                for (ip, (bt, &wt)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    // parent barycentrics of the thermal point
                    let mut bm = [0.0; 3];
                    for i in 0..3 {
                        bm[vmap[i]] = bt[i];
                    }
                    let theta_pt: f64 = (0..3).map(|i| bt[i] * u_val[i]).sum();
                    let mut at = [0.0; 2];
                    let mut dz_at = [0.0; 2];
                    let mut curl_z = 0.0;
                    for i in 0..3 {
                        let w = gm.whitney(i, bm);
                        at[0] += t_val[i] * w[0];
                        at[1] += t_val[i] * w[1];
                        dz_at[0] += t_dz[i] * w[0];
                        dz_at[1] += t_dz[i] * w[1];
                        curl_z += t_val[i] * gm.whitney_curl(i);
                    }
                    let mut al = 0.0;
                    let mut grad_al = [0.0; 2];
                    for j in 0..3 {
                        al += bm[j] * l_val[j];
                        grad_al[0] += gm.grads[j][0] * l_val[j];
                        grad_al[1] += gm.grads[j][1] * l_val[j];
                    }
                    let dadt2 = at[0] * at[0] + at[1] * at[1] + al * al;
                    let (tx, ty) = (grad_al[0] - dz_at[0], grad_al[1] - dz_at[1]);
                    let curl2 = tx * tx + ty * ty + curl_z * curl_z;
                    let m = self.conductor.effective(theta_pt);
                    let density = m.rho * js2 + m.sigma * dadt2 + nu * m.tau * curl2;
                    if !(density >= 0.0) {
                        return Err(Error::InvalidInput(format!("loss density {density} at triangle {t}")));
                    }
                    debug_assert_eq!(q.len() % n_xy, ip);
                    q.push(density);
                    weight.push(gt.area * wt * 0.5 * h * wg);
                }
            }
        }
        Ok(PrismSamples { q, weight })
    }
}

/// Heat-source load vector on the thermal DoFs from two successive vector
/// potentials and the temperature working point:
/// `q = ρ J_s² + σ |∂_t A|² + ν τ |∇×∂_t A|²` with `∂_t A ≈ (a_new − a_old)/Δt`.
pub fn compute_loss_vector(ctx: &LossContext, a_new: &[f64], a_old: &[f64], dt: f64, theta: &[f64]) -> Result<Vec<f64>> {
    ctx.check(a_new, a_old, dt, theta)?;
    let rule = TriangleRule::dunavant5();
    let n_xy = rule.len();
    let zmesh = ctx.zmesh;
    let samples: Vec<PrismSamples> = (0..ctx.thermal_mesh.num_triangles())
        .into_par_iter()
        .map(|t| ctx.sample(t, a_new, a_old, dt, theta, &rule))
        .collect::<Result<_>>()?;

    // shape values at the Gauss points of each element
    let shapes: Vec<(usize, Vec<Vec<f64>>)> = (0..zmesh.num_elements())
        .map(|k| {
            let p = zmesh.order(k);
            let g = gauss_legendre(loss_quadrature_points(p))?;
            let mut d = vec![0.0; p + 1];
            let vals = g
                .nodes
                .iter()
                .map(|&xi| {
                    let mut v = vec![0.0; p + 1];
                    lobatto_all(p, xi, &mut v, &mut d);
                    v
                })
                .collect();
            Ok((g.len(), vals))
        })
        .collect::<Result<_>>()?;

    let td = ctx.thermal_dofs;
    let mut load = vec![0.0; td.len()];
    match ctx.mode {
        LossQuadrature::Joint => {
            for (t, s) in samples.iter().enumerate() {
                let nodes = ctx.thermal_mesh.triangle(t).nodes;
                let mut idx = 0;
                for (k, (ng, vals)) in shapes.iter().enumerate() {
                    let zmap = zmesh.local_to_global(k);
                    for v in vals.iter().take(*ng) {
                        for b in &rule.points {
                            let qw = s.q[idx] * s.weight[idx];
                            idx += 1;
                            for (a, &w) in zmap.iter().enumerate() {
                                for i in 0..3 {
                                    load[td.node_index(w, nodes[i])] += qw * v[a] * b[i];
                                }
                            }
                        }
                    }
                }
            }
        }
        LossQuadrature::Separable => {
            // Q_z per z-sample, Q_xy per (triangle, xy point), weights split as
            // weight = area·w_xy · (h/2)·w_g
            let n_z_samples: usize = shapes.iter().map(|s| s.0).sum();
            let mut qz = vec![0.0; n_z_samples];
            let mut qxy = vec![vec![0.0; n_xy]; samples.len()];
            let mut total = 0.0;
            for (t, s) in samples.iter().enumerate() {
                let area = ctx.thermal_mesh.triangle_area(t);
                for iz in 0..n_z_samples {
                    for ip in 0..n_xy {
                        let idx = iz * n_xy + ip;
                        let wxy = area * rule.weights[ip];
                        let wz = s.weight[idx] / wxy;
                        qz[iz] += s.q[idx] * wxy;
                        qxy[t][ip] += s.q[idx] * wz;
                        total += s.q[idx] * s.weight[idx];
                    }
                }
            }
            if total <= 0.0 {
                return Ok(load);
            }
            let mut fz = vec![0.0; td.num_z()];
            let mut iz = 0;
            for (k, (_, vals)) in shapes.iter().enumerate() {
                let zmap = zmesh.local_to_global(k);
                let g = gauss_legendre(loss_quadrature_points(zmesh.order(k)))?;
                let half = 0.5 * zmesh.element_length(k);
                for (v, wg) in vals.iter().zip(&g.weights) {
                    for (a, &w) in zmap.iter().enumerate() {
                        fz[w] += qz[iz] * half * wg * v[a];
                    }
                    iz += 1;
                }
            }
            let mut fxy = vec![0.0; td.num_nodes()];
            for (t, qt) in qxy.iter().enumerate() {
                let nodes = ctx.thermal_mesh.triangle(t).nodes;
                let area = ctx.thermal_mesh.triangle_area(t);
                for (ip, b) in rule.points.iter().enumerate() {
                    for i in 0..3 {
                        fxy[nodes[i]] += qt[ip] * area * rule.weights[ip] * b[i];
                    }
                }
            }
            for (w, &a) in fz.iter().enumerate() {
                for (j, &b) in fxy.iter().enumerate() {
                    load[td.node_index(w, j)] = a * b / total;
                }
            }
        }
    }
    Ok(load)
}
