use std::sync::Arc;

use super::model::Q3DModel;
use super::steps::{magnetic_step, thermal_step};
use crate::error::{Error, Result};
use crate::linsolve::SpdSolver;
use crate::materials::quench_flag;

/// Factorization caches for the two fields, kept across steps so the symbolic
/// analysis is reused while the z-mesh is unchanged.
#[derive(Default)]
pub struct LinearSolvers {
    pub magnetic: SpdSolver,
    pub thermal: SpdSolver,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Relative change of `u` (∞-norm) below which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    /// Relaxation used once the change grows between iterations.
    pub fallback_relaxation: f64,
    /// Regularization `ε_rel` of the magnetic system.
    pub eps_rel: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50,
            relaxation: 1.0,
            fallback_relaxation: 0.5,
            eps_rel: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of every iteration.
    pub changes: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Working-point iteration of one time step: assemble the magnetic system at
/// the temperature iterate, step the vector potential, evaluate the losses,
/// assemble and step the heat equation. Returns the last iterate whether or
/// not it converged.
pub fn picard_iterate(
    model: &Q3DModel,
    a_old: &[f64],
    u_old: &[f64],
    dt: f64,
    opts: &PicardOptions,
    solvers: &mut LinearSolvers,
) -> Result<PicardOutcome> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidInput("Picard tolerance must be positive and max_iter ≥ 1".into()));
    }
    let mdofs = model.magnetic_dofs();
    let bc = model.thermal_dirichlet()?;
    let mut u_k = u_old.to_vec();
    let mut a_k = a_old.to_vec();
    let mut omega = opts.relaxation;
    let mut changes = Vec::new();
    let linear = Arc::new(model.assemble_magnetic_linear(opts.eps_rel)?);
    for it in 1..=opts.max_iter {
        let wp = model.working_point(&u_k)?;
        let mag = model.assemble_magnetic_with(&linear, &wp)?;
        a_k = magnetic_step(&mag, &mdofs, a_old, dt, &mut solvers.magnetic)?;
        let q = model.loss_vector(&a_k, a_old, dt, &u_k)?;
        let th = model.assemble_thermal(&wp)?;
        let u_new = thermal_step(&th, &bc, u_old, dt, &q, &mut solvers.thermal)?;
        let next: Vec<f64> = u_k.iter().zip(&u_new).map(|(a, b)| a + omega * (b - a)).collect();
        let diff: Vec<f64> = next.iter().zip(&u_k).map(|(a, b)| a - b).collect();
        let change = inf_norm(&diff) / inf_norm(&next).max(f64::MIN_POSITIVE);
        if changes.last().is_some_and(|&prev| change > prev) {
            omega = opts.fallback_relaxation;
        }
        changes.push(change);
        u_k = next;
        log::debug!("picard iteration {it}: change {change:.3e}, relaxation {omega}");
        if change < opts.tol {
            return Ok(PicardOutcome {
                a: a_k,
                u: u_k,
                iterations: it,
                converged: true,
                changes,
            });
        }
    }
    Ok(PicardOutcome {
        a: a_k,
        u: u_k,
        iterations: opts.max_iter,
        converged: false,
        changes,
    })
}

/// [`picard_iterate`] that fails when the tolerance is not reached.
pub fn picard_timestep(
    model: &Q3DModel,
    a_old: &[f64],
    u_old: &[f64],
    dt: f64,
    opts: &PicardOptions,
    solvers: &mut LinearSolvers,
) -> Result<PicardOutcome> {
    let out = picard_iterate(model, a_old, u_old, dt, opts, solvers)?;
    if !out.converged {
        return Err(Error::PicardDivergence {
            iterations: out.iterations,
            last_change: out.changes.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

/// Quench flags at the material sampling points and the normal-zone extent.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchState {
    /// `flags[(t · n_el + k) · (M+1) + i]` over thermal triangles `t`.
    pub flags: Vec<f64>,
    /// z of every sample, `(k · (M+1) + i)`.
    pub z: Vec<f64>,
    /// Outermost z-locations where the cross-section maximum of the flag
    /// crosses 1/2; `None` while nothing is quenched.
    pub front: Option<(f64, f64)>,
    /// Larger of the two sample intervals that bracket the fronts (0 without
    /// a front): the resolution of the front positions.
    pub front_spacing: f64,
}

impl QuenchState {
    pub fn is_quenched(&self) -> bool {
        self.front.is_some()
    }
}

/// Evaluates the quench flag at the sampling points of the temperature `u`.
pub fn update_quench_state(model: &Q3DModel, u: &[f64]) -> Result<QuenchState> {
    let theta = model.temperature_samples(u)?;
    let params = model.conductor().quench;
    let flags: Vec<f64> = theta.iter().map(|&t| quench_flag(t, &params)).collect();
    let n_el = model.zmesh.num_elements();
    let per = model.cheb_order + 1;
    let z: Vec<f64> = (0..n_el).flat_map(|k| model.zmesh.chebyshev_samples(k, model.cheb_order)).collect();
    let n_s = n_el * per;
    let mut peak = vec![0.0f64; n_s];
    for chunk in flags.chunks(n_s) {
        for (p, &f) in peak.iter_mut().zip(chunk) {
            *p = p.max(f);
        }
    }
    let mut profile: Vec<(f64, f64)> = z.iter().copied().zip(peak).collect();
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let front = front_positions(&profile, 0.5);
    let front_spacing = front.map_or(0.0, |(lo, hi)| bracket(&profile, lo).max(bracket(&profile, hi)));
    Ok(QuenchState {
        flags,
        z,
        front,
        front_spacing,
    })
}

/// Length of the sample interval containing `z`.
fn bracket(profile: &[(f64, f64)], z: f64) -> f64 {
    let i = profile.partition_point(|p| p.0 < z);
    if i == 0 || i == profile.len() {
        return 0.0;
    }
    profile[i].0 - profile[i - 1].0
}

/// Outermost crossings of `level` in a z-sorted profile.
fn front_positions(profile: &[(f64, f64)], level: f64) -> Option<(f64, f64)> {
    let first = profile.iter().position(|p| p.1 >= level)?;
    let last = profile.iter().rposition(|p| p.1 >= level)?;
    let cross = |a: (f64, f64), b: (f64, f64)| {
        if b.1 == a.1 {
            a.0
        } else {
            a.0 + (level - a.1) / (b.1 - a.1) * (b.0 - a.0)
        }
    };
    let lo = if first == 0 { profile[0].0 } else { cross(profile[first - 1], profile[first]) };
    let hi = if last + 1 == profile.len() {
        profile[last].0
    } else {
        cross(profile[last], profile[last + 1])
    };
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn front_interpolation() {
        let p = [(0.0, 0.0), (1.0, 0.25), (2.0, 0.75), (3.0, 1.0), (4.0, 0.5), (5.0, 0.0)];
        let (lo, hi) = front_positions(&p, 0.5).unwrap();
        assert!((lo - 1.5).abs() < 1e-15);
        assert!((hi - 4.0).abs() < 1e-15);
        assert!(front_positions(&[(0.0, 0.1), (1.0, 0.2)], 0.5).is_none());
        assert_eq!(front_positions(&[(0.0, 0.9), (1.0, 0.7)], 0.5), Some((0.0, 1.0)));
    }
}
