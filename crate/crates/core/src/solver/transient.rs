use serde::{Deserialize, Serialize};

use super::adapt::{adapt_z_mesh, AdaptOptions};
use super::model::Q3DModel;
use super::picard::{picard_iterate, update_quench_state, LinearSolvers, PicardOptions, QuenchState};
use super::steps::{magnetic_energy, magnetostatic_solve, thermal_energy};
use crate::assembly::{assemble_q3d_curlcurl, CoefficientField, FieldKind};
use crate::error::{Error, Result};

/// Coefficient vector of one field at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Q3DField {
    pub kind: FieldKind,
    pub values: Vec<f64>,
    /// Time (s).
    pub time: f64,
}

impl Q3DField {
    pub fn new(kind: FieldKind, values: Vec<f64>, time: f64, expected_len: usize) -> Result<Self> {
        if values.len() != expected_len {
            return Err(Error::Dimension(format!("field of length {}, DoF map has {expected_len}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite field entry at {i}")));
        }
        Ok(Self { kind, values, time })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientConfig {
    pub t_end_s: f64,
    pub n_steps: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub relaxation: f64,
    pub fallback_relaxation: f64,
    /// Relative regularization of the magnetic system.
    pub regularization: f64,
    pub adapt: AdaptOptions,
    /// Halve Δt (up to `max_halvings` times) when the Picard loop fails;
    /// otherwise the step keeps its size and the failure is reported.
    pub step_rejection: bool,
    pub max_halvings: usize,
}

impl Default for TransientConfig {
    fn default() -> Self {
        Self {
            t_end_s: 1.0,
            n_steps: 25,
            picard_tol: 1e-6,
            picard_max_iter: 50,
            relaxation: 1.0,
            fallback_relaxation: 0.5,
            regularization: 1e-6,
            adapt: AdaptOptions::default(),
            step_rejection: false,
            max_halvings: 4,
        }
    }
}

impl TransientConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end_s > 0.0) || !self.t_end_s.is_finite() {
            return Err(Error::Config(format!("t_end_s must be positive, got {}", self.t_end_s)));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return Err(Error::Config("Picard tolerance must be positive and max iterations ≥ 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0)
            || !(self.fallback_relaxation > 0.0 && self.fallback_relaxation <= 1.0)
        {
            return Err(Error::Config("relaxation factors must lie in (0, 1]".into()));
        }
        if !(self.regularization > 0.0) {
            return Err(Error::Config("regularization must be positive".into()));
        }
        if !(self.adapt.threshold > 0.0) || !(self.adapt.min_length_fraction > 0.0) {
            return Err(Error::Config("adaptation threshold and minimum length must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end_s / self.n_steps.max(1) as f64
    }

    pub fn picard(&self) -> PicardOptions {
        PicardOptions {
            tol: self.picard_tol,
            max_iter: self.picard_max_iter,
            relaxation: self.relaxation,
            fallback_relaxation: self.fallback_relaxation,
            eps_rel: self.regularization,
        }
    }
}

/// `θ(z) = θ_bath + (θ_peak − θ_bath) exp(−((z − z_c)/w)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    #[serde(rename = "theta_bath_K")]
    pub theta_bath: f64,
    #[serde(rename = "theta_peak_K")]
    pub theta_peak: f64,
    pub center_m: f64,
    pub width_m: f64,
}

impl GaussianBump {
    pub fn eval(&self, z: f64) -> f64 {
        let s = (z - self.center_m) / self.width_m;
        self.theta_bath + (self.theta_peak - self.theta_bath) * (-s * s).exp()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub a: Q3DField,
    pub u: Q3DField,
    pub quench: QuenchState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub e_mag: f64,
    pub e_th: f64,
    /// Picard iterations summed over the substeps of this step.
    pub picard_iters: usize,
    pub converged: bool,
    pub front: Option<(f64, f64)>,
    /// Sample spacing at the fronts, see [`QuenchState::front_spacing`].
    pub front_spacing: f64,
    /// Largest temperature at the material sampling points (K).
    pub theta_max: f64,
    pub z_elements: usize,
}

#[derive(Debug, Clone)]
pub struct TransientResult {
    pub records: Vec<StepRecord>,
    pub all_converged: bool,
}

fn energies(model: &Q3DModel, a: &[f64], u: &[f64]) -> Result<(f64, f64)> {
    let nu = CoefficientField::PerTriangle(model.materials.nu_per_triangle(&model.mesh)?);
    let k_nu = assemble_q3d_curlcurl(&model.mesh, &model.zmesh, &model.magnetic_dofs(), &nu, &model.refs)?;
    let wp = model.working_point(u)?;
    let th = model.assemble_thermal(&wp)?;
    Ok((
        magnetic_energy(&k_nu, a),
        thermal_energy(&th.m, u, &model.zmesh, model.thermal_mesh.num_nodes()),
    ))
}

fn peak_temperature(model: &Q3DModel, u: &[f64]) -> Result<f64> {
    let peak = model.temperature_samples(u)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let (_, hi) = model.conductor().heat_capacity.range();
    if peak > hi {
        log::warn!("peak temperature {peak:.1} K beyond the material tables (≤ {hi} K); values are clamped");
    }
    Ok(peak)
}

/// Initial temperature from `bump` (the z-mesh is refined until the profile
/// is resolved when adaptation is on) and the magnetostatic vector potential
/// of the transport current at that temperature.
pub fn initial_state(model: &mut Q3DModel, bump: &GaussianBump, config: &TransientConfig) -> Result<SimulationState> {
    config.validate()?;
    let mut u = model.temperature_from_profile(|z| bump.eval(z))?;
    if config.adapt.enabled {
        for _ in 0..16 {
            let flagged = super::adapt::elements_to_refine(model, &u, &config.adapt)?;
            if flagged.is_empty() {
                break;
            }
            model.zmesh = model.zmesh.bisect(&flagged)?;
            u = model.temperature_from_profile(|z| bump.eval(z))?;
        }
    }
    if let Some(theta) = model.end_temperature {
        let bc = model.thermal_dirichlet()?;
        for (i, &c) in bc.mask().iter().enumerate() {
            if c {
                u[i] = theta;
            }
        }
    }
    let wp = model.working_point(&u)?;
    let mag = model.assemble_magnetic(&wp, config.regularization)?;
    let mut solvers = LinearSolvers::default();
    let a = magnetostatic_solve(&mag, &model.magnetic_dofs(), &mut solvers.magnetic)?;
    let quench = update_quench_state(model, &u)?;
    let na = a.len();
    let nu = u.len();
    Ok(SimulationState {
        a: Q3DField::new(FieldKind::Magnetic, a, 0.0, na)?,
        u: Q3DField::new(FieldKind::Thermal, u, 0.0, nu)?,
        quench,
    })
}

/// Implicit Euler time loop with the working-point iteration and z-adaptation.
/// `observer` sees the initial record and every completed step.
pub fn run_transient(
    model: &mut Q3DModel,
    mut state: SimulationState,
    config: &TransientConfig,
    mut observer: impl FnMut(&StepRecord, &SimulationState, &Q3DModel) -> Result<()>,
) -> Result<(TransientResult, SimulationState)> {
    config.validate()?;
    let (e_mag, e_th) = energies(model, &state.a.values, &state.u.values)?;
    let mut records = vec![StepRecord {
        step: 0,
        t: state.u.time,
        e_mag,
        e_th,
        picard_iters: 0,
        converged: true,
        front: state.quench.front,
        front_spacing: state.quench.front_spacing,
        theta_max: peak_temperature(model, &state.u.values)?,
        z_elements: model.zmesh.num_elements(),
    }];
    observer(&records[0], &state, model)?;
    let dt = config.dt();
    let picard = config.picard();
    let mut solvers = LinearSolvers::default();
    let mut all_converged = true;
    for step in 1..=config.n_steps {
        let t_target = config.t_end_s * step as f64 / config.n_steps as f64;
        let mut a = state.a.values.clone();
        let mut u = state.u.values.clone();
        let mut t = state.u.time;
        let mut iters = 0;
        let mut converged = true;
        let mut halvings = 0;
        let mut sub_dt = dt;
        while t < t_target - 1e-12 * dt {
            let h = sub_dt.min(t_target - t);
            let out = picard_iterate(model, &a, &u, h, &picard, &mut solvers)
                .map_err(|e| Error::Step { step, source: Box::new(e) })?;
            iters += out.iterations;
            if !out.converged && config.step_rejection {
                if halvings == config.max_halvings {
                    return Err(Error::Step {
                        step,
                        source: Box::new(Error::PicardDivergence {
                            iterations: out.iterations,
                            last_change: out.changes.last().copied().unwrap_or(f64::NAN),
                        }),
                    });
                }
                halvings += 1;
                sub_dt *= 0.5;
                log::warn!("step {step}: Picard loop failed, retrying with Δt = {sub_dt:.3e}");
                continue;
            }
            if !out.converged {
                log::warn!(
                    "step {step}: Picard loop did not converge in {} iterations (last change {:.3e})",
                    out.iterations,
                    out.changes.last().copied().unwrap_or(f64::NAN)
                );
                converged = false;
            }
            a = out.a;
            u = out.u;
            t = if (t + h - t_target).abs() <= 1e-12 * dt { t_target } else { t + h };
        }
        all_converged &= converged;
        if config.adapt.enabled {
            adapt_z_mesh(model, &mut a, &mut u, &config.adapt).map_err(|e| Error::Step { step, source: Box::new(e) })?;
        }
        let quench = update_quench_state(model, &u)?;
        let (e_mag, e_th) = energies(model, &a, &u)?;
        let (na, nu) = (a.len(), u.len());
        state = SimulationState {
            a: Q3DField::new(FieldKind::Magnetic, a, t_target, na)?,
            u: Q3DField::new(FieldKind::Thermal, u, t_target, nu)?,
            quench,
        };
        let rec = StepRecord {
            step,
            t: t_target,
            e_mag,
            e_th,
            picard_iters: iters,
            converged,
            front: state.quench.front,
            front_spacing: state.quench.front_spacing,
            theta_max: peak_temperature(model, &state.u.values)?,
            z_elements: model.zmesh.num_elements(),
        };
        log::info!(
            "step {step}: t = {t_target:.4} s, {iters} Picard iterations, E_mag = {e_mag:.6e} J, E_th = {e_th:.6e} J"
        );
        observer(&rec, &state, model)?;
        records.push(rec);
    }
    Ok((TransientResult { records, all_converged }, state))
}
