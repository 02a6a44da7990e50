use serde::{Deserialize, Serialize};

use super::curve::MaterialCurve;
use crate::error::{Error, Result};

/// Superconductor transition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuenchParams", into = "RawQuenchParams")]
pub struct QuenchParams {
    theta_cs: f64,
    theta_crit: f64,
    tau_sc: f64,
}

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
struct RawQuenchParams {
    theta_cs_K: f64,
    theta_crit_K: f64,
    tau_sc_s: f64,
}

impl TryFrom<RawQuenchParams> for QuenchParams {
    type Error = Error;

    fn try_from(r: RawQuenchParams) -> Result<Self> {
        Self::new(r.theta_cs_K, r.theta_crit_K, r.tau_sc_s)
    }
}

impl From<QuenchParams> for RawQuenchParams {
    fn from(p: QuenchParams) -> Self {
        Self {
            theta_cs_K: p.theta_cs,
            theta_crit_K: p.theta_crit,
            tau_sc_s: p.tau_sc,
        }
    }
}

impl Default for QuenchParams {
    fn default() -> Self {
        Self {
            theta_cs: 6.5,
            theta_crit: 9.2,
            tau_sc: 10e-3,
        }
    }
}

impl QuenchParams {
    pub fn new(theta_cs: f64, theta_crit: f64, tau_sc: f64) -> Result<Self> {
        if theta_crit == theta_cs {
            return Err(Error::InvalidInput(
                "theta_crit equals theta_cs: the quench flag divides by their difference".into(),
            ));
        }
        if !(theta_cs < theta_crit) || !theta_cs.is_finite() || !theta_crit.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need theta_cs < theta_crit, got {theta_cs} and {theta_crit}"
            )));
        }
        if !(tau_sc >= 0.0) || !tau_sc.is_finite() {
            return Err(Error::InvalidInput(format!("tau_sc must be ≥ 0, got {tau_sc}")));
        }
        Ok(Self {
            theta_cs,
            theta_crit,
            tau_sc,
        })
    }

    pub fn theta_cs(&self) -> f64 {
        self.theta_cs
    }

    pub fn theta_crit(&self) -> f64 {
        self.theta_crit
    }

    pub fn tau_sc(&self) -> f64 {
        self.tau_sc
    }

    /// Temperature at which the flag equals 1/2: `θ_crit + (θ_crit − θ_cs)/2`.
    pub fn midpoint(&self) -> f64 {
        self.theta_crit + 0.5 * (self.theta_crit - self.theta_cs)
    }
}

/// `q = 1 / (1 + exp(−16 (θ − θ_crit)/(θ_crit − θ_cs) + 8))`, evaluated without
/// overflow. The midpoint lies at [`QuenchParams::midpoint`], above θ_crit.
pub fn quench_flag(theta: f64, params: &QuenchParams) -> f64 {
    let x = -16.0 * (theta - params.theta_crit) / (params.theta_crit - params.theta_cs) + 8.0;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMaterials {
    pub flag: f64,
    /// IFCC time constant (s).
    pub tau: f64,
    /// Electrical conductivity (S/m).
    pub sigma: f64,
    /// Electrical resistivity (Ω·m).
    pub rho: f64,
}

/// Quench-weighted properties: `τ = (1−q) τ_SC`, `σ = q σ_Cu`, `ρ = q ρ_Cu`.
pub fn effective_materials(theta: f64, params: &QuenchParams, copper_resistivity: &MaterialCurve) -> EffectiveMaterials {
    let flag = quench_flag(theta, params);
    let rho_cu = copper_resistivity.eval(theta);
    EffectiveMaterials {
        flag,
        tau: (1.0 - flag) * params.tau_sc,
        sigma: flag / rho_cu,
        rho: flag * rho_cu,
    }
}
