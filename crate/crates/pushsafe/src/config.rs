//! Run configuration: built-in defaults, JSON documents, or flat
//! key-value text. Unknown keys are rejected in both formats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::VehicleParams;
use crate::safety::ActuationLimits;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    /// Hover thrust ratio used to calibrate saturation.
    pub c_h: f64,
    /// Safety factor on the per-rotor limit.
    pub eta: f64,
    pub sim: SimConfig,
    /// Candidate operation cases as `[beta0_deg, phi0_deg]` pairs.
    pub cases: Vec<[f64; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            c_h: 0.61,
            eta: 0.7,
            sim: SimConfig::default(),
            cases: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config = Self::parse(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses either a JSON document or flat `key = value` lines.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            Self::parse_flat(text)
        }
    }

    fn parse_flat(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Config(format!("line {}: {what} for key '{key}'", lineno + 1))
            };
            let num = || -> Result<f64> {
                value.parse::<f64>().map_err(|_| bad("invalid number"))
            };
            match key {
                "vehicle.m_b" => config.vehicle.m_b = num()?,
                "vehicle.m_e" => config.vehicle.m_e = num()?,
                "vehicle.r_arm" => config.vehicle.r_arm = num()?,
                "vehicle.b_1" => config.vehicle.b_1 = num()?,
                "vehicle.b_2" => config.vehicle.b_2 = num()?,
                "vehicle.g" => config.vehicle.g = num()?,
                "c_h" => config.c_h = num()?,
                "eta" => config.eta = num()?,
                "sim.dt" => config.sim.dt = num()?,
                "sim.k_spring" => config.sim.k_spring = num()?,
                "sim.c_spring" => config.sim.c_spring = num()?,
                "sim.mu_s" => config.sim.mu_s = num()?,
                "sim.att_kp" => config.sim.att_kp = num()?,
                "sim.att_kd" => config.sim.att_kd = num()?,
                "sim.alt_kp" => config.sim.alt_kp = num()?,
                "sim.alt_kd" => config.sim.alt_kd = num()?,
                "sim.t_max_sim" => config.sim.t_max_sim = num()?,
                "sim.disturbance" => config.sim.disturbance = num()?,
                "sim.seed" => {
                    config.sim.seed = value.parse().map_err(|_| bad("invalid integer"))?
                }
                "sim.conv_window" => config.sim.conv_window = num()?,
                "sim.conv_tol" => config.sim.conv_tol = num()?,
                "sim.trace_stride" => {
                    config.sim.trace_stride = value.parse().map_err(|_| bad("invalid integer"))?
                }
                "case" => {
                    let mut it = value.split_whitespace();
                    let beta: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("expected 'case = <beta0> <phi0>'"))?;
                    let phi: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("expected 'case = <beta0> <phi0>'"))?;
                    if it.next().is_some() {
                        return Err(bad("expected exactly two angles"));
                    }
                    config.cases.push([beta, phi]);
                }
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.sim.validate()?;
        ActuationLimits::calibrate(&self.vehicle, self.c_h, self.eta)?;
        Ok(())
    }

    pub fn limits(&self) -> Result<ActuationLimits> {
        ActuationLimits::calibrate(&self.vehicle, self.c_h, self.eta)
    }
}
