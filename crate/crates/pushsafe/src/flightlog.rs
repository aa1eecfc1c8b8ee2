//! Flight-log ingestion and measured-vs-predicted force comparison.
//!
//! Logs are CSV with `# key=value` metadata lines for the surface angle
//! and the roll reference, followed by a header row. Two header shapes are
//! accepted: plain logs (`t_s,phi_meas_deg,f_meas_N`) and simulator traces
//! (`t_s,y_m,z_m,phi_deg,f_n_N,...`), whose roll and normal-force columns
//! are mapped onto the measured quantities.
//!
//! Logged angles may carry the inertial-frame sign convention in which
//! both the surface angle and the roll are negative; the loader normalizes
//! everything to magnitudes, matching the model's symmetric treatment.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{self, OperationPoint, VehicleParams, DEGENERACY_TOL_DEG};

pub const LOG_HEADER: &str = "t_s,phi_meas_deg,f_meas_N";
pub const TRACE_HEADER: &str = "t_s,y_m,z_m,phi_deg,f_n_N,f_s_N,T_in_N,T_out_N,saturated_flag";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t_s: f64,
    pub phi_meas_deg: f64,
    pub f_meas_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub beta0_deg: f64,
    pub phi_ref_deg: f64,
    pub rows: Vec<LogRow>,
}

/// Measured-vs-predicted force error statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValidation {
    /// Prediction from the commanded `(beta0, phi_ref)`.
    pub f_e_pred: f64,
    /// Errors of the measured force against the constant prediction.
    pub mean_abs_err: f64,
    pub max_abs_err: f64,
    /// Error of the trailing-window mean against the prediction.
    pub steady_err: f64,
    /// Errors against the pointwise prediction from the measured roll.
    pub pointwise_mean_abs_err: f64,
    pub pointwise_max_abs_err: f64,
}

impl FlightLog {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::LogParse {
            path: source.to_string(),
            line,
            msg,
        };
        let mut beta0: Option<f64> = None;
        let mut phi_ref: Option<f64> = None;
        let mut header: Option<(usize, Vec<String>)> = None;
        let mut rows = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| err(lineno, format!("invalid metadata value '{}'", v.trim())))?;
                    match k.trim() {
                        "beta0_deg" => beta0 = Some(v),
                        "phi_ref_deg" => phi_ref = Some(v),
                        _ => {}
                    }
                }
                continue;
            }
            match &header {
                None => {
                    header = Some((lineno, line.split(',').map(|s| s.trim().to_string()).collect()));
                }
                Some((hline, cols)) => {
                    let fields: Vec<&str> = line.split(',').collect();
                    if fields.len() != cols.len() {
                        return Err(err(
                            lineno,
                            format!("expected {} fields, got {}", cols.len(), fields.len()),
                        ));
                    }
                    let get = |name: &str| -> Result<f64> {
                        let idx = cols.iter().position(|c| c == name).ok_or_else(|| {
                            err(*hline, format!("missing column '{name}' in header"))
                        })?;
                        let v: f64 = fields[idx]
                            .trim()
                            .parse()
                            .map_err(|_| err(lineno, format!("invalid number '{}'", fields[idx])))?;
                        if !v.is_finite() {
                            return Err(err(lineno, format!("non-finite value in column '{name}'")));
                        }
                        Ok(v)
                    };
                    let row = if cols.iter().any(|c| c == "phi_meas_deg") {
                        LogRow {
                            t_s: get("t_s")?,
                            phi_meas_deg: get("phi_meas_deg")?,
                            f_meas_n: get("f_meas_N")?,
                        }
                    } else {
                        LogRow {
                            t_s: get("t_s")?,
                            phi_meas_deg: get("phi_deg")?,
                            f_meas_n: get("f_n_N")?,
                        }
                    };
                    if let Some(prev) = rows.last() {
                        let prev: &LogRow = prev;
                        if row.t_s <= prev.t_s {
                            return Err(err(lineno, "timestamps must be strictly increasing".into()));
                        }
                    }
                    rows.push(row);
                }
            }
        }

        let beta0 =
            beta0.ok_or_else(|| err(1, "missing '# beta0_deg=...' metadata line".into()))?;
        let phi_ref =
            phi_ref.ok_or_else(|| err(1, "missing '# phi_ref_deg=...' metadata line".into()))?;
        if rows.is_empty() {
            return Err(err(1, "log contains no data rows".into()));
        }
        // Normalize the inertial-frame sign convention to magnitudes.
        let op = OperationPoint::from_signed(beta0, phi_ref)
            .map_err(|e| err(1, e.to_string()))?;
        let rows = rows
            .into_iter()
            .map(|r| LogRow {
                phi_meas_deg: r.phi_meas_deg.abs(),
                ..r
            })
            .collect();
        Ok(Self {
            beta0_deg: op.beta0_deg(),
            phi_ref_deg: op.phi0_deg(),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# beta0_deg={}\n", self.beta0_deg));
        out.push_str(&format!("# phi_ref_deg={}\n", self.phi_ref_deg));
        out.push_str(LOG_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{:.6},{:.6},{:.6}\n", r.t_s, r.phi_meas_deg, r.f_meas_n));
        }
        out
    }
}

/// Compares the logged force against the static-model prediction.
///
/// The steady-state error is taken over the trailing fifth of the samples.
pub fn validate_log(log: &FlightLog, params: &VehicleParams) -> Result<LogValidation> {
    let op = OperationPoint::new(log.beta0_deg, log.phi_ref_deg)?;
    let f_e_pred = model::contact_force(op, params)?;

    let mut mean_abs_err = 0.0;
    let mut max_abs_err: f64 = 0.0;
    let mut pw_sum = 0.0;
    let mut pw_max: f64 = 0.0;
    let mut pw_count = 0usize;
    for r in &log.rows {
        let e = (r.f_meas_n - f_e_pred).abs();
        mean_abs_err += e;
        max_abs_err = max_abs_err.max(e);
        // Pointwise prediction from the measured roll, where it is inside
        // the model's validity range.
        if r.phi_meas_deg >= 0.0 && r.phi_meas_deg < log.beta0_deg - DEGENERACY_TOL_DEG {
            let op_meas = OperationPoint::new(log.beta0_deg, r.phi_meas_deg)?;
            let pred = model::contact_force(op_meas, params)?;
            let pe = (r.f_meas_n - pred).abs();
            pw_sum += pe;
            pw_max = pw_max.max(pe);
            pw_count += 1;
        }
    }
    mean_abs_err /= log.rows.len() as f64;

    let tail = (log.rows.len() / 5).max(1);
    let steady_mean = log.rows[log.rows.len() - tail..]
        .iter()
        .map(|r| r.f_meas_n)
        .sum::<f64>()
        / tail as f64;

    Ok(LogValidation {
        f_e_pred,
        mean_abs_err,
        max_abs_err,
        steady_err: (steady_mean - f_e_pred).abs(),
        pointwise_mean_abs_err: if pw_count > 0 { pw_sum / pw_count as f64 } else { f64::NAN },
        pointwise_max_abs_err: if pw_count > 0 { pw_max } else { f64::NAN },
    })
}
