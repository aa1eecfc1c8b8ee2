//! Saturation calibration, interaction-zone identification and risk
//! scoring.
//!
//! The outer rotor pair reaches saturation first on steep surfaces, so the
//! zone boundaries are defined on the predicted `T_out` alone: the safe
//! zone ends where `T_out` crosses `eta * T_max`, the critical zone where
//! it crosses `T_max`. Inside the critical zone a deterministic risk ratio
//! `lambda = phi0 / phi_u` grades how close an operation sits to the
//! failure boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, OperationPoint, VehicleParams, DEGENERACY_TOL_DEG};

/// Thrust tolerance for boundary root finding [N].
const BOUNDARY_TOL_N: f64 = 1e-6;

/// Step used by the monotonicity precheck [deg].
const PRECHECK_STEP_DEG: f64 = 0.05;

/// Actuator saturation levels calibrated from the hover thrust ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuationLimits {
    /// Hover thrust ratio `T_hover / T_sum_max`, in (0, 1).
    pub c_h: f64,
    /// Safety factor applied to the per-rotor saturation, in (0, 0.9].
    pub eta: f64,
    /// Total thrust saturation `G_t / C_h` [N].
    pub t_sum_max: f64,
    /// Per-rotor saturation `T_sum_max / 4` [N].
    pub t_max: f64,
}

impl ActuationLimits {
    /// Calibrates saturation from hover data: during hover the total
    /// thrust equals the weight `G_t`, so `T_sum_max = G_t / C_h` and each
    /// of the four rotors saturates at a quarter of that.
    pub fn calibrate(params: &VehicleParams, c_h: f64, eta: f64) -> Result<Self> {
        if !(c_h > 0.0 && c_h < 1.0) {
            return Err(Error::InvalidLimits(format!(
                "hover ratio C_h = {c_h} outside (0, 1)"
            )));
        }
        if !(eta > 0.0 && eta <= 0.9) {
            return Err(Error::InvalidLimits(format!(
                "safety factor eta = {eta} outside (0, 0.9]"
            )));
        }
        let t_sum_max = params.total_weight() / c_h;
        Ok(Self {
            c_h,
            eta,
            t_sum_max,
            t_max: t_sum_max / 4.0,
        })
    }

    /// Calibration with the prototype's measured hover ratio and the
    /// safety factor used throughout the zone tables.
    pub fn default_for(params: &VehicleParams) -> Self {
        Self::calibrate(params, 0.61, 0.7).expect("default limits are in range")
    }
}

/// Safety classification of one operation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assessment {
    /// `T_out <= eta * T_max`: every rotor stays below the derated limit.
    Safe,
    /// `eta * T_max < T_out <= T_max`: feasible but near saturation.
    Critical { lambda: f64 },
    /// `T_out > T_max`: the commanded equilibrium is infeasible.
    Failure,
}

/// Which upper boundary feeds the risk ratio of a critical assessment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskConvention {
    /// The continuous root of `T_out = T_max`.
    Continuous,
    /// The integer-degree convention used by published zone tables:
    /// `phi_u = floor(phi_crit_hi)`.
    IntegerTable,
}

/// Zone boundaries for one surface orientation, both as continuous roots
/// and in the integer-degree table convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneBoundaries {
    pub beta0_deg: f64,
    /// Continuous safe upper bound: `T_out(beta0, phi) = eta * T_max` [deg].
    pub phi_safe_hi_deg: f64,
    /// Continuous critical upper bound `phi_u`: `T_out(beta0, phi) = T_max` [deg].
    pub phi_crit_hi_deg: f64,
    pub table_safe_hi: u32,
    pub table_crit_lo: u32,
    pub table_crit_hi: u32,
}

/// Zone boundaries published from the prototype's flight-test assessment,
/// as integer degrees `(beta0, safe_hi, crit_lo, crit_hi)`.
///
/// These are reference data for side-by-side comparison; they are not
/// exactly regenerated by the closed forms with the default parameters,
/// and the deviation is reported rather than hidden.
pub const REFERENCE_ZONES: [(f64, u32, u32, u32); 5] = [
    (10.0, 1, 2, 4),
    (30.0, 3, 4, 10),
    (60.0, 7, 8, 21),
    (80.0, 10, 11, 29),
    (90.0, 12, 13, 34),
];

/// Looks up the published reference boundaries for a surface orientation.
pub fn reference_zone(beta0_deg: f64) -> Option<(u32, u32, u32)> {
    REFERENCE_ZONES
        .iter()
        .find(|(b, _, _, _)| (b - beta0_deg).abs() < 1e-9)
        .map(|&(_, s, cl, ch)| (s, cl, ch))
}

/// Finds the roll angle where the predicted `T_out` crosses a thrust
/// threshold, by bisection after a dense monotonicity precheck.
///
/// Returns 0 when the threshold is already met at `phi0 = 0`. Errors with
/// `NotBracketed` when `T_out` stays below the threshold everywhere under
/// the degeneracy tolerance.
pub fn thrust_boundary(beta0_deg: f64, threshold_n: f64, params: &VehicleParams) -> Result<f64> {
    let t_out_at = |phi: f64| -> Result<f64> {
        model::outer_pair_thrust(OperationPoint::new(beta0_deg, phi)?, params)
    };

    if t_out_at(0.0)? >= threshold_n {
        return Ok(0.0);
    }
    let hi = beta0_deg - DEGENERACY_TOL_DEG;
    if hi <= 0.0 || t_out_at(hi)? < threshold_n {
        return Err(Error::NotBracketed {
            beta0_deg,
            threshold_n,
        });
    }

    // Monotone increase of T_out in phi0 is what makes the bisection
    // bracket valid; check it on a dense grid first.
    let mut prev = t_out_at(0.0)?;
    let mut phi = PRECHECK_STEP_DEG;
    while phi < hi {
        let cur = t_out_at(phi)?;
        if cur <= prev {
            return Err(Error::NonMonotone { beta0_deg });
        }
        prev = cur;
        phi += PRECHECK_STEP_DEG;
    }

    let (mut lo, mut hi) = (0.0, hi);
    loop {
        let mid = 0.5 * (lo + hi);
        let f = t_out_at(mid)? - threshold_n;
        if f.abs() <= BOUNDARY_TOL_N || (hi - lo) < 1e-13 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Classifies an operation point against the saturation limits, using the
/// continuous critical boundary for the risk ratio.
pub fn classify(
    beta0_deg: f64,
    phi0_deg: f64,
    params: &VehicleParams,
    limits: &ActuationLimits,
) -> Result<Assessment> {
    classify_with(
        beta0_deg,
        phi0_deg,
        params,
        limits,
        RiskConvention::Continuous,
    )
}

/// Classification with an explicit risk convention.
pub fn classify_with(
    beta0_deg: f64,
    phi0_deg: f64,
    params: &VehicleParams,
    limits: &ActuationLimits,
    convention: RiskConvention,
) -> Result<Assessment> {
    let op = OperationPoint::new(beta0_deg, phi0_deg)?;
    op.check_nondegenerate()?;
    let t_out = model::outer_pair_thrust(op, params)?;
    if t_out <= limits.eta * limits.t_max {
        return Ok(Assessment::Safe);
    }
    if t_out > limits.t_max {
        return Ok(Assessment::Failure);
    }
    let phi_u = thrust_boundary(beta0_deg, limits.t_max, params)?;
    let phi_u = match convention {
        RiskConvention::Continuous => phi_u,
        RiskConvention::IntegerTable => phi_u.floor(),
    };
    Ok(Assessment::Critical {
        lambda: risk(phi0_deg, phi_u)?,
    })
}

/// Risk ratio `lambda = phi0 / phi_u` of a critical operation.
pub fn risk(phi0_deg: f64, phi_u_deg: f64) -> Result<f64> {
    if !(phi_u_deg > 0.0) || phi0_deg < 0.0 {
        return Err(Error::InvalidOperationPoint(format!(
            "risk requires 0 <= phi0 and phi_u > 0, got phi0={phi0_deg}, phi_u={phi_u_deg}"
        )));
    }
    if phi0_deg > phi_u_deg {
        return Err(Error::RiskOutOfRange {
            phi0_deg,
            phi_u_deg,
        });
    }
    Ok(phi0_deg / phi_u_deg)
}

/// Computes the zone boundaries for each listed surface orientation.
///
/// Integer-degree convention: `table_safe_hi = floor(phi_safe_hi)`,
/// `table_crit_lo = table_safe_hi + 1`, `table_crit_hi = floor(phi_crit_hi)`.
pub fn zone_table(
    beta_list: &[f64],
    params: &VehicleParams,
    limits: &ActuationLimits,
) -> Result<Vec<ZoneBoundaries>> {
    beta_list
        .iter()
        .map(|&beta0_deg| {
            let phi_safe_hi_deg = thrust_boundary(beta0_deg, limits.eta * limits.t_max, params)?;
            let phi_crit_hi_deg = thrust_boundary(beta0_deg, limits.t_max, params)?;
            let table_safe_hi = phi_safe_hi_deg.floor() as u32;
            Ok(ZoneBoundaries {
                beta0_deg,
                phi_safe_hi_deg,
                phi_crit_hi_deg,
                table_safe_hi,
                table_crit_lo: table_safe_hi + 1,
                table_crit_hi: phi_crit_hi_deg.floor() as u32,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn setup() -> (VehicleParams, ActuationLimits) {
        let params = VehicleParams::default();
        let limits = ActuationLimits::default_for(&params);
        (params, limits)
    }

    #[test]
    fn calibration_reproduces_hover_estimate() {
        let (_, limits) = setup();
        // Published estimates: T_sum_max = 35.2 N, T_max = 8.8 N.
        assert!((limits.t_sum_max - 35.2).abs() / 35.2 < 0.01);
        assert!((limits.t_max - 8.8).abs() / 8.8 < 0.01);
        assert_relative_eq!(limits.t_sum_max, 35.34426229508197, max_relative = 1e-12);
    }

    #[test]
    fn calibration_rejects_out_of_range() {
        let p = VehicleParams::default();
        assert!(ActuationLimits::calibrate(&p, 1.0, 0.7).is_err());
        assert!(ActuationLimits::calibrate(&p, 0.0, 0.7).is_err());
        assert!(ActuationLimits::calibrate(&p, 0.61, 0.0).is_err());
        assert!(ActuationLimits::calibrate(&p, 0.61, 0.95).is_err());
    }

    #[test]
    fn calibration_exact_division() {
        let mut p = VehicleParams::default();
        // G_t = 20 N
        p.m_b = 20.0 / 9.8 - 0.1;
        let limits = ActuationLimits::calibrate(&p, 0.5, 0.7).unwrap();
        assert_relative_eq!(limits.t_sum_max, 40.0, max_relative = 1e-12);
        assert_relative_eq!(limits.t_max, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn boundary_at_lower_bracket_is_zero() {
        let (params, _) = setup();
        let op = OperationPoint::new(60.0, 0.0).unwrap();
        let t0 = model::outer_pair_thrust(op, &params).unwrap();
        assert_eq!(thrust_boundary(60.0, t0, &params).unwrap(), 0.0);
    }

    #[test]
    fn boundary_hits_threshold_within_tolerance() {
        let (params, limits) = setup();
        for (beta0, threshold) in [
            (90.0, limits.eta * limits.t_max),
            (10.0, limits.t_max),
            (60.0, limits.t_max),
        ] {
            let phi = thrust_boundary(beta0, threshold, &params).unwrap();
            assert!(phi > 0.0 && phi < beta0);
            let t_out = model::outer_pair_thrust(
                OperationPoint::new(beta0, phi).unwrap(),
                &params,
            )
            .unwrap();
            assert!((t_out - threshold).abs() <= 1e-6, "residual {}", t_out - threshold);
        }
    }

    #[test]
    fn boundary_not_bracketed() {
        let (params, _) = setup();
        assert!(matches!(
            thrust_boundary(10.0, 1e4, &params),
            Err(Error::NotBracketed { .. })
        ));
    }

    #[test]
    fn classify_partitions_domain() {
        let (params, limits) = setup();
        let zones = zone_table(&[60.0], &params, &limits).unwrap();
        let z = &zones[0];
        let mut phi = 0.0;
        while phi < 60.0 - DEGENERACY_TOL_DEG {
            let a = classify(60.0, phi, &params, &limits).unwrap();
            let expected_safe = phi <= z.phi_safe_hi_deg;
            let expected_failure = phi > z.phi_crit_hi_deg;
            match a {
                Assessment::Safe => assert!(expected_safe, "phi={phi}"),
                Assessment::Failure => assert!(expected_failure, "phi={phi}"),
                Assessment::Critical { lambda } => {
                    assert!(!expected_safe && !expected_failure, "phi={phi}");
                    assert!(lambda > 0.0 && lambda <= 1.0);
                }
            }
            phi += 0.25;
        }
    }

    #[test]
    fn classify_known_points() {
        let (params, limits) = setup();
        assert_eq!(
            classify(90.0, 5.0, &params, &limits).unwrap(),
            Assessment::Safe
        );
        // Zero roll is safe across the grid with the default limits.
        for b in [5.0, 10.0, 30.0, 60.0, 80.0, 90.0] {
            assert_eq!(
                classify(b, 0.0, &params, &limits).unwrap(),
                Assessment::Safe,
                "beta0={b}"
            );
        }
        // (60, 15) sits in the critical zone; the continuous boundary is
        // phi_u = 26.0137 deg (frozen from the scan oracle).
        match classify(60.0, 15.0, &params, &limits).unwrap() {
            Assessment::Critical { lambda } => {
                assert_relative_eq!(lambda, 15.0 / 26.013660658059404, max_relative = 1e-6);
            }
            other => panic!("expected critical, got {other:?}"),
        }
    }

    #[test]
    fn risk_examples() {
        assert_abs_diff_eq!(risk(15.0, 21.0).unwrap(), 0.7142857142857143);
        assert_abs_diff_eq!(risk(21.0, 21.0).unwrap(), 1.0);
        assert_abs_diff_eq!(risk(10.5, 21.0).unwrap(), 0.5);
        assert!(matches!(
            risk(22.0, 21.0),
            Err(Error::RiskOutOfRange { .. })
        ));
    }

    #[test]
    fn risk_depends_only_on_ratio() {
        for c in [0.5, 2.0, 7.3] {
            assert_relative_eq!(
                risk(15.0 * c, 21.0 * c).unwrap(),
                risk(15.0, 21.0).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn zone_table_conventions_and_growth() {
        let (params, limits) = setup();
        let betas = [10.0, 30.0, 60.0, 80.0, 90.0];
        let zones = zone_table(&betas, &params, &limits).unwrap();
        assert_eq!(zones.len(), 5);
        for z in &zones {
            assert_eq!(z.table_crit_lo, z.table_safe_hi + 1);
            assert!(z.phi_safe_hi_deg <= z.phi_crit_hi_deg);
            assert!(z.phi_crit_hi_deg < z.beta0_deg);
        }
        // Boundaries widen with the surface angle.
        for w in zones.windows(2) {
            assert!(w[1].phi_safe_hi_deg >= w[0].phi_safe_hi_deg);
            assert!(w[1].phi_crit_hi_deg >= w[0].phi_crit_hi_deg);
        }
        assert!(zone_table(&[], &params, &limits).unwrap().is_empty());
    }

    #[test]
    fn monotone_safety_on_grid() {
        let (params, limits) = setup();
        let mut seen_unsafe = false;
        let mut phi = 0.0;
        while phi < 80.0 - DEGENERACY_TOL_DEG {
            let safe = matches!(
                classify(80.0, phi, &params, &limits).unwrap(),
                Assessment::Safe
            );
            if !safe {
                seen_unsafe = true;
            }
            assert!(!(safe && seen_unsafe), "safe point above an unsafe one at phi={phi}");
            phi += 0.1;
        }
    }
}
