//! Closed-form static-equilibrium force and thrust model for a planar
//! underactuated aerial manipulator pushing on an oriented surface.
//!
//! The vehicle carries a rigid link locked at joint angle `alpha0` so that
//! the link axis is normal to a work surface tilted by `beta0` from the
//! horizontal. Rolling the vehicle by `phi0` toward the surface produces a
//! normal contact force `f_e` at the end-effector tip. With negligible
//! friction the quasi-static balance of forces and torques about the
//! vehicle center of mass yields closed forms for `f_e`, the total thrust
//! and the per-pair rotor thrusts.
//!
//! All public interfaces take angles in degrees; conversion to radians
//! happens only inside this module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint angles below this magnitude are treated as singular: the closed
/// forms divide by sin(alpha0) and conditioning degrades rapidly.
pub const DEGENERACY_TOL_DEG: f64 = 0.5;

/// Masses, geometry and gravity of the aerial manipulator.
///
/// `b_1` is the distance from the vehicle center of mass to the manipulator
/// joint, `b_2` the distance from the joint to the end-effector tip, and
/// `r_arm` the propeller-center-to-CoM distance. `r_arm` is used as given
/// for the rotor torque lever, neglecting any in-plane projection of an
/// X-configuration frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Mass of the aerial vehicle [kg].
    pub m_b: f64,
    /// Mass of the manipulator [kg].
    pub m_e: f64,
    /// Propeller-center-to-CoM distance [m].
    pub r_arm: f64,
    /// CoM-to-joint length [m].
    pub b_1: f64,
    /// Joint-to-end-effector length [m].
    pub b_2: f64,
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
}

impl Default for VehicleParams {
    /// Parameters of the quadrotor-based prototype this model was
    /// calibrated on.
    fn default() -> Self {
        Self {
            m_b: 2.1,
            m_e: 0.1,
            r_arm: 0.266,
            b_1: 0.113,
            b_2: 0.593,
            g: 9.8,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("m_b", self.m_b),
            ("m_e", self.m_e),
            ("r_arm", self.r_arm),
            ("b_1", self.b_1),
            ("b_2", self.b_2),
            ("g", self.g),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Total weight of the system [N].
    pub fn total_weight(&self) -> f64 {
        (self.m_b + self.m_e) * self.g
    }
}

/// A commanded interaction condition: surface orientation `beta0` and
/// vehicle roll `phi0`, both magnitudes in degrees.
///
/// The locked joint angle follows as `alpha0 = beta0 - phi0`, which keeps
/// the end-effector axis normal to the surface. Signed inputs with matching
/// signs map onto the same magnitudes, so every downstream quantity depends
/// only on `(beta0, phi0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperationPoint {
    beta0_deg: f64,
    phi0_deg: f64,
}

impl OperationPoint {
    /// Builds an operation point from angle magnitudes.
    ///
    /// Requires `0 < beta0 <= 90` and `0 <= phi0 < beta0`. `phi0 = 0` is
    /// admitted as the well-defined zero-force limit.
    pub fn new(beta0_deg: f64, phi0_deg: f64) -> Result<Self> {
        if !beta0_deg.is_finite() || !phi0_deg.is_finite() {
            return Err(Error::InvalidOperationPoint(format!(
                "angles must be finite, got beta0={beta0_deg}, phi0={phi0_deg}"
            )));
        }
        if !(beta0_deg > 0.0 && beta0_deg <= 90.0) {
            return Err(Error::InvalidOperationPoint(format!(
                "beta0 = {beta0_deg} deg outside (0, 90]"
            )));
        }
        if !(phi0_deg >= 0.0 && phi0_deg < beta0_deg) {
            return Err(Error::InvalidOperationPoint(format!(
                "phi0 = {phi0_deg} deg outside [0, beta0 = {beta0_deg})"
            )));
        }
        Ok(Self {
            beta0_deg,
            phi0_deg,
        })
    }

    /// Builds an operation point from signed angles, which must share a
    /// sign. Flight logs express both angles as negative; only the
    /// magnitudes enter the model.
    pub fn from_signed(beta_w_deg: f64, phi_w_deg: f64) -> Result<Self> {
        if beta_w_deg * phi_w_deg < 0.0 {
            return Err(Error::InvalidOperationPoint(format!(
                "beta^w = {beta_w_deg} and phi^w = {phi_w_deg} must have the same sign"
            )));
        }
        Self::new(beta_w_deg.abs(), phi_w_deg.abs())
    }

    pub fn beta0_deg(&self) -> f64 {
        self.beta0_deg
    }

    pub fn phi0_deg(&self) -> f64 {
        self.phi0_deg
    }

    /// Locked joint angle `alpha0 = beta0 - phi0` [deg].
    pub fn alpha0_deg(&self) -> f64 {
        self.beta0_deg - self.phi0_deg
    }

    /// Errors when `alpha0` is inside the degeneracy tolerance.
    pub fn check_nondegenerate(&self) -> Result<()> {
        let alpha0_deg = self.alpha0_deg();
        if alpha0_deg < DEGENERACY_TOL_DEG {
            return Err(Error::DegenerateGeometry {
                alpha0_deg,
                tol_deg: DEGENERACY_TOL_DEG,
            });
        }
        Ok(())
    }
}

/// End-effector frame orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EEPose {
    /// Orientation of the end-effector frame w.r.t. the inertial frame [deg].
    pub phi_e_deg: f64,
}

/// Forces, thrusts and lever arms at the quasi-static equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    /// Normal contact force magnitude [N].
    pub f_e: f64,
    /// Total thrust of the four rotors [N].
    pub t_sum: f64,
    /// Per-rotor thrust of the pair nearer the surface [N].
    pub t_in: f64,
    /// Per-rotor thrust of the pair farther from the surface [N].
    pub t_out: f64,
    /// Net rotor torque about the in-plane axis [N*m].
    pub tau_sum_x: f64,
    /// Contact-force lever arm about the vehicle CoM [m].
    pub l_e: f64,
    /// Manipulator-weight lever arm about the vehicle CoM [m].
    pub l_ge: f64,
}

/// Orientation of the end-effector frame; equals `beta0` by the task
/// condition that the link axis is normal to the surface.
pub fn ee_orientation(op: OperationPoint) -> EEPose {
    EEPose {
        phi_e_deg: op.phi0_deg() + op.alpha0_deg(),
    }
}

/// Normal contact force `f_e = G_t sin(phi0) / sin(alpha0)` [N].
pub fn contact_force(op: OperationPoint, params: &VehicleParams) -> Result<f64> {
    op.check_nondegenerate()?;
    let (phi0, alpha0) = (op.phi0_deg().to_radians(), op.alpha0_deg().to_radians());
    Ok(params.total_weight() * phi0.sin() / alpha0.sin())
}

/// Analytic derivative of the contact force w.r.t. the roll angle, in
/// Newtons per degree: `d f_e / d phi0 = G_t sin(beta0) / sin^2(alpha0)`.
pub fn contact_force_dphi(op: OperationPoint, params: &VehicleParams) -> Result<f64> {
    op.check_nondegenerate()?;
    let (beta0, alpha0) = (op.beta0_deg().to_radians(), op.alpha0_deg().to_radians());
    let per_rad = params.total_weight() * beta0.sin() / (alpha0.sin() * alpha0.sin());
    Ok(per_rad * std::f64::consts::PI / 180.0)
}

/// Total thrust `T_sum = G_t sin(beta0) / sin(alpha0)` [N].
pub fn total_thrust(op: OperationPoint, params: &VehicleParams) -> Result<f64> {
    op.check_nondegenerate()?;
    let (beta0, alpha0) = (op.beta0_deg().to_radians(), op.alpha0_deg().to_radians());
    Ok(params.total_weight() * beta0.sin() / alpha0.sin())
}

/// Lever arms `(l_Ge, l_e)` of the manipulator weight and of the contact
/// force about the vehicle CoM [m].
pub fn lever_arms(op: OperationPoint, params: &VehicleParams) -> (f64, f64) {
    let beta0 = op.beta0_deg().to_radians();
    let phi0 = op.phi0_deg().to_radians();
    let alpha0 = op.alpha0_deg().to_radians();
    let l_ge = params.b_2 * beta0.sin() + params.b_1 * phi0.sin();
    let l_e = params.b_1 * alpha0.sin();
    (l_ge, l_e)
}

/// Per-rotor thrusts `(T_in, T_out)` of the two rotor pairs [N].
///
/// The split follows from the torque balance about the vehicle CoM:
/// `T_out - T_in = (f_e l_e - m_e g l_Ge) / (2 r_arm)` together with
/// `2 (T_in + T_out) = T_sum`.
pub fn rotor_pair_thrusts(op: OperationPoint, params: &VehicleParams) -> Result<(f64, f64)> {
    let (t_in, t_out) = pair_thrusts_unchecked(op, params)?;
    if t_in < 0.0 {
        return Err(Error::NegativeThrust { t_in });
    }
    Ok((t_in, t_out))
}

/// Same split without the negativity check; boundary scans in the safety
/// analysis need `T_out` past the point where `T_in` goes unphysical.
pub(crate) fn pair_thrusts_unchecked(
    op: OperationPoint,
    params: &VehicleParams,
) -> Result<(f64, f64)> {
    let t_sum = total_thrust(op, params)?;
    let f_e = contact_force(op, params)?;
    let (l_ge, l_e) = lever_arms(op, params);
    let tau_sum_x = f_e * l_e - params.m_e * params.g * l_ge;
    let half_diff = tau_sum_x / (4.0 * params.r_arm);
    Ok((t_sum / 4.0 - half_diff, t_sum / 4.0 + half_diff))
}

/// Outer-pair thrust alone [N]; the quantity that saturates first on
/// steeply oriented surfaces.
pub fn outer_pair_thrust(op: OperationPoint, params: &VehicleParams) -> Result<f64> {
    Ok(pair_thrusts_unchecked(op, params)?.1)
}

/// Full closed-form equilibrium at an operation point.
pub fn equilibrium_solution(
    op: OperationPoint,
    params: &VehicleParams,
) -> Result<EquilibriumSolution> {
    let f_e = contact_force(op, params)?;
    let t_sum = total_thrust(op, params)?;
    let (l_ge, l_e) = lever_arms(op, params);
    let (t_in, t_out) = rotor_pair_thrusts(op, params)?;
    Ok(EquilibriumSolution {
        f_e,
        t_sum,
        t_in,
        t_out,
        tau_sum_x: 2.0 * (t_out - t_in) * params.r_arm,
        l_e,
        l_ge,
    })
}

/// Signed balance residuals `(r_z, r_y, r_tau)` of a candidate solution.
///
/// Vertical: `r_z = T_sum cos(phi0) - G_t - f_e cos(beta0)`.
/// Lateral: `r_y = T_sum sin(phi0) - f_e sin(beta0)`.
/// Torque about the vehicle CoM: `r_tau = tau_sum_x + m_e g l_Ge - f_e l_e`.
///
/// All three vanish at a solution produced by this module.
pub fn equilibrium_residuals(
    op: OperationPoint,
    params: &VehicleParams,
    sol: &EquilibriumSolution,
) -> (f64, f64, f64) {
    let beta0 = op.beta0_deg().to_radians();
    let phi0 = op.phi0_deg().to_radians();
    let (l_ge, l_e) = lever_arms(op, params);
    let r_z = sol.t_sum * phi0.cos() - params.total_weight() - sol.f_e * beta0.cos();
    let r_y = sol.t_sum * phi0.sin() - sol.f_e * beta0.sin();
    let r_tau = sol.tau_sum_x + params.m_e * params.g * l_ge - sol.f_e * l_e;
    (r_z, r_y, r_tau)
}

/// One row of a prediction sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub beta0_deg: f64,
    pub phi0_deg: f64,
    pub f_e: f64,
    pub t_sum: f64,
    pub t_in: f64,
    pub t_out: f64,
}

/// Evaluates the closed forms over `phi0 in [0, beta0)` for every listed
/// surface orientation, truncating each curve at the degeneracy tolerance.
pub fn sweep_curves(
    beta_list: &[f64],
    phi_step_deg: f64,
    params: &VehicleParams,
) -> Result<Vec<SweepRow>> {
    if !(phi_step_deg > 0.0) {
        return Err(Error::InvalidOperationPoint(format!(
            "phi_step must be positive, got {phi_step_deg}"
        )));
    }
    let mut rows = Vec::new();
    for &beta0_deg in beta_list {
        let mut k = 0u64;
        loop {
            let phi0_deg = k as f64 * phi_step_deg;
            if phi0_deg >= beta0_deg - DEGENERACY_TOL_DEG {
                break;
            }
            let op = OperationPoint::new(beta0_deg, phi0_deg)?;
            let (t_in, t_out) = pair_thrusts_unchecked(op, params)?;
            rows.push(SweepRow {
                beta0_deg,
                phi0_deg,
                f_e: contact_force(op, params)?,
                t_sum: total_thrust(op, params)?,
                t_in,
                t_out,
            });
            k += 1;
        }
    }
    Ok(rows)
}
