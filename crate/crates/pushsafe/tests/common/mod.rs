//! Independent oracles for the integration suites.
//!
//! These deliberately avoid the library's closed forms: the equilibrium is
//! recovered by solving the planar balance equations as a linear system,
//! and zone boundaries by exhaustive scanning, so that agreement with the
//! library is meaningful.

// Each integration target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use pushsafe::VehicleParams;

/// Equilibrium recovered from the raw balance equations.
#[derive(Debug, Clone, Copy)]
pub struct OracleSolution {
    pub f_e: f64,
    pub t_sum: f64,
    pub t_in: f64,
    pub t_out: f64,
    pub tau_sum_x: f64,
}

/// Solves the planar static balance as a linear system in `(T_sum, f_e)`:
///
/// ```text
/// T_sum cos(phi0) - f_e cos(beta0) = G_t      (vertical)
/// T_sum sin(phi0) - f_e sin(beta0) = 0        (horizontal)
/// ```
///
/// then recovers the rotor torque from the moment balance about the
/// vehicle center and splits the pairs so that `2 (T_out - T_in) r` equals
/// that torque while `2 (T_in + T_out) = T_sum`.
pub fn residual_solve(beta0_deg: f64, phi0_deg: f64, p: &VehicleParams) -> OracleSolution {
    let beta = beta0_deg.to_radians();
    let phi = phi0_deg.to_radians();
    let g_t = (p.m_b + p.m_e) * p.g;

    // Cramer's rule on the 2x2 system above.
    let det = phi.cos() * (-beta.sin()) - (-beta.cos()) * phi.sin();
    let t_sum = (g_t * (-beta.sin())) / det;
    let f_e = (phi.cos() * 0.0 - g_t * phi.sin()) / det;

    let alpha = beta - phi;
    let l_ge = p.b_2 * beta.sin() + p.b_1 * phi.sin();
    let l_e = p.b_1 * alpha.sin();
    let tau_sum_x = f_e * l_e - p.m_e * p.g * l_ge;

    let half = t_sum / 2.0; // one pair-sum: T_in + T_out
    let delta = tau_sum_x / (2.0 * p.r_arm); // T_out - T_in
    OracleSolution {
        f_e,
        t_sum,
        t_in: (half - delta) / 2.0,
        t_out: (half + delta) / 2.0,
        tau_sum_x,
    }
}

/// Exhaustive boundary scan: the first roll angle, on a `step_deg` grid,
/// where the oracle's outer-pair thrust meets the threshold.
pub fn scan_boundary(
    beta0_deg: f64,
    threshold_n: f64,
    step_deg: f64,
    p: &VehicleParams,
) -> Option<f64> {
    let mut k = 0u64;
    loop {
        let phi = k as f64 * step_deg;
        if phi >= beta0_deg {
            return None;
        }
        if residual_solve(beta0_deg, phi, p).t_out >= threshold_n {
            return Some(phi);
        }
        k += 1;
    }
}
