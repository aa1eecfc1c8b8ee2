//! Planar rigid-body contact simulator.
//!
//! The vehicle plus locked manipulator is integrated as a single rigid
//! body in the `(y, z)` plane with a spring-damper contact at the
//! end-effector tip and a friction-cone bound on the tangential force.
//! Commanded thrusts come from the closed-form equilibrium feedforward
//! plus attitude and altitude regulators, clamped per rotor pair to the
//! saturation limit. The closed-form equilibrium is a fixed point of
//! these dynamics, which is what makes the simulator an independent check
//! on the static model: a converged run must settle at the predicted
//! contact force and thrust split, and an infeasible command must show up
//! as persistent saturation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, OperationPoint, VehicleParams};
use crate::safety::ActuationLimits;

/// Integration, contact and regulator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Integration step [s].
    pub dt: f64,
    /// End-effector contact spring stiffness [N/m].
    pub k_spring: f64,
    /// Contact damping [N*s/m]; also used as the tangential damping that
    /// approximates sticking friction below the cone bound.
    pub c_spring: f64,
    /// Static friction coefficient of the end-effector tip on the surface.
    pub mu_s: f64,
    /// Attitude tracking proportional gain [N*m/rad].
    pub att_kp: f64,
    /// Attitude tracking derivative gain [N*m*s/rad].
    pub att_kd: f64,
    /// Altitude regulation proportional gain [N/m].
    pub alt_kp: f64,
    /// Altitude regulation derivative gain [N*s/m].
    pub alt_kd: f64,
    /// Simulation horizon [s].
    pub t_max_sim: f64,
    /// Amplitude of uniform force noise on each axis [N]; a tenth of it is
    /// applied as torque noise [N*m]. Zero disables disturbance injection.
    pub disturbance: f64,
    /// Seed for the disturbance generator.
    pub seed: u64,
    /// Trailing window over which convergence is judged [s].
    pub conv_window: f64,
    /// State-derivative norm threshold for convergence.
    pub conv_tol: f64,
    /// Keep every n-th step in the emitted trace.
    pub trace_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            k_spring: 2000.0,
            c_spring: 50.0,
            mu_s: 0.8,
            att_kp: 30.0,
            att_kd: 6.0,
            alt_kp: 40.0,
            alt_kd: 15.0,
            t_max_sim: 10.0,
            disturbance: 0.0,
            seed: 0,
            conv_window: 1.0,
            conv_tol: 1e-3,
            trace_stride: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.k_spring > 0.0 && self.mu_s > 0.0 && self.t_max_sim > 0.0) {
            return Err(Error::Config(
                "sim config requires dt > 0, k_spring > 0, mu_s > 0 and a positive horizon".into(),
            ));
        }
        Ok(())
    }
}

/// Planar rigid-body state. Position and velocity refer to the center of
/// mass of the combined vehicle-plus-manipulator body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub y_m: f64,
    pub z_m: f64,
    pub roll_deg: f64,
    pub vy_mps: f64,
    pub vz_mps: f64,
    pub roll_rate_dps: f64,
    pub in_contact: bool,
    /// End-effector penetration into the surface [m]; zero out of contact.
    pub penetration_m: f64,
}

/// One recorded trace sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub phi_deg: f64,
    pub f_n_n: f64,
    pub f_s_n: f64,
    pub t_in_n: f64,
    pub t_out_n: f64,
    pub saturated: bool,
}

/// Outcome of a contact run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// True when the state-derivative norm stayed below the tolerance over
    /// the whole trailing window.
    pub converged: bool,
    /// Trailing-window averages of the contact forces and pair thrusts.
    pub steady_f_n: f64,
    pub steady_f_s: f64,
    pub steady_t_in: f64,
    pub steady_t_out: f64,
    /// Number of steps on which a pair thrust had to be clamped.
    pub saturation_events: u64,
    pub final_roll_deg: f64,
    pub steps: u64,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy)]
struct Vec2 {
    y: f64,
    z: f64,
}

impl Vec2 {
    fn new(y: f64, z: f64) -> Self {
        Self { y, z }
    }
    fn dot(self, o: Self) -> f64 {
        self.y * o.y + self.z * o.z
    }
    fn scale(self, s: f64) -> Self {
        Self::new(self.y * s, self.z * s)
    }
    fn add(self, o: Self) -> Self {
        Self::new(self.y + o.y, self.z + o.z)
    }
}

/// Rotates a body-frame vector `(a_y, a_z)` into the world frame for roll
/// angle `theta`: `y_B = (cos, -sin)`, `z_B = (sin, cos)`.
fn rotate(theta: f64, a: Vec2) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(a.y * c + a.z * s, -a.y * s + a.z * c)
}

/// Forces and torques evaluated at one state.
#[derive(Debug, Clone, Copy)]
struct StepForces {
    f_n: f64,
    f_s: f64,
    t_in: f64,
    t_out: f64,
    saturated: bool,
    accel: Vec2,
    roll_accel: f64,
    penetration: f64,
}

/// A configured contact run: geometry, contact plane and feedforward are
/// derived once from the operation point.
pub struct Simulation {
    op: OperationPoint,
    params: VehicleParams,
    limits: ActuationLimits,
    config: SimConfig,
    /// End-effector offset from the combined CoM, body frame.
    d_e_body: Vec2,
    /// Vehicle-CoM offset from the combined CoM, body frame.
    d_b_body: Vec2,
    total_mass: f64,
    inertia: f64,
    /// Point on the contact plane.
    plane_point: Vec2,
    /// Unit normal pointing from the surface toward the robot.
    normal: Vec2,
    /// Up-slope tangential unit vector.
    tangent: Vec2,
    /// Closed-form equilibrium used as feedforward.
    feedforward: model::EquilibriumSolution,
    roll_ref_rad: f64,
    z_ref: f64,
    rng: ChaCha8Rng,
}

impl Simulation {
    /// Sets up a run for one operation point. The contact plane is placed
    /// so that the closed-form equilibrium has its CoM at the origin; the
    /// incipient-contact start state then sits one spring deflection
    /// outside of it.
    pub fn new(
        op: OperationPoint,
        params: &VehicleParams,
        limits: &ActuationLimits,
        config: &SimConfig,
    ) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        op.check_nondegenerate()?;
        let beta = op.beta0_deg().to_radians();
        let phi = op.phi0_deg().to_radians();
        let alpha = op.alpha0_deg().to_radians();

        let total_mass = params.m_b + params.m_e;
        // Manipulator treated as a point mass at the end-effector tip,
        // consistent with the closed-form lever arm l_Ge.
        let p_e_body = Vec2::new(
            params.b_2 * alpha.sin(),
            params.b_1 + params.b_2 * alpha.cos(),
        );
        let d_e_body = p_e_body.scale(params.m_b / total_mass);
        let d_b_body = p_e_body.scale(-params.m_e / total_mass);
        // Vehicle modeled as a ring of rotor masses for its own inertia.
        let inertia = params.m_b * params.r_arm * params.r_arm / 2.0
            + params.m_b * d_b_body.dot(d_b_body)
            + params.m_e * d_e_body.dot(d_e_body);

        let feedforward = model::equilibrium_solution(op, params)?;
        let normal = Vec2::new(-beta.sin(), -beta.cos());
        let tangent = Vec2::new(-beta.cos(), beta.sin());
        let penetration_eq = feedforward.f_e / config.k_spring;
        let ee_eq = rotate(phi, d_e_body);
        let plane_point = ee_eq.add(normal.scale(penetration_eq));

        Ok(Self {
            op,
            params: *params,
            limits: *limits,
            config: *config,
            d_e_body,
            d_b_body,
            total_mass,
            inertia,
            plane_point,
            normal,
            tangent,
            feedforward,
            roll_ref_rad: phi,
            z_ref: 0.0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    pub fn op(&self) -> OperationPoint {
        self.op
    }

    pub fn predicted(&self) -> &model::EquilibriumSolution {
        &self.feedforward
    }

    /// State with the end-effector exactly on the surface, the roll at its
    /// reference and zero velocity.
    pub fn incipient_contact_state(&self) -> SimState {
        let offset = self.normal.scale(self.feedforward.f_e / self.config.k_spring);
        SimState {
            y_m: offset.y,
            z_m: offset.z,
            roll_deg: self.op.phi0_deg(),
            vy_mps: 0.0,
            vz_mps: 0.0,
            roll_rate_dps: 0.0,
            in_contact: true,
            penetration_m: 0.0,
        }
    }

    /// The closed-form equilibrium state with the spring deflection
    /// pre-solved, `penetration = f_e / k_spring`.
    pub fn equilibrium_state(&self) -> SimState {
        SimState {
            y_m: 0.0,
            z_m: 0.0,
            roll_deg: self.op.phi0_deg(),
            vy_mps: 0.0,
            vz_mps: 0.0,
            roll_rate_dps: 0.0,
            in_contact: true,
            penetration_m: self.feedforward.f_e / self.config.k_spring,
        }
    }

    fn forces(&mut self, state: &SimState) -> StepForces {
        let theta = state.roll_deg.to_radians();
        let omega = state.roll_rate_dps.to_radians();
        let com = Vec2::new(state.y_m, state.z_m);
        let vel = Vec2::new(state.vy_mps, state.vz_mps);

        let w_e = rotate(theta, self.d_e_body);
        let w_b = rotate(theta, self.d_b_body);
        let p_ee = com.add(w_e);
        // Point velocity of a body-fixed offset w under roll rate omega.
        let v_ee = vel.add(Vec2::new(w_e.z, -w_e.y).scale(omega));

        // Spring-damper contact with a one-sided normal force.
        let penetration = self.plane_point.add(p_ee.scale(-1.0)).dot(self.normal);
        let (f_n, f_s) = if penetration > 0.0 {
            let rate = -v_ee.dot(self.normal);
            let f_n = (self.config.k_spring * penetration + self.config.c_spring * rate).max(0.0);
            let v_t = v_ee.dot(self.tangent);
            let bound = self.config.mu_s * f_n;
            let f_s = (-self.config.c_spring * v_t).clamp(-bound, bound);
            (f_n, f_s)
        } else {
            (0.0, 0.0)
        };

        // Feedforward plus PD regulators; torque command is in the
        // roll-increasing sense, tau_cmd = 2 (T_out - T_in) r_arm.
        let cos_theta = theta.cos().max(0.2);
        let t_cmd = self.feedforward.t_sum
            + (self.config.alt_kp * (self.z_ref - state.z_m) - self.config.alt_kd * state.vz_mps)
                / cos_theta;
        let tau_cmd = self.feedforward.tau_sum_x
            + self.config.att_kp * (self.roll_ref_rad - theta)
            - self.config.att_kd * omega;

        let t_out_cmd = t_cmd / 4.0 + tau_cmd / (4.0 * self.params.r_arm);
        let t_in_cmd = t_cmd / 4.0 - tau_cmd / (4.0 * self.params.r_arm);
        let t_out = t_out_cmd.clamp(0.0, self.limits.t_max);
        let t_in = t_in_cmd.clamp(0.0, self.limits.t_max);
        let saturated =
            (t_out - t_out_cmd).abs() > 1e-12 || (t_in - t_in_cmd).abs() > 1e-12;
        let t_act = 2.0 * (t_in + t_out);
        let tau_act = 2.0 * (t_out - t_in) * self.params.r_arm;

        let thrust_dir = Vec2::new(theta.sin(), theta.cos());
        let f_thrust = thrust_dir.scale(t_act);
        let f_contact = self.normal.scale(f_n).add(self.tangent.scale(f_s));
        let mut force = f_thrust
            .add(f_contact)
            .add(Vec2::new(0.0, -self.total_mass * self.params.g));
        // Torque in the roll-increasing sense of a force F at offset w:
        // F_y w_z - F_z w_y.
        let mut torque = tau_act + (f_thrust.y * w_b.z - f_thrust.z * w_b.y)
            + (f_contact.y * w_e.z - f_contact.z * w_e.y);

        if self.config.disturbance > 0.0 {
            let a = self.config.disturbance;
            force = force.add(Vec2::new(
                self.rng.gen_range(-a..=a),
                self.rng.gen_range(-a..=a),
            ));
            torque += self.rng.gen_range(-0.1 * a..=0.1 * a);
        }

        StepForces {
            f_n,
            f_s,
            t_in,
            t_out,
            saturated,
            accel: force.scale(1.0 / self.total_mass),
            roll_accel: torque / self.inertia,
            penetration: penetration.max(0.0),
        }
    }

    /// Advances one semi-implicit Euler step.
    pub fn step(&mut self, state: &SimState) -> Result<SimState> {
        let f = self.forces(state);
        let dt = self.config.dt;
        let omega = state.roll_rate_dps.to_radians() + f.roll_accel * dt;
        let next = SimState {
            vy_mps: state.vy_mps + f.accel.y * dt,
            vz_mps: state.vz_mps + f.accel.z * dt,
            y_m: state.y_m + (state.vy_mps + f.accel.y * dt) * dt,
            z_m: state.z_m + (state.vz_mps + f.accel.z * dt) * dt,
            roll_rate_dps: omega.to_degrees(),
            roll_deg: state.roll_deg + omega.to_degrees() * dt,
            in_contact: f.penetration > 0.0,
            penetration_m: f.penetration,
        };
        if !next.y_m.is_finite()
            || !next.z_m.is_finite()
            || next.y_m.abs() > 1e4
            || next.z_m.abs() > 1e4
            || next.vy_mps.abs() > 1e4
            || next.vz_mps.abs() > 1e4
        {
            return Err(Error::NumericalBlowup { t: 0.0 });
        }
        Ok(next)
    }

    /// Norm of the full state derivative at a state; near zero only at a
    /// fixed point of the closed loop.
    pub fn derivative_norm(&mut self, state: &SimState) -> f64 {
        let f = self.forces(state);
        let omega = state.roll_rate_dps.to_radians();
        (state.vy_mps * state.vy_mps
            + state.vz_mps * state.vz_mps
            + omega * omega
            + f.accel.y * f.accel.y
            + f.accel.z * f.accel.z
            + f.roll_accel * f.roll_accel)
            .sqrt()
    }
}

/// Runs from incipient contact until the state settles or the horizon is
/// exhausted. Horizon exhaustion is reported as `converged = false`, not
/// as an error.
pub fn run_to_equilibrium(
    op: OperationPoint,
    params: &VehicleParams,
    limits: &ActuationLimits,
    config: &SimConfig,
) -> Result<SimResult> {
    let mut sim = Simulation::new(op, params, limits, config)?;
    let mut state = sim.incipient_contact_state();
    let dt = config.dt;
    let window = (config.conv_window / dt).ceil() as usize;
    let total_steps = (config.t_max_sim / dt).ceil() as u64;
    let stride = config.trace_stride.max(1);

    let mut norms: Vec<f64> = Vec::with_capacity(window + 1);
    let mut recent: Vec<(f64, f64, f64, f64)> = Vec::new(); // f_n, f_s, t_in, t_out
    let mut trace = Vec::new();
    let mut saturation_events = 0u64;
    let mut converged = false;
    let mut steps = 0u64;

    for i in 0..total_steps {
        let t = i as f64 * dt;
        let f = sim.forces(&state);
        if f.saturated {
            saturation_events += 1;
        }
        if i as usize % stride == 0 {
            trace.push(TraceRow {
                t_s: t,
                y_m: state.y_m,
                z_m: state.z_m,
                phi_deg: state.roll_deg,
                f_n_n: f.f_n,
                f_s_n: f.f_s,
                t_in_n: f.t_in,
                t_out_n: f.t_out,
                saturated: f.saturated,
            });
        }
        let omega = state.roll_rate_dps.to_radians();
        let norm = (state.vy_mps * state.vy_mps
            + state.vz_mps * state.vz_mps
            + omega * omega
            + f.accel.y * f.accel.y
            + f.accel.z * f.accel.z
            + f.roll_accel * f.roll_accel)
            .sqrt();
        norms.push(norm);
        if norms.len() > window {
            norms.remove(0);
        }
        recent.push((f.f_n, f.f_s, f.t_in, f.t_out));
        if recent.len() > window {
            recent.remove(0);
        }

        state = sim.step(&state).map_err(|e| match e {
            Error::NumericalBlowup { .. } => Error::NumericalBlowup { t },
            other => other,
        })?;
        steps = i + 1;

        if norms.len() == window && norms.iter().all(|&n| n < config.conv_tol) {
            converged = true;
            break;
        }
    }

    let n = recent.len().max(1) as f64;
    let (mut f_n, mut f_s, mut t_in, mut t_out) = (0.0, 0.0, 0.0, 0.0);
    for &(a, b, c, d) in &recent {
        f_n += a;
        f_s += b;
        t_in += c;
        t_out += d;
    }
    Ok(SimResult {
        converged,
        steady_f_n: f_n / n,
        steady_f_s: f_s / n,
        steady_t_in: t_in / n,
        steady_t_out: t_out / n,
        saturation_events,
        final_roll_deg: state.roll_deg,
        steps,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup() -> (VehicleParams, ActuationLimits, SimConfig) {
        let params = VehicleParams::default();
        let limits = ActuationLimits::default_for(&params);
        (params, limits, SimConfig::default())
    }

    #[test]
    fn ballistic_fall_with_zero_thrust() {
        let (params, _, config) = setup();
        // A zero per-rotor limit clamps every command to zero thrust.
        let limits = ActuationLimits {
            c_h: 0.61,
            eta: 0.7,
            t_sum_max: 0.0,
            t_max: 0.0,
        };
        let op = OperationPoint::new(60.0, 5.0).unwrap();
        let mut sim = Simulation::new(op, &params, &limits, &config).unwrap();
        // Start far from the surface so no contact occurs.
        let mut state = sim.incipient_contact_state();
        state.z_m -= 5.0;
        state.y_m -= 5.0;
        let s1 = sim.step(&state).unwrap();
        let az = (s1.vz_mps - state.vz_mps) / config.dt;
        assert_relative_eq!(az, -params.g, max_relative = 1e-9);
        let ay = (s1.vy_mps - state.vy_mps) / config.dt;
        assert!(ay.abs() < 1e-9);
    }

    #[test]
    fn free_fall_energy_non_increasing() {
        let (params, _, config) = setup();
        let limits = ActuationLimits {
            c_h: 0.61,
            eta: 0.7,
            t_sum_max: 0.0,
            t_max: 0.0,
        };
        let op = OperationPoint::new(60.0, 5.0).unwrap();
        let mut sim = Simulation::new(op, &params, &limits, &config).unwrap();
        let mut state = sim.incipient_contact_state();
        state.z_m -= 50.0;
        state.y_m -= 50.0;
        let m = params.m_b + params.m_e;
        let energy = |s: &SimState| {
            0.5 * m * (s.vy_mps * s.vy_mps + s.vz_mps * s.vz_mps) + m * params.g * s.z_m
        };
        let mut prev = energy(&state);
        for _ in 0..500 {
            state = sim.step(&state).unwrap();
            let e = energy(&state);
            assert!(e <= prev + 1e-9, "energy increased: {prev} -> {e}");
            prev = e;
        }
    }

    #[test]
    fn hover_without_contact_settles_at_weight() {
        let (params, limits, config) = setup();
        let op = OperationPoint::new(60.0, 0.0).unwrap();
        let mut sim = Simulation::new(op, &params, &limits, &config).unwrap();
        // Move the whole body away from the plane; zero roll reference
        // with f_e = 0 is plain hover.
        let mut state = sim.incipient_contact_state();
        state.roll_deg = 0.0;
        state.y_m -= 3.0;
        sim.roll_ref_rad = 0.0;
        sim.z_ref = state.z_m;
        for _ in 0..6000 {
            state = sim.step(&state).unwrap();
        }
        let f = sim.forces(&state);
        let t_sum = 2.0 * (f.t_in + f.t_out);
        assert_relative_eq!(t_sum, params.total_weight(), max_relative = 1e-3);
        assert!(!state.in_contact);
    }

    #[test]
    fn fixed_point_has_vanishing_derivative() {
        let (params, limits, config) = setup();
        for (b, p) in [(90.0, 5.0), (60.0, 7.0), (30.0, 3.0), (10.0, 1.0)] {
            let op = OperationPoint::new(b, p).unwrap();
            let mut sim = Simulation::new(op, &params, &limits, &config).unwrap();
            let eq = sim.equilibrium_state();
            let norm = sim.derivative_norm(&eq);
            assert!(norm < 1e-6, "derivative norm {norm} at ({b}, {p})");
        }
    }

    #[test]
    fn safe_zone_run_converges_to_prediction() {
        let (params, limits, config) = setup();
        let op = OperationPoint::new(90.0, 5.0).unwrap();
        let result = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        assert!(result.converged);
        assert_eq!(result.saturation_events, 0);
        let f_e = model::contact_force(op, &params).unwrap();
        assert!((result.steady_f_n - f_e).abs() / f_e < 0.02);
        assert!((result.final_roll_deg - 5.0).abs() < 0.1);
    }

    #[test]
    fn zero_roll_run_has_zero_force() {
        let (params, limits, config) = setup();
        let op = OperationPoint::new(45.0, 0.0).unwrap();
        let result = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        assert!(result.converged);
        assert!(result.steady_f_n.abs() < 0.05);
    }

    #[test]
    fn failure_zone_run_saturates() {
        let (params, limits, config) = setup();
        let op = OperationPoint::new(90.0, 60.0).unwrap();
        let result = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        assert!(result.saturation_events > 0);
        assert!(
            !result.converged || (result.final_roll_deg - 60.0).abs() > 0.5,
            "failure-zone run must not settle at the commanded attitude"
        );
    }

    #[test]
    fn friction_cone_respected_throughout() {
        let (params, limits, config) = setup();
        let op = OperationPoint::new(60.0, 7.0).unwrap();
        let result = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        for row in &result.trace {
            assert!(
                row.f_s_n.abs() <= config.mu_s * row.f_n_n + 1e-9,
                "cone violated at t={}",
                row.t_s
            );
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (params, limits, mut config) = setup();
        config.disturbance = 0.3;
        config.seed = 42;
        config.t_max_sim = 2.0;
        let op = OperationPoint::new(80.0, 6.0).unwrap();
        let a = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        let b = run_to_equilibrium(op, &params, &limits, &config).unwrap();
        assert_eq!(a, b);
    }
}
