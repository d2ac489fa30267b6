//! Truncated dynamics on SO(3) and its reduction to a Jellet level.
//!
//! Dropping the translational velocities from the friction moments leaves a
//! three-degree-of-freedom system whose (phi, psi) block carries a cyclic
//! combination. The coordinate change
//!
//! ```text
//! (theta, phi, psi) -> (theta, phibar = eps phi + R psi, c = R phi - eps psi)
//! ```
//!
//! makes that combination a coordinate `c` with conserved momentum
//! J / (eps^2 + R^2) and zero friction moment, so the motion restricts to a
//! two-degree-of-freedom system in (theta, phibar) at fixed Jellet J. The
//! velocity-linear part of the restricted Lagrangian is treated as a
//! gyroscopic force so the reduced vector field is well defined on the whole
//! open interval theta in (0, pi).

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DynamicsError, FullState, POLE_GUARD_MIN};
use crate::model::TopParams;

/// Point of the reduced phase space: tilt, tilt rate, and the rate of the
/// combined angle phibar = eps phi + R psi, on the Jellet level `jellet`.
/// phibar itself never enters the vector field (residual symmetry), so it is
/// not part of the state. `jellet` is a parameter of the flow, hence exactly
/// constant along reduced trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub theta: f64,
    pub thetadot: f64,
    pub phibardot: f64,
    pub jellet: f64,
}

/// Time derivative of a [`ReducedState`] (the Jellet level has none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDeriv {
    pub thetadot: f64,
    pub thetaddot: f64,
    pub phibarddot: f64,
}

/// SO(3) part of a full state: the truncated system evolves only these six
/// coordinates; the translation is replayed afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TruncatedState {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub thetadot: f64,
    pub phidot: f64,
    pub psidot: f64,
}

impl TruncatedState {
    pub fn from_full(s: &FullState) -> Self {
        TruncatedState {
            theta: s.theta,
            phi: s.phi,
            psi: s.psi,
            thetadot: s.thetadot,
            phidot: s.phidot,
            psidot: s.psidot,
        }
    }

    /// Embeds back into the full chart with the translation frozen at zero.
    pub fn to_full(&self) -> FullState {
        FullState {
            theta: self.theta,
            phi: self.phi,
            psi: self.psi,
            thetadot: self.thetadot,
            phidot: self.phidot,
            psidot: self.psidot,
            ..Default::default()
        }
    }

    pub(crate) fn to_array(self) -> [f64; 6] {
        [
            self.theta,
            self.phi,
            self.psi,
            self.thetadot,
            self.phidot,
            self.psidot,
        ]
    }

    pub(crate) fn from_array(a: [f64; 6]) -> Self {
        TruncatedState {
            theta: a[0],
            phi: a[1],
            psi: a[2],
            thetadot: a[3],
            phidot: a[4],
            psidot: a[5],
        }
    }
}

/// Friction moments of the truncated system in (theta, phi, psi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedForces {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Coefficients of the reduced Lagrangian at one configuration:
/// kinetic part `1/2 (inertia_theta thetadot^2 + inertia_phibar phibardot^2)`,
/// gyroscopic part `gyro_coeff * phibardot`, and the effective potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthianPieces {
    /// Generalized inertia of the tilt, eps^2 m sin^2(theta) + A.
    pub inertia_theta: f64,
    /// Generalized inertia of phibar, A C sin^2(theta) / D(theta).
    pub inertia_phibar: f64,
    /// Coefficient of phibardot in the velocity-linear (gyroscopic) term.
    pub gyro_coeff: f64,
    /// Effective potential W(theta) on the Jellet level.
    pub potential: f64,
}

impl RouthianPieces {
    /// Value of the reduced Lagrangian at the given rates.
    pub fn routhian(&self, thetadot: f64, phibardot: f64) -> f64 {
        self.kinetic(thetadot, phibardot) + self.gyro_coeff * phibardot - self.potential
    }

    /// Quadratic kinetic energy of the reduced system.
    pub fn kinetic(&self, thetadot: f64, phibardot: f64) -> f64 {
        0.5 * (self.inertia_theta * thetadot * thetadot
            + self.inertia_phibar * phibardot * phibardot)
    }
}

/// D(theta) = R^2 A sin^2(theta) + C (R cos(theta) - eps)^2, the inertia-like
/// denominator of the Jellet momentum relation. Strictly positive on [0, pi]:
/// where the first term vanishes the second is (R -+ eps)^2 > 0.
pub fn jellet_inertia(params: &TopParams, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let r = params.radius;
    params.inertia_transverse * r * r * st * st
        + params.inertia_axial * (r * ct - params.eccentricity) * (r * ct - params.eccentricity)
}

/// dD/dtheta = sin(theta) * d1(theta) with d1 as below; the explicit sin
/// factor is kept separate so pole limits cancel algebraically.
pub(crate) fn jellet_inertia_d(params: &TopParams, theta: f64) -> f64 {
    theta.sin() * jellet_inertia_d_reduced(params, theta)
}

/// d1(theta) = 2R (R A cos(theta) - C (R cos(theta) - eps)).
pub(crate) fn jellet_inertia_d_reduced(params: &TopParams, theta: f64) -> f64 {
    let ct = theta.cos();
    let r = params.radius;
    2.0 * r
        * (r * params.inertia_transverse * ct
            - params.inertia_axial * (r * ct - params.eccentricity))
}

pub(crate) fn jellet_inertia_dd(params: &TopParams, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let r = params.radius;
    ct * jellet_inertia_d_reduced(params, theta)
        + 2.0 * r * r * st * st * (params.inertia_axial - params.inertia_transverse)
}

/// N(theta) = R eps A sin^2(theta) + C (R + eps cos(theta)) (R cos(theta) - eps),
/// the cross coefficient mixing phibardot into the Jellet momentum.
pub(crate) fn momentum_cross_coeff(params: &TopParams, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let r = params.radius;
    let eps = params.eccentricity;
    r * eps * params.inertia_transverse * st * st
        + params.inertia_axial * (r + eps * ct) * (r * ct - eps)
}

/// dN/dtheta = sin(theta) * n1(theta).
pub(crate) fn momentum_cross_coeff_d_reduced(params: &TopParams, theta: f64) -> f64 {
    let ct = theta.cos();
    let r = params.radius;
    let eps = params.eccentricity;
    2.0 * r * eps * ct * (params.inertia_transverse - params.inertia_axial)
        + params.inertia_axial * (eps * eps - r * r)
}

/// Rate of the dropped coordinate c on the Jellet level, eliminated from the
/// conserved momentum dL'/dcdot = J / (eps^2 + R^2).
pub fn cdot(params: &TopParams, state: &ReducedState) -> f64 {
    let r2e2 = params.radius * params.radius + params.eccentricity * params.eccentricity;
    (state.jellet * r2e2 - momentum_cross_coeff(params, state.theta) * state.phibardot)
        / jellet_inertia(params, state.theta)
}

/// Projects a full state onto the reduced chart, carrying its Jellet level.
pub fn to_reduced(params: &TopParams, state: &FullState) -> ReducedState {
    ReducedState {
        theta: state.theta,
        thetadot: state.thetadot,
        phibardot: params.eccentricity * state.phidot + params.radius * state.psidot,
        jellet: dynamics::jellet(params, state),
    }
}

/// Recovers (phidot, psidot) from the reduced rates by inverting the linear
/// coordinate change, with cdot eliminated via the Jellet level.
pub fn reconstruct_velocities(params: &TopParams, state: &ReducedState) -> (f64, f64) {
    let r = params.radius;
    let eps = params.eccentricity;
    let r2e2 = r * r + eps * eps;
    let cd = cdot(params, state);
    (
        (eps * state.phibardot + r * cd) / r2e2,
        (r * state.phibardot - eps * cd) / r2e2,
    )
}

/// Effective potential W(theta) = J^2 / (2 D(theta)) - m g eps cos(theta)
/// of the reduced system on the Jellet level `jellet`.
pub fn effective_potential(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    0.5 * jellet * jellet / jellet_inertia(params, theta)
        - params.mass * params.gravity * params.eccentricity * theta.cos()
}

/// dW/dtheta; its zeros in (0, pi) are the intermediate steady states.
pub fn effective_potential_d(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    let d = jellet_inertia(params, theta);
    -0.5 * jellet * jellet * jellet_inertia_d(params, theta) / (d * d)
        + params.mass * params.gravity * params.eccentricity * theta.sin()
}

/// d2W/dtheta2; its sign at a steady state decides linear stability.
pub fn effective_potential_dd(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    let d = jellet_inertia(params, theta);
    let d1 = jellet_inertia_d(params, theta);
    let d2 = jellet_inertia_dd(params, theta);
    -0.5 * jellet * jellet * (d2 * d - 2.0 * d1 * d1) / (d * d * d)
        + params.mass * params.gravity * params.eccentricity * theta.cos()
}

/// Coefficient K(theta) of phibardot in the gyroscopic term: J / (R^2 + eps^2)
/// times N(theta) / D(theta).
pub(crate) fn gyro_coupling(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    let r2e2 = params.radius * params.radius + params.eccentricity * params.eccentricity;
    jellet / r2e2 * momentum_cross_coeff(params, theta) / jellet_inertia(params, theta)
}

/// dK/dtheta = sin(theta) * [J / (R^2+eps^2)] * G(theta) / D(theta)^2 with
/// G = n1 D - d1 N; the sin factor is explicit for clean pole limits.
pub(crate) fn gyro_coupling_d(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    theta.sin() * gyro_coupling_d_reduced(params, jellet, theta)
}

pub(crate) fn gyro_coupling_d_reduced(params: &TopParams, jellet: f64, theta: f64) -> f64 {
    let r2e2 = params.radius * params.radius + params.eccentricity * params.eccentricity;
    let d = jellet_inertia(params, theta);
    let g_fun = momentum_cross_coeff_d_reduced(params, theta) * d
        - jellet_inertia_d_reduced(params, theta) * momentum_cross_coeff(params, theta);
    jellet / r2e2 * g_fun / (d * d)
}

/// Generalized inertia of the tilt coordinate, eps^2 m sin^2(theta) + A.
pub fn inertia_theta(params: &TopParams, theta: f64) -> f64 {
    let st = theta.sin();
    params.eccentricity * params.eccentricity * params.mass * st * st + params.inertia_transverse
}

pub(crate) fn inertia_theta_d(params: &TopParams, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    2.0 * params.eccentricity * params.eccentricity * params.mass * st * ct
}

/// Generalized inertia of phibar, A C sin^2(theta) / D(theta). Vanishes like
/// sin^2 at the poles, which is exactly the reduced chart singularity.
pub fn inertia_phibar(params: &TopParams, theta: f64) -> f64 {
    let st = theta.sin();
    params.inertia_transverse * params.inertia_axial * st * st / jellet_inertia(params, theta)
}

pub(crate) fn inertia_phibar_d(params: &TopParams, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let d = jellet_inertia(params, theta);
    params.inertia_transverse
        * params.inertia_axial
        * st
        * (2.0 * ct * d - st * st * jellet_inertia_d_reduced(params, theta))
        / (d * d)
}

/// All reduced-Lagrangian coefficients at the state's configuration.
pub fn routhian_pieces(params: &TopParams, state: &ReducedState) -> RouthianPieces {
    RouthianPieces {
        inertia_theta: inertia_theta(params, state.theta),
        inertia_phibar: inertia_phibar(params, state.theta),
        gyro_coeff: gyro_coupling(params, state.jellet, state.theta),
        potential: effective_potential(params, state.jellet, state.theta),
    }
}

/// Reduced energy T2 + W; non-increasing along reduced trajectories (the
/// gyroscopic term does no work).
pub fn reduced_energy(params: &TopParams, state: &ReducedState) -> f64 {
    let pieces = routhian_pieces(params, state);
    pieces.kinetic(state.thetadot, state.phibardot) + pieces.potential
}

/// Normal reaction of the truncated model: the full expression evaluated
/// with the translational velocities removed.
pub fn truncated_normal_reaction(
    params: &TopParams,
    theta: f64,
    thetadot: f64,
    phidot: f64,
    psidot: f64,
) -> Result<f64, DynamicsError> {
    dynamics::normal_reaction(
        params,
        &FullState {
            theta,
            thetadot,
            phidot,
            psidot,
            ..Default::default()
        },
    )
}

/// Restricts a full state to SO(3) and evaluates the truncated friction
/// moments (all xdot/ydot terms dropped, reaction taken at zero translation).
pub fn truncate(
    params: &TopParams,
    state: &FullState,
) -> Result<(TruncatedState, TruncatedForces), DynamicsError> {
    let t = TruncatedState::from_full(state);
    let rn = truncated_normal_reaction(params, t.theta, t.thetadot, t.phidot, t.psidot)?;
    Ok((t, truncated_forces_given_rn(params, &t, rn)))
}

fn truncated_forces_given_rn(params: &TopParams, t: &TruncatedState, rn: f64) -> TruncatedForces {
    let (st, ct) = t.theta.sin_cos();
    let mu_rn = params.friction * rn;
    let r = params.radius;
    let eps = params.eccentricity;
    let h = r - eps * ct;
    let combined = eps * t.phidot + r * t.psidot;
    TruncatedForces {
        theta: -mu_rn * h * h * t.thetadot,
        phi: -mu_rn * eps * st * st * combined,
        psi: -mu_rn * r * st * st * combined,
    }
}

/// Right-hand side of the truncated three-degree-of-freedom system: the
/// rotational Euler-Lagrange block driven by the truncated friction moments.
pub fn truncated_rhs(
    params: &TopParams,
    t: &TruncatedState,
) -> Result<TruncatedState, DynamicsError> {
    let (st, ct) = t.theta.sin_cos();
    if st.abs() < POLE_GUARD_MIN {
        return Err(DynamicsError::ChartSingularity { sin_theta: st });
    }
    let rn = truncated_normal_reaction(params, t.theta, t.thetadot, t.phidot, t.psidot)?;
    let q = truncated_forces_given_rn(params, t, rn);

    let m = params.mass;
    let a = params.inertia_transverse;
    let c = params.inertia_axial;
    let eps = params.eccentricity;
    let n = t.psidot + t.phidot * ct;
    let (td, pd) = (t.thetadot, t.phidot);

    let m_theta = eps * eps * m * st * st + a;
    let thetaddot = (q.theta - eps * eps * m * st * ct * td * td + a * st * ct * pd * pd
        - c * n * st * pd
        - m * params.gravity * eps * st)
        / m_theta;

    // 2x2 block in (phi, psi).
    let a11 = a * st * st + c * ct * ct;
    let a12 = c * ct;
    let b1 = q.phi - 2.0 * a * st * ct * td * pd + c * st * td * n + c * ct * st * pd * td;
    let b2 = q.psi + c * st * pd * td;
    let det = a11 * c - a12 * a12; // = A C sin^2(theta)
    let phiddot = (b1 * c - a12 * b2) / det;
    let psiddot = (a11 * b2 - a12 * b1) / det;

    Ok(TruncatedState {
        theta: t.thetadot,
        phi: t.phidot,
        psi: t.psidot,
        thetadot: thetaddot,
        phidot: phiddot,
        psidot: psiddot,
    })
}

/// Reduced equations of motion at fixed Jellet level: two second-order
/// equations in (theta, phibar) with the gyroscopic coupling K'(theta) and
/// the truncated friction moments on the right-hand side.
pub fn reduced_rhs(
    params: &TopParams,
    state: &ReducedState,
) -> Result<ReducedDeriv, DynamicsError> {
    let (st, ct) = state.theta.sin_cos();
    if st.abs() < POLE_GUARD_MIN {
        return Err(DynamicsError::ChartSingularity { sin_theta: st });
    }
    let (phidot, psidot) = reconstruct_velocities(params, state);
    let rn = truncated_normal_reaction(params, state.theta, state.thetadot, phidot, psidot)?;

    let m_th = inertia_theta(params, state.theta);
    let m_th_d = inertia_theta_d(params, state.theta);
    let m_pb = inertia_phibar(params, state.theta);
    let m_pb_d = inertia_phibar_d(params, state.theta);
    let k_d = gyro_coupling_d(params, state.jellet, state.theta);
    let w_d = effective_potential_d(params, state.jellet, state.theta);
    let mu_rn = params.friction * rn;
    let h = params.radius - params.eccentricity * ct;

    let td = state.thetadot;
    let pbd = state.phibardot;
    let thetaddot =
        (-0.5 * m_th_d * td * td + 0.5 * m_pb_d * pbd * pbd + k_d * pbd - w_d - mu_rn * h * h * td)
            / m_th;
    let phibarddot = (-m_pb_d * td * pbd - k_d * td - mu_rn * st * st * pbd) / m_pb;

    Ok(ReducedDeriv {
        thetadot: td,
        thetaddot,
        phibarddot,
    })
}

/// One sample of an angular trajectory, dense enough for cubic Hermite
/// interpolation between neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSample {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub thetadot: f64,
    pub phidot: f64,
    pub psidot: f64,
}

/// Center-of-mass translation state along a replayed trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
}

/// Cubic Hermite value and derivative on [t0, t1] from endpoint values and
/// endpoint derivatives.
pub(crate) fn hermite(t0: f64, y0: f64, m0: f64, t1: f64, y1: f64, m1: f64, t: f64) -> (f64, f64) {
    let dt = t1 - t0;
    let s = (t - t0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * dt * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * dt * m1;
    let deriv = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * dt * m0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * dt * m1)
        / dt;
    (value, deriv)
}

fn interp_angles(lo: &AngularSample, hi: &AngularSample, t: f64) -> AngularSample {
    let (theta, thetadot) = hermite(lo.t, lo.theta, lo.thetadot, hi.t, hi.theta, hi.thetadot, t);
    let (phi, phidot) = hermite(lo.t, lo.phi, lo.phidot, hi.t, hi.phi, hi.phidot, t);
    let (psi, psidot) = hermite(lo.t, lo.psi, lo.psidot, hi.t, hi.psi, hi.psidot, t);
    AngularSample {
        t,
        theta,
        phi,
        psi,
        thetadot,
        phidot,
        psidot,
    }
}

/// Replays the translational motion driven by a given angular trajectory:
/// integrates m xddot = Qx, m yddot = Qy, which are decoupled and linear in
/// (xdot, ydot) once the reaction is taken at zero translation. Returns the
/// center-of-mass path at the sample times.
pub fn replay_translation(
    params: &TopParams,
    samples: &[AngularSample],
    x0: f64,
    y0: f64,
    xdot0: f64,
    ydot0: f64,
) -> Result<Vec<TranslationSample>, DynamicsError> {
    const SUBSTEPS: usize = 4;
    assert!(samples.len() >= 2, "need at least two angular samples");

    // Acceleration field at an interpolated angular configuration.
    let accel = |ang: &AngularSample, xdot: f64, ydot: f64| -> Result<(f64, f64), DynamicsError> {
        let rn =
            truncated_normal_reaction(params, ang.theta, ang.thetadot, ang.phidot, ang.psidot)?;
        let (st, ct) = ang.theta.sin_cos();
        let (sp, cp) = ang.phi.sin_cos();
        let h = params.radius - params.eccentricity * ct;
        let u = st * (params.radius * ang.psidot + params.eccentricity * ang.phidot);
        let k = params.friction * rn / params.mass;
        Ok((
            -k * (xdot - sp * ang.thetadot * h + cp * u),
            -k * (ydot + cp * ang.thetadot * h + sp * u),
        ))
    };

    let mut out = Vec::with_capacity(samples.len());
    let mut state = [x0, y0, xdot0, ydot0];
    out.push(TranslationSample {
        t: samples[0].t,
        x: state[0],
        y: state[1],
        xdot: state[2],
        ydot: state[3],
    });
    for pair in samples.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let h_step = (hi.t - lo.t) / SUBSTEPS as f64;
        for k in 0..SUBSTEPS {
            let t = lo.t + k as f64 * h_step;
            let deriv = |tau: f64, s: &[f64; 4]| -> Result<[f64; 4], DynamicsError> {
                let ang = interp_angles(lo, hi, tau);
                let (ax, ay) = accel(&ang, s[2], s[3])?;
                Ok([s[2], s[3], ax, ay])
            };
            // Classic RK4 on the interpolated forcing.
            let k1 = deriv(t, &state)?;
            let mid1 = add_scaled(&state, &k1, 0.5 * h_step);
            let k2 = deriv(t + 0.5 * h_step, &mid1)?;
            let mid2 = add_scaled(&state, &k2, 0.5 * h_step);
            let k3 = deriv(t + 0.5 * h_step, &mid2)?;
            let end = add_scaled(&state, &k3, h_step);
            let k4 = deriv(t + h_step, &end)?;
            for i in 0..4 {
                state[i] += h_step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        out.push(TranslationSample {
            t: hi.t,
            x: state[0],
            y: state[1],
            xdot: state[2],
            ydot: state[3],
        });
    }
    Ok(out)
}

fn add_scaled(y: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    let mut out = *y;
    for i in 0..4 {
        out[i] += h * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn demo() -> TopParams {
        TopParams::new(0.015, 0.025, 0.005, 2.2e-6, 2.0e-6, 0.1, 9.81).unwrap()
    }

    fn generic_full() -> FullState {
        FullState {
            theta: 1.1,
            phi: 0.4,
            psi: -0.8,
            thetadot: 0.6,
            phidot: 7.0,
            psidot: 35.0,
            ..Default::default()
        }
    }

    /// The transformed Lagrangian L'(theta, thetadot, phibardot, cdot)
    /// expanded term by term; the independent reference for the tests below.
    fn lagrangian_bar(p: &TopParams, theta: f64, td: f64, pbd: f64, cd: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let (r, eps) = (p.radius, p.eccentricity);
        let r2e2 = r * r + eps * eps;
        let m_theta = eps * eps * p.mass * st * st + p.inertia_transverse;
        0.5 * (m_theta * td * td
            + p.inertia_transverse * st * st * (eps * pbd + r * cd).powi(2) / (r2e2 * r2e2)
            + p.inertia_axial * ((r + eps * ct) * pbd + (r * ct - eps) * cd).powi(2)
                / (r2e2 * r2e2))
            - p.mass * p.gravity * (r - eps * ct)
    }

    #[test]
    fn truncation_matches_full_moments_at_zero_translation() {
        let p = demo();
        let s = generic_full(); // xdot = ydot = 0 already
        let (_, q) = truncate(&p, &s).unwrap();
        let full = dynamics::friction_moments(&p, &s).unwrap();
        assert!((q.theta - full.theta).abs() < 1e-18 + 1e-12 * full.theta.abs());
        assert!((q.phi - full.phi).abs() < 1e-18 + 1e-12 * full.phi.abs());
        assert!((q.psi - full.psi).abs() < 1e-18 + 1e-12 * full.psi.abs());
    }

    #[test]
    fn truncated_moments_vanish_without_friction() {
        let mut p = demo();
        p.friction = 0.0;
        let (_, q) = truncate(&p, &generic_full()).unwrap();
        assert_eq!((q.theta, q.phi, q.psi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn truncated_moment_ratio_is_eps_over_r() {
        let p = demo();
        let (_, q) = truncate(&p, &generic_full()).unwrap();
        let ratio = q.phi / q.psi;
        assert!((ratio - p.eccentricity / p.radius).abs() < 1e-12);
    }

    #[test]
    fn coordinate_change_reference_directions() {
        let p = demo();
        let mut s = FullState::at_rest(0.9);
        s.phidot = 1.0;
        assert!((to_reduced(&p, &s).phibardot - p.eccentricity).abs() < 1e-18);
        let mut s = FullState::at_rest(0.9);
        s.psidot = 1.0;
        assert!((to_reduced(&p, &s).phibardot - p.radius).abs() < 1e-18);
    }

    #[test]
    fn reconstruction_round_trip() {
        let p = demo();
        let s = generic_full();
        let r = to_reduced(&p, &s);
        let (phidot, psidot) = reconstruct_velocities(&p, &r);
        assert!((phidot - s.phidot).abs() < 1e-12);
        assert!((psidot - s.psidot).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_of_unit_rates() {
        let p = demo();
        // (phidot, psidot) = (1, 0) maps to phibardot = eps with cdot = R on
        // its own Jellet level, and back.
        for (phid, psid) in [(1.0, 0.0), (0.0, 1.0)] {
            let full = FullState {
                theta: 0.9,
                phidot: phid,
                psidot: psid,
                ..Default::default()
            };
            let red = to_reduced(&p, &full);
            let (phir, psir) = reconstruct_velocities(&p, &red);
            assert!((phir - phid).abs() < 1e-13, "{phir} vs {phid}");
            assert!((psir - psid).abs() < 1e-13, "{psir} vs {psid}");
        }
    }

    #[test]
    fn cdot_reference_values() {
        let p = demo();
        // J = 0 and phibardot = 0: nothing moves the dropped coordinate.
        let r = ReducedState {
            theta: 1.3,
            ..Default::default()
        };
        assert_eq!(cdot(&p, &r), 0.0);
        // theta = pi/2, phibardot = 0.
        let j = 2.5e-6;
        let r = ReducedState {
            theta: FRAC_PI_2,
            jellet: j,
            ..Default::default()
        };
        let expect = j * (p.eccentricity * p.eccentricity + p.radius * p.radius)
            / (p.radius * p.radius * p.inertia_transverse
                + p.inertia_axial * p.eccentricity * p.eccentricity);
        assert!((cdot(&p, &r) - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn cdot_restores_the_conserved_momentum() {
        let p = demo();
        let s = generic_full();
        let red = to_reduced(&p, &s);
        let cd = cdot(&p, &red);
        // Central difference of the reference L' with respect to cdot.
        let dc = 1e-4;
        let momentum = (lagrangian_bar(&p, red.theta, red.thetadot, red.phibardot, cd + dc)
            - lagrangian_bar(&p, red.theta, red.thetadot, red.phibardot, cd - dc))
            / (2.0 * dc);
        let expect = red.jellet / (p.radius * p.radius + p.eccentricity * p.eccentricity);
        assert!(
            (momentum - expect).abs() < 1e-9 * expect.abs().max(1e-9),
            "momentum {momentum} vs {expect}"
        );
    }

    #[test]
    fn routhian_matches_lagrangian_minus_momentum_term() {
        let p = demo();
        let s = generic_full();
        let red = to_reduced(&p, &s);
        let pieces = routhian_pieces(&p, &red);
        let cd = cdot(&p, &red);
        let r2e2 = p.radius * p.radius + p.eccentricity * p.eccentricity;
        // The pieces absorb the constant -m g R into the dropped reference
        // level of W, so add it back on the Lagrangian side.
        let reference = lagrangian_bar(&p, red.theta, red.thetadot, red.phibardot, cd)
            - red.jellet * cd / r2e2
            + p.mass * p.gravity * p.radius;
        let value = pieces.routhian(red.thetadot, red.phibardot);
        assert!(
            (value - reference).abs() < 1e-10 * reference.abs().max(1e-12),
            "routhian {value} vs {reference}"
        );
    }

    #[test]
    fn potential_reference_values() {
        let p = demo();
        // J = 0: pure gravity well with minimum at theta = 0.
        for theta in [0.2, 1.0, 2.7] {
            let w = effective_potential(&p, 0.0, theta);
            assert!((w + p.mass * p.gravity * p.eccentricity * theta.cos()).abs() < 1e-18);
        }
        // Closed-form phibar inertia at theta = pi/2.
        let r = ReducedState {
            theta: FRAC_PI_2,
            jellet: 1e-6,
            ..Default::default()
        };
        let pieces = routhian_pieces(&p, &r);
        let expect = p.inertia_transverse * p.inertia_axial
            / (p.radius * p.radius * p.inertia_transverse
                + p.inertia_axial * p.eccentricity * p.eccentricity);
        assert!((pieces.inertia_phibar - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn potential_derivatives_match_finite_differences() {
        let p = demo();
        let j = 3.0e-6;
        let dth = 1e-5;
        for k in 1..40 {
            let th = PI * k as f64 / 40.0;
            let wd_fd = (effective_potential(&p, j, th + dth)
                - effective_potential(&p, j, th - dth))
                / (2.0 * dth);
            let wdd_fd = (effective_potential_d(&p, j, th + dth)
                - effective_potential_d(&p, j, th - dth))
                / (2.0 * dth);
            let scale = p.mass * p.gravity * p.eccentricity;
            assert!(
                (wd_fd - effective_potential_d(&p, j, th)).abs() < 1e-6 * scale,
                "W' at {th}"
            );
            assert!(
                (wdd_fd - effective_potential_dd(&p, j, th)).abs() < 1e-6 * scale * 10.0,
                "W'' at {th}"
            );
        }
    }

    #[test]
    fn gyro_coupling_derivative_matches_finite_differences() {
        let p = demo();
        let j = 3.0e-6;
        let dth = 1e-5;
        for k in 1..40 {
            let th = PI * k as f64 / 40.0;
            let fd =
                (gyro_coupling(&p, j, th + dth) - gyro_coupling(&p, j, th - dth)) / (2.0 * dth);
            let analytic = gyro_coupling_d(&p, j, th);
            assert!(
                (fd - analytic).abs() < 1e-6 * (analytic.abs() + j),
                "K' at {th}: fd {fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn inertia_derivatives_match_finite_differences() {
        let p = demo();
        let dth = 1e-5;
        for k in 1..40 {
            let th = PI * k as f64 / 40.0;
            let fd_th = (inertia_theta(&p, th + dth) - inertia_theta(&p, th - dth)) / (2.0 * dth);
            assert!((fd_th - inertia_theta_d(&p, th)).abs() < 1e-6 * p.inertia_transverse);
            let fd_pb = (inertia_phibar(&p, th + dth) - inertia_phibar(&p, th - dth)) / (2.0 * dth);
            assert!(
                (fd_pb - inertia_phibar_d(&p, th)).abs() < 1e-6 * inertia_phibar(&p, FRAC_PI_2),
                "at {th}"
            );
        }
    }

    #[test]
    fn reduced_rhs_vanishes_at_critical_points() {
        // theta0 with dW/dtheta = 0 at phibardot = 0 must be a fixed point.
        let p = demo();
        // Choose a tilt, then the Jellet level that makes it critical:
        // J^2 = m g eps D^2 / (R^2 C [(A/C-1) cos + eps/R]) via the f-form.
        let theta0: f64 = 1.05;
        let ratios = p.ratios();
        let ct = theta0.cos();
        let pfac = (ratios.inertia_ratio - 1.0) * ct + ratios.eccentricity_ratio;
        assert!(pfac > 0.0);
        let d = jellet_inertia(&p, theta0);
        let jsq = p.mass * p.gravity * p.eccentricity * d * d
            / (p.radius * p.radius * p.inertia_axial * pfac);
        let state = ReducedState {
            theta: theta0,
            thetadot: 0.0,
            phibardot: 0.0,
            jellet: jsq.sqrt(),
        };
        assert!(
            effective_potential_d(&p, state.jellet, theta0).abs()
                < 1e-9 * p.mass * p.gravity * p.eccentricity
        );
        let deriv = reduced_rhs(&p, &state).unwrap();
        assert!(deriv.thetaddot.abs() < 1e-9, "{}", deriv.thetaddot);
        assert!(deriv.phibarddot.abs() < 1e-12, "{}", deriv.phibarddot);
    }

    #[test]
    fn reduced_rhs_is_a_pendulum_at_zero_jellet() {
        let mut p = demo();
        p.friction = 0.0;
        let state = ReducedState {
            theta: 0.8,
            thetadot: 0.35,
            phibardot: 0.0,
            jellet: 0.0,
        };
        let deriv = reduced_rhs(&p, &state).unwrap();
        // Only the -W' restoring term and the inertia gradient survive.
        let m_th = inertia_theta(&p, state.theta);
        let expect = (-0.5 * inertia_theta_d(&p, state.theta) * state.thetadot.powi(2)
            - p.mass * p.gravity * p.eccentricity * state.theta.sin())
            / m_th;
        assert!((deriv.thetaddot - expect).abs() < 1e-12 * expect.abs());
        assert!(deriv.phibarddot.abs() < 1e-15);
    }

    #[test]
    fn reduced_rhs_matches_truncated_dynamics() {
        // The reduced vector field must reproduce the truncated one after the
        // coordinate change, state for state.
        let p = demo();
        for (theta, td, phid, psid) in [
            (0.7, 0.4, 6.0, 30.0),
            (1.4, -0.9, -3.0, 55.0),
            (2.3, 0.1, 12.0, -20.0),
            (2.9, -0.2, 2.0, 10.0),
        ] {
            let full = FullState {
                theta,
                thetadot: td,
                phidot: phid,
                psidot: psid,
                ..Default::default()
            };
            let red = to_reduced(&p, &full);
            let rd = reduced_rhs(&p, &red).unwrap();
            let tr = truncated_rhs(&p, &TruncatedState::from_full(&full)).unwrap();
            let phibarddot_ref = p.eccentricity * tr.phidot + p.radius * tr.psidot;
            let scale_t = tr.thetadot.abs().max(1.0);
            let scale_p = phibarddot_ref.abs().max(1.0);
            assert!(
                (rd.thetaddot - tr.thetadot).abs() < 1e-8 * scale_t,
                "thetaddot at {theta}: {} vs {}",
                rd.thetaddot,
                tr.thetadot
            );
            assert!(
                (rd.phibarddot - phibarddot_ref).abs() < 1e-8 * scale_p,
                "phibarddot at {theta}: {} vs {phibarddot_ref}",
                rd.phibarddot
            );
        }
    }

    #[test]
    fn reconstructed_state_keeps_its_jellet() {
        let p = demo();
        let red = ReducedState {
            theta: 1.9,
            thetadot: 0.3,
            phibardot: 0.02,
            jellet: -4.0e-6,
        };
        let (phidot, psidot) = reconstruct_velocities(&p, &red);
        let full = FullState {
            theta: red.theta,
            thetadot: red.thetadot,
            phidot,
            psidot,
            ..Default::default()
        };
        let j = dynamics::jellet(&p, &full);
        assert!((j - red.jellet).abs() < 1e-12 * red.jellet.abs());
    }

    #[test]
    fn replay_decays_at_a_relative_equilibrium() {
        let p = demo();
        // Steady rolling state: zero forcing, so xdot obeys pure viscous
        // decay at rate mu g (the reaction is the weight there).
        let theta: f64 = 1.2;
        let j = crate::equilibria::branch_jsq(&p, theta.cos())
            .unwrap()
            .sqrt();
        let d = jellet_inertia(&p, theta);
        let phidot = p.radius * j / d;
        let psidot = -p.eccentricity * j / d;
        let dt = 1e-3;
        let samples: Vec<AngularSample> = (0..=6000)
            .map(|k| AngularSample {
                t: k as f64 * dt,
                theta,
                phi: phidot * k as f64 * dt,
                psi: psidot * k as f64 * dt,
                thetadot: 0.0,
                phidot,
                psidot,
            })
            .collect();
        let xdot0 = 0.05;
        let path = replay_translation(&p, &samples, 0.0, 0.0, xdot0, 0.0).unwrap();
        let rate = p.friction * p.gravity; // mu Rn / m with Rn = m g
        let t_end = samples.last().unwrap().t;
        let expect = xdot0 * (-rate * t_end).exp();
        let got = path.last().unwrap().xdot;
        assert!(
            (got - expect).abs() < 1e-6 * xdot0,
            "xdot {got} vs {expect}"
        );
        // Monotone decay of the speed.
        for pair in path.windows(2) {
            assert!(pair[1].xdot.abs() <= pair[0].xdot.abs() + 1e-15);
        }
    }

    #[test]
    fn replay_is_inertial_without_friction() {
        let mut p = demo();
        p.friction = 0.0;
        let samples: Vec<AngularSample> = (0..=100)
            .map(|k| AngularSample {
                t: k as f64 * 0.01,
                theta: 1.0 + 0.1 * (k as f64 * 0.01).sin(),
                phi: 0.0,
                psi: 0.0,
                thetadot: 0.1 * (k as f64 * 0.01).cos(),
                phidot: 0.0,
                psidot: 0.0,
            })
            .collect();
        let path = replay_translation(&p, &samples, 0.0, 0.0, 0.3, -0.2).unwrap();
        for s in &path {
            assert_eq!(s.xdot, 0.3);
            assert_eq!(s.ydot, -0.2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        /// D(theta) stays strictly positive for any valid shape: where the
        /// sin^2 term vanishes, (R cos theta - eps)^2 = (R -+ eps)^2 > 0.
        #[test]
        fn jellet_inertia_positive(
            theta in 0.0f64..PI,
            ratio_a in 0.1f64..4.0,
            ratio_e in 0.01f64..0.99,
        ) {
            let p = TopParams::from_ratios(0.015, 0.025, ratio_a, ratio_e, 2e-6, 0.1, 9.81).unwrap();
            let d = jellet_inertia(&p, theta);
            // Exact positive lower bound: min of the quadratic in cos(theta).
            let (st, ct) = theta.sin_cos();
            let term_a = p.radius * p.radius * p.inertia_transverse * st * st;
            let term_c = p.inertia_axial * (p.radius * ct - p.eccentricity).powi(2);
            prop_assert!(d > 0.0);
            prop_assert!((d - (term_a + term_c)).abs() <= 1e-12 * d);
        }

        /// Round trip through the reduced chart and back is the identity on
        /// the angular rates, and the Jellet closes the loop.
        #[test]
        fn reduced_round_trip(
            theta in 0.05f64..3.09,
            thetadot in -3.0f64..3.0,
            phidot in -30.0f64..30.0,
            psidot in -90.0f64..90.0,
        ) {
            let p = demo();
            let full = FullState { theta, thetadot, phidot, psidot, ..Default::default() };
            let red = to_reduced(&p, &full);
            let (phir, psir) = reconstruct_velocities(&p, &red);
            prop_assert!((phir - phidot).abs() < 1e-9 * (1.0 + phidot.abs()));
            prop_assert!((psir - psidot).abs() < 1e-9 * (1.0 + psidot.abs()));
        }
    }
}
