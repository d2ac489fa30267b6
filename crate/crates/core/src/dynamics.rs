//! Right-hand side of the full equations of motion on R^2 x SO(3):
//! sliding-friction force moments, normal reaction, and the monitored
//! quantities (Jellet invariant, total energy).
//!
//! Euler angles (theta, phi, psi): theta is the tilt of the symmetry axis
//! from the vertical, phi the precession of the vertical plane through the
//! axis, psi the spin about the axis. The intermediate frame Oxyz has its
//! z-axis along the symmetry axis and its y-axis horizontal, perpendicular
//! to the tilt plane; it precesses and nods with the top but does not spin.
//! The contact constraint fixes the center-of-mass height to h(theta), so
//! the vertical coordinate is always derived, never stored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TopParams;

/// Hard floor for the Euler-angle chart: the mass matrix degenerates like
/// sin^2(theta) at the poles, so the RHS refuses to evaluate closer than this.
pub const POLE_GUARD_MIN: f64 = 1e-8;

/// Evaluation failure of the full or reduced vector field.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DynamicsError {
    /// The normal reaction came out non-positive: the top would leave the
    /// table and the rigid-contact model no longer applies.
    #[error("model breakdown: normal reaction Rn = {rn:.6e} <= 0")]
    ModelBreakdown { rn: f64 },
    /// The denominator of the normal-reaction expression vanished.
    #[error("model breakdown: normal-reaction denominator vanished")]
    SingularReaction,
    /// Too close to theta = 0 or pi for the Euler-angle chart.
    #[error("chart singularity: |sin theta| = {sin_theta:.3e} below pole guard")]
    ChartSingularity { sin_theta: f64 },
}

/// Configuration and velocity of the top in lab coordinates + Euler angles.
/// The vertical position and velocity of the center of mass follow from
/// theta and are not part of the state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FullState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub thetadot: f64,
    pub phidot: f64,
    pub psidot: f64,
}

impl FullState {
    /// State with all velocities zero at tilt `theta`.
    pub fn at_rest(theta: f64) -> Self {
        FullState {
            theta,
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub(crate) fn to_array(self) -> [f64; 10] {
        [
            self.x,
            self.y,
            self.theta,
            self.phi,
            self.psi,
            self.xdot,
            self.ydot,
            self.thetadot,
            self.phidot,
            self.psidot,
        ]
    }

    pub(crate) fn from_array(a: [f64; 10]) -> Self {
        FullState {
            x: a[0],
            y: a[1],
            theta: a[2],
            phi: a[3],
            psi: a[4],
            xdot: a[5],
            ydot: a[6],
            thetadot: a[7],
            phidot: a[8],
            psidot: a[9],
        }
    }
}

/// Instantaneous contact geometry and slip: the angular velocity and contact
/// vector in the intermediate frame, the slip velocity of the contact point
/// in lab coordinates, and the spin about the symmetry axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactKinematics {
    /// Angular velocity in Oxyz components: (-phidot sin(theta), thetadot, n).
    pub omega: [f64; 3],
    /// Contact vector from the center of mass, Oxyz components:
    /// (R sin(theta), 0, eps - R cos(theta)).
    pub contact_offset: [f64; 3],
    /// Slip velocity of the contact point, lab components. Its vertical
    /// component is analytically zero (the constraint maintains contact).
    pub slip_velocity: [f64; 3],
    /// Spin n = psidot + phidot cos(theta).
    pub spin: f64,
}

/// Generalized force moments of the sliding friction, one component per
/// coordinate (x, y, theta, phi, psi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionMoments {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Spin about the symmetry axis, n = psidot + phidot cos(theta).
pub fn spin(state: &FullState) -> f64 {
    state.psidot + state.phidot * state.theta.cos()
}

/// Unit vectors of the intermediate frame Oxyz expressed in lab coordinates,
/// as rows (e_x, e_y, e_z).
pub(crate) fn frame_basis(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [ct * sp, -ct * cp, -st],
        [cp, sp, 0.0],
        [st * sp, -st * cp, ct],
    ]
}

/// Full contact kinematics at a state. The vertical slip component is
/// computed (not hard-coded away) and checked to vanish in debug builds.
pub fn contact_kinematics(params: &TopParams, state: &FullState) -> ContactKinematics {
    let (st, ct) = state.theta.sin_cos();
    let n = spin(state);
    let omega = [-state.phidot * st, state.thetadot, n];
    let q = [
        params.radius * st,
        0.0,
        params.eccentricity - params.radius * ct,
    ];
    // omega x q in Oxyz components.
    let wxq = [
        omega[1] * q[2] - omega[2] * q[1],
        omega[2] * q[0] - omega[0] * q[2],
        omega[0] * q[1] - omega[1] * q[0],
    ];
    let basis = frame_basis(state.theta, state.phi);
    let v_o = [
        state.xdot,
        state.ydot,
        params.height_d(state.theta) * state.thetadot,
    ];
    let mut slip = v_o;
    for i in 0..3 {
        for (frame_axis, row) in basis.iter().enumerate() {
            slip[i] += wxq[frame_axis] * row[i];
        }
    }
    debug_assert!(
        slip[2].abs() <= 1e-10 * (1.0 + v_o.iter().map(|v| v.abs()).fold(0.0, f64::max)),
        "vertical slip component should vanish, got {}",
        slip[2]
    );
    ContactKinematics {
        omega,
        contact_offset: q,
        slip_velocity: slip,
        spin: n,
    }
}

/// Slip velocity of the contact point in lab coordinates.
pub fn slip_velocity(params: &TopParams, state: &FullState) -> [f64; 3] {
    contact_kinematics(params, state).slip_velocity
}

/// Normal component of the table reaction, from Newton's vertical equation
/// with the contact constraint substituted. Depends on the translational
/// velocities through the friction moment in the theta equation.
pub fn normal_reaction(params: &TopParams, state: &FullState) -> Result<f64, DynamicsError> {
    let (st, ct) = state.theta.sin_cos();
    let (sp, cp) = state.phi.sin_cos();
    let h = params.height(state.theta);
    let hd = params.height_d(state.theta);
    let hdd = params.height_dd(state.theta);
    let n = spin(state);
    let a = params.inertia_transverse;
    let c = params.inertia_axial;

    let num = params.gravity
        + state.thetadot * state.thetadot * hdd
        + hd * state.phidot * st * (state.phidot * ct - c * n / a);
    let den = 1.0 / params.mass
        + hd / a
            * (-h * params.friction * (sp * state.xdot - cp * state.ydot - state.thetadot * h)
                + hd);
    if den.abs() < 1e-12 / params.mass {
        return Err(DynamicsError::SingularReaction);
    }
    let rn = num / den;
    if rn <= 0.0 {
        return Err(DynamicsError::ModelBreakdown { rn });
    }
    Ok(rn)
}

/// The five generalized friction moments. Each component is linear in the
/// velocities once (theta, phi, Rn) are fixed.
pub fn friction_moments(
    params: &TopParams,
    state: &FullState,
) -> Result<FrictionMoments, DynamicsError> {
    let rn = normal_reaction(params, state)?;
    Ok(friction_moments_given_rn(params, state, rn))
}

pub(crate) fn friction_moments_given_rn(
    params: &TopParams,
    state: &FullState,
    rn: f64,
) -> FrictionMoments {
    let (st, ct) = state.theta.sin_cos();
    let (sp, cp) = state.phi.sin_cos();
    let mu_rn = params.friction * rn;
    let r = params.radius;
    let eps = params.eccentricity;
    let h = r - eps * ct;
    // sin(theta) (R psidot + eps phidot), the slip contribution of the
    // combined spin; shows up in every component.
    let u = st * (r * state.psidot + eps * state.phidot);

    FrictionMoments {
        x: -mu_rn * (state.xdot - sp * state.thetadot * h + cp * u),
        y: -mu_rn * (state.ydot + cp * state.thetadot * h + sp * u),
        theta: -mu_rn * h * (cp * state.ydot - sp * state.xdot + h * state.thetadot),
        phi: -mu_rn * eps * st * (cp * state.xdot + sp * state.ydot + u),
        psi: -mu_rn * r * st * (cp * state.xdot + sp * state.ydot + u),
    }
}

/// Generalized mass matrix in coordinate order (x, y, theta, phi, psi).
/// Block diagonal: translations decouple, and the rotational block is
/// singular exactly at the poles.
pub(crate) fn mass_matrix(params: &TopParams, theta: f64) -> [[f64; 5]; 5] {
    let (st, ct) = theta.sin_cos();
    let m = params.mass;
    let a = params.inertia_transverse;
    let c = params.inertia_axial;
    let eps = params.eccentricity;
    let m_theta = eps * eps * m * st * st + a;
    let mut out = [[0.0; 5]; 5];
    out[0][0] = m;
    out[1][1] = m;
    out[2][2] = m_theta;
    out[3][3] = a * st * st + c * ct * ct;
    out[3][4] = c * ct;
    out[4][3] = c * ct;
    out[4][4] = c;
    out
}

/// Dense linear solve with partial pivoting; `None` on a vanishing pivot.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve_dense<const N: usize>(
    mut a: [[f64; N]; N],
    mut b: [f64; N],
) -> Option<[f64; N]> {
    for col in 0..N {
        let mut pivot = col;
        for row in col + 1..N {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < f64::MIN_POSITIVE {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..N {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut sum = b[row];
        for k in row + 1..N {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// Time derivative of the full state: velocities in the position slots and
/// the accelerations, obtained by a dense solve of the 5x5 Euler-Lagrange
/// system, in the velocity slots.
pub fn full_rhs(params: &TopParams, state: &FullState) -> Result<FullState, DynamicsError> {
    let (st, ct) = state.theta.sin_cos();
    if st.abs() < POLE_GUARD_MIN {
        return Err(DynamicsError::ChartSingularity { sin_theta: st });
    }
    let rn = normal_reaction(params, state)?;
    let q = friction_moments_given_rn(params, state, rn);

    let m = params.mass;
    let a = params.inertia_transverse;
    let c = params.inertia_axial;
    let eps = params.eccentricity;
    let g = params.gravity;
    let n = spin(state);
    let (td, pd) = (state.thetadot, state.phidot);

    let rhs = [
        q.x,
        q.y,
        q.theta - eps * eps * m * st * ct * td * td + a * st * ct * pd * pd
            - c * n * st * pd
            - m * g * eps * st,
        q.phi - 2.0 * a * st * ct * td * pd + c * st * td * n + c * ct * st * pd * td,
        q.psi + c * st * pd * td,
    ];
    let acc = solve_dense(mass_matrix(params, state.theta), rhs)
        .ok_or(DynamicsError::ChartSingularity { sin_theta: st })?;

    Ok(FullState {
        x: state.xdot,
        y: state.ydot,
        theta: state.thetadot,
        phi: state.phidot,
        psi: state.psidot,
        xdot: acc[0],
        ydot: acc[1],
        thetadot: acc[2],
        phidot: acc[3],
        psidot: acc[4],
    })
}

/// Jellet invariant J = C n (R cos(theta) - eps) + A phidot R sin^2(theta).
/// Exactly conserved along the motion for any friction coefficient.
pub fn jellet(params: &TopParams, state: &FullState) -> f64 {
    let (st, ct) = state.theta.sin_cos();
    params.inertia_axial * spin(state) * (params.radius * ct - params.eccentricity)
        + params.inertia_transverse * state.phidot * params.radius * st * st
}

/// Total energy E = T + V with V = m g h(theta); non-increasing under
/// sliding friction.
pub fn energy(params: &TopParams, state: &FullState) -> f64 {
    let (st, ct) = state.theta.sin_cos();
    let m_theta = params.eccentricity * params.eccentricity * params.mass * st * st
        + params.inertia_transverse;
    let n = state.psidot + state.phidot * ct;
    let kinetic = 0.5
        * (params.mass * (state.xdot * state.xdot + state.ydot * state.ydot)
            + m_theta * state.thetadot * state.thetadot
            + params.inertia_transverse * st * st * state.phidot * state.phidot
            + params.inertia_axial * n * n);
    kinetic + params.mass * params.gravity * params.height(state.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn demo() -> TopParams {
        TopParams::new(0.015, 0.025, 0.005, 2.2e-6, 2.0e-6, 0.1, 9.81).unwrap()
    }

    fn generic_state() -> FullState {
        FullState {
            x: 0.01,
            y: -0.02,
            theta: 0.9,
            phi: 0.6,
            psi: 1.7,
            xdot: 0.03,
            ydot: -0.01,
            thetadot: 0.8,
            phidot: 5.0,
            psidot: 40.0,
        }
    }

    #[test]
    fn spin_reference_values() {
        let mut s = FullState::at_rest(0.3);
        s.psidot = 10.0;
        assert_eq!(spin(&s), 10.0);
        let s = FullState {
            theta: FRAC_PI_2,
            phidot: 5.0,
            ..Default::default()
        };
        assert!(spin(&s).abs() < 1e-15);
        let s = FullState {
            theta: PI,
            phidot: 3.0,
            psidot: 2.0,
            ..Default::default()
        };
        assert!((spin(&s) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn slip_vanishes_at_rest_and_on_axis() {
        let p = demo();
        let v = slip_velocity(&p, &FullState::at_rest(0.7));
        assert!(v.iter().all(|c| c.abs() < 1e-15));
        // Pure spin upright: contact point sits on the symmetry axis.
        let s = FullState {
            theta: 0.0,
            psidot: 80.0,
            ..Default::default()
        };
        let v = slip_velocity(&p, &s);
        assert!(v.iter().all(|c| c.abs() < 1e-12), "{v:?}");
    }

    /// Independent brute-force check of the slip velocity: track the material
    /// point currently at contact through the full body rotation and finite-
    /// difference its lab position.
    #[test]
    fn slip_matches_material_point_differencing() {
        let p = demo();
        let s = generic_state();
        let (st, ct) = s.theta.sin_cos();
        // Body coordinates of the material point at the contact.
        let b = [
            p.radius * st * s.psi.cos(),
            -p.radius * st * s.psi.sin(),
            p.eccentricity - p.radius * ct,
        ];
        let position = |dt: f64| {
            let theta = s.theta + s.thetadot * dt;
            let phi = s.phi + s.phidot * dt;
            let psi = s.psi + s.psidot * dt;
            let basis = frame_basis(theta, phi);
            // Body basis: spin the frame x/y axes by psi about the symmetry axis.
            let (spsi, cpsi) = psi.sin_cos();
            let mut pos = [s.x + s.xdot * dt, s.y + s.ydot * dt, p.height(theta)];
            for i in 0..3 {
                let ex_b = cpsi * basis[0][i] + spsi * basis[1][i];
                let ey_b = -spsi * basis[0][i] + cpsi * basis[1][i];
                pos[i] += b[0] * ex_b + b[1] * ey_b + b[2] * basis[2][i];
            }
            pos
        };
        let dt = 1e-6;
        let (plus, minus) = (position(dt), position(-dt));
        let v = slip_velocity(&p, &s);
        for i in 0..3 {
            let fd = (plus[i] - minus[i]) / (2.0 * dt);
            assert!(
                (fd - v[i]).abs() < 1e-6,
                "component {i}: fd {fd} vs {}",
                v[i]
            );
        }
    }

    #[test]
    fn contact_offset_components() {
        let p = demo();
        let k = contact_kinematics(&p, &generic_state());
        let (st, ct) = generic_state().theta.sin_cos();
        assert_eq!(k.contact_offset[0], p.radius * st);
        assert_eq!(k.contact_offset[1], 0.0);
        assert_eq!(k.contact_offset[2], p.eccentricity - p.radius * ct);
    }

    #[test]
    fn reaction_is_weight_at_vertical_rest() {
        let p = demo();
        for theta in [0.0, PI] {
            let rn = normal_reaction(&p, &FullState::at_rest(theta)).unwrap();
            assert!((rn - p.mass * p.gravity).abs() < 1e-15);
        }
    }

    #[test]
    fn reaction_is_weight_at_relative_equilibria() {
        // At a true steady state (rolling, critical point of the effective
        // potential) the reaction reduces to the static weight.
        let p = demo();
        for theta in [0.9f64, 1.7, 2.4] {
            let (st, ct) = theta.sin_cos();
            let jsq = crate::equilibria::branch_jsq(&p, ct).unwrap();
            let j = jsq.sqrt();
            let d = p.radius * p.radius * p.inertia_transverse * st * st
                + p.inertia_axial * (p.radius * ct - p.eccentricity).powi(2);
            // Steady velocity field on Jellet level j: phidot = R J / D,
            // psidot = -eps J / D, so the slip vanishes identically.
            let s = FullState {
                theta,
                phidot: p.radius * j / d,
                psidot: -p.eccentricity * j / d,
                ..Default::default()
            };
            assert!((jellet(&p, &s) - j).abs() < 1e-12 * j.abs());
            let slip = slip_velocity(&p, &s);
            let speed = s.phidot.abs().max(s.psidot.abs()) * p.radius;
            assert!(
                slip.iter().all(|c| c.abs() < 1e-12 * speed.max(1.0)),
                "{slip:?}"
            );
            let rn = normal_reaction(&p, &s).unwrap();
            assert!(
                (rn - p.mass * p.gravity).abs() < 1e-10 * p.mass * p.gravity,
                "theta {theta}: Rn {rn}"
            );
        }
    }

    #[test]
    fn reaction_solves_newtons_vertical_equation() {
        // Residual check: m zddot = Rn - m g with zddot from the solved
        // accelerations, at a generic sliding state.
        let p = demo();
        let s = generic_state();
        let rn = normal_reaction(&p, &s).unwrap();
        let deriv = full_rhs(&p, &s).unwrap();
        let zddot =
            p.height_dd(s.theta) * s.thetadot * s.thetadot + p.height_d(s.theta) * deriv.thetadot;
        let residual = p.mass * zddot - (rn - p.mass * p.gravity);
        assert!(residual.abs() < 1e-10, "residual {residual}");
    }

    #[test]
    fn friction_vanishes_without_mu() {
        let mut p = demo();
        p.friction = 0.0;
        let q = friction_moments(&p, &generic_state()).unwrap();
        for v in [q.x, q.y, q.theta, q.phi, q.psi] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn friction_power_vanishes_when_rolling() {
        // Steady rolling state: slip is zero, so the moments do no work.
        let p = demo();
        let theta: f64 = 1.2;
        let j = 3.0e-6;
        let (st, ct) = theta.sin_cos();
        let d = p.radius * p.radius * p.inertia_transverse * st * st
            + p.inertia_axial * (p.radius * ct - p.eccentricity).powi(2);
        let phidot = p.radius * j / d;
        let n = j * (p.radius * ct - p.eccentricity) / d;
        let s = FullState {
            theta,
            phidot,
            psidot: n - phidot * ct,
            ..Default::default()
        };
        let q = friction_moments(&p, &s).unwrap();
        let power = q.x * s.xdot
            + q.y * s.ydot
            + q.theta * s.thetadot
            + q.phi * s.phidot
            + q.psi * s.psidot;
        assert!(power.abs() < 1e-14, "power {power}");
    }

    #[test]
    fn friction_power_identity_generic() {
        let p = demo();
        let s = generic_state();
        let rn = normal_reaction(&p, &s).unwrap();
        let q = friction_moments(&p, &s).unwrap();
        let v = slip_velocity(&p, &s);
        let power = q.x * s.xdot
            + q.y * s.ydot
            + q.theta * s.thetadot
            + q.phi * s.phidot
            + q.psi * s.psidot;
        let dissipation = -p.friction * rn * (v[0] * v[0] + v[1] * v[1]);
        assert!(
            (power - dissipation).abs() <= 1e-10 * dissipation.abs(),
            "power {power} vs {dissipation}"
        );
    }

    #[test]
    fn rhs_rejects_pole_chart() {
        let p = demo();
        let err = full_rhs(&p, &FullState::at_rest(0.0)).unwrap_err();
        assert!(matches!(err, DynamicsError::ChartSingularity { .. }));
        let err = full_rhs(&p, &FullState::at_rest(PI)).unwrap_err();
        assert!(matches!(err, DynamicsError::ChartSingularity { .. }));
    }

    #[test]
    fn rest_near_upright_only_falls_in_theta() {
        // The rest state is an equilibrium at the pole itself; just off it
        // the only nonzero acceleration is the restoring theta one.
        let p = demo();
        let s = FullState::at_rest(1e-3);
        let d = full_rhs(&p, &s).unwrap();
        let m_theta =
            p.eccentricity.powi(2) * p.mass * s.theta.sin().powi(2) + p.inertia_transverse;
        let expect = -p.mass * p.gravity * p.eccentricity * s.theta.sin() / m_theta;
        assert!((d.thetadot - expect).abs() < 1e-9 * expect.abs());
        for v in [d.xdot, d.ydot, d.phidot, d.psidot] {
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn jellet_reference_relations() {
        let p = demo();
        let n0 = 60.0;
        let up = FullState {
            theta: 0.0,
            psidot: n0,
            ..Default::default()
        };
        let j = jellet(&p, &up);
        assert!((j - p.inertia_axial * n0 * (p.radius - p.eccentricity)).abs() < 1e-18);
        // Inverted state on the same Jellet level spins the other way.
        let n_pi = -j / (p.inertia_axial * (p.radius + p.eccentricity));
        let down = FullState {
            theta: PI,
            psidot: n_pi,
            ..Default::default()
        };
        assert!((jellet(&p, &down) - j).abs() < 1e-18 + 1e-14 * j.abs());
        let ratio = n0 / n_pi;
        let expect = -(p.radius + p.eccentricity) / (p.radius - p.eccentricity);
        assert!((ratio - expect).abs() < 1e-12);
    }

    #[test]
    fn energy_reference_values() {
        let p = demo();
        let mg = p.mass * p.gravity;
        assert!(
            (energy(&p, &FullState::at_rest(0.0)) - mg * (p.radius - p.eccentricity)).abs() < 1e-15
        );
        assert!(
            (energy(&p, &FullState::at_rest(PI)) - mg * (p.radius + p.eccentricity)).abs() < 1e-15
        );
        let n0 = 60.0;
        let s = FullState {
            theta: 0.0,
            psidot: n0,
            ..Default::default()
        };
        let expect = 0.5 * p.inertia_axial * n0 * n0 + mg * (p.radius - p.eccentricity);
        assert!((energy(&p, &s) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn solve_dense_recovers_known_solution() {
        let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = [1.5, -2.0, 0.25];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i][j] * x[j];
            }
        }
        let got = solve_dense(a, b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Friction opposes slip at every state: Rf . v_Q <= 0.
        #[test]
        fn friction_opposes_slip(
            theta in 0.05f64..3.09,
            phi in -3.0f64..3.0,
            xdot in -0.5f64..0.5,
            ydot in -0.5f64..0.5,
            thetadot in -3.0f64..3.0,
            phidot in -20.0f64..20.0,
            psidot in -80.0f64..80.0,
        ) {
            let p = demo();
            let s = FullState { x: 0.0, y: 0.0, theta, phi, psi: 0.3, xdot, ydot, thetadot, phidot, psidot };
            if let Ok(rn) = normal_reaction(&p, &s) {
                let v = slip_velocity(&p, &s);
                let rf = [-p.friction * rn * v[0], -p.friction * rn * v[1]];
                prop_assert!(rf[0] * v[0] + rf[1] * v[1] <= 0.0);
            }
        }

        /// The friction power identity holds at random states.
        #[test]
        fn power_identity_random(
            theta in 0.05f64..3.09,
            phi in -3.0f64..3.0,
            xdot in -0.3f64..0.3,
            ydot in -0.3f64..0.3,
            thetadot in -3.0f64..3.0,
            phidot in -20.0f64..20.0,
            psidot in -80.0f64..80.0,
        ) {
            let p = demo();
            let s = FullState { x: 0.0, y: 0.0, theta, phi, psi: -0.9, xdot, ydot, thetadot, phidot, psidot };
            if let Ok(rn) = normal_reaction(&p, &s) {
                let q = friction_moments_given_rn(&p, &s, rn);
                let v = slip_velocity(&p, &s);
                let power = q.x * s.xdot + q.y * s.ydot + q.theta * s.thetadot
                    + q.phi * s.phidot + q.psi * s.psidot;
                let dissipation = -p.friction * rn * (v[0] * v[0] + v[1] * v[1]);
                let scale = dissipation.abs().max(1e-18);
                prop_assert!((power - dissipation).abs() <= 1e-9 * scale);
            }
        }

        /// The 5x5 mass matrix is symmetric positive definite away from the poles.
        #[test]
        fn mass_matrix_is_spd(theta in 0.01f64..3.13) {
            let p = demo();
            let m = mass_matrix(&p, theta);
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    prop_assert!((v - m[j][i]).abs() < 1e-18);
                }
            }
            // Leading principal minors all positive (Sylvester).
            let minors = [
                m[0][0],
                m[0][0] * m[1][1],
                m[0][0] * m[1][1] * m[2][2],
                m[0][0] * m[1][1] * m[2][2] * m[3][3],
                m[0][0] * m[1][1] * m[2][2] * (m[3][3] * m[4][4] - m[3][4] * m[4][3]),
            ];
            for d in minors {
                prop_assert!(d > 0.0);
            }
        }
    }
}
