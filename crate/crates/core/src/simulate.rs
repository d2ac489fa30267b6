//! Time integration of the full, truncated, and reduced systems with an
//! embedded Dormand-Prince 5(4) scheme, invariant monitors, and event-based
//! termination (pole guard, contact loss, convergence to a steady state).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, FullState, POLE_GUARD_MIN};
use crate::model::TopParams;
use crate::reduction::{self, AngularSample, ReducedState, TruncatedState};

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached the requested end time.
    TimeEnd,
    /// Entered the pole guard band around theta = 0 or pi, or approached a
    /// pole so closely that the Euler-angle chart admits no further numeric
    /// progress. This is a normal outcome: tipping trajectories legitimately
    /// approach the poles.
    PoleReached,
    /// The normal reaction dropped to zero or the reaction expression became
    /// singular; the rigid-contact model stops applying.
    ModelBreakdown,
    /// Rate norm fell below the convergence threshold: a steady state.
    Converged,
}

/// Integrator settings. Defaults put the invariant monitors well inside the
/// integration error, so the 1e-8 / 1e-9 conservation bars measure the model,
/// not the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step the controller may take (s).
    pub max_step: f64,
    /// End time (s), measured from the initial sample.
    pub t_end: f64,
    /// Terminate once |sin theta| falls below this; must lie in (0, 1e-3].
    pub pole_guard: f64,
    /// Terminate once the rate norm (1/s) falls below this.
    pub convergence_eps: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.1,
            t_end: 10.0,
            pole_guard: 1e-8,
            convergence_eps: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("tolerances must be positive")]
    Tolerance,
    #[error("pole guard must lie in (0, 1e-3]")]
    PoleGuard,
    #[error("t_end and max_step must be positive")]
    TimeRange,
}

impl IntegratorConfig {
    pub fn validated(self) -> Result<Self, ConfigError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(ConfigError::Tolerance);
        }
        if !(self.pole_guard > 0.0 && self.pole_guard <= 1e-3) {
            return Err(ConfigError::PoleGuard);
        }
        if !(self.t_end > 0.0 && self.max_step > 0.0 && self.convergence_eps >= 0.0) {
            return Err(ConfigError::TimeRange);
        }
        Ok(self)
    }

    fn effective_pole_guard(&self) -> f64 {
        self.pole_guard.max(POLE_GUARD_MIN)
    }
}

/// Per-sample monitored quantities. `normal_force` is NaN where the reaction
/// could not be evaluated (e.g. the terminal sample of a breakdown).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub jellet: f64,
    pub energy: f64,
    pub normal_force: f64,
    pub slip_speed: f64,
}

/// An integrated path: strictly increasing sample times, matching states and
/// monitors, and the reason the run stopped. Immutable once returned.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub monitors: Vec<MonitorSample>,
    pub termination: Termination,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty trajectory")
    }

    pub fn final_state(&self) -> &S {
        self.states.last().expect("nonempty trajectory")
    }
}

/// Monitor summary over a whole trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    /// max_t |J(t) - J(0)| / |J(0)| (absolute drift when J(0) = 0).
    pub max_jellet_drift: f64,
    /// Largest positive finite-difference dE/dt between samples (W).
    pub max_energy_rate: f64,
    /// Smallest evaluated normal force (N).
    pub min_normal_force: f64,
}

/// Scalar summary of the conservation and contact monitors.
pub fn monitor_report<S>(traj: &Trajectory<S>) -> MonitorReport {
    assert!(
        !traj.is_empty(),
        "monitor report needs a nonempty trajectory"
    );
    let j0 = traj.monitors[0].jellet;
    let jscale = if j0 == 0.0 { 1.0 } else { j0.abs() };
    let mut max_drift = 0.0f64;
    let mut max_rate = f64::NEG_INFINITY;
    let mut min_rn = f64::INFINITY;
    for (k, m) in traj.monitors.iter().enumerate() {
        max_drift = max_drift.max((m.jellet - j0).abs() / jscale);
        if m.normal_force.is_finite() {
            min_rn = min_rn.min(m.normal_force);
        }
        if k + 1 < traj.monitors.len() {
            let dt = traj.times[k + 1] - traj.times[k];
            if dt > 0.0 {
                max_rate = max_rate.max((traj.monitors[k + 1].energy - m.energy) / dt);
            }
        }
    }
    MonitorReport {
        max_jellet_drift: max_drift,
        max_energy_rate: if max_rate.is_finite() {
            max_rate.max(0.0)
        } else {
            0.0
        },
        min_normal_force: min_rn,
    }
}

// Dormand-Prince 5(4) tableau with the classic quartic interpolant.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights are the last row of A (FSAL); these are b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Weights of the quartic dense-output interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Interpolation coefficients over one accepted step.
struct DenseStep<const N: usize> {
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn new(y: &[f64; N], ynew: &[f64; N], ks: &[[f64; N]; 7], h: f64) -> Self {
        let mut cont = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = ynew[i] - y[i];
            let bspl = h * ks[0][i] - ydiff;
            cont[0][i] = y[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * ks[6][i] - bspl;
            let mut c5 = 0.0;
            for (j, kj) in ks.iter().enumerate() {
                c5 += D[j] * kj[i];
            }
            cont[4][i] = h * c5;
        }
        DenseStep { cont }
    }

    fn eval(&self, sigma: f64) -> [f64; N] {
        let s = sigma;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
        out
    }
}

struct RawOutcome<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    termination: Termination,
}

/// Adaptive driver shared by the three systems. Events are evaluated at
/// accepted step endpoints (localized inside the step by the interpolant);
/// a failing right-hand side shrinks the step and, once the step collapses,
/// terminates with the matching event. A sustained crawl at sub-nanosecond
/// steps means the chart itself has run out: `classify_stall` names the
/// reason from the state.
fn integrate_adaptive<const N: usize, R, Ev, St>(
    rhs: R,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    event: Ev,
    classify_stall: St,
) -> RawOutcome<N>
where
    R: Fn(f64, &[f64; N]) -> Result<[f64; N], DynamicsError>,
    Ev: Fn(f64, &[f64; N]) -> Option<Termination>,
    St: Fn(&[f64; N]) -> Termination,
{
    const H_FLOOR: f64 = 1e-13;
    // Sustained accepted steps this small only happen when the chart has
    // degenerated next to a pole; the trajectory cannot get closer.
    const CRAWL_H: f64 = 1e-6;
    const CRAWL_LIMIT: usize = 1000;
    const MAX_STEPS: usize = 20_000_000;

    let mut times = vec![0.0];
    let mut states = vec![y0];

    if let Some(term) = event(0.0, &y0) {
        return RawOutcome {
            times,
            states,
            termination: term,
        };
    }

    let map_error = |e: DynamicsError| match e {
        DynamicsError::ChartSingularity { .. } => Termination::PoleReached,
        _ => Termination::ModelBreakdown,
    };

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = match rhs(t, &y) {
        Ok(v) => v,
        Err(e) => {
            return RawOutcome {
                times,
                states,
                termination: map_error(e),
            }
        }
    };

    // Initial step size from the scaled derivative magnitude.
    let mut h = {
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..N {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        let guess = if d1 > 0.0 {
            0.01 * (d0.max(1e-10) / d1).sqrt()
        } else {
            1e-6
        };
        guess.min(cfg.max_step).min(cfg.t_end).max(1e-10)
    };

    let mut ks = [[0.0; N]; 7];
    let mut crawl_steps = 0usize;
    for _ in 0..MAX_STEPS {
        if t >= cfg.t_end * (1.0 - 1e-14) {
            return RawOutcome {
                times,
                states,
                termination: Termination::TimeEnd,
            };
        }
        h = h.min(cfg.max_step).min(cfg.t_end - t);

        // Stage evaluations; a failure means the step probed an invalid
        // region, so shrink and retry.
        ks[0] = k1;
        let mut stage_failure = None;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in ks.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match rhs(t + C[s] * h, &ys) {
                Ok(k) => ks[s] = k,
                Err(e) => {
                    stage_failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_failure {
            if h <= H_FLOOR {
                return RawOutcome {
                    times,
                    states,
                    termination: map_error(e),
                };
            }
            h *= 0.25;
            continue;
        }

        // 5th-order solution is stage 7's argument (FSAL): y + h * sum b_i k_i
        // with b = A[6].
        let mut ynew = y;
        for (j, kj) in ks.iter().enumerate().take(6) {
            let b = A[6][j];
            if b != 0.0 {
                for i in 0..N {
                    ynew[i] += h * b * kj[i];
                }
            }
        }
        // ks[6] already holds f(t + h, ynew) from the stage loop.

        let mut err_sq = 0.0f64;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in ks.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            if let Some(term) = event(t + h, &ynew) {
                // Localize the event onset inside the step with the dense
                // interpolant, so e.g. a swing through a pole terminates at
                // the guard rather than past it.
                let dense = DenseStep::new(&y, &ynew, &ks, h);
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let mut hit = (term, ynew);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let ymid = dense.eval(mid);
                    match event(t + mid * h, &ymid) {
                        Some(tm) => {
                            hi = mid;
                            hit = (tm, ymid);
                        }
                        None => lo = mid,
                    }
                }
                times.push(t + hi * h);
                states.push(hit.1);
                return RawOutcome {
                    times,
                    states,
                    termination: hit.0,
                };
            }
            t += h;
            y = ynew;
            k1 = ks[6];
            times.push(t);
            states.push(y);
            if h < CRAWL_H && classify_stall(&y) == Termination::PoleReached {
                crawl_steps += 1;
                if crawl_steps >= CRAWL_LIMIT {
                    return RawOutcome {
                        times,
                        states,
                        termination: Termination::PoleReached,
                    };
                }
            } else {
                crawl_steps = 0;
            }
        } else if h <= H_FLOOR {
            // Error control cannot proceed; classify by where we are.
            return RawOutcome {
                times,
                states,
                termination: classify_stall(&y),
            };
        }

        let scale = if err > 0.0 {
            0.9 * err.powf(-0.2)
        } else {
            10.0
        };
        h *= scale.clamp(0.2, 10.0);
        h = h.max(H_FLOOR);
    }
    // Step budget exhausted without reaching any event: report by location.
    let termination = classify_stall(states.last().unwrap());
    RawOutcome {
        times,
        states,
        termination,
    }
}

/// Names the reason a step-size collapse happened: next to a pole it is the
/// chart giving out (the trajectory has effectively arrived), elsewhere the
/// model itself has broken down.
fn stall_kind(theta: f64) -> Termination {
    if theta.sin().abs() < 1e-3 || !(0.0..=std::f64::consts::PI).contains(&theta) {
        Termination::PoleReached
    } else {
        Termination::ModelBreakdown
    }
}

fn full_monitor(params: &TopParams, s: &FullState) -> MonitorSample {
    let v = dynamics::slip_velocity(params, s);
    MonitorSample {
        jellet: dynamics::jellet(params, s),
        energy: dynamics::energy(params, s),
        normal_force: dynamics::normal_reaction(params, s).unwrap_or(f64::NAN),
        slip_speed: (v[0] * v[0] + v[1] * v[1]).sqrt(),
    }
}

fn truncated_slip_speed(params: &TopParams, theta: f64, thetadot: f64, phibardot: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let w = thetadot * (params.radius - params.eccentricity * ct);
    let u = st * phibardot;
    (w * w + u * u).sqrt()
}

/// Integrates the full ten-dimensional system from `state0`.
pub fn integrate_full(
    params: &TopParams,
    state0: &FullState,
    cfg: &IntegratorConfig,
) -> Trajectory<FullState> {
    let guard = cfg.effective_pole_guard();
    let r = params.radius;
    // Time scale turning accelerations into rates for the steadiness test.
    let tau = (params.radius / params.gravity).sqrt();
    let raw = integrate_adaptive(
        |_t, y: &[f64; 10]| {
            dynamics::full_rhs(params, &FullState::from_array(*y)).map(FullState::to_array)
        },
        state0.to_array(),
        cfg,
        |_t, y: &[f64; 10]| {
            let s = FullState::from_array(*y);
            let at_pole =
                s.theta <= 0.0 || s.theta >= std::f64::consts::PI || s.theta.sin().abs() < guard;
            let rate = s
                .thetadot
                .abs()
                .max((params.eccentricity * s.phidot + r * s.psidot).abs() / r)
                .max(s.xdot.abs() / r)
                .max(s.ydot.abs() / r);
            if rate < cfg.convergence_eps {
                // Steady only if the accelerations vanish too; a rest state
                // on a slope keeps moving. At the pole the chart cannot say,
                // but quiescent pole states are the vertical equilibria.
                if at_pole {
                    return Some(Termination::Converged);
                }
                if let Ok(d) = dynamics::full_rhs(params, &s) {
                    let accel = d
                        .thetadot
                        .abs()
                        .max((params.eccentricity * d.phidot + r * d.psidot).abs() / r)
                        .max(d.xdot.abs() / r)
                        .max(d.ydot.abs() / r);
                    if accel * tau < cfg.convergence_eps {
                        return Some(Termination::Converged);
                    }
                }
            }
            if at_pole {
                return Some(Termination::PoleReached);
            }
            None
        },
        |y: &[f64; 10]| stall_kind(y[2]),
    );
    let states: Vec<FullState> = raw
        .states
        .iter()
        .map(|y| FullState::from_array(*y))
        .collect();
    let monitors = states.iter().map(|s| full_monitor(params, s)).collect();
    Trajectory {
        times: raw.times,
        states,
        monitors,
        termination: raw.termination,
    }
}

/// Integrates the truncated three-degree-of-freedom system (translation
/// frozen) from `state0`.
pub fn integrate_truncated(
    params: &TopParams,
    state0: &TruncatedState,
    cfg: &IntegratorConfig,
) -> Trajectory<TruncatedState> {
    let guard = cfg.effective_pole_guard();
    let r = params.radius;
    let tau = (params.radius / params.gravity).sqrt();
    let raw = integrate_adaptive(
        |_t, y: &[f64; 6]| {
            reduction::truncated_rhs(params, &TruncatedState::from_array(*y))
                .map(TruncatedState::to_array)
        },
        state0.to_array(),
        cfg,
        |_t, y: &[f64; 6]| {
            let s = TruncatedState::from_array(*y);
            let at_pole =
                s.theta <= 0.0 || s.theta >= std::f64::consts::PI || s.theta.sin().abs() < guard;
            let rate = s
                .thetadot
                .abs()
                .max((params.eccentricity * s.phidot + r * s.psidot).abs() / r);
            if rate < cfg.convergence_eps {
                if at_pole {
                    return Some(Termination::Converged);
                }
                if let Ok(d) = reduction::truncated_rhs(params, &s) {
                    let accel = d
                        .thetadot
                        .abs()
                        .max((params.eccentricity * d.phidot + r * d.psidot).abs() / r);
                    if accel * tau < cfg.convergence_eps {
                        return Some(Termination::Converged);
                    }
                }
            }
            if at_pole {
                return Some(Termination::PoleReached);
            }
            None
        },
        |y: &[f64; 6]| stall_kind(y[0]),
    );
    let states: Vec<TruncatedState> = raw
        .states
        .iter()
        .map(|y| TruncatedState::from_array(*y))
        .collect();
    let monitors = states
        .iter()
        .map(|s| {
            let full = s.to_full();
            let phibardot = params.eccentricity * s.phidot + r * s.psidot;
            MonitorSample {
                jellet: dynamics::jellet(params, &full),
                energy: dynamics::energy(params, &full),
                normal_force: dynamics::normal_reaction(params, &full).unwrap_or(f64::NAN),
                slip_speed: truncated_slip_speed(params, s.theta, s.thetadot, phibardot),
            }
        })
        .collect();
    Trajectory {
        times: raw.times,
        states,
        monitors,
        termination: raw.termination,
    }
}

/// Integrates the reduced system on the Jellet level of `state0`. The level
/// itself is a parameter of the flow, so it is conserved exactly.
pub fn integrate_reduced(
    params: &TopParams,
    state0: &ReducedState,
    cfg: &IntegratorConfig,
) -> Trajectory<ReducedState> {
    let guard = cfg.effective_pole_guard();
    let jellet = state0.jellet;
    let r = params.radius;
    let tau = (params.radius / params.gravity).sqrt();
    let rhs = |y: &[f64; 3]| {
        let s = ReducedState {
            theta: y[0],
            thetadot: y[1],
            phibardot: y[2],
            jellet,
        };
        reduction::reduced_rhs(params, &s).map(|d| [d.thetadot, d.thetaddot, d.phibarddot])
    };
    let raw = integrate_adaptive(
        |_t, y: &[f64; 3]| rhs(y),
        [state0.theta, state0.thetadot, state0.phibardot],
        cfg,
        |_t, y: &[f64; 3]| {
            let at_pole = y[0] <= 0.0 || y[0] >= std::f64::consts::PI || y[0].sin().abs() < guard;
            let rate = y[1].abs().max(y[2].abs() / r);
            if rate < cfg.convergence_eps {
                if at_pole {
                    return Some(Termination::Converged);
                }
                if let Ok(d) = rhs(y) {
                    if (d[1].abs().max(d[2].abs() / r)) * tau < cfg.convergence_eps {
                        return Some(Termination::Converged);
                    }
                }
            }
            if at_pole {
                return Some(Termination::PoleReached);
            }
            None
        },
        |y: &[f64; 3]| stall_kind(y[0]),
    );
    let states: Vec<ReducedState> = raw
        .states
        .iter()
        .map(|y| ReducedState {
            theta: y[0],
            thetadot: y[1],
            phibardot: y[2],
            jellet,
        })
        .collect();
    let monitors = states
        .iter()
        .map(|s| {
            let (phidot, psidot) = reduction::reconstruct_velocities(params, s);
            MonitorSample {
                jellet: s.jellet,
                energy: reduction::reduced_energy(params, s),
                normal_force: reduction::truncated_normal_reaction(
                    params, s.theta, s.thetadot, phidot, psidot,
                )
                .unwrap_or(f64::NAN),
                slip_speed: truncated_slip_speed(params, s.theta, s.thetadot, s.phibardot),
            }
        })
        .collect();
    Trajectory {
        times: raw.times,
        states,
        monitors,
        termination: raw.termination,
    }
}

/// Angular samples (with rates) of a truncated trajectory, ready for the
/// translation replay.
pub fn angular_samples(traj: &Trajectory<TruncatedState>) -> Vec<AngularSample> {
    traj.times
        .iter()
        .zip(traj.states.iter())
        .map(|(&t, s)| AngularSample {
            t,
            theta: s.theta,
            phi: s.phi,
            psi: s.psi,
            thetadot: s.thetadot,
            phidot: s.phidot,
            psidot: s.psidot,
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a full trajectory as CSV with 17 significant digits per value.
pub fn write_full_csv<W: Write>(traj: &Trajectory<FullState>, out: &mut W) -> io::Result<()> {
    writeln!(out, "t,theta,phi,psi,x,y,thetadot,phidot,psidot,J,E,Rn,vQ")?;
    for ((t, s), m) in traj.times.iter().zip(&traj.states).zip(&traj.monitors) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(*t),
            fmt(s.theta),
            fmt(s.phi),
            fmt(s.psi),
            fmt(s.x),
            fmt(s.y),
            fmt(s.thetadot),
            fmt(s.phidot),
            fmt(s.psidot),
            fmt(m.jellet),
            fmt(m.energy),
            fmt(m.normal_force),
            fmt(m.slip_speed),
        )?;
    }
    Ok(())
}

/// Writes a reduced trajectory as CSV with 17 significant digits per value.
pub fn write_reduced_csv<W: Write>(traj: &Trajectory<ReducedState>, out: &mut W) -> io::Result<()> {
    writeln!(out, "t,theta,thetadot,phibardot,J,E_red")?;
    for ((t, s), m) in traj.times.iter().zip(&traj.states).zip(&traj.monitors) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(*t),
            fmt(s.theta),
            fmt(s.thetadot),
            fmt(s.phibardot),
            fmt(m.jellet),
            fmt(m.energy),
        )?;
    }
    Ok(())
}
