//! Steady states for a given top and Jellet level: the two vertical spinning
//! states (always present) and the intermediate tilted states, found as the
//! roots of a quartic-trigonometric residual, plus one-parameter continuation
//! of the intermediate family over J^2.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::model::TopParams;
use crate::reduction;
use crate::roots;
use crate::stability;

/// Which steady state a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyKind {
    /// J = 0, no motion at all.
    Rest,
    /// Spinning upright at theta = 0 (center of mass below the sphere center).
    VerticalUp,
    /// Spinning inverted at theta = pi.
    VerticalDown,
    /// Tilted, precessing and rolling without gliding, 0 < theta < pi.
    Intermediate,
}

impl SteadyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SteadyKind::Rest => "rest",
            SteadyKind::VerticalUp => "vertical_up",
            SteadyKind::VerticalDown => "vertical_down",
            SteadyKind::Intermediate => "intermediate",
        }
    }
}

/// One steady state of the reduced system. At every steady state the rates
/// vanish in the reduced chart (`phibardot0 = 0`); the residual motion is the
/// steady precession/spin encoded by the Jellet level and `spin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub kind: SteadyKind,
    /// Tilt of the state (0, pi, or an intermediate root).
    pub theta0: f64,
    /// Jellet level the state lives on.
    pub jellet: f64,
    /// Rate of the combined angle; identically zero at steady states.
    pub phibardot0: f64,
    /// Spin n about the symmetry axis at the state.
    pub spin: f64,
}

/// A sampled point of an equilibrium family in the (J^2, theta) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub jsq: f64,
    pub theta0: f64,
    pub stable: bool,
}

/// A continued family of steady states over a J^2 range.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumBranch {
    pub kind: SteadyKind,
    pub points: Vec<BranchPoint>,
}

/// Dimensionless residual whose zeros in (0, pi) are the intermediate
/// states:
///
/// ```text
/// f(J^2, x) = J^2 / (m g C R^2 eps) * ((A/C - 1) x + eps/R)
///           - (A/C (1 - x^2) + (x - eps/R)^2)^2,     x = cos(theta)
/// ```
pub fn f_intermediate(params: &TopParams, jsq: f64, cos_theta: f64) -> f64 {
    let ratios = params.ratios();
    let a = ratios.inertia_ratio;
    let e = ratios.eccentricity_ratio;
    let x = cos_theta;
    let scale = params.mass
        * params.gravity
        * params.inertia_axial
        * params.radius
        * params.radius
        * params.eccentricity;
    let quad = a * (1.0 - x * x) + (x - e) * (x - e);
    jsq / scale * ((a - 1.0) * x + e) - quad * quad
}

/// Intermediate states can only occur where (A/C - 1) cos(theta) + eps/R > 0.
pub fn existence_condition(params: &TopParams, theta: f64) -> bool {
    let ratios = params.ratios();
    (ratios.inertia_ratio - 1.0) * theta.cos() + ratios.eccentricity_ratio > 0.0
}

/// Boundary angle of the existence region, where the condition above changes
/// sign: arccos((eps/R) / (1 - A/C)). `None` when no such angle exists (all
/// of (0, pi) admits intermediate states, or A = C).
pub fn theta_c(params: &TopParams) -> Option<f64> {
    let ratios = params.ratios();
    let denom = 1.0 - ratios.inertia_ratio;
    if denom == 0.0 {
        return None;
    }
    let x = ratios.eccentricity_ratio / denom;
    if x.abs() > 1.0 {
        return None;
    }
    Some(x.acos())
}

/// The two vertical spinning states on Jellet level `jellet`:
/// upright with spin n0 = J / (C (R - eps)) and inverted with spin
/// n_pi = -J / (C (R + eps)). At J = 0 both degenerate to rest.
pub fn vertical_states(params: &TopParams, jellet: f64) -> (SteadyState, SteadyState) {
    let c = params.inertia_axial;
    let n0 = jellet / (c * (params.radius - params.eccentricity));
    let n_pi = -jellet / (c * (params.radius + params.eccentricity));
    let kind_of = |k: SteadyKind| if jellet == 0.0 { SteadyKind::Rest } else { k };
    (
        SteadyState {
            kind: kind_of(SteadyKind::VerticalUp),
            theta0: 0.0,
            jellet,
            phibardot0: 0.0,
            spin: n0,
        },
        SteadyState {
            kind: kind_of(SteadyKind::VerticalDown),
            theta0: std::f64::consts::PI,
            jellet,
            phibardot0: 0.0,
            spin: n_pi,
        },
    )
}

/// All intermediate steady states on the Jellet level: sign-change scan of
/// the residual over 1024 panels in theta, Brent polish, existence filter.
/// Sorted by theta; empty when the level carries none.
pub fn solve_intermediate(params: &TopParams, jellet: f64) -> Vec<SteadyState> {
    const PANELS: usize = 1024;
    let jsq = jellet * jellet;
    let f = |theta: f64| f_intermediate(params, jsq, theta.cos());
    let mut out = Vec::new();
    for (lo, hi) in roots::sign_change_brackets(f, 0.0, std::f64::consts::PI, PANELS) {
        let theta0 = if lo == hi {
            lo
        } else {
            match roots::brent(f, lo, hi, 0.0) {
                Some(t) => t,
                None => continue,
            }
        };
        // Exclude the poles themselves: those are the vertical states.
        if theta0.sin() < 1e-7 {
            continue;
        }
        if !existence_condition(params, theta0) {
            continue;
        }
        if out
            .iter()
            .any(|s: &SteadyState| (s.theta0 - theta0).abs() < 1e-9)
        {
            continue;
        }
        let d = reduction::jellet_inertia(params, theta0);
        out.push(SteadyState {
            kind: SteadyKind::Intermediate,
            theta0,
            jellet,
            phibardot0: 0.0,
            spin: jellet * (params.radius * theta0.cos() - params.eccentricity) / d,
        });
    }
    out.sort_by(|a, b| a.theta0.partial_cmp(&b.theta0).unwrap());
    out
}

/// Jellet-squared level carrying an intermediate state at tilt
/// arccos(`cos_theta`): the closed-form inverse of `f = 0` along the branch.
/// `None` outside the existence region.
pub fn branch_jsq(params: &TopParams, cos_theta: f64) -> Option<f64> {
    let ratios = params.ratios();
    let a = ratios.inertia_ratio;
    let e = ratios.eccentricity_ratio;
    let x = cos_theta;
    let p = (a - 1.0) * x + e;
    if p <= 0.0 {
        return None;
    }
    let quad = a * (1.0 - x * x) + (x - e) * (x - e);
    let scale = params.mass
        * params.gravity
        * params.inertia_axial
        * params.radius
        * params.radius
        * params.eccentricity;
    Some(scale * quad * quad / p)
}

/// Continues the intermediate family over a J^2 grid: roots at each level are
/// linked to the nearest previous root, with jumps larger than 0.1 rad
/// starting a fresh branch. Each point carries its linear-stability flag.
pub fn continue_branch(
    params: &TopParams,
    jsq_min: f64,
    jsq_max: f64,
    n_steps: usize,
) -> Vec<EquilibriumBranch> {
    assert!(n_steps >= 2, "need at least two grid points");
    assert!(jsq_min >= 0.0 && jsq_max >= jsq_min, "invalid J^2 range");
    const MAX_JUMP: f64 = 0.1;

    struct Open {
        points: Vec<BranchPoint>,
        last_theta: f64,
    }
    let mut open: Vec<Open> = Vec::new();
    let mut closed: Vec<EquilibriumBranch> = Vec::new();

    for k in 0..n_steps {
        let jsq = jsq_min + (jsq_max - jsq_min) * k as f64 / (n_steps - 1) as f64;
        let states = solve_intermediate(params, jsq.sqrt());
        let points: Vec<BranchPoint> = states
            .iter()
            .map(|s| BranchPoint {
                jsq,
                theta0: s.theta0,
                stable: stability::delta_at(params, s.theta0, s.jellet) > 0.0,
            })
            .collect();

        // Greedy nearest-theta matching between open branches and new points.
        let mut point_taken = vec![false; points.len()];
        let mut branch_extended = vec![false; open.len()];
        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for (bi, branch) in open.iter().enumerate() {
                if branch_extended[bi] {
                    continue;
                }
                for (pi, point) in points.iter().enumerate() {
                    if point_taken[pi] {
                        continue;
                    }
                    let dist = (point.theta0 - branch.last_theta).abs();
                    if dist <= MAX_JUMP && best.is_none_or(|(_, _, d)| dist < d) {
                        best = Some((bi, pi, dist));
                    }
                }
            }
            match best {
                Some((bi, pi, _)) => {
                    open[bi].points.push(points[pi]);
                    open[bi].last_theta = points[pi].theta0;
                    branch_extended[bi] = true;
                    point_taken[pi] = true;
                }
                None => break,
            }
        }
        // Branches that found no continuation are finished.
        let mut still_open = Vec::new();
        for (bi, branch) in open.into_iter().enumerate() {
            if branch_extended[bi] {
                still_open.push(branch);
            } else {
                closed.push(EquilibriumBranch {
                    kind: SteadyKind::Intermediate,
                    points: branch.points,
                });
            }
        }
        open = still_open;
        for (pi, point) in points.iter().enumerate() {
            if !point_taken[pi] {
                open.push(Open {
                    points: vec![*point],
                    last_theta: point.theta0,
                });
            }
        }
    }
    for branch in open {
        closed.push(EquilibriumBranch {
            kind: SteadyKind::Intermediate,
            points: branch.points,
        });
    }
    closed
}

/// Writes branch points as `Jsq,theta0,stable,kind` rows.
pub fn write_branch_csv<W: Write>(
    points: &[BranchPoint],
    kind: SteadyKind,
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "Jsq,theta0,stable,kind")?;
    for p in points {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{}",
            p.jsq,
            p.theta0,
            p.stable,
            kind.as_str()
        )?;
    }
    Ok(())
}
