//! Linear stability of the steady states: characteristic polynomial of the
//! linearized reduced system, closed-form spin thresholds for the vertical
//! states, the sign function governing intermediate-state stability, the
//! bifurcation point of the intermediate branch, and the resulting
//! classification of tops into six groups.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::equilibria::{self, BranchPoint, SteadyKind, SteadyState};
use crate::model::TopParams;
use crate::reduction;
use crate::roots;

/// Shorthand coefficients of the linearization at a steady state. The cubic
/// factor of the characteristic polynomial is
/// `l^3 + (alpha + gamma) l^2 + (alpha gamma + beta^2 + delta) l + delta gamma`.
///
/// `beta` and `gamma` are evaluated from closed forms in which the sin factors
/// of the phibar inertia have been cancelled algebraically, so the pole states
/// theta0 = 0, pi are perfectly regular here even though the reduced chart is
/// not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationCoeffs {
    /// Tilt damping rate, mu m g (R - eps cos theta0)^2 / T_theta (1/s).
    pub alpha: f64,
    /// Gyroscopic coupling rate, K'(theta0) / sqrt(T_theta T_phibar) (1/s).
    pub beta: f64,
    /// Phibar damping rate, mu m g sin^2(theta0) / T_phibar (1/s).
    pub gamma: f64,
    /// Stiffness, W''(theta0) / T_theta (1/s^2). Its sign decides stability.
    pub delta: f64,
}

/// Characteristic polynomial of the linearized reduced system, stored as the
/// cubic factor of `p(l) = l (l^3 + c2 l^2 + c1 l + c0)`. The explicit zero
/// root reflects the residual phibar symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPoly {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CharPoly {
    /// Coefficients of the full quartic, highest power first:
    /// `[1, c2, c1, c0, 0]`.
    pub fn quartic_coeffs(&self) -> [f64; 5] {
        [1.0, self.c2, self.c1, self.c0, 0.0]
    }

    /// The four eigenvalues: an exact zero plus the closed-form cubic roots.
    pub fn roots(&self) -> [Complex64; 4] {
        let cubic = roots::cubic_roots(self.c2, self.c1, self.c0);
        [Complex64::new(0.0, 0.0), cubic[0], cubic[1], cubic[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StabilityError {
    /// |delta| is below the marginal threshold (a bifurcation locus), or
    /// mu = 0 where the spectrum is only marginally stable; no asymptotic
    /// verdict exists in either case.
    #[error(
        "degenerate linearization (delta = {delta:.6e} 1/s^2); no asymptotic stability verdict"
    )]
    DegenerateCase { delta: f64 },
}

/// Stiffness delta = W''(theta0) / T_theta(theta0) at a configuration; the
/// quantity whose sign is the whole stability story.
pub fn delta_at(params: &TopParams, theta0: f64, jellet: f64) -> f64 {
    reduction::effective_potential_dd(params, jellet, theta0)
        / reduction::inertia_theta(params, theta0)
}

/// Linearization coefficients at a steady state.
pub fn linearization(params: &TopParams, steady: &SteadyState) -> LinearizationCoeffs {
    let th = steady.theta0;
    let mu_mg = params.friction * params.mass * params.gravity;
    let m_theta = reduction::inertia_theta(params, th);
    let d = reduction::jellet_inertia(params, th);
    let ac = params.inertia_transverse * params.inertia_axial;
    let h = params.radius - params.eccentricity * th.cos();

    // gamma = mu m g sin^2 / T_phibar with T_phibar = A C sin^2 / D.
    let gamma = mu_mg * d / ac;
    // beta = K' / sqrt(T_theta T_phibar); one sin cancels against sqrt(T_phibar).
    let beta =
        reduction::gyro_coupling_d_reduced(params, steady.jellet, th) * (d / (m_theta * ac)).sqrt();
    LinearizationCoeffs {
        alpha: mu_mg * h * h / m_theta,
        beta,
        gamma,
        delta: delta_at(params, th, steady.jellet),
    }
}

/// Characteristic polynomial of the linearization at a steady state.
pub fn characteristic_polynomial(params: &TopParams, steady: &SteadyState) -> CharPoly {
    let l = linearization(params, steady);
    CharPoly {
        c2: l.alpha + l.gamma,
        c1: l.alpha * l.gamma + l.beta * l.beta + l.delta,
        c0: l.delta * l.gamma,
    }
}

/// Asymptotic linear stability of a steady state: all nonzero eigenvalues in
/// the open left half plane, which holds exactly when delta > 0. Marginal
/// states (|delta| below threshold, or mu = 0) are reported as degenerate
/// rather than forced into a verdict.
pub fn is_linearly_stable(
    params: &TopParams,
    steady: &SteadyState,
) -> Result<bool, StabilityError> {
    let l = linearization(params, steady);
    let threshold = 1e-12 * params.mass * params.gravity * params.eccentricity
        / reduction::inertia_theta(params, steady.theta0);
    if params.friction == 0.0 || l.delta.abs() < threshold {
        return Err(StabilityError::DegenerateCase { delta: l.delta });
    }
    Ok(l.delta > 0.0)
}

/// Spin threshold of the upright state: theta = 0 is stable iff |n0| < n1.
/// `None` when A/C <= 1 - eps/R, where upright is stable for every spin.
pub fn threshold_n1(params: &TopParams) -> Option<f64> {
    let ratios = params.ratios();
    let denom = ratios.inertia_ratio - (1.0 - ratios.eccentricity_ratio);
    if denom <= 0.0 {
        return None;
    }
    let mge = params.mass * params.gravity * params.eccentricity;
    Some((mge / (params.inertia_axial * denom)).sqrt() * (1.0 - ratios.eccentricity_ratio))
}

/// Spin threshold of the inverted state: theta = pi is stable iff |n_pi| > n2.
/// `None` when A/C >= 1 + eps/R, where inversion is unstable for every spin.
pub fn threshold_n2(params: &TopParams) -> Option<f64> {
    let ratios = params.ratios();
    let denom = (1.0 + ratios.eccentricity_ratio) - ratios.inertia_ratio;
    if denom <= 0.0 {
        return None;
    }
    let mge = params.mass * params.gravity * params.eccentricity;
    Some((mge / (params.inertia_axial * denom)).sqrt() * (1.0 + ratios.eccentricity_ratio))
}

/// Lower bound of n2 over all shapes: n* = 2 sqrt(A m g eps) / C, attained
/// at A/C = (1 + eps/R) / 2.
pub fn threshold_n_star(params: &TopParams) -> f64 {
    2.0 * (params.inertia_transverse * params.mass * params.gravity * params.eccentricity).sqrt()
        / params.inertia_axial
}

/// Sign function for intermediate-state stability: on the branch, a state at
/// x = cos(theta0) is stable iff g(x) > 0. Strictly decreasing in x, so at
/// most one stability change can occur along a branch.
pub fn g_function(params: &TopParams, cos_theta: f64) -> f64 {
    let ratios = params.ratios();
    let a = ratios.inertia_ratio;
    let e = ratios.eccentricity_ratio;
    let x = cos_theta;
    let p = (a - 1.0) * x + e;
    let quad = a * (1.0 - x * x) + (x - e) * (x - e);
    (a - 1.0) + 4.0 * p * p / quad
}

/// The root of g on the real line, whether or not it lies in [-1, 1]:
/// x_b as the minus branch of the quadratic g = 0. `None` when the radicand
/// 1 - A/C - (eps/R)^2 is not positive (no bifurcation anywhere).
pub(crate) fn bifurcation_point_unfiltered(params: &TopParams) -> Option<f64> {
    let ratios = params.ratios();
    let a = ratios.inertia_ratio;
    let e = ratios.eccentricity_ratio;
    let radicand = 1.0 - a - e * e;
    if radicand <= 0.0 {
        return None;
    }
    // radicand > 0 forces a < 1, so the division is safe and positive.
    Some((e - (3.0_f64.sqrt() / 3.0) * a.sqrt() * radicand.sqrt()) / (1.0 - a))
}

/// Bifurcation point of the intermediate branch: x_b = cos(theta_b) where the
/// branch changes stability. Present only when it lies on a physical branch
/// (|x_b| <= 1); the plus root of the same quadratic never does.
pub fn bifurcation_point(params: &TopParams) -> Option<f64> {
    bifurcation_point_unfiltered(params).filter(|xb| xb.abs() <= 1.0)
}

/// The six groups, by inertia ratio, eccentricity, and branch structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    #[serde(rename = "Ia")]
    Ia,
    #[serde(rename = "Ib")]
    Ib,
    #[serde(rename = "IIa")]
    IIa,
    #[serde(rename = "IIb")]
    IIb,
    #[serde(rename = "IIc")]
    IIc,
    #[serde(rename = "III")]
    III,
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Ia => "Ia",
            Group::Ib => "Ib",
            Group::IIa => "IIa",
            Group::IIb => "IIb",
            Group::IIc => "IIc",
            Group::III => "III",
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of one top: its group and every threshold that exists for
/// it. Fields are `None` exactly when the defining inequality fails.
/// `boundary_flags` lists any defining inequality that holds only within
/// 1e-12; those tops sit on a measure-zero boundary and the group label
/// should be read with that in mind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub group: Group,
    /// Existence boundary angle of intermediate states (groups I and III).
    pub theta_c: Option<f64>,
    /// Tilt of the stability change along the branch, arccos(x_b).
    pub theta_b: Option<f64>,
    /// Cosine of theta_b when the bifurcation lies on the branch.
    pub x_b: Option<f64>,
    /// Upright spin threshold.
    pub n1: Option<f64>,
    /// Inverted spin threshold.
    pub n2: Option<f64>,
    /// Lower bound of n2, reported alongside it.
    pub n_star: Option<f64>,
    pub boundary_flags: Vec<String>,
}

/// Classifies a top into one of the six groups. Independent of mu.
pub fn classify(params: &TopParams) -> ClassificationReport {
    const TOL: f64 = 1e-12;
    let ratios = params.ratios();
    let a = ratios.inertia_ratio;
    let e = ratios.eccentricity_ratio;
    let t = a - 1.0;
    let radicand = 1.0 - a - e * e;
    let xb_raw = bifurcation_point_unfiltered(params);

    let mut flags = Vec::new();
    if (t + e).abs() <= TOL {
        flags.push("A/C - 1 = -eps/R (group I/II boundary)".to_string());
    }
    if (t - e).abs() <= TOL {
        flags.push("A/C - 1 = eps/R (group II/III boundary)".to_string());
    }
    if radicand.abs() <= TOL {
        flags.push("1 - A/C - (eps/R)^2 = 0 (bifurcation radicand boundary)".to_string());
    }
    if let Some(xb) = xb_raw {
        if (xb.abs() - 1.0).abs() <= TOL {
            flags.push("|x_b| = 1 (bifurcation at a branch endpoint)".to_string());
        }
    }

    let group = if t < -e {
        // Group I always has a real x_b: a < 1 - e gives 1 - a - e^2 > 0.
        let xb = xb_raw.expect("group I tops always have a real bifurcation root");
        if xb < -1.0 || (xb + 1.0).abs() <= TOL {
            Group::Ia
        } else {
            Group::Ib
        }
    } else if t > e {
        Group::III
    } else if radicand > 0.0 {
        match xb_raw {
            Some(xb) if xb.abs() < 1.0 => Group::IIa,
            Some(xb) if xb < -1.0 => Group::IIc,
            _ => Group::IIb,
        }
    } else {
        Group::IIb
    };

    let n2 = threshold_n2(params);
    ClassificationReport {
        group,
        theta_c: equilibria::theta_c(params),
        theta_b: bifurcation_point(params).map(f64::acos),
        x_b: bifurcation_point(params),
        n1: threshold_n1(params),
        n_star: n2.map(|_| threshold_n_star(params)),
        n2,
        boundary_flags: flags,
    }
}

/// One plot-ready series of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSeries {
    pub kind: SteadyKind,
    pub points: Vec<BranchPoint>,
}

/// Bifurcation-diagram data over a J^2 range: the two vertical lines split
/// into stable/unstable samples, plus every continued intermediate branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub series: Vec<DiagramSeries>,
    /// J^2 at which the upright line changes stability, if n1 exists.
    pub jsq_upright_threshold: Option<f64>,
    /// J^2 at which the inverted line changes stability, if n2 exists.
    pub jsq_inverted_threshold: Option<f64>,
}

/// Builds the diagram on `steps` grid points over [jsq_min, jsq_max].
pub fn diagram(params: &TopParams, jsq_min: f64, jsq_max: f64, steps: usize) -> Diagram {
    assert!(steps >= 2, "need at least two grid points");
    assert!(jsq_min >= 0.0 && jsq_max >= jsq_min, "invalid J^2 range");
    let c = params.inertia_axial;
    let jsq_of_n0 = |n: f64| (c * n * (params.radius - params.eccentricity)).powi(2);
    let jsq_of_npi = |n: f64| (c * n * (params.radius + params.eccentricity)).powi(2);

    let mut up = Vec::with_capacity(steps);
    let mut down = Vec::with_capacity(steps);
    for k in 0..steps {
        let jsq = jsq_min + (jsq_max - jsq_min) * k as f64 / (steps - 1) as f64;
        let j = jsq.sqrt();
        up.push(BranchPoint {
            jsq,
            theta0: 0.0,
            stable: delta_at(params, 0.0, j) > 0.0,
        });
        down.push(BranchPoint {
            jsq,
            theta0: std::f64::consts::PI,
            stable: delta_at(params, std::f64::consts::PI, j) > 0.0,
        });
    }
    let mut series = vec![
        DiagramSeries {
            kind: SteadyKind::VerticalUp,
            points: up,
        },
        DiagramSeries {
            kind: SteadyKind::VerticalDown,
            points: down,
        },
    ];
    if jsq_max > 0.0 {
        for branch in equilibria::continue_branch(params, jsq_min, jsq_max, steps) {
            series.push(DiagramSeries {
                kind: SteadyKind::Intermediate,
                points: branch.points,
            });
        }
    }
    Diagram {
        series,
        jsq_upright_threshold: threshold_n1(params).map(jsq_of_n0),
        jsq_inverted_threshold: threshold_n2(params).map(jsq_of_npi),
    }
}
