//! Physical parameters of an eccentric-sphere top and the derived scalar
//! functions of the tilt angle used throughout the crate.
//!
//! Everything here is immutable after construction; values can be shared and
//! sent between threads freely. SI units and radians everywhere.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parameter validation failure, naming the first violated constraint.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("parameters must be finite numbers")]
    NotFinite,
    #[error("m must be > 0")]
    Mass,
    #[error("R must be > 0")]
    Radius,
    #[error("A must be > 0")]
    TransverseInertia,
    #[error("C must be > 0")]
    AxialInertia,
    #[error("g must be > 0")]
    Gravity,
    #[error("mu must be >= 0")]
    Friction,
    #[error("eccentricity must satisfy 0 < eps < R")]
    Eccentricity,
    #[error("parameter file: {0}")]
    Io(String),
    #[error("parameter file: {0}")]
    Format(String),
}

/// Physical constants of one top: a sphere of radius `R` whose center of
/// mass sits a distance `eps` from the geometric center along the symmetry
/// axis, with axially symmetric inertia (`A` transverse, `C` axial).
///
/// `mu` is the viscous sliding-friction coefficient; the friction force is
/// `-mu * Rn * v_slip`, so `mu` carries units of inverse velocity (s/m).
/// `mu = 0` (frictionless) is permitted; `eps = 0` is not, since the whole
/// analysis rests on the offset center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopParams {
    /// Mass (kg).
    #[serde(rename = "m")]
    pub mass: f64,
    /// Sphere radius (m).
    #[serde(rename = "R")]
    pub radius: f64,
    /// Center-of-mass offset from the geometric center (m), 0 < eps < R.
    #[serde(rename = "eps")]
    pub eccentricity: f64,
    /// Transverse moment of inertia about the center of mass (kg m^2).
    #[serde(rename = "A")]
    pub inertia_transverse: f64,
    /// Axial moment of inertia about the symmetry axis (kg m^2).
    #[serde(rename = "C")]
    pub inertia_axial: f64,
    /// Viscous friction coefficient (s/m), >= 0.
    #[serde(rename = "mu")]
    pub friction: f64,
    /// Gravitational acceleration (m/s^2).
    #[serde(rename = "g")]
    pub gravity: f64,
}

/// Dimensionless shape of a top. Always computed from [`TopParams`], never
/// stored separately, so it cannot drift out of sync with (A, C, eps, R).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeRatios {
    /// A / C.
    pub inertia_ratio: f64,
    /// eps / R, in (0, 1).
    pub eccentricity_ratio: f64,
}

impl TopParams {
    /// Builds and validates a parameter set in one step.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mass: f64,
        radius: f64,
        eccentricity: f64,
        inertia_transverse: f64,
        inertia_axial: f64,
        friction: f64,
        gravity: f64,
    ) -> Result<Self, ParamError> {
        TopParams {
            mass,
            radius,
            eccentricity,
            inertia_transverse,
            inertia_axial,
            friction,
            gravity,
        }
        .validated()
    }

    /// Convenience constructor from the dimensionless shape (A/C, eps/R)
    /// plus the dimensional scales (m, R, C, mu, g).
    pub fn from_ratios(
        mass: f64,
        radius: f64,
        inertia_ratio: f64,
        eccentricity_ratio: f64,
        inertia_axial: f64,
        friction: f64,
        gravity: f64,
    ) -> Result<Self, ParamError> {
        TopParams::new(
            mass,
            radius,
            eccentricity_ratio * radius,
            inertia_ratio * inertia_axial,
            inertia_axial,
            friction,
            gravity,
        )
    }

    /// Returns the parameters unchanged iff every invariant holds; otherwise
    /// reports the first violated one.
    pub fn validated(self) -> Result<Self, ParamError> {
        let all = [
            self.mass,
            self.radius,
            self.eccentricity,
            self.inertia_transverse,
            self.inertia_axial,
            self.friction,
            self.gravity,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(ParamError::NotFinite);
        }
        if self.mass <= 0.0 {
            return Err(ParamError::Mass);
        }
        if self.radius <= 0.0 {
            return Err(ParamError::Radius);
        }
        if self.inertia_transverse <= 0.0 {
            return Err(ParamError::TransverseInertia);
        }
        if self.inertia_axial <= 0.0 {
            return Err(ParamError::AxialInertia);
        }
        if self.gravity <= 0.0 {
            return Err(ParamError::Gravity);
        }
        if self.friction < 0.0 {
            return Err(ParamError::Friction);
        }
        if !(self.eccentricity > 0.0 && self.eccentricity < self.radius) {
            return Err(ParamError::Eccentricity);
        }
        Ok(self)
    }

    pub fn ratios(&self) -> ShapeRatios {
        ShapeRatios {
            inertia_ratio: self.inertia_transverse / self.inertia_axial,
            eccentricity_ratio: self.eccentricity / self.radius,
        }
    }

    /// Height of the center of mass above the table, h(theta) = R - eps cos(theta).
    pub fn height(&self, theta: f64) -> f64 {
        self.radius - self.eccentricity * theta.cos()
    }

    /// dh/dtheta = eps sin(theta).
    pub fn height_d(&self, theta: f64) -> f64 {
        self.eccentricity * theta.sin()
    }

    /// d2h/dtheta2 = eps cos(theta).
    pub fn height_dd(&self, theta: f64) -> f64 {
        self.eccentricity * theta.cos()
    }

    /// Inertia blend (A - C) cos(theta0) + C eps/R entering the expanded
    /// stability inequality for a steady state at tilt `theta0`.
    pub fn coupling_inertia(&self, theta0: f64) -> f64 {
        (self.inertia_transverse - self.inertia_axial) * theta0.cos()
            + self.inertia_axial * self.eccentricity / self.radius
    }

    /// Parses a preset from JSON text with keys `m, R, eps, A, C, mu, g`.
    pub fn from_json_str(text: &str) -> Result<Self, ParamError> {
        let params: TopParams =
            serde_json::from_str(text).map_err(|e| ParamError::Format(e.to_string()))?;
        params.validated()
    }

    /// Loads and validates a JSON preset file.
    pub fn from_preset_file<P: AsRef<Path>>(path: P) -> Result<Self, ParamError> {
        let text = fs::read_to_string(path).map_err(|e| ParamError::Io(e.to_string()))?;
        TopParams::from_json_str(&text)
    }
}
