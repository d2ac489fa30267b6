//! Dynamics of an eccentric-sphere top sliding on a horizontal table.
//!
//! The body is a sphere whose center of mass is offset along its symmetry
//! axis; spun fast enough upright, many such tops flip over and spin on the
//! other pole. This crate implements the machinery to simulate and explain
//! that behavior:
//!
//! - [`dynamics`]: the full equations of motion on R^2 x SO(3) under a
//!   viscous sliding-friction law, with the Jellet invariant and energy as
//!   built-in monitors;
//! - [`reduction`]: the truncated system (translational velocities dropped
//!   from the friction moments), the change to a cyclic coordinate, and the
//!   two-degree-of-freedom reduced system on a Jellet level;
//! - [`simulate`]: adaptive Runge-Kutta integration of all three systems
//!   with event-based termination and CSV export;
//! - [`equilibria`]: vertical and intermediate steady states, plus branch
//!   continuation over the squared Jellet;
//! - [`stability`]: characteristic polynomials, spin thresholds, the
//!   bifurcation point of the intermediate branch, and the six-group
//!   classification with bifurcation-diagram output.
//!
//! ```
//! use tippetop::{model::TopParams, stability, stability::Group};
//!
//! // A/C = 0.8, eps/R = 0.3 on desk-toy scales.
//! let top = TopParams::from_ratios(0.015, 0.025, 0.8, 0.3, 2e-6, 0.3, 9.81).unwrap();
//! let report = stability::classify(&top);
//! assert_eq!(report.group, Group::IIa);
//! // Upright spins above n1 destabilize; the inverted state captures spins
//! // whose Jellet level maps above n2.
//! assert!(report.n1.unwrap() > report.n_star.unwrap());
//! ```

pub mod dynamics;
pub mod equilibria;
pub mod model;
pub mod reduction;
pub mod roots;
pub mod simulate;
pub mod stability;

pub use dynamics::{DynamicsError, FullState};
pub use model::{ParamError, ShapeRatios, TopParams};
pub use reduction::{ReducedState, TruncatedState};
pub use simulate::{IntegratorConfig, Termination, Trajectory};
pub use stability::{ClassificationReport, Group};
