//! Simulation and stability analysis of the wave equation with interior
//! delayed damping and boundary velocity feedback.
//!
//! The crate is organised around the objects one needs to check exponential
//! energy decay at desk scale:
//!
//! * [`params`], [`grid`], [`history`]: shared domain types.
//! * [`solver`]: explicit leapfrog integration in 1D and on a rectangle.
//! * [`diagnostics`]: energy, history functional, multiplier term, the
//!   Lyapunov functional, the energy identity residual and decay fitting.
//! * [`region`]: geometry constants, the explicit smallness threshold
//!   `a0(k)` and the admissible `(a, xi)` polygon.
//! * [`spectral`]: characteristic roots of the 1D boundary-delay system.
//! * [`verify`]: the built-in acceptance checks.

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod fmt;
pub mod grid;
pub mod history;
pub mod params;
pub mod region;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Grid, Grid1D, Grid2D};
pub use history::HistoryBuffer;
pub use params::{GeometryConstants, LyapunovWeights, PhysicalParams};
