//! Deterministic simulation and parameter identification for cam-driven
//! sliding-friction capsule locomotion.
//!
//! A capsule carries `n` radial sliders, each driven by one lobe of a shared
//! cam. Slow retraction strokes drag the sliders backward against the wall
//! (thrust forward), fast advance strokes reposition them (thrust backward),
//! and the asymmetry of the two duty fractions sets the net traction. The
//! crate covers:
//!
//! - [`cam`]: piecewise cam lift profiles, duty fractions, slider kinematics;
//! - [`contact`]: wall traction models — ideal Coulomb traction and a
//!   stick–slip Kelvin–Voigt viscoelastic wall;
//! - [`capsule`]: multi-slider superposition, cycle-averaged thrust, thrust
//!   ripple;
//! - [`identify`]: recovery of wall parameters (stiffness, damping, relaxation
//!   times, friction limits) from measured single-slider force traces;
//! - [`sweep`]: deterministic design-space sweeps over duty fractions, lobe
//!   counts and slider counts;
//! - [`io`]: the text formats (CSV tables, TOML descriptors, JSON summaries)
//!   shared by the library and the `capsim` command-line tool.
//!
//! Interface units are mm, s, N and rad/s; contact-model internals run in SI.
//! Every operation is deterministic: identical inputs produce bit-identical
//! outputs, including under the parallel sweep runner.

pub mod cam;
pub mod capsule;
pub mod contact;
pub mod identify;
pub mod io;
pub mod reference;
pub mod sweep;

pub use cam::{CamProfile, CamSegment, DutyFractions, SegmentKind, SegmentShape, SliderTrajectory};
pub use capsule::{CapsuleConfig, ContactModel, CycleStats, ThrustTrace};
pub use contact::{ContactTrace, Mode, SmoothingSpec, TissueParams};
pub use identify::{FitReport, MeasuredTrace};
pub use sweep::{SweepSpec, SweepResult};

/// Errors produced by every fallible operation in the crate.
///
/// The CLI maps these onto process exit codes: validation errors → 1,
/// I/O and parse errors → 2, fit-convergence errors → 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument or configuration value (precondition violation).
    #[error("validation: {0}")]
    Validation(String),
    /// A time step too coarse for the requested geometry or dynamics.
    #[error("resolution: {0}")]
    UnderResolved(String),
    /// Ripple (coefficient of variation) is undefined for a zero-mean cycle.
    #[error("ripple undefined: cycle mean is zero within {0} N")]
    ZeroMeanRipple(f64),
    /// A parameter fit failed to converge or was rejected.
    #[error("fit: {0}")]
    Fit(String),
    /// Malformed input data (CSV/TOML parse failures, unit mismatches).
    #[error("parse: {0}")]
    Parse(String),
    /// Underlying file-system failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
