//! Simulator for the nested Mach-Zehnder interferometer "which-path" experiment.
//!
//! Five mirrors (C, E, A, B, F) vibrate harmonically at individual frequencies and
//! shift their beams vertically on a quad-cell detector. The crate composes the
//! detector-plane field from the three beam paths, integrates the up/down intensity
//! difference, and analyses its power spectrum. A linearized closed form of the
//! difference signal ([`analytic`]) is kept alongside the full nonlinear path
//! ([`interferometer`] + [`detector`]) so each can be checked against the other.
//!
//! Mirror motion is treated quasi-statically: a deflection only translates the
//! transverse profile of a beam; it never changes the optical phase.

pub mod analytic;
pub mod config;
pub mod detector;
pub mod dynamics;
mod error;
pub mod exec;
pub mod interferometer;
pub mod profiles;
pub mod spectrum;
pub mod verification;

pub use error::{Error, Result};
pub use exec::Execution;
pub use interferometer::{Blocking, Mirror, MirrorDeflections, PerMirror, PhaseConfig, Scenario, Tuning};
pub use profiles::{BeamProfile, Grid, ProfileKind};
