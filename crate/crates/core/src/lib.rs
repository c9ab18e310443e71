//! Leggett-Garg inequality violations for a harmonic-oscillator coherent
//! state probed by dichotomic "which half of the well" measurements.
//!
//! All physics runs in dimensionless variables: time is the phase
//! `tau = omega * t`, lengths are measured in units of the ground-state
//! width `sigma0 = sqrt(hbar / 2 m omega)` and the peak momentum enters as
//! `p_tilde = p0 / sqrt(m omega hbar)`. See `docs/dimensionless.md` for the
//! reduction of the laboratory formulas.
//!
//! Two engines compute the joint probabilities that feed the LGI quantity
//! `C = C12 + C23 + C34 - C14`:
//!
//! * [`measurement::AnalyticEngine`] evaluates the closed-form evolution of
//!   half-line truncated packets through the Faddeeva function and adaptive
//!   quadrature.
//! * [`grid::GridEngine`] propagates a sampled wavefunction with a
//!   split-operator spectral method, and also supports unsharp measurements.

pub mod coherent;
pub mod config;
pub mod error;
pub mod grid;
pub mod lgi;
pub mod measurement;
pub mod quadrature;
pub mod report;
pub mod specfun;
pub mod tables;
pub mod units;

pub use error::{LgiError, Result};
pub use lgi::{lgi_value, LgiResult, Schedule};
pub use units::{DimensionlessParams, PhysicalParams};
pub use measurement::{AnalyticEngine, JointEngine, JointTable, Outcome};
