//! Simulation of a two-path interferometer whose recombining beamsplitter is
//! a tunable Sagnac loop, together with the entropic-uncertainty and
//! wave-particle-duality analysis of its detector counts.
//!
//! Layering, bottom-up:
//! * [`state`]: complex path amplitudes, optical elements, Born rule.
//! * [`optics`]: the concrete circuit and its closed-form probabilities.
//! * [`entropy`]: min/max entropies, `V`/`D` closed forms, EUR and WPDR checks.
//! * [`estimators`]: counts to `V`, `D` and entropies with error bars.
//! * [`montecarlo`]: weak-coherent-pulse photon counting.
//! * [`runner`]: JSON configuration, scenarios and CSV/JSON output.

pub mod angle;
pub mod entropy;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod optics;
pub mod runner;
pub mod state;
pub mod tolerance;

pub use error::{Error, Result};
