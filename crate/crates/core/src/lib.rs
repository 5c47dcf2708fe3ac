//! Bode sensitivity integrals for feedback loops closed by fractional-order
//! PID controllers, and numerical cross-checks of the branch-cut contour
//! argument behind them.
//!
//! The modules build on each other bottom-up:
//!
//! * [`funcmodel`] evaluates plants, controllers and sensitivities;
//! * [`rootfind`] locates open-loop poles and certifies closed-loop stability;
//! * [`bodeint`] integrates `ln|S(iω)|²` along the imaginary axis;
//! * [`contour`] builds the closed branch-cut contour and checks each piece;
//! * [`weier`] realizes sensitivities with prescribed infinite zero sequences;
//! * [`tuner`] sweeps controller parameters;
//! * [`cli`] is the batch front end used by the `bodefrac` binary.

pub mod bodeint;
pub mod cli;
pub mod contour;
pub mod error;
pub mod funcmodel;
pub mod quad;
pub mod rootfind;
pub mod tuner;
pub mod weier;

pub use error::{Error, Result};
pub use funcmodel::{FractionalPID, LoopModel, PoleRecord, Polynomial, RationalPlant};
pub use num_complex::Complex64;
