//! Decoherence of individually addressed trapped-ion qubits driven by thermal
//! axial motion.
//!
//! The crate is organised around the physical pipeline:
//!
//! * [`chain`] – trap potentials, equilibrium positions and axial normal modes.
//! * [`decoherence`] – addressing-beam profiles, decay parameters and the
//!   thermally averaged Rabi trace (closed form plus a Monte-Carlo oracle).
//! * [`heating`] – power-law electric-field noise and decay-parameter growth.
//! * [`gates`] – two-qubit gate-fidelity bounds and SPAM handling.
//! * [`fitting`] – a bounded Levenberg-Marquardt engine and the fit recipes.
//! * [`cooling`] – sympathetic-cooling crosstalk estimate.
//! * [`cli`] – configuration, CSV/JSON I/O and the `trapdeco` subcommands.
//!
//! Everything is SI internally. The CLI speaks kHz (ω/2π), µm and amu.

pub mod chain;
pub mod cli;
pub mod constants;
pub mod cooling;
pub mod decoherence;
mod error;
pub mod fitting;
pub mod gates;
pub mod heating;

pub use error::{Error, Result};
