//! Analytic model, Monte Carlo oracle and design search for receivers that
//! use empty-signal detection (ESD) to filter vacuum signals.
//!
//! Each incoming signal is tagged on an auxiliary degree of freedom; `n`
//! auxiliaries are coupled to it through a controlled gate and read out by
//! single-photon detectors, and the signal is kept when at least `k` of
//! them report. The crate evaluates the resulting non-empty signal rate
//! (NESR), ESD sifting rate, QBER and rate in closed form
//! ([`analytics`]), checks them against an event-level simulation
//! ([`montecarlo`]), and searches the `(n, k)` grid ([`designer`]).
//!
//! ```
//! use esd_core::analytics::{link_metrics, EsdDesign};
//! use esd_core::params::ParamSet;
//!
//! let params = ParamSet::reference();
//! let m = link_metrics(1e-13, EsdDesign::new(7, 3).unwrap(), &params).unwrap();
//! assert!(m.qber.unwrap() < 0.03);
//! ```

pub mod analytics;
pub mod cli;
pub mod config;
pub mod designer;
pub mod error;
pub mod montecarlo;
pub mod params;
pub mod report;

pub use analytics::{link_metrics, EsdDesign, LinkMetrics};
pub use error::{EsdError, Result};
pub use params::ParamSet;
