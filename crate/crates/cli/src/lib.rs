//! Scan driver for the `more-adapt` simulator.
//!
//! A [`RunConfig`] names a method, a list of geometries and the reference
//! states; [`run_scan`] runs every geometry and writes, per geometry,
//! `energies.csv`, `trace.csv` and `properties.csv`, and per scan
//! `curves.csv`, `ansatz.csv` and one SVG per plot panel.

pub mod config;
pub mod error;
pub mod plot;
pub mod scan;

pub use config::{GeometrySpec, IrrepSpec, Method, ReferenceSpec, RunConfig};
pub use error::ScanError;
pub use scan::{run_geometry, run_scan, summarize_ansatz, AnsatzSummary, GeometryResult, ScanReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
