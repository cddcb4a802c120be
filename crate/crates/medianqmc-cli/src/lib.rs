//! Command-line harness around the `medianqmc` library: the convergence
//! experiment grid with its CSV/SVG emitters, point dumps, error-bound
//! certificates, and the tiered self-check suites.

pub mod bound;
pub mod config;
pub mod dirnums;
pub mod emit;
pub mod experiment;
pub mod verify;
