//! Planning model of an electrified supply chain: electric trucks,
//! electrified manufacturing and on-site renewables, solved as one
//! time-expanded linear program to measure how far the chain can move its
//! electricity demand in time.
//!
//! The typical flow is [`scenario::load_scenario`] → [`model::build_lp`] →
//! [`solve::solve`] → [`kpi::kpi_report`]. [`bess`] sizes a battery for the
//! frozen zero-tax schedule as the inflexible alternative, and [`sweep`]
//! runs tax ladders and cost-scale grids.

pub mod model;
pub mod scenario;
pub mod solve;
pub mod kpi;
pub mod bess;
pub mod sweep;
pub mod cli;
