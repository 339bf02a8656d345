//! Temporary build surface while modules land.
pub mod dataset;
pub mod geostat;
