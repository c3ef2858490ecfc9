//! Outbreak detection from exported traveler case reports.

pub mod cli;
pub mod delay_model;
pub mod detector;
pub mod dist;
pub mod domain;
pub mod error;
pub mod growth_model;
pub mod ingest;
pub mod mcmc;
pub mod service;
pub mod voi;

pub use error::{Error, InputError, Result};
