//! Contextual stochastic block models and corrected graph convolutions.
//!
//! The crate samples two-block CSBM instances, applies corrected and vanilla
//! graph convolutions without forming dense matrices, classifies the
//! convolved features by sign and measures the spectral quantities that
//! govern partial and exact recovery. The [`oracle`] module holds dense and
//! exhaustive reference computations used to cross-check everything at small
//! scale, and [`experiments`] runs seeded Monte-Carlo sweeps.

pub mod classifier;
pub mod convolution;
pub mod csbm_model;
pub mod error;
pub mod experiments;
pub mod linop;
pub mod oracle;
pub mod rng;
pub mod spectral_diag;

pub use error::{Error, Result};
