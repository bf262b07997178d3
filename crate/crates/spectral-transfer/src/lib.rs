//! Functional-calculus spectral graph filters and ConvNets, with the
//! sampling, coarsening and perturbation operators needed to measure their
//! transferability and to certify the corresponding inequalities.

pub mod activation;
pub mod cli;
pub mod config;
pub mod convnet;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod report;
pub mod sampling;
pub mod space;
pub mod transfer;

pub use error::{Error, Result};
