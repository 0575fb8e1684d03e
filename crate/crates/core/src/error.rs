use num_complex::Complex64;
use thiserror::Error;

use crate::spectra::Rect;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pole: |cz + d| = {modulus:e} at z = {z}")]
    Pole { z: Complex64, modulus: f64 },

    #[error("map is not hyperbolic: |trace| = {trace}")]
    NonHyperbolic { trace: f64 },

    #[error("infeasible Schottky configuration: worst margin {margin:e}")]
    InfeasibleConfiguration { margin: f64 },

    #[error("invalid Schottky data: {0}")]
    InvalidGroup(String),

    #[error("word is not reduced at position {position}")]
    NonReducedWord { position: usize },

    #[error("enumeration budget exceeded: {count} words requested, cap is {cap}")]
    Budget { count: u128, cap: u64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("branch cut crossed: derivative winds around 0 on the sample circle of disk {disk}")]
    BranchCut { disk: usize },

    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    #[error("uncertified zero count on {rect}: integral = {value}")]
    UncertifiedCount { rect: Rect, value: Complex64 },

    #[error("maximum subdivision depth {depth} reached on {rect}")]
    MaxDepth { depth: usize, rect: Rect },

    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: u64, cap: u64 },

    #[error("Cayley graph is disconnected: eigenvalue 0 at a = {0:?}")]
    DisconnectedGraph(Vec<i64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache I/O: {0}")]
    Cache(String),
}
