//! Benchmark fixtures.

use schottky_core::{build_funnel_group, Discretization, SchottkyGroup, TransferOperator};

/// Funnel group with lengths (7, 8), δ ≈ 0.1598.
pub fn reference_group() -> SchottkyGroup {
    build_funnel_group(2, &[7.0, 8.0]).expect("reference group")
}

pub fn reference_operator(degree: usize) -> TransferOperator {
    let disc = Discretization::new(degree, 0.75).expect("discretization");
    TransferOperator::new(&reference_group(), disc).expect("operator")
}

/// Hausdorff dimension of [`reference_group`] at `M = 24`.
pub const REFERENCE_DELTA: f64 = 0.15983398339824523;
