use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::leading_eigenvalue;
use crate::symbolic::Character;
use crate::transfer::TransferOperator;

/// δ from two criteria on the same discretised operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    /// leading eigenvalue of `A(s, 0)` equal to 1
    pub delta: f64,
    /// largest real zero of `det(I - A(s, 0))` in `(0, 1)`
    pub determinant_zero: f64,
    /// leading eigenvalue at `delta`
    pub eigenvalue: f64,
    pub bisection_steps: usize,
}

impl DeltaEstimate {
    pub fn discrepancy(&self) -> f64 {
        (self.delta - self.determinant_zero).abs()
    }
}

const MAX_BISECTION: usize = 200;

fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut positive: impl FnMut(f64) -> Result<bool>) -> Result<(f64, usize)> {
    let mut steps = 0;
    while hi - lo > tol {
        if steps == MAX_BISECTION {
            return Err(Error::NonConvergence {
                iterations: steps,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((0.5 * (lo + hi), steps))
}

/// Bisection on `s` for `λ(A(s, 0)) = 1`, cross-checked by bisection on the
/// sign of the real determinant.
pub fn hausdorff_dimension(op: &TransferOperator, tol: f64) -> Result<DeltaEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let trivial = Character::trivial(op.group().rank());
    let lambda = |s: f64| -> Result<f64> {
        let a = op.assemble(Complex64::new(s, 0.0), &trivial)?;
        Ok(leading_eigenvalue(&a.matrix)?.value)
    };
    let (lo, hi) = (1e-9, 1.0 - 1e-9);
    if !(lambda(lo)? > 1.0 && lambda(hi)? < 1.0) {
        return Err(Error::NotBracketed("leading eigenvalue does not cross 1 in (0, 1)".into()));
    }
    let (delta, steps) = bisect(lo, hi, tol, |s| Ok(lambda(s)? > 1.0))?;

    let det = |s: f64| -> Result<f64> { Ok(op.fredholm_determinant(Complex64::new(s, 0.0), &trivial)?.re) };
    // det(I - A) is positive to the right of δ; walk left to the first sign change
    let mut right = 1.0;
    if !(det(right)? > 0.0) {
        return Err(Error::NotBracketed("determinant not positive at s = 1".into()));
    }
    let step = 1.0 / 64.0;
    let mut left = right - step;
    while det(left)? > 0.0 {
        right = left;
        left -= step;
        if left <= 0.0 {
            return Err(Error::NotBracketed("determinant has no sign change in (0, 1)".into()));
        }
    }
    let (determinant_zero, _) = bisect(left, right, tol, |s| Ok(det(s)? <= 0.0))?;
    Ok(DeltaEstimate {
        delta,
        determinant_zero,
        eigenvalue: lambda(delta)?,
        bisection_steps: steps,
    })
}
