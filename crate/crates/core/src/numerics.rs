//! Dense complex linear algebra and Taylor-coefficient extraction.
//!
//! Matrices here are small (a few hundred rows at most), so everything is a
//! straightforward in-repo implementation at double precision.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a perfect square.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::InvalidArgument("matrix is not square".into()));
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_row_major(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> ComplexMatrix {
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z = -*z;
        }
        for i in 0..self.n {
            out[(i, i)] += ONE;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// A determinant stored as `exp(ln_abs) * phase` so that values outside the
/// double range survive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    pub ln_abs: f64,
    /// Unit-modulus phase factor (zero for a singular matrix).
    pub phase: Complex64,
}

impl Determinant {
    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    /// The determinant as a complex number, or `None` when its magnitude
    /// overflows `f64`.
    pub fn value(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(ZERO);
        }
        if self.ln_abs > f64::MAX.ln() {
            return None;
        }
        Some(self.phase * self.ln_abs.exp())
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Lu {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            let inv = ONE / pivot;
            for i in (k + 1)..n {
                let f = lu[i * n + k] * inv;
                lu[i * n + k] = f;
                if f == ZERO {
                    continue;
                }
                let (top, bottom) = lu.split_at_mut(i * n);
                let krow = &top[k * n + k + 1..k * n + n];
                let irow = &mut bottom[k + 1..n];
                for (x, &y) in irow.iter_mut().zip(krow) {
                    *x -= f * y;
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> Determinant {
        if self.singular {
            return Determinant {
                ln_abs: f64::NEG_INFINITY,
                phase: ZERO,
            };
        }
        let mut ln_abs = 0.0;
        let mut phase = if self.swaps % 2 == 0 { ONE } else { -ONE };
        for i in 0..self.n {
            let d = self.lu[i * self.n + i];
            let m = d.norm();
            ln_abs += m.ln();
            phase *= d / m;
        }
        // renormalise the accumulated phase
        phase /= phase.norm();
        Determinant { ln_abs, phase }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        if self.singular {
            return Err(Error::InvalidArgument("singular matrix".into()));
        }
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
        Ok(())
    }

    /// `trace(A^{-1} B)`, by forward and back substitution on the rows of
    /// `P B`.
    pub fn trace_solve(&self, b: &ComplexMatrix) -> Result<Complex64> {
        if self.singular {
            return Err(Error::InvalidArgument("singular matrix".into()));
        }
        let n = self.n;
        if b.n != n {
            return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {n}", b.n)));
        }
        let mut y = Vec::with_capacity(n * n);
        for &p in &self.perm {
            y.extend_from_slice(b.row(p));
        }
        for i in 1..n {
            let (done, rest) = y.split_at_mut(i * n);
            let yi = &mut rest[..n];
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == ZERO {
                    continue;
                }
                for (x, &v) in yi.iter_mut().zip(&done[k * n..(k + 1) * n]) {
                    *x -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = y.split_at_mut((i + 1) * n);
            let yi = &mut head[i * n..];
            for k in (i + 1)..n {
                let u = self.lu[i * n + k];
                if u == ZERO {
                    continue;
                }
                let off = (k - i - 1) * n;
                for (x, &v) in yi.iter_mut().zip(&tail[off..off + n]) {
                    *x -= u * v;
                }
            }
            let inv = ONE / self.lu[i * n + i];
            for x in yi.iter_mut() {
                *x *= inv;
            }
        }
        Ok((0..n).map(|i| y[i * n + i]).sum())
    }
}

/// Determinant via LU with partial pivoting.
pub fn lu_determinant(a: &ComplexMatrix) -> Determinant {
    Lu::factor(a).determinant()
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

pub const POWER_ITERATION_CAP: usize = 100_000;

/// Dominant eigenvalue of a matrix whose leading eigenvalue is real, positive
/// and strictly dominant, by power iteration with a Rayleigh-quotient estimate.
///
/// The returned vector has unit norm and satisfies `|A v - value v| = residual`.
pub fn leading_eigenvalue(a: &ComplexMatrix) -> Result<Eigenpair> {
    let n = a.dim();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(1.0 + 0.5 / (k as f64 + 1.0), 0.0))
        .collect();
    normalize(&mut v);
    let mut lambda = ZERO;
    let mut residual = f64::INFINITY;
    for it in 1..=POWER_ITERATION_CAP {
        let w = a.mul_vec(&v);
        let rq: Complex64 = v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
        residual = w
            .iter()
            .zip(&v)
            .map(|(y, x)| (y - rq * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let settled = (rq - lambda).norm() <= 1e-15 * rq.norm().max(scale * 1e-3);
        lambda = rq;
        if residual <= 1e-13 * rq.norm().max(f64::MIN_POSITIVE) || (settled && residual <= 1e-10) {
            return Ok(Eigenpair {
                value: lambda.re,
                vector: v,
                residual,
                iterations: it,
            });
        }
        v = w;
        let norm = normalize(&mut v);
        if norm == 0.0 {
            return Ok(Eigenpair {
                value: 0.0,
                vector: v,
                residual: 0.0,
                iterations: it,
            });
        }
        // fix the phase so that the iteration converges rather than rotates
        if let Some(pivot) = v.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())) {
            let ph = pivot.conj() / pivot.norm();
            for x in v.iter_mut() {
                *x *= ph;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: POWER_ITERATION_CAP,
        residual,
    })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Result of [`taylor_coefficients`].
#[derive(Debug, Clone)]
pub struct TaylorExtraction {
    pub coefficients: Vec<Complex64>,
    /// Set to `|c_M| / max |c_m|` when that ratio exceeds `1e-8`.
    pub aliasing_warning: Option<f64>,
}

pub const ALIASING_THRESHOLD: f64 = 1e-8;

/// Taylor coefficients `c_0..=c_M` of `f` from `K` samples
/// `f(tau * exp(2 pi i k / K))`.
pub fn taylor_coefficients(samples: &[Complex64], tau: f64, degree: usize) -> Result<TaylorExtraction> {
    let k = samples.len();
    if k < 2 * degree + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for degree {degree}, got {k}",
            2 * degree + 2
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("sampling radius must be positive".into()));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    let inv_k = 1.0 / k as f64;
    let mut scale = inv_k;
    let coefficients: Vec<Complex64> = buf[..=degree]
        .iter()
        .map(|&x| {
            let c = x * scale;
            scale /= tau;
            c
        })
        .collect();
    let peak = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let last = coefficients[degree].norm();
    let aliasing_warning = (peak > 0.0 && last / peak > ALIASING_THRESHOLD).then(|| last / peak);
    Ok(TaylorExtraction {
        coefficients,
        aliasing_warning,
    })
}

/// Sample points `tau * exp(2 pi i k / K)` on which [`taylor_coefficients`] expects its input.
pub fn circle_nodes(count: usize, tau: f64) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(tau, 2.0 * PI * k as f64 / count as f64))
        .collect()
}
