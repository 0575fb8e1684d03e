//! Twisted transfer operator `L_{s,θ}` in a per-disk Taylor basis, its
//! Fredholm determinant, and the periodic-orbit evaluation of `log det`.
//!
//! On disk `D_j` a function is expanded in `((z - c_j)/r_j)^m`, `m = 0..=M`.
//! The block mapping source disk `i` to target disk `j` (`i != j + r`)
//! represents `f -> [(S_i^{-1})'(z)]^s χ_θ(S_i) f(S_i^{-1} z)` and is
//! obtained by sampling on `|z - c_j| = τ r_j` and extracting Taylor
//! coefficients with an FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::{validate_schottky, SchottkyGroup};
use crate::numerics::{circle_nodes, ComplexMatrix, Determinant, Lu};
use crate::symbolic::{Character, OrbitCatalog, OrbitTable};

pub const DEFAULT_DEGREE: usize = 16;
pub const DEFAULT_TAU: f64 = 0.75;
/// Tail bounds above this raise the warning flag of [`OrbitLogDet`].
pub const TAIL_WARNING: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncation degree `M` and relative sampling radius `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub degree: usize,
    pub tau: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            degree: DEFAULT_DEGREE,
            tau: DEFAULT_TAU,
        }
    }
}

impl Discretization {
    pub fn new(degree: usize, tau: f64) -> Result<Self> {
        if degree < 4 {
            return Err(Error::InvalidArgument(format!("degree must be at least 4, got {degree}")));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidArgument(format!("tau must lie in (0, 1), got {tau}")));
        }
        Ok(Discretization { degree, tau })
    }

    /// Number of samples per circle: a power of two, at least `3(M + 1)`.
    pub fn samples(&self) -> usize {
        (3 * (self.degree + 1)).next_power_of_two()
    }
}

struct Block {
    source: usize,
    target: usize,
    /// `u_k^n` at sample `k`, row-major in `n`
    powers: Vec<Complex64>,
    /// `log (S_i^{-1})'(z_k)` on the branch real on the real axis
    log_deriv: Vec<Complex64>,
}

/// Precomputed sampling geometry for one group and discretization.
pub struct TransferOperator {
    group: SchottkyGroup,
    fingerprint: String,
    disc: Discretization,
    samples: usize,
    blocks: Vec<Block>,
    fft: Arc<dyn Fft<f64>>,
    /// `τ^{-m} / K`
    scale: Vec<f64>,
}

impl std::fmt::Debug for TransferOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransferOperator")
            .field("fingerprint", &self.fingerprint)
            .field("disc", &self.disc)
            .field("samples", &self.samples)
            .finish()
    }
}

impl TransferOperator {
    pub fn new(group: &SchottkyGroup, disc: Discretization) -> Result<Self> {
        validate_schottky(group).into_result()?;
        let disc = Discretization::new(disc.degree, disc.tau)?;
        let k = disc.samples();
        let nodes = circle_nodes(k, disc.tau);
        let letters = group.letters();
        let mut blocks = Vec::new();
        for target in 0..letters {
            let tdisk = group.disks()[target];
            let zs: Vec<Complex64> = nodes.iter().map(|w| tdisk.center + w * tdisk.radius).collect();
            for source in 0..letters {
                if target == group.inverse_letter(source) {
                    continue;
                }
                let sdisk = group.disks()[source];
                let inv = group.generator(group.inverse_letter(source));
                let orient = (inv.c * tdisk.center.re + inv.d).signum();
                let mut us = Vec::with_capacity(k);
                let mut log_deriv = Vec::with_capacity(k);
                for &z in &zs {
                    let (image, _) = inv.evaluate(z)?;
                    let den = (z * inv.c + inv.d) * orient;
                    if !(den.re > 0.0) {
                        return Err(Error::BranchCut { disk: target + 1 });
                    }
                    log_deriv.push(-2.0 * den.ln());
                    us.push((image - sdisk.center) / sdisk.radius);
                }
                let mut powers = Vec::with_capacity((disc.degree + 1) * k);
                let mut cur = vec![Complex64::new(1.0, 0.0); k];
                for _ in 0..=disc.degree {
                    powers.extend_from_slice(&cur);
                    for (c, u) in cur.iter_mut().zip(&us) {
                        *c *= u;
                    }
                }
                blocks.push(Block {
                    source,
                    target,
                    powers,
                    log_deriv,
                });
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(k);
        let scale = (0..=disc.degree)
            .map(|m| disc.tau.powi(-(m as i32)) / k as f64)
            .collect();
        Ok(TransferOperator {
            group: group.clone(),
            fingerprint: group.fingerprint(),
            disc,
            samples: k,
            blocks,
            fft,
            scale,
        })
    }

    pub fn group(&self) -> &SchottkyGroup {
        &self.group
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    /// Matrix dimension `2r (M + 1)`.
    pub fn dim(&self) -> usize {
        self.group.letters() * (self.disc.degree + 1)
    }

    fn fill(&self, s: Complex64, theta: &Character, derivative: bool) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
        if theta.rank() != self.group.rank() {
            return Err(Error::InvalidArgument(format!(
                "character has rank {}, group has rank {}",
                theta.rank(),
                self.group.rank()
            )));
        }
        let m1 = self.disc.degree + 1;
        let k = self.samples;
        let mut a = ComplexMatrix::zeros(self.dim());
        let mut da = derivative.then(|| ComplexMatrix::zeros(self.dim()));
        let mut buf = vec![ZERO; k];
        let mut scratch = vec![ZERO; self.fft.get_inplace_scratch_len()];
        let mut weights = vec![ZERO; k];
        for b in &self.blocks {
            let chi = theta.on_letter(b.source);
            for (w, l) in weights.iter_mut().zip(&b.log_deriv) {
                *w = (s * l).exp() * chi;
            }
            for n in 0..m1 {
                let pw = &b.powers[n * k..(n + 1) * k];
                for ((x, w), p) in buf.iter_mut().zip(&weights).zip(pw) {
                    *x = w * p;
                }
                self.fft.process_with_scratch(&mut buf, &mut scratch);
                for m in 0..m1 {
                    a[(b.target * m1 + m, b.source * m1 + n)] = buf[m] * self.scale[m];
                }
                if let Some(da) = da.as_mut() {
                    for (((x, w), p), l) in buf.iter_mut().zip(&weights).zip(pw).zip(&b.log_deriv) {
                        *x = w * p * l;
                    }
                    self.fft.process_with_scratch(&mut buf, &mut scratch);
                    for m in 0..m1 {
                        da[(b.target * m1 + m, b.source * m1 + n)] = buf[m] * self.scale[m];
                    }
                }
            }
        }
        Ok((a, da))
    }

    pub fn assemble(&self, s: Complex64, theta: &Character) -> Result<OperatorMatrix> {
        let (matrix, _) = self.fill(s, theta, false)?;
        Ok(OperatorMatrix {
            fingerprint: self.fingerprint.clone(),
            s,
            theta: theta.clone(),
            degree: self.disc.degree,
            letters: self.group.letters(),
            matrix,
        })
    }

    /// `A(s, θ)` together with `dA/ds`.
    pub fn assemble_with_derivative(&self, s: Complex64, theta: &Character) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (a, da) = self.fill(s, theta, true)?;
        Ok((a, da.expect("derivative requested")))
    }

    pub fn determinant(&self, s: Complex64, theta: &Character) -> Result<Determinant> {
        let (a, _) = self.fill(s, theta, false)?;
        Ok(Lu::factor(&a.identity_minus()).determinant())
    }

    /// `L(s, θ) ≈ det(I - A(s, θ))`.
    pub fn fredholm_determinant(&self, s: Complex64, theta: &Character) -> Result<Complex64> {
        let d = self.determinant(s, theta)?;
        d.value()
            .ok_or_else(|| Error::InvalidArgument(format!("determinant overflows at s = {s}")))
    }

    /// `(det(I - A), d/ds log det(I - A))`, the latter as `-trace((I - A)^{-1} A')`.
    pub fn log_derivative(&self, s: Complex64, theta: &Character) -> Result<LogDerivative> {
        let (a, da) = self.assemble_with_derivative(s, theta)?;
        let lu = Lu::factor(&a.identity_minus());
        let det = lu.determinant();
        if det.is_zero() {
            return Ok(LogDerivative {
                determinant: ZERO,
                log_derivative: Complex64::new(f64::INFINITY, 0.0),
            });
        }
        let tr = lu.trace_solve(&da)?;
        Ok(LogDerivative {
            determinant: det.value().unwrap_or(Complex64::new(f64::INFINITY, 0.0)),
            log_derivative: -tr,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative {
    pub determinant: Complex64,
    pub log_derivative: Complex64,
}

/// Discretised operator `A(s, θ)` with `2r x 2r` blocks of size `M + 1`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub fingerprint: String,
    pub s: Complex64,
    pub theta: Character,
    pub degree: usize,
    pub letters: usize,
    pub matrix: ComplexMatrix,
}

impl OperatorMatrix {
    /// Block carrying coefficients of functions on disk `source` to disk `target`.
    pub fn block(&self, source: usize, target: usize) -> Vec<Vec<Complex64>> {
        let m1 = self.degree + 1;
        (0..m1)
            .map(|m| (0..m1).map(|n| self.matrix[(target * m1 + m, source * m1 + n)]).collect())
            .collect()
    }

    pub fn is_zero_block(&self, source: usize, target: usize) -> bool {
        self.block(source, target).iter().flatten().all(|z| *z == ZERO)
    }
}

/// Convenience wrapper: assemble and return `det(I - A(s, θ, M))`.
pub fn fredholm_determinant(g: &SchottkyGroup, s: Complex64, theta: &Character, disc: Discretization) -> Result<Complex64> {
    TransferOperator::new(g, disc)?.fredholm_determinant(s, theta)
}

/// `t_n(s, θ) = Σ_{|w| = n} χ_θ(w) e^{-s ℓ(w)} / (1 - e^{-ℓ(w)})`.
pub fn trace_power(catalog: &OrbitCatalog, s: Complex64, theta: &Character, n: usize) -> Result<Complex64> {
    check_n(catalog, n)?;
    Ok(table_trace(catalog.table(n), s, theta, |_| true).0)
}

fn check_n(catalog: &OrbitCatalog, n: usize) -> Result<()> {
    if n == 0 || n > catalog.n_max() {
        return Err(Error::InvalidArgument(format!(
            "word length {n} outside the catalog range 1..={}",
            catalog.n_max()
        )));
    }
    Ok(())
}

/// Sum over the words of a table accepted by `keep`, returning the twisted
/// sum and the sum of moduli.
pub(crate) fn table_trace(
    table: &OrbitTable,
    s: Complex64,
    theta: &Character,
    keep: impl Fn(&[i32]) -> bool,
) -> (Complex64, f64) {
    let mut total = ZERO;
    let mut modulus = 0.0;
    for i in 0..table.len() {
        let v = table.abelianization(i);
        if !keep(v) {
            continue;
        }
        let l = table.length(i);
        let w = (-s * l).exp() / (1.0 - (-l).exp());
        total += theta.eval_i32(v) * w;
        modulus += w.norm();
    }
    (total, modulus)
}

/// Per-length traces together with the moduli sums used for tail estimates.
#[derive(Debug, Clone)]
pub struct TraceSeries {
    /// `t_1, ..., t_{n_max}`
    pub traces: Vec<Complex64>,
    /// `Σ_{|w| = n} |e^{-sℓ}| / (1 - e^{-ℓ})`
    pub moduli: Vec<f64>,
    pub tail_bound: f64,
}

impl TraceSeries {
    pub fn from_parts(traces: Vec<Complex64>, moduli: Vec<f64>) -> Self {
        let tail_bound = geometric_tail(&moduli);
        TraceSeries {
            traces,
            moduli,
            tail_bound,
        }
    }

    /// `-Σ_n t_n / n`.
    pub fn log_det(&self) -> Complex64 {
        -self
            .traces
            .iter()
            .enumerate()
            .map(|(i, t)| t / (i + 1) as f64)
            .sum::<Complex64>()
    }
}

/// Measured ratio of consecutive moduli sums over the last three lengths.
pub fn contraction_ratio(moduli: &[f64]) -> Option<f64> {
    let n = moduli.len();
    if n < 2 {
        return None;
    }
    let start = n.saturating_sub(3).max(1);
    (start..n)
        .map(|k| moduli[k] / moduli[k - 1])
        .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.max(q))))
}

/// Bound on `Σ_{n > n_max} T_n / n` assuming `T_{n+1} <= q T_n` with the
/// measured ratio `q`.
pub fn geometric_tail(moduli: &[f64]) -> f64 {
    let n = moduli.len();
    match contraction_ratio(moduli) {
        Some(q) if q < 1.0 => moduli[n - 1] * q / ((n as f64 + 1.0) * (1.0 - q)),
        _ => f64::INFINITY,
    }
}

/// Periodic-orbit approximation of `log L(s, θ)`.
#[derive(Debug, Clone)]
pub struct OrbitLogDet {
    pub log_det: Complex64,
    pub tail_bound: f64,
    pub tail_warning: bool,
    pub series: TraceSeries,
}

impl OrbitLogDet {
    pub fn determinant(&self) -> Complex64 {
        self.log_det.exp()
    }
}

pub fn trace_series(catalog: &OrbitCatalog, s: Complex64, theta: &Character, n_max: usize) -> Result<TraceSeries> {
    if n_max > catalog.n_max() {
        check_n(catalog, n_max)?;
    }
    let (traces, moduli) = (1..=n_max)
        .map(|n| table_trace(catalog.table(n), s, theta, |_| true))
        .unzip();
    Ok(TraceSeries::from_parts(traces, moduli))
}

/// `-Σ_{n <= n_max} t_n / n` with a geometric tail estimate.
pub fn orbit_log_det(catalog: &OrbitCatalog, s: Complex64, theta: &Character, n_max: usize) -> Result<OrbitLogDet> {
    let series = trace_series(catalog, s, theta, n_max)?;
    Ok(OrbitLogDet {
        log_det: series.log_det(),
        tail_bound: series.tail_bound,
        tail_warning: !(series.tail_bound <= TAIL_WARNING),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_funnel_group;
    use crate::symbolic::DEFAULT_WORD_CAP;

    fn group() -> SchottkyGroup {
        build_funnel_group(2, &[6.0, 7.0]).unwrap()
    }

    #[test]
    fn zero_blocks_follow_admissibility() {
        let op = TransferOperator::new(&group(), Discretization::default()).unwrap();
        let a = op.assemble(Complex64::new(0.3, 1.0), &Character::new(vec![0.1, 0.7])).unwrap();
        for j in 0..4 {
            assert!(a.is_zero_block((j + 2) % 4, j));
            for i in 0..4 {
                if i != (j + 2) % 4 {
                    assert!(!a.is_zero_block(i, j));
                }
            }
        }
    }

    #[test]
    fn real_parameters_give_real_matrix() {
        let op = TransferOperator::new(&group(), Discretization::default()).unwrap();
        let a = op.assemble(Complex64::new(0.4, 0.0), &Character::trivial(2)).unwrap();
        assert!(a.matrix.as_slice().iter().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn first_trace_is_sum_over_letters() {
        let g = group();
        let cat = OrbitCatalog::build(&g, 1, DEFAULT_WORD_CAP, None).unwrap();
        let s = Complex64::new(0.5, 0.25);
        let theta = Character::new(vec![0.2, 0.35]);
        let mut expect = ZERO;
        for i in 0..4 {
            let l = g.generator(i).displacement_length().unwrap();
            expect += theta.on_letter(i) * (-s * l).exp() / (1.0 - (-l).exp());
        }
        let t1 = trace_power(&cat, s, &theta, 1).unwrap();
        assert!((t1 - expect).norm() < 1e-15);
    }

    #[test]
    fn empty_orbit_sum_gives_unit_determinant() {
        let cat = OrbitCatalog::build(&group(), 2, DEFAULT_WORD_CAP, None).unwrap();
        let o = orbit_log_det(&cat, Complex64::new(1.0, 0.0), &Character::trivial(2), 0).unwrap();
        assert_eq!(o.determinant(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn discretization_rejects_small_degree() {
        assert!(Discretization::new(3, 0.75).is_err());
        assert!(Discretization::new(8, 1.2).is_err());
    }

    #[test]
    fn invalid_group_is_rejected() {
        let g = group();
        let mut disks = g.disks().to_vec();
        disks[1] = disks[0];
        let bad = SchottkyGroup::from_parts(disks, g.generators().to_vec()).unwrap();
        assert!(TransferOperator::new(&bad, Discretization::default()).is_err());
    }
}
