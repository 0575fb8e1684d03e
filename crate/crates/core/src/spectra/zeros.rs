use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::Rect;
use crate::error::{Error, Result};
use crate::symbolic::Character;
use crate::transfer::{LogDerivative, TransferOperator};

/// Subdivision depth at which [`locate_zeros`] gives up.
pub const MAX_DEPTH: usize = 40;
/// Boundary values below this trigger the box nudge.
const BOUNDARY_FLOOR: f64 = 1e-10;
const NUDGE: f64 = 1e-6;
const NUDGE_ATTEMPTS: usize = 4;
/// Certified counts lie within this distance of an integer.
const CERTIFICATE: f64 = 0.1;
/// Absolute quadrature tolerance for the whole contour, in units of `2π`.
const CONTOUR_TOL: f64 = 1e-4;
const SEGMENT_DEPTH: usize = 40;
const INITIAL_SEGMENTS: usize = 4;
const NEWTON_STEPS: usize = 60;
/// Distance to a non-positive integer below which a zero is topological.
pub const TOPOLOGICAL_TOL: f64 = 1e-6;
/// Split fractions tried in turn; off-centre so real zeros of boxes centred
/// on the real axis do not land on a split line.
const SPLITS: [(f64, f64); 3] = [(0.5123, 0.4871), (0.4877, 0.5131), (0.4411, 0.5593)];

/// `s -> (L(s, θ), L'/L(s, θ))` for a fixed character, memoised on the
/// exact sample point.
pub struct LFunction<'a> {
    op: &'a TransferOperator,
    theta: Character,
    memo: RefCell<HashMap<(u64, u64), LogDerivative>>,
    evaluations: Cell<usize>,
}

impl<'a> LFunction<'a> {
    pub fn new(op: &'a TransferOperator, theta: Character) -> Self {
        LFunction {
            op,
            theta,
            memo: RefCell::new(HashMap::new()),
            evaluations: Cell::new(0),
        }
    }

    pub fn operator(&self) -> &TransferOperator {
        self.op
    }

    pub fn theta(&self) -> &Character {
        &self.theta
    }

    /// Number of operator evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn eval(&self, s: Complex64) -> Result<LogDerivative> {
        let key = (s.re.to_bits(), s.im.to_bits());
        if let Some(v) = self.memo.borrow().get(&key) {
            return Ok(*v);
        }
        let v = self.eval_uncached(s)?;
        self.memo.borrow_mut().insert(key, v);
        Ok(v)
    }

    fn eval_uncached(&self, s: Complex64) -> Result<LogDerivative> {
        self.evaluations.set(self.evaluations.get() + 1);
        self.op.log_derivative(s, &self.theta)
    }

    pub fn value(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.eval(s)?.determinant)
    }
}

/// Certified argument-principle count on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    /// contour actually used (the input box, possibly nudged outward)
    pub rect: Rect,
    pub count: usize,
    /// `(1/2πi) ∮ L'/L ds` by adaptive Simpson quadrature
    pub integral: Complex64,
    /// net change of `arg L` along the same samples, in turns
    pub winding: f64,
    pub samples: usize,
}

impl ZeroCount {
    pub fn residual(&self) -> f64 {
        (self.integral - Complex64::new(self.count as f64, 0.0)).norm()
    }
}

enum Contour {
    Done { integral: Complex64, winding: f64, samples: usize },
    Nudge,
}

#[derive(Clone, Copy)]
struct Sample {
    s: Complex64,
    v: LogDerivative,
}

fn sample(f: &LFunction, s: Complex64) -> Result<Option<Sample>> {
    let v = f.eval(s)?;
    if !(v.determinant.norm() >= BOUNDARY_FLOOR) || !v.log_derivative.is_finite() {
        return Ok(None);
    }
    Ok(Some(Sample { s, v }))
}

fn simpson(a: &Sample, m: &Sample, b: &Sample) -> Complex64 {
    (b.s - a.s) / 6.0 * (a.v.log_derivative + 4.0 * m.v.log_derivative + b.v.log_derivative)
}

fn phase_step(a: &Sample, b: &Sample) -> f64 {
    (b.v.determinant / a.v.determinant).arg()
}

struct Accumulator {
    integral: Complex64,
    phase: f64,
    samples: usize,
}

/// Adaptive Simpson on one segment; every accepted panel also has phase
/// increments below π/4 between consecutive samples.
fn segment(
    f: &LFunction,
    a: Sample,
    m: Sample,
    b: Sample,
    tol: f64,
    depth: usize,
    acc: &mut Accumulator,
    rect: &Rect,
) -> Result<bool> {
    let whole = simpson(&a, &m, &b);
    let (Some(q1), Some(q3)) = (sample(f, 0.5 * (a.s + m.s))?, sample(f, 0.5 * (m.s + b.s))?) else {
        return Ok(false);
    };
    acc.samples += 2;
    let left = simpson(&a, &q1, &m);
    let right = simpson(&m, &q3, &b);
    let steps = [
        phase_step(&a, &q1),
        phase_step(&q1, &m),
        phase_step(&m, &q3),
        phase_step(&q3, &b),
    ];
    let err = (left + right - whole).norm();
    if err <= 15.0 * tol && steps.iter().all(|p| p.abs() < FRAC_PI_4) {
        acc.integral += left + right + (left + right - whole) / 15.0;
        acc.phase += steps.iter().sum::<f64>();
        return Ok(true);
    }
    if depth == SEGMENT_DEPTH {
        return Err(Error::UncertifiedCount {
            rect: *rect,
            value: acc.integral / Complex64::new(0.0, 2.0 * PI),
        });
    }
    Ok(segment(f, a, q1, m, 0.5 * tol, depth + 1, acc, rect)?
        && segment(f, m, q3, b, 0.5 * tol, depth + 1, acc, rect)?)
}

fn contour(f: &LFunction, rect: &Rect) -> Result<Contour> {
    let corners = rect.corners();
    let perimeter = 2.0 * (rect.width() + rect.height());
    let mut acc = Accumulator {
        integral: Complex64::new(0.0, 0.0),
        phase: 0.0,
        samples: 0,
    };
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        for j in 0..INITIAL_SEGMENTS {
            let t0 = j as f64 / INITIAL_SEGMENTS as f64;
            let t1 = (j + 1) as f64 / INITIAL_SEGMENTS as f64;
            let a = p + (q - p) * t0;
            let b = if j + 1 == INITIAL_SEGMENTS { q } else { p + (q - p) * t1 };
            let tol = 2.0 * PI * CONTOUR_TOL * (b - a).norm() / perimeter;
            let (Some(sa), Some(sm), Some(sb)) = (sample(f, a)?, sample(f, 0.5 * (a + b))?, sample(f, b)?) else {
                return Ok(Contour::Nudge);
            };
            acc.samples += 3;
            if !segment(f, sa, sm, sb, tol, 0, &mut acc, rect)? {
                return Ok(Contour::Nudge);
            }
        }
    }
    Ok(Contour::Done {
        integral: acc.integral / Complex64::new(0.0, 2.0 * PI),
        winding: acc.phase / (2.0 * PI),
        samples: acc.samples,
    })
}

/// Number of zeros of `L(·, θ)` inside `rect` by the argument principle.
///
/// The count is certified when the quadrature lies within 0.1 of an integer
/// and agrees with the phase-tracked winding number. A contour passing
/// within `|L| < 1e-10` of a zero is pushed outward by `1e-6`.
pub fn count_zeros(f: &LFunction, rect: Rect) -> Result<ZeroCount> {
    if !rect.is_valid() {
        return Err(Error::InvalidArgument(format!("degenerate box {rect}")));
    }
    let mut r = rect;
    for _ in 0..NUDGE_ATTEMPTS {
        match contour(f, &r)? {
            Contour::Nudge => r = r.expand(NUDGE),
            Contour::Done {
                integral,
                winding,
                samples,
            } => {
                let k = integral.re.round();
                let certified = (integral - Complex64::new(k, 0.0)).norm() < CERTIFICATE
                    && (winding - k).abs() < CERTIFICATE
                    && k >= 0.0;
                if !certified {
                    return Err(Error::UncertifiedCount { rect: r, value: integral });
                }
                return Ok(ZeroCount {
                    rect: r,
                    count: k as usize,
                    integral,
                    winding,
                    samples,
                });
            }
        }
    }
    Err(Error::UncertifiedCount {
        rect: r,
        value: Complex64::new(f64::NAN, f64::NAN),
    })
}

/// A located zero with the box whose certified count encloses it.
#[derive(Debug, Clone, PartialEq)]
pub struct Zero {
    pub s: Complex64,
    pub multiplicity: usize,
    pub certificate: Rect,
    /// contour integral certifying the multiplicity
    pub integral: Complex64,
    /// `|L|` at the reported location
    pub residual: f64,
    pub newton_converged: bool,
}

impl Zero {
    /// Whether the zero sits at one of the points `0, -1, -2, ...`.
    pub fn is_topological(&self) -> bool {
        let k = self.s.re.round();
        k <= 0.0 && (self.s - k).norm() < TOPOLOGICAL_TOL
    }

    pub fn certificate_residual(&self) -> f64 {
        (self.integral - Complex64::new(self.multiplicity as f64, 0.0)).norm()
    }
}

/// Zeros of `L(·, θ)` in a box, each with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSet {
    pub theta: Character,
    pub rect: Rect,
    pub zeros: Vec<Zero>,
    pub total: ZeroCount,
}

impl ResonanceSet {
    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Zero closest to `p` among those not rejected by `skip`.
    pub fn nearest(&self, p: Complex64, skip: impl Fn(&Zero) -> bool) -> Option<&Zero> {
        self.zeros
            .iter()
            .filter(|z| !skip(z))
            .min_by(|a, b| (a.s - p).norm().total_cmp(&(b.s - p).norm()))
    }
}

fn newton(f: &LFunction, start: Complex64, multiplicity: usize, rect: &Rect) -> Result<Option<(Complex64, f64)>> {
    let bound = rect.expand(0.5 * rect.diameter());
    let mut s = start;
    for _ in 0..NEWTON_STEPS {
        let v = f.eval_uncached(s)?;
        if v.determinant == Complex64::new(0.0, 0.0) {
            return Ok(Some((s, 0.0)));
        }
        let step = multiplicity as f64 / v.log_derivative;
        if !step.is_finite() {
            return Ok(None);
        }
        s -= step;
        if !bound.contains(s) {
            return Ok(None);
        }
        if step.norm() <= 1e-14 * s.norm().max(1.0) {
            let r = f.eval_uncached(s)?.determinant.norm();
            return Ok(Some((s, r)));
        }
    }
    Ok(None)
}

/// Modified Newton for a zero of multiplicity `count`, accepted when a small
/// box around the limit certifies the full count.
fn multiple_zero(f: &LFunction, count: &ZeroCount, eps: f64) -> Result<Option<Zero>> {
    let rect = count.rect;
    let m = count.count;
    let Some((s, residual)) = newton(f, rect.center(), m, &rect)? else {
        return Ok(None);
    };
    if !rect.contains(s) {
        return Ok(None);
    }
    let mut radius = eps;
    while 4.0 * radius < rect.width().min(rect.height()) {
        if let Ok(c) = count_zeros(f, Rect::centered(s, radius)) {
            if c.count == m {
                return Ok(Some(Zero {
                    s,
                    multiplicity: m,
                    certificate: c.rect,
                    integral: c.integral,
                    residual,
                    newton_converged: true,
                }));
            }
        }
        radius *= 10.0;
    }
    Ok(None)
}

fn children(f: &LFunction, rect: &Rect, parent: usize) -> Result<Vec<ZeroCount>> {
    let mut last = None;
    for (fx, fy) in SPLITS {
        let parts = rect.split_at(fx, fy);
        let counts: Result<Vec<ZeroCount>> = parts.iter().map(|p| count_zeros(f, *p)).collect();
        match counts {
            Ok(c) if c.iter().map(|z| z.count).sum::<usize>() == parent => return Ok(c),
            Ok(c) => {
                last = Some(Error::UncertifiedCount {
                    rect: *rect,
                    value: Complex64::new(c.iter().map(|z| z.count).sum::<usize>() as f64, 0.0),
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one split"))
}

fn refine(f: &LFunction, count: ZeroCount, eps: f64, depth: usize, out: &mut Vec<Zero>) -> Result<()> {
    if count.count == 0 {
        return Ok(());
    }
    let rect = count.rect;
    if count.count == 1 {
        if let Some((s, residual)) = newton(f, rect.center(), 1, &rect)? {
            if rect.expand(1e-12 * rect.diameter().max(1.0)).contains(s) {
                out.push(Zero {
                    s,
                    multiplicity: 1,
                    certificate: rect,
                    integral: count.integral,
                    residual,
                    newton_converged: true,
                });
                return Ok(());
            }
        }
    }
    if count.count >= 2 {
        if let Some(z) = multiple_zero(f, &count, eps)? {
            out.push(z);
            return Ok(());
        }
    }
    if rect.diameter() < eps {
        let m = count.count;
        let (s, residual, ok) = match newton(f, rect.center(), m, &rect)? {
            Some((s, r)) if rect.contains(s) => (s, r, true),
            _ => {
                let c = rect.center();
                (c, f.eval_uncached(c)?.determinant.norm(), false)
            }
        };
        out.push(Zero {
            s,
            multiplicity: m,
            certificate: rect,
            integral: count.integral,
            residual,
            newton_converged: ok,
        });
        return Ok(());
    }
    if depth == MAX_DEPTH {
        return Err(Error::MaxDepth { depth, rect });
    }
    for child in children(f, &rect, count.count)? {
        refine(f, child, eps, depth + 1, out)?;
    }
    Ok(())
}

/// Zeros of `L(·, θ)` in `rect`: subdivision (SW, SE, NW, NE) until every box
/// holds at most one zero, then Newton with the analytic derivative. Boxes
/// still holding several zeros at diameter `eps` are reported as one zero of
/// that multiplicity.
pub fn locate_zeros(f: &LFunction, rect: Rect, eps: f64) -> Result<ResonanceSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let total = count_zeros(f, rect)?;
    let mut zeros = Vec::with_capacity(total.count);
    refine(f, total, eps, 0, &mut zeros)?;
    Ok(ResonanceSet {
        theta: f.theta().clone(),
        rect: total.rect,
        zeros,
        total,
    })
}

/// Zero nearest to `center` among those not rejected by `skip`, searched in
/// centred boxes of half-width growing from `r0` to `r_max`.
///
/// Returns the last resonance set, which covers the disk of radius `r0`, and
/// the nearest zero if one lies within the searched boxes.
pub fn nearest_zero(
    f: &LFunction,
    center: Complex64,
    r0: f64,
    r_max: f64,
    eps: f64,
    skip: impl Fn(&Zero) -> bool,
) -> Result<(ResonanceSet, Option<Zero>)> {
    if !(r0 > 0.0 && r_max >= r0) {
        return Err(Error::InvalidArgument(format!("search radii must satisfy 0 < r0 <= r_max, got {r0}, {r_max}")));
    }
    let mut r = r0;
    loop {
        let set = locate_zeros(f, Rect::centered(center, r), eps)?;
        match set.nearest(center, &skip).cloned() {
            Some(z) => {
                let d = (z.s - center).norm();
                if d <= r {
                    return Ok((set, Some(z)));
                }
                // a closer zero may sit outside the box but inside the disk of radius d
                r = d;
                let set = locate_zeros(f, Rect::centered(center, r), eps)?;
                let z = set.nearest(center, &skip).cloned();
                return Ok((set, z));
            }
            None if r >= r_max => return Ok((set, None)),
            None => r = (2.0 * r).min(r_max),
        }
    }
}

/// One point of a zero-tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub theta_l1: f64,
    pub zero: Option<Complex64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub direction: Vec<f64>,
    pub points: Vec<TrackPoint>,
    /// `max |s(θ_i) - s(θ_j)| / ‖θ_i - θ_j‖₁` over consecutive tracked points
    pub lipschitz: f64,
}

/// Nearest zero to δ for each character `t · direction`.
pub fn track_zero(
    op: &TransferOperator,
    delta: f64,
    direction: &[f64],
    ts: &[f64],
    r_max: f64,
    eps: f64,
) -> Result<TrackingReport> {
    let dir_l1: f64 = direction.iter().map(|x| x.abs()).sum();
    let center = Complex64::new(delta, 0.0);
    let mut points = Vec::with_capacity(ts.len());
    for &t in ts {
        let theta = Character::new(direction.iter().map(|x| x * t).collect());
        let f = LFunction::new(op, theta);
        let r0 = (0.01f64).min(r_max);
        let (_, z) = nearest_zero(&f, center, r0, r_max, eps, Zero::is_topological)?;
        let zero = z.map(|z| z.s);
        points.push(TrackPoint {
            t,
            theta_l1: t.abs() * dir_l1,
            zero,
            distance: zero.map_or(f64::INFINITY, |z| (z - center).norm()),
        });
    }
    let lipschitz = points
        .windows(2)
        .filter_map(|w| match (w[0].zero, w[1].zero) {
            (Some(a), Some(b)) if w[0].t != w[1].t => Some((a - b).norm() / ((w[0].t - w[1].t).abs() * dir_l1)),
            _ => None,
        })
        .fold(0.0, f64::max);
    Ok(TrackingReport {
        direction: direction.to_vec(),
        points,
        lipschitz,
    })
}

/// Largest `‖θ‖₁` along `direction` up to which Newton continuation of the
/// zero at δ succeeds with steps of `t_max / steps`, and the measured
/// Lipschitz constant on the tracked branch.
pub fn estimate_c1(op: &TransferOperator, delta: f64, direction: &[f64], t_max: f64, steps: usize) -> Result<(f64, f64)> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let dir_l1: f64 = direction.iter().map(|x| x.abs()).sum();
    let dt = t_max / steps as f64;
    let mut s = Complex64::new(delta, 0.0);
    let mut reached = 0.0;
    let mut lipschitz: f64 = 0.0;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let f = LFunction::new(op, Character::new(direction.iter().map(|x| x * t).collect()));
        let window = Rect::centered(s, 0.25);
        match newton(&f, s, 1, &window)? {
            Some((next, _)) => {
                let jump = (next - s).norm();
                lipschitz = lipschitz.max(jump / (dt * dir_l1));
                s = next;
                reached = t * dir_l1;
            }
            None => break,
        }
    }
    Ok((reached, lipschitz))
}
