//! Möbius maps, Schottky disk systems and displacement lengths.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Boundary points sampled per disk when checking the Schottky conditions.
pub const BOUNDARY_SAMPLES: usize = 64;
/// Relative margin below which a Schottky condition counts as violated.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

const POLE_TOLERANCE: f64 = 1e-14;
const HYPERBOLIC_SLACK: f64 = 1e-12;

/// Orientation-preserving isometry `z -> (az + b)/(cz + d)` with `ad - bc = 1`.
///
/// Coefficients are normalised so that `a + d >= 0`, resolving the sign
/// ambiguity of `PSL(2, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusMap {
    pub const IDENTITY: MoebiusMap = MoebiusMap {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Scales `(a, b, c, d)` to determinant one and fixes the sign.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Möbius coefficients need positive determinant, got {det}"
            )));
        }
        let k = det.sqrt();
        Ok(Self::normalized(a / k, b / k, c / k, d / k))
    }

    fn normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let tr = a + d;
        let flip = if tr != 0.0 {
            tr < 0.0
        } else {
            // first nonzero coefficient positive
            [a, b, c, d].iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
        };
        if flip {
            MoebiusMap {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            MoebiusMap { a, b, c, d }
        }
    }

    /// Diagonal map `z -> k z` (`k > 0`).
    pub fn dilation(k: f64) -> Result<Self> {
        let r = k.sqrt();
        Self::new(r, 0.0, 0.0, 1.0 / r)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    /// Matrix product `self * other`, i.e. the map `z -> self(other(z))`.
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        let p = self.compose_raw(other);
        Self::normalized(p.a, p.b, p.c, p.d)
    }

    /// Matrix product without sign normalisation (used for long products
    /// where only the trace matters).
    pub(crate) fn compose_raw(&self, o: &MoebiusMap) -> Self {
        MoebiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + HYPERBOLIC_SLACK
    }

    /// Image `(az + b)/(cz + d)` and derivative `1/(cz + d)^2`.
    pub fn evaluate(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let den = z * self.c + self.d;
        let modulus = den.norm();
        if modulus < POLE_TOLERANCE {
            return Err(Error::Pole { z, modulus });
        }
        let image = (z * self.a + self.b) / den;
        Ok((image, 1.0 / (den * den)))
    }

    /// Image of the point at infinity (`a/c`), `None` if it is infinity.
    pub fn image_of_infinity(&self) -> Option<f64> {
        (self.c != 0.0).then(|| self.a / self.c)
    }

    /// Preimage of infinity (`-d/c`), `None` for affine maps.
    pub fn pole(&self) -> Option<f64> {
        (self.c != 0.0).then(|| -self.d / self.c)
    }

    /// Translation length `2 arccosh(|a + d| / 2)` of a hyperbolic map.
    pub fn displacement_length(&self) -> Result<f64> {
        let t = self.trace().abs();
        if t <= 2.0 + HYPERBOLIC_SLACK {
            return Err(Error::NonHyperbolic { trace: t });
        }
        Ok(2.0 * (t / 2.0).acosh())
    }

    /// Projective equality up to a relative tolerance.
    pub fn approx_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        let x = [self.a, self.b, self.c, self.d];
        let y = [other.a, other.b, other.c, other.d];
        let scale = x.iter().chain(&y).map(|v| v.abs()).fold(1.0, f64::max);
        let same = x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol * scale);
        let opposite = x.iter().zip(&y).all(|(p, q)| (p + q).abs() <= tol * scale);
        same || opposite
    }
}

/// Translation length of a hyperbolic map; see [`MoebiusMap::displacement_length`].
pub fn displacement_length(m: &MoebiusMap) -> Result<f64> {
    m.displacement_length()
}

/// Euclidean disk; Schottky disks have their centers on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn real(center: f64, radius: f64) -> Self {
        Disk {
            center: Complex64::new(center, 0.0),
            radius,
        }
    }

    pub fn boundary_point(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, t)
    }

    /// Signed distance from `z` to the boundary, positive inside.
    pub fn depth(&self, z: Complex64) -> f64 {
        self.radius - (z - self.center).norm()
    }
}

/// Classical Fuchsian Schottky group of rank `r`.
///
/// Letters are 0-based: `k < r` stands for generator `S_{k+1}` and `k + r`
/// for its inverse, so `generators[k]` maps the exterior of `disks[k]` onto
/// the interior of `disks[(k + r) % 2r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchottkyGroup {
    rank: usize,
    disks: Vec<Disk>,
    generators: Vec<MoebiusMap>,
}

impl SchottkyGroup {
    /// Assembles a group from raw data without checking the Schottky
    /// conditions; see [`validate_schottky`].
    pub fn from_parts(disks: Vec<Disk>, generators: Vec<MoebiusMap>) -> Result<Self> {
        if disks.len() != generators.len() || disks.len() < 2 || disks.len() % 2 != 0 {
            return Err(Error::InvalidGroup(format!(
                "need 2r disks and 2r generators, got {} and {}",
                disks.len(),
                generators.len()
            )));
        }
        Ok(SchottkyGroup {
            rank: disks.len() / 2,
            disks,
            generators,
        })
    }

    /// Builds the generators from a disk list: `S_j` is the map
    /// `z -> c' - r' r / (z - c)` sending the exterior of disk `j` (center
    /// `c`, radius `r`) onto the interior of disk `j + r` (center `c'`, radius `r'`).
    pub fn from_disks(disks: Vec<Disk>) -> Result<Self> {
        if disks.len() < 2 || disks.len() % 2 != 0 {
            return Err(Error::InvalidGroup("need an even number of disks".into()));
        }
        let r = disks.len() / 2;
        let mut generators = Vec::with_capacity(2 * r);
        for j in 0..r {
            generators.push(pairing_map(&disks[j], &disks[j + r])?);
        }
        for j in 0..r {
            generators.push(generators[j].inverse());
        }
        Self::from_parts(disks, generators)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> usize {
        2 * self.rank
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.generators
    }

    pub fn generator(&self, letter: usize) -> &MoebiusMap {
        &self.generators[letter]
    }

    pub fn inverse_letter(&self, letter: usize) -> usize {
        (letter + self.rank) % (2 * self.rank)
    }

    /// `true` when letter `next` may follow `prev` in a reduced word.
    pub fn admissible(&self, prev: usize, next: usize) -> bool {
        next != self.inverse_letter(prev)
    }

    /// Hex digest of the normalised generator coefficients.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.rank as u64).to_le_bytes());
        for g in &self.generators {
            for x in [g.a, g.b, g.c, g.d] {
                h.update(x.to_le_bytes());
            }
        }
        for d in &self.disks {
            for x in [d.center.re, d.center.im, d.radius] {
                h.update(x.to_le_bytes());
            }
        }
        hex::encode(&h.finalize()[..16])
    }

    /// Lengths of the closed geodesics of the generators `S_1..S_r`.
    pub fn generator_lengths(&self) -> Result<Vec<f64>> {
        self.generators[..self.rank]
            .iter()
            .map(|g| g.displacement_length())
            .collect()
    }

    /// Largest derivative modulus of `S_i^{-1}` over the admissible disks,
    /// an upper bound for the per-letter contraction of the coding map.
    pub fn max_contraction(&self) -> f64 {
        let n = self.letters();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let inv = self.generators[self.inverse_letter(i)];
            for j in 0..n {
                if j == self.inverse_letter(i) {
                    continue;
                }
                let d = self.disks[j];
                // |(cz + d)^-2| is maximal where |cz + d| is minimal
                if let Some(p) = inv.pole() {
                    let dist = (d.center - Complex64::new(p, 0.0)).norm() - d.radius;
                    worst = worst.max(1.0 / (inv.c * dist).powi(2));
                }
            }
        }
        worst
    }
}

fn pairing_map(from: &Disk, to: &Disk) -> Result<MoebiusMap> {
    let (c, r) = (from.center.re, from.radius);
    let (cp, rp) = (to.center.re, to.radius);
    if !(r > 0.0 && rp > 0.0) {
        return Err(Error::InvalidGroup("disk radii must be positive".into()));
    }
    MoebiusMap::new(cp, -(cp * c + rp * r), 1.0, -c)
}

/// One violated Schottky condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: &'static str,
    pub indices: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.condition, self.indices, self.detail)
    }
}

/// Outcome of [`validate_schottky`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Smallest distance from a mapped boundary point to the boundary of its
    /// target disk, over all checked pairings and contractions.
    pub worst_margin: f64,
    /// Same quantity relative to the target radius.
    pub worst_relative_margin: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidGroup(msg.join("; ")))
        }
    }
}

/// Checks the Schottky hypotheses: positive radii, real centers, disjoint
/// closures, inverse pairing, exterior-to-interior mapping and the
/// contraction `closure(S_i^{-1}(D_j)) ⊂ D_i` for `i != j + r`.
pub fn validate_schottky(g: &SchottkyGroup) -> ValidationReport {
    let mut v = Vec::new();
    let n = g.letters();
    let r = g.rank();
    let disks = g.disks();
    let mut worst = f64::INFINITY;
    let mut worst_rel = f64::INFINITY;

    for (i, d) in disks.iter().enumerate() {
        if !(d.radius > 0.0) || !d.radius.is_finite() {
            v.push(Violation {
                condition: "nonpositive radius",
                indices: vec![i + 1],
                detail: format!("radius {}", d.radius),
            });
        }
        if d.center.im != 0.0 {
            v.push(Violation {
                condition: "center off real axis",
                indices: vec![i + 1],
                detail: format!("center {}", d.center),
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (disks[i], disks[j]);
            let gap = (a.center - b.center).norm() - a.radius - b.radius;
            if !(gap > 0.0) {
                v.push(Violation {
                    condition: "overlapping disks",
                    indices: vec![i + 1, j + 1],
                    detail: format!("closures intersect (gap {gap:e})"),
                });
            }
        }
    }
    if !v.is_empty() {
        return ValidationReport {
            violations: v,
            worst_margin: f64::NEG_INFINITY,
            worst_relative_margin: f64::NEG_INFINITY,
        };
    }

    for j in 0..r {
        let s = g.generator(j);
        let inv = g.generator(j + r);
        if !s.compose(inv).approx_eq(&MoebiusMap::IDENTITY, 1e-10) {
            v.push(Violation {
                condition: "inverse pairing",
                indices: vec![j + 1, j + r + 1],
                detail: "S_{j+r} is not the inverse of S_j".into(),
            });
        }
        // rounding in ad - bc grows with the size of the entries
        let scale = (s.a * s.d).abs() + (s.b * s.c).abs();
        if (s.determinant() - 1.0).abs() > 1e-14 * scale.max(1.0) {
            v.push(Violation {
                condition: "determinant",
                indices: vec![j + 1],
                detail: format!("ad - bc = {}", s.determinant()),
            });
        }
    }

    // S_j : ext(D_j) -> int(D_{j+r}), boundary onto boundary.
    for j in 0..n {
        let s = g.generator(j);
        let (src, dst) = (disks[j], disks[g.inverse_letter(j)]);
        let inside = s
            .image_of_infinity()
            .is_some_and(|x| dst.depth(Complex64::new(x, 0.0)) > 0.0);
        if !inside {
            v.push(Violation {
                condition: "exterior not mapped inside",
                indices: vec![j + 1, g.inverse_letter(j) + 1],
                detail: "image of infinity lies outside the target disk".into(),
            });
            continue;
        }
        let mut off = 0.0f64;
        for k in 0..BOUNDARY_SAMPLES {
            let z = src.boundary_point(2.0 * PI * (k as f64 + 0.5) / BOUNDARY_SAMPLES as f64);
            match s.evaluate(z) {
                Ok((w, _)) => off = off.max(dst.depth(w).abs() / dst.radius),
                Err(_) => off = f64::INFINITY,
            }
        }
        if off > 1e-8 {
            v.push(Violation {
                condition: "boundary not paired",
                indices: vec![j + 1, g.inverse_letter(j) + 1],
                detail: format!("relative boundary mismatch {off:e}"),
            });
        }
    }

    // closure(S_i^{-1}(D_j)) ⊂ D_i for i != j + r
    for i in 0..n {
        let inv = g.generator(g.inverse_letter(i));
        for j in 0..n {
            if j == g.inverse_letter(i) {
                continue;
            }
            let (src, dst) = (disks[j], disks[i]);
            let pole_inside = inv
                .pole()
                .is_some_and(|p| src.depth(Complex64::new(p, 0.0)) >= 0.0);
            let mut margin = f64::INFINITY;
            if !pole_inside {
                for k in 0..BOUNDARY_SAMPLES {
                    let z = src.boundary_point(2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64);
                    margin = match inv.evaluate(z) {
                        Ok((w, _)) => margin.min(dst.depth(w)),
                        Err(_) => f64::NEG_INFINITY,
                    };
                }
            } else {
                margin = f64::NEG_INFINITY;
            }
            let rel = margin / dst.radius;
            worst = worst.min(margin);
            worst_rel = worst_rel.min(rel);
            if !(rel > MARGIN_TOLERANCE) {
                v.push(Violation {
                    condition: "contraction",
                    indices: vec![i + 1, j + 1],
                    detail: format!("S_{}^-1(D_{}) not inside D_{} (margin {margin:e})", i + 1, j + 1, i + 1),
                });
            }
        }
    }

    ValidationReport {
        violations: v,
        worst_margin: worst,
        worst_relative_margin: worst_rel,
    }
}

/// Relative gap between consecutive disk pairs in [`build_funnel_group`]:
/// the inner edge of pair `j` sits at `(1 + PAIR_SPACING)` times the outer
/// edge of pair `j - 1`.
pub const PAIR_SPACING: f64 = 1.0;

/// Symmetric funnel group with prescribed generator lengths.
///
/// Disk pair `j` is placed at `±x_j` with radius `ρ_j`, so that
/// `S_j(z) = x_j - ρ_j² / (z + x_j)` has trace `2 x_j / ρ_j`; choosing
/// `x_j = ρ_j cosh(ℓ_j / 2)` gives `ℓ(S_j) = ℓ_j`. Pairs are nested
/// outward with a fixed relative spacing.
pub fn build_funnel_group(rank: usize, lengths: &[f64]) -> Result<SchottkyGroup> {
    if rank < 2 {
        return Err(Error::InvalidArgument(format!("rank must be at least 2, got {rank}")));
    }
    if lengths.len() != rank {
        return Err(Error::InvalidArgument(format!(
            "expected {rank} lengths, got {}",
            lengths.len()
        )));
    }
    if let Some(bad) = lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(Error::InfeasibleConfiguration { margin: *bad });
    }
    let mut left = Vec::with_capacity(rank);
    let mut right = Vec::with_capacity(rank);
    let mut outer_edge = 0.0f64;
    for (j, &len) in lengths.iter().enumerate() {
        let ratio = (len / 2.0).cosh();
        let radius = if j == 0 {
            1.0
        } else {
            outer_edge * (1.0 + PAIR_SPACING) / (ratio - 1.0)
        };
        let x = radius * ratio;
        left.push(Disk::real(-x, radius));
        right.push(Disk::real(x, radius));
        outer_edge = x + radius;
    }
    left.extend(right);
    let g = SchottkyGroup::from_disks(left)?;
    let report = validate_schottky(&g);
    if !report.passed() {
        return Err(Error::InfeasibleConfiguration {
            margin: report.worst_relative_margin,
        });
    }
    for (j, &len) in lengths.iter().enumerate() {
        let got = g.generator(j).displacement_length()?;
        if (got - len).abs() > 1e-10 * len.max(1.0) {
            return Err(Error::InfeasibleConfiguration { margin: got - len });
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_by_four() {
        let m = MoebiusMap::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let (w, dw) = m.evaluate(Complex64::new(1.0, 0.0)).unwrap();
        assert!((w - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        assert!((dw - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        assert!((m.displacement_length().unwrap() - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn identity_evaluation() {
        let (w, dw) = MoebiusMap::IDENTITY.evaluate(Complex64::i()).unwrap();
        assert_eq!(w, Complex64::i());
        assert_eq!(dw, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn multiplier_two() {
        let s = 2f64.sqrt();
        let m = MoebiusMap::new(s, 0.0, 0.0, 1.0 / s).unwrap();
        assert!((m.displacement_length().unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn pole_is_reported() {
        let m = MoebiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!(matches!(m.evaluate(Complex64::new(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn elliptic_and_parabolic_are_not_hyperbolic() {
        let rot = MoebiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!(matches!(rot.displacement_length(), Err(Error::NonHyperbolic { .. })));
        let par = MoebiusMap::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(par.displacement_length().is_err());
    }

    #[test]
    fn sign_normalisation() {
        let m = MoebiusMap::new(-2.0, -1.0, -1.0, -1.0).unwrap();
        assert!(m.trace() > 0.0);
        assert!((m.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_disks_are_named() {
        let disks = vec![
            Disk::real(-3.0, 1.0),
            Disk::real(-2.5, 1.0),
            Disk::real(3.0, 1.0),
            Disk::real(6.0, 1.0),
        ];
        let g = SchottkyGroup::from_disks(disks).unwrap();
        let rep = validate_schottky(&g);
        assert!(!rep.passed());
        let hit = rep
            .violations
            .iter()
            .find(|v| v.condition == "overlapping disks")
            .unwrap();
        assert_eq!(hit.indices, vec![1, 2]);
    }

    #[test]
    fn off_axis_center_is_rejected() {
        let g = build_funnel_group(2, &[4.0, 4.0]).unwrap();
        let mut disks = g.disks().to_vec();
        disks[0].center.im = 0.5;
        let bad = SchottkyGroup::from_parts(disks, g.generators().to_vec()).unwrap();
        let rep = validate_schottky(&bad);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.condition == "center off real axis" && v.indices == vec![1]));
    }

    #[test]
    fn funnel_group_is_valid_with_requested_lengths() {
        let g = build_funnel_group(2, &[4.0, 4.0]).unwrap();
        let rep = validate_schottky(&g);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!(rep.worst_margin > 0.0);
        for l in g.generator_lengths().unwrap() {
            assert!((l - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_length_is_infeasible() {
        assert!(matches!(
            build_funnel_group(2, &[0.0, 4.0]),
            Err(Error::InfeasibleConfiguration { .. })
        ));
        assert!(build_funnel_group(1, &[4.0]).is_err());
    }

    #[test]
    fn broken_inverse_pairing_is_reported() {
        let g = build_funnel_group(2, &[5.0, 6.0]).unwrap();
        let mut gens = g.generators().to_vec();
        gens[2] = gens[0];
        let bad = SchottkyGroup::from_parts(g.disks().to_vec(), gens).unwrap();
        let rep = validate_schottky(&bad);
        assert!(rep.violations.iter().any(|v| v.condition == "inverse pairing"));
    }
}
