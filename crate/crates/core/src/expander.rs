//! Cayley graphs of `(Z/NZ)^r`: closed-form Laplacian spectrum, Cheeger
//! constant by exhaustive search, and the Cheeger inequality diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest `N^r` for the eigenvalue scan.
pub const SCAN_CAP: u64 = 10_000_000;
/// Largest vertex count for the exhaustive Cheeger search.
pub const CHEEGER_CAP: u64 = 24;

/// Cayley graph of `(Z/NZ)^r` for a symmetric multiset `S` of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyGraphSpec {
    modulus: i64,
    rank: usize,
    generators: Vec<Vec<i64>>,
}

impl CayleyGraphSpec {
    pub fn new(modulus: i64, rank: usize, generators: Vec<Vec<i64>>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument(format!("N must be at least 2, got {modulus}")));
        }
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if generators.is_empty() {
            return Err(Error::InvalidArgument("generating set is empty".into()));
        }
        for s in &generators {
            if s.len() != rank {
                return Err(Error::InvalidArgument(format!("generator {s:?} has length {}, expected {rank}", s.len())));
            }
            if s.iter().all(|x| x.rem_euclid(modulus) == 0) {
                return Err(Error::InvalidArgument(format!("generator {s:?} vanishes mod {modulus}")));
            }
        }
        // compare residues, so that e.g. {1, 2, 3} mod 4 counts as symmetric
        let reduce = |s: &Vec<i64>, sign: i64| s.iter().map(|x| (sign * x).rem_euclid(modulus)).collect::<Vec<_>>();
        let mut pos: Vec<Vec<i64>> = generators.iter().map(|s| reduce(s, 1)).collect();
        let mut neg: Vec<Vec<i64>> = generators.iter().map(|s| reduce(s, -1)).collect();
        pos.sort();
        neg.sort();
        if pos != neg {
            return Err(Error::InvalidArgument("generating multiset is not symmetric".into()));
        }
        Ok(CayleyGraphSpec {
            modulus,
            rank,
            generators,
        })
    }

    /// `S = {±e_1, ..., ±e_r}`, the abelianised free generators.
    pub fn standard(modulus: i64, rank: usize) -> Result<Self> {
        let mut gens = Vec::with_capacity(2 * rank);
        for j in 0..rank {
            for sign in [1, -1] {
                let mut v = vec![0; rank];
                v[j] = sign;
                gens.push(v);
            }
        }
        Self::new(modulus, rank, gens)
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    pub fn vertex_count(&self) -> u64 {
        (self.modulus as u64).saturating_pow(self.rank as u32)
    }

    fn index(&self, v: &[i64]) -> usize {
        v.iter()
            .fold(0i64, |acc, x| acc * self.modulus + x.rem_euclid(self.modulus)) as usize
    }

    fn vertex(&self, mut i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank];
        for x in v.iter_mut().rev() {
            *x = (i % self.modulus as usize) as i64;
            i /= self.modulus as usize;
        }
        v
    }

    /// Normalised Laplacian `I - A/k` as a dense row-major matrix, vertices
    /// in lexicographic order.
    pub fn laplacian(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.vertex_count();
        if n > CHEEGER_CAP * CHEEGER_CAP * 16 {
            return Err(Error::SizeCap { size: n, cap: CHEEGER_CAP * CHEEGER_CAP * 16 });
        }
        let n = n as usize;
        let k = self.degree() as f64;
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += 1.0;
            let v = self.vertex(i);
            for s in &self.generators {
                let w: Vec<i64> = v.iter().zip(s).map(|(a, b)| a + b).collect();
                row[self.index(&w)] -= 1.0 / k;
            }
        }
        Ok(m)
    }
}

/// `λ_a = (1/|S|) Σ_{s ∈ S} (1 - cos(2π <a, s> / N))`.
pub fn eigenvalue_closed_form(spec: &CayleyGraphSpec, a: &[i64]) -> f64 {
    let n = spec.modulus;
    let sum: f64 = spec
        .generators
        .iter()
        .map(|s| {
            let k = a.iter().zip(s).map(|(x, y)| (x * y).rem_euclid(n)).sum::<i64>().rem_euclid(n);
            // cos is even; fold so that k and -k give identical values
            let k = k.min(n - k);
            if k == 0 {
                0.0
            } else {
                1.0 - (2.0 * PI * k as f64 / n as f64).cos()
            }
        })
        .sum();
    sum / spec.degree() as f64
}

fn check_scan(spec: &CayleyGraphSpec) -> Result<()> {
    let size = spec.vertex_count();
    if size > SCAN_CAP {
        return Err(Error::SizeCap { size, cap: SCAN_CAP });
    }
    Ok(())
}

/// All `(a, λ_a)` in lexicographic order of `a`.
pub fn spectrum(spec: &CayleyGraphSpec) -> Result<Vec<(Vec<i64>, f64)>> {
    check_scan(spec)?;
    Ok((0..spec.vertex_count() as usize)
        .map(|i| {
            let a = spec.vertex(i);
            let l = eigenvalue_closed_form(spec, &a);
            (a, l)
        })
        .collect())
}

/// Smallest nonzero-index eigenvalue and the first `a` attaining it.
pub fn lambda1(spec: &CayleyGraphSpec) -> Result<(f64, Vec<i64>)> {
    check_scan(spec)?;
    let mut best = (f64::INFINITY, Vec::new());
    for i in 1..spec.vertex_count() as usize {
        let a = spec.vertex(i);
        let l = eigenvalue_closed_form(spec, &a);
        if l < 1e-14 {
            return Err(Error::DisconnectedGraph(a));
        }
        if l < best.0 {
            best = (l, a);
        }
    }
    Ok(best)
}

/// `min |∂A| / |A|` over nonempty `A` with `|A| <= |V|/2`, by a Gray-code
/// walk over all subsets. Boundary edges are counted with the multiplicity
/// of `S`.
pub fn cheeger_bruteforce(spec: &CayleyGraphSpec) -> Result<f64> {
    let size = spec.vertex_count();
    if size > CHEEGER_CAP {
        return Err(Error::SizeCap { size, cap: CHEEGER_CAP });
    }
    let v = size as usize;
    let nbr: Vec<Vec<usize>> = (0..v)
        .map(|i| {
            let x = spec.vertex(i);
            spec.generators
                .iter()
                .map(|s| spec.index(&x.iter().zip(s).map(|(a, b)| a + b).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let mut member = vec![false; v];
    let mut boundary: i64 = 0;
    let mut count = 0usize;
    // best ratio kept as a fraction to make comparisons exact
    let mut best: Option<(i64, usize)> = None;
    for step in 1u64..(1u64 << v) {
        let flip = step.trailing_zeros() as usize;
        let adding = !member[flip];
        for &u in &nbr[flip] {
            let inside = u != flip && member[u];
            boundary += match (adding, inside) {
                (true, true) => -1,
                (true, false) => 1,
                (false, true) => 1,
                (false, false) => -1,
            };
        }
        member[flip] = adding;
        count = if adding { count + 1 } else { count - 1 };
        if count >= 1 && 2 * count <= v {
            let better = match best {
                None => true,
                Some((b, c)) => boundary * (c as i64) < b * count as i64,
            };
            if better {
                best = Some((boundary, count));
            }
        }
    }
    let (b, c) = best.expect("graph has at least two vertices");
    Ok(b as f64 / c as f64)
}

/// Both sides of `(k/2) λ₁ <= h <= k sqrt(λ₁ (1 - λ₁))` for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CheegerReport {
    pub modulus: i64,
    pub rank: usize,
    pub degree: usize,
    pub lambda1: f64,
    pub argmin: Vec<i64>,
    pub h: f64,
    pub lower: f64,
    /// `k sqrt(max(0, λ₁ (1 - λ₁)))`
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// `N · h`
    pub n_times_h: f64,
}

const BOUND_SLACK: f64 = 1e-12;

pub fn cheeger_bounds_report(spec: &CayleyGraphSpec) -> Result<CheegerReport> {
    let (l1, argmin) = lambda1(spec)?;
    let h = cheeger_bruteforce(spec)?;
    let k = spec.degree() as f64;
    let lower = 0.5 * k * l1;
    let upper = k * (l1 * (1.0 - l1)).max(0.0).sqrt();
    Ok(CheegerReport {
        modulus: spec.modulus,
        rank: spec.rank,
        degree: spec.degree(),
        lambda1: l1,
        argmin,
        h,
        lower,
        upper,
        lower_holds: lower <= h + BOUND_SLACK,
        upper_holds: h <= upper + BOUND_SLACK,
        n_times_h: spec.modulus as f64 * h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: i64) -> CayleyGraphSpec {
        CayleyGraphSpec::standard(n, 1).unwrap()
    }

    #[test]
    fn trivial_index_has_zero_eigenvalue() {
        let g = CayleyGraphSpec::standard(5, 2).unwrap();
        assert_eq!(eigenvalue_closed_form(&g, &[0, 0]), 0.0);
    }

    #[test]
    fn cycle_eight_first_eigenvalue() {
        let l = eigenvalue_closed_form(&cycle(8), &[1]);
        assert!((l - (1.0 - (PI / 4.0).cos())).abs() < 1e-15);
        assert!((l - 0.292893).abs() < 1e-6);
    }

    #[test]
    fn eigenvalues_are_even_in_a() {
        let g = CayleyGraphSpec::new(7, 2, vec![vec![1, 2], vec![-1, -2], vec![0, 1], vec![0, -1]]).unwrap();
        for (a, l) in spectrum(&g).unwrap() {
            let b: Vec<i64> = a.iter().map(|x| (-x).rem_euclid(7)).collect();
            assert_eq!(l, eigenvalue_closed_form(&g, &b));
        }
    }

    #[test]
    fn lambda1_on_cycles() {
        for n in [3, 5, 8, 13] {
            let (l, a) = lambda1(&cycle(n)).unwrap();
            assert_eq!(a, vec![1]);
            assert!((l - (1.0 - (2.0 * PI / n as f64).cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn disconnected_graph_is_reported() {
        let g = CayleyGraphSpec::new(4, 1, vec![vec![2], vec![-2]]).unwrap();
        assert!(matches!(lambda1(&g), Err(Error::DisconnectedGraph(a)) if a == vec![2]));
    }

    #[test]
    fn asymmetric_set_is_rejected() {
        assert!(CayleyGraphSpec::new(5, 1, vec![vec![1], vec![2]]).is_err());
        assert!(CayleyGraphSpec::new(5, 1, vec![vec![5], vec![-5]]).is_err());
    }

    #[test]
    fn cheeger_of_cycle_eight() {
        assert!((cheeger_bruteforce(&cycle(8)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cheeger_size_cap() {
        assert!(matches!(cheeger_bruteforce(&cycle(25)), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn cheeger_report_cycle_eight_triple() {
        let r = cheeger_bounds_report(&cycle(8)).unwrap();
        assert!((r.lower - 0.292893).abs() < 1e-6);
        assert!((r.h - 0.5).abs() < 1e-12);
        assert!((r.upper - 0.910180).abs() < 1e-6);
        assert!(r.lower_holds && r.upper_holds);
    }

    #[test]
    fn cycle_four_fails_upper_bound() {
        let r = cheeger_bounds_report(&cycle(4)).unwrap();
        assert!((r.lambda1 - 1.0).abs() < 1e-15);
        assert_eq!(r.h, 1.0);
        assert!(r.upper < 1e-7);
        assert!(r.lower_holds && !r.upper_holds);
    }

    #[test]
    fn trace_identity() {
        let g = CayleyGraphSpec::standard(6, 2).unwrap();
        let total: f64 = spectrum(&g).unwrap().iter().map(|(_, l)| l).sum();
        assert!((total - 36.0).abs() < 1e-10);
    }
}
