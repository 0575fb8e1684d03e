use num_complex::Complex64;
use rayon::prelude::*;

use super::zeros::{nearest_zero, LFunction, Zero};
use crate::error::{Error, Result};
use crate::symbolic::{residue_vectors, Character, OrbitCatalog};
use crate::transfer::{table_trace, TransferOperator};

/// One length of the factorisation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermResidual {
    pub n: usize,
    /// `Σ_a t_n(s, a/N)`
    pub character_sum: Complex64,
    /// `N^r Σ_{|w| = n, [w] ≡ 0 mod N} e^{-sℓ(w)} / (1 - e^{-ℓ(w)})`
    pub cover_sum: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArtinTakagiReport {
    pub modulus: i64,
    pub s: Complex64,
    pub tolerance: f64,
    pub terms: Vec<TermResidual>,
    /// `Σ_a log L(s, a/N)` from the truncated orbit series
    pub character_log_sum: Complex64,
    /// orbit-series `log Z` of the cover, from the filtered words
    pub cover_log: Complex64,
    pub aggregate_residual: f64,
    /// first word length whose residual reaches the tolerance
    pub first_failure: Option<usize>,
}

impl ArtinTakagiReport {
    pub fn max_residual(&self) -> f64 {
        self.terms.iter().map(|t| t.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.first_failure.is_none() && self.aggregate_residual < self.tolerance
    }
}

/// Checks `Σ_a L(s, a/N) = Z_{Γ_N}(s)` term by term in the orbit series.
pub fn artin_takagi_check(
    catalog: &OrbitCatalog,
    modulus: i64,
    s: Complex64,
    n_max: usize,
    tolerance: f64,
) -> Result<ArtinTakagiReport> {
    if modulus < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {modulus}")));
    }
    if n_max == 0 || n_max > catalog.n_max() {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} outside the catalog range 1..={}",
            catalog.n_max()
        )));
    }
    let rank = catalog.rank();
    let chars: Vec<Character> = residue_vectors(modulus, rank)
        .iter()
        .map(|a| Character::from_fraction(a, modulus))
        .collect();
    let index = (modulus as f64).powi(rank as i32);
    let m = modulus as i32;
    let mut terms = Vec::with_capacity(n_max);
    let (mut char_log, mut cover_log) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for n in 1..=n_max {
        let table = catalog.table(n);
        let character_sum: Complex64 = chars.iter().map(|c| table_trace(table, s, c, |_| true).0).sum();
        let trivial = Character::trivial(rank);
        let filtered = table_trace(table, s, &trivial, |v| v.iter().all(|x| x.rem_euclid(m) == 0)).0;
        let cover_sum = filtered * index;
        char_log -= character_sum / n as f64;
        cover_log -= cover_sum / n as f64;
        terms.push(TermResidual {
            n,
            character_sum,
            cover_sum,
            residual: (character_sum - cover_sum).norm(),
        });
    }
    let first_failure = terms.iter().find(|t| !(t.residual < tolerance)).map(|t| t.n);
    Ok(ArtinTakagiReport {
        modulus,
        s,
        tolerance,
        terms,
        character_log_sum: char_log,
        cover_log,
        aggregate_residual: (char_log - cover_log).norm(),
        first_failure,
    })
}

/// Parameters of the per-character zero search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    /// radius ε of the counting disk around δ
    pub epsilon: f64,
    /// largest half-width of the search box
    pub search_radius: f64,
    /// box diameter below which subdivision stops
    pub locate_eps: f64,
    /// zeros of the trivial character this close to δ are δ itself
    pub delta_tolerance: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            epsilon: 0.1,
            search_radius: 0.8,
            locate_eps: 1e-6,
            delta_tolerance: 1e-6,
        }
    }
}

/// Search result for one character `a/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterZeros {
    pub a: Vec<i64>,
    /// `‖a/N‖₁` with residues taken in `(-1/2, 1/2]`
    pub theta_l1: f64,
    /// every zero in the final search box
    pub zeros: Vec<Zero>,
    /// nearest zero to δ, other than δ itself and the topological zeros
    pub nearest: Option<Zero>,
    /// zeros with `|s - δ| < ε`, with multiplicity
    pub count_within_epsilon: usize,
    /// copied from the character `-a`, since `L(s, θ) = L(s, -θ)`
    pub mirrored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub modulus: i64,
    /// `N^r`
    pub index: u64,
    pub delta: f64,
    /// smallest `|δ - ζ|` over located zeros `ζ ≠ δ` of all characters
    pub gap_prime: Option<f64>,
    pub gap_character: Option<Vec<i64>>,
    pub count: usize,
    /// `count / N^r`
    pub ratio: f64,
    pub characters: Vec<CharacterZeros>,
    /// characters whose search failed, with the error
    pub failures: Vec<(Vec<i64>, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverScan {
    pub delta: f64,
    pub settings: ScanSettings,
    pub reports: Vec<GapReport>,
}

impl CoverScan {
    /// Smallest `count(N, ε) / N^r` over the scan.
    pub fn measured_c(&self) -> f64 {
        self.reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }
}

fn negate(a: &[i64], n: i64) -> Vec<i64> {
    a.iter().map(|x| (-x).rem_euclid(n)).collect()
}

/// Characters modulo `a ~ -a`: representatives in lexicographic order, each
/// with its partner when distinct.
pub fn character_classes(modulus: i64, rank: usize) -> Vec<(Vec<i64>, Option<Vec<i64>>)> {
    residue_vectors(modulus, rank)
        .into_iter()
        .filter_map(|a| {
            let b = negate(&a, modulus);
            match a.cmp(&b) {
                std::cmp::Ordering::Less => Some((a, Some(b))),
                std::cmp::Ordering::Equal => Some((a, None)),
                std::cmp::Ordering::Greater => None,
            }
        })
        .collect()
}

fn search_character(op: &TransferOperator, delta: f64, a: &[i64], modulus: i64, st: &ScanSettings) -> Result<CharacterZeros> {
    let theta = Character::from_fraction(a, modulus);
    let trivial = theta.is_trivial();
    let f = LFunction::new(op, theta.clone());
    let center = Complex64::new(delta, 0.0);
    let is_delta = |z: &Zero| trivial && (z.s - center).norm() < st.delta_tolerance;
    let skip = |z: &Zero| is_delta(z) || z.is_topological();
    let (set, nearest) = nearest_zero(&f, center, st.epsilon, st.search_radius.max(st.epsilon), st.locate_eps, skip)?;
    let count_within_epsilon = set
        .zeros
        .iter()
        .filter(|z| !z.is_topological() && (z.s - center).norm() < st.epsilon)
        .map(|z| z.multiplicity)
        .sum();
    Ok(CharacterZeros {
        a: a.to_vec(),
        theta_l1: theta.distance_to_trivial(),
        zeros: set.zeros,
        nearest,
        count_within_epsilon,
        mirrored: false,
    })
}

/// Zero search around δ for every character of `(Z/N)^r`, for each `N`.
pub fn cover_gap_report(op: &TransferOperator, delta: f64, moduli: &[i64], settings: ScanSettings) -> Result<CoverScan> {
    if moduli.is_empty() || moduli.iter().any(|&n| n < 1) {
        return Err(Error::InvalidArgument(format!("moduli must be positive and nonempty, got {moduli:?}")));
    }
    if !(settings.epsilon > 0.0 && settings.locate_eps > 0.0 && settings.delta_tolerance > 0.0) {
        return Err(Error::InvalidArgument("scan tolerances must be positive".into()));
    }
    let rank = op.group().rank();
    let mut reports = Vec::with_capacity(moduli.len());
    for &modulus in moduli {
        let classes = character_classes(modulus, rank);
        let results: Vec<(Vec<i64>, Option<Vec<i64>>, Result<CharacterZeros>)> = classes
            .into_par_iter()
            .map(|(a, b)| {
                let r = search_character(op, delta, &a, modulus, &settings);
                (a, b, r)
            })
            .collect();
        let mut characters = Vec::new();
        let mut failures = Vec::new();
        for (a, b, r) in results {
            match r {
                Ok(c) => {
                    if let Some(b) = b {
                        let mut m = c.clone();
                        m.a = b;
                        m.mirrored = true;
                        characters.push(m);
                    }
                    characters.push(c);
                }
                Err(e) => {
                    if let Some(b) = b {
                        failures.push((b, e.to_string()));
                    }
                    failures.push((a, e.to_string()));
                }
            }
        }
        characters.sort_by(|x, y| x.a.cmp(&y.a));
        failures.sort();
        let center = Complex64::new(delta, 0.0);
        let (gap_prime, gap_character) = characters
            .iter()
            .filter_map(|c| c.nearest.as_ref().map(|z| ((z.s - center).norm(), &c.a)))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .map_or((None, None), |(d, a)| (Some(d), Some(a.clone())));
        let count: usize = characters.iter().map(|c| c.count_within_epsilon).sum();
        let index = (modulus as u64).pow(rank as u32);
        reports.push(GapReport {
            modulus,
            index,
            delta,
            gap_prime,
            gap_character,
            count,
            ratio: count as f64 / index as f64,
            characters,
            failures,
        });
    }
    Ok(CoverScan {
        delta,
        settings,
        reports,
    })
}
