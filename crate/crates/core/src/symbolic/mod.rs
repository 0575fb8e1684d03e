//! Word combinatorics of the free Schottky group: reduced and cyclically
//! reduced words, abelianization, characters and periodic-orbit tables.

mod cache;

pub use cache::{WordCache, CACHE_FORMAT_VERSION};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{MoebiusMap, SchottkyGroup};

/// Default cap on the number of words produced by one enumeration.
pub const DEFAULT_WORD_CAP: u64 = 10_000_000;

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t.rem_euclid(1.0))
}

/// Reduced word over the letters `0..2r` (letter `k + r` is the inverse of `k`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<usize>,
}

impl Word {
    pub fn new(rank: usize, letters: Vec<usize>) -> Result<Self> {
        check_reduced(rank, &letters)?;
        Ok(Word { rank, letters })
    }

    /// Builds a word from 1-based indices `1..=2r` (index `j + r` is `S_j^{-1}`).
    pub fn from_indices(rank: usize, indices: &[usize]) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|&&i| i == 0 || i > 2 * rank) {
            return Err(Error::InvalidArgument(format!("letter index {bad} outside 1..={}", 2 * rank)));
        }
        Self::new(rank, indices.iter().map(|i| i - 1).collect())
    }

    pub fn empty(rank: usize) -> Self {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) if self.letters.len() > 1 => f != (l + self.rank) % (2 * self.rank),
            _ => true,
        }
    }

    /// Concatenation, `None` if the junction cancels.
    pub fn concat(&self, other: &Word) -> Option<Word> {
        if let (Some(&l), Some(&f)) = (self.letters.last(), other.letters.first()) {
            if f == (l + self.rank) % (2 * self.rank) {
                return None;
            }
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Some(Word {
            rank: self.rank,
            letters,
        })
    }

    pub fn inverse(&self) -> Word {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|&k| (k + self.rank) % (2 * self.rank))
            .collect();
        Word {
            rank: self.rank,
            letters,
        }
    }

    pub fn abelianization(&self) -> Vec<i64> {
        exponent_sums(self.rank, &self.letters)
    }

    /// The group element `S_{w_1} S_{w_2} ... S_{w_n}`.
    pub fn element(&self, g: &SchottkyGroup) -> MoebiusMap {
        self.letters
            .iter()
            .fold(MoebiusMap::IDENTITY, |acc, &k| acc.compose(g.generator(k)))
    }

    /// Displacement length of the element; requires a nonempty cyclically reduced word.
    pub fn displacement_length(&self, g: &SchottkyGroup) -> Result<f64> {
        self.element(g).displacement_length()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, &k) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if k < self.rank {
                write!(f, "S{}", k + 1)?;
            } else {
                write!(f, "S{}^-1", k - self.rank + 1)?;
            }
        }
        Ok(())
    }
}

fn check_reduced(rank: usize, letters: &[usize]) -> Result<()> {
    if let Some(&bad) = letters.iter().find(|&&k| k >= 2 * rank) {
        return Err(Error::InvalidArgument(format!("letter {bad} outside 0..{}", 2 * rank)));
    }
    for (i, w) in letters.windows(2).enumerate() {
        if w[1] == (w[0] + rank) % (2 * rank) {
            return Err(Error::NonReducedWord { position: i + 1 });
        }
    }
    Ok(())
}

fn exponent_sums(rank: usize, letters: &[usize]) -> Vec<i64> {
    let mut v = vec![0i64; rank];
    for &k in letters {
        if k < rank {
            v[k] += 1;
        } else {
            v[k - rank] -= 1;
        }
    }
    v
}

/// Exponent-sum vector `[w] ∈ Z^r` of a reduced word given by 0-based letters.
pub fn abelianization(rank: usize, letters: &[usize]) -> Result<Vec<i64>> {
    check_reduced(rank, letters)?;
    Ok(exponent_sums(rank, letters))
}

/// Abelian character `χ_θ(γ) = e(<θ, [γ]>)`.
///
/// Characters of `(Z/NZ)^r` built with [`Character::from_fraction`] are
/// evaluated by integer arithmetic mod `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    theta: Vec<f64>,
    fraction: Option<(Vec<i64>, i64)>,
}

impl Character {
    pub fn new(theta: Vec<f64>) -> Self {
        Character {
            theta: theta.iter().map(|t| t.rem_euclid(1.0)).collect(),
            fraction: None,
        }
    }

    pub fn trivial(rank: usize) -> Self {
        Self::from_fraction(&vec![0; rank], 1)
    }

    /// `θ = a / N`.
    pub fn from_fraction(a: &[i64], n: i64) -> Self {
        assert!(n > 0, "modulus must be positive");
        let a: Vec<i64> = a.iter().map(|x| x.rem_euclid(n)).collect();
        Character {
            theta: a.iter().map(|&x| x as f64 / n as f64).collect(),
            fraction: Some((a, n)),
        }
    }

    pub fn rank(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn fraction(&self) -> Option<(&[i64], i64)> {
        self.fraction.as_ref().map(|(a, n)| (a.as_slice(), *n))
    }

    pub fn is_trivial(&self) -> bool {
        match &self.fraction {
            Some((a, _)) => a.iter().all(|&x| x == 0),
            None => self.theta.iter().all(|&t| t == 0.0),
        }
    }

    /// The character `-θ`.
    pub fn conjugate(&self) -> Self {
        match &self.fraction {
            Some((a, n)) => Self::from_fraction(&a.iter().map(|x| -x).collect::<Vec<_>>(), *n),
            None => Self::new(self.theta.iter().map(|t| -t).collect()),
        }
    }

    /// `Σ_j dist(θ_j, Z)`, the 1-norm distance to the trivial character.
    pub fn distance_to_trivial(&self) -> f64 {
        self.theta.iter().map(|t| t.min(1.0 - t)).sum()
    }

    /// Value on an abelianization vector.
    pub fn eval(&self, v: &[i64]) -> Complex64 {
        match &self.fraction {
            Some((a, n)) => {
                let k: i64 = a.iter().zip(v).map(|(x, y)| (x * y).rem_euclid(*n)).sum();
                root_of_unity(k, *n)
            }
            None => e(self.theta.iter().zip(v).map(|(t, &x)| t * x as f64).sum()),
        }
    }

    pub fn eval_i32(&self, v: &[i32]) -> Complex64 {
        match &self.fraction {
            Some((a, n)) => {
                let k: i64 = a.iter().zip(v).map(|(x, &y)| (x * y as i64).rem_euclid(*n)).sum();
                root_of_unity(k, *n)
            }
            None => e(self.theta.iter().zip(v).map(|(t, &x)| t * x as f64).sum()),
        }
    }

    /// Value on a single generator letter.
    pub fn on_letter(&self, letter: usize) -> Complex64 {
        let r = self.rank();
        let mut v = vec![0i64; r];
        if letter < r {
            v[letter] = 1;
        } else {
            v[letter - r] = -1;
        }
        self.eval(&v)
    }
}

/// `e(k/n)`, exact at `k ≡ 0`.
fn root_of_unity(k: i64, n: i64) -> Complex64 {
    let k = k.rem_euclid(n);
    if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
    }
}

/// `χ_θ(w) = e(<θ, [w]>)`.
pub fn character_value(c: &Character, w: &Word) -> Complex64 {
    c.eval(&w.abelianization())
}

/// `|Σ_{a ∈ {0..N-1}^r} χ_{a/N}(w) - N^r [ [w] ≡ 0 mod N ]|`.
pub fn character_sum_identity_check(n: i64, w: &Word) -> f64 {
    let r = w.rank();
    let v = w.abelianization();
    let mut total = Complex64::new(0.0, 0.0);
    for a in residue_vectors(n, r) {
        total += Character::from_fraction(&a, n).eval(&v);
    }
    let index = (n as f64).powi(r as i32);
    let expected = if v.iter().all(|x| x.rem_euclid(n) == 0) { index } else { 0.0 };
    (total - expected).norm()
}

/// All vectors in `{0..N-1}^r` in lexicographic order.
pub fn residue_vectors(n: i64, r: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// `trace(A^n)` for the `2r x 2r` admissibility table, i.e. the number of
/// cyclically reduced words of length `n`.
pub fn cyclic_word_count(rank: usize, n: usize) -> u128 {
    let m = 2 * rank;
    let table: Vec<Vec<u128>> = (0..m)
        .map(|i| (0..m).map(|j| u128::from(j != (i + rank) % m)).collect())
        .collect();
    let mut power: Vec<Vec<u128>> = (0..m).map(|i| (0..m).map(|j| u128::from(i == j)).collect()).collect();
    for _ in 0..n {
        power = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).fold(0u128, |s, k| s.saturating_add(power[i][k].saturating_mul(table[k][j]))))
                    .collect()
            })
            .collect();
    }
    (0..m).fold(0u128, |s, i| s.saturating_add(power[i][i]))
}

/// All cyclically reduced words of one length together with their
/// displacement lengths and abelianizations, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTable {
    rank: usize,
    word_len: usize,
    letters: Vec<u8>,
    lengths: Vec<f64>,
    abel: Vec<i32>,
}

impl OrbitTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn letters(&self, i: usize) -> &[u8] {
        &self.letters[i * self.word_len..(i + 1) * self.word_len]
    }

    pub fn length(&self, i: usize) -> f64 {
        self.lengths[i]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn abelianization(&self, i: usize) -> &[i32] {
        &self.abel[i * self.rank..(i + 1) * self.rank]
    }

    pub fn word(&self, i: usize) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters(i).iter().map(|&k| k as usize).collect(),
        }
    }

    /// `true` if the word is the least rotation of a primitive cyclic word
    /// (a Lyndon word), i.e. the canonical representative of a primitive
    /// conjugacy class.
    pub fn is_primitive_representative(&self, i: usize) -> bool {
        is_lyndon(self.letters(i))
    }

    pub(crate) fn from_columns(
        rank: usize,
        word_len: usize,
        letters: Vec<u8>,
        lengths: Vec<f64>,
        abel: Vec<i32>,
    ) -> Result<Self> {
        let count = lengths.len();
        if letters.len() != count * word_len || abel.len() != count * rank {
            return Err(Error::Cache("inconsistent orbit table columns".into()));
        }
        Ok(OrbitTable {
            rank,
            word_len,
            letters,
            lengths,
            abel,
        })
    }
}

fn is_lyndon(w: &[u8]) -> bool {
    let n = w.len();
    (1..n).all(|k| {
        let rotated = w[k..].iter().chain(&w[..k]);
        w.iter().cmp(rotated) == std::cmp::Ordering::Less
    })
}

/// Enumerates all length-`n` words that are admissible linearly and
/// cyclically, with their displacement lengths and abelianizations.
pub fn enumerate_admissible_cyclic(g: &SchottkyGroup, n: usize, cap: u64) -> Result<OrbitTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let count = cyclic_word_count(g.rank(), n);
    if count > u128::from(cap) {
        return Err(Error::Budget { count, cap });
    }
    let letters = g.letters();
    if letters > usize::from(u8::MAX) {
        return Err(Error::InvalidArgument("too many generators".into()));
    }
    let parts: Vec<OrbitTable> = (0..letters)
        .into_par_iter()
        .map(|first| {
            let mut part = OrbitTable {
                rank: g.rank(),
                word_len: n,
                letters: Vec::new(),
                lengths: Vec::new(),
                abel: Vec::new(),
            };
            let mut stack = vec![first as u8];
            extend_words(g, n, *g.generator(first), &mut stack, &mut part);
            part
        })
        .collect();
    let mut table = OrbitTable {
        rank: g.rank(),
        word_len: n,
        letters: Vec::with_capacity(count as usize * n),
        lengths: Vec::with_capacity(count as usize),
        abel: Vec::with_capacity(count as usize * g.rank()),
    };
    for p in parts {
        table.letters.extend(p.letters);
        table.lengths.extend(p.lengths);
        table.abel.extend(p.abel);
    }
    debug_assert_eq!(table.len() as u128, count);
    Ok(table)
}

fn extend_words(g: &SchottkyGroup, n: usize, product: MoebiusMap, stack: &mut Vec<u8>, out: &mut OrbitTable) {
    let last = *stack.last().unwrap() as usize;
    if stack.len() == n {
        let first = stack[0] as usize;
        if !g.admissible(last, first) {
            return;
        }
        let t = product.trace().abs();
        out.lengths.push(2.0 * (t / 2.0).acosh());
        out.letters.extend_from_slice(stack);
        let word: Vec<usize> = stack.iter().map(|&k| k as usize).collect();
        out.abel
            .extend(exponent_sums(g.rank(), &word).into_iter().map(|x| x as i32));
        return;
    }
    for next in 0..g.letters() {
        if !g.admissible(last, next) {
            continue;
        }
        let p = product.compose_raw(g.generator(next));
        stack.push(next as u8);
        extend_words(g, n, p, stack, out);
        stack.pop();
    }
}

/// Orbit tables for word lengths `1..=n_max` of one group.
#[derive(Debug, Clone)]
pub struct OrbitCatalog {
    fingerprint: String,
    rank: usize,
    tables: Vec<OrbitTable>,
}

impl OrbitCatalog {
    pub fn build(g: &SchottkyGroup, n_max: usize, cap: u64, cache: Option<&WordCache>) -> Result<Self> {
        let fingerprint = g.fingerprint();
        let mut tables = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let table = match cache.map(|c| c.load(&fingerprint, n)).transpose()?.flatten() {
                Some(t) => t,
                None => {
                    let t = enumerate_admissible_cyclic(g, n, cap)?;
                    if let Some(c) = cache {
                        c.store(&fingerprint, &t)?;
                    }
                    t
                }
            };
            tables.push(table);
        }
        Ok(OrbitCatalog {
            fingerprint,
            rank: g.rank(),
            tables,
        })
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_max(&self) -> usize {
        self.tables.len()
    }

    /// Table of words of length `n` (`1 <= n <= n_max`).
    pub fn table(&self, n: usize) -> &OrbitTable {
        &self.tables[n - 1]
    }

    /// Smallest closed-geodesic length among the enumerated words.
    pub fn min_length(&self) -> f64 {
        self.tables
            .iter()
            .flat_map(|t| t.lengths.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}
