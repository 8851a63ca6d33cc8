//! Nonresonant interaction sets and their precomputed tables.
//!
//! For a mode `k` the cubic nonlinearity couples triples `(j1, j2, j3)` with
//! `k = j1 - j2 + j3`. The quadratic phase of such a triple factors as
//!
//! ```text
//! m = k^2 - j1^2 + j2^2 - j3^2 = 2 (k - j1)(j1 - j2)
//! ```
//!
//! so the nonresonant triples (`m != 0`) are in bijection with the pairs
//! `(m, z)`, `m != 0`, `2z | m`, through `z = k - j1`. The momentum relation is
//! written with `+ j3`; it is the only sign choice under which the factorization
//! above holds.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::ComplexSequence;

/// All `z` with `2z | m`, ascending. Empty for odd `m`.
pub fn divisor_set(m: i64) -> Result<Vec<i64>> {
    if m == 0 {
        return Err(Error::ZeroFrequency);
    }
    if m % 2 != 0 {
        return Ok(Vec::new());
    }
    let half = (m / 2).unsigned_abs();
    let pos = positive_divisors(half);
    let mut out: Vec<i64> = pos.iter().rev().map(|&d| -(d as i64)).collect();
    out.extend(pos.iter().map(|&d| d as i64));
    Ok(out)
}

/// `r_m = |{z : 2z | m}|`, equal to `2 d(|m|/2)` for even `m` and 0 for odd `m`.
pub fn divisor_count(m: i64) -> Result<u64> {
    if m == 0 {
        return Err(Error::ZeroFrequency);
    }
    if m % 2 != 0 {
        return Ok(0);
    }
    Ok(2 * positive_divisor_count((m / 2).unsigned_abs()))
}

fn positive_divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Number of positive divisors `d(n)`.
pub fn positive_divisor_count(n: u64) -> u64 {
    let mut count = 0;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

/// Sieved divisor counts `d(n)` for `0 <= n <= n_max` (`d(0)` stored as 0).
#[derive(Debug, Clone)]
pub struct DivisorCounts {
    counts: Vec<u32>,
}

impl DivisorCounts {
    pub fn new(n_max: usize) -> Self {
        let mut counts = vec![0u32; n_max + 1];
        for d in 1..=n_max {
            for multiple in (d..=n_max).step_by(d) {
                counts[multiple] += 1;
            }
        }
        Self { counts }
    }

    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    /// `d(n)`; panics past the sieved range.
    pub fn d(&self, n: usize) -> u32 {
        self.counts[n]
    }

    /// `r_m` for `m != 0` with `|m|/2` inside the sieved range.
    pub fn r(&self, m: i64) -> u32 {
        if m % 2 != 0 {
            0
        } else {
            2 * self.counts[(m / 2).unsigned_abs() as usize]
        }
    }
}

/// Growth summary of `r_m` over even `0 < m <= m_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorStats {
    pub m_max: i64,
    pub max: u64,
    pub argmax: i64,
    pub mean: f64,
}

pub fn divisor_stats(m_max: i64) -> Result<DivisorStats> {
    if m_max < 2 {
        return Err(Error::InvalidConfig(format!(
            "divisor_stats needs M_max >= 2, got {m_max}"
        )));
    }
    let sieve = DivisorCounts::new((m_max / 2) as usize);
    let mut max = 0u64;
    let mut argmax = 2;
    let mut total = 0u64;
    let mut n = 0u64;
    for m in (2..=m_max).step_by(2) {
        let r = sieve.r(m) as u64;
        total += r;
        n += 1;
        if r > max {
            max = r;
            argmax = m;
        }
    }
    Ok(DivisorStats {
        m_max,
        max,
        argmax,
        mean: total as f64 / n as f64,
    })
}

/// Maps `(k, m, z)` to the unique triple `(j1, j2, j3)` of the bijection.
pub fn index_to_triple(k: i64, m: i64, z: i64) -> Result<(i64, i64, i64)> {
    if m == 0 || z == 0 {
        return Err(Error::InvalidPair { m, z });
    }
    let two_z = z.checked_mul(2).ok_or(Error::Overflow("2z"))?;
    if m % two_z != 0 {
        return Err(Error::InvalidPair { m, z });
    }
    let gap = m / two_z;
    let j1 = k.checked_sub(z).ok_or(Error::Overflow("k - z"))?;
    let j2 = j1.checked_sub(gap).ok_or(Error::Overflow("j1 - m/2z"))?;
    let j3 = z.checked_add(j2).ok_or(Error::Overflow("k - j1 + j2"))?;
    Ok((j1, j2, j3))
}

/// Inverse of [`index_to_triple`].
pub fn triple_to_index(k: i64, j1: i64, j2: i64, j3: i64) -> Result<(i64, i64)> {
    let sum = j1
        .checked_sub(j2)
        .and_then(|d| d.checked_add(j3))
        .ok_or(Error::Overflow("j1 - j2 + j3"))?;
    if sum != k {
        return Err(Error::MomentumMismatch { k, sum });
    }
    let sq = |x: i64| x.checked_mul(x).ok_or(Error::Overflow("square"));
    let m = sq(k)?
        .checked_sub(sq(j1)?)
        .and_then(|v| v.checked_add(sq(j2).ok()?))
        .and_then(|v| v.checked_sub(sq(j3).ok()?))
        .ok_or(Error::Overflow("quadratic phase"))?;
    if m == 0 {
        return Err(Error::ResonantTriple { k, j1, j2, j3 });
    }
    Ok((m, k - j1))
}

/// One nonresonant interaction of mode `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceEntry<T> {
    pub m: i64,
    pub z: i64,
    pub j1: i64,
    pub j2: i64,
    pub j3: i64,
    /// `|a_k|^2 - |a_j1|^2 + |a_j2|^2 - |a_j3|^2`.
    pub lambda: T,
}

/// How interacting indices are confined to `[-K, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Triples with an index outside `[-K, K]` are dropped.
    Hard,
    /// Every `(m, z)` with `0 < |m| <= m_max` is kept; indices are reduced
    /// modulo `2K + 1`. Translation invariant, used for lattice checks.
    Wrap { m_max: i64 },
}

/// Per-mode interaction lists for a fixed truncation and datum.
///
/// Immutable after construction. Entries of each mode are sorted by `(m, z)`.
#[derive(Debug, Clone)]
pub struct ResonanceTable<T> {
    k_max: i64,
    truncation: Truncation,
    alpha: ComplexSequence<T>,
    entries: Vec<Vec<ResonanceEntry<T>>>,
}

impl<T: Real> ResonanceTable<T> {
    /// Hard-truncated table on `[-k_max, k_max]`.
    pub fn build(k_max: i64, alpha: &ComplexSequence<T>) -> Result<Self> {
        if k_max < 0 {
            return Err(Error::InvalidConfig(format!(
                "truncation K must be >= 0, got {k_max}"
            )));
        }
        let alpha = alpha.truncated(k_max)?;
        let moduli: Vec<T> = alpha.values().iter().map(|a| a.norm_sqr()).collect();
        let idx = |j: i64| (j + k_max) as usize;
        let entries = (-k_max..=k_max)
            .into_par_iter()
            .map(|k| -> Result<Vec<ResonanceEntry<T>>> {
                let mut list = Vec::new();
                for z in (k - k_max)..=(k + k_max) {
                    if z == 0 {
                        continue;
                    }
                    let j1 = k - z;
                    for gap in (j1 - k_max)..=(j1 + k_max) {
                        if gap == 0 {
                            continue;
                        }
                        let m = 2 * z * gap;
                        let (j1, j2, j3) = index_to_triple(k, m, z)?;
                        if j3.abs() > k_max || j2.abs() > k_max {
                            continue;
                        }
                        let lambda =
                            moduli[idx(k)] - moduli[idx(j1)] + moduli[idx(j2)] - moduli[idx(j3)];
                        list.push(ResonanceEntry {
                            m,
                            z,
                            j1,
                            j2,
                            j3,
                            lambda,
                        });
                    }
                }
                list.sort_by_key(|e| (e.m, e.z));
                Ok(list)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            k_max,
            truncation: Truncation::Hard,
            alpha,
            entries,
        })
    }

    /// Wrap-mode table: all `(m, z)` with `0 < |m| <= m_max`, indices mod `2K+1`.
    pub fn build_wrapped(k_max: i64, alpha: &ComplexSequence<T>, m_max: i64) -> Result<Self> {
        if k_max < 0 || m_max < 2 {
            return Err(Error::InvalidConfig(format!(
                "wrapped table needs K >= 0 and m_max >= 2, got K = {k_max}, m_max = {m_max}"
            )));
        }
        let alpha = alpha.truncated(k_max)?;
        let n = 2 * k_max + 1;
        let wrap = |j: i64| (j + k_max).rem_euclid(n) - k_max;
        let moduli: Vec<T> = alpha.values().iter().map(|a| a.norm_sqr()).collect();
        let idx = |j: i64| (j + k_max) as usize;
        let mut pairs = Vec::new();
        for m in (-m_max..=m_max).filter(|m| *m != 0 && m % 2 == 0) {
            for z in divisor_set(m)? {
                pairs.push((m, z));
            }
        }
        let entries = (-k_max..=k_max)
            .into_par_iter()
            .map(|k| -> Result<Vec<ResonanceEntry<T>>> {
                pairs
                    .iter()
                    .map(|&(m, z)| {
                        let (j1, j2, j3) = index_to_triple(k, m, z)?;
                        let (j1, j2, j3) = (wrap(j1), wrap(j2), wrap(j3));
                        let lambda =
                            moduli[idx(k)] - moduli[idx(j1)] + moduli[idx(j2)] - moduli[idx(j3)];
                        Ok(ResonanceEntry {
                            m,
                            z,
                            j1,
                            j2,
                            j3,
                            lambda,
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            k_max,
            truncation: Truncation::Wrap { m_max },
            alpha,
            entries,
        })
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Number of modes `2K + 1`.
    pub fn modes(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    /// Datum densely stored on `[-K, K]`.
    pub fn alpha(&self) -> &ComplexSequence<T> {
        &self.alpha
    }

    pub fn alpha_values(&self) -> &[Complex<T>] {
        self.alpha.values()
    }

    /// Entries of mode `k`.
    pub fn entries(&self, k: i64) -> &[ResonanceEntry<T>] {
        &self.entries[(k + self.k_max) as usize]
    }

    /// Entries grouped per mode, index `k + K`.
    pub fn all_entries(&self) -> &[Vec<ResonanceEntry<T>>] {
        &self.entries
    }

    pub fn total_entries(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// Largest `|m|` present in the table (0 if empty).
    pub fn max_frequency(&self) -> i64 {
        self.entries
            .iter()
            .flat_map(|l| l.iter().map(|e| e.m.abs()))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_divisor_set(m: i64) -> Vec<i64> {
        (-m.abs()..=m.abs())
            .filter(|&z| z != 0 && m % (2 * z) == 0)
            .collect()
    }

    #[test]
    fn divisor_set_examples() {
        assert_eq!(divisor_set(3).unwrap(), Vec::<i64>::new());
        assert_eq!(divisor_set(4).unwrap(), brute_divisor_set(4));
        assert_eq!(divisor_set(4).unwrap(), vec![-2, -1, 1, 2]);
        assert_eq!(divisor_set(12).unwrap(), brute_divisor_set(12));
        assert_eq!(divisor_set(12).unwrap(), vec![-6, -3, -2, -1, 1, 2, 3, 6]);
        assert_eq!(divisor_set(0), Err(Error::ZeroFrequency));
    }

    #[test]
    fn divisor_count_examples() {
        assert_eq!(divisor_count(2).unwrap(), 2);
        assert_eq!(divisor_count(-12).unwrap(), 8);
        assert_eq!(divisor_count(7).unwrap(), 0);
        assert_eq!(divisor_count(0), Err(Error::ZeroFrequency));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieve = DivisorCounts::new(500);
        for n in 1..=500u64 {
            assert_eq!(sieve.d(n as usize) as u64, positive_divisor_count(n));
        }
        for m in (-1000i64..=1000).filter(|m| *m != 0) {
            assert_eq!(sieve.r(m) as u64, divisor_count(m).unwrap());
        }
    }

    #[test]
    fn bijection_examples() {
        assert_eq!(index_to_triple(0, 2, -1).unwrap(), (1, 2, 1));
        assert_eq!(index_to_triple(1, 4, 1).unwrap(), (0, -2, -1));
        assert_eq!(triple_to_index(1, 0, -2, -1).unwrap(), (4, 1));
        assert!(matches!(
            triple_to_index(0, 0, 0, 0),
            Err(Error::ResonantTriple { .. })
        ));
        assert!(matches!(
            triple_to_index(5, 1, 2, 3),
            Err(Error::MomentumMismatch { .. })
        ));
        assert_eq!(
            index_to_triple(0, 6, 2),
            Err(Error::InvalidPair { m: 6, z: 2 })
        );
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            triple_to_index(i64::MAX, i64::MAX, 0, 0),
            Err(Error::Overflow(_))
        ));
        assert!(matches!(
            index_to_triple(i64::MIN, 2, 1),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn stats_examples() {
        let s = divisor_stats(4).unwrap();
        assert_eq!((s.max, s.argmax), (4, 4));
        let s = divisor_stats(2).unwrap();
        assert_eq!((s.max, s.argmax), (2, 2));
        assert!(divisor_stats(1).is_err());
        let mut prev = 0;
        for m_max in 2..200 {
            let s = divisor_stats(m_max).unwrap();
            assert!(s.max >= prev);
            prev = s.max;
        }
    }

    #[test]
    fn small_tables() {
        let alpha = ComplexSequence::<f64>::from_fn(1, |k| Complex::new(0.1 * k as f64, 0.2));
        let t = ResonanceTable::build(1, &alpha).unwrap();
        let e = t
            .entries(0)
            .iter()
            .find(|e| e.m == -2 && e.z == 1)
            .expect("(m=-2, z=1) present for k = 0");
        assert_eq!((e.j1, e.j2, e.j3), (-1, 0, 1));

        let t0 =
            ResonanceTable::build(0, &ComplexSequence::delta(0, Complex::new(1.0, 0.0))).unwrap();
        assert_eq!(t0.modes(), 1);
        assert_eq!(t0.total_entries(), 0);

        let flat = ResonanceTable::build(4, &ComplexSequence::constant(4, Complex::new(0.3, 0.4)))
            .unwrap();
        assert!(flat.all_entries().iter().flatten().all(|e| e.lambda == 0.0));

        let wide = ComplexSequence::delta(3, Complex::new(1.0, 0.0));
        assert!(matches!(
            ResonanceTable::build(2, &wide),
            Err(Error::SupportExceedsTruncation { .. })
        ));
    }

    #[test]
    fn entries_sorted_and_even() {
        let alpha =
            ComplexSequence::<f64>::from_fn(5, |k| Complex::new(1.0 / (1 + k * k) as f64, 0.0));
        let t = ResonanceTable::build(5, &alpha).unwrap();
        for list in t.all_entries() {
            assert!(list.windows(2).all(|w| (w[0].m, w[0].z) < (w[1].m, w[1].z)));
            assert!(list.iter().all(|e| e.m != 0 && e.m % 2 == 0));
        }
    }

    #[test]
    fn wrapped_table_is_translation_invariant() {
        let alpha = ComplexSequence::<f64>::constant(2, Complex::new(0.5, 0.0));
        let t = ResonanceTable::build_wrapped(2, &alpha, 24).unwrap();
        let total: u64 = (-24i64..=24)
            .filter(|m| *m != 0)
            .map(|m| divisor_count(m).unwrap())
            .sum();
        for k in -2..=2 {
            assert_eq!(t.entries(k).len() as u64, total);
            let ms: Vec<i64> = t.entries(k).iter().map(|e| e.m).collect();
            let ms0: Vec<i64> = t.entries(0).iter().map(|e| e.m).collect();
            assert_eq!(ms, ms0);
        }
    }

    proptest! {
        #[test]
        fn round_trip(k in -50i64..=50, half in 1i64..=100, neg in any::<bool>(), pick in 0usize..64) {
            let m = if neg { -2 * half } else { 2 * half };
            let zs = divisor_set(m).unwrap();
            let z = zs[pick % zs.len()];
            let (j1, j2, j3) = index_to_triple(k, m, z).unwrap();
            prop_assert_eq!(triple_to_index(k, j1, j2, j3).unwrap(), (m, z));
            prop_assert_eq!(m, 2 * (k - j1) * (j1 - j2));
        }

        #[test]
        fn divisor_symmetry(m in -5000i64..5000) {
            prop_assume!(m != 0);
            let a = divisor_set(m).unwrap();
            let mut b: Vec<i64> = divisor_set(-m).unwrap().into_iter().map(|z| -z).collect();
            b.sort();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(divisor_count(m).unwrap(), divisor_count(-m).unwrap());
            prop_assert_eq!(a.len() as u64, divisor_count(m).unwrap());
        }
    }
}
