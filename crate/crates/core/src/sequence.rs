//! Finitely supported doubly indexed complex sequences.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A complex sequence `(a_k)` stored contiguously from index `offset`.
///
/// Entries outside the stored range are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence<T> {
    offset: i64,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexSequence<T> {
    pub fn new(offset: i64, values: Vec<Complex<T>>) -> Self {
        Self { offset, values }
    }

    /// All-zero sequence on `[-k_max, k_max]`.
    pub fn zeros(k_max: i64) -> Self {
        Self::new(
            -k_max,
            vec![Complex::new(T::zero(), T::zero()); (2 * k_max + 1) as usize],
        )
    }

    /// Single Dirac delta: `a_k = amplitude` at one index, zero elsewhere.
    pub fn delta(k: i64, amplitude: Complex<T>) -> Self {
        Self::new(k, vec![amplitude])
    }

    /// Constant sequence on `[-k_max, k_max]`.
    pub fn constant(k_max: i64, value: Complex<T>) -> Self {
        Self::new(-k_max, vec![value; (2 * k_max + 1) as usize])
    }

    /// Dense sequence on `[-k_max, k_max]` built from a function of the index.
    pub fn from_fn(k_max: i64, mut f: impl FnMut(i64) -> Complex<T>) -> Self {
        Self::new(-k_max, (-k_max..=k_max).map(&mut f).collect())
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last stored entry.
    pub fn last_index(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    /// `a_k`, zero outside the stored range.
    pub fn get(&self, k: i64) -> Complex<T> {
        let i = k - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            Complex::new(T::zero(), T::zero())
        } else {
            self.values[i as usize]
        }
    }

    /// Smallest and largest indices carrying a nonzero value, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|v| v.norm_sqr() > T::zero())?;
        let last = self.values.iter().rposition(|v| v.norm_sqr() > T::zero())?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// Whether the nonzero support lies inside `[-k_max, k_max]`.
    pub fn fits(&self, k_max: i64) -> bool {
        match self.support() {
            None => true,
            Some((lo, hi)) => lo >= -k_max && hi <= k_max,
        }
    }

    /// Dense copy on `[-k_max, k_max]`; fails when nonzero support falls outside.
    pub fn truncated(&self, k_max: i64) -> Result<Self> {
        if let Some((lo, hi)) = self.support() {
            if lo < -k_max || hi > k_max {
                return Err(Error::SupportExceedsTruncation { lo, hi, k_max });
            }
        }
        Ok(Self::from_fn(k_max, |k| self.get(k)))
    }

    /// l² mass `sum |a_k|^2`.
    pub fn mass(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// l^p norm for `p >= 1`; `p = inf` gives the sup norm.
    pub fn lp_norm(&self, p: T) -> T {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        }
        let s: T = self.values.iter().map(|v| v.norm().powf(p)).sum();
        s.powf(p.recip())
    }

    /// Pointwise scaling by a complex factor.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self::new(
            self.offset,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Largest `|a_k - b_k|` over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let lo = self.offset.min(other.offset);
        let hi = self.last_index().max(other.last_index());
        (lo..=hi)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(T::zero(), T::max)
    }
}

/// `sum |a_k|^2` over a dense slice.
pub fn mass_of<T: Real>(values: &[Complex<T>]) -> T {
    values.iter().map(|v| v.norm_sqr()).sum()
}
