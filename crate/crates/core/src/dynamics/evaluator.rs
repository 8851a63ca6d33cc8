//! Evaluation of the nonresonant cubic sums
//! `S_k(tau, L) = sum_{NR_k} e^{-i m tau} e^{i Lambda L} y_j1 conj(y_j2) y_j3`.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::resonance::{ResonanceTable, Truncation};
use crate::scalar::{cis, Real};

/// Strategy for the cubic sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsMethod {
    /// Table for small or wrapped truncations, spectral otherwise.
    #[default]
    Auto,
    /// Direct summation over the precomputed interaction table.
    Table,
    /// Pseudo-spectral convolution after factoring the phases per mode.
    /// Only valid for hard truncation.
    Spectral,
}

/// Above this radius `Auto` switches from the table to the spectral path.
pub const AUTO_TABLE_MAX_K: i64 = 12;

const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy)]
struct Packed {
    phase: u32,
    j1: u32,
    j2: u32,
    j3: u32,
}

struct TablePath {
    freqs: Vec<i64>,
    entries: Vec<Vec<Packed>>,
    total: usize,
}

struct SpectralPath<T: Real> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

/// Reusable evaluator for one table. Holds scratch buffers, so it is not shared
/// across threads; clone per thread instead.
pub struct CubicSum<T: Real> {
    k_max: i64,
    method: RhsMethod,
    moduli: Vec<T>,
    table: Option<Arc<TablePath>>,
    spectral: Option<Arc<SpectralPath<T>>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    coef: Vec<Complex<T>>,
    phases: Vec<Complex<T>>,
}

impl<T: Real> Clone for CubicSum<T> {
    fn clone(&self) -> Self {
        Self {
            k_max: self.k_max,
            method: self.method,
            moduli: self.moduli.clone(),
            table: self.table.clone(),
            spectral: self.spectral.clone(),
            buf: self.buf.clone(),
            scratch: self.scratch.clone(),
            coef: self.coef.clone(),
            phases: self.phases.clone(),
        }
    }
}

/// Smallest power of two that is at least `4K + 1`: enough to make the
/// cubic convolution of modes in `[-K, K]` alias-free on `[-K, K]`.
pub fn dealiased_len(k_max: i64) -> usize {
    ((4 * k_max + 1) as usize).next_power_of_two().max(4)
}

fn plan<T: Real>(len: usize) -> SpectralPath<T> {
    let mut planner = FftPlanner::new();
    SpectralPath {
        len,
        forward: planner.plan_fft_forward(len),
        inverse: planner.plan_fft_inverse(len),
    }
}

impl<T: Real> CubicSum<T> {
    pub fn new(table: &ResonanceTable<T>, method: RhsMethod) -> Result<Self> {
        let k_max = table.k_max();
        let method = match (method, table.truncation()) {
            (RhsMethod::Spectral, Truncation::Wrap { .. }) => {
                return Err(Error::InvalidConfig(
                    "spectral evaluation requires hard truncation".into(),
                ))
            }
            (RhsMethod::Auto, Truncation::Wrap { .. }) => RhsMethod::Table,
            (RhsMethod::Auto, Truncation::Hard) if k_max <= AUTO_TABLE_MAX_K => RhsMethod::Table,
            (RhsMethod::Auto, Truncation::Hard) => RhsMethod::Spectral,
            (m, _) => m,
        };
        let moduli = table.alpha_values().iter().map(|a| a.norm_sqr()).collect();
        let zero = Complex::new(T::zero(), T::zero());
        let modes = table.modes();
        let mut out = Self {
            k_max,
            method,
            moduli,
            table: None,
            spectral: None,
            buf: Vec::new(),
            scratch: Vec::new(),
            coef: vec![zero; modes],
            phases: Vec::new(),
        };
        match method {
            RhsMethod::Table => {
                let mut freqs: Vec<i64> =
                    table.all_entries().iter().flatten().map(|e| e.m).collect();
                freqs.sort_unstable();
                freqs.dedup();
                let off = k_max;
                let entries = table
                    .all_entries()
                    .iter()
                    .map(|list| {
                        list.iter()
                            .map(|e| Packed {
                                phase: freqs.binary_search(&e.m).unwrap() as u32,
                                j1: (e.j1 + off) as u32,
                                j2: (e.j2 + off) as u32,
                                j3: (e.j3 + off) as u32,
                            })
                            .collect()
                    })
                    .collect();
                out.phases = vec![zero; freqs.len()];
                out.table = Some(Arc::new(TablePath {
                    total: table.total_entries(),
                    freqs,
                    entries,
                }));
            }
            RhsMethod::Spectral => {
                let sp = plan::<T>(dealiased_len(k_max));
                out.buf = vec![zero; sp.len];
                out.scratch = vec![
                    zero;
                    sp.forward
                        .get_inplace_scratch_len()
                        .max(sp.inverse.get_inplace_scratch_len())
                ];
                out.spectral = Some(Arc::new(sp));
            }
            RhsMethod::Auto => unreachable!(),
        }
        Ok(out)
    }

    /// The path chosen after resolving `Auto`.
    pub fn method(&self) -> RhsMethod {
        self.method
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Writes `S_k(tau, L)` for every mode into `out`.
    pub fn eval(&mut self, tau: T, l: T, y: &[Complex<T>], out: &mut [Complex<T>]) -> Result<()> {
        let modes = self.coef.len();
        if y.len() != modes || out.len() != modes {
            return Err(Error::ShapeMismatch {
                expected: modes,
                got: y.len().min(out.len()),
            });
        }
        match self.method {
            RhsMethod::Table => self.eval_table(tau, l, y, out),
            _ => self.eval_spectral(tau, l, y, out),
        }
        Ok(())
    }

    fn eval_table(&mut self, tau: T, l: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let tp = self.table.as_ref().unwrap();
        for (p, &m) in self.phases.iter_mut().zip(&tp.freqs) {
            *p = cis(-T::from_int(m) * tau);
        }
        // Lambda phases factor through the per-mode gauge e^{-i|a_j|^2 L}.
        for ((c, yi), w) in self.coef.iter_mut().zip(y).zip(&self.moduli) {
            *c = yi * cis(-*w * l);
        }
        let coef = &self.coef;
        let phases = &self.phases;
        let moduli = &self.moduli;
        let one_mode = |(i, o): (usize, &mut Complex<T>)| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for e in &tp.entries[i] {
                let g = coef[e.j1 as usize] * coef[e.j2 as usize].conj() * coef[e.j3 as usize];
                acc += phases[e.phase as usize] * g;
            }
            *o = acc * cis(moduli[i] * l);
        };
        if tp.total >= PAR_THRESHOLD {
            out.par_iter_mut().enumerate().for_each(one_mode);
        } else {
            out.iter_mut().enumerate().for_each(one_mode);
        }
    }

    fn eval_spectral(&mut self, tau: T, l: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let sp = self.spectral.as_ref().unwrap();
        let k = self.k_max;
        let n = sp.len;
        let mut power = T::zero();
        for (i, (c, yi)) in self.coef.iter_mut().zip(y).enumerate() {
            let j = i as i64 - k;
            *c = yi * cis(T::from_int(j * j) * tau - self.moduli[i] * l);
            power += c.norm_sqr();
        }
        cubic_convolution(sp, &self.coef, k, &mut self.buf, &mut self.scratch);
        for (i, o) in out.iter_mut().enumerate() {
            let j = i as i64 - k;
            let c = self.coef[i];
            let full = self.buf[(j.rem_euclid(n as i64)) as usize];
            // Remove the resonant triples j1 = k or j2 = j1.
            let resonant = c * (power + power - c.norm_sqr());
            let phi = cis(T::from_int(j * j) * tau - self.moduli[i] * l);
            *o = phi.conj() * (full - resonant);
        }
    }
}

/// Overwrites `buf` with the Fourier coefficients of `|u|^2 u`, where
/// `u = sum_{|j| <= k} c_j e^{ijx}`. Coefficient `q` sits at index `q mod len`.
fn cubic_convolution<T: Real>(
    sp: &SpectralPath<T>,
    c: &[Complex<T>],
    k: i64,
    buf: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
) {
    let n = sp.len as i64;
    for v in buf.iter_mut() {
        *v = Complex::new(T::zero(), T::zero());
    }
    for (i, ci) in c.iter().enumerate() {
        buf[((i as i64 - k).rem_euclid(n)) as usize] = *ci;
    }
    sp.inverse.process_with_scratch(buf, scratch);
    for v in buf.iter_mut() {
        *v *= v.norm_sqr();
    }
    sp.forward.process_with_scratch(buf, scratch);
    let inv = T::from_usize(sp.len).unwrap().recip();
    for v in buf.iter_mut() {
        *v *= inv;
    }
}

/// Galerkin projection `P_K(|v|^2 v)` for `v = sum_{|j| <= K} a_j e^{ijx}`,
/// including the resonant interactions.
pub struct FullCubic<T: Real> {
    k_max: i64,
    sp: SpectralPath<T>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> FullCubic<T> {
    pub fn new(k_max: i64) -> Self {
        let sp = plan::<T>(dealiased_len(k_max));
        let zero = Complex::new(T::zero(), T::zero());
        let scratch = vec![
            zero;
            sp.forward
                .get_inplace_scratch_len()
                .max(sp.inverse.get_inplace_scratch_len())
        ];
        Self {
            k_max,
            buf: vec![zero; sp.len],
            sp,
            scratch,
        }
    }

    pub fn eval(&mut self, a: &[Complex<T>], out: &mut [Complex<T>]) {
        cubic_convolution(&self.sp, a, self.k_max, &mut self.buf, &mut self.scratch);
        let n = self.sp.len as i64;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.buf[((i as i64 - self.k_max).rem_euclid(n)) as usize];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::ComplexSequence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(k: i64, scale: f64, seed: u64) -> ComplexSequence<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexSequence::from_fn(k, |_| {
            Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
        })
    }

    // Literal triple loop over j1, j3 with j2 = j1 + j3 - k.
    fn naive(
        k_max: i64,
        alpha: &ComplexSequence<f64>,
        tau: f64,
        l: f64,
        y: &[Complex<f64>],
    ) -> Vec<Complex<f64>> {
        let at = |j: i64| y[(j + k_max) as usize];
        let w = |j: i64| alpha.get(j).norm_sqr();
        (-k_max..=k_max)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for j1 in -k_max..=k_max {
                    for j3 in -k_max..=k_max {
                        let j2 = j1 + j3 - k;
                        if j2.abs() > k_max {
                            continue;
                        }
                        let m = k * k - j1 * j1 + j2 * j2 - j3 * j3;
                        if m == 0 {
                            continue;
                        }
                        let lam = w(k) - w(j1) + w(j2) - w(j3);
                        acc += Complex::from_polar(1.0, -(m as f64) * tau + lam * l)
                            * at(j1)
                            * at(j2).conj()
                            * at(j3);
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn table_and_spectral_match_naive_sum() {
        for k_max in [1, 3, 6, 10] {
            let alpha = random_seq(k_max, 0.3, 7 + k_max as u64);
            let y = random_seq(k_max, 0.4, 99 + k_max as u64);
            let table = ResonanceTable::build(k_max, &alpha).unwrap();
            let (tau, l) = (3.7, -0.41);
            let reference = naive(k_max, &alpha, tau, l, y.values());
            for method in [RhsMethod::Table, RhsMethod::Spectral] {
                let mut ev = CubicSum::new(&table, method).unwrap();
                let mut out = vec![Complex::new(0.0, 0.0); table.modes()];
                ev.eval(tau, l, y.values(), &mut out).unwrap();
                for (a, b) in out.iter().zip(&reference) {
                    assert!(
                        (a - b).norm() < 1e-13,
                        "K = {k_max}, {method:?}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn auto_resolves_by_size_and_truncation() {
        let a = ComplexSequence::<f64>::zeros(2);
        let t = ResonanceTable::build(2, &a).unwrap();
        assert_eq!(
            CubicSum::new(&t, RhsMethod::Auto).unwrap().method(),
            RhsMethod::Table
        );
        let a = ComplexSequence::<f64>::zeros(20);
        let t = ResonanceTable::build(20, &a).unwrap();
        assert_eq!(
            CubicSum::new(&t, RhsMethod::Auto).unwrap().method(),
            RhsMethod::Spectral
        );
        let t = ResonanceTable::build_wrapped(2, &ComplexSequence::<f64>::zeros(2), 8).unwrap();
        assert!(CubicSum::new(&t, RhsMethod::Spectral).is_err());
    }

    #[test]
    fn full_cubic_matches_direct_convolution() {
        let k_max = 4;
        let a = random_seq(k_max, 1.0, 3);
        let mut fc = FullCubic::new(k_max);
        let mut out = vec![Complex::new(0.0, 0.0); a.len()];
        fc.eval(a.values(), &mut out);
        for k in -k_max..=k_max {
            let mut acc = Complex::new(0.0, 0.0);
            for j1 in -k_max..=k_max {
                for j3 in -k_max..=k_max {
                    let j2 = j1 + j3 - k;
                    acc += a.get(j1) * a.get(j2).conj() * a.get(j3);
                }
            }
            assert!((acc - out[(k + k_max) as usize]).norm() < 1e-12);
        }
    }
}
