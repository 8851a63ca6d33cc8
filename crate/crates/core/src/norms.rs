//! Windowed Fourier–Lebesgue norms on `I_nu = [pi nu, pi(nu+2)]`.
//!
//! A window function is sampled on the extended interval
//! `I_nu^e = [pi(nu-1), pi(nu+3)]`, treated as one period of a `4 pi`-periodic
//! function, so its frequencies are the half integers.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fixedpoint::{self, Component, Cutoff, GridFunctionSequence, QuadSpec};
use crate::resonance::ResonanceTable;
use crate::scalar::{cis, Real};

/// Default number of samples per extended window.
pub const DEFAULT_WINDOW_SAMPLES: usize = 256;

/// Window `nu` with an `n`-point periodic grid on `I_nu^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub nu: i64,
    pub n: usize,
}

impl WindowSpec {
    pub fn new(nu: i64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < DEFAULT_WINDOW_SAMPLES {
            return Err(Error::NotPowerOfTwo { n });
        }
        Ok(Self { nu, n })
    }

    /// `I_nu`.
    pub fn interval<T: Real>(&self) -> (T, T) {
        let pi = T::PI();
        (pi * T::from_int(self.nu), pi * T::from_int(self.nu + 2))
    }

    /// `I_nu^e`.
    pub fn extended<T: Real>(&self) -> (T, T) {
        let pi = T::PI();
        (pi * T::from_int(self.nu - 1), pi * T::from_int(self.nu + 3))
    }

    /// Grid `pi(nu-1) + 4 pi j/n`, `j = 0..n`.
    pub fn grid<T: Real>(&self) -> Vec<T> {
        let (a, _) = self.extended::<T>();
        let h = T::lit(4.0) * T::PI() / T::from_usize(self.n).unwrap();
        (0..self.n)
            .map(|j| a + h * T::from_usize(j).unwrap())
            .collect()
    }

    /// Grid indices covering `I_nu`, both ends included.
    pub fn interior_range(&self) -> std::ops::RangeInclusive<usize> {
        self.n / 4..=3 * self.n / 4
    }

    /// `psi^e_nu = eta_{nu-1} - eta_{nu+2}` on the grid.
    pub fn cutoff<T: Real>(&self) -> Vec<T> {
        let lo = Cutoff::new(self.nu - 1);
        let hi = Cutoff::new(self.nu + 2);
        self.grid::<T>()
            .into_iter()
            .map(|t| lo.eval(t) - hi.eval(t))
            .collect()
    }
}

/// Fourier coefficients on half-integer frequencies `k = q/2`,
/// `q = -n/2 .. n/2 - 1`, stored in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfIntegerSpectrum<T> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> HalfIntegerSpectrum<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Frequency of entry `i`.
    pub fn frequency(&self, i: usize) -> T {
        T::from_int(i as i64 - (self.coeffs.len() / 2) as i64) * T::lit(0.5)
    }

    /// Coefficient at frequency `q/2`, zero outside the grid band.
    pub fn at_half(&self, q: i64) -> Complex<T> {
        let i = q + (self.coeffs.len() / 2) as i64;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn energy(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `f_k = (1/n) sum_j f(t_j) e^{-i k t_j}` with absolute times `t_j` of the
/// window grid, so that `e^{i t/2}` has the single coefficient 1 at `k = 1/2`.
pub fn window_spectrum<T: Real>(
    samples: &[Complex<T>],
    window: &WindowSpec,
) -> Result<HalfIntegerSpectrum<T>> {
    let n = samples.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { n });
    }
    if n != window.n {
        return Err(Error::ShapeMismatch {
            expected: window.n,
            got: n,
        });
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = T::from_usize(n).unwrap().recip();
    let (t0, _) = window.extended::<T>();
    let half = (n / 2) as i64;
    let coeffs = (-half..half)
        .map(|q| {
            let k = T::from_int(q) * T::lit(0.5);
            buf[q.rem_euclid(n as i64) as usize] * inv * cis(-k * t0)
        })
        .collect();
    Ok(HalfIntegerSpectrum { coeffs })
}

fn check_sp<T: Real>(s: T, p: T) -> Result<()> {
    if !(s >= T::zero()) || !(p > T::one()) || !p.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "need s >= 0 and 1 < p < inf, got s = {s}, p = {p}"
        )));
    }
    Ok(())
}

/// `(sum_k <k>^{sp} |f_k|^p)^{1/p}`, `<k> = (1 + k^2)^{1/2}`.
pub fn tilde_hsp_norm<T: Real>(spec: &HalfIntegerSpectrum<T>, s: T, p: T) -> Result<T> {
    check_sp(s, p)?;
    let sum: T = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = spec.frequency(i);
            (T::one() + k * k).powf(s * p * T::lit(0.5)) * c.norm().powf(p)
        })
        .sum();
    Ok(sum.powf(p.recip()))
}

/// Samples of one function on one window: the `n/2 + 1` points of `I_nu`,
/// plus the full `I_nu^e` grid when the function is known there.
#[derive(Debug, Clone)]
pub struct WindowSamples<T> {
    pub window: WindowSpec,
    pub interior: Vec<Complex<T>>,
    pub extended: Option<Vec<Complex<T>>>,
}

impl<T: Real> WindowSamples<T> {
    /// Samples `f` on the whole extended grid.
    pub fn from_fn(window: WindowSpec, mut f: impl FnMut(T) -> Complex<T>) -> Self {
        let ext: Vec<Complex<T>> = window.grid::<T>().into_iter().map(&mut f).collect();
        let interior = ext[window.interior_range()].to_vec();
        Self {
            window,
            interior,
            extended: Some(ext),
        }
    }

    /// Samples on `I_nu` only.
    pub fn interior_only(window: WindowSpec, interior: Vec<Complex<T>>) -> Result<Self> {
        let want = window.n / 2 + 1;
        if interior.len() != want {
            return Err(Error::ShapeMismatch {
                expected: want,
                got: interior.len(),
            });
        }
        Ok(Self {
            window,
            interior,
            extended: None,
        })
    }
}

/// Candidate extensions of `I_nu` data to `I_nu^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// `psi^e_nu` times the even reflection across both ends of `I_nu`.
    Reflection,
    /// `psi^e_nu` times the fill `f(t + 2 pi)` left and `f(t - 2 pi)` right.
    ShiftCut,
    /// The `2 pi`-shift fill without cutoff.
    Shift,
    /// `psi^e_nu` times the known data on `I_nu^e`.
    Known,
}

/// Builds one candidate extension on the extended grid.
pub fn extend<T: Real>(samples: &WindowSamples<T>, kind: Extension) -> Option<Vec<Complex<T>>> {
    let w = &samples.window;
    let n = w.n;
    let q = n / 4;
    let f = &samples.interior;
    // interior[i] sits at grid index q + i, i = 0..=2q.
    let raw: Vec<Complex<T>> = match kind {
        Extension::Known => samples.extended.clone()?,
        Extension::Reflection => (0..n)
            .map(|j| {
                if j < q {
                    f[q - j]
                } else if j > 3 * q {
                    f[2 * q - (j - 3 * q)]
                } else {
                    f[j - q]
                }
            })
            .collect(),
        Extension::ShiftCut | Extension::Shift => (0..n)
            .map(|j| {
                if j < q {
                    f[j + q]
                } else if j > 3 * q {
                    f[j - 3 * q]
                } else {
                    f[j - q]
                }
            })
            .collect(),
    };
    if kind == Extension::Shift {
        return Some(raw);
    }
    let cut = w.cutoff::<T>();
    Some(raw.into_iter().zip(cut).map(|(v, c)| v * c).collect())
}

/// Upper bound on the extension-infimum norm of `H^s_p(I_nu)`: the smallest
/// `tilde_hsp_norm` over the canonical extensions.
pub fn hsp_norm_estimate<T: Real>(samples: &WindowSamples<T>, s: T, p: T) -> Result<T> {
    Ok(hsp_norm_candidates(samples, s, p)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(T::infinity(), T::min))
}

/// Every candidate extension with its norm.
pub fn hsp_norm_candidates<T: Real>(
    samples: &WindowSamples<T>,
    s: T,
    p: T,
) -> Result<Vec<(Extension, T)>> {
    check_sp(s, p)?;
    if samples.interior.iter().all(|v| v.norm_sqr() == T::zero()) {
        return Ok(vec![(Extension::Shift, T::zero())]);
    }
    let mut out = Vec::with_capacity(4);
    for kind in [
        Extension::Reflection,
        Extension::ShiftCut,
        Extension::Shift,
        Extension::Known,
    ] {
        if let Some(ext) = extend(samples, kind) {
            let spec = window_spectrum(&ext, &samples.window)?;
            out.push((kind, tilde_hsp_norm(&spec, s, p)?));
        }
    }
    Ok(out)
}

/// `sup_nu (nu + 1) (sum_k est(R_k, I_nu)^p)^{1/p}`; `windows[nu][k]`.
pub fn xsp_norm<T: Real>(windows: &[Vec<WindowSamples<T>>], s: T, p: T) -> Result<T> {
    let mut sup = T::zero();
    for per_mode in windows {
        let Some(first) = per_mode.first() else {
            continue;
        };
        let mut acc = T::zero();
        for w in per_mode {
            acc += hsp_norm_estimate(w, s, p)?.powf(p);
        }
        let v = T::from_int(first.window.nu + 1) * acc.powf(p.recip());
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `(nu, (nu+1) (sum_k est^p)^{1/p})` rows with the fitted log-log slope of
/// the scaled values.
#[derive(Debug, Clone)]
pub struct DecayProfile<T> {
    pub rows: Vec<(i64, T)>,
    pub slope: T,
}

impl<T: Real> DecayProfile<T> {
    /// Ratio of the largest to the smallest scaled value.
    pub fn spread(&self) -> T {
        let max = self.rows.iter().map(|r| r.1).fold(T::zero(), T::max);
        let min = self.rows.iter().map(|r| r.1).fold(T::infinity(), T::min);
        max / min
    }
}

/// Window profile of one component of the fixed-point map applied to `r`.
#[allow(clippy::too_many_arguments)]
pub fn decay_profile<T: Real>(
    component: Component,
    table: &ResonanceTable<T>,
    r: &GridFunctionSequence<T>,
    n_cut: i64,
    quad: &QuadSpec<T>,
    s: T,
    p: T,
    nu_range: std::ops::RangeInclusive<i64>,
) -> Result<DecayProfile<T>> {
    let parts = fixedpoint::apply_t_split(r, table, n_cut, quad)?;
    let g = match component {
        Component::T0 => &parts.t0,
        Component::T1 => &parts.t1,
        Component::T2 => &parts.t2,
    };
    let windows = fixedpoint::window_samples(g, nu_range.clone(), quad.window_samples)?;
    let mut rows = Vec::new();
    for per_mode in &windows {
        let nu = per_mode[0].window.nu;
        let mut acc = T::zero();
        for w in per_mode {
            acc += hsp_norm_estimate(w, s, p)?.powf(p);
        }
        rows.push((nu, T::from_int(nu + 1) * acc.powf(p.recip())));
    }
    let fit: Vec<&(i64, T)> = rows.iter().filter(|r| r.1 > T::zero()).collect();
    let slope = if fit.len() >= 2 {
        let x: Vec<T> = fit.iter().map(|r| T::from_int(r.0 + 1)).collect();
        let y: Vec<T> = fit.iter().map(|r| r.1).collect();
        crate::explicit::loglog_slope(&x, &y)
    } else {
        T::zero()
    };
    Ok(DecayProfile { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn constant_and_half_mode_spectra() {
        let w = WindowSpec::new(3, 256).unwrap();
        let spec = window_spectrum(&vec![c(0.7, -0.1); 256], &w).unwrap();
        for (i, v) in spec.coeffs.iter().enumerate() {
            let expect = if spec.frequency(i) == 0.0 {
                c(0.7, -0.1)
            } else {
                c(0.0, 0.0)
            };
            assert!((v - expect).norm() < 1e-15);
        }
        let samples = WindowSamples::from_fn(w, |t| Complex::from_polar(1.0, t / 2.0));
        let spec = window_spectrum(samples.extended.as_ref().unwrap(), &w).unwrap();
        assert!((spec.at_half(1) - c(1.0, 0.0)).norm() < 1e-13);
        assert!(spec.energy() - 1.0 < 1e-13);
        let norm = tilde_hsp_norm(&spec, 1.0, 2.0).unwrap();
        assert!((norm - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_linear_and_parseval() {
        let w = WindowSpec::new(0, 512).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f: Vec<Complex<f64>> = (0..512).map(|_| c(rng.gen(), rng.gen())).collect();
        let g: Vec<Complex<f64>> = (0..512).map(|_| c(rng.gen(), rng.gen())).collect();
        let lam = c(0.3, -1.2);
        let sum: Vec<Complex<f64>> = f.iter().zip(&g).map(|(a, b)| a + lam * b).collect();
        let (sf, sg, ss) = (
            window_spectrum(&f, &w).unwrap(),
            window_spectrum(&g, &w).unwrap(),
            window_spectrum(&sum, &w).unwrap(),
        );
        for i in 0..512 {
            assert!((ss.coeffs[i] - sf.coeffs[i] - lam * sg.coeffs[i]).norm() < 1e-14);
        }
        let mean: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / 512.0;
        assert!((sf.energy() - mean).abs() < 1e-12 * mean);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            WindowSpec::new(0, 300),
            Err(Error::NotPowerOfTwo { n: 300 })
        ));
        let w = WindowSpec::new(0, 256).unwrap();
        assert!(window_spectrum(&vec![c(0.0, 0.0); 100], &w).is_err());
    }

    #[test]
    fn tilde_norm_examples() {
        let w = WindowSpec::new(1, 256).unwrap();
        let cst = window_spectrum(&vec![c(-2.0, 0.0); 256], &w).unwrap();
        for (s, p) in [(0.0, 2.0), (0.75, 3.0)] {
            assert!((tilde_hsp_norm(&cst, s, p).unwrap() - 2.0).abs() < 1e-13);
        }
        let f = WindowSamples::from_fn(w, |t: f64| c(t.sin(), t.cos() * 0.3));
        let spec = window_spectrum(f.extended.as_ref().unwrap(), &w).unwrap();
        let scaled = HalfIntegerSpectrum {
            coeffs: spec.coeffs.iter().map(|v| v * c(0.0, -3.0)).collect(),
        };
        let (a, b) = (
            tilde_hsp_norm(&spec, 0.75, 2.0).unwrap(),
            tilde_hsp_norm(&scaled, 0.75, 2.0).unwrap(),
        );
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_one_on_the_window() {
        let w = WindowSpec::new(5, 256).unwrap();
        let cut = w.cutoff::<f64>();
        for i in w.interior_range() {
            assert!((cut[i] - 1.0).abs() < 1e-15);
        }
        assert_eq!(cut[0], 0.0);
        assert!(cut.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn estimate_examples() {
        let w = WindowSpec::new(2, 256).unwrap();
        let zero = WindowSamples::interior_only(w, vec![c(0.0, 0.0); 129]).unwrap();
        assert_eq!(hsp_norm_estimate(&zero, 0.75, 2.0).unwrap(), 0.0);
        let cst = WindowSamples::interior_only(w, vec![c(0.4, 0.0); 129]).unwrap();
        let cut: Vec<Complex<f64>> = w.cutoff::<f64>().into_iter().map(|v| c(v, 0.0)).collect();
        let psi = tilde_hsp_norm(&window_spectrum(&cut, &w).unwrap(), 0.75, 2.0).unwrap();
        assert!(hsp_norm_estimate(&cst, 0.75, 2.0).unwrap() <= psi * 0.4 + 1e-15);
        // A 2 pi-periodic smooth function is its own best extension.
        let f = WindowSamples::from_fn(w, |t: f64| c((2.0 * t).cos(), 0.5 * t.sin()));
        let direct = tilde_hsp_norm(
            &window_spectrum(f.extended.as_ref().unwrap(), &w).unwrap(),
            0.75,
            2.0,
        )
        .unwrap();
        let interior = WindowSamples::interior_only(w, f.interior.clone()).unwrap();
        let all = hsp_norm_candidates(&interior, 0.75, 2.0).unwrap();
        let shift = all.iter().find(|(k, _)| *k == Extension::Shift).unwrap().1;
        assert!((shift - direct).abs() < 1e-12);
        assert!(hsp_norm_estimate(&interior, 0.75, 2.0).unwrap() <= direct + 1e-15);
    }

    #[test]
    fn estimate_never_exceeds_any_candidate() {
        let w = WindowSpec::new(4, 256).unwrap();
        let f = WindowSamples::from_fn(w, |t: f64| c((0.37 * t).sin(), 1.0 / (1.0 + t)));
        let all = hsp_norm_candidates(&f, 0.75, 2.0).unwrap();
        assert_eq!(all.len(), 4);
        let est = hsp_norm_estimate(&f, 0.75, 2.0).unwrap();
        assert!(all.iter().all(|(_, v)| est <= *v));
    }

    #[test]
    fn xsp_examples() {
        assert_eq!(xsp_norm::<f64>(&[], 0.75, 2.0).unwrap(), 0.0);
        let mk = |nu: i64, amp: f64| {
            WindowSamples::from_fn(WindowSpec::new(nu, 256).unwrap(), |_| c(amp, 0.0))
        };
        let one = vec![vec![mk(0, 0.0)], vec![mk(1, 0.0)], vec![mk(2, 0.5)]];
        let est = hsp_norm_estimate(&one[2][0], 0.75, 2.0).unwrap();
        assert!((xsp_norm(&one, 0.75, 2.0).unwrap() - 3.0 * est).abs() < 1e-14);
        let more: Vec<Vec<WindowSamples<f64>>> = (0..5)
            .map(|nu| vec![mk(nu, 1.0 / (1.0 + nu as f64))])
            .collect();
        let mut last = 0.0;
        for n in 1..=5 {
            let v = xsp_norm(&more[..n], 0.75, 2.0).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
