//! Closed-form solution for constant data `alpha_k = alpha`.
//!
//! Every mode then equals `B(t) = alpha e^{-i|alpha|^2 Phi(t)}` with
//! `Phi(t) = int_t^inf sum_{m != 0} r_m e^{-i m tau}/(8 pi tau) d tau`.
//! One integration by parts splits `Phi` into the boundary series
//! `-(1/4pi) sum_{m>0} r_m sin(mt)/(mt)` and the absolutely convergent remainder
//! `(1/4pi) sum_{m>0} r_m g(mt)`, `g(x) = int_x^inf sin(u)/u^2 du`.

use num_complex::Complex;

use crate::dynamics::dopri::{self, Dopri5Options};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::resonance::DivisorCounts;
use crate::scalar::{cis, Real};

/// Past this argument `int_x^inf e^{iu}/u^2 du` is taken from its asymptotic
/// expansion; below it the integral runs numerically up to this point.
const ASYMPTOTIC_FROM: f64 = 64.0;
/// Rotation recurrences are re-anchored with a direct evaluation this often.
const REANCHOR: usize = 32;

#[derive(Debug, Clone, Copy)]
pub struct PhaseQuadratureConfig<T> {
    /// Largest frequency kept in both series.
    pub m_max: i64,
    /// Upper end of the numerical remainder quadrature, as a multiple of `t`.
    /// Beyond it the remainder uses its asymptotic expansion.
    pub t_max_factor: T,
    /// Defaults to `1e-12`, raised to `100 eps` for scalars too coarse for it.
    pub quad_tol: T,
}

impl<T: Real> Default for PhaseQuadratureConfig<T> {
    fn default() -> Self {
        Self {
            m_max: 4096,
            t_max_factor: T::lit(1e4),
            quad_tol: T::lit(1e-12).max(T::lit(100.0) * T::epsilon()),
        }
    }
}

impl<T: Real> PhaseQuadratureConfig<T> {
    pub fn with_m_max(m_max: i64) -> Self {
        Self {
            m_max,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m_max < 2 {
            return Err(Error::InvalidConfig(format!(
                "m_max must be >= 2, got {}",
                self.m_max
            )));
        }
        if !(self.quad_tol > T::zero()) || !(self.t_max_factor > T::one()) {
            return Err(Error::InvalidConfig(
                "quad_tol must be positive and t_max_factor above 1".into(),
            ));
        }
        Ok(())
    }
}

/// `Phi(t)` with its pieces and error information.
#[derive(Debug, Clone, Copy)]
pub struct PhaseValue<T> {
    pub value: T,
    pub boundary: T,
    pub remainder: T,
    /// Magnitude of the imaginary part left after the paired summation.
    pub imag_residual: T,
    /// Certified bound on the remainder terms with `|m| > m_max`.
    pub tail_bound: T,
    /// Estimated error of the remainder quadrature and asymptotic expansion.
    pub quad_error: T,
}

/// `int_X^inf e^{iu} u^{-2} du` from `I_p = i e^{iX} X^{-p} - i p I_{p+1}`,
/// truncated where the remainder bound `(p-2)! X^{1-p}` is smallest.
fn oscillatory_tail<T: Real>(x: T) -> (Complex<T>, T) {
    let i = Complex::new(T::zero(), T::one());
    let e = cis(x);
    let inv = x.recip();
    let mut coef = Complex::new(T::one(), T::zero());
    let mut pw = inv * inv;
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut bound = T::infinity();
    for p in 2..80usize {
        let next_coef = coef * (-i) * T::from_usize(p).unwrap();
        let next_bound = next_coef.norm() * pw * inv * x / T::from_usize(p).unwrap();
        if next_bound >= bound {
            break;
        }
        acc += coef * i * e * pw;
        coef = next_coef;
        pw *= inv;
        bound = next_bound;
        if bound < T::epsilon() * acc.norm() * T::lit(1e-2) {
            break;
        }
    }
    (acc, bound)
}

/// `int_x^inf e^{iu}/u^2 du` for `x > 0` with an error estimate. The
/// numerical part stops at `min(x_stop, ASYMPTOTIC_FROM)`.
fn e2<T: Real>(x: T, tol: T, x_stop: T) -> (Complex<T>, T) {
    let from = T::lit(ASYMPTOTIC_FROM);
    let switch = if x >= from {
        x
    } else {
        x_stop.min(from).max(x)
    };
    let (tail, bound) = oscillatory_tail(switch);
    if switch == x {
        return (tail, bound);
    }
    let q = integrate_adaptive(|u: T| cis(u) / (u * u), x, switch, tol, 400);
    (q.value + tail, q.error + bound)
}

/// Bound on `sum_{n > N} d(n)/n^2` from `D(x) <= x ln x + (2 gamma - 1) x + 0.961 sqrt(x)`.
fn divisor_tail<T: Real>(n: i64) -> T {
    let nf = T::from_int(n);
    let b = T::lit(2.0 * 0.577_215_664_901_532_9 - 1.0);
    let c = T::lit(0.961);
    T::lit(2.0)
        * ((nf.ln() + T::one() + b) / nf + T::lit(2.0) * c / T::lit(3.0) * nf.powf(T::lit(-1.5)))
}

/// Certified bound on the remainder terms beyond `m_max` at time `t`.
pub fn tail_bound<T: Real>(t: T, m_max: i64) -> T {
    let n = (m_max / 2).max(1);
    let x = T::from_int(2 * n) * t;
    // |g(x)| <= (1 + 4/x)/x^2 by two integrations by parts.
    let g = T::one() + T::lit(4.0) / x;
    g / (T::lit(8.0) * T::PI() * t * t) * divisor_tail(n)
}

/// Evaluates `Phi(t)` truncated to `|m| <= m_max`, divisor counts supplied.
pub fn phase_integral_with<T: Real>(
    t: T,
    cfg: &PhaseQuadratureConfig<T>,
    counts: &DivisorCounts,
) -> Result<PhaseValue<T>> {
    cfg.validate()?;
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n_max = (cfg.m_max / 2) as usize;
    if counts.n_max() < n_max {
        return Err(Error::InvalidConfig(
            "divisor table too small for m_max".into(),
        ));
    }
    let i = Complex::new(T::zero(), T::one());
    let x_stop = t * cfg.t_max_factor;
    // Only terms with m t below the asymptotic switch need quadrature.
    let quadratured = (T::lit(ASYMPTOTIC_FROM) / (T::lit(2.0) * t))
        .ceil()
        .to_usize()
        .unwrap_or(n_max)
        .clamp(1, n_max.max(1));
    let per_term_tol = cfg.quad_tol / T::lit(8.0) / T::from_usize(quadratured).unwrap();
    let mut boundary = Complex::new(T::zero(), T::zero());
    let mut remainder = Complex::new(T::zero(), T::zero());
    let mut quad_error = T::zero();
    for n in 1..=n_max {
        let r = T::from_u32(2 * counts.d(n)).unwrap();
        let m = T::from_usize(2 * n).unwrap();
        let mt = m * t;
        // Paired +m and -m boundary terms e^{-imt}/(imt) + e^{imt}/(-imt).
        let plus = cis(-mt) / (i * mt);
        let minus = cis(mt) / (-i * mt);
        boundary += (plus + minus) * r;
        // Remainder pair i conj(E2(mt)) - i E2(mt), E2 as in `e2`.
        let (v, err) = e2(mt, per_term_tol, m * x_stop);
        remainder += (i * v.conj() - i * v) * r;
        quad_error += err * r;
    }
    let scale = (T::lit(8.0) * T::PI()).recip();
    boundary *= scale;
    remainder *= scale;
    quad_error = quad_error * scale * T::lit(2.0);
    let total = boundary + remainder;
    let out = PhaseValue {
        value: total.re,
        boundary: boundary.re,
        remainder: remainder.re,
        imag_residual: total.im.abs(),
        tail_bound: tail_bound(t, cfg.m_max),
        quad_error,
    };
    if quad_error > cfg.quad_tol {
        return Err(Error::QuadratureNonConvergence {
            bound: quad_error.to_f64().unwrap_or(f64::NAN),
            tol: cfg.quad_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

/// Evaluates `Phi(t)` truncated to `|m| <= m_max`.
pub fn phase_integral<T: Real>(t: T, cfg: &PhaseQuadratureConfig<T>) -> Result<PhaseValue<T>> {
    cfg.validate()?;
    let counts = DivisorCounts::new((cfg.m_max / 2) as usize);
    phase_integral_with(t, cfg, &counts)
}

/// `alpha e^{-i |alpha|^2 Phi(t)}`.
pub fn explicit_b<T: Real>(
    alpha: Complex<T>,
    t: T,
    cfg: &PhaseQuadratureConfig<T>,
) -> Result<Complex<T>> {
    let phi = phase_integral(t, cfg)?;
    Ok(alpha * cis(-alpha.norm_sqr() * phi.value))
}

/// The truncated frequency sum `sum_{0 < m <= m_max} r_m cos(m t)`.
pub fn cosine_sum<T: Real>(t: T, counts: &DivisorCounts, n_max: usize) -> T {
    let step = cis(T::lit(2.0) * t);
    let mut acc = T::zero();
    let mut z = step;
    for n in 1..=n_max {
        if n % REANCHOR == 0 {
            z = cis(T::from_usize(2 * n).unwrap() * t);
        }
        acc += T::from_u32(2 * counts.d(n)).unwrap() * z.re;
        z *= step;
    }
    acc
}

/// Outcome of [`scalar_ode_check`].
#[derive(Debug, Clone)]
pub struct ScalarCheckReport<T> {
    pub sup_rel_error: T,
    pub times: Vec<T>,
    pub errors: Vec<T>,
    pub steps: usize,
}

/// Integrates `dB/dt = i |alpha|^2 B sum_{0<m<=m_max} r_m cos(mt)/(4 pi t)`
/// backward from `t_span.1`, starting on the closed form, and compares with the
/// closed form at `samples` equally spaced times.
pub fn scalar_ode_check<T: Real>(
    alpha: Complex<T>,
    t_span: (T, T),
    cfg: &PhaseQuadratureConfig<T>,
    rtol: T,
    samples: usize,
) -> Result<ScalarCheckReport<T>> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t0 > T::zero() && t1 > t0) {
        return Err(Error::InvalidConfig(
            "scalar check needs 0 < t0 < t1".into(),
        ));
    }
    let n_max = (cfg.m_max / 2) as usize;
    let counts = DivisorCounts::new(n_max);
    let samples = samples.max(2);
    let d = T::from_usize(samples - 1).unwrap();
    let outs: Vec<T> = (0..samples)
        .map(|i| {
            if i == 0 {
                t1
            } else if i + 1 == samples {
                t0
            } else {
                t1 - (t1 - t0) * T::from_usize(i).unwrap() / d
            }
        })
        .collect();
    let exact_at = |t: T| -> Result<Complex<T>> {
        let phi = phase_integral_with(t, cfg, &counts)?;
        Ok(alpha * cis(-alpha.norm_sqr() * phi.value))
    };
    if alpha.norm() == T::zero() {
        let times: Vec<T> = outs.iter().rev().copied().collect();
        let errors = vec![T::zero(); times.len()];
        return Ok(ScalarCheckReport {
            sup_rel_error: T::zero(),
            times,
            errors,
            steps: 0,
        });
    }
    let b1 = exact_at(t1)?;
    let w = alpha.norm_sqr();
    let four_pi = T::lit(4.0) * T::PI();
    let mut rhs = |t: T, y: &[Complex<T>], dy: &mut [Complex<T>]| -> Result<()> {
        let s = cosine_sum(t, &counts, n_max);
        dy[0] = Complex::new(T::zero(), w * s / (four_pi * t)) * y[0];
        Ok(())
    };
    let opts = Dopri5Options {
        rtol,
        atol: rtol * T::lit(1e-2) * alpha.norm(),
        ..Default::default()
    };
    let sol = dopri::solve(&mut rhs, t1, &[b1], t0, &outs, &opts)?;
    let mut errors = Vec::with_capacity(outs.len());
    for (t, s) in sol.times.iter().zip(&sol.states) {
        let exact = exact_at(*t)?;
        let e = if alpha.norm() == T::zero() {
            T::zero()
        } else {
            (s[0] - exact).norm() / alpha.norm()
        };
        errors.push(e);
    }
    let sup = errors.iter().copied().fold(T::zero(), T::max);
    let mut times = sol.times;
    times.reverse();
    errors.reverse();
    Ok(ScalarCheckReport {
        sup_rel_error: sup,
        times,
        errors,
        steps: sol.stats.accepted,
    })
}

/// Least-squares slope of `log |y|` against `log x`.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let n = T::from_usize(x.len()).unwrap();
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let sxy: T = lx.iter().zip(&ly).map(|(a, b)| (*a - mx) * (*b - my)).sum();
    let sxx: T = lx.iter().map(|a| (*a - mx) * (*a - mx)).sum();
    sxy / sxx
}
