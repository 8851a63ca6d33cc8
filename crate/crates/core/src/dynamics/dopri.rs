//! Dormand–Prince 5(4) with PI step control and dense output.
//!
//! Works on complex state vectors and integrates in either time direction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right-hand side `dy/dt = f(t, y)` of a complex ODE system.
pub trait OdeSystem<T: Real> {
    fn rhs(&mut self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) -> Result<()>;
}

impl<T: Real, F> OdeSystem<T> for F
where
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]) -> Result<()>,
{
    fn rhs(&mut self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) -> Result<()> {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step magnitude; estimated when `None`.
    pub h_init: Option<T>,
    /// Upper bound on the step magnitude; the whole span when `None`.
    pub h_max: Option<T>,
    pub max_steps: usize,
    pub safety: T,
    pub fac_min: T,
    pub fac_max: T,
    /// PI stabilization exponent (0 gives the classical controller).
    pub beta: T,
}

impl<T: Real> Default for Dopri5Options<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            h_init: None,
            h_max: None,
            max_steps: 50_000_000,
            safety: T::lit(0.9),
            fac_min: T::lit(0.2),
            fac_max: T::lit(10.0),
            beta: T::lit(0.04),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// States at the requested output times, in the order they were requested.
#[derive(Debug, Clone)]
pub struct DenseSolution<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<Complex<T>>>,
    pub stats: Dopri5Stats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates from `t0` to `t1` and reports the solution at `outputs`.
///
/// `outputs` must be monotone in the direction of integration and lie in the
/// closed span. Output values between steps use the continuous extension.
pub fn solve<T: Real, S: OdeSystem<T>>(
    system: &mut S,
    t0: T,
    y0: &[Complex<T>],
    t1: T,
    outputs: &[T],
    opts: &Dopri5Options<T>,
) -> Result<DenseSolution<T>> {
    if !(opts.rtol > T::zero() && opts.atol > T::zero()) {
        return Err(Error::InvalidConfig(
            "rtol and atol must be positive".into(),
        ));
    }
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    for w in outputs.windows(2) {
        if (w[1] - w[0]) * dir < T::zero() {
            return Err(Error::InvalidConfig(
                "output times must follow the integration direction".into(),
            ));
        }
    }
    let span = (t1 - t0).abs();
    let slack = T::lit(64.0) * T::epsilon() * (t0.abs().max(t1.abs()));
    if outputs
        .iter()
        .any(|&t| (t - t0) * dir < -slack || (t1 - t) * dir < -slack)
    {
        return Err(Error::InvalidConfig(
            "output time outside the integration span".into(),
        ));
    }

    let n = y0.len();
    let lit = T::lit;
    let zero = Complex::new(T::zero(), T::zero());
    let mut stats = Dopri5Stats::default();
    let mut times = Vec::with_capacity(outputs.len());
    let mut states = Vec::with_capacity(outputs.len());
    let mut next_out = 0usize;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut cont5 = vec![zero; n];

    system.rhs(t, &y, &mut k1)?;
    stats.evaluations += 1;

    // Leading outputs at the start point.
    while next_out < outputs.len() && (outputs[next_out] - t0) * dir <= T::zero() {
        times.push(outputs[next_out]);
        states.push(y.clone());
        next_out += 1;
    }
    if span == T::zero() {
        while next_out < outputs.len() {
            times.push(outputs[next_out]);
            states.push(y.clone());
            next_out += 1;
        }
        return Ok(DenseSolution {
            times,
            states,
            stats,
        });
    }

    let h_max = opts.h_max.unwrap_or(span).min(span);
    let scale = |yi: Complex<T>, yj: Complex<T>| opts.atol + opts.rtol * yi.norm().max(yj.norm());
    let mut h = match opts.h_init {
        Some(h) => h.abs().min(h_max),
        None => initial_step(system, t, &y, &k1, dir, h_max, opts, &mut stats)?,
    };
    let expo1 = lit(0.2) - opts.beta * lit(0.75);
    let mut facold = lit(1e-4);
    let mut last = false;
    let mut reject = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::MaxSteps {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        if h < lit(16.0) * T::epsilon() * t.abs().max(T::min_positive_value()) {
            return Err(Error::StepSizeUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        if (t + dir * h * lit(1.01) - t1) * dir >= T::zero() {
            h = (t1 - t).abs();
            last = true;
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + k1[i] * (hs * lit(A21));
        }
        system.rhs(t + hs * lit(C2), &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * lit(A31) + k2[i] * lit(A32)) * hs;
        }
        system.rhs(t + hs * lit(C3), &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * lit(A41) + k2[i] * lit(A42) + k3[i] * lit(A43)) * hs;
        }
        system.rhs(t + hs * lit(C4), &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + (k1[i] * lit(A51) + k2[i] * lit(A52) + k3[i] * lit(A53) + k4[i] * lit(A54)) * hs;
        }
        system.rhs(t + hs * lit(C5), &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + (k1[i] * lit(A61)
                    + k2[i] * lit(A62)
                    + k3[i] * lit(A63)
                    + k4[i] * lit(A64)
                    + k5[i] * lit(A65))
                    * hs;
        }
        let t_new = if last { t1 } else { t + hs };
        system.rhs(t_new, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + (k1[i] * lit(A71)
                    + k3[i] * lit(A73)
                    + k4[i] * lit(A74)
                    + k5[i] * lit(A75)
                    + k6[i] * lit(A76))
                    * hs;
        }
        system.rhs(t_new, &ynew, &mut k7)?;
        stats.evaluations += 6;

        let mut err = T::zero();
        for i in 0..n {
            let e = (k1[i] * lit(E1)
                + k3[i] * lit(E3)
                + k4[i] * lit(E4)
                + k5[i] * lit(E5)
                + k6[i] * lit(E6)
                + k7[i] * lit(E7))
                * hs;
            let sc = scale(y[i], ynew[i]);
            err += e.norm_sqr() / (sc * sc);
        }
        let err = if n == 0 {
            T::zero()
        } else {
            (err / T::from_usize(n).unwrap()).sqrt()
        };
        if !err.is_finite() {
            return Err(Error::NonFinite {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(opts.beta)) / opts.safety;
        let fac = fac.max(opts.fac_max.recip()).min(opts.fac_min.recip());
        let h_new = h / fac;

        if err <= T::one() {
            facold = err.max(lit(1e-4));
            stats.accepted += 1;
            // Continuous extension coefficients for this step.
            for i in 0..n {
                cont5[i] = (k1[i] * lit(D1)
                    + k3[i] * lit(D3)
                    + k4[i] * lit(D4)
                    + k5[i] * lit(D5)
                    + k6[i] * lit(D6)
                    + k7[i] * lit(D7))
                    * hs;
            }
            while next_out < outputs.len()
                && ((outputs[next_out] - t_new) * dir <= T::zero() || last)
            {
                let to = outputs[next_out];
                let theta = ((to - t) / hs).max(T::zero()).min(T::one());
                let theta1 = T::one() - theta;
                let state = (0..n)
                    .map(|i| {
                        let ydiff = ynew[i] - y[i];
                        let bspl = k1[i] * hs - ydiff;
                        let c4 = ydiff - k7[i] * hs - bspl;
                        y[i] + (ydiff + (bspl + (c4 + cont5[i] * theta1) * theta) * theta1) * theta
                    })
                    .collect();
                times.push(to);
                states.push(state);
                next_out += 1;
            }
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            if last {
                break;
            }
            let mut h_next = h_new.min(h_max);
            if reject {
                h_next = h_next.min(h);
            }
            reject = false;
            h = h_next;
        } else {
            stats.rejected += 1;
            reject = true;
            last = false;
            h /= (fac11 / opts.safety).min(opts.fac_min.recip());
        }
    }
    Ok(DenseSolution {
        times,
        states,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn initial_step<T: Real, S: OdeSystem<T>>(
    system: &mut S,
    t: T,
    y: &[Complex<T>],
    f0: &[Complex<T>],
    dir: T,
    h_max: T,
    opts: &Dopri5Options<T>,
    stats: &mut Dopri5Stats,
) -> Result<T> {
    let n = y.len().max(1);
    let nt = T::from_usize(n).unwrap();
    let sc: Vec<T> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let dnf = (f0
        .iter()
        .zip(&sc)
        .map(|(f, s)| f.norm_sqr() / (*s * *s))
        .sum::<T>()
        / nt)
        .sqrt();
    let dny = (y
        .iter()
        .zip(&sc)
        .map(|(v, s)| v.norm_sqr() / (*s * *s))
        .sum::<T>()
        / nt)
        .sqrt();
    let mut h = if dnf <= T::lit(1e-10) || dny <= T::lit(1e-10) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * dny / dnf
    };
    h = h.min(h_max);
    let y1: Vec<Complex<T>> = y.iter().zip(f0).map(|(v, f)| v + f * (dir * h)).collect();
    let mut f1 = vec![Complex::new(T::zero(), T::zero()); y.len()];
    system.rhs(t + dir * h, &y1, &mut f1)?;
    stats.evaluations += 1;
    let der2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| (a - b).norm_sqr() / (*s * *s))
        .sum::<T>()
        / nt)
        .sqrt()
        / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= T::lit(1e-15) {
        T::lit(1e-6).max(h * T::lit(1e-3))
    } else {
        (T::lit(0.01) / der12).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h).min(h1).min(h_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rotation_forward_and_backward() {
        // y' = i w y, exact y = e^{i w t}.
        let w = 3.0f64;
        let mut sys = |_t: f64, y: &[Complex<f64>], dy: &mut [Complex<f64>]| {
            dy[0] = Complex::new(0.0, w) * y[0];
            Ok(())
        };
        let outs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let opts = Dopri5Options {
            rtol: 1e-11,
            atol: 1e-13,
            ..Default::default()
        };
        let sol = solve(&mut sys, 0.0, &[Complex::new(1.0, 0.0)], 10.0, &outs, &opts).unwrap();
        for (t, s) in sol.times.iter().zip(&sol.states) {
            let exact = Complex::new(0.0, w * t).exp();
            assert!((s[0] - exact).norm() < 1e-9, "t = {t}");
        }
        let back: Vec<f64> = outs.iter().rev().copied().collect();
        let y10 = [Complex::new(0.0, 30.0).exp()];
        let sol = solve(&mut sys, 10.0, &y10, 0.0, &back, &opts).unwrap();
        assert!((sol.states.last().unwrap()[0] - Complex::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn dense_output_is_fourth_order_accurate() {
        let mut sys = |t: f64, _y: &[Complex<f64>], dy: &mut [Complex<f64>]| {
            dy[0] = Complex::new(t.cos(), 0.0);
            Ok(())
        };
        let outs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.037).collect();
        let opts = Dopri5Options {
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        };
        let sol = solve(&mut sys, 0.0, &[Complex::new(0.0, 0.0)], 3.7, &outs, &opts).unwrap();
        let worst = sol
            .times
            .iter()
            .zip(&sol.states)
            .map(|(t, s)| (s[0].re - t.sin()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "worst = {worst}");
    }

    #[test]
    fn singular_rhs_reports_failing_time() {
        // y' = 1/(1 - t)^2 blows up at t = 1.
        let mut sys = |t: f64, _y: &[Complex<f64>], dy: &mut [Complex<f64>]| {
            dy[0] = Complex::new(1.0 / ((1.0 - t) * (1.0 - t)), 0.0);
            Ok(())
        };
        let err = solve(
            &mut sys,
            0.0,
            &[Complex::new(1.0, 0.0)],
            2.0,
            &[2.0],
            &Dopri5Options::default(),
        )
        .unwrap_err();
        match err {
            Error::StepSizeUnderflow { t } | Error::NonFinite { t } => {
                assert!((t - 1.0).abs() < 1e-2, "t = {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_misordered_outputs() {
        let mut sys = |_t: f64, _y: &[Complex<f64>], dy: &mut [Complex<f64>]| {
            dy[0] = Complex::new(0.0, 0.0);
            Ok(())
        };
        let r = solve(
            &mut sys,
            0.0,
            &[Complex::new(1.0, 0.0)],
            1.0,
            &[0.5, 0.2],
            &Dopri5Options::default(),
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
