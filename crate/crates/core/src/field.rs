//! Physical fields: the periodic field `v(t, x) = sum_k a_k(t) e^{ikx}`, the
//! pseudo-conformal transform back to `u`, the free evolution of the comb and
//! the residual of the `v` equation.

use num_complex::Complex;
use rayon::prelude::*;

use crate::dynamics::{self, System, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::sequence::ComplexSequence;

/// Uniform grid `x_j = 2 pi j / n` on `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldGrid {
    n: usize,
}

impl FieldGrid {
    /// `n` must be a power of two and at least `4K`.
    pub fn new(n: usize, k_max: i64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { n });
        }
        let required = (4 * k_max.max(0) as usize).max(1);
        if n < required {
            return Err(Error::GridTooSmall { n, required });
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn points<T: Real>(&self) -> Vec<T> {
        let h = T::lit(2.0) * T::PI() / T::from_usize(self.n).unwrap();
        (0..self.n).map(|j| h * T::from_usize(j).unwrap()).collect()
    }

    fn check<T: Real>(&self, state: &ComplexSequence<T>) -> Result<()> {
        let reach = state.offset().abs().max(state.last_index().abs());
        FieldGrid::new(self.n, reach).map(|_| ())
    }
}

/// `v(x_j)` for every grid point.
pub fn synthesize_v<T: Real>(
    state: &ComplexSequence<T>,
    grid: &FieldGrid,
) -> Result<Vec<Complex<T>>> {
    grid.check(state)?;
    Ok(dynamics::synthesize(state, grid.len()))
}

/// `v(x)` at one point by direct summation.
pub fn eval_v<T: Real>(state: &ComplexSequence<T>, x: T) -> Complex<T> {
    state
        .values()
        .iter()
        .enumerate()
        .map(|(i, a)| a * cis(T::from_int(state.offset() + i as i64) * x))
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `e^{i x^2/4t} / sqrt(t) * conj(v(1/t, x/t))`.
pub fn pseudo_conformal_u<T: Real, F>(mut v_at: F, t: T, x: T) -> Result<Complex<T>>
where
    F: FnMut(T, T) -> Complex<T>,
{
    check_time(t)?;
    let v = v_at(t.recip(), x / t);
    Ok(cis(x * x / (T::lit(4.0) * t)) * v.conj() / t.sqrt())
}

/// `sum_k alpha_k e^{i(x-k)^2/4t} / sqrt(t)`.
pub fn free_comb<T: Real>(t: T, x: T, alpha: &ComplexSequence<T>) -> Result<Complex<T>> {
    check_time(t)?;
    let four_t = T::lit(4.0) * t;
    let sum = alpha
        .values()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d = x - T::from_int(alpha.offset() + i as i64);
            a * cis(d * d / four_t)
        })
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
    Ok(sum / t.sqrt())
}

/// Discrete `L^2(0, 2 pi)` norm of the residual of
/// `i v_t + v_xx + (|v|^2 - M) v / (2t)` at each interior time of a `V`
/// trajectory, `v_t` by the three-point difference on the sample times.
pub fn vnls_residual<T: Real>(traj: &Trajectory<T>, grid: &FieldGrid) -> Result<Vec<(T, T)>> {
    if traj.system != System::V {
        return Err(Error::InvalidConfig(format!(
            "residual needs a V trajectory, got {}",
            traj.system.name()
        )));
    }
    if traj.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            got: traj.len(),
        });
    }
    let m = traj.reference_mass;
    let n = grid.len();
    let fields: Vec<Vec<Complex<T>>> = traj
        .states
        .par_iter()
        .map(|s| synthesize_v(s, grid))
        .collect::<Result<_>>()?;
    let dxx: Vec<Vec<Complex<T>>> = traj
        .states
        .par_iter()
        .map(|s| {
            let d = ComplexSequence::new(
                s.offset(),
                s.values()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let k = T::from_int(s.offset() + i as i64);
                        -a * (k * k)
                    })
                    .collect(),
            );
            dynamics::synthesize(&d, n)
        })
        .collect();
    let dx = T::lit(2.0) * T::PI() / T::from_usize(n).unwrap();
    let i_unit = Complex::new(T::zero(), T::one());
    let out = (1..traj.len() - 1)
        .into_par_iter()
        .map(|i| {
            let (tm, t, tp) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
            let (hm, hp) = (t - tm, tp - t);
            let (cm, cp) = (-hp / (hm * (hm + hp)), hm / (hp * (hm + hp)));
            let c0 = (hp - hm) / (hm * hp);
            let half = (T::lit(2.0) * t).recip();
            let mut acc = T::zero();
            for j in 0..n {
                let v = fields[i][j];
                let vt = fields[i - 1][j] * cm + v * c0 + fields[i + 1][j] * cp;
                let r = i_unit * vt + dxx[i][j] + v * ((v.norm_sqr() - m) * half);
                acc += r.norm_sqr();
            }
            (t, (acc * dx).sqrt())
        })
        .collect();
    Ok(out)
}

/// Discrete `L^2` norm of `(|v|^2 v - P_K(|v|^2 v)) / (2t)`: the residual an
/// exact Galerkin solution leaves on the grid.
pub fn truncation_floor<T: Real>(state: &ComplexSequence<T>, t: T, grid: &FieldGrid) -> Result<T> {
    check_time(t)?;
    let v = synthesize_v(state, grid)?;
    let n = grid.len();
    let mut cubic: Vec<Complex<T>> = v.iter().map(|z| z * z.norm_sqr()).collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut cubic);
    let inv = T::from_usize(n).unwrap().recip();
    let reach = state.offset().abs().max(state.last_index().abs());
    let kept = ComplexSequence::from_fn(reach, |k| cubic[k.rem_euclid(n as i64) as usize] * inv);
    let proj = dynamics::synthesize(&kept, n);
    let dx = T::lit(2.0) * T::PI() * inv;
    let s: T = v
        .iter()
        .zip(&proj)
        .map(|(z, p)| (z * z.norm_sqr() - p).norm_sqr())
        .sum();
    Ok((s * dx).sqrt() / (T::lit(2.0) * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn grid_preconditions() {
        assert!(matches!(
            FieldGrid::new(12, 2),
            Err(Error::NotPowerOfTwo { n: 12 })
        ));
        assert!(matches!(
            FieldGrid::new(16, 5),
            Err(Error::GridTooSmall {
                n: 16,
                required: 20
            })
        ));
        let g = FieldGrid::new(16, 4).unwrap();
        assert!(synthesize_v(&ComplexSequence::<f64>::zeros(5), &g).is_err());
    }

    #[test]
    fn synthesis_examples() {
        let g = FieldGrid::new(32, 4).unwrap();
        let v = synthesize_v(&ComplexSequence::delta(0, c(0.3, -0.4)), &g).unwrap();
        assert!(v.iter().all(|z| (z - c(0.3, -0.4)).norm() < 1e-15));
        let two = ComplexSequence::new(-1, vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.25)]);
        let v = synthesize_v(&two, &g).unwrap();
        assert!((v[0] - c(0.5, 0.25)).norm() < 1e-15);
        assert!((v[16] - c(-0.5, -0.25)).norm() < 1e-15);
        let pts = g.points::<f64>();
        for j in [3, 9, 27] {
            assert!((v[j] - eval_v(&two, pts[j])).norm() < 1e-14);
        }
        let mean: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
        assert!((mean - two.mass()).abs() < 1e-15);
    }

    #[test]
    fn transform_examples() {
        let state = ComplexSequence::new(
            -2,
            vec![
                c(0.1, 0.2),
                c(-0.3, 0.0),
                c(0.5, 0.1),
                c(0.0, 0.4),
                c(0.2, -0.2),
            ],
        );
        let v = |_s: f64, y: f64| eval_v(&state, y);
        let u = pseudo_conformal_u(v, 1.0, 0.0).unwrap();
        assert!((u - eval_v(&state, 0.0).conj()).norm() < 1e-15);
        for (t, x) in [(0.3, 1.1), (2.5, -4.0)] {
            let u = pseudo_conformal_u(v, t, x).unwrap();
            assert!((u.norm() - eval_v(&state, x / t).norm() / t.sqrt()).abs() < 1e-14);
        }
        assert!(pseudo_conformal_u(v, 0.0, 1.0).is_err());
    }

    #[test]
    fn free_comb_examples() {
        let a = ComplexSequence::delta(0, c(0.7, 0.1));
        assert!((free_comb(4.0, 0.0, &a).unwrap() - c(0.35, 0.05)).norm() < 1e-15);
        assert!(free_comb(-1.0, 0.0, &a).is_err());
    }
}
