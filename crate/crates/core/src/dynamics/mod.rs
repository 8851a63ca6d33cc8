//! Truncated mode systems, their time integration and conserved-quantity
//! diagnostics.
//!
//! Variables:
//! * `B`: boundary condition `B_k -> alpha_k` at infinity, integrated backward.
//! * `ATilde`: phase-renormalized amplitudes, `ATilde(s) = B(1/(4s))`.
//! * `A`: `A_k = e^{i|alpha_k|^2 log t/(8 pi)} ATilde_k`.
//! * `V`: Fourier modes of the periodic field solving
//!   `i v_t + v_xx + (|v|^2 - M) v/(2t) = 0`, Galerkin truncated.

pub mod dopri;
mod evaluator;

use num_complex::Complex;
use rustfft::FftPlanner;

pub use dopri::{Dopri5Options, Dopri5Stats};
pub use evaluator::{dealiased_len, CubicSum, FullCubic, RhsMethod, AUTO_TABLE_MAX_K};

use crate::error::{Error, Result};
use crate::resonance::ResonanceTable;
use crate::scalar::{cis, Real};
use crate::sequence::{mass_of, ComplexSequence};

/// Which variable a trajectory describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    A,
    ATilde,
    B,
    V,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::A => "A",
            System::ATilde => "Atilde",
            System::B => "B",
            System::V => "V",
        }
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(System::A),
            "Atilde" | "A_tilde" | "ATilde" => Ok(System::ATilde),
            "B" => Ok(System::B),
            "V" => Ok(System::V),
            _ => Err(Error::InvalidConfig(format!("unknown system {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub k_max: i64,
    pub rtol: T,
    pub atol: T,
    /// `(t0, t1)` with `t0 < t1`. The `B` system starts at `t1`, the others at `t0`.
    pub t_span: (T, T),
    pub max_step: Option<T>,
    pub max_steps: usize,
    /// Output times; both ends of the span when empty.
    pub sample_times: Vec<T>,
    pub method: RhsMethod,
    /// Coefficient of the potential term in the energy.
    pub energy_theta: T,
    /// Constant subtracted from `|v|^2` in the energy; the state mass when `None`.
    pub energy_c: Option<T>,
}

/// Energy coefficient for which `dE/dt = (theta/t^2) int (|v|^2 - M)^2`
/// holds along the `V` flow.
pub const ENERGY_THETA: f64 = 0.125;

impl<T: Real> SolverConfig<T> {
    pub fn new(k_max: i64, t0: T, t1: T) -> Self {
        Self {
            k_max,
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            t_span: (t0, t1),
            max_step: None,
            max_steps: 50_000_000,
            sample_times: Vec::new(),
            method: RhsMethod::Auto,
            energy_theta: T::lit(ENERGY_THETA),
            energy_c: None,
        }
    }

    pub fn with_tolerances(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_method(mut self, method: RhsMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_samples(mut self, times: Vec<T>) -> Self {
        self.sample_times = times;
        self
    }

    /// `n >= 2` equally spaced samples over the span, endpoints included.
    pub fn with_uniform_samples(mut self, n: usize) -> Self {
        let (a, b) = self.t_span;
        let n = n.max(2);
        let d = T::from_usize(n - 1).unwrap();
        self.sample_times = (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * T::from_usize(i).unwrap() / d
                }
            })
            .collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.t_span;
        if !(self.rtol > T::zero() && self.atol > T::zero()) {
            return Err(Error::InvalidConfig(
                "rtol and atol must be positive".into(),
            ));
        }
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::InvalidConfig("t_span must satisfy t0 < t1".into()));
        }
        if t0 <= T::zero() {
            return Err(Error::NonPositiveTime {
                t: t0.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(h) = self.max_step {
            if !(h > T::zero()) {
                return Err(Error::InvalidConfig("max_step must be positive".into()));
            }
        }
        if self.sample_times.iter().any(|&s| s < t0 || s > t1) {
            return Err(Error::InvalidConfig("sample time outside t_span".into()));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    fn dopri(&self) -> Dopri5Options<T> {
        Dopri5Options {
            rtol: self.rtol,
            atol: self.atol,
            h_max: self.max_step,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }

    fn samples(&self) -> Vec<T> {
        if self.sample_times.is_empty() {
            vec![self.t_span.0, self.t_span.1]
        } else {
            self.sample_times.clone()
        }
    }
}

/// Time-stamped states of one system, times strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<ComplexSequence<T>>,
    pub system: System,
    /// Reference mass `sum |alpha_k|^2` of the datum that generated the run.
    pub reference_mass: T,
}

impl<T: Real> Trajectory<T> {
    pub fn new(
        times: Vec<T>,
        states: Vec<ComplexSequence<T>>,
        system: System,
        reference_mass: T,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::ShapeMismatch {
                expected: times.len(),
                got: states.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        if let Some(first) = states.first() {
            if states
                .iter()
                .any(|s| s.offset() != first.offset() || s.len() != first.len())
            {
                return Err(Error::InvalidConfig(
                    "trajectory states must share offset and length".into(),
                ));
            }
        }
        Ok(Self {
            times,
            states,
            system,
            reference_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime {
            t: t.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn eight_pi<T: Real>() -> T {
    T::lit(8.0) * T::PI()
}

/// The `B` flow: `dB/dt = (i/(8 pi t)) [S_k(t, log(4t)/(8 pi)) - (|B_k|^2 - |alpha_k|^2) B_k]`.
pub struct BSystem<T: Real> {
    sum: CubicSum<T>,
    moduli: Vec<T>,
}

/// The `ATilde` flow:
/// `dA/dt = (-i/(8 pi t)) [S_k(1/(4t), -log t/(8 pi)) - (|A_k|^2 - |alpha_k|^2) A_k]`.
pub struct ATildeSystem<T: Real> {
    sum: CubicSum<T>,
    moduli: Vec<T>,
}

impl<T: Real> BSystem<T> {
    pub fn new(table: &ResonanceTable<T>, method: RhsMethod) -> Result<Self> {
        Ok(Self {
            sum: CubicSum::new(table, method)?,
            moduli: table.alpha_values().iter().map(|a| a.norm_sqr()).collect(),
        })
    }

    pub fn method(&self) -> RhsMethod {
        self.sum.method()
    }

    pub fn eval(&mut self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) -> Result<()> {
        check_time(t)?;
        let l = (T::lit(4.0) * t).ln() / eight_pi();
        self.sum.eval(t, l, y, dy)?;
        let c = Complex::new(T::zero(), (eight_pi::<T>() * t).recip());
        for ((d, yi), w) in dy.iter_mut().zip(y).zip(&self.moduli) {
            *d = c * (*d - yi * (yi.norm_sqr() - *w));
        }
        Ok(())
    }
}

impl<T: Real> ATildeSystem<T> {
    pub fn new(table: &ResonanceTable<T>, method: RhsMethod) -> Result<Self> {
        Ok(Self {
            sum: CubicSum::new(table, method)?,
            moduli: table.alpha_values().iter().map(|a| a.norm_sqr()).collect(),
        })
    }

    pub fn eval(&mut self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) -> Result<()> {
        check_time(t)?;
        let tau = (T::lit(4.0) * t).recip();
        let l = -t.ln() / eight_pi();
        self.sum.eval(tau, l, y, dy)?;
        let c = Complex::new(T::zero(), -(eight_pi::<T>() * t).recip());
        for ((d, yi), w) in dy.iter_mut().zip(y).zip(&self.moduli) {
            *d = c * (*d - yi * (yi.norm_sqr() - *w));
        }
        Ok(())
    }
}

/// Galerkin-truncated field flow `i a_k' = k^2 a_k - (N_k - M a_k)/(2t)`,
/// `N = P_K(|v|^2 v)`.
pub struct VSystem<T: Real> {
    k_max: i64,
    cubic: FullCubic<T>,
    mass: T,
}

impl<T: Real> VSystem<T> {
    pub fn new(k_max: i64, reference_mass: T) -> Self {
        Self {
            k_max,
            cubic: FullCubic::new(k_max),
            mass: reference_mass,
        }
    }

    pub fn eval(&mut self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) -> Result<()> {
        check_time(t)?;
        self.cubic.eval(y, dy);
        let half = (T::lit(2.0) * t).recip();
        for (i, (d, yi)) in dy.iter_mut().zip(y).enumerate() {
            let k = T::from_int(i as i64 - self.k_max);
            let n = *d;
            // a' = -i k^2 a + i (N - M a)/(2t)
            *d = Complex::new(T::zero(), -k * k) * yi
                + Complex::new(T::zero(), half) * (n - yi * self.mass);
        }
        Ok(())
    }
}

fn dense<T: Real>(
    table: &ResonanceTable<T>,
    state: &ComplexSequence<T>,
) -> Result<Vec<Complex<T>>> {
    Ok(state.truncated(table.k_max())?.into_values())
}

/// `dB/dt` at time `t`.
pub fn rhs_b<T: Real>(
    t: T,
    b: &ComplexSequence<T>,
    table: &ResonanceTable<T>,
) -> Result<ComplexSequence<T>> {
    check_time(t)?;
    let y = dense(table, b)?;
    let mut dy = y.clone();
    BSystem::new(table, RhsMethod::Auto)?.eval(t, &y, &mut dy)?;
    Ok(ComplexSequence::new(-table.k_max(), dy))
}

/// `dATilde/dt` at time `t`.
pub fn rhs_a_tilde<T: Real>(
    t: T,
    a: &ComplexSequence<T>,
    table: &ResonanceTable<T>,
) -> Result<ComplexSequence<T>> {
    check_time(t)?;
    let y = dense(table, a)?;
    let mut dy = y.clone();
    ATildeSystem::new(table, RhsMethod::Auto)?.eval(t, &y, &mut dy)?;
    Ok(ComplexSequence::new(-table.k_max(), dy))
}

/// Integrates `system` and returns states at `config.sample_times`.
///
/// For `B`, `state0` is the value at `t_span.1` and integration runs backward.
/// For `ATilde` and `V` it is the value at `t_span.0`. For `A` it is `A(t0)`;
/// the run integrates `ATilde` and gauges the output.
pub fn integrate<T: Real>(
    system: System,
    state0: &ComplexSequence<T>,
    table: &ResonanceTable<T>,
    config: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    if config.k_max != table.k_max() {
        return Err(Error::InvalidConfig(format!(
            "config K = {} does not match table K = {}",
            config.k_max,
            table.k_max()
        )));
    }
    let k_max = table.k_max();
    let y0 = dense(table, state0)?;
    let (t0, t1) = config.t_span;
    let samples = config.samples();
    let opts = config.dopri();
    let reference_mass = table.alpha().mass();
    let wrap = |times: Vec<T>, states: Vec<Vec<Complex<T>>>, sys: System| {
        let states = states
            .into_iter()
            .map(|v| ComplexSequence::new(-k_max, v))
            .collect();
        Trajectory::new(times, states, sys, reference_mass)
    };
    match system {
        System::B => {
            let mut sys = BSystem::new(table, config.method)?;
            let mut f = |t: T, y: &[Complex<T>], dy: &mut [Complex<T>]| sys.eval(t, y, dy);
            let outs: Vec<T> = samples.iter().rev().copied().collect();
            let sol = dopri::solve(&mut f, t1, &y0, t0, &outs, &opts)?;
            let mut times = sol.times;
            let mut states = sol.states;
            times.reverse();
            states.reverse();
            wrap(times, states, System::B)
        }
        System::ATilde => {
            let mut sys = ATildeSystem::new(table, config.method)?;
            let mut f = |t: T, y: &[Complex<T>], dy: &mut [Complex<T>]| sys.eval(t, y, dy);
            let sol = dopri::solve(&mut f, t0, &y0, t1, &samples, &opts)?;
            wrap(sol.times, sol.states, System::ATilde)
        }
        System::A => {
            let alpha = table.alpha();
            let a0 = ComplexSequence::new(-k_max, y0);
            let start = gauge_remove(t0, &a0, alpha)?;
            let inner = integrate(System::ATilde, &start, table, config)?;
            let states = inner
                .times
                .iter()
                .zip(&inner.states)
                .map(|(&t, s)| gauge_apply(t, s, alpha))
                .collect::<Result<Vec<_>>>()?;
            Trajectory::new(inner.times, states, System::A, reference_mass)
        }
        System::V => {
            let mut sys = VSystem::new(k_max, reference_mass);
            let mut f = |t: T, y: &[Complex<T>], dy: &mut [Complex<T>]| sys.eval(t, y, dy);
            let sol = dopri::solve(&mut f, t0, &y0, t1, &samples, &opts)?;
            wrap(sol.times, sol.states, System::V)
        }
    }
}

fn gauge<T: Real>(
    t: T,
    a: &ComplexSequence<T>,
    alpha: &ComplexSequence<T>,
    sign: T,
) -> Result<ComplexSequence<T>> {
    check_time(t)?;
    let lt = t.ln() / eight_pi();
    let values = a
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * cis(sign * alpha.get(a.offset() + i as i64).norm_sqr() * lt))
        .collect();
    Ok(ComplexSequence::new(a.offset(), values))
}

/// `A_k = e^{i |alpha_k|^2 log t/(8 pi)} ATilde_k`.
pub fn gauge_apply<T: Real>(
    t: T,
    a_tilde: &ComplexSequence<T>,
    alpha: &ComplexSequence<T>,
) -> Result<ComplexSequence<T>> {
    gauge(t, a_tilde, alpha, T::one())
}

/// Inverse of [`gauge_apply`].
pub fn gauge_remove<T: Real>(
    t: T,
    a: &ComplexSequence<T>,
    alpha: &ComplexSequence<T>,
) -> Result<ComplexSequence<T>> {
    gauge(t, a, alpha, -T::one())
}

/// `ATilde(s) = B(1/(4s))`, reordered so times increase. The map is its own
/// inverse, so an `ATilde` trajectory is mapped back to `B`.
pub fn time_inversion<T: Real>(traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let target = match traj.system {
        System::B => System::ATilde,
        System::ATilde => System::B,
        other => {
            return Err(Error::InvalidConfig(format!(
                "time inversion maps B and Atilde trajectories, got {}",
                other.name()
            )))
        }
    };
    if let Some(&t) = traj.times.iter().find(|&&t| t <= T::zero()) {
        return Err(Error::NonPositiveTime {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let four = T::lit(4.0);
    let times = traj
        .times
        .iter()
        .rev()
        .map(|&t| (four * t).recip())
        .collect();
    let states = traj.states.iter().rev().cloned().collect();
    Trajectory::new(times, states, target, traj.reference_mass)
}

/// `sum |A_k|^2`.
pub fn mass<T: Real>(state: &ComplexSequence<T>) -> T {
    state.mass()
}

/// Grid samples of `v(x) = sum_k a_k e^{ikx}` on `n` points of `[0, 2 pi)`.
pub(crate) fn synthesize<T: Real>(state: &ComplexSequence<T>, n: usize) -> Vec<Complex<T>> {
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let nn = n as i64;
    for (i, v) in state.values().iter().enumerate() {
        let k = state.offset() + i as i64;
        buf[k.rem_euclid(nn) as usize] += *v;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `int_0^{2 pi} (|v|^2 - c)^2 dx`, exact for the trigonometric polynomial.
pub fn potential_integral<T: Real>(state: &ComplexSequence<T>, c: T) -> T {
    let reach = state.offset().abs().max(state.last_index().abs());
    let n = ((4 * reach + 1) as usize).next_power_of_two().max(4);
    let v = synthesize(state, n);
    let s: T = v.iter().map(|z| (z.norm_sqr() - c).powi(2)).sum();
    T::lit(2.0) * T::PI() * s / T::from_usize(n).unwrap()
}

/// `E = pi sum k^2 |a_k|^2 - (theta/t) int (|v|^2 - c)^2`.
pub fn energy<T: Real>(state: &ComplexSequence<T>, t: T, config: &SolverConfig<T>) -> Result<T> {
    check_time(t)?;
    let kinetic: T = state
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let k = T::from_int(state.offset() + i as i64);
            k * k * v.norm_sqr()
        })
        .sum::<T>()
        * T::PI();
    let c = config.energy_c.unwrap_or_else(|| mass_of(state.values()));
    Ok(kinetic - config.energy_theta / t * potential_integral(state, c))
}
