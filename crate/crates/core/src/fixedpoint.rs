//! The integral map for the perturbation `R = B - alpha` and its Picard
//! iteration.
//!
//! With `B = R + alpha` the `B` equation integrates to
//!
//! ```text
//! T(R)_k(t) = -(i eta_N(t) / 8 pi) int_t^inf (eta_N(tau)/tau)
//!     [ sum_NR e^{-i m tau} e^{i Lambda log(4 tau)/(8 pi)} B_j1 conj(B_j2) B_j3
//!       - (|B_k|^2 - |alpha_k|^2) B_k ] d tau
//! ```
//!
//! evaluated on a panel mesh of `[pi N, T_max]`; the part of the `R`-free term
//! beyond `T_max` is integrated by parts once.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::norms::{self, WindowSamples, WindowSpec};
use crate::quadrature::GaussLegendre;
use crate::resonance::ResonanceTable;
use crate::scalar::{cis, Real};
use crate::sequence::ComplexSequence;

/// Quintic smoothstep on `[0, pi]`: 0 below, 1 above, `C^2`.
pub fn eta<T: Real>(x: T) -> T {
    let u = x / T::PI();
    if u <= T::zero() {
        T::zero()
    } else if u >= T::one() {
        T::one()
    } else {
        u * u * u * (T::lit(10.0) + u * (T::lit(-15.0) + T::lit(6.0) * u))
    }
}

/// `eta_N(t) = eta(t - pi N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoff {
    n: i64,
}

impl Cutoff {
    pub fn new(n: i64) -> Self {
        Self { n }
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// `pi N`.
    pub fn start<T: Real>(&self) -> T {
        T::PI() * T::from_int(self.n)
    }

    pub fn eval<T: Real>(&self, t: T) -> T {
        eta(t - self.start::<T>())
    }
}

/// One of the three parts of the map, by order in `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    T0,
    T1,
    T2,
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T0" | "t0" => Ok(Component::T0),
            "T1" | "t1" => Ok(Component::T1),
            "T2" | "t2" => Ok(Component::T2),
            _ => Err(Error::InvalidConfig(format!("unknown component {s:?}"))),
        }
    }
}

/// Discretization and norm parameters of the map.
#[derive(Debug, Clone)]
pub struct QuadSpec<T> {
    /// Upper truncation of the improper integrals.
    pub t_max: T,
    /// Target for the per-panel quadrature error and the tail bound.
    pub quad_tol: T,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panel refinement factor on the cutoff ramp `[pi N, pi(N+1)]`.
    pub refine: usize,
    /// Cap on the total node count.
    pub max_nodes: usize,
    /// Samples per extended window for the norms.
    pub window_samples: usize,
    /// Norm exponents `(s, p)` of the stopping rule.
    pub s: T,
    pub p: T,
}

impl<T: Real> QuadSpec<T> {
    pub fn new(t_max: T) -> Self {
        Self {
            t_max,
            quad_tol: T::lit(1e-10),
            order: 16,
            refine: 4,
            max_nodes: 4_000_000,
            window_samples: norms::DEFAULT_WINDOW_SAMPLES,
            s: T::lit(0.75),
            p: T::lit(2.0),
        }
    }

    pub fn with_norm(mut self, s: T, p: T) -> Self {
        self.s = s;
        self.p = p;
        self
    }

    pub fn validate(&self, n_cut: i64) -> Result<()> {
        if n_cut < 0 {
            return Err(Error::InvalidConfig(format!(
                "cutoff index N must be >= 0, got {n_cut}"
            )));
        }
        let start = Cutoff::new(n_cut).start::<T>();
        if !(self.t_max > start + T::lit(4.0) * T::PI()) {
            return Err(Error::InvalidConfig(format!(
                "T_max = {} must exceed pi (N + 4) = {}",
                self.t_max,
                start + T::lit(4.0) * T::PI()
            )));
        }
        if !(self.quad_tol > T::zero()) || self.order < 2 || self.refine == 0 {
            return Err(Error::InvalidConfig(
                "need quad_tol > 0, order >= 2, refine >= 1".into(),
            ));
        }
        if !(self.s >= T::zero()) || !(self.p > T::one()) {
            return Err(Error::InvalidConfig(format!(
                "need s >= 0 and p > 1, got ({}, {})",
                self.s, self.p
            )));
        }
        WindowSpec::new(0, self.window_samples)?;
        Ok(())
    }

    /// Largest phase `omega h / 2` per panel with Gauss–Legendre error below
    /// `quad_tol`, from `rho^{2q}/(2q)!`, clamped to `[0.5, 4]`.
    fn resolution(&self) -> T {
        let q2 = 2 * self.order;
        let ln_fact: f64 = (1..=q2).map(|i| (i as f64).ln()).sum();
        let tol = self.quad_tol.to_f64().unwrap();
        let rho = ((tol.ln() + ln_fact) / q2 as f64).exp();
        T::lit(rho.clamp(0.5, 4.0))
    }
}

/// Panel mesh on `[pi N, T_max]` with breakpoints at the multiples of `pi`.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    n_cut: i64,
    breaks: Vec<T>,
    nodes: Vec<T>,
    rule: GaussLegendre<T>,
    tail: Vec<Vec<T>>,
    bary: Vec<T>,
}

impl<T: Real> Mesh<T> {
    /// Panels resolve frequencies up to `omega` at the accuracy of `quad`.
    pub fn build(n_cut: i64, omega: T, quad: &QuadSpec<T>) -> Result<Self> {
        quad.validate(n_cut)?;
        let pi = T::PI();
        let h_target = T::lit(2.0) * quad.resolution() / omega.max(T::one());
        let start = Cutoff::new(n_cut).start::<T>();
        let mut breaks = vec![start];
        let eps = quad.t_max * T::lit(1e-12);
        let mut j = n_cut;
        let mut a = start;
        let mut first = true;
        while a < quad.t_max - eps {
            j += 1;
            let mut b = (pi * T::from_int(j)).min(quad.t_max);
            if quad.t_max - b < eps {
                b = quad.t_max;
            }
            let mut count = ((b - a) / h_target).ceil().to_usize().unwrap_or(1).max(1);
            if first {
                count *= quad.refine;
                first = false;
            }
            if (breaks.len() + count) * quad.order > quad.max_nodes {
                return Err(Error::InvalidConfig(format!(
                    "mesh needs more than max_nodes = {} nodes",
                    quad.max_nodes
                )));
            }
            let h = (b - a) / T::from_usize(count).unwrap();
            for i in 1..count {
                breaks.push(a + h * T::from_usize(i).unwrap());
            }
            breaks.push(b);
            a = b;
        }
        let rule = GaussLegendre::new(quad.order);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * quad.order);
        for w in breaks.windows(2) {
            let (c, h) = ((w[0] + w[1]) * T::lit(0.5), (w[1] - w[0]) * T::lit(0.5));
            nodes.extend(rule.nodes.iter().map(|x| c + h * *x));
        }
        let tail = rule.tail_matrix();
        let bary = rule.barycentric_weights();
        Ok(Self {
            n_cut,
            breaks,
            nodes,
            rule,
            tail,
            bary,
        })
    }

    pub fn n_cut(&self) -> i64 {
        self.n_cut
    }

    pub fn start(&self) -> T {
        self.breaks[0]
    }

    pub fn end(&self) -> T {
        *self.breaks.last().unwrap()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    /// `int_{t_i}^{T_max} f` at every node.
    pub fn suffix_integrals(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        let q = self.rule.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; f.len()];
        let mut later = zero;
        for p in (0..self.panels()).rev() {
            let h = (self.breaks[p + 1] - self.breaks[p]) * T::lit(0.5);
            let fp = &f[p * q..(p + 1) * q];
            for i in 0..q {
                let mut acc = zero;
                for (s, v) in self.tail[i].iter().zip(fp) {
                    acc += v * *s;
                }
                out[p * q + i] = acc * h + later;
            }
            let mut full = zero;
            for (w, v) in self.rule.weights.iter().zip(fp) {
                full += v * *w;
            }
            later += full * h;
        }
        out
    }

    /// Barycentric interpolation of node values at `t`; zero below the mesh.
    pub fn interpolate(&self, values: &[Complex<T>], t: T) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        if t <= self.start() {
            return zero;
        }
        let p = self
            .breaks
            .partition_point(|b| *b < t)
            .clamp(1, self.panels())
            - 1;
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let x = (T::lit(2.0) * t - a - b) / (b - a);
        let q = self.rule.len();
        let vals = &values[p * q..(p + 1) * q];
        let (mut num, mut den) = (zero, T::zero());
        for ((xj, wj), v) in self.rule.nodes.iter().zip(&self.bary).zip(vals) {
            let d = x - *xj;
            if d == T::zero() {
                return *v;
            }
            let c = *wj / d;
            num += v * c;
            den += c;
        }
        num / den
    }
}

/// Per-mode samples `R_k(t_i)` on a shared mesh (zero for `t <= pi N`).
#[derive(Debug, Clone)]
pub struct GridFunctionSequence<T> {
    mesh: Arc<Mesh<T>>,
    k_max: i64,
    values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> GridFunctionSequence<T> {
    pub fn zeros(mesh: Arc<Mesh<T>>, k_max: i64) -> Self {
        let n = mesh.len();
        let modes = (2 * k_max + 1) as usize;
        Self {
            mesh,
            k_max,
            values: vec![vec![Complex::new(T::zero(), T::zero()); n]; modes],
        }
    }

    /// Samples `f(k, t)` at every node.
    pub fn from_fn(
        mesh: Arc<Mesh<T>>,
        k_max: i64,
        mut f: impl FnMut(i64, T) -> Complex<T>,
    ) -> Self {
        let values = (-k_max..=k_max)
            .map(|k| mesh.nodes().iter().map(|&t| f(k, t)).collect())
            .collect();
        Self {
            mesh,
            k_max,
            values,
        }
    }

    /// Wraps node values, one vector per mode `-K..=K`.
    pub fn from_values(
        mesh: Arc<Mesh<T>>,
        k_max: i64,
        values: Vec<Vec<Complex<T>>>,
    ) -> Result<Self> {
        let modes = (2 * k_max + 1) as usize;
        if values.len() != modes {
            return Err(Error::ShapeMismatch {
                expected: modes,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| v.len() != mesh.len()) {
            return Err(Error::ShapeMismatch {
                expected: mesh.len(),
                got: v.len(),
            });
        }
        Ok(Self {
            mesh,
            k_max,
            values,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn times(&self) -> &[T] {
        self.mesh.nodes()
    }

    /// Node values of mode `k`.
    pub fn mode(&self, k: i64) -> &[Complex<T>] {
        &self.values[(k + self.k_max) as usize]
    }

    pub fn modes(&self) -> &[Vec<Complex<T>>] {
        &self.values
    }

    /// Interpolated `R_k(t)`.
    pub fn eval(&self, k: i64, t: T) -> Complex<T> {
        self.mesh.interpolate(self.mode(k), t)
    }

    /// All modes at node `i`.
    pub fn at_node(&self, i: usize) -> ComplexSequence<T> {
        ComplexSequence::new(-self.k_max, self.values.iter().map(|v| v[i]).collect())
    }

    /// `self - other` on the same mesh.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) || self.k_max != other.k_max {
            return Err(Error::InvalidConfig(
                "grid functions live on different meshes".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(Self {
            mesh: self.mesh.clone(),
            k_max: self.k_max,
            values,
        })
    }

    /// Largest node value over all modes.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }
}

/// Mesh suited to `table` at accuracy `quad`.
pub fn mesh_for<T: Real>(
    table: &ResonanceTable<T>,
    n_cut: i64,
    quad: &QuadSpec<T>,
) -> Result<Arc<Mesh<T>>> {
    let omega = T::from_int(2 * table.max_frequency() + 2);
    Ok(Arc::new(Mesh::build(n_cut, omega, quad)?))
}

/// Output of [`apply_t_split`].
#[derive(Debug, Clone)]
pub struct TSplit<T> {
    /// `T(R)` from the full cubic.
    pub full: GridFunctionSequence<T>,
    pub t0: GridFunctionSequence<T>,
    pub t1: GridFunctionSequence<T>,
    pub t2: GridFunctionSequence<T>,
    /// Remainder bound of the integrated-by-parts tail beyond `T_max`, per mode.
    pub mode_tail_bounds: Vec<T>,
}

impl<T: Real> TSplit<T> {
    pub fn tail_bound(&self) -> T {
        self.mode_tail_bounds
            .iter()
            .copied()
            .fold(T::zero(), T::max)
    }
}

struct ModeOut<T> {
    full: Vec<Complex<T>>,
    parts: [Vec<Complex<T>>; 3],
    bound: T,
}

/// `T(R)` with its decomposition by order in `R`.
pub fn apply_t_split<T: Real>(
    r: &GridFunctionSequence<T>,
    table: &ResonanceTable<T>,
    n_cut: i64,
    quad: &QuadSpec<T>,
) -> Result<TSplit<T>> {
    let mesh = r.mesh().clone();
    let k_max = table.k_max();
    if r.k_max() != k_max {
        return Err(Error::ShapeMismatch {
            expected: table.modes(),
            got: r.modes().len(),
        });
    }
    if mesh.n_cut() != n_cut {
        return Err(Error::InvalidConfig(format!(
            "mesh built for N = {}, got N = {n_cut}",
            mesh.n_cut()
        )));
    }
    let cut = Cutoff::new(n_cut);
    let alpha = table.alpha_values();
    let moduli: Vec<T> = alpha.iter().map(|a| a.norm_sqr()).collect();
    let nodes = mesh.nodes();
    let eight_pi = T::lit(8.0) * T::PI();
    let zero = Complex::new(T::zero(), T::zero());

    // Per-node weights eta_N/tau and gauge factors e^{-i|alpha_j|^2 L}.
    let weights: Vec<T> = nodes.iter().map(|&t| cut.eval(t) / t).collect();
    let ls: Vec<T> = nodes
        .iter()
        .map(|&t| (T::lit(4.0) * t).ln() / eight_pi)
        .collect();
    let gauge: Vec<Vec<Complex<T>>> = ls
        .iter()
        .map(|&l| moduli.iter().map(|w| cis(-*w * l)).collect())
        .collect();
    let t_end = mesh.end();
    let prefactor = Complex::new(T::zero(), -T::one() / eight_pi);

    let outs: Vec<ModeOut<T>> = (-k_max..=k_max)
        .into_par_iter()
        .map(|k| {
            let ik = (k + k_max) as usize;
            let entries = table.entries(k);
            let a = alpha[ik];
            let rk = r.mode(k);
            let mut f_full = Vec::with_capacity(nodes.len());
            let mut f = [
                Vec::with_capacity(nodes.len()),
                Vec::with_capacity(nodes.len()),
                Vec::with_capacity(nodes.len()),
            ];
            for (i, &t) in nodes.iter().enumerate() {
                let g = &gauge[i];
                let ga = |j: i64| alpha[(j + k_max) as usize] * g[(j + k_max) as usize];
                let gr = |j: i64| r.values[(j + k_max) as usize][i] * g[(j + k_max) as usize];
                let (mut s0, mut s1, mut s2, mut sf) = (zero, zero, zero, zero);
                for e in entries {
                    let ph = cis(-T::from_int(e.m) * t);
                    let (a1, a2, a3) = (ga(e.j1), ga(e.j2).conj(), ga(e.j3));
                    let (r1, r2, r3) = (gr(e.j1), gr(e.j2).conj(), gr(e.j3));
                    s0 += ph * (a1 * a2 * a3);
                    s1 += ph * (r1 * a2 * a3 + a1 * r2 * a3 + a1 * a2 * r3);
                    s2 += ph * (r1 * r2 * a3 + r1 * a2 * r3 + a1 * r2 * r3 + r1 * r2 * r3);
                    sf += ph * ((a1 + r1) * (a2 + r2) * (a3 + r3));
                }
                let back = cis(moduli[ik] * ls[i]);
                let x = rk[i];
                let re = T::lit(2.0) * (a.conj() * x).re;
                let xx = x.norm_sqr();
                let w = weights[i];
                f[0].push(back * s0 * w);
                f[1].push((back * s1 - a * re) * w);
                f[2].push((back * s2 - (a * xx + x * re + x * xx)) * w);
                let b = a + x;
                f_full.push((back * sf - b * (b.norm_sqr() - moduli[ik])) * w);
            }
            // R-free tail beyond T_max, integrated by parts once.
            let mut tail = zero;
            let mut bound = T::zero();
            for e in entries {
                let amp = alpha[(e.j1 + k_max) as usize]
                    * alpha[(e.j2 + k_max) as usize].conj()
                    * alpha[(e.j3 + k_max) as usize];
                let lam = e.lambda / eight_pi;
                let g = cis(lam * (T::lit(4.0) * t_end).ln()) / t_end;
                let dg = g * Complex::new(-T::one(), lam) / t_end;
                let im = Complex::new(T::zero(), T::from_int(e.m));
                tail += amp * cis(-T::from_int(e.m) * t_end) * (g / im + dg / (im * im));
                let mf = T::from_int(e.m);
                bound += amp.norm()
                    * (Complex::new(T::one(), -lam) * Complex::new(T::lit(2.0), -lam)).norm()
                    / (T::lit(2.0) * mf * mf * t_end * t_end);
            }
            let cuts: Vec<T> = nodes.iter().map(|&t| cut.eval(t)).collect();
            let finish = |integrand: &[Complex<T>], extra: Complex<T>| -> Vec<Complex<T>> {
                mesh.suffix_integrals(integrand)
                    .into_iter()
                    .zip(&cuts)
                    .map(|(v, c)| prefactor * (v + extra) * *c)
                    .collect()
            };
            let full = finish(&f_full, tail);
            let parts = [
                finish(&f[0], tail),
                finish(&f[1], zero),
                finish(&f[2], zero),
            ];
            ModeOut {
                full,
                parts,
                bound: bound / eight_pi,
            }
        })
        .collect();

    let mut full = Vec::with_capacity(outs.len());
    let mut p0 = Vec::with_capacity(outs.len());
    let mut p1 = Vec::with_capacity(outs.len());
    let mut p2 = Vec::with_capacity(outs.len());
    let mut bounds = Vec::with_capacity(outs.len());
    for o in outs {
        let [a, b, c] = o.parts;
        full.push(o.full);
        p0.push(a);
        p1.push(b);
        p2.push(c);
        bounds.push(o.bound);
    }
    if let Some(worst) = bounds.iter().copied().reduce(T::max) {
        if worst > quad.quad_tol {
            return Err(Error::QuadratureNonConvergence {
                bound: worst.to_f64().unwrap(),
                tol: quad.quad_tol.to_f64().unwrap(),
            });
        }
    }
    let wrap = |v| GridFunctionSequence {
        mesh: mesh.clone(),
        k_max,
        values: v,
    };
    Ok(TSplit {
        full: wrap(full),
        t0: wrap(p0),
        t1: wrap(p1),
        t2: wrap(p2),
        mode_tail_bounds: bounds,
    })
}

/// `T(R)` on the mesh of `r`.
pub fn apply_t<T: Real>(
    r: &GridFunctionSequence<T>,
    table: &ResonanceTable<T>,
    n_cut: i64,
    quad: &QuadSpec<T>,
) -> Result<GridFunctionSequence<T>> {
    Ok(apply_t_split(r, table, n_cut, quad)?.full)
}

/// Largest window index whose extended window fits in the mesh.
pub fn nu_max<T: Real>(mesh: &Mesh<T>) -> i64 {
    ((mesh.end() / T::PI()).floor().to_i64().unwrap() - 3).max(-1)
}

/// Window samples `[nu][k]` of `g` on the extended windows.
pub fn window_samples<T: Real>(
    g: &GridFunctionSequence<T>,
    nu_range: std::ops::RangeInclusive<i64>,
    n: usize,
) -> Result<Vec<Vec<WindowSamples<T>>>> {
    let top = nu_max(g.mesh());
    if *nu_range.end() > top || *nu_range.start() < 0 {
        return Err(Error::InvalidConfig(format!(
            "windows {}..={} outside the mesh (nu <= {top})",
            nu_range.start(),
            nu_range.end()
        )));
    }
    nu_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|nu| {
            let w = WindowSpec::new(nu, n)?;
            Ok((-g.k_max()..=g.k_max())
                .map(|k| WindowSamples::from_fn(w, |t| g.eval(k, t)))
                .collect())
        })
        .collect()
}

/// `X^s_p` surrogate norm over every window that fits the mesh.
pub fn xsp<T: Real>(g: &GridFunctionSequence<T>, quad: &QuadSpec<T>) -> Result<T> {
    let windows = window_samples(g, 0..=nu_max(g.mesh()), quad.window_samples)?;
    norms::xsp_norm(&windows, quad.s, quad.p)
}

/// `|| R - T(R) ||` in the `X^s_p` surrogate.
pub fn residual<T: Real>(
    r: &GridFunctionSequence<T>,
    table: &ResonanceTable<T>,
    n_cut: i64,
    quad: &QuadSpec<T>,
) -> Result<T> {
    let next = apply_t(r, table, n_cut, quad)?;
    xsp(&r.sub(&next)?, quad)
}

/// Outcome of [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardReport<T> {
    pub solution: GridFunctionSequence<T>,
    /// `||R^{n+1} - R^n||`, one per iteration.
    pub gaps: Vec<T>,
    /// Successive gap ratios.
    pub ratios: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `||R - T(R)||` at the returned iterate.
    pub residual: T,
    pub tail_bound: T,
}

fn check_alpha<T: Real>(alpha: &ComplexSequence<T>, table: &ResonanceTable<T>) -> Result<()> {
    let a = alpha.truncated(table.k_max())?;
    if a.max_abs_diff(table.alpha()) != T::zero() {
        return Err(Error::InvalidConfig(
            "datum differs from the one the table was built with".into(),
        ));
    }
    Ok(())
}

/// Picard iteration `R <- T(R)` from `R = 0`.
pub fn picard_solve<T: Real>(
    alpha: &ComplexSequence<T>,
    table: &ResonanceTable<T>,
    n_cut: i64,
    tol: T,
    max_iter: usize,
    quad: &QuadSpec<T>,
) -> Result<PicardReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_alpha(alpha, table)?;
    let mesh = mesh_for(table, n_cut, quad)?;
    let mut r = GridFunctionSequence::zeros(mesh, table.k_max());
    let mut gaps: Vec<T> = Vec::new();
    let mut ratios: Vec<T> = Vec::new();
    let mut streak = 0usize;
    let mut tail_bound = T::zero();
    let diverged = |iteration: usize, ratios: &[T]| Error::Divergence {
        iteration,
        ratios: ratios
            .iter()
            .rev()
            .take(5)
            .rev()
            .map(|v| v.to_f64().unwrap())
            .collect(),
    };
    for it in 1..=max_iter.max(1) {
        let split = apply_t_split(&r, table, n_cut, quad)?;
        tail_bound = split.tail_bound();
        let next = split.full;
        let gap = xsp(&next.sub(&r)?, quad)?;
        if !gap.is_finite() {
            return Err(diverged(it, &ratios));
        }
        if let Some(&prev) = gaps.last() {
            let ratio = if prev > T::zero() {
                gap / prev
            } else {
                T::zero()
            };
            ratios.push(ratio);
            streak = if ratio >= T::one() { streak + 1 } else { 0 };
            if streak >= 3 {
                return Err(diverged(it, &ratios));
            }
        }
        gaps.push(gap);
        r = next;
        if gap < tol {
            let res = residual(&r, table, n_cut, quad)?;
            return Ok(PicardReport {
                solution: r,
                gaps,
                ratios,
                iterations: it,
                converged: true,
                residual: res,
                tail_bound,
            });
        }
    }
    let res = residual(&r, table, n_cut, quad)?;
    Ok(PicardReport {
        solution: r,
        gaps,
        iterations: max_iter.max(1),
        ratios,
        converged: false,
        residual: res,
        tail_bound,
    })
}

/// Bisection for the scale where iteration on `lambda alpha` stops converging.
#[derive(Debug, Clone)]
pub struct ThresholdReport<T> {
    /// Largest scale seen to converge.
    pub converged_below: T,
    /// Smallest scale seen to diverge (or fail to converge).
    pub diverged_above: T,
    /// `(lambda, converged)` for every probe.
    pub probes: Vec<(T, bool)>,
}

/// Bisects `lambda` in `[lo, hi]`; `lo` must converge and `hi` must not.
#[allow(clippy::too_many_arguments)]
pub fn smallness_threshold<T: Real>(
    alpha: &ComplexSequence<T>,
    k_max: i64,
    n_cut: i64,
    lo: T,
    hi: T,
    steps: usize,
    tol: T,
    max_iter: usize,
    quad: &QuadSpec<T>,
) -> Result<ThresholdReport<T>> {
    let mut probes = Vec::new();
    let mut run = |lambda: T| -> Result<bool> {
        let a = alpha.scaled(Complex::new(lambda, T::zero()));
        let table = ResonanceTable::build(k_max, &a)?;
        let ok = match picard_solve(&a, &table, n_cut, tol, max_iter, quad) {
            Ok(rep) => rep.converged,
            Err(Error::Divergence { .. }) | Err(Error::QuadratureNonConvergence { .. }) => false,
            Err(e) => return Err(e),
        };
        probes.push((lambda, ok));
        Ok(ok)
    };
    if !run(lo)? {
        return Err(Error::InvalidConfig(format!(
            "iteration does not converge at the lower scale {lo}"
        )));
    }
    if run(hi)? {
        return Err(Error::InvalidConfig(format!(
            "iteration converges at the upper scale {hi}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let mid = (a + b) * T::lit(0.5);
        if run(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(ThresholdReport {
        converged_below: a,
        diverged_above: b,
        probes,
    })
}
