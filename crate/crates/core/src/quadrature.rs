//! Gauss–Legendre rules with panel integration matrices, and adaptive
//! Gauss–Kronrod integration for complex integrands.

use num_complex::Complex;

use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule, nodes ascending. Newton iteration from Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Matrix `S[i][j] = int_{x_i}^{1} l_j(x) dx` for the Lagrange basis on
    /// the nodes, so `sum_j S[i][j] f(x_j)` integrates `f` from node `i` to the
    /// right end of the panel.
    pub fn tail_matrix(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let x: Vec<f64> = self.nodes.iter().map(|v| v.to_f64().unwrap()).collect();
        let w: Vec<f64> = self.weights.iter().map(|v| v.to_f64().unwrap()).collect();
        // l_j = sum_q c_jq P_q with c_jq = (2q+1)/2 w_j P_q(x_j); exact for q < n.
        let mut p = vec![vec![0.0; n + 1]; n];
        for (j, &xj) in x.iter().enumerate() {
            for (q, slot) in p[j].iter_mut().enumerate() {
                *slot = legendre(q, xj).0;
            }
        }
        let mut s = vec![vec![T::zero(); n]; n];
        for (i, &xi) in x.iter().enumerate() {
            // int_x^1 P_0 = 1 - x, int_x^1 P_q = (P_{q-1}(x) - P_{q+1}(x))/(2q+1).
            let pi: Vec<f64> = (0..=n).map(|q| legendre(q, xi).0).collect();
            let ints: Vec<f64> = (0..n)
                .map(|q| {
                    if q == 0 {
                        1.0 - xi
                    } else {
                        (pi[q - 1] - pi[q + 1]) / (2.0 * q as f64 + 1.0)
                    }
                })
                .collect();
            for j in 0..n {
                let v: f64 = (0..n)
                    .map(|q| (2.0 * q as f64 + 1.0) / 2.0 * w[j] * p[j][q] * ints[q])
                    .sum();
                s[i][j] = T::lit(v);
            }
        }
        s
    }

    /// Barycentric weights for interpolation through the nodes.
    pub fn barycentric_weights(&self) -> Vec<T> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(j, (&x, &w))| {
                let v = ((T::one() - x * x) * w).sqrt();
                if j % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: FnMut(T) -> Complex<T>>(f: &mut F, a: T, b: T) -> (Complex<T>, T) {
    let c = (a + b) * T::lit(0.5);
    let h = (b - a) * T::lit(0.5);
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = h * T::lit(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        kron += s * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss += s * T::lit(WG[i / 2]);
        }
    }
    ((kron * h), ((kron - gauss) * h).norm())
}

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: Complex<T>,
    pub error: T,
    pub converged: bool,
}

/// Adaptive 15-point Gauss–Kronrod integration of `f` over `[a, b]` by
/// repeated bisection of the panel with the largest error estimate.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> Complex<T>>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    max_panels: usize,
) -> Integral<T> {
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total_err: T = panels.iter().map(|p| p.3).sum();
        if total_err <= abs_tol || panels.len() >= max_panels {
            // Sum in position order for reproducibility.
            panels.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let value = panels
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.2);
            return Integral {
                value,
                error: total_err,
                converged: total_err <= abs_tol,
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold(
                (0, -T::one()),
                |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best },
            );
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = (pa + pb) * T::lit(0.5);
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}
