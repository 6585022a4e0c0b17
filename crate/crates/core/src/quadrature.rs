//! Gauss rules on the half line `[0, ∞)` for the weights `r^γ e^{-r²}`.
//!
//! The recurrence coefficients of the orthogonal polynomials are obtained by
//! a discretized Stieltjes procedure: the weight is sampled on Gauss–Legendre
//! panels in the variable `u = √r` (which resolves the node clustering at the
//! hard edge `r = 0`), and the three-term recurrence is run on the sampled
//! measure. Nodes are the eigenvalues of the Jacobi matrix, polished by a
//! Newton step; weights come from the Christoffel function and are kept in
//! log form because the outermost ones underflow.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

/// Largest supported rule order.
pub const MAX_ORDER: usize = 512;

const PANEL_POINTS: usize = 32;
const PANEL_WIDTH_U: f64 = 0.125;
const RESCALE: f64 = 1e150;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The weight `r^γ e^{-r²}` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineWeight {
    exponent: f64,
}

impl HalfLineWeight {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::Quadrature(format!("weight exponent must be >= 0, got {exponent}")));
        }
        Ok(Self { exponent })
    }

    /// `e^{-x²}` on the half line.
    pub fn gaussian() -> Self {
        Self { exponent: 0.0 }
    }

    /// `r^{d-1} e^{-r²}`, the radial measure in `d` dimensions.
    pub fn radial(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Quadrature("dimension must be positive".into()));
        }
        Self::new((dimension - 1) as f64)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `∫₀^∞ r^k · r^γ e^{-r²} dr = Γ((k+γ+1)/2) / 2`, in log form.
    pub fn ln_moment(&self, k: f64) -> f64 {
        ln_gamma(0.5 * (k + self.exponent + 1.0)) - std::f64::consts::LN_2
    }

    fn ln_density(&self, r: f64) -> f64 {
        let power = if self.exponent == 0.0 { 0.0 } else { self.exponent * r.ln() };
        power - r * r
    }
}

/// A Gauss rule for a [`HalfLineWeight`].
#[derive(Debug, Clone)]
pub struct HalfLineRule {
    pub weight: HalfLineWeight,
    pub nodes: Vec<f64>,
    /// Natural logarithms of the weights; the outermost weights are far
    /// below the smallest positive `f64`.
    pub ln_weights: Vec<f64>,
}

impl HalfLineRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Weights as plain numbers (the smallest ones flush to zero).
    pub fn weights(&self) -> Vec<f64> {
        self.ln_weights.iter().map(|w| w.exp()).collect()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.ln_weights).map(|(&x, &lw)| lw.exp() * f(x)).sum()
    }
}

/// Gauss rule of the given order for `weight`. Exact (to rounding) for
/// polynomials in `r` of degree up to `2·order − 1`.
pub fn gauss_quadrature_halfline(weight: HalfLineWeight, order: usize) -> Result<HalfLineRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Quadrature(format!("order must be in 1..={MAX_ORDER}, got {order}")));
    }
    let (alpha, beta) = recurrence_coefficients(weight, order)?;
    let off: Vec<f64> = beta[1..].iter().map(|b| b.sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&alpha, &off)?;

    let mut ln_weights = Vec::with_capacity(order);
    for x in nodes.iter_mut() {
        let ev = evaluate_orthonormal(&alpha, &beta, *x);
        if ev.derivative != 0.0 && ev.derivative.is_finite() {
            let step = ev.value / ev.derivative;
            if step.abs() < 1e-6 * (1.0 + x.abs()) {
                *x -= step;
            }
        }
        let ev = evaluate_orthonormal(&alpha, &beta, *x);
        let lw = -(ev.sum_squares.ln() + 2.0 * ev.ln_scale);
        if !lw.is_finite() {
            return Err(Error::Quadrature(format!("non-finite weight at node {x}")));
        }
        ln_weights.push(lw);
    }
    for pair in nodes.windows(2) {
        if !(pair[1] > pair[0]) || pair[0] < 0.0 {
            return Err(Error::Quadrature("nodes failed to separate".into()));
        }
    }
    Ok(HalfLineRule { weight, nodes, ln_weights })
}

struct Evaluation {
    /// `p_n(x)` up to the positive factor `e^{ln_scale}/√β_n`.
    value: f64,
    derivative: f64,
    /// `Σ_{k<n} p_k(x)²` divided by `e^{2·ln_scale}`.
    sum_squares: f64,
    ln_scale: f64,
}

fn evaluate_orthonormal(alpha: &[f64], beta: &[f64], x: f64) -> Evaluation {
    let n = alpha.len();
    let mut p_prev = 0.0;
    let mut p = 1.0 / beta[0].sqrt();
    let mut d_prev = 0.0;
    let mut d = 0.0;
    let mut sum = 0.0;
    let mut ln_scale = 0.0;
    for k in 0..n {
        sum += p * p;
        let sb = if k > 0 { beta[k].sqrt() } else { 0.0 };
        let p_next = (x - alpha[k]) * p - sb * p_prev;
        let d_next = p + (x - alpha[k]) * d - sb * d_prev;
        if k + 1 == n {
            return Evaluation { value: p_next, derivative: d_next, sum_squares: sum, ln_scale };
        }
        let norm = beta[k + 1].sqrt();
        p_prev = p;
        p = p_next / norm;
        d_prev = d;
        d = d_next / norm;
        if p.abs() > RESCALE || d.abs() > RESCALE {
            p /= RESCALE;
            p_prev /= RESCALE;
            d /= RESCALE;
            d_prev /= RESCALE;
            sum /= RESCALE * RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Recurrence coefficients `(α_k, β_k)`, `k < n`, of the orthonormal
/// polynomials for `weight`, with `β_0 = ∫ weight`.
pub(crate) fn recurrence_coefficients(weight: HalfLineWeight, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (xs, sqrt_w) = discretize(weight, n);
    let mu0: f64 = sqrt_w.iter().map(|s| s * s).sum();
    if !(mu0 > 0.0) {
        return Err(Error::Quadrature("weight has no mass".into()));
    }
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    beta[0] = mu0;
    let mut q_prev = vec![0.0; xs.len()];
    let mut q: Vec<f64> = sqrt_w.iter().map(|s| s / mu0.sqrt()).collect();
    for k in 0..n {
        alpha[k] = xs.iter().zip(&q).map(|(x, qi)| x * qi * qi).sum();
        if k + 1 == n {
            break;
        }
        let sb = if k > 0 { beta[k].sqrt() } else { 0.0 };
        let r: Vec<f64> =
            xs.iter().zip(q.iter().zip(&q_prev)).map(|(x, (qi, pi))| (x - alpha[k]) * qi - sb * pi).collect();
        let b: f64 = r.iter().map(|v| v * v).sum();
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Quadrature(format!("Stieltjes procedure broke down at degree {}", k + 1)));
        }
        beta[k + 1] = b;
        let sbn = b.sqrt();
        q_prev = q;
        q = r.into_iter().map(|v| v / sbn).collect();
    }
    Ok((alpha, beta))
}

/// Sample points `r` and `√(quadrature weight · density)` on panels in
/// `u = √r`, covering the support of all polynomials up to degree `2n`.
fn discretize(weight: HalfLineWeight, n: usize) -> (Vec<f64>, Vec<f64>) {
    let r_max = (4.0 * n as f64 + 2.0 * weight.exponent + 2.0).sqrt() + 12.0;
    let u_max = r_max.sqrt();
    let panels = (u_max / PANEL_WIDTH_U).ceil() as usize;
    let h = u_max / panels as f64;
    let (gx, gw) = gauss_legendre(PANEL_POINTS);
    let mut xs = Vec::with_capacity(panels * PANEL_POINTS);
    let mut sw = Vec::with_capacity(panels * PANEL_POINTS);
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let u = a + 0.5 * h * (x + 1.0);
            let r = u * u;
            // dr = 2u du
            let ln_w = (0.5 * h * w * 2.0 * u).ln() + weight.ln_density(r);
            xs.push(r);
            sw.push((0.5 * ln_w).exp());
        }
    }
    (xs, sw)
}
