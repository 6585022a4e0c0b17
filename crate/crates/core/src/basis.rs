//! Truncated harmonic-oscillator bases and the matrices of `|Q|` and `|P|`.
//!
//! One degree of freedom uses Hermite functions `h_n`; `d ≥ 2` uses the
//! `ℓ = 0` radial functions `ρ_k(r) ∝ L_k^{(α)}(r²) e^{-r²/2}` with
//! `α = d/2 − 1`, normalized against `r^{d−1} dr`.
//!
//! `|Q|` is integrated with the half-line Gauss rules of
//! [`crate::quadrature`]: on `[0, ∞)` the integrand `r · (basis product)` is
//! a polynomial times the rule's weight, so the matrix elements are exact up
//! to rounding. `|P|` is never discretized. Every oscillator eigenstate is an
//! eigenvector of the Fourier transform, so `⟨m| |P| |n⟩ = φ̄_m φ_n ⟨m| |Q| |n⟩`
//! with the Fourier eigenvalues `φ_n`.
//!
//! Function values are produced by normalized three-term recurrences that
//! carry a separate logarithmic scale, so neither the Gaussian factor nor the
//! polynomial part over- or underflows (the radial family for `d = 42` has
//! `α = 20`).

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_quadrature_halfline, HalfLineWeight, MAX_ORDER};

const RESCALE: f64 = 1e150;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Which oscillator eigenfunctions a basis retains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    /// `d = 1`, Hermite functions `h_0, h_2, h_4, …`.
    EvenParity,
    /// `d = 1`, Hermite functions `h_0, h_1, h_2, …`.
    FullHermite,
    /// `d ≥ 2`, radial functions with angular momentum zero.
    RadialS,
}

impl Sector {
    pub fn name(&self) -> &'static str {
        match self {
            Sector::EvenParity => "even-parity",
            Sector::FullHermite => "full-hermite",
            Sector::RadialS => "radial-s",
        }
    }
}

/// A truncated oscillator basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    dimension: usize,
    size: usize,
    hbar: f64,
    /// Oscillator length; basis functions are `L^{-d/2} φ(x/L)`.
    length: f64,
    sector: Sector,
}

impl BasisSpec {
    /// The sector carrying the ground state of `a|Q| + b|P|`: even parity for
    /// one degree of freedom, `ℓ = 0` otherwise.
    pub fn ground_sector(dimension: usize, size: usize, hbar: f64) -> Result<Self> {
        let sector = if dimension == 1 { Sector::EvenParity } else { Sector::RadialS };
        Self::new(dimension, size, hbar, sector)
    }

    /// All Hermite functions `h_0 … h_{size−1}` for one degree of freedom.
    pub fn full_hermite(size: usize, hbar: f64) -> Result<Self> {
        Self::new(1, size, hbar, Sector::FullHermite)
    }

    pub fn new(dimension: usize, size: usize, hbar: f64, sector: Sector) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidBasis("dimension must be at least 1".into()));
        }
        if size < 2 {
            return Err(Error::InvalidBasis(format!("basis size must be at least 2, got {size}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidBasis(format!("hbar must be positive, got {hbar}")));
        }
        match (sector, dimension) {
            (Sector::RadialS, 1) => {
                return Err(Error::InvalidBasis("one degree of freedom uses a Hermite sector".into()))
            }
            (Sector::EvenParity | Sector::FullHermite, d) if d != 1 => {
                return Err(Error::InvalidBasis(format!("Hermite sectors need dimension 1, got {d}")))
            }
            _ => {}
        }
        let spec = Self { dimension, size, hbar, length: hbar.sqrt(), sector };
        if spec.quadrature_order() > MAX_ORDER {
            return Err(Error::InvalidBasis(format!(
                "basis size {size} needs a quadrature of order {} (maximum {MAX_ORDER})",
                spec.quadrature_order()
            )));
        }
        Ok(spec)
    }

    /// Same basis with a different oscillator length.
    pub fn with_length(self, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidBasis(format!("oscillator length must be positive, got {length}")));
        }
        Ok(Self { length, ..self })
    }

    /// The first `size` functions of this basis.
    pub fn truncated(self, size: usize) -> Result<Self> {
        let spec = Self::new(self.dimension, size, self.hbar, self.sector)?;
        spec.with_length(self.length)
    }

    /// Default truncation: 128 functions for `d ≤ 3`, 256 above.
    pub fn default_size(dimension: usize) -> usize {
        if dimension <= 3 {
            128
        } else {
            256
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Oscillator label of basis function `k`: the Hermite index for `d = 1`,
    /// the radial quantum number otherwise.
    pub fn quantum_number(&self, k: usize) -> usize {
        match self.sector {
            Sector::EvenParity => 2 * k,
            Sector::FullHermite | Sector::RadialS => k,
        }
    }

    /// Real sign `s_k` with `⟨j| |P| |k⟩ = s_j s_k ⟨j| |Q| |k⟩`.
    ///
    /// For Hermite index `n` the Fourier eigenvalue is `(−i)^n`; on matrix
    /// elements of `|Q|` (nonzero only when `j ≡ k mod 2`) the phase
    /// `i^{n_j − n_k}` factorizes as `(−1)^{⌊n_j/2⌋}(−1)^{⌊n_k/2⌋}`. Radial
    /// `ℓ = 0` states with radial number `k` carry `(−1)^k`.
    pub fn fourier_sign(&self, k: usize) -> f64 {
        let exponent = match self.sector {
            Sector::EvenParity | Sector::FullHermite => self.quantum_number(k) / 2,
            Sector::RadialS => k,
        };
        if exponent % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether basis function `k` is invariant under the Fourier transform.
    pub fn is_fourier_invariant(&self, k: usize) -> bool {
        match self.sector {
            Sector::FullHermite | Sector::EvenParity => self.quantum_number(k).is_multiple_of(4),
            Sector::RadialS => k.is_multiple_of(2),
        }
    }

    /// Radial Laguerre parameter `α = d/2 − 1`.
    fn alpha(&self) -> f64 {
        0.5 * self.dimension as f64 - 1.0
    }

    fn quadrature_order(&self) -> usize {
        match self.sector {
            // degree 1 + 4(N−1) in r
            Sector::EvenParity | Sector::RadialS => 2 * self.size - 1,
            // degree 1 + 2(N−1)
            Sector::FullHermite => self.size,
        }
    }

    /// Unscaled basis function values `φ_k(y)`, `k < size`, at `y = x/L`.
    fn unit_values(&self, y: f64) -> Vec<f64> {
        match self.sector {
            Sector::EvenParity => {
                let all = hermite_functions(2 * (self.size - 1), y);
                all.into_iter().step_by(2).collect()
            }
            Sector::FullHermite => hermite_functions(self.size - 1, y),
            Sector::RadialS => radial_functions(self.size - 1, self.alpha(), y.abs()),
        }
    }

    /// `L^{-d/2} φ_k(x/L)` for every basis function.
    pub fn position_values(&self, x: f64) -> Vec<f64> {
        let scale = self.length.powf(-0.5 * self.dimension as f64);
        self.unit_values(x / self.length).into_iter().map(|v| scale * v).collect()
    }

    /// Moduli of the momentum-space basis functions at `p`; the phases are
    /// given by [`BasisSpec::fourier_phase`].
    pub fn momentum_values(&self, p: f64) -> Vec<f64> {
        let ml = self.hbar / self.length;
        let scale = ml.powf(-0.5 * self.dimension as f64);
        self.unit_values(p / ml).into_iter().map(|v| scale * v).collect()
    }

    /// Fourier eigenvalue of basis function `k` as `(re, im)`: `(−i)^n` for
    /// Hermite index `n`, `(−1)^k` for radial functions.
    pub fn fourier_phase(&self, k: usize) -> (f64, f64) {
        match self.sector {
            Sector::RadialS => (self.fourier_sign(k), 0.0),
            _ => match self.quantum_number(k) % 4 {
                0 => (1.0, 0.0),
                1 => (0.0, -1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, 1.0),
            },
        }
    }

    /// Position-space amplitude `ψ(x) = Σ c_k L^{-d/2} φ_k(x/L)` (for `d ≥ 2`,
    /// `x` is the radius and the result is the radial profile).
    pub fn wavefunction(&self, coefficients: &[f64], x: f64) -> f64 {
        coefficients.iter().zip(self.position_values(x)).map(|(c, v)| c * v).sum()
    }

    /// Momentum-space amplitude `ψ̃(p)` as `(re, im)`.
    pub fn momentum_wavefunction(&self, coefficients: &[f64], p: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, (c, v)) in coefficients.iter().zip(self.momentum_values(p)).enumerate() {
            let (pr, pi) = self.fourier_phase(k);
            re += c * v * pr;
            im += c * v * pi;
        }
        (re, im)
    }
}

/// Operator represented by a [`BasisMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    AbsQ,
    AbsP,
    /// `a|Q| + b|P|`
    K { a: f64, b: f64 },
}

impl Operator {
    pub fn label(&self) -> String {
        match self {
            Operator::AbsQ => "|Q|".into(),
            Operator::AbsP => "|P|".into(),
            Operator::K { a, b } => format!("{a}|Q| + {b}|P|"),
        }
    }
}

/// Dense symmetric matrix of an operator in a truncated basis.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub spec: BasisSpec,
    pub entries: DMatrix<f64>,
    pub label: Operator,
}

impl BasisMatrix {
    /// Row-major CSV, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(|v| crate::io::fmt_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let n = self.entries.nrows();
        let scale = self.entries.amax().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

/// Normalized Hermite function `h_n(x)` (unit mass and frequency, `ħ = 1`).
pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_functions(n, x)[n]
}

/// `h_0(x) … h_nmax(x)`.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    hermite_scaled(nmax, x, -0.5 * x * x - 0.25 * LN_PI)
}

/// Hermite recurrence started from `h_0 = e^{ln_start}`.
fn hermite_scaled(nmax: usize, x: f64, ln_start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut ln_scale = ln_start;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for n in 0..=nmax {
        out.push(cur * ln_scale.exp());
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    out
}

/// Radial functions `ρ_0(r) … ρ_kmax(r)` with Laguerre parameter `alpha`,
/// normalized so that `∫₀^∞ ρ_k(r)² r^{2α+1} dr = 1`.
pub fn radial_functions(kmax: usize, alpha: f64, r: f64) -> Vec<f64> {
    let ln_start = -0.5 * r * r + 0.5 * (std::f64::consts::LN_2 - ln_gamma(alpha + 1.0));
    laguerre_scaled(kmax, alpha, r * r, ln_start)
}

/// Normalized Laguerre recurrence in `t`, started from `e^{ln_start}`.
fn laguerre_scaled(kmax: usize, alpha: f64, t: f64, ln_start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut ln_scale = ln_start;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..=kmax {
        out.push(cur * ln_scale.exp());
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - t) * cur - (kf * (kf + alpha)).sqrt() * prev)
            / ((kf + 1.0) * (kf + alpha + 1.0)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    out
}

/// Basis values folded with the square root of the quadrature weight and
/// the inverse Gaussian, one row per node: `√w_i e^{x_i²/2} φ_k(x_i)`.
fn folded_values(spec: &BasisSpec) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let order = spec.quadrature_order();
    match spec.sector {
        Sector::EvenParity | Sector::FullHermite => {
            let rule = gauss_quadrature_halfline(HalfLineWeight::gaussian(), order)?;
            let nmax = spec.quantum_number(spec.size - 1);
            let rows = rule
                .nodes
                .iter()
                .zip(&rule.ln_weights)
                .map(|(&x, &lw)| {
                    let all = hermite_scaled(nmax, x, 0.5 * lw - 0.25 * LN_PI);
                    match spec.sector {
                        Sector::EvenParity => all.into_iter().step_by(2).collect(),
                        _ => all,
                    }
                })
                .collect();
            Ok((rule.nodes, rows))
        }
        Sector::RadialS => {
            let rule = gauss_quadrature_halfline(HalfLineWeight::radial(spec.dimension)?, order)?;
            let alpha = spec.alpha();
            let c0 = 0.5 * (std::f64::consts::LN_2 - ln_gamma(alpha + 1.0));
            let rows = rule
                .nodes
                .iter()
                .zip(&rule.ln_weights)
                .map(|(&r, &lw)| laguerre_scaled(spec.size - 1, alpha, r * r, 0.5 * lw + c0))
                .collect();
            Ok((rule.nodes, rows))
        }
    }
}

/// `Σ_i f(x_i) v_i v_iᵀ` over the quadrature nodes, times `factor`, with a
/// fixed summation order.
fn assemble(spec: &BasisSpec, f: impl Fn(f64) -> f64, factor: f64) -> Result<DMatrix<f64>> {
    let (nodes, rows) = folded_values(spec)?;
    let n = spec.size;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..=j {
            if spec.sector == Sector::FullHermite && (j + k) % 2 == 1 {
                continue;
            }
            let s: f64 = nodes.iter().zip(&rows).map(|(&x, v)| f(x) * v[j] * v[k]).sum();
            m[(j, k)] = factor * s;
            m[(k, j)] = factor * s;
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("matrix elements are not finite".into()));
    }
    Ok(m)
}

/// Gram matrix `⟨φ_j|φ_k⟩` computed with the same quadrature as the
/// operator matrices.
pub fn gram_matrix(spec: &BasisSpec) -> Result<DMatrix<f64>> {
    let factor = if spec.sector == Sector::RadialS { 1.0 } else { 2.0 };
    assemble(spec, |_| 1.0, factor)
}

/// Matrix of `|Q|` (Euclidean norm of the position vector).
pub fn abs_q_matrix(spec: &BasisSpec) -> Result<BasisMatrix> {
    // Hermite functions live on the whole line: ∫_ℝ |x| h_j h_k = 2∫₀^∞ x h_j h_k
    let factor = if spec.sector == Sector::RadialS { 1.0 } else { 2.0 };
    let entries = assemble(spec, |x| x, factor * spec.length)?;
    Ok(BasisMatrix { spec: *spec, entries, label: Operator::AbsQ })
}

/// Matrix of `|P|` by Fourier conjugation of `|Q|`.
pub fn abs_p_matrix(spec: &BasisSpec) -> Result<BasisMatrix> {
    let q = abs_q_matrix(spec)?;
    Ok(abs_p_from_abs_q(&q))
}

/// `|P|` from an already assembled `|Q|` matrix.
pub fn abs_p_from_abs_q(q: &BasisMatrix) -> BasisMatrix {
    let spec = q.spec;
    let n = spec.size;
    // |Q| scales with L, |P| with ħ/L
    let rescale = spec.hbar / (spec.length * spec.length);
    let entries = DMatrix::from_fn(n, n, |j, k| rescale * spec.fourier_sign(j) * spec.fourier_sign(k) * q.entries[(j, k)]);
    BasisMatrix { spec, entries, label: Operator::AbsP }
}
