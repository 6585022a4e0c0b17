//! Lowest eigenvalue of `K = a|Q| + b|P|` and the constant `C = E₀²/(4abħ)`.
//!
//! `K` is diagonalized in the ground-state sector of [`crate::basis`]. The
//! basis oscillator length is chosen as `√(ħb/a)`: with it the matrix of `K`
//! is exactly `√(abħ)` times the matrix at `a = b = ħ = 1`, so `C` does not
//! depend on `a`, `b` or `ħ` beyond rounding.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{abs_p_from_abs_q, abs_q_matrix, BasisMatrix, BasisSpec, Operator, Sector};
use crate::covariant::{DensityOperator, UniformGrid};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen_lowest;
use crate::transport::GridDensity;

/// Parameters of `K = a|Q| + b|P|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSpec {
    a: f64,
    b: f64,
    basis: BasisSpec,
}

impl KSpec {
    pub fn new(a: f64, b: f64, basis: BasisSpec) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let length = (basis.hbar() * b / a).sqrt();
        Ok(Self { a, b, basis: basis.with_length(length)? })
    }

    /// `a = b = 1` in the ground-state sector of dimension `d`.
    pub fn symmetric(dimension: usize, size: usize, hbar: f64) -> Result<Self> {
        Self::new(1.0, 1.0, BasisSpec::ground_sector(dimension, size, hbar)?)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    /// Same operator in a basis of a different size.
    pub fn with_size(&self, size: usize) -> Result<Self> {
        Self::new(self.a, self.b, self.basis.truncated(size)?)
    }
}

/// The matrices of `|Q|`, `|P|` and `K` in the basis of `spec`.
pub fn k_matrices(spec: &KSpec) -> Result<(BasisMatrix, BasisMatrix, BasisMatrix)> {
    let q = abs_q_matrix(&spec.basis)?;
    let p = abs_p_from_abs_q(&q);
    let entries = &q.entries * spec.a + &p.entries * spec.b;
    let k = BasisMatrix { spec: spec.basis, entries, label: Operator::K { a: spec.a, b: spec.b } };
    Ok((q, p, k))
}

/// Lowest eigenvalue of `K` in the basis of `spec`.
pub fn lowest_eigenvalue(spec: &KSpec) -> Result<f64> {
    let (_, _, k) = k_matrices(spec)?;
    Ok(symmetric_eigen_lowest(&k.entries, 1)?.eigenvalues[0])
}

/// Ground state of `K` and the derived constant.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateResult {
    pub schema: u32,
    pub dimension: usize,
    pub a: f64,
    pub b: f64,
    pub hbar: f64,
    #[serde(rename = "N")]
    pub size: usize,
    pub sector: Sector,
    /// Oscillator length of the basis, `√(ħb/a)`.
    pub length: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `(N, E₀(N))` over the ladder `N/4, N/2, N`.
    pub convergence: Vec<(usize, f64)>,
    /// Unit eigenvector, sign fixed so that the first coefficient is positive.
    pub coefficients: Vec<f64>,
    /// Distance to the second Ritz value.
    pub gap: f64,
    /// `‖Kψ − E₀ψ‖` in the truncated basis.
    pub residual: f64,
    /// Largest coefficient on basis functions that are not Fourier invariant.
    #[serde(rename = "fourierDefect")]
    pub fourier_defect: f64,
    #[serde(skip)]
    pub basis: BasisSpec,
}

impl GroundStateResult {
    /// `ΔQ = ⟨ψ| |Q| |ψ⟩` and `ΔP = ⟨ψ| |P| |ψ⟩`.
    pub fn uncertainty_pair(&self) -> Result<UncertaintyPair> {
        let m = DensityOperator::pure(self.basis, &self.coefficients)?;
        uncertainty_product_check(&m)
    }

    /// Successive differences `E₀(N_i) − E₀(N_{i+1})` along the ladder.
    pub fn ladder_steps(&self) -> Vec<f64> {
        self.convergence.windows(2).map(|w| w[0].1 - w[1].1).collect()
    }
}

/// Sizes `N/4, N/2, N`, dropping those below 2.
fn ladder(size: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = [size / 4, size / 2, size].into_iter().filter(|&n| n >= 2).collect();
    sizes.dedup();
    sizes
}

/// Diagonalizes `K` and returns `E₀`, `C = E₀²/(4abħ)` and the ground state.
pub fn optimal_constant(spec: &KSpec) -> Result<GroundStateResult> {
    let basis = spec.basis;
    let sizes = ladder(basis.size());
    let mut convergence = Vec::with_capacity(sizes.len());
    for &n in &sizes[..sizes.len() - 1] {
        convergence.push((n, lowest_eigenvalue(&spec.with_size(n)?)?));
    }
    let (_, _, k) = k_matrices(spec)?;
    let eig = symmetric_eigen_lowest(&k.entries, 2)?;
    let e0 = eig.eigenvalues[0];
    convergence.push((basis.size(), e0));
    if !(e0 > 0.0) {
        return Err(Error::Eigen(format!("lowest eigenvalue {e0} is not positive")));
    }
    let mut psi = eig.eigenvector(0);
    if psi[0] < 0.0 {
        psi = -psi;
    }
    let residual = (&k.entries * &psi - &psi * e0).norm();
    let fourier_defect = (0..basis.size())
        .filter(|&i| !basis.is_fourier_invariant(i))
        .map(|i| psi[i].abs())
        .fold(0.0, f64::max);
    Ok(GroundStateResult {
        schema: 1,
        dimension: basis.dimension(),
        a: spec.a,
        b: spec.b,
        hbar: basis.hbar(),
        size: basis.size(),
        sector: basis.sector(),
        length: basis.length(),
        e0,
        c: e0 * e0 / (4.0 * spec.a * spec.b * basis.hbar()),
        convergence,
        coefficients: psi.iter().copied().collect(),
        gap: eig.eigenvalues[1] - e0,
        residual,
        fourier_defect,
        basis,
    })
}

/// Uncertainty product of the oscillator ground state divided by `ħ`,
/// `(⟨0| |Q| |0⟩)²/ħ`, by quadrature.
pub fn coherent_constant(dimension: usize, hbar: f64) -> Result<f64> {
    let spec = BasisSpec::ground_sector(dimension, 2, hbar)?;
    let q = abs_q_matrix(&spec)?;
    let p = abs_p_from_abs_q(&q);
    Ok(q.entries[(0, 0)] * p.entries[(0, 0)] / hbar)
}

/// Ground-state wavefunction sampled on a grid.
#[derive(Debug, Clone)]
pub struct WavefunctionTable {
    pub points: Vec<f64>,
    pub psi: Vec<f64>,
    /// `|ψ|²` for `d = 1`, `r^{d−1}|ψ(r)|²` for the radial profile;
    /// normalized on the grid.
    pub density: GridDensity,
    /// Grid mass of the density before normalization.
    pub mass: f64,
    /// `⟨ψ|φ₀⟩` against the oscillator ground state of the same length,
    /// by grid quadrature.
    pub overlap: f64,
}

impl WavefunctionTable {
    /// CSV `x,psi,density`.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let mut out = String::from("x,psi,density\n");
        for ((x, p), d) in self.points.iter().zip(&self.psi).zip(self.density.values()) {
            out.push_str(&format!("{},{},{}\n", fmt_f64(*x), fmt_f64(*p), fmt_f64(*d)));
        }
        out
    }
}

/// Synthesizes `ψ = Σ c_n φ_n` of a ground-state result on `grid`. For
/// `d ≥ 2` the grid is a radius grid and must not extend below zero.
pub fn ground_state_wavefunction(result: &GroundStateResult, grid: &UniformGrid) -> Result<WavefunctionTable> {
    let basis = result.basis;
    let radial = basis.sector() == Sector::RadialS;
    if radial && grid.origin() < 0.0 {
        return Err(Error::InvalidParameter("radial grids start at r ≥ 0".into()));
    }
    let d = basis.dimension() as i32;
    let points: Vec<f64> = grid.points().collect();
    let mut psi = Vec::with_capacity(points.len());
    let mut dens = Vec::with_capacity(points.len());
    let mut overlap = 0.0;
    for &x in &points {
        let vals = basis.position_values(x);
        let v: f64 = result.coefficients.iter().zip(&vals).map(|(c, f)| c * f).sum();
        let jac = if radial { x.powi(d - 1) } else { 1.0 };
        psi.push(v);
        dens.push(jac * v * v);
        overlap += jac * v * vals[0] * grid.step();
    }
    let mass = grid.step() * dens.iter().sum::<f64>();
    let density = GridDensity::normalized(grid.origin(), grid.step(), dens)?;
    Ok(WavefunctionTable { points, psi, density, mass, overlap })
}

/// A point `(ΔQ, ΔP) = (tr(m|Q|), tr(m|P|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyPair {
    #[serde(rename = "deltaQ")]
    pub delta_q: f64,
    #[serde(rename = "deltaP")]
    pub delta_p: f64,
}

impl UncertaintyPair {
    pub fn product(&self) -> f64 {
        self.delta_q * self.delta_p
    }
}

/// `|Q|` and `|P|` in one basis, for repeated trace evaluations.
#[derive(Debug, Clone)]
pub struct Observables {
    pub q: BasisMatrix,
    pub p: BasisMatrix,
}

impl Observables {
    pub fn new(basis: &BasisSpec) -> Result<Self> {
        let q = abs_q_matrix(basis)?;
        let p = abs_p_from_abs_q(&q);
        Ok(Self { q, p })
    }

    pub fn pair(&self, m: &DensityOperator) -> Result<UncertaintyPair> {
        if *m.basis() != self.q.spec {
            return Err(Error::InvalidDensity("density operator lives in a different basis".into()));
        }
        Ok(UncertaintyPair { delta_q: m.expectation(&self.q.entries), delta_p: m.expectation(&self.p.entries) })
    }

    /// Pair for a pure state given by coefficients.
    pub fn pure_pair(&self, psi: &DVector<f64>) -> UncertaintyPair {
        UncertaintyPair {
            delta_q: psi.dot(&(&self.q.entries * psi)),
            delta_p: psi.dot(&(&self.p.entries * psi)),
        }
    }
}

/// `(tr(m|Q|), tr(m|P|))` for a density operator in a truncated basis.
pub fn uncertainty_product_check(m: &DensityOperator) -> Result<UncertaintyPair> {
    Observables::new(m.basis())?.pair(m)
}

/// Where a point of the admissible region comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "lambda")]
pub enum RegionSource {
    /// The optimal state dilated by `λ`.
    Dilation(f64),
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    #[serde(flatten)]
    pub pair: UncertaintyPair,
    pub source: RegionSource,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleRegion {
    /// `C` at the truncation used.
    #[serde(rename = "C")]
    pub constant: f64,
    pub hbar: f64,
    pub optimum: UncertaintyPair,
    pub points: Vec<RegionPoint>,
}

/// Number of dilation factors, `λ = 2^{−2}, …, 2^{2}` in equal log steps.
pub const DILATION_FAMILY_SIZE: usize = 21;

/// Dilated copies of the optimal pair followed by `samples` random density
/// operators drawn in `basis` (one degree of freedom).
pub fn admissible_region(basis: &BasisSpec, samples: usize, seed: u64) -> Result<AdmissibleRegion> {
    if basis.dimension() != 1 {
        return Err(Error::InvalidParameter("the admissible region is computed for one degree of freedom".into()));
    }
    let k = KSpec::symmetric(1, ground_sector_size(basis), basis.hbar())?;
    let ground = optimal_constant(&k)?;
    let optimum = ground.uncertainty_pair()?;
    let mut points = Vec::with_capacity(DILATION_FAMILY_SIZE + samples);
    for i in 0..DILATION_FAMILY_SIZE {
        let lambda = 2f64.powf(-2.0 + 4.0 * i as f64 / (DILATION_FAMILY_SIZE - 1) as f64);
        points.push(RegionPoint {
            pair: UncertaintyPair { delta_q: lambda * optimum.delta_q, delta_p: optimum.delta_p / lambda },
            source: RegionSource::Dilation(lambda),
        });
    }
    let obs = Observables::new(basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let m = DensityOperator::random(*basis, &mut rng)?;
        points.push(RegionPoint { pair: obs.pair(&m)?, source: RegionSource::Random });
    }
    Ok(AdmissibleRegion { constant: ground.c, hbar: basis.hbar(), optimum, points })
}

/// Even-sector size matching a one-dimensional basis.
fn ground_sector_size(basis: &BasisSpec) -> usize {
    match basis.sector() {
        Sector::FullHermite => basis.size().div_ceil(2).max(2),
        _ => basis.size(),
    }
}

/// Dense `ψψᵀ`.
pub fn projector(psi: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(psi);
    &v * v.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ladder_sizes() {
        assert_eq!(ladder(128), vec![32, 64, 128]);
        assert_eq!(ladder(4), vec![2, 4]);
        assert_eq!(ladder(2), vec![2]);
    }

    #[test]
    fn coherent_constants_low_dimensions() {
        assert_abs_diff_eq!(coherent_constant(1, 1.0).unwrap(), 1.0 / PI, epsilon = 1e-12);
        assert_abs_diff_eq!(coherent_constant(2, 1.0).unwrap(), PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coherent_constant(3, 2.5).unwrap(), 4.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn small_basis_ground_state() {
        let r = optimal_constant(&KSpec::symmetric(1, 16, 1.0).unwrap()).unwrap();
        assert!(r.e0 > 0.0);
        assert!(r.residual < 1e-10);
        assert!(r.coefficients[0] > 0.0);
        let norm: f64 = r.coefficients.iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        assert_eq!(r.convergence.len(), 3);
        // variational: the optimum beats the coherent state
        assert!(r.c < 1.0 / PI);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let basis = BasisSpec::ground_sector(1, 4, 1.0).unwrap();
        assert!(KSpec::new(0.0, 1.0, basis).is_err());
        assert!(KSpec::new(1.0, -2.0, basis).is_err());
    }

    #[test]
    fn json_has_documented_keys() {
        let r = optimal_constant(&KSpec::symmetric(2, 8, 1.0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&crate::io::to_json(&r).unwrap()).unwrap();
        for key in ["schema", "dimension", "a", "b", "hbar", "N", "sector", "E0", "C", "convergence", "coefficients"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["sector"], "radial-s");
        assert_eq!(v["convergence"][0][0], 2);
    }
}
