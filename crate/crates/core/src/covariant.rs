//! Covariant phase-space observables for one degree of freedom.
//!
//! A density operator `m` generates the observable whose outcome density on
//! input `ρ` is `tr(ρ W(p,q)* m W(p,q))` with respect to `dp dq/(2πħ)`, where
//! `(W(p,q)ψ)(x) = e^{(i/ħ)(−pq/2 − px)} ψ(x+q)`. Its marginals are the ideal
//! position and momentum distributions of `ρ` convolved with the noise
//! densities `m^Q(x) = ⟨x|ΠmΠ|x⟩ = ⟨−x|m|−x⟩` and `m^P(p) = ⟨−p|m|−p⟩`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::basis::{BasisSpec, Sector};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::linalg::symmetric_eigen;
use crate::spectral::{optimal_constant, uncertainty_product_check, KSpec, UncertaintyPair};
use crate::transport::{convolve_grid, first_absolute_moment, GridDensity, Measure, Metric};

const TRACE_TOLERANCE: f64 = 1e-10;
const POSITIVITY_TOLERANCE: f64 = 1e-10;
/// Grid densities must capture this much probability.
pub const MASS_THRESHOLD: f64 = 1.0 - 1e-6;
/// Phase-space densities must integrate to 1 within this.
pub const HUSIMI_MASS_TOLERANCE: f64 = 1e-4;
/// Largest rank of either density operator accepted by [`husimi`].
pub const HUSIMI_MAX_RANK: usize = 8;
const EIGENWEIGHT_CUTOFF: f64 = 1e-14;

/// Uniform grid `origin + j·step`, `j < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformGrid {
    origin: f64,
    step: f64,
    count: usize,
}

impl UniformGrid {
    pub fn new(origin: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() || count < 2 {
            return Err(Error::InvalidParameter(format!("invalid grid: origin {origin}, step {step}, {count} points")));
        }
        Ok(Self { origin, step, count })
    }

    /// Grid from `lo` to `hi` inclusive.
    pub fn span(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty grid range [{lo}, {hi}]")));
        }
        Self::new(lo, step, ((hi - lo) / step).round() as usize + 1)
    }

    /// `[−12, 12]`, step `1/64`.
    pub fn default_position() -> Self {
        Self { origin: -12.0, step: 1.0 / 64.0, count: 1537 }
    }

    /// `[−8, 8]`, step `1/16`.
    pub fn default_phase_space() -> Self {
        Self { origin: -8.0, step: 1.0 / 16.0, count: 257 }
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn point(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.point(j))
    }
}

/// A density operator on a truncated oscillator basis, real representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: BasisSpec,
    matrix: DMatrix<f64>,
}

impl DensityOperator {
    /// Validates symmetry, unit trace and positivity.
    pub fn new(basis: BasisSpec, matrix: DMatrix<f64>) -> Result<Self> {
        let n = basis.size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{}, basis has {n} functions",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite entries".into()));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidDensity(format!("matrix is not symmetric (defect {asym:.3e})")));
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace is {trace}, not 1")));
        }
        let lowest = symmetric_eigen(&matrix)?.eigenvalues[0];
        if lowest < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("smallest eigenvalue {lowest:.3e} is negative")));
        }
        Ok(Self { basis, matrix })
    }

    /// `|ψ⟩⟨ψ|` for the normalized coefficient vector `psi`.
    pub fn pure(basis: BasisSpec, psi: &[f64]) -> Result<Self> {
        if psi.len() != basis.size() {
            return Err(Error::InvalidDensity(format!("{} coefficients for {} basis functions", psi.len(), basis.size())));
        }
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let v = v / norm;
        Ok(Self { basis, matrix: &v * v.transpose() })
    }

    /// Oscillator eigenstate with Hermite (or radial) index `n`.
    pub fn oscillator(basis: BasisSpec, n: usize) -> Result<Self> {
        Self::superposition(basis, &[(n, 1.0)])
    }

    /// Normalized `Σ amplitude·|n⟩` over oscillator indices.
    pub fn superposition(basis: BasisSpec, terms: &[(usize, f64)]) -> Result<Self> {
        let mut psi = vec![0.0; basis.size()];
        for &(n, amp) in terms {
            let k = basis_index(&basis, n)?;
            psi[k] += amp;
        }
        Self::pure(basis, &psi)
    }

    /// The oscillator ground state dilated by `λ`: `ψ(x) = λ^{−1/2} φ₀(x/λ)`.
    pub fn squeezed(basis: BasisSpec, lambda: f64) -> Result<Self> {
        if basis.sector() == Sector::RadialS {
            return Err(Error::InvalidParameter("squeezed states are built for one degree of freedom".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("squeeze factor must be positive, got {lambda}")));
        }
        let t = (lambda * lambda - 1.0) / (lambda * lambda + 1.0);
        let mut psi = vec![0.0; basis.size()];
        // c_{2k} = c_0 · t^k · √((2k)!) / (2^k k!)
        let mut c = (2.0 * lambda / (1.0 + lambda * lambda)).sqrt();
        let mut captured = 0.0;
        let mut k = 0usize;
        while let Ok(idx) = basis_index(&basis, 2 * k) {
            psi[idx] = c;
            captured += c * c;
            let kf = k as f64;
            c *= t * ((2.0 * kf + 1.0) * (2.0 * kf + 2.0)).sqrt() / (2.0 * (kf + 1.0));
            k += 1;
        }
        if captured < 1.0 - 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "basis of size {} captures only {captured:.12} of the squeezed state",
                basis.size()
            )));
        }
        Self::pure(basis, &psi)
    }

    /// Random density operator `AAᵀ/tr(AAᵀ)` with `A` Gaussian of random
    /// rank `1..=4`, supported on a random number of leading basis functions.
    pub fn random<R: Rng + ?Sized>(basis: BasisSpec, rng: &mut R) -> Result<Self> {
        let n = basis.size();
        let active = rng.random_range(1..=n);
        let rank = rng.random_range(1..=4usize);
        let a = DMatrix::from_fn(active, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = &a * a.transpose();
        let trace = w.trace();
        let mut matrix = DMatrix::zeros(n, n);
        matrix.view_mut((0, 0), (active, active)).copy_from(&(w / trace));
        Self::new(basis, matrix)
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `tr(m A)`.
    pub fn expectation(&self, a: &DMatrix<f64>) -> f64 {
        self.matrix.component_mul(a).sum()
    }

    /// Eigenpairs with weight above rounding level, largest first.
    pub fn eigenstates(&self) -> Result<Vec<(f64, DVector<f64>)>> {
        let eig = symmetric_eigen(&self.matrix)?;
        Ok((0..eig.eigenvalues.len())
            .rev()
            .filter(|&i| eig.eigenvalues[i] > EIGENWEIGHT_CUTOFF)
            .map(|i| (eig.eigenvalues[i], eig.eigenvector(i)))
            .collect())
    }

    /// The same operator in a one-dimensional Hermite basis of another
    /// sector or size. Fails if weight would be lost.
    pub fn embed(&self, target: BasisSpec) -> Result<Self> {
        if target.dimension() != self.basis.dimension() || target.hbar() != self.basis.hbar() {
            return Err(Error::InvalidDensity("cannot embed into a basis of another dimension or ħ".into()));
        }
        let n = self.basis.size();
        let mut matrix = DMatrix::zeros(target.size(), target.size());
        for j in 0..n {
            for k in 0..n {
                let v = self.matrix[(j, k)];
                if v == 0.0 {
                    continue;
                }
                let tj = basis_index(&target, self.basis.quantum_number(j))?;
                let tk = basis_index(&target, self.basis.quantum_number(k))?;
                matrix[(tj, tk)] = v;
            }
        }
        Self::new(target.with_length(self.basis.length())?, matrix)
    }
}

/// Position of oscillator index `n` in `basis`.
fn basis_index(basis: &BasisSpec, n: usize) -> Result<usize> {
    let k = match basis.sector() {
        Sector::EvenParity if n % 2 == 1 => {
            return Err(Error::InvalidParameter(format!("index {n} is not in the even sector")))
        }
        Sector::EvenParity => n / 2,
        _ => n,
    };
    if k >= basis.size() {
        return Err(Error::InvalidParameter(format!("index {n} is beyond the basis of size {}", basis.size())));
    }
    Ok(k)
}

/// Built-in states.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedState {
    Ground,
    Excited(usize),
    Squeezed(f64),
    /// Ground state of `|Q| + |P|`.
    Optimal,
    /// Equal-weight superposition of the listed Hermite indices.
    Superposition(Vec<usize>),
}

impl std::str::FromStr for NamedState {
    type Err = Error;

    /// `ground`, `excited-N`, `squeezed-L`, `optimal`, `superposition-N-M-…`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown state `{s}`"));
        match s {
            "ground" => return Ok(NamedState::Ground),
            "optimal" => return Ok(NamedState::Optimal),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("excited-") {
            return n.parse().map(NamedState::Excited).map_err(|_| bad());
        }
        if let Some(l) = s.strip_prefix("squeezed-") {
            return l.parse().map(NamedState::Squeezed).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("superposition-") {
            let idx = rest.split('-').map(|t| t.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>();
            return match idx {
                Ok(v) if !v.is_empty() => Ok(NamedState::Superposition(v)),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }
}

impl NamedState {
    /// Density operator in a one-dimensional Hermite `basis`.
    pub fn build(&self, basis: BasisSpec) -> Result<DensityOperator> {
        match self {
            NamedState::Ground => DensityOperator::oscillator(basis, 0),
            NamedState::Excited(n) => DensityOperator::oscillator(basis, *n),
            NamedState::Squeezed(l) => DensityOperator::squeezed(basis, *l),
            NamedState::Superposition(idx) => {
                let terms: Vec<(usize, f64)> = idx.iter().map(|&n| (n, 1.0)).collect();
                DensityOperator::superposition(basis, &terms)
            }
            NamedState::Optimal => {
                let even = match basis.sector() {
                    Sector::FullHermite => basis.size().div_ceil(2),
                    _ => basis.size(),
                };
                let r = optimal_constant(&KSpec::symmetric(1, even, basis.hbar())?)?;
                DensityOperator::pure(r.basis, &r.coefficients)?.embed(basis)
            }
        }
    }
}

/// Outcome density `vᵀ M v` over a grid, with `M_jk = m_jk Re(φ̄_j φ_k)`
/// built from the basis phases and `v` the basis values at each point.
fn quadratic_density(
    m: &DensityOperator,
    grid: &UniformGrid,
    phased: bool,
    values: impl Fn(f64) -> Vec<f64>,
) -> Vec<f64> {
    let basis = m.basis();
    let n = basis.size();
    let weighted = if phased {
        DMatrix::from_fn(n, n, |j, k| {
            let (aj, bj) = basis.fourier_phase(j);
            let (ak, bk) = basis.fourier_phase(k);
            m.matrix()[(j, k)] * (aj * ak + bj * bk)
        })
    } else {
        m.matrix().clone()
    };
    grid.points()
        .map(|x| {
            let v = DVector::from_vec(values(x));
            v.dot(&(&weighted * &v)).max(0.0)
        })
        .collect()
}

fn checked_density(grid: &UniformGrid, values: Vec<f64>) -> Result<GridDensity> {
    let mass = grid.step() * values.iter().sum::<f64>();
    if !(mass >= MASS_THRESHOLD) {
        return Err(Error::GridCoverage { captured: mass, required: MASS_THRESHOLD });
    }
    GridDensity::normalized(grid.origin(), grid.step(), values)
}

fn require_line(m: &DensityOperator) -> Result<()> {
    if m.basis().dimension() != 1 {
        return Err(Error::InvalidParameter("grid densities are computed for one degree of freedom".into()));
    }
    Ok(())
}

/// Position density `⟨x|ρ|x⟩` of a state.
pub fn ideal_position_density(rho: &DensityOperator, grid: &UniformGrid) -> Result<GridDensity> {
    require_line(rho)?;
    checked_density(grid, quadratic_density(rho, grid, false, |x| rho.basis().position_values(x)))
}

/// Momentum density `⟨p|ρ|p⟩` of a state.
pub fn ideal_momentum_density(rho: &DensityOperator, grid: &UniformGrid) -> Result<GridDensity> {
    require_line(rho)?;
    checked_density(grid, quadratic_density(rho, grid, true, |p| rho.basis().momentum_values(p)))
}

/// The noise pair `(m^Q, m^P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDensity {
    pub mq: GridDensity,
    pub mp: GridDensity,
}

/// `m^Q(x) = ⟨x|ΠmΠ|x⟩` and `m^P(p) = ⟨p|ΠmΠ|p⟩` on `grid` (used for both
/// variables).
pub fn noise_marginals(m: &DensityOperator, grid: &UniformGrid) -> Result<NoiseDensity> {
    require_line(m)?;
    let basis = m.basis();
    let mq = checked_density(grid, quadratic_density(m, grid, false, |x| basis.position_values(-x)))?;
    let mp = checked_density(grid, quadratic_density(m, grid, true, |p| basis.momentum_values(-p)))?;
    Ok(NoiseDensity { mq, mp })
}

/// Marginal of the covariant observable: ideal density convolved with noise.
pub fn marginal_by_convolution(ideal: &GridDensity, noise: &GridDensity) -> Result<GridDensity> {
    convolve_grid(ideal, noise)
}

/// `(tr(m|Q|), tr(m|P|))`, the distances of the covariant observable's
/// marginals from ideal position and momentum.
pub fn observable_distance_covariant(m: &DensityOperator) -> Result<UncertaintyPair> {
    uncertainty_product_check(m)
}

/// The same pair from the noise densities, `(∫|x| m^Q, ∫|p| m^P)`.
pub fn noise_first_moments(noise: &NoiseDensity) -> UncertaintyPair {
    UncertaintyPair {
        delta_q: first_absolute_moment(&Measure::Grid(noise.mq.clone()), Metric::Euclidean),
        delta_p: first_absolute_moment(&Measure::Grid(noise.mp.clone()), Metric::Euclidean),
    }
}

/// `tr(ρ W(p,q)* m W(p,q))` on a `(p, q)` grid; integrates to 1 against
/// `dp dq/(2πħ)`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceDensity {
    pub p_grid: UniformGrid,
    pub q_grid: UniformGrid,
    pub hbar: f64,
    /// Row `i` holds the values at `p_i` for every `q`.
    pub values: DMatrix<f64>,
}

#[derive(Serialize)]
struct PhaseSpaceJson<'a> {
    schema: u32,
    hbar: f64,
    #[serde(rename = "pGrid")]
    p_grid: &'a UniformGrid,
    #[serde(rename = "qGrid")]
    q_grid: &'a UniformGrid,
    rows: Vec<Vec<f64>>,
}

impl PhaseSpaceDensity {
    fn cell(&self) -> f64 {
        self.p_grid.step() * self.q_grid.step() / (2.0 * std::f64::consts::PI * self.hbar)
    }

    /// `Σ values · dp dq / (2πħ)`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.cell()
    }

    /// Density of `q`, unnormalized grid values (`Σ_p values dp/(2πħ)`).
    pub fn q_marginal(&self) -> Vec<f64> {
        let f = self.p_grid.step() / (2.0 * std::f64::consts::PI * self.hbar);
        self.values.row_sum().iter().map(|v| v * f).collect()
    }

    /// Density of `p`, unnormalized grid values.
    pub fn p_marginal(&self) -> Vec<f64> {
        let f = self.q_grid.step() / (2.0 * std::f64::consts::PI * self.hbar);
        self.values.column_sum().iter().map(|v| v * f).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q,value\n");
        for (i, p) in self.p_grid.points().enumerate() {
            for (j, q) in self.q_grid.points().enumerate() {
                out.push_str(&format!("{},{},{}\n", fmt_f64(p), fmt_f64(q), fmt_f64(self.values[(i, j)])));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let rows = self.values.row_iter().map(|r| r.iter().copied().collect()).collect();
        crate::io::to_json(&PhaseSpaceJson {
            schema: 1,
            hbar: self.hbar,
            p_grid: &self.p_grid,
            q_grid: &self.q_grid,
            rows,
        })
    }
}

/// Phase-space density of `ρ` under the covariant observable generated by
/// `m`. The Weyl operators act on eigenvectors of `m` sampled on `x_grid`.
pub fn husimi(
    rho: &DensityOperator,
    m: &DensityOperator,
    p_grid: &UniformGrid,
    q_grid: &UniformGrid,
    x_grid: &UniformGrid,
) -> Result<PhaseSpaceDensity> {
    require_line(rho)?;
    require_line(m)?;
    let hbar = rho.basis().hbar();
    if m.basis().hbar() != hbar {
        return Err(Error::InvalidParameter("state and observable use different ħ".into()));
    }
    let rho_states = rho.eigenstates()?;
    let m_states = m.eigenstates()?;
    for (name, r) in [("state", rho_states.len()), ("observable density", m_states.len())] {
        if r > HUSIMI_MAX_RANK {
            return Err(Error::InvalidParameter(format!("{name} has rank {r} (maximum {HUSIMI_MAX_RANK})")));
        }
    }
    let nx = x_grid.len();
    let xs: Vec<f64> = x_grid.points().collect();
    let dx = x_grid.step();
    // e^{−ipx/ħ} Δx as cosine and sine tables, x × p
    let cos_t = DMatrix::from_fn(nx, p_grid.len(), |j, i| (p_grid.point(i) * xs[j] / hbar).cos() * dx);
    let sin_t = DMatrix::from_fn(nx, p_grid.len(), |j, i| (p_grid.point(i) * xs[j] / hbar).sin() * dx);

    let psi_b: Vec<Vec<f64>> =
        m_states.iter().map(|(_, v)| xs.iter().map(|&x| m.basis().wavefunction(v.as_slice(), x)).collect()).collect();
    // φ_a(x + q) for every eigenvector of ρ, one matrix q × x per eigenvector
    let mut phi_a: Vec<DMatrix<f64>> = vec![DMatrix::zeros(q_grid.len(), nx); rho_states.len()];
    for (iq, q) in q_grid.points().enumerate() {
        for (jx, &x) in xs.iter().enumerate() {
            let vals = rho.basis().position_values(x + q);
            for (a, (_, v)) in rho_states.iter().enumerate() {
                phi_a[a][(iq, jx)] = v.iter().zip(&vals).map(|(c, f)| c * f).sum();
            }
        }
    }

    let mut values = DMatrix::zeros(p_grid.len(), q_grid.len());
    for (a, (lambda, _)) in rho_states.iter().enumerate() {
        for (b, (mu, _)) in m_states.iter().enumerate() {
            let mut g = phi_a[a].clone();
            for (jx, mut col) in g.column_iter_mut().enumerate() {
                let s = psi_b[b][jx];
                for v in col.iter_mut() {
                    *v *= s;
                }
            }
            let re = &g * &cos_t;
            let im = &g * &sin_t;
            // re, im are q × p
            let w = lambda * mu;
            for iq in 0..q_grid.len() {
                for ip in 0..p_grid.len() {
                    values[(ip, iq)] += w * (re[(iq, ip)].powi(2) + im[(iq, ip)].powi(2));
                }
            }
        }
    }
    let density = PhaseSpaceDensity { p_grid: *p_grid, q_grid: *q_grid, hbar, values };
    let total = density.integral();
    if (total - 1.0).abs() > HUSIMI_MASS_TOLERANCE {
        return Err(Error::GridCoverage { captured: total, required: 1.0 - HUSIMI_MASS_TOLERANCE });
    }
    Ok(density)
}

/// Everything produced for one state / observable pair.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub ideal_q: GridDensity,
    pub ideal_p: GridDensity,
    pub noise: NoiseDensity,
    pub marginal_q: GridDensity,
    pub marginal_p: GridDensity,
    pub husimi: PhaseSpaceDensity,
    /// `(tr(m|Q|), tr(m|P|))`.
    pub pair: UncertaintyPair,
    /// The same pair from the grid noise densities.
    pub grid_pair: UncertaintyPair,
    /// Sup-norm gap between the Husimi `q`-marginal and `marginal_q`.
    pub residual_q: f64,
    pub residual_p: f64,
}

/// Largest gap between grid values and a density interpolated at the same
/// points.
fn sup_gap(grid: &UniformGrid, values: &[f64], density: &GridDensity) -> f64 {
    grid.points().zip(values).map(|(x, v)| (v - density.interpolate(x)).abs()).fold(0.0, f64::max)
}

/// Ideal marginals, noise, convolved marginals, the Husimi density and the
/// marginal identity residuals.
pub fn simulate(
    rho: &DensityOperator,
    m: &DensityOperator,
    x_grid: &UniformGrid,
    phase_grid: &UniformGrid,
) -> Result<Simulation> {
    let ideal_q = ideal_position_density(rho, x_grid)?;
    let ideal_p = ideal_momentum_density(rho, x_grid)?;
    let noise = noise_marginals(m, x_grid)?;
    let marginal_q = marginal_by_convolution(&ideal_q, &noise.mq)?;
    let marginal_p = marginal_by_convolution(&ideal_p, &noise.mp)?;
    let husimi = husimi(rho, m, phase_grid, phase_grid, x_grid)?;
    let residual_q = sup_gap(phase_grid, &husimi.q_marginal(), &marginal_q);
    let residual_p = sup_gap(phase_grid, &husimi.p_marginal(), &marginal_p);
    Ok(Simulation {
        pair: observable_distance_covariant(m)?,
        grid_pair: noise_first_moments(&noise),
        ideal_q,
        ideal_p,
        noise,
        marginal_q,
        marginal_p,
        husimi,
        residual_q,
        residual_p,
    })
}
