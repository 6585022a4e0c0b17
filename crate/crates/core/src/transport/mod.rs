//! Probability measures on normed vector spaces and the Wasserstein-1
//! (Monge–Kantorovich) distance between them.
//!
//! The supremum over 1-Lipschitz test functions that defines the distance is
//! never optimized directly. On the line it is evaluated as `∫|F₁ − F₂|`
//! through the distribution functions; in general it is the optimal value of
//! the transportation problem, solved exactly by [`kantorovich_lp`].

mod cdf;
mod measure;
mod simplex;

pub use cdf::{Cdf, CdfShape};
pub use measure::{DiscreteMeasure, GridDensity, Measure, MERGE_TOLERANCE};

use crate::error::{Error, Result};

/// Largest support (per side) accepted by [`kantorovich_lp`].
pub const MAX_LP_SUPPORT: usize = 512;

const PLAN_MARGINAL_TOLERANCE: f64 = 1e-10;
const STEP_MATCH_TOLERANCE: f64 = 1e-9;

/// Norm used to measure distances between points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Metric::Manhattan => x.iter().map(|v| v.abs()).sum(),
            Metric::Chebyshev => x.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Metric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Chebyshev => x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            "chebyshev" | "max" | "linf" => Ok(Metric::Chebyshev),
            other => Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
        }
    }
}

/// A coupling of two discrete measures: `mass[i][j]` moves from source
/// atom `i` to target atom `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    mass: Vec<Vec<f64>>,
}

impl TransportPlan {
    pub fn new(source: DiscreteMeasure, target: DiscreteMeasure, mass: Vec<Vec<f64>>) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::DimensionMismatch { left: source.dim(), right: target.dim() });
        }
        if mass.len() != source.len() || mass.iter().any(|row| row.len() != target.len()) {
            return Err(Error::InvalidMeasure("plan shape does not match the marginals".into()));
        }
        if mass.iter().flatten().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidMeasure("plan has negative mass".into()));
        }
        for (row, w) in mass.iter().zip(source.weights()) {
            let s: f64 = row.iter().sum();
            if (s - w).abs() > PLAN_MARGINAL_TOLERANCE {
                return Err(Error::InvalidMeasure(format!("row sum {s} differs from source weight {w}")));
            }
        }
        for (j, w) in target.weights().iter().enumerate() {
            let s: f64 = mass.iter().map(|row| row[j]).sum();
            if (s - w).abs() > PLAN_MARGINAL_TOLERANCE {
                return Err(Error::InvalidMeasure(format!("column sum {s} differs from target weight {w}")));
            }
        }
        Ok(Self { source, target, mass })
    }

    /// The product coupling `μ ⊗ ν`.
    pub fn independent(source: DiscreteMeasure, target: DiscreteMeasure) -> Result<Self> {
        let mass = source.weights().iter().map(|a| target.weights().iter().map(|b| a * b).collect()).collect();
        Self::new(source, target, mass)
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn mass(&self) -> &[Vec<f64>] {
        &self.mass
    }
}

/// Cost of a plan: `Σ mass(x, y)·‖x − y‖`.
pub fn monge_cost(plan: &TransportPlan, metric: Metric) -> f64 {
    let mut total = 0.0;
    for (row, x) in plan.mass.iter().zip(plan.source.points()) {
        for (m, y) in row.iter().zip(plan.target.points()) {
            if *m > 0.0 {
                total += m * metric.distance(x, y);
            }
        }
    }
    total
}

/// Wasserstein-1 distance of two measures on the line, `∫|F₁ − F₂|`.
pub fn wasserstein1_1d(mu1: &Measure, mu2: &Measure) -> Result<f64> {
    for m in [mu1, mu2] {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch { left: m.dim(), right: 1 });
        }
    }
    let f1 = Cdf::from_measure(mu1)?;
    let f2 = Cdf::from_measure(mu2)?;
    Ok(f1.l1_distance(&f2))
}

/// Optimal value, plan and dual potentials of the transport problem.
#[derive(Debug, Clone)]
pub struct KantorovichSolution {
    pub value: f64,
    pub plan: TransportPlan,
    /// Potentials `u` on the source and `v` on the target atoms with
    /// `u_i + v_j ≤ ‖x_i − y_j‖`, and `Σ μ₁u + Σ μ₂v = value`.
    pub source_potentials: Vec<f64>,
    pub target_potentials: Vec<f64>,
}

impl KantorovichSolution {
    /// `Σ μ₁(i) u_i + Σ μ₂(j) v_j`.
    pub fn dual_value(&self) -> f64 {
        let s: f64 = self.plan.source.weights().iter().zip(&self.source_potentials).map(|(a, u)| a * u).sum();
        let t: f64 = self.plan.target.weights().iter().zip(&self.target_potentials).map(|(b, v)| b * v).sum();
        s + t
    }
}

/// Exact minimal transport cost between two discrete measures.
pub fn kantorovich_lp(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, metric: Metric) -> Result<KantorovichSolution> {
    if mu1.dim() != mu2.dim() {
        return Err(Error::DimensionMismatch { left: mu1.dim(), right: mu2.dim() });
    }
    for m in [mu1, mu2] {
        if m.len() > MAX_LP_SUPPORT {
            return Err(Error::SupportTooLarge { size: m.len(), max: MAX_LP_SUPPORT });
        }
    }
    let (m, n) = (mu1.len(), mu2.len());
    let mut cost = Vec::with_capacity(m * n);
    for x in mu1.points() {
        for y in mu2.points() {
            cost.push(metric.distance(x, y));
        }
    }
    let sol = simplex::solve(mu1.weights(), mu2.weights(), &cost)?;
    let mut mass = vec![vec![0.0; n]; m];
    for &(i, j, f) in &sol.cells {
        mass[i][j] += f;
    }
    let plan = TransportPlan::new(mu1.clone(), mu2.clone(), mass)
        .map_err(|e| Error::Transport(format!("solver returned an infeasible plan: {e}")))?;
    Ok(KantorovichSolution {
        value: sol.cost,
        plan,
        source_potentials: sol.row_potentials,
        target_potentials: sol.col_potentials,
    })
}

/// Distance between two measures: the distribution-function formula on the
/// line, the transport problem otherwise.
pub fn wasserstein(mu1: &Measure, mu2: &Measure, metric: Metric) -> Result<f64> {
    if mu1.dim() != mu2.dim() {
        return Err(Error::DimensionMismatch { left: mu1.dim(), right: mu2.dim() });
    }
    if mu1.dim() == 1 {
        return wasserstein1_1d(mu1, mu2);
    }
    match (mu1, mu2) {
        (Measure::Discrete(a), Measure::Discrete(b)) => Ok(kantorovich_lp(a, b, metric)?.value),
        _ => Err(Error::KindMismatch),
    }
}

/// Distribution of `X + Y` for independent `X ~ mu`, `Y ~ nu`.
///
/// Grids must share a step unless one is coarser, in which case the coarser
/// grid is first resampled onto the finer step by linear interpolation. The
/// result is renormalized.
pub fn convolve(mu: &Measure, nu: &Measure) -> Result<Measure> {
    match (mu, nu) {
        (Measure::Discrete(a), Measure::Discrete(b)) => Ok(Measure::Discrete(convolve_discrete(a, b)?)),
        (Measure::Grid(a), Measure::Grid(b)) => Ok(Measure::Grid(convolve_grid(a, b)?)),
        _ => Err(Error::KindMismatch),
    }
}

pub fn convolve_discrete(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let mut points = Vec::with_capacity(a.len() * b.len());
    let mut masses = Vec::with_capacity(a.len() * b.len());
    for (x, wx) in a.atoms() {
        for (y, wy) in b.atoms() {
            points.push(x.iter().zip(y).map(|(p, q)| p + q).collect());
            masses.push(wx * wy);
        }
    }
    DiscreteMeasure::normalized(points, masses)
}

pub fn convolve_grid(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    let (ha, hb) = (a.step(), b.step());
    if ((ha - hb) / ha.min(hb)).abs() > STEP_MATCH_TOLERANCE {
        let h = ha.min(hb);
        if ha > hb {
            return convolve_grid(&a.resample(h)?, b);
        }
        return convolve_grid(a, &b.resample(h)?);
    }
    let h = ha;
    let (va, vb) = (a.values(), b.values());
    let mut out = vec![0.0; va.len() + vb.len() - 1];
    for (i, x) in va.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in vb.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    for v in out.iter_mut() {
        *v *= h;
    }
    GridDensity::normalized(a.origin() + b.origin(), h, out)
}

/// `∫ ν(dy) ‖y‖`.
///
/// Grid densities are read as point samples: the trapezoid sum
/// `h Σ |x_j| f_j` plus the leading Euler–Maclaurin term for the kink of
/// `|x|` at the origin, `h² B₂(θ) f(0)` with `θ` the offset of the origin
/// inside its cell. The error is `O(h³)` for smooth, decaying densities.
pub fn first_absolute_moment(nu: &Measure, metric: Metric) -> f64 {
    match nu {
        Measure::Discrete(d) => d.atoms().map(|(p, w)| w * metric.norm(p)).sum(),
        Measure::Grid(g) => {
            let h = g.step();
            let sum: f64 = g.points().zip(g.values()).map(|(x, v)| x.abs() * v).sum::<f64>() * h;
            let last = g.point(g.len() - 1);
            if g.origin() < 0.0 && last > 0.0 {
                let theta = (-g.origin() / h).fract();
                let b2 = theta * theta - theta + 1.0 / 6.0;
                sum + h * h * b2 * g.interpolate(0.0)
            } else {
                sum
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(atoms: &[(f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::on_line(atoms).unwrap()
    }

    #[test]
    fn point_measures() {
        let a: Measure = line(&[(0.0, 1.0)]).into();
        let b: Measure = line(&[(3.0, 1.0)]).into();
        assert_eq!(wasserstein1_1d(&a, &b).unwrap(), 3.0);
        assert_eq!(wasserstein1_1d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn split_versus_midpoint() {
        let a: Measure = line(&[(0.0, 0.5), (1.0, 0.5)]).into();
        let b: Measure = line(&[(0.5, 1.0)]).into();
        assert_abs_diff_eq!(wasserstein1_1d(&a, &b).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(wasserstein1_1d(&b, &a).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_planar_input_on_line_formula() {
        let a: Measure = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap().into();
        assert!(matches!(wasserstein1_1d(&a, &a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn monge_cost_examples() {
        let mu = line(&[(0.0, 0.5), (1.0, 0.5)]);
        let identity = TransportPlan::new(mu.clone(), mu.clone(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(monge_cost(&identity, Metric::Euclidean), 0.0);
        let single = TransportPlan::new(line(&[(0.0, 1.0)]), line(&[(3.0, 1.0)]), vec![vec![1.0]]).unwrap();
        assert_eq!(monge_cost(&single, Metric::Euclidean), 3.0);
        assert!(TransportPlan::new(mu.clone(), mu, vec![vec![0.5, 0.1], vec![0.0, 0.5]]).is_err());
    }

    #[test]
    fn lp_examples() {
        let sol = kantorovich_lp(&line(&[(0.0, 1.0)]), &line(&[(3.0, 1.0)]), Metric::Euclidean).unwrap();
        assert_eq!(sol.value, 3.0);
        assert_eq!(sol.plan.mass(), &[vec![1.0]]);

        let sol = kantorovich_lp(&line(&[(0.0, 0.5), (1.0, 0.5)]), &line(&[(0.5, 1.0)]), Metric::Euclidean).unwrap();
        assert_abs_diff_eq!(sol.value, 0.5, epsilon = 1e-15);
        assert_eq!(sol.plan.mass(), &[vec![0.5], vec![0.5]]);

        let a = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let b = DiscreteMeasure::dirac(vec![3.0, 4.0]).unwrap();
        let sol = kantorovich_lp(&a, &b, Metric::Euclidean).unwrap();
        assert_abs_diff_eq!(sol.value, 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kantorovich_lp(&a, &b, Metric::Manhattan).unwrap().value, 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kantorovich_lp(&a, &b, Metric::Chebyshev).unwrap().value, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn lp_support_cap() {
        let n = MAX_LP_SUPPORT + 1;
        let big = DiscreteMeasure::new((0..n).map(|i| vec![i as f64]).collect(), vec![1.0 / n as f64; n]).unwrap();
        let small = line(&[(0.0, 1.0)]);
        assert!(matches!(kantorovich_lp(&big, &small, Metric::Euclidean), Err(Error::SupportTooLarge { .. })));
    }

    #[test]
    fn convolution_examples() {
        let c = convolve_discrete(&line(&[(1.5, 1.0)]), &line(&[(-0.25, 1.0)])).unwrap();
        assert_eq!(c, line(&[(1.25, 1.0)]));

        let mu = line(&[(0.0, 0.3), (2.0, 0.7)]);
        assert_eq!(convolve_discrete(&mu, &line(&[(0.0, 1.0)])).unwrap(), mu);

        let u = line(&[(0.0, 0.5), (1.0, 0.5)]);
        let c = convolve_discrete(&u, &u).unwrap();
        assert_eq!(c, line(&[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]));
        assert!(matches!(
            convolve(&Measure::Discrete(u), &Measure::Grid(GridDensity::new(0.0, 1.0, vec![1.0]).unwrap())),
            Err(Error::KindMismatch)
        ));
    }

    #[test]
    fn grid_convolution_adds_means() {
        let a = GridDensity::normalized(-1.0, 0.25, vec![0.0, 1.0, 3.0, 2.0, 0.5]).unwrap();
        let b = GridDensity::normalized(2.0, 0.25, vec![1.0, 0.0, 4.0]).unwrap();
        let c = convolve_grid(&a, &b).unwrap();
        assert_abs_diff_eq!(c.mean(), a.mean() + b.mean(), epsilon = 1e-12);
        assert_eq!(c.len(), 7);
    }

    #[test]
    fn grid_convolution_resamples_coarser() {
        let fine = GridDensity::normalized(0.0, 0.25, vec![1.0; 5]).unwrap();
        let coarse = GridDensity::normalized(0.0, 0.5, vec![1.0, 2.0, 1.0]).unwrap();
        let c = convolve_grid(&coarse, &fine).unwrap();
        assert_eq!(c.step(), 0.25);
        assert_abs_diff_eq!(c.values().iter().sum::<f64>() * c.step(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn first_moment_examples() {
        assert_eq!(first_absolute_moment(&line(&[(3.0, 1.0)]).into(), Metric::Euclidean), 3.0);
        assert_eq!(first_absolute_moment(&line(&[(-1.0, 0.5), (1.0, 0.5)]).into(), Metric::Euclidean), 1.0);
        let planar = DiscreteMeasure::dirac(vec![3.0, -4.0]).unwrap().into();
        assert_eq!(first_absolute_moment(&planar, Metric::Euclidean), 5.0);
        assert_eq!(first_absolute_moment(&planar, Metric::Manhattan), 7.0);
    }

    #[test]
    fn grid_moment_near_distance_to_origin() {
        // the distance uses cell histograms, the moment point samples; they
        // agree to O(h²)
        let h = 1.0 / 64.0;
        let values = (0..1537).map(|j| {
            let x = -12.0 + j as f64 * h;
            (-x * x).exp()
        });
        let g: Measure = GridDensity::normalized(-12.0, h, values.collect()).unwrap().into();
        let origin: Measure = line(&[(0.0, 1.0)]).into();
        let gap = first_absolute_moment(&g, Metric::Euclidean) - wasserstein1_1d(&g, &origin).unwrap();
        assert!(gap.abs() < h * h, "{gap}");
    }

    #[test]
    fn gaussian_grid_first_moment() {
        // variance 1/2: density e^{-x²}/√π, E|x| = 1/√π
        let h = 1.0 / 64.0;
        let n = 2 * 12 * 64 + 1;
        let values = (0..n).map(|j| {
            let x = -12.0 + j as f64 * h;
            (-x * x).exp() / std::f64::consts::PI.sqrt()
        });
        let g = GridDensity::normalized(-12.0, h, values.collect()).unwrap();
        let m = first_absolute_moment(&g.into(), Metric::Euclidean);
        assert_abs_diff_eq!(m, 1.0 / std::f64::consts::PI.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn shifted_gaussian_moment_off_node() {
        // E|X| for X ~ N(μ, 1/2) is μ erf(μ) + e^{−μ²}/√π; erf(0.3) from tables
        let (mu, h) = (0.3_f64, 1.0 / 64.0);
        let origin = -12.0 + 0.37 * h;
        let values = (0..1537).map(|j| {
            let x = origin + j as f64 * h - mu;
            (-x * x).exp()
        });
        let g = GridDensity::normalized(origin, h, values.collect()).unwrap();
        let erf = 0.328_626_759_459_127_4;
        let exact = mu * erf + (-mu * mu).exp() / std::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(first_absolute_moment(&g.into(), Metric::Euclidean), exact, epsilon = 1e-7);
    }
}
