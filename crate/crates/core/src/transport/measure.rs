use crate::error::{Error, Result};

/// Points closer than this (max-norm) are treated as one atom.
pub const MERGE_TOLERANCE: f64 = 1e-12;
const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
const GRID_MASS_TOLERANCE: f64 = 1e-9;

/// A finitely supported probability measure on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure, merging coincident points.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one point".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidMeasure("points must have at least one coordinate".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite coordinate".into()));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let (points, weights) = merge_coincident(points, weights);
        Ok(Self { dim, points, weights })
    }

    /// Builds a measure from nonnegative masses, dividing by their total.
    pub fn normalized(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidMeasure(format!("total mass {total} cannot be normalized")));
        }
        Self::new(points, masses.into_iter().map(|m| m / total).collect())
    }

    /// One-dimensional measure from `(position, weight)` pairs.
    pub fn on_line(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(atoms.iter().map(|a| vec![a.0]).collect(), atoms.iter().map(|a| a.1).collect())
    }

    /// The point measure `δ_x`.
    pub fn dirac(x: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(|p| p.as_slice()).zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.atoms() {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += w * pi;
            }
        }
        m
    }
}

/// Sorts atoms lexicographically and merges runs whose coordinates agree
/// within [`MERGE_TOLERANCE`]. Zero-weight atoms are dropped.
fn merge_coincident(points: Vec<Vec<f64>>, weights: Vec<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut atoms: Vec<(Vec<f64>, f64)> = points.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).collect();
    atoms.sort_by(|a, b| {
        a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out_p: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
    let mut out_w: Vec<f64> = Vec::with_capacity(atoms.len());
    for (p, w) in atoms {
        if let Some(last) = out_p.last() {
            if last.iter().zip(&p).all(|(a, b)| (a - b).abs() <= MERGE_TOLERANCE) {
                *out_w.last_mut().expect("weights track points") += w;
                continue;
            }
        }
        out_p.push(p);
        out_w.push(w);
    }
    (out_p, out_w)
}

/// A probability density on `ℝ` tabulated on a uniform grid.
///
/// `values[j]` is the density at `origin + j·step`. The density is read as
/// constant on the cell `[x_j − step/2, x_j + step/2]`, so the mass is
/// exactly `step · Σ values`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    origin: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        Self::check_shape(origin, step, &values)?;
        let mass = step * values.iter().sum::<f64>();
        if (mass - 1.0).abs() > GRID_MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("grid density has mass {mass}, not 1")));
        }
        Ok(Self { origin, step, values })
    }

    /// Divides `values` by their grid mass.
    pub fn normalized(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        Self::check_shape(origin, step, &values)?;
        let mass = step * values.iter().sum::<f64>();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidMeasure(format!("grid mass {mass} cannot be normalized")));
        }
        Ok(Self { origin, step, values: values.into_iter().map(|v| v / mass).collect() })
    }

    fn check_shape(origin: f64, step: f64, values: &[f64]) -> Result<()> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidMeasure(format!("invalid grid origin {origin} / step {step}")));
        }
        if values.is_empty() {
            return Err(Error::InvalidMeasure("grid density has no values".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidMeasure(format!("density value {v} is not a nonnegative number")));
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| self.point(j))
    }

    pub fn mean(&self) -> f64 {
        self.points().zip(&self.values).map(|(x, v)| x * v).sum::<f64>() * self.step
    }

    /// Density at `x` by linear interpolation between grid nodes (zero
    /// outside the node range).
    pub fn interpolate(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.step;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let j = (t.floor() as usize).min(self.values.len() - 1);
        if j + 1 == self.values.len() {
            return self.values[j];
        }
        let f = t - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    /// Density resampled onto a finer step covering the same node range.
    pub fn resample(&self, step: f64) -> Result<Self> {
        let span = (self.values.len() - 1) as f64 * self.step;
        let count = (span / step).round() as usize + 1;
        let values = (0..count).map(|j| self.interpolate(self.origin + j as f64 * step)).collect();
        Self::normalized(self.origin, step, values)
    }

    /// Largest absolute difference of two densities sampled on the nodes of
    /// `self` (the other one linearly interpolated).
    pub fn sup_distance(&self, other: &GridDensity) -> f64 {
        self.points().zip(&self.values).map(|(x, v)| (v - other.interpolate(x)).abs()).fold(0.0, f64::max)
    }
}

/// Either representation of a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Discrete(DiscreteMeasure),
    Grid(GridDensity),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Discrete(m) => m.dim(),
            Measure::Grid(_) => 1,
        }
    }
}

impl From<DiscreteMeasure> for Measure {
    fn from(m: DiscreteMeasure) -> Self {
        Measure::Discrete(m)
    }
}

impl From<GridDensity> for Measure {
    fn from(g: GridDensity) -> Self {
        Measure::Grid(g)
    }
}
