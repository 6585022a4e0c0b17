use super::measure::{DiscreteMeasure, GridDensity, Measure};
use crate::error::{Error, Result};

/// How a [`Cdf`] behaves between breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfShape {
    /// Right-continuous step function (discrete measures).
    Step,
    /// Continuous, linear between breakpoints (grid densities).
    Linear,
}

/// Distribution function `F(t) = μ((−∞, t])` of a measure on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdf {
    breakpoints: Vec<f64>,
    cumulative: Vec<f64>,
    shape: CdfShape,
}

impl Cdf {
    pub fn from_discrete(m: &DiscreteMeasure) -> Result<Self> {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch { left: m.dim(), right: 1 });
        }
        // merged and sorted at construction
        let breakpoints: Vec<f64> = m.points().iter().map(|p| p[0]).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = m
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("measure is non-empty") = 1.0;
        Ok(Self { breakpoints, cumulative, shape: CdfShape::Step })
    }

    pub fn from_grid(g: &GridDensity) -> Self {
        let h = g.step();
        let n = g.len();
        let breakpoints = (0..=n).map(|j| g.origin() - 0.5 * h + j as f64 * h).collect();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for v in g.values() {
            acc += h * v;
            cumulative.push(acc.min(1.0));
        }
        *cumulative.last_mut().expect("grid is non-empty") = 1.0;
        Self { breakpoints, cumulative, shape: CdfShape::Linear }
    }

    pub fn from_measure(m: &Measure) -> Result<Self> {
        match m {
            Measure::Discrete(d) => Self::from_discrete(d),
            Measure::Grid(g) => Ok(Self::from_grid(g)),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn shape(&self) -> CdfShape {
        self.shape
    }

    /// `F(t)`, right-continuous.
    pub fn eval(&self, t: f64) -> f64 {
        self.right_limit(t)
    }

    fn right_limit(&self, t: f64) -> f64 {
        // number of breakpoints <= t
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.value_after(k, t)
    }

    fn left_limit(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < t);
        self.value_after(k, t)
    }

    /// Value on the open interval following the first `k` breakpoints.
    fn value_after(&self, k: usize, t: f64) -> f64 {
        let n = self.breakpoints.len();
        if k == 0 {
            return 0.0;
        }
        if k == n {
            return 1.0;
        }
        match self.shape {
            CdfShape::Step => self.cumulative[k - 1],
            CdfShape::Linear => {
                let (a, b) = (self.breakpoints[k - 1], self.breakpoints[k]);
                let f = ((t - a) / (b - a)).clamp(0.0, 1.0);
                self.cumulative[k - 1] * (1.0 - f) + self.cumulative[k] * f
            }
        }
    }

    /// `∫ |F₁(t) − F₂(t)| dt`, exact for the piecewise-linear shapes.
    pub fn l1_distance(&self, other: &Cdf) -> f64 {
        let mut ts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut total = 0.0;
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let da = self.right_limit(a) - other.right_limit(a);
            let db = self.left_limit(b) - other.left_limit(b);
            total += abs_linear_integral(da, db, b - a);
        }
        total
    }
}

/// `∫₀^L |a + (b − a)s/L| ds`.
fn abs_linear_integral(a: f64, b: f64, len: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * len * (a.abs() + b.abs())
    } else {
        0.5 * len * (a * a + b * b) / (a.abs() + b.abs())
    }
}
