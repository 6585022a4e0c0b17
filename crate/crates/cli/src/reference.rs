//! Published reference values for the `table` command.
//!
//! These are only ever compared against; the binary never prints them as
//! results. Tolerances reflect the precision the values were published with.

pub struct Row {
    pub dimension: usize,
    /// Optimal constant `C(d)`.
    pub optimal: f64,
    pub optimal_tolerance: f64,
    /// Coherent-state constant `C′(d)`.
    pub coherent: f64,
    pub coherent_tolerance: f64,
}

/// Low-dimensional `C′` values are analytic (`1/π`, `π/4`, `4/π`) and held
/// to quadrature accuracy; the remaining entries carry the published digits.
pub const ROWS: [Row; 4] = [
    Row {
        dimension: 1,
        optimal: 0.304745,
        optimal_tolerance: 1e-4,
        coherent: 1.0 / std::f64::consts::PI,
        coherent_tolerance: 1e-10,
    },
    Row {
        dimension: 2,
        optimal: 0.7628,
        optimal_tolerance: 1e-3,
        coherent: std::f64::consts::FRAC_PI_4,
        coherent_tolerance: 1e-10,
    },
    Row {
        dimension: 3,
        optimal: 1.2457,
        optimal_tolerance: 1e-3,
        coherent: 4.0 / std::f64::consts::PI,
        coherent_tolerance: 1e-10,
    },
    // published as "20.710" and "20.751" without a stated precision
    Row { dimension: 42, optimal: 20.710, optimal_tolerance: 0.01, coherent: 20.751, coherent_tolerance: 0.01 },
];
