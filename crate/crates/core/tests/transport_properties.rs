#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use mur_core::transport::{
    convolve, first_absolute_moment, kantorovich_lp, monge_cost, wasserstein, wasserstein1_1d, DiscreteMeasure,
    Measure, Metric, TransportPlan,
};

fn line_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-40i32..=40, 0.01f64..1.0), 1..=max_atoms).prop_map(|atoms| {
        let points = atoms.iter().map(|(x, _)| vec![*x as f64 * 0.125]).collect();
        let masses = atoms.iter().map(|(_, w)| *w).collect();
        DiscreteMeasure::normalized(points, masses).unwrap()
    })
}

fn planar_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.01f64..1.0), 1..=max_atoms).prop_map(|atoms| {
        let points = atoms.iter().map(|(x, y, _)| vec![*x, *y]).collect();
        let masses = atoms.iter().map(|(_, _, w)| *w).collect();
        DiscreteMeasure::normalized(points, masses).unwrap()
    })
}

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::Euclidean), Just(Metric::Manhattan), Just(Metric::Chebyshev)]
}

/// Minimal cost over all vertices of the transportation polytope. A vertex
/// is supported on `m + n − 1` cells forming a spanning tree; its masses
/// follow by peeling rows and columns that have a single open cell.
fn vertex_enumeration(a: &DiscreteMeasure, b: &DiscreteMeasure, metric: Metric) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells = m * n;
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells).filter(|c| mask >> c & 1 == 1).map(|c| (c / n, c % n)).collect();
        let mut supply = a.weights().to_vec();
        let mut demand = b.weights().to_vec();
        let mut open: Vec<bool> = vec![true; chosen.len()];
        let mut flow = vec![0.0; chosen.len()];
        let mut progress = true;
        while progress {
            progress = false;
            for i in 0..m {
                let idx: Vec<usize> = (0..chosen.len()).filter(|&c| open[c] && chosen[c].0 == i).collect();
                if idx.len() == 1 {
                    let c = idx[0];
                    flow[c] = supply[i];
                    supply[i] = 0.0;
                    demand[chosen[c].1] -= flow[c];
                    open[c] = false;
                    progress = true;
                }
            }
            for j in 0..n {
                let idx: Vec<usize> = (0..chosen.len()).filter(|&c| open[c] && chosen[c].1 == j).collect();
                if idx.len() == 1 {
                    let c = idx[0];
                    flow[c] = demand[j];
                    demand[j] = 0.0;
                    supply[chosen[c].0] -= flow[c];
                    open[c] = false;
                    progress = true;
                }
            }
        }
        let solved = open.iter().all(|o| !o)
            && flow.iter().all(|&f| f >= -1e-12)
            && supply.iter().chain(&demand).all(|r| r.abs() < 1e-12);
        if solved {
            let cost: f64 = chosen
                .iter()
                .zip(&flow)
                .map(|(&(i, j), f)| f * metric.distance(&a.points()[i], &b.points()[j]))
                .sum();
            best = best.min(cost);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms_on_line(a in line_measure(8), b in line_measure(8), c in line_measure(8)) {
        let (a, b, c): (Measure, Measure, Measure) = (a.into(), b.into(), c.into());
        let d = |x: &Measure, y: &Measure| wasserstein1_1d(x, y).unwrap();
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-12);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn metric_axioms_in_plane(a in planar_measure(6), b in planar_measure(6), c in planar_measure(6), metric in metric()) {
        let (a, b, c): (Measure, Measure, Measure) = (a.into(), b.into(), c.into());
        let d = |x: &Measure, y: &Measure| wasserstein(x, y, metric).unwrap();
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-9);
        prop_assert!(d(&a, &a).abs() <= 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn point_measures_are_isometric(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let dx: Measure = DiscreteMeasure::dirac(vec![x]).unwrap().into();
        let dy: Measure = DiscreteMeasure::dirac(vec![y]).unwrap().into();
        prop_assert_eq!(wasserstein1_1d(&dx, &dy).unwrap(), (x - y).abs());
    }

    #[test]
    fn lp_matches_cdf_formula(a in line_measure(20), b in line_measure(20)) {
        let sol = kantorovich_lp(&a, &b, Metric::Euclidean).unwrap();
        let cdf = wasserstein1_1d(&a.clone().into(), &b.clone().into()).unwrap();
        prop_assert!((sol.value - cdf).abs() <= 1e-9);
        // strong duality
        prop_assert!((sol.dual_value() - sol.value).abs() <= 1e-9);
        prop_assert!((monge_cost(&sol.plan, Metric::Euclidean) - sol.value).abs() <= 1e-12);
    }

    #[test]
    fn lp_matches_vertex_enumeration(a in planar_measure(4), b in planar_measure(3), metric in metric()) {
        let lp = kantorovich_lp(&a, &b, metric).unwrap().value;
        let brute = vertex_enumeration(&a, &b, metric);
        prop_assert!((lp - brute).abs() <= 1e-12, "lp {} brute {}", lp, brute);
    }

    #[test]
    fn any_plan_costs_at_least_the_optimum(a in planar_measure(6), b in planar_measure(6), t in 0.0f64..=1.0) {
        let opt = kantorovich_lp(&a, &b, Metric::Euclidean).unwrap();
        let product = TransportPlan::independent(a.clone(), b.clone()).unwrap();
        // convex combination of the product plan and the optimal plan
        let mass: Vec<Vec<f64>> = product
            .mass()
            .iter()
            .zip(opt.plan.mass())
            .map(|(r, s)| r.iter().zip(s).map(|(x, y)| t * x + (1.0 - t) * y).collect())
            .collect();
        let plan = TransportPlan::new(a, b, mass).unwrap();
        prop_assert!(monge_cost(&plan, Metric::Euclidean) >= opt.value - 1e-12);
    }

    #[test]
    fn convolution_bound(mu in line_measure(10), nu in line_measure(10), x in -5.0f64..5.0) {
        let (mu, nu): (Measure, Measure) = (mu.into(), nu.into());
        let moment = first_absolute_moment(&nu, Metric::Euclidean);
        let smeared = convolve(&mu, &nu).unwrap();
        prop_assert!(wasserstein1_1d(&mu, &smeared).unwrap() <= moment + 1e-9);
        let point: Measure = DiscreteMeasure::dirac(vec![x]).unwrap().into();
        let shifted = convolve(&point, &nu).unwrap();
        prop_assert!((wasserstein1_1d(&point, &shifted).unwrap() - moment).abs() <= 1e-9);
    }

    #[test]
    fn convolution_adds_means(mu in planar_measure(6), nu in planar_measure(6)) {
        let sum = convolve(&mu.clone().into(), &nu.clone().into()).unwrap();
        let Measure::Discrete(sum) = sum else { unreachable!() };
        for ((s, a), b) in sum.mean().iter().zip(mu.mean()).zip(nu.mean()) {
            prop_assert!((s - a - b).abs() <= 1e-12);
        }
    }
}
