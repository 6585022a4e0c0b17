//! Transportation simplex on a dense cost matrix.
//!
//! The basis is a spanning tree of the bipartite supply/demand graph with
//! `m + n − 1` cells. Dual potentials are recomputed from the tree each
//! iteration; the entering cell is the one with the most negative reduced
//! cost, switching to Bland's smallest-index rule after a run of degenerate
//! pivots so the iteration cannot cycle.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const DEGENERATE_RUN_LIMIT: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    /// `(row, column, mass)` for every basic cell, including zero-mass ones.
    pub cells: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

struct Tree {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    /// Basis slots incident to each node; rows are nodes `0..m`, columns `m..m+n`.
    adjacency: Vec<Vec<usize>>,
}

impl Tree {
    fn new(m: usize, n: usize) -> Self {
        Self { m, n, cells: Vec::new(), flow: Vec::new(), adjacency: vec![Vec::new(); m + n] }
    }

    fn push(&mut self, i: usize, j: usize, flow: f64) {
        let slot = self.cells.len();
        self.cells.push((i, j));
        self.flow.push(flow);
        self.adjacency[i].push(slot);
        self.adjacency[self.m + j].push(slot);
    }

    fn replace(&mut self, slot: usize, i: usize, j: usize, flow: f64) {
        let (oi, oj) = self.cells[slot];
        self.adjacency[oi].retain(|&s| s != slot);
        self.adjacency[self.m + oj].retain(|&s| s != slot);
        self.cells[slot] = (i, j);
        self.flow[slot] = flow;
        self.adjacency[i].push(slot);
        self.adjacency[self.m + j].push(slot);
    }

    fn other_end(&self, slot: usize, node: usize) -> usize {
        let (i, j) = self.cells[slot];
        if node == i {
            self.m + j
        } else {
            i
        }
    }

    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &slot in &self.adjacency[node] {
                let next = self.other_end(slot, node);
                if pot[next].is_nan() {
                    let (i, j) = self.cells[slot];
                    pot[next] = cost[i * self.n + j] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basis slots on the tree path from row `i` to column `j`, in order.
    fn path(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        let target = self.m + j;
        let mut via: Vec<Option<usize>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &slot in &self.adjacency[node] {
                let next = self.other_end(slot, node);
                if !seen[next] {
                    seen[next] = true;
                    via[next] = Some(slot);
                    queue.push_back(next);
                }
            }
        }
        if !seen[target] {
            return None;
        }
        let mut slots = Vec::new();
        let mut node = target;
        while node != i {
            let slot = via[node]?;
            slots.push(slot);
            node = self.other_end(slot, node);
        }
        slots.reverse();
        Some(slots)
    }
}

/// Minimizes `Σ c_ij x_ij` subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `m × n`.
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Solution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || cost.len() != m * n {
        return Err(Error::Transport("empty problem or cost matrix of wrong size".into()));
    }
    let mut tree = northwest_corner(supply, demand);
    let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-13 * cmax.max(1.0);
    let max_iterations = 1000 + 20 * m * n;

    let mut degenerate_run = 0usize;
    let mut is_basic = vec![false; m * n];
    for &(i, j) in &tree.cells {
        is_basic[i * n + j] = true;
    }

    for _ in 0..max_iterations {
        let (u, v) = tree.potentials(cost);
        let bland = degenerate_run >= DEGENERATE_RUN_LIMIT;
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if is_basic[i * n + j] {
                    continue;
                }
                let reduced = cost[i * n + j] - u[i] - v[j];
                if reduced < -tol {
                    if bland {
                        entering = Some((i, j, reduced));
                        break 'scan;
                    }
                    if entering.is_none_or(|e| reduced < e.2) {
                        entering = Some((i, j, reduced));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            let cells: Vec<(usize, usize, f64)> =
                tree.cells.iter().zip(&tree.flow).map(|(&(i, j), &f)| (i, j, f.max(0.0))).collect();
            let total = cells.iter().map(|&(i, j, f)| f * cost[i * n + j]).sum();
            return Ok(Solution { cells, cost: total, row_potentials: u, col_potentials: v });
        };

        let path = tree.path(ei, ej).ok_or_else(|| Error::Transport("basis is not a spanning tree".into()))?;
        // cells at even positions (0, 2, ...) lose mass, odd ones gain it
        let mut leaving = None;
        let mut theta = f64::INFINITY;
        for &slot in path.iter().step_by(2) {
            let f = tree.flow[slot];
            let (i, j) = tree.cells[slot];
            let better = match leaving {
                None => true,
                Some(best) => {
                    let (bi, bj) = tree.cells[best];
                    f < theta || (f == theta && i * n + j < bi * n + bj)
                }
            };
            if better {
                theta = f;
                leaving = Some(slot);
            }
        }
        let leaving = leaving.expect("cycle has a decreasing cell");
        let theta = theta.max(0.0);
        for (k, &slot) in path.iter().enumerate() {
            if k % 2 == 0 {
                tree.flow[slot] = (tree.flow[slot] - theta).max(0.0);
            } else {
                tree.flow[slot] += theta;
            }
        }
        let (li, lj) = tree.cells[leaving];
        is_basic[li * n + lj] = false;
        is_basic[ei * n + ej] = true;
        tree.replace(leaving, ei, ej, theta);

        degenerate_run = if theta <= 1e-15 { degenerate_run + 1 } else { 0 };
    }
    Err(Error::Transport(format!("no optimum after {max_iterations} pivots")))
}

/// Initial basic feasible solution; always yields `m + n − 1` cells,
/// adding zero-mass cells where a row and column are exhausted together.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Tree {
    let (m, n) = (supply.len(), demand.len());
    let mut tree = Tree::new(m, n);
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        if i == m - 1 && j == n - 1 {
            tree.push(i, j, s[i].max(0.0));
            break;
        }
        if i == m - 1 {
            let f = d[j].max(0.0);
            tree.push(i, j, f);
            s[i] -= f;
            j += 1;
        } else if j == n - 1 || s[i] < d[j] {
            let f = s[i].max(0.0);
            tree.push(i, j, f);
            d[j] -= f;
            i += 1;
        } else {
            let f = d[j].max(0.0);
            tree.push(i, j, f);
            s[i] -= f;
            j += 1;
        }
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_marginals(sol: &Solution, supply: &[f64], demand: &[f64]) {
        let mut rows = vec![0.0; supply.len()];
        let mut cols = vec![0.0; demand.len()];
        for &(i, j, f) in &sol.cells {
            assert!(f >= 0.0);
            rows[i] += f;
            cols[j] += f;
        }
        for (a, b) in rows.iter().zip(supply) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in cols.iter().zip(demand) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn northwest_corner_spans() {
        let t = northwest_corner(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(t.cells.len(), 3);
    }

    #[test]
    fn classic_three_by_four() {
        // optimum 82/16, confirmed with an independent LP solver
        let supply = [7.0 / 16.0, 5.0 / 16.0, 4.0 / 16.0];
        let demand = [3.0 / 16.0, 3.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0];
        #[rustfmt::skip]
        let cost = [
            2.0, 3.0, 11.0, 7.0,
            1.0, 0.0, 6.0, 1.0,
            5.0, 8.0, 15.0, 9.0,
        ];
        let sol = solve(&supply, &demand, &cost).unwrap();
        check_marginals(&sol, &supply, &demand);
        assert!((sol.cost * 16.0 - 82.0).abs() < 1e-12, "cost {}", sol.cost * 16.0);
        // strong duality
        let dual: f64 = supply.iter().zip(&sol.row_potentials).map(|(a, u)| a * u).sum::<f64>()
            + demand.iter().zip(&sol.col_potentials).map(|(b, v)| b * v).sum::<f64>();
        assert!((dual - sol.cost).abs() < 1e-12);
    }

    #[test]
    fn degenerate_square() {
        let supply = [0.25; 4];
        let demand = [0.25; 4];
        let cost: Vec<f64> = (0..16).map(|k| ((k / 4) as f64 - (3 - k % 4) as f64).abs()).collect();
        let sol = solve(&supply, &demand, &cost).unwrap();
        check_marginals(&sol, &supply, &demand);
        assert!(sol.cost.abs() < 1e-15);
    }
}
