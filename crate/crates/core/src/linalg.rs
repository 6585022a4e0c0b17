//! Dense symmetric eigenvalue problems.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! algorithm (the EISPACK `tred2`/`tql2` pair). The same QL kernel, run
//! without eigenvector accumulation, diagonalizes the Jacobi matrices that
//! define Gauss quadrature rules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Only the lower triangle is read. The result satisfies
/// `‖A v − λ v‖ ≤ 1e-10·‖A‖` for every pair or an error is returned.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}, not square", n, matrix.ncols())));
    }
    if n == 0 {
        return Ok(SymmetricEigen { eigenvalues: vec![], eigenvectors: DMatrix::zeros(0, 0) });
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if j <= i { matrix[(i, j)] } else { matrix[(j, i)] }).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[r][order[c]]);

    let result = SymmetricEigen { eigenvalues, eigenvectors };
    let scale = max_abs_row_sum(matrix).max(f64::MIN_POSITIVE);
    let worst = (0..n).map(|i| result.residual(matrix, i)).fold(0.0, f64::max);
    if worst > 1e-10 * scale {
        return Err(Error::Eigen(format!("residual {worst:.3e} exceeds 1e-10·‖A‖ = {:.3e}", 1e-10 * scale)));
    }
    Ok(result)
}

/// The `k` smallest eigenpairs of a symmetric matrix.
pub fn symmetric_eigen_lowest(matrix: &DMatrix<f64>, k: usize) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    if k > n {
        return Err(Error::Eigen(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let full = symmetric_eigen(matrix)?;
    Ok(SymmetricEigen {
        eigenvalues: full.eigenvalues[..k].to_vec(),
        eigenvectors: full.eigenvectors.columns(0, k).into_owned(),
    })
}

impl SymmetricEigen {
    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// `‖A v_i − λ_i v_i‖₂`.
    pub fn residual(&self, matrix: &DMatrix<f64>, i: usize) -> f64 {
        let v = self.eigenvectors.column(i);
        let av = matrix * v;
        (av - v * self.eigenvalues[i]).norm()
    }
}

pub(crate) fn max_abs_row_sum(matrix: &DMatrix<f64>) -> f64 {
    matrix.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if off.len() + 1 != n {
        return Err(Error::Eigen("off-diagonal length must be one less than diagonal".into()));
    }
    let mut d = diag.to_vec();
    // tql2 expects the subdiagonal in e[1..n]
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder tridiagonalization. On entry `v` holds the symmetric matrix;
/// on exit it holds the orthogonal transformation, `d` the diagonal and
/// `e[1..]` the subdiagonal.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on a symmetric tridiagonal matrix. Eigenvalues are
/// left in `d` (unsorted); if `v` is given, the rotations are accumulated
/// into it.
fn tql2(d: &mut [f64], e: &mut [f64], mut v: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::Eigen(format!(
                        "QL iteration for eigenvalue {l} exceeded {MAX_QL_SWEEPS} sweeps (|e| = {:.3e})",
                        e[l].abs()
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for row in v.iter_mut() {
                            h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_lowest() {
        let eig = symmetric_eigen_lowest(&DMatrix::identity(4, 4), 1).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.eigenvector(0).norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_two_lowest() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let eig = symmetric_eigen_lowest(&m, 2).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0]);
        assert_abs_diff_eq!(eig.eigenvectors[(1, 0)].abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.eigenvectors[(2, 1)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = symmetric_eigen_lowest(&m, 1).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-15);
        let v = eig.eigenvector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v[0] * v[1], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0].abs(), s, epsilon = 1e-15);
    }

    #[test]
    fn matches_nalgebra_on_random_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 5, 17, 60] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let s = &a + a.transpose();
            let ours = symmetric_eigen(&s).unwrap();
            let mut theirs: Vec<f64> = s.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.eigenvalues.iter().zip(&theirs) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
            let gram = ours.eigenvectors.transpose() * &ours.eigenvectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-13);
        }
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // second-difference matrix: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 40;
        let eig = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, lam) in eig.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*lam, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]);
        assert!(symmetric_eigen(&m).is_err());
    }
}
