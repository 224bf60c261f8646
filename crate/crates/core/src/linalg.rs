//! Dense matrices, Cholesky factorisation and least squares.
//!
//! Least squares goes through a Householder QR of the design so that nearly
//! collinear integrated regressors do not lose precision to the squared
//! condition number of the normal equations.

use crate::error::{Error, Result};

/// Relative tolerance for detecting collinear columns in [`solve_ols`].
pub const RANK_TOL: f64 = 1e-10;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(rows, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Copy of the listed columns, in the order given.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.cols) {
            return Err(Error::Dimension(format!("column {bad} out of range")));
        }
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Self::new(self.rows, idx.len(), data)
    }

    /// Copy of the listed rows, in the order given.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(self.cols * idx.len());
        for &i in idx {
            if i >= self.rows {
                return Err(Error::Dimension(format!("row {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.cols, data)
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            data.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    for (o, &b) in out.iter_mut().zip(other.row(k)) {
                        *o += a * b;
                    }
                }
            }
        }
        Self::new(self.rows, other.cols, data)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * scale))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(a: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().sum::<f64>() / a.len() as f64
}

/// Sample variance with divisor `len - 1`.
pub fn sample_variance(a: &[f64]) -> f64 {
    if a.len() < 2 {
        return 0.0;
    }
    let m = mean(a);
    a.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (a.len() - 1) as f64
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = a`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_symmetric(1e-10) {
        return Err(Error::Dimension("cholesky needs a symmetric matrix".into()));
    }
    let n = a.rows();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Matrix::new(n, n, l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs of length {} for order {n}", b.len())));
    }
    let mut w = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &w[..i]);
        w[i] = (w[i] - s) / l.get(i, i);
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l.get(k, i) * w[k]).sum();
        w[i] = (w[i] - s) / l.get(i, i);
    }
    Ok(w)
}

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: Option<f64>,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub n_eff: usize,
}

impl OlsFit {
    /// `rss / n_eff`, the ML variance estimate.
    pub fn sigma2(&self) -> f64 {
        self.rss / self.n_eff as f64
    }
}

/// Least squares of `y` on the columns of `x`, optionally with a constant.
///
/// The constant is appended as an explicit column of ones ahead of `x`.
pub fn solve_ols(y: &[f64], x: &Matrix, with_intercept: bool) -> Result<OlsFit> {
    let cols = x.columns();
    solve_ols_columns(y, &cols, with_intercept)
}

/// Same as [`solve_ols`] but with the design given as columns.
pub fn solve_ols_columns(y: &[f64], x: &[Vec<f64>], with_intercept: bool) -> Result<OlsFit> {
    let n = y.len();
    if x.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension(format!("design columns must have length {n}")));
    }
    let offset = usize::from(with_intercept);
    let m = x.len() + offset;
    if m == 0 {
        return Ok(OlsFit {
            intercept: None,
            coefficients: Vec::new(),
            residuals: y.to_vec(),
            rss: dot(y, y),
            n_eff: n,
        });
    }
    if m >= n {
        return Err(Error::Dimension(format!(
            "{m} parameters need more than {n} observations"
        )));
    }

    // Column-major working copy of the design.
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
    if with_intercept {
        a.push(vec![1.0; n]);
    }
    a.extend(x.iter().cloned());
    let scale = a.iter().map(|c| norm2(c)).fold(0.0, f64::max);
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; m];

    for j in 0..m {
        let (done, rest) = a.split_at_mut(j + 1);
        let col = &mut done[j];
        let norm = norm2(&col[j..]);
        if norm <= RANK_TOL * scale {
            return Err(rank_error(j, offset));
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        col[j] -= alpha;
        let vnorm2 = dot(&col[j..], &col[j..]);
        let v = &col[j..];
        for other in rest.iter_mut() {
            let f = 2.0 * dot(v, &other[j..]) / vnorm2;
            for (o, vi) in other[j..].iter_mut().zip(v) {
                *o -= f * vi;
            }
        }
        let f = 2.0 * dot(v, &qty[j..]) / vnorm2;
        for (o, vi) in qty[j..].iter_mut().zip(v) {
            *o -= f * vi;
        }
        diag[j] = alpha;
    }

    // Back substitution on R (strict upper part lives in a[k][j] for j < k).
    let mut coef = vec![0.0; m];
    for j in (0..m).rev() {
        let mut s = qty[j];
        for k in j + 1..m {
            s -= a[k][j] * coef[k];
        }
        coef[j] = s / diag[j];
    }
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("least squares coefficients"));
    }

    let (intercept, coefficients) = if with_intercept {
        (Some(coef[0]), coef[1..].to_vec())
    } else {
        (None, coef)
    };
    let mut residuals = y.to_vec();
    if let Some(b0) = intercept {
        residuals.iter_mut().for_each(|r| *r -= b0);
    }
    for (c, b) in x.iter().zip(&coefficients) {
        for (r, xi) in residuals.iter_mut().zip(c) {
            *r -= b * xi;
        }
    }
    let rss = dot(&residuals, &residuals);
    Ok(OlsFit {
        intercept,
        coefficients,
        residuals,
        rss,
        n_eff: n,
    })
}

fn rank_error(design_col: usize, offset: usize) -> Error {
    Error::RankDeficient {
        column: design_col.saturating_sub(offset),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    /// Solves the normal equations by Gauss-Jordan elimination with partial pivoting.
    fn normal_equations(y: &[f64], x: &Matrix, intercept: bool) -> Vec<f64> {
        let mut cols = x.columns();
        if intercept {
            cols.insert(0, vec![1.0; y.len()]);
        }
        let m = cols.len();
        let mut aug: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = (0..m).map(|j| dot(&cols[i], &cols[j])).collect();
                row.push(dot(&cols[i], y));
                row
            })
            .collect();
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&a, &b| aug[a][c].abs().partial_cmp(&aug[b][c].abs()).unwrap())
                .unwrap();
            aug.swap(c, piv);
            for r in 0..m {
                if r != c {
                    let f = aug[r][c] / aug[c][c];
                    for k in c..=m {
                        aug[r][k] -= f * aug[c][k];
                    }
                }
            }
        }
        (0..m).map(|i| aug[i][m] / aug[i][i]).collect()
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let l = cholesky(&Matrix::identity(3)).unwrap();
        assert_eq!(l, Matrix::identity(3));
        let a = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        assert_eq!(l.as_slice(), &[2.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn cholesky_toeplitz_multiplies_back() {
        let a = Matrix::from_fn(3, 3, |i, j| 0.5f64.powi((i as i32 - j as i32).abs())).unwrap();
        let l = cholesky(&a).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(l.get(i, j), 0.0);
            }
        }
        let back = l.matmul(&l.transpose()).unwrap();
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn cholesky_solve_recovers_rhs() {
        let a = Matrix::from_fn(4, 4, |i, j| 0.5f64.powi((i as i32 - j as i32).abs())).unwrap();
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let back = a.mul_vec(&x).unwrap();
        for (u, v) in back.iter().zip([1.0, -2.0, 0.5, 3.0]) {
            assert_abs_diff_eq!(*u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn matrix_rejects_non_finite() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn ols_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x).collect();
        let fit = solve_ols(&y, &Matrix::from_columns(&[xs]).unwrap(), true).unwrap();
        assert_abs_diff_eq!(fit.intercept.unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn ols_identity_without_intercept() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let fit = solve_ols(&xs, &Matrix::from_columns(&[xs.clone()]).unwrap(), false).unwrap();
        assert!(fit.intercept.is_none());
        assert_abs_diff_eq!(fit.coefficients[0], 1.0, epsilon = 1e-14);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-13));
    }

    #[test]
    fn ols_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_matrix(&mut rng, 50, 3);
        let y: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for intercept in [true, false] {
            let fit = solve_ols(&y, &x, intercept).unwrap();
            let oracle = normal_equations(&y, &x, intercept);
            let mut got = fit.coefficients.clone();
            if let Some(b0) = fit.intercept {
                got.insert(0, b0);
            }
            for (g, o) in got.iter().zip(&oracle) {
                assert_abs_diff_eq!(g, o, epsilon = 1e-8);
            }
            assert!((fit.rss - dot(&fit.residuals, &fit.residuals)).abs() <= 1e-12 * fit.rss);
            if intercept {
                assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ols_gradient_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(&mut rng, 80, 6);
        let y: Vec<f64> = (0..80).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let fit = solve_ols(&y, &x, true).unwrap();
        let scale = x.max_abs() * (x.rows() as f64).sqrt() * norm2(&y);
        for c in x.columns() {
            assert!(dot(&c, &fit.residuals).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn ols_flags_redundant_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 2.0 * u - v).collect();
        let y = a.clone();
        let x = Matrix::from_columns(&[a, b, c]).unwrap();
        assert!(matches!(
            solve_ols(&y, &x, true),
            Err(Error::RankDeficient { column: 2 })
        ));
        let constant = Matrix::from_columns(&[vec![3.0; 30]]).unwrap();
        assert!(matches!(
            solve_ols(&y, &constant, true),
            Err(Error::RankDeficient { column: 0 })
        ));
    }

    proptest::proptest! {
        #[test]
        fn ols_invariant_to_row_permutation(seed in 0u64..1000, shift in 1usize..39) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_matrix(&mut rng, 40, 4);
            let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let perm: Vec<usize> = (0..40).map(|i| (i * 7 + shift) % 40).collect();
            let xp = x.select_rows(&perm).unwrap();
            let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
            let a = solve_ols(&y, &x, true).unwrap();
            let b = solve_ols(&yp, &xp, true).unwrap();
            proptest::prop_assert!((a.intercept.unwrap() - b.intercept.unwrap()).abs() < 1e-10);
            for (u, v) in a.coefficients.iter().zip(&b.coefficients) {
                proptest::prop_assert!((u - v).abs() < 1e-10);
            }
        }
    }
}
