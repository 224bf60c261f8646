//! The dense linear algebra underneath: Toeplitz Cholesky and QR-based OLS.

use sparse_coint::linalg::{cholesky, solve_ols, Matrix};

fn main() -> sparse_coint::Result<()> {
    let omega = Matrix::from_fn(4, 4, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()))?;
    let l = cholesky(&omega)?;
    let back = l.matmul(&l.transpose())?;
    let err = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (back.get(i, j) - omega.get(i, j)).abs())
        .fold(0.0, f64::max);
    println!("Cholesky of 0.5^|i-j| (4x4), max |LL' - A| = {err:.2e}");
    for i in 0..4 {
        println!("  {:?}", l.row(i).iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    }

    let x = Matrix::from_fn(8, 2, |t, j| if j == 0 { t as f64 } else { ((t * t) % 5) as f64 })?;
    let y: Vec<f64> = (0..8).map(|t| 1.0 + 2.0 * x.get(t, 0) - 0.5 * x.get(t, 1)).collect();
    let fit = solve_ols(&y, &x, true)?;
    println!("OLS: intercept {:.6}, slopes {:?}, rss {:.2e}", fit.intercept.unwrap(), fit.coefficients, fit.rss);
    Ok(())
}
