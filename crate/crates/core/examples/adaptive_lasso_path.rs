//! Adaptive LASSO by hand: OLS weights, the BIC path over the penalty grid,
//! and a KKT certificate for the chosen fit.

use sparse_coint::adalasso::{certify_kkt, compute_weights, lambda_max, select_lambda_bic, CenteredGram, SolverSettings};
use sparse_coint::dgp::{simulate, DgpConfig, SignalPreset};
use sparse_coint::linalg::solve_ols;
use sparse_coint::pipeline::PipelineConfig;

fn main() -> sparse_coint::Result<()> {
    let ds = simulate(&DgpConfig::simulation_design(&SignalPreset::Strong, 500, 20, 0.0, 7))?;

    let initial = solve_ols(&ds.y, &ds.x, true)?;
    let weights = compute_weights(&initial, 1.0)?;
    let grid = PipelineConfig::default().effective_grid(ds.n())?;
    println!("lambda_max = {:.3}", lambda_max(&CenteredGram::new(&ds), &weights));

    let (fit, table) = select_lambda_bic(&ds, &weights, &grid, &SolverSettings::default())?;
    println!("{:>14} {:>14} {:>7}", "lambda", "bic", "active");
    for row in &table {
        let bic = row.bic.map_or("-".into(), |b| format!("{b:.3}"));
        let mark = if row.lambda == fit.lambda { " <" } else { "" };
        println!("{:>14.4} {:>14} {:>7}{mark}", row.lambda, bic, row.active);
    }

    println!("selected (one-based): {:?}", fit.active_set.iter().map(|j| j + 1).collect::<Vec<_>>());
    for &j in &fit.active_set {
        println!("  beta_{:<2} = {:>8.4}   (ols {:>8.4})", j + 1, fit.beta[j], initial.coefficients[j]);
    }
    let kkt = certify_kkt(&fit, &ds, 1e-6);
    let ok = kkt.coordinates.iter().filter(|c| c.ok).count();
    println!("KKT at 1e-6: {} ({ok}/{} coordinates)", if kkt.pass { "pass" } else { "fail" }, kkt.coordinates.len());
    Ok(())
}
