//! A small Monte Carlo grid, printed as the CSV tables the CLI writes.
//!
//!     cargo run --release --example monte_carlo_tables -- [replications]

use sparse_coint::dgp::SignalPreset;
use sparse_coint::harness::{render_tables, run_grid, ExperimentGrid};

fn main() -> sparse_coint::Result<()> {
    let replications = std::env::args().nth(1).map_or(Ok(50), |s| s.parse()).expect("replication count");
    let grid = ExperimentGrid {
        n_values: vec![500],
        p_values: vec![10, 50],
        rho_values: vec![0.0, 0.5, 1.0],
        gamma_values: vec![1.0],
        presets: vec![SignalPreset::Strong, SignalPreset::Weak],
        replications,
        base_seed: 2024,
        ..ExperimentGrid::default()
    };
    let results = run_grid(&grid, |i, total, r| {
        eprintln!("[{i}/{total}] {} p={} rho={} ({:.2}s)", r.cell.preset_label(), r.cell.p, r.cell.rho, r.wall_time.as_secs_f64());
    })?;
    for table in render_tables(&results) {
        println!("== {}\n{}", table.file_name, table.contents);
    }
    Ok(())
}
