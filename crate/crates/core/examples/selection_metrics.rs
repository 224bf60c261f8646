//! Selection accuracy of the detector over a few replications.

use sparse_coint::dgp::{simulate, DgpConfig, SignalPreset};
use sparse_coint::metrics::{aggregate, score_selection};
use sparse_coint::pipeline::{detect, PipelineConfig};

fn main() -> sparse_coint::Result<()> {
    // 5 true covariates out of 100, two false positives.
    let m = score_selection(&[0, 1, 2, 3, 4, 5, 6], &[0, 1, 2, 3, 4], 100)?;
    println!("worked example: FPR {:.4} FNR {:.4} FDR {:.4}", m.fpr, m.fnr, m.fdr);

    let config = PipelineConfig::default();
    let mut per_rep = Vec::new();
    for seed in 0..20 {
        let ds = simulate(&DgpConfig::simulation_design(&SignalPreset::Weak, 500, 50, 0.0, seed))?;
        let det = detect(&ds, &config)?;
        per_rep.push(score_selection(&det.selected_covariates, ds.true_active.as_ref().unwrap(), ds.p())?);
    }
    let agg = aggregate(&per_rep)?;
    println!(
        "weak signals, p = 50, {} replications: FPR {:.3} FNR {:.3} FDR {:.3}",
        agg.replications, agg.mean_fpr, agg.mean_fnr, agg.mean_fdr
    );
    Ok(())
}
