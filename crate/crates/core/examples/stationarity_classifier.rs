//! The information-criterion classifier on a stationary and a unit-root series.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sparse_coint::stationarity::{classify, IcSettings, PenaltyRule};

fn main() -> sparse_coint::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ar: Vec<f64> = e
        .iter()
        .scan(0.0, |s, v| {
            *s = 0.5 * *s + v;
            Some(*s)
        })
        .collect();
    let walk: Vec<f64> = e
        .iter()
        .scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        })
        .collect();

    for penalty in [PenaltyRule::Bic, PenaltyRule::Sqrt] {
        let settings = IcSettings {
            penalty,
            ..IcSettings::default()
        };
        for (name, z) in [("AR(0.5)", &ar), ("random walk", &walk)] {
            let r = classify(z, &settings)?;
            println!(
                "{penalty:>5} {name:<12} k = {} IC0 = {:.4} IC1 = {:.4} LR = {:.2} c_n = {:.2} -> {}",
                r.k_hat, r.ic0, r.ic1, r.lr_statistic, r.c_n, r.verdict
            );
        }
    }
    Ok(())
}
