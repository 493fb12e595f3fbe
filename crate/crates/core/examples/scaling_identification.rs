//! Fits how δ and the trained weights scale with depth: δ trainable from
//! `L^{-1/2}`, then δ frozen at `L^{-α₀}` for several initial weight scales.
//!
//! `cargo run --release --example scaling_identification -- [eta0] [T]`

use reslab::analysis::{fit_power_law, total_scaling};
use reslab::experiment::{run_sweep, ExperimentConfig};
use reslab::network::Weights;

fn trained(cfg: &ExperimentConfig) -> reslab::Result<Vec<(usize, Weights)>> {
    Ok(run_sweep(cfg, None)?.into_iter().map(|r| (r.depth, r.weights)).collect())
}

fn main() -> reslab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let eta0: f64 = args.first().map_or(0.1, |s| s.parse().expect("eta0"));
    let t: u64 = args.get(1).map_or(200, |s| s.parse().expect("T"));
    let base = ExperimentConfig { eta0, t, ..Default::default() };

    let runs = trained(&ExperimentConfig { delta_trainable: true, ..base.clone() })?;
    let pts: Vec<(f64, f64)> = runs.iter().map(|(l, w)| (*l as f64, w.delta)).collect();
    let fit = fit_power_law(&pts)?;
    println!("trainable delta, alpha0=0.5: alpha_T={:.4} (r2 {:.4})", fit.exponent, fit.r_squared);

    for alpha0 in [0.25, 0.5, 0.75] {
        for beta0 in [0.5, 1.0] {
            let s = total_scaling(&trained(&ExperimentConfig { alpha0, beta0, ..base.clone() })?)?;
            println!(
                "alpha0={alpha0} beta0={beta0}: beta_T={:.4} total={:.4} (2 alpha0 = {})",
                s.weights.exponent,
                s.total,
                2.0 * alpha0
            );
        }
    }
    Ok(())
}
