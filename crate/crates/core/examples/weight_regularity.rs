//! Norms of the weights along training, and the regularity of the rescaled
//! layer path `s ↦ √L·A_⌊Ls⌋` across depths.
//!
//! `cargo run --release --example weight_regularity`

use reslab::analysis::{fit_power_law, scaling_limit_distance, two_variation, PathFunction, VariationMode};
use reslab::experiment::{run_sweep, ExperimentConfig};

fn main() -> reslab::Result<()> {
    let cfg = ExperimentConfig {
        depths: vec![16, 64, 256, 1024],
        t: 200,
        ..Default::default()
    };
    let runs = run_sweep(&cfg, None)?;
    let f0: Vec<(f64, f64)> = runs.iter().map(|r| (r.depth as f64, r.log.rows[0].fbar)).collect();
    let fit = fit_power_law(&f0)?;
    println!("fbar(0) ~ L^-{:.4} (r2 {:.4})", fit.exponent, fit.r_squared);
    for r in &runs {
        let g0 = r.log.rows[0].gbar;
        let (lo, hi) = r.log.rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.gbar / g0), hi.max(x.gbar / g0)));
        let v = two_variation(&PathFunction::from_weights(&r.weights), VariationMode::Dyadic)?;
        println!("L={:>5} gbar(t)/gbar(0) in [{lo:.3}, {hi:.3}]  2-variation {v:.4}", r.depth);
    }
    let weights: Vec<_> = runs.into_iter().map(|r| (r.depth, r.weights)).collect();
    for d in scaling_limit_distance(&weights)? {
        println!("sup distance L={} vs L={}: {:.5}", d.l_lo, d.l_hi, d.sup_distance);
    }
    Ok(())
}
