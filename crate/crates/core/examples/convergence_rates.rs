//! Steps needed for the depth-averaged loss to fall below ε, under a constant
//! and a 1/(t+1) learning rate, for η₀ and 2η₀.
//!
//! `cargo run --release --example convergence_rates -- [eta_const] [eta_decay] [T]`

use reslab::analysis::{average_loss_curve, curve_steps_to_epsilon, rate_fit, shared_levels};
use reslab::experiment::{run_sweep, ExperimentConfig};
use reslab::training::ScheduleKind;

fn curve(cfg: &ExperimentConfig) -> reslab::Result<Vec<(u64, f64)>> {
    let runs = run_sweep(cfg, None)?;
    let rows: Vec<&[reslab::training::LogRow]> = runs.iter().map(|r| r.log.rows.as_slice()).collect();
    average_loss_curve(&rows)
}

fn main() -> reslab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let eta_const: f64 = args.first().map_or(0.1, |s| s.parse().expect("eta_const"));
    let eta_decay: f64 = args.get(1).map_or(5.0, |s| s.parse().expect("eta_decay"));
    let t: u64 = args.get(2).map_or(500, |s| s.parse().expect("T"));
    let base = ExperimentConfig {
        depths: (3..=8).map(|k| 1usize << k).collect(),
        t,
        ..Default::default()
    };
    for (kind, eta0, log_steps) in [
        (ScheduleKind::Constant, eta_const, false),
        (ScheduleKind::InverseDecay, eta_decay, true),
    ] {
        let curves: Vec<Vec<(u64, f64)>> = [eta0, 2.0 * eta0]
            .iter()
            .map(|&e| curve(&ExperimentConfig { schedule: kind, eta0: e, ..base.clone() }))
            .collect::<reslab::Result<_>>()?;
        let refs: Vec<&[(u64, f64)]> = curves.iter().map(|c| c.as_slice()).collect();
        let levels = shared_levels(&refs, 12)?;
        println!("{kind:?}: levels {:.3e} .. {:.3e}", levels[0], levels[levels.len() - 1]);
        let mut slopes = Vec::new();
        for (e, c) in [eta0, 2.0 * eta0].iter().zip(&curves) {
            let fit = rate_fit(&curve_steps_to_epsilon(c, &levels)?, log_steps)?;
            println!("  eta0={e}: slope={:.4} intercept={:.4} r2={:.4}", fit.slope, fit.intercept, fit.r_squared);
            slopes.push(fit.slope);
        }
        println!("  slope ratio (eta0 / 2eta0) = {:.3}", slopes[0] / slopes[1]);
    }
    Ok(())
}
