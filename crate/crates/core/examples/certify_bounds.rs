//! Certifies the forward, loss, gradient and Hessian bounds at a random
//! weight state inside the small-norm ball and prints each slack.
//!
//! `cargo run --release --example certify_bounds`

use reslab::bounds::{certify_forward, certify_gradient_lower, certify_gradient_upper, certify_hessian, certify_loss_ceiling};
use reslab::data::{init_weights, sample_free_inputs, sphere_targets, AssumptionParams, Dataset, InitMode};
use reslab::network::NetworkConfig;

fn main() -> reslab::Result<()> {
    let (d, depth, c_alpha) = (8, 64, 1.0);
    let cfg = NetworkConfig::new(d, depth);
    let data = Dataset::new(sample_free_inputs(4, d, 3), sphere_targets(4, d, 3), 3)?;
    let mut w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.5 }, None, 3)?;
    let scale = 0.9 * c_alpha / (depth as f64).sqrt() / w.norm_f_inf();
    for a in &mut w.layers {
        *a = a.scaled(scale);
    }
    let p = AssumptionParams::new(0.1, data.len(), d, depth)?;
    let mut reports = certify_forward(&cfg, &w, data.xs[0].as_slice(), c_alpha)?;
    reports.extend(certify_loss_ceiling(&cfg, &data, &w, c_alpha)?);
    reports.extend(certify_gradient_upper(&cfg, &data, &w, c_alpha)?);
    reports.extend(certify_gradient_lower(&cfg, &data, &w, &p)?);
    reports.extend(certify_hessian(&cfg, &data, &w, c_alpha, 200)?);
    for r in &reports {
        println!("{:<28} {:?}  observed {:>12.5e}  bound {:>12.5e}  slack {:>12.5e}", r.name, r.status, r.observed, r.bound, r.slack);
    }
    Ok(())
}
