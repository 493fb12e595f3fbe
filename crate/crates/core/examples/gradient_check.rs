//! Analytic gradients against central finite differences, with δ trainable.
//!
//! `cargo run --release --example gradient_check`

use reslab::autograd::{finite_diff_grad, grad_objective, FD_GRAD_STEP};
use reslab::data::{init_weights, sample_free_inputs, sphere_targets, Dataset, InitMode};
use reslab::network::NetworkConfig;

fn main() -> reslab::Result<()> {
    for depth in [2, 8, 32] {
        let cfg = NetworkConfig::new(4, depth).with_trainable_delta(true);
        let data = Dataset::new(sample_free_inputs(3, 4, 1), sphere_targets(3, 4, 1), 1)?;
        let w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.5 }, None, 1)?;
        let g = grad_objective(&cfg, &data, &w)?;
        let fd = finite_diff_grad(&cfg, &data, &w, FD_GRAD_STEP)?;
        let mut worst: f64 = 0.0;
        for (a, b) in g.layers.iter().zip(&fd.layers) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1e-3));
            }
        }
        println!(
            "L={depth:>3} max rel err (layers) {worst:.2e}  dJ/ddelta analytic {:.10} numeric {:.10}",
            g.delta_grad, fd.delta_grad
        );
    }
    Ok(())
}
