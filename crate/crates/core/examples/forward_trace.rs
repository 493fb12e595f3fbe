//! Hidden-state norms and the output Jacobian of one forward pass.
//!
//! `cargo run --release --example forward_trace -- [L]`

use reslab::data::{init_weights, sample_free_inputs, InitMode};
use reslab::linalg::{spectral_norm, SPECTRAL_MAX_ITERS, SPECTRAL_TOL};
use reslab::network::{forward, NetworkConfig};

fn main() -> reslab::Result<()> {
    let depth: usize = std::env::args().nth(1).map_or(64, |s| s.parse().expect("L"));
    let cfg = NetworkConfig::new(8, depth);
    let w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.5 }, None, 7)?;
    let x = &sample_free_inputs(1, cfg.width, 7)[0];
    let tr = forward(&cfg, &w, x.as_slice(), true)?;
    println!("d={} L={} delta={:.4} |A|_F,inf={:.4e}", cfg.width, depth, w.delta, w.norm_f_inf());
    let stride = (depth / 8).max(1);
    for k in (0..=depth).step_by(stride) {
        let h = tr.hidden(k).iter().map(|v| v * v).sum::<f64>().sqrt();
        println!("k={k:>5} |h_k|={h:.6}");
    }
    let jac = tr.jacobians.as_ref().expect("requested");
    let s = spectral_norm(&jac[0], SPECTRAL_TOL, SPECTRAL_MAX_ITERS)?;
    println!("|dh_L/dh_0|_2 = {:.6} ({} iterations)", s.value, s.iterations);
    Ok(())
}
