//! A run that meets every hypothesis of the convergence guarantee, checked
//! step by step against the loss envelope and the norm invariants.
//!
//! `cargo run --release --example certified_run`

use reslab::bounds::certify_run_envelope;
use reslab::data::check_assumptions;
use reslab::experiment::{setup_depth, sweep_inputs, ExperimentConfig, InitKind, TargetMode};
use reslab::data::InputMode;
use reslab::training::{lr_feasibility, train, TrainOptions};

fn main() -> reslab::Result<()> {
    let cfg = ExperimentConfig {
        d: 16,
        n: 4,
        depths: vec![256],
        c0: 0.1,
        input_mode: InputMode::Orthonormal,
        init: InitKind::Certified,
        init_fill: 0.999,
        target_mode: TargetMode::NearInit,
        epsilon_init: 5e-6,
        eta0: 3.4e-5,
        t: 10_000,
        ..Default::default()
    };
    let depth = cfg.depths[0];
    let p = cfg.params(depth)?;
    let (net, data, w0) = setup_depth(&cfg, &sweep_inputs(&cfg)?, depth)?;
    let assumptions = check_assumptions(&net, &data, &w0, &p)?;
    for c in &assumptions.clauses {
        println!("{:<16} observed {:.4e}  threshold {:.4e}  {}", c.name, c.observed, c.threshold, c.pass);
    }
    let lr = lr_feasibility(&p, &cfg.sched(), cfg.t);
    println!("eta {:.4e} <= {:.4e}, sum eta {:.4} <= {:.4}: {}", lr.max_eta, lr.eta_threshold, lr.eta_sum, lr.budget, lr.pass);
    let (_, log) = train(&net, &w0, &data, &cfg.sched(), cfg.t, TrainOptions::default())?;
    for r in certify_run_envelope(&log.rows, &p)? {
        println!("{:<20} worst observed {:.4e}  bound {:.4e}  {:?}", r.name, r.observed, r.bound, r.status);
    }
    let last = log.rows.last().expect("logged");
    println!("J(0)={:.4e} J(T)={:.4e}", log.rows[0].loss, last.loss);
    Ok(())
}
