//! Full-batch gradient descent with per-step logging of the weight-norm
//! functionals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autograd::{backward, value_and_grad};
use crate::data::{AssumptionParams, Dataset};
use crate::error::{Error, Result};
use crate::linalg::euclidean_norm;
use crate::network::{forward, NetworkConfig, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    InverseDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub eta0: f64,
}

impl Schedule {
    pub fn constant(eta0: f64) -> Self {
        Schedule {
            kind: ScheduleKind::Constant,
            eta0,
        }
    }

    pub fn inverse_decay(eta0: f64) -> Self {
        Schedule {
            kind: ScheduleKind::InverseDecay,
            eta0,
        }
    }

    pub fn eta(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eta0,
            ScheduleKind::InverseDecay => self.eta0 / (t as f64 + 1.0),
        }
    }

    /// `Σ_{t'<t} η(t')`
    pub fn cumulative(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eta0 * t as f64,
            ScheduleKind::InverseDecay => (0..t).map(|s| self.eta(s)).sum(),
        }
    }
}

/// One logged state of a run, `eta` being the rate of the step taken from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: u64,
    pub eta: f64,
    pub loss: f64,
    pub fbar: f64,
    pub gbar: f64,
    pub finf: f64,
    pub neighbour_max: f64,
    pub delta: f64,
    /// `Σ_{t'<t} η(t')`
    pub eta_cum: f64,
}

/// `g_k = ½ L² ‖A_{k+1} − A_k‖_F²`, `k = 1..L-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub t: u64,
    pub k: usize,
    pub g_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Overflow { step: u64, layer: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub depth: usize,
    pub rows: Vec<LogRow>,
    pub layers: Vec<LayerRow>,
    /// Smallest slack seen in the per-row `f_{k,m}` evolution inequality.
    pub f_evolution_min_slack: Option<f64>,
    pub status: RunStatus,
}

impl RunLog {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn losses(&self) -> Vec<(u64, f64)> {
        self.rows.iter().map(|r| (r.t, r.loss)).collect()
    }
}

pub fn log_row(w: &Weights, t: u64, eta: f64, eta_cum: f64, loss: f64) -> LogRow {
    LogRow {
        t,
        eta,
        loss,
        fbar: w.fbar(),
        gbar: w.gbar(),
        finf: w.norm_f_inf(),
        neighbour_max: w.neighbour_max(),
        delta: w.delta,
        eta_cum,
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {eta}")));
    }
    Ok(())
}

fn apply_step(cfg: &NetworkConfig, w: &Weights, grad: &crate::autograd::Grad, eta: f64) -> Result<Weights> {
    let mut next = w.clone();
    for (j, (a, g)) in next.layers.iter_mut().zip(&grad.layers).enumerate() {
        a.axpy(-eta, g);
        if !a.is_finite() {
            return Err(Error::Overflow {
                layer: j + 1,
                what: "updated weights are not finite".into(),
            });
        }
    }
    if cfg.delta_trainable {
        next.delta -= eta * grad.delta_grad;
        if !(next.delta > 0.0 && next.delta.is_finite()) {
            return Err(Error::Overflow {
                layer: 0,
                what: format!("updated delta {} left (0, inf)", next.delta),
            });
        }
    }
    Ok(next)
}

/// `A_k ← A_k − η ∇_{α_k} J` for all layers, and `δ ← δ − η ∂J/∂δ` when trainable.
pub fn gd_step(cfg: &NetworkConfig, w: &Weights, data: &Dataset, eta: f64) -> Result<Weights> {
    check_eta(eta)?;
    let (_, grad) = value_and_grad(cfg, data, w)?;
    apply_step(cfg, w, &grad, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub log_layers: bool,
    pub stride: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            log_layers: false,
            stride: 1,
        }
    }
}

/// `(1/N) Σ_i ‖h_{k-1}‖² ‖G_k‖_∞²` per layer.
fn layer_sensitivity(cfg: &NetworkConfig, data: &Dataset, w: &Weights) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cfg.depth];
    for (x, y) in data.xs.iter().zip(&data.ys) {
        let tr = forward(cfg, w, x.as_slice(), false)?;
        let bt = backward(w, &tr, y.as_slice())?;
        for (j, o) in out.iter_mut().enumerate() {
            let h = euclidean_norm(tr.hidden(j));
            let g = bt.g(j + 1).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            *o += h * h * g * g;
        }
    }
    let n = data.len() as f64;
    Ok(out.into_iter().map(|v| v / n).collect())
}

/// `f_{k,m} = ½ L ‖row m of A_k‖²`
fn row_energies(w: &Weights) -> Vec<f64> {
    let l = w.depth() as f64;
    w.layers
        .iter()
        .flat_map(|a| (0..a.dim()).map(move |m| 0.5 * l * a.row_norm(m).powi(2)))
        .collect()
}

fn push_layer_rows(w: &Weights, t: u64, out: &mut Vec<LayerRow>) {
    let l = w.depth() as f64;
    for (j, pair) in w.layers.windows(2).enumerate() {
        out.push(LayerRow {
            t,
            k: j + 1,
            g_k: 0.5 * l * l * pair[1].sub(&pair[0]).frobenius_sq(),
        });
    }
}

/// Runs `steps` gradient-descent updates. Overflow stops the run early and is
/// recorded in the log status rather than returned as an error.
pub fn train(
    cfg: &NetworkConfig,
    w0: &Weights,
    data: &Dataset,
    sched: &Schedule,
    steps: u64,
    opts: TrainOptions,
) -> Result<(Weights, RunLog)> {
    cfg.check_weights(w0)?;
    let stride = opts.stride.max(1);
    let mut w = w0.clone();
    let mut log = RunLog {
        depth: cfg.depth,
        rows: Vec::new(),
        layers: Vec::new(),
        f_evolution_min_slack: None,
        status: RunStatus::Completed,
    };
    let mut eta_cum = 0.0;
    for t in 0..=steps {
        let eta = sched.eta(t);
        let logged = t % stride == 0 || t == steps;
        let result = if t < steps {
            check_eta(eta)?;
            value_and_grad(cfg, data, &w).map(|(v, g)| (v, Some(g)))
        } else {
            crate::autograd::objective(cfg, data, &w).map(|v| (v, None))
        };
        let (value, grad) = match result {
            Ok(r) => r,
            Err(Error::Overflow { layer, .. }) => {
                log.status = RunStatus::Overflow { step: t, layer };
                break;
            }
            Err(e) => return Err(e),
        };
        if logged {
            log.rows.push(log_row(&w, t, eta, eta_cum, value));
            if opts.log_layers {
                push_layer_rows(&w, t, &mut log.layers);
            }
        }
        let Some(grad) = grad else { break };
        let before = opts.log_layers.then(|| row_energies(&w));
        let sens = if opts.log_layers {
            Some(layer_sensitivity(cfg, data, &w)?)
        } else {
            None
        };
        let next = match apply_step(cfg, &w, &grad, eta) {
            Ok(n) => n,
            Err(Error::Overflow { layer, .. }) => {
                log.status = RunStatus::Overflow { step: t, layer };
                break;
            }
            Err(e) => return Err(e),
        };
        if let (Some(before), Some(sens)) = (before, sens) {
            let after = row_energies(&next);
            let d = cfg.width;
            // The bound carries a factor √L·δ, which is 1 when δ = L^{-1/2}.
            let scale = (cfg.depth as f64).sqrt() * w.delta.abs();
            let mut worst = log.f_evolution_min_slack.unwrap_or(f64::INFINITY);
            for (idx, (b, a)) in before.iter().zip(&after).enumerate() {
                let r = eta * scale * sens[idx / d].sqrt();
                let slack = b.sqrt() + r / 2f64.sqrt() - a.sqrt();
                worst = worst.min(slack);
            }
            log.f_evolution_min_slack = Some(worst);
        }
        w = next;
        eta_cum += eta;
    }
    Ok((w, log))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrReport {
    pub max_eta: f64,
    pub eta_threshold: f64,
    pub eta_margin: f64,
    pub eta_sum: f64,
    pub budget: f64,
    pub sum_margin: f64,
    /// Largest number of steps with `Σ η ≤ budget` (infinite when unbounded).
    pub largest_feasible_steps: f64,
    pub pass: bool,
}

/// Checks the per-step cap and the cumulative budget on the learning rates.
pub fn lr_feasibility(params: &AssumptionParams, sched: &Schedule, steps: u64) -> LrReport {
    let eta_threshold = params.max_learning_rate();
    let budget = params.learning_budget();
    let max_eta = if steps == 0 { 0.0 } else { sched.eta(0) };
    let eta_sum = sched.cumulative(steps);
    let largest_feasible_steps = if sched.eta0 <= 0.0 {
        f64::INFINITY
    } else {
        match sched.kind {
            ScheduleKind::Constant => (budget / sched.eta0).floor(),
            // Harmonic sums obey H_T ≤ 1 + ln T.
            ScheduleKind::InverseDecay => {
                if sched.eta0 > budget {
                    0.0
                } else {
                    (budget / sched.eta0 - 1.0).exp().floor().max(1.0)
                }
            }
        }
    };
    LrReport {
        max_eta,
        eta_threshold,
        eta_margin: eta_threshold - max_eta,
        eta_sum,
        budget,
        sum_margin: budget - eta_sum,
        largest_feasible_steps,
        pass: max_eta <= eta_threshold && eta_sum <= budget,
    }
}

const LOG_HEADER: &str = "t,eta,loss,fbar,gbar,finf,neighbour_max,delta,eta_cum";
const LAYER_HEADER: &str = "t,k,g_k";

impl RunLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(LOG_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.t, r.eta, r.loss, r.fbar, r.gbar, r.finf, r.neighbour_max, r.delta, r.eta_cum
            );
        }
        s
    }

    pub fn layers_to_csv(&self) -> String {
        let mut s = String::from(LAYER_HEADER);
        s.push('\n');
        for r in &self.layers {
            let _ = writeln!(s, "{},{},{:e}", r.t, r.k, r.g_k);
        }
        s
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<LogRow>> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(LOG_HEADER) {
            return Err(Error::invalid(format!("run log header must be `{LOG_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 9 {
                return Err(Error::invalid(format!("run log row {} has {} fields", i + 2, f.len())));
            }
            let num = |k: usize| -> Result<f64> {
                f[k].parse::<f64>()
                    .map_err(|e| Error::invalid(format!("run log row {}: {e}", i + 2)))
            };
            rows.push(LogRow {
                t: f[0]
                    .parse()
                    .map_err(|e| Error::invalid(format!("run log row {}: {e}", i + 2)))?,
                eta: num(1)?,
                loss: num(2)?,
                fbar: num(3)?,
                gbar: num(4)?,
                finf: num(5)?,
                neighbour_max: num(6)?,
                delta: num(7)?,
                eta_cum: num(8)?,
            });
        }
        Ok(rows)
    }

    pub fn layers_from_csv(text: &str) -> Result<Vec<LayerRow>> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(LAYER_HEADER) {
            return Err(Error::invalid(format!("layer log header must be `{LAYER_HEADER}`")));
        }
        let mut out = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::invalid(format!("layer log row {} is malformed", i + 2));
            if f.len() != 3 {
                return Err(bad());
            }
            out.push(LayerRow {
                t: f[0].parse().map_err(|_| bad())?,
                k: f[1].parse().map_err(|_| bad())?,
                g_k: f[2].parse().map_err(|_| bad())?,
            });
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn save_layers(&self, path: &Path) -> Result<()> {
        fs::write(path, self.layers_to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Reads a run log CSV back; the per-layer file and status are not part of it.
    pub fn load(path: &Path, depth: usize) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rows = RunLog::rows_from_csv(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(RunLog {
            depth,
            rows,
            layers: Vec::new(),
            f_evolution_min_slack: None,
            status: RunStatus::Completed,
        })
    }
}
