//! Config-driven depth sweeps and the commands behind the `reslab` binary.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    distances_csv, eps_table_csv, fit_inputs_csv, fit_power_law, geometric_grid, scaling_limit_distance,
    scatter_csv, scatter_rows, steps_to_epsilon, total_scaling, two_variation, PathFunction, VariationMode,
};
use crate::autograd::{finite_diff_grad, grad_objective, FD_GRAD_STEP};
use crate::bounds::{self, BoundReport, Status};
use crate::data::{
    check_assumptions, init_weights, near_init_targets, sample_inputs, sphere_targets, AssumptionParams, Dataset,
    InitMode, InputMode, DEFAULT_MAX_RETRIES,
};
use crate::error::{Error, Result};
use crate::network::{Activation, NetworkConfig, Weights};
use crate::training::{lr_feasibility, train, RunLog, RunStatus, Schedule, ScheduleKind, TrainOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    Sphere,
    NearInit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Gaussian,
    Certified,
    Zero,
}

/// Every knob of a sweep. Unknown keys are rejected; missing keys take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub depths: Vec<usize>,
    pub alpha0: f64,
    pub beta0: f64,
    pub delta_trainable: bool,
    pub activation: Activation,
    pub schedule: ScheduleKind,
    pub eta0: f64,
    #[serde(rename = "T")]
    pub t: u64,
    pub c0: f64,
    pub input_mode: InputMode,
    pub target_mode: TargetMode,
    pub epsilon_init: f64,
    pub init: InitKind,
    pub init_fill: f64,
    pub max_retries: usize,
    pub log_layers: bool,
    pub log_stride: u64,
    pub c_alpha: f64,
    pub hessian_probes: usize,
    pub eps_levels: usize,
    pub scatter_entry: [usize; 2],
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: 16,
            n: 8,
            seed: 0,
            depths: (3..=10).map(|k| 1usize << k).collect(),
            alpha0: 0.5,
            beta0: 1.0,
            delta_trainable: false,
            activation: Activation::Tanh,
            schedule: ScheduleKind::Constant,
            eta0: 0.5,
            t: 200,
            c0: 0.1,
            input_mode: InputMode::SphereFree,
            target_mode: TargetMode::Sphere,
            epsilon_init: 0.0,
            init: InitKind::Gaussian,
            init_fill: 1.0,
            max_retries: DEFAULT_MAX_RETRIES,
            log_layers: false,
            log_stride: 1,
            c_alpha: 1.0,
            hessian_probes: bounds::HESSIAN_PROBES,
            eps_levels: 12,
            scatter_entry: [0, 0],
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("d and N must be at least 1"));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::invalid("depths must be a nonempty list of positive integers"));
        }
        if self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("depths must be strictly ascending"));
        }
        if !(0.0..=1.0).contains(&self.alpha0) || !(0.0..=1.0).contains(&self.beta0) {
            return Err(Error::invalid("alpha0 and beta0 must lie in [0, 1]"));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::invalid("eta0 must be positive"));
        }
        if !(self.c0 > 0.0) || !(self.c_alpha > 0.0) {
            return Err(Error::invalid("c0 and c_alpha must be positive"));
        }
        if self.epsilon_init < 0.0 {
            return Err(Error::invalid("epsilon_init must be nonnegative"));
        }
        Ok(())
    }

    pub fn network(&self, depth: usize) -> NetworkConfig {
        NetworkConfig {
            width: self.d,
            depth,
            delta_exponent: self.alpha0,
            delta_trainable: self.delta_trainable,
            activation: self.activation,
        }
    }

    pub fn params(&self, depth: usize) -> Result<AssumptionParams> {
        AssumptionParams::new(self.c0, self.n, self.d, depth)
    }

    pub fn sched(&self) -> Schedule {
        Schedule {
            kind: self.schedule,
            eta0: self.eta0,
        }
    }

    fn init_mode(&self) -> InitMode {
        match self.init {
            InitKind::Gaussian => InitMode::Gaussian { beta0: self.beta0 },
            InitKind::Certified => InitMode::Certified { fill: self.init_fill },
            InitKind::Zero => InitMode::Zero,
        }
    }

    /// Per-depth weight seed, so depths draw independent weights.
    fn weight_seed(&self, depth: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(depth as u64)
    }
}

/// Inputs shared by every depth of a sweep.
pub fn sweep_inputs(cfg: &ExperimentConfig) -> Result<Vec<crate::linalg::Vector>> {
    let p = cfg.params(cfg.depths[0])?;
    sample_inputs(cfg.input_mode, cfg.n, cfg.d, cfg.seed, &p, cfg.max_retries)
}

/// Dataset and initial weights at one depth.
pub fn setup_depth(cfg: &ExperimentConfig, inputs: &[crate::linalg::Vector], depth: usize) -> Result<(NetworkConfig, Dataset, Weights)> {
    let net = cfg.network(depth);
    net.validate()?;
    let params = cfg.params(depth)?;
    let w0 = init_weights(&net, cfg.init_mode(), Some(&params), cfg.weight_seed(depth))?;
    let ys = match cfg.target_mode {
        TargetMode::Sphere => sphere_targets(cfg.n, cfg.d, cfg.seed),
        TargetMode::NearInit => near_init_targets(&net, inputs, &w0, cfg.epsilon_init, cfg.seed)?,
    };
    let data = Dataset::new(inputs.to_vec(), ys, cfg.seed)?;
    Ok((net, data, w0))
}

#[derive(Debug, Clone)]
pub struct DepthRun {
    pub depth: usize,
    pub data: Dataset,
    pub initial: Weights,
    pub weights: Weights,
    pub log: RunLog,
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Trains every depth of the sweep, in parallel across depths. Results come
/// back in depth order and do not depend on the thread count.
pub fn run_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<DepthRun>> {
    cfg.validate()?;
    let inputs = sweep_inputs(cfg)?;
    let opts = TrainOptions {
        log_layers: cfg.log_layers,
        stride: cfg.log_stride,
    };
    let sched = cfg.sched();
    pool(threads)?.install(|| {
        cfg.depths
            .par_iter()
            .map(|&depth| {
                let (net, data, w0) = setup_depth(cfg, &inputs, depth)?;
                let (weights, log) = train(&net, &w0, &data, &sched, cfg.t, opts)?;
                Ok(DepthRun {
                    depth,
                    data,
                    initial: w0,
                    weights,
                    log,
                })
            })
            .collect()
    })
}

pub fn run_file(dir: &Path, depth: usize) -> PathBuf {
    dir.join(format!("run_L{depth}.csv"))
}

pub fn weights_file(dir: &Path, depth: usize) -> PathBuf {
    dir.join(format!("weights_L{depth}.txt"))
}

pub fn layers_file(dir: &Path, depth: usize) -> PathBuf {
    dir.join(format!("layers_L{depth}.csv"))
}

pub fn dataset_file(dir: &Path, depth: usize, cfg: &ExperimentConfig) -> PathBuf {
    match cfg.target_mode {
        TargetMode::Sphere => dir.join("dataset.csv"),
        TargetMode::NearInit => dir.join(format!("dataset_L{depth}.csv")),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub depths: Vec<usize>,
    pub final_loss: Vec<f64>,
    pub status: Vec<RunStatus>,
}

/// Trains the sweep and writes, per depth, the run log, final weights and
/// (when enabled) the per-layer log, plus the dataset and a summary.
pub fn cmd_train(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<TrainSummary> {
    let runs = run_sweep(cfg, threads)?;
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    write(&dir.join("config.json"), &(cfg.to_json() + "\n"))?;
    for r in &runs {
        r.log.save(&run_file(dir, r.depth))?;
        r.weights.save(&weights_file(dir, r.depth))?;
        if cfg.log_layers {
            r.log.save_layers(&layers_file(dir, r.depth))?;
        }
        r.data.save(&dataset_file(dir, r.depth, cfg), Some(cfg.c0))?;
    }
    let summary = TrainSummary {
        depths: runs.iter().map(|r| r.depth).collect(),
        final_loss: runs.iter().map(|r| r.log.rows.last().map_or(f64::NAN, |x| x.loss)).collect(),
        status: runs.iter().map(|r| r.log.status.clone()).collect(),
    };
    write(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary).expect("serializes") + "\n"))?;
    if let Some(r) = runs.iter().find(|r| !r.log.completed()) {
        if let RunStatus::Overflow { step, layer } = r.log.status {
            return Err(Error::Overflow {
                layer,
                what: format!("training at depth {} diverged at step {step}", r.depth),
            });
        }
    }
    Ok(summary)
}

fn tag(mut reports: Vec<BoundReport>, depth: usize, extra: &[(&str, f64)]) -> Vec<BoundReport> {
    for r in &mut reports {
        r.context.insert("L".into(), depth as f64);
        for (k, v) in extra {
            r.context.insert((*k).into(), *v);
        }
    }
    reports
}

/// Bound suites at one weight state: forward per sample, loss ceiling,
/// gradient upper and lower bounds, and the Hessian.
fn certify_state(cfg: &ExperimentConfig, net: &NetworkConfig, data: &Dataset, w: &Weights) -> Result<Vec<BoundReport>> {
    let depth = net.depth;
    let params = cfg.params(depth)?;
    let mut out = Vec::new();
    for (i, x) in data.xs.iter().enumerate() {
        out.extend(tag(bounds::certify_forward(net, w, x.as_slice(), cfg.c_alpha)?, depth, &[("sample", i as f64)]));
    }
    out.extend(bounds::certify_loss_ceiling(net, data, w, cfg.c_alpha)?);
    out.extend(bounds::certify_gradient_upper(net, data, w, cfg.c_alpha)?);
    out.extend(bounds::certify_gradient_lower(net, data, w, &params)?);
    out.extend(bounds::certify_hessian(net, data, w, cfg.c_alpha, cfg.hessian_probes)?);
    Ok(out)
}

fn assumption_reports(net: &NetworkConfig, data: &Dataset, w0: &Weights, p: &AssumptionParams) -> Result<(bool, Vec<BoundReport>)> {
    let rep = check_assumptions(net, data, w0, p)?;
    let reports = rep
        .clauses
        .iter()
        .map(|c| {
            let mut r = BoundReport::hypothesis(&format!("assumption.{}", c.name), c.observed, c.threshold, Default::default());
            r.pass = c.pass;
            r.status = if c.pass { Status::Pass } else { Status::PreconditionViolated };
            r
        })
        .collect();
    Ok((rep.pass(), reports))
}

fn lr_report(cfg: &ExperimentConfig, p: &AssumptionParams) -> (bool, Vec<BoundReport>) {
    let r = lr_feasibility(p, &cfg.sched(), cfg.t);
    let mut a = BoundReport::hypothesis("learning_rate.step", r.max_eta, r.eta_threshold, Default::default());
    let mut b = BoundReport::hypothesis("learning_rate.budget", r.eta_sum, r.budget, Default::default());
    b.context.insert("largest_feasible_steps".into(), r.largest_feasible_steps.min(f64::MAX));
    a.context.insert("T".into(), cfg.t as f64);
    (r.pass, vec![a, b])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOutcome {
    pub reports: Vec<BoundReport>,
    pub failures: usize,
}

/// Runs the assumption checks and every bound suite at initialization and,
/// when available, at the trained weights. Runs are loaded from `run_dir`
/// if given; otherwise, when the assumptions and learning-rate conditions
/// hold, the sweep is trained so that the loss envelope can be certified.
pub fn cmd_certify(cfg: &ExperimentConfig, run_dir: Option<&Path>, threads: Option<usize>) -> Result<CertifyOutcome> {
    cfg.validate()?;
    let inputs = sweep_inputs(cfg)?;
    let per_depth: Vec<Result<Vec<BoundReport>>> = pool(threads)?.install(|| {
        cfg.depths
            .par_iter()
            .map(|&depth| {
                let (net, data, w0) = setup_depth(cfg, &inputs, depth)?;
                let p = cfg.params(depth)?;
                let mut out = Vec::new();
                let (assume_ok, a) = assumption_reports(&net, &data, &w0, &p)?;
                out.extend(tag(a, depth, &[]));
                let (lr_ok, lr) = lr_report(cfg, &p);
                out.extend(tag(lr, depth, &[]));
                out.extend(tag(certify_state(cfg, &net, &data, &w0)?, depth, &[("t", 0.0)]));
                let trained = match run_dir {
                    Some(dir) => {
                        let w = Weights::load(&weights_file(dir, depth))?;
                        net.check_weights(&w)?;
                        let log = RunLog::load(&run_file(dir, depth), depth)?;
                        Some((w, log))
                    }
                    None if assume_ok && lr_ok => {
                        let opts = TrainOptions::default();
                        let (w, log) = train(&net, &w0, &data, &cfg.sched(), cfg.t, opts)?;
                        Some((w, log))
                    }
                    None => None,
                };
                if let Some((w, log)) = trained {
                    let t_end = log.rows.last().map_or(0.0, |r| r.t as f64);
                    out.extend(tag(certify_state(cfg, &net, &data, &w)?, depth, &[("t", t_end)]));
                    let mut env = bounds::certify_run_envelope(&log.rows, &p)?;
                    if !(assume_ok && lr_ok) {
                        for r in &mut env {
                            if r.status == Status::Fail {
                                r.status = Status::PreconditionViolated;
                            }
                        }
                    }
                    out.extend(tag(env, depth, &[]));
                }
                Ok(out)
            })
            .collect()
    });
    let mut reports = Vec::new();
    for r in per_depth {
        reports.extend(r?);
    }
    let failures = reports.iter().filter(|r| r.is_failure()).count();
    ensure_dir(&cfg.output_dir)?;
    write(&cfg.output_dir.join("certify.jsonl"), &bounds::to_json_lines(&reports))?;
    Ok(CertifyOutcome { reports, failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradcheckRow {
    pub depth: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub delta_rel_error: f64,
    pub pass: bool,
}

/// Entrywise agreement rule for the finite-difference oracle: relative error
/// `≤ rel`, or absolute error `≤ abs_floor` for entries near the roundoff floor.
pub fn grad_entries_agree(analytic: f64, numeric: f64, rel: f64, abs_floor: f64) -> bool {
    let err = (analytic - numeric).abs();
    err <= rel * analytic.abs().max(numeric.abs()) || err <= abs_floor
}

pub const GRADCHECK_REL: f64 = 1e-6;
pub const GRADCHECK_ABS_FLOOR: f64 = 1e-9;

/// Compares the analytic gradient with central differences at the initial
/// weights of every depth.
pub fn cmd_gradcheck(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<GradcheckRow>> {
    cfg.validate()?;
    let inputs = sweep_inputs(cfg)?;
    let rows: Result<Vec<GradcheckRow>> = pool(threads)?.install(|| {
        cfg.depths
            .par_iter()
            .map(|&depth| {
                let (net, data, w0) = setup_depth(cfg, &inputs, depth)?;
                let g = grad_objective(&net, &data, &w0)?;
                let fd = finite_diff_grad(&net, &data, &w0, FD_GRAD_STEP)?;
                let mut row = GradcheckRow {
                    depth,
                    max_rel_error: 0.0,
                    max_abs_error: 0.0,
                    delta_rel_error: 0.0,
                    pass: true,
                };
                for (a, b) in g.layers.iter().zip(&fd.layers) {
                    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
                        let err = (x - y).abs();
                        row.max_abs_error = row.max_abs_error.max(err);
                        if err > 0.0 {
                            row.max_rel_error = row.max_rel_error.max(err / x.abs().max(y.abs()));
                        }
                        row.pass &= grad_entries_agree(x, y, GRADCHECK_REL, GRADCHECK_ABS_FLOOR);
                    }
                }
                if net.delta_trainable {
                    let err = (g.delta_grad - fd.delta_grad).abs();
                    row.delta_rel_error = err / g.delta_grad.abs().max(f64::MIN_POSITIVE);
                    row.pass &= grad_entries_agree(g.delta_grad, fd.delta_grad, GRADCHECK_REL, GRADCHECK_ABS_FLOOR);
                }
                Ok(row)
            })
            .collect()
    });
    let rows = rows?;
    ensure_dir(&cfg.output_dir)?;
    let mut s = String::from("L,max_rel_error,max_abs_error,delta_rel_error,pass\n");
    for r in &rows {
        s.push_str(&format!(
            "{},{:e},{:e},{:e},{}\n",
            r.depth, r.max_rel_error, r.max_abs_error, r.delta_rel_error, r.pass
        ));
    }
    write(&cfg.output_dir.join("gradcheck.csv"), &s)?;
    Ok(rows)
}

/// Generates the sweep's dataset(s) and writes them with their sidecars.
pub fn cmd_dataset(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let inputs = sweep_inputs(cfg)?;
    ensure_dir(&cfg.output_dir)?;
    let depths: Vec<usize> = match cfg.target_mode {
        TargetMode::Sphere => vec![cfg.depths[0]],
        TargetMode::NearInit => cfg.depths.clone(),
    };
    let mut paths = Vec::new();
    for depth in depths {
        let (_, data, _) = setup_depth(cfg, &inputs, depth)?;
        let path = dataset_file(&cfg.output_dir, depth, cfg);
        data.save(&path, Some(cfg.c0))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub depths: Vec<usize>,
    pub fits: Vec<(String, Option<crate::analysis::ScalingFit>)>,
    pub total_scaling: Option<f64>,
    pub two_variation: Vec<(usize, f64)>,
    pub notes: Vec<String>,
}

/// Reads the run artifacts of a sweep and writes the analysis tables.
pub fn cmd_analyze(cfg: &ExperimentConfig, run_dir: &Path) -> Result<AnalysisSummary> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let mut runs: Vec<(usize, Weights, RunLog)> = Vec::new();
    for &depth in &cfg.depths {
        let w = Weights::load(&weights_file(run_dir, depth))?;
        let log = RunLog::load(&run_file(run_dir, depth), depth)?;
        if w.depth() != depth {
            return Err(Error::parse(weights_file(run_dir, depth), format!("expected {depth} layers, found {}", w.depth())));
        }
        runs.push((depth, w, log));
    }
    let mut summary = AnalysisSummary {
        depths: cfg.depths.clone(),
        fits: Vec::new(),
        total_scaling: None,
        two_variation: Vec::new(),
        notes: Vec::new(),
    };

    let top = runs.iter().map(|r| r.2.rows[0].loss).fold(0.0f64, f64::max);
    let floor = runs
        .iter()
        .map(|r| r.2.rows.iter().map(|x| x.loss).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let grid = if top > 0.0 && floor > 0.0 && floor < top {
        geometric_grid(top, floor * 1.0001, cfg.eps_levels)
    } else {
        geometric_grid(top.max(f64::MIN_POSITIVE), top.max(f64::MIN_POSITIVE), 1)
    };
    for (depth, _, log) in &runs {
        write(&out.join(format!("steps_to_eps_L{depth}.csv")), &eps_table_csv(&steps_to_epsilon(&log.rows, &grid)?))?;
    }

    let weighted: Vec<(usize, Weights)> = runs.iter().map(|(l, w, _)| (*l, w.clone())).collect();
    for (l, w) in &weighted {
        let v = two_variation(&PathFunction::from_weights(w), VariationMode::Dyadic)?;
        summary.two_variation.push((*l, v));
    }
    let mut tv = String::from("L,two_variation\n");
    for (l, v) in &summary.two_variation {
        tv.push_str(&format!("{l},{v:e}\n"));
    }
    write(&out.join("two_variation.csv"), &tv)?;
    let [m, n] = cfg.scatter_entry;
    write(&out.join("scatter.csv"), &scatter_csv(&scatter_rows(&weighted, m, n)?))?;

    if runs.len() < 2 {
        summary.notes.push("scaling fits need at least two depths".into());
    } else {
        let series: [(&str, Box<dyn Fn(&(usize, Weights, RunLog)) -> f64>); 5] = [
            ("fbar_initial", Box::new(|r| r.2.rows[0].fbar)),
            ("fbar_final", Box::new(|r| r.2.rows.last().expect("row").fbar)),
            ("gbar_final", Box::new(|r| r.2.rows.last().expect("row").gbar)),
            ("weight_rms_final", Box::new(|r| crate::analysis::rms_layer_norm(&r.1))),
            ("delta_final", Box::new(|r| r.1.delta)),
        ];
        for (name, f) in series.iter() {
            let pts: Vec<(f64, f64)> = runs.iter().map(|r| (r.0 as f64, f(r))).collect();
            write(&out.join(format!("fit_{name}.csv")), &fit_inputs_csv(&pts))?;
            summary.fits.push((name.to_string(), fit_power_law(&pts).ok()));
        }
        write(&out.join("distances.csv"), &distances_csv(&scaling_limit_distance(&weighted)?))?;
        if runs.len() >= 3 {
            summary.total_scaling = Some(total_scaling(&weighted)?.total);
        } else {
            summary.notes.push("total scaling needs at least three depths".into());
        }
    }
    write(&out.join("analysis.json"), &(serde_json::to_string_pretty(&summary).expect("serializes") + "\n"))?;
    Ok(summary)
}
