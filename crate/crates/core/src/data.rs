//! Synthetic unit-sphere datasets, initial weights, and the assumption
//! checks under which the convergence theory applies.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autograd::objective;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::{check_activation, NetworkConfig, Weights};

pub const DEFAULT_MAX_RETRIES: usize = 1000;
const UNIT_TOL: f64 = 1e-12;

// RNG streams, one per purpose, so inputs/targets/weights never share draws.
const STREAM_INPUTS: u64 = 1;
const STREAM_TARGETS: u64 = 2;
const STREAM_WEIGHTS: u64 = 3;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on `S^{d-1}` via a normalized standard Gaussian.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    loop {
        let v = Vector((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// `max_{i≠j} |⟨x_i, x_j⟩|`, zero for fewer than two points.
pub fn separation(xs: &[Vector]) -> f64 {
    let mut s = 0.0f64;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            s = s.max(xs[i].dot(&xs[j]).abs());
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub xs: Vec<Vector>,
    pub ys: Vec<Vector>,
    pub separation: f64,
    pub seed: u64,
}

impl Dataset {
    /// Validates shapes and unit norms, and records the separation.
    pub fn new(xs: Vec<Vector>, ys: Vec<Vector>, seed: u64) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("dataset needs at least one sample"));
        }
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!("{} inputs but {} targets", xs.len(), ys.len())));
        }
        let d = xs[0].len();
        for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
            if x.len() != d || y.len() != d {
                return Err(Error::invalid(format!("sample {i} does not have width {d}")));
            }
            for (kind, v) in [("x", x), ("y", y)] {
                if !v.is_finite() || (v.norm() - 1.0).abs() > UNIT_TOL {
                    return Err(Error::invalid(format!(
                        "{kind}_{i} has norm {} (unit norm required)",
                        v.norm()
                    )));
                }
            }
        }
        let separation = separation(&xs);
        Ok(Dataset { xs, ys, separation, seed })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn width(&self) -> usize {
        self.xs[0].len()
    }

    pub fn with_targets(&self, ys: Vec<Vector>) -> Result<Self> {
        Dataset::new(self.xs.clone(), ys, self.seed)
    }

    /// CSV body: `i,kind,component,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,kind,component,value\n");
        for (i, (x, y)) in self.xs.iter().zip(&self.ys).enumerate() {
            for (kind, v) in [("x", x), ("y", y)] {
                for (c, val) in v.as_slice().iter().enumerate() {
                    let _ = writeln!(s, "{i},{kind},{c},{val:e}");
                }
            }
        }
        s
    }

    pub fn meta(&self, c0: Option<f64>) -> DatasetMeta {
        DatasetMeta {
            n: self.len(),
            d: self.width(),
            seed: self.seed,
            separation: self.separation,
            c0,
        }
    }

    /// Writes the CSV and a JSON sidecar next to it (same stem, `.json`).
    pub fn save(&self, csv_path: &Path, c0: Option<f64>) -> Result<()> {
        fs::write(csv_path, self.to_csv()).map_err(|e| Error::io(csv_path, e))?;
        let side = sidecar_path(csv_path);
        let json = serde_json::to_string_pretty(&self.meta(c0)).expect("metadata serializes");
        fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let side = sidecar_path(csv_path);
        let meta_text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: DatasetMeta =
            serde_json::from_str(&meta_text).map_err(|e| Error::parse(&side, e.to_string()))?;
        let ds = parse_csv(&text, &meta).map_err(|e| Error::parse(csv_path, e.to_string()))?;
        if ds.separation != meta.separation {
            return Err(Error::parse(
                &side,
                format!("recorded separation {} but data gives {}", meta.separation, ds.separation),
            ));
        }
        Ok(ds)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub separation: f64,
    pub c0: Option<f64>,
}

fn parse_csv(text: &str, meta: &DatasetMeta) -> Result<Dataset> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("i,kind,component,value") {
        return Err(Error::invalid("missing header `i,kind,component,value`"));
    }
    let mut xs = vec![vec![f64::NAN; meta.d]; meta.n];
    let mut ys = vec![vec![f64::NAN; meta.d]; meta.n];
    for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |m: &str| Error::invalid(format!("row {}: {m}", ln + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let i: usize = f[0].trim().parse().map_err(|_| bad("bad sample index"))?;
        let c: usize = f[2].trim().parse().map_err(|_| bad("bad component"))?;
        let v: f64 = f[3].trim().parse().map_err(|_| bad("bad value"))?;
        if i >= meta.n || c >= meta.d {
            return Err(bad("index out of range"));
        }
        match f[1].trim() {
            "x" => xs[i][c] = v,
            "y" => ys[i][c] = v,
            _ => return Err(bad("kind must be x or y")),
        }
    }
    if xs.iter().chain(&ys).flatten().any(|v| v.is_nan()) {
        return Err(Error::invalid("some components are missing"));
    }
    Dataset::new(
        xs.into_iter().map(Vector).collect(),
        ys.into_iter().map(Vector).collect(),
        meta.seed,
    )
}

/// The constants `c₀, N, d, L` of the standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub c0: f64,
    pub n: usize,
    pub d: usize,
    pub l: usize,
}

impl AssumptionParams {
    pub fn new(c0: f64, n: usize, d: usize, l: usize) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::invalid(format!("c0 must be positive, got {c0}")));
        }
        if n == 0 || d == 0 || l == 0 {
            return Err(Error::invalid("N, d and L must be at least 1"));
        }
        Ok(AssumptionParams { c0, n, d, l })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
    fn df(&self) -> f64 {
        self.d as f64
    }
    fn lf(&self) -> f64 {
        self.l as f64
    }

    /// `(8N)^{-1} e^{-4c₀}`
    pub fn separation_threshold(&self) -> f64 {
        separation_threshold(self.n, self.c0)
    }

    /// `2^{-9/2} N^{-1/2} d^{-1/2} e^{-4.2c₀} L^{-1}`
    pub fn row_norm_threshold(&self) -> f64 {
        2f64.powf(-4.5) / (self.nf() * self.df()).sqrt() * (-4.2 * self.c0).exp() / self.lf()
    }

    /// `2^{-15} 3^{-2} N^{-2} d^{-1} c₀² e^{-8.2c₀}`
    pub fn initial_loss_threshold(&self) -> f64 {
        2f64.powi(-15) / 9.0 / (self.nf() * self.nf() * self.df())
            * self.c0
            * self.c0
            * (-8.2 * self.c0).exp()
    }

    /// `c₀ L^{-1/2}`
    pub fn finf_threshold(&self) -> f64 {
        self.c0 / self.lf().sqrt()
    }

    /// `2^{-7/2} N^{-1/2} e^{-4.2c₀} L^{-1}`
    pub fn neighbour_threshold(&self) -> f64 {
        2f64.powf(-3.5) / self.nf().sqrt() * (-4.2 * self.c0).exp() / self.lf()
    }

    /// `(1/160) N^{-1} d^{-1} e^{-10.5c₀}`
    pub fn max_learning_rate(&self) -> f64 {
        (-10.5 * self.c0).exp() / (160.0 * self.nf() * self.df())
    }

    /// `d^{-1} log L`
    pub fn learning_budget(&self) -> f64 {
        self.lf().ln() / self.df()
    }

    /// Decay rate `(1/32) N^{-1} e^{-2c₀}` of the loss envelope.
    pub fn envelope_rate(&self) -> f64 {
        (-2.0 * self.c0).exp() / (32.0 * self.nf())
    }

    /// Drift coefficient `34 d c₀⁴ e^{6.4c₀} L^{-1}` of the loss envelope.
    pub fn envelope_drift(&self) -> f64 {
        34.0 * self.df() * self.c0.powi(4) * (6.4 * self.c0).exp() / self.lf()
    }

    /// The two explicit depth conditions behind "L large enough":
    /// `(3/64) N^{-1} d^{-1} c₀² e^{2.2c₀} (log L)^{3/2} ≤ L^{1/2}` and
    /// `34 c₀⁴ e^{6.4c₀} log L ≤ L`. Returns (lhs, rhs) pairs.
    pub fn depth_conditions(&self) -> [(f64, f64); 2] {
        let c0 = self.c0;
        let logl = self.lf().ln();
        [
            (
                3.0 / 64.0 / (self.nf() * self.df()) * c0 * c0 * (2.2 * c0).exp() * logl.powf(1.5),
                self.lf().sqrt(),
            ),
            (34.0 * c0.powi(4) * (6.4 * c0).exp() * logl, self.lf()),
        ]
    }
}

pub fn separation_threshold(n: usize, c0: f64) -> f64 {
    (-4.0 * c0).exp() / (8.0 * n as f64)
}

/// How training inputs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Uniform on the sphere, resampled until the separation clause holds.
    Sphere,
    /// Uniform on the sphere with no separation requirement.
    SphereFree,
    /// A uniformly random orthonormal family (needs `N ≤ d`).
    Orthonormal,
}

/// Rejection-sampled sphere inputs satisfying the separation clause.
pub fn sample_sphere_inputs(
    n: usize,
    d: usize,
    seed: u64,
    params: &AssumptionParams,
    max_retries: usize,
) -> Result<Vec<Vector>> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("N and d must be at least 1"));
    }
    let threshold = separation_threshold(n, params.c0);
    let mut rng = rng_for(seed, STREAM_INPUTS);
    let mut best = f64::INFINITY;
    for _ in 0..max_retries.max(1) {
        let xs: Vec<Vector> = (0..n).map(|_| sphere_point(&mut rng, d)).collect();
        let s = separation(&xs);
        if s <= threshold {
            return Ok(xs);
        }
        best = best.min(s);
    }
    Err(Error::Infeasible {
        achieved: best,
        threshold,
        attempts: max_retries.max(1),
    })
}

pub fn sample_free_inputs(n: usize, d: usize, seed: u64) -> Vec<Vector> {
    let mut rng = rng_for(seed, STREAM_INPUTS);
    (0..n).map(|_| sphere_point(&mut rng, d)).collect()
}

/// Gram-Schmidt on Gaussian draws: a random orthonormal family.
pub fn sample_orthonormal_inputs(n: usize, d: usize, seed: u64) -> Result<Vec<Vector>> {
    if n == 0 || n > d {
        return Err(Error::invalid(format!("orthonormal inputs need 1 ≤ N ≤ d, got N={n}, d={d}")));
    }
    let mut rng = rng_for(seed, STREAM_INPUTS);
    let mut out: Vec<Vector> = Vec::with_capacity(n);
    while out.len() < n {
        let mut v = sphere_point(&mut rng, d);
        // Two passes keep the family orthogonal to roundoff.
        for _ in 0..2 {
            for u in &out {
                let p = v.dot(u);
                v = v.sub(&u.scaled(p));
            }
        }
        if let Some(u) = v.normalized() {
            out.push(u);
        }
    }
    Ok(out)
}

pub fn sample_inputs(
    mode: InputMode,
    n: usize,
    d: usize,
    seed: u64,
    params: &AssumptionParams,
    max_retries: usize,
) -> Result<Vec<Vector>> {
    match mode {
        InputMode::Sphere => sample_sphere_inputs(n, d, seed, params, max_retries),
        InputMode::SphereFree => Ok(sample_free_inputs(n, d, seed)),
        InputMode::Orthonormal => sample_orthonormal_inputs(n, d, seed),
    }
}

/// Independent uniform sphere targets.
pub fn sphere_targets(n: usize, d: usize, seed: u64) -> Vec<Vector> {
    let mut rng = rng_for(seed, STREAM_TARGETS);
    (0..n).map(|_| sphere_point(&mut rng, d)).collect()
}

/// Separated sphere inputs with independent sphere targets.
pub fn sample_sphere_dataset(
    n: usize,
    d: usize,
    seed: u64,
    params: &AssumptionParams,
    max_retries: usize,
) -> Result<Dataset> {
    let xs = sample_sphere_inputs(n, d, seed, params, max_retries)?;
    Dataset::new(xs, sphere_targets(n, d, seed), seed)
}

/// `y_i = normalize(ŷ_i(w0) + ε ξ_i)` with `ξ_i` a uniform unit direction.
pub fn near_init_targets(
    cfg: &NetworkConfig,
    xs: &[Vector],
    w0: &Weights,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<Vector>> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let mut rng = rng_for(seed, STREAM_TARGETS);
    let mut ys = Vec::with_capacity(xs.len());
    for x in xs {
        let yhat = crate::network::output(cfg, w0, x.as_slice())?;
        let xi = sphere_point(&mut rng, cfg.width);
        let v = yhat.add(&xi.scaled(epsilon));
        // Vectors already unit to rounding are kept as is, so that ε = 0 at
        // zero weights reproduces the inputs bit for bit.
        let y = if (v.norm() - 1.0).abs() <= 4.0 * f64::EPSILON {
            v
        } else {
            v.normalized().ok_or_else(|| Error::invalid("perturbed output vanished"))?
        };
        ys.push(y);
    }
    Ok(ys)
}

/// Initial weight generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitMode {
    Zero,
    /// iid `N(0, (d^{-1} L^{-β₀})²)` entries.
    Gaussian { beta0: f64 },
    /// Rows drawn uniformly on the sphere, rescaled to `fill` times the
    /// row-norm threshold.
    Certified { fill: f64 },
}

pub fn init_weights(cfg: &NetworkConfig, mode: InitMode, params: Option<&AssumptionParams>, seed: u64) -> Result<Weights> {
    cfg.validate()?;
    let d = cfg.width;
    let l = cfg.depth;
    let mut rng = rng_for(seed, STREAM_WEIGHTS);
    let layers = match mode {
        InitMode::Zero => vec![Matrix::zeros(d); l],
        InitMode::Gaussian { beta0 } => {
            let std = (l as f64).powf(-beta0) / d as f64;
            (0..l)
                .map(|_| {
                    let data = (0..d * d).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect();
                    Matrix::from_row_major(d, data)
                })
                .collect::<Result<Vec<_>>>()?
        }
        InitMode::Certified { fill } => {
            let p = params.ok_or_else(|| Error::invalid("certified init needs assumption parameters"))?;
            if !(fill > 0.0 && fill <= 1.0) {
                return Err(Error::invalid(format!("fill must lie in (0, 1], got {fill}")));
            }
            let r = fill * p.row_norm_threshold();
            (0..l)
                .map(|_| {
                    let mut data = Vec::with_capacity(d * d);
                    for _ in 0..d {
                        data.extend(sphere_point(&mut rng, d).scaled(r).0);
                    }
                    Matrix::from_row_major(d, data)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Weights::new(layers, cfg.delta())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub clauses: Vec<Clause>,
}

impl AssumptionReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// Checks clauses (i)-(v) for the given data and initial weights.
pub fn check_assumptions(
    cfg: &NetworkConfig,
    data: &Dataset,
    w0: &Weights,
    params: &AssumptionParams,
) -> Result<AssumptionReport> {
    let act = check_activation(&cfg.activation);
    let act_violation = act
        .value_at_zero
        .max(act.slope_at_zero_gap)
        .max(act.value_bound)
        .max(act.deriv1_bound)
        .max(act.deriv2_bound);
    let want_delta = (params.l as f64).powf(-0.5);
    let delta_gap = (w0.delta - want_delta).abs() / want_delta;
    let sep_t = params.separation_threshold();
    let row = w0.max_row_norm();
    let row_t = params.row_norm_threshold();
    let j0 = objective(cfg, data, w0)?;
    let j0_t = params.initial_loss_threshold();
    let clauses = vec![
        Clause {
            name: "i_activation".into(),
            observed: act_violation,
            threshold: 0.0,
            pass: act.pass,
        },
        Clause {
            name: "ii_delta".into(),
            observed: delta_gap,
            threshold: 1e-12,
            pass: delta_gap <= 1e-12,
        },
        Clause {
            name: "iii_separation".into(),
            observed: data.separation,
            threshold: sep_t,
            pass: data.separation <= sep_t,
        },
        Clause {
            name: "iv_row_norm".into(),
            observed: row,
            threshold: row_t,
            pass: row <= row_t * (1.0 + 1e-12),
        },
        Clause {
            name: "v_initial_loss".into(),
            observed: j0,
            threshold: j0_t,
            pass: j0 <= j0_t,
        },
    ];
    Ok(AssumptionReport { clauses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Activation;

    fn params(n: usize, d: usize, l: usize) -> AssumptionParams {
        AssumptionParams::new(0.1, n, d, l).unwrap()
    }

    #[test]
    fn separation_threshold_value() {
        let t = separation_threshold(2, 0.1);
        assert!((t - 0.041_895_6).abs() < 1e-6, "{t}");
    }

    #[test]
    fn orthogonal_pair_is_separated() {
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ds = Dataset::new(xs.clone(), xs, 0).unwrap();
        assert_eq!(ds.separation, 0.0);
    }

    #[test]
    fn crowded_plane_is_infeasible() {
        let p = params(4, 2, 8);
        match sample_sphere_dataset(4, 2, 7, &p, 200) {
            Err(Error::Infeasible { achieved, threshold, attempts }) => {
                assert!(achieved > threshold);
                assert_eq!(attempts, 200);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params(2, 64, 8);
        let a = sample_sphere_dataset(2, 64, 11, &p, 1000).unwrap();
        let b = sample_sphere_dataset(2, 64, 11, &p, 1000).unwrap();
        assert_eq!(a, b);
        assert_eq!(separation(&a.xs), a.separation);
        assert!(a.separation <= p.separation_threshold());
        let c = sample_sphere_dataset(2, 64, 12, &p, 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn orthonormal_inputs_are_orthonormal() {
        let xs = sample_orthonormal_inputs(5, 8, 3).unwrap();
        for (i, x) in xs.iter().enumerate() {
            assert!((x.norm() - 1.0).abs() < 1e-14);
            for y in &xs[i + 1..] {
                assert!(x.dot(y).abs() < 1e-14);
            }
        }
        assert!(sample_orthonormal_inputs(9, 8, 3).is_err());
    }

    #[test]
    fn near_init_zero_epsilon() {
        let cfg = NetworkConfig::new(4, 6);
        let xs = sample_free_inputs(3, 4, 1);
        let w0 = Weights::zeros(&cfg);
        let ys = near_init_targets(&cfg, &xs, &w0, 0.0, 1).unwrap();
        let ds = Dataset::new(xs.clone(), ys, 1).unwrap();
        assert!(objective(&cfg, &ds, &w0).unwrap() <= 1e-24);

        let w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.5 }, None, 2).unwrap();
        let ys = near_init_targets(&cfg, &xs, &w, 0.0, 1).unwrap();
        let ds = Dataset::new(xs.clone(), ys, 1).unwrap();
        let expect: f64 = xs
            .iter()
            .map(|x| {
                let n = crate::network::output(&cfg, &w, x.as_slice()).unwrap().norm();
                (n - 1.0).powi(2)
            })
            .sum::<f64>()
            / (2.0 * 3.0);
        let got = objective(&cfg, &ds, &w).unwrap();
        assert!((got - expect).abs() <= 1e-14 + 1e-10 * expect, "{got} vs {expect}");
    }

    #[test]
    fn zero_init_passes_row_clause() {
        let cfg = NetworkConfig::new(2, 4);
        let p = params(2, 2, 4);
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ds = Dataset::new(xs.clone(), xs, 0).unwrap();
        let w0 = Weights::zeros(&cfg);
        let r = check_assumptions(&cfg, &ds, &w0, &p).unwrap();
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.clause("iv_row_norm").unwrap().observed, 0.0);
        assert!(r.clause("iii_separation").unwrap().pass);
    }

    #[test]
    fn certified_init_hits_row_threshold() {
        let cfg = NetworkConfig::new(4, 16);
        let p = params(2, 4, 16);
        let w = init_weights(&cfg, InitMode::Certified { fill: 1.0 }, Some(&p), 5).unwrap();
        let t = p.row_norm_threshold();
        for layer in &w.layers {
            for m in 0..4 {
                assert!((layer.row_norm(m) - t).abs() <= 1e-15 * t.max(1.0));
            }
        }
    }

    #[test]
    fn gaussian_init_reports_both_numbers() {
        let cfg = NetworkConfig::new(8, 32);
        let p = params(4, 8, 32);
        let w = init_weights(&cfg, InitMode::Gaussian { beta0: 1.0 }, None, 9).unwrap();
        let xs = sample_orthonormal_inputs(4, 8, 9).unwrap();
        let ds = Dataset::new(xs.clone(), xs, 9).unwrap();
        let r = check_assumptions(&cfg, &ds, &w, &p).unwrap();
        let c = r.clause("iv_row_norm").unwrap();
        assert!(c.observed > 0.0 && c.threshold > 0.0);
        assert_eq!(c.pass, c.observed <= c.threshold * (1.0 + 1e-12));
    }

    #[test]
    fn identity_activation_and_wrong_delta_flagged() {
        let cfg = NetworkConfig::new(2, 4).with_activation(Activation::Identity).with_delta_exponent(1.0);
        let p = params(2, 2, 4);
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ds = Dataset::new(xs.clone(), xs, 0).unwrap();
        let r = check_assumptions(&cfg, &ds, &Weights::zeros(&cfg), &p).unwrap();
        assert!(r.clause("i_activation").unwrap().pass);
        assert!(!r.clause("ii_delta").unwrap().pass);
    }

    #[test]
    fn csv_round_trip() {
        let p = params(3, 16, 8);
        let ds = sample_sphere_dataset(3, 16, 4, &p, 1000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.save(&path, Some(0.1)).unwrap();
        let back = Dataset::load(&path).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn rejects_non_unit_vectors() {
        let x = Vector(vec![2.0, 0.0]);
        assert!(Dataset::new(vec![x.clone()], vec![x], 0).is_err());
    }
}
