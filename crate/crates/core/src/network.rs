//! The bias-free residual network `h_k = h_{k-1} + δ·σ(α_k h_{k-1})`.
//!
//! Layers are stored 0-based: `Weights::layers[j]` is the weight of layer
//! `j + 1`, it consumes `hidden(j)` and produces `hidden(j + 1)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Scalar activation with its first two derivatives.
pub trait Smooth {
    fn value(&self, z: f64) -> f64;
    fn deriv1(&self, z: f64) -> f64;
    fn deriv2(&self, z: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Smooth for Activation {
    #[inline]
    fn value(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn deriv1(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }

    #[inline]
    fn deriv2(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            Activation::Identity => 0.0,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation {other:?}"))),
        }
    }
}

pub const ACTIVATION_GRID_POINTS: usize = 20_001;
pub const ACTIVATION_GRID_HALF_WIDTH: f64 = 10.0;

/// Worst observed violation of each admissibility clause (0 when satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationReport {
    pub value_at_zero: f64,
    pub slope_at_zero_gap: f64,
    pub value_bound: f64,
    pub deriv1_bound: f64,
    pub deriv2_bound: f64,
    pub max_abs_deriv2: f64,
    pub pass: bool,
}

/// Grid-checks `σ(0)=0`, `σ'(0)=1`, `|σ(z)|≤|z|`, `|σ'|≤1`, `|σ''|≤1`.
pub fn check_activation<S: Smooth + ?Sized>(a: &S) -> ActivationReport {
    const TOL: f64 = 1e-12;
    let n = ACTIVATION_GRID_POINTS;
    let h = 2.0 * ACTIVATION_GRID_HALF_WIDTH / (n - 1) as f64;
    let mut value_bound = 0.0f64;
    let mut deriv1_bound = 0.0f64;
    let mut deriv2_bound = 0.0f64;
    let mut max_abs_deriv2 = 0.0f64;
    for i in 0..n {
        let z = -ACTIVATION_GRID_HALF_WIDTH + i as f64 * h;
        value_bound = value_bound.max(a.value(z).abs() - z.abs());
        deriv1_bound = deriv1_bound.max(a.deriv1(z).abs() - 1.0);
        let d2 = a.deriv2(z).abs();
        max_abs_deriv2 = max_abs_deriv2.max(d2);
        deriv2_bound = deriv2_bound.max(d2 - 1.0);
    }
    let value_at_zero = a.value(0.0).abs();
    let slope_at_zero_gap = (a.deriv1(0.0) - 1.0).abs();
    let pass = value_at_zero <= TOL
        && slope_at_zero_gap <= TOL
        && value_bound <= TOL
        && deriv1_bound <= TOL
        && deriv2_bound <= TOL;
    ActivationReport {
        value_at_zero,
        slope_at_zero_gap,
        value_bound: value_bound.max(0.0),
        deriv1_bound: deriv1_bound.max(0.0),
        deriv2_bound: deriv2_bound.max(0.0),
        max_abs_deriv2,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub width: usize,
    pub depth: usize,
    /// `δ = depth^(-delta_exponent)`.
    pub delta_exponent: f64,
    pub delta_trainable: bool,
    pub activation: Activation,
}

impl NetworkConfig {
    pub fn new(width: usize, depth: usize) -> Self {
        NetworkConfig {
            width,
            depth,
            delta_exponent: 0.5,
            delta_trainable: false,
            activation: Activation::Tanh,
        }
    }

    pub fn with_activation(mut self, a: Activation) -> Self {
        self.activation = a;
        self
    }

    pub fn with_delta_exponent(mut self, e: f64) -> Self {
        self.delta_exponent = e;
        self
    }

    pub fn with_trainable_delta(mut self, on: bool) -> Self {
        self.delta_trainable = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.depth == 0 {
            return Err(Error::invalid("width and depth must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.delta_exponent) {
            return Err(Error::invalid(format!(
                "delta exponent {} outside [0, 1]",
                self.delta_exponent
            )));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        (self.depth as f64).powf(-self.delta_exponent)
    }

    pub fn check_weights(&self, w: &Weights) -> Result<()> {
        if w.depth() != self.depth || w.width() != self.width {
            return Err(Error::invalid(format!(
                "weights are {}x{} (depth x width) but config expects {}x{}",
                w.depth(),
                w.width(),
                self.depth,
                self.width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub layers: Vec<Matrix>,
    pub delta: f64,
}

impl Weights {
    pub fn zeros(cfg: &NetworkConfig) -> Self {
        Weights {
            layers: vec![Matrix::zeros(cfg.width); cfg.depth],
            delta: cfg.delta(),
        }
    }

    pub fn new(layers: Vec<Matrix>, delta: f64) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::invalid("weights need at least one layer"));
        };
        let d = first.dim();
        if layers.iter().any(|m| m.dim() != d) {
            return Err(Error::invalid("all layers must share one width"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        if layers.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("weights contain non-finite entries"));
        }
        Ok(Weights { layers, delta })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.layers.first().map_or(0, Matrix::dim)
    }

    /// `max_k ‖α_k‖_F`
    pub fn norm_f_inf(&self) -> f64 {
        self.layers.iter().map(Matrix::frobenius).fold(0.0, f64::max)
    }

    /// `max_k ‖α_{k+1} − α_k‖_F` (0 for a single layer).
    pub fn neighbour_max(&self) -> f64 {
        self.layers
            .windows(2)
            .map(|w| w[1].sub(&w[0]).frobenius())
            .fold(0.0, f64::max)
    }

    /// `½ Σ_k ‖α_k‖_F²`
    pub fn fbar(&self) -> f64 {
        0.5 * self.layers.iter().map(Matrix::frobenius_sq).sum::<f64>()
    }

    /// `½ L Σ_k ‖α_{k+1} − α_k‖_F²`
    pub fn gbar(&self) -> f64 {
        let l = self.depth() as f64;
        0.5 * l
            * self
                .layers
                .windows(2)
                .map(|w| w[1].sub(&w[0]).frobenius_sq())
                .sum::<f64>()
    }

    /// `sup_{k,m} ‖row m of α_k‖₂`
    pub fn max_row_norm(&self) -> f64 {
        self.layers.iter().map(Matrix::max_row_norm).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.delta.is_finite() && self.layers.iter().all(Matrix::is_finite)
    }

    /// Text form: header `d L delta`, then `L` blocks of `d` rows.
    pub fn to_text(&self) -> String {
        let d = self.width();
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {:.16e}", d, self.depth(), self.delta);
        for layer in &self.layers {
            for m in 0..d {
                let row: Vec<String> = layer.row(m).iter().map(|v| format!("{v:.16e}")).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::invalid(format!("weights text: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("header must be `d L delta`, got {header:?}")));
        }
        let d: usize = fields[0].parse().map_err(|e| bad(format!("width: {e}")))?;
        let l: usize = fields[1].parse().map_err(|e| bad(format!("depth: {e}")))?;
        let delta: f64 = fields[2].parse().map_err(|e| bad(format!("delta: {e}")))?;
        let mut layers = Vec::with_capacity(l);
        for k in 0..l {
            let mut data = Vec::with_capacity(d * d);
            for m in 0..d {
                let line = lines
                    .next()
                    .ok_or_else(|| bad(format!("missing row {m} of layer {}", k + 1)))?;
                let before = data.len();
                for tok in line.split_whitespace() {
                    data.push(tok.parse::<f64>().map_err(|e| bad(format!("{tok:?}: {e}")))?);
                }
                if data.len() - before != d {
                    return Err(bad(format!("layer {} row {m} has wrong length", k + 1)));
                }
            }
            layers.push(Matrix::from_row_major(d, data)?);
        }
        if lines.next().is_some() {
            return Err(bad("trailing rows after last layer".into()));
        }
        Weights::new(layers, delta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Weights::from_text(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

/// Everything the forward pass produces for one input.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    width: usize,
    depth: usize,
    hidden: Vec<f64>,
    preact: Vec<f64>,
    sigma_prime: Vec<f64>,
    /// `M_k = ∂h_L/∂h_k` for `k = 0..=L`.
    pub jacobians: Option<Vec<Matrix>>,
}

impl ForwardTrace {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `h_k`, `k = 0..=L`.
    pub fn hidden(&self, k: usize) -> &[f64] {
        &self.hidden[k * self.width..(k + 1) * self.width]
    }

    /// Preactivation of layer `j` (0-based): `α_{j+1} h_j`.
    pub fn preact(&self, j: usize) -> &[f64] {
        &self.preact[j * self.width..(j + 1) * self.width]
    }

    /// `σ'` applied to `preact(j)`.
    pub fn sigma_prime(&self, j: usize) -> &[f64] {
        &self.sigma_prime[j * self.width..(j + 1) * self.width]
    }

    pub fn output(&self) -> &[f64] {
        self.hidden(self.depth)
    }
}

pub fn forward(cfg: &NetworkConfig, w: &Weights, x: &[f64], want_jacobians: bool) -> Result<ForwardTrace> {
    cfg.check_weights(w)?;
    let d = cfg.width;
    let l = cfg.depth;
    if x.len() != d {
        return Err(Error::invalid(format!("input has length {} but width is {d}", x.len())));
    }
    let act = cfg.activation;
    let delta = w.delta;
    let mut hidden = Vec::with_capacity((l + 1) * d);
    hidden.extend_from_slice(x);
    let mut preact = vec![0.0; l * d];
    let mut sigma_prime = vec![0.0; l * d];
    for (j, layer) in w.layers.iter().enumerate() {
        let a = &mut preact[j * d..(j + 1) * d];
        layer.matvec_into(&hidden[j * d..(j + 1) * d], a);
        let sp = &mut sigma_prime[j * d..(j + 1) * d];
        for m in 0..d {
            sp[m] = act.deriv1(a[m]);
            let next = hidden[j * d + m] + delta * act.value(a[m]);
            hidden.push(next);
        }
        if !hidden[(j + 1) * d..].iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow {
                layer: j + 1,
                what: "hidden state is not finite".into(),
            });
        }
    }
    let mut trace = ForwardTrace {
        width: d,
        depth: l,
        hidden,
        preact,
        sigma_prime,
        jacobians: None,
    };
    if want_jacobians {
        trace.jacobians = Some(jacobian_chain(w, &trace)?);
    }
    Ok(trace)
}

/// `M_L = I`, `M_{k-1} = M_k (I + δ diag(σ'(a_k)) α_k)`.
fn jacobian_chain(w: &Weights, trace: &ForwardTrace) -> Result<Vec<Matrix>> {
    let d = trace.width;
    let l = trace.depth;
    let mut out = vec![Matrix::identity(d); l + 1];
    for j in (0..l).rev() {
        let sp = trace.sigma_prime(j);
        let mut factor = Matrix::identity(d);
        let layer = &w.layers[j];
        for m in 0..d {
            for n in 0..d {
                factor[(m, n)] += w.delta * sp[m] * layer[(m, n)];
            }
        }
        let mk = out[j + 1].matmul(&factor)?;
        if !mk.is_finite() {
            return Err(Error::Overflow {
                layer: j + 1,
                what: "Jacobian is not finite".into(),
            });
        }
        out[j] = mk;
    }
    Ok(out)
}

pub fn output(cfg: &NetworkConfig, w: &Weights, x: &[f64]) -> Result<Vector> {
    Ok(Vector(forward(cfg, w, x, false)?.output().to_vec()))
}
