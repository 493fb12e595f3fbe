//! Post-training diagnostics: power-law fits across depth, steps to reach a
//! loss level, 2-variation of layer-indexed weight paths, and cross-depth
//! distances between rescaled weights.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::Weights;
use crate::training::LogRow;

pub const EXHAUSTIVE_MAX_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`. A constant response is
/// fitted exactly, so it gets `r² = 1`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y must have the same length"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("a fit needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit inputs must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("a fit needs at least two distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `value ∝ L^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares on `log value = intercept − exponent·log L`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(&(l, v)) = points.iter().find(|(l, v)| !(*v > 0.0) || !(*l > 0.0)) {
        return Err(Error::invalid(format!("power-law fit needs positive inputs, got ({l}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let f = linear_fit(&xs, &ys)?;
    Ok(ScalingFit {
        exponent: -f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
    })
}

/// First logged step with `J(t) < ε`, for each `ε`.
pub fn steps_to_epsilon(rows: &[LogRow], eps_grid: &[f64]) -> Result<Vec<(f64, Option<u64>)>> {
    let curve: Vec<(u64, f64)> = rows.iter().map(|r| (r.t, r.loss)).collect();
    curve_steps_to_epsilon(&curve, eps_grid)
}

/// Mean loss over runs at each logged step common to all of them.
pub fn average_loss_curve(runs: &[&[LogRow]]) -> Result<Vec<(u64, f64)>> {
    let first = runs.first().ok_or_else(|| Error::invalid("need at least one run"))?;
    let mut out = Vec::with_capacity(first.len());
    for (i, row) in first.iter().enumerate() {
        let mut sum = 0.0;
        for r in runs {
            match r.get(i) {
                Some(x) if x.t == row.t => sum += x.loss,
                _ => return Ok(out),
            }
        }
        out.push((row.t, sum / runs.len() as f64));
    }
    Ok(out)
}

/// [`steps_to_epsilon`] on a bare `(t, loss)` curve.
pub fn curve_steps_to_epsilon(curve: &[(u64, f64)], eps_grid: &[f64]) -> Result<Vec<(f64, Option<u64>)>> {
    eps_grid
        .iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(Error::invalid(format!("loss levels must be positive, got {eps}")));
            }
            Ok((eps, curve.iter().find(|r| r.1 < eps).map(|r| r.0)))
        })
        .collect()
}

/// Affine fit of steps-to-ε (or its logarithm, when `log_steps`) against
/// `log(1/ε)`, over the levels that were reached at a positive step.
pub fn rate_fit(table: &[(f64, Option<u64>)], log_steps: bool) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .iter()
        .filter_map(|&(eps, t)| t.filter(|&t| t > 0).map(|t| (-eps.ln(), if log_steps { (t as f64).ln() } else { t as f64 })))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::invalid(format!("rate fit needs at least 3 reached levels, got {}", xs.len())));
    }
    linear_fit(&xs, &ys)
}

/// `count` geometric levels that every curve crosses: from half the smallest
/// initial loss down to just above the largest final minimum.
pub fn shared_levels(curves: &[&[(u64, f64)]], count: usize) -> Result<Vec<f64>> {
    let mut hi = f64::INFINITY;
    let mut lo = 0.0f64;
    for c in curves {
        let first = c.first().ok_or_else(|| Error::invalid("empty loss curve"))?.1;
        hi = hi.min(0.5 * first);
        lo = lo.max(1.01 * c.iter().map(|r| r.1).fold(f64::INFINITY, f64::min));
    }
    if curves.is_empty() || !(lo > 0.0 && lo < hi) {
        return Err(Error::invalid(format!("no shared loss range (hi {hi:e}, lo {lo:e})")));
    }
    Ok(geometric_grid(hi, lo, count))
}

/// `eps_count` loss levels spaced geometrically from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let r = (lo / hi).ln() / (count - 1) as f64;
    (0..count).map(|i| hi * (r * i as f64).exp()).collect()
}

/// A matrix-valued path on `[0, 1]` sampled at increasing points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFunction {
    samples: Vec<(f64, Matrix)>,
}

impl PathFunction {
    pub fn new(samples: Vec<(f64, Matrix)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("path needs at least one sample"));
        }
        let d = samples[0].1.dim();
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("path sample points must be strictly increasing"));
            }
        }
        if samples.iter().any(|(s, m)| !s.is_finite() || !m.is_finite() || m.dim() != d) {
            return Err(Error::invalid("path samples must be finite and share one dimension"));
        }
        Ok(PathFunction { samples })
    }

    /// `s = k/L ↦ L^{1/2} A_k` for `k = 1..L`.
    pub fn from_weights(w: &Weights) -> Self {
        let l = w.depth() as f64;
        let samples = w
            .layers
            .iter()
            .enumerate()
            .map(|(j, a)| ((j + 1) as f64 / l, a.scaled(l.sqrt())))
            .collect();
        PathFunction { samples }
    }

    /// Scalar path with `1×1` values.
    pub fn scalar(points: &[(f64, f64)]) -> Result<Self> {
        PathFunction::new(points.iter().map(|&(s, v)| (s, Matrix::diag(&[v]))).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(f64, Matrix)] {
        &self.samples
    }

    pub fn scaled(&self, c: f64) -> Self {
        PathFunction {
            samples: self.samples.iter().map(|(s, m)| (*s, m.scaled(c))).collect(),
        }
    }

    /// Same values traversed backwards, on the reflected points `1 − s`.
    pub fn reversed(&self) -> Self {
        PathFunction {
            samples: self.samples.iter().rev().map(|(s, m)| (1.0 - s, m.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    Dyadic,
    Exhaustive,
}

fn partition_sum(path: &PathFunction, idx: &[usize]) -> f64 {
    idx.windows(2)
        .map(|w| path.samples[w[1]].1.sub(&path.samples[w[0]].1).frobenius_sq())
        .sum()
}

/// `sup_partitions Σ ‖value(s_{i+1}) − value(s_i)‖_F²` over partitions drawn
/// from the sample points with both endpoints kept.
pub fn two_variation(path: &PathFunction, mode: VariationMode) -> Result<f64> {
    let k = path.len();
    if k < 2 {
        return Ok(0.0);
    }
    let last = k - 1;
    match mode {
        VariationMode::Dyadic => {
            let mut best = 0.0f64;
            let mut step = 1usize;
            loop {
                let mut idx: Vec<usize> = (0..=last).step_by(step).collect();
                if *idx.last().expect("nonempty") != last {
                    idx.push(last);
                }
                best = best.max(partition_sum(path, &idx));
                if step >= last {
                    break;
                }
                step *= 2;
            }
            Ok(best)
        }
        VariationMode::Exhaustive => {
            if k > EXHAUSTIVE_MAX_POINTS {
                return Err(Error::Refused(format!(
                    "exhaustive 2-variation over {k} points (limit {EXHAUSTIVE_MAX_POINTS})"
                )));
            }
            let interior = k - 2;
            let mut best = 0.0f64;
            let mut idx = Vec::with_capacity(k);
            for mask in 0u32..(1u32 << interior) {
                idx.clear();
                idx.push(0);
                idx.extend((0..interior).filter(|b| mask >> b & 1 == 1).map(|b| b + 1));
                idx.push(last);
                best = best.max(partition_sum(path, &idx));
            }
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthDistance {
    pub l_lo: usize,
    pub l_hi: usize,
    pub sup_distance: f64,
}

/// For consecutive depths `L < L'`, `sup_s ‖√L A_{⌊Ls⌋} − √L' A'_{⌊L's⌋}‖_F`
/// over the union of both layer grids. Layer indices are 1-based and the
/// first layer also covers `[0, 1/L)`.
pub fn scaling_limit_distance(runs: &[(usize, Weights)]) -> Result<Vec<DepthDistance>> {
    if runs.len() < 2 {
        return Err(Error::invalid("cross-depth distances need at least two depths"));
    }
    let d = runs[0].1.width();
    if runs.iter().any(|(l, w)| w.width() != d || w.depth() != *l) {
        return Err(Error::invalid("runs must share one width and match their stated depth"));
    }
    let mut sorted: Vec<&(usize, Weights)> = runs.iter().collect();
    sorted.sort_by_key(|r| r.0);
    let mut out = Vec::new();
    for pair in sorted.windows(2) {
        let (la, wa) = (pair[0].0, &pair[0].1);
        let (lb, wb) = (pair[1].0, &pair[1].1);
        if la == lb {
            return Err(Error::invalid(format!("depth {la} appears twice")));
        }
        let layer = |w: &Weights, l: usize, k: usize| -> Matrix {
            let idx = k.clamp(1, l) - 1;
            w.layers[idx].scaled((l as f64).sqrt())
        };
        let mut sup = 0.0f64;
        // Grid points k/la and k/lb; floor(L·s) is computed in integers.
        for (num, den) in (0..=la).map(|k| (k, la)).chain((0..=lb).map(|k| (k, lb))) {
            let ka = num * la / den;
            let kb = num * lb / den;
            let dist = layer(wa, la, ka).sub(&layer(wb, lb, kb)).frobenius();
            sup = sup.max(dist);
        }
        out.push(DepthDistance {
            l_lo: la,
            l_hi: lb,
            sup_distance: sup,
        });
    }
    Ok(out)
}

/// Typical layer size `(L^{-1} Σ_k ‖A_k‖_F²)^{1/2}`.
pub fn rms_layer_norm(w: &Weights) -> f64 {
    (2.0 * w.fbar() / w.depth() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalScaling {
    /// Fit of the final weight size, exponent `β_T`.
    pub weights: ScalingFit,
    /// Fit of the final `δ`, exponent `α_T`.
    pub delta: ScalingFit,
    pub total: f64,
}

/// Fits `A(T) ∝ L^{-β_T}` and `δ(T) ∝ L^{-α_T}` across a depth sweep and
/// returns `α_T + β_T`.
pub fn total_scaling(runs: &[(usize, Weights)]) -> Result<TotalScaling> {
    if runs.len() < 3 {
        return Err(Error::invalid("total scaling needs at least three depths"));
    }
    let w_pts: Vec<(f64, f64)> = runs.iter().map(|(l, w)| (*l as f64, rms_layer_norm(w))).collect();
    let d_pts: Vec<(f64, f64)> = runs.iter().map(|(l, w)| (*l as f64, w.delta)).collect();
    let weights = fit_power_law(&w_pts)?;
    let delta = fit_power_law(&d_pts)?;
    Ok(TotalScaling {
        weights,
        delta,
        total: weights.exponent + delta.exponent,
    })
}

/// `(s, L, value)` rows for one fixed entry `(m, n)` of `√L A_k`.
pub fn scatter_rows(runs: &[(usize, Weights)], m: usize, n: usize) -> Result<Vec<(f64, usize, f64)>> {
    let mut out = Vec::new();
    for (l, w) in runs {
        if m >= w.width() || n >= w.width() {
            return Err(Error::invalid(format!("entry ({m}, {n}) outside width {}", w.width())));
        }
        for (s, v) in PathFunction::from_weights(w).samples() {
            out.push((*s, *l, v[(m, n)]));
        }
    }
    Ok(out)
}

pub fn eps_table_csv(rows: &[(f64, Option<u64>)]) -> String {
    let mut s = String::from("eps,t_first\n");
    for (eps, t) in rows {
        match t {
            Some(t) => writeln!(s, "{eps:e},{t}"),
            None => writeln!(s, "{eps:e},"),
        }
        .expect("string write");
    }
    s
}

pub fn parse_eps_table(text: &str) -> Result<Vec<(f64, Option<u64>)>> {
    parse_csv(text, "eps,t_first", |f| {
        let eps = f[0].parse::<f64>().ok()?;
        let t = if f[1].is_empty() { None } else { Some(f[1].parse::<u64>().ok()?) };
        Some((eps, t))
    })
}

pub fn fit_inputs_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("L,value\n");
    for (l, v) in points {
        writeln!(s, "{l},{v:e}").expect("string write");
    }
    s
}

pub fn parse_fit_inputs(text: &str) -> Result<Vec<(f64, f64)>> {
    parse_csv(text, "L,value", |f| Some((f[0].parse().ok()?, f[1].parse().ok()?)))
}

pub fn scatter_csv(rows: &[(f64, usize, f64)]) -> String {
    let mut s = String::from("s,L,value\n");
    for (x, l, v) in rows {
        writeln!(s, "{x:e},{l},{v:e}").expect("string write");
    }
    s
}

pub fn parse_scatter(text: &str) -> Result<Vec<(f64, usize, f64)>> {
    parse_csv(text, "s,L,value", |f| Some((f[0].parse().ok()?, f[1].parse().ok()?, f[2].parse().ok()?)))
}

pub fn distances_csv(rows: &[DepthDistance]) -> String {
    let mut s = String::from("L_lo,L_hi,sup_distance\n");
    for r in rows {
        writeln!(s, "{},{},{:e}", r.l_lo, r.l_hi, r.sup_distance).expect("string write");
    }
    s
}

pub fn parse_distances(text: &str) -> Result<Vec<DepthDistance>> {
    parse_csv(text, "L_lo,L_hi,sup_distance", |f| {
        Some(DepthDistance {
            l_lo: f[0].parse().ok()?,
            l_hi: f[1].parse().ok()?,
            sup_distance: f[2].parse().ok()?,
        })
    })
}

fn parse_csv<T>(text: &str, header: &str, row: impl Fn(&[&str]) -> Option<T>) -> Result<Vec<T>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(header) {
        return Err(Error::invalid(format!("expected header `{header}`")));
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = if f.len() == width { row(&f) } else { None };
        out.push(parsed.ok_or_else(|| Error::invalid(format!("malformed row {}", i + 2)))?);
    }
    Ok(out)
}
