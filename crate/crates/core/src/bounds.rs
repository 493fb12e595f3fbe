//! Numerical certificates: evaluate both sides of each proved inequality
//! on a concrete instance and report the slack.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::autograd::{backward, hessian_spectral_estimate, value_and_grad};
use crate::data::{AssumptionParams, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{dot, euclidean_norm};
use crate::network::{forward, NetworkConfig, Smooth, Weights};
use crate::training::LogRow;

pub const EXACT_TOL: f64 = 1e-9;
pub const HESSIAN_TOL: f64 = 1e-3;
pub const HESSIAN_PROBES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A lower bound whose coefficient is not positive.
    Vacuous,
    /// A hypothesis of the inequality does not hold here.
    PreconditionViolated,
}

/// One certified inequality. `slack` is oriented so that nonnegative means
/// satisfied: `bound − observed` for upper bounds, `observed − bound` for
/// lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    pub tol: f64,
    pub status: Status,
    pub context: BTreeMap<String, f64>,
}

impl BoundReport {
    fn build(name: &str, observed: f64, bound: f64, slack: f64, tol: f64, context: BTreeMap<String, f64>) -> Self {
        let scale = bound.abs().max(observed.abs());
        let pass = slack >= -tol * scale;
        BoundReport {
            name: name.to_string(),
            observed,
            bound,
            slack,
            pass,
            tol,
            status: if pass { Status::Pass } else { Status::Fail },
            context,
        }
    }

    pub fn upper(name: &str, observed: f64, bound: f64, tol: f64, context: BTreeMap<String, f64>) -> Self {
        Self::build(name, observed, bound, bound - observed, tol, context)
    }

    pub fn lower(name: &str, observed: f64, bound: f64, tol: f64, context: BTreeMap<String, f64>) -> Self {
        Self::build(name, observed, bound, observed - bound, tol, context)
    }

    /// A hypothesis `observed ≤ bound`; violation marks the report inapplicable.
    pub fn hypothesis(name: &str, observed: f64, bound: f64, context: BTreeMap<String, f64>) -> Self {
        let mut r = Self::upper(name, observed, bound, EXACT_TOL, context);
        if !r.pass {
            r.status = Status::PreconditionViolated;
        }
        r
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn to_json_lines(reports: &[BoundReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{}", r.to_json_line());
    }
    s
}

pub fn parse_json_lines(text: &str) -> Result<Vec<BoundReport>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::invalid(format!("bad report line: {e}"))))
        .collect()
}

fn ctx(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Hypotheses shared by the forward, gradient-upper and Hessian bounds:
/// `‖w‖_{F,∞} ≤ c_α L^{-1/2}` and `L ≥ 5 c_α`.
fn bounded_weight_hypotheses(w: &Weights, c_alpha: f64) -> Vec<BoundReport> {
    let l = w.depth() as f64;
    let c = ctx(&[("c_alpha", c_alpha), ("L", l)]);
    vec![
        BoundReport::hypothesis("hypothesis.weight_norm", w.norm_f_inf(), c_alpha / l.sqrt(), c.clone()),
        BoundReport::hypothesis("hypothesis.depth", 5.0 * c_alpha, l, c),
    ]
}

fn all_hold(reports: &[BoundReport]) -> bool {
    reports.iter().all(|r| r.status == Status::Pass)
}

/// Hidden-state sandwich `e^{-2c}‖x‖ ≤ ‖h_k‖ ≤ e^{1.1c}‖x‖` and Jacobian
/// columns `‖M_k e_m‖ ≤ e^{c}`, reported at the worst layer.
pub fn certify_forward(cfg: &NetworkConfig, w: &Weights, x: &[f64], c_alpha: f64) -> Result<Vec<BoundReport>> {
    let mut out = bounded_weight_hypotheses(w, c_alpha);
    if !all_hold(&out) {
        return Ok(out);
    }
    let tr = forward(cfg, w, x, true)?;
    let xn = euclidean_norm(x);
    let l = cfg.depth as f64;
    let (mut lo, mut lo_k, mut hi, mut hi_k) = (f64::INFINITY, 0, 0.0f64, 0);
    for k in 0..=cfg.depth {
        let n = euclidean_norm(tr.hidden(k));
        if n < lo {
            lo = n;
            lo_k = k;
        }
        if n > hi {
            hi = n;
            hi_k = k;
        }
    }
    let (mut col, mut col_k) = (0.0f64, 0);
    for (k, m) in tr.jacobians.as_ref().expect("requested").iter().enumerate() {
        for j in 0..cfg.width {
            let c = m.col(j).norm();
            if c > col {
                col = c;
                col_k = k;
            }
        }
    }
    let base = [("c_alpha", c_alpha), ("L", l)];
    let with_k = |k: usize| {
        let mut c = ctx(&base);
        c.insert("k".into(), k as f64);
        c
    };
    out.push(BoundReport::lower("hidden_lower", lo, (-2.0 * c_alpha).exp() * xn, EXACT_TOL, with_k(lo_k)));
    out.push(BoundReport::upper("hidden_upper", hi, (1.1 * c_alpha).exp() * xn, EXACT_TOL, with_k(hi_k)));
    out.push(BoundReport::upper("jacobian_column", col, c_alpha.exp(), EXACT_TOL, with_k(col_k)));
    Ok(out)
}

/// `J ≤ 1 + e^{2.2c}` for unit data under the bounded-weight hypothesis.
pub fn certify_loss_ceiling(cfg: &NetworkConfig, data: &Dataset, w: &Weights, c_alpha: f64) -> Result<Vec<BoundReport>> {
    let mut out = bounded_weight_hypotheses(w, c_alpha);
    if !all_hold(&out) {
        return Ok(out);
    }
    let j = crate::autograd::objective(cfg, data, w)?;
    out.push(BoundReport::upper(
        "loss_ceiling",
        j,
        1.0 + (2.2 * c_alpha).exp(),
        EXACT_TOL,
        ctx(&[("c_alpha", c_alpha), ("L", cfg.depth as f64)]),
    ));
    Ok(out)
}

/// Per-layer `‖∇_{α_k} J‖_F² ≤ 2d e^{4.2c} L^{-1} J`, reported at the worst layer.
pub fn certify_gradient_upper(cfg: &NetworkConfig, data: &Dataset, w: &Weights, c_alpha: f64) -> Result<Vec<BoundReport>> {
    let mut out = bounded_weight_hypotheses(w, c_alpha);
    if !all_hold(&out) {
        return Ok(out);
    }
    let (j, g) = value_and_grad(cfg, data, w)?;
    let l = cfg.depth as f64;
    let bound = 2.0 * cfg.width as f64 * (4.2 * c_alpha).exp() / l * j;
    let (k, obs) = g
        .layers
        .iter()
        .map(|m| m.frobenius_sq())
        .enumerate()
        .fold((0, 0.0f64), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    out.push(BoundReport::upper(
        "grad_upper",
        obs,
        bound,
        EXACT_TOL,
        ctx(&[("c_alpha", c_alpha), ("L", l), ("k", (k + 1) as f64), ("J", j)]),
    ));
    Ok(out)
}

/// Coefficient of the full-gradient lower bound,
/// `(1/16) N^{-1} e^{-2c₀} − 17 d c₀⁴ e^{6.4c₀} L^{-1}`.
pub fn full_lower_coefficient(p: &AssumptionParams) -> f64 {
    let c0 = p.c0;
    (-2.0 * c0).exp() / (16.0 * p.n as f64) - 17.0 * p.d as f64 * c0.powi(4) * (6.4 * c0).exp() / p.l as f64
}

/// Depth below which the full lower bound is vacuous: `272 N d c₀⁴ e^{8.4c₀}`.
pub fn full_lower_vacuous_depth(p: &AssumptionParams) -> f64 {
    272.0 * p.n as f64 * p.d as f64 * p.c0.powi(4) * (8.4 * p.c0).exp()
}

/// First-layer and full-gradient lower bounds.
pub fn certify_gradient_lower(cfg: &NetworkConfig, data: &Dataset, w: &Weights, p: &AssumptionParams) -> Result<Vec<BoundReport>> {
    let l = cfg.depth as f64;
    let c0 = p.c0;
    let base = ctx(&[("c0", c0), ("L", l), ("N", p.n as f64), ("d", p.d as f64)]);
    let mut out = vec![
        BoundReport::hypothesis("hypothesis.depth", (5.0 * c0).max(4.0 * c0 * c0), l, base.clone()),
        BoundReport::hypothesis("hypothesis.weight_norm", w.norm_f_inf(), c0 / l.sqrt(), base.clone()),
    ];
    if !all_hold(&out) {
        return Ok(out);
    }
    let (j, g) = value_and_grad(cfg, data, w)?;
    let n = data.len() as f64;
    let first = g.layers[0].frobenius_sq();
    out.push(BoundReport::lower(
        "grad_lower_first",
        first,
        (-2.0 * c0).exp() / (4.0 * n) / l * j,
        EXACT_TOL,
        base.clone(),
    ));
    let full_hyp = [
        BoundReport::hypothesis("hypothesis.neighbour", w.neighbour_max(), p.neighbour_threshold(), base.clone()),
        BoundReport::hypothesis("hypothesis.separation", data.separation, p.separation_threshold(), base.clone()),
    ];
    let applicable = all_hold(&full_hyp);
    out.extend(full_hyp);
    if applicable {
        let coef = full_lower_coefficient(p);
        let mut c = base;
        c.insert("coefficient".into(), coef);
        let mut r = BoundReport::lower("grad_lower_full", g.norm_sq(), coef * j, EXACT_TOL, c);
        if coef <= 0.0 {
            r.status = Status::Vacuous;
        }
        out.push(r);
    }
    Ok(out)
}

/// `‖∇²J‖₂ ≤ 5 d e^{4.3c}` with the power-iteration estimate.
pub fn certify_hessian(cfg: &NetworkConfig, data: &Dataset, w: &Weights, c_alpha: f64, probes: usize) -> Result<Vec<BoundReport>> {
    let mut out = bounded_weight_hypotheses(w, c_alpha);
    if !all_hold(&out) {
        return Ok(out);
    }
    let est = hessian_spectral_estimate(cfg, data, w, probes)?;
    out.push(BoundReport::upper(
        "hessian",
        est.value,
        5.0 * cfg.width as f64 * (4.3 * c_alpha).exp(),
        HESSIAN_TOL,
        ctx(&[
            ("c_alpha", c_alpha),
            ("L", cfg.depth as f64),
            ("iterations", est.iterations as f64),
            ("converged", if est.converged { 1.0 } else { 0.0 }),
        ]),
    ));
    Ok(out)
}

/// `J(t) ≤ exp(−(1/32)N^{-1}e^{-2c₀}S_t)J₀ + 34dc₀⁴e^{6.4c₀}S_t L^{-1}J₀`
/// with `S_t = Σ_{t'<t} η(t')`.
pub fn loss_envelope(p: &AssumptionParams, j0: f64, eta_cum: f64) -> f64 {
    (-p.envelope_rate() * eta_cum).exp() * j0 + p.envelope_drift() * eta_cum * j0
}

fn worst_row<F: Fn(&LogRow) -> (f64, f64)>(rows: &[LogRow], f: F) -> (f64, f64, u64) {
    // Picks the row with the smallest relative slack.
    let mut best = (0.0, 0.0, 0u64);
    let mut worst_rel = f64::INFINITY;
    for r in rows {
        let (obs, bound) = f(r);
        let rel = (bound - obs) / bound.abs().max(obs.abs()).max(f64::MIN_POSITIVE);
        if rel < worst_rel || (bound == 0.0 && obs == 0.0 && worst_rel == f64::INFINITY) {
            worst_rel = rel;
            best = (obs, bound, r.t);
        }
    }
    best
}

/// Loss envelope, the three induction invariants, ḡ growth and the two
/// depth conditions over a logged run.
pub fn certify_run_envelope(rows: &[LogRow], p: &AssumptionParams) -> Result<Vec<BoundReport>> {
    let Some(first) = rows.first() else {
        return Err(Error::invalid("run log is empty"));
    };
    let j0 = first.loss;
    let g0 = first.gbar;
    let l = p.l as f64;
    let base = [("c0", p.c0), ("L", l), ("N", p.n as f64), ("d", p.d as f64)];
    let at = |t: u64| {
        let mut c = ctx(&base);
        c.insert("t".into(), t as f64);
        c
    };
    let mut out = Vec::new();
    for (i, (lhs, rhs)) in p.depth_conditions().into_iter().enumerate() {
        out.push(BoundReport::hypothesis(&format!("hypothesis.depth_condition_{}", i + 1), lhs, rhs, ctx(&base)));
    }
    let (o, b, t) = worst_row(rows, |r| (r.loss, loss_envelope(p, j0, r.eta_cum)));
    out.push(BoundReport::upper("loss_envelope", o, b, EXACT_TOL, at(t)));
    let (o, b, t) = worst_row(rows, |r| (r.loss, 2.0 * j0));
    out.push(BoundReport::upper("invariant_loss", o, b, EXACT_TOL, at(t)));
    let (o, b, t) = worst_row(rows, |r| (r.finf, p.finf_threshold()));
    out.push(BoundReport::upper("invariant_finf", o, b, EXACT_TOL, at(t)));
    let (o, b, t) = worst_row(rows, |r| (r.neighbour_max, p.neighbour_threshold()));
    out.push(BoundReport::upper("invariant_neighbour", o, b, EXACT_TOL, at(t)));
    let (o, b, t) = worst_row(rows, |r| (r.gbar, 2.0 * g0));
    out.push(BoundReport::upper("gbar_growth", o, b, EXACT_TOL, at(t)));
    Ok(out)
}

/// Closed form of the discrete Grönwall bound for `e_{n+1} ≤ u_n e_n + v_n`:
/// `e_n ≤ (Π_{i<n} u_i) e₀ + Σ_{j<n} (Π_{j<i<n} u_i) v_j`, for `n = 0..=len`.
pub fn gronwall_envelope(u: &[f64], v: &[f64], e0: f64) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::invalid("u and v must have the same length"));
    }
    if u.iter().chain(v).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid("u and v must be nonnegative and finite"));
    }
    let mut out = Vec::with_capacity(u.len() + 1);
    for n in 0..=u.len() {
        let head: f64 = u[..n].iter().product();
        let mut tail_sum = 0.0;
        for j in 0..n {
            let tail: f64 = u[j + 1..n].iter().product();
            tail_sum += tail * v[j];
        }
        out.push(head * e0 + tail_sum);
    }
    Ok(out)
}

/// Exact residual in the difference of neighbouring per-sample gradients:
/// with `r = ŷ − y` and `k` 1-based,
/// `∂ℓ/∂α_{k,mn} − ∂ℓ/∂α_{k+1,mn} = δ h_{k-1,n}(σ'_{k,m} − σ'_{k+1,m}) G_{k+1,m} + δ² ⟨G_{k+1}, ξ⟩`
/// where `ξ = h_{k-1,n} σ'_{k,m} (σ'_{k+1} ⊙ α_{k+1}e_m) − σ(a_k)_n σ'_{k+1,m} e_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighbourCheck {
    /// Largest relative mismatch of the identity over all `(k, m, n)`.
    pub identity_residual: f64,
    /// Largest ratio `‖ξ‖² / (2 h_{k-1,n}² ‖α_{k+1}−α_k‖_F² + 2‖α_{k,n}‖⁴‖h_{k-1}‖⁴)`.
    pub worst_ratio: f64,
    pub worst_xi_sq: f64,
    pub worst_bound: f64,
}

pub fn neighbour_decomposition(cfg: &NetworkConfig, w: &Weights, x: &[f64], y: &[f64]) -> Result<NeighbourCheck> {
    let tr = forward(cfg, w, x, false)?;
    let bt = backward(w, &tr, y)?;
    let d = cfg.width;
    let delta = w.delta;
    let mut check = NeighbourCheck {
        identity_residual: 0.0,
        worst_ratio: 0.0,
        worst_xi_sq: 0.0,
        worst_bound: 0.0,
    };
    let mut xi = vec![0.0; d];
    for j in 0..cfg.depth.saturating_sub(1) {
        let (sp_k, sp_k1) = (tr.sigma_prime(j), tr.sigma_prime(j + 1));
        let h = tr.hidden(j);
        let h1 = tr.hidden(j + 1);
        let g1 = bt.g(j + 1);
        let g2 = bt.g(j + 2);
        let next = &w.layers[j + 1];
        let diff_sq = next.sub(&w.layers[j]).frobenius_sq();
        let hn_sq = dot(h, h);
        let sig: Vec<f64> = tr.preact(j).iter().map(|&a| cfg.activation.value(a)).collect();
        for m in 0..d {
            for n in 0..d {
                let grad_k = delta * sp_k[m] * g1[m] * h[n];
                let grad_k1 = delta * sp_k1[m] * g2[m] * h1[n];
                for p in 0..d {
                    xi[p] = h[n] * sp_k[m] * sp_k1[p] * next[(p, m)];
                }
                xi[m] -= sig[n] * sp_k1[m];
                let rhs = delta * h[n] * (sp_k[m] - sp_k1[m]) * g2[m] + delta * delta * dot(g2, &xi);
                let lhs = grad_k - grad_k1;
                let res = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
                if lhs != rhs {
                    check.identity_residual = check.identity_residual.max(res);
                }
                let xi_sq = dot(&xi, &xi);
                let row = w.layers[j].row_norm(n);
                let bound = 2.0 * h[n] * h[n] * diff_sq + 2.0 * row.powi(4) * hn_sq * hn_sq;
                let ratio = if bound > 0.0 {
                    xi_sq / bound
                } else if xi_sq > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if ratio > check.worst_ratio {
                    check.worst_ratio = ratio;
                    check.worst_xi_sq = xi_sq;
                    check.worst_bound = bound;
                }
            }
        }
    }
    Ok(check)
}

/// Reports for the neighbour decomposition: the identity itself and the
/// stated bound on the residual norm.
pub fn certify_neighbour_decomposition(cfg: &NetworkConfig, w: &Weights, x: &[f64], y: &[f64]) -> Result<Vec<BoundReport>> {
    let c = neighbour_decomposition(cfg, w, x, y)?;
    let base = ctx(&[("L", cfg.depth as f64), ("d", cfg.width as f64)]);
    Ok(vec![
        BoundReport::upper("neighbour_identity", c.identity_residual, EXACT_TOL, 0.0, base.clone()),
        BoundReport::upper("neighbour_residual", c.worst_xi_sq, c.worst_bound, EXACT_TOL, base),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{init_weights, sample_free_inputs, sphere_targets, InitMode};
    use crate::linalg::{Matrix, Vector};

    #[test]
    fn zero_weights_forward_slack() {
        let cfg = NetworkConfig::new(3, 8);
        let w = Weights::zeros(&cfg);
        let x = [0.6, 0.0, 0.8];
        let r = certify_forward(&cfg, &w, &x, 1.0).unwrap();
        let get = |n: &str| r.iter().find(|b| b.name == n).unwrap().clone();
        assert_eq!(get("hidden_lower").observed, 1.0);
        assert!((get("hidden_lower").bound - 0.135_335).abs() < 1e-6);
        assert!((get("hidden_upper").bound - 3.004_166).abs() < 1e-6);
        assert!(r.iter().all(|b| b.status == Status::Pass && b.slack > 0.0));
    }

    #[test]
    fn oversized_weights_are_inapplicable() {
        let cfg = NetworkConfig::new(2, 4);
        let w = Weights::new(vec![Matrix::identity(2); 4], 0.5).unwrap();
        let r = certify_forward(&cfg, &w, &[1.0, 0.0], 1.0).unwrap();
        assert!(r.iter().any(|b| b.status == Status::PreconditionViolated));
        assert!(!r.iter().any(BoundReport::is_failure));
        assert!(r.iter().all(|b| b.name.starts_with("hypothesis.")));
    }

    #[test]
    fn zero_weight_gradient_upper_closed_form() {
        let cfg = NetworkConfig::new(2, 8);
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ys = vec![Vector::basis(2, 1), Vector(vec![0.6, 0.8])];
        let ds = Dataset::new(xs.clone(), ys.clone(), 0).unwrap();
        let w = Weights::zeros(&cfg);
        let r = certify_gradient_upper(&cfg, &ds, &w, 1.0).unwrap();
        let g = r.iter().find(|b| b.name == "grad_upper").unwrap();
        let mut m = Matrix::zeros(2);
        for (x, y) in xs.iter().zip(&ys) {
            m = m.add(&crate::linalg::outer(&x.sub(y), x).unwrap().scaled(0.5));
        }
        let expect = m.frobenius_sq() / 8.0;
        assert!((g.observed - expect).abs() < 1e-15);
        assert!(g.pass);
    }

    #[test]
    fn interpolation_bounds_are_zero() {
        let cfg = NetworkConfig::new(2, 4);
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ds = Dataset::new(xs.clone(), xs, 0).unwrap();
        let w = Weights::zeros(&cfg);
        let p = AssumptionParams::new(0.1, 2, 2, 4).unwrap();
        let up = certify_gradient_upper(&cfg, &ds, &w, 1.0).unwrap();
        let lo = certify_gradient_lower(&cfg, &ds, &w, &p).unwrap();
        for r in up.iter().chain(&lo).filter(|r| !r.name.starts_with("hypothesis.")) {
            assert_eq!(r.observed, 0.0, "{}", r.name);
            assert_eq!(r.bound, 0.0, "{}", r.name);
            assert!(r.pass);
        }
    }

    #[test]
    fn small_depth_full_bound_is_vacuous() {
        let p = AssumptionParams::new(1.0, 2, 2, 8).unwrap();
        assert!(full_lower_coefficient(&p) < 0.0);
        assert!(full_lower_vacuous_depth(&p) > 8.0);
        let q = AssumptionParams::new(1.0, 2, 2, full_lower_vacuous_depth(&p).ceil() as usize + 1).unwrap();
        assert!(full_lower_coefficient(&q) > 0.0);

        let cfg = NetworkConfig::new(2, 8);
        let xs = vec![Vector::basis(2, 0), Vector::basis(2, 1)];
        let ds = Dataset::new(xs.clone(), vec![xs[1].clone(), xs[0].clone()], 0).unwrap();
        let r = certify_gradient_lower(&cfg, &ds, &Weights::zeros(&cfg), &p).unwrap();
        let full = r.iter().find(|b| b.name == "grad_lower_full").unwrap();
        assert_eq!(full.status, Status::Vacuous);
    }

    #[test]
    fn hessian_bound_value() {
        let bound = 5.0 * 8.0 * 4.3f64.exp();
        assert!((bound - 2947.991_748).abs() < 1e-6);
    }

    #[test]
    fn gronwall_examples() {
        let e = gronwall_envelope(&[1.0; 5], &[0.0; 5], 2.5).unwrap();
        assert!(e.iter().all(|&v| v == 2.5));
        let e = gronwall_envelope(&[1.0; 5], &[0.5; 5], 1.0).unwrap();
        for (n, v) in e.iter().enumerate() {
            assert!((v - (1.0 + 0.5 * n as f64)).abs() < 1e-15);
        }
        assert!(gronwall_envelope(&[1.0], &[-1.0], 0.0).is_err());
    }

    #[test]
    fn envelope_at_start_is_tight() {
        let p = AssumptionParams::new(0.1, 4, 16, 256).unwrap();
        assert_eq!(loss_envelope(&p, 3.0, 0.0), 3.0);
    }

    #[test]
    fn neighbour_identity_holds() {
        let cfg = NetworkConfig::new(3, 6);
        let w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.0 }, None, 3).unwrap();
        let x = sample_free_inputs(1, 3, 1).remove(0);
        let y = sphere_targets(1, 3, 1).remove(0);
        let c = neighbour_decomposition(&cfg, &w, x.as_slice(), y.as_slice()).unwrap();
        assert!(c.identity_residual < 1e-9, "{c:?}");
    }

    #[test]
    fn reports_round_trip_as_json_lines() {
        let r = vec![
            BoundReport::upper("a", 1.0, 2.0, EXACT_TOL, ctx(&[("k", 3.0)])),
            BoundReport::lower("b", 1.0, 2.0, EXACT_TOL, BTreeMap::new()),
        ];
        assert!(r[0].pass && !r[1].pass);
        assert_eq!(parse_json_lines(&to_json_lines(&r)).unwrap(), r);
    }
}
