//! Hand-derived gradients of the mean-squared objective, plus
//! finite-difference oracles for gradients and Hessian-vector products.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::network::{forward, ForwardTrace, NetworkConfig, Smooth, Weights};

pub const FD_GRAD_STEP: f64 = 1e-6;
pub const FD_HVP_STEP: f64 = 1e-4;
const HESSIAN_REL_TOL: f64 = 1e-6;

/// `½‖y − ŷ‖²`
pub fn loss(y: &[f64], yhat: &[f64]) -> f64 {
    debug_assert_eq!(y.len(), yhat.len());
    0.5 * y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn check_data(cfg: &NetworkConfig, data: &Dataset) -> Result<()> {
    if data.width() != cfg.width {
        return Err(Error::invalid(format!(
            "dataset width {} does not match network width {}",
            data.width(),
            cfg.width
        )));
    }
    Ok(())
}

/// `(1/N) Σ_i ½‖y_i − ŷ_i‖²`
pub fn objective(cfg: &NetworkConfig, data: &Dataset, w: &Weights) -> Result<f64> {
    check_data(cfg, data)?;
    let mut total = 0.0;
    for (x, y) in data.xs.iter().zip(&data.ys) {
        let tr = forward(cfg, w, x.as_slice(), false)?;
        total += loss(y.as_slice(), tr.output());
    }
    Ok(total / data.len() as f64)
}

/// `G_k = M_kᵀ(ŷ − y)` for `k = 0..=L`.
#[derive(Debug, Clone)]
pub struct BackwardTrace {
    width: usize,
    g: Vec<f64>,
}

impl BackwardTrace {
    pub fn g(&self, k: usize) -> &[f64] {
        &self.g[k * self.width..(k + 1) * self.width]
    }

    pub fn depth(&self) -> usize {
        self.g.len() / self.width - 1
    }
}

/// Vector recursion `G_{k-1} = G_k + δ α_kᵀ(σ'(a_k) ⊙ G_k)`.
pub fn backward(w: &Weights, trace: &ForwardTrace, y: &[f64]) -> Result<BackwardTrace> {
    let d = trace.width();
    let l = trace.depth();
    let mut g = vec![0.0; (l + 1) * d];
    for (m, (a, b)) in trace.output().iter().zip(y).enumerate() {
        g[l * d + m] = a - b;
    }
    let mut tmp = vec![0.0; d];
    for j in (0..l).rev() {
        let (lo, hi) = g.split_at_mut((j + 1) * d);
        let next = &hi[..d];
        let sp = trace.sigma_prime(j);
        for m in 0..d {
            tmp[m] = sp[m] * next[m];
        }
        let back = w.layers[j].matvec_t(&tmp);
        let cur = &mut lo[j * d..];
        for m in 0..d {
            cur[m] = next[m] + w.delta * back[m];
        }
        if !cur.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow {
                layer: j + 1,
                what: "backward vector is not finite".into(),
            });
        }
    }
    Ok(BackwardTrace { width: d, g })
}

/// Gradient of the objective: one matrix per layer plus `∂J/∂δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grad {
    pub layers: Vec<Matrix>,
    pub delta_grad: f64,
}

impl Grad {
    pub fn zeros_like(w: &Weights) -> Self {
        Grad {
            layers: vec![Matrix::zeros(w.width()); w.depth()],
            delta_grad: 0.0,
        }
    }

    /// `Σ_k ‖∇_{α_k} J‖_F²` (layers only).
    pub fn norm_sq(&self) -> f64 {
        self.layers.iter().map(Matrix::frobenius_sq).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.delta_grad.is_finite() && self.layers.iter().all(Matrix::is_finite)
    }
}

/// Objective value and its analytic gradient in one pass over the data.
pub fn value_and_grad(cfg: &NetworkConfig, data: &Dataset, w: &Weights) -> Result<(f64, Grad)> {
    check_data(cfg, data)?;
    let d = cfg.width;
    let inv_n = 1.0 / data.len() as f64;
    let scale = w.delta * inv_n;
    let mut grad = Grad::zeros_like(w);
    let mut value = 0.0;
    let mut u = vec![0.0; d];
    // Samples are reduced in index order so results are reproducible bit for bit.
    for (x, y) in data.xs.iter().zip(&data.ys) {
        let tr = forward(cfg, w, x.as_slice(), false)?;
        value += loss(y.as_slice(), tr.output());
        let bt = backward(w, &tr, y.as_slice())?;
        for (j, gm) in grad.layers.iter_mut().enumerate() {
            let sp = tr.sigma_prime(j);
            let gk = bt.g(j + 1);
            let h = tr.hidden(j);
            for m in 0..d {
                u[m] = scale * sp[m] * gk[m];
            }
            let out = gm.as_mut_slice();
            for m in 0..d {
                let um = u[m];
                if um == 0.0 {
                    continue;
                }
                let row = &mut out[m * d..(m + 1) * d];
                for n in 0..d {
                    row[n] += um * h[n];
                }
            }
        }
        if cfg.delta_trainable {
            let mut s = 0.0;
            for j in 0..cfg.depth {
                let a = tr.preact(j);
                let gk = bt.g(j + 1);
                s += (0..d).map(|m| gk[m] * cfg.activation.value(a[m])).sum::<f64>();
            }
            grad.delta_grad += inv_n * s;
        }
    }
    if !grad.is_finite() {
        return Err(Error::Overflow {
            layer: 0,
            what: "gradient is not finite".into(),
        });
    }
    Ok((value * inv_n, grad))
}

pub fn grad_objective(cfg: &NetworkConfig, data: &Dataset, w: &Weights) -> Result<Grad> {
    value_and_grad(cfg, data, w).map(|(_, g)| g)
}

/// Central differences of the objective in every weight entry (and in `δ`
/// when it is trainable), with step `step·(1 + |entry|)`.
pub fn finite_diff_grad(cfg: &NetworkConfig, data: &Dataset, w: &Weights, step: f64) -> Result<Grad> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    let mut probe = w.clone();
    let mut grad = Grad::zeros_like(w);
    let d = w.width();
    for j in 0..w.depth() {
        for idx in 0..d * d {
            let orig = w.layers[j].as_slice()[idx];
            let h = step * (1.0 + orig.abs());
            probe.layers[j].as_mut_slice()[idx] = orig + h;
            let up = objective(cfg, data, &probe)?;
            probe.layers[j].as_mut_slice()[idx] = orig - h;
            let down = objective(cfg, data, &probe)?;
            probe.layers[j].as_mut_slice()[idx] = orig;
            grad.layers[j].as_mut_slice()[idx] = (up - down) / (2.0 * h);
        }
    }
    if cfg.delta_trainable {
        let h = step * (1.0 + w.delta.abs());
        probe.delta = w.delta + h;
        let up = objective(cfg, data, &probe)?;
        probe.delta = w.delta - h;
        let down = objective(cfg, data, &probe)?;
        grad.delta_grad = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn directions_dot(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x.as_slice(), y.as_slice())).sum()
}

fn scale_directions(a: &mut [Matrix], s: f64) {
    for m in a {
        for v in m.as_mut_slice() {
            *v *= s;
        }
    }
}

/// Hessian-vector product in the layer weights by central differences of
/// the analytic gradient.
pub fn hessian_vector_product(cfg: &NetworkConfig, data: &Dataset, w: &Weights, v: &[Matrix]) -> Result<Vec<Matrix>> {
    let vnorm = directions_dot(v, v).sqrt();
    if vnorm == 0.0 {
        return Ok(vec![Matrix::zeros(w.width()); w.depth()]);
    }
    let wnorm = w.layers.iter().map(Matrix::frobenius_sq).sum::<f64>().sqrt();
    let h = FD_HVP_STEP * wnorm.max(1.0) / vnorm;
    let mut plus = w.clone();
    let mut minus = w.clone();
    for ((p, m), dir) in plus.layers.iter_mut().zip(minus.layers.iter_mut()).zip(v) {
        p.axpy(h, dir);
        m.axpy(-h, dir);
    }
    let gp = grad_objective(cfg, data, &plus)?;
    let gm = grad_objective(cfg, data, &minus)?;
    Ok(gp
        .layers
        .iter()
        .zip(&gm.layers)
        .map(|(a, b)| a.sub(b).scaled(1.0 / (2.0 * h)))
        .collect())
}

/// Largest-magnitude Hessian eigenvalue by power iteration with at most
/// `probes` Hessian-vector products.
pub fn hessian_spectral_estimate(cfg: &NetworkConfig, data: &Dataset, w: &Weights, probes: usize) -> Result<HessianEstimate> {
    if probes == 0 {
        return Err(Error::invalid("probes must be at least 1"));
    }
    let d = w.width();
    let l = w.depth();
    let seeds: [fn(usize) -> f64; 2] = [|_| 1.0, |i| 1.0 + ((i + 1) as f64).sqrt()];
    let mut fallback = HessianEstimate {
        value: 0.0,
        iterations: 0,
        converged: true,
    };
    for seed in &seeds {
        let mut v: Vec<Matrix> = (0..l)
            .map(|j| {
                let data = (0..d * d).map(|i| seed(j * d * d + i)).collect();
                Matrix::from_row_major(d, data).expect("square")
            })
            .collect();
        let n0 = directions_dot(&v, &v).sqrt();
        scale_directions(&mut v, 1.0 / n0);
        let mut prev = f64::NAN;
        let mut iters = 0;
        let mut converged = false;
        let mut lam = 0.0;
        while iters < probes {
            let hv = hessian_vector_product(cfg, data, w, &v)?;
            iters += 1;
            lam = directions_dot(&hv, &hv).sqrt();
            if lam == 0.0 {
                break;
            }
            if (lam - prev).abs() <= HESSIAN_REL_TOL * lam {
                converged = true;
                break;
            }
            prev = lam;
            v = hv;
            scale_directions(&mut v, 1.0 / lam);
        }
        if lam > 0.0 {
            return Ok(HessianEstimate {
                value: lam,
                iterations: iters,
                converged,
            });
        }
        fallback.iterations += iters;
    }
    Ok(fallback)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{init_weights, sample_free_inputs, sphere_targets, InitMode};
    use crate::linalg::Vector;
    use crate::network::Activation;

    fn basis_pair() -> Dataset {
        Dataset::new(vec![Vector::basis(2, 0)], vec![Vector::basis(2, 1)], 0).unwrap()
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss(&[0.3, 0.4], &[0.3, 0.4]), 0.0);
        assert_eq!(loss(&[0.0, 1.0], &[1.0, 0.0]), 1.0);
        assert_eq!(loss(&[1.0, 0.0], &[1.0, 2.0]), 2.0);
    }

    #[test]
    fn objective_at_zero_weights() {
        let cfg = NetworkConfig::new(2, 4);
        assert_eq!(objective(&cfg, &basis_pair(), &Weights::zeros(&cfg)).unwrap(), 1.0);
    }

    #[test]
    fn zero_weight_gradient_closed_form() {
        let cfg = NetworkConfig::new(2, 4).with_trainable_delta(true);
        let g = grad_objective(&cfg, &basis_pair(), &Weights::zeros(&cfg)).unwrap();
        let expect = Matrix::from_rows(&[vec![0.5, 0.0], vec![-0.5, 0.0]]).unwrap();
        for layer in &g.layers {
            assert_eq!(layer, &expect);
        }
        assert_eq!(g.delta_grad, 0.0);
    }

    fn random_instance(d: usize, l: usize, n: usize, seed: u64, trainable: bool) -> (NetworkConfig, Dataset, Weights) {
        let cfg = NetworkConfig::new(d, l).with_trainable_delta(trainable);
        let xs = sample_free_inputs(n, d, seed);
        let ds = Dataset::new(xs, sphere_targets(n, d, seed), seed).unwrap();
        let w = init_weights(&cfg, InitMode::Gaussian { beta0: 0.0 }, None, seed).unwrap();
        (cfg, ds, w)
    }

    #[test]
    fn backward_matches_explicit_jacobians() {
        let (cfg, ds, w) = random_instance(3, 5, 1, 4, false);
        let tr = forward(&cfg, &w, ds.xs[0].as_slice(), true).unwrap();
        let bt = backward(&w, &tr, ds.ys[0].as_slice()).unwrap();
        let r: Vec<f64> = tr.output().iter().zip(ds.ys[0].as_slice()).map(|(a, b)| a - b).collect();
        for (k, m) in tr.jacobians.as_ref().unwrap().iter().enumerate() {
            let expect = m.matvec_t(&r);
            for (a, b) in bt.g(k).iter().zip(&expect) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn analytic_matches_finite_differences() {
        let (cfg, ds, w) = random_instance(3, 5, 2, 8, true);
        let g = grad_objective(&cfg, &ds, &w).unwrap();
        let fd = finite_diff_grad(&cfg, &ds, &w, FD_GRAD_STEP).unwrap();
        for (a, b) in g.layers.iter().zip(&fd.layers) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() <= 1e-6 * x.abs() + 1e-9, "{x} vs {y}");
            }
        }
        assert!((g.delta_grad - fd.delta_grad).abs() <= 1e-6 * g.delta_grad.abs() + 1e-9);
    }

    #[test]
    fn scalar_linear_closed_form() {
        let cfg = NetworkConfig::new(1, 1)
            .with_activation(Activation::Identity)
            .with_delta_exponent(0.0);
        let ds = Dataset::new(vec![Vector(vec![1.0])], vec![Vector(vec![-1.0])], 0).unwrap();
        let w = Weights::new(vec![Matrix::diag(&[0.3])], 1.0).unwrap();
        let expect = -1.0 * (-1.0 - 1.3 * 1.0);
        let fd = finite_diff_grad(&cfg, &ds, &w, FD_GRAD_STEP).unwrap();
        let g = grad_objective(&cfg, &ds, &w).unwrap();
        assert!((fd.layers[0][(0, 0)] - expect).abs() < 1e-8);
        assert!((g.layers[0][(0, 0)] - expect).abs() < 1e-14);
    }

    #[test]
    fn halving_step_quarters_error() {
        let cfg = NetworkConfig::new(1, 2).with_delta_exponent(0.0);
        let ds = Dataset::new(vec![Vector(vec![1.0])], vec![Vector(vec![-1.0])], 0).unwrap();
        let w = Weights::new(vec![Matrix::diag(&[0.8]), Matrix::diag(&[-0.6])], 1.0).unwrap();
        let g = grad_objective(&cfg, &ds, &w).unwrap().layers[0][(0, 0)];
        let e1 = (finite_diff_grad(&cfg, &ds, &w, 1e-2).unwrap().layers[0][(0, 0)] - g).abs();
        let e2 = (finite_diff_grad(&cfg, &ds, &w, 5e-3).unwrap().layers[0][(0, 0)] - g).abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn interpolation_gives_zero_gradient() {
        let (cfg, ds, w) = random_instance(3, 4, 3, 2, true);
        let ys = ds
            .xs
            .iter()
            .map(|x| crate::network::output(&cfg, &w, x.as_slice()).unwrap())
            .collect::<Vec<_>>();
        let fit = Dataset {
            ys,
            ..ds
        };
        let g = grad_objective(&cfg, &fit, &w).unwrap();
        assert_eq!(g.norm_sq(), 0.0);
        assert_eq!(g.delta_grad, 0.0);
    }

    #[test]
    fn hessian_of_linear_layer() {
        let cfg = NetworkConfig::new(2, 1)
            .with_activation(Activation::Identity)
            .with_delta_exponent(0.0);
        let x = Vector(vec![0.6, 0.8]);
        let ds = Dataset::new(vec![x.clone()], vec![Vector(vec![0.0, 1.0])], 0).unwrap();
        let w = Weights::new(vec![Matrix::zeros(2)], 1.0).unwrap();
        let h = hessian_spectral_estimate(&cfg, &ds, &w, 100).unwrap();
        assert!((h.value - 1.0).abs() < 1e-6, "{h:?}");
        assert!(h.converged);

        // Seed orthogonal to the input still finds the eigenvalue.
        let x = Vector(vec![1.0, -1.0]).normalized().unwrap();
        let ds = Dataset::new(vec![x.clone()], vec![x], 0).unwrap();
        let h = hessian_spectral_estimate(&cfg, &ds, &w, 100).unwrap();
        assert!((h.value - 1.0).abs() < 1e-6, "{h:?}");
    }

    #[test]
    fn duplicated_sample_leaves_hessian_unchanged() {
        let (cfg, ds, w) = random_instance(2, 3, 1, 6, false);
        let twice = Dataset::new(
            vec![ds.xs[0].clone(), ds.xs[0].clone()],
            vec![ds.ys[0].clone(), ds.ys[0].clone()],
            0,
        )
        .unwrap();
        let a = hessian_spectral_estimate(&cfg, &ds, &w, 200).unwrap().value;
        let b = hessian_spectral_estimate(&cfg, &twice, &w, 200).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }
}
