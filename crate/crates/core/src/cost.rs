//! MSE cost over an empirical input measure: exact gradient and Hessian, the
//! cost decomposition, the selected second-order differentials `g2`, the Gram
//! matrix, and the determinant reconstruction used in the Morse argument.
//!
//! Population integrals are weighted finite sums over atoms, which is exact
//! for discrete input distributions. The decomposition of the cost reads
//!
//! ```text
//! J(theta) = R(theta) + ||Psi||^2 - 2 <Psi, f> + E||Y||^2
//! ```
//!
//! with all inner products taken under the atom weights and
//! `E||Y||^2 = ||f||^2 + noise_second_moment`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::net::Network;
use serde::{Deserialize, Serialize};

/// Weighted input atoms standing in for the input distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Mat,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Mat, weights: Vec<f64>) -> Result<Self> {
        if atoms.rows() == 0 {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        if weights.len() != atoms.rows() {
            return Err(Error::DimensionMismatch {
                context: "measure weights",
                expected: atoms.rows(),
                got: weights.len(),
            });
        }
        if !atoms.all_finite() || !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::NonFinite("empirical measure"));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidMeasure("weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(EmpiricalMeasure { atoms, weights })
    }

    pub fn uniform(atoms: Mat) -> Result<Self> {
        let n = atoms.rows();
        if n == 0 {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        let w = vec![1.0 / n as f64; n];
        EmpiricalMeasure::new(atoms, w)
    }

    pub fn len(&self) -> usize {
        self.atoms.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.atoms.cols()
    }

    pub fn atom(&self, n: usize) -> &[f64] {
        self.atoms.row(n)
    }

    pub fn atoms(&self) -> &Mat {
        &self.atoms
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of pairwise-distinct atoms.
    pub fn distinct_atoms(&self) -> usize {
        let n = self.len();
        let mut distinct = 0;
        'outer: for i in 0..n {
            for j in 0..i {
                if self.atom(i) == self.atom(j) {
                    continue 'outer;
                }
            }
            distinct += 1;
        }
        distinct
    }
}

/// Target values at the atoms, one row per atom (single column for scalar
/// regression), plus the label noise carried as an additive constant so the
/// decomposition identity stays testable without modeling the label kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetFunction {
    values: Mat,
    noise_second_moment: f64,
}

impl TargetFunction {
    pub fn new(values: Mat, noise_second_moment: f64) -> Result<Self> {
        if !values.all_finite() {
            return Err(Error::NonFinite("target values"));
        }
        if !(noise_second_moment.is_finite() && noise_second_moment >= 0.0) {
            return Err(Error::InvalidArgument(
                "noise_second_moment must be finite and non-negative".into(),
            ));
        }
        Ok(TargetFunction {
            values,
            noise_second_moment,
        })
    }

    pub fn from_scalar_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let mat = Mat::from_fn(n, 1, |i, _| values[i]);
        TargetFunction::new(mat, 0.0)
    }

    /// The target that matches the network response exactly on the atoms.
    pub fn of_response(net: &Network, mu: &EmpiricalMeasure) -> Result<Self> {
        let o = net.topology().output_dim;
        let mut values = Mat::zeros(mu.len(), o);
        for n in 0..mu.len() {
            let y = net.response(mu.atom(n))?;
            for l in 0..o {
                values[(n, l)] = y[l];
            }
        }
        TargetFunction::new(values, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn output_dim(&self) -> usize {
        self.values.cols()
    }

    pub fn value(&self, n: usize) -> &[f64] {
        self.values.row(n)
    }

    pub fn scalar(&self, n: usize) -> f64 {
        self.values[(n, 0)]
    }

    pub fn scalar_values(&self) -> Vec<f64> {
        self.values.col(0)
    }

    pub fn noise_second_moment(&self) -> f64 {
        self.noise_second_moment
    }

    pub fn with_noise(mut self, noise_second_moment: f64) -> Result<Self> {
        if !(noise_second_moment.is_finite() && noise_second_moment >= 0.0) {
            return Err(Error::InvalidArgument(
                "noise_second_moment must be finite and non-negative".into(),
            ));
        }
        self.noise_second_moment = noise_second_moment;
        Ok(self)
    }
}

/// Analytic convex regularizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    None,
    /// Contributes `lambda * ||theta||^2`.
    Ridge { lambda: f64 },
}

impl Regularizer {
    pub fn ridge(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(
                "ridge strength must be finite and non-negative".into(),
            ));
        }
        Ok(Regularizer::Ridge { lambda })
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        match self {
            Regularizer::None => 0.0,
            Regularizer::Ridge { lambda } => lambda * linalg::dot(theta, theta),
        }
    }

    pub fn add_gradient(&self, theta: &[f64], grad: &mut [f64]) {
        if let Regularizer::Ridge { lambda } = self {
            linalg::axpy(2.0 * lambda, theta, grad);
        }
    }

    pub fn add_hessian(&self, hess: &mut Mat) {
        if let Regularizer::Ridge { lambda } = self {
            for i in 0..hess.rows() {
                hess[(i, i)] += 2.0 * lambda;
            }
        }
    }
}

fn check_measure_target(mu: &EmpiricalMeasure, f: &TargetFunction) -> Result<()> {
    if f.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            context: "target values vs atoms",
            expected: mu.len(),
            got: f.len(),
        });
    }
    Ok(())
}

fn check_net_measure(net: &Network, mu: &EmpiricalMeasure) -> Result<()> {
    if net.topology().input_dim != mu.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "network input vs atom dimension",
            expected: net.topology().input_dim,
            got: mu.input_dim(),
        });
    }
    Ok(())
}

/// Weighted inner product `sum_n w_n a_n b_n` of two functions given by their
/// values at the atoms.
pub fn inner_product(a: &[f64], b: &[f64], mu: &EmpiricalMeasure) -> Result<f64> {
    if a.len() != mu.len() || b.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            context: "inner product operands",
            expected: mu.len(),
            got: if a.len() != mu.len() { a.len() } else { b.len() },
        });
    }
    Ok((0..mu.len()).map(|n| mu.weight(n) * a[n] * b[n]).sum())
}

/// Weighted norm of a function given by its values at the atoms.
pub fn measure_norm(a: &[f64], mu: &EmpiricalMeasure) -> Result<f64> {
    Ok(inner_product(a, a, mu)?.sqrt())
}

/// Regularized mean squared error
/// `sum_n w_n ||Psi(x_n) - f_n||^2 + noise + R(theta)`. Any output dimension.
pub fn cost(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<f64> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let o = net.topology().output_dim;
    if f.output_dim() != o {
        return Err(Error::DimensionMismatch {
            context: "target output dimension",
            expected: o,
            got: f.output_dim(),
        });
    }
    let mut total = 0.0;
    for n in 0..mu.len() {
        let y = net.response(mu.atom(n))?;
        let t = f.value(n);
        let mut sq = 0.0;
        for l in 0..o {
            let r = y[l] - t[l];
            sq += r * r;
        }
        total += mu.weight(n) * sq;
    }
    Ok(total + f.noise_second_moment() + reg.value(&net.params.flatten()))
}

/// The four terms of the cost decomposition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    /// `R(theta)`
    pub regularizer: f64,
    /// `||Psi||^2` under the measure
    pub response_norm_sq: f64,
    /// `<Psi, f>` under the measure
    pub target_correlation: f64,
    /// `E||Y||^2 = ||f||^2 + noise`
    pub label_second_moment: f64,
}

impl Decomposition {
    pub fn recombined(&self) -> f64 {
        self.regularizer + self.response_norm_sq - 2.0 * self.target_correlation
            + self.label_second_moment
    }
}

/// Computes the decomposition terms independently of [`cost`].
pub fn decomposition(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<Decomposition> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let o = net.topology().output_dim;
    let mut response_norm_sq = 0.0;
    let mut target_correlation = 0.0;
    let mut target_norm_sq = 0.0;
    for n in 0..mu.len() {
        let y = net.response(mu.atom(n))?;
        let t = f.value(n);
        let w = mu.weight(n);
        for l in 0..o.min(f.output_dim()) {
            response_norm_sq += w * y[l] * y[l];
            target_correlation += w * y[l] * t[l];
            target_norm_sq += w * t[l] * t[l];
        }
    }
    Ok(Decomposition {
        regularizer: reg.value(&net.params.flatten()),
        response_norm_sq,
        target_correlation,
        label_second_moment: target_norm_sq + f.noise_second_moment(),
    })
}

/// The target-correlation term `Jhat(theta) = <Psi_theta, f>`.
pub fn jhat(net: &Network, mu: &EmpiricalMeasure, f: &TargetFunction) -> Result<f64> {
    Ok(decomposition(net, mu, f, &Regularizer::None)?.target_correlation)
}

/// Gradient of the cost with respect to the flat parameters (scalar output):
/// `2 sum_n w_n (Psi(x_n) - f_n) grad Psi(x_n) + grad R`.
pub fn grad_cost(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<Vec<f64>> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let dim = net.topology().param_dim();
    let mut grad = vec![0.0; dim];
    let mut g_psi = vec![0.0; dim];
    for n in 0..mu.len() {
        let x = mu.atom(n);
        let residual = net.scalar_response(x)? - f.scalar(n);
        g_psi.iter_mut().for_each(|v| *v = 0.0);
        net.grad_response_into(x, &mut g_psi);
        linalg::axpy(2.0 * mu.weight(n) * residual, &g_psi, &mut grad);
    }
    reg.add_gradient(&net.params.flatten(), &mut grad);
    Ok(grad)
}

/// Gradient of the unregularized squared-error cost for any output
/// dimension, assembled coordinate by coordinate from the response partials.
pub fn grad_cost_multi(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
) -> Result<Vec<f64>> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let topo = net.topology();
    let o = topo.output_dim;
    if f.output_dim() != o {
        return Err(Error::DimensionMismatch {
            context: "target output dimension",
            expected: o,
            got: f.output_dim(),
        });
    }
    let mut grad = vec![0.0; topo.param_dim()];
    for n in 0..mu.len() {
        let x = mu.atom(n);
        let w = mu.weight(n);
        let y = net.response(x)?;
        let t = f.value(n);
        let residual: Vec<f64> = (0..o).map(|l| 2.0 * w * (y[l] - t[l])).collect();
        for l in 0..o {
            grad[topo.flat_index_b_out(l)] += residual[l];
        }
        for j in 0..topo.hidden {
            let z = net.params.pre_activation(j, x);
            let psi = net.activation.eval(0, z);
            let dpsi = net.activation.eval(1, z);
            let row_dot: f64 = (0..o).map(|l| residual[l] * net.params.w_out()[(j, l)]).sum();
            for l in 0..o {
                grad[topo.flat_index_w_out(j, l)] += residual[l] * psi;
            }
            grad[topo.flat_index_b_hidden(j)] += dpsi * row_dot;
            for i in 0..topo.input_dim {
                grad[topo.flat_index_w_in(i, j)] += dpsi * row_dot * x[i];
            }
        }
    }
    Ok(grad)
}

/// Hessian of the cost (scalar output):
/// `2 sum_n w_n grad Psi grad Psi^T + 2 sum_n w_n (Psi - f_n) hess Psi + hess R`.
pub fn hess_cost(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<Mat> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let dim = net.topology().param_dim();
    let mut hess = Mat::zeros(dim, dim);
    let mut g_psi = vec![0.0; dim];
    for n in 0..mu.len() {
        let x = mu.atom(n);
        let w = mu.weight(n);
        let residual = net.scalar_response(x)? - f.scalar(n);
        g_psi.iter_mut().for_each(|v| *v = 0.0);
        net.grad_response_into(x, &mut g_psi);
        for i in 0..dim {
            let gi = 2.0 * w * g_psi[i];
            if gi == 0.0 {
                continue;
            }
            for j in 0..dim {
                hess[(i, j)] += gi * g_psi[j];
            }
        }
        net.hess_response_accumulate(x, 2.0 * w * residual, &mut hess);
    }
    reg.add_hessian(&mut hess);
    Ok(hess)
}

/// Gram matrix `G = sum_n w_n grad Psi(x_n) grad Psi(x_n)^T`; always symmetric
/// positive semidefinite, strictly definite exactly when the response
/// derivatives are linearly independent on the atoms.
pub fn gram(net: &Network, mu: &EmpiricalMeasure) -> Result<Mat> {
    check_net_measure(net, mu)?;
    net.scalar_response(mu.atom(0))?; // triggers the scalar-output check
    let dim = net.topology().param_dim();
    let mut g = Mat::zeros(dim, dim);
    let mut g_psi = vec![0.0; dim];
    for n in 0..mu.len() {
        let x = mu.atom(n);
        let w = mu.weight(n);
        g_psi.iter_mut().for_each(|v| *v = 0.0);
        net.grad_response_into(x, &mut g_psi);
        for i in 0..dim {
            let gi = w * g_psi[i];
            if gi == 0.0 {
                continue;
            }
            for j in 0..dim {
                g[(i, j)] += gi * g_psi[j];
            }
        }
    }
    Ok(g)
}

/// Hessian of `Jhat`, assembled from the per-atom response Hessians weighted
/// by `w_n f_n`.
pub fn jhat_hessian(net: &Network, mu: &EmpiricalMeasure, f: &TargetFunction) -> Result<Mat> {
    check_net_measure(net, mu)?;
    check_measure_target(mu, f)?;
    let dim = net.topology().param_dim();
    net.scalar_response(mu.atom(0))?;
    let mut hess = Mat::zeros(dim, dim);
    for n in 0..mu.len() {
        net.hess_response_accumulate(mu.atom(n), mu.weight(n) * f.scalar(n), &mut hess);
    }
    Ok(hess)
}

/// First-order data of the Morse argument: the full cost gradient.
pub fn g1(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<Vec<f64>> {
    grad_cost(net, mu, f, reg)
}

/// Position of the pair `(i, k)`, `i <= k`, in the lexicographic enumeration
/// of unordered pairs over `0..d`: (0,0), (0,1), ..., (0,d-1), (1,1), ...
fn pair_offset(d: usize, i: usize, k: usize) -> usize {
    debug_assert!(i <= k && k < d);
    i * d - i * (i + 1) / 2 + i + (k - i)
}

/// Index layout of the selected second-order differentials of `Jhat`.
///
/// Three blocks, neurons outer and indices inner within each block:
/// `d^2/d b_j^2`, then `d/d b_j d/d w_ij`, then `d/d w_ij d/d w_kj` with
/// `i <= k` lexicographic.
#[derive(Clone, Copy, Debug)]
pub struct G2Layout {
    pub hidden: usize,
    pub input_dim: usize,
}

impl G2Layout {
    pub fn of(net: &Network) -> Self {
        let topo = net.topology();
        G2Layout {
            hidden: topo.hidden,
            input_dim: topo.input_dim,
        }
    }

    pub fn len(&self) -> usize {
        let (m, d) = (self.hidden, self.input_dim);
        m + m * d + m * d * (d + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bias_bias(&self, j: usize) -> usize {
        j
    }

    pub fn bias_weight(&self, j: usize, i: usize) -> usize {
        self.hidden + j * self.input_dim + i
    }

    pub fn weight_weight(&self, j: usize, i: usize, k: usize) -> usize {
        let d = self.input_dim;
        let pairs = d * (d + 1) / 2;
        self.hidden + self.hidden * d + j * pairs + pair_offset(d, i, k)
    }
}

/// Selected second-order differentials of `Jhat` in the [`G2Layout`] order.
pub fn g2(net: &Network, mu: &EmpiricalMeasure, f: &TargetFunction) -> Result<Vec<f64>> {
    let hess = jhat_hessian(net, mu, f)?;
    let topo = net.topology();
    let layout = G2Layout::of(net);
    let mut out = vec![0.0; layout.len()];
    for j in 0..topo.hidden {
        let bj = topo.flat_index_b_hidden(j);
        out[layout.bias_bias(j)] = hess[(bj, bj)];
        for i in 0..topo.input_dim {
            let wi = topo.flat_index_w_in(i, j);
            out[layout.bias_weight(j, i)] = hess[(bj, wi)];
            for k in i..topo.input_dim {
                let wk = topo.flat_index_w_in(k, j);
                out[layout.weight_weight(j, i, k)] = hess[(wi, wk)];
            }
        }
    }
    Ok(out)
}

/// Exact Hessian of the deterministic mean term `R(theta) + ||Psi_theta||^2`.
///
/// Equals the cost Hessian against the zero target with no noise; its outer
/// block is twice the outer-gradient Gram and is positive semidefinite for
/// every parameter.
pub fn mean_term_hessian(net: &Network, mu: &EmpiricalMeasure, reg: &Regularizer) -> Result<Mat> {
    let zero_target = TargetFunction::new(Mat::zeros(mu.len(), 1), 0.0)?;
    hess_cost(net, mu, &zero_target, reg)
}

/// Gradient of the mean term, the source of the deterministic substitutes in
/// the determinant reconstruction.
fn mean_term_gradient(net: &Network, mu: &EmpiricalMeasure, reg: &Regularizer) -> Result<Vec<f64>> {
    let zero_target = TargetFunction::new(Mat::zeros(mu.len(), 1), 0.0)?;
    grad_cost(net, mu, &zero_target, reg)
}

/// Default absolute deactivation margin guarding the `1/w_out[j]` substitutes.
pub const DEFAULT_DEACTIVATION_MARGIN: f64 = 1e-8;

/// Reconstructs `det(hess J)` from `(theta, g2)` without touching the mixed
/// outer-inner second derivatives of `Jhat`.
///
/// The reconstruction places the `g2` entries in the same-neuron inner slots,
/// zeros in the structurally zero slots, and the deterministic substitutes
/// `(1/(2 w_out[j])) d/d(inner)[R + ||Psi||^2]` in the mixed slots, then
/// returns `det(hess[R + ||Psi||^2] - 2 * reconstruction)`.
///
/// At critical points of `J` this equals `det(hess J)`; away from them the
/// two sides may differ. Errors when some `|w_out[j]|` is inside the
/// deactivation margin.
pub fn reconstruct_det_hessian(
    net: &Network,
    g2_values: &[f64],
    mu: &EmpiricalMeasure,
    reg: &Regularizer,
    deactivation_margin: f64,
) -> Result<f64> {
    let topo = net.topology();
    if topo.output_dim != 1 {
        return Err(Error::OutputNotScalar(topo.output_dim));
    }
    let layout = G2Layout::of(net);
    if g2_values.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            context: "g2 vector",
            expected: layout.len(),
            got: g2_values.len(),
        });
    }
    for j in 0..topo.hidden {
        let w = net.params.w_out()[(j, 0)];
        if w.abs() <= deactivation_margin {
            return Err(Error::OutsideEfficientMargin {
                neuron: j,
                value: w.abs(),
                margin: deactivation_margin,
            });
        }
    }

    let dim = topo.param_dim();
    let mean_grad = mean_term_gradient(net, mu, reg)?;
    let mut recon = Mat::zeros(dim, dim);
    for j in 0..topo.hidden {
        let bj = topo.flat_index_b_hidden(j);
        let oj = topo.flat_index_w_out(j, 0);
        let w = net.params.w_out()[(j, 0)];

        recon[(bj, bj)] = g2_values[layout.bias_bias(j)];
        for i in 0..topo.input_dim {
            let wi = topo.flat_index_w_in(i, j);
            let bw = g2_values[layout.bias_weight(j, i)];
            recon[(bj, wi)] = bw;
            recon[(wi, bj)] = bw;
            for k in i..topo.input_dim {
                let wk = topo.flat_index_w_in(k, j);
                let ww = g2_values[layout.weight_weight(j, i, k)];
                recon[(wi, wk)] = ww;
                recon[(wk, wi)] = ww;
            }
        }

        let sub_b = mean_grad[bj] / (2.0 * w);
        recon[(oj, bj)] = sub_b;
        recon[(bj, oj)] = sub_b;
        for i in 0..topo.input_dim {
            let wi = topo.flat_index_w_in(i, j);
            let sub_w = mean_grad[wi] / (2.0 * w);
            recon[(oj, wi)] = sub_w;
            recon[(wi, oj)] = sub_w;
        }
    }

    let mut assembled = mean_term_hessian(net, mu, reg)?;
    assembled.add_scaled(-2.0, &recon);
    linalg::sym_det(&assembled)
}

/// Everything the landscape knows about one parameter, bundled for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Mat,
    pub decomposition: Decomposition,
    pub gram: Mat,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

impl CostReport {
    pub fn compute(
        net: &Network,
        mu: &EmpiricalMeasure,
        f: &TargetFunction,
        reg: &Regularizer,
    ) -> Result<Self> {
        let value = cost(net, mu, f, reg)?;
        let gradient = grad_cost(net, mu, f, reg)?;
        let hessian = hess_cost(net, mu, f, reg)?;
        let eigenvalues = linalg::sym_eigenvalues(&hessian)?;
        Ok(CostReport {
            value,
            gradient,
            hessian,
            decomposition: decomposition(net, mu, f, reg)?,
            gram: gram(net, mu)?,
            eigenvalues,
        })
    }
}

/// Result of the strong convexity probe around a point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConvexityCertificate {
    /// The cost is `rho`-strongly convex on the probed ball and the gradient
    /// at the center is small enough to trap a minimum inside.
    Certified { rho: f64, delta: f64 },
    Failed { reason: String },
}

impl ConvexityCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, ConvexityCertificate::Certified { .. })
    }
}

/// Probe points of a ball: the center, axis points at the full radius, and
/// seeded random directions at the full radius.
pub(crate) fn ball_probe_points(
    center: &[f64],
    delta: f64,
    random_probes: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut points = Vec::with_capacity(1 + 2 * dim + random_probes);
    points.push(center.to_vec());
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut p = center.to_vec();
            p[i] += sign * delta;
            points.push(p);
        }
    }
    let mut rng = crate::rng::Rng::seed_from(seed);
    for _ in 0..random_probes {
        let dir = rng.normal_vec(dim);
        let n = linalg::norm(&dir).max(1e-300);
        let mut p = center.to_vec();
        linalg::axpy(delta / n, &dir, &mut p);
        points.push(p);
    }
    points
}

/// Samples the minimum Hessian eigenvalue over a probe of `B_delta(theta0)`
/// and certifies a strongly convex neighborhood when the probe floor `rho` is
/// positive and `||grad J(theta0)|| < delta * rho / 2`.
pub fn strong_convexity_certificate(
    net: &Network,
    delta: f64,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
    reg: &Regularizer,
) -> Result<ConvexityCertificate> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument("probe radius must be positive".into()));
    }
    let topo = net.topology();
    let center = net.params.flatten();
    let points = ball_probe_points(&center, delta, 16, 0x5eed_ba11);
    if points.len() > 4096 {
        return Err(Error::ProbeBudgetExhausted(format!(
            "{} probe points exceed the budget",
            points.len()
        )));
    }
    let mut rho = f64::INFINITY;
    for p in &points {
        let probe_net = Network::new(
            net.activation.clone(),
            crate::net::ParameterVector::from_flat(&topo, p)?,
        );
        let hess = hess_cost(&probe_net, mu, f, reg)?;
        let min_eig = linalg::sym_eigenvalues(&hess)?[0];
        rho = rho.min(min_eig);
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Ok(ConvexityCertificate::Failed {
            reason: format!("Hessian floor over the probe is {rho:.6e}, not positive"),
        });
    }
    let grad_norm = linalg::norm(&grad_cost(net, mu, f, reg)?);
    if grad_norm >= delta * rho / 2.0 {
        return Ok(ConvexityCertificate::Failed {
            reason: format!(
                "gradient norm {grad_norm:.6e} is not below delta*rho/2 = {:.6e}",
                delta * rho / 2.0
            ),
        });
    }
    Ok(ConvexityCertificate::Certified { rho, delta })
}
