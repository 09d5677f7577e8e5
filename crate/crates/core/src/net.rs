//! Network topology, parameters, activations, and closed-form derivatives of
//! the response function up to second order.
//!
//! The response of a parameter `theta = (w, beta)` on input `x` is
//!
//! ```text
//! Psi_theta(x)_l = b_out[l] + sum_j psi(b_hidden[j] + <x, w_in[., j]>) * w_out[j, l]
//! ```
//!
//! All derivative formulas below assume a single output neuron; the gradient
//! and Hessian layouts follow the canonical flattening of
//! [`Topology::flat_index_w_in`] and friends.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::sync::Arc;

/// Shape of a shallow network: `input_dim` inputs, `hidden` hidden neurons,
/// `output_dim` outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Topology {
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
}

impl Topology {
    pub fn new(input_dim: usize, hidden: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidTopology(format!(
                "input_dim and output_dim must be at least 1, got {input_dim} and {output_dim}"
            )));
        }
        Ok(Topology {
            input_dim,
            hidden,
            output_dim,
        })
    }

    /// Total number of parameters: edge weights plus hidden and output biases.
    pub fn param_dim(&self) -> usize {
        let (d, m, o) = (self.input_dim, self.hidden, self.output_dim);
        d * m + m * o + m + o
    }

    /// Flat index of the inner weight from input `i` to hidden neuron `j`.
    /// Inner weights come first, column-major by hidden neuron.
    pub fn flat_index_w_in(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.input_dim && j < self.hidden);
        j * self.input_dim + i
    }

    /// Flat index of the bias of hidden neuron `j`.
    pub fn flat_index_b_hidden(&self, j: usize) -> usize {
        debug_assert!(j < self.hidden);
        self.input_dim * self.hidden + j
    }

    /// Flat index of the outer weight from hidden neuron `j` to output `l`.
    pub fn flat_index_w_out(&self, j: usize, l: usize) -> usize {
        debug_assert!(j < self.hidden && l < self.output_dim);
        self.input_dim * self.hidden + self.hidden + j * self.output_dim + l
    }

    /// Flat index of the bias of output neuron `l`.
    pub fn flat_index_b_out(&self, l: usize) -> usize {
        debug_assert!(l < self.output_dim);
        self.input_dim * self.hidden + self.hidden + self.hidden * self.output_dim + l
    }
}

/// A custom activation supplies evaluators for derivative orders 0..=3 and
/// optionally Taylor coefficients at zero (without them the admissibility
/// check is unavailable).
#[derive(Clone)]
pub struct CustomActivation {
    pub name: String,
    pub evals: [Arc<dyn Fn(f64) -> f64 + Send + Sync>; 4],
    pub taylor: Option<Vec<f64>>,
}

impl std::fmt::Debug for CustomActivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomActivation")
            .field("name", &self.name)
            .field("taylor", &self.taylor.as_ref().map(|t| t.len()))
            .finish()
    }
}

/// Analytic activation function with derivatives up to third order.
#[derive(Clone, Debug)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Softplus,
    Exp,
    Custom(CustomActivation),
}

/// Reflection law `psi(-x) = offset + slope * psi(x)` of an activation,
/// the source of sign-symmetric redundancies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignSymmetry {
    pub offset: f64,
    pub slope: f64,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    // max(x, 0) + ln(1 + exp(-|x|)) avoids overflow on both tails
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Activation {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "softplus" => Ok(Activation::Softplus),
            "exp" => Ok(Activation::Exp),
            other => Err(Error::UnknownActivation(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Softplus => "softplus",
            Activation::Exp => "exp",
            Activation::Custom(c) => &c.name,
        }
    }

    /// Evaluates the `order`-th derivative (order 0 is the function itself).
    pub fn eval(&self, order: usize, x: f64) -> f64 {
        debug_assert!(order <= 3, "derivative order at most 3");
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(x);
                match order {
                    0 => s,
                    1 => s * (1.0 - s),
                    2 => s * (1.0 - s) * (1.0 - 2.0 * s),
                    _ => s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s),
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                let sech2 = 1.0 - t * t;
                match order {
                    0 => t,
                    1 => sech2,
                    2 => -2.0 * t * sech2,
                    _ => sech2 * (6.0 * t * t - 2.0),
                }
            }
            Activation::Softplus => {
                if order == 0 {
                    softplus(x)
                } else {
                    // softplus' = sigmoid, so higher orders shift down
                    Activation::Sigmoid.eval(order - 1, x)
                }
            }
            Activation::Exp => x.exp(),
            Activation::Custom(c) => (c.evals[order])(x),
        }
    }

    /// `psi(-x) = offset + slope * psi(x)` when the activation has one.
    pub fn sign_symmetry(&self) -> Option<SignSymmetry> {
        match self {
            Activation::Sigmoid => Some(SignSymmetry {
                offset: 1.0,
                slope: -1.0,
            }),
            Activation::Tanh => Some(SignSymmetry {
                offset: 0.0,
                slope: -1.0,
            }),
            _ => None,
        }
    }

    /// Taylor coefficients `a_0..a_k_max` of the activation at zero,
    /// `a_k = psi^(k)(0) / k!`.
    ///
    /// Built-ins use exact series recurrences: `sigmoid' = sigmoid(1-sigmoid)`,
    /// `tanh' = 1 - tanh^2`, `softplus' = sigmoid`, `exp' = exp`. Custom
    /// activations must carry their own coefficients.
    pub fn taylor_coeffs(&self, k_max: usize) -> Result<Vec<f64>> {
        if k_max > 64 {
            return Err(Error::InvalidArgument(format!(
                "Taylor truncation {k_max} exceeds the supported order 64"
            )));
        }
        let n = k_max + 1;
        match self {
            Activation::Sigmoid => Ok(sigmoid_series(n)),
            Activation::Tanh => Ok(tanh_series(n)),
            Activation::Softplus => {
                // integrate the sigmoid series; constant term ln 2
                let sig = sigmoid_series(n);
                let mut a = vec![0.0; n];
                a[0] = std::f64::consts::LN_2;
                for k in 1..n {
                    a[k] = sig[k - 1] / k as f64;
                }
                Ok(a)
            }
            Activation::Exp => {
                let mut a = vec![0.0; n];
                let mut factorial = 1.0;
                for (k, slot) in a.iter_mut().enumerate() {
                    if k > 0 {
                        factorial *= k as f64;
                    }
                    *slot = 1.0 / factorial;
                }
                Ok(a)
            }
            Activation::Custom(c) => match &c.taylor {
                Some(t) if t.len() >= n => Ok(t[..n].to_vec()),
                _ => Err(Error::MissingTaylorCoefficients(c.name.clone())),
            },
        }
    }
}

/// Series of the logistic function from `s' = s - s^2`, `s(0) = 1/2`:
/// `(k+1) a_{k+1} = a_k - sum_i a_i a_{k-i}`.
fn sigmoid_series(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n];
    if n == 0 {
        return a;
    }
    a[0] = 0.5;
    for k in 0..n.saturating_sub(1) {
        let square: f64 = (0..=k).map(|i| a[i] * a[k - i]).sum();
        a[k + 1] = (a[k] - square) / (k + 1) as f64;
    }
    a
}

/// Series of tanh from `t' = 1 - t^2`, `t(0) = 0`.
fn tanh_series(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let square: f64 = (0..=k).map(|i| a[i] * a[k - i]).sum();
        let delta = if k == 0 { 1.0 } else { 0.0 };
        a[k + 1] = (delta - square) / (k + 1) as f64;
    }
    a
}

/// Weights and biases of a shallow network in their natural shapes, plus the
/// canonical flat view used by every gradient and Hessian in the crate.
///
/// Flat order: all inner weights column-major by hidden neuron, then hidden
/// biases, then outer weights row-major by hidden neuron, then output biases.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector {
    /// `input_dim x hidden`; entry `(i, j)` connects input `i` to neuron `j`.
    w_in: Mat,
    /// length `hidden`
    b_hidden: Vec<f64>,
    /// `hidden x output_dim`; entry `(j, l)` connects neuron `j` to output `l`.
    w_out: Mat,
    /// length `output_dim`
    b_out: Vec<f64>,
}

impl ParameterVector {
    pub fn new(w_in: Mat, b_hidden: Vec<f64>, w_out: Mat, b_out: Vec<f64>) -> Result<Self> {
        let d = w_in.rows();
        let m = w_in.cols();
        let o = b_out.len();
        if b_hidden.len() != m {
            return Err(Error::DimensionMismatch {
                context: "hidden biases",
                expected: m,
                got: b_hidden.len(),
            });
        }
        if w_out.rows() != m || w_out.cols() != o {
            return Err(Error::DimensionMismatch {
                context: "outer weight matrix",
                expected: m * o,
                got: w_out.rows() * w_out.cols(),
            });
        }
        if d == 0 || o == 0 {
            return Err(Error::InvalidTopology(
                "parameter matrices imply an empty input or output layer".into(),
            ));
        }
        let finite = w_in.all_finite()
            && w_out.all_finite()
            && b_hidden.iter().all(|v| v.is_finite())
            && b_out.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(ParameterVector {
            w_in,
            b_hidden,
            w_out,
            b_out,
        })
    }

    pub fn zeros(topology: &Topology) -> Self {
        ParameterVector {
            w_in: Mat::zeros(topology.input_dim, topology.hidden),
            b_hidden: vec![0.0; topology.hidden],
            w_out: Mat::zeros(topology.hidden, topology.output_dim),
            b_out: vec![0.0; topology.output_dim],
        }
    }

    pub fn topology(&self) -> Topology {
        Topology {
            input_dim: self.w_in.rows(),
            hidden: self.w_in.cols(),
            output_dim: self.b_out.len(),
        }
    }

    pub fn w_in(&self) -> &Mat {
        &self.w_in
    }

    pub fn b_hidden(&self) -> &[f64] {
        &self.b_hidden
    }

    pub fn w_out(&self) -> &Mat {
        &self.w_out
    }

    pub fn b_out(&self) -> &[f64] {
        &self.b_out
    }

    /// Inner weight column of neuron `j` (without the bias).
    pub fn inner_column(&self, j: usize) -> Vec<f64> {
        self.w_in.col(j)
    }

    /// Outer weight row of neuron `j`.
    pub fn outer_row(&self, j: usize) -> &[f64] {
        self.w_out.row(j)
    }

    pub fn flatten(&self) -> Vec<f64> {
        let topo = self.topology();
        let mut flat = vec![0.0; topo.param_dim()];
        for j in 0..topo.hidden {
            for i in 0..topo.input_dim {
                flat[topo.flat_index_w_in(i, j)] = self.w_in[(i, j)];
            }
            flat[topo.flat_index_b_hidden(j)] = self.b_hidden[j];
            for l in 0..topo.output_dim {
                flat[topo.flat_index_w_out(j, l)] = self.w_out[(j, l)];
            }
        }
        for l in 0..topo.output_dim {
            flat[topo.flat_index_b_out(l)] = self.b_out[l];
        }
        flat
    }

    pub fn from_flat(topology: &Topology, flat: &[f64]) -> Result<Self> {
        if flat.len() != topology.param_dim() {
            return Err(Error::DimensionMismatch {
                context: "flat parameter vector",
                expected: topology.param_dim(),
                got: flat.len(),
            });
        }
        let (d, m, o) = (topology.input_dim, topology.hidden, topology.output_dim);
        let w_in = Mat::from_fn(d, m, |i, j| flat[topology.flat_index_w_in(i, j)]);
        let b_hidden = (0..m)
            .map(|j| flat[topology.flat_index_b_hidden(j)])
            .collect();
        let w_out = Mat::from_fn(m, o, |j, l| flat[topology.flat_index_w_out(j, l)]);
        let b_out = (0..o)
            .map(|l| flat[topology.flat_index_b_out(l)])
            .collect();
        ParameterVector::new(w_in, b_hidden, w_out, b_out)
    }

    /// Pre-activation `b_hidden[j] + <x, w_in[., j]>` of neuron `j`.
    pub fn pre_activation(&self, j: usize, x: &[f64]) -> f64 {
        let mut z = self.b_hidden[j];
        for i in 0..self.w_in.rows() {
            z += x[i] * self.w_in[(i, j)];
        }
        z
    }
}

/// An activation paired with a parameter vector: the object all landscape
/// operations act on.
#[derive(Clone, Debug)]
pub struct Network {
    pub activation: Activation,
    pub params: ParameterVector,
}

impl Network {
    pub fn new(activation: Activation, params: ParameterVector) -> Self {
        Network { activation, params }
    }

    pub fn topology(&self) -> Topology {
        self.params.topology()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        let topo = self.topology();
        if x.len() != topo.input_dim {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: topo.input_dim,
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    fn require_scalar_output(&self) -> Result<()> {
        let o = self.topology().output_dim;
        if o != 1 {
            return Err(Error::OutputNotScalar(o));
        }
        Ok(())
    }

    /// Full response vector.
    pub fn response(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let topo = self.topology();
        let p = &self.params;
        let mut out = p.b_out().to_vec();
        for j in 0..topo.hidden {
            let h = self.activation.eval(0, p.pre_activation(j, x));
            for l in 0..topo.output_dim {
                out[l] += h * p.w_out[(j, l)];
            }
        }
        Ok(out)
    }

    /// Response of a single-output network.
    pub fn scalar_response(&self, x: &[f64]) -> Result<f64> {
        self.require_scalar_output()?;
        Ok(self.response(x)?[0])
    }

    /// Gradient of the scalar response with respect to the flat parameters.
    ///
    /// Entries: `d/d b_out = 1`; `d/d w_out[j] = psi(z_j)`;
    /// `d/d b_hidden[j] = psi'(z_j) w_out[j]`;
    /// `d/d w_in[i,j] = psi'(z_j) w_out[j] x_i`.
    pub fn grad_response(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_scalar_output()?;
        self.check_input(x)?;
        let topo = self.topology();
        let mut grad = vec![0.0; topo.param_dim()];
        self.grad_response_into(x, &mut grad);
        Ok(grad)
    }

    /// As [`Network::grad_response`] but writing into a caller buffer;
    /// dimension checks are the caller's responsibility.
    pub(crate) fn grad_response_into(&self, x: &[f64], grad: &mut [f64]) {
        let topo = self.topology();
        let p = &self.params;
        grad[topo.flat_index_b_out(0)] = 1.0;
        for j in 0..topo.hidden {
            let z = p.pre_activation(j, x);
            let psi = self.activation.eval(0, z);
            let dpsi = self.activation.eval(1, z);
            let wj = p.w_out[(j, 0)];
            grad[topo.flat_index_w_out(j, 0)] = psi;
            grad[topo.flat_index_b_hidden(j)] = dpsi * wj;
            for i in 0..topo.input_dim {
                grad[topo.flat_index_w_in(i, j)] = dpsi * wj * x[i];
            }
        }
    }

    /// Hessian of the scalar response with respect to the flat parameters.
    ///
    /// Structurally zero: every pair mixing two different hidden neurons, all
    /// pure outer pairs, and inner x output-bias pairs. Those entries are
    /// written as exact `0.0`.
    pub fn hess_response(&self, x: &[f64]) -> Result<Mat> {
        self.require_scalar_output()?;
        self.check_input(x)?;
        let dim = self.topology().param_dim();
        let mut hess = Mat::zeros(dim, dim);
        self.hess_response_accumulate(x, 1.0, &mut hess);
        Ok(hess)
    }

    /// Adds `coeff * hess_response(x)` into `hess`, touching only the
    /// structurally nonzero entries.
    pub(crate) fn hess_response_accumulate(&self, x: &[f64], coeff: f64, hess: &mut Mat) {
        let topo = self.topology();
        let p = &self.params;
        for j in 0..topo.hidden {
            let z = p.pre_activation(j, x);
            let d1 = self.activation.eval(1, z);
            let d2 = self.activation.eval(2, z);
            let wj = p.w_out[(j, 0)];
            let bj = topo.flat_index_b_hidden(j);
            let oj = topo.flat_index_w_out(j, 0);

            // inner x inner within neuron j
            let bb = coeff * d2 * wj;
            hess[(bj, bj)] += bb;
            for i in 0..topo.input_dim {
                let wi = topo.flat_index_w_in(i, j);
                let v = coeff * d2 * wj * x[i];
                hess[(bj, wi)] += v;
                hess[(wi, bj)] += v;
                for k in i..topo.input_dim {
                    let wk = topo.flat_index_w_in(k, j);
                    let vv = coeff * d2 * wj * x[i] * x[k];
                    hess[(wi, wk)] += vv;
                    if k != i {
                        hess[(wk, wi)] += vv;
                    }
                }
            }

            // outer weight x inner, same neuron
            let ob = coeff * d1;
            hess[(oj, bj)] += ob;
            hess[(bj, oj)] += ob;
            for i in 0..topo.input_dim {
                let wi = topo.flat_index_w_in(i, j);
                let v = coeff * d1 * x[i];
                hess[(oj, wi)] += v;
                hess[(wi, oj)] += v;
            }
        }
    }
}
