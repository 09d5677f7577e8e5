//! Response- and criticality-preserving network surgery: pruning redundant
//! neurons, extending networks by controlled redundancies, and the straight
//! parameter lines of constant response through redundant parameters.
//!
//! Pruning folds a dependent neuron into the remaining outer weights: when
//! `psi_k = c0 + sum_{j != k} c_j psi_j` on the atoms, removing neuron `k`
//! and updating `w_out[j] += w_out[k] * c_j`, `b_out += w_out[k] * c0` leaves
//! the response unchanged there. The inverse direction plants a duplication
//! or a disconnected neuron without disturbing criticality.

use crate::cost::{self, EmpiricalMeasure, TargetFunction};
use crate::efficiency::{Lambda, ToleranceConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::net::{Network, ParameterVector, Topology};
use serde::{Deserialize, Serialize};

/// Expression-form coefficients of a pruned neuron:
/// `psi_k ~ constant + sum_{j != k} coeffs[j] * psi_j` on the atoms.
/// `coeffs` is indexed over the network the step was applied to, with the
/// removed neuron's own slot fixed at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldCoefficients {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

/// One replayable pruning step. Neuron indices refer to the network state
/// at the time the step ran, not to the original network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum PruneStep {
    /// Removes neurons with (numerically) zero outer rows.
    Deactivation { neurons: Vec<usize> },
    /// Removes one linearly dependent neuron, folding it into the outer
    /// layer.
    Dependence {
        neuron: usize,
        fold: FoldCoefficients,
        residual: f64,
    },
    /// Removes all bias-redundant neurons at once, shifting output biases by
    /// `sum_j w_out[j] * psi(b_hidden[j])`.
    BiasFold { neurons: Vec<usize> },
}

/// Record of a pruning run; replaying the steps on the original parameter
/// reproduces the pruned parameter exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneTrace {
    pub steps: Vec<PruneStep>,
    pub final_topology: Topology,
}

fn remove_neurons(params: &ParameterVector, remove: &[usize]) -> ParameterVector {
    let topo = params.topology();
    let kept: Vec<usize> = (0..topo.hidden).filter(|j| !remove.contains(j)).collect();
    let w_in = Mat::from_fn(topo.input_dim, kept.len(), |i, c| params.w_in()[(i, kept[c])]);
    let b_hidden = kept.iter().map(|&j| params.b_hidden()[j]).collect();
    let w_out = Mat::from_fn(kept.len(), topo.output_dim, |c, l| {
        params.w_out()[(kept[c], l)]
    });
    ParameterVector::new(w_in, b_hidden, w_out, params.b_out().to_vec())
        .expect("removing neurons preserves validity")
}

fn apply_step(net: &Network, step: &PruneStep) -> Result<Network> {
    let topo = net.topology();
    match step {
        PruneStep::Deactivation { neurons } => {
            if neurons.iter().any(|&j| j >= topo.hidden) {
                return Err(Error::InvalidArgument("deactivation step neuron out of range".into()));
            }
            Ok(Network::new(
                net.activation.clone(),
                remove_neurons(&net.params, neurons),
            ))
        }
        PruneStep::Dependence { neuron, fold, .. } => {
            let k = *neuron;
            if k >= topo.hidden || fold.coeffs.len() != topo.hidden {
                return Err(Error::InvalidArgument("dependence step does not fit network".into()));
            }
            let mut w_out = net.params.w_out().clone();
            let mut b_out = net.params.b_out().to_vec();
            for l in 0..topo.output_dim {
                let w_kl = net.params.w_out()[(k, l)];
                for j in 0..topo.hidden {
                    if j != k {
                        w_out[(j, l)] += w_kl * fold.coeffs[j];
                    }
                }
                b_out[l] += w_kl * fold.constant;
            }
            let updated = ParameterVector::new(
                net.params.w_in().clone(),
                net.params.b_hidden().to_vec(),
                w_out,
                b_out,
            )?;
            Ok(Network::new(
                net.activation.clone(),
                remove_neurons(&updated, &[k]),
            ))
        }
        PruneStep::BiasFold { neurons } => {
            if neurons.iter().any(|&j| j >= topo.hidden) {
                return Err(Error::InvalidArgument("bias step neuron out of range".into()));
            }
            let mut b_out = net.params.b_out().to_vec();
            for &j in neurons {
                let psi = net.activation.eval(0, net.params.b_hidden()[j]);
                for l in 0..topo.output_dim {
                    b_out[l] += net.params.w_out()[(j, l)] * psi;
                }
            }
            let updated = ParameterVector::new(
                net.params.w_in().clone(),
                net.params.b_hidden().to_vec(),
                net.params.w_out().clone(),
                b_out,
            )?;
            Ok(Network::new(
                net.activation.clone(),
                remove_neurons(&updated, neurons),
            ))
        }
    }
}

/// Replays a trace on a network, reproducing the pruned result.
pub fn replay(trace: &PruneTrace, net: &Network) -> Result<Network> {
    let mut current = net.clone();
    for step in &trace.steps {
        current = apply_step(&current, step)?;
    }
    let topo = current.topology();
    if topo != trace.final_topology {
        return Err(Error::PreconditionViolated(format!(
            "replay produced {topo:?}, trace expects {:?}",
            trace.final_topology
        )));
    }
    Ok(current)
}

/// Removes every neuron whose outer row vanishes within `zero_abs`; the
/// removed summands contributed nothing, so the response is untouched on all
/// inputs.
pub fn prune_deactivated(net: &Network, tol: &ToleranceConfig) -> Result<(Network, PruneTrace)> {
    tol.validate()?;
    let topo = net.topology();
    let dead: Vec<usize> = (0..topo.hidden)
        .filter(|&j| linalg::norm(net.params.outer_row(j)) <= tol.zero_abs)
        .collect();
    let mut steps = Vec::new();
    let pruned = if dead.is_empty() {
        net.clone()
    } else {
        let step = PruneStep::Deactivation { neurons: dead };
        let out = apply_step(net, &step)?;
        steps.push(step);
        out
    };
    let final_topology = pruned.topology();
    Ok((pruned, PruneTrace { steps, final_topology }))
}

/// Iteratively removes neurons expressible as affine combinations of the
/// others on the atoms, folding each into the outer layer; interjects
/// deactivation pruning whenever a step reintroduces a dead row. Stops when
/// no candidate fits within the residual threshold `zero_abs * sqrt(N)`.
///
/// The pruning order is deterministic: deactivations first, then the neuron
/// with the smallest removal residual (lowest index on ties).
pub fn prune_linear_dependence(
    net: &Network,
    mu: &EmpiricalMeasure,
    tol: &ToleranceConfig,
) -> Result<(Network, PruneTrace)> {
    tol.validate()?;
    let threshold = tol.zero_abs * (mu.len() as f64).sqrt();
    let mut current = net.clone();
    let mut steps = Vec::new();

    loop {
        // interject deactivation pruning
        let dead: Vec<usize> = (0..current.topology().hidden)
            .filter(|&j| linalg::norm(current.params.outer_row(j)) <= tol.zero_abs)
            .collect();
        if !dead.is_empty() {
            let step = PruneStep::Deactivation { neurons: dead };
            current = apply_step(&current, &step)?;
            steps.push(step);
        }

        let m = current.topology().hidden;
        if m == 0 {
            break;
        }

        // psi columns on the atoms
        let psi_cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                (0..mu.len())
                    .map(|n| {
                        current
                            .activation
                            .eval(0, current.params.pre_activation(j, mu.atom(n)))
                    })
                    .collect()
            })
            .collect();

        // best candidate: smallest least-squares residual of psi_k against
        // the constant and the other neurons, columns normalized
        let mut best: Option<(usize, FoldCoefficients, f64)> = None;
        for k in 0..m {
            let mut columns: Vec<Vec<f64>> = vec![vec![1.0; mu.len()]];
            let mut owners = vec![usize::MAX];
            for (j, col) in psi_cols.iter().enumerate() {
                if j != k {
                    columns.push(col.clone());
                    owners.push(j);
                }
            }
            let mut design = Mat::zeros(mu.len(), columns.len());
            let mut norms = vec![0.0; columns.len()];
            for (c, col) in columns.iter().enumerate() {
                norms[c] = linalg::norm(col).max(1e-300);
                for i in 0..mu.len() {
                    design[(i, c)] = col[i] / norms[c];
                }
            }
            let (coeffs_scaled, residual) = linalg::lstsq(&design, &psi_cols[k], 1e-12)?;
            if residual <= threshold {
                let replace = match &best {
                    None => true,
                    Some((_, _, best_res)) => residual < *best_res,
                };
                if replace {
                    let mut fold = FoldCoefficients {
                        constant: coeffs_scaled[0] / norms[0],
                        coeffs: vec![0.0; m],
                    };
                    for (c, &owner) in owners.iter().enumerate().skip(1) {
                        fold.coeffs[owner] = coeffs_scaled[c] / norms[c];
                    }
                    best = Some((k, fold, residual));
                }
            }
        }

        match best {
            Some((neuron, fold, residual)) => {
                let step = PruneStep::Dependence { neuron, fold, residual };
                current = apply_step(&current, &step)?;
                steps.push(step);
            }
            None => break,
        }
    }

    let final_topology = current.topology();
    Ok((current, PruneTrace { steps, final_topology }))
}

/// Removes all bias-redundant neurons (zero inner column) in a single step,
/// folding `w_out[j] * psi(b_hidden[j])` into the output biases. Errors when
/// any other redundancy kind is present. Identity when there is nothing to
/// fold.
pub fn prune_bias_oneshot(net: &Network, tol: &ToleranceConfig) -> Result<(Network, PruneTrace)> {
    tol.validate()?;
    let topo = net.topology();
    let m = topo.hidden;
    let bias_set: Vec<usize> = (0..m)
        .filter(|&j| linalg::norm(&net.params.inner_column(j)) <= tol.zero_abs)
        .collect();
    for j in 0..m {
        if linalg::norm(net.params.outer_row(j)) <= tol.zero_abs {
            return Err(Error::PreconditionViolated(format!(
                "neuron {j} is deactivated; one-shot bias pruning requires pure bias redundancies"
            )));
        }
    }
    // pair scan among the neurons that keep their inputs
    for i in 0..m {
        if bias_set.contains(&i) {
            continue;
        }
        for j in (i + 1)..m {
            if bias_set.contains(&j) {
                continue;
            }
            let mut p_i = net.params.inner_column(i);
            p_i.push(net.params.b_hidden()[i]);
            let mut p_j = net.params.inner_column(j);
            p_j.push(net.params.b_hidden()[j]);
            let scale = linalg::norm(&p_i).max(linalg::norm(&p_j));
            let diff = linalg::norm(&linalg::sub(&p_i, &p_j));
            let sum_vec: Vec<f64> = p_i.iter().zip(&p_j).map(|(a, b)| a + b).collect();
            let matched = diff <= tol.pair_rel * scale
                || (net.activation.sign_symmetry().is_some()
                    && linalg::norm(&sum_vec) <= tol.pair_rel * scale);
            if matched {
                return Err(Error::PreconditionViolated(format!(
                    "neurons {i} and {j} form a pair redundancy; one-shot bias pruning requires pure bias redundancies"
                )));
            }
        }
    }
    let mut steps = Vec::new();
    let pruned = if bias_set.is_empty() {
        net.clone()
    } else {
        let step = PruneStep::BiasFold { neurons: bias_set };
        let out = apply_step(net, &step)?;
        steps.push(step);
        out
    };
    let final_topology = pruned.topology();
    Ok((pruned, PruneTrace { steps, final_topology }))
}

/// Appends a copy of `source` whose outer weights are split
/// `(lambda_mix, 1 - lambda_mix)` between the copy and the original; the
/// response is unchanged and critical points stay critical.
pub fn extend_duplicate(net: &Network, source: usize, lambda_mix: f64) -> Result<Network> {
    let topo = net.topology();
    if source >= topo.hidden {
        return Err(Error::InvalidArgument(format!(
            "source neuron {source} out of range for {} hidden neurons",
            topo.hidden
        )));
    }
    if !lambda_mix.is_finite() || lambda_mix == 0.0 || lambda_mix == 1.0 {
        return Err(Error::InvalidArgument(
            "lambda_mix must be finite and different from 0 and 1".into(),
        ));
    }
    let (d, m, o) = (topo.input_dim, topo.hidden, topo.output_dim);
    let w_in = Mat::from_fn(d, m + 1, |i, j| {
        if j < m {
            net.params.w_in()[(i, j)]
        } else {
            net.params.w_in()[(i, source)]
        }
    });
    let mut b_hidden = net.params.b_hidden().to_vec();
    b_hidden.push(net.params.b_hidden()[source]);
    let w_out = Mat::from_fn(m + 1, o, |j, l| {
        if j == source {
            (1.0 - lambda_mix) * net.params.w_out()[(source, l)]
        } else if j < m {
            net.params.w_out()[(j, l)]
        } else {
            lambda_mix * net.params.w_out()[(source, l)]
        }
    });
    let params = ParameterVector::new(w_in, b_hidden, w_out, net.params.b_out().to_vec())?;
    Ok(Network::new(net.activation.clone(), params))
}

/// Appends a fully disconnected neuron (zero inner column, zero outer row)
/// with the given bias; the response is unchanged everywhere and a critical
/// parameter stays critical.
pub fn extend_deactivated_bias(net: &Network, beta_new: f64) -> Result<Network> {
    if !beta_new.is_finite() {
        return Err(Error::NonFinite("new hidden bias"));
    }
    let topo = net.topology();
    let (d, m, o) = (topo.input_dim, topo.hidden, topo.output_dim);
    let w_in = Mat::from_fn(d, m + 1, |i, j| {
        if j < m {
            net.params.w_in()[(i, j)]
        } else {
            0.0
        }
    });
    let mut b_hidden = net.params.b_hidden().to_vec();
    b_hidden.push(beta_new);
    let w_out = Mat::from_fn(m + 1, o, |j, l| {
        if j < m {
            net.params.w_out()[(j, l)]
        } else {
            0.0
        }
    });
    let params = ParameterVector::new(w_in, b_hidden, w_out, net.params.b_out().to_vec())?;
    Ok(Network::new(net.activation.clone(), params))
}

/// Direction of a constant-response line through a redundant parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineKind {
    /// Outer layer moves along a dependency: `w_out[j][l] += t * lambda_j`,
    /// `b_out[l] += t * lambda_constant`, inner parameters fixed.
    OuterShift { lambda: Lambda },
    /// A disconnected neuron's inner parameters are free; the canonical
    /// reported direction is its bias coordinate.
    DeactivatedBias { neuron: usize },
}

/// Straight line `theta(t)` of constant response through a redundant base
/// parameter.
#[derive(Clone, Debug)]
pub struct RedundancyLine {
    pub base: Network,
    pub kind: LineKind,
}

impl RedundancyLine {
    /// Parameter at line position `t`; `at(0)` is the base.
    pub fn at(&self, t: f64) -> Result<Network> {
        let topo = self.base.topology();
        match &self.kind {
            LineKind::OuterShift { lambda } => {
                let mut w_out = self.base.params.w_out().clone();
                let mut b_out = self.base.params.b_out().to_vec();
                for j in 0..topo.hidden {
                    for l in 0..topo.output_dim {
                        w_out[(j, l)] += t * lambda.coeffs[j];
                    }
                }
                for v in &mut b_out {
                    *v += t * lambda.constant;
                }
                let params = ParameterVector::new(
                    self.base.params.w_in().clone(),
                    self.base.params.b_hidden().to_vec(),
                    w_out,
                    b_out,
                )?;
                Ok(Network::new(self.base.activation.clone(), params))
            }
            LineKind::DeactivatedBias { neuron } => {
                let mut b_hidden = self.base.params.b_hidden().to_vec();
                b_hidden[*neuron] += t;
                let params = ParameterVector::new(
                    self.base.params.w_in().clone(),
                    b_hidden,
                    self.base.params.w_out().clone(),
                    self.base.params.b_out().to_vec(),
                )?;
                Ok(Network::new(self.base.activation.clone(), params))
            }
        }
    }

    /// The flat direction vector `d theta / d t`.
    pub fn direction(&self) -> Vec<f64> {
        let topo = self.base.topology();
        let mut dir = vec![0.0; topo.param_dim()];
        match &self.kind {
            LineKind::OuterShift { lambda } => {
                for j in 0..topo.hidden {
                    for l in 0..topo.output_dim {
                        dir[topo.flat_index_w_out(j, l)] = lambda.coeffs[j];
                    }
                }
                for l in 0..topo.output_dim {
                    dir[topo.flat_index_b_out(l)] = lambda.constant;
                }
            }
            LineKind::DeactivatedBias { neuron } => {
                dir[topo.flat_index_b_hidden(*neuron)] = 1.0;
            }
        }
        dir
    }
}

/// Builds the constant-response line for a dependency `lambda`, after
/// validating the dependency residual on the atoms against
/// `zero_abs * sqrt(N)`.
pub fn redundancy_line(
    net: &Network,
    lambda: Lambda,
    mu: &EmpiricalMeasure,
    tol: &ToleranceConfig,
) -> Result<RedundancyLine> {
    tol.validate()?;
    if lambda.is_zero() {
        return Err(Error::InvalidArgument(
            "line direction must be nonzero".into(),
        ));
    }
    let residual = lambda.residual_on_atoms(net, mu)?;
    let threshold = tol.zero_abs * (mu.len() as f64).sqrt();
    if residual > threshold {
        return Err(Error::PreconditionViolated(format!(
            "dependency residual {residual:.3e} exceeds threshold {threshold:.3e}"
        )));
    }
    Ok(RedundancyLine {
        base: net.clone(),
        kind: LineKind::OuterShift { lambda },
    })
}

/// Constant-response line through a deactivation redundancy: the reported
/// direction varies the disconnected neuron's bias.
pub fn deactivation_line(
    net: &Network,
    neuron: usize,
    tol: &ToleranceConfig,
) -> Result<RedundancyLine> {
    tol.validate()?;
    let topo = net.topology();
    if neuron >= topo.hidden {
        return Err(Error::InvalidArgument(format!(
            "neuron {neuron} out of range for {} hidden neurons",
            topo.hidden
        )));
    }
    let row_norm = linalg::norm(net.params.outer_row(neuron));
    if row_norm > tol.zero_abs {
        return Err(Error::PreconditionViolated(format!(
            "neuron {neuron} is not deactivated: outer row norm {row_norm:.3e}"
        )));
    }
    Ok(RedundancyLine {
        base: net.clone(),
        kind: LineKind::DeactivatedBias { neuron },
    })
}

/// Largest response deviation `max_t max_atom |Psi_line(t) - Psi_base|` over
/// a grid of line positions.
pub fn line_response_check(
    line: &RedundancyLine,
    mu: &EmpiricalMeasure,
    t_grid: &[f64],
) -> Result<f64> {
    let mut max_dev = 0.0_f64;
    let base_responses: Vec<Vec<f64>> = (0..mu.len())
        .map(|n| line.base.response(mu.atom(n)))
        .collect::<Result<_>>()?;
    for &t in t_grid {
        let net_t = line.at(t)?;
        for n in 0..mu.len() {
            let y = net_t.response(mu.atom(n))?;
            for (a, b) in y.iter().zip(&base_responses[n]) {
                max_dev = max_dev.max((a - b).abs());
            }
        }
    }
    Ok(max_dev)
}

/// Affine fit of one inner partial derivative along the line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineFit {
    /// Flat parameter index of the partial.
    pub param_index: usize,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LineVerdict {
    /// Every point of the line is critical.
    AllCritical,
    /// Exactly one candidate critical position exists.
    AtMostOne { t: f64 },
    /// No point of the line is critical.
    None,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineCriticality {
    pub inner_fits: Vec<AffineFit>,
    /// Largest drift of an outer partial across the collocation points;
    /// outer partials are constant along the line.
    pub outer_drift: f64,
    /// Largest relative misfit of the affine model at the validation point.
    pub max_affinity_residual: f64,
    pub verdict: LineVerdict,
}

/// Collocation points of the affinity check: three determine the affine fit,
/// the fourth validates it.
const COLLOCATION: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];

/// Along a constant-response line the inner partials of the unregularized
/// squared-error cost are affine in `t` and the outer partials are constant.
/// Fits each inner partial, validates affinity, and classifies the line:
/// all points critical, at most one, or none.
pub fn criticality_along_line(
    line: &RedundancyLine,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
) -> Result<LineCriticality> {
    let topo = line.base.topology();
    let grads: Vec<Vec<f64>> = COLLOCATION
        .iter()
        .map(|&t| cost::grad_cost_multi(&line.at(t)?, mu, f))
        .collect::<Result<_>>()?;

    let scale = grads
        .iter()
        .flat_map(|g| g.iter())
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));

    let mut inner_indices = Vec::new();
    for j in 0..topo.hidden {
        inner_indices.push(topo.flat_index_b_hidden(j));
        for i in 0..topo.input_dim {
            inner_indices.push(topo.flat_index_w_in(i, j));
        }
    }
    let mut outer_indices = Vec::new();
    for j in 0..topo.hidden {
        for l in 0..topo.output_dim {
            outer_indices.push(topo.flat_index_w_out(j, l));
        }
    }
    for l in 0..topo.output_dim {
        outer_indices.push(topo.flat_index_b_out(l));
    }

    let mut outer_drift = 0.0_f64;
    for &p in &outer_indices {
        for g in &grads[1..] {
            outer_drift = outer_drift.max((g[p] - grads[0][p]).abs());
        }
    }

    let mut fits = Vec::with_capacity(inner_indices.len());
    let mut max_residual = 0.0_f64;
    for &p in &inner_indices {
        // affine through t = -1, 0, 1; validate at t = 2
        let slope = (grads[2][p] - grads[0][p]) / 2.0;
        let intercept = grads[1][p];
        let predicted = intercept + 2.0 * slope;
        max_residual = max_residual.max((grads[3][p] - predicted).abs() / scale);
        fits.push(AffineFit {
            param_index: p,
            slope,
            intercept,
        });
    }
    if max_residual > 1e-9 {
        return Err(Error::PreconditionViolated(format!(
            "inner partials are not affine along the line (relative residual {max_residual:.3e}); \
             the line does not preserve the response"
        )));
    }

    let zero_tol = 1e-9 * scale;
    let outer_critical = outer_indices.iter().all(|&p| grads[1][p].abs() <= zero_tol);
    let verdict = if !outer_critical {
        LineVerdict::None
    } else {
        let mut roots: Vec<f64> = Vec::new();
        let mut impossible = false;
        let mut all_zero = true;
        for fit in &fits {
            if fit.slope.abs() <= zero_tol {
                if fit.intercept.abs() > zero_tol {
                    impossible = true;
                }
            } else {
                all_zero = false;
                roots.push(-fit.intercept / fit.slope);
            }
        }
        if impossible {
            LineVerdict::None
        } else if all_zero && roots.is_empty() {
            LineVerdict::AllCritical
        } else {
            let first = roots[0];
            if roots
                .iter()
                .all(|&r| (r - first).abs() <= 1e-6 * (1.0 + first.abs()))
            {
                LineVerdict::AtMostOne { t: first }
            } else {
                LineVerdict::None
            }
        }
    };

    Ok(LineCriticality {
        inner_fits: fits,
        outer_drift,
        max_affinity_residual: max_residual,
        verdict,
    })
}

/// First-moment residual vector `(sum_n w_n (Psi(x_n) - f_n) x_{n,i})_i`.
///
/// A bias-redundant extension of a critical parameter is itself critical
/// exactly when this vector vanishes.
pub fn bias_critical_condition(
    net: &Network,
    mu: &EmpiricalMeasure,
    f: &TargetFunction,
) -> Result<Vec<f64>> {
    let d = net.topology().input_dim;
    let mut v = vec![0.0; d];
    for n in 0..mu.len() {
        let residual = net.scalar_response(mu.atom(n))? - f.scalar(n);
        let w = mu.weight(n);
        for i in 0..d {
            v[i] += w * residual * mu.atom(n)[i];
        }
    }
    Ok(v)
}

/// Largest response difference between two networks over the atoms.
pub fn response_sup_diff(a: &Network, b: &Network, mu: &EmpiricalMeasure) -> Result<f64> {
    let o = a.topology().output_dim;
    if b.topology().output_dim != o || b.topology().input_dim != a.topology().input_dim {
        return Err(Error::DimensionMismatch {
            context: "network shapes in response comparison",
            expected: o,
            got: b.topology().output_dim,
        });
    }
    let mut max_diff = 0.0_f64;
    for n in 0..mu.len() {
        let ya = a.response(mu.atom(n))?;
        let yb = b.response(mu.atom(n))?;
        for (p, q) in ya.iter().zip(&yb) {
            max_diff = max_diff.max((p - q).abs());
        }
    }
    Ok(max_diff)
}
