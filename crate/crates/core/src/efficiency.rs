//! Membership tests for the explicit efficient domain, the redundancy
//! taxonomy with numeric witnesses, rank-based polynomial-efficiency probes,
//! and the Taylor-coefficient admissibility check for activations.
//!
//! A parameter is redundant when its response can be produced by a smaller
//! network. The explicit efficient domain for sigmoid/tanh requires nonzero
//! outer rows, nonzero inner columns, and no `±`-equal pairs of
//! `(inner column, hidden bias)`. The taxonomy attributes each redundancy
//! once: deactivation, bias, duplication, sign-symmetric, and a residual
//! `generalized` class detected by a rank probe over the neuron outputs on
//! the atoms.

use crate::cost::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::net::{Activation, Network};
use crate::polyslice::multi_indices_up_to;
use serde::{Deserialize, Serialize};

/// Thresholds for the zero, pair, and rank decisions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Absolute threshold below which a weight-vector norm counts as zero.
    pub zero_abs: f64,
    /// Pair separation threshold, relative to the larger neuron norm.
    pub pair_rel: f64,
    /// Singular values below `rank_rel` times the largest count as zero.
    pub rank_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            zero_abs: 1e-9,
            pair_rel: 1e-9,
            rank_rel: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zero_abs", self.zero_abs),
            ("pair_rel", self.pair_rel),
            ("rank_rel", self.rank_rel),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedundancyKind {
    Deactivation,
    Bias,
    Duplication,
    SignSymmetric,
    Generalized,
}

/// Dependency coefficients in the homogeneous form
/// `constant + sum_j coeffs[j] * psi_j = 0` on the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl Lambda {
    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Residual `||constant + sum_j coeffs[j] psi_j||` over the atoms
    /// (unweighted Euclidean norm, matching the least-squares extraction).
    pub fn residual_on_atoms(&self, net: &Network, mu: &EmpiricalMeasure) -> Result<f64> {
        let topo = net.topology();
        if self.coeffs.len() != topo.hidden {
            return Err(Error::DimensionMismatch {
                context: "lambda coefficients",
                expected: topo.hidden,
                got: self.coeffs.len(),
            });
        }
        let mut sq = 0.0;
        for n in 0..mu.len() {
            let x = mu.atom(n);
            let mut v = self.constant;
            for j in 0..topo.hidden {
                v += self.coeffs[j] * net.activation.eval(0, net.params.pre_activation(j, x));
            }
            sq += v * v;
        }
        Ok(sq.sqrt())
    }
}

/// One attributed redundancy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Finding {
    pub kind: RedundancyKind,
    pub neurons: Vec<usize>,
    /// Dependency witness for every kind except deactivation.
    pub lambda: Option<Lambda>,
    /// Offending magnitude: the vanishing norm for deactivation/bias, the
    /// pair separation for pairs, the rank-probe residual for generalized.
    pub magnitude: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub efficient: bool,
    pub findings: Vec<Finding>,
}

/// One violated constraint of the explicit efficient domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum E0Violation {
    OuterRowZero {
        neuron: usize,
        norm: f64,
    },
    InnerColumnZero {
        neuron: usize,
        norm: f64,
    },
    PairMatch {
        first: usize,
        second: usize,
        negated: bool,
        separation: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct E0Report {
    pub member: bool,
    pub violations: Vec<E0Violation>,
    /// Relative distance to the nearest constraint boundary; infinite when
    /// there is no hidden neuron.
    pub margin: f64,
}

/// Neuron pair vector `(inner column, hidden bias)`.
fn neuron_profile(net: &Network, j: usize) -> Vec<f64> {
    let mut p = net.params.inner_column(j);
    p.push(net.params.b_hidden()[j]);
    p
}

/// Relative margin of a parameter to the boundary of the explicit efficient
/// domain: the smallest of the scaled outer-row norms, inner-column norms,
/// and pair separations `min(||p_i - p_j||, ||p_i + p_j||)`.
pub fn e0_margin(net: &Network) -> f64 {
    let topo = net.topology();
    let m = topo.hidden;
    if m == 0 {
        return f64::INFINITY;
    }
    let tiny = 1e-300;
    let profiles: Vec<Vec<f64>> = (0..m).map(|j| neuron_profile(net, j)).collect();
    let out_scale = (0..m)
        .map(|j| linalg::norm(net.params.outer_row(j)))
        .fold(0.0_f64, f64::max)
        .max(tiny);
    let profile_scale = profiles
        .iter()
        .map(|p| linalg::norm(p))
        .fold(0.0_f64, f64::max)
        .max(tiny);
    let mut margin = f64::INFINITY;
    for j in 0..m {
        margin = margin.min(linalg::norm(net.params.outer_row(j)) / out_scale);
        margin = margin.min(linalg::norm(&net.params.inner_column(j)) / profile_scale);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let scale = linalg::norm(&profiles[i])
                .max(linalg::norm(&profiles[j]))
                .max(tiny);
            let diff = linalg::norm(&linalg::sub(&profiles[i], &profiles[j]));
            let sum_vec: Vec<f64> = profiles[i]
                .iter()
                .zip(&profiles[j])
                .map(|(a, b)| a + b)
                .collect();
            let sum = linalg::norm(&sum_vec);
            margin = margin.min(diff.min(sum) / scale);
        }
    }
    margin
}

/// Membership test for the explicit efficient domain, with the violated
/// constraints listed.
pub fn in_e0(net: &Network, tol: &ToleranceConfig) -> Result<E0Report> {
    tol.validate()?;
    let topo = net.topology();
    let m = topo.hidden;
    let mut violations = Vec::new();
    for j in 0..m {
        let row_norm = linalg::norm(net.params.outer_row(j));
        if row_norm <= tol.zero_abs {
            violations.push(E0Violation::OuterRowZero {
                neuron: j,
                norm: row_norm,
            });
        }
        let col_norm = linalg::norm(&net.params.inner_column(j));
        if col_norm <= tol.zero_abs {
            violations.push(E0Violation::InnerColumnZero {
                neuron: j,
                norm: col_norm,
            });
        }
    }
    let profiles: Vec<Vec<f64>> = (0..m).map(|j| neuron_profile(net, j)).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let scale = linalg::norm(&profiles[i]).max(linalg::norm(&profiles[j]));
            let diff = linalg::norm(&linalg::sub(&profiles[i], &profiles[j]));
            let sum_vec: Vec<f64> = profiles[i]
                .iter()
                .zip(&profiles[j])
                .map(|(a, b)| a + b)
                .collect();
            let sum = linalg::norm(&sum_vec);
            if diff <= tol.pair_rel * scale {
                violations.push(E0Violation::PairMatch {
                    first: i,
                    second: j,
                    negated: false,
                    separation: diff,
                });
            } else if sum <= tol.pair_rel * scale {
                violations.push(E0Violation::PairMatch {
                    first: i,
                    second: j,
                    negated: true,
                    separation: sum,
                });
            }
        }
    }
    Ok(E0Report {
        member: violations.is_empty(),
        violations,
        margin: e0_margin(net),
    })
}

/// Matrix with one column per dictionary function, evaluated at the atoms and
/// normalized to unit Euclidean column norm. Returns the normalization
/// factors alongside.
fn normalized_dictionary(columns: Vec<Vec<f64>>) -> (Mat, Vec<f64>) {
    let n = columns.first().map_or(0, |c| c.len());
    let mut mat = Mat::zeros(n, columns.len());
    let mut norms = Vec::with_capacity(columns.len());
    for (c, col) in columns.iter().enumerate() {
        let norm = linalg::norm(col);
        norms.push(norm);
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for i in 0..n {
            mat[(i, c)] = col[i] * scale;
        }
    }
    (mat, norms)
}

/// Classifies every redundancy of the parameter on the atoms, attributing
/// each one once.
pub fn taxonomy(
    net: &Network,
    mu: &EmpiricalMeasure,
    tol: &ToleranceConfig,
) -> Result<RedundancyReport> {
    tol.validate()?;
    if mu.distinct_atoms() < 2 {
        return Err(Error::InsufficientAtoms {
            needed: 2,
            got: mu.distinct_atoms(),
        });
    }
    let topo = net.topology();
    let m = topo.hidden;
    let mut findings = Vec::new();

    for j in 0..m {
        let row_norm = linalg::norm(net.params.outer_row(j));
        if row_norm <= tol.zero_abs {
            findings.push(Finding {
                kind: RedundancyKind::Deactivation,
                neurons: vec![j],
                lambda: None,
                magnitude: row_norm,
            });
        }
    }

    let mut bias_flagged = vec![false; m];
    for j in 0..m {
        let col_norm = linalg::norm(&net.params.inner_column(j));
        if col_norm <= tol.zero_abs {
            bias_flagged[j] = true;
            // psi_j is the constant psi(beta_j): trade it against the bias
            let mut coeffs = vec![0.0; m];
            coeffs[j] = 1.0;
            findings.push(Finding {
                kind: RedundancyKind::Bias,
                neurons: vec![j],
                lambda: Some(Lambda {
                    constant: -net.activation.eval(0, net.params.b_hidden()[j]),
                    coeffs,
                }),
                magnitude: col_norm,
            });
        }
    }

    // Pair scans over neurons not already explained by a bias finding; the
    // second member of a matched pair drops out of later scans so each
    // redundancy is attributed once.
    let mut dropped = bias_flagged.clone();
    let profiles: Vec<Vec<f64>> = (0..m).map(|j| neuron_profile(net, j)).collect();
    let sign_rule = net.activation.sign_symmetry();
    for i in 0..m {
        if dropped[i] {
            continue;
        }
        for j in (i + 1)..m {
            if dropped[j] {
                continue;
            }
            let scale = linalg::norm(&profiles[i]).max(linalg::norm(&profiles[j]));
            let diff = linalg::norm(&linalg::sub(&profiles[i], &profiles[j]));
            if diff <= tol.pair_rel * scale {
                let mut coeffs = vec![0.0; m];
                coeffs[i] = 1.0;
                coeffs[j] = -1.0;
                findings.push(Finding {
                    kind: RedundancyKind::Duplication,
                    neurons: vec![i, j],
                    lambda: Some(Lambda {
                        constant: 0.0,
                        coeffs,
                    }),
                    magnitude: diff,
                });
                dropped[j] = true;
                continue;
            }
            if let Some(rule) = sign_rule {
                let sum_vec: Vec<f64> = profiles[i]
                    .iter()
                    .zip(&profiles[j])
                    .map(|(a, b)| a + b)
                    .collect();
                let sum = linalg::norm(&sum_vec);
                if sum <= tol.pair_rel * scale {
                    // psi_i = offset + slope * psi_j on the atoms, so
                    // -offset + psi_i - slope * psi_j = 0
                    let mut coeffs = vec![0.0; m];
                    coeffs[i] = 1.0;
                    coeffs[j] = -rule.slope;
                    findings.push(Finding {
                        kind: RedundancyKind::SignSymmetric,
                        neurons: vec![i, j],
                        lambda: Some(Lambda {
                            constant: -rule.offset,
                            coeffs,
                        }),
                        magnitude: sum,
                    });
                    dropped[j] = true;
                }
            }
        }
    }

    // Residual rank probe: the constant plus the surviving neuron outputs.
    let survivors: Vec<usize> = (0..m).filter(|&j| !dropped[j]).collect();
    let columns_needed = survivors.len() + 1;
    if mu.len() < columns_needed {
        return Err(Error::InsufficientAtoms {
            needed: columns_needed,
            got: mu.len(),
        });
    }
    if !survivors.is_empty() {
        let mut columns = vec![vec![1.0; mu.len()]];
        for &j in &survivors {
            let col: Vec<f64> = (0..mu.len())
                .map(|n| {
                    net.activation
                        .eval(0, net.params.pre_activation(j, mu.atom(n)))
                })
                .collect();
            columns.push(col);
        }
        let (dict, norms) = normalized_dictionary(columns);
        let decomp = linalg::svd(&dict)?;
        let sigma_max = decomp.sigma.first().copied().unwrap_or(0.0);
        let deficient = decomp
            .sigma
            .last()
            .is_some_and(|&s| s < tol.rank_rel * sigma_max);
        if deficient {
            let raw_null = decomp.v.col(dict.cols() - 1);
            // undo the column normalization to recover coefficients of the
            // raw dictionary functions
            let mut lambda_raw: Vec<f64> = raw_null
                .iter()
                .zip(&norms)
                .map(|(v, &n)| if n > 0.0 { v / n } else { 0.0 })
                .collect();
            let max_abs = lambda_raw.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if max_abs > 0.0 {
                for v in &mut lambda_raw {
                    *v /= max_abs;
                }
            }
            let mut coeffs = vec![0.0; m];
            let mut involved = Vec::new();
            for (pos, &j) in survivors.iter().enumerate() {
                let c = lambda_raw[pos + 1];
                coeffs[j] = c;
                if c.abs() > 1e-6 {
                    involved.push(j);
                }
            }
            let lambda = Lambda {
                constant: lambda_raw[0],
                coeffs,
            };
            let magnitude = lambda.residual_on_atoms(net, mu)?;
            findings.push(Finding {
                kind: RedundancyKind::Generalized,
                neurons: involved,
                lambda: Some(lambda),
                magnitude,
            });
        }
    }

    Ok(RedundancyReport {
        efficient: findings.is_empty(),
        findings,
    })
}

/// Relative margin of atom-level efficiency: how far the neuron outputs are,
/// as functions on the atoms, from satisfying a linear dependency with the
/// constant.
///
/// Two effects bound it: the per-atom RMS of each neuron column relative to
/// the largest column (a neuron vanishing on the atoms is a dependency by
/// itself), and the smallest relative singular value of the column-normalized
/// dictionary `{1} u {psi_j}`. Curvature along a near-dependency direction
/// scales like the squared margin, so a margin of `tau` protects Hessian
/// nondegeneracy at about `tau^2`.
pub fn atom_efficiency_margin(net: &Network, mu: &EmpiricalMeasure) -> Result<f64> {
    let topo = net.topology();
    let m = topo.hidden;
    if m == 0 {
        return Ok(f64::INFINITY);
    }
    let n = mu.len();
    let mut columns = vec![vec![1.0; n]];
    for j in 0..m {
        columns.push(
            (0..n)
                .map(|a| net.activation.eval(0, net.params.pre_activation(j, mu.atom(a))))
                .collect(),
        );
    }
    let rms: Vec<f64> = columns
        .iter()
        .map(|c| linalg::norm(c) / (n as f64).sqrt())
        .collect();
    let scale = rms.iter().fold(0.0_f64, |a, &v| a.max(v)).max(1e-300);
    let zero_margin = rms.iter().fold(f64::INFINITY, |a, &v| a.min(v / scale));
    let (dict, _) = normalized_dictionary(columns);
    let decomp = linalg::svd(&dict)?;
    let sigma_max = decomp.sigma.first().copied().unwrap_or(0.0).max(1e-300);
    let dep_margin = decomp.sigma.last().copied().unwrap_or(0.0) / sigma_max;
    Ok(zero_margin.min(dep_margin))
}

/// Degree pattern `(m_empty, m_0, ..., m_n)` of a polynomial-independence
/// test: the free polynomial has degree at most `m_empty` and the factor in
/// front of the `k`-th activation derivative has degree at most `m_k`.
///
/// Which patterns pin down the efficient set depends on the activation, so
/// the pattern is always an explicit argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyPattern {
    pub constant_degree: usize,
    pub derivative_degrees: Vec<usize>,
}

impl PolyPattern {
    pub fn new(constant_degree: usize, derivative_degrees: Vec<usize>) -> Result<Self> {
        if derivative_degrees.is_empty() {
            return Err(Error::InvalidArgument(
                "pattern needs at least the degree for the 0th derivative".into(),
            ));
        }
        if derivative_degrees.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "pattern uses activation derivatives up to order {}, supported maximum is 2",
                derivative_degrees.len() - 1
            )));
        }
        Ok(PolyPattern {
            constant_degree,
            derivative_degrees,
        })
    }

    /// Parses "0,0,1,2" as `m_empty = 0`, `(m_0, m_1, m_2) = (0, 1, 2)`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<usize>, _> =
            text.split(',').map(|p| p.trim().parse::<usize>()).collect();
        let parts =
            parts.map_err(|e| Error::InvalidArgument(format!("cannot parse pattern `{text}`: {e}")))?;
        if parts.len() < 2 {
            return Err(Error::InvalidArgument(
                "pattern needs at least two entries (m_empty, m_0)".into(),
            ));
        }
        PolyPattern::new(parts[0], parts[1..].to_vec())
    }

    /// Highest activation derivative order the pattern touches.
    pub fn max_derivative_order(&self) -> usize {
        self.derivative_degrees.len() - 1
    }

    /// Number of dictionary columns for a network with `hidden` neurons on
    /// `input_dim` inputs.
    pub fn column_count(&self, input_dim: usize, hidden: usize) -> usize {
        let count = |deg: usize| multi_indices_up_to(input_dim, deg).len();
        count(self.constant_degree)
            + hidden
                * self
                    .derivative_degrees
                    .iter()
                    .map(|&deg| count(deg))
                    .sum::<usize>()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankReport {
    pub full_rank: bool,
    /// Singular values of the column-normalized design matrix, descending.
    pub singular_values: Vec<f64>,
    pub columns: usize,
}

/// Numeric polynomial-independence test on the atoms: builds the design
/// matrix whose columns are monomials up to degree `m_empty` and, for each
/// neuron `j` and derivative order `k`, monomials up to degree `m_k` times
/// `psi^(k)(z_j)`. Full column rank means no nontrivial polynomial
/// combination vanishes on the atom set.
///
/// Deficiency implies dependence on the atoms; the converse direction is
/// probabilistic in the atom draw.
pub fn poly_efficiency_rank(
    net: &Network,
    mu: &EmpiricalMeasure,
    pattern: &PolyPattern,
    tol: &ToleranceConfig,
) -> Result<RankReport> {
    tol.validate()?;
    let topo = net.topology();
    let d = topo.input_dim;
    if mu.input_dim() != d {
        return Err(Error::DimensionMismatch {
            context: "atoms vs network input",
            expected: d,
            got: mu.input_dim(),
        });
    }
    let needed = pattern.column_count(d, topo.hidden);
    if mu.len() < needed {
        return Err(Error::InsufficientAtoms {
            needed,
            got: mu.len(),
        });
    }

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(needed);
    for r in multi_indices_up_to(d, pattern.constant_degree) {
        columns.push((0..mu.len()).map(|n| r.eval(mu.atom(n))).collect());
    }
    for j in 0..topo.hidden {
        let pre: Vec<f64> = (0..mu.len())
            .map(|n| net.params.pre_activation(j, mu.atom(n)))
            .collect();
        for (k, &deg) in pattern.derivative_degrees.iter().enumerate() {
            let derivative: Vec<f64> = pre.iter().map(|&z| net.activation.eval(k, z)).collect();
            for r in multi_indices_up_to(d, deg) {
                columns.push(
                    (0..mu.len())
                        .map(|n| r.eval(mu.atom(n)) * derivative[n])
                        .collect(),
                );
            }
        }
    }

    let (dict, _) = normalized_dictionary(columns);
    let decomp = linalg::svd(&dict)?;
    let rank = linalg::rank_from_singular_values(&decomp.sigma, tol.rank_rel);
    Ok(RankReport {
        full_rank: rank == dict.cols(),
        singular_values: decomp.sigma,
        columns: dict.cols(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub rank: usize,
    pub full: bool,
    pub truncation: usize,
}

/// Relative singular value cutoff for the admissibility rank; the observed
/// gaps at K = 12 sit many orders away on either side.
const ADMISSIBILITY_RANK_REL: f64 = 1e-8;

/// Taylor-coefficient rank check for the `(deg 0, deg 1, deg 2)` polynomial
/// pattern: builds the rows
/// `(a_k, (k+1)a_{k+1}, k a_k, (k+2)(k+1)a_{k+2}, (k+1)k a_{k+1}, k(k-1)a_k)`
/// for `k = 0..=K` and reports their rank. Rank 6 means only the trivial
/// polynomial combination of `psi, psi', psi''` with degrees `(0, 1, 2)`
/// vanishes as a power series.
pub fn activation_admissibility(
    act: &Activation,
    truncation: usize,
) -> Result<AdmissibilityReport> {
    if truncation < 6 {
        return Err(Error::InvalidArgument(format!(
            "truncation must be at least 6, got {truncation}"
        )));
    }
    let a = act.taylor_coeffs(truncation + 2)?;
    let rows: Vec<Vec<f64>> = (0..=truncation)
        .map(|k| {
            let kf = k as f64;
            vec![
                a[k],
                (kf + 1.0) * a[k + 1],
                kf * a[k],
                (kf + 2.0) * (kf + 1.0) * a[k + 2],
                (kf + 1.0) * kf * a[k + 1],
                kf * (kf - 1.0) * a[k],
            ]
        })
        .collect();
    let mut mat = Mat::from_rows(&rows)?;
    for i in 0..mat.rows() {
        let norm = linalg::norm(mat.row(i));
        if norm > 0.0 {
            for v in mat.row_mut(i) {
                *v /= norm;
            }
        }
    }
    let decomp = linalg::svd(&mat)?;
    let rank = linalg::rank_from_singular_values(&decomp.sigma, ADMISSIBILITY_RANK_REL);
    Ok(AdmissibilityReport {
        rank,
        full: rank == 6,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{ParameterVector, Topology};
    use crate::rng::Rng;

    fn net_from_flat(topo: &Topology, act: Activation, flat: &[f64]) -> Network {
        Network::new(act, ParameterVector::from_flat(topo, flat).unwrap())
    }

    fn random_net(topo: &Topology, act: Activation, rng: &mut Rng) -> Network {
        let flat = rng.normal_vec(topo.param_dim());
        Network::new(act, ParameterVector::from_flat(topo, &flat).unwrap())
    }

    fn random_measure(n: usize, d: usize, rng: &mut Rng) -> EmpiricalMeasure {
        let atoms = Mat::from_fn(n, d, |_, _| rng.next_normal());
        EmpiricalMeasure::uniform(atoms).unwrap()
    }

    /// theta with neuron 1 made the exact negative of neuron 0.
    fn sign_pair_net(act: Activation, rng: &mut Rng) -> Network {
        let topo = Topology::new(2, 2, 1).unwrap();
        let mut flat = rng.normal_vec(topo.param_dim());
        for i in 0..2 {
            flat[topo.flat_index_w_in(i, 1)] = -flat[topo.flat_index_w_in(i, 0)];
        }
        flat[topo.flat_index_b_hidden(1)] = -flat[topo.flat_index_b_hidden(0)];
        net_from_flat(&topo, act, &flat)
    }

    #[test]
    fn e0_detects_deactivation() {
        let mut rng = Rng::seed_from(50);
        let topo = Topology::new(2, 3, 1).unwrap();
        let mut flat = rng.normal_vec(topo.param_dim());
        flat[topo.flat_index_w_out(1, 0)] = 0.0;
        let net = net_from_flat(&topo, Activation::Sigmoid, &flat);
        let report = in_e0(&net, &ToleranceConfig::default()).unwrap();
        assert!(!report.member);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, E0Violation::OuterRowZero { neuron: 1, .. })));
    }

    #[test]
    fn e0_detects_sign_pair() {
        let mut rng = Rng::seed_from(51);
        let net = sign_pair_net(Activation::Sigmoid, &mut rng);
        let report = in_e0(&net, &ToleranceConfig::default()).unwrap();
        assert!(!report.member);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, E0Violation::PairMatch { negated: true, .. })));
        assert!(report.margin <= 1e-12);
    }

    #[test]
    fn e0_holds_for_generic_draws() {
        let mut rng = Rng::seed_from(52);
        let topo = Topology::new(2, 3, 1).unwrap();
        for _ in 0..1000 {
            let net = random_net(&topo, Activation::Sigmoid, &mut rng);
            let report = in_e0(&net, &ToleranceConfig::default()).unwrap();
            assert!(report.member, "continuous draws are almost surely in E0");
        }
    }

    #[test]
    fn e0_empty_hidden_layer_is_trivially_member() {
        let topo = Topology::new(2, 0, 1).unwrap();
        let net = net_from_flat(&topo, Activation::Sigmoid, &[0.4]);
        let report = in_e0(&net, &ToleranceConfig::default()).unwrap();
        assert!(report.member);
        assert_eq!(report.margin, f64::INFINITY);
    }

    #[test]
    fn taxonomy_duplication_witness() {
        let mut rng = Rng::seed_from(53);
        let topo = Topology::new(2, 2, 1).unwrap();
        let mut flat = rng.normal_vec(topo.param_dim());
        for i in 0..2 {
            let v = flat[topo.flat_index_w_in(i, 0)];
            flat[topo.flat_index_w_in(i, 1)] = v;
        }
        flat[topo.flat_index_b_hidden(1)] = flat[topo.flat_index_b_hidden(0)];
        let net = net_from_flat(&topo, Activation::Sigmoid, &flat);
        let mu = random_measure(10, 2, &mut rng);
        let report = taxonomy(&net, &mu, &ToleranceConfig::default()).unwrap();
        assert!(!report.efficient);
        assert_eq!(report.findings.len(), 1);
        let f = &report.findings[0];
        assert_eq!(f.kind, RedundancyKind::Duplication);
        assert_eq!(f.neurons, vec![0, 1]);
        let lambda = f.lambda.as_ref().unwrap();
        assert_eq!(lambda.constant, 0.0);
        assert_eq!(lambda.coeffs, vec![1.0, -1.0]);
        assert!(lambda.residual_on_atoms(&net, &mu).unwrap() <= 1e-12);
    }

    #[test]
    fn taxonomy_bias_witness() {
        let mut rng = Rng::seed_from(54);
        let topo = Topology::new(2, 2, 1).unwrap();
        let mut flat = rng.normal_vec(topo.param_dim());
        for i in 0..2 {
            flat[topo.flat_index_w_in(i, 1)] = 0.0;
        }
        let net = net_from_flat(&topo, Activation::Sigmoid, &flat);
        let mu = random_measure(8, 2, &mut rng);
        let report = taxonomy(&net, &mu, &ToleranceConfig::default()).unwrap();
        assert_eq!(report.findings.len(), 1);
        let f = &report.findings[0];
        assert_eq!(f.kind, RedundancyKind::Bias);
        assert_eq!(f.neurons, vec![1]);
        let lambda = f.lambda.as_ref().unwrap();
        let beta = net.params.b_hidden()[1];
        assert!((lambda.constant + net.activation.eval(0, beta)).abs() <= 1e-15);
        assert_eq!(lambda.coeffs, vec![0.0, 1.0]);
        assert!(lambda.residual_on_atoms(&net, &mu).unwrap() <= 1e-12);
    }

    #[test]
    fn taxonomy_sign_pairs_for_sigmoid_and_tanh() {
        let mut rng = Rng::seed_from(55);
        for act in [Activation::Sigmoid, Activation::Tanh] {
            let net = sign_pair_net(act.clone(), &mut rng);
            let mu = random_measure(12, 2, &mut rng);
            let report = taxonomy(&net, &mu, &ToleranceConfig::default()).unwrap();
            assert_eq!(report.findings.len(), 1, "{}", act.name());
            let f = &report.findings[0];
            assert_eq!(f.kind, RedundancyKind::SignSymmetric);
            let lambda = f.lambda.as_ref().unwrap();
            assert!(
                lambda.residual_on_atoms(&net, &mu).unwrap() <= 1e-10,
                "{} residual",
                act.name()
            );
        }
    }

    #[test]
    fn taxonomy_softplus_single_sign_pair_is_efficient() {
        // softplus has no sign symmetry: one mirrored pair differs by a
        // linear term, which the constant cannot absorb
        let mut rng = Rng::seed_from(56);
        let net = sign_pair_net(Activation::Softplus, &mut rng);
        let mu = random_measure(12, 2, &mut rng);
        let report = taxonomy(&net, &mu, &ToleranceConfig::default()).unwrap();
        assert!(report.efficient, "{:?}", report.findings);
    }

    #[test]
    fn taxonomy_softplus_cancelling_sign_pairs_are_generalized() {
        // two mirrored pairs with parallel inner weights: the linear leftovers
        // cancel in a combination that is neither a duplication nor a sign
        // symmetry
        let mut rng = Rng::seed_from(57);
        let topo = Topology::new(2, 4, 1).unwrap();
        let w = [0.7, -0.4];
        let beta = 0.3;
        let gamma = -0.9;
        let mut flat = rng.normal_vec(topo.param_dim());
        for i in 0..2 {
            flat[topo.flat_index_w_in(i, 0)] = w[i];
            flat[topo.flat_index_w_in(i, 1)] = -w[i];
            flat[topo.flat_index_w_in(i, 2)] = 2.0 * w[i];
            flat[topo.flat_index_w_in(i, 3)] = -2.0 * w[i];
        }
        flat[topo.flat_index_b_hidden(0)] = beta;
        flat[topo.flat_index_b_hidden(1)] = -beta;
        flat[topo.flat_index_b_hidden(2)] = gamma;
        flat[topo.flat_index_b_hidden(3)] = -gamma;
        let net = net_from_flat(&topo, Activation::Softplus, &flat);
        let mu = random_measure(20, 2, &mut rng);
        let report = taxonomy(&net, &mu, &ToleranceConfig::default()).unwrap();
        assert!(!report.efficient);
        assert!(report
            .findings
            .iter()
            .all(|f| f.kind != RedundancyKind::SignSymmetric));
        let generalized: Vec<_> = report
            .findings
            .iter()
            .filter(|f| f.kind == RedundancyKind::Generalized)
            .collect();
        assert_eq!(generalized.len(), 1);
        let lambda = generalized[0].lambda.as_ref().unwrap();
        let residual = lambda.residual_on_atoms(&net, &mu).unwrap();
        assert!(residual <= 1e-8, "residual {residual}");
    }

    #[test]
    fn taxonomy_requires_two_distinct_atoms() {
        let topo = Topology::new(1, 1, 1).unwrap();
        let mut rng = Rng::seed_from(58);
        let net = random_net(&topo, Activation::Sigmoid, &mut rng);
        let atoms = Mat::from_fn(3, 1, |_, _| 0.5);
        let mu = EmpiricalMeasure::uniform(atoms).unwrap();
        assert!(matches!(
            taxonomy(&net, &mu, &ToleranceConfig::default()),
            Err(Error::InsufficientAtoms { .. })
        ));
    }

    #[test]
    fn pattern_00_reduces_to_plain_efficiency() {
        let mut rng = Rng::seed_from(59);
        let topo = Topology::new(2, 2, 1).unwrap();
        let mut flat = rng.normal_vec(topo.param_dim());
        for i in 0..2 {
            let v = flat[topo.flat_index_w_in(i, 0)];
            flat[topo.flat_index_w_in(i, 1)] = v;
        }
        flat[topo.flat_index_b_hidden(1)] = flat[topo.flat_index_b_hidden(0)];
        let dup = net_from_flat(&topo, Activation::Sigmoid, &flat);
        let mu = random_measure(12, 2, &mut rng);
        let pattern = PolyPattern::parse("0,0").unwrap();
        let tol = ToleranceConfig::default();
        let report = poly_efficiency_rank(&dup, &mu, &pattern, &tol).unwrap();
        assert!(!report.full_rank);

        let generic = random_net(&topo, Activation::Sigmoid, &mut rng);
        let report = poly_efficiency_rank(&generic, &mu, &pattern, &tol).unwrap();
        assert!(report.full_rank);
    }

    #[test]
    fn pattern_0012_full_rank_on_e0_for_sigmoid_and_tanh() {
        // Rich atoms: wide spread so pre-activations traverse the transition
        // region, and enough of them that the finite-sample surrogate of the
        // open-support hypothesis carries the rank.
        let topo = Topology::new(2, 2, 1).unwrap();
        let pattern = PolyPattern::parse("0,0,1,2").unwrap();
        let tol = ToleranceConfig::default();
        for act in [Activation::Sigmoid, Activation::Tanh] {
            let mut rng = Rng::seed_from(60);
            let mut checked = 0;
            for trial in 0..200 {
                let mut flat = rng.normal_vec(topo.param_dim());
                for j in 0..2 {
                    for i in 0..2 {
                        flat[topo.flat_index_w_in(i, j)] *= 2.0;
                    }
                }
                let net = net_from_flat(&topo, act.clone(), &flat);
                if !in_e0(&net, &tol).unwrap().member {
                    continue;
                }
                let atoms = Mat::from_fn(240, 2, |_, _| 5.0 * rng.next_normal());
                let mu = EmpiricalMeasure::uniform(atoms).unwrap();
                let report = poly_efficiency_rank(&net, &mu, &pattern, &tol).unwrap();
                assert!(report.full_rank, "{} trial {trial}", act.name());
                checked += 1;
            }
            assert!(checked >= 190, "too many draws left E0: {checked}");
        }
    }

    #[test]
    fn tanh_sign_pair_deficient_for_every_pattern() {
        let mut rng = Rng::seed_from(61);
        let net = sign_pair_net(Activation::Tanh, &mut rng);
        let tol = ToleranceConfig::default();
        for pattern_text in ["0,0", "0,0,1", "0,0,1,2"] {
            let pattern = PolyPattern::parse(pattern_text).unwrap();
            let needed = pattern.column_count(2, 2);
            let mu = random_measure(needed + 8, 2, &mut rng);
            let report = poly_efficiency_rank(&net, &mu, &pattern, &tol).unwrap();
            assert!(!report.full_rank, "pattern {pattern_text}");
        }
    }

    #[test]
    fn rank_probe_errors_on_too_few_atoms() {
        let mut rng = Rng::seed_from(62);
        let topo = Topology::new(2, 2, 1).unwrap();
        let net = random_net(&topo, Activation::Sigmoid, &mut rng);
        let pattern = PolyPattern::parse("0,0,1,2").unwrap();
        let mu = random_measure(5, 2, &mut rng);
        assert!(matches!(
            poly_efficiency_rank(&net, &mu, &pattern, &ToleranceConfig::default()),
            Err(Error::InsufficientAtoms { .. })
        ));
    }

    #[test]
    fn rank_verdict_is_scale_robust() {
        // rescaling dictionary columns by a positive diagonal (a units change)
        // must not move the verdict: columns are normalized before the SVD
        let mut rng = Rng::seed_from(63);
        for _ in 0..20 {
            let n = 12;
            let cols = 5;
            let columns: Vec<Vec<f64>> = (0..cols).map(|_| rng.normal_vec(n)).collect();
            let scales: Vec<f64> = (0..cols).map(|_| 10f64.powf(6.0 * rng.next_normal())).collect();
            let rescaled: Vec<Vec<f64>> = columns
                .iter()
                .zip(&scales)
                .map(|(c, &s)| c.iter().map(|v| v * s).collect())
                .collect();
            let (a, _) = normalized_dictionary(columns);
            let (b, _) = normalized_dictionary(rescaled);
            for i in 0..n {
                for j in 0..cols {
                    assert!(
                        (a[(i, j)] - b[(i, j)]).abs() <= 1e-12,
                        "normalized dictionaries must agree"
                    );
                }
            }
        }
    }

    #[test]
    fn admissibility_ranks() {
        for (act, expected) in [
            (Activation::Sigmoid, 6),
            (Activation::Tanh, 6),
            (Activation::Softplus, 6),
            (Activation::Exp, 3),
        ] {
            let report = activation_admissibility(&act, 12).unwrap();
            assert_eq!(report.rank, expected, "{}", act.name());
            assert_eq!(report.full, expected == 6);
        }
        assert!(activation_admissibility(&Activation::Sigmoid, 5).is_err());
    }

    #[test]
    fn tolerance_validation() {
        let bad = ToleranceConfig {
            zero_abs: 0.0,
            ..ToleranceConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(ToleranceConfig::default().validate().is_ok());
    }
}
