//! Multivariate polynomial basics and the slicing-based zero test.
//!
//! A degree-`n` polynomial in `d` variables is determined by its restrictions
//! to `N = multichoose(d, n)` suitably chosen directions, and `N` is optimal:
//! any smaller direction set admits a nonzero polynomial whose every slice
//! vanishes identically. Direction sets are validated through the rank of
//! their degree-`n` monomial matrix; the deterministic construction stacks a
//! generalized Vandermonde matrix, which is always nonsingular for strictly
//! increasing positive nodes.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rng::{derive_seed, Rng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative singular value cutoff for direction verification.
const VERIFY_RANK_REL: f64 = 1e-10;

/// Relative threshold on slice coefficients in the zero test.
const SLICE_ZERO_REL: f64 = 1e-10;

/// Exponent tuple of one monomial.
///
/// The ordering key of a degree-`n` index is `phi(r) = sum_i r_i (n+1)^(i-1)`,
/// injective on indices of one degree; indices of different degree compare by
/// degree first. Within a degree class this is the reverse lexicographic
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Ordering key within the degree class of this index.
    pub fn phi_key(&self) -> u128 {
        let base = (self.degree() + 1) as u128;
        let mut key = 0u128;
        let mut power = 1u128;
        for &r in &self.0 {
            key += r as u128 * power;
            power *= base;
        }
        key
    }

    /// Evaluates the monomial at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&r, &xi)| xi.powi(r as i32))
            .product()
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then(self.phi_key().cmp(&other.phi_key()))
            .then(self.0.cmp(&other.0))
    }
}

/// `binom(n + d - 1, n)`: the number of degree-exactly-`n` monomials in `d`
/// variables, and the optimal number of slicing directions.
pub fn multichoose(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("multichoose needs d >= 1".into()));
    }
    let mut acc: u128 = 1;
    for i in 0..n {
        acc = acc
            .checked_mul((d + i) as u128)
            .ok_or_else(|| Error::InvalidArgument("multichoose overflow".into()))?;
        acc /= (i + 1) as u128;
    }
    usize::try_from(acc).map_err(|_| Error::InvalidArgument("multichoose overflow".into()))
}

/// All exponent tuples of degree exactly `n` in `d` variables, ascending in
/// the `phi` order.
pub fn multi_indices_exact(d: usize, n: usize) -> Vec<MultiIndex> {
    fn recurse(current: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(MultiIndex(current.clone()));
            current[pos] = 0;
            return;
        }
        for r in 0..=remaining {
            current[pos] = r;
            recurse(current, pos + 1, remaining - r, out);
        }
        current[pos] = 0;
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; d];
    recurse(&mut current, 0, n, &mut out);
    out.sort();
    out
}

/// All exponent tuples of degree at most `n`, ascending.
pub fn multi_indices_up_to(d: usize, n: usize) -> Vec<MultiIndex> {
    (0..=n).flat_map(|k| multi_indices_exact(d, k)).collect()
}

/// Vector of all degree-exactly-`n` monomials of `x` in the `phi` order.
pub fn mon(n: usize, x: &[f64]) -> Vec<f64> {
    multi_indices_exact(x.len(), n)
        .iter()
        .map(|r| r.eval(x))
        .collect()
}

/// Sparse polynomial with coefficients keyed by exponent tuple; zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyTerm {
    r: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyWire {
    d: usize,
    terms: Vec<PolyTerm>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyWire {
            d: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(r, &c)| PolyTerm { r: r.0.clone(), c })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = PolyWire::deserialize(de)?;
        let terms = wire
            .terms
            .into_iter()
            .map(|t| (MultiIndex(t.r), t.c))
            .collect();
        Polynomial::from_terms(wire.d, terms).map_err(serde::de::Error::custom)
    }
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let mut map: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (r, c) in terms {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "polynomial exponent tuple",
                    expected: dim,
                    got: r.dim(),
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            if c != 0.0 {
                *map.entry(r).or_insert(0.0) += c;
            }
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Polynomial { dim, terms: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|r| r.degree()).max()
    }

    pub fn coefficient(&self, r: &MultiIndex) -> f64 {
        self.terms.get(r).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |acc, c| acc.max(c.abs()))
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(r, c)| c * r.eval(x)).sum()
    }
}

/// A set of slicing directions together with its verification status:
/// `verified` means the degree-`n` monomial matrix of the directions has full
/// rank, so slices along them characterize degree-`n` polynomials.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    pub n: usize,
    /// One direction per row.
    pub directions: Mat,
    pub verified: bool,
}

impl DirectionSet {
    pub fn dim(&self) -> usize {
        self.directions.cols()
    }

    pub fn len(&self) -> usize {
        self.directions.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.rows() == 0
    }
}

/// Monomial matrix with rows `mon_n(v_k)`.
fn monomial_matrix(directions: &Mat, n: usize) -> Mat {
    let indices = multi_indices_exact(directions.cols(), n);
    Mat::from_fn(directions.rows(), indices.len(), |k, idx| {
        indices[idx].eval(directions.row(k))
    })
}

fn verify_directions(directions: &Mat, n: usize) -> Result<(bool, Vec<f64>)> {
    let mut m = monomial_matrix(directions, n);
    // Equilibrate rows then columns to unit norm; diagonal scalings leave the
    // rank untouched but keep the exponent towers of the Vandermonde
    // construction from drowning the singular value gap.
    for i in 0..m.rows() {
        let norm = linalg::norm(m.row(i));
        if norm > 0.0 {
            for v in m.row_mut(i) {
                *v /= norm;
            }
        }
    }
    for j in 0..m.cols() {
        let norm = linalg::norm(&m.col(j));
        if norm > 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] /= norm;
            }
        }
    }
    let decomp = linalg::svd(&m)?;
    let full_rank =
        linalg::rank_from_singular_values(&decomp.sigma, VERIFY_RANK_REL) == m.cols().min(m.rows());
    Ok((full_rank && m.rows() == m.cols(), decomp.sigma))
}

/// Deterministic direction set `v_k = (a_k, a_k^(n+1), ..., a_k^((n+1)^(d-1)))`
/// from strictly increasing positive nodes.
///
/// The monomial matrix of these directions is a generalized Vandermonde
/// matrix, nonsingular for every strictly ordered positive node sequence, so
/// the set is verified by construction. The exponent tower grows as
/// `(n+1)^(d-1)`; beyond roughly `(d, n) = (3, 2)` the nonsingularity is no
/// longer visible to a floating-point rank test even though it holds exactly.
pub fn vandermonde_directions(n: usize, d: usize, a: &[f64]) -> Result<DirectionSet> {
    let count = multichoose(d, n)?;
    if a.len() != count {
        return Err(Error::DimensionMismatch {
            context: "vandermonde node sequence",
            expected: count,
            got: a.len(),
        });
    }
    check_strictly_increasing_positive(a)?;
    let base = (n + 1) as f64;
    let directions = Mat::from_fn(count, d, |k, i| a[k].powf(base.powi(i as i32)));
    if !directions.all_finite() {
        return Err(Error::NonFinite("vandermonde directions"));
    }
    Ok(DirectionSet {
        n,
        directions,
        verified: true,
    })
}

/// Default node grid `a_k = 1 + k / N`, `k = 1..N`: well separated and
/// bounded, so the exponent towers stay small.
pub fn default_vandermonde_nodes(d: usize, n: usize) -> Result<Vec<f64>> {
    let count = multichoose(d, n)?;
    Ok((1..=count)
        .map(|k| 1.0 + k as f64 / count as f64)
        .collect())
}

fn check_strictly_increasing_positive(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty node sequence".into()));
    }
    check_strictly_increasing(a)?;
    if a[0] <= 0.0 {
        return Err(Error::InvalidArgument("nodes must be strictly positive".into()));
    }
    Ok(())
}

fn check_strictly_increasing(a: &[f64]) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("node or exponent sequence"));
    }
    for w in a.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(format!(
                "sequence must be strictly increasing, found {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// The generalized Vandermonde matrix with entries `a_k ^ lambda_i` (row `i`,
/// column `k`).
pub fn generalized_vandermonde_matrix(a: &[f64], lambda: &[f64]) -> Result<Mat> {
    if a.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            context: "vandermonde nodes vs exponents",
            expected: a.len(),
            got: lambda.len(),
        });
    }
    check_strictly_increasing_positive(a)?;
    check_strictly_increasing(lambda)?;
    Ok(Mat::from_fn(lambda.len(), a.len(), |i, k| {
        a[k].powf(lambda[i])
    }))
}

/// Determinant of the generalized Vandermonde matrix; nonzero for every
/// strictly ordered input pair.
pub fn generalized_vandermonde_det(a: &[f64], lambda: &[f64]) -> Result<f64> {
    linalg::lu_det(&generalized_vandermonde_matrix(a, lambda)?)
}

/// Standard-normal directions with verification by SVD; re-draws from the
/// seed stream on the measure-zero rank failure, at most 8 times.
pub fn random_directions(d: usize, n: usize, seed: u64) -> Result<DirectionSet> {
    let count = multichoose(d, n)?;
    let max_attempts = 8;
    let mut last_sigma = Vec::new();
    for attempt in 0..max_attempts {
        let mut rng = Rng::seed_from(derive_seed(seed, attempt as u64));
        let directions = Mat::from_fn(count, d, |_, _| rng.next_normal());
        let (verified, sigma) = verify_directions(&directions, n)?;
        if verified {
            return Ok(DirectionSet {
                n,
                directions,
                verified,
            });
        }
        last_sigma = sigma;
    }
    Err(Error::RankVerificationFailed {
        attempts: max_attempts,
        singular_values: last_sigma,
    })
}

/// Wraps explicit directions, verifying them against degree `n`.
pub fn direction_set_from_matrix(directions: Mat, n: usize) -> Result<DirectionSet> {
    let (verified, _) = verify_directions(&directions, n)?;
    Ok(DirectionSet {
        n,
        directions,
        verified,
    })
}

/// Coefficients of the univariate slice `lambda -> p(lambda v)`; the
/// coefficient of `lambda^k` is the degree-`k` homogeneous part of `p`
/// evaluated at `v`.
pub fn slice(p: &Polynomial, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "slice direction",
            expected: p.dim(),
            got: v.len(),
        });
    }
    let deg = p.degree().unwrap_or(0);
    let mut coeffs = vec![0.0; deg + 1];
    for (r, c) in p.terms() {
        coeffs[r.degree()] += c * r.eval(v);
    }
    Ok(coeffs)
}

/// Zero test by slicing: true iff every slice along the verified directions
/// has all coefficients below `1e-10` times the largest coefficient of `p`.
pub fn is_zero_by_slicing(p: &Polynomial, dirs: &DirectionSet) -> Result<bool> {
    if !dirs.verified {
        return Err(Error::PreconditionViolated(
            "direction set is not verified".into(),
        ));
    }
    if p.dim() != dirs.dim() {
        return Err(Error::DimensionMismatch {
            context: "polynomial vs direction dimension",
            expected: dirs.dim(),
            got: p.dim(),
        });
    }
    let deg = match p.degree() {
        None => return Ok(true),
        Some(deg) => deg,
    };
    if deg > dirs.n {
        return Err(Error::PreconditionViolated(format!(
            "polynomial degree {deg} exceeds direction degree {}",
            dirs.n
        )));
    }
    let threshold = SLICE_ZERO_REL * p.max_abs_coefficient();
    for k in 0..dirs.len() {
        let coeffs = slice(p, dirs.directions.row(k))?;
        if coeffs.iter().any(|c| c.abs() > threshold) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For fewer than `N = multichoose(d, n)` directions, a unit-coefficient-norm
/// polynomial of degree exactly `n` whose slices along all of them vanish
/// identically: the witness that `N` directions are necessary.
pub fn optimality_counterexample(directions: &Mat, n: usize) -> Result<Polynomial> {
    let d = directions.cols();
    if d == 0 {
        return Err(Error::InvalidArgument(
            "directions need at least one column".into(),
        ));
    }
    let count = multichoose(d, n)?;
    let m = directions.rows();
    if m >= count {
        return Err(Error::PreconditionViolated(format!(
            "need fewer than {count} directions for a counterexample, got {m}"
        )));
    }
    let indices = multi_indices_exact(d, n);
    // Rows mon_n(v_i)^T as columns of a: a left null vector q of the column
    // stack gives p(x) = <q, mon_n(x)> with p(v_i) = 0, hence every slice
    // vanishes by homogeneity.
    let a = Mat::from_fn(count, m, |row, col| indices[row].eval(directions.row(col)));
    let gram = a.matmul(&a.transpose());
    let eig = linalg::sym_eigen(&gram)?;
    let q = eig.vectors.col(0);
    let q_norm = linalg::norm(&q);
    let terms = indices
        .into_iter()
        .zip(q)
        .map(|(r, c)| (r, c / q_norm))
        .collect();
    Polynomial::from_terms(d, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn multichoose_cases() {
        assert_eq!(multichoose(1, 7).unwrap(), 1);
        assert_eq!(multichoose(2, 2).unwrap(), 3);
        // direct enumeration oracle for (3, 4)
        assert_eq!(multichoose(3, 4).unwrap(), multi_indices_exact(3, 4).len());
        assert_eq!(multichoose(3, 4).unwrap(), 15);
    }

    #[test]
    fn mon_order_d2_n2() {
        // phi keys: (2,0) -> 2, (1,1) -> 4, (0,2) -> 6
        let idx = multi_indices_exact(2, 2);
        assert_eq!(
            idx,
            vec![
                MultiIndex(vec![2, 0]),
                MultiIndex(vec![1, 1]),
                MultiIndex(vec![0, 2])
            ]
        );
        let v = mon(2, &[3.0, 5.0]);
        assert_eq!(v, vec![9.0, 15.0, 25.0]);
    }

    #[test]
    fn mon_at_zero_is_zero_for_positive_degree() {
        assert_eq!(mon(2, &[0.0, 0.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn phi_order_is_strict_total_order_small_cases() {
        for d in 1..=4 {
            for n in 0..=5 {
                let idx = multi_indices_exact(d, n);
                assert_eq!(idx.len(), multichoose(d, n).unwrap());
                for w in idx.windows(2) {
                    assert!(
                        w[0].phi_key() < w[1].phi_key(),
                        "phi must strictly increase: {:?} then {:?}",
                        w[0],
                        w[1]
                    );
                }
            }
        }
    }

    #[test]
    fn vandermonde_direction_example_d2_n1() {
        // a = (1, 2): v1 = (1, 1), v2 = (2, 4); mon_1 rows [[1,1],[2,4]],
        // det = 2.
        let ds = vandermonde_directions(1, 2, &[1.0, 2.0]).unwrap();
        assert!(ds.verified);
        assert_eq!(ds.directions.row(0), &[1.0, 1.0]);
        assert_eq!(ds.directions.row(1), &[2.0, 4.0]);
        let m = monomial_matrix(&ds.directions, 1);
        let det = linalg::lu_det(&m).unwrap();
        assert!((det.abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vandermonde_directions_reject_bad_nodes() {
        assert!(vandermonde_directions(1, 2, &[2.0, 1.0]).is_err());
        assert!(vandermonde_directions(1, 2, &[-1.0, 1.0]).is_err());
        assert!(vandermonde_directions(1, 2, &[1.0]).is_err());
    }

    #[test]
    fn default_nodes_verify_across_sizes() {
        for (d, n) in [(1, 3), (2, 2), (2, 3), (3, 2), (3, 3)] {
            let nodes = default_vandermonde_nodes(d, n).unwrap();
            let ds = vandermonde_directions(n, d, &nodes).unwrap();
            assert!(ds.verified, "({d},{n})");
        }
        // where the exponent tower stays in floating-point reach, the numeric
        // rank check agrees with the nonsingularity guarantee
        for (d, n) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let nodes = default_vandermonde_nodes(d, n).unwrap();
            let ds = vandermonde_directions(n, d, &nodes).unwrap();
            let rechecked = direction_set_from_matrix(ds.directions.clone(), n).unwrap();
            assert!(rechecked.verified, "numeric recheck at ({d},{n})");
        }
    }

    #[test]
    fn generalized_vandermonde_hand_values() {
        // [[1,1],[1,2]] has det 1
        let det = generalized_vandermonde_det(&[1.0, 2.0], &[0.0, 1.0]).unwrap();
        assert!((det - 1.0).abs() <= 1e-12);
        // classic 3x3 Vandermonde on nodes 1,2,3: det = (2-1)(3-1)(3-2) = 2
        let det = generalized_vandermonde_det(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!((det - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn classic_vandermonde_matches_product_formula() {
        let mut rng = crate::rng::Rng::seed_from(40);
        for _ in 0..50 {
            let n = 2 + (rng.next_u64() % 4) as usize;
            let mut nodes: Vec<f64> = (0..n).map(|_| 0.1 + 3.0 * rng.next_f64()).collect();
            nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            if nodes.len() < 2 {
                continue;
            }
            let lambda: Vec<f64> = (0..nodes.len()).map(|i| i as f64).collect();
            let det = generalized_vandermonde_det(&nodes, &lambda).unwrap();
            let mut product = 1.0;
            for i in 0..nodes.len() {
                for j in (i + 1)..nodes.len() {
                    product *= nodes[j] - nodes[i];
                }
            }
            assert!(
                (det - product).abs() <= 1e-9 * (1.0 + product.abs()),
                "{det} vs {product}"
            );
        }
    }

    #[test]
    fn random_directions_verify_and_duplicates_fail() {
        for seed in 0..20 {
            let ds = random_directions(3, 3, seed).unwrap();
            assert!(ds.verified);
            assert_eq!(ds.len(), 10);
        }
        // adversarial duplicate rows
        let dup = Mat::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let ds = direction_set_from_matrix(dup, 2).unwrap();
        assert!(!ds.verified);
    }

    #[test]
    fn slice_simple_cases() {
        // constant polynomial
        let c = Polynomial::from_terms(2, vec![(MultiIndex(vec![0, 0]), 4.5)]).unwrap();
        assert_eq!(slice(&c, &[1.0, -2.0]).unwrap(), vec![4.5]);
        // p = x1 x2 along v = (1, 1): lambda^2
        let p = Polynomial::from_terms(2, vec![(MultiIndex(vec![1, 1]), 1.0)]).unwrap();
        assert_eq!(slice(&p, &[1.0, 1.0]).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn slice_evaluation_oracle() {
        let mut rng = crate::rng::Rng::seed_from(41);
        for _ in 0..100 {
            let d = 1 + (rng.next_u64() % 3) as usize;
            let n = 1 + (rng.next_u64() % 3) as usize;
            let mut terms = Vec::new();
            for r in multi_indices_up_to(d, n) {
                if rng.next_f64() < 0.7 {
                    terms.push((r, rng.next_normal()));
                }
            }
            let p = Polynomial::from_terms(d, terms).unwrap();
            let v = rng.normal_vec(d);
            let coeffs = slice(&p, &v).unwrap();
            let lambda = rng.next_normal();
            let via_slice: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * lambda.powi(k as i32))
                .sum();
            let x: Vec<f64> = v.iter().map(|vi| lambda * vi).collect();
            let direct = p.eval(&x);
            assert!(
                (via_slice - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                "{via_slice} vs {direct}"
            );
        }
    }

    #[test]
    fn zero_test_accepts_zero_rejects_nonzero() {
        let dirs = random_directions(3, 2, 99).unwrap();
        assert!(is_zero_by_slicing(&Polynomial::zero(3), &dirs).unwrap());
        let mut rng = crate::rng::Rng::seed_from(42);
        for _ in 0..200 {
            let indices = multi_indices_up_to(3, 2);
            let pick = (rng.next_u64() % indices.len() as u64) as usize;
            let mut terms = Vec::new();
            for (i, r) in indices.into_iter().enumerate() {
                if i == pick || rng.next_f64() < 0.4 {
                    terms.push((r, rng.next_normal()));
                }
            }
            let p = Polynomial::from_terms(3, terms).unwrap();
            if p.is_zero() {
                continue;
            }
            assert!(!is_zero_by_slicing(&p, &dirs).unwrap());
        }
    }

    #[test]
    fn zero_test_requires_verified_directions_and_degree_bound() {
        let dup = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let bad = direction_set_from_matrix(dup, 2).unwrap();
        let p = Polynomial::from_terms(2, vec![(MultiIndex(vec![1, 0]), 1.0)]).unwrap();
        assert!(is_zero_by_slicing(&p, &bad).is_err());
        let dirs = random_directions(2, 1, 7).unwrap();
        let q = Polynomial::from_terms(2, vec![(MultiIndex(vec![2, 0]), 1.0)]).unwrap();
        assert!(is_zero_by_slicing(&q, &dirs).is_err());
    }

    #[test]
    fn counterexample_single_axis_direction() {
        // d = 2, n = 1, direction (1, 0): the null space forces p = ±x2
        let v = Mat::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let p = optimality_counterexample(&v, 1).unwrap();
        let c_x1 = p.coefficient(&MultiIndex(vec![1, 0]));
        let c_x2 = p.coefficient(&MultiIndex(vec![0, 1]));
        assert!(c_x1.abs() <= 1e-12);
        assert!((c_x2.abs() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn counterexample_no_directions_gives_unit_polynomial() {
        let v = Mat::zeros(0, 2);
        let p = optimality_counterexample(&v, 2).unwrap();
        assert!((p.coefficient_norm() - 1.0).abs() <= 1e-12);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn counterexample_slices_vanish() {
        let mut rng = crate::rng::Rng::seed_from(44);
        for trial in 0..50 {
            let (d, n) = [(2usize, 2usize), (3, 2), (2, 3)][trial % 3];
            let count = multichoose(d, n).unwrap();
            let m = count - 1;
            let dirs = Mat::from_fn(m, d, |_, _| rng.next_normal());
            let p = optimality_counterexample(&dirs, n).unwrap();
            assert!((p.coefficient_norm() - 1.0).abs() <= 1e-10);
            for i in 0..m {
                let coeffs = slice(&p, dirs.row(i)).unwrap();
                for c in coeffs {
                    assert!(c.abs() <= 1e-9, "slice coefficient {c} too large");
                }
            }
        }
        let full = Mat::zeros(multichoose(2, 2).unwrap(), 2);
        assert!(optimality_counterexample(&full, 2).is_err());
    }

    #[test]
    fn counterexample_caught_by_full_fresh_set() {
        // the witness for M = N-1 directions must be rejected by a full
        // verified set
        let mut rng = crate::rng::Rng::seed_from(46);
        for trial in 0..20 {
            let (d, n) = (2usize, 2usize);
            let count = multichoose(d, n).unwrap();
            let dirs = Mat::from_fn(count - 1, d, |_, _| rng.next_normal());
            let p = optimality_counterexample(&dirs, n).unwrap();
            let full = random_directions(d, n, 1000 + trial).unwrap();
            assert!(!is_zero_by_slicing(&p, &full).unwrap());
        }
    }

    proptest! {
        #[test]
        fn monomial_scaling_law(seed in 0u64..1000) {
            let mut rng = crate::rng::Rng::seed_from(seed);
            let d = 1 + (rng.next_u64() % 4) as usize;
            let n = (rng.next_u64() % 5) as usize;
            let x = rng.normal_vec(d);
            let lambda = rng.next_normal();
            let scaled: Vec<f64> = x.iter().map(|xi| lambda * xi).collect();
            let left = mon(n, &scaled);
            let factor = lambda.powi(n as i32);
            let right: Vec<f64> = mon(n, &x).iter().map(|v| factor * v).collect();
            for (l, r) in left.iter().zip(&right) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }

        #[test]
        fn polynomial_serde_round_trip(seed in 0u64..200) {
            let mut rng = crate::rng::Rng::seed_from(seed);
            let d = 1 + (rng.next_u64() % 3) as usize;
            let mut terms = Vec::new();
            for r in multi_indices_up_to(d, 3) {
                if rng.next_f64() < 0.5 {
                    terms.push((r, rng.next_normal()));
                }
            }
            let p = Polynomial::from_terms(d, terms).unwrap();
            let json = serde_json::to_string(&p).unwrap();
            let back: Polynomial = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(p, back);
        }
    }
}
