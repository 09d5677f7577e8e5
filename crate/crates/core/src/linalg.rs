//! Dense linear algebra at desk scale.
//!
//! Everything here is deterministic: fixed sweep orders, ascending eigenvalue
//! order with ties broken by index. Matrices are row-major `f64`.

use crate::error::{Error, Result};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "matrix rows",
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(self.row(i), x);
        }
        out
    }

    /// self += scale * other
    pub fn add_scaled(&mut self, scale: f64, other: &Mat) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut defect = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                defect = defect.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        defect
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// JSON form is a list of rows so reports stay readable.
impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RowsVisitor;
        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = Mat;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of equal-length rows of numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Mat, A::Error> {
                let mut rows: Vec<Vec<f64>> = Vec::new();
                while let Some(row) = seq.next_element::<Vec<f64>>()? {
                    rows.push(row);
                }
                Mat::from_rows(&rows).map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_seq(RowsVisitor)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += scale * x
pub fn axpy(scale: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += scale * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition: Householder tridiagonalization followed by
// QL with implicit shifts, eigenvalues ascending, ties broken by index.
// ---------------------------------------------------------------------------

pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: Mat,
}

pub fn sym_eigen(a: &Mat) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::Linalg("sym_eigen requires a square matrix"));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Mat::zeros(0, 0),
        });
    }
    // Work on the symmetrized copy; callers assemble symmetric matrices but
    // roundoff in their construction must not leak into the factorization.
    let mut z = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tqli(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = Mat::from_fn(n, n, |i, k| z[(i, order[k])]);
    Ok(SymEigen { values, vectors })
}

pub fn sym_eigenvalues(a: &Mat) -> Result<Vec<f64>> {
    Ok(sym_eigen(a)?.values)
}

/// Determinant of a symmetric matrix as the product of its eigenvalues.
pub fn sym_det(a: &Mat) -> Result<f64> {
    Ok(sym_eigenvalues(a)?.iter().product())
}

/// Reduce the symmetric matrix in `a` to tridiagonal form, accumulating the
/// orthogonal transform in `a`. Diagonal lands in `d`, subdiagonal in `e[1..]`.
fn tred2(a: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = a.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a[(i, k)].abs();
            }
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[(j, i)] = a[(i, j)] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let delta = f * e[k] + g * a[(i, k)];
                        a[(j, k)] -= delta;
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[(i, k)] * a[(k, j)];
                }
                for k in 0..i {
                    let delta = g * a[(k, i)];
                    a[(k, j)] -= delta;
                }
            }
        }
        d[i] = a[(i, i)];
        a[(i, i)] = 1.0;
        for j in 0..i {
            a[(j, i)] = 0.0;
            a[(i, j)] = 0.0;
        }
    }
}

/// QL with implicit shifts on the tridiagonal (d, e); eigenvectors accumulate
/// into the columns of `z`.
fn tqli(d: &mut [f64], e: &mut [f64], z: &mut Mat) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::Linalg("QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            let mut i = m - 1;
            loop {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
                if i == l {
                    break;
                }
                i -= 1;
            }
            if underflow && i > l {
                continue;
            }
            if !underflow {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Singular value decomposition: one-sided Jacobi on the columns.
// ---------------------------------------------------------------------------

pub struct Svd {
    /// rows x cols; columns with nonzero singular value are orthonormal.
    pub u: Mat,
    /// Descending, length cols.
    pub sigma: Vec<f64>,
    /// cols x cols orthogonal.
    pub v: Mat,
}

pub fn svd(a: &Mat) -> Result<Svd> {
    let m = a.rows;
    let n = a.cols;
    let mut u = a.clone();
    let mut v = Mat::identity(n);
    let tol = 1e-14;
    let max_sweeps = 128;
    // Rotations preserve the Frobenius norm; columns whose squared norm falls
    // below this floor carry a numerically zero singular value and are left
    // alone (their entries can reach denormal range where ratios blow up).
    let fro2: f64 = u.data().iter().map(|x| x * x).sum();
    let col_floor = fro2 * f64::EPSILON * f64::EPSILON;
    let mut converged = false;
    for _ in 0..max_sweeps {
        // largest relative coupling |gamma| / sqrt(alpha beta) seen this sweep
        let mut max_coupling = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for k in 0..m {
                    let up = u[(k, p)];
                    let uq = u[(k, q)];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if alpha <= col_floor || beta <= col_floor {
                    continue;
                }
                let coupling = (gamma.abs() / alpha.sqrt()) / beta.sqrt();
                max_coupling = max_coupling.max(coupling);
                if coupling <= tol {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                if t == 0.0 {
                    continue;
                }
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let up = u[(k, p)];
                    let uq = u[(k, q)];
                    u[(k, p)] = c * up - s * uq;
                    u[(k, q)] = s * up + c * uq;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = c * vp - s * vq;
                    v[(k, q)] = s * vp + c * vq;
                }
            }
        }
        if max_coupling <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Linalg("Jacobi SVD did not converge"));
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| norm(&u.col(j))).collect();
    for j in 0..n {
        if sigma[j] > 0.0 {
            for i in 0..m {
                u[(i, j)] /= sigma[j];
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    let u_sorted = Mat::from_fn(m, n, |i, j| u[(i, order[j])]);
    let v_sorted = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    sigma = order.iter().map(|&j| sigma[j]).collect();
    Ok(Svd {
        u: u_sorted,
        sigma,
        v: v_sorted,
    })
}

/// Number of singular values at or above `rel_cutoff` times the largest.
pub fn rank_from_singular_values(sigma: &[f64], rel_cutoff: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s >= rel_cutoff * max).count()
}

/// Minimum-norm least squares via the SVD; returns the solution and the
/// residual norm ||a x - b||.
pub fn lstsq(a: &Mat, b: &[f64], rel_cutoff: f64) -> Result<(Vec<f64>, f64)> {
    if a.rows != b.len() {
        return Err(Error::DimensionMismatch {
            context: "least squares rhs",
            expected: a.rows,
            got: b.len(),
        });
    }
    let decomp = svd(a)?;
    let sigma_max = decomp.sigma.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols];
    for j in 0..a.cols {
        let s = decomp.sigma[j];
        if s > rel_cutoff * sigma_max && s > 0.0 {
            let coeff = dot(&decomp.u.col(j), b) / s;
            axpy(coeff, &decomp.v.col(j), &mut x);
        }
    }
    let residual = sub(&a.matvec(&x), b);
    Ok((x, norm(&residual)))
}

// ---------------------------------------------------------------------------
// Cholesky and friends
// ---------------------------------------------------------------------------

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::Linalg("cholesky requires a square matrix"));
    }
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Linalg("matrix is not positive definite"));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves a x = b for symmetric positive definite a.
pub fn solve_spd(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    Ok(x)
}

/// Determinant by LU with partial pivoting. Exactly singular input gives 0.
pub fn lu_det(a: &Mat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Linalg("determinant requires a square matrix"));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = lu[(k, k)].abs();
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > pivot_val {
                pivot_val = lu[(i, k)].abs();
                pivot_row = i;
            }
        }
        if pivot_val == 0.0 {
            return Ok(0.0);
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            det = -det;
        }
        det *= lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let delta = factor * lu[(k, j)];
                lu[(i, j)] -= delta;
            }
        }
    }
    Ok(det)
}

/// Hadamard bound prod_i ||row_i|| on |det|.
pub fn hadamard_bound(a: &Mat) -> f64 {
    (0..a.rows()).map(|i| norm(a.row(i))).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Independent oracle: cyclic two-sided Jacobi for symmetric eigenvalues.
    fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
        let n = a.rows();
        let mut m = a.clone();
        for _ in 0..100 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(m[(i, j)].abs());
                }
            }
            if off < 1e-13 * (1.0 + m.max_abs()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    fn random_symmetric(n: usize, rng: &mut Rng) -> Mat {
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.next_normal();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn eigen_matches_jacobi_oracle() {
        let mut rng = Rng::seed_from(11);
        for trial in 0..200 {
            let n = 1 + (trial % 12);
            let a = random_symmetric(n, &mut rng);
            let ours = sym_eigenvalues(&a).unwrap();
            let oracle = jacobi_eigenvalues(&a);
            let scale = 1.0 + a.max_abs();
            for (x, y) in ours.iter().zip(&oracle) {
                assert!(
                    (x - y).abs() <= 1e-10 * scale,
                    "n={n} trial={trial}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let mut rng = Rng::seed_from(5);
        for _ in 0..50 {
            let n = 2 + (rng.next_u64() % 8) as usize;
            let a = random_symmetric(n, &mut rng);
            let eig = sym_eigen(&a).unwrap();
            // q diag(values) q^T == a
            let mut recon = Mat::zeros(n, n);
            for k in 0..n {
                let v = eig.vectors.col(k);
                for i in 0..n {
                    for j in 0..n {
                        recon[(i, j)] += eig.values[k] * v[i] * v[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (recon[(i, j)] - a[(i, j)]).abs() <= 1e-9 * (1.0 + a.max_abs()),
                        "entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn eigen_known_2x2() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let vals = sym_eigenvalues(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_handles_diagonal_and_tiny() {
        let a = Mat::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(sym_eigenvalues(&a).unwrap(), vec![3.0]);
        let d = Mat::from_fn(4, 4, |i, j| if i == j { i as f64 } else { 0.0 });
        let vals = sym_eigenvalues(&d).unwrap();
        assert_eq!(vals, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn svd_recovers_singular_values() {
        let mut rng = Rng::seed_from(17);
        for _ in 0..50 {
            let m = 3 + (rng.next_u64() % 8) as usize;
            let n = 1 + (rng.next_u64() % m as u64) as usize;
            let a = Mat::from_fn(m, n, |_, _| rng.next_normal());
            let decomp = svd(&a).unwrap();
            // singular values squared are eigenvalues of a^T a
            let gram = a.transpose().matmul(&a);
            let mut eigs = sym_eigenvalues(&gram).unwrap();
            eigs.reverse();
            for (s, lambda) in decomp.sigma.iter().zip(&eigs) {
                assert!(
                    (s * s - lambda).abs() <= 1e-9 * (1.0 + lambda.abs()),
                    "{s} vs sqrt({lambda})"
                );
            }
            // u sigma v^T == a
            let mut recon = Mat::zeros(m, n);
            for k in 0..n {
                let u = decomp.u.col(k);
                let v = decomp.v.col(k);
                for i in 0..m {
                    for j in 0..n {
                        recon[(i, j)] += decomp.sigma[k] * u[i] * v[j];
                    }
                }
            }
            for i in 0..m {
                for j in 0..n {
                    assert!((recon[(i, j)] - a[(i, j)]).abs() <= 1e-10 * (1.0 + a.max_abs()));
                }
            }
        }
    }

    #[test]
    fn svd_detects_rank_deficiency() {
        // Second column is twice the first.
        let a = Mat::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![2.0, 4.0, -1.0],
            vec![-1.0, -2.0, 3.0],
            vec![0.5, 1.0, 2.0],
        ])
        .unwrap();
        let decomp = svd(&a).unwrap();
        assert_eq!(rank_from_singular_values(&decomp.sigma, 1e-10), 2);
        // Null vector maps to (nearly) zero.
        let null = decomp.v.col(2);
        assert!(norm(&a.matvec(&null)) < 1e-12);
    }

    #[test]
    fn lstsq_solves_consistent_system() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let x_true = [3.0, -1.0];
        let b = a.matvec(&x_true);
        let (x, res) = lstsq(&a, &b, 1e-12).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn cholesky_round_trip_and_solve() {
        let mut rng = Rng::seed_from(23);
        for _ in 0..30 {
            let n = 1 + (rng.next_u64() % 8) as usize;
            let b_mat = Mat::from_fn(n, n, |_, _| rng.next_normal());
            let mut spd = b_mat.matmul(&b_mat.transpose());
            for i in 0..n {
                spd[(i, i)] += 0.5;
            }
            let l = cholesky(&spd).unwrap();
            let recon = l.matmul(&l.transpose());
            for i in 0..n {
                for j in 0..n {
                    assert!((recon[(i, j)] - spd[(i, j)]).abs() < 1e-10 * (1.0 + spd.max_abs()));
                }
            }
            let rhs = rng.normal_vec(n);
            let x = solve_spd(&spd, &rhs).unwrap();
            let resid = sub(&spd.matvec(&x), &rhs);
            assert!(norm(&resid) < 1e-9 * (1.0 + norm(&rhs)));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn lu_det_matches_eigen_product_for_symmetric() {
        let mut rng = Rng::seed_from(31);
        for _ in 0..30 {
            let n = 1 + (rng.next_u64() % 7) as usize;
            let a = random_symmetric(n, &mut rng);
            let d1 = lu_det(&a).unwrap();
            let d2 = sym_det(&a).unwrap();
            assert!(
                (d1 - d2).abs() <= 1e-8 * (1.0 + d1.abs().max(d2.abs())),
                "{d1} vs {d2}"
            );
        }
    }

    #[test]
    fn lu_det_known_values() {
        let a = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((lu_det(&a).unwrap() - 1.0).abs() < 1e-14);
        let singular = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(lu_det(&singular).unwrap(), 0.0);
    }

    #[test]
    fn mat_serde_round_trip() {
        let a = Mat::from_rows(&[vec![1.0, 2.5], vec![-3.0, 0.0]]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[[1.0,2.5],[-3.0,0.0]]");
        let back: Mat = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
