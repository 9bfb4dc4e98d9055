//! Dense linear-algebra helpers on top of `nalgebra`: orthonormal subspace
//! bases, complements, projector distances, nonnegative least squares and
//! Wolfe's minimum-norm-point algorithm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative singular-value cutoff for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

pub fn concat(a: &[f64], b: &[f64]) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b).copied())
}

/// Orthonormal basis of the column span of `m`, dropping directions whose
/// singular value is below `RANK_TOL * max(1, sigma_max)`.
pub fn orthonormal_span(m: &Matrix) -> Matrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Matrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    Matrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `basis` in `R^ambient`.
pub fn orthogonal_complement(basis: &Matrix, ambient: usize) -> Matrix {
    debug_assert_eq!(basis.nrows(), ambient);
    if basis.ncols() == 0 {
        return Matrix::identity(ambient, ambient);
    }
    let p = Matrix::identity(ambient, ambient) - basis * basis.transpose();
    let eig = SymmetricEigen::new(p);
    let keep: Vec<usize> = (0..ambient).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    Matrix::from_fn(ambient, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Orthonormal basis of `{v : m v = 0}`.
pub fn null_space(m: &Matrix) -> Matrix {
    let row_space = orthonormal_span(&m.transpose());
    orthogonal_complement(&row_space, m.ncols())
}

/// Largest absolute eigenvalue of a symmetric matrix (its spectral norm).
pub fn symmetric_spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// A linear subspace of `R^ambient`, stored by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Subspace spanned by the given columns, which must be linearly independent.
    pub fn from_columns(columns: &Matrix) -> Result<Self> {
        let basis = orthonormal_span(columns);
        if basis.ncols() < columns.ncols() {
            return Err(Error::RankDeficientBasis {
                rank: basis.ncols(),
                columns: columns.ncols(),
            });
        }
        Ok(Subspace { basis })
    }

    /// Span of arbitrary columns; dependent columns are dropped.
    pub fn span_of(columns: &Matrix) -> Self {
        Subspace {
            basis: orthonormal_span(columns),
        }
    }

    pub fn from_vectors(ambient: usize, vectors: &[Vector]) -> Self {
        let m = Matrix::from_fn(ambient, vectors.len(), |r, c| vectors[c][r]);
        Self::span_of(&m)
    }

    /// `{x : <c_i, x> = 0}` for each row `c_i` of `constraints`.
    pub fn from_constraints(constraints: &Matrix) -> Self {
        Subspace {
            basis: null_space(constraints),
        }
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace {
            basis: Matrix::identity(ambient, ambient),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(ambient, 0),
        }
    }

    /// Wraps columns already known to be orthonormal.
    pub(crate) fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, x: &[f64]) -> Vector {
        let coeffs = self.basis.tr_mul(&Vector::from_column_slice(x));
        &self.basis * coeffs
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        x.iter()
            .zip(p.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.ambient(), x.len())?;
        Ok(self.distance(x) <= tol)
    }

    pub fn complement(&self) -> Subspace {
        Subspace {
            basis: orthogonal_complement(&self.basis, self.ambient()),
        }
    }

    /// Spectral norm of the difference of orthogonal projectors; zero iff the
    /// subspaces coincide, and `sin` of the largest principal angle otherwise.
    pub fn distance_to(&self, other: &Subspace) -> Result<f64> {
        check_dim(self.ambient(), other.ambient())?;
        Ok(symmetric_spectral_norm(&(self.projector() - other.projector())))
    }

    pub fn is_subset_of(&self, other: &Subspace, tol: f64) -> bool {
        (0..self.dim()).all(|j| other.distance(self.basis.column(j).as_slice()) <= tol)
    }
}

/// Nonnegative least squares `min ||a x - b||, x >= 0` (Lawson–Hanson active set).
pub fn nnls(a: &Matrix, b: &Vector) -> Vector {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m);
    let mut x = Vector::zeros(n);
    if n == 0 {
        return x;
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let tol = 10.0 * f64::EPSILON * scale * (m.max(n) as f64) * b.amax().max(1.0);
    let mut passive = vec![false; n];

    let solve_passive = |passive: &[bool]| -> Vector {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = Matrix::from_fn(m, idx.len(), |r, c| a[(r, idx[c])]);
        let z_sub = sub
            .svd(true, true)
            .solve(b, 1e-14)
            .expect("svd solve with U and V");
        let mut z = Vector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = z_sub[k];
        }
        z
    };

    for _ in 0..(3 * n + 10) {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        for _ in 0..(3 * n + 10) {
            let z = solve_passive(&passive);
            let bad: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if bad.is_empty() {
                x = z;
                break;
            }
            let alpha = bad
                .iter()
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Minimum-norm point of `conv(points)` by Wolfe's algorithm.
///
/// Returns the point and the convex weights on the input points.
pub fn min_norm_point(points: &[Vector]) -> (Vector, Vec<f64>) {
    assert!(!points.is_empty(), "convex hull of nothing");
    let d = points[0].len();
    let m = points.len();
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-13 * scale;

    let start = (0..m)
        .min_by(|&i, &j| points[i].norm_squared().total_cmp(&points[j].norm_squared()))
        .unwrap();
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    let combo = |active: &[usize], w: &[f64]| -> Vector {
        let mut v = Vector::zeros(d);
        for (k, &i) in active.iter().enumerate() {
            v += &points[i] * w[k];
        }
        v
    };

    for _ in 0..(50 * m + 100) {
        let j = (0..m)
            .min_by(|&i, &k| x.dot(&points[i]).total_cmp(&x.dot(&points[k])))
            .unwrap();
        if x.dot(&points[j]) >= x.norm_squared() - eps || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);

        loop {
            // affine minimizer over the active set
            let k = active.len();
            let mut kkt = Matrix::zeros(k + 1, k + 1);
            for r in 0..k {
                for c in 0..k {
                    kkt[(r, c)] = points[active[r]].dot(&points[active[c]]);
                }
                kkt[(r, k)] = 1.0;
                kkt[(k, r)] = 1.0;
            }
            let mut rhs = Vector::zeros(k + 1);
            rhs[k] = 1.0;
            let sol = kkt
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .expect("svd solve with U and V");
            let alpha: Vec<f64> = (0..k).map(|i| sol[i]).collect();

            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                x = combo(&active, &lambda);
                break;
            }
            let theta = (0..k)
                .filter(|&i| alpha[i] <= 1e-14)
                .map(|i| {
                    let den = lambda[i] - alpha[i];
                    if den > 0.0 {
                        lambda[i] / den
                    } else {
                        0.0
                    }
                })
                .fold(1.0f64, f64::min);
            for i in 0..k {
                lambda[i] += theta * (alpha[i] - lambda[i]);
            }
            let mut keep_active = Vec::with_capacity(k);
            let mut keep_lambda = Vec::with_capacity(k);
            for i in 0..k {
                if lambda[i] > 1e-14 {
                    keep_active.push(active[i]);
                    keep_lambda.push(lambda[i]);
                }
            }
            if keep_active.is_empty() {
                keep_active.push(active[k - 1]);
                keep_lambda.push(1.0);
            }
            let total: f64 = keep_lambda.iter().sum();
            keep_lambda.iter_mut().for_each(|l| *l /= total);
            active = keep_active;
            lambda = keep_lambda;
        }
    }

    let mut weights = vec![0.0; m];
    for (k, &i) in active.iter().enumerate() {
        weights[i] += lambda[k];
    }
    (x, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::assert_close;

    #[test]
    fn complement_dimensions_add_up() {
        let m = Matrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 2.0, 0.0]);
        let s = Subspace::from_columns(&m).unwrap();
        let c = s.complement();
        assert_eq!(s.dim() + c.dim(), 4);
        assert!((s.basis().transpose() * c.basis()).amax() < 1e-12);
    }

    #[test]
    fn rank_deficient_columns_rejected() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert_eq!(
            Subspace::from_columns(&m),
            Err(Error::RankDeficientBasis { rank: 1, columns: 2 })
        );
    }

    #[test]
    fn null_space_of_sum_constraint() {
        let ones = Matrix::from_element(1, 5, 1.0);
        let ns = null_space(&ones);
        assert_eq!(ns.ncols(), 4);
        assert!((ones * ns).amax() < 1e-12);
    }

    #[test]
    fn nnls_matches_unconstrained_when_interior() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert_close(x[0], 1.0, 1e-10);
        assert_close(x[1], 2.0, 1e-10);
    }

    #[test]
    fn nnls_clamps_negative_direction() {
        let a = Matrix::identity(2, 2);
        let b = Vector::from_vec(vec![-1.0, 2.0]);
        let x = nnls(&a, &b);
        assert_eq!(x[0], 0.0);
        assert_close(x[1], 2.0, 1e-12);
    }

    #[test]
    fn min_norm_point_of_square_off_origin() {
        // square [1,2]x[-1,1]: closest point to the origin is (1, 0)
        let pts = [(1.0, -1.0), (2.0, -1.0), (2.0, 1.0), (1.0, 1.0)]
            .iter()
            .map(|&(a, b)| Vector::from_vec(vec![a, b]))
            .collect::<Vec<_>>();
        let (x, w) = min_norm_point(&pts);
        assert_close(x[0], 1.0, 1e-12);
        assert_close(x[1], 0.0, 1e-12);
        assert_close(w.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn subspace_distance_detects_difference() {
        let a = Subspace::from_vectors(2, &[unit(2, 0)]);
        let b = Subspace::from_vectors(2, &[unit(2, 1)]);
        assert_close(a.distance_to(&b).unwrap(), 1.0, 1e-12);
        assert_close(a.distance_to(&a).unwrap(), 0.0, 1e-12);
    }
}
