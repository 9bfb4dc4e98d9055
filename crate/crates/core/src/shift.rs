//! Leading `n × n` sections of the lower-triangular "half-diagonal" operator
//! and its transpose.
//!
//! `(Tx)_k = Σ_{i<k} x_i + ½ x_k` on the zero-sum hyperplane, and
//! `(Sx)_k = ½ x_k + Σ_{i>k} x_i` with `S = Tᵀ`. Since `T + S = 𝟙𝟙ᵀ`,
//! `<Tx, x> = <Sx, x> = ½ (Σ x_i)²`, so `T` is skew on the hyperplane while
//! `S` is monotone but not skew.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{unit, Matrix, Subspace, Vector};
use crate::numerics::{sum2, CompensatedSum};
use crate::relations::LinearRelation;
use crate::sets::random_unit;

pub const MAX_TRUNCATION: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedShift {
    n: usize,
    t: Matrix,
    s: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointAgreement {
    pub n: usize,
    pub adjoint_graph_dim: usize,
    /// Spectral distance between the computed adjoint graph and `{(y, Sy + α𝟙)}`.
    pub subspace_distance: f64,
    /// `(e1, Se1)` lies in the computed adjoint graph.
    pub selection_in_adjoint: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

impl TruncatedShift {
    pub fn build(n: usize) -> Result<Self> {
        if !(2..=MAX_TRUNCATION).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "truncation size must lie in [2, {MAX_TRUNCATION}], got {n}"
            )));
        }
        let t = Matrix::from_fn(n, n, |k, i| match i.cmp(&k) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        });
        let s = t.transpose();
        Ok(TruncatedShift { n, t, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    /// `Tx` by prefix sums.
    pub fn apply_t(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.n, x.len())?;
        let mut out = Vector::zeros(self.n);
        let mut prefix = 0.0;
        for k in 0..self.n {
            out[k] = prefix + 0.5 * x[k];
            prefix += x[k];
        }
        Ok(out)
    }

    /// `Sx` by suffix sums.
    pub fn apply_s(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.n, x.len())?;
        let mut out = Vector::zeros(self.n);
        let mut suffix = 0.0;
        for k in (0..self.n).rev() {
            out[k] = 0.5 * x[k] + suffix;
            suffix += x[k];
        }
        Ok(out)
    }

    pub fn ones(&self) -> Vector {
        Vector::from_element(self.n, 1.0)
    }

    /// The zero-sum hyperplane.
    pub fn domain(&self) -> Subspace {
        Subspace::from_constraints(&Matrix::from_element(1, self.n, 1.0))
    }

    /// `{(x, Tx) : Σ x_i = 0}`.
    pub fn relation(&self) -> LinearRelation {
        LinearRelation::from_matrix_with_constraints(&self.t, &Matrix::from_element(1, self.n, 1.0))
            .expect("hyperplane basis has full rank")
    }

    /// The canonical single-valued selection `y ↦ Sy` of the adjoint.
    pub fn adjoint_selection(&self) -> LinearRelation {
        LinearRelation::from_matrix(&self.s, None).expect("identity domain")
    }

    /// `{(y, Sy + α𝟙) : y ∈ R^n, α ∈ R}`.
    pub fn expected_adjoint_graph(&self) -> Subspace {
        let n = self.n;
        let mut g = Matrix::zeros(2 * n, n + 1);
        g.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
        g.view_mut((n, 0), (n, n)).copy_from(&self.s);
        g.view_mut((n, n), (n, 1)).fill(1.0);
        Subspace::from_columns(&g).expect("identity block has full rank")
    }

    /// `(<Sx, x>, ½ (Σ x_i)²)`, the left side summed exactly-rounded over
    /// the `n(n+1)/2` products `S_ki x_k x_i`.
    pub fn pairing_identity(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.n, x.len())?;
        let mut acc = CompensatedSum::new();
        for k in 0..self.n {
            acc.add_product(0.5 * x[k], x[k]);
            for i in k + 1..self.n {
                acc.add_product(x[k], x[i]);
            }
        }
        let s = sum2(x);
        Ok((acc.value(), 0.5 * s * s))
    }

    /// `<Tx, x>`; equals the left side of [`Self::pairing_identity`] since
    /// the quadratic forms of `T` and `S` coincide.
    pub fn t_pairing(&self, x: &[f64]) -> Result<f64> {
        Ok(self.pairing_identity(x)?.0)
    }

    pub fn adjoint_agreement(&self) -> AdjointAgreement {
        let adj = self.relation().adjoint();
        let expected = self.expected_adjoint_graph();
        let dist = adj
            .graph()
            .distance_to(&expected)
            .expect("same ambient dimension");
        let e1 = unit(self.n, 0);
        let se1 = self.apply_s(e1.as_slice()).expect("dimension n");
        let member = adj.contains(e1.as_slice(), se1.as_slice(), 1e-10).expect("dimension n");
        AdjointAgreement {
            n: self.n,
            adjoint_graph_dim: adj.graph_dim(),
            subspace_distance: dist,
            selection_in_adjoint: member,
            passed: dist <= 1e-10 && member && adj.graph_dim() == self.n + 1,
        }
    }
}

/// Max error of `<Sx, x> = ½ (Σ x_i)²` over random unit-scale `x`, per `n`.
pub fn identity_sweep<R: Rng + ?Sized>(ns: &[usize], samples: usize, rng: &mut R) -> Result<Vec<SweepRow>> {
    ns.iter()
        .map(|&n| {
            let ts = TruncatedShift::build(n)?;
            let mut abs = 0.0f64;
            let mut rel = 0.0f64;
            for _ in 0..samples {
                let x = random_unit(n, rng) * rng.random_range(0.1..10.0);
                let (l, r) = ts.pairing_identity(x.as_slice())?;
                abs = abs.max((l - r).abs());
                rel = rel.max((l - r).abs() / r.abs().max(f64::MIN_POSITIVE));
            }
            Ok(SweepRow {
                n,
                max_abs_error: abs,
                max_rel_error: rel,
            })
        })
        .collect()
}

/// Max of `|<Tx, x>|` over random `x` projected onto the zero-sum hyperplane.
pub fn skew_sweep<R: Rng + ?Sized>(ns: &[usize], samples: usize, rng: &mut R) -> Result<Vec<SweepRow>> {
    ns.iter()
        .map(|&n| {
            let ts = TruncatedShift::build(n)?;
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let mut x = random_unit(n, rng) * rng.random_range(0.1..10.0);
                let mean = sum2(x.as_slice()) / n as f64;
                x.add_scalar_mut(-mean);
                worst = worst.max(ts.t_pairing(x.as_slice())?.abs());
            }
            Ok(SweepRow {
                n,
                max_abs_error: worst,
                max_rel_error: worst,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{assert_close, rng};

    #[test]
    fn two_by_two_pattern() {
        let ts = TruncatedShift::build(2).unwrap();
        assert_eq!(ts.t(), &Matrix::from_row_slice(2, 2, &[0.5, 0.0, 1.0, 0.5]));
        assert_eq!(ts.s(), &Matrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]));
        assert!(TruncatedShift::build(1).is_err());
    }

    #[test]
    fn hand_evaluated_three_dimensional_case() {
        let ts = TruncatedShift::build(3).unwrap();
        let x = [1.0, -2.0, 1.0];
        let tx = ts.apply_t(&x).unwrap();
        assert_eq!(tx.as_slice(), &[0.5, 0.0, -0.5]);
        assert_eq!(tx.dot(&Vector::from_column_slice(&x)), 0.0);
        assert_eq!(&ts.t * Vector::from_column_slice(&x), tx);
    }

    #[test]
    fn s_of_first_unit_vector() {
        for n in [2, 5, 64] {
            let ts = TruncatedShift::build(n).unwrap();
            let se1 = ts.apply_s(unit(n, 0).as_slice()).unwrap();
            assert_eq!(se1, unit(n, 0) * 0.5);
        }
    }

    #[test]
    fn pairing_identity_examples() {
        let ts = TruncatedShift::build(4).unwrap();
        assert_eq!(ts.pairing_identity(unit(4, 0).as_slice()).unwrap(), (0.5, 0.5));
        assert_eq!(ts.pairing_identity(&[1.0, -1.0, 2.0, -2.0]).unwrap(), (0.0, 0.0));
        // direct matrix evaluation for the all-ones vector: ½·4² = 8
        let ones = ts.ones();
        let direct = (&ts.s * &ones).dot(&ones);
        assert_eq!(direct, 8.0);
        assert_eq!(ts.pairing_identity(ones.as_slice()).unwrap(), (8.0, 8.0));
    }

    #[test]
    fn t_plus_s_is_all_ones() {
        for n in [2, 3, 17] {
            let ts = TruncatedShift::build(n).unwrap();
            assert_eq!(&ts.t + &ts.s, Matrix::from_element(n, n, 1.0));
        }
    }

    #[test]
    fn adjoint_agreement_small_cases() {
        for n in [2, 4] {
            let rep = TruncatedShift::build(n).unwrap().adjoint_agreement();
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.adjoint_graph_dim, n + 1);
        }
    }

    /// Independent oracle for n = 2: the adjoint graph is the null space of
    /// the 1×4 orthogonality system against the single graph direction.
    #[test]
    fn two_dimensional_adjoint_by_hand() {
        let ts = TruncatedShift::build(2).unwrap();
        // gra T is spanned by (1, -1, T(1,-1)) = (1, -1, 0.5, 0.5)
        // (x, x*) ∈ gra T* iff <(x*, -x), (1, -1, 0.5, 0.5)> = 0
        let g = [1.0, -1.0, 0.5, 0.5];
        let row = Matrix::from_row_slice(1, 4, &[-g[2], -g[3], g[0], g[1]]);
        let oracle = Subspace::from_constraints(&row);
        let computed = ts.relation().adjoint();
        assert!(computed.graph().distance_to(&oracle).unwrap() <= 1e-12);
    }

    #[test]
    fn classification_of_both_sides() {
        let ts = TruncatedShift::build(8).unwrap();
        let a = ts.relation().classify();
        assert!(a.monotone && a.skew && !a.maximal);
        assert_eq!(a.graph_dim, 7);
        let s = ts.adjoint_selection().classify();
        assert!(s.monotone && s.maximal && !s.skew);
        // the full truncated adjoint contains (𝟙, S𝟙 - n𝟙), whose pairing is -n²/2
        let full = ts.relation().adjoint().classify();
        assert!(!full.monotone);
        let ones = ts.ones();
        let y = ts.apply_s(ones.as_slice()).unwrap() - &ones * 8.0;
        assert_close(ones.dot(&y), -32.0, 1e-12);
    }

    #[test]
    fn sweeps_meet_their_bounds() {
        let mut r = rng(21);
        let ns = [2, 4, 8, 16, 32, 64, 128];
        for row in identity_sweep(&ns, 200, &mut r).unwrap() {
            assert!(row.max_rel_error <= 1e-12, "{row:?}");
        }
        for row in skew_sweep(&ns, 200, &mut r).unwrap() {
            assert!(row.max_abs_error <= 1e-12, "{row:?}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn s_pairing_positive_off_hyperplane(xs in proptest::collection::vec(-10.0f64..10.0, 2..40)) {
                let n = xs.len();
                let ts = TruncatedShift::build(n).unwrap();
                let s: f64 = sum2(&xs);
                prop_assume!(s.abs() > 1e-6);
                let (lhs, rhs) = ts.pairing_identity(&xs).unwrap();
                prop_assert!(lhs > 0.0);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }

            #[test]
            fn prefix_and_suffix_forms_match_matrices(xs in proptest::collection::vec(-10.0f64..10.0, 2..20)) {
                let ts = TruncatedShift::build(xs.len()).unwrap();
                let x = Vector::from_column_slice(&xs);
                prop_assert!((ts.apply_t(&xs).unwrap() - &ts.t * &x).amax() <= 1e-12);
                prop_assert!((ts.apply_s(&xs).unwrap() - &ts.s * &x).amax() <= 1e-12);
            }
        }
    }
}
