//! Finite-dimensional convex analysis: extended reals, convex sets and
//! functions, Fenchel conjugation, linear relations, Fitzpatrick functions
//! and partial inf-convolution, plus executable counterexample suites for
//! "bigger conjugate" inequalities.

pub mod error;
pub mod counterexamples;
pub mod extreal;
pub mod fitzpatrick;
pub mod linalg;
pub mod numerics;
pub mod functions;
pub mod relations;
pub mod sets;
pub mod shift;

pub use error::{Error, Result};
pub use extreal::{ExtReal, NegInf, PosInf};
pub use linalg::{Matrix, Subspace, Vector};
pub use functions::{ConvexFunction, GridFunction};
pub use sets::{ConvexSet, NormalCone};

/// Deterministic generator used by every sampler in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// `(0..n).map(f)`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(test)]
pub(crate) mod test_util {
    pub fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    pub fn rng(seed: u64) -> crate::Rng {
        crate::seeded_rng(seed)
    }
}
