//! Proper convex functions on `R^d` as a small composable algebra.

mod grid;

pub use grid::{
    axis, biconjugate_check, coord, legendre_1d, legendre_1d_brute, BiconjugateReport, GridFunction,
    DEFAULT_BOX_RADIUS, DEFAULT_N_1D, DEFAULT_N_2D,
};

use crate::error::{check_dim, Error, Result};
use crate::extreal::ExtReal;
use crate::linalg::{dot, norm, Matrix, Vector};
use crate::sets::ConvexSet;

/// Membership slack used when an indicator is evaluated.
pub const INDICATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction {
    Indicator(ConvexSet),
    Support(ConvexSet),
    /// `<a, x> + b`
    Linear { a: Vector, b: f64 },
    /// `½ <Qx, x> + <a, x> + b` with `Q` symmetric positive semidefinite.
    Quadratic { q: Matrix, a: Vector, b: f64 },
    /// `scale · ||x||` on `R^dim`.
    Norm { dim: usize, scale: f64 },
    Sum(Box<ConvexFunction>, Box<ConvexFunction>),
    /// `(x, y) ↦ f(x) + g(y)` on the product space.
    SeparableSum(Box<ConvexFunction>, Box<ConvexFunction>),
    /// `x ↦ f(x - translation)`.
    Shifted { f: Box<ConvexFunction>, translation: Vector },
    Grid(GridFunction),
}

impl ConvexFunction {
    pub fn quadratic(q: Matrix, a: Vector, b: f64) -> Result<Self> {
        check_dim(q.nrows(), q.ncols())?;
        check_dim(q.nrows(), a.len())?;
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidArgument("quadratic form must be symmetric".into()));
        }
        let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
        if q.nrows() > 0 && min_eig < -1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!("quadratic form has eigenvalue {min_eig}")));
        }
        Ok(ConvexFunction::Quadratic { q, a, b })
    }

    pub fn sum(f: ConvexFunction, g: ConvexFunction) -> Result<Self> {
        check_dim(f.dim(), g.dim())?;
        Ok(ConvexFunction::Sum(Box::new(f), Box::new(g)))
    }

    pub fn separable(f: ConvexFunction, g: ConvexFunction) -> Self {
        ConvexFunction::SeparableSum(Box::new(f), Box::new(g))
    }

    pub fn shifted(f: ConvexFunction, translation: Vector) -> Result<Self> {
        check_dim(f.dim(), translation.len())?;
        Ok(ConvexFunction::Shifted {
            f: Box::new(f),
            translation,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::Indicator(c) | ConvexFunction::Support(c) => c.dim(),
            ConvexFunction::Linear { a, .. } | ConvexFunction::Quadratic { a, .. } => a.len(),
            ConvexFunction::Norm { dim, .. } => *dim,
            ConvexFunction::Sum(f, _) => f.dim(),
            ConvexFunction::SeparableSum(f, g) => f.dim() + g.dim(),
            ConvexFunction::Shifted { f, .. } => f.dim(),
            ConvexFunction::Grid(g) => g.dim(),
        }
    }

    /// Pointwise value. Grid functions are `+inf` outside their box.
    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim(), x.len())?;
        match self {
            ConvexFunction::Indicator(c) => c.indicator(x, INDICATOR_TOL),
            ConvexFunction::Support(c) => c.support(x),
            ConvexFunction::Linear { a, b } => Ok(ExtReal::Finite(dot(a.as_slice(), x) + b)),
            ConvexFunction::Quadratic { q, a, b } => {
                let xv = Vector::from_column_slice(x);
                Ok(ExtReal::Finite(0.5 * (q * &xv).dot(&xv) + a.dot(&xv) + b))
            }
            ConvexFunction::Norm { scale, .. } => Ok(ExtReal::Finite(scale * norm(x))),
            ConvexFunction::Sum(f, g) => f.eval(x)?.checked_add(g.eval(x)?),
            ConvexFunction::SeparableSum(f, g) => {
                let (u, v) = x.split_at(f.dim());
                f.eval(u)?.checked_add(g.eval(v)?)
            }
            ConvexFunction::Shifted { f, translation } => {
                let y: Vec<f64> = x.iter().zip(translation.iter()).map(|(a, t)| a - t).collect();
                f.eval(&y)
            }
            ConvexFunction::Grid(g) => g.eval(x),
        }
    }

    /// Exact Fenchel conjugate by rule; `NoClosedForm` when none applies.
    pub fn conjugate_closed_form(&self) -> Result<ConvexFunction> {
        let no_rule = |what: &str| Err(Error::NoClosedForm(what.to_string()));
        match self {
            ConvexFunction::Indicator(c) => Ok(ConvexFunction::Support(c.clone())),
            ConvexFunction::Support(c) => Ok(ConvexFunction::Indicator(c.clone())),
            ConvexFunction::Linear { a, b } => {
                let point = ConvexFunction::Indicator(ConvexSet::Singleton(a.clone()));
                if *b == 0.0 {
                    Ok(point)
                } else {
                    ConvexFunction::sum(
                        point,
                        ConvexFunction::Linear {
                            a: Vector::zeros(a.len()),
                            b: -b,
                        },
                    )
                }
            }
            ConvexFunction::Quadratic { q, a, b } => {
                let Some(chol) = q.clone().cholesky() else {
                    return no_rule("quadratic with singular form");
                };
                let qinv = chol.inverse();
                let qa = &qinv * a;
                ConvexFunction::quadratic(qinv, -&qa, 0.5 * a.dot(&qa) - b)
            }
            ConvexFunction::Norm { dim, scale } => Ok(ConvexFunction::Indicator(ConvexSet::ball(
                Vector::zeros(*dim),
                *scale,
            )?)),
            ConvexFunction::SeparableSum(f, g) => Ok(ConvexFunction::separable(
                f.conjugate_closed_form()?,
                g.conjugate_closed_form()?,
            )),
            ConvexFunction::Shifted { f, translation } => ConvexFunction::sum(
                f.conjugate_closed_form()?,
                ConvexFunction::Linear {
                    a: translation.clone(),
                    b: 0.0,
                },
            ),
            ConvexFunction::Sum(..) => no_rule("sum of functions"),
            ConvexFunction::Grid(_) => no_rule("grid function"),
        }
    }

    /// Discrete conjugate on `[-R, R]^d` from the grid samples of `self`.
    pub fn conjugate_grid(&self, box_radius: f64, n: usize) -> Result<GridFunction> {
        GridFunction::sample(self, box_radius, n)?.conjugate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreal::PosInf;
    use crate::linalg::unit;
    use crate::test_util::{assert_close, rng};
    use rand::Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn interval(a: f64, b: f64) -> ConvexSet {
        ConvexSet::segment(v(&[a]), v(&[b])).unwrap()
    }

    #[test]
    fn eval_examples() {
        let ind = ConvexFunction::Indicator(ConvexSet::unit_ball(2));
        assert_eq!(ind.eval(&[0.3, 0.4]).unwrap(), ExtReal::ZERO);
        assert_eq!(ind.eval(&[2.0, 0.0]).unwrap(), PosInf);
        let sup = ConvexFunction::Support(ConvexSet::unit_ball(2));
        assert_eq!(sup.eval(&[3.0, 4.0]).unwrap(), ExtReal::Finite(5.0));
        assert_eq!(
            sup.eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn conjugation_rules() {
        let c = ConvexSet::unit_ball(2);
        assert_eq!(
            ConvexFunction::Indicator(c.clone()).conjugate_closed_form().unwrap(),
            ConvexFunction::Support(c)
        );
        let lin = ConvexFunction::Linear { a: v(&[1.0, 2.0]), b: 0.0 };
        assert_eq!(
            lin.conjugate_closed_form().unwrap(),
            ConvexFunction::Indicator(ConvexSet::Singleton(v(&[1.0, 2.0])))
        );
        let sum = ConvexFunction::sum(lin.clone(), lin).unwrap();
        assert!(matches!(sum.conjugate_closed_form(), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn quadratic_conjugate_matches_formula() {
        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = ConvexFunction::quadratic(q.clone(), v(&[1.0, -1.0]), 0.25).unwrap();
        let g = f.conjugate_closed_form().unwrap();
        // sup_x <x,y> - f(x) is attained at Qx = y - a
        let y = v(&[0.7, -0.2]);
        let x = q.clone().lu().solve(&(&y - v(&[1.0, -1.0]))).unwrap();
        let direct = x.dot(&y) - f.eval(x.as_slice()).unwrap().to_f64();
        assert_close(g.eval(y.as_slice()).unwrap().to_f64(), direct, 1e-12);
    }

    #[test]
    fn separable_indicator_support_against_grid() {
        let c = interval(-1.0, 1.0);
        let f = ConvexFunction::separable(ConvexFunction::Indicator(c.clone()), ConvexFunction::Support(c));
        let closed = f.conjugate_closed_form().unwrap();
        let r = 4.0;
        let n = 65;
        let grid = f.conjugate_grid(r, n).unwrap();
        let h = grid.spacing();
        let a = grid.axis();
        let mut compared = 0;
        for i in 0..n {
            for j in 0..n {
                let (u, w) = (a[i], a[j]);
                if u.abs() > r / 2.0 || w.abs() > r / 2.0 {
                    continue;
                }
                let exact = closed.eval(&[u, w]).unwrap();
                // compare where the closed form is finite with finite neighbors
                if exact.is_finite() && w.abs() + h <= 1.0 {
                    assert!((grid.at(&[i, j]).to_f64() - exact.to_f64()).abs() <= 2.0 * h);
                    compared += 1;
                }
            }
        }
        assert!(compared > 100);
    }

    #[test]
    fn shifted_conjugate_adds_linear_term() {
        let f = ConvexFunction::shifted(ConvexFunction::Norm { dim: 2, scale: 1.0 }, v(&[1.0, 2.0])).unwrap();
        let g = f.conjugate_closed_form().unwrap();
        assert_eq!(g.eval(&[0.6, 0.8]).unwrap(), ExtReal::Finite(0.6 + 1.6));
        assert_eq!(g.eval(&[2.0, 0.0]).unwrap(), PosInf);
    }

    fn fixtures() -> Vec<ConvexFunction> {
        vec![
            ConvexFunction::Indicator(ConvexSet::unit_ball(2)),
            ConvexFunction::Support(ConvexSet::boxed(v(&[-1.0, 0.0]), v(&[0.5, 2.0])).unwrap()),
            ConvexFunction::Norm { dim: 2, scale: 1.5 },
            ConvexFunction::quadratic(Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0]), v(&[0.1, 0.0]), -1.0).unwrap(),
            ConvexFunction::separable(
                ConvexFunction::Indicator(interval(0.0, 1.0)),
                ConvexFunction::Support(interval(0.0, 1.0)),
            ),
            ConvexFunction::Linear { a: unit(2, 0), b: 0.5 },
        ]
    }

    #[test]
    fn fenchel_young_closed_form() {
        let mut r = rng(9);
        for f in fixtures() {
            let g = f.conjugate_closed_form().unwrap();
            for _ in 0..2000 {
                let x: Vec<f64> = (0..2).map(|_| r.random_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| r.random_range(-2.0..2.0)).collect();
                let lhs = f.eval(&x).unwrap().checked_add(g.eval(&y).unwrap()).unwrap();
                assert!(lhs >= ExtReal::Finite(dot(&x, &y) - 1e-9), "{f:?}");
            }
        }
    }

    #[test]
    fn fenchel_young_grid() {
        for f in fixtures() {
            let n = 17;
            let g = f.conjugate_grid(2.0, n).unwrap();
            let s = GridFunction::sample(&f, 2.0, n).unwrap();
            let a = g.axis();
            for i in 0..n * n {
                for k in 0..n * n {
                    let x = [a[i / n], a[i % n]];
                    let y = [a[k / n], a[k % n]];
                    let lhs = s.values()[i].checked_add(g.values()[k]).unwrap();
                    assert!(lhs >= ExtReal::Finite(dot(&x, &y) - 1e-9));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn convex_values(xs: &[f64], quad: f64, kink: f64, slope: f64, lo: f64, hi: f64) -> Vec<ExtReal> {
            xs.iter()
                .map(|&x| {
                    if x < lo || x > hi {
                        PosInf
                    } else {
                        ExtReal::Finite(quad * x * x + slope * (x - kink).abs() + 0.1 * x)
                    }
                })
                .collect()
        }

        proptest! {
            #[test]
            fn fast_equals_brute(
                quad in 0.0f64..3.0, kink in -2.0f64..2.0, slope in 0.0f64..2.0,
                lo in -4.0f64..0.0, hi in 0.1f64..4.0,
            ) {
                let xs = axis(4.0, 129);
                let f = convex_values(&xs, quad, kink, slope, lo, hi);
                prop_assume!(f.iter().any(|v| v.is_finite()));
                prop_assert_eq!(legendre_1d(&xs, &f, &xs).unwrap(), legendre_1d_brute(&xs, &f, &xs).unwrap());
            }

            #[test]
            fn conjugation_reverses_order(
                quad in 0.0f64..3.0, kink in -2.0f64..2.0, slope in 0.0f64..2.0, bump in 0.0f64..1.0,
            ) {
                let xs = axis(4.0, 65);
                let f = convex_values(&xs, quad, kink, slope, -4.0, 4.0);
                let g: Vec<ExtReal> = f.iter().zip(&xs).map(|(v, x)| v.plus(bump * x.abs())).collect();
                let fc = legendre_1d(&xs, &f, &xs).unwrap();
                let gc = legendre_1d(&xs, &g, &xs).unwrap();
                for (a, b) in fc.iter().zip(&gc) {
                    prop_assert!(a >= b);
                }
            }
        }
    }
}
