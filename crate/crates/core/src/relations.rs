//! Linear relations `A: R^n ⇉ R^n` stored as graph subspaces of `R^{2n}`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{null_space, spectral_norm, Matrix, Subspace, Vector, RANK_TOL};
use crate::sets::ConvexSet;

/// Eigenvalue slack for the monotone / skew decisions.
pub const FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    n: usize,
    graph: Subspace,
    dom: Subspace,
    ran: Subspace,
}

/// The set `Ax`.
#[derive(Debug, Clone, PartialEq)]
pub enum Fiber {
    Empty,
    Point(Vector),
    /// `point + span(lineality)`, with `point` the minimum-norm element.
    Affine { point: Vector, lineality: Subspace },
}

impl Fiber {
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            Fiber::Empty => false,
            Fiber::Point(p) => (p - Vector::from_column_slice(v)).norm() <= tol,
            Fiber::Affine { point, lineality } => {
                let d = Vector::from_column_slice(v) - point;
                lineality.distance(d.as_slice()) <= tol
            }
        }
    }

    pub fn point(&self) -> Option<&Vector> {
        match self {
            Fiber::Empty => None,
            Fiber::Point(p) | Fiber::Affine { point: p, .. } => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    /// Two graph points with `<x - y, x* - y*> < 0`.
    NonMonotonePair {
        x: Vec<f64>,
        xstar: Vec<f64>,
        y: Vec<f64>,
        ystar: Vec<f64>,
        pairing: f64,
    },
    /// A point off the graph that is monotonically related to it.
    RelatedPointOffGraph {
        x: Vec<f64>,
        xstar: Vec<f64>,
        distance_to_graph: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    pub skew: bool,
    pub symmetric: bool,
    pub maximal: bool,
    pub graph_dim: usize,
    /// Extreme eigenvalues of the pairing form restricted to the graph.
    pub form_min_eig: f64,
    pub form_max_eig: f64,
    pub witness: Option<Witness>,
}

fn split(n: usize, v: &Vector) -> (Vector, Vector) {
    (v.rows(0, n).into_owned(), v.rows(n, n).into_owned())
}

impl LinearRelation {
    pub fn from_graph(n: usize, graph: Subspace) -> Result<Self> {
        check_dim(2 * n, graph.ambient())?;
        let b = graph.basis();
        let dom = Subspace::span_of(&b.rows(0, n).into_owned());
        let ran = Subspace::span_of(&b.rows(n, n).into_owned());
        Ok(LinearRelation { n, graph, dom, ran })
    }

    /// `{(x, Mx) : x ∈ span(domain)}`; the whole space when `domain` is `None`.
    pub fn from_matrix(m: &Matrix, domain: Option<&Matrix>) -> Result<Self> {
        let n = m.nrows();
        check_dim(n, m.ncols())?;
        let d = match domain {
            Some(d) => {
                check_dim(n, d.nrows())?;
                d.clone()
            }
            None => Matrix::identity(n, n),
        };
        let mut g = Matrix::zeros(2 * n, d.ncols());
        g.rows_mut(0, n).copy_from(&d);
        g.rows_mut(n, n).copy_from(&(m * &d));
        LinearRelation::from_graph(n, Subspace::from_columns(&g)?)
    }

    /// `{(x, Mx) : Kx = 0}` for constraint rows `K`.
    pub fn from_matrix_with_constraints(m: &Matrix, constraints: &Matrix) -> Result<Self> {
        check_dim(m.nrows(), constraints.ncols())?;
        let dom = Subspace::from_constraints(constraints);
        LinearRelation::from_matrix(m, Some(dom.basis()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn domain(&self) -> &Subspace {
        &self.dom
    }

    pub fn range(&self) -> &Subspace {
        &self.ran
    }

    /// `A0 = {x* : (0, x*) ∈ gra A}`.
    pub fn multivalued_part(&self) -> Subspace {
        let b = self.graph.basis();
        let top = b.rows(0, self.n).into_owned();
        let ns = null_space(&top);
        Subspace::span_of(&(b.rows(self.n, self.n) * ns))
    }

    pub fn is_single_valued(&self) -> bool {
        self.multivalued_part().dim() == 0
    }

    /// Top and bottom blocks of the graph basis.
    fn blocks(&self) -> (Matrix, Matrix) {
        let b = self.graph.basis();
        (b.rows(0, self.n).into_owned(), b.rows(self.n, self.n).into_owned())
    }

    /// `gra A* = {(x, x*) : (x*, -x) ⊥ gra A}`: complement, then `(w1, w2) ↦ (-w2, w1)`.
    pub fn adjoint(&self) -> LinearRelation {
        let n = self.n;
        let k = self.graph.complement();
        let w = k.basis();
        let mut b = Matrix::zeros(2 * n, w.ncols());
        b.rows_mut(0, n).copy_from(&(-w.rows(n, n)));
        b.rows_mut(n, n).copy_from(&w.rows(0, n));
        LinearRelation::from_graph(n, Subspace::from_orthonormal(b)).expect("dimensions match")
    }

    /// `gra(-A)`.
    pub fn negated(&self) -> LinearRelation {
        let n = self.n;
        let mut b = self.graph.basis().clone();
        b.rows_mut(n, n).neg_mut();
        LinearRelation::from_graph(n, Subspace::from_orthonormal(b)).expect("dimensions match")
    }

    pub fn contains(&self, x: &[f64], xstar: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, xstar.len())?;
        let p: Vec<f64> = x.iter().chain(xstar).copied().collect();
        self.graph.contains(&p, tol)
    }

    pub fn distance_to_graph(&self, x: &[f64], xstar: &[f64]) -> f64 {
        let p: Vec<f64> = x.iter().chain(xstar).copied().collect();
        self.graph.distance(&p)
    }

    /// Symmetric part of `Btᵀ Bb`: the pairing form in graph coordinates.
    fn pairing_form(&self) -> Matrix {
        let (t, b) = self.blocks();
        let m = t.transpose() * b;
        (&m + m.transpose()) * 0.5
    }

    /// Exact classification from the spectrum of the pairing form on the graph.
    pub fn classify(&self) -> MonotonicityReport {
        let n = self.n;
        let k = self.graph_dim();
        let form = self.pairing_form();
        let (lo, hi, lo_vec) = if k == 0 {
            (0.0, 0.0, None)
        } else {
            let eig = form.symmetric_eigen();
            let imin = eig.eigenvalues.imin();
            let imax = eig.eigenvalues.imax();
            (
                eig.eigenvalues[imin],
                eig.eigenvalues[imax],
                Some(eig.eigenvectors.column(imin).into_owned()),
            )
        };
        let monotone = lo >= -FORM_TOL;
        let skew = monotone && hi <= FORM_TOL;
        let symmetric = self.graph.is_subset_of(self.adjoint().graph(), 1e-9);
        let maximal = monotone && k == n;
        let witness = if !monotone {
            let c = lo_vec.expect("nonempty graph");
            let p = self.graph.basis() * c;
            let (x, xs) = split(n, &p);
            Some(Witness::NonMonotonePair {
                pairing: x.dot(&xs),
                x: x.as_slice().to_vec(),
                xstar: xs.as_slice().to_vec(),
                y: vec![0.0; n],
                ystar: vec![0.0; n],
            })
        } else if k < n {
            self.related_point_off_graph()
        } else {
            None
        };
        MonotonicityReport {
            monotone,
            skew,
            symmetric,
            maximal,
            graph_dim: k,
            form_min_eig: lo,
            form_max_eig: hi,
            witness,
        }
    }

    /// For a monotone graph of dimension `< n`: a point of `gra(-A*)` with
    /// nonnegative pairing that lies off `gra A`. Such a point is
    /// monotonically related to every graph point because the cross terms
    /// vanish on `gra(-A*)`.
    fn related_point_off_graph(&self) -> Option<Witness> {
        let n = self.n;
        let lc = self.adjoint().negated();
        let (t, b) = lc.blocks();
        let m = t.transpose() * &b;
        let form = (&m + m.transpose()) * 0.5;
        let eig = form.symmetric_eigen();
        let imax = eig.eigenvalues.imax();
        let lam = eig.eigenvalues[imax];
        let basis = lc.graph.basis();
        let u = basis * eig.eigenvectors.column(imax);
        // a direction of gra(-A*) orthogonal to gra A
        let proj_out = Matrix::identity(2 * n, 2 * n) - self.graph.projector();
        let w_space = Subspace::span_of(&(&proj_out * basis));
        let mut cand = u.clone();
        if self.graph.distance(u.as_slice()) <= 1e-8 && w_space.dim() > 0 {
            let w = w_space.basis().column(0).into_owned();
            let pair = |v: &Vector| {
                let (x, xs) = split(n, v);
                x.dot(&xs)
            };
            let cross = 0.5 * (pair(&(&u + &w)) - pair(&u) - pair(&w));
            let qw = pair(&w);
            let s = (lam / (4.0 * cross.abs() + 2.0 * qw.abs() + 1e-300)).min(1.0);
            let sign = if cross >= 0.0 { 1.0 } else { -1.0 };
            cand = &u + w * (sign * s);
        }
        let (x, xs) = split(n, &cand);
        let dist = self.graph.distance(cand.as_slice());
        (x.dot(&xs) >= -FORM_TOL && dist > 1e-8).then(|| Witness::RelatedPointOffGraph {
            x: x.as_slice().to_vec(),
            xstar: xs.as_slice().to_vec(),
            distance_to_graph: dist,
        })
    }

    /// The fiber `Ax`.
    pub fn apply(&self, x: &[f64], tol: f64) -> Result<Fiber> {
        check_dim(self.n, x.len())?;
        if !self.dom.contains(x, tol)? {
            return Ok(Fiber::Empty);
        }
        let (t, b) = self.blocks();
        let xv = Vector::from_column_slice(x);
        let c = t
            .clone()
            .svd(true, true)
            .solve(&xv, RANK_TOL)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let xs = &b * c;
        let a0 = self.multivalued_part();
        if a0.dim() == 0 {
            return Ok(Fiber::Point(xs));
        }
        let point = &xs - a0.project(xs.as_slice());
        Ok(Fiber::Affine {
            point,
            lineality: a0,
        })
    }

    /// The matrix of a single-valued relation with full domain.
    pub fn as_matrix(&self) -> Result<Matrix> {
        if self.dom.dim() != self.n || !self.is_single_valued() {
            return Err(Error::InvalidArgument(
                "relation is not a single-valued map on the whole space".into(),
            ));
        }
        let (t, b) = self.blocks();
        let tinv = t
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular domain block".into()))?;
        Ok(b * tinv)
    }

    /// Orthonormal graph basis expressed as `(x, x*)` pairs.
    pub fn graph_pairs(&self) -> Vec<(Vector, Vector)> {
        let b = self.graph.basis();
        (0..b.ncols())
            .map(|j| split(self.n, &b.column(j).into_owned()))
            .collect()
    }

    /// A graph point from coordinates in the orthonormal basis.
    pub fn graph_point(&self, coords: &[f64]) -> (Vector, Vector) {
        let c = Vector::from_column_slice(coords);
        split(self.n, &(self.graph.basis() * c))
    }
}

/// `<x - y, x* - y*> >= -tol` for every sampled `(y, y*)`.
pub fn monotonically_related(point: (&[f64], &[f64]), sample: &[(Vector, Vector)], tol: f64) -> bool {
    let (x, xs) = point;
    sample.iter().all(|(y, ys)| {
        let mut s = 0.0;
        for i in 0..x.len() {
            s += (x[i] - y[i]) * (xs[i] - ys[i]);
        }
        s >= -tol
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventSolution {
    pub x: Vec<f64>,
    /// `||x - P_C(x + v)||` with `v = z - x - Mx`; zero iff `v ∈ N_C(x)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `z - x - Mx ∈ N_C(x)` for `x ∈ C`, with `M` the matrix of a
/// monotone single-valued relation with full domain.
///
/// Segments are solved in closed form along the segment parameter. Other
/// sets use projected fixed-point steps `x ← P_C(x - γ((I+M)x - z))` with
/// `γ = 1/L²`, `L = 1 + ||M||`, which contract with factor `sqrt(1 - 1/L²)`
/// since `I + M` is 1-strongly monotone.
pub fn resolvent_solve(a: &LinearRelation, c: &ConvexSet, z: &[f64], tol: f64) -> Result<ResolventSolution> {
    let n = a.n();
    check_dim(n, z.len())?;
    check_dim(n, c.dim())?;
    let m = a.as_matrix()?;
    let sym = (&m + m.transpose()) * 0.5;
    if sym.symmetric_eigen().eigenvalues.min() < -FORM_TOL {
        return Err(Error::HypothesisFailed("selection is not monotone".into()));
    }
    if !c.is_bounded() {
        return Err(Error::HypothesisFailed("constraint set is unbounded".into()));
    }
    let zv = Vector::from_column_slice(z);
    let residual = |x: &Vector| -> Result<f64> {
        let v = &zv - x - &m * x;
        let p = c.project((x + v).as_slice())?;
        Ok((x - p).norm())
    };
    if let ConvexSet::Segment { a: p, b: q } = c {
        let u = q - p;
        let denom = u.norm_squared() + (&m * &u).dot(&u);
        let t = if denom > 0.0 {
            ((&zv - p - &m * p).dot(&u) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = p + u * t;
        let r = residual(&x)?;
        return if r <= tol {
            Ok(ResolventSolution {
                x: x.as_slice().to_vec(),
                residual: r,
                iterations: 0,
            })
        } else {
            Err(Error::NoSolution {
                iterations: 0,
                residual: r,
            })
        };
    }
    let l = 1.0 + spectral_norm(&m);
    let gamma = 1.0 / (l * l);
    let ipm = Matrix::identity(n, n) + &m;
    let budget = (200.0 * l * l * (1.0 / tol).ln().max(1.0)) as usize + 100;
    let mut x = c.project(z)?;
    let mut r = residual(&x)?;
    for it in 0..budget {
        if r <= tol {
            return Ok(ResolventSolution {
                x: x.as_slice().to_vec(),
                residual: r,
                iterations: it,
            });
        }
        let step = &x - (&ipm * &x - &zv) * gamma;
        x = c.project(step.as_slice())?;
        r = residual(&x)?;
    }
    if r <= tol {
        return Ok(ResolventSolution {
            x: x.as_slice().to_vec(),
            residual: r,
            iterations: budget,
        });
    }
    Err(Error::NoSolution {
        iterations: budget,
        residual: r,
    })
}
