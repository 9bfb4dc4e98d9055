//! Bivariate functions `F(x, x*)` on `R^n × R^n`: Fitzpatrick functions,
//! flipped conjugation `F*(x*, x)`, partial inf-convolution in the second
//! variable, `pos F` extraction and BC verification.
//!
//! The conjugate is only ever queried as `F*(x*, x)`, through the
//! `flipped_conjugate*` family, so the argument transposition is never
//! left to the caller.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::extreal::{ExtReal, NegInf, PosInf};
use crate::functions::{axis, coord};
use crate::linalg::{dot, Matrix, Subspace, Vector};
use crate::relations::{LinearRelation, FORM_TOL};
use crate::sets::{minkowski_span_closed_subspace, ConvexSet, NormalCone};

/// Membership slack for graphs and sets inside bivariate evaluations,
/// relative to the norm of the evaluated point.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Uniform grid `{c(i)}^d` on `[-R, R]^d` with `N` symmetric points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "R")]
    pub box_radius: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl GridSpec {
    pub fn new(box_radius: f64, n: usize) -> Result<Self> {
        if !(box_radius > 0.0 && box_radius.is_finite()) || n < 2 {
            return Err(Error::InvalidArgument(format!("grid R={box_radius}, N={n}")));
        }
        Ok(GridSpec { box_radius, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.box_radius / (self.n - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        axis(self.box_radius, self.n)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GridSpec {
            box_radius: self.box_radius * factor,
            n: self.n,
        }
    }

    /// Same box, half the spacing; the coarse points are a subset.
    pub fn refined(&self) -> Self {
        GridSpec {
            box_radius: self.box_radius,
            n: 2 * self.n - 1,
        }
    }

    pub fn count(&self, dim: usize) -> Result<usize> {
        self.n
            .checked_pow(dim as u32)
            .filter(|&c| c as u64 <= 1 << 34)
            .ok_or_else(|| Error::InvalidArgument(format!("grid N={} in dimension {dim} is too large", self.n)))
    }

    /// Writes the coordinates of grid point `idx` (mixed radix, last axis fastest).
    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        for slot in out.iter_mut().rev() {
            *slot = coord(self.box_radius, self.n, idx % self.n);
            idx /= self.n;
        }
    }
}

/// Increasing `j: [0, ∞) → [0, ∞)` with `j(γ) >= lower_slope · γ`.
#[derive(Clone)]
pub struct JFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lower_slope: f64,
    label: String,
}

impl fmt::Debug for JFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JFunction({}, slope >= {})", self.label, self.lower_slope)
    }
}

impl JFunction {
    /// `j(γ) = slope · γ + offset`.
    pub fn affine(slope: f64, offset: f64) -> Result<Self> {
        if !(slope >= 0.0 && offset >= 0.0) {
            return Err(Error::InvalidArgument(format!("j needs slope, offset >= 0, got {slope}, {offset}")));
        }
        Ok(JFunction {
            eval: Arc::new(move |g| slope * g + offset),
            lower_slope: slope,
            label: format!("{slope}*g + {offset}"),
        })
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lower_slope: f64, label: &str) -> Self {
        JFunction {
            eval: Arc::new(f),
            lower_slope,
            label: label.to_string(),
        }
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        (self.eval)(gamma)
    }

    pub fn lower_slope(&self) -> f64 {
        self.lower_slope
    }

    /// Checks monotonicity and the slope bound on `[0, gamma_max]`.
    pub fn verify(&self, samples: usize, gamma_max: f64) -> bool {
        let mut prev = f64::NEG_INFINITY;
        (0..=samples).all(|k| {
            let g = gamma_max * k as f64 / samples.max(1) as f64;
            let v = self.eval(g);
            let ok = v >= 0.0 && v >= prev && v >= self.lower_slope * g * (1.0 - 1e-12);
            prev = v;
            ok
        })
    }
}

/// Cached quantities of a linear relation used by its Fitzpatrick function.
///
/// With `B = [Bt; Bb]` the orthonormal graph basis and `P = sym(Btᵀ Bb)`,
/// `F_A(x, x*) = sup_c <g, c> - cᵀPc` for `g = Bbᵀx + Btᵀx*`, which is
/// `¼ gᵀP⁺g` when `g ∈ range P` and `+∞` otherwise.
#[derive(Debug, Clone)]
pub struct LinearForm {
    relation: LinearRelation,
    top: Matrix,
    bottom: Matrix,
    pinv: Matrix,
    null: Matrix,
    monotone: bool,
    skew_maximal: bool,
    single_valued: bool,
    /// The matrix when the relation is a single-valued map on all of `R^n`.
    matrix: Option<Matrix>,
}

impl LinearForm {
    pub fn new(relation: LinearRelation) -> Self {
        let n = relation.n();
        let b = relation.graph().basis();
        let top = b.rows(0, n).into_owned();
        let bottom = b.rows(n, n).into_owned();
        let m = top.transpose() * &bottom;
        let p = (&m + m.transpose()) * 0.5;
        let k = p.nrows();
        let eig = p.symmetric_eigen();
        let mut pinv = Matrix::zeros(k, k);
        let mut null_cols = Vec::new();
        let mut monotone = true;
        for i in 0..k {
            let lam = eig.eigenvalues[i];
            let v = eig.eigenvectors.column(i);
            if lam < -FORM_TOL {
                monotone = false;
            }
            if lam > FORM_TOL {
                pinv += (v * v.transpose()) / lam;
            } else {
                null_cols.push(v.into_owned());
            }
        }
        let null = if null_cols.is_empty() {
            Matrix::zeros(k, 0)
        } else {
            Matrix::from_columns(&null_cols)
        };
        let rep = relation.classify();
        let matrix = relation.as_matrix().ok();
        LinearForm {
            skew_maximal: rep.skew && rep.maximal,
            single_valued: relation.is_single_valued(),
            relation,
            top,
            bottom,
            pinv,
            null,
            monotone,
            matrix,
        }
    }

    pub fn relation(&self) -> &LinearRelation {
        &self.relation
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// `F_A`, which is `+∞` everywhere when `A` is not monotone.
    pub fn fitzpatrick(&self, x: &[f64], xs: &[f64]) -> ExtReal {
        if !self.monotone {
            return PosInf;
        }
        let k = self.top.ncols();
        let g = Vector::from_fn(k, |j, _| {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += self.bottom[(i, j)] * x[i] + self.top[(i, j)] * xs[i];
            }
            s
        });
        let scale = 1.0 + g.norm() + norm2(x, xs);
        if self.null.ncols() > 0 && (self.null.transpose() * &g).norm() > MEMBERSHIP_TOL * scale {
            return PosInf;
        }
        ExtReal::Finite(0.25 * g.dot(&(&self.pinv * &g)))
    }

    /// `ι_{gra A}(x, x*) + <x, x*>`.
    pub fn graph_form(&self, x: &[f64], xs: &[f64]) -> ExtReal {
        if let Some(m) = &self.matrix {
            let mut d2 = 0.0;
            for i in 0..x.len() {
                let mut ax = 0.0;
                for j in 0..x.len() {
                    ax += m[(i, j)] * x[j];
                }
                d2 += (xs[i] - ax) * (xs[i] - ax);
            }
            let scale = 1.0 + norm2(x, xs) * (1.0 + m.amax());
            if d2.sqrt() > MEMBERSHIP_TOL * scale {
                return PosInf;
            }
        } else if self.relation.distance_to_graph(x, xs) > MEMBERSHIP_TOL * (1.0 + norm2(x, xs)) {
            return PosInf;
        }
        ExtReal::Finite(dot(x, xs))
    }

    /// `Ax` for relations whose exact `□₂` reduction applies.
    fn single_value(&self, x: &[f64]) -> Option<Vector> {
        if let Some(m) = &self.matrix {
            return Some(m * Vector::from_column_slice(x));
        }
        match self.relation.apply(x, MEMBERSHIP_TOL * (1.0 + x.iter().map(|v| v.abs()).sum::<f64>())) {
            Ok(crate::relations::Fiber::Point(p)) => Some(p),
            _ => None,
        }
    }
}

fn norm2(x: &[f64], xs: &[f64]) -> f64 {
    (dot(x, x) + dot(xs, xs)).sqrt()
}

/// Fitzpatrick function of a finite graph sample: a pointwise max of affine
/// functions, hence convex.
#[derive(Debug, Clone)]
pub struct GraphSample {
    n: usize,
    a: Vec<f64>,
    astar: Vec<f64>,
    pairing: Vec<f64>,
}

impl GraphSample {
    pub fn new(points: &[(Vector, Vector)]) -> Result<Self> {
        let n = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty graph sample".into()))?
            .0
            .len();
        let mut s = GraphSample {
            n,
            a: Vec::with_capacity(n * points.len()),
            astar: Vec::with_capacity(n * points.len()),
            pairing: Vec::with_capacity(points.len()),
        };
        for (p, q) in points {
            check_dim(n, p.len())?;
            check_dim(n, q.len())?;
            s.a.extend(p.iter());
            s.astar.extend(q.iter());
            s.pairing.push(p.dot(q));
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.pairing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairing.is_empty()
    }

    pub fn point(&self, j: usize) -> (Vector, Vector) {
        let n = self.n;
        (
            Vector::from_column_slice(&self.a[j * n..(j + 1) * n]),
            Vector::from_column_slice(&self.astar[j * n..(j + 1) * n]),
        )
    }

    /// `max_j <x, a_j*> + <a_j, x*> - <a_j, a_j*>`.
    pub fn eval(&self, x: &[f64], xs: &[f64]) -> f64 {
        let n = self.n;
        let mut best = f64::NEG_INFINITY;
        for j in 0..self.pairing.len() {
            let (a, s) = (&self.a[j * n..(j + 1) * n], &self.astar[j * n..(j + 1) * n]);
            let mut v = -self.pairing[j];
            for i in 0..n {
                v += x[i] * s[i] + a[i] * xs[i];
            }
            best = best.max(v);
        }
        best
    }
}

type Evaluator = Arc<dyn Fn(&[f64], &[f64]) -> ExtReal + Send + Sync>;

#[derive(Clone)]
pub enum BivariateFunction {
    FitzFromSample(GraphSample),
    /// `ι_C(x) + σ_C(x*)`, the Fitzpatrick function of `N_C`.
    FitzNormalCone(ConvexSet),
    /// `F_A` of a closed linear relation, in closed form.
    FitzLinearClosed(LinearForm),
    /// `ι_{gra A}(x, x*) + <x, x*>`.
    GraphIndicatorPlusPairing(LinearForm),
    PartialInfConv {
        f1: Box<BivariateFunction>,
        f2: Box<BivariateFunction>,
        inner: GridSpec,
    },
    /// An arbitrary evaluator whose conjugate is taken over `support`.
    Explicit { n: usize, support: GridSpec, eval: Evaluator },
}

impl fmt::Debug for BivariateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BivariateFunction::FitzFromSample(s) => write!(f, "FitzFromSample({} points)", s.len()),
            BivariateFunction::FitzNormalCone(c) => write!(f, "FitzNormalCone({c:?})"),
            BivariateFunction::FitzLinearClosed(l) => write!(f, "FitzLinearClosed(n={})", l.relation.n()),
            BivariateFunction::GraphIndicatorPlusPairing(l) => {
                write!(f, "GraphIndicatorPlusPairing(n={})", l.relation.n())
            }
            BivariateFunction::PartialInfConv { f1, f2, inner } => {
                write!(f, "PartialInfConv({f1:?}, {f2:?}, {inner:?})")
            }
            BivariateFunction::Explicit { n, support, .. } => write!(f, "Explicit(n={n}, {support:?})"),
        }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    ClosedForm,
    Grid,
    Escalation,
    ExactReduction,
}

/// One evaluated query, in the serialized record layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    pub value: ExtReal,
    pub backend: Backend,
    pub grid: Option<GridSpec>,
}

impl BivariateFunction {
    pub fn fitz_linear(a: LinearRelation) -> Self {
        BivariateFunction::FitzLinearClosed(LinearForm::new(a))
    }

    pub fn graph_plus_pairing(a: LinearRelation) -> Self {
        BivariateFunction::GraphIndicatorPlusPairing(LinearForm::new(a))
    }

    pub fn from_sample(points: &[(Vector, Vector)]) -> Result<Self> {
        Ok(BivariateFunction::FitzFromSample(GraphSample::new(points)?))
    }

    pub fn inf_conv(f1: BivariateFunction, f2: BivariateFunction, inner: GridSpec) -> Result<Self> {
        check_dim(f1.n(), f2.n())?;
        Ok(BivariateFunction::PartialInfConv {
            f1: Box::new(f1),
            f2: Box::new(f2),
            inner,
        })
    }

    pub fn explicit(n: usize, support: GridSpec, eval: impl Fn(&[f64], &[f64]) -> ExtReal + Send + Sync + 'static) -> Self {
        BivariateFunction::Explicit {
            n,
            support,
            eval: Arc::new(eval),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            BivariateFunction::FitzFromSample(s) => s.n,
            BivariateFunction::FitzNormalCone(c) => c.dim(),
            BivariateFunction::FitzLinearClosed(l) | BivariateFunction::GraphIndicatorPlusPairing(l) => {
                l.relation.n()
            }
            BivariateFunction::PartialInfConv { f1, .. } => f1.n(),
            BivariateFunction::Explicit { n, .. } => *n,
        }
    }

    pub fn eval(&self, x: &[f64], xs: &[f64]) -> Result<ExtReal> {
        check_dim(self.n(), x.len())?;
        check_dim(self.n(), xs.len())?;
        Ok(match self {
            BivariateFunction::FitzFromSample(s) => ExtReal::Finite(s.eval(x, xs)),
            BivariateFunction::FitzNormalCone(c) => {
                if !c.contains(x, MEMBERSHIP_TOL * (1.0 + norm2(x, &[])))? {
                    PosInf
                } else {
                    c.support(xs)?
                }
            }
            BivariateFunction::FitzLinearClosed(l) => l.fitzpatrick(x, xs),
            BivariateFunction::GraphIndicatorPlusPairing(l) => l.graph_form(x, xs),
            BivariateFunction::PartialInfConv { f1, f2, inner } => partial_inf_conv(f1, f2, x, xs, inner)?.value,
            BivariateFunction::Explicit { eval, .. } => eval(x, xs),
        })
    }

    /// The exact flipped conjugate as a bivariate function of `(x, x*)`,
    /// i.e. `H(x, x*) = F*(x*, x)`, when a rule applies.
    ///
    /// `F_A ↔ ι_{gra A} + <·,·>` for closed monotone linear `A`, and
    /// `(ι_C ⊕ σ_C)* = σ_C ⊕ ι_C`.
    pub fn flipped_conjugate_closed(&self) -> Option<BivariateFunction> {
        match self {
            BivariateFunction::FitzLinearClosed(l) => Some(BivariateFunction::GraphIndicatorPlusPairing(l.clone())),
            BivariateFunction::GraphIndicatorPlusPairing(l) => Some(BivariateFunction::FitzLinearClosed(l.clone())),
            BivariateFunction::FitzNormalCone(c) => Some(BivariateFunction::FitzNormalCone(c.clone())),
            _ => None,
        }
    }

    /// Closed-form `F*(x*, x)`, or `None` when no rule applies.
    pub fn flipped_conjugate_exact(&self, xs: &[f64], x: &[f64]) -> Result<Option<ExtReal>> {
        match self {
            BivariateFunction::FitzLinearClosed(l) if !l.monotone => Ok(Some(NegInf)),
            BivariateFunction::FitzNormalCone(c) => {
                // conjugate of ι_C ⊕ σ_C by the separable rule, at (x*, x)
                use crate::functions::ConvexFunction as CF;
                let f = CF::separable(CF::Indicator(c.clone()), CF::Support(c.clone()));
                let g = f.conjugate_closed_form()?;
                let p: Vec<f64> = xs.iter().chain(x).copied().collect();
                Ok(Some(g.eval(&p)?))
            }
            _ => match self.flipped_conjugate_closed() {
                Some(h) => Ok(Some(h.eval(x, xs)?)),
                None => Ok(None),
            },
        }
    }

    /// `P_X dom F` as a convex set, when it is known in closed form.
    pub fn projected_domain(&self) -> Option<ConvexSet> {
        match self {
            BivariateFunction::FitzNormalCone(c) => Some(c.clone()),
            BivariateFunction::FitzLinearClosed(l) | BivariateFunction::GraphIndicatorPlusPairing(l) => {
                Some(ConvexSet::Subspace(l.relation.domain().clone()))
            }
            BivariateFunction::FitzFromSample(s) => ConvexSet::polytope((0..s.len()).map(|j| s.point(j).0).collect()).ok(),
            _ => None,
        }
    }
}

/// Grid sup `max_{(y, y*)} <y, x*> + <y*, x> - F(y, y*)` over `grid^{2n}`.
pub fn flipped_conjugate_grid(f: &BivariateFunction, xs: &[f64], x: &[f64], grid: &GridSpec) -> Result<ExtReal> {
    PrimalSample::from_grid(f, grid)?.flipped_conjugate(xs, x)
}

/// `F*(x*, x)`: closed form when available, otherwise the grid sup.
pub fn flipped_conjugate(f: &BivariateFunction, xs: &[f64], x: &[f64], grid: &GridSpec) -> Result<QueryRecord> {
    check_dim(f.n(), x.len())?;
    check_dim(f.n(), xs.len())?;
    let (value, backend, g) = match f.flipped_conjugate_exact(xs, x)? {
        Some(v) => (v, Backend::ClosedForm, None),
        None => (flipped_conjugate_grid(f, xs, x, grid)?, Backend::Grid, Some(*grid)),
    };
    Ok(QueryRecord {
        x: x.to_vec(),
        xstar: xs.to_vec(),
        value,
        backend,
        grid: g,
    })
}

/// The finite values of `F` on a primal grid, cached for repeated
/// conjugate queries.
#[derive(Debug, Clone)]
pub struct PrimalSample {
    n: usize,
    grid: GridSpec,
    /// `(y, y*)` concatenated per point.
    points: Vec<f64>,
    values: Vec<f64>,
}

impl PrimalSample {
    pub fn from_grid(f: &BivariateFunction, grid: &GridSpec) -> Result<Self> {
        let n = f.n();
        let total = grid.count(2 * n)?;
        let chunk = 4096usize;
        let chunks = total.div_ceil(chunk);
        let parts = crate::par_map(chunks, |c| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut pts = Vec::new();
            let mut vals = Vec::new();
            let mut buf = vec![0.0; 2 * n];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                grid.point(idx, &mut buf);
                if let ExtReal::Finite(v) = f.eval(&buf[..n], &buf[n..])? {
                    pts.extend_from_slice(&buf);
                    vals.push(v);
                }
            }
            Ok((pts, vals))
        });
        let mut points = Vec::new();
        let mut values = Vec::new();
        for part in parts {
            let (p, v) = part?;
            points.extend(p);
            values.extend(v);
        }
        if values.is_empty() {
            return Err(Error::AllInfinite);
        }
        Ok(PrimalSample {
            n,
            grid: *grid,
            points,
            values,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn finite_points(&self) -> usize {
        self.values.len()
    }

    pub fn flipped_conjugate(&self, xs: &[f64], x: &[f64]) -> Result<ExtReal> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, xs.len())?;
        let n = self.n;
        let mut best = f64::NEG_INFINITY;
        for (k, &v) in self.values.iter().enumerate() {
            let p = &self.points[2 * n * k..2 * n * (k + 1)];
            let mut s = -v;
            for i in 0..n {
                s += p[i] * xs[i] + p[n + i] * x[i];
            }
            best = best.max(s);
        }
        Ok(ExtReal::Finite(best))
    }
}

/// Outcome of the escalation protocol at one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscalationRecord {
    pub radii: [f64; 3],
    pub values: [f64; 3],
    pub value: ExtReal,
}

/// Grid conjugate at radii `R, 2R, 4R` with fixed `N`. Growth that is
/// linear in the radius (second difference ratio in `[1.5, 2.5]` with a
/// positive first difference) is reported as `+∞`; otherwise the value at
/// `R` is returned.
#[derive(Debug, Clone)]
pub struct Escalation {
    samples: [PrimalSample; 3],
}

impl Escalation {
    pub fn new(f: &BivariateFunction, grid: &GridSpec) -> Result<Self> {
        Ok(Escalation {
            samples: [
                PrimalSample::from_grid(f, grid)?,
                PrimalSample::from_grid(f, &grid.scaled(2.0))?,
                PrimalSample::from_grid(f, &grid.scaled(4.0))?,
            ],
        })
    }

    pub fn eval(&self, xs: &[f64], x: &[f64]) -> Result<EscalationRecord> {
        let mut values = [0.0; 3];
        for (k, s) in self.samples.iter().enumerate() {
            values[k] = s.flipped_conjugate(xs, x)?.to_f64();
        }
        let d1 = values[1] - values[0];
        let d2 = values[2] - values[1];
        let scale = 1e-9 * (1.0 + values[0].abs());
        let linear = d1 > scale && (1.5..=2.5).contains(&(d2 / d1));
        Ok(EscalationRecord {
            radii: [
                self.samples[0].grid.box_radius,
                self.samples[1].grid.box_radius,
                self.samples[2].grid.box_radius,
            ],
            values,
            value: if linear { PosInf } else { ExtReal::Finite(values[0]) },
        })
    }
}

/// One value of `F1 □₂ F2` together with its minimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfConvValue {
    pub value: ExtReal,
    /// The minimizing `v*`, when one was found.
    pub argmin: Option<Vec<f64>>,
    pub backend: Backend,
}

/// `(F1 □₂ F2)(x, x*) = inf_{v*} F1(x, x* - v*) + F2(x, v*)`.
///
/// When `F1(x, ·)` is an indicator of a single point `Ax` plus the pairing
/// (the graph form of an at-most-single-valued relation, or `F_A` of a
/// maximal skew one, where the two coincide) the infimum is attained at
/// `v* = x* - Ax` and is computed exactly. Otherwise `v*` ranges over the
/// inner grid.
pub fn partial_inf_conv(
    f1: &BivariateFunction,
    f2: &BivariateFunction,
    x: &[f64],
    xs: &[f64],
    inner: &GridSpec,
) -> Result<InfConvValue> {
    let n = f1.n();
    check_dim(n, f2.n())?;
    check_dim(n, x.len())?;
    check_dim(n, xs.len())?;
    let reducible = match f1 {
        BivariateFunction::GraphIndicatorPlusPairing(l) => Some(l),
        BivariateFunction::FitzLinearClosed(l) if l.skew_maximal => Some(l),
        _ => None,
    };
    if let Some(l) = reducible {
        if l.single_valued {
            let Some(ax) = l.single_value(x) else {
                return Ok(InfConvValue {
                    value: PosInf,
                    argmin: None,
                    backend: Backend::ExactReduction,
                });
            };
            let v: Vec<f64> = xs.iter().zip(ax.iter()).map(|(a, b)| a - b).collect();
            let value = f2.eval(x, &v)?.plus(dot(x, ax.as_slice()));
            return Ok(InfConvValue {
                value,
                argmin: value.is_finite().then_some(v),
                backend: Backend::ExactReduction,
            });
        }
    }
    let total = inner.count(n)?;
    let mut best = PosInf;
    let mut arg = None;
    let mut v = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    for idx in 0..total {
        inner.point(idx, &mut v);
        for i in 0..n {
            shifted[i] = xs[i] - v[i];
        }
        let a = f1.eval(x, &shifted)?;
        if a.is_pos_inf() {
            continue;
        }
        let val = a.checked_add(f2.eval(x, &v)?)?;
        if val < best {
            best = val;
            arg = Some(v.clone());
        }
    }
    Ok(InfConvValue {
        value: best,
        argmin: arg,
        backend: Backend::Grid,
    })
}

/// Grid `□₂` at spacing `h` and `h/2`, with the change between the two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedInfConv {
    pub coarse: InfConvValue,
    pub fine: InfConvValue,
    pub change: f64,
}

pub fn partial_inf_conv_refined(
    f1: &BivariateFunction,
    f2: &BivariateFunction,
    x: &[f64],
    xs: &[f64],
    inner: &GridSpec,
) -> Result<RefinedInfConv> {
    let coarse = partial_inf_conv(f1, f2, x, xs, inner)?;
    let fine = partial_inf_conv(f1, f2, x, xs, &inner.refined())?;
    let change = match (coarse.value, fine.value) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    };
    Ok(RefinedInfConv { coarse, fine, change })
}

/// The set `{(x, x*) : F(x, x*) = <x, x*>}` restricted to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosSet {
    pub points: Vec<(Vector, Vector)>,
    pub tol: f64,
}

/// Grid pairs with `|F(x, x*) - <x, x*>| <= tol`.
pub fn pos_extract(f: &BivariateFunction, grid: &GridSpec, tol: f64) -> Result<PosSet> {
    let n = f.n();
    let total = grid.count(2 * n)?;
    let chunk = 4096usize;
    let parts = crate::par_map(total.div_ceil(chunk), |c| -> Result<Vec<(Vector, Vector)>> {
        let mut out = Vec::new();
        let mut buf = vec![0.0; 2 * n];
        for idx in c * chunk..((c + 1) * chunk).min(total) {
            grid.point(idx, &mut buf);
            let (x, xs) = buf.split_at(n);
            if let ExtReal::Finite(v) = f.eval(x, xs)? {
                if (v - dot(x, xs)).abs() <= tol {
                    out.push((Vector::from_column_slice(x), Vector::from_column_slice(xs)));
                }
            }
        }
        Ok(out)
    });
    let mut points = Vec::new();
    for p in parts {
        points.extend(p?);
    }
    Ok(PosSet { points, tol })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcViolationKind {
    /// `F*(x*, x) < F(x, x*)`.
    Conjugate,
    /// `F(x, x*) < <x, x*>`.
    Pairing,
    /// `F` at a midpoint exceeds the average of its endpoint values.
    Convexity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcViolation {
    pub kind: BcViolationKind,
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcReport {
    pub points: usize,
    /// `min F*(x*, x) - F(x, x*)` over points where both are finite.
    pub worst_conjugate_margin: Option<f64>,
    /// `min F(x, x*) - <x, x*>` over points where `F` is finite.
    pub worst_pairing_margin: Option<f64>,
    pub conjugate_backend: Backend,
    pub violation: Option<BcViolation>,
    pub passed: bool,
}

/// Checks `F*(x*, x) >= F(x, x*) >= <x, x*>` on the sample, and midpoint
/// convexity of `F` on consecutive sample pairs.
///
/// Grid conjugates are lower bounds of the true conjugate, so with the grid
/// backend the first inequality can only fail spuriously, never pass
/// spuriously.
pub fn bc_check(f: &BivariateFunction, sample: &[(Vector, Vector)], grid: &GridSpec, tol: f64) -> Result<BcReport> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("bc_check needs a nonempty sample".into()));
    }
    let closed = f.flipped_conjugate_exact(sample[0].1.as_slice(), sample[0].0.as_slice())?.is_some();
    let cache = if closed { None } else { Some(PrimalSample::from_grid(f, grid)?) };
    let mut worst_conj: Option<f64> = None;
    let mut worst_pair: Option<f64> = None;
    let mut violation: Option<BcViolation> = None;
    let record = |kind: BcViolationKind, x: &Vector, xs: &Vector, amount: f64, slot: &mut Option<BcViolation>| {
        if slot.as_ref().is_none_or(|v| amount > v.amount) {
            *slot = Some(BcViolation {
                kind,
                x: x.as_slice().to_vec(),
                xstar: xs.as_slice().to_vec(),
                amount,
            });
        }
    };
    let mut values = Vec::with_capacity(sample.len());
    for (x, xs) in sample {
        let fv = f.eval(x.as_slice(), xs.as_slice())?;
        values.push(fv);
        let conj = match &cache {
            Some(c) => c.flipped_conjugate(xs.as_slice(), x.as_slice())?,
            None => f
                .flipped_conjugate_exact(xs.as_slice(), x.as_slice())?
                .expect("closed form exists for this variant"),
        };
        if let ExtReal::Finite(v) = fv {
            let m = v - x.dot(xs);
            worst_pair = Some(worst_pair.map_or(m, |w: f64| w.min(m)));
            if m < -tol {
                record(BcViolationKind::Pairing, x, xs, -m, &mut violation);
            }
            match conj {
                ExtReal::Finite(c) => {
                    let mc = c - v;
                    worst_conj = Some(worst_conj.map_or(mc, |w: f64| w.min(mc)));
                    if mc < -tol {
                        record(BcViolationKind::Conjugate, x, xs, -mc, &mut violation);
                    }
                }
                NegInf => record(BcViolationKind::Conjugate, x, xs, f64::INFINITY, &mut violation),
                PosInf => {}
            }
        }
    }
    for k in 1..sample.len() {
        let (a, b) = (&sample[k - 1], &sample[k]);
        if let (ExtReal::Finite(fa), ExtReal::Finite(fb)) = (values[k - 1], values[k]) {
            let mx = (&a.0 + &b.0) * 0.5;
            let ms = (&a.1 + &b.1) * 0.5;
            if let ExtReal::Finite(fm) = f.eval(mx.as_slice(), ms.as_slice())? {
                let excess = fm - 0.5 * (fa + fb);
                if excess > tol * (1.0 + fa.abs() + fb.abs()) {
                    record(BcViolationKind::Convexity, &mx, &ms, excess, &mut violation);
                }
            } else {
                record(BcViolationKind::Convexity, &mx, &ms, f64::INFINITY, &mut violation);
            }
        }
    }
    Ok(BcReport {
        points: sample.len(),
        worst_conjugate_margin: worst_conj,
        worst_pairing_margin: worst_pair,
        conjugate_backend: if closed { Backend::ClosedForm } else { Backend::Grid },
        passed: violation.is_none(),
        violation,
    })
}

/// Result of comparing both sides of the conjugate formula for `□₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckRecord {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    /// Grid flipped conjugate of `F1 □₂ F2`.
    pub lhs: ExtReal,
    /// `min_{u*} F1*(x* - u*, x) + F2*(u*, x)` over the dual grid.
    pub rhs: ExtReal,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub transversality: bool,
    pub records: Vec<CrosscheckRecord>,
    pub max_gap: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Checks `(F1 □₂ F2)*(x*, x) = min_{u*} F1*(x* - u*, x) + F2*(u*, x)`.
///
/// The left side is a grid sup over `outer^{2n}` of the inf-convolution;
/// the right side minimizes the flipped conjugates (closed form where
/// available, grid otherwise) over `u* ∈ dual^n`. Requires that
/// `⋃_{λ>0} λ(P_X dom F1 - P_X dom F2)` be a subspace.
pub fn simons_zalinescu_crosscheck(
    f1: &BivariateFunction,
    f2: &BivariateFunction,
    queries: &[(Vector, Vector)],
    outer: &GridSpec,
    inner: &GridSpec,
    dual: &GridSpec,
) -> Result<CrosscheckReport> {
    let n = f1.n();
    check_dim(n, f2.n())?;
    let (Some(d1), Some(d2)) = (f1.projected_domain(), f2.projected_domain()) else {
        return Err(Error::HypothesisFailed("projected domains have no closed form".into()));
    };
    if !minkowski_span_closed_subspace(&d1, &d2)? {
        return Err(Error::HypothesisFailed(
            "conical hull of the projected domain difference is not a subspace".into(),
        ));
    }
    let conv = BivariateFunction::inf_conv(f1.clone(), f2.clone(), *inner)?;
    let lhs_cache = PrimalSample::from_grid(&conv, outer)?;
    if lhs_cache.values.contains(&f64::NEG_INFINITY) {
        return Err(Error::HypothesisFailed("inf-convolution takes the value -inf".into()));
    }
    let conj_side = |f: &BivariateFunction| -> Result<Option<PrimalSample>> {
        let probe = vec![0.0; n];
        Ok(match f.flipped_conjugate_exact(&probe, &probe)? {
            Some(_) => None,
            None => Some(PrimalSample::from_grid(f, outer)?),
        })
    };
    let c1 = conj_side(f1)?;
    let c2 = conj_side(f2)?;
    let eval_conj = |f: &BivariateFunction, c: &Option<PrimalSample>, us: &[f64], x: &[f64]| -> Result<ExtReal> {
        match c {
            Some(s) => s.flipped_conjugate(us, x),
            None => Ok(f.flipped_conjugate_exact(us, x)?.expect("closed form exists")),
        }
    };
    let total = dual.count(n)?;
    let mut records = Vec::with_capacity(queries.len());
    let mut max_gap = 0.0f64;
    for (x, xs) in queries {
        let lhs = lhs_cache.flipped_conjugate(xs.as_slice(), x.as_slice())?;
        let mut rhs = PosInf;
        let mut u = vec![0.0; n];
        let mut rest = vec![0.0; n];
        for idx in 0..total {
            dual.point(idx, &mut u);
            for i in 0..n {
                rest[i] = xs[i] - u[i];
            }
            let a = eval_conj(f1, &c1, &rest, x.as_slice())?;
            if a.is_pos_inf() {
                continue;
            }
            let b = eval_conj(f2, &c2, &u, x.as_slice())?;
            rhs = rhs.min(a.checked_add(b)?);
        }
        let gap = match (lhs, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        max_gap = max_gap.max(gap);
        records.push(CrosscheckRecord {
            x: x.as_slice().to_vec(),
            xstar: xs.as_slice().to_vec(),
            lhs,
            rhs,
            gap,
        });
    }
    let bound = 2.0 * outer.spacing();
    Ok(CrosscheckReport {
        transversality: true,
        records,
        max_gap,
        bound,
        passed: max_gap <= bound,
    })
}

/// The set `M = {(x, x* + y*) : (x, x*) ∈ pos F1, (x, y*) ∈ pos F2}` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSetReport {
    pub pos1: usize,
    pub pos2: usize,
    pub m_points: Vec<(Vec<f64>, Vec<f64>)>,
    pub monotone: bool,
    /// Worst `<x - y, u - v>` over pairs of `M`.
    pub worst_pairing: f64,
    /// Grid points outside `M` that are monotonically related to all of it.
    /// Finite grids can refute maximality but never certify it, so this is
    /// reported, not judged.
    pub related_outside: usize,
}

pub fn fact34_m_set(
    f1: &BivariateFunction,
    f2: &BivariateFunction,
    grid: &GridSpec,
    bc_sample: &[(Vector, Vector)],
    tol: f64,
) -> Result<MSetReport> {
    for (k, f) in [f1, f2].into_iter().enumerate() {
        let rep = bc_check(f, bc_sample, grid, tol)?;
        if !rep.passed {
            return Err(Error::HypothesisFailed(format!(
                "F{} fails the BC check: {:?}",
                k + 1,
                rep.violation
            )));
        }
    }
    let p1 = pos_extract(f1, grid, tol)?;
    let p2 = pos_extract(f2, grid, tol)?;
    let mut m: Vec<(Vector, Vector)> = Vec::new();
    for (x, xs) in &p1.points {
        for (y, ys) in &p2.points {
            if (x - y).amax() <= tol {
                m.push((x.clone(), xs + ys));
            }
        }
    }
    let mut worst = f64::INFINITY;
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            worst = worst.min((&m[i].0 - &m[j].0).dot(&(&m[i].1 - &m[j].1)));
        }
    }
    let n = f1.n();
    let total = grid.count(2 * n)?;
    let mut related = 0usize;
    let mut buf = vec![0.0; 2 * n];
    for idx in 0..total {
        grid.point(idx, &mut buf);
        let (x, xs) = buf.split_at(n);
        let inside = m
            .iter()
            .any(|(p, q)| p.iter().zip(x).chain(q.iter().zip(xs)).all(|(a, b)| (a - b).abs() <= tol));
        if !inside && crate::relations::monotonically_related((x, xs), &m, tol) {
            related += 1;
        }
    }
    Ok(MSetReport {
        pos1: p1.points.len(),
        pos2: p2.points.len(),
        monotone: worst >= -tol,
        worst_pairing: if m.len() < 2 { 0.0 } else { worst },
        m_points: m
            .into_iter()
            .map(|(a, b)| (a.as_slice().to_vec(), b.as_slice().to_vec()))
            .collect(),
        related_outside: related,
    })
}

/// Points of `gra N_C` sampled by arc length: the segment `[-1, 1] × {0}`
/// and the rays `{±1} × ±[0, ray_len]`, `m` midpoint samples in total.
pub fn interval_normal_cone_sample(m: usize, ray_len: f64) -> Vec<(Vector, Vector)> {
    let total = 2.0 + 2.0 * ray_len;
    let step = total / m as f64;
    (0..m)
        .map(|k| {
            let s = (k as f64 + 0.5) * step;
            let (x, xs) = if s < ray_len {
                (-1.0, -(ray_len - s))
            } else if s < ray_len + 2.0 {
                (-1.0 + (s - ray_len), 0.0)
            } else {
                (1.0, s - ray_len - 2.0)
            };
            (Vector::from_element(1, x), Vector::from_element(1, xs))
        })
        .collect()
}

/// Random points of `gra N_C` built from boundary points and cone generators.
pub fn sample_normal_cone_graph<R: Rng + ?Sized>(c: &ConvexSet, count: usize, scale: f64, rng: &mut R) -> Result<Vec<(Vector, Vector)>> {
    let n = c.dim();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let probe = crate::sets::random_in_ball(n, 3.0 * scale, rng);
        let x = c.project(probe.as_slice())?;
        let nc = c.normal_cone(x.as_slice(), 1e-9)?;
        let NormalCone::Cone { generators, lineality } = &nc else { continue };
        let gw: Vec<f64> = generators.iter().map(|_| rng.random_range(0.0..scale)).collect();
        let lw: Vec<f64> = lineality.iter().map(|_| rng.random_range(-scale..scale)).collect();
        if let Some(v) = nc.combine(n, &gw, &lw) {
            out.push((x, v));
        }
    }
    Ok(out)
}

/// Whether the grid graph spanned by a subspace is unchanged: helper for
/// the tests of `pos` recovery.
pub fn subspace_contains_all(s: &Subspace, pts: &[(Vector, Vector)], tol: f64) -> bool {
    pts.iter().all(|(x, xs)| {
        let p: Vec<f64> = x.iter().chain(xs.iter()).copied().collect();
        s.distance(&p) <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;
    use crate::test_util::{assert_close, rng};

    fn rot90() -> LinearRelation {
        LinearRelation::from_matrix(&Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]), None).unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn interval() -> ConvexSet {
        ConvexSet::segment(v(&[-1.0]), v(&[1.0])).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = BivariateFunction::FitzNormalCone(ConvexSet::unit_ball(2));
        assert_eq!(f.eval(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), ExtReal::Finite(5.0));
        assert_eq!(f.eval(&[2.0, 0.0], &[3.0, 4.0]).unwrap(), PosInf);
        let s = BivariateFunction::from_sample(&interval_normal_cone_sample(4000, 1.0)).unwrap();
        assert_close(s.eval(&[0.0], &[1.0]).unwrap().to_f64(), 1.0, 1e-3);
    }

    #[test]
    fn linear_fitzpatrick_matches_its_definition() {
        // sup over a dense graph sample approaches the closed form from below
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 2.0]);
        let a = LinearRelation::from_matrix(&q, None).unwrap();
        let f = BivariateFunction::fitz_linear(a.clone());
        let mut r = rng(1);
        let pts: Vec<_> = (0..20000)
            .map(|_| {
                let x = crate::sets::random_in_ball(2, 8.0, &mut r);
                let y = &q * &x;
                (x, y)
            })
            .collect();
        let s = GraphSample::new(&pts).unwrap();
        for _ in 0..20 {
            let x = crate::sets::random_in_ball(2, 1.0, &mut r);
            let xs = crate::sets::random_in_ball(2, 1.0, &mut r);
            let closed = f.eval(x.as_slice(), xs.as_slice()).unwrap().to_f64();
            let sampled = s.eval(x.as_slice(), xs.as_slice());
            assert!(sampled <= closed + 1e-9);
            assert!(closed - sampled <= 0.05, "{closed} vs {sampled}");
        }
        // equality with the pairing on the graph
        let x = v(&[0.3, -0.7]);
        let y = &q * &x;
        assert_close(f.eval(x.as_slice(), y.as_slice()).unwrap().to_f64(), x.dot(&y), 1e-12);
    }

    #[test]
    fn rotation_fitzpatrick_is_the_graph_indicator() {
        let f = BivariateFunction::fitz_linear(rot90());
        assert_eq!(f.eval(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(f.eval(&[1.0, 0.0], &[0.0, 1.1]).unwrap(), PosInf);
    }

    #[test]
    fn flipped_conjugate_closed_forms() {
        let g = BivariateFunction::graph_plus_pairing(rot90());
        let on = flipped_conjugate(&g, &[0.0, 1.0], &[1.0, 0.0], &GridSpec::new(2.0, 5).unwrap()).unwrap();
        assert_eq!(on.value, ExtReal::ZERO);
        assert_eq!(on.backend, Backend::ClosedForm);
        let f = BivariateFunction::fitz_linear(rot90());
        let off = flipped_conjugate(&f, &[0.0, 2.0], &[1.0, 0.0], &GridSpec::new(2.0, 5).unwrap()).unwrap();
        assert_eq!(off.value, PosInf);
        let bad = BivariateFunction::fitz_linear(LinearRelation::from_matrix(&(-Matrix::identity(1, 1)), None).unwrap());
        assert_eq!(bad.flipped_conjugate_exact(&[0.0], &[0.0]).unwrap(), Some(NegInf));
    }

    #[test]
    fn normal_cone_conjugate_against_grid() {
        // 4-dim grid sup against the separable closed form at 9 queries
        let c = interval();
        let f = BivariateFunction::FitzNormalCone(ConvexSet::Subspace(Subspace::whole(1)));
        assert!(f.eval(&[0.0], &[1.0]).unwrap().is_pos_inf());
        let f = BivariateFunction::FitzNormalCone(c);
        let grid = GridSpec::new(4.0, 161).unwrap();
        let cache = PrimalSample::from_grid(&f, &grid).unwrap();
        for &(xs, x) in &[(0.0, 0.0), (0.5, 0.0), (-1.5, 0.5), (2.0, -0.9), (1.0, 0.25), (-0.3, -0.3), (0.7, 0.95), (-2.0, 0.0), (1.2, -0.5)] {
            let exact = f.flipped_conjugate_exact(&[xs], &[x]).unwrap().unwrap().to_f64();
            let grid_val = cache.flipped_conjugate(&[xs], &[x]).unwrap().to_f64();
            assert!((exact - grid_val).abs() <= 2.0 * grid.spacing(), "{xs},{x}: {exact} vs {grid_val}");
        }
    }

    #[test]
    fn escalation_detects_unbounded_growth() {
        let f = BivariateFunction::fitz_linear(rot90());
        let esc = Escalation::new(&f, &GridSpec::new(1e3, 11).unwrap()).unwrap();
        let off = esc.eval(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!(off.value, PosInf);
        let on = esc.eval(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(on.value, ExtReal::ZERO);
    }

    #[test]
    fn partial_inf_conv_examples() {
        let n = 4;
        let ts = crate::shift::TruncatedShift::build(n).unwrap();
        let g = BivariateFunction::graph_plus_pairing(ts.adjoint_selection());
        let seg = ConvexSet::segment(Vector::zeros(n), unit(n, 0)).unwrap();
        let fnc = BivariateFunction::FitzNormalCone(seg);
        let inner = GridSpec::new(2.0, 5).unwrap();
        for t in [0.0, 0.25, 0.5, 1.0] {
            let x = unit(n, 0) * t;
            let xs = ts.apply_s(x.as_slice()).unwrap();
            let r = partial_inf_conv(&g, &fnc, x.as_slice(), xs.as_slice(), &inner).unwrap();
            assert_eq!(r.backend, Backend::ExactReduction);
            assert_close(r.value.to_f64(), t * t / 2.0, 1e-15);
        }
        let out = unit(n, 1);
        let r = partial_inf_conv(&g, &fnc, out.as_slice(), &[0.0; 4], &inner).unwrap();
        assert_eq!(r.value, PosInf);

        let ball = BivariateFunction::FitzNormalCone(ConvexSet::unit_ball(2));
        let grid = GridSpec::new(1.0, 9).unwrap();
        let r = partial_inf_conv(&ball, &ball, &[0.3, 0.1], &[0.0, 0.0], &grid).unwrap();
        assert_eq!(r.value, ExtReal::ZERO);
        assert_eq!(r.argmin, Some(vec![0.0, 0.0]));
        let refined = partial_inf_conv_refined(&ball, &ball, &[0.3, 0.1], &[0.5, 0.0], &grid).unwrap();
        assert!(refined.change <= 1e-12);
    }

    #[test]
    fn bc_check_examples() {
        let mut r = rng(3);
        let ball = ConvexSet::unit_ball(2);
        let f = BivariateFunction::FitzNormalCone(ball.clone());
        let mut sample = sample_normal_cone_graph(&ball, 500, 2.0, &mut r).unwrap();
        for _ in 0..500 {
            sample.push((crate::sets::random_in_ball(2, 2.0, &mut r), crate::sets::random_in_ball(2, 2.0, &mut r)));
        }
        let grid = GridSpec::new(2.0, 5).unwrap();
        let rep = bc_check(&f, &sample, &grid, 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");

        let fa = BivariateFunction::fitz_linear(rot90());
        let on: Vec<_> = (0..100).map(|_| rot90().graph_point(&[r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)])).collect();
        let rep = bc_check(&fa, &on, &grid, 1e-9).unwrap();
        assert!(rep.passed);
        assert!(rep.worst_pairing_margin.unwrap().abs() <= 1e-12);

        let neg = LinearRelation::from_matrix(&(-Matrix::identity(2, 2)), None).unwrap();
        let g = BivariateFunction::graph_plus_pairing(neg.clone());
        let pts: Vec<_> = (0..50).map(|_| neg.graph_point(&[r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)])).collect();
        let rep = bc_check(&g, &pts, &grid, 1e-9).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.violation.unwrap().kind, BcViolationKind::Convexity);
    }

    #[test]
    fn pos_extract_recovers_graphs() {
        let f = BivariateFunction::FitzNormalCone(interval());
        let grid = GridSpec::new(2.0, 17).unwrap();
        let pos = pos_extract(&f, &grid, 1e-9).unwrap();
        assert!(!pos.points.is_empty());
        for (x, xs) in &pos.points {
            assert!(interval().normal_cone(x.as_slice(), 1e-9).unwrap().contains(xs.as_slice(), 1e-9));
        }
        // every grid graph point is recovered
        let expected = grid
            .axis()
            .iter()
            .flat_map(|&x| grid.axis().into_iter().map(move |y| (x, y)))
            .filter(|&(x, y)| x.abs() <= 1.0 && (y == 0.0 || (x.abs() == 1.0 && y * x > 0.0)))
            .count();
        assert_eq!(pos.points.len(), expected);

        let fa = BivariateFunction::fitz_linear(rot90());
        let pos = pos_extract(&fa, &GridSpec::new(1.0, 5).unwrap(), 1e-9).unwrap();
        assert_eq!(pos.points.len(), 25);
        assert!(subspace_contains_all(rot90().graph(), &pos.points, 1e-12));

        // a grid that misses the graph of x ↦ x + 1/3 entirely
        let shifted = BivariateFunction::explicit(1, GridSpec::new(1.0, 3).unwrap(), |x, xs| {
            if (xs[0] - x[0] - 1.0 / 3.0).abs() < 1e-12 { ExtReal::Finite(x[0] * xs[0]) } else { PosInf }
        });
        assert!(pos_extract(&shifted, &GridSpec::new(1.0, 3).unwrap(), 0.0).unwrap().points.is_empty());
    }

    #[test]
    fn crosscheck_examples() {
        let fa = BivariateFunction::fitz_linear(rot90());
        let fb = BivariateFunction::FitzNormalCone(ConvexSet::unit_ball(2));
        let outer = GridSpec::new(2.0, 21).unwrap();
        let q = vec![(v(&[0.0, 0.0]), v(&[0.0, 0.0])), (v(&[0.2, -0.4]), v(&[0.6, 0.0]))];
        let rep = simons_zalinescu_crosscheck(&fa, &fb, &q, &outer, &outer, &outer).unwrap();
        assert_eq!(rep.records[0].lhs, ExtReal::ZERO);
        assert_eq!(rep.records[0].rhs, ExtReal::ZERO);
        assert!(rep.passed, "{rep:?}");

        let small = GridSpec::new(2.0, 9).unwrap();
        let q = vec![(v(&[0.5, 0.0]), v(&[1.0, 0.5]))];
        let rep = simons_zalinescu_crosscheck(&fb, &fb, &q, &small, &small, &small).unwrap();
        assert!(rep.passed, "{rep:?}");

        let origin = BivariateFunction::FitzNormalCone(ConvexSet::Singleton(Vector::zeros(2)));
        let seg = BivariateFunction::FitzNormalCone(ConvexSet::segment(Vector::zeros(2), unit(2, 0)).unwrap());
        assert!(matches!(
            simons_zalinescu_crosscheck(&origin, &seg, &q, &small, &small, &small),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn m_set_of_ball_with_itself_is_monotone() {
        let f = BivariateFunction::FitzNormalCone(ConvexSet::segment(v(&[-1.0]), v(&[1.0])).unwrap());
        let grid = GridSpec::new(2.0, 9).unwrap();
        let sample = interval_normal_cone_sample(50, 1.0);
        let rep = fact34_m_set(&f, &f, &grid, &sample, 1e-9).unwrap();
        assert!(rep.monotone);
        for (x, w) in &rep.m_points {
            assert!(interval().normal_cone(x, 1e-9).unwrap().contains(w, 1e-9));
        }
        let neg = LinearRelation::from_matrix(&(-Matrix::identity(1, 1)), None).unwrap();
        let bad = BivariateFunction::graph_plus_pairing(neg.clone());
        let pts: Vec<_> = (-5..=5).map(|k| neg.graph_point(&[k as f64 / 5.0])).collect();
        assert!(matches!(fact34_m_set(&bad, &f, &grid, &pts, 1e-9), Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn j_function_checks() {
        let j = JFunction::affine(1.0, 0.0).unwrap();
        assert!(j.verify(1000, 100.0));
        let weak = JFunction::custom(|g| 0.4 * g, 0.5, "0.4 g");
        assert!(!weak.verify(10, 1.0));
        assert!(JFunction::affine(-1.0, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn inf_conv_of_bc_functions_dominates_pairing(
                x in proptest::collection::vec(-1.0f64..1.0, 2),
                xs in proptest::collection::vec(-3.0f64..3.0, 2),
            ) {
                let fa = BivariateFunction::fitz_linear(rot90());
                let fb = BivariateFunction::FitzNormalCone(ConvexSet::unit_ball(2));
                let r = partial_inf_conv(&fa, &fb, &x, &xs, &GridSpec::new(1.0, 3).unwrap()).unwrap();
                prop_assert!(r.value >= ExtReal::Finite(dot(&x, &xs) - 1e-12));
            }
        }
    }
}
