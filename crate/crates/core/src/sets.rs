//! Closed convex sets with membership, support function and normal cone.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::extreal::{ExtReal, PosInf};
use crate::linalg::{dot, min_norm_point, nnls, norm, unit, Matrix, Subspace, Vector};

/// Relative tolerance deciding `x* ⊥ subspace` in the support function of a subspace.
const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Largest box dimension whose vertex set is enumerated.
const MAX_BOX_VERTEX_DIM: usize = 16;

/// A nonempty closed convex subset of `R^d`.
///
/// Use the checked constructors; the variants are public for pattern matching.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Ball { center: Vector, radius: f64 },
    Segment { a: Vector, b: Vector },
    /// Componentwise bounds; infinite bounds are allowed.
    Box { lower: Vector, upper: Vector },
    Subspace(Subspace),
    Singleton(Vector),
    Polytope { vertices: Vec<Vector> },
}

/// `N_C(x)`: empty off `C`, otherwise `cone(generators) + span(lineality)`.
///
/// `Cone` with no generators and no lineality is the zero cone `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalCone {
    Empty,
    Cone {
        generators: Vec<Vector>,
        lineality: Vec<Vector>,
    },
}

impl NormalCone {
    fn zero() -> Self {
        NormalCone::Cone {
            generators: Vec::new(),
            lineality: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, NormalCone::Empty)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NormalCone::Cone { generators, lineality }
            if generators.iter().all(|g| g.amax() == 0.0) && lineality.is_empty())
    }

    /// Whether `v` lies in the cone, up to `tol` in Euclidean distance.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            NormalCone::Empty => false,
            NormalCone::Cone {
                generators,
                lineality,
            } => {
                let n = v.len();
                let lin = Subspace::from_vectors(n, lineality);
                let rest = Vector::from_column_slice(v) - lin.project(v);
                if generators.is_empty() {
                    return rest.norm() <= tol;
                }
                // lineality directions enter with both signs
                let mut cols: Vec<Vector> = generators.clone();
                for j in 0..lin.dim() {
                    let c = lin.basis().column(j).into_owned();
                    cols.push(-&c);
                    cols.push(c);
                }
                let a = Matrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
                let target = Vector::from_column_slice(v);
                let coeffs = nnls(&a, &target);
                (a * coeffs - target).norm() <= tol
            }
        }
    }

    /// An element of the cone from nonnegative weights on the generators and
    /// free weights on the lineality directions (missing weights count as 0).
    pub fn combine(&self, n: usize, gen_weights: &[f64], lin_weights: &[f64]) -> Option<Vector> {
        match self {
            NormalCone::Empty => None,
            NormalCone::Cone {
                generators,
                lineality,
            } => {
                let mut v = Vector::zeros(n);
                for (g, w) in generators.iter().zip(gen_weights) {
                    v += g * w.abs();
                }
                for (l, w) in lineality.iter().zip(lin_weights) {
                    v += l * *w;
                }
                Some(v)
            }
        }
    }
}

/// Finite description `conv(points) + cone(rays) + span(lines)`.
#[derive(Debug, Clone, Default)]
pub struct Generators {
    pub points: Vec<Vector>,
    pub rays: Vec<Vector>,
    pub lines: Vec<Vector>,
}

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn unit_ball(n: usize) -> Self {
        ConvexSet::Ball {
            center: Vector::zeros(n),
            radius: 1.0,
        }
    }

    pub fn segment(a: Vector, b: Vector) -> Result<Self> {
        check_dim(a.len(), b.len())?;
        Ok(ConvexSet::Segment { a, b })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        for i in 0..lower.len() {
            let (l, u) = (lower[i], upper[i]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!("box bounds [{l}, {u}] at {i}")));
            }
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidArgument("polytope needs a vertex".into()))?;
        for v in &vertices {
            check_dim(first.len(), v.len())?;
        }
        Ok(ConvexSet::Polytope { vertices })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Segment { a, .. } => a.len(),
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Subspace(s) => s.ambient(),
            ConvexSet::Singleton(p) => p.len(),
            ConvexSet::Polytope { vertices } => vertices[0].len(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexSet::Box { lower, upper } => lower.iter().chain(upper.iter()).all(|v| v.is_finite()),
            ConvexSet::Subspace(s) => s.dim() == 0,
            _ => true,
        }
    }

    /// True when the set is exactly `{0}`.
    pub fn is_origin(&self) -> bool {
        match self {
            ConvexSet::Singleton(p) => p.amax() == 0.0,
            ConvexSet::Segment { a, b } => a.amax() == 0.0 && b.amax() == 0.0,
            ConvexSet::Box { lower, upper } => lower.amax() == 0.0 && upper.amax() == 0.0,
            ConvexSet::Subspace(s) => s.dim() == 0,
            ConvexSet::Polytope { vertices } => vertices.iter().all(|v| v.amax() == 0.0),
            ConvexSet::Ball { .. } => false,
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        let xv = Vector::from_column_slice(x);
        Ok(match self {
            ConvexSet::Ball { center, radius } => {
                let d = &xv - center;
                let r = d.norm();
                if r <= *radius {
                    xv
                } else {
                    center + d * (*radius / r)
                }
            }
            ConvexSet::Segment { a, b } => {
                let u = b - a;
                let uu = u.norm_squared();
                if uu == 0.0 {
                    a.clone()
                } else {
                    let t = ((&xv - a).dot(&u) / uu).clamp(0.0, 1.0);
                    a + u * t
                }
            }
            ConvexSet::Box { lower, upper } => {
                Vector::from_fn(x.len(), |i, _| x[i].clamp(lower[i], upper[i]))
            }
            ConvexSet::Subspace(s) => s.project(x),
            ConvexSet::Singleton(p) => p.clone(),
            ConvexSet::Polytope { vertices } => {
                let shifted: Vec<Vector> = vertices.iter().map(|v| v - &xv).collect();
                let (m, _) = min_norm_point(&shifted);
                m + xv
            }
        })
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(x.iter().zip(p.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    /// `dist(x, C) <= tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        let d = match self {
            ConvexSet::Ball { center, radius } => {
                let r = x.iter().zip(center.iter()).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
            // the hull projection is iterative; allow roundoff at the scale of the vertices
            ConvexSet::Polytope { vertices } => {
                let scale = vertices.iter().map(|v| v.amax()).fold(0.0, f64::max).max(1.0);
                return Ok(self.distance(x)? <= tol + 1e-12 * scale);
            }
            _ => self.distance(x)?,
        };
        Ok(d <= tol)
    }

    /// Indicator `ι_C(x)` with membership slack `tol`.
    pub fn indicator(&self, x: &[f64], tol: f64) -> Result<ExtReal> {
        Ok(if self.contains(x, tol)? { ExtReal::ZERO } else { PosInf })
    }

    /// Support function `σ_C(x*) = sup_{c ∈ C} <c, x*>`.
    pub fn support(&self, y: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim(), y.len())?;
        Ok(match self {
            ConvexSet::Ball { center, radius } => {
                ExtReal::Finite(dot(center.as_slice(), y) + radius * norm(y))
            }
            ConvexSet::Segment { a, b } => {
                ExtReal::Finite(dot(a.as_slice(), y).max(dot(b.as_slice(), y)))
            }
            ConvexSet::Box { lower, upper } => {
                let mut total = 0.0;
                for i in 0..y.len() {
                    let bound = if y[i] > 0.0 {
                        upper[i]
                    } else if y[i] < 0.0 {
                        lower[i]
                    } else {
                        continue;
                    };
                    if !bound.is_finite() {
                        return Ok(PosInf);
                    }
                    total += bound * y[i];
                }
                ExtReal::Finite(total)
            }
            ConvexSet::Subspace(s) => {
                let along = norm(s.project(y).as_slice());
                if along <= ORTHOGONALITY_TOL * norm(y).max(1.0) {
                    ExtReal::ZERO
                } else {
                    PosInf
                }
            }
            ConvexSet::Singleton(p) => ExtReal::Finite(dot(p.as_slice(), y)),
            ConvexSet::Polytope { vertices } => ExtReal::Finite(
                vertices
                    .iter()
                    .map(|v| dot(v.as_slice(), y))
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
        })
    }

    /// Normal cone at `x`; `tol` governs both membership and "on the boundary".
    pub fn normal_cone(&self, x: &[f64], tol: f64) -> Result<NormalCone> {
        if !self.contains(x, tol)? {
            return Ok(NormalCone::Empty);
        }
        let n = x.len();
        let xv = Vector::from_column_slice(x);
        Ok(match self {
            ConvexSet::Ball { center, radius } => {
                let d = &xv - center;
                let r = d.norm();
                if r >= radius - tol && r > 0.0 {
                    NormalCone::Cone {
                        generators: vec![d / r],
                        lineality: Vec::new(),
                    }
                } else {
                    NormalCone::zero()
                }
            }
            ConvexSet::Segment { a, b } => {
                let u = b - a;
                let len = u.norm();
                if len == 0.0 {
                    return ConvexSet::Singleton(a.clone()).normal_cone(x, tol);
                }
                let dir = &u / len;
                let perp = Subspace::from_vectors(n, std::slice::from_ref(&dir)).complement();
                let lineality = columns(perp.basis());
                let mut generators = Vec::new();
                if (&xv - a).norm() <= tol {
                    generators.push(-&dir);
                }
                if (&xv - b).norm() <= tol {
                    generators.push(dir);
                }
                NormalCone::Cone {
                    generators,
                    lineality,
                }
            }
            ConvexSet::Box { lower, upper } => {
                let mut generators = Vec::new();
                let mut lineality = Vec::new();
                for i in 0..n {
                    let at_lower = (x[i] - lower[i]).abs() <= tol;
                    let at_upper = (x[i] - upper[i]).abs() <= tol;
                    if at_lower && at_upper {
                        lineality.push(unit(n, i));
                    } else if at_lower {
                        generators.push(-unit(n, i));
                    } else if at_upper {
                        generators.push(unit(n, i));
                    }
                }
                NormalCone::Cone {
                    generators,
                    lineality,
                }
            }
            ConvexSet::Subspace(s) => NormalCone::Cone {
                generators: Vec::new(),
                lineality: columns(s.complement().basis()),
            },
            ConvexSet::Singleton(_) => NormalCone::Cone {
                generators: Vec::new(),
                lineality: (0..n).map(|i| unit(n, i)).collect(),
            },
            ConvexSet::Polytope { vertices } => polyhedral_cone_rays(
                &vertices.iter().map(|v| v - &xv).collect::<Vec<_>>(),
                n,
            ),
        })
    }

    /// `conv(points) + cone(rays) + span(lines)` description; `None` for balls.
    pub fn generators(&self) -> Result<Option<Generators>> {
        let n = self.dim();
        Ok(Some(match self {
            ConvexSet::Ball { .. } => return Ok(None),
            ConvexSet::Segment { a, b } => Generators {
                points: vec![a.clone(), b.clone()],
                ..Default::default()
            },
            ConvexSet::Singleton(p) => Generators {
                points: vec![p.clone()],
                ..Default::default()
            },
            ConvexSet::Polytope { vertices } => Generators {
                points: vertices.clone(),
                ..Default::default()
            },
            ConvexSet::Subspace(s) => Generators {
                points: vec![Vector::zeros(n)],
                lines: columns(s.basis()),
                ..Default::default()
            },
            ConvexSet::Box { lower, upper } => {
                let mut choices: Vec<Vec<f64>> = Vec::with_capacity(n);
                let mut g = Generators::default();
                for i in 0..n {
                    let (l, u) = (lower[i], upper[i]);
                    match (l.is_finite(), u.is_finite()) {
                        (true, true) if l == u => choices.push(vec![l]),
                        (true, true) => choices.push(vec![l, u]),
                        (true, false) => {
                            choices.push(vec![l]);
                            g.rays.push(unit(n, i));
                        }
                        (false, true) => {
                            choices.push(vec![u]);
                            g.rays.push(-unit(n, i));
                        }
                        (false, false) => {
                            choices.push(vec![0.0]);
                            g.lines.push(unit(n, i));
                        }
                    }
                }
                let branching = choices.iter().filter(|c| c.len() > 1).count();
                if branching > MAX_BOX_VERTEX_DIM {
                    return Err(Error::InvalidArgument(format!(
                        "box with {branching} bounded coordinates is too large to enumerate"
                    )));
                }
                let mut points = vec![Vector::zeros(n)];
                for (i, c) in choices.iter().enumerate() {
                    points = points
                        .into_iter()
                        .flat_map(|p| {
                            c.iter().map(move |&v| {
                                let mut q = p.clone();
                                q[i] = v;
                                q
                            })
                        })
                        .collect();
                }
                g.points = points;
                g
            }
        }))
    }

    /// A random point of a bounded set (uniform for balls, boxes and
    /// segments; random convex combination for polytopes).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vector> {
        if !self.is_bounded() {
            return None;
        }
        let n = self.dim();
        Some(match self {
            ConvexSet::Ball { center, radius } => center + random_in_ball(n, *radius, rng),
            ConvexSet::Segment { a, b } => {
                let t: f64 = rng.random();
                a + (b - a) * t
            }
            ConvexSet::Box { lower, upper } => {
                Vector::from_fn(n, |i, _| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>())
            }
            ConvexSet::Subspace(_) => Vector::zeros(n),
            ConvexSet::Singleton(p) => p.clone(),
            ConvexSet::Polytope { vertices } => {
                let w: Vec<f64> = vertices.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let total: f64 = w.iter().sum();
                let mut p = Vector::zeros(n);
                for (v, wi) in vertices.iter().zip(&w) {
                    p += v * (wi / total);
                }
                p
            }
        })
    }
}

/// Uniformly distributed direction on the unit sphere of `R^n`.
pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let r = v.norm();
        if r > 1e-12 {
            return v / r;
        }
    }
}

/// Uniform point in the ball of the given radius about the origin.
pub fn random_in_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vector {
    let u: f64 = rng.random();
    random_unit(n, rng) * (radius * u.powf(1.0 / n as f64))
}

fn columns(m: &Matrix) -> Vec<Vector> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

/// Generators of `{g : <d_j, g> <= 0 for all j}` by enumerating the extreme
/// rays of its pointed part. Exponential in the dimension; desk-scale only.
fn polyhedral_cone_rays(rows: &[Vector], n: usize) -> NormalCone {
    let d = Matrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let lin = Subspace::from_constraints(&d);
    let lineality = columns(lin.basis());
    let pointed_dim = n - lin.dim();
    if pointed_dim == 0 {
        return NormalCone::Cone {
            generators: Vec::new(),
            lineality,
        };
    }
    let scale = rows.iter().map(|r| r.amax()).fold(0.0, f64::max).max(1.0);
    let feasible = |g: &Vector| rows.iter().all(|r| r.dot(g) <= 1e-10 * scale);
    let mut generators: Vec<Vector> = Vec::new();
    let push = |g: Vector, generators: &mut Vec<Vector>| {
        if !generators.iter().any(|h| (h - &g).norm() < 1e-9) {
            generators.push(g);
        }
    };
    let k = pointed_dim - 1;
    let nontrivial: Vec<usize> = (0..rows.len()).filter(|&j| rows[j].norm() > 1e-12 * scale).collect();
    for subset in combinations(nontrivial.len(), k) {
        let mut m = Matrix::zeros(k + lin.dim(), n);
        for (r, &j) in subset.iter().enumerate() {
            m.row_mut(r).copy_from(&rows[nontrivial[j]].transpose());
        }
        for c in 0..lin.dim() {
            m.row_mut(k + c).copy_from(&lin.basis().column(c).transpose());
        }
        let ns = crate::linalg::null_space(&m);
        if ns.ncols() != 1 {
            continue;
        }
        let r = ns.column(0).into_owned();
        for cand in [r.clone(), -r] {
            if feasible(&cand) {
                push(cand, &mut generators);
            }
        }
    }
    NormalCone::Cone {
        generators,
        lineality,
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether `⋃_{λ>0} λ(D1 − D2)` is a linear subspace.
///
/// In finite dimensions this cone is automatically closed, and it is a
/// subspace iff `0 ∈ ri(D1 − D2)`. Balls are handled through that criterion
/// directly; every other variant through a finite generator set of the
/// difference, whose cone is a subspace iff some strictly positive
/// combination of all generators vanishes (decided by NNLS).
pub fn minkowski_span_closed_subspace(d1: &ConvexSet, d2: &ConvexSet) -> Result<bool> {
    check_dim(d1.dim(), d2.dim())?;
    let n = d1.dim();
    match (d1, d2) {
        (_, ConvexSet::Ball { center, radius }) => {
            return Ok(d1.distance(center.as_slice())? < *radius);
        }
        (ConvexSet::Ball { center, radius }, _) => {
            return Ok(d2.distance(center.as_slice())? < *radius);
        }
        _ => {}
    }
    let g1 = d1.generators()?.expect("balls handled above");
    let g2 = d2.generators()?.expect("balls handled above");
    let mut gens: Vec<Vector> = Vec::new();
    for p in &g1.points {
        for q in &g2.points {
            gens.push(p - q);
        }
    }
    gens.extend(g1.rays.iter().cloned());
    gens.extend(g2.rays.iter().map(|r| -r));
    for l in g1.lines.iter().chain(&g2.lines) {
        gens.push(l.clone());
        gens.push(-l);
    }
    Ok(cone_is_subspace(&gens, n))
}

/// `cone(gens)` is a linear subspace iff `G λ = 0` for some `λ >= 1`, i.e.
/// iff `min_{μ >= 0} ||G μ + G 1|| = 0`.
pub fn cone_is_subspace(gens: &[Vector], n: usize) -> bool {
    if gens.is_empty() {
        return true;
    }
    let g = Matrix::from_fn(n, gens.len(), |r, c| gens[c][r]);
    let target = -(&g * Vector::from_element(gens.len(), 1.0));
    let mu = nnls(&g, &target);
    let residual = (&g * mu - &target).norm();
    let scale = gens.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    residual <= 1e-9 * scale * (gens.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{assert_close, rng};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn e1_segment(n: usize) -> ConvexSet {
        ConvexSet::segment(Vector::zeros(n), unit(n, 0)).unwrap()
    }

    #[test]
    fn membership_examples() {
        let ball = ConvexSet::unit_ball(2);
        assert!(ball.contains(&[1.0, 0.0], 0.0).unwrap());
        let seg = e1_segment(3);
        assert!(seg.contains(&[0.5, 0.0, 0.0], 0.0).unwrap());
        assert!(!seg.contains(&[0.5, 0.1, 0.0], 1e-9).unwrap());
        assert_eq!(
            seg.contains(&[0.5, 0.0], 0.0),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn support_examples() {
        let ball = ConvexSet::unit_ball(2);
        assert_eq!(ball.support(&[3.0, 4.0]).unwrap(), ExtReal::Finite(5.0));
        let seg = e1_segment(5);
        let mut y = vec![0.0; 5];
        y[0] = 0.5;
        assert_eq!(seg.support(&y).unwrap(), ExtReal::Finite(0.5));
        assert_eq!(seg.support(&[0.0; 5]).unwrap(), ExtReal::ZERO);

        let line = ConvexSet::Subspace(Subspace::from_vectors(2, &[v(&[1.0, 1.0])]));
        assert_eq!(line.support(&[1.0, -1.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(line.support(&[1.0, 0.0]).unwrap(), PosInf);

        let half = ConvexSet::boxed(v(&[0.0, -1.0]), v(&[f64::INFINITY, 1.0])).unwrap();
        assert_eq!(half.support(&[1.0, 0.0]).unwrap(), PosInf);
        assert_eq!(half.support(&[-1.0, 2.0]).unwrap(), ExtReal::Finite(2.0));
    }

    #[test]
    fn ball_normal_cone_cases() {
        let ball = ConvexSet::unit_ball(2);
        assert!(ball.normal_cone(&[0.5, 0.0], 1e-12).unwrap().is_zero());
        match ball.normal_cone(&[0.0, 1.0], 1e-12).unwrap() {
            NormalCone::Cone { generators, lineality } => {
                assert_eq!(generators.len(), 1);
                assert!(lineality.is_empty());
                assert_close(generators[0][1], 1.0, 1e-15);
            }
            NormalCone::Empty => panic!("boundary point"),
        }
        assert!(ball.normal_cone(&[2.0, 0.0], 1e-12).unwrap().is_empty());
    }

    #[test]
    fn segment_normal_cone_at_endpoints() {
        let seg = e1_segment(2);
        let at0 = seg.normal_cone(&[0.0, 0.0], 1e-12).unwrap();
        assert!(at0.contains(&[-3.0, 7.0], 1e-10));
        assert!(!at0.contains(&[1.0, 0.0], 1e-6));
        let mid = seg.normal_cone(&[0.5, 0.0], 1e-12).unwrap();
        assert!(mid.contains(&[0.0, -2.0], 1e-10));
        assert!(!mid.contains(&[-1.0, 0.0], 1e-6));
    }

    #[test]
    fn polytope_membership_and_cone() {
        let tri = ConvexSet::polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!(tri.contains(&[0.2, 0.2], 0.0).unwrap());
        assert_close(tri.distance(&[1.0, 1.0]).unwrap(), 0.5f64.sqrt(), 1e-12);
        let nc = tri.normal_cone(&[0.0, 0.0], 1e-12).unwrap();
        assert!(nc.contains(&[-1.0, -2.0], 1e-10));
        assert!(!nc.contains(&[1.0, -2.0], 1e-6));
        let edge = tri.normal_cone(&[0.5, 0.5], 1e-12).unwrap();
        assert!(edge.contains(&[1.0, 1.0], 1e-10));
        assert!(!edge.contains(&[1.0, 0.0], 1e-6));
    }

    #[test]
    fn transversality_examples() {
        let whole = ConvexSet::boxed(
            v(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            v(&[f64::INFINITY, f64::INFINITY]),
        )
        .unwrap();
        assert!(minkowski_span_closed_subspace(&whole, &ConvexSet::unit_ball(2)).unwrap());
        let seg = e1_segment(2);
        assert!(minkowski_span_closed_subspace(&seg, &seg).unwrap());
        let origin = ConvexSet::Singleton(Vector::zeros(2));
        assert!(!minkowski_span_closed_subspace(&origin, &seg).unwrap());
        // a ball touching the origin only on its boundary
        let touching = ConvexSet::ball(v(&[1.0, 0.0]), 1.0).unwrap();
        assert!(!minkowski_span_closed_subspace(&origin, &touching).unwrap());
        assert!(minkowski_span_closed_subspace(
            &ConvexSet::Subspace(Subspace::whole(2)),
            &ConvexSet::unit_ball(2)
        )
        .unwrap());
    }

    /// Brute-force oracle: sample directions of D1 − D2 on a fine angular
    /// grid (2-D only) and test whether the realized direction set is
    /// symmetric under negation.
    fn sampled_cone_is_symmetric(d1: &ConvexSet, d2: &ConvexSet) -> bool {
        let mut r = rng(11);
        let bins = 720usize;
        let mut hit = vec![false; bins];
        let mut zero_only = true;
        for _ in 0..20_000 {
            let p = d1.sample(&mut r).unwrap();
            let q = d2.sample(&mut r).unwrap();
            let d = p - q;
            if d.norm() < 1e-9 {
                continue;
            }
            zero_only = false;
            let ang = d[1].atan2(d[0]).rem_euclid(std::f64::consts::TAU);
            hit[((ang / std::f64::consts::TAU) * bins as f64) as usize % bins] = true;
        }
        if zero_only {
            return true;
        }
        (0..bins).all(|b| !hit[b] || hit[(b + bins / 2) % bins] || hit[(b + bins / 2 + 1) % bins] || hit[(b + bins / 2 + bins - 1) % bins])
    }

    #[test]
    fn transversality_agrees_with_sampling_oracle() {
        let seg = e1_segment(2);
        let origin = ConvexSet::Singleton(Vector::zeros(2));
        let square = ConvexSet::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let corner = ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        for (a, b) in [(&seg, &seg), (&origin, &seg), (&origin, &square), (&origin, &corner), (&corner, &corner)] {
            assert_eq!(
                minkowski_span_closed_subspace(a, b).unwrap(),
                sampled_cone_is_symmetric(a, b),
                "{a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn closed_form_support_matches_sampling() {
        let mut r = rng(3);
        let sets = [
            ConvexSet::ball(v(&[0.5, -1.0]), 2.0).unwrap(),
            e1_segment(2),
            ConvexSet::boxed(v(&[-1.0, 0.0]), v(&[2.0, 0.5])).unwrap(),
            ConvexSet::polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 2.0]), v(&[-1.0, 1.0])]).unwrap(),
        ];
        for c in &sets {
            for _ in 0..5 {
                let y = random_unit(2, &mut r) * 3.0;
                let closed = c.support(y.as_slice()).unwrap().finite().unwrap();
                let mut best = f64::NEG_INFINITY;
                for _ in 0..100_000 {
                    best = best.max(c.sample(&mut r).unwrap().dot(&y));
                }
                // sampling can only undershoot the supremum
                assert!(best <= closed + 1e-12);
                assert!(closed - best <= 1e-6 * 3.0 + 5e-2, "{c:?}: {closed} vs {best}");
            }
        }
    }

    #[test]
    fn normal_cone_generators_satisfy_variational_inequality() {
        let mut r = rng(5);
        let sets = [
            ConvexSet::unit_ball(3),
            e1_segment(3),
            ConvexSet::boxed(v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0])).unwrap(),
            ConvexSet::polytope(vec![v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap(),
        ];
        for c in &sets {
            for _ in 0..20 {
                // push a random point onto the boundary to get a nontrivial cone
                let outside = random_unit(3, &mut r) * 3.0;
                let x = c.project(outside.as_slice()).unwrap();
                let NormalCone::Cone { generators, lineality } = c.normal_cone(x.as_slice(), 1e-9).unwrap() else {
                    panic!("projection lies in C");
                };
                let mut dirs = generators.clone();
                for l in &lineality {
                    dirs.push(l.clone());
                    dirs.push(-l);
                }
                for _ in 0..10_000 / 20 {
                    let s = c.sample(&mut r).unwrap();
                    for g in &dirs {
                        assert!((&s - &x).dot(g) <= 1e-10, "{c:?}");
                    }
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn support_positively_homogeneous(
                y in proptest::collection::vec(-5.0f64..5.0, 2),
                lambda in 0.0f64..10.0,
            ) {
                let sets = [
                    ConvexSet::unit_ball(2),
                    ConvexSet::segment(v(&[1.0, 0.0]), v(&[0.0, 2.0])).unwrap(),
                    ConvexSet::boxed(v(&[-1.0, -2.0]), v(&[3.0, 1.0])).unwrap(),
                ];
                let ys: Vec<f64> = y.iter().map(|t| t * lambda).collect();
                for c in &sets {
                    let a = c.support(&ys).unwrap().finite().unwrap();
                    let b = lambda * c.support(&y).unwrap().finite().unwrap();
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                }
            }
        }
    }
}
