//! Functions sampled on uniform grids over `[-R, R]^d`, `d ∈ {1, 2}`, and
//! their discrete Legendre–Fenchel transforms.

use std::io::{Read, Write};

use serde::Serialize;

use super::ConvexFunction;
use crate::error::{check_dim, Error, Result};
use crate::extreal::{ExtReal, PosInf};

pub const DEFAULT_BOX_RADIUS: f64 = 4.0;
pub const DEFAULT_N_1D: usize = 257;
pub const DEFAULT_N_2D: usize = 65;

/// Values of a function on the grid `c(i) = R (2i - (N-1)) / (N-1)`, per axis.
///
/// The coordinates are symmetric about 0, so `c(N-1-i) = -c(i)` exactly.
/// For `d = 2` the value of `(c(i), c(j))` is stored at `i * N + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    box_radius: f64,
    n: usize,
    dim: usize,
    values: Vec<ExtReal>,
}

impl GridFunction {
    pub fn new(box_radius: f64, n: usize, dim: usize, values: Vec<ExtReal>) -> Result<Self> {
        if !(box_radius > 0.0 && box_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("box radius {box_radius}")));
        }
        if n < 3 {
            return Err(Error::InvalidArgument(format!("grid needs N >= 3, got {n}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        check_dim(n.pow(dim as u32), values.len())?;
        if values.iter().any(|v| v.is_neg_inf()) {
            return Err(Error::InvalidArgument("grid values must not be -inf".into()));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::AllInfinite);
        }
        Ok(GridFunction {
            box_radius,
            n,
            dim,
            values,
        })
    }

    /// Samples `f` at every grid point.
    pub fn sample(f: &ConvexFunction, box_radius: f64, n: usize) -> Result<Self> {
        let dim = f.dim();
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        let axis = axis(box_radius, n);
        let values = if dim == 1 {
            axis.iter().map(|&x| f.eval(&[x])).collect::<Result<Vec<_>>>()?
        } else {
            let mut v = Vec::with_capacity(n * n);
            for &x in &axis {
                for &y in &axis {
                    v.push(f.eval(&[x, y])?);
                }
            }
            v
        };
        GridFunction::new(box_radius, n, dim, values)
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.box_radius / (self.n - 1) as f64
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn coord(&self, i: usize) -> f64 {
        coord(self.box_radius, self.n, i)
    }

    pub fn axis(&self) -> Vec<f64> {
        axis(self.box_radius, self.n)
    }

    pub fn at(&self, idx: &[usize]) -> ExtReal {
        match idx {
            [i] => self.values[*i],
            [i, j] => self.values[i * self.n + j],
            _ => panic!("grid index of length {}", idx.len()),
        }
    }

    /// Multilinear interpolation; `+inf` outside the box or when any
    /// neighbor carrying positive weight is `+inf`.
    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        let mut cells = [(0usize, 0.0f64); 2];
        for (k, &xk) in x.iter().enumerate() {
            match self.locate(xk) {
                Some(c) => cells[k] = c,
                None => return Ok(PosInf),
            }
        }
        let mut total = 0.0;
        let corners: &[(usize, usize)] = if self.dim == 1 {
            &[(0, 0), (1, 0)]
        } else {
            &[(0, 0), (0, 1), (1, 0), (1, 1)]
        };
        for &(a, b) in corners {
            let (i0, t0) = cells[0];
            let w0 = if a == 0 { 1.0 - t0 } else { t0 };
            let (idx, w) = if self.dim == 1 {
                (vec![i0 + a], w0)
            } else {
                let (i1, t1) = cells[1];
                let w1 = if b == 0 { 1.0 - t1 } else { t1 };
                (vec![i0 + a, i1 + b], w0 * w1)
            };
            if w == 0.0 {
                continue;
            }
            match self.at(&idx) {
                ExtReal::Finite(v) => total += w * v,
                _ => return Ok(PosInf),
            }
        }
        Ok(ExtReal::Finite(total))
    }

    /// Cell index and fractional offset, snapping exact grid coordinates.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let r = self.box_radius;
        if !(x >= -r && x <= r) {
            return None;
        }
        let s = (x + r) / self.spacing();
        let k = s.round().clamp(0.0, (self.n - 1) as f64) as usize;
        if self.coord(k) == x {
            return Some(if k == self.n - 1 { (k - 1, 1.0) } else { (k, 0.0) });
        }
        let i = (s.floor() as usize).min(self.n - 2);
        let t = ((x - self.coord(i)) / (self.coord(i + 1) - self.coord(i))).clamp(0.0, 1.0);
        Some((i, t))
    }

    /// Discrete conjugate on the same box in the dual variable:
    /// `g(y) = max_x <x, y> - f(x)` over grid points `x`.
    ///
    /// `d = 1` uses the linear-time transform, `d = 2` applies it along
    /// each axis in turn.
    pub fn conjugate(&self) -> Result<GridFunction> {
        let axis = self.axis();
        let values = if self.dim == 1 {
            legendre_1d(&axis, &self.values, &axis)?
        } else {
            conjugate_2d_separable(&axis, &self.values, self.n)?
        };
        GridFunction::new(self.box_radius, self.n, self.dim, values)
    }

    /// The `O(N^{2d})` reference transform.
    pub fn conjugate_brute(&self) -> Result<GridFunction> {
        let axis = self.axis();
        let values = if self.dim == 1 {
            legendre_1d_brute(&axis, &self.values, &axis)?
        } else {
            conjugate_2d_brute(&axis, &self.values, self.n)?
        };
        GridFunction::new(self.box_radius, self.n, self.dim, values)
    }

    /// CSV layout: a `dim,R,N` header and its row, then `i,value` (or
    /// `i,j,value`) rows with `inf` for `+∞`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        out.write_record(["dim", "R", "N"]).map_err(csv_err)?;
        out.write_record([self.dim.to_string(), self.box_radius.to_string(), self.n.to_string()])
            .map_err(csv_err)?;
        for (k, v) in self.values.iter().enumerate() {
            if self.dim == 1 {
                out.write_record([k.to_string(), v.to_string()]).map_err(csv_err)?;
            } else {
                out.write_record([(k / self.n).to_string(), (k % self.n).to_string(), v.to_string()])
                    .map_err(csv_err)?;
            }
        }
        out.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(true)
            .from_reader(r);
        let bad = |m: String| Error::Csv(m);
        let mut records = rdr.records();
        let head = records
            .next()
            .ok_or_else(|| bad("missing dim,R,N row".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let field = |rec: &csv::StringRecord, k: usize| -> Result<String> {
            rec.get(k)
                .map(|s| s.trim().to_string())
                .ok_or_else(|| bad(format!("line {:?}: missing field {k}", rec.position().map(|p| p.line()))))
        };
        let dim: usize = field(&head, 0)?.parse().map_err(|e| bad(format!("dim: {e}")))?;
        let radius: f64 = field(&head, 1)?.parse().map_err(|e| bad(format!("R: {e}")))?;
        let n: usize = field(&head, 2)?.parse().map_err(|e| bad(format!("N: {e}")))?;
        if dim != 1 && dim != 2 {
            return Err(bad(format!("dim must be 1 or 2, got {dim}")));
        }
        let total = n.checked_pow(dim as u32).ok_or_else(|| bad("N too large".into()))?;
        let mut values = vec![None; total];
        for rec in records {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let idx = if dim == 1 {
                field(&rec, 0)?.parse::<usize>().map_err(|e| bad(format!("line {line}: {e}")))?
            } else {
                let i: usize = field(&rec, 0)?.parse().map_err(|e| bad(format!("line {line}: {e}")))?;
                let j: usize = field(&rec, 1)?.parse().map_err(|e| bad(format!("line {line}: {e}")))?;
                if j >= n {
                    return Err(bad(format!("line {line}: index out of range")));
                }
                i * n + j
            };
            let v: ExtReal = field(&rec, dim)?.parse().map_err(|e| bad(format!("line {line}: {e}")))?;
            let slot = values
                .get_mut(idx)
                .ok_or_else(|| bad(format!("line {line}: index out of range")))?;
            *slot = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(k, v)| v.ok_or_else(|| bad(format!("missing value for grid index {k}"))))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(radius, n, dim, values)
    }
}

pub fn coord(r: f64, n: usize, i: usize) -> f64 {
    r * (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64
}

pub fn axis(r: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| coord(r, n, i)).collect()
}

/// `max_i fl(x_i * y - f_i)` over finite `f_i`, for every `y`.
pub fn legendre_1d_brute(xs: &[f64], f: &[ExtReal], ys: &[f64]) -> Result<Vec<ExtReal>> {
    let pts = finite_points(xs, f)?;
    Ok(ys
        .iter()
        .map(|&y| {
            let best = pts.iter().map(|&(x, fx)| x * y - fx).fold(f64::NEG_INFINITY, f64::max);
            ExtReal::Finite(best)
        })
        .collect())
}

/// Linear-time discrete Legendre transform for increasing `xs` and `ys`.
///
/// Walks the lower convex hull of the finite points with a monotone pointer,
/// then rescans the neighbors whose value ties the hull maximum up to
/// roundoff. For convex input the candidate values are concave along the
/// grid, so the rescan is short and the output is bit-identical to
/// [`legendre_1d_brute`]. Non-convex input still gets the exact transform up
/// to roundoff, since the maximum sits on the hull.
pub fn legendre_1d(xs: &[f64], f: &[ExtReal], ys: &[f64]) -> Result<Vec<ExtReal>> {
    let pts = finite_points(xs, f)?;
    let hull = lower_hull(&pts);
    let val = |i: usize, y: f64| pts[i].0 * y - pts[i].1;
    let mut out = Vec::with_capacity(ys.len());
    let mut k = 0usize;
    for &y in ys {
        while k + 1 < hull.len() && val(hull[k + 1], y) >= val(hull[k], y) {
            k += 1;
        }
        let peak = hull[k];
        let mut best = val(peak, y);
        let slack = |b: f64| 1e-9 * (1.0 + b.abs());
        let mut i = peak;
        while i + 1 < pts.len() {
            i += 1;
            let v = val(i, y);
            if v < best - slack(best) {
                break;
            }
            best = best.max(v);
        }
        let mut i = peak;
        while i > 0 {
            i -= 1;
            let v = val(i, y);
            if v < best - slack(best) {
                break;
            }
            best = best.max(v);
        }
        out.push(ExtReal::Finite(best));
    }
    Ok(out)
}

fn finite_points(xs: &[f64], f: &[ExtReal]) -> Result<Vec<(f64, f64)>> {
    check_dim(xs.len(), f.len())?;
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(f)
        .filter_map(|(&x, v)| v.finite().map(|fx| (x, fx)))
        .collect();
    if pts.is_empty() {
        return Err(Error::AllInfinite);
    }
    Ok(pts)
}

/// Indices of the lower hull of points sorted by abscissa, keeping
/// collinear points.
fn lower_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        while hull.len() >= 2 {
            let (a, b) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
            let c = pts[i];
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Row-wise transform in the second coordinate, then column-wise in the
/// first: `g(y1, y2) = max_i [x_i y1 + max_j (x_j y2 - f_ij)]`.
fn conjugate_2d_separable(axis: &[f64], f: &[ExtReal], n: usize) -> Result<Vec<ExtReal>> {
    // inner[i][l] = max_j x_j * y_l - f(i, j), or -inf for an all-infinite row
    let mut inner = vec![ExtReal::NegInf; n * n];
    for i in 0..n {
        let row = &f[i * n..(i + 1) * n];
        if row.iter().any(|v| v.is_finite()) {
            let h = legendre_1d(axis, row, axis)?;
            inner[i * n..(i + 1) * n].copy_from_slice(&h);
        }
    }
    let mut out = vec![ExtReal::NegInf; n * n];
    for l in 0..n {
        // column l of -inner is the function whose transform we need
        let col: Vec<ExtReal> = (0..n).map(|i| -inner[i * n + l]).collect();
        if !col.iter().any(|v| v.is_finite()) {
            return Err(Error::AllInfinite);
        }
        let g = legendre_1d(axis, &col, axis)?;
        for (k, v) in g.into_iter().enumerate() {
            out[k * n + l] = v;
        }
    }
    Ok(out)
}

fn conjugate_2d_brute(axis: &[f64], f: &[ExtReal], n: usize) -> Result<Vec<ExtReal>> {
    if !f.iter().any(|v| v.is_finite()) {
        return Err(Error::AllInfinite);
    }
    let mut out = Vec::with_capacity(n * n);
    for &y1 in axis {
        for &y2 in axis {
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if let ExtReal::Finite(v) = f[i * n + j] {
                        best = best.max(axis[i] * y1 + (axis[j] * y2 - v));
                    }
                }
            }
            out.push(ExtReal::Finite(best));
        }
    }
    Ok(out)
}

/// Outcome of comparing `f**` with `f` on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct BiconjugateReport {
    pub box_radius: f64,
    pub points_per_axis: usize,
    pub spacing: f64,
    /// `sup |f** - f|` over interior points where `f` and its neighbors are finite.
    pub gap: f64,
    pub points_compared: usize,
    pub bound: f64,
    pub passed: bool,
}

/// Measures `sup |f** - f|` on `|x|_∞ <= R/2`, skipping points next to `+inf`.
/// The reported bound is `2h`.
pub fn biconjugate_check(f: &ConvexFunction, box_radius: f64, n: usize) -> Result<BiconjugateReport> {
    let g = GridFunction::sample(f, box_radius, n)?;
    let bi = g.conjugate()?.conjugate()?;
    let h = g.spacing();
    let mut gap = 0.0f64;
    let mut count = 0usize;
    let inner = |i: usize| g.coord(i).abs() <= box_radius / 2.0 && i > 0 && i + 1 < n;
    let finite_around = |idx: &[usize]| -> bool {
        let mut ok = true;
        let ranges: Vec<Vec<usize>> = idx.iter().map(|&i| vec![i - 1, i, i + 1]).collect();
        if idx.len() == 1 {
            for &a in &ranges[0] {
                ok &= g.at(&[a]).is_finite();
            }
        } else {
            for &a in &ranges[0] {
                for &b in &ranges[1] {
                    ok &= g.at(&[a, b]).is_finite();
                }
            }
        }
        ok
    };
    let mut visit = |idx: &[usize]| {
        if finite_around(idx) {
            if let (Some(a), Some(b)) = (g.at(idx).finite(), bi.at(idx).finite()) {
                gap = gap.max((a - b).abs());
                count += 1;
            }
        }
    };
    for i in (0..n).filter(|&i| inner(i)) {
        if g.dim() == 1 {
            visit(&[i]);
        } else {
            for j in (0..n).filter(|&j| inner(j)) {
                visit(&[i, j]);
            }
        }
    }
    Ok(BiconjugateReport {
        box_radius,
        points_per_axis: n,
        spacing: h,
        gap,
        points_compared: count,
        bound: 2.0 * h,
        passed: count > 0 && gap <= 2.0 * h,
    })
}
