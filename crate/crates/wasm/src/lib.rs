//! Browser demo: three small interactive computations exported through
//! wasm-bindgen. Every export returns a JSON string.
//!
//! - `conjugate_profile`: a one-dimensional function, its grid conjugate and
//!   biconjugate.
//! - `ex44_margin`: both sides of the sum-of-conjugates inequality for the
//!   quarter turn and the unit disc at a chosen `x*`.
//! - `ex52_gap_profile`: the one-dimensional profile whose maximum is the
//!   right side of the truncated-shift gap.

use bigconj_core::counterexamples::rotation;
use bigconj_core::fitzpatrick::BivariateFunction;
use bigconj_core::functions::{axis, legendre_1d};
use bigconj_core::linalg::{dot, unit};
use bigconj_core::shift::TruncatedShift;
use bigconj_core::{ConvexFunction, ConvexSet, ExtReal, Matrix, Vector};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct ConjugateProfile {
    pub kind: String,
    pub x: Vec<f64>,
    pub f: Vec<ExtReal>,
    pub y: Vec<f64>,
    pub conjugate: Vec<ExtReal>,
    pub biconjugate: Vec<ExtReal>,
    /// `max |f** - f|` where `f` is finite.
    pub biconjugate_gap: f64,
    pub spacing: f64,
}

fn fixture(kind: &str) -> Result<ConvexFunction, String> {
    let e = |e: bigconj_core::Error| e.to_string();
    Ok(match kind {
        "abs" => ConvexFunction::Norm { dim: 1, scale: 1.0 },
        "half_square" => ConvexFunction::quadratic(Matrix::identity(1, 1), Vector::zeros(1), 0.0).map_err(e)?,
        "indicator_0_1" => {
            ConvexFunction::Indicator(ConvexSet::segment(Vector::zeros(1), Vector::from_vec(vec![1.0])).map_err(e)?)
        }
        other => return Err(format!("unknown function {other:?}; try abs, half_square, indicator_0_1")),
    })
}

pub fn conjugate_profile_impl(kind: &str, n: usize, box_radius: f64) -> Result<ConjugateProfile, String> {
    if !(3..=4097).contains(&n) || n.is_multiple_of(2) {
        return Err(format!("grid size must be odd and in 3..=4097, got {n}"));
    }
    if !(box_radius > 0.0 && box_radius.is_finite()) {
        return Err(format!("box radius must be positive, got {box_radius}"));
    }
    let f = fixture(kind)?;
    let x = axis(box_radius, n);
    let y = axis(2.0 * box_radius, n);
    let fv: Vec<ExtReal> = x.iter().map(|&t| f.eval(&[t])).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let conj = legendre_1d(&x, &fv, &y).map_err(|e| e.to_string())?;
    let bi = legendre_1d(&y, &conj, &x).map_err(|e| e.to_string())?;
    let gap = fv
        .iter()
        .zip(&bi)
        .filter_map(|(a, b)| match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
            _ => None,
        })
        .fold(0.0, f64::max);
    Ok(ConjugateProfile {
        kind: kind.into(),
        spacing: 2.0 * box_radius / (n - 1) as f64,
        x,
        f: fv,
        y,
        conjugate: conj,
        biconjugate: bi,
        biconjugate_gap: gap,
    })
}

#[derive(Debug, Serialize)]
pub struct Ex44Point {
    pub xstar: [f64; 2],
    pub zstar: [f64; 2],
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub margin: ExtReal,
}

/// Quarter turn `A` and unit disc `C` at `z = 0`:
/// `LHS(x*) = F_A*(x*, 0) + F_{N_C}*(z* - x*, 0)` against
/// `RHS(x*) = σ_C(x* - A0)`, the conjugate of `F_A □₂ F_{N_C}` at `(x*, 0)`.
pub fn ex44_margin_impl(xstar: [f64; 2], zstar: [f64; 2]) -> Result<Ex44Point, String> {
    let e = |e: bigconj_core::Error| e.to_string();
    let a = rotation(2).map_err(e)?;
    let c = ConvexSet::unit_ball(2);
    let fa = BivariateFunction::fitz_linear(a);
    let fc = BivariateFunction::FitzNormalCone(c.clone());
    let z = [0.0, 0.0];
    let u = [zstar[0] - xstar[0], zstar[1] - xstar[1]];
    let lhs = fa
        .flipped_conjugate_exact(&xstar, &z)
        .map_err(e)?
        .expect("closed form")
        .checked_add(fc.flipped_conjugate_exact(&u, &z).map_err(e)?.expect("closed form"))
        .map_err(e)?;
    let rhs = c.support(&xstar).map_err(e)?;
    let margin = match lhs {
        ExtReal::Finite(_) => lhs.checked_sub(rhs).map_err(e)?,
        other => other,
    };
    Ok(Ex44Point { xstar, zstar, lhs, rhs, margin })
}

#[derive(Debug, Serialize)]
pub struct Ex52Profile {
    pub n: usize,
    /// `<e1, S e1>`.
    pub coupling: f64,
    pub lhs_at_0: ExtReal,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub rhs: f64,
    pub t_star: f64,
    pub margin: f64,
}

/// `t ↦ t<Se1, e1> - t²<e1, Se1>` on `[0, 1]` and the left side at `x* = 0`.
pub fn ex52_gap_profile_impl(n: usize, points: usize) -> Result<Ex52Profile, String> {
    if !(2..=512).contains(&n) {
        return Err(format!("truncation size must be in 2..=512, got {n}"));
    }
    if !(2..=100_001).contains(&points) {
        return Err(format!("profile points must be in 2..=100001, got {points}"));
    }
    let e = |e: bigconj_core::Error| e.to_string();
    let ts = TruncatedShift::build(n).map_err(e)?;
    let s = ts.adjoint_selection();
    let e1 = unit(n, 0);
    let se1 = ts.apply_s(e1.as_slice()).map_err(e)?;
    let coupling = dot(e1.as_slice(), se1.as_slice());
    let fs = BivariateFunction::fitz_linear(s);
    let fc = BivariateFunction::FitzNormalCone(ConvexSet::segment(Vector::zeros(n), e1.clone()).map_err(e)?);
    let zero = vec![0.0; n];
    let lhs = fs
        .flipped_conjugate_exact(&zero, &zero)
        .map_err(e)?
        .expect("closed form")
        .checked_add(fc.flipped_conjugate_exact(se1.as_slice(), &zero).map_err(e)?.expect("closed form"))
        .map_err(e)?;
    let t: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
    let values: Vec<f64> = t.iter().map(|&t| t * coupling - t * t * coupling).collect();
    let (k, &rhs) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least two points");
    Ok(Ex52Profile {
        n,
        coupling,
        lhs_at_0: lhs,
        t_star: t[k],
        margin: lhs.to_f64() - rhs,
        t,
        values,
        rhs,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())),
        Err(m) => Err(JsError::new(&m)),
    }
}

#[wasm_bindgen]
pub fn conjugate_profile(kind: &str, n: usize, box_radius: f64) -> Result<String, JsError> {
    to_js(conjugate_profile_impl(kind, n, box_radius))
}

#[wasm_bindgen]
pub fn ex44_margin(x1: f64, x2: f64, z1: f64, z2: f64) -> Result<String, JsError> {
    to_js(ex44_margin_impl([x1, x2], [z1, z2]))
}

#[wasm_bindgen]
pub fn ex52_gap_profile(n: usize, points: usize) -> Result<String, JsError> {
    to_js(ex52_gap_profile_impl(n, points))
}
