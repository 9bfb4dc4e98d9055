//! The truncated half-diagonal operator `S` with `C = [0, e1]`: the gap
//! between `½` and `⅛`, and maximality of `S + N_C` through its resolvent.

use rand::Rng;

use super::{close, CounterexampleVerdict};
use crate::error::Result;
use crate::extreal::{ExtReal, PosInf};
use crate::fitzpatrick::{partial_inf_conv, BivariateFunction, GridSpec};
use crate::functions::axis;
use crate::linalg::{dot, unit, Vector};
use crate::relations::resolvent_solve;
use crate::sets::{random_in_ball, random_unit, ConvexSet};
use crate::shift::TruncatedShift;

#[derive(Debug, Clone)]
pub struct Example52Config {
    /// Points of the `t`-grid for the one-dimensional reduction.
    pub t_points: usize,
    /// Points of the `t`-grid in the brute-force sup.
    pub brute_t_points: usize,
    /// Grid for the `x*` offsets in `span(e1, e2)` of the brute-force sup.
    pub offset_grid: GridSpec,
    /// Random `x* != 0` where the left side must be `+∞`.
    pub samples: usize,
    pub tol: f64,
}

impl Default for Example52Config {
    fn default() -> Self {
        Example52Config {
            t_points: 10_001,
            brute_t_points: 1001,
            offset_grid: GridSpec { box_radius: 1.0, n: 21 },
            samples: 1000,
            tol: 1e-8,
        }
    }
}

fn segment(n: usize) -> ConvexSet {
    ConvexSet::segment(Vector::zeros(n), unit(n, 0)).expect("same dimension")
}

/// Left side `F*_S(x*, 0) + F*_{N_C}(Se1 - x*, 0)` and right side
/// `(F □₂ F_{N_C})*(Se1, 0)`, where the inf-convolution uses the graph form
/// `ι_{gra S} + <·,·>` of the adjoint-side operator.
///
/// The right side is computed twice: by the one-dimensional reduction
/// `sup_t t<Se1, e1> - t²<e1, Se1>` and by a brute-force sup of
/// `<Se1, x> - (F □₂ F_{N_C})(x, x*)` over `x = t e1`, `x* = S x + w`.
pub fn example52_gap<R: Rng + ?Sized>(n: usize, cfg: &Example52Config, rng: &mut R) -> Result<CounterexampleVerdict> {
    let ts = TruncatedShift::build(n)?;
    let mut v = CounterexampleVerdict::new("ex52-gap", cfg.tol);
    let s = ts.adjoint_selection();
    let class = s.classify();
    v.hypothesis("S maximally monotone", class.maximal)?;
    v.hypothesis("S not skew", !class.skew)?;
    let c = segment(n);
    v.hypothesis("C bounded, C != {0}", c.is_bounded() && !c.is_origin())?;

    let fs = BivariateFunction::fitz_linear(s.clone());
    let gs = BivariateFunction::graph_plus_pairing(s.clone());
    let fc = BivariateFunction::FitzNormalCone(c.clone());
    let e1 = unit(n, 0);
    let se1 = ts.apply_s(e1.as_slice())?;
    let zero = vec![0.0; n];

    let lhs = |xs: &[f64]| -> Result<ExtReal> {
        let u: Vec<f64> = se1.iter().zip(xs).map(|(p, q)| p - q).collect();
        fs.flipped_conjugate_exact(xs, &zero)?
            .expect("closed form")
            .checked_add(fc.flipped_conjugate_exact(&u, &zero)?.expect("closed form"))
    };
    let lhs0 = lhs(&zero)?;
    let lhs_e2 = lhs(unit(n, 1).as_slice())?;
    let mut infinite = 0usize;
    for _ in 0..cfg.samples {
        let xs = random_unit(n, rng) * rng.random_range(1e-3..2.0);
        if lhs(xs.as_slice())?.is_pos_inf() {
            infinite += 1;
        }
    }

    // one-dimensional reduction over t ∈ [0, 1]
    let t_axis: Vec<f64> = (0..cfg.t_points).map(|k| k as f64 / (cfg.t_points - 1) as f64).collect();
    let e1_se1 = dot(e1.as_slice(), se1.as_slice());
    let mut rhs_scan = f64::NEG_INFINITY;
    let mut t_star = 0.0;
    for &t in &t_axis {
        let val = t * e1_se1 - t * t * e1_se1;
        if val > rhs_scan {
            rhs_scan = val;
            t_star = t;
        }
    }

    // brute-force sup over (t e1, S(t e1) + w)
    let inner = GridSpec { box_radius: 1.0, n: 3 };
    let offsets = cfg.offset_grid.axis();
    let mut rhs_brute = f64::NEG_INFINITY;
    let mut evaluated = 0usize;
    for k in 0..cfg.brute_t_points {
        let t = k as f64 / (cfg.brute_t_points - 1) as f64;
        let x = &e1 * t;
        let sx = ts.apply_s(x.as_slice())?;
        for &w1 in &offsets {
            for &w2 in &offsets {
                let mut xs = sx.clone();
                xs[0] += w1;
                xs[1] += w2;
                let f = partial_inf_conv(&gs, &fc, x.as_slice(), xs.as_slice(), &inner)?.value;
                evaluated += 1;
                if let ExtReal::Finite(fv) = f {
                    rhs_brute = rhs_brute.max(dot(se1.as_slice(), x.as_slice()) - fv);
                }
            }
        }
    }
    let rhs = rhs_scan.max(rhs_brute);

    // finite-section controls: the same inequality with consistent functions
    let dual = GridSpec { box_radius: 1.0, n: 21 };
    let mut control_fitz_rhs = PosInf;
    let mut u = vec![0.0; n];
    for idx in 0..dual.count(2)? {
        dual.point(idx, &mut u[..2]);
        let rest: Vec<f64> = se1.iter().zip(&u).map(|(p, q)| p - q).collect();
        let a = fs.flipped_conjugate_exact(&rest, &zero)?.expect("closed form");
        if a.is_pos_inf() {
            continue;
        }
        let b = fc.flipped_conjugate_exact(&u, &zero)?.expect("closed form");
        control_fitz_rhs = control_fitz_rhs.min(a.checked_add(b)?);
    }
    // F_S(0, ·) is finite only on span 𝟙 (the range of the symmetric part of S)
    let ones = ts.ones();
    let mut control_graph_lhs = PosInf;
    for a in axis(1.0, 2001) {
        let xs = &ones * a;
        let u: Vec<f64> = se1.iter().zip(xs.iter()).map(|(p, q)| p - q).collect();
        let val = fs.eval(&zero, xs.as_slice())?.checked_add(c.support(&u)?)?;
        control_graph_lhs = control_graph_lhs.min(val);
    }
    let off_span = fs.eval(&zero, e1.as_slice())?;

    v.value("lhs_at_0", lhs0);
    v.value("lhs_at_e2", lhs_e2);
    v.value("rhs_scan", rhs_scan);
    v.value("rhs_brute", rhs_brute);
    v.value("rhs", rhs);
    v.value("t_star", t_star);
    v.value("brute_points", evaluated as f64);
    v.value("random_xstar_lhs_infinite", infinite as f64);
    v.value("control_fitz_rhs", control_fitz_rhs);
    v.value("control_graph_lhs", control_graph_lhs);
    v.check("lhs at 0 is exactly <e1, Se1>", lhs0 == ExtReal::Finite(e1_se1));
    v.check("lhs is +inf off 0", lhs_e2.is_pos_inf() && infinite == cfg.samples);
    v.check("rhs reductions agree", (rhs_scan - rhs_brute).abs() <= 1e-6);
    v.check("F_S(0, e1) = +inf", off_span.is_pos_inf());
    v.check("controls close the gap", close(control_fitz_rhs, lhs0, 1e-12));
    let margin = lhs0.checked_sub(ExtReal::Finite(rhs))?;
    v.strict_inequality_margin = Some(margin);
    Ok(v.finish())
}

/// Solves `z ∈ x + Sx + N_C(x)` for random `z` in a radius-10 ball and
/// checks the solution graph for pairwise monotonicity.
pub fn example52_maximality<R: Rng + ?Sized>(n: usize, samples: usize, tol: f64, rng: &mut R) -> Result<CounterexampleVerdict> {
    let ts = TruncatedShift::build(n)?;
    let mut v = CounterexampleVerdict::new("ex52-maximality", tol);
    let s = ts.adjoint_selection();
    let class = s.classify();
    v.hypothesis("S monotone", class.monotone)?;
    let c = segment(n);
    let e1 = unit(n, 0);
    let fixed = [(e1.clone(), 2.0 / 3.0), (-&e1, 0.0), (Vector::zeros(n), 0.0)];
    let mut fixed_ok = true;
    for (k, (z, t)) in fixed.iter().enumerate() {
        match resolvent_solve(&s, &c, z.as_slice(), tol) {
            Ok(sol) => {
                let x = Vector::from_vec(sol.x);
                fixed_ok &= (&x - &e1 * *t).norm() <= 1e-12;
                v.value(&format!("fixed_{k}_t"), x[0]);
            }
            Err(_) => fixed_ok = false,
        }
    }
    v.check("fixed resolvent points (2/3, 0, 0)", fixed_ok);

    let mut pts: Vec<(Vector, Vector)> = Vec::with_capacity(samples);
    let mut worst_residual = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..samples {
        let z = random_in_ball(n, 10.0, rng);
        match resolvent_solve(&s, &c, z.as_slice(), tol) {
            Ok(sol) => {
                worst_residual = worst_residual.max(sol.residual);
                let x = Vector::from_vec(sol.x);
                let w = &z - &x;
                pts.push((x, w));
            }
            Err(_) => failures += 1,
        }
    }
    let mut worst_pair = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (&pts[i].0 - &pts[j].0).dot(&(&pts[i].1 - &pts[j].1));
            worst_pair = worst_pair.min(d);
        }
    }
    v.value("samples", samples as f64);
    v.value("failures", failures as f64);
    v.value("worst_residual", worst_residual);
    v.value("worst_pairing", worst_pair);
    v.check("every resolvent solve succeeds within tol", failures == 0 && worst_residual <= tol);
    v.check("solution graph is monotone", pts.len() < 2 || worst_pair >= -1e-9);
    Ok(v.finish())
}
