//! Sampled and seeded checks of the alignment implications
//! `<x - y, y*> = ||x - y|| ||y*||, x != y ⇒ bound on ||y*||`.
//!
//! The premise set is thin, so random pairs almost only hit it through
//! `y* = 0`. Analytic premise families are seeded on top.

use rand::Rng;

use super::CounterexampleVerdict;
use crate::error::{Error, Result};
use crate::fitzpatrick::JFunction;
use crate::linalg::{unit, Vector};
use crate::relations::LinearRelation;
use crate::sets::{random_in_ball, random_unit, ConvexSet, NormalCone};
use crate::shift::TruncatedShift;

#[derive(Debug, Clone)]
pub struct ImplicationConfig {
    pub random_pairs: usize,
    pub seeded: usize,
    /// Relative tolerance of the premise and the conclusions.
    pub tol: f64,
}

impl Default for ImplicationConfig {
    fn default() -> Self {
        ImplicationConfig {
            random_pairs: 100_000,
            seeded: 1000,
            tol: 1e-8,
        }
    }
}

fn premise(x: &Vector, y: &Vector, ys: &Vector, tol: f64) -> bool {
    let d = x - y;
    let dn = d.norm();
    dn > tol && (d.dot(ys) - dn * ys.norm()).abs() <= tol * (1.0 + dn * ys.norm())
}

#[derive(Default)]
struct Tally {
    checked: usize,
    hits: usize,
    trivial_hits: usize,
    violations: usize,
    j_violations: usize,
}

impl Tally {
    fn record(&mut self, hit: bool, trivial: bool, ok: bool, j_ok: bool) {
        self.checked += 1;
        if hit {
            self.hits += 1;
            self.trivial_hits += trivial as usize;
            self.violations += !ok as usize;
            self.j_violations += !j_ok as usize;
        }
    }
}

fn j_argument(x: &Vector, xs: &Vector, y: &Vector, ys: &Vector) -> f64 {
    x.norm() + (xs + ys).norm() + y.norm() + (x - y).norm() * ys.norm()
}

/// `(x, Ax) ∈ gra A`, `(y, y*) ∈ gra N_B` with `B` the unit ball:
/// premise ⇒ `||y*|| <= ||x* + y*|| <= j(...)`.
pub fn implication43_check<R: Rng + ?Sized>(
    a: &LinearRelation,
    j: &JFunction,
    cfg: &ImplicationConfig,
    rng: &mut R,
) -> Result<CounterexampleVerdict> {
    let n = a.n();
    let mut v = CounterexampleVerdict::new("thm43-implication", cfg.tol);
    let class = a.classify();
    v.hypothesis("A maximally monotone", class.maximal)?;
    v.hypothesis("A at most single-valued", a.is_single_valued())?;
    v.hypothesis("j increasing with j(g) >= g", j.lower_slope() >= 1.0 && j.verify(1000, 100.0))?;
    let tol = cfg.tol;
    let graph = |rng: &mut R| -> (Vector, Vector) {
        let coords: Vec<f64> = (0..a.graph_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        a.graph_point(&coords)
    };
    let ball_point = |rng: &mut R| -> (Vector, Vector) {
        if rng.random_bool(0.5) {
            (random_in_ball(n, 1.0, rng) * 0.999, Vector::zeros(n))
        } else {
            let y = random_unit(n, rng);
            let g = rng.random_range(0.0..3.0);
            let ys = &y * g;
            (y, ys)
        }
    };
    let judge = |x: &Vector, xs: &Vector, y: &Vector, ys: &Vector| -> (bool, bool) {
        let s = (xs + ys).norm();
        let ok = ys.norm() <= s + tol * (1.0 + s);
        let bound = j.eval(j_argument(x, xs, y, ys));
        (ok, s <= bound + tol * (1.0 + bound))
    };

    let mut random = Tally::default();
    for _ in 0..cfg.random_pairs {
        let (x, xs) = graph(rng);
        let (y, ys) = ball_point(rng);
        let hit = premise(&x, &y, &ys, tol);
        let (ok, j_ok) = judge(&x, &xs, &y, &ys);
        random.record(hit, ys.norm() == 0.0, ok, j_ok);
    }

    // aligned family: y on the sphere, y* = γ y, x = (1 + λ) y ∈ dom A
    let mut seeded = Tally::default();
    let dom = a.domain();
    for _ in 0..cfg.seeded {
        let y = loop {
            let p = dom.project(random_unit(n, rng).as_slice());
            if p.norm() > 1e-3 {
                break p.normalize();
            }
        };
        let ys = &y * rng.random_range(0.1..3.0);
        let x = &y * (1.0 + rng.random_range(0.1..2.0));
        let xs = a
            .apply(x.as_slice(), 1e-9)?
            .point()
            .cloned()
            .ok_or_else(|| Error::HypothesisFailed("seeded x outside dom A".into()))?;
        let hit = premise(&x, &y, &ys, tol);
        let (ok, j_ok) = judge(&x, &xs, &y, &ys);
        seeded.record(hit, false, ok, j_ok);
    }

    // x = 0 against y* = γ y on the sphere: the premise can never hold
    let mut zero_slice = 0usize;
    for _ in 0..cfg.seeded * 10 {
        let y = random_unit(n, rng);
        let ys = &y * rng.random_range(0.1..3.0);
        zero_slice += premise(&Vector::zeros(n), &y, &ys, tol) as usize;
    }

    finish(&mut v, &random, &seeded);
    v.value("zero_slice_premise_hits", zero_slice as f64);
    v.check("x = 0 slice has no premise hits", zero_slice == 0);
    Ok(v.finish())
}

/// `(x, x*) ∈ gra N_C` with `C = [0, e1]`, `(y, Sy)`:
/// premise ⇒ `||y*|| <= ½||y|| <= j(...)`.
pub fn implication52_check<R: Rng + ?Sized>(n: usize, j: &JFunction, cfg: &ImplicationConfig, rng: &mut R) -> Result<CounterexampleVerdict> {
    let ts = TruncatedShift::build(n)?;
    let mut v = CounterexampleVerdict::new("ex52-implication", cfg.tol);
    v.hypothesis("j increasing with j(g) >= g/2", j.lower_slope() >= 0.5 && j.verify(1000, 100.0))?;
    let tol = cfg.tol;
    let c = ConvexSet::segment(Vector::zeros(n), unit(n, 0))?;
    let e1 = unit(n, 0);
    let cone_point = |t: f64, rng: &mut R| -> Result<(Vector, Vector)> {
        let x = &e1 * t;
        let nc = c.normal_cone(x.as_slice(), 1e-12)?;
        let xs = match &nc {
            NormalCone::Cone { generators, lineality } => {
                let gw: Vec<f64> = generators.iter().map(|_| rng.random_range(0.0..2.0)).collect();
                let lw: Vec<f64> = lineality.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
                nc.combine(n, &gw, &lw).unwrap_or_else(|| Vector::zeros(n))
            }
            NormalCone::Empty => Vector::zeros(n),
        };
        Ok((x, xs))
    };
    let judge = |x: &Vector, xs: &Vector, y: &Vector, ys: &Vector| -> (bool, bool) {
        let half = 0.5 * y.norm();
        let ok = ys.norm() <= half + tol * (1.0 + half);
        let bound = j.eval(j_argument(x, xs, y, ys));
        (ok, half <= bound + tol * (1.0 + bound))
    };

    let mut random = Tally::default();
    for k in 0..cfg.random_pairs {
        let t = match k % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..1.0),
        };
        let (x, xs) = cone_point(t, rng)?;
        let y = if k % 50 == 0 { Vector::zeros(n) } else { random_in_ball(n, 2.0, rng) };
        let ys = ts.apply_s(y.as_slice())?;
        let hit = premise(&x, &y, &ys, tol);
        let (ok, j_ok) = judge(&x, &xs, &y, &ys);
        random.record(hit, ys.norm() == 0.0, ok, j_ok);
    }

    // y = y1 e1, y* = S y = ½ y1 e1, x = t0 e1 with 0 < y1 < t0 <= 1; and y = 0
    let mut seeded = Tally::default();
    for k in 0..cfg.seeded {
        let (x, xs, y) = if k % 5 == 4 {
            let (x, xs) = cone_point(rng.random_range(0.05..1.0), rng)?;
            (x, xs, Vector::zeros(n))
        } else {
            let t0 = rng.random_range(0.05..1.0);
            let y1 = rng.random_range(0.01..0.99) * t0;
            let (x, xs) = cone_point(t0, rng)?;
            (x, xs, &e1 * y1)
        };
        let ys = ts.apply_s(y.as_slice())?;
        let hit = premise(&x, &y, &ys, tol);
        let (ok, j_ok) = judge(&x, &xs, &y, &ys);
        seeded.record(hit, ys.norm() == 0.0, ok, j_ok);
    }

    // exhaustive scan at n = 3: y ∈ [-2, 2]^3 on a 41-point grid, 21 values
    // of t; no premise hit may leave the e1 axis
    let ts3 = TruncatedShift::build(3)?;
    let axis = crate::functions::axis(2.0, 41);
    let mut off_axis = 0usize;
    let mut scanned = 0usize;
    for &a in &axis {
        for &b in &axis {
            for &cc in &axis {
                if b == 0.0 && cc == 0.0 {
                    continue;
                }
                let y = Vector::from_vec(vec![a, b, cc]);
                let ys = ts3.apply_s(y.as_slice())?;
                for k in 0..21 {
                    let x = unit(3, 0) * (k as f64 / 20.0);
                    scanned += 1;
                    off_axis += premise(&x, &y, &ys, 1e-6) as usize;
                }
            }
        }
    }

    finish(&mut v, &random, &seeded);
    v.value("off_axis_scanned", scanned as f64);
    v.value("off_axis_premise_hits", off_axis as f64);
    v.check("no premise hit off the e1 axis (n = 3 scan)", off_axis == 0);
    Ok(v.finish())
}

fn finish(v: &mut CounterexampleVerdict, random: &Tally, seeded: &Tally) {
    v.value("random_pairs", random.checked as f64);
    v.value("random_premise_hits", random.hits as f64);
    v.value("random_trivial_hits", random.trivial_hits as f64);
    v.value("seeded_pairs", seeded.checked as f64);
    v.value("seeded_premise_hits", seeded.hits as f64);
    let violations = random.violations + seeded.violations;
    let j_violations = random.j_violations + seeded.j_violations;
    v.value("conclusion_violations", violations as f64);
    v.value("j_violations", j_violations as f64);
    v.check("no conclusion violations among premise hits", violations == 0);
    v.check("no j-bound violations among premise hits", j_violations == 0);
    v.check("at least 100 seeded premise hits", seeded.hits >= 100);
}
