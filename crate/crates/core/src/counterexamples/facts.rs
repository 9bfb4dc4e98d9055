//! Numeric cross-checks of the facts the refutations are built from:
//! Fitzpatrick functions of normal cones and linear maps, the conjugate of
//! a partial inf-convolution, the conjugation engine and the shift identities.

use rand::Rng;

use super::{CounterexampleVerdict, Table};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::fitzpatrick::{
    flipped_conjugate, interval_normal_cone_sample, simons_zalinescu_crosscheck, BivariateFunction, Escalation,
    GraphSample, GridSpec, PrimalSample,
};
use crate::functions::{
    axis, biconjugate_check, legendre_1d, legendre_1d_brute, ConvexFunction, DEFAULT_BOX_RADIUS, DEFAULT_N_1D,
};
use crate::linalg::{Matrix, Vector};
use crate::relations::LinearRelation;
use crate::sets::{random_in_ball, ConvexSet};
use crate::shift::{identity_sweep, skew_sweep, TruncatedShift};

use super::theorem43::rotation;

/// Fitzpatrick function of a midpoint arc-length sample of `gra N_[-1,1]`
/// against `ι_C ⊕ σ_C`, at `m` and `2m` samples.
pub fn fact41_crosscheck<R: Rng + ?Sized>(m: usize, queries: usize, tol: f64, rng: &mut R) -> Result<CounterexampleVerdict> {
    let mut v = CounterexampleVerdict::new("fact41", tol);
    let c = ConvexSet::segment(Vector::from_vec(vec![-1.0]), Vector::from_vec(vec![1.0]))?;
    let exact = BivariateFunction::FitzNormalCone(c);
    let coarse = GraphSample::new(&interval_normal_cone_sample(m, 1.0))?;
    let fine = GraphSample::new(&interval_normal_cone_sample(2 * m, 1.0))?;
    let mut err_coarse = 0.0f64;
    let mut err_fine = 0.0f64;
    let mut above = false;
    for _ in 0..queries {
        let x = [rng.random_range(-1.0..=1.0)];
        let xs = [rng.random_range(-2.0..=2.0)];
        let e = exact.eval(&x, &xs)?.to_f64();
        let a = coarse.eval(&x, &xs);
        let b = fine.eval(&x, &xs);
        above |= a > e + 1e-12 || b > e + 1e-12;
        err_coarse = err_coarse.max((e - a).abs());
        err_fine = err_fine.max((e - b).abs());
    }
    let ratio = err_fine / err_coarse;
    v.value("samples", m as f64);
    v.value("queries", queries as f64);
    v.value("max_error", err_coarse);
    v.value("max_error_doubled", err_fine);
    v.value("error_ratio", ratio);
    v.check("sample function never exceeds the closed form", !above);
    v.check("max error <= 1e-2", err_coarse <= 1e-2);
    v.check("error halves when the density doubles", (0.4..=0.6).contains(&ratio));
    Ok(v.finish())
}

/// Grid flipped conjugate of `F_A` for the quarter turn in the plane:
/// `<x, x*>` on the graph within `2h`, linear growth off the graph.
pub fn fact42_crosscheck<R: Rng + ?Sized>(
    on_graph: usize,
    off_graph: usize,
    base_radius: f64,
    tol: f64,
    rng: &mut R,
) -> Result<CounterexampleVerdict> {
    let mut v = CounterexampleVerdict::new("fact42", tol);
    let a = rotation(2)?;
    let f = BivariateFunction::fitz_linear(a.clone());
    let grid = GridSpec::new(2.0, 21)?;
    let cache = PrimalSample::from_grid(&f, &grid)?;
    let h = grid.spacing();
    let m = a.as_matrix()?;
    let mut worst_on = 0.0f64;
    let mut closed_ok = true;
    for _ in 0..on_graph {
        let x = random_in_ball(2, 1.0, rng);
        let xs = &m * &x;
        let g = cache.flipped_conjugate(xs.as_slice(), x.as_slice())?.to_f64();
        worst_on = worst_on.max((g - x.dot(&xs)).abs());
        let rec = flipped_conjugate(&f, xs.as_slice(), x.as_slice(), &grid)?;
        closed_ok &= rec.value == ExtReal::Finite(x.dot(&xs));
    }
    let esc = Escalation::new(&f, &GridSpec::new(base_radius, 11)?)?;
    let mut infinite = 0usize;
    let mut min_value = f64::INFINITY;
    for _ in 0..off_graph {
        let x = random_in_ball(2, 1.0, rng);
        let d = crate::sets::random_unit(2, rng) * rng.random_range(1.5..2.0);
        let xs = &m * &x + d;
        let r = esc.eval(xs.as_slice(), x.as_slice())?;
        infinite += r.value.is_pos_inf() as usize;
        min_value = min_value.min(r.values[0]);
        let rec = flipped_conjugate(&f, xs.as_slice(), x.as_slice(), &grid)?;
        closed_ok &= rec.value.is_pos_inf();
    }
    v.value("on_graph_queries", on_graph as f64);
    v.value("on_graph_worst_error", worst_on);
    v.value("bound_2h", 2.0 * h);
    v.value("off_graph_queries", off_graph as f64);
    v.value("off_graph_escalated_infinite", infinite as f64);
    v.value("off_graph_min_value_at_base_radius", min_value);
    v.value("base_radius", base_radius);
    v.check("on-graph grid value within 2h of the pairing", worst_on <= 2.0 * h);
    v.check("closed form agrees with the grid verdicts", closed_ok);
    v.check("off-graph values escalate to +inf", infinite == off_graph);
    v.check("off-graph values exceed 1e6", off_graph == 0 || min_value > 1e6);
    Ok(v.finish())
}

/// Conjugate of `F_A □₂ F_{N_B}` (quarter turn, unit ball) against the
/// minimum of the conjugates, at nine grid-aligned queries.
pub fn fact33_crosscheck(grid_n: usize, tol: f64) -> Result<CounterexampleVerdict> {
    let mut v = CounterexampleVerdict::new("fact33", tol);
    let a = rotation(2)?;
    let m = a.as_matrix()?;
    let f1 = BivariateFunction::fitz_linear(a);
    let f2 = BivariateFunction::FitzNormalCone(ConvexSet::unit_ball(2));
    let grid = GridSpec::new(2.0, grid_n)?;
    let xs_pts = [[0.0, 0.0], [0.5, 0.0], [0.0, -0.5], [0.3, 0.4], [-0.6, 0.2], [0.2, 0.2], [-0.4, -0.4], [0.7, 0.0], [0.0, 0.8]];
    let ds = [[0.0, 0.0], [0.6, 0.0], [0.0, 0.4], [-0.5, 0.5], [0.3, -0.8], [1.0, 0.0], [0.0, -1.0], [-0.6, -0.6], [0.2, 0.4]];
    let queries: Vec<(Vector, Vector)> = xs_pts
        .iter()
        .zip(&ds)
        .map(|(x, d)| {
            let x = Vector::from_row_slice(x);
            let xs = &m * &x + Vector::from_row_slice(d);
            (x, xs)
        })
        .collect();
    let rep = simons_zalinescu_crosscheck(&f1, &f2, &queries, &grid, &grid, &grid)?;
    v.hypothesis("transversality of the projected domains", rep.transversality)?;
    v.value("queries", queries.len() as f64);
    v.value("max_gap", rep.max_gap);
    v.value("bound_2h", rep.bound);
    v.value("grid_N", grid_n as f64);
    v.check("gap <= 2h at every query", rep.passed);
    v.tables.push(Table {
        name: "fact33".into(),
        header: ["x1", "x2", "xs1", "xs2", "lhs", "rhs", "gap"].map(String::from).to_vec(),
        rows: rep
            .records
            .iter()
            .map(|r| vec![r.x[0], r.x[1], r.xstar[0], r.xstar[1], r.lhs.to_f64(), r.rhs.to_f64(), r.gap])
            .collect(),
    });
    Ok(v.finish())
}

/// Random convex piecewise-linear data on the grid: nondecreasing slopes,
/// and `+inf` outside a random window in about a third of the cases.
fn random_convex_grid<R: Rng + ?Sized>(xs: &[f64], rng: &mut R) -> Vec<ExtReal> {
    let n = xs.len();
    let mut slopes: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-5.0..5.0)).collect();
    slopes.sort_by(f64::total_cmp);
    let mut f = Vec::with_capacity(n);
    let mut val = rng.random_range(-1.0..1.0);
    f.push(val);
    for i in 1..n {
        val += slopes[i - 1] * (xs[i] - xs[i - 1]);
        f.push(val);
    }
    let mut out: Vec<ExtReal> = f.into_iter().map(ExtReal::Finite).collect();
    if rng.random_bool(1.0 / 3.0) {
        let lo = rng.random_range(0..n / 2);
        let hi = rng.random_range(n / 2..n);
        for (i, v) in out.iter_mut().enumerate() {
            if i < lo || i > hi {
                *v = crate::PosInf;
            }
        }
    }
    out
}

/// Fast Legendre transform against brute force, bit for bit, on random
/// convex inputs; biconjugate gap on `|·|`, `½|·|²` and `ι_[0,1]`.
pub fn conjugation_suite<R: Rng + ?Sized>(inputs: usize, n: usize, tol: f64, rng: &mut R) -> Result<CounterexampleVerdict> {
    let mut v = CounterexampleVerdict::new("conjugation", tol);
    let xs = axis(DEFAULT_BOX_RADIUS, n);
    let ys = axis(DEFAULT_BOX_RADIUS * 2.0, n);
    let mut mismatches = 0usize;
    for _ in 0..inputs {
        let f = random_convex_grid(&xs, rng);
        let fast = legendre_1d(&xs, &f, &ys)?;
        let brute = legendre_1d_brute(&xs, &f, &ys)?;
        mismatches += fast
            .iter()
            .zip(&brute)
            .filter(|(a, b)| a.to_f64().to_bits() != b.to_f64().to_bits())
            .count();
    }
    v.value("inputs", inputs as f64);
    v.value("N", n as f64);
    v.value("bitwise_mismatches", mismatches as f64);
    v.check("fast transform equals brute force bit for bit", mismatches == 0);

    let fixtures = [
        ("abs", ConvexFunction::Norm { dim: 1, scale: 1.0 }),
        ("half_square", ConvexFunction::quadratic(Matrix::identity(1, 1), Vector::zeros(1), 0.0)?),
        (
            "indicator_0_1",
            ConvexFunction::Indicator(ConvexSet::segment(Vector::zeros(1), Vector::from_vec(vec![1.0]))?),
        ),
    ];
    for (name, f) in fixtures {
        let rep = biconjugate_check(&f, DEFAULT_BOX_RADIUS, DEFAULT_N_1D)?;
        v.value(&format!("biconjugate_gap_{name}"), rep.gap);
        v.value(&format!("biconjugate_bound_{name}"), rep.bound);
        v.check(&format!("biconjugate gap <= 2h for {name}"), rep.passed);
    }
    Ok(v.finish())
}

/// Identity, skewness and adjoint sweeps over truncation sizes.
pub fn fact51_suite<R: Rng + ?Sized>(
    ns: &[usize],
    adjoint_ns: &[usize],
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CounterexampleVerdict> {
    let mut v = CounterexampleVerdict::new("fact51", tol);
    let ident = identity_sweep(ns, samples, rng)?;
    let skew = skew_sweep(ns, samples, rng)?;
    let worst_rel = ident.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let worst_skew = skew.iter().map(|r| r.max_abs_error).fold(0.0, f64::max);
    v.value("identity_max_rel_error", worst_rel);
    v.value("skew_max_abs_error", worst_skew);
    v.check("<Sx, x> = ½ s² within 1e-12 relative", worst_rel <= 1e-12);
    v.check("<Tx, x> <= 1e-12 on the zero-sum hyperplane", worst_skew <= 1e-12);
    let mut worst_dist = 0.0f64;
    let mut adj_ok = true;
    for &n in adjoint_ns {
        let rep = TruncatedShift::build(n)?.adjoint_agreement();
        worst_dist = worst_dist.max(rep.subspace_distance);
        adj_ok &= rep.passed;
    }
    v.value("adjoint_max_subspace_distance", worst_dist);
    v.check("adjoint graph equals {(y, Sy + a1)} within 1e-10", adj_ok);
    let mut class_ok = true;
    for &n in ns {
        let ts = TruncatedShift::build(n)?;
        let s = ts.adjoint_selection().classify();
        let t = ts.relation().classify();
        class_ok &= s.monotone && s.maximal && !s.skew && t.monotone && t.skew;
        class_ok &= (ts.t() + ts.s()).iter().all(|&e| e == 1.0);
    }
    v.check("S maximal monotone not skew, T skew, T + S = 11^T", class_ok);
    v.tables.push(Table {
        name: "identity_sweep".into(),
        header: vec!["n".into(), "max_abs_error".into()],
        rows: ident.iter().map(|r| vec![r.n as f64, r.max_abs_error]).collect(),
    });
    v.tables.push(Table {
        name: "skew_sweep".into(),
        header: vec!["n".into(), "max_abs_error".into()],
        rows: skew.iter().map(|r| vec![r.n as f64, r.max_abs_error]).collect(),
    });
    Ok(v.finish())
}

/// Evaluates both sides of the sum-of-conjugates inequality for
/// `F_A`, `F_{N_C}` at `(z, z*)`: `min_{v*} F_A*(v*, z) + F_{N_C}*(z* - v*, z)`
/// over a `v*` grid, against a grid sup for `(F_A □₂ F_{N_C})*(z*, z)`.
/// Findings are recorded without a judgement; the verdict only reflects
/// that the evaluation ran.
pub fn probe_probcon(
    a: &LinearRelation,
    c: &ConvexSet,
    z: &Vector,
    zs: &Vector,
    grid: &GridSpec,
    tol: f64,
) -> Result<CounterexampleVerdict> {
    let n = a.n();
    let mut v = CounterexampleVerdict::new("probe-probcon", tol);
    let f1 = BivariateFunction::fitz_linear(a.clone());
    let f2 = BivariateFunction::FitzNormalCone(c.clone());
    let inner = GridSpec { box_radius: grid.box_radius, n: grid.n.min(9) };
    let conv = BivariateFunction::inf_conv(f1.clone(), f2.clone(), inner)?;
    let rhs = PrimalSample::from_grid(&conv, grid)?.flipped_conjugate(zs.as_slice(), z.as_slice())?;
    let mut lhs = crate::PosInf;
    let mut arg = None;
    let mut vs = vec![0.0; n];
    let total = grid.count(n)?;
    for idx in 0..total {
        grid.point(idx, &mut vs);
        let rest: Vec<f64> = zs.iter().zip(&vs).map(|(p, q)| p - q).collect();
        let a1 = f1.flipped_conjugate_exact(&vs, z.as_slice())?.expect("closed form");
        if a1.is_pos_inf() {
            continue;
        }
        let a2 = f2.flipped_conjugate_exact(&rest, z.as_slice())?.expect("closed form");
        let s = a1.checked_add(a2)?;
        if s < lhs {
            lhs = s;
            arg = Some(vs.clone());
        }
    }
    v.value("lhs_min_over_v", lhs);
    v.value("rhs_grid", rhs);
    if let ExtReal::Finite(l) = lhs {
        v.value("lhs_minus_rhs", l - rhs.to_f64());
    }
    if let Some(a) = arg {
        for (i, x) in a.iter().enumerate() {
            v.value(&format!("argmin_v_{i}"), *x);
        }
    }
    Ok(v.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::rng;

    #[test]
    fn fact41_error_halves() {
        let v = fact41_crosscheck(10_000, 1000, 1e-8, &mut rng(1)).unwrap();
        assert!(v.passed(), "{:?} {:?}", v.failures(), v.computed_values);
    }

    #[test]
    fn fact42_on_and_off_graph() {
        let v = fact42_crosscheck(100, 10, 1e6, 1e-8, &mut rng(2)).unwrap();
        assert!(v.passed(), "{:?} {:?}", v.failures(), v.computed_values);
    }

    #[test]
    fn fact33_gap_within_two_h() {
        let v = fact33_crosscheck(41, 1e-8).unwrap();
        assert!(v.passed(), "{:?} {:?}", v.failures(), v.computed_values);
    }

    #[test]
    fn conjugation_engine() {
        let v = conjugation_suite(10, 257, 1e-8, &mut rng(3)).unwrap();
        assert!(v.passed(), "{:?}", v.failures());
    }

    #[test]
    fn fact51_small() {
        let v = fact51_suite(&[2, 4, 8], &[2, 4], 100, 1e-8, &mut rng(4)).unwrap();
        assert!(v.passed(), "{:?}", v.failures());
        assert_eq!(v.tables[0].rows.len(), 3);
    }

    #[test]
    fn probe_reports_values() {
        let a = rotation(2).unwrap();
        let c = ConvexSet::unit_ball(2);
        let z = Vector::zeros(2);
        let zs = Vector::from_vec(vec![1.0, 0.0]);
        let v = probe_probcon(&a, &c, &z, &zs, &GridSpec::new(2.0, 9).unwrap(), 1e-8).unwrap();
        // here v* = 0 is forced and both sides equal ||z*||
        assert_eq!(v.get("lhs_min_over_v"), Some(ExtReal::Finite(1.0)));
        assert!((v.get("rhs_grid").unwrap().to_f64() - 1.0).abs() <= 0.5);
    }
}
