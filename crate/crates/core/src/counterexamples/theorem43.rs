//! Sums of a linear monotone relation and a normal cone where the
//! conjugate of the partial inf-convolution is strictly smaller than the
//! sum of conjugates, at every `x*`.

use rand::Rng;

use super::{close, CounterexampleVerdict};
use crate::error::{check_dim, Error, Result};
use crate::extreal::{ExtReal, PosInf};
use crate::fitzpatrick::{
    bc_check, sample_normal_cone_graph, BivariateFunction, Escalation, GridSpec, JFunction, PrimalSample,
};
use crate::linalg::{dot, unit, Matrix, Subspace, Vector};
use crate::relations::LinearRelation;
use crate::sets::{minkowski_span_closed_subspace, random_in_ball, ConvexSet};

/// Block-diagonal quarter turns in `R^n`, with a zero last coordinate when
/// `n` is odd.
pub fn rotation(n: usize) -> Result<LinearRelation> {
    if n < 2 {
        return Err(Error::InvalidArgument("rotation needs n >= 2".into()));
    }
    let mut m = Matrix::zeros(n, n);
    for k in (0..n - 1).step_by(2) {
        m[(k + 1, k)] = 1.0;
        m[(k, k + 1)] = -1.0;
    }
    LinearRelation::from_matrix(&m, None)
}

#[derive(Debug, Clone)]
pub struct Theorem43Config {
    /// Primal grid for the brute-force conjugates on `R^n × R^n`.
    pub grid: GridSpec,
    /// The pair `(z, z*)`; searched for when absent.
    pub z: Option<(Vector, Vector)>,
    /// Triples `(x, x*, y*)` for the sum-of-conjugates identity; random
    /// triples are drawn when empty.
    pub queries: Vec<(Vector, Vector, Vector)>,
    pub random_queries: usize,
    /// Grid of `x*` values swept for the strict inequality.
    pub sweep: GridSpec,
    pub bc_samples: usize,
    pub tol: f64,
}

impl Theorem43Config {
    pub fn new(n: usize, tol: f64) -> Self {
        // largest odd N with N^(2n) below two million
        let mut g = 5usize;
        while ((g + 2) as f64).powi(2 * n as i32) <= 2e6 {
            g += 2;
        }
        Theorem43Config {
            grid: GridSpec { box_radius: 2.0, n: g },
            z: None,
            queries: Vec::new(),
            random_queries: 50,
            sweep: GridSpec { box_radius: 2.0, n: 5 },
            bc_samples: 500,
            tol,
        }
    }
}

fn point_in_both(dom: &Subspace, c: &ConvexSet) -> Result<Option<Vector>> {
    let n = dom.ambient();
    let zero = vec![0.0; n];
    if c.contains(&zero, 1e-12)? {
        return Ok(Some(Vector::zeros(n)));
    }
    let mut x = c.project(&zero)?;
    for _ in 0..20_000 {
        let p = dom.project(x.as_slice());
        if c.contains(p.as_slice(), 1e-10)? {
            return Ok(Some(p));
        }
        x = c.project(p.as_slice())?;
    }
    Ok(None)
}

fn sigma(c: &ConvexSet, v: &[f64]) -> Result<ExtReal> {
    c.support(v)
}

/// Runs items (i)-(v): BC of both Fitzpatrick functions, the closed form of
/// the sum of conjugates, the closed form of the conjugate of `F_A □₂ F_{N_C}`,
/// the choice of `(z, z*)` and the strict inequality swept over `x*`.
pub fn theorem43_suite<R: Rng + ?Sized>(
    a: &LinearRelation,
    c: &ConvexSet,
    j: &JFunction,
    cfg: &Theorem43Config,
    rng: &mut R,
) -> Result<CounterexampleVerdict> {
    let n = a.n();
    check_dim(n, c.dim())?;
    let mut v = CounterexampleVerdict::new("thm43", cfg.tol);
    let class = a.classify();
    v.hypothesis("A maximally monotone", class.maximal)?;
    v.hypothesis("A at most single-valued", a.is_single_valued())?;
    v.hypothesis("C bounded", c.is_bounded())?;
    v.hypothesis("C != {0}", !c.is_origin())?;
    let dom = ConvexSet::Subspace(a.domain().clone());
    v.hypothesis("cone(dom A - C) is a closed subspace", minkowski_span_closed_subspace(&dom, c)?)?;
    v.hypothesis("j increasing with j(g) >= g", j.lower_slope() >= 1.0 && j.verify(1000, 100.0))?;

    let fa = BivariateFunction::fitz_linear(a.clone());
    let fc = BivariateFunction::FitzNormalCone(c.clone());

    // (i) BC on sampled points
    let mut on_graph: Vec<(Vector, Vector)> = (0..cfg.bc_samples)
        .map(|_| {
            let coords: Vec<f64> = (0..a.graph_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            a.graph_point(&coords)
        })
        .collect();
    on_graph.extend((0..cfg.bc_samples).map(|_| (random_in_ball(n, 2.0, rng), random_in_ball(n, 2.0, rng))));
    let bc_a = bc_check(&fa, &on_graph, &cfg.grid, cfg.tol)?;
    v.check("F_A is BC on the sample", bc_a.passed);
    let mut nc_sample = sample_normal_cone_graph(c, cfg.bc_samples, 2.0, rng)?;
    nc_sample.extend((0..cfg.bc_samples).map(|_| (random_in_ball(n, 2.0, rng), random_in_ball(n, 2.0, rng))));
    let bc_c = bc_check(&fc, &nc_sample, &cfg.grid, cfg.tol)?;
    v.check("F_NC is BC on the sample", bc_c.passed);

    // (ii) sum of conjugates, closed form against the direct expression,
    // and F_NC* against its grid sup where finite
    let mut queries = cfg.queries.clone();
    for k in 0..cfg.random_queries {
        let x = match k % 3 {
            0 => c.sample(rng).unwrap_or_else(|| Vector::zeros(n)),
            1 => random_in_ball(n, 1.5, rng),
            _ => point_in_both(a.domain(), c)?.unwrap_or_else(|| Vector::zeros(n)),
        };
        let xs = match k % 2 {
            0 => a.apply(x.as_slice(), 1e-9).ok().and_then(|f| f.point().cloned()).unwrap_or_else(|| random_in_ball(n, 1.0, rng)),
            _ => random_in_ball(n, 1.0, rng),
        };
        queries.push((x, xs, random_in_ball(n, 1.0, rng)));
    }
    let nc_grid = PrimalSample::from_grid(&fc, &cfg.grid)?;
    let h = cfg.grid.spacing();
    let mut identity_ok = true;
    let mut grid_ok = true;
    let mut worst_grid = 0.0f64;
    for (x, xs, ys) in &queries {
        let u: Vec<f64> = ys.iter().zip(xs.iter()).map(|(p, q)| p - q).collect();
        let lhs = fa
            .flipped_conjugate_exact(xs.as_slice(), x.as_slice())?
            .expect("closed form")
            .checked_add(fc.flipped_conjugate_exact(&u, x.as_slice())?.expect("closed form"))?;
        let on = a.contains(x.as_slice(), xs.as_slice(), 1e-9 * (1.0 + x.norm() + xs.norm()))?
            && c.contains(x.as_slice(), 1e-9 * (1.0 + x.norm()))?;
        let rhs = if on {
            sigma(c, &u)?.plus(x.dot(xs))
        } else {
            PosInf
        };
        identity_ok &= close(lhs, rhs, 1e-9 * (1.0 + lhs.to_f64().abs()));
        if c.contains(x.as_slice(), 1e-9)? {
            let exact = fc.flipped_conjugate_exact(&u, x.as_slice())?.expect("closed form").to_f64();
            let grid = nc_grid.flipped_conjugate(&u, x.as_slice())?.to_f64();
            let err = (exact - grid).abs();
            worst_grid = worst_grid.max(err);
            // the grid misses C's maximizer by at most the grid diagonal
            grid_ok &= grid <= exact + 1e-9 && err <= 2.0 * h * (1.0 + Vector::from_vec(u).norm()) * (n as f64).sqrt();
        }
    }
    v.check("sum of conjugates matches the direct expression", identity_ok);
    v.check("F_NC* grid sup within grid tolerance", grid_ok);
    v.value("identity_queries", queries.len() as f64);
    v.value("fnc_grid_worst_error", worst_grid);

    // (iii) conjugate of F_A □₂ F_NC: closed form against the grid sup
    let reducible = class.skew && class.maximal && a.is_single_valued();
    let brute_grid = if reducible {
        cfg.grid
    } else {
        GridSpec { box_radius: cfg.grid.box_radius, n: cfg.grid.n.min(9) }
    };
    let conv = BivariateFunction::inf_conv(fa.clone(), fc.clone(), brute_grid)?;
    let conv_grid = PrimalSample::from_grid(&conv, &brute_grid)?;
    let bh = brute_grid.spacing();
    let closed_conv = |x: &[f64], xs: &[f64]| -> Result<ExtReal> {
        let fiber = a.apply(x, 1e-9 * (1.0 + x.iter().map(|t| t.abs()).sum::<f64>()))?;
        match fiber.point() {
            Some(ax) if c.contains(x, 1e-9)? => {
                let d: Vec<f64> = xs.iter().zip(ax.iter()).map(|(p, q)| p - q).collect();
                Ok(sigma(c, &d)?.plus(dot(x, ax.as_slice())))
            }
            _ => Ok(PosInf),
        }
    };
    let mut conv_ok = true;
    let mut conv_worst = 0.0f64;
    for (x, xs, _) in &queries {
        let exact = closed_conv(x.as_slice(), xs.as_slice())?;
        if let ExtReal::Finite(e) = exact {
            let g = conv_grid.flipped_conjugate(xs.as_slice(), x.as_slice())?.to_f64();
            let scale = 1.0 + xs.norm() + x.norm() * (1.0 + a.as_matrix().map(|m| m.norm()).unwrap_or(0.0));
            conv_worst = conv_worst.max((e - g).abs());
            conv_ok &= (e - g).abs() <= 2.0 * bh * scale * (n as f64).sqrt();
        }
    }
    v.check("conjugate of the inf-convolution matches its closed form on the grid", conv_ok);
    v.value("inf_conv_conjugate_grid_worst_error", conv_worst);

    // (iv) the pair (z, z*)
    let (z, zs) = match &cfg.z {
        Some((z, zs)) => (z.clone(), zs.clone()),
        None => {
            let z = point_in_both(a.domain(), c)?
                .ok_or_else(|| Error::HypothesisFailed("thm43: dom A ∩ C is empty".into()))?;
            let az = a.apply(z.as_slice(), 1e-9)?.point().cloned().expect("z in dom A");
            let mut best: Option<(f64, Vector)> = None;
            for i in 0..n {
                for sgn in [1.0, -1.0] {
                    let d = unit(n, i) * sgn;
                    let s = sigma(c, d.as_slice())?.to_f64();
                    if best.as_ref().is_none_or(|(b, _)| s > *b) {
                        best = Some((s, &az + d));
                    }
                }
            }
            (z, best.expect("n >= 1").1)
        }
    };
    check_dim(n, z.len())?;
    check_dim(n, zs.len())?;
    let in_dom = c.contains(z.as_slice(), 1e-9)? && a.domain().contains(z.as_slice(), 1e-9)?;
    v.hypothesis("z in dom A ∩ C", in_dom)?;
    let az = a.apply(z.as_slice(), 1e-9)?.point().cloned().expect("z in dom A");
    let gap_dir: Vec<f64> = zs.iter().zip(az.iter()).map(|(p, q)| p - q).collect();
    let sig = sigma(c, &gap_dir)?;
    v.hypothesis("sigma_C(z* - Az) > 0", sig > ExtReal::ZERO)?;
    v.value("sigma_C(z*-Az)", sig);

    // (v) strict inequality over a sweep of x* plus x* = Az
    let lhs_at = |xs: &[f64]| -> Result<ExtReal> {
        let u: Vec<f64> = zs.iter().zip(xs).map(|(p, q)| p - q).collect();
        fa.flipped_conjugate_exact(xs, z.as_slice())?
            .expect("closed form")
            .checked_add(fc.flipped_conjugate_exact(&u, z.as_slice())?.expect("closed form"))
    };
    let mut sweep: Vec<Vector> = vec![az.clone()];
    let total = cfg.sweep.count(n)?;
    let mut buf = vec![0.0; n];
    for idx in 0..total {
        cfg.sweep.point(idx, &mut buf);
        sweep.push(Vector::from_column_slice(&buf));
    }
    let mut margin = PosInf;
    for xs in &sweep {
        let l = lhs_at(xs.as_slice())?;
        let r = closed_conv(z.as_slice(), xs.as_slice())?;
        let m = match (l, r) {
            (PosInf, _) => PosInf,
            (l, r) => l.checked_sub(r)?,
        };
        margin = margin.min(m);
    }
    let lhs_crit = lhs_at(az.as_slice())?;
    let rhs_crit = closed_conv(z.as_slice(), az.as_slice())?;
    let rhs_crit_grid = conv_grid.flipped_conjugate(az.as_slice(), z.as_slice())?;
    v.value("lhs_at_Az", lhs_crit);
    v.value("rhs_at_Az", rhs_crit);
    v.value("rhs_at_Az_grid", rhs_crit_grid);
    v.check(
        "rhs at Az reproduced by the grid",
        close(rhs_crit, rhs_crit_grid, 2.0 * bh * (1.0 + z.norm()) * (n as f64).sqrt()),
    );
    v.check("margin equals sigma_C(z* - Az)", close(margin, sig, 1e-9));
    v.value("sweep_points", sweep.len() as f64);
    v.strict_inequality_margin = Some(margin);
    Ok(v.finish())
}

/// The quarter-turn instance in `R^d`: unit ball, `z = 0`, `z* = e1`.
///
/// Besides the theorem suite this draws `samples` random `x* != 0`, where the
/// left side must be `+∞`, and confirms a few of those through grid
/// escalation of `F_A*`.
pub fn example44_suite<R: Rng + ?Sized>(d: usize, samples: usize, tol: f64, rng: &mut R) -> Result<CounterexampleVerdict> {
    let a = rotation(d)?;
    let c = ConvexSet::unit_ball(d);
    let j = JFunction::affine(1.0, 0.0)?;
    let mut cfg = Theorem43Config::new(d, tol);
    cfg.z = Some((Vector::zeros(d), unit(d, 0)));
    let mut v = theorem43_suite(&a, &c, &j, &cfg, rng)?;
    v.name = "ex44".into();

    let fa = BivariateFunction::fitz_linear(a.clone());
    let fc = BivariateFunction::FitzNormalCone(c.clone());
    let z = vec![0.0; d];
    let zs = unit(d, 0);
    let lhs0 = {
        let f = fa.flipped_conjugate_exact(&z, &z)?.expect("closed form");
        f.checked_add(fc.flipped_conjugate_exact(zs.as_slice(), &z)?.expect("closed form"))?
    };
    let rhs0 = c.support(&z)?;
    v.value("lhs_at_0", lhs0);
    v.value("rhs_at_0", rhs0);
    let mut infinite = 0usize;
    let mut esc_agree = 0usize;
    let esc_checks = 5.min(samples);
    let esc = Escalation::new(&fa, &GridSpec { box_radius: 1e3, n: 11 })?;
    for k in 0..samples {
        let xs = random_in_ball(d, 2.0, rng);
        if xs.norm() == 0.0 {
            continue;
        }
        let u: Vec<f64> = zs.iter().zip(xs.iter()).map(|(p, q)| p - q).collect();
        let l = fa
            .flipped_conjugate_exact(xs.as_slice(), &z)?
            .expect("closed form")
            .checked_add(fc.flipped_conjugate_exact(&u, &z)?.expect("closed form"))?;
        if l.is_pos_inf() {
            infinite += 1;
        }
        if k < esc_checks && esc.eval(xs.as_slice(), &z)?.value.is_pos_inf() {
            esc_agree += 1;
        }
    }
    v.value("random_xstar_samples", samples as f64);
    v.value("random_xstar_lhs_infinite", infinite as f64);
    v.value("escalation_agreements", esc_agree as f64);
    v.check("lhs is +inf at every sampled x* != 0", infinite == samples);
    v.check("escalation confirms +inf", esc_agree == esc_checks);
    v.check("margin at x* = 0 equals ||z*||", close(lhs0.checked_sub(rhs0)?, ExtReal::Finite(1.0), 1e-9));
    Ok(v.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::rng;

    #[test]
    fn example44_margin_is_one() {
        let v = example44_suite(2, 1000, 1e-8, &mut rng(1)).unwrap();
        assert!(v.passed(), "{:?}", v.failures());
        assert_eq!(v.get("lhs_at_0"), Some(ExtReal::Finite(1.0)));
        assert_eq!(v.get("rhs_at_0"), Some(ExtReal::ZERO));
        assert!((v.strict_inequality_margin.unwrap().to_f64() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn origin_set_is_rejected() {
        let a = rotation(2).unwrap();
        let c = ConvexSet::Singleton(Vector::zeros(2));
        let j = JFunction::affine(1.0, 0.0).unwrap();
        let err = theorem43_suite(&a, &c, &j, &Theorem43Config::new(2, 1e-8), &mut rng(2)).unwrap_err();
        assert!(matches!(err, Error::HypothesisFailed(m) if m.contains("C != {0}")));
    }

    #[test]
    fn weak_j_is_rejected() {
        let a = rotation(2).unwrap();
        let j = JFunction::affine(0.5, 0.0).unwrap();
        let r = theorem43_suite(&a, &ConvexSet::unit_ball(2), &j, &Theorem43Config::new(2, 1e-8), &mut rng(3));
        assert!(matches!(r, Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn searched_pair_on_a_shifted_square() {
        // a non-skew monotone map and a box away from the origin
        let m = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 0.5]);
        let a = LinearRelation::from_matrix(&m, None).unwrap();
        let c = ConvexSet::boxed(Vector::from_vec(vec![0.2, -0.5]), Vector::from_vec(vec![0.8, 0.5])).unwrap();
        let j = JFunction::affine(1.0, 0.0).unwrap();
        let mut cfg = Theorem43Config::new(2, 1e-8);
        cfg.grid = GridSpec { box_radius: 2.0, n: 9 };
        cfg.random_queries = 12;
        cfg.bc_samples = 100;
        let v = theorem43_suite(&a, &c, &j, &cfg, &mut rng(4)).unwrap();
        let m = v.strict_inequality_margin.unwrap();
        assert!(m > ExtReal::ZERO);
        assert_eq!(Some(m), v.get("sigma_C(z*-Az)"));
        assert!(v.checks.iter().find(|(n, _)| n.starts_with("sum of conjugates")).unwrap().1);
    }

    #[test]
    fn rotation_is_skew_and_maximal() {
        for d in [2, 3, 4] {
            let r = rotation(d).unwrap().classify();
            assert!(r.skew && r.maximal);
        }
    }
}
