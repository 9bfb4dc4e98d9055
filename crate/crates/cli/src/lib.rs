//! Front end for the verification suites: scenario loading, suite dispatch,
//! JSON reports and CSV tables.

pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use bigconj_core::counterexamples::{
    conjugation_suite, example44_suite, example52_gap, example52_maximality, fact33_crosscheck, fact41_crosscheck,
    fact42_crosscheck, fact51_suite, implication43_check, implication52_check, probe_probcon, rotation,
    theorem43_suite, CounterexampleVerdict, Example52Config, ImplicationConfig, Theorem43Config,
};
use bigconj_core::fitzpatrick::{GridSpec, JFunction};
use bigconj_core::relations::LinearRelation;
use bigconj_core::{seeded_rng, ConvexSet, ExtReal, Vector};
use serde::Serialize;

pub use scenario::{Scenario, SuiteDecl, SCHEMA_VERSION, SUITES};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Input(String),
}

/// Knobs shared by every suite. `None` and empty values keep the suite's
/// own defaults.
#[derive(Debug, Clone)]
pub struct Options {
    pub seed: u64,
    pub tol: f64,
    pub grid_n: Option<usize>,
    pub box_radius: Option<f64>,
    pub n: Vec<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 0, tol: 1e-8, grid_n: None, box_radius: None, n: Vec::new() }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Option<String>,
    pub seed: u64,
    pub tol: f64,
    pub verdicts: Vec<CounterexampleVerdict>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed())
    }

    pub fn exit_code(&self) -> i32 {
        match self.first_failure() {
            None => EXIT_PASS,
            Some(v) if v.hypothesis_failed() => EXIT_HYPOTHESIS,
            Some(_) => EXIT_VERDICT,
        }
    }

    pub fn first_failure(&self) -> Option<&CounterexampleVerdict> {
        self.verdicts.iter().find(|v| !v.passed())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One CSV file per attached table, `<verdict>_<table>.csv`, with an
    /// index suffix when a suite produced several verdicts.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        for (k, v) in self.verdicts.iter().enumerate() {
            let dup = self.verdicts.iter().filter(|w| w.name == v.name).count() > 1;
            for t in &v.tables {
                let file = if dup {
                    format!("{}_{}_{k}.csv", v.name, t.name)
                } else {
                    format!("{}_{}.csv", v.name, t.name)
                };
                let path = dir.join(file);
                let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut rows = vec![t.header.clone()];
                rows.extend(t.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()));
                for r in rows {
                    w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.flush().map_err(io)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Stable 64-bit FNV-1a, used to derive per-suite seeds.
fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn rng_for(opts: &Options, suite: &str, n: usize) -> bigconj_core::Rng {
    seeded_rng(opts.seed ^ fnv1a(suite) ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn core_input(e: bigconj_core::Error) -> CliError {
    CliError::Input(e.to_string())
}

struct Context<'a> {
    decl: &'a SuiteDecl,
    scenario: Option<&'a Scenario>,
    opts: &'a Options,
}

impl Context<'_> {
    fn ns(&self, default: &[usize]) -> Vec<usize> {
        if !self.opts.n.is_empty() {
            self.opts.n.clone()
        } else if let Some(n) = &self.decl.n {
            n.clone()
        } else {
            default.to_vec()
        }
    }

    fn samples(&self, default: usize) -> usize {
        self.decl.samples.unwrap_or(default)
    }

    fn grid(&self, default: GridSpec) -> Result<GridSpec, CliError> {
        let base = self.scenario.and_then(|s| s.grid).unwrap_or(default);
        GridSpec::new(self.opts.box_radius.unwrap_or(base.box_radius), self.opts.grid_n.unwrap_or(base.n))
            .map_err(core_input)
    }

    fn operator(&self, n: usize) -> Result<LinearRelation, CliError> {
        if let Some(s) = self.scenario {
            let found = match &self.decl.operator {
                Some(name) => s.operators.get(name),
                None => s.operators.values().next(),
            };
            if let Some(op) = found {
                return Ok(op.clone());
            }
        }
        rotation(n).map_err(core_input)
    }

    fn set(&self, n: usize) -> ConvexSet {
        if let Some(s) = self.scenario {
            let found = match &self.decl.set {
                Some(name) => s.sets.get(name),
                None => s.sets.values().next(),
            };
            if let Some(c) = found {
                return c.clone();
            }
        }
        ConvexSet::unit_ball(n)
    }

    fn j(&self) -> JFunction {
        self.scenario
            .map(|s| s.j.clone())
            .unwrap_or_else(|| JFunction::affine(1.0, 0.0).expect("valid slope"))
    }

    fn z(&self) -> Option<(Vector, Vector)> {
        match (&self.decl.z, &self.decl.zstar) {
            (Some(z), Some(zs)) => Some((Vector::from_column_slice(z), Vector::from_column_slice(zs))),
            _ => None,
        }
    }
}

fn run_one(ctx: &Context, n: usize) -> bigconj_core::Result<CounterexampleVerdict> {
    let opts = ctx.opts;
    let tol = opts.tol;
    let name = ctx.decl.name.as_str();
    let mut rng = rng_for(opts, name, n);
    let cli = |e: CliError| bigconj_core::Error::InvalidArgument(e.to_string());
    match name {
        "thm43" => {
            let a = ctx.operator(n).map_err(cli)?;
            let c = ctx.set(a.n());
            let mut cfg = Theorem43Config::new(a.n(), tol);
            cfg.grid = ctx.grid(cfg.grid).map_err(cli)?;
            cfg.z = ctx.z();
            cfg.bc_samples = ctx.samples(cfg.bc_samples);
            theorem43_suite(&a, &c, &ctx.j(), &cfg, &mut rng)
        }
        "ex44" => example44_suite(n, ctx.samples(1000), tol, &mut rng),
        "ex52-gap" => {
            let cfg = Example52Config { samples: ctx.samples(1000), tol, ..Example52Config::default() };
            example52_gap(n, &cfg, &mut rng)
        }
        "ex52-implication" => {
            let cfg = ImplicationConfig { random_pairs: ctx.samples(100_000), tol, ..ImplicationConfig::default() };
            implication52_check(n, &ctx.j(), &cfg, &mut rng)
        }
        "thm43-implication" => {
            let a = ctx.operator(n).map_err(cli)?;
            let cfg = ImplicationConfig { random_pairs: ctx.samples(100_000), tol, ..ImplicationConfig::default() };
            implication43_check(&a, &ctx.j(), &cfg, &mut rng)
        }
        "ex52-maximality" => example52_maximality(n, ctx.samples(1000), tol, &mut rng),
        "fact41" => fact41_crosscheck(ctx.samples(10_000), 1000, tol, &mut rng),
        "fact42" => fact42_crosscheck(ctx.samples(100), 20, 1e6, tol, &mut rng),
        "fact33" => {
            let g = ctx.grid(GridSpec { box_radius: 2.0, n: 41 }).map_err(cli)?;
            fact33_crosscheck(g.n, tol)
        }
        "fact51" => unreachable!("fact51 runs over all n at once"),
        "conjugation" => conjugation_suite(ctx.samples(100), opts.grid_n.unwrap_or(1025), tol, &mut rng),
        "probe-probcon" => {
            let a = ctx.operator(n).map_err(cli)?;
            let dim = a.n();
            let c = ctx.set(dim);
            let (z, zs) = ctx.z().unwrap_or_else(|| (Vector::zeros(dim), bigconj_core::linalg::unit(dim, 0)));
            let g = ctx.grid(GridSpec { box_radius: 2.0, n: 9 }).map_err(cli)?;
            probe_probcon(&a, &c, &z, &zs, &g, tol)
        }
        other => Err(bigconj_core::Error::InvalidArgument(format!("unknown suite {other:?}"))),
    }
}

fn settle(name: &str, tol: f64, r: bigconj_core::Result<CounterexampleVerdict>) -> Result<CounterexampleVerdict, CliError> {
    match r {
        Ok(v) => Ok(v),
        Err(bigconj_core::Error::HypothesisFailed(m)) => Ok(CounterexampleVerdict::hypothesis_failure(name, &m, tol)),
        Err(e) => Err(core_input(e)),
    }
}

/// Runs one declared suite; suites parameterized by a truncation size
/// produce one verdict per size.
pub fn run_suite(decl: &SuiteDecl, scenario: Option<&Scenario>, opts: &Options) -> Result<Vec<CounterexampleVerdict>, CliError> {
    if !SUITES.contains(&decl.name.as_str()) {
        return Err(CliError::Input(format!("unknown suite {:?}; known suites: {}", decl.name, SUITES.join(", "))));
    }
    let ctx = Context { decl, scenario, opts };
    let name = decl.name.as_str();
    if name == "fact51" {
        let ns = ctx.ns(&[2, 4, 8, 16, 32, 64, 128]);
        let adjoint: Vec<usize> = ns.iter().copied().filter(|&n| n <= 16).collect();
        let mut rng = rng_for(opts, name, 0);
        let r = fact51_suite(&ns, &adjoint, ctx.samples(1000), opts.tol, &mut rng);
        return Ok(vec![settle(name, opts.tol, r)?]);
    }
    let scenario_dim = scenario.and_then(|s| s.operators.values().next().map(|a| a.n()));
    let ns: Vec<usize> = match name {
        "ex52-gap" | "ex52-implication" | "ex52-maximality" => ctx.ns(&[8]),
        "ex44" => vec![ctx.ns(&[2]).first().copied().unwrap_or(2)],
        "thm43" | "thm43-implication" | "probe-probcon" => vec![*ctx.ns(&[scenario_dim.unwrap_or(2)]).first().unwrap_or(&2)],
        _ => vec![0],
    };
    let mut out = Vec::with_capacity(ns.len());
    for n in ns {
        let mut v = settle(name, opts.tol, run_one(&ctx, n))?;
        if n > 0 && matches!(name, "ex52-gap" | "ex52-implication" | "ex52-maximality" | "ex44") {
            v.computed_values.insert("n".into(), ExtReal::Finite(n as f64));
        }
        out.push(v);
    }
    Ok(out)
}

/// Runs the scenario's suites, keeping those named in `filter` when it is
/// non-empty. Filter names the scenario does not declare run with defaults.
pub fn run(scenario: Option<&Scenario>, filter: &[String], opts: &Options) -> Result<Report, CliError> {
    for f in filter {
        if !SUITES.contains(&f.as_str()) {
            return Err(CliError::Input(format!("unknown suite {f:?}; known suites: {}", SUITES.join(", "))));
        }
    }
    let mut decls: Vec<SuiteDecl> = scenario
        .map(|s| s.suites.iter().filter(|d| filter.is_empty() || filter.contains(&d.name)).cloned().collect())
        .unwrap_or_default();
    for f in filter {
        if !decls.iter().any(|d| &d.name == f) {
            decls.push(SuiteDecl { name: f.clone(), ..SuiteDecl::default() });
        }
    }
    if decls.is_empty() {
        return Err(CliError::Input("nothing to run: give --scenario or --suite".into()));
    }
    let mut verdicts = Vec::new();
    for d in &decls {
        verdicts.extend(run_suite(d, scenario, opts)?);
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.map(|s| s.name.clone()),
        seed: opts.seed,
        tol: opts.tol,
        verdicts,
    })
}

/// Writes the JSON report to `out` (stdout when `None`) and the CSV tables
/// to `csv_dir`, then prints one summary line per verdict to `log`.
pub fn emit(report: &Report, out: Option<&Path>, csv_dir: Option<&Path>, log: &mut dyn Write) -> Result<i32, CliError> {
    let json = report.to_json();
    match out {
        Some(p) => std::fs::write(p, &json).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    if let Some(dir) = csv_dir {
        report.write_csv(dir)?;
    }
    for v in &report.verdicts {
        let margin = v.strict_inequality_margin.map(|m| format!(" margin={m}")).unwrap_or_default();
        let _ = writeln!(log, "{} {}{margin}", if v.passed() { "PASS" } else { "FAIL" }, v.name);
    }
    if let Some(v) = report.first_failure() {
        let _ = writeln!(log, "first failing verdict: {}: {}", v.name, v.failures().join("; "));
    }
    Ok(report.exit_code())
}
