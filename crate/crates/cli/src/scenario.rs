//! Scenario files: JSON declarations of operators, sets, grids, the `j`
//! function and the suites to run against them.

use std::collections::BTreeMap;
use std::path::Path;

use bigconj_core::counterexamples::rotation;
use bigconj_core::fitzpatrick::{GridSpec, JFunction};
use bigconj_core::relations::LinearRelation;
use bigconj_core::shift::TruncatedShift;
use bigconj_core::{ConvexSet, Matrix, Vector};
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITES: &[&str] = &[
    "thm43",
    "ex44",
    "ex52-gap",
    "ex52-implication",
    "ex52-maximality",
    "thm43-implication",
    "fact41",
    "fact42",
    "fact33",
    "fact51",
    "conjugation",
    "probe-probcon",
];

pub const EX44_JSON: &str = include_str!("../scenarios/ex44.json");
pub const EX52_JSON: &str = include_str!("../scenarios/ex52.json");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDecl {
    pub name: String,
    /// Matrix rows of `x ↦ Mx`.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Rows `K` of the domain constraint `Kx = 0`.
    #[serde(default)]
    pub domain_constraints: Option<Vec<Vec<f64>>>,
    /// A named family instead of explicit rows: `rotation` or
    /// `shift_adjoint` (the single-valued selection of the truncated
    /// shift's adjoint).
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetKind {
    Ball { center: Vec<f64>, radius: f64 },
    Segment { a: Vec<f64>, b: Vec<f64> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Subspace { basis: Vec<Vec<f64>> },
    Singleton { point: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct SetDecl {
    pub name: String,
    #[serde(flatten)]
    pub kind: SetKind,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDecl {
    pub box_radius: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JDecl {
    pub slope: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDecl {
    pub name: String,
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub set: Option<String>,
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub zstar: Option<Vec<f64>>,
    /// Truncation sizes or dimensions, depending on the suite.
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    name: String,
    #[serde(default)]
    operators: Vec<OperatorDecl>,
    #[serde(default)]
    sets: Vec<SetDecl>,
    #[serde(default)]
    grids: Option<GridDecl>,
    #[serde(default)]
    j_function: Option<JDecl>,
    suites: Vec<SuiteDecl>,
}

/// A validated scenario with every operator and set built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub operators: BTreeMap<String, LinearRelation>,
    pub sets: BTreeMap<String, ConvexSet>,
    pub grid: Option<GridSpec>,
    pub j: JFunction,
    pub j_decl: JDecl,
    pub suites: Vec<SuiteDecl>,
}

fn invalid(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {msg}", field.into()))
}

fn matrix(rows: &[Vec<f64>], field: &str) -> Result<Matrix, CliError> {
    let r = rows.len();
    if r == 0 {
        return Err(invalid(field, "empty matrix"));
    }
    let c = rows[0].len();
    if let Some(k) = rows.iter().position(|row| row.len() != c) {
        return Err(invalid(format!("{field}[{k}]"), format!("row has {} entries, expected {c}", rows[k].len())));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn build_operator(op: &OperatorDecl, field: &str) -> Result<LinearRelation, CliError> {
    let core = |e: bigconj_core::Error| invalid(field, e);
    match (&op.builtin, &op.matrix) {
        (Some(_), Some(_)) => Err(invalid(field, "give either builtin or matrix, not both")),
        (None, None) => Err(invalid(field, "missing matrix")),
        (Some(b), None) => {
            let n = op.n.ok_or_else(|| invalid(format!("{field}.n"), "builtin operators need n"))?;
            match b.as_str() {
                "rotation" => rotation(n).map_err(core),
                "shift_adjoint" => Ok(TruncatedShift::build(n).map_err(core)?.adjoint_selection()),
                other => Err(invalid(format!("{field}.builtin"), format!("unknown builtin {other:?}"))),
            }
        }
        (None, Some(rows)) => {
            let m = matrix(rows, &format!("{field}.matrix"))?;
            if m.nrows() != m.ncols() {
                return Err(invalid(format!("{field}.matrix"), format!("{}x{} is not square", m.nrows(), m.ncols())));
            }
            match &op.domain_constraints {
                None => LinearRelation::from_matrix(&m, None).map_err(core),
                Some(k) => {
                    let kf = format!("{field}.domain_constraints");
                    let k = matrix(k, &kf)?;
                    if k.ncols() != m.ncols() {
                        return Err(invalid(kf, format!("{} columns, operator dimension is {}", k.ncols(), m.ncols())));
                    }
                    LinearRelation::from_matrix_with_constraints(&m, &k).map_err(core)
                }
            }
        }
    }
}

fn build_set(s: &SetKind, field: &str) -> Result<ConvexSet, CliError> {
    let v = |x: &[f64]| Vector::from_column_slice(x);
    let same = |a: &[f64], b: &[f64], names: (&str, &str)| {
        if a.len() == b.len() {
            Ok(())
        } else {
            Err(invalid(format!("{field}.{}", names.1), format!("dimension {} does not match {} ({})", b.len(), names.0, a.len())))
        }
    };
    let core = |e: bigconj_core::Error| invalid(field, e);
    match s {
        SetKind::Ball { center, radius } => ConvexSet::ball(v(center), *radius).map_err(core),
        SetKind::Segment { a, b } => {
            same(a, b, ("a", "b"))?;
            ConvexSet::segment(v(a), v(b)).map_err(core)
        }
        SetKind::Box { lower, upper } => {
            same(lower, upper, ("lower", "upper"))?;
            ConvexSet::boxed(v(lower), v(upper)).map_err(core)
        }
        SetKind::Subspace { basis } => {
            // rows are basis vectors
            let m = matrix(basis, &format!("{field}.basis"))?.transpose();
            Ok(ConvexSet::Subspace(bigconj_core::Subspace::from_columns(&m).map_err(core)?))
        }
        SetKind::Singleton { point } => Ok(ConvexSet::Singleton(v(point))),
        SetKind::Polytope { vertices } => {
            if let Some(first) = vertices.first() {
                for (k, p) in vertices.iter().enumerate() {
                    same(first, p, ("vertices[0]", &format!("vertices[{k}]")))?;
                }
            }
            ConvexSet::polytope(vertices.iter().map(|p| v(p)).collect()).map_err(core)
        }
    }
}

fn parse_error(e: serde_json::Error) -> CliError {
    CliError::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(parse_error)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.schema_version)));
        }
        // every operator and set lives in one ambient dimension
        let mut dim: Option<(usize, String)> = None;
        let mut agree = |d: usize, field: String| -> Result<(), CliError> {
            match &dim {
                None => {
                    dim = Some((d, field));
                    Ok(())
                }
                Some((d0, f0)) if *d0 != d => Err(invalid(field, format!("dimension {d} does not match {f0} (dimension {d0})"))),
                _ => Ok(()),
            }
        };
        let mut operators = BTreeMap::new();
        for (k, op) in raw.operators.iter().enumerate() {
            let field = format!("operators[{k}]");
            let rel = build_operator(op, &field)?;
            agree(rel.n(), field.clone())?;
            if operators.insert(op.name.clone(), rel).is_some() {
                return Err(invalid(format!("{field}.name"), format!("duplicate operator {:?}", op.name)));
            }
        }
        let mut sets = BTreeMap::new();
        for (k, s) in raw.sets.iter().enumerate() {
            let field = format!("sets[{k}]");
            let set = build_set(&s.kind, &field)?;
            agree(set.dim(), field.clone())?;
            if sets.insert(s.name.clone(), set).is_some() {
                return Err(invalid(format!("{field}.name"), format!("duplicate set {:?}", s.name)));
            }
        }
        let ambient = dim.map(|(d, _)| d);
        let grid = match raw.grids {
            Some(g) => Some(GridSpec::new(g.box_radius, g.n).map_err(|e| invalid("grids", e))?),
            None => None,
        };
        let j_decl = raw.j_function.unwrap_or(JDecl { slope: 1.0, offset: 0.0 });
        let j = JFunction::affine(j_decl.slope, j_decl.offset).map_err(|e| invalid("j_function", e))?;
        if raw.suites.is_empty() {
            return Err(invalid("suites", "no suites declared"));
        }
        for (k, s) in raw.suites.iter().enumerate() {
            let field = format!("suites[{k}]");
            if !SUITES.contains(&s.name.as_str()) {
                return Err(invalid(format!("{field}.name"), format!("unknown suite {:?}", s.name)));
            }
            if let Some(op) = &s.operator {
                if !operators.contains_key(op) {
                    return Err(invalid(format!("{field}.operator"), format!("no operator named {op:?}")));
                }
            }
            if let Some(set) = &s.set {
                if !sets.contains_key(set) {
                    return Err(invalid(format!("{field}.set"), format!("no set named {set:?}")));
                }
            }
            for (key, vec) in [("z", &s.z), ("zstar", &s.zstar)] {
                if let (Some(vec), Some(d)) = (vec, ambient) {
                    if vec.len() != d {
                        return Err(invalid(format!("{field}.{key}"), format!("dimension {} does not match {d}", vec.len())));
                    }
                }
            }
            if s.z.is_some() != s.zstar.is_some() {
                return Err(invalid(field, "z and zstar must be given together"));
            }
        }
        Ok(Scenario {
            name: raw.name,
            operators,
            sets,
            grid,
            j,
            j_decl,
            suites: raw.suites,
        })
    }

    /// Reads a scenario file; `ex44` and `ex52` name the bundled scenarios
    /// when no such file exists.
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        if !path.exists() {
            match path.to_str() {
                Some("ex44") => return Scenario::parse(EX44_JSON),
                Some("ex52") => return Scenario::parse(EX52_JSON),
                _ => {}
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_load() {
        let s = Scenario::parse(EX44_JSON).unwrap();
        assert_eq!(s.operators["A"].n(), 2);
        assert!(matches!(s.sets["C"], ConvexSet::Ball { .. }));
        let s = Scenario::parse(EX52_JSON).unwrap();
        assert!(matches!(s.sets["C"], ConvexSet::Segment { .. }));
    }

    #[test]
    fn dimension_mismatch_names_the_field() {
        let text = r#"{"schema_version": 1, "name": "bad",
            "operators": [{"name": "A", "matrix": [[0, -1], [1, 0]]}],
            "sets": [{"name": "C", "kind": "ball", "center": [0, 0, 0], "radius": 1}],
            "suites": [{"name": "thm43"}]}"#;
        match Scenario::parse(text) {
            Err(CliError::Validation(m)) => assert!(m.starts_with("sets[0]"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_suite_rejected() {
        let text = r#"{"schema_version": 1, "name": "bad", "suites": [{"name": "thm99"}]}"#;
        match Scenario::parse(text) {
            Err(CliError::Validation(m)) => assert!(m.contains("suites[0].name"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\n\"schema_version\": 1,\n\"name\": }";
        match Scenario::parse(text) {
            Err(CliError::Parse(m)) => assert!(m.starts_with("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
