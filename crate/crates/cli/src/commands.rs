//! Command dispatch. Every computation is a call into `ncw_core`; this module
//! only selects inputs and arranges the results.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use ncw_core::extensions::{
    boost_for_coriolis, cocycle_triviality, extended_gal_bracket, extended_mil_bracket, galilei_f_solve, mass_cocycle,
    milne_f_split, noncentral_witness, CocycleVerdict, ExtendedElement,
};
use ncw_core::gauge::{infinitesimal_gauge, nc_projection_invariance_check, GaugeElement};
use ncw_core::nc::{Check, GalileiStructure, NCBStructure, NCStructure};
use ncw_core::symmetry::{
    classify, fit_frame, solve_symmetries, structure_constants, verify_coriolis_identity, DegreeBound, Flavor,
    SymmetryBasis,
};
use ncw_core::tensor::{check_newtonian, curvature, index_tuples, Connection, TensorField, VectorField};
use ncw_core::{Poly, Rational};

use crate::dsl::{StructureDocument, StructureSpec};
use crate::expr::{format_field, parse_field, parse_poly, parse_poly_list};
use crate::report::Report;
use crate::InputError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Validate,
    Connection,
    Curvature,
    Solve {
        flavor: Flavor,
        degree: u32,
    },
    Brackets {
        flavor: Flavor,
        degree: u32,
    },
    Classify {
        field: String,
    },
    Extend {
        flavor: Flavor,
        degree: u32,
    },
    Gauge {
        psi: String,
        f: String,
        field: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Connection => "connection",
            Command::Curvature => "curvature",
            Command::Solve { .. } => "solve",
            Command::Brackets { .. } => "brackets",
            Command::Classify { .. } => "classify",
            Command::Extend { .. } => "extend",
            Command::Gauge { .. } => "gauge",
        }
    }
}

/// A report plus the verdict that decides the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub verdict: bool,
}

pub fn run_command(doc: &StructureDocument, cmd: &Command) -> Result<Outcome, InputError> {
    let report = Report::new(cmd.name(), doc);
    match cmd {
        Command::Validate => validate(doc, report),
        Command::Connection => connection(doc, report),
        Command::Curvature => curvature_cmd(doc, report),
        Command::Solve { flavor, degree } => solve(doc, report, *flavor, *degree),
        Command::Brackets { flavor, degree } => brackets(doc, report, *flavor, *degree),
        Command::Classify { field } => classify_cmd(doc, report, field),
        Command::Extend { flavor, degree } => extend(doc, report, *flavor, *degree),
        Command::Gauge { psi, f, field } => gauge(doc, report, psi, f, field.as_deref()),
    }
}

fn ok(report: Report) -> Result<Outcome, InputError> {
    Ok(Outcome { report, verdict: true })
}

fn check_json(c: &Check) -> Value {
    json!({ "label": c.label, "passed": c.passed, "detail": c.detail })
}

fn validate(doc: &StructureDocument, mut report: Report) -> Result<Outcome, InputError> {
    let checks: Result<Vec<Check>, ncw_core::Error> = match &doc.spec {
        StructureSpec::Explicit {
            gamma,
            theta,
            connection,
        } => GalileiStructure::new(gamma.clone(), theta.clone())
            .and_then(|base| NCStructure::new_unchecked(base, connection.clone()))
            .and_then(|s| s.checks()),
        _ => doc
            .require_ncb()
            .map_err(|e| ncw_core::Error::Precondition(e.to_string()))
            .and_then(|s| s.checks()),
    };
    let checks = checks.unwrap_or_else(|e| {
        vec![Check {
            label: "structure".into(),
            passed: false,
            detail: e.to_string(),
        }]
    });
    let passed = checks.iter().all(|c| c.passed);
    report.put("checks", checks.iter().map(check_json).collect::<Vec<_>>());
    report.put("valid", passed);
    Ok(Outcome {
        report,
        verdict: passed,
    })
}

fn connection_json(g: &Connection) -> Value {
    let d = g.dim();
    let mut out = Vec::new();
    for a in 0..d {
        for b in a..d {
            for c in 0..d {
                let v = g.get(a, b, c);
                if !v.is_zero() {
                    out.push(json!({ "index": format!("{a},{b},{c}"), "value": v.to_string() }));
                }
            }
        }
    }
    Value::Array(out)
}

fn tensor_json(t: &TensorField) -> Value {
    let mut out = Vec::new();
    for idx in index_tuples(t.dim(), t.rank()) {
        let v = t.get(&idx);
        if !v.is_zero() {
            let index = idx.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            out.push(json!({ "index": index, "value": v.to_string() }));
        }
    }
    Value::Array(out)
}

fn connection(doc: &StructureDocument, mut report: Report) -> Result<Outcome, InputError> {
    let nc = doc.nc()?;
    if let Some(s) = doc.ncb()? {
        report.put("U", format_field(s.u()));
        report.put("A", form_string(s.a()));
        report.put("V", format_field(s.v()));
        report.put("phi", s.phi().to_string());
    }
    report.put(
        "source",
        if matches!(doc.spec, StructureSpec::Explicit { .. }) {
            "explicit"
        } else {
            "assembled"
        },
    );
    report.put("components", connection_json(nc.connection()));
    ok(report)
}

fn form_string(t: &TensorField) -> String {
    t.components()
        .iter()
        .map(Poly::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn curvature_cmd(doc: &StructureDocument, mut report: Report) -> Result<Outcome, InputError> {
    let nc = doc.nc_unchecked()?;
    let r = curvature(nc.connection());
    let comps: Vec<Value> = r
        .nonzero_components()
        .into_iter()
        .map(|(i, v)| json!({ "index": format!("{},{},{},{}", i[0], i[1], i[2], i[3]), "value": v.to_string() }))
        .collect();
    let check = check_newtonian(&r, nc.gamma())?;
    report.put("components", comps);
    report.put("newtonian", check.holds);
    report.put(
        "witness",
        check.witness.map_or(Value::Null, |w| {
            format!("a={},b={},c={},d={}", w[0], w[1], w[2], w[3]).into()
        }),
    );
    Ok(Outcome {
        report,
        verdict: check.holds,
    })
}

/// Role of a generator fitted to the frame template `ω x + ϱ(t)`, `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Rotation(usize, usize),
    Boost(usize),
    SpaceTranslation(usize),
    TimeTranslation,
    Raw,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::Rotation(..) => "rotation",
            Role::Boost(_) => "boost",
            Role::SpaceTranslation(_) => "space-translation",
            Role::TimeTranslation => "time-translation",
            Role::Raw => "raw",
        }
    }

    fn stem(self, i: usize) -> String {
        match self {
            Role::Rotation(a, b) => format!("J{a}{b}"),
            Role::Boost(a) => format!("K{a}"),
            Role::SpaceTranslation(a) => format!("P{a}"),
            Role::TimeTranslation => "H".into(),
            Role::Raw => format!("X{}", i + 1),
        }
    }
}

pub fn role_of(x: &VectorField) -> Role {
    let Some(p) = fit_frame(x) else {
        return Role::Raw;
    };
    let n = p.n();
    let rotations: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !p.omega[a][b].is_zero())
        .collect();
    let moved: Vec<usize> = (0..n).filter(|&a| !p.rho[a].is_zero()).collect();
    let timed = !p.tau.is_zero();
    match (rotations.as_slice(), moved.as_slice(), timed) {
        ([], [], true) => Role::TimeTranslation,
        ([(a, b)], [], false) if p.omega[*a][*b].is_constant() => Role::Rotation(a + 1, b + 1),
        ([], [a], false) => {
            let r = &p.rho[*a];
            if r.is_constant() {
                Role::SpaceTranslation(a + 1)
            } else if r.degree() == Some(1) && r.d(0).is_constant() && r.constant_term().is_zero() {
                Role::Boost(a + 1)
            } else {
                Role::Raw
            }
        }
        _ => Role::Raw,
    }
}

/// Generator names, made unique in basis order.
pub fn generator_names(basis: &[VectorField]) -> Vec<(String, Role)> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    basis
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let role = role_of(x);
            let stem = role.stem(i);
            let k = seen.entry(stem.clone()).or_insert(0);
            *k += 1;
            let name = if *k == 1 { stem } else { format!("{stem}_{k}") };
            (name, role)
        })
        .collect()
}

fn basis_json(basis: &SymmetryBasis, names: &[(String, Role)]) -> Vec<Value> {
    basis
        .basis
        .iter()
        .zip(names)
        .map(|(x, (name, role))| json!({ "name": name, "role": role.label(), "field": format_field(x) }))
        .collect()
}

fn solved(
    doc: &StructureDocument,
    flavor: Flavor,
    degree: u32,
) -> Result<(SymmetryBasis, Vec<(String, Role)>), InputError> {
    let nc = doc.nc()?;
    let basis = solve_symmetries(&nc, flavor, DegreeBound(degree))?;
    let names = generator_names(&basis.basis);
    Ok((basis, names))
}

fn solve(doc: &StructureDocument, report: Report, flavor: Flavor, degree: u32) -> Result<Outcome, InputError> {
    let mut report = report.flag("flavor", flavor.short()).flag("degree", degree);
    let (basis, names) = solved(doc, flavor, degree)?;
    report.put("flavor", flavor.name());
    report.put("dimension", basis.len());
    report.put("basis", basis_json(&basis, &names));
    ok(report)
}

fn term(c: &Rational, name: &str, first: bool) -> String {
    let neg = c < &Rational::zero();
    let mag = if neg { -c.clone() } else { c.clone() };
    let body = if mag.is_one() {
        name.to_string()
    } else {
        format!("{mag}*{name}")
    };
    match (first, neg) {
        (true, false) => body,
        (true, true) => format!("-{body}"),
        (false, false) => format!(" + {body}"),
        (false, true) => format!(" - {body}"),
    }
}

/// `Σ c_k name_k`, or `0`.
pub fn linear_combination(terms: &[(Rational, String)]) -> String {
    let mut s = String::new();
    for (c, name) in terms.iter().filter(|(c, _)| !c.is_zero()) {
        s.push_str(&term(c, name, s.is_empty()));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn brackets(doc: &StructureDocument, report: Report, flavor: Flavor, degree: u32) -> Result<Outcome, InputError> {
    let mut report = report.flag("flavor", flavor.short()).flag("degree", degree);
    let (basis, names) = solved(doc, flavor, degree)?;
    let sc = structure_constants(&basis)?;
    let n = basis.len();
    let mut table = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let pair = format!("[{}, {}]", names[i].0, names[j].0);
            if sc.leaking.contains(&(i, j)) {
                table.push(json!({ "pair": pair, "bracket": Value::Null }));
                continue;
            }
            let terms: Vec<(Rational, String)> =
                (0..n).map(|k| (sc.get(i, j, k).clone(), names[k].0.clone())).collect();
            let expr = linear_combination(&terms);
            if expr != "0" {
                table.push(json!({ "pair": pair, "bracket": expr }));
            }
        }
    }
    let constants: Vec<Value> = sc
        .constants
        .iter()
        .map(|row| {
            Value::Array(
                row.iter()
                    .map(|col| Value::Array(col.iter().map(|c| Value::from(c.to_string())).collect()))
                    .collect(),
            )
        })
        .collect();
    let leaking: Vec<Value> = sc
        .leaking
        .iter()
        .map(|&(i, j)| Value::from(format!("[{}, {}]", names[i].0, names[j].0)))
        .collect();
    report.put("dimension", n);
    report.put("basis", basis_json(&basis, &names));
    report.put("closed", sc.closed);
    report.put("leaking", leaking);
    report.put("table", table);
    report.put("constants", constants);
    ok(report)
}

fn classify_cmd(doc: &StructureDocument, report: Report, field: &str) -> Result<Outcome, InputError> {
    let mut report = report.flag("field", field);
    let nc = doc.nc()?;
    let x = parse_field(field, nc.dim())?;
    let c = classify(&x, &nc)?;
    let strongest = if c.is_galilei {
        "galilei"
    } else if c.is_milne {
        "milne"
    } else if c.is_coriolis {
        "coriolis"
    } else {
        "none"
    };
    report.put("field", format_field(&x));
    report.put("coriolis", c.is_coriolis);
    report.put("milne", c.is_milne);
    report.put("galilei", c.is_galilei);
    report.put("strongest", strongest);
    report.put("role", role_of(&x).label());
    if c.is_coriolis {
        report.put("raised connection identity", verify_coriolis_identity(&x, &nc)?);
    }
    Ok(Outcome {
        report,
        verdict: c.is_coriolis,
    })
}

fn extend(doc: &StructureDocument, report: Report, flavor: Flavor, degree: u32) -> Result<Outcome, InputError> {
    let mut report = report.flag("flavor", flavor.short()).flag("degree", degree);
    let s = doc.require_ncb()?;
    let nc = s.nc_structure()?;
    let d = DegreeBound(degree);
    let basis = solve_symmetries(&nc, flavor, d)?;
    let names = generator_names(&basis.basis);
    report.put("flavor", flavor.name());
    report.put("dimension", basis.len());
    match flavor {
        Flavor::Coriolis => {
            let mut elems = Vec::new();
            for (x, (name, role)) in basis.basis.iter().zip(&names) {
                let psi = boost_for_coriolis(x, &s)?;
                elems.push(json!({
                    "name": name, "role": role.label(), "field": format_field(x), "psi": form_string(&psi),
                }));
            }
            report.put("elements", elems);
        }
        Flavor::Milne => {
            let mut elems = Vec::new();
            for (x, (name, role)) in basis.basis.iter().zip(&names) {
                let (f, solvable) = milne_f_split(x, &s)?;
                elems.push(json!({
                    "name": name, "role": role.label(), "field": format_field(x),
                    "f": if solvable { Value::from(f.to_string()) } else { Value::Null },
                }));
            }
            report.put("elements", elems);
            report.put("table", extended_table(&s, &basis, &names, Flavor::Milne)?);
            let witness = noncentral_witness(&s, Flavor::Milne, d)?;
            report.put("central", witness.is_none());
            report.put(
                "witness",
                witness.map_or(Value::Null, |w| {
                    json!({ "field": format_field(&w.x), "xi": w.xi.to_string(), "bracket": w.bracket.to_string() })
                }),
            );
        }
        Flavor::Galilei => {
            let mut elems = Vec::new();
            for (x, (name, role)) in basis.basis.iter().zip(&names) {
                let (f, solvable) = galilei_f_solve(x, &s)?;
                elems.push(json!({
                    "name": name, "role": role.label(), "field": format_field(x),
                    "f": if solvable { Value::from(f.to_string()) } else { Value::Null },
                }));
            }
            report.put("elements", elems);
            report.put("table", extended_table(&s, &basis, &names, Flavor::Galilei)?);
            match mass_cocycle(&basis) {
                Ok(c) => {
                    let verdict = cocycle_triviality(&basis, &c)?;
                    let pair = |i: usize, j: usize| format!("[{}, {}]", names[i].0, names[j].0);
                    match verdict {
                        CocycleVerdict::Trivial { witness } => {
                            let terms: Vec<(Rational, String)> = witness
                                .into_iter()
                                .zip(names.iter().map(|(n, _)| format!("{n}^*")))
                                .collect();
                            report.put("verdict", "central extension: TRIVIAL");
                            report.put("coboundary", linear_combination(&terms));
                        }
                        CocycleVerdict::Nontrivial { certificate } => {
                            report.put("verdict", "central extension: NONTRIVIAL");
                            let cert: Vec<Value> = certificate
                                .iter()
                                .map(|((i, j), y)| json!({ "pair": pair(*i, *j), "weight": y.to_string() }))
                                .collect();
                            report.put("certificate", cert);
                        }
                    }
                }
                Err(e) => report.put("verdict", format!("central extension: UNDECIDED ({e})")),
            }
        }
    }
    ok(report)
}

/// Brackets of the lifts `(X_i, 0)`: `[X_i, X_j]` in generator names plus the
/// ideal part (`M` coefficient for Galilei, `xi(t)` for Milne).
fn extended_table(
    s: &NCBStructure,
    basis: &SymmetryBasis,
    names: &[(String, Role)],
    flavor: Flavor,
) -> Result<Vec<Value>, InputError> {
    let nvars = s.nvars();
    let lift = |x: &VectorField| ExtendedElement::new(x.clone(), Poly::zero(nvars));
    let n = basis.len();
    let mut table = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (lift(&basis.basis[i])?, lift(&basis.basis[j])?);
            let br = match flavor {
                Flavor::Galilei => extended_gal_bracket(s, &a, &b)?,
                _ => extended_mil_bracket(s, &a, &b)?,
            };
            let pair = format!("[{}, {}]", names[i].0, names[j].0);
            let Some(coords) = basis.coordinates(&br.x)? else {
                table.push(json!({ "pair": pair, "bracket": Value::Null }));
                continue;
            };
            let mut terms: Vec<(Rational, String)> =
                coords.into_iter().zip(names.iter().map(|(n, _)| n.clone())).collect();
            let mut expr = String::new();
            if !br.f.is_zero() {
                if flavor == Flavor::Galilei && br.f.is_constant() {
                    terms.push((br.f.constant_term(), "M".into()));
                } else {
                    expr = format!("xi({})", br.f);
                }
            }
            let mut full = linear_combination(&terms);
            if !expr.is_empty() {
                full = if full == "0" { expr } else { format!("{full} + {expr}") };
            }
            if full != "0" {
                table.push(json!({ "pair": pair, "bracket": full }));
            }
        }
    }
    Ok(table)
}

fn gauge(
    doc: &StructureDocument,
    report: Report,
    psi: &str,
    f: &str,
    field: Option<&str>,
) -> Result<Outcome, InputError> {
    let mut report = report.flag("psi", psi).flag("f", f);
    if let Some(x) = field {
        report = report.flag("field", x);
    }
    let s = doc.require_ncb()?;
    let dim = s.dim();
    let psi = TensorField::covector(parse_poly_list(psi, dim, dim)?)?;
    let f = parse_poly(f, dim)?;
    let x = match field {
        Some(t) => parse_field(t, dim)?,
        None => VectorField::zero(dim, dim),
    };
    let e = GaugeElement::new(x, psi.clone(), f.clone())?;
    let var = infinitesimal_gauge(&s, &e)?;
    let mut delta = Map::new();
    delta.insert("gamma".into(), tensor_json(&var.gamma));
    delta.insert("theta".into(), tensor_json(&var.theta));
    delta.insert("U".into(), format_field(&var.u).into());
    delta.insert("V".into(), format_field(&var.v).into());
    delta.insert("phi".into(), var.phi.to_string().into());
    let invariant = nc_projection_invariance_check(&s, &psi, &f)?;
    report.put("variation", Value::Object(delta));
    report.put("connection invariant", invariant);
    Ok(Outcome {
        report,
        verdict: invariant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_structure;

    fn run(text: &str, cmd: Command) -> Outcome {
        run_command(&parse_structure(text).unwrap(), &cmd).unwrap()
    }

    #[test]
    fn flat_galilei_names() {
        let o = run(
            "flat n=2",
            Command::Solve {
                flavor: Flavor::Galilei,
                degree: 1,
            },
        );
        let basis = o.report.results["basis"].as_array().unwrap();
        let mut names: Vec<&str> = basis.iter().map(|b| b["name"].as_str().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["H", "J12", "K1", "K2", "P1", "P2"]);
    }

    #[test]
    fn linear_combinations() {
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let t = [
            (q(1, 1), "A".to_string()),
            (q(-3, 2), "B".into()),
            (q(0, 1), "C".into()),
        ];
        assert_eq!(linear_combination(&t), "A - 3/2*B");
        assert_eq!(linear_combination(&[]), "0");
        assert_eq!(linear_combination(&[(q(-1, 1), "M".into())]), "-M");
    }

    #[test]
    fn raw_generators_are_not_labelled() {
        let x = parse_field("0, t^2, 0", 3).unwrap();
        assert_eq!(role_of(&x), Role::Raw);
        let x = parse_field("0, x2, -x1", 3).unwrap();
        assert_eq!(role_of(&x), Role::Rotation(1, 2));
        let x = parse_field("0, 2*t, 0", 3).unwrap();
        assert_eq!(role_of(&x), Role::Boost(1));
    }

    #[test]
    fn extend_gal_flat_is_nontrivial() {
        let o = run(
            "flat n=2",
            Command::Extend {
                flavor: Flavor::Galilei,
                degree: 1,
            },
        );
        assert_eq!(o.report.results["verdict"], "central extension: NONTRIVIAL");
    }

    #[test]
    fn extend_mil_reports_witness() {
        let o = run(
            "standard n=1 phi = x1^2",
            Command::Extend {
                flavor: Flavor::Milne,
                degree: 1,
            },
        );
        assert_eq!(o.report.results["central"], false);
        assert_eq!(o.report.results["witness"]["bracket"], "1");
    }
}
