//! The structure-definition language.
//!
//! One statement per line, `#` comments:
//!
//! ```text
//! name = "rotating frame"
//! n = 2
//! flat                          # or: standard phi = x1^2, standard(n = 2, phi = x1^2)
//! gamma[1][1] = 1               # 0-based indices, index 0 is time
//! theta[0] = 1
//! U[0] = 1                      # with A[..] (gauge data) or V[..], phi (observer data)
//! Gamma[0][1][2] = t            # explicit connection; `Gamma = 0` for the zero connection
//! ```
//!
//! Symmetric objects (`gamma`, the lower pair of `Gamma`) are mirrored when only
//! one ordering is given. Unspecified components are zero.

use std::collections::BTreeMap;

use ncw_core::nc::{GalileiStructure, NCBStructure, NCStructure};
use ncw_core::tensor::{Connection, TensorField, VectorField};
use ncw_core::Poly;

use crate::expr::{lex_line, Expr, ParseError, Parser, Tok};
use crate::InputError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureSpec {
    Flat,
    Standard {
        phi: Poly,
    },
    Explicit {
        gamma: TensorField,
        theta: TensorField,
        connection: Connection,
    },
    Gauge {
        gamma: TensorField,
        theta: TensorField,
        u: VectorField,
        a: TensorField,
    },
    Observer {
        gamma: TensorField,
        theta: TensorField,
        u: VectorField,
        v: VectorField,
        phi: Poly,
    },
}

impl StructureSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StructureSpec::Flat => "flat",
            StructureSpec::Standard { .. } => "standard",
            StructureSpec::Explicit { .. } => "explicit",
            StructureSpec::Gauge { .. } => "gauge",
            StructureSpec::Observer { .. } => "observer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureDocument {
    pub name: Option<String>,
    pub n: usize,
    pub spec: StructureSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Field {
    Gamma,
    Theta,
    U,
    A,
    V,
    Phi,
    Connection,
}

impl Field {
    fn parse(name: &str) -> Option<Field> {
        Some(match name {
            "gamma" => Field::Gamma,
            "theta" => Field::Theta,
            "U" => Field::U,
            "A" => Field::A,
            "V" => Field::V,
            "phi" => Field::Phi,
            "Gamma" => Field::Connection,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Field::Gamma => "gamma",
            Field::Theta => "theta",
            Field::U => "U",
            Field::A => "A",
            Field::V => "V",
            Field::Phi => "phi",
            Field::Connection => "Gamma",
        }
    }

    fn arity(self) -> usize {
        match self {
            Field::Gamma => 2,
            Field::Theta | Field::U | Field::A | Field::V => 1,
            Field::Phi => 0,
            Field::Connection => 3,
        }
    }
}

#[derive(Debug, Clone)]
struct Assignment {
    line: usize,
    /// (index, column)
    indices: Vec<(usize, usize)>,
    value: Expr,
}

#[derive(Debug, Clone)]
enum Preset {
    Flat,
    Standard(Option<(usize, Expr)>),
}

#[derive(Default)]
struct Collected {
    name: Option<String>,
    n: Option<(usize, usize)>,
    preset: Option<(usize, Preset)>,
    fields: BTreeMap<Field, Vec<Assignment>>,
    /// `Gamma = 0`
    zero_connection: Option<usize>,
}

impl Collected {
    fn set_n(&mut self, line: usize, col: usize, n: usize) -> Result<(), ParseError> {
        match self.n {
            Some((_, m)) if m != n => Err(ParseError::new(line, col, format!("n redefined ({m} then {n})"))),
            _ => {
                self.n = Some((line, n));
                Ok(())
            }
        }
    }
}

/// Parses a structure document.
pub fn parse_structure(text: &str) -> Result<StructureDocument, InputError> {
    let mut c = Collected::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = lex_line(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser::new(line, &toks, raw.chars().count() + 1);
        statement(&mut p, line, &mut c)?;
    }
    build(c)
}

fn statement(p: &mut Parser<'_>, line: usize, c: &mut Collected) -> Result<(), ParseError> {
    let col = p.col();
    let Some(Tok::Ident(head)) = p.bump() else {
        return Err(ParseError::new(line, col, "expected a statement"));
    };
    match head.as_str() {
        "flat" | "standard" => {
            if c.preset.is_some() {
                return Err(ParseError::new(line, col, "preset given twice"));
            }
            let mut phi = None;
            let parens = p.eat(&Tok::LParen);
            while !p.at_end() && !(parens && p.peek() == Some(&Tok::RParen)) {
                let kcol = p.col();
                match p.bump() {
                    Some(Tok::Ident(k)) if k == "n" => {
                        p.expect(&Tok::Eq)?;
                        let ncol = p.col();
                        let n = p.int()?;
                        c.set_n(line, ncol, n)?;
                    }
                    Some(Tok::Ident(k)) if k == "phi" && head == "standard" => {
                        p.expect(&Tok::Eq)?;
                        phi = Some((line, p.expr()?));
                    }
                    _ => {
                        let allowed = if head == "flat" { "`n`" } else { "`n` or `phi`" };
                        return Err(ParseError::new(
                            line,
                            kcol,
                            format!("expected {allowed} in `{head}` preset"),
                        ));
                    }
                }
                p.eat(&Tok::Comma);
            }
            if parens {
                p.expect(&Tok::RParen)?;
            }
            p.expect_end()?;
            let preset = if head == "flat" {
                Preset::Flat
            } else {
                Preset::Standard(phi)
            };
            c.preset = Some((line, preset));
        }
        "n" => {
            p.expect(&Tok::Eq)?;
            let ncol = p.col();
            let n = p.int()?;
            p.expect_end()?;
            c.set_n(line, ncol, n)?;
        }
        "name" => {
            p.expect(&Tok::Eq)?;
            let name = match p.bump() {
                Some(Tok::Str(s)) | Some(Tok::Ident(s)) => s,
                _ => return Err(ParseError::new(line, col, "expected a name")),
            };
            p.expect_end()?;
            c.name = Some(name);
        }
        other => {
            let Some(field) = Field::parse(other) else {
                return Err(ParseError::new(line, col, format!("unknown statement `{other}`")));
            };
            if field == Field::Connection && p.peek() == Some(&Tok::Eq) {
                p.expect(&Tok::Eq)?;
                let zcol = p.col();
                match p.bump() {
                    Some(Tok::Int(z)) if z.chars().all(|ch| ch == '0') => {}
                    _ => return Err(ParseError::new(line, zcol, "only `Gamma = 0` may omit indices")),
                }
                p.expect_end()?;
                c.zero_connection = Some(line);
                return Ok(());
            }
            let mut indices = Vec::new();
            for _ in 0..field.arity() {
                p.expect(&Tok::LBracket)?;
                let icol = p.col();
                indices.push((p.int()?, icol));
                p.expect(&Tok::RBracket)?;
            }
            if p.peek() == Some(&Tok::LBracket) {
                return Err(p.error(format!("`{}` takes {} indices", field.name(), field.arity())));
            }
            p.expect(&Tok::Eq)?;
            let value = p.expr()?;
            p.expect_end()?;
            c.fields
                .entry(field)
                .or_default()
                .push(Assignment { line, indices, value });
        }
    }
    Ok(())
}

fn fill(
    c: &Collected,
    field: Field,
    n: usize,
    symmetric_pair: Option<(usize, usize)>,
) -> Result<BTreeMap<Vec<usize>, Poly>, ParseError> {
    let dim = n + 1;
    let mut out: BTreeMap<Vec<usize>, (Poly, usize)> = BTreeMap::new();
    let mut explicit = BTreeMap::new();
    for a in c.fields.get(&field).into_iter().flatten() {
        for &(i, col) in &a.indices {
            if i >= dim {
                return Err(ParseError::new(a.line, col, format!("index {i} out of range 0..{n}")));
            }
        }
        let idx: Vec<usize> = a.indices.iter().map(|(i, _)| *i).collect();
        let value = a.value.to_poly(a.line, dim)?;
        if explicit.insert(idx.clone(), a.line).is_some() {
            return Err(ParseError::new(
                a.line,
                1,
                format!("{} assigned twice", component_name(field, &idx)),
            ));
        }
        out.insert(idx, (value, a.line));
    }
    if let Some((i, j)) = symmetric_pair {
        let given: Vec<(Vec<usize>, (Poly, usize))> = out.clone().into_iter().collect();
        for (idx, (value, line)) in given {
            let mut mirror = idx.clone();
            mirror.swap(i, j);
            match out.get(&mirror) {
                Some((other, _)) if other != &value => {
                    return Err(ParseError::new(
                        line,
                        1,
                        format!(
                            "{} must be symmetric: {} = {} but {} = {}",
                            field.name(),
                            component_name(field, &idx),
                            value,
                            component_name(field, &mirror),
                            other
                        ),
                    ));
                }
                Some(_) => {}
                None => {
                    out.insert(mirror, (value, line));
                }
            }
        }
    }
    Ok(out.into_iter().map(|(k, (v, _))| (k, v)).collect())
}

fn component_name(field: Field, idx: &[usize]) -> String {
    let mut s = field.name().to_string();
    for i in idx {
        s.push_str(&format!("[{i}]"));
    }
    s
}

fn tensor(dim: usize, contra: usize, co: usize, comps: &BTreeMap<Vec<usize>, Poly>) -> TensorField {
    let mut t = TensorField::zero(dim, dim, contra, co);
    for (idx, v) in comps {
        t.set(idx, v.clone());
    }
    t
}

fn vector(dim: usize, comps: &BTreeMap<Vec<usize>, Poly>) -> VectorField {
    let mut v = vec![Poly::zero(dim); dim];
    for (idx, p) in comps {
        v[idx[0]] = p.clone();
    }
    VectorField::new(v).expect("uniform variable count")
}

fn build(c: Collected) -> Result<StructureDocument, InputError> {
    let Some((_, n)) = c.n else {
        return Err(ParseError::new(1, 1, "spatial dimension missing: add `n = <k>` or `flat n=<k>`").into());
    };
    if n == 0 {
        return Err(ParseError::new(c.n.map_or(1, |(l, _)| l), 1, "n must be at least 1").into());
    }
    let dim = n + 1;
    for a in c.fields.values().flatten() {
        for &(i, col) in &a.indices {
            if i >= dim {
                return Err(ParseError::new(a.line, col, format!("index {i} out of range 0..{n}")).into());
            }
        }
    }
    let has = |f: Field| c.fields.contains_key(&f);
    let mode_error = |line: usize, detail: &str| -> InputError {
        ParseError::new(
            line,
            1,
            format!(
                "exactly one of explicit Gamma, gauge data (U, A), observer data (U, V, phi) or a preset is required: {detail}"
            ),
        )
        .into()
    };
    let first_line = |fs: &[Field]| {
        fs.iter()
            .filter_map(|f| c.fields.get(f).and_then(|v| v.first()).map(|a| a.line))
            .min()
            .unwrap_or(1)
    };

    if let Some((pline, preset)) = &c.preset {
        let all = [
            Field::Gamma,
            Field::Theta,
            Field::U,
            Field::A,
            Field::V,
            Field::Phi,
            Field::Connection,
        ];
        if all.iter().any(|&f| has(f)) || c.zero_connection.is_some() {
            return Err(mode_error(
                first_line(&all).max(*pline),
                "preset combined with explicit components",
            ));
        }
        let spec = match preset {
            Preset::Flat => StructureSpec::Flat,
            Preset::Standard(phi) => StructureSpec::Standard {
                phi: match phi {
                    Some((line, e)) => e.to_poly(*line, dim)?,
                    None => Poly::zero(dim),
                },
            },
        };
        return Ok(StructureDocument { name: c.name, n, spec });
    }

    let explicit = has(Field::Connection) || c.zero_connection.is_some();
    let gauge = has(Field::A);
    let observer = has(Field::V) || has(Field::Phi);
    if !has(Field::Theta) {
        let line = first_line(&[Field::Gamma]);
        return Err(ParseError::new(
            line,
            1,
            "theta missing: the kernel condition gamma(theta) = 0 is unverifiable",
        )
        .into());
    }
    if !has(Field::Gamma) {
        let line = first_line(&[Field::Theta]);
        return Err(ParseError::new(line, 1, "gamma missing: the spatial metric must be given").into());
    }
    let modes = [explicit, gauge, observer].iter().filter(|&&m| m).count();
    if modes != 1 {
        let line = first_line(&[Field::Connection, Field::U, Field::A, Field::V, Field::Phi]);
        let detail = if modes == 0 {
            "no connection data given"
        } else {
            "several kinds of connection data given"
        };
        return Err(mode_error(line, detail));
    }
    if explicit && has(Field::U) {
        return Err(mode_error(first_line(&[Field::U]), "U is only used with A or V"));
    }
    if (gauge || observer) && !has(Field::U) {
        return Err(mode_error(
            first_line(&[Field::A, Field::V, Field::Phi]),
            "U is required with A or V",
        ));
    }
    if observer && !has(Field::V) {
        return Err(mode_error(first_line(&[Field::Phi]), "observer data needs V"));
    }
    if has(Field::Connection) && c.zero_connection.is_some() {
        return Err(mode_error(
            first_line(&[Field::Connection]),
            "`Gamma = 0` combined with Gamma components",
        ));
    }

    let gamma = tensor(dim, 2, 0, &fill(&c, Field::Gamma, n, Some((0, 1)))?);
    let theta = tensor(dim, 0, 1, &fill(&c, Field::Theta, n, None)?);
    let spec = if explicit {
        let comps = fill(&c, Field::Connection, n, Some((0, 1)))?;
        let mut g = Connection::zero(dim, dim);
        for (idx, v) in comps {
            g.set(idx[0], idx[1], idx[2], v);
        }
        StructureSpec::Explicit {
            gamma,
            theta,
            connection: g,
        }
    } else {
        let u = vector(dim, &fill(&c, Field::U, n, None)?);
        if gauge {
            let a = tensor(dim, 0, 1, &fill(&c, Field::A, n, None)?);
            StructureSpec::Gauge { gamma, theta, u, a }
        } else {
            let v = vector(dim, &fill(&c, Field::V, n, None)?);
            let phi = fill(&c, Field::Phi, n, None)?
                .remove(&vec![])
                .unwrap_or_else(|| Poly::zero(dim));
            StructureSpec::Observer {
                gamma,
                theta,
                u,
                v,
                phi,
            }
        }
    };
    Ok(StructureDocument { name: c.name, n, spec })
}

/// Nonzero components; an all-zero field is written as one explicit zero so
/// that it stays present.
fn emit_components(out: &mut String, name: &str, t: &TensorField, keep: impl Fn(&[usize]) -> bool) {
    let dim = t.dim();
    let mut any = false;
    for idx in ncw_core::tensor::index_tuples(dim, t.rank()) {
        let v = t.get(&idx);
        if v.is_zero() || !keep(&idx) {
            continue;
        }
        any = true;
        out.push_str(name);
        for i in &idx {
            out.push_str(&format!("[{i}]"));
        }
        out.push_str(&format!(" = {v}\n"));
    }
    if !any {
        out.push_str(name);
        out.push_str(&"[0]".repeat(t.rank()));
        out.push_str(" = 0\n");
    }
}

impl StructureDocument {
    /// Canonical text; parses back to an identical document.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str(&format!("name = \"{name}\"\n"));
        }
        out.push_str(&format!("n = {}\n", self.n));
        let upper = |idx: &[usize]| idx[0] <= idx[1];
        let all = |_: &[usize]| true;
        match &self.spec {
            StructureSpec::Flat => out.push_str("flat\n"),
            StructureSpec::Standard { phi } => out.push_str(&format!("standard phi = {phi}\n")),
            StructureSpec::Explicit {
                gamma,
                theta,
                connection,
            } => {
                emit_components(&mut out, "gamma", gamma, upper);
                emit_components(&mut out, "theta", theta, all);
                if connection.is_zero() {
                    out.push_str("Gamma = 0\n");
                } else {
                    let d = connection.dim();
                    for a in 0..d {
                        for b in a..d {
                            for k in 0..d {
                                let v = connection.get(a, b, k);
                                if !v.is_zero() {
                                    out.push_str(&format!("Gamma[{a}][{b}][{k}] = {v}\n"));
                                }
                            }
                        }
                    }
                }
            }
            StructureSpec::Gauge { gamma, theta, u, a } => {
                emit_components(&mut out, "gamma", gamma, upper);
                emit_components(&mut out, "theta", theta, all);
                emit_components(&mut out, "U", &u.to_tensor(), all);
                emit_components(&mut out, "A", a, all);
            }
            StructureSpec::Observer {
                gamma,
                theta,
                u,
                v,
                phi,
            } => {
                emit_components(&mut out, "gamma", gamma, upper);
                emit_components(&mut out, "theta", theta, all);
                emit_components(&mut out, "U", &u.to_tensor(), all);
                emit_components(&mut out, "V", &v.to_tensor(), all);
                out.push_str(&format!("phi = {phi}\n"));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// The Newton-Cartan-Bargmann data, when the document carries a gauge.
    pub fn ncb(&self) -> Result<Option<NCBStructure>, InputError> {
        let n = self.n;
        Ok(Some(match &self.spec {
            StructureSpec::Flat => NCBStructure::flat(n),
            StructureSpec::Standard { phi } => NCBStructure::standard(n, phi)?,
            StructureSpec::Explicit { .. } => return Ok(None),
            StructureSpec::Gauge { gamma, theta, u, a } => NCBStructure::new(
                GalileiStructure::new(gamma.clone(), theta.clone())?,
                u.clone(),
                a.clone(),
            )?,
            StructureSpec::Observer {
                gamma,
                theta,
                u,
                v,
                phi,
            } => NCBStructure::from_observer(
                GalileiStructure::new(gamma.clone(), theta.clone())?,
                u.clone(),
                v.clone(),
                phi.clone(),
            )?,
        }))
    }

    pub fn require_ncb(&self) -> Result<NCBStructure, InputError> {
        self.ncb()?.ok_or_else(|| {
            InputError::new("this command needs gauge data (U, A), observer data (U, V, phi) or a preset")
        })
    }

    /// The Newton-Cartan structure with only the Galilei base checked, so that
    /// connection conditions can be reported instead of rejected.
    pub fn nc_unchecked(&self) -> Result<NCStructure, InputError> {
        match &self.spec {
            StructureSpec::Explicit {
                gamma,
                theta,
                connection,
            } => Ok(NCStructure::new_unchecked(
                GalileiStructure::new(gamma.clone(), theta.clone())?,
                connection.clone(),
            )?),
            _ => self.nc(),
        }
    }

    /// The Newton-Cartan structure; every invariant is checked.
    pub fn nc(&self) -> Result<NCStructure, InputError> {
        match &self.spec {
            StructureSpec::Flat => Ok(NCStructure::flat(self.n)),
            StructureSpec::Explicit {
                gamma,
                theta,
                connection,
            } => Ok(NCStructure::new(
                GalileiStructure::new(gamma.clone(), theta.clone())?,
                connection.clone(),
            )?),
            _ => Ok(self.require_ncb()?.nc_structure()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let d = parse_structure("flat n=2").unwrap();
        assert_eq!((d.n, d.spec.kind()), (2, "flat"));
        assert!(d.nc().unwrap().connection().is_zero());
        let d = parse_structure("standard n=3 phi = x1^2").unwrap();
        let nc = d.nc().unwrap();
        assert_eq!(
            nc.connection().get(0, 0, 1),
            &Poly::var(4, 1).scale(&ncw_core::Rational::from_integer(2.into()))
        );
        let d2 = parse_structure("n = 3\nstandard(phi = x1^2)").unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn missing_theta_is_named() {
        let e = parse_structure("n = 1\ngamma[1][1] = 1").unwrap_err();
        assert!(e.to_string().contains("theta missing"), "{e}");
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_structure("n = 2\ngamma[1][1] = 1 +\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2, column 18"), "{e}");
        let e = parse_structure("n = 2\ntheta[3] = 1").unwrap_err();
        assert!(e.to_string().starts_with("line 2, column 7"), "{e}");
        let e = parse_structure("n = 1\nfoo = 2").unwrap_err();
        assert!(e.to_string().contains("unknown statement"), "{e}");
        let e = parse_structure("flat n=2\ntheta[0] = 1").unwrap_err();
        assert!(e.to_string().contains("exactly one"), "{e}");
    }

    #[test]
    fn symmetric_mirroring() {
        let text = "n = 2\ngamma[1][1] = 1\ngamma[2][2] = 1\ngamma[1][2] = x1\ntheta[0] = 1\nGamma = 0";
        let d = parse_structure(text).unwrap();
        let StructureSpec::Explicit { gamma, .. } = &d.spec else {
            panic!()
        };
        assert_eq!(gamma.get(&[2, 1]), &Poly::var(3, 1));
        let bad = "n = 1\ngamma[0][1] = 1\ngamma[1][0] = 2\ntheta[0] = 1\nGamma = 0";
        assert!(parse_structure(bad).unwrap_err().to_string().contains("symmetric"));
    }

    #[test]
    fn explicit_structure_validates() {
        let text = "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nGamma[0][0][1] = 2*x1";
        let d = parse_structure(text).unwrap();
        assert!(d.nc().is_ok());
        let bad = "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nGamma[0][0][0] = 1";
        let e = parse_structure(bad).unwrap().nc().unwrap_err();
        assert!(e.to_string().contains("nabla theta"), "{e}");
    }

    #[test]
    fn round_trips() {
        let texts = [
            "name = \"f\"\nflat n=2",
            "standard n=2 phi = x1*x2 - 1/2*t",
            "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nGamma[0][0][1] = 2*x1",
            "n = 2\ngamma[1][1] = 1\ngamma[2][2] = 1\ntheta[0] = 1\nGamma[0][1][2] = t\nGamma[0][2][1] = -t",
            "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nU[0] = 1\nU[1] = t\nA[1] = x1",
            "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nU[0] = 1\nV[0] = 1\nphi = x1^2",
        ];
        for t in texts {
            let d = parse_structure(t).unwrap();
            assert_eq!(parse_structure(&d.to_text()).unwrap(), d, "{t}");
        }
    }

    #[test]
    fn gauge_and_observer_modes() {
        let g = parse_structure("n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nU[0] = 1\nA[0] = -x1^2").unwrap();
        let o = parse_structure("n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nU[0] = 1\nV[0] = 1\nphi = x1^2").unwrap();
        assert_eq!(g.nc().unwrap().connection(), o.nc().unwrap().connection());
        let both = "n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nU[0] = 1\nA[0] = 1\nV[0] = 1";
        assert!(parse_structure(both).is_err());
    }
}
