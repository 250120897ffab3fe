//! Coriolis, Milne and Galilei symmetry algebras of a Newton-Cartan structure.
//!
//! Each algebra is computed as the exact nullspace of one joint linear system
//! over vector fields whose components are polynomials of bounded degree.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseRow};
use crate::nc::NCStructure;
use crate::poly::{monomials_up_to, Monomial, Poly};
use crate::tensor::{lie_derivative, lie_derivative_connection, raise_connection, RaisedSlots, VectorField};
use crate::Rational;

/// Truncation of the polynomial ansatz.
///
/// Components may have degree at most `d` in `t` and at most `max(d, 1)` in
/// the spatial coordinates jointly, so that `d = 0` still admits rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeBound(pub u32);

impl DegreeBound {
    pub fn time(self) -> u32 {
        self.0
    }

    pub fn space(self) -> u32 {
        self.0.max(1)
    }

    /// Monomials in `t, x1..xn` allowed by the bound, in graded-lex order.
    pub fn monomials(self, dim: usize) -> Vec<Monomial> {
        let mut ms: Vec<Monomial> = monomials_up_to(dim, self.time() + self.space())
            .into_iter()
            .filter(|m| m.exponent(0) <= self.time() && m.degree() - m.exponent(0) <= self.space())
            .collect();
        ms.sort();
        ms
    }

    pub fn admits(self, p: &Poly) -> bool {
        p.degree_in(0) <= self.time() && p.degree_in_axes(|a| a != 0) <= self.space()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Coriolis,
    Milne,
    Galilei,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Coriolis, Flavor::Milne, Flavor::Galilei];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Coriolis => "coriolis",
            Flavor::Milne => "milne",
            Flavor::Galilei => "galilei",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Flavor::Coriolis => "cor",
            Flavor::Milne => "mil",
            Flavor::Galilei => "gal",
        }
    }

    pub fn parse(s: &str) -> Option<Flavor> {
        Flavor::ALL.into_iter().find(|f| f.name() == s || f.short() == s)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A solved symmetry algebra, truncated at a degree bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryBasis {
    pub structure: NCStructure,
    pub flavor: Flavor,
    pub degree: DegreeBound,
    pub basis: Vec<VectorField>,
    columns: Vec<(usize, Monomial)>,
}

impl SymmetryBasis {
    /// Builds a basis from explicit fields (not solved); used for sub-algebras and tests.
    pub fn from_fields(structure: NCStructure, flavor: Flavor, degree: DegreeBound, basis: Vec<VectorField>) -> Self {
        let columns = unit_columns(structure.dim(), degree);
        SymmetryBasis {
            structure,
            flavor,
            degree,
            basis,
            columns,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Coordinates of `x` in the basis, or `None` if `x` is outside the span.
    pub fn coordinates(&self, x: &VectorField) -> Result<Option<Vec<Rational>>> {
        let nvars = self.structure.nvars();
        let ncols = self.basis.len();
        let mut rows: BTreeMap<(usize, Monomial), SparseRow> = BTreeMap::new();
        for (j, b) in self.basis.iter().enumerate() {
            for (a, p) in b.components().iter().enumerate() {
                for (m, c) in p.terms() {
                    rows.entry((a, m.clone())).or_default().insert(j, c.clone());
                }
            }
        }
        if x.dim() != self.structure.dim() || x.nvars() != nvars {
            return Err(Error::DimensionMismatch {
                expected: self.structure.dim(),
                found: x.dim(),
            });
        }
        for (a, p) in x.components().iter().enumerate() {
            for (m, c) in p.terms() {
                rows.entry((a, m.clone())).or_default().insert(ncols, c.clone());
            }
        }
        let mut e = Echelon::new(ncols + 1);
        for (_, row) in rows {
            e.push(row);
        }
        Ok(crate::linalg::solve_augmented(&mut e, ncols).map(|(sol, _)| sol))
    }
}

fn unit_columns(dim: usize, degree: DegreeBound) -> Vec<(usize, Monomial)> {
    let ms = degree.monomials(dim);
    (0..dim).flat_map(|a| ms.iter().map(move |m| (a, m.clone()))).collect()
}

fn unit_field(dim: usize, nvars: usize, a: usize, m: &Monomial) -> Result<VectorField> {
    let mut comps = vec![Poly::zero(nvars); dim];
    comps[a] = Poly::term(m.clone(), Rational::one()).with_nvars(nvars)?;
    VectorField::new(comps)
}

/// Every polynomial component of the defining conditions of `flavor`, in a fixed order.
fn condition_components(s: &NCStructure, flavor: Flavor, x: &VectorField) -> Result<Vec<Poly>> {
    let mut out = Vec::new();
    out.extend(lie_derivative(x, s.gamma())?.into_components());
    out.extend(lie_derivative(x, s.theta())?.into_components());
    match flavor {
        Flavor::Coriolis => {}
        Flavor::Milne => {
            let l = lie_derivative_connection(x, s.connection())?;
            let r = raise_connection(&l, s.gamma(), RaisedSlots::One)?;
            let d = s.dim();
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        out.push(r.get(a, b, c).clone());
                    }
                }
            }
        }
        Flavor::Galilei => {
            out.extend(
                lie_derivative_connection(x, s.connection())?
                    .components()
                    .iter()
                    .cloned(),
            );
        }
    }
    Ok(out)
}

/// Solves the defining equations of `flavor` over fields admitted by `d`.
///
/// The returned basis is the reduced echelon basis of the solution space with
/// columns ordered by component, then graded-lex monomial.
pub fn solve_symmetries(s: &NCStructure, flavor: Flavor, d: DegreeBound) -> Result<SymmetryBasis> {
    let dim = s.dim();
    let nvars = s.nvars();
    let columns = unit_columns(dim, d);
    let mut rows: BTreeMap<(usize, Monomial), SparseRow> = BTreeMap::new();
    for (j, (a, m)) in columns.iter().enumerate() {
        let x = unit_field(dim, nvars, *a, m)?;
        for (eq, p) in condition_components(s, flavor, &x)?.iter().enumerate() {
            for (mono, c) in p.terms() {
                rows.entry((eq, mono.clone())).or_default().insert(j, c.clone());
            }
        }
    }
    let mut e = Echelon::new(columns.len());
    for (_, row) in rows {
        e.push(row);
    }
    let basis = e
        .kernel()
        .into_iter()
        .map(|v| {
            let mut comps = vec![Poly::zero(nvars); dim];
            for (j, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let (a, m) = &columns[j];
                comps[*a] += &Poly::term(m.clone(), c.clone()).with_nvars(nvars)?;
            }
            VectorField::new(comps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetryBasis {
        structure: s.clone(),
        flavor,
        degree: d,
        basis,
        columns,
    })
}

fn first_nonzero_condition(s: &NCStructure, x: &VectorField) -> Result<Option<String>> {
    let g = lie_derivative(x, s.gamma())?;
    if let Some(idx) = g.first_nonzero() {
        return Ok(Some(format!("L_X gamma^{{{}{}}} = {}", idx[0], idx[1], g.get(&idx))));
    }
    let th = lie_derivative(x, s.theta())?;
    if let Some(idx) = th.first_nonzero() {
        return Ok(Some(format!("L_X theta_{} = {}", idx[0], th.get(&idx))));
    }
    Ok(None)
}

pub fn is_coriolis(x: &VectorField, s: &NCStructure) -> Result<bool> {
    Ok(first_nonzero_condition(s, x)?.is_none())
}

/// `γ^{ak}γ^{bl}(L_XΓ)_kl^c = 0` for a Coriolis field `X`.
pub fn verify_coriolis_identity(x: &VectorField, s: &NCStructure) -> Result<bool> {
    if let Some(w) = first_nonzero_condition(s, x)? {
        return Err(Error::violated("Coriolis condition", w));
    }
    let l = lie_derivative_connection(x, s.connection())?;
    Ok(raise_connection(&l, s.gamma(), RaisedSlots::Two)?.is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub is_coriolis: bool,
    pub is_milne: bool,
    pub is_galilei: bool,
}

pub fn classify(x: &VectorField, s: &NCStructure) -> Result<Classification> {
    let is_coriolis = is_coriolis(x, s)?;
    let (mut is_milne, mut is_galilei) = (false, false);
    if is_coriolis {
        let l = lie_derivative_connection(x, s.connection())?;
        is_galilei = l.is_zero();
        is_milne = is_galilei || raise_connection(&l, s.gamma(), RaisedSlots::One)?.is_zero();
    }
    Ok(Classification {
        is_coriolis,
        is_milne,
        is_galilei,
    })
}

/// `[X_i, X_j] = Σ_k c[i][j][k] X_k`, where it exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    pub constants: Vec<Vec<Vec<Rational>>>,
    /// Every bracket lies in the span of the basis.
    pub closed: bool,
    /// Pairs `i < j` whose bracket leaves the span; their constants are zero.
    pub leaking: Vec<(usize, usize)>,
}

impl StructureConstants {
    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.constants[i][j][k]
    }
}

pub fn structure_constants(b: &SymmetryBasis) -> Result<StructureConstants> {
    let n = b.len();
    let mut constants = vec![vec![vec![Rational::zero(); n]; n]; n];
    let mut leaking = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let br = b.basis[i].bracket(&b.basis[j])?;
            match b.coordinates(&br)? {
                Some(coords) => {
                    for (k, c) in coords.into_iter().enumerate() {
                        constants[j][i][k] = -c.clone();
                        constants[i][j][k] = c;
                    }
                }
                None => leaking.push((i, j)),
            }
        }
    }
    Ok(StructureConstants {
        constants,
        closed: leaking.is_empty(),
        leaking,
    })
}

/// `X^A = ω(t)^A_B x^B + ϱ(t)^A`, `X^0 = τ`: the shape of every Coriolis field
/// of the standard Galilei structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameParams {
    /// `ω^A_B`, antisymmetric, polynomials in `t`.
    pub omega: Vec<Vec<Poly>>,
    pub rho: Vec<Poly>,
    pub tau: Rational,
}

impl FrameParams {
    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn omega_constant(&self) -> bool {
        self.omega.iter().flatten().all(Poly::is_constant)
    }

    /// `ϱ(t) = β t + σ`.
    pub fn rho_affine(&self) -> bool {
        self.rho.iter().all(|p| p.degree().is_none_or(|d| d <= 1))
    }

    /// The Galilei template `ω x + β t + σ`, `τ`.
    pub fn is_galilei_shape(&self) -> bool {
        self.omega_constant() && self.rho_affine()
    }

    pub fn to_field(&self, nvars: usize) -> Result<VectorField> {
        let n = self.n();
        let mut comps = vec![Poly::constant(nvars, self.tau.clone())];
        for a in 0..n {
            let mut p = self.rho[a].with_nvars(nvars)?;
            for b in 0..n {
                p += &(&self.omega[a][b].with_nvars(nvars)? * &Poly::var(nvars, b + 1));
            }
            comps.push(p);
        }
        VectorField::new(comps)
    }
}

/// Fits `X` to the rotating-frame template; `None` if it does not have that shape.
pub fn fit_frame(x: &VectorField) -> Option<FrameParams> {
    let dim = x.dim();
    let nvars = x.nvars();
    let n = dim - 1;
    let x0 = x.component(0);
    if !x0.is_constant() {
        return None;
    }
    let time_only = |p: &Poly| p.depends_only_on(|a| a == 0);
    let mut omega = vec![vec![Poly::zero(nvars); n]; n];
    let mut rho = Vec::with_capacity(n);
    for a in 0..n {
        let comp = x.component(a + 1);
        let mut rest = comp.clone();
        for b in 0..n {
            let coeff = comp.d(b + 1);
            if !time_only(&coeff) {
                return None;
            }
            rest -= &(&coeff * &Poly::var(nvars, b + 1));
            omega[a][b] = coeff;
        }
        if !time_only(&rest) {
            return None;
        }
        rho.push(rest);
    }
    for a in 0..n {
        for b in 0..n {
            if !(&omega[a][b] + &omega[b][a]).is_zero() {
                return None;
            }
        }
    }
    Some(FrameParams {
        omega,
        rho,
        tau: x0.constant_term(),
    })
}
