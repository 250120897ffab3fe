//! Stabilizers of NCB data inside the Newtonian gauge algebra: the extended
//! Coriolis, Milne and Galilei algebras, and the Bargmann algebra.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    inconsistency_certificate, solve_augmented, solve_inhomogeneous, Echelon, RationalMatrix, SparseRow,
};
use crate::nc::{GalileiStructure, NCBStructure};
use crate::poly::{monomials_up_to, Monomial, Poly};
use crate::symmetry::{
    classify, fit_frame, solve_symmetries, structure_constants, DegreeBound, Flavor, FrameParams, SymmetryBasis,
};
use crate::tensor::{lie_derivative, lower, pair, TensorField, VectorField};
use crate::Rational;

/// `(X, f)`: `f` is a function on spacetime for the extended Coriolis algebra,
/// and the parameter `ξ` (time-only, resp. constant) for Milne and Galilei.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedElement {
    pub x: VectorField,
    pub f: Poly,
}

impl ExtendedElement {
    pub fn new(x: VectorField, f: Poly) -> Result<Self> {
        if f.nvars() != x.nvars() {
            return Err(Error::DimensionMismatch {
                expected: x.nvars(),
                found: f.nvars(),
            });
        }
        Ok(ExtendedElement { x, f })
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.f.is_zero()
    }

    pub fn checked_add(&self, other: &ExtendedElement) -> Result<ExtendedElement> {
        ExtendedElement::new(self.x.checked_add(&other.x)?, self.f.checked_add(&other.f)?)
    }

    pub fn scale(&self, c: &Rational) -> ExtendedElement {
        ExtendedElement {
            x: self.x.scale(c),
            f: self.f.scale(c),
        }
    }
}

fn time_only(p: &Poly) -> bool {
    p.depends_only_on(|a| a == 0)
}

fn expect_flavor(x: &VectorField, s: &NCBStructure, flavor: Flavor) -> Result<()> {
    let c = classify(x, &s.nc_structure()?)?;
    let ok = match flavor {
        Flavor::Coriolis => c.is_coriolis,
        Flavor::Milne => c.is_milne,
        Flavor::Galilei => c.is_galilei,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::violated(format!("{flavor} condition"), "input vector field"))
    }
}

/// `ψ = Uγ([U, X])`: the boost fixed by `δU = 0`.
pub fn boost_for_coriolis(x: &VectorField, s: &NCBStructure) -> Result<TensorField> {
    expect_flavor(x, s, Flavor::Coriolis)?;
    lower(s.transverse(), &s.u().bracket(x)?)
}

/// `[(X,f),(X',f')] = ([X,X'], X(f') − X'(f))`.
pub fn extended_cor_bracket(s: &NCBStructure, e1: &ExtendedElement, e2: &ExtendedElement) -> Result<ExtendedElement> {
    expect_flavor(&e1.x, s, Flavor::Coriolis)?;
    expect_flavor(&e2.x, s, Flavor::Coriolis)?;
    ExtendedElement::new(e1.x.bracket(&e2.x)?, &e1.x.apply(&e2.f) - &e2.x.apply(&e1.f))
}

/// Solves `L(f) = rhs` over polynomials `f` spanned by `monomials`; the solution
/// with free coefficients set to zero, or `None`.
fn solve_for_poly(
    nvars: usize,
    monomials: &[Monomial],
    op: impl Fn(&Poly) -> Result<Vec<Poly>>,
    rhs: &[Poly],
) -> Result<Option<Poly>> {
    let n = monomials.len();
    let mut rows: BTreeMap<(usize, Monomial), SparseRow> = BTreeMap::new();
    for (j, m) in monomials.iter().enumerate() {
        let images = op(&Poly::term(m.clone(), Rational::one()).with_nvars(nvars)?)?;
        for (eq, p) in images.iter().enumerate() {
            for (mono, c) in p.terms() {
                rows.entry((eq, mono.clone())).or_default().insert(j, c.clone());
            }
        }
    }
    for (eq, p) in rhs.iter().enumerate() {
        for (mono, c) in p.terms() {
            rows.entry((eq, mono.clone())).or_default().insert(n, c.clone());
        }
    }
    let mut e = Echelon::new(n + 1);
    for (_, row) in rows {
        e.push(row);
    }
    let Some((sol, _)) = solve_augmented(&mut e, n) else {
        return Ok(None);
    };
    let mut f = Poly::zero(nvars);
    for (m, c) in monomials.iter().zip(sol) {
        if !c.is_zero() {
            f += &Poly::term(m.clone(), c).with_nvars(nvars)?;
        }
    }
    Ok(Some(f))
}

/// `f_X` with `γ(df_X) = [V, X]` and `f_X(t, 0) = 0`; the flag is false when no
/// polynomial solution exists, i.e. `X` is outside the extended Milne stabilizer.
pub fn milne_f_split(x: &VectorField, s: &NCBStructure) -> Result<(Poly, bool)> {
    expect_flavor(x, s, Flavor::Milne)?;
    let dim = s.dim();
    let nvars = s.nvars();
    let rhs = s.v().bracket(x)?;
    if rhs.is_zero() {
        return Ok((Poly::zero(nvars), true));
    }
    let deg = rhs.components().iter().filter_map(Poly::degree).max().unwrap_or(0) + 1;
    let deg = deg
        + s.gamma()
            .components()
            .iter()
            .filter_map(Poly::degree)
            .max()
            .unwrap_or(0);
    let unknowns: Vec<Monomial> = monomials_up_to(dim, deg)
        .into_iter()
        .filter(|m| m.degree() > m.exponent(0))
        .collect();
    let gamma = s.gamma().clone();
    let op = |f: &Poly| -> Result<Vec<Poly>> {
        let df = TensorField::differential(dim, f);
        Ok(crate::tensor::raise(&gamma, &df)?.components().to_vec())
    };
    match solve_for_poly(nvars, &unknowns, op, rhs.components())? {
        Some(f) => Ok((f, true)),
        None => Ok((Poly::zero(nvars), false)),
    }
}

fn is_standard_base(g: &GalileiStructure) -> bool {
    let std = GalileiStructure::standard(g.n());
    g.nvars() == std.nvars() && g.gamma() == std.gamma() && g.theta() == std.theta()
}

/// `[(X,ξ),(X',ξ')] = ([X,X'], X(ξ'+f_X') − X'(ξ+f_X) − f_[X,X'])` with the
/// Milne split of `f`. On the standard Galilei structure the result is checked
/// to depend on `t` only.
pub fn extended_mil_bracket(s: &NCBStructure, e1: &ExtendedElement, e2: &ExtendedElement) -> Result<ExtendedElement> {
    extended_bracket_with(
        s,
        e1,
        e2,
        |x| split_or_fail(milne_f_split(x, s)?, "gamma(df) = [V, X]"),
        time_only,
    )
}

/// The same bracket with `f_X` solved from the Galilei stabilizer (`δφ = 0` included).
pub fn extended_gal_bracket(s: &NCBStructure, e1: &ExtendedElement, e2: &ExtendedElement) -> Result<ExtendedElement> {
    extended_bracket_with(
        s,
        e1,
        e2,
        |x| split_or_fail(galilei_f_solve(x, s)?, "df closed"),
        Poly::is_constant,
    )
}

fn split_or_fail((f, ok): (Poly, bool), label: &str) -> Result<Poly> {
    if ok {
        Ok(f)
    } else {
        Err(Error::invariant(label, "no polynomial solution"))
    }
}

fn extended_bracket_with(
    s: &NCBStructure,
    e1: &ExtendedElement,
    e2: &ExtendedElement,
    f_of: impl Fn(&VectorField) -> Result<Poly>,
    xi_ok: impl Fn(&Poly) -> bool,
) -> Result<ExtendedElement> {
    for e in [e1, e2] {
        if !xi_ok(&e.f) {
            return Err(Error::invariant(
                "xi parameter",
                format!("xi = {} is not admissible", e.f),
            ));
        }
    }
    let (f1, f2) = (f_of(&e1.x)?, f_of(&e2.x)?);
    let x = e1.x.bracket(&e2.x)?;
    let f12 = f_of(&x)?;
    let xi = &(&e1.x.apply(&(&e2.f + &f2)) - &e2.x.apply(&(&e1.f + &f1))) - &f12;
    if is_standard_base(s.base()) && !time_only(&xi) {
        return Err(Error::invariant("bracket xi depends on t only", format!("xi'' = {xi}")));
    }
    ExtendedElement::new(x, xi)
}

/// `f` with `df = (−X(φ) + Uγ(L_XV, V))θ − Uγ(L_XV)`, normalized by `f(0) = 0`;
/// the flag is false when the right side is not closed.
pub fn galilei_f_solve(x: &VectorField, s: &NCBStructure) -> Result<(Poly, bool)> {
    expect_flavor(x, s, Flavor::Galilei)?;
    let lv = VectorField::from_tensor(&lie_derivative(x, &s.v().to_tensor())?)?;
    let ug_lv = lower(s.transverse(), &lv)?;
    let coeff = &pair(&ug_lv, s.v())? - &x.apply(s.phi());
    let w = s.theta().mul_poly(&coeff).checked_sub(&ug_lv)?;
    let dim = s.dim();
    for a in 0..dim {
        for b in a + 1..dim {
            if w.get(&[b]).d(a) != w.get(&[a]).d(b) {
                return Ok((Poly::zero(s.nvars()), false));
            }
        }
    }
    Ok((Poly::integrate_closed(w.components()), true))
}

/// Standard-case parameters `(ω, ϱ(t), τ, ξ(t))` of the extended Milne algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilneStandardElement {
    pub omega: Vec<Vec<Rational>>,
    pub rho: Vec<Poly>,
    pub tau: Rational,
    pub xi: Poly,
}

impl MilneStandardElement {
    pub fn new(omega: Vec<Vec<Rational>>, rho: Vec<Poly>, tau: Rational, xi: Poly) -> Result<Self> {
        let n = rho.len();
        if omega.len() != n || omega.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: omega.len(),
            });
        }
        check_antisymmetric(&omega)?;
        if !rho.iter().chain([&xi]).all(time_only) {
            return Err(Error::invariant(
                "time-only parameters",
                "rho and xi must depend on t only",
            ));
        }
        Ok(MilneStandardElement { omega, rho, tau, xi })
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn to_extended(&self) -> Result<ExtendedElement> {
        let nvars = self.n() + 1;
        let params = FrameParams {
            omega: self
                .omega
                .iter()
                .map(|r| r.iter().map(|c| Poly::constant(nvars, c.clone())).collect())
                .collect(),
            rho: self.rho.iter().map(|p| p.with_nvars(nvars)).collect::<Result<_>>()?,
            tau: self.tau.clone(),
        };
        ExtendedElement::new(params.to_field(nvars)?, self.xi.with_nvars(nvars)?)
    }

    pub fn from_extended(e: &ExtendedElement) -> Option<Self> {
        let p = fit_frame(&e.x)?;
        if !p.omega_constant() || !time_only(&e.f) {
            return None;
        }
        Some(MilneStandardElement {
            omega: p
                .omega
                .iter()
                .map(|r| r.iter().map(Poly::constant_term).collect())
                .collect(),
            rho: p.rho,
            tau: p.tau,
            xi: e.f.clone(),
        })
    }
}

fn check_antisymmetric(m: &[Vec<Rational>]) -> Result<()> {
    for (a, row) in m.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if !(v + &m[b][a]).is_zero() {
                return Err(Error::invariant("omega + omega^T = 0", format!("entry ({a},{b})")));
            }
        }
    }
    Ok(())
}

fn mat_commutator(p: &[Vec<Rational>], q: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    // p q − q p
    let n = p.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                out[a][b] += &p[a][k] * &q[k][b] - &q[a][k] * &p[k][b];
            }
        }
    }
    out
}

fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn dot(u: &[Rational], v: &[Rational]) -> Rational {
    u.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

fn mat_poly_vec(m: &[Vec<Rational>], v: &[Poly]) -> Vec<Poly> {
    m.iter()
        .map(|row| {
            let mut acc = Poly::zero(v[0].nvars());
            for (c, p) in row.iter().zip(v) {
                acc += &p.scale(c);
            }
            acc
        })
        .collect()
}

/// The standard-case table of the extended Milne bracket, term by term.
pub fn milne_standard_bracket(a: &MilneStandardElement, b: &MilneStandardElement) -> MilneStandardElement {
    let dt = |p: &Poly| p.d(0);
    let (w, w2) = (&a.omega, &b.omega);
    let omega = mat_commutator(w2, w);
    let wr2 = mat_poly_vec(w, &b.rho);
    let w2r = mat_poly_vec(w2, &a.rho);
    let rho = (0..a.n())
        .map(|i| &(&(&w2r[i] - &wr2[i]) + &dt(&b.rho[i]).scale(&a.tau)) - &dt(&a.rho[i]).scale(&b.tau))
        .collect();
    let mut xi = &dt(&b.xi).scale(&a.tau) - &dt(&a.xi).scale(&b.tau);
    for i in 0..a.n() {
        xi += &(&a.rho[i] * &dt(&b.rho[i]));
        xi -= &(&b.rho[i] * &dt(&a.rho[i]));
    }
    MilneStandardElement {
        omega,
        rho,
        tau: Rational::zero(),
        xi,
    }
}

/// `(ω, β, σ, τ, ξ)` of the Bargmann algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BargmannElement {
    pub omega: Vec<Vec<Rational>>,
    pub beta: Vec<Rational>,
    pub sigma: Vec<Rational>,
    pub tau: Rational,
    pub xi: Rational,
}

impl BargmannElement {
    pub fn zero(n: usize) -> Self {
        BargmannElement {
            omega: vec![vec![Rational::zero(); n]; n],
            beta: vec![Rational::zero(); n],
            sigma: vec![Rational::zero(); n],
            tau: Rational::zero(),
            xi: Rational::zero(),
        }
    }

    pub fn new(
        omega: Vec<Vec<Rational>>,
        beta: Vec<Rational>,
        sigma: Vec<Rational>,
        tau: Rational,
        xi: Rational,
    ) -> Result<Self> {
        let n = beta.len();
        if sigma.len() != n || omega.len() != n || omega.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sigma.len(),
            });
        }
        check_antisymmetric(&omega)?;
        Ok(BargmannElement {
            omega,
            beta,
            sigma,
            tau,
            xi,
        })
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn is_zero(&self) -> bool {
        self.omega
            .iter()
            .flatten()
            .chain(&self.beta)
            .chain(&self.sigma)
            .all(Zero::is_zero)
            && self.tau.is_zero()
            && self.xi.is_zero()
    }

    pub fn checked_add(&self, other: &BargmannElement) -> Result<BargmannElement> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        let add = |u: &[Rational], v: &[Rational]| u.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>();
        Ok(BargmannElement {
            omega: self.omega.iter().zip(&other.omega).map(|(u, v)| add(u, v)).collect(),
            beta: add(&self.beta, &other.beta),
            sigma: add(&self.sigma, &other.sigma),
            tau: &self.tau + &other.tau,
            xi: &self.xi + &other.xi,
        })
    }

    /// Rotations `J_AB` (`A < B`), boosts `K_A`, translations `P_A`, `H`, `M`.
    pub fn generators(n: usize) -> Vec<(String, BargmannElement)> {
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let mut g = BargmannElement::zero(n);
                g.omega[a][b] = Rational::one();
                g.omega[b][a] = -Rational::one();
                out.push((format!("J{}{}", a + 1, b + 1), g));
            }
        }
        for a in 0..n {
            let mut g = BargmannElement::zero(n);
            g.beta[a] = Rational::one();
            out.push((format!("K{}", a + 1), g));
        }
        for a in 0..n {
            let mut g = BargmannElement::zero(n);
            g.sigma[a] = Rational::one();
            out.push((format!("P{}", a + 1), g));
        }
        let mut h = BargmannElement::zero(n);
        h.tau = Rational::one();
        out.push(("H".into(), h));
        let mut m = BargmannElement::zero(n);
        m.xi = Rational::one();
        out.push(("M".into(), m));
        out
    }

    /// `X^A = ω^A_B x^B + β^A t + σ^A`, `X^0 = τ`, paired with the central `ξ`.
    pub fn to_extended(&self) -> Result<ExtendedElement> {
        let nvars = self.n() + 1;
        let params = FrameParams {
            omega: self
                .omega
                .iter()
                .map(|r| r.iter().map(|c| Poly::constant(nvars, c.clone())).collect())
                .collect(),
            rho: (0..self.n())
                .map(|a| &Poly::var(nvars, 0).scale(&self.beta[a]) + &Poly::constant(nvars, self.sigma[a].clone()))
                .collect(),
            tau: self.tau.clone(),
        };
        ExtendedElement::new(params.to_field(nvars)?, Poly::constant(nvars, self.xi.clone()))
    }

    pub fn from_extended(e: &ExtendedElement) -> Option<Self> {
        let p = fit_frame(&e.x)?;
        if !p.is_galilei_shape() || !e.f.is_constant() {
            return None;
        }
        let at = |r: &Poly, k: u32| {
            let mut exps = vec![0; r.nvars()];
            exps[0] = k;
            r.coefficient(&Monomial::from_exponents(exps))
        };
        Some(BargmannElement {
            omega: p
                .omega
                .iter()
                .map(|r| r.iter().map(Poly::constant_term).collect())
                .collect(),
            beta: p.rho.iter().map(|r| at(r, 1)).collect(),
            sigma: p.rho.iter().map(|r| at(r, 0)).collect(),
            tau: p.tau,
            xi: e.f.constant_term(),
        })
    }
}

/// The Bargmann bracket, component formulas.
pub fn bargmann_bracket(b1: &BargmannElement, b2: &BargmannElement) -> BargmannElement {
    let omega = mat_commutator(&b2.omega, &b1.omega);
    let sub = |u: Vec<Rational>, v: Vec<Rational>| u.into_iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>();
    let beta = sub(mat_vec(&b2.omega, &b1.beta), mat_vec(&b1.omega, &b2.beta));
    let mut sigma = sub(mat_vec(&b2.omega, &b1.sigma), mat_vec(&b1.omega, &b2.sigma));
    for a in 0..b1.n() {
        sigma[a] += &b2.beta[a] * &b1.tau - &b1.beta[a] * &b2.tau;
    }
    BargmannElement {
        omega,
        beta,
        sigma,
        tau: Rational::zero(),
        xi: dot(&b1.sigma, &b2.beta) - dot(&b2.sigma, &b1.beta),
    }
}

/// `c(X_i, X_j) = σ_i·β_j − σ_j·β_i` on a basis of Galilei-template fields.
pub fn mass_cocycle(basis: &SymmetryBasis) -> Result<Vec<Vec<Rational>>> {
    let params = basis
        .basis
        .iter()
        .map(|x| {
            let e = ExtendedElement::new(x.clone(), Poly::zero(x.nvars()))?;
            BargmannElement::from_extended(&e)
                .ok_or_else(|| Error::invariant("Galilei template", "basis element is not of the form w x + b t + s"))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = params.len();
    let mut c = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = dot(&params[i].sigma, &params[j].beta) - dot(&params[j].sigma, &params[i].beta);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CocycleVerdict {
    /// `c(X_i, X_j) = λ([X_i, X_j])` with this `λ` (in the dual basis).
    Trivial { witness: Vec<Rational> },
    /// Weights `y_ij` (pairs `i < j`) with `Σ y_ij C_ij^k = 0` for all `k` but
    /// `Σ y_ij c_ij ≠ 0`.
    Nontrivial {
        certificate: Vec<((usize, usize), Rational)>,
    },
}

impl CocycleVerdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, CocycleVerdict::Trivial { .. })
    }
}

/// Decides whether `cocycle` is a coboundary on the (closed) basis.
pub fn cocycle_triviality(basis: &SymmetryBasis, cocycle: &[Vec<Rational>]) -> Result<CocycleVerdict> {
    let n = basis.len();
    if cocycle.len() != n || cocycle.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cocycle.len(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            if !(&cocycle[i][j] + &cocycle[j][i]).is_zero() {
                return Err(Error::invariant(
                    "cocycle antisymmetry",
                    format!("c({i},{j}) + c({j},{i}) != 0"),
                ));
            }
        }
    }
    let sc = structure_constants(basis)?;
    if !sc.closed {
        return Err(Error::Precondition("basis is not closed under the bracket".into()));
    }
    // c([X_i,X_j],X_k) + c([X_j,X_k],X_i) + c([X_k,X_i],X_j) = 0
    let c_of =
        |i: usize, j: usize, k: usize| (0..n).fold(Rational::zero(), |acc, p| acc + sc.get(i, j, p) * &cocycle[p][k]);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if !(c_of(i, j, k) + c_of(j, k, i) + c_of(k, i, j)).is_zero() {
                    return Err(Error::violated("2-cocycle identity", format!("({i},{j},{k})")));
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let rows = pairs
        .iter()
        .map(|&(i, j)| (0..n).map(|k| sc.get(i, j, k).clone()).collect())
        .collect();
    let m = RationalMatrix::from_rows(n, rows)?;
    let b: Vec<Rational> = pairs.iter().map(|&(i, j)| cocycle[i][j].clone()).collect();
    if let Some((witness, _)) = solve_inhomogeneous(&m, &b)? {
        return Ok(CocycleVerdict::Trivial { witness });
    }
    let y =
        inconsistency_certificate(&m, &b)?.ok_or_else(|| Error::invariant("certificate", "system is consistent"))?;
    Ok(CocycleVerdict::Nontrivial {
        certificate: pairs.into_iter().zip(y).filter(|(_, v)| !v.is_zero()).collect(),
    })
}

/// A pair `(X, ξ)` whose bracket `[(X,0),(0,ξ)] = (0, X(ξ))` is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoncentralWitness {
    pub x: VectorField,
    pub xi: Poly,
    pub bracket: Poly,
}

/// Searches the degree-`d` Milne (or Galilei) algebra for an element acting
/// nontrivially on the ideal: time-only `ξ` of degree `≤ d` for Milne,
/// constants for Galilei.
pub fn noncentral_witness(s: &NCBStructure, flavor: Flavor, d: DegreeBound) -> Result<Option<NoncentralWitness>> {
    let nc = s.nc_structure()?;
    let basis = solve_symmetries(&nc, flavor, d)?;
    let nvars = s.nvars();
    let max_k = if flavor == Flavor::Galilei { 0 } else { d.time() };
    let bracket_of = |x: &VectorField, xi: &Poly| -> Result<Poly> {
        let zero = ExtendedElement::new(VectorField::zero(s.dim(), nvars), xi.clone())?;
        let e = ExtendedElement::new(x.clone(), Poly::zero(nvars))?;
        let out = match flavor {
            Flavor::Galilei => extended_gal_bracket(s, &e, &zero)?,
            _ => extended_mil_bracket(s, &e, &zero)?,
        };
        Ok(out.f)
    };
    for x in &basis.basis {
        for k in 0..=max_k {
            let xi = Poly::var(nvars, 0).pow(k);
            let br = bracket_of(x, &xi)?;
            if !br.is_zero() {
                return Ok(Some(NoncentralWitness {
                    x: x.clone(),
                    xi,
                    bracket: br,
                }));
            }
        }
    }
    Ok(None)
}

/// True iff the extended Milne algebra acts nontrivially on its ideal `C^∞(T)`.
pub fn noncentrality_check(s: &NCBStructure, d: DegreeBound) -> Result<bool> {
    Ok(noncentral_witness(s, Flavor::Milne, d)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{infinitesimal_gauge, GaugeElement};
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn x(dim: usize, i: usize) -> Poly {
        Poly::var(dim, i)
    }

    fn field(comps: Vec<Poly>) -> VectorField {
        VectorField::new(comps).unwrap()
    }

    fn ext(x: VectorField, f: Poly) -> ExtendedElement {
        ExtendedElement::new(x, f).unwrap()
    }

    #[test]
    fn boost_examples() {
        let s = NCBStructure::flat(2);
        let psi = boost_for_coriolis(&VectorField::coordinate(3, 3, 1), &s).unwrap();
        assert!(psi.is_zero());
        let boost = field(vec![Poly::zero(3), x(3, 0), Poly::zero(3)]);
        let psi = boost_for_coriolis(&boost, &s).unwrap();
        assert_eq!(psi, TensorField::differential(3, &x(3, 1)));
        let e = GaugeElement::new(boost, psi, Poly::zero(3)).unwrap();
        assert!(infinitesimal_gauge(&s, &e).unwrap().u.is_zero());
        // ω(t) = t rotation: [U,X] = ω̇·x∂
        let rot = field(vec![Poly::zero(3), &x(3, 0) * &x(3, 2), -&(&x(3, 0) * &x(3, 1))]);
        let psi = boost_for_coriolis(&rot, &s).unwrap();
        assert_eq!(
            psi,
            TensorField::covector(vec![Poly::zero(3), x(3, 2), -&x(3, 1)]).unwrap()
        );
        let dil = field(vec![Poly::zero(3), x(3, 1), Poly::zero(3)]);
        assert!(boost_for_coriolis(&dil, &s).is_err());
    }

    #[test]
    fn boosts_stabilize_u_on_curved_structures() {
        let s = NCBStructure::standard(2, &(&x(3, 1) * &x(3, 2))).unwrap();
        let cor = solve_symmetries(&s.nc_structure().unwrap(), Flavor::Coriolis, DegreeBound(2)).unwrap();
        for xf in &cor.basis {
            let psi = boost_for_coriolis(xf, &s).unwrap();
            let d = infinitesimal_gauge(&s, &GaugeElement::new(xf.clone(), psi, Poly::zero(3)).unwrap()).unwrap();
            assert!(d.gamma.is_zero() && d.theta.is_zero() && d.u.is_zero());
        }
    }

    #[test]
    fn extended_cor_examples() {
        let s = NCBStructure::flat(1);
        let dt = ext(VectorField::coordinate(2, 2, 0), Poly::zero(2));
        let g = ext(VectorField::zero(2, 2), &x(2, 0) * &x(2, 1));
        assert_eq!(
            extended_cor_bracket(&s, &dt, &g).unwrap(),
            ext(VectorField::zero(2, 2), x(2, 1))
        );
        assert!(extended_cor_bracket(&s, &g, &g).unwrap().is_zero());
        let g2 = ext(VectorField::zero(2, 2), x(2, 1).pow(3));
        assert!(extended_cor_bracket(&s, &g, &g2).unwrap().is_zero());
    }

    #[test]
    fn milne_split_examples() {
        let s = NCBStructure::flat(1);
        let (f, ok) = milne_f_split(&VectorField::coordinate(2, 2, 1), &s).unwrap();
        assert!(ok && f.is_zero());
        let acc = field(vec![Poly::zero(2), x(2, 0).pow(2)]);
        let (f, ok) = milne_f_split(&acc, &s).unwrap();
        assert!(ok);
        assert_eq!(f, &x(2, 0) * &x(2, 1).scale(&q(2)));
        let s2 = NCBStructure::flat(2);
        let rot = field(vec![Poly::zero(3), x(3, 2), -&x(3, 1)]);
        let (f, ok) = milne_f_split(&rot, &s2).unwrap();
        assert!(ok && f.is_zero());
        assert!(milne_f_split(&field(vec![Poly::zero(2), x(2, 1)]), &s).is_err());
    }

    #[test]
    fn milne_split_satisfies_its_equation() {
        for s in [
            NCBStructure::flat(2),
            NCBStructure::standard(2, &x(3, 1).pow(2)).unwrap(),
        ] {
            let mil = solve_symmetries(&s.nc_structure().unwrap(), Flavor::Milne, DegreeBound(3)).unwrap();
            for xf in &mil.basis {
                let (f, ok) = milne_f_split(xf, &s).unwrap();
                assert!(ok);
                let lhs = crate::tensor::raise(s.gamma(), &TensorField::differential(3, &f)).unwrap();
                assert_eq!(lhs, s.v().bracket(xf).unwrap());
                assert!(f.eval(&[q(5), q(0), q(0)]).unwrap().is_zero());
                assert!(f.eval(&[q(-2), q(0), q(0)]).unwrap().is_zero());
            }
        }
    }

    fn rot2(c: i64) -> Vec<Vec<Rational>> {
        vec![vec![q(0), q(c)], vec![q(-c), q(0)]]
    }

    fn milne_grid() -> Vec<MilneStandardElement> {
        let t = x(1, 0);
        let mut out = Vec::new();
        for w in [0, 1] {
            for rho in [None, Some((0, 1)), Some((0, 2)), Some((1, 1)), Some((1, 2))] {
                for tau in [0, 1] {
                    for xi in [Poly::one(1), t.clone()] {
                        let mut r = vec![Poly::zero(1), Poly::zero(1)];
                        if let Some((a, k)) = rho {
                            r[a] = t.pow(k);
                        }
                        out.push(MilneStandardElement::new(rot2(w), r, q(tau), xi).unwrap());
                    }
                }
            }
        }
        out
    }

    #[test]
    fn extended_milne_bracket_reproduces_standard_table() {
        let s = NCBStructure::flat(2);
        let grid = milne_grid();
        for a in &grid {
            for b in &grid {
                let got = extended_mil_bracket(&s, &a.to_extended().unwrap(), &b.to_extended().unwrap()).unwrap();
                let expected = milne_standard_bracket(a, b).to_extended().unwrap();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn milne_table_examples() {
        let t = x(1, 0);
        let z = Poly::zero(1);
        let mk = |r: Vec<Poly>| MilneStandardElement::new(rot2(0), r, q(0), Poly::zero(1)).unwrap();
        let a = mk(vec![t.clone(), z.clone()]);
        assert!(milne_standard_bracket(&a, &mk(vec![z.clone(), t.clone()])).xi.is_zero());
        assert_eq!(milne_standard_bracket(&a, &mk(vec![t.pow(2), z.clone()])).xi, t.pow(2));
        let s1 = mk(vec![Poly::one(1), z.clone()]);
        let s2 = mk(vec![z.clone(), Poly::int(1, 3)]);
        assert!(milne_standard_bracket(&s1, &s2).xi.is_zero());
    }

    #[test]
    fn milne_bracket_is_time_only_on_curved_standard() {
        let s = NCBStructure::standard(2, &x(3, 1).pow(2)).unwrap();
        let mil = solve_symmetries(&s.nc_structure().unwrap(), Flavor::Milne, DegreeBound(2)).unwrap();
        for a in &mil.basis {
            for b in &mil.basis {
                let e = extended_mil_bracket(&s, &ext(a.clone(), x(3, 0)), &ext(b.clone(), Poly::zero(3))).unwrap();
                assert!(time_only(&e.f));
            }
        }
    }

    #[test]
    fn galilei_f_examples() {
        let s = NCBStructure::flat(2);
        let boost = field(vec![Poly::zero(3), x(3, 0), Poly::zero(3)]);
        let (f, ok) = galilei_f_solve(&boost, &s).unwrap();
        assert!(ok);
        // oracle: V = ∂_0, φ = 0, L_XV = −∂_1, Uγ(L_XV) = −dx¹
        assert_eq!(f, x(3, 1));
        let (f, ok) = galilei_f_solve(&VectorField::coordinate(3, 3, 1), &s).unwrap();
        assert!(ok && f.is_zero());
        let rot = field(vec![Poly::zero(3), x(3, 2), -&x(3, 1)]);
        let (f, ok) = galilei_f_solve(&rot, &s).unwrap();
        assert!(ok && f.is_zero());
        let acc = field(vec![Poly::zero(3), x(3, 0).pow(2), Poly::zero(3)]);
        assert!(galilei_f_solve(&acc, &s).is_err());
    }

    #[test]
    fn galilei_f_stabilizes_the_structure() {
        let s = NCBStructure::standard(2, &(&x(3, 1).pow(2) + &x(3, 2).pow(2))).unwrap();
        let gal = solve_symmetries(&s.nc_structure().unwrap(), Flavor::Galilei, DegreeBound(2)).unwrap();
        assert!(!gal.is_empty());
        for xf in &gal.basis {
            let (f, ok) = galilei_f_solve(xf, &s).unwrap();
            assert!(ok);
            let psi = boost_for_coriolis(xf, &s).unwrap();
            let d = infinitesimal_gauge(&s, &GaugeElement::new(xf.clone(), psi, f).unwrap()).unwrap();
            assert!(d.is_zero(), "{d:?}");
        }
    }

    #[test]
    fn bargmann_examples() {
        let z = BargmannElement::zero(2);
        let mut a = z.clone();
        a.sigma = vec![q(1), q(0)];
        let mut b = z.clone();
        b.beta = vec![q(1), q(0)];
        let out = bargmann_bracket(&a, &b);
        assert_eq!(out.xi, q(1));
        assert!(BargmannElement { xi: q(0), ..out }.is_zero());
        assert!(bargmann_bracket(&a, &a).is_zero());
        let mut h = z.clone();
        h.tau = q(1);
        let out = bargmann_bracket(&b, &h);
        assert_eq!(out.sigma, vec![q(-1), q(0)]);
        assert!(BargmannElement {
            sigma: vec![q(0), q(0)],
            ..out
        }
        .is_zero());
    }

    #[test]
    fn bargmann_formula_matches_extended_galilei_bracket() {
        for n in 2..=3 {
            let s = NCBStructure::flat(n);
            let gens = BargmannElement::generators(n);
            for (_, a) in &gens {
                for (_, b) in &gens {
                    let got = extended_gal_bracket(&s, &a.to_extended().unwrap(), &b.to_extended().unwrap()).unwrap();
                    assert_eq!(BargmannElement::from_extended(&got).unwrap(), bargmann_bracket(a, b));
                }
            }
        }
    }

    #[test]
    fn mass_cocycle_is_nontrivial() {
        let nc = crate::nc::NCStructure::flat(2);
        let gal = solve_symmetries(&nc, Flavor::Galilei, DegreeBound(1)).unwrap();
        let c = mass_cocycle(&gal).unwrap();
        let verdict = cocycle_triviality(&gal, &c).unwrap();
        let CocycleVerdict::Nontrivial { certificate } = verdict else {
            panic!("mass cocycle reported trivial");
        };
        let sc = structure_constants(&gal).unwrap();
        let mut pairing = Rational::zero();
        for k in 0..gal.len() {
            let col = certificate
                .iter()
                .fold(Rational::zero(), |acc, ((i, j), y)| acc + y * sc.get(*i, *j, k));
            assert!(col.is_zero());
        }
        for ((i, j), y) in &certificate {
            pairing += y * &c[*i][*j];
        }
        assert!(!pairing.is_zero());
        // the same cocycle read off the extended bracket
        let s = NCBStructure::flat(2);
        for i in 0..gal.len() {
            for j in 0..gal.len() {
                let e = |k: usize| ext(gal.basis[k].clone(), Poly::zero(3));
                let br = extended_gal_bracket(&s, &e(i), &e(j)).unwrap();
                assert_eq!(br.f, Poly::constant(3, c[i][j].clone()));
            }
        }
    }

    #[test]
    fn cocycle_triviality_examples() {
        let nc = crate::nc::NCStructure::flat(2);
        let gal = solve_symmetries(&nc, Flavor::Galilei, DegreeBound(1)).unwrap();
        let m = gal.len();
        let zero = vec![vec![q(0); m]; m];
        match cocycle_triviality(&gal, &zero).unwrap() {
            CocycleVerdict::Trivial { witness } => assert!(witness.iter().all(Zero::is_zero)),
            v => panic!("{v:?}"),
        }
        let sc = structure_constants(&gal).unwrap();
        let lambda0: Vec<Rational> = (0..m).map(|k| q(k as i64 * 3 - 7)).collect();
        let c: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).fold(q(0), |acc, k| acc + sc.get(i, j, k) * &lambda0[k]))
                    .collect()
            })
            .collect();
        let CocycleVerdict::Trivial { witness } = cocycle_triviality(&gal, &c).unwrap() else {
            panic!("coboundary reported nontrivial");
        };
        for i in 0..m {
            for j in 0..m {
                let v = (0..m).fold(q(0), |acc, k| acc + sc.get(i, j, k) * &witness[k]);
                assert_eq!(v, c[i][j]);
            }
        }
        let mut bad = zero.clone();
        bad[0][1] = q(1);
        assert!(cocycle_triviality(&gal, &bad).is_err());
    }

    #[test]
    fn milne_extension_is_noncentral_and_galilei_is_central() {
        let s = NCBStructure::flat(2);
        assert!(noncentrality_check(&s, DegreeBound(1)).unwrap());
        let w = noncentral_witness(&s, Flavor::Milne, DegreeBound(1)).unwrap().unwrap();
        assert!(!w.bracket.is_zero());
        let h = ext(VectorField::coordinate(3, 3, 0), Poly::zero(3));
        let xi = ext(VectorField::zero(3, 3), x(3, 0));
        assert_eq!(extended_mil_bracket(&s, &h, &xi).unwrap().f, Poly::one(3));
        let c = ext(VectorField::zero(3, 3), Poly::one(3));
        assert!(extended_mil_bracket(&s, &h, &c).unwrap().f.is_zero());
        assert!(noncentral_witness(&s, Flavor::Galilei, DegreeBound(1))
            .unwrap()
            .is_none());
    }

    fn small_time_poly(c: &[i64]) -> Poly {
        c.iter()
            .enumerate()
            .fold(Poly::zero(1), |acc, (k, &v)| &acc + &x(1, 0).pow(k as u32).scale(&q(v)))
    }

    fn milne_elem(c: &[i64]) -> ExtendedElement {
        MilneStandardElement::new(
            rot2(c[0]),
            vec![small_time_poly(&c[1..4]), small_time_poly(&c[4..7])],
            q(c[7]),
            small_time_poly(&c[8..12]),
        )
        .unwrap()
        .to_extended()
        .unwrap()
    }

    fn bargmann_elem(c: &[i64]) -> BargmannElement {
        BargmannElement::new(
            vec![vec![q(0), q(c[0])], vec![q(-c[0]), q(0)]],
            vec![q(c[1]), q(c[2])],
            vec![q(c[3]), q(c[4])],
            q(c[5]),
            q(c[6]),
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn extended_milne_jacobi(cs in prop::collection::vec(-2i64..=2, 36)) {
            let s = NCBStructure::flat(2);
            let (a, b, c) = (milne_elem(&cs[0..12]), milne_elem(&cs[12..24]), milne_elem(&cs[24..36]));
            let br = |u: &ExtendedElement, v: &ExtendedElement| extended_mil_bracket(&s, u, v).unwrap();
            prop_assert!(br(&a, &b).checked_add(&br(&b, &a)).unwrap().is_zero());
            let j = br(&a, &br(&b, &c)).checked_add(&br(&b, &br(&c, &a))).unwrap().checked_add(&br(&c, &br(&a, &b))).unwrap();
            prop_assert!(j.is_zero());
            // forgetting ξ gives the unextended bracket
            prop_assert_eq!(br(&a, &b).x, a.x.bracket(&b.x).unwrap());
        }

        #[test]
        fn bargmann_jacobi(cs in prop::collection::vec(-3i64..=3, 21)) {
            let (a, b, c) = (bargmann_elem(&cs[0..7]), bargmann_elem(&cs[7..14]), bargmann_elem(&cs[14..21]));
            prop_assert!(bargmann_bracket(&a, &b).checked_add(&bargmann_bracket(&b, &a)).unwrap().is_zero());
            let j = bargmann_bracket(&a, &bargmann_bracket(&b, &c))
                .checked_add(&bargmann_bracket(&b, &bargmann_bracket(&c, &a))).unwrap()
                .checked_add(&bargmann_bracket(&c, &bargmann_bracket(&a, &b))).unwrap();
            prop_assert!(j.is_zero());
        }

        #[test]
        fn extended_coriolis_jacobi(cs in prop::collection::vec(-2i64..=2, 3 * 17)) {
            let s = NCBStructure::standard(2, &x(3, 1).pow(2)).unwrap();
            let cor = solve_symmetries(&s.nc_structure().unwrap(), Flavor::Coriolis, DegreeBound(1)).unwrap();
            let fs = monomials_up_to(3, 2);
            let el = |k: usize| {
                let c = &cs[k * 17..(k + 1) * 17];
                let mut v = VectorField::zero(3, 3);
                for (xf, &w) in cor.basis.iter().zip(c) {
                    v = v.checked_add(&xf.scale(&q(w))).unwrap();
                }
                let f = fs.iter().zip(&c[7..]).fold(Poly::zero(3), |acc, (m, &w)| &acc + &Poly::term(m.clone(), q(w)));
                ext(v, f)
            };
            let (a, b, c) = (el(0), el(1), el(2));
            let br = |u: &ExtendedElement, v: &ExtendedElement| extended_cor_bracket(&s, u, v).unwrap();
            prop_assert!(br(&a, &b).checked_add(&br(&b, &a)).unwrap().is_zero());
            let j = br(&a, &br(&b, &c)).checked_add(&br(&b, &br(&c, &a))).unwrap().checked_add(&br(&c, &br(&a, &b))).unwrap();
            prop_assert!(j.is_zero());
        }
    }
}
