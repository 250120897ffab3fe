//! Galilei, Newton-Cartan and Newton-Cartan-Bargmann structures.
//!
//! A Newton-Cartan-Bargmann structure is stored through its gauge data
//! `(γ, θ, U, A)`; the observer `V`, the potential `φ`, the field strength `F`,
//! the transverse metric `Uγ` and the assembled connection are derived once at
//! construction and cached.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::poly::Poly;
use crate::tensor::{
    check_newtonian, covariant_derivative, curvature, lower, pair, raise, Connection, TensorField, VectorField,
};
use crate::Rational;

/// A named pass/fail structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            label: label.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    fn into_result(self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::invariant(self.label, self.detail))
        }
    }
}

fn fmt_idx(idx: &[usize]) -> String {
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Default rational sample points for the pointwise rank and positivity checks
/// (always includes the origin).
pub fn default_sample_points(dim: usize) -> Vec<Vec<Rational>> {
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    vec![
        vec![Rational::zero(); dim],
        (0..dim).map(|i| q(1 + i as i64, 1)).collect(),
        (0..dim)
            .map(|i| q(if i % 2 == 0 { -2 } else { 3 }, 1 + i as i64))
            .collect(),
        (0..dim).map(|i| q(1, 2 + i as i64)).collect(),
    ]
}

/// `(M, γ, θ)`: a degenerate contravariant metric whose kernel is spanned by `θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GalileiStructure {
    n: usize,
    gamma: TensorField,
    theta: TensorField,
    samples: Vec<Vec<Rational>>,
}

impl GalileiStructure {
    /// Validates and builds a Galilei structure with the default sample points.
    pub fn new(gamma: TensorField, theta: TensorField) -> Result<Self> {
        let dim = gamma.dim();
        Self::with_samples(gamma, theta, default_sample_points(dim))
    }

    pub fn with_samples(gamma: TensorField, theta: TensorField, samples: Vec<Vec<Rational>>) -> Result<Self> {
        gamma.expect_type(2, 0)?;
        theta.expect_type(0, 1)?;
        if gamma.dim() != theta.dim() {
            return Err(Error::DimensionMismatch {
                expected: gamma.dim(),
                found: theta.dim(),
            });
        }
        if gamma.dim() == 0 {
            return Err(Error::invariant(
                "dimension",
                "spacetime must have at least the time axis",
            ));
        }
        let g = GalileiStructure {
            n: gamma.dim() - 1,
            gamma,
            theta,
            samples,
        };
        for c in g.checks() {
            c.into_result()?;
        }
        Ok(g)
    }

    /// `γ = Σ_A ∂_A⊗∂_A`, `θ = dt`.
    pub fn standard(n: usize) -> Self {
        let dim = n + 1;
        let mut gamma = TensorField::zero(dim, dim, 2, 0);
        for a in 1..dim {
            gamma.set(&[a, a], Poly::one(dim));
        }
        let mut theta = TensorField::zero(dim, dim, 0, 1);
        theta.set(&[0], Poly::one(dim));
        GalileiStructure {
            n,
            gamma,
            theta,
            samples: default_sample_points(dim),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn nvars(&self) -> usize {
        self.gamma.nvars()
    }

    pub fn gamma(&self) -> &TensorField {
        &self.gamma
    }

    pub fn theta(&self) -> &TensorField {
        &self.theta
    }

    pub fn sample_points(&self) -> &[Vec<Rational>] {
        &self.samples
    }

    /// True when `dθ = 0`.
    pub fn theta_closed(&self) -> bool {
        let d = self.dim();
        (0..d).all(|a| (0..d).all(|b| self.theta.get(&[b]).d(a) == self.theta.get(&[a]).d(b)))
    }

    /// Every structural invariant, in a fixed order.
    pub fn checks(&self) -> Vec<Check> {
        let d = self.dim();
        let mut out = Vec::new();
        out.push(Check::new(
            "gamma symmetric",
            self.gamma.is_symmetric(),
            "gamma^{ab} = gamma^{ba}",
        ));
        let kernel = raise(&self.gamma, &self.theta).expect("shapes checked");
        let bad = (0..d).find(|&a| !kernel.component(a).is_zero());
        out.push(Check::new(
            "theta spans kernel of gamma",
            bad.is_none(),
            match bad {
                None => "gamma^{ak} theta_k = 0".to_string(),
                Some(a) => format!("gamma^{{{a}k}} theta_k = {}", kernel.component(a)),
            },
        ));
        for (i, p) in self.samples.iter().enumerate() {
            out.push(self.pointwise_check(i, p));
        }
        out
    }

    fn pointwise_check(&self, i: usize, p: &[Rational]) -> Check {
        let d = self.dim();
        let label = "gamma rank n and positive on complement of theta";
        let mut point = p.to_vec();
        point.resize(self.nvars(), Rational::zero());
        let theta: Vec<Rational> = self.theta.eval(&point).expect("point length");
        let Some(j) = theta.iter().position(|v| !v.is_zero()) else {
            return Check::new(label, false, format!("theta vanishes at sample point {i}"));
        };
        // Q = γ + e_j⊗e_j is positive definite iff γ is positive semidefinite of
        // rank n with kernel spanned by θ (given θ_j ≠ 0).
        let gv = self.gamma.eval(&point).expect("point length");
        let mut q = RationalMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut v = gv[a * d + b].clone();
                if a == j && b == j {
                    v += Rational::one();
                }
                q.set(a, b, v);
            }
        }
        for k in 1..=d {
            let mut minor = RationalMatrix::zeros(k, k);
            for a in 0..k {
                for b in 0..k {
                    minor.set(a, b, q.get(a, b).clone());
                }
            }
            let det = minor.determinant().expect("square");
            if !det.is_positive() {
                return Check::new(label, false, format!("leading minor {k} is {det} at sample point {i}"));
            }
        }
        Check::new(label, true, format!("sample point {i}"))
    }
}

/// `(M, γ, θ, Γ)` with `Γ` torsion-free, compatible and Newtonian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCStructure {
    base: GalileiStructure,
    connection: Connection,
}

impl NCStructure {
    pub fn new(base: GalileiStructure, connection: Connection) -> Result<Self> {
        let s = Self::new_unchecked(base, connection)?;
        for c in s.checks()? {
            c.into_result()?;
        }
        Ok(s)
    }

    /// Skips the compatibility and curvature checks (shape checks still apply).
    /// Used to build deliberately non-Newtonian test connections.
    pub fn new_unchecked(base: GalileiStructure, connection: Connection) -> Result<Self> {
        if base.dim() != connection.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: connection.dim(),
            });
        }
        if !connection.is_symmetric() {
            return Err(Error::invariant("torsion-free", "Gamma_ab^c != Gamma_ba^c"));
        }
        Ok(NCStructure { base, connection })
    }

    /// The flat structure: standard Galilei data with `Γ ≡ 0`.
    pub fn flat(n: usize) -> Self {
        let base = GalileiStructure::standard(n);
        let connection = Connection::zero(n + 1, n + 1);
        NCStructure { base, connection }
    }

    /// Standard structure built directly: `Γ_00^A = ∂_A φ`, all else zero.
    pub fn standard(n: usize, phi: &Poly) -> Result<Self> {
        let dim = n + 1;
        if phi.nvars() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: phi.nvars(),
            });
        }
        let mut connection = Connection::zero(dim, dim);
        for a in 1..dim {
            connection.set(0, 0, a, phi.d(a));
        }
        Ok(NCStructure {
            base: GalileiStructure::standard(n),
            connection,
        })
    }

    pub fn base(&self) -> &GalileiStructure {
        &self.base
    }

    pub fn gamma(&self) -> &TensorField {
        self.base.gamma()
    }

    pub fn theta(&self) -> &TensorField {
        self.base.theta()
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }

    /// Galilei checks followed by compatibility and Newtonian curvature symmetry.
    pub fn checks(&self) -> Result<Vec<Check>> {
        let mut out = self.base.checks();
        let dg = covariant_derivative(&self.connection, self.gamma())?;
        out.push(Check::new(
            "nabla gamma = 0",
            dg.is_zero(),
            match dg.first_nonzero() {
                None => "compatible with gamma".to_string(),
                Some(idx) => format!("nabla_{} gamma^{}{} != 0", idx[2], idx[0], idx[1]),
            },
        ));
        let dt = covariant_derivative(&self.connection, self.theta())?;
        out.push(Check::new(
            "nabla theta = 0",
            dt.is_zero(),
            match dt.first_nonzero() {
                None => "compatible with theta".to_string(),
                Some(idx) => format!("nabla_{} theta_{} != 0", idx[1], idx[0]),
            },
        ));
        let nc = check_newtonian(&curvature(&self.connection), self.gamma())?;
        out.push(Check::new(
            "Newtonian curvature symmetry",
            nc.holds,
            match nc.witness {
                None => "R_a^b_c^d = R_c^d_a^b".to_string(),
                Some(w) => format!("violated at a,b,c,d = {}", fmt_idx(&w)),
            },
        ));
        Ok(out)
    }
}

/// `Uγ`: the symmetric `(0,2)` tensor with `Uγ_ak γ^kb = δ_a^b − U^b θ_a` and `Uγ_ak U^k = 0`.
///
/// Computed as `(γ + U⊗U)^{-1} − θ⊗θ`; the inverse must stay polynomial, which
/// requires `det(γ + U⊗U)` to be a nonzero constant.
pub fn transverse_metric(g: &GalileiStructure, u: &VectorField) -> Result<TensorField> {
    let d = g.dim();
    if u.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.dim(),
        });
    }
    let theta_u = pair(g.theta(), u)?;
    if theta_u != Poly::one(g.nvars()) {
        return Err(Error::invariant("theta(U) = 1", format!("theta(U) = {theta_u}")));
    }
    let q: Vec<Vec<Poly>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| g.gamma().get(&[a, b]) + &(u.component(a) * u.component(b)))
                .collect()
        })
        .collect();
    let det = poly_determinant(&q);
    if det.is_zero() {
        return Err(Error::invariant(
            "transverse metric",
            "inconsistent system: gamma + U U is singular (gamma rank deficient beyond ker theta)",
        ));
    }
    if !det.is_constant() {
        return Err(Error::invariant(
            "transverse metric",
            format!("det(gamma + U U) = {det} is not constant; Ugamma leaves the polynomial class"),
        ));
    }
    let inv_det = Rational::one() / det.constant_term();
    let mut h = TensorField::zero(d, g.nvars(), 0, 2);
    for a in 0..d {
        for b in 0..d {
            let cof = cofactor(&q, b, a).scale(&inv_det);
            let v = &cof - &(g.theta().get(&[a]) * g.theta().get(&[b]));
            h.set(&[a, b], v);
        }
    }
    // re-verify both defining conditions
    for a in 0..d {
        let hu = lower(&h, u)?;
        if !hu.get(&[a]).is_zero() {
            return Err(Error::invariant("transverse metric", format!("Ugamma_{a}k U^k != 0")));
        }
        for b in 0..d {
            let mut lhs = Poly::zero(g.nvars());
            for k in 0..d {
                lhs += &(h.get(&[a, k]) * g.gamma().get(&[k, b]));
            }
            let mut rhs = -&(u.component(b) * g.theta().get(&[a]));
            if a == b {
                rhs += &Poly::one(g.nvars());
            }
            if lhs != rhs {
                return Err(Error::invariant(
                    "transverse metric",
                    format!("Ugamma_{a}k gamma^k{b} != delta - U theta"),
                ));
            }
        }
    }
    Ok(h)
}

fn minor(m: &[Vec<Poly>], row: usize, col: usize) -> Vec<Vec<Poly>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(c, _)| *c != col)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Determinant of a square polynomial matrix by cofactor expansion.
pub fn poly_determinant(m: &[Vec<Poly>]) -> Poly {
    match m.len() {
        0 => panic!("empty matrix"),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Poly::zero(m[0][0].nvars());
            for c in 0..m.len() {
                if m[0][c].is_zero() {
                    continue;
                }
                let t = &m[0][c] * &poly_determinant(&minor(m, 0, c));
                if c % 2 == 0 {
                    acc += &t;
                } else {
                    acc -= &t;
                }
            }
            acc
        }
    }
}

fn cofactor(m: &[Vec<Poly>], row: usize, col: usize) -> Poly {
    if m.len() == 1 {
        return Poly::one(m[0][0].nvars());
    }
    let det = poly_determinant(&minor(m, row, col));
    if (row + col).is_multiple_of(2) {
        det
    } else {
        -det
    }
}

/// The connection for which `U` is geodesic and curl-free:
/// `UΓ_ab^c = γ^{ck}(∂_(a Uγ_b)k − ½∂_k Uγ_ab) + ∂_(a θ_b) U^c`.
pub fn build_geodesic_connection(g: &GalileiStructure, u: &VectorField) -> Result<Connection> {
    if !g.theta_closed() {
        return Err(Error::invariant("d theta = 0", "theta is not closed"));
    }
    let h = transverse_metric(g, u)?;
    let d = g.dim();
    let nv = g.nvars();
    let half = Rational::new(1.into(), 2.into());
    let mut out = Connection::zero(d, nv);
    for a in 0..d {
        for b in a..d {
            for c in 0..d {
                let mut acc = Poly::zero(nv);
                for k in 0..d {
                    let gck = g.gamma().get(&[c, k]);
                    if gck.is_zero() {
                        continue;
                    }
                    let inner = &(&h.get(&[b, k]).d(a) + &h.get(&[a, k]).d(b)) - &h.get(&[a, b]).d(k);
                    acc += &(gck * &inner.scale(&half));
                }
                let sym_dtheta = &g.theta().get(&[b]).d(a) + &g.theta().get(&[a]).d(b);
                acc += &(&sym_dtheta.scale(&half) * u.component(c));
                out.set_symmetric(a, b, c, acc);
            }
        }
    }
    Ok(out)
}

/// `F_ab = ∂_a A_b − ∂_b A_a`.
pub fn field_strength(a: &TensorField) -> Result<TensorField> {
    a.expect_type(0, 1)?;
    let d = a.dim();
    let mut f = TensorField::zero(d, a.nvars(), 0, 2);
    for i in 0..d {
        for j in 0..d {
            f.set(&[i, j], &a.get(&[j]).d(i) - &a.get(&[i]).d(j));
        }
    }
    Ok(f)
}

/// True when the 2-form `F` satisfies `∂_a F_bc + ∂_b F_ca + ∂_c F_ab = 0`.
pub fn is_closed_two_form(f: &TensorField) -> bool {
    let d = f.dim();
    (0..d).all(|a| {
        (0..d).all(|b| {
            (0..d).all(|c| {
                let s = &(&f.get(&[b, c]).d(a) + &f.get(&[c, a]).d(b)) + &f.get(&[a, b]).d(c);
                s.is_zero()
            })
        })
    })
}

/// `Γ_ab^c = UΓ_ab^c + θ_(a F_b)k γ^kc`, symmetrization weighted by ½.
pub fn assemble_connection(
    ug: &Connection,
    theta: &TensorField,
    f: &TensorField,
    gamma: &TensorField,
) -> Result<Connection> {
    f.expect_type(0, 2)?;
    theta.expect_type(0, 1)?;
    gamma.expect_type(2, 0)?;
    if !f.is_antisymmetric() {
        return Err(Error::invariant("F antisymmetric", "F_ab != -F_ba"));
    }
    let d = ug.dim();
    let nv = ug.nvars();
    let half = Rational::new(1.into(), 2.into());
    // Fγ_b^c = F_bk γ^kc
    let mut fg = vec![Poly::zero(nv); d * d];
    for b in 0..d {
        for c in 0..d {
            let mut acc = Poly::zero(nv);
            for k in 0..d {
                let fbk = f.get(&[b, k]);
                if fbk.is_zero() {
                    continue;
                }
                acc += &(fbk * gamma.get(&[k, c]));
            }
            fg[b * d + c] = acc;
        }
    }
    let mut out = ug.clone();
    for a in 0..d {
        for b in a..d {
            for c in 0..d {
                let extra = &(theta.get(&[a]) * &fg[b * d + c]) + &(theta.get(&[b]) * &fg[a * d + c]);
                if extra.is_zero() {
                    continue;
                }
                let v = ug.get(a, b, c) + &extra.scale(&half);
                out.set_symmetric(a, b, c, v);
            }
        }
    }
    Ok(out)
}

/// `V^a = U^a − γ^{ak} A_k` and `φ = ½ γ^{kl} A_k A_l − A_k U^k`.
pub fn observer_and_potential(g: &GalileiStructure, u: &VectorField, a: &TensorField) -> Result<(VectorField, Poly)> {
    let ga = raise(g.gamma(), a)?;
    let v = u.checked_sub(&ga)?;
    let half = Rational::new(1.into(), 2.into());
    let phi = &pair(a, &ga)?.scale(&half) - &pair(a, u)?;
    Ok((v, phi))
}

/// Inverse of [`observer_and_potential`]:
/// `A_b = −Uγ_bk V^k − (φ − ½ Uγ_kl V^k V^l) θ_b`.
pub fn potential_to_gauge(g: &GalileiStructure, u: &VectorField, v: &VectorField, phi: &Poly) -> Result<TensorField> {
    let theta_v = pair(g.theta(), v)?;
    if theta_v != Poly::one(g.nvars()) {
        return Err(Error::invariant("theta(V) = 1", format!("theta(V) = {theta_v}")));
    }
    let h = transverse_metric(g, u)?;
    let hv = lower(&h, v)?;
    let half = Rational::new(1.into(), 2.into());
    let coeff = phi - &pair(&hv, v)?.scale(&half);
    let d = g.dim();
    let comps = (0..d)
        .map(|b| &(-hv.get(&[b])) - &(&coeff * g.theta().get(&[b])))
        .collect();
    TensorField::covector(comps)
}

/// `(M, γ, θ, U, A)` with the derived observer data and connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCBStructure {
    base: GalileiStructure,
    u: VectorField,
    a: TensorField,
    v: VectorField,
    phi: Poly,
    f: TensorField,
    transverse: TensorField,
    geodesic: Connection,
    connection: Connection,
}

impl NCBStructure {
    /// Builds from gauge data `(U, A)`.
    pub fn new(base: GalileiStructure, u: VectorField, a: TensorField) -> Result<Self> {
        a.expect_type(0, 1)?;
        if a.dim() != base.dim() || u.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: if a.dim() != base.dim() { a.dim() } else { u.dim() },
            });
        }
        let transverse = transverse_metric(&base, &u)?;
        let geodesic = build_geodesic_connection(&base, &u)?;
        let f = field_strength(&a)?;
        if !is_closed_two_form(&f) {
            return Err(Error::invariant("F closed", "dF != 0"));
        }
        let connection = assemble_connection(&geodesic, base.theta(), &f, base.gamma())?;
        let (v, phi) = observer_and_potential(&base, &u, &a)?;
        Ok(NCBStructure {
            base,
            u,
            a,
            v,
            phi,
            f,
            transverse,
            geodesic,
            connection,
        })
    }

    /// Builds from observer data `(U, V, φ)`.
    pub fn from_observer(base: GalileiStructure, u: VectorField, v: VectorField, phi: Poly) -> Result<Self> {
        let a = potential_to_gauge(&base, &u, &v, &phi)?;
        Self::new(base, u, a)
    }

    /// Standard gauge on the standard Galilei structure: `U = ∂_0`, `A = −φθ`.
    pub fn standard(n: usize, phi: &Poly) -> Result<Self> {
        let base = GalileiStructure::standard(n);
        let dim = n + 1;
        if phi.nvars() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: phi.nvars(),
            });
        }
        let u = VectorField::coordinate(dim, dim, 0);
        let a = base.theta().mul_poly(&-phi);
        Self::new(base, u, a)
    }

    pub fn flat(n: usize) -> Self {
        Self::standard(n, &Poly::zero(n + 1)).expect("flat data is valid")
    }

    pub fn base(&self) -> &GalileiStructure {
        &self.base
    }

    pub fn gamma(&self) -> &TensorField {
        self.base.gamma()
    }

    pub fn theta(&self) -> &TensorField {
        self.base.theta()
    }

    pub fn u(&self) -> &VectorField {
        &self.u
    }

    pub fn a(&self) -> &TensorField {
        &self.a
    }

    pub fn v(&self) -> &VectorField {
        &self.v
    }

    pub fn phi(&self) -> &Poly {
        &self.phi
    }

    pub fn field_strength(&self) -> &TensorField {
        &self.f
    }

    pub fn transverse(&self) -> &TensorField {
        &self.transverse
    }

    pub fn geodesic_connection(&self) -> &Connection {
        &self.geodesic
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }

    /// The induced Newton-Cartan structure `(γ, θ, Γ)`, validated.
    pub fn nc_structure(&self) -> Result<NCStructure> {
        NCStructure::new(self.base.clone(), self.connection.clone())
    }

    pub fn checks(&self) -> Result<Vec<Check>> {
        let mut out = self.nc_structure_unchecked().checks()?;
        out.push(Check::new(
            "theta(U) = 1",
            pair(self.theta(), &self.u)? == Poly::one(self.nvars()),
            "unit ether field",
        ));
        out.push(Check::new("F closed", is_closed_two_form(&self.f), "dF = 0"));
        let acc = self.geodesic.acceleration(&self.u)?;
        out.push(Check::new(
            "U geodesic for UGamma",
            acc.is_zero(),
            "U^a(d_a U^c + UGamma_ab^c U^b) = 0",
        ));
        let (v, phi) = observer_and_potential(&self.base, &self.u, &self.a)?;
        out.push(Check::new(
            "observer/potential dictionary",
            v == self.v && phi == self.phi,
            "V = U - gamma(A), phi = 1/2 gamma(A,A) - A(U)",
        ));
        Ok(out)
    }

    fn nc_structure_unchecked(&self) -> NCStructure {
        NCStructure {
            base: self.base.clone(),
            connection: self.connection.clone(),
        }
    }
}
