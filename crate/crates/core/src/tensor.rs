//! Tensor fields with polynomial components, Lie derivatives, covariant
//! derivatives and curvature.
//!
//! Components are stored densely. A `(p, q)` tensor on an `n+1`-dimensional
//! spacetime has `(n+1)^(p+q)` components, contravariant indices first, in
//! row-major order. Polynomials may carry extra trailing variables beyond the
//! spacetime axes; derivatives are only taken along the spacetime axes.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::Rational;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Iterates all index tuples of the given length over `0..dim`.
pub fn index_tuples(dim: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(len as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; len];
        for slot in (0..len).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorField {
    dim: usize,
    nvars: usize,
    contra: usize,
    co: usize,
    comps: Vec<Poly>,
}

impl TensorField {
    pub fn zero(dim: usize, nvars: usize, contra: usize, co: usize) -> Self {
        assert!(nvars >= dim, "polynomials need at least one variable per axis");
        TensorField {
            dim,
            nvars,
            contra,
            co,
            comps: vec![Poly::zero(nvars); dim.pow((contra + co) as u32)],
        }
    }

    /// Builds a tensor from its flattened component list.
    pub fn from_components(dim: usize, contra: usize, co: usize, comps: Vec<Poly>) -> Result<Self> {
        check_dim(dim.pow((contra + co) as u32), comps.len())?;
        let nvars = comps.first().map(Poly::nvars).unwrap_or(dim);
        if nvars < dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: nvars,
            });
        }
        for c in &comps {
            check_dim(nvars, c.nvars())?;
        }
        Ok(TensorField {
            dim,
            nvars,
            contra,
            co,
            comps,
        })
    }

    pub fn scalar(dim: usize, f: Poly) -> Result<Self> {
        Self::from_components(dim, 0, 0, vec![f])
    }

    pub fn covector(comps: Vec<Poly>) -> Result<Self> {
        Self::from_components(comps.len(), 0, 1, comps)
    }

    /// Differential `df` of a function on the `dim`-dimensional spacetime.
    pub fn differential(dim: usize, f: &Poly) -> Self {
        TensorField {
            dim,
            nvars: f.nvars(),
            contra: 0,
            co: 1,
            comps: (0..dim).map(|a| f.d(a)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn contra_rank(&self) -> usize {
        self.contra
    }

    pub fn co_rank(&self) -> usize {
        self.co
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Poly> {
        self.comps
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Poly {
        &self.comps[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Poly) {
        let i = self.flat_index(idx);
        self.comps[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// First index tuple whose component is nonzero.
    pub fn first_nonzero(&self) -> Option<Vec<usize>> {
        index_tuples(self.dim, self.rank()).find(|idx| !self.get(idx).is_zero())
    }

    pub fn expect_type(&self, contra: usize, co: usize) -> Result<()> {
        if self.contra != contra || self.co != co {
            return Err(Error::TensorType {
                expected_contra: contra,
                expected_co: co,
                found_contra: self.contra,
                found_co: self.co,
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &TensorField) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.nvars, other.nvars)?;
        other.expect_type(self.contra, self.co)
    }

    pub fn checked_add(&self, other: &TensorField) -> Result<TensorField> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &TensorField) -> Result<TensorField> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &TensorField, f: impl Fn(&Poly, &Poly) -> Poly) -> TensorField {
        TensorField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    /// Applies `f` componentwise; the variable count follows the images.
    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> TensorField {
        let comps: Vec<Poly> = self.comps.iter().map(f).collect();
        let nvars = comps.first().map_or(self.nvars, Poly::nvars);
        TensorField { comps, nvars, ..*self }
    }

    pub fn scale(&self, c: &Rational) -> TensorField {
        self.map(|p| p.scale(c))
    }

    pub fn mul_poly(&self, f: &Poly) -> TensorField {
        self.map(|p| p * f)
    }

    /// Outer product; the result has `self`'s contravariant indices, then
    /// `other`'s contravariant indices, then the covariant ones in the same order.
    pub fn tensor_product(&self, other: &TensorField) -> Result<TensorField> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.nvars, other.nvars)?;
        let mut out = TensorField::zero(self.dim, self.nvars, self.contra + other.contra, self.co + other.co);
        for idx in index_tuples(self.dim, out.rank()) {
            let (sc, rest) = idx.split_at(self.contra);
            let (oc, rest) = rest.split_at(other.contra);
            let (sl, ol) = rest.split_at(self.co);
            let a: Vec<usize> = sc.iter().chain(sl).copied().collect();
            let b: Vec<usize> = oc.iter().chain(ol).copied().collect();
            let v = self.get(&a) * other.get(&b);
            out.set(&idx, v);
        }
        Ok(out)
    }

    /// Symmetric in its two indices (rank-2 tensors only).
    pub fn is_symmetric(&self) -> bool {
        self.rank() == 2 && (0..self.dim).all(|a| (0..self.dim).all(|b| self.get(&[a, b]) == self.get(&[b, a])))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rank() == 2 && (0..self.dim).all(|a| (0..self.dim).all(|b| *self.get(&[a, b]) == -self.get(&[b, a])))
    }

    /// Evaluates every component at a point (length = number of variables).
    pub fn eval(&self, point: &[Rational]) -> Result<Vec<Rational>> {
        self.comps.iter().map(|p| p.eval(point)).collect()
    }
}

/// A vector field `X = X^a ∂_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    comps: Vec<Poly>,
}

impl VectorField {
    pub fn new(comps: Vec<Poly>) -> Result<Self> {
        if let Some(first) = comps.first() {
            if first.nvars() < comps.len() {
                return Err(Error::DimensionMismatch {
                    expected: comps.len(),
                    found: first.nvars(),
                });
            }
            for c in &comps {
                check_dim(first.nvars(), c.nvars())?;
            }
        }
        Ok(VectorField { comps })
    }

    pub fn zero(dim: usize, nvars: usize) -> Self {
        VectorField {
            comps: vec![Poly::zero(nvars); dim],
        }
    }

    /// The coordinate field `∂_axis`.
    pub fn coordinate(dim: usize, nvars: usize, axis: usize) -> Self {
        let mut v = Self::zero(dim, nvars);
        v.comps[axis] = Poly::one(nvars);
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn nvars(&self) -> usize {
        self.comps.first().map(Poly::nvars).unwrap_or(0)
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn component(&self, a: usize) -> &Poly {
        &self.comps[a]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn to_tensor(&self) -> TensorField {
        TensorField {
            dim: self.dim(),
            nvars: self.nvars(),
            contra: 1,
            co: 0,
            comps: self.comps.clone(),
        }
    }

    pub fn from_tensor(t: &TensorField) -> Result<Self> {
        t.expect_type(1, 0)?;
        Ok(VectorField { comps: t.comps.clone() })
    }

    /// Directional derivative `X(f) = X^k ∂_k f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(f.nvars());
        for (k, xk) in self.comps.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            acc += &(xk * &f.d(k));
        }
        acc
    }

    /// Lie bracket `[X, Y]^a = X(Y^a) − Y(X^a)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim(), other.dim())?;
        check_dim(self.nvars(), other.nvars())?;
        Ok(VectorField {
            comps: (0..self.dim())
                .map(|a| &self.apply(&other.comps[a]) - &other.apply(&self.comps[a]))
                .collect(),
        })
    }

    pub fn checked_add(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim(), other.dim())?;
        Ok(VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.checked_add(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn checked_sub(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim(), other.dim())?;
        Ok(VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.checked_sub(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }
}

/// Contracts a 1-form with a vector field: `θ(X) = θ_k X^k`.
pub fn pair(form: &TensorField, v: &VectorField) -> Result<Poly> {
    form.expect_type(0, 1)?;
    check_dim(form.dim(), v.dim())?;
    let mut acc = Poly::zero(form.nvars());
    for k in 0..v.dim() {
        acc += &(form.get(&[k]) * v.component(k));
    }
    Ok(acc)
}

/// Raises a 1-form with a `(2,0)` tensor: `γ(ψ)^a = γ^{ak} ψ_k`.
pub fn raise(gamma: &TensorField, form: &TensorField) -> Result<VectorField> {
    gamma.expect_type(2, 0)?;
    form.expect_type(0, 1)?;
    check_dim(gamma.dim(), form.dim())?;
    let d = gamma.dim();
    Ok(VectorField {
        comps: (0..d)
            .map(|a| {
                let mut acc = Poly::zero(gamma.nvars());
                for k in 0..d {
                    acc += &(gamma.get(&[a, k]) * form.get(&[k]));
                }
                acc
            })
            .collect(),
    })
}

/// Lowers a vector with a `(0,2)` tensor: `h(Y)_a = h_{ak} Y^k`.
pub fn lower(h: &TensorField, v: &VectorField) -> Result<TensorField> {
    h.expect_type(0, 2)?;
    check_dim(h.dim(), v.dim())?;
    let d = h.dim();
    let comps = (0..d)
        .map(|a| {
            let mut acc = Poly::zero(h.nvars());
            for k in 0..d {
                acc += &(h.get(&[a, k]) * v.component(k));
            }
            acc
        })
        .collect();
    TensorField::from_components(d, 0, 1, comps)
}

/// `γ(α, β) = γ^{kl} α_k β_l`.
pub fn contract_forms(gamma: &TensorField, a: &TensorField, b: &TensorField) -> Result<Poly> {
    let ga = raise(gamma, a)?;
    pair(b, &ga)
}

/// Lie derivative of an arbitrary `(p, q)` tensor field.
pub fn lie_derivative(x: &VectorField, t: &TensorField) -> Result<TensorField> {
    check_dim(t.dim(), x.dim())?;
    check_dim(t.nvars(), x.nvars())?;
    let d = t.dim();
    let dx: Vec<Vec<Poly>> = (0..d).map(|a| (0..d).map(|k| x.component(a).d(k)).collect()).collect();
    let mut out = TensorField::zero(d, t.nvars(), t.contra, t.co);
    for idx in index_tuples(d, t.rank()) {
        let mut acc = x.apply(t.get(&idx));
        let mut probe = idx.clone();
        for slot in 0..t.rank() {
            let original = idx[slot];
            for k in 0..d {
                probe[slot] = k;
                let tk = t.get(&probe);
                if tk.is_zero() {
                    continue;
                }
                if slot < t.contra {
                    // - T^{..k..} ∂_k X^{a}
                    acc -= &(tk * &dx[original][k]);
                } else {
                    // + T_{..k..} ∂_{b} X^k
                    acc += &(tk * &dx[k][original]);
                }
            }
            probe[slot] = original;
        }
        out.set(&idx, acc);
    }
    Ok(out)
}

/// A torsion-free linear connection `Γ_ab^c`, stored as `[a][b][c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    dim: usize,
    nvars: usize,
    comps: Vec<Poly>,
}

impl Connection {
    pub fn zero(dim: usize, nvars: usize) -> Self {
        Connection {
            dim,
            nvars,
            comps: vec![Poly::zero(nvars); dim * dim * dim],
        }
    }

    /// Builds a connection from `[a][b][c]`-ordered components; rejects torsion.
    pub fn from_components(dim: usize, comps: Vec<Poly>) -> Result<Self> {
        let c = Self::from_components_unchecked(dim, comps)?;
        for a in 0..dim {
            for b in a + 1..dim {
                for k in 0..dim {
                    if c.get(a, b, k) != c.get(b, a, k) {
                        return Err(Error::invariant(
                            "torsion-free",
                            format!("Gamma_{a}{b}^{k} != Gamma_{b}{a}^{k}"),
                        ));
                    }
                }
            }
        }
        Ok(c)
    }

    pub(crate) fn from_components_unchecked(dim: usize, comps: Vec<Poly>) -> Result<Self> {
        check_dim(dim * dim * dim, comps.len())?;
        let nvars = comps.first().map(Poly::nvars).unwrap_or(dim);
        for p in &comps {
            check_dim(nvars, p.nvars())?;
        }
        Ok(Connection { dim, nvars, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Poly {
        &self.comps[(a * self.dim + b) * self.dim + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: Poly) {
        let i = (a * self.dim + b) * self.dim + c;
        self.comps[i] = v;
    }

    /// Sets `Γ_ab^c` and `Γ_ba^c` together.
    pub fn set_symmetric(&mut self, a: usize, b: usize, c: usize, v: Poly) {
        self.set(b, a, c, v.clone());
        self.set(a, b, c, v);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|a| (0..self.dim).all(|b| (0..self.dim).all(|c| self.get(a, b, c) == self.get(b, a, c))))
    }

    /// First `(a, b, c)` with a nonzero component.
    pub fn first_nonzero(&self) -> Option<(usize, usize, usize)> {
        let d = self.dim;
        (0..d * d * d)
            .find(|&i| !self.comps[i].is_zero())
            .map(|i| (i / (d * d), (i / d) % d, i % d))
    }

    pub fn checked_add(&self, other: &Connection) -> Result<Connection> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.nvars, other.nvars)?;
        Ok(Connection {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// Geodesic deviation of a vector field: `U^a(∂_a U^c + Γ_ab^c U^b)`.
    pub fn acceleration(&self, u: &VectorField) -> Result<VectorField> {
        check_dim(self.dim, u.dim())?;
        let d = self.dim;
        let comps = (0..d)
            .map(|c| {
                let mut acc = u.apply(u.component(c));
                for a in 0..d {
                    for b in 0..d {
                        let g = self.get(a, b, c);
                        if g.is_zero() {
                            continue;
                        }
                        acc += &(&(g * u.component(a)) * u.component(b));
                    }
                }
                acc
            })
            .collect();
        VectorField::new(comps)
    }
}

/// `(L_X Γ)_ab^c = X^k∂_kΓ_ab^c + Γ_kb^c ∂_aX^k + Γ_ak^c ∂_bX^k − Γ_ab^k ∂_kX^c + ∂_a∂_bX^c`,
/// returned in the same `[a][b][c]` layout as a connection.
pub fn lie_derivative_connection(x: &VectorField, g: &Connection) -> Result<Connection> {
    check_dim(g.dim(), x.dim())?;
    check_dim(g.nvars(), x.nvars())?;
    let d = g.dim();
    let dx: Vec<Vec<Poly>> = (0..d).map(|a| (0..d).map(|k| x.component(a).d(k)).collect()).collect();
    let mut out = Connection::zero(d, g.nvars());
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut acc = x.apply(g.get(a, b, c));
                for k in 0..d {
                    let gkb = g.get(k, b, c);
                    if !gkb.is_zero() {
                        acc += &(gkb * &dx[k][a]);
                    }
                    let gak = g.get(a, k, c);
                    if !gak.is_zero() {
                        acc += &(gak * &dx[k][b]);
                    }
                    let gab = g.get(a, b, k);
                    if !gab.is_zero() {
                        acc -= &(gab * &dx[c][k]);
                    }
                }
                acc += &dx[c][a].d(b);
                out.set(a, b, c, acc);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaisedSlots {
    /// `Γ_a^{bc} = γ^{bk} Γ_ak^c`
    One,
    /// `Γ^{abc} = γ^{ak} γ^{bl} Γ_kl^c`
    Two,
}

/// A connection with one or both lower indices raised by `γ`, stored `[a][b][c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaisedConnection {
    pub slots: RaisedSlots,
    dim: usize,
    comps: Vec<Poly>,
}

impl RaisedConnection {
    pub fn get(&self, a: usize, b: usize, c: usize) -> &Poly {
        &self.comps[(a * self.dim + b) * self.dim + c]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn first_nonzero(&self) -> Option<(usize, usize, usize)> {
        let d = self.dim;
        (0..d * d * d)
            .find(|&i| !self.comps[i].is_zero())
            .map(|i| (i / (d * d), (i / d) % d, i % d))
    }
}

/// Raises lower slots of a connection-shaped array with `γ`.
pub fn raise_connection(g: &Connection, gamma: &TensorField, slots: RaisedSlots) -> Result<RaisedConnection> {
    gamma.expect_type(2, 0)?;
    check_dim(g.dim(), gamma.dim())?;
    check_dim(g.nvars(), gamma.nvars())?;
    let d = g.dim();
    let nv = g.nvars();
    // once raised: Γ_a^{bc} = γ^{bk} Γ_ak^c
    let mut once = vec![Poly::zero(nv); d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut acc = Poly::zero(nv);
                for k in 0..d {
                    let gbk = gamma.get(&[b, k]);
                    if gbk.is_zero() {
                        continue;
                    }
                    acc += &(gbk * g.get(a, k, c));
                }
                once[(a * d + b) * d + c] = acc;
            }
        }
    }
    let comps = match slots {
        RaisedSlots::One => once,
        RaisedSlots::Two => {
            // Γ^{abc} = γ^{ak} Γ_k^{bc}
            let mut twice = vec![Poly::zero(nv); d * d * d];
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let mut acc = Poly::zero(nv);
                        for k in 0..d {
                            let gak = gamma.get(&[a, k]);
                            if gak.is_zero() {
                                continue;
                            }
                            acc += &(gak * &once[(k * d + b) * d + c]);
                        }
                        twice[(a * d + b) * d + c] = acc;
                    }
                }
            }
            twice
        }
    };
    Ok(RaisedConnection { slots, dim: d, comps })
}

/// Covariant derivative `∇T`; the derivative index is appended as the last
/// covariant index: `(∇T)^{a..}_{b.. c} = ∇_c T^{a..}_{b..}`.
pub fn covariant_derivative(g: &Connection, t: &TensorField) -> Result<TensorField> {
    check_dim(g.dim(), t.dim())?;
    check_dim(g.nvars(), t.nvars())?;
    let d = t.dim();
    let mut out = TensorField::zero(d, t.nvars(), t.contra, t.co + 1);
    for idx in index_tuples(d, t.rank()) {
        let mut probe = idx.clone();
        for c in 0..d {
            let mut acc = t.get(&idx).d(c);
            for slot in 0..t.rank() {
                let original = idx[slot];
                for k in 0..d {
                    probe[slot] = k;
                    let tk = t.get(&probe);
                    if tk.is_zero() {
                        continue;
                    }
                    if slot < t.contra {
                        let gck = g.get(c, k, original);
                        if !gck.is_zero() {
                            acc += &(gck * tk);
                        }
                    } else {
                        let gcb = g.get(c, original, k);
                        if !gcb.is_zero() {
                            acc -= &(gcb * tk);
                        }
                    }
                }
                probe[slot] = original;
            }
            let mut full = idx.clone();
            full.push(c);
            out.set(&full, acc);
        }
    }
    Ok(out)
}

/// Curvature `R_abc^d`, stored `[a][b][c][d]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvatureField {
    dim: usize,
    comps: Vec<Poly>,
}

impl CurvatureField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> &Poly {
        let n = self.dim;
        &self.comps[((a * n + b) * n + c) * n + d]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// The same field with every component negated (the opposite sign convention).
    pub fn negated(&self) -> CurvatureField {
        CurvatureField {
            dim: self.dim,
            comps: self.comps.iter().map(|p| -p).collect(),
        }
    }

    /// Nonzero components as `([a, b, c, d], value)`.
    pub fn nonzero_components(&self) -> Vec<([usize; 4], Poly)> {
        let n = self.dim;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        if !v.is_zero() {
                            out.push(([a, b, c, d], v.clone()));
                        }
                    }
                }
            }
        }
        out
    }
}

/// `R_abc^d = ∂_aΓ_bc^d − ∂_bΓ_ac^d + Γ_ak^dΓ_bc^k − Γ_bk^dΓ_ac^k`.
pub fn curvature(g: &Connection) -> CurvatureField {
    let n = g.dim();
    let nv = g.nvars();
    let mut comps = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = &g.get(b, c, d).d(a) - &g.get(a, c, d).d(b);
                    for k in 0..n {
                        let p = g.get(a, k, d);
                        let q = g.get(b, c, k);
                        if !p.is_zero() && !q.is_zero() {
                            acc += &(p * q);
                        }
                        let p = g.get(b, k, d);
                        let q = g.get(a, c, k);
                        if !p.is_zero() && !q.is_zero() {
                            acc -= &(p * q);
                        }
                    }
                    debug_assert_eq!(acc.nvars(), nv);
                    comps.push(acc);
                }
            }
        }
    }
    CurvatureField { dim: n, comps }
}

/// Outcome of the Newtonian curvature-symmetry check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonianCheck {
    pub holds: bool,
    /// First `(a, b, c, d)` with `γ^{bk}R_akc^d ≠ γ^{dk}R_cka^b`.
    pub witness: Option<[usize; 4]>,
}

/// Checks `R_a^b_c^d = R_c^d_a^b` where `R_a^b_c^d = γ^{bk} R_akc^d`.
pub fn check_newtonian(r: &CurvatureField, gamma: &TensorField) -> Result<NewtonianCheck> {
    gamma.expect_type(2, 0)?;
    check_dim(r.dim(), gamma.dim())?;
    let n = r.dim();
    let raised = |a: usize, b: usize, c: usize, d: usize| {
        let mut acc = Poly::zero(gamma.nvars());
        for k in 0..n {
            let g = gamma.get(&[b, k]);
            if g.is_zero() {
                continue;
            }
            acc += &(g * r.get(a, k, c, d));
        }
        acc
    };
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if raised(a, b, c, d) != raised(c, d, a, b) {
                        return Ok(NewtonianCheck {
                            holds: false,
                            witness: Some([a, b, c, d]),
                        });
                    }
                }
            }
        }
    }
    Ok(NewtonianCheck {
        holds: true,
        witness: None,
    })
}

/// `δ_a^b` as a `(1,1)` tensor.
pub fn kronecker(dim: usize, nvars: usize) -> TensorField {
    let mut t = TensorField::zero(dim, nvars, 1, 1);
    for a in 0..dim {
        t.set(&[a, a], Poly::one(nvars));
    }
    t
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::nc::{GalileiStructure, NCStructure};
    use proptest::prelude::*;

    fn x(dim: usize, i: usize) -> Poly {
        Poly::var(dim, i)
    }

    fn vf(comps: Vec<Poly>) -> VectorField {
        VectorField::new(comps).unwrap()
    }

    /// Γ_0A^B = Γ_A0^B = c(t) ε_AB on the standard Galilei structure, n = 2.
    pub(crate) fn rotation_connection(c: Poly) -> Connection {
        let mut g = Connection::zero(3, 3);
        g.set_symmetric(0, 1, 2, c.clone());
        g.set_symmetric(0, 2, 1, -&c);
        g
    }

    #[test]
    fn lie_derivative_of_zero_field() {
        let s = GalileiStructure::standard(2);
        let l = lie_derivative(&VectorField::zero(3, 3), s.gamma()).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn translation_preserves_flat_gamma() {
        let s = GalileiStructure::standard(3);
        let l = lie_derivative(&VectorField::coordinate(4, 4, 1), s.gamma()).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn boost_preserves_clock() {
        let s = GalileiStructure::standard(1);
        let boost = vf(vec![Poly::zero(2), x(2, 0).scale(&Rational::from_integer(3.into()))]);
        // L_X θ_a = X^k ∂_k θ_a + θ_k ∂_a X^k = ∂_a X^0 = 0
        assert!(lie_derivative(&boost, s.theta()).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_dimension_mismatch() {
        let s = GalileiStructure::standard(2);
        let err = lie_derivative(&VectorField::zero(2, 2), s.gamma()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 2 });
    }

    #[test]
    fn connection_lie_derivative_examples() {
        let affine = vf(vec![Poly::one(2), &x(2, 0) + &x(2, 1)]);
        assert!(lie_derivative_connection(&affine, &Connection::zero(2, 2))
            .unwrap()
            .is_zero());

        let accel = vf(vec![Poly::zero(2), x(2, 0).pow(2)]);
        let l = lie_derivative_connection(&accel, &Connection::zero(2, 2)).unwrap();
        assert_eq!(l.get(0, 0, 1), &Poly::int(2, 2));
        assert_eq!(l.first_nonzero(), Some((0, 0, 1)));
        assert_eq!(l.components().iter().filter(|p| !p.is_zero()).count(), 1);

        let s = NCStructure::standard(2, &x(3, 1)).unwrap();
        let l = lie_derivative_connection(&VectorField::coordinate(3, 3, 2), s.connection()).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn raised_connection_examples() {
        let s = GalileiStructure::standard(1);
        assert!(raise_connection(&Connection::zero(2, 2), s.gamma(), RaisedSlots::Two)
            .unwrap()
            .is_zero());
        let nc = NCStructure::standard(1, &x(2, 1)).unwrap();
        assert_eq!(nc.connection().get(0, 0, 1), &Poly::one(2));
        // γ^{a0} = 0 kills every contraction with the only nonzero slot
        for slots in [RaisedSlots::One, RaisedSlots::Two] {
            assert!(raise_connection(nc.connection(), s.gamma(), slots).unwrap().is_zero());
        }
    }

    #[test]
    fn covariant_derivative_examples() {
        let s = GalileiStructure::standard(2);
        assert!(covariant_derivative(&Connection::zero(3, 3), s.gamma())
            .unwrap()
            .is_zero());
        let nc = NCStructure::standard(2, &(&x(3, 1).pow(2) + &x(3, 2))).unwrap();
        assert!(covariant_derivative(nc.connection(), s.theta()).unwrap().is_zero());
        let nc = NCStructure::standard(1, &x(2, 1).pow(2)).unwrap();
        let dg = covariant_derivative(nc.connection(), nc.gamma()).unwrap();
        assert_eq!((dg.contra_rank(), dg.co_rank()), (2, 1));
        assert!(dg.is_zero());
    }

    #[test]
    fn flat_curvature_vanishes() {
        assert!(curvature(&Connection::zero(4, 4)).is_zero());
    }

    #[test]
    fn standard_curvature_is_hessian() {
        let nc = NCStructure::standard(1, &x(2, 1).pow(2)).unwrap();
        let r = curvature(nc.connection());
        // R_100^1 = ∂_1 Γ_00^1 − ∂_0 Γ_10^1 = ∂_1∂_1 φ
        let nz = r.nonzero_components();
        assert_eq!(
            nz,
            vec![([0, 1, 0, 1], Poly::int(2, -2)), ([1, 0, 0, 1], Poly::int(2, 2))]
        );

        let nc = NCStructure::standard(2, &(&x(3, 1) * &x(3, 2))).unwrap();
        let r = curvature(nc.connection());
        for a in 1..3 {
            for b in 1..3 {
                let hess = if a == b { Poly::zero(3) } else { Poly::one(3) };
                assert_eq!(r.get(a, 0, 0, b), &hess);
                assert_eq!(r.get(0, a, 0, b), &-&hess);
            }
        }
    }

    #[test]
    fn newtonian_symmetry_of_standard_structures() {
        let s = GalileiStructure::standard(2);
        let zero = curvature(&Connection::zero(3, 3));
        assert!(check_newtonian(&zero, s.gamma()).unwrap().holds);
        for phi in [
            x(3, 1),
            x(3, 1).pow(2),
            &(&x(3, 1) * &x(3, 2)) + &x(3, 0).pow(3),
            x(3, 2).pow(4),
        ] {
            let nc = NCStructure::standard(2, &phi).unwrap();
            let r = curvature(nc.connection());
            assert!(check_newtonian(&r, s.gamma()).unwrap().holds);
            assert!(check_newtonian(&r.negated(), s.gamma()).unwrap().holds);
        }
    }

    #[test]
    fn time_dependent_rotation_is_not_newtonian() {
        let s = GalileiStructure::standard(2);
        let g = rotation_connection(x(3, 0));
        assert!(covariant_derivative(&g, s.gamma()).unwrap().is_zero());
        assert!(covariant_derivative(&g, s.theta()).unwrap().is_zero());
        let r = curvature(&g);
        let check = check_newtonian(&r, s.gamma()).unwrap();
        assert!(!check.holds);
        assert_eq!(check.witness, Some([0, 1, 0, 2]));
        // insensitive to the overall sign convention
        let flipped = check_newtonian(&r.negated(), s.gamma()).unwrap();
        assert_eq!(flipped, check);
    }

    #[test]
    fn constant_rotation_is_newtonian() {
        // R_0^B_0^D = -δ_BD is symmetric: this is the field strength of a closed F.
        let s = GalileiStructure::standard(2);
        let g = rotation_connection(Poly::one(3));
        assert!(check_newtonian(&curvature(&g), s.gamma()).unwrap().holds);
    }

    #[test]
    fn torsion_is_rejected() {
        let mut comps = vec![Poly::zero(2); 8];
        comps[1] = Poly::one(2); // Γ_00^1
        comps[3] = Poly::one(2); // Γ_01^1 without Γ_10^1
        assert!(Connection::from_components(2, comps).is_err());
    }

    // ---- property tests ----

    const DIM: usize = 3;

    fn poly_strategy(max_deg: u32) -> impl Strategy<Value = Poly> {
        let ms = crate::poly::monomials_up_to(DIM, max_deg);
        prop::collection::vec((0..ms.len(), -3i64..=3), 0..4).prop_map(move |terms| {
            let mut p = Poly::zero(DIM);
            for (i, c) in terms {
                p += &Poly::term(ms[i].clone(), Rational::from_integer(c.into()));
            }
            p
        })
    }

    fn vector_strategy(max_deg: u32) -> impl Strategy<Value = VectorField> {
        prop::collection::vec(poly_strategy(max_deg), DIM).prop_map(|c| VectorField::new(c).unwrap())
    }

    fn tensor_strategy(contra: usize, co: usize) -> impl Strategy<Value = TensorField> {
        prop::collection::vec(poly_strategy(2), DIM.pow((contra + co) as u32))
            .prop_map(move |c| TensorField::from_components(DIM, contra, co, c).unwrap())
    }

    fn connection_strategy() -> impl Strategy<Value = Connection> {
        prop::collection::vec(poly_strategy(2), DIM * DIM * DIM).prop_map(|c| {
            let mut g = Connection::zero(DIM, DIM);
            for a in 0..DIM {
                for b in a..DIM {
                    for k in 0..DIM {
                        g.set_symmetric(a, b, k, c[(a * DIM + b) * DIM + k].clone());
                    }
                }
            }
            g
        })
    }

    /// Random Coriolis field of the standard structure: X^0 = τ, X^A = ω(t)^A_B x^B + ρ(t)^A.
    fn coriolis_strategy() -> impl Strategy<Value = VectorField> {
        let tpoly = prop::collection::vec(-3i64..=3, 3).prop_map(|cs| {
            let mut p = Poly::zero(DIM);
            for (k, c) in cs.into_iter().enumerate() {
                p += &x(DIM, 0).pow(k as u32).scale(&Rational::from_integer(c.into()));
            }
            p
        });
        (-3i64..=3, tpoly.clone(), tpoly.clone(), tpoly).prop_map(|(tau, w, r1, r2)| {
            let x1 = &(&w * &x(DIM, 2)) + &r1;
            let x2 = &(&-&w * &x(DIM, 1)) + &r2;
            VectorField::new(vec![Poly::int(DIM, tau), x1, x2]).unwrap()
        })
    }

    /// Lie transport of Γ_a^{bc} written directly in raised form:
    /// X(Γ_a^{bc}) + Γ_k^{bc}∂_aX^k − Γ_a^{kc}∂_kX^b − Γ_a^{bk}∂_kX^c + γ^{bk}∂_a∂_kX^c.
    fn transport_raised(xf: &VectorField, raised: &RaisedConnection, gamma: &TensorField) -> Vec<Poly> {
        let mut out = Vec::new();
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    let mut acc = xf.apply(raised.get(a, b, c));
                    for k in 0..DIM {
                        acc += &(raised.get(k, b, c) * &xf.component(k).d(a));
                        acc -= &(raised.get(a, k, c) * &xf.component(b).d(k));
                        acc -= &(raised.get(a, b, k) * &xf.component(c).d(k));
                        acc += &(gamma.get(&[b, k]) * &xf.component(c).d(a).d(k));
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lie_derivative_is_a_derivation(
            xf in vector_strategy(2),
            s in tensor_strategy(1, 0),
            t in tensor_strategy(0, 1),
        ) {
            let lhs = lie_derivative(&xf, &s.tensor_product(&t).unwrap()).unwrap();
            let rhs = lie_derivative(&xf, &s).unwrap().tensor_product(&t).unwrap()
                .checked_add(&s.tensor_product(&lie_derivative(&xf, &t).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn lie_derivative_commutator(
            xf in vector_strategy(2),
            yf in vector_strategy(2),
            t in tensor_strategy(1, 1),
        ) {
            let lhs = lie_derivative(&xf.bracket(&yf).unwrap(), &t).unwrap();
            let xy = lie_derivative(&xf, &lie_derivative(&yf, &t).unwrap()).unwrap();
            let yx = lie_derivative(&yf, &lie_derivative(&xf, &t).unwrap()).unwrap();
            prop_assert_eq!(lhs, xy.checked_sub(&yx).unwrap());
        }

        #[test]
        fn connection_lie_derivative_is_symmetric(xf in vector_strategy(2), g in connection_strategy()) {
            prop_assert!(lie_derivative_connection(&xf, &g).unwrap().is_symmetric());
        }

        #[test]
        fn curvature_identities(g in connection_strategy()) {
            let r = curvature(&g);
            for a in 0..DIM { for b in 0..DIM { for c in 0..DIM { for d in 0..DIM {
                prop_assert_eq!(r.get(a, b, c, d), &-r.get(b, a, c, d));
                let cyc = &(r.get(a, b, c, d) + r.get(b, c, a, d)) + r.get(c, a, b, d);
                prop_assert!(cyc.is_zero());
            }}}}
        }

        #[test]
        fn raised_transport_matches_contraction(xf in coriolis_strategy(), phi in poly_strategy(3)) {
            let nc = NCStructure::standard(2, &phi).unwrap();
            let gamma = nc.gamma();
            prop_assert!(lie_derivative(&xf, gamma).unwrap().is_zero());
            let lg = lie_derivative_connection(&xf, nc.connection()).unwrap();
            let contracted = raise_connection(&lg, gamma, RaisedSlots::One).unwrap();
            let raised = raise_connection(nc.connection(), gamma, RaisedSlots::One).unwrap();
            let direct = transport_raised(&xf, &raised, gamma);
            for a in 0..DIM { for b in 0..DIM { for c in 0..DIM {
                prop_assert_eq!(contracted.get(a, b, c), &direct[(a * DIM + b) * DIM + c]);
            }}}
        }
    }
}
