//! Multivariate polynomials with exact rational coefficients.
//!
//! Variable 0 is time `t`, variables `1..=n` are the spatial coordinates.
//! Extra trailing variables may be used as formal parameters (for example a
//! perturbation parameter); tensor operations only differentiate along the
//! spacetime axes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Exponent vector ordered graded-lexicographically: total degree first, then
/// the exponent of variable 0, then variable 1, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn var(nvars: usize, axis: usize) -> Self {
        let mut e = vec![0; nvars];
        e[axis] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponent(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables whose total degree is at most `max_degree`,
/// in ascending graded-lex order.
pub fn monomials_up_to(nvars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(axis: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if axis == current.len() {
            out.push(Monomial(current.clone()));
            return;
        }
        for e in 0..=left {
            current[axis] = e;
            rec(axis + 1, left - e, current, out);
        }
        current[axis] = 0;
    }
    rec(0, max_degree, &mut current, &mut out);
    out.sort();
    out
}

/// A polynomial in a fixed number of variables. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, Rational::from_integer(c.into()))
    }

    /// The coordinate function `x^axis`.
    pub fn var(nvars: usize, axis: usize) -> Self {
        assert!(axis < nvars, "variable {axis} out of range for {nvars} variables");
        Self::term(Monomial::var(nvars, axis), Rational::one())
    }

    pub fn term(monomial: Monomial, c: Rational) -> Self {
        let nvars = monomial.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(monomial, c);
        }
        Poly { nvars, terms }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Result<Self> {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: m.nvars(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.nvars))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Highest exponent of `axis` appearing in any term.
    pub fn degree_in(&self, axis: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(axis)).max().unwrap_or(0)
    }

    /// Highest combined degree over the listed axes.
    pub fn degree_in_axes(&self, axes: impl Fn(usize) -> bool) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.exponents()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| axes(*i))
                    .map(|(_, e)| *e)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    /// True when only the listed variables occur.
    pub fn depends_only_on(&self, axes: impl Fn(usize) -> bool) -> bool {
        self.terms
            .keys()
            .all(|m| m.exponents().iter().enumerate().all(|(i, &e)| e == 0 || axes(i)))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(self.nvars);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Formal partial derivative along `axis`.
    pub fn partial(&self, axis: usize) -> Result<Poly> {
        if axis >= self.nvars {
            return Err(Error::AxisOutOfRange {
                axis,
                nvars: self.nvars,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[axis];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[axis] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Partial derivative for axes known to be in range.
    pub fn d(&self, axis: usize) -> Poly {
        self.partial(axis).expect("axis in range")
    }

    /// Evaluates at a point; `point.len()` must equal the number of variables.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    v *= x;
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Replaces every variable `i` by `images[i]`. All images share one variable count,
    /// which becomes the variable count of the result.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: images.len(),
            });
        }
        let target = images.first().map(Poly::nvars).unwrap_or(0);
        if let Some(bad) = images.iter().find(|p| p.nvars != target) {
            return Err(Error::DimensionMismatch {
                expected: target,
                found: bad.nvars,
            });
        }
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(target), p.clone()]).collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out += &t;
        }
        Ok(out)
    }

    /// Drops every term whose exponent of `axis` exceeds `max_exp`.
    pub fn truncate(&self, axis: usize, max_exp: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0[axis] <= max_exp)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `x_axis^k`, as a polynomial in the remaining variables
    /// (the variable count is unchanged; `axis` no longer occurs).
    pub fn coefficient_of_power(&self, axis: usize, k: u32) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.0[axis] == k {
                let mut exps = m.0.clone();
                exps[axis] = 0;
                out.add_term(Monomial(exps), c.clone());
            }
        }
        out
    }

    /// Same polynomial viewed in `nvars` variables; new variables are appended,
    /// dropped variables must not occur.
    pub fn with_nvars(&self, nvars: usize) -> Result<Poly> {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut exps = m.0.clone();
            if nvars < self.nvars {
                if exps[nvars..].iter().any(|&e| e != 0) {
                    return Err(Error::Precondition(format!(
                        "cannot drop variables {nvars}..{} that occur in the polynomial",
                        self.nvars
                    )));
                }
                exps.truncate(nvars);
            } else {
                exps.resize(nvars, 0);
            }
            out.add_term(Monomial(exps), c.clone());
        }
        Ok(out)
    }

    /// Radial homotopy antiderivative: for a closed polynomial 1-form `w` with
    /// components `w[a]` along the first `w.len()` axes, returns `f` with
    /// `df = w` and `f(0) = 0`. Closedness is the caller's responsibility.
    pub fn integrate_closed(w: &[Poly]) -> Poly {
        let nvars = w.first().map(Poly::nvars).unwrap_or(0);
        let mut out = Poly::zero(nvars);
        for (a, wa) in w.iter().enumerate() {
            for (m, c) in &wa.terms {
                let mut exps = m.0.clone();
                exps[a] += 1;
                let weight = Rational::from_integer((m.degree() + 1).into());
                out.add_term(Monomial(exps), c / weight);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    /// Canonical text such as `3/2*t^2*x1 - 1`: descending graded-lex order,
    /// `*` between factors, unit coefficients omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (axis, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = var_name(axis);
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Canonical name of coordinate `axis`: `t` for 0, `x<axis>` otherwise.
pub fn var_name(axis: usize) -> String {
    if axis == 0 {
        "t".to_string()
    } else {
        format!("x{axis}")
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial variable count mismatch")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial variable count mismatch")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial variable count mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }

    #[test]
    fn monomial_product() {
        assert_eq!(&x(1) * &x(1), x(1).pow(2));
        assert_eq!(x(1).pow(2).to_string(), "x1^2");
    }

    #[test]
    fn additive_identity() {
        let p = &x(1) + &x(0).scale(&q(3, 2));
        assert_eq!(&p + &Poly::zero(3), p);
    }

    #[test]
    fn difference_of_squares() {
        let lhs = &(&x(0) + &x(1)) * &(&x(0) - &x(1));
        // independent oracle: expand term by term
        let mut expected = Poly::zero(3);
        for (a, sa) in [(0usize, 1i64), (1, 1)] {
            for (b, sb) in [(0usize, 1i64), (1, -1)] {
                expected += &(&x(a) * &x(b)).scale(&q(sa * sb, 1));
            }
        }
        assert_eq!(lhs, expected);
        assert_eq!(lhs.to_string(), "t^2 - x1^2");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = Poly::var(2, 1).checked_add(&Poly::var(3, 1)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn partials() {
        assert_eq!(x(1).pow(2).partial(1).unwrap(), x(1).scale(&q(2, 1)));
        assert!(x(1).partial(0).unwrap().is_zero());
        let txy = &(&x(0) * &x(1)) * &x(2);
        assert_eq!(txy.partial(1).unwrap(), &x(0) * &x(2));
        assert!(matches!(
            x(1).partial(3),
            Err(Error::AxisOutOfRange { axis: 3, nvars: 3 })
        ));
    }

    #[test]
    fn display_is_canonical() {
        let p = &(&x(0).pow(2) * &x(1)).scale(&q(3, 2)) - &Poly::one(3);
        assert_eq!(p.to_string(), "3/2*t^2*x1 - 1");
        assert_eq!((-&x(2)).to_string(), "-x2");
        assert_eq!(Poly::zero(2).to_string(), "0");
    }

    #[test]
    fn compose_substitutes() {
        // p(t, x1) = t*x1, substitute t -> t + 1, x1 -> 2 x1
        let p = &Poly::var(2, 0) * &Poly::var(2, 1);
        let images = [&Poly::var(2, 0) + &Poly::one(2), Poly::var(2, 1).scale(&q(2, 1))];
        let r = p.compose(&images).unwrap();
        assert_eq!(r.to_string(), "2*t*x1 + 2*x1");
    }

    #[test]
    fn integrate_closed_recovers_potential() {
        let f = &(&x(0) * &x(1).pow(2)) + &x(2).scale(&q(-5, 3));
        let w: Vec<Poly> = (0..3).map(|a| f.d(a)).collect();
        assert_eq!(Poly::integrate_closed(&w), f);
    }

    #[test]
    fn graded_lex_enumeration() {
        let ms = monomials_up_to(2, 2);
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert!(ms[0].is_one());
    }
}
