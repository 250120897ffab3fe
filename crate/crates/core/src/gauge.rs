//! The Newtonian gauge group `Diff(M) ⋉ (Ω¹(M) × C^∞(M))` acting on
//! Newton-Cartan-Bargmann structures.
//!
//! Finite diffeomorphisms are restricted to affine maps so push-forwards of
//! polynomial fields stay polynomial. The infinitesimal action and the gauge
//! algebra bracket accept arbitrary polynomial data.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::nc::NCBStructure;
use crate::poly::Poly;
use crate::tensor::{contract_forms, lie_derivative, raise, TensorField, VectorField};
use crate::Rational;

/// An element `(X, ψ, f)` of the gauge algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeElement {
    pub x: VectorField,
    pub psi: TensorField,
    pub f: Poly,
}

impl GaugeElement {
    pub fn new(x: VectorField, psi: TensorField, f: Poly) -> Result<Self> {
        psi.expect_type(0, 1)?;
        if psi.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: psi.dim(),
            });
        }
        if psi.nvars() != x.nvars() || f.nvars() != x.nvars() {
            return Err(Error::DimensionMismatch {
                expected: x.nvars(),
                found: if psi.nvars() != x.nvars() {
                    psi.nvars()
                } else {
                    f.nvars()
                },
            });
        }
        Ok(GaugeElement { x, psi, f })
    }

    pub fn zero(dim: usize, nvars: usize) -> Self {
        GaugeElement {
            x: VectorField::zero(dim, nvars),
            psi: TensorField::zero(dim, nvars, 0, 1),
            f: Poly::zero(nvars),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.psi.is_zero() && self.f.is_zero()
    }

    pub fn checked_add(&self, other: &GaugeElement) -> Result<GaugeElement> {
        Ok(GaugeElement {
            x: self.x.checked_add(&other.x)?,
            psi: self.psi.checked_add(&other.psi)?,
            f: self.f.checked_add(&other.f)?,
        })
    }
}

/// The five NCB fields `(γ, θ, U, V, φ)`; also used for their variations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcbFields {
    pub gamma: TensorField,
    pub theta: TensorField,
    pub u: VectorField,
    pub v: VectorField,
    pub phi: Poly,
}

impl NcbFields {
    pub fn of(s: &NCBStructure) -> Self {
        NcbFields {
            gamma: s.gamma().clone(),
            theta: s.theta().clone(),
            u: s.u().clone(),
            v: s.v().clone(),
            phi: s.phi().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.is_zero() && self.theta.is_zero() && self.u.is_zero() && self.v.is_zero() && self.phi.is_zero()
    }

    /// Applies `f` to every polynomial component.
    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> NcbFields {
        let vec = |v: &VectorField| VectorField::new(v.components().iter().map(&f).collect()).expect("same shape");
        NcbFields {
            gamma: self.gamma.map(&f),
            theta: self.theta.map(&f),
            u: vec(&self.u),
            v: vec(&self.v),
            phi: f(&self.phi),
        }
    }
}

/// `δ(γ, θ, U, V, φ) = (L_Xγ, L_Xθ, L_XU + γ(ψ), L_XV + γ(df), X(φ) + V(f))`.
pub fn infinitesimal_gauge(s: &NCBStructure, e: &GaugeElement) -> Result<NcbFields> {
    infinitesimal_gauge_fields(&NcbFields::of(s), e)
}

pub fn infinitesimal_gauge_fields(s: &NcbFields, e: &GaugeElement) -> Result<NcbFields> {
    let df = TensorField::differential(s.gamma.dim(), &e.f);
    let lu = VectorField::from_tensor(&lie_derivative(&e.x, &s.u.to_tensor())?)?;
    let lv = VectorField::from_tensor(&lie_derivative(&e.x, &s.v.to_tensor())?)?;
    Ok(NcbFields {
        gamma: lie_derivative(&e.x, &s.gamma)?,
        theta: lie_derivative(&e.x, &s.theta)?,
        u: lu.checked_add(&raise(&s.gamma, &e.psi)?)?,
        v: lv.checked_add(&raise(&s.gamma, &df)?)?,
        phi: &e.x.apply(&s.phi) + &s.v.apply(&e.f),
    })
}

/// `[(X,ψ,f),(X',ψ',f')] = ([X,X'], L_Xψ' − L_X'ψ, X(f') − X'(f))`.
pub fn gauge_bracket(e1: &GaugeElement, e2: &GaugeElement) -> Result<GaugeElement> {
    let x = e1.x.bracket(&e2.x)?;
    let psi = lie_derivative(&e1.x, &e2.psi)?.checked_sub(&lie_derivative(&e2.x, &e1.psi)?)?;
    let f = &e1.x.apply(&e2.f) - &e2.x.apply(&e1.f);
    GaugeElement::new(x, psi, f)
}

/// `x ↦ L x + b` with `L` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineDiffeo {
    linear: RationalMatrix,
    translation: Vec<Rational>,
}

impl AffineDiffeo {
    pub fn new(linear: RationalMatrix, translation: Vec<Rational>) -> Result<Self> {
        if linear.rows() != linear.cols() || translation.len() != linear.rows() {
            return Err(Error::DimensionMismatch {
                expected: linear.rows(),
                found: translation.len(),
            });
        }
        if linear.determinant()?.is_zero() {
            return Err(Error::Precondition("affine diffeomorphism is not invertible".into()));
        }
        Ok(AffineDiffeo { linear, translation })
    }

    pub fn identity(dim: usize) -> Self {
        AffineDiffeo {
            linear: RationalMatrix::identity(dim),
            translation: vec![Rational::zero(); dim],
        }
    }

    /// Galilean boost `x^axis ↦ x^axis + b t`.
    pub fn boost(dim: usize, axis: usize, b: Rational) -> Self {
        let mut linear = RationalMatrix::identity(dim);
        linear.set(axis, 0, b);
        AffineDiffeo {
            linear,
            translation: vec![Rational::zero(); dim],
        }
    }

    pub fn linear(&self) -> &RationalMatrix {
        &self.linear
    }

    pub fn translation(&self) -> &[Rational] {
        &self.translation
    }

    /// The same map with polynomial (constant) coefficients in `nvars` variables.
    pub fn to_poly_map(&self, nvars: usize) -> Result<PolyAffineMap> {
        let dim = self.linear.rows();
        let inv = self.linear.inverse()?;
        let c = |r: &Rational| Poly::constant(nvars, r.clone());
        let forward = (0..dim)
            .map(|a| (0..dim).map(|b| c(self.linear.get(a, b))).collect())
            .collect();
        let inverse_linear: Vec<Vec<Poly>> = (0..dim).map(|a| (0..dim).map(|b| c(inv.get(a, b))).collect()).collect();
        // A⁻¹(y) = L⁻¹(y − b)
        let mut inverse_images = Vec::with_capacity(nvars);
        for a in 0..dim {
            let mut acc = Poly::zero(nvars);
            for b in 0..dim {
                let shifted = &Poly::var(nvars, b) - &c(&self.translation[b]);
                acc += &(&inverse_linear[a][b] * &shifted);
            }
            inverse_images.push(acc);
        }
        for extra in dim..nvars {
            inverse_images.push(Poly::var(nvars, extra));
        }
        Ok(PolyAffineMap {
            dim,
            forward,
            inverse_linear,
            inverse_images,
        })
    }
}

/// An affine map whose constant coefficients may depend on formal parameters
/// (trailing polynomial variables). Used for push-forwards.
#[derive(Debug, Clone)]
pub struct PolyAffineMap {
    pub dim: usize,
    /// Jacobian `L^a_b`.
    pub forward: Vec<Vec<Poly>>,
    /// `(L⁻¹)^a_b`.
    pub inverse_linear: Vec<Vec<Poly>>,
    /// Components of `A⁻¹(y)`, one per polynomial variable (parameters map to themselves).
    pub inverse_images: Vec<Poly>,
}

impl PolyAffineMap {
    fn pull(&self, p: &Poly) -> Poly {
        p.compose(&self.inverse_images).expect("image count matches variables")
    }

    pub fn push_scalar(&self, f: &Poly) -> Poly {
        self.pull(f)
    }

    pub fn push_vector(&self, x: &VectorField) -> VectorField {
        let pulled: Vec<Poly> = x.components().iter().map(|p| self.pull(p)).collect();
        let comps = (0..self.dim)
            .map(|a| {
                let mut acc = Poly::zero(pulled[0].nvars());
                for b in 0..self.dim {
                    acc += &(&self.forward[a][b] * &pulled[b]);
                }
                acc
            })
            .collect();
        VectorField::new(comps).expect("shape preserved")
    }

    /// Push-forward of a tensor: contravariant slots contract with `L`,
    /// covariant slots with `L⁻¹`.
    pub fn push_tensor(&self, t: &TensorField) -> TensorField {
        let pulled = t.map(|p| self.pull(p));
        let mut current = pulled;
        for slot in 0..t.rank() {
            let contra = slot < t.contra_rank();
            let mut next = TensorField::zero(t.dim(), t.nvars(), t.contra_rank(), t.co_rank());
            for idx in crate::tensor::index_tuples(t.dim(), t.rank()) {
                let mut acc = Poly::zero(t.nvars());
                let mut probe = idx.clone();
                for k in 0..self.dim {
                    probe[slot] = k;
                    let m = if contra {
                        &self.forward[idx[slot]][k]
                    } else {
                        &self.inverse_linear[k][idx[slot]]
                    };
                    if m.is_zero() {
                        continue;
                    }
                    acc += &(m * current.get(&probe));
                }
                next.set(&idx, acc);
            }
            current = next;
        }
        current
    }

    pub fn push_fields(&self, s: &NcbFields) -> NcbFields {
        NcbFields {
            gamma: self.push_tensor(&s.gamma),
            theta: self.push_tensor(&s.theta),
            u: self.push_vector(&s.u),
            v: self.push_vector(&s.v),
            phi: self.push_scalar(&s.phi),
        }
    }
}

/// A finite gauge transformation `(A, Ψ, F)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGauge {
    pub diffeo: AffineDiffeo,
    pub psi: TensorField,
    pub f: Poly,
}

/// The `(Ψ, F)` part of the finite action, before any push-forward:
/// `U + γ(Ψ)`, `V + γ(dF)`, `φ + V(F) + ½γ(dF, dF)`.
pub fn shift_fields(s: &NcbFields, psi: &TensorField, f: &Poly) -> Result<NcbFields> {
    let df = TensorField::differential(s.gamma.dim(), f);
    let half = Rational::new(1.into(), 2.into());
    Ok(NcbFields {
        gamma: s.gamma.clone(),
        theta: s.theta.clone(),
        u: s.u.checked_add(&raise(&s.gamma, psi)?)?,
        v: s.v.checked_add(&raise(&s.gamma, &df)?)?,
        phi: &(&s.phi + &s.v.apply(f)) + &contract_forms(&s.gamma, &df, &df)?.scale(&half),
    })
}

/// Applies the `(Ψ, F)` shift, then pushes every field forward by the affine map.
pub fn finite_gauge_apply(s: &NCBStructure, g: &FiniteGauge) -> Result<NCBStructure> {
    let shifted = shift_fields(&NcbFields::of(s), &g.psi, &g.f)?;
    let map = g.diffeo.to_poly_map(s.nvars())?;
    let pushed = map.push_fields(&shifted);
    let base =
        crate::nc::GalileiStructure::with_samples(pushed.gamma, pushed.theta, s.base().sample_points().to_vec())?;
    NCBStructure::from_observer(base, pushed.u, pushed.v, pushed.phi)
}

/// True iff the connection reassembled from `(Ψ, F)`-shifted data equals the original.
pub fn nc_projection_invariance_check(s: &NCBStructure, psi: &TensorField, f: &Poly) -> Result<bool> {
    let shifted = shift_fields(&NcbFields::of(s), psi, f)?;
    let t = NCBStructure::from_observer(s.base().clone(), shifted.u, shifted.v, shifted.phi)?;
    Ok(t.connection() == s.connection())
}
