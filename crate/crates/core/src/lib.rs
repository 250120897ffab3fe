//! Exact Newton-Cartan geometry.
//!
//! Everything is computed over polynomials with exact rational coefficients:
//! Galilei and Newton-Cartan(-Bargmann) structures, their Coriolis, Milne and
//! Galilei symmetry algebras (solved as nullspaces over degree-bounded
//! polynomial ansätze), the Newtonian gauge action, and the extended algebras
//! including the Bargmann central extension.

pub mod error;
pub mod extensions;
pub mod gauge;
pub mod linalg;
pub mod nc;
pub mod poly;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
pub use poly::Poly;

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;
