//! Exact desk-scale algebra for Kakeya problems over `F_q((t))`.
//!
//! Layers, bottom to top: finite fields and polynomials ([`galois`], [`poly`]),
//! truncated series and the rings `R = F_q[t]/t^k` ([`laurent`]), the
//! Lubin–Tate action and its ramified extension ([`lubin_tate`]), discrete
//! Kakeya geometry ([`kakeya`]), the maximal operator ([`maximal`]) and the
//! polynomial method ([`polymethod`]).

pub mod error;
pub mod galois;
pub mod kakeya;
pub mod laurent;
pub mod lubin_tate;
pub mod maximal;
pub mod poly;
pub mod polymethod;
pub mod scalar;
pub mod valuation;

pub use error::{Error, Result};
pub use galois::{Fq, FqElem};
pub use laurent::{enumerate_r, RElem, RSpace, RVector, ResidueRing, TruncSeries};
pub use poly::{Coeff, FieldCoeff, Poly, TElem, TPoly, XPoly};
pub use scalar::Scalar;
pub use valuation::Valuation;

/// Exact rational parameters (`ε`, `ν`, `θ`).
pub type Rational = num_rational::Ratio<i64>;

pub type GridFunctionF64 = maximal::GridFunction<f64>;
pub type GridFunctionExact = maximal::GridFunction<num_rational::BigRational>;
pub type StarFunctionF64 = maximal::StarFunction<f64>;
pub type StarFunctionExact = maximal::StarFunction<num_rational::BigRational>;
