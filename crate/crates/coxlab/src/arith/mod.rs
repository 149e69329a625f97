//! Certified exact arithmetic: real cyclotomic numbers, their quadratic
//! extensions, dyadic interval filters, and weight polynomials.
//!
//! Two tracks cooperate everywhere: a dyadic interval filter with adaptive
//! precision for throughput, and exact cyclotomic arithmetic as the decision
//! procedure. Signs are always decided exactly.

pub mod cyclotomic;
pub mod dyadic;
pub mod poly;
pub mod quadext;

pub use cyclotomic::AlgebraicReal;
pub use dyadic::{cos_pi_frac, pi_interval, DyInterval, Dyad};
pub use poly::{PolyError, WeightPoly};
pub use quadext::{rational_between, QuadExt};

use num_rational::BigRational;

/// Exact sign of an algebraic real.
pub fn sign_of(a: &AlgebraicReal) -> i32 {
    a.sign()
}

/// cos(pi/m) as an exact algebraic real.
pub fn cos_pi_over(m: u64) -> AlgebraicReal {
    AlgebraicReal::cos_pi_over(m)
}

/// Exact value of a sampled point as a QuadExt over a trivial extension.
pub fn quadext_of_rational(q: BigRational) -> QuadExt {
    QuadExt::from_base(AlgebraicReal::from_rational(q), AlgebraicReal::zero())
}
