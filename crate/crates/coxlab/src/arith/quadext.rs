//! Quadratic extensions K(sqrt(disc)) over the real cyclotomic track.
//!
//! Needed for exact roots of the weight quadratics: the discriminant of a
//! determinant polynomial has no cyclotomic square root in general.

use super::cyclotomic::AlgebraicReal;
use num_bigint::BigInt;
use num_rational::BigRational;

/// a + b * sqrt(disc), with disc an exact nonnegative cyclotomic real.
#[derive(Clone, Debug)]
pub struct QuadExt {
    pub a: AlgebraicReal,
    pub b: AlgebraicReal,
    pub disc: AlgebraicReal,
}

impl QuadExt {
    pub fn from_base(a: AlgebraicReal, disc: AlgebraicReal) -> Self {
        QuadExt { a, b: AlgebraicReal::zero(), disc }
    }

    pub fn new(a: AlgebraicReal, b: AlgebraicReal, disc: AlgebraicReal) -> Self {
        QuadExt { a, b, disc }
    }

    pub fn is_zero(&self) -> bool {
        if self.a.is_zero() && self.b.is_zero() {
            return true;
        }
        // a + b sqrt(d) = 0 iff a^2 = b^2 d and signs oppose (or both zero)
        if self.disc.is_zero() {
            return self.a.is_zero();
        }
        let a2 = self.a.mul(&self.a);
        let b2d = self.b.mul(&self.b).mul(&self.disc);
        a2.equals(&b2d) && self.a.sign() * self.b.sign() <= 0 && !(self.a.is_zero() ^ self.b.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(self.disc.equals(&o.disc));
        QuadExt::new(self.a.add(&o.a), self.b.add(&o.b), self.disc.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert!(self.disc.equals(&o.disc));
        QuadExt::new(self.a.sub(&o.a), self.b.sub(&o.b), self.disc.clone())
    }

    pub fn neg(&self) -> Self {
        QuadExt::new(self.a.neg(), self.b.neg(), self.disc.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert!(self.disc.equals(&o.disc));
        let a = self.a.mul(&o.a).add(&self.b.mul(&o.b).mul(&self.disc));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a));
        QuadExt::new(a, b, self.disc.clone())
    }

    pub fn inv(&self) -> Self {
        // (a - b sqrt d) / (a^2 - b^2 d)
        let norm = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(&self.disc));
        assert!(!norm.is_zero(), "division by zero in quadratic extension");
        let ninv = norm.inv();
        QuadExt::new(self.a.mul(&ninv), self.b.neg().mul(&ninv), self.disc.clone())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    /// Exact sign of a + b*sqrt(disc), disc >= 0.
    pub fn sign(&self) -> i32 {
        let sa = self.a.sign();
        if self.b.is_zero() || self.disc.is_zero() {
            return sa;
        }
        let sb = self.b.sign();
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // opposite signs: compare a^2 and b^2 d
        let a2 = self.a.mul(&self.a);
        let b2d = self.b.mul(&self.b).mul(&self.disc);
        match a2.sub(&b2d).sign() {
            0 => 0,
            s if s > 0 => sa,
            _ => sb,
        }
    }

    /// Compare against an exact rational: sign of (self - q).
    pub fn cmp_rational(&self, q: &BigRational) -> i32 {
        let shifted = QuadExt::new(
            self.a.sub(&AlgebraicReal::from_rational(q.clone())),
            self.b.clone(),
            self.disc.clone(),
        );
        shifted.sign()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.disc.to_f64().max(0.0).sqrt()
    }
}

/// Find a rational strictly between two exact values given as QuadExt.
/// Requires lo < hi.
pub fn rational_between(lo: &QuadExt, hi: &QuadExt) -> BigRational {
    // bisection on dyadic mids of a bracketing integer interval
    let mut a = BigRational::from(BigInt::from(lo.to_f64().floor() as i64 - 2));
    let mut b = BigRational::from(BigInt::from(hi.to_f64().ceil() as i64 + 2));
    loop {
        let mid = (&a + &b) / BigRational::from(BigInt::from(2));
        let cl = lo.cmp_rational(&mid);
        let ch = hi.cmp_rational(&mid);
        if cl < 0 && ch > 0 {
            return mid;
        }
        if cl >= 0 {
            // mid <= lo: move right
            a = mid;
        } else {
            b = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> AlgebraicReal {
        AlgebraicReal::rational(n, d)
    }

    #[test]
    fn golden_ratio_sign() {
        // (1 - sqrt5)/2 < 0 < (1 + sqrt5)/2
        let five = AlgebraicReal::from_int(5);
        let lo = QuadExt::new(r(1, 2), r(-1, 2), five.clone());
        let hi = QuadExt::new(r(1, 2), r(1, 2), five.clone());
        assert_eq!(lo.sign(), -1);
        assert_eq!(hi.sign(), 1);
        assert!(lo.mul(&hi).sub(&QuadExt::from_base(r(-1, 1), five.clone())).is_zero());
        let q = rational_between(&lo, &hi);
        assert!(lo.cmp_rational(&q) < 0 && hi.cmp_rational(&q) > 0);
    }

    #[test]
    fn inverse_roundtrip() {
        let five = AlgebraicReal::from_int(5);
        let x = QuadExt::new(r(3, 7), r(-2, 5), five.clone());
        let y = x.inv();
        let one = x.mul(&y);
        assert!(one.sub(&QuadExt::from_base(AlgebraicReal::one(), five)).is_zero());
    }
}
