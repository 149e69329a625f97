//! Polynomials of degree <= 2 in the dotted-edge weight w, with exact
//! cyclotomic coefficients, and exact root extraction on the ray w < -1.

use super::cyclotomic::AlgebraicReal;
use super::quadext::QuadExt;
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// c0 + c1*w + c2*w^2.
#[derive(Clone, Debug)]
pub struct WeightPoly {
    pub c0: AlgebraicReal,
    pub c1: AlgebraicReal,
    pub c2: AlgebraicReal,
}

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    IdenticallyZero,
}

impl WeightPoly {
    pub fn constant(c: AlgebraicReal) -> Self {
        WeightPoly { c0: c, c1: AlgebraicReal::zero(), c2: AlgebraicReal::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(AlgebraicReal::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero() && self.c2.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.c1.is_zero() && self.c2.is_zero()
    }

    pub fn degree(&self) -> usize {
        if !self.c2.is_zero() {
            2
        } else if !self.c1.is_zero() {
            1
        } else {
            0
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        WeightPoly { c0: self.c0.add(&o.c0), c1: self.c1.add(&o.c1), c2: self.c2.add(&o.c2) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        WeightPoly { c0: self.c0.sub(&o.c0), c1: self.c1.sub(&o.c1), c2: self.c2.sub(&o.c2) }
    }

    pub fn neg(&self) -> Self {
        WeightPoly { c0: self.c0.neg(), c1: self.c1.neg(), c2: self.c2.neg() }
    }

    /// Product, asserting the result stays within degree 2.
    pub fn mul(&self, o: &Self) -> Self {
        let d = self.degree() + o.degree();
        assert!(d <= 2, "weight-poly product exceeds degree 2");
        let c0 = self.c0.mul(&o.c0);
        let c1 = self.c0.mul(&o.c1).add(&self.c1.mul(&o.c0));
        let c2 = self
            .c0
            .mul(&o.c2)
            .add(&self.c1.mul(&o.c1))
            .add(&self.c2.mul(&o.c0));
        WeightPoly { c0, c1, c2 }
    }

    pub fn scale(&self, s: &AlgebraicReal) -> Self {
        WeightPoly { c0: self.c0.mul(s), c1: self.c1.mul(s), c2: self.c2.mul(s) }
    }

    pub fn eval_rational(&self, w: &BigRational) -> AlgebraicReal {
        let wa = AlgebraicReal::from_rational(w.clone());
        self.c0.add(&self.c1.mul(&wa)).add(&self.c2.mul(&wa).mul(&wa))
    }

    pub fn eval_quadext(&self, w: &QuadExt) -> QuadExt {
        let d = w.disc.clone();
        let c0 = QuadExt::from_base(self.c0.clone(), d.clone());
        let c1 = QuadExt::from_base(self.c1.clone(), d.clone());
        let c2 = QuadExt::from_base(self.c2.clone(), d);
        c0.add(&c1.mul(w)).add(&c2.mul(w).mul(w))
    }

    pub fn equals(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    /// All real roots with w < -1, exactly represented. Errors when the
    /// polynomial vanishes identically.
    pub fn roots_in_ray(&self) -> Result<Vec<QuadExt>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::IdenticallyZero);
        }
        let minus_one = BigRational::from(BigInt::from(-1));
        let mut roots: Vec<QuadExt> = Vec::new();
        if self.c2.is_zero() {
            if self.c1.is_zero() {
                return Ok(vec![]); // nonzero constant
            }
            // root = -c0/c1
            let r = self.c0.neg().div(&self.c1);
            roots.push(QuadExt::from_base(r, AlgebraicReal::zero()));
        } else {
            let four = AlgebraicReal::from_int(4);
            let disc = self.c1.mul(&self.c1).sub(&four.mul(&self.c0).mul(&self.c2));
            match disc.sign() {
                s if s < 0 => return Ok(vec![]),
                0 => {
                    let two_c2 = self.c2.add(&self.c2);
                    let r = self.c1.neg().div(&two_c2);
                    roots.push(QuadExt::from_base(r, AlgebraicReal::zero()));
                }
                _ => {
                    let two_c2 = self.c2.add(&self.c2);
                    let inv = two_c2.inv();
                    let a = self.c1.neg().mul(&inv);
                    let b = inv;
                    // roots a +- b*sqrt(disc)
                    roots.push(QuadExt::new(a.clone(), b.clone(), disc.clone()));
                    roots.push(QuadExt::new(a, b.neg(), disc));
                }
            }
        }
        let mut out: Vec<QuadExt> = roots
            .into_iter()
            .filter(|r| r.cmp_rational(&minus_one) < 0)
            .collect();
        // sort ascending, dedup
        out.sort_by(|x, y| match x.sub(y).sign() {
            s if s < 0 => std::cmp::Ordering::Less,
            0 => std::cmp::Ordering::Equal,
            _ => std::cmp::Ordering::Greater,
        });
        out.dedup_by(|x, y| x.sub(y).is_zero());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> AlgebraicReal {
        AlgebraicReal::from_int(n)
    }

    #[test]
    fn boundary_roots_excluded() {
        // 1 - w^2: roots +-1, neither < -1
        let p = WeightPoly { c0: r(1), c1: r(0), c2: r(-1) };
        assert!(p.roots_in_ray().unwrap().is_empty());
    }

    #[test]
    fn triangle_33dotted() {
        // -w^2 + w/2 + 1/2: roots 1 and -1/2
        let p = WeightPoly {
            c0: AlgebraicReal::rational(1, 2),
            c1: AlgebraicReal::rational(1, 2),
            c2: r(-1),
        };
        assert!(p.roots_in_ray().unwrap().is_empty());
    }

    #[test]
    fn filtered_root() {
        // (w+2)(w-1) = w^2 + w - 2: roots -2, 1 -> keep -2
        let p = WeightPoly { c0: r(-2), c1: r(1), c2: r(1) };
        let roots = p.roots_in_ray().unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(
            roots[0].cmp_rational(&BigRational::from(BigInt::from(-2))),
            0
        );
    }

    #[test]
    fn identically_zero_error() {
        assert!(WeightPoly::zero().roots_in_ray().is_err());
    }

    #[test]
    fn irrational_roots() {
        // w^2 - 5: roots +-sqrt5; -sqrt5 < -1
        let p = WeightPoly { c0: r(-5), c1: r(0), c2: r(1) };
        let roots = p.roots_in_ray().unwrap();
        assert_eq!(roots.len(), 1);
        let v = p.eval_quadext(&roots[0]);
        assert!(v.is_zero());
        assert!(roots[0].to_f64() + 5f64.sqrt() < 1e-9);
    }
}
