//! Dyadic interval arithmetic with directed rounding, plus certified
//! enclosures for pi and cos of rational multiples of pi.
//!
//! This is the adaptive-precision filter track. Every interval returned here
//! is a true enclosure; callers escalate precision until an interval excludes
//! zero, falling back to the exact cyclotomic track when it never does.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// A dyadic number m * 2^e.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyad {
    pub m: BigInt,
    pub e: i64,
}

impl Dyad {
    pub fn zero() -> Self {
        Dyad { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(i: i64) -> Self {
        Dyad { m: BigInt::from(i), e: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn neg(&self) -> Self {
        Dyad { m: -self.m.clone(), e: self.e }
    }

    /// Round so the mantissa has at most `prec` bits. `up` selects the
    /// rounding direction on the value (toward +inf when true).
    pub fn round(&self, prec: u64, up: bool) -> Self {
        let bits = self.m.bits();
        if bits <= prec {
            return self.clone();
        }
        let shift = bits - prec;
        let q = &self.m >> shift;
        let back = &q << shift;
        let exact = back == self.m;
        let mut q = q;
        if !exact && up {
            q += 1; // q = floor(m/2^s); value rounds up
        }
        Dyad { m: q, e: self.e + shift as i64 }
    }

    fn align(a: &Dyad, b: &Dyad) -> (BigInt, BigInt, i64) {
        let e = a.e.min(b.e);
        let ma = &a.m << (a.e - e) as u64;
        let mb = &b.m << (b.e - e) as u64;
        (ma, mb, e)
    }

    pub fn add(&self, o: &Dyad) -> Self {
        let (ma, mb, e) = Dyad::align(self, o);
        Dyad { m: ma + mb, e }
    }

    pub fn sub(&self, o: &Dyad) -> Self {
        let (ma, mb, e) = Dyad::align(self, o);
        Dyad { m: ma - mb, e }
    }

    pub fn mul(&self, o: &Dyad) -> Self {
        Dyad { m: &self.m * &o.m, e: self.e + o.e }
    }

    pub fn cmp(&self, o: &Dyad) -> std::cmp::Ordering {
        let (ma, mb, _) = Dyad::align(self, o);
        ma.cmp(&mb)
    }

    pub fn sign(&self) -> i32 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Directed-rounding conversion of num/den (den > 0).
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u64, up: bool) -> Self {
        assert!(den.sign() == Sign::Plus);
        if num.is_zero() {
            return Dyad::zero();
        }
        let nb = num.bits() as i64;
        let db = den.bits() as i64;
        // choose shift so the quotient has ~prec+2 bits
        let shift = ((prec as i64 + 2) - (nb - db)).max(0) as u64;
        let scaled = num << shift;
        let (q, r) = num_integer::Integer::div_mod_floor(&scaled, den);
        let q = if up && !r.is_zero() { q + 1 } else { q };
        Dyad { m: q, e: -(shift as i64) }.round(prec, up)
    }

    pub fn to_f64(&self) -> f64 {
        // lossy, for diagnostics only
        let bits = self.m.bits();
        if bits <= 52 {
            let v: f64 = self.m.to_string().parse().unwrap_or(f64::NAN);
            v * 2f64.powi(self.e as i32)
        } else {
            let shift = bits - 52;
            let q = &self.m >> shift;
            let v: f64 = q.to_string().parse().unwrap_or(f64::NAN);
            v * 2f64.powi((self.e + shift as i64) as i32)
        }
    }
}

/// Closed interval [lo, hi] of dyadics; a certified enclosure.
#[derive(Clone, Debug)]
pub struct DyInterval {
    pub lo: Dyad,
    pub hi: Dyad,
}

impl DyInterval {
    pub fn point_int(i: i64) -> Self {
        DyInterval { lo: Dyad::from_int(i), hi: Dyad::from_int(i) }
    }

    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        let (num, den) = (q.numer().clone(), q.denom().clone());
        DyInterval {
            lo: Dyad::from_ratio(&num, &den, prec, false),
            hi: Dyad::from_ratio(&num, &den, prec, true),
        }
    }

    pub fn round(&self, prec: u64) -> Self {
        DyInterval { lo: self.lo.round(prec, false), hi: self.hi.round(prec, true) }
    }

    pub fn add(&self, o: &Self, prec: u64) -> Self {
        DyInterval { lo: self.lo.add(&o.lo), hi: self.hi.add(&o.hi) }.round(prec)
    }

    pub fn sub(&self, o: &Self, prec: u64) -> Self {
        DyInterval { lo: self.lo.sub(&o.hi), hi: self.hi.sub(&o.lo) }.round(prec)
    }

    pub fn neg(&self) -> Self {
        DyInterval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Self, prec: u64) -> Self {
        let cands = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c.cmp(&lo) == std::cmp::Ordering::Less {
                lo = c.clone();
            }
            if c.cmp(&hi) == std::cmp::Ordering::Greater {
                hi = c.clone();
            }
        }
        DyInterval { lo, hi }.round(prec)
    }

    /// Division by an interval that must not contain zero.
    pub fn div(&self, o: &Self, prec: u64) -> Option<Self> {
        if o.lo.sign() <= 0 && o.hi.sign() >= 0 {
            return None;
        }
        // 1/o as rational endpoints via from_ratio with direction
        let inv = |d: &Dyad, up: bool| -> Dyad {
            // 1/(m*2^e) = (1/m) * 2^-e
            let one = BigInt::one();
            let neg = d.m.sign() == Sign::Minus;
            let mabs = d.m.abs();
            let r = Dyad::from_ratio(&one, &mabs, prec, up != neg);
            let r = if neg { r.neg() } else { r };
            Dyad { m: r.m, e: r.e - d.e }
        };
        let rec = DyInterval { lo: inv(&o.hi, false), hi: inv(&o.lo, true) };
        Some(self.mul(&rec, prec))
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.sign() <= 0 && self.hi.sign() >= 0
    }

    pub fn sign(&self) -> Option<i32> {
        if self.lo.sign() > 0 {
            Some(1)
        } else if self.hi.sign() < 0 {
            Some(-1)
        } else if self.lo.sign() == 0 && self.hi.sign() == 0 {
            Some(0)
        } else {
            None
        }
    }

    /// Widen both ends outward by 2^-bits.
    pub fn widen(&self, bits: i64) -> Self {
        let eps = Dyad { m: BigInt::one(), e: -bits };
        DyInterval { lo: self.lo.sub(&eps), hi: self.hi.add(&eps) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

/// atan(1/q) * 2^prec as an integer interval, by the alternating series.
fn atan_inv_scaled(q: u64, prec: u64) -> (BigInt, BigInt) {
    let scale = BigInt::one() << prec;
    let q = BigInt::from(q);
    let q2 = &q * &q;
    let mut denom_pow = q.clone(); // q^(2j+1)
    let mut acc_lo = BigInt::zero();
    let mut acc_hi = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let term = &scale / (&denom_pow * BigInt::from(2 * j + 1));
        if term.is_zero() {
            // truncated tail is below 1 ulp; widen by 1 on the high side
            acc_hi += 1;
            break;
        }
        if j % 2 == 0 {
            // positive term, floor-division underestimates it
            acc_lo += &term;
            acc_hi += &term + 1;
        } else {
            acc_lo -= &term + 1;
            acc_hi -= &term;
        }
        denom_pow *= &q2;
        j += 1;
        if j > prec {
            acc_hi += 1;
            break;
        }
    }
    (acc_lo, acc_hi)
}

static PI_CACHE: Lazy<Mutex<HashMap<u64, DyInterval>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Certified enclosure of pi at roughly `prec` bits (Machin's formula).
pub fn pi_interval(prec: u64) -> DyInterval {
    if let Some(v) = PI_CACHE.lock().unwrap().get(&prec) {
        return v.clone();
    }
    let g = prec + 16;
    let (a5l, a5h) = atan_inv_scaled(5, g);
    let (a239l, a239h) = atan_inv_scaled(239, g);
    // pi = 16 atan(1/5) - 4 atan(1/239)
    let lo = BigInt::from(16) * a5l - BigInt::from(4) * a239h;
    let hi = BigInt::from(16) * a5h - BigInt::from(4) * a239l;
    let v = DyInterval {
        lo: Dyad { m: lo, e: -(g as i64) },
        hi: Dyad { m: hi, e: -(g as i64) },
    }
    .round(prec + 8);
    PI_CACHE.lock().unwrap().insert(prec, v.clone());
    v
}

/// cos of an enclosed angle in [0, pi/2], by Taylor series with certified tail.
fn cos_taylor(theta: &DyInterval, prec: u64) -> DyInterval {
    let mut sum = DyInterval::point_int(1);
    let theta2 = theta.mul(theta, prec + 8);
    let mut term = DyInterval::point_int(1);
    let mut j: u64 = 0;
    loop {
        // term_{j+1} = term_j * theta^2 / ((2j+1)(2j+2))
        j += 1;
        let denom = BigRational::from(BigInt::from((2 * j - 1) * (2 * j)));
        let dinv = DyInterval::from_rational(&(BigRational::one() / denom), prec + 8);
        term = term.mul(&theta2, prec + 8).mul(&dinv, prec + 8);
        if j % 2 == 1 {
            sum = sum.sub(&term, prec + 8);
        } else {
            sum = sum.add(&term, prec + 8);
        }
        // |tail| <= |next term| since theta <= pi/2 < 2 and terms decrease
        let tb = term.hi.round(16, true);
        if tb.sign() <= 0 {
            break;
        }
        let small = {
            // term < 2^-(prec+4)?
            tb.m.bits() as i64 + tb.e < -((prec + 4) as i64)
        };
        if small || j > prec + 64 {
            break;
        }
    }
    // widen by last term magnitude as tail bound
    let tail = term.hi.round(16, true);
    let eps = Dyad { m: tail.m.abs() + 1, e: tail.e };
    DyInterval { lo: sum.lo.sub(&eps), hi: sum.hi.add(&eps) }.round(prec)
}

/// Certified enclosure of cos(k*pi/l), for any integers k, l > 0.
pub fn cos_pi_frac(k: i64, l: u64, prec: u64) -> DyInterval {
    let l = l as i64;
    // reduce k mod 2l into [0, 2l)
    let mut k = k.rem_euclid(2 * l);
    // cos(pi*r) with r = k/l in [0,2): fold to [0,1]
    if k > l {
        k = 2 * l - k;
    }
    // fold [0,1] -> [0,1/2] with sign
    let (k, neg) = if 2 * k > l { (l - k, true) } else { (k, false) };
    if k == 0 {
        let v = DyInterval::point_int(if neg { -1 } else { 1 });
        return v;
    }
    if 2 * k == l {
        return DyInterval::point_int(0);
    }
    let pi = pi_interval(prec + 8);
    let frac = DyInterval::from_rational(
        &BigRational::new(BigInt::from(k), BigInt::from(l)),
        prec + 8,
    );
    let theta = pi.mul(&frac, prec + 8);
    let c = cos_taylor(&theta, prec);
    if neg {
        c.neg()
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_matches_f64() {
        let p = pi_interval(64);
        let (lo, hi) = p.to_f64();
        assert!(lo <= std::f64::consts::PI && std::f64::consts::PI <= hi);
        assert!(hi - lo < 1e-15);
    }

    #[test]
    fn cos_values() {
        for (k, l, want) in [
            (1i64, 3u64, 0.5),
            (1, 4, std::f64::consts::FRAC_1_SQRT_2),
            (1, 7, (std::f64::consts::PI / 7.0).cos()),
            (3, 7, (3.0 * std::f64::consts::PI / 7.0).cos()),
            (6, 7, (6.0 * std::f64::consts::PI / 7.0).cos()),
            (13, 7, (13.0 * std::f64::consts::PI / 7.0).cos()),
        ] {
            let c = cos_pi_frac(k, l, 80);
            let (lo, hi) = c.to_f64();
            assert!(lo <= want + 1e-13 && want - 1e-13 <= hi, "cos({k}pi/{l}): [{lo},{hi}] vs {want}");
            assert!(hi - lo < 1e-14);
        }
    }

    #[test]
    fn interval_division() {
        let a = DyInterval::point_int(1);
        let b = DyInterval::point_int(3);
        let q = a.div(&b, 64).unwrap();
        let (lo, hi) = q.to_f64();
        assert!(lo <= 1.0 / 3.0 + 1e-15 && 1.0 / 3.0 <= hi + 1e-15 && hi - lo < 1e-14);
    }
}
