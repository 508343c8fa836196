//! Exact field scalars: arbitrary-precision rationals and prime fields Z/p.
//!
//! Every scalar knows which field it lives in; arithmetic between scalars of
//! different fields is a programming error and panics. The field is chosen at
//! runtime (`FieldSpec`), so the same computation can be run over Q for exact
//! answers and over a prime field as a fast cross-check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Runtime choice of coefficient field.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum FieldSpec {
    /// Arbitrary-precision rational numbers.
    Rational,
    /// Integers modulo an odd prime `p` (with `2 < p < 2^31`).
    Fp(u64),
}

impl FieldSpec {
    /// Parse a field description as used on the command line:
    /// `"rational"` or `"fp:P"` with `P` a prime below `2^31`.
    pub fn parse(s: &str) -> Result<FieldSpec, String> {
        if s == "rational" {
            return Ok(FieldSpec::Rational);
        }
        if let Some(rest) = s.strip_prefix("fp:") {
            let p: u64 = rest
                .parse()
                .map_err(|_| format!("invalid prime in field spec '{s}'"))?;
            if !(2..1 << 31).contains(&p) {
                return Err(format!("field characteristic {p} out of range (2..2^31)"));
            }
            if !is_prime(p) {
                return Err(format!("field characteristic {p} is not prime"));
            }
            return Ok(FieldSpec::Fp(p));
        }
        Err(format!("unknown field '{s}' (expected 'rational' or 'fp:P')"))
    }

    pub fn zero(&self) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rat(BigRational::zero()),
            FieldSpec::Fp(p) => Scalar::Fp { v: 0, p },
        }
    }

    pub fn one(&self) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rat(BigRational::one()),
            FieldSpec::Fp(p) => Scalar::Fp { v: 1, p },
        }
    }

    /// Embed a small integer into the field.
    pub fn integer(&self, v: i64) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            FieldSpec::Fp(p) => {
                let m = v.rem_euclid(p as i64) as u64;
                Scalar::Fp { v: m, p }
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of the coefficient field.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp { v: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Rational,
            Scalar::Fp { p, .. } => FieldSpec::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    /// True for coefficients that make the cheapest elimination pivots:
    /// `1` or `-1` (over a prime field, `1` or `p - 1`).
    pub fn is_pm_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.numer().abs().is_one() && r.denom().is_one(),
            Scalar::Fp { v, p } => *v == 1 || *v + 1 == *p,
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r.clone()),
            Scalar::Fp { v, p } => Scalar::Fp {
                v: if *v == 0 { 0 } else { p - v },
                p: *p,
            },
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) => {
                assert_eq!(p, q, "scalars from different prime fields");
                Scalar::Fp { v: (a + b) % p, p: *p }
            }
            _ => panic!("scalars from different fields"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) => {
                assert_eq!(p, q, "scalars from different prime fields");
                Scalar::Fp { v: (a * b) % p, p: *p }
            }
            _ => panic!("scalars from different fields"),
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => {
                assert!(!r.is_zero(), "inverse of zero");
                Scalar::Rat(r.recip())
            }
            Scalar::Fp { v, p } => {
                assert!(*v != 0, "inverse of zero");
                Scalar::Fp { v: mod_inverse(*v, *p), p: *p }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

/// Inverse of `a` modulo the prime `p`, by the extended Euclidean algorithm.
fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "{a} is not invertible mod {p}");
    old_s.rem_euclid(p as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_spec_parsing() {
        assert_eq!(FieldSpec::parse("rational").unwrap(), FieldSpec::Rational);
        assert_eq!(FieldSpec::parse("fp:32003").unwrap(), FieldSpec::Fp(32003));
        assert!(FieldSpec::parse("fp:32004").is_err()); // composite
        assert!(FieldSpec::parse("fp:1").is_err());
        assert!(FieldSpec::parse("real").is_err());
        assert!(FieldSpec::parse("fp:x").is_err());
    }

    #[test]
    fn rational_arithmetic() {
        let f = FieldSpec::Rational;
        let half = f.integer(1).div(&f.integer(2));
        let third = f.integer(1).div(&f.integer(3));
        let sum = half.add(&third);
        assert_eq!(sum, f.integer(5).div(&f.integer(6)));
        assert!(sum.sub(&sum).is_zero());
        assert!(sum.mul(&sum.inv()).is_one());
        assert!(f.integer(-1).is_pm_one());
        assert!(!half.is_pm_one());
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = FieldSpec::Fp(32003);
        let a = f.integer(-7);
        assert_eq!(a, f.integer(31996));
        assert!(a.mul(&a.inv()).is_one());
        assert!(f.integer(-1).is_pm_one());
        assert!(f.integer(2).inv().mul(&f.integer(2)).is_one());
        // every nonzero element has an inverse
        for v in 1..100 {
            let x = f.integer(v);
            assert!(x.mul(&x.inv()).is_one());
        }
    }

    #[test]
    #[should_panic(expected = "different fields")]
    fn mixed_field_panics() {
        let a = FieldSpec::Rational.one();
        let b = FieldSpec::Fp(5).one();
        let _ = a.add(&b);
    }
}
