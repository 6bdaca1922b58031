//! Exact scalar arithmetic: arbitrary-precision rationals and prime fields.
//!
//! A [`Field`] value is a lightweight descriptor (the rationals carry no
//! state, a prime field carries its modulus) whose associated `Elem` type is
//! the element representation.  All arithmetic is exact; there are no
//! floating-point scalars anywhere in this crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::error::Error;

/// An exact field of scalars.
///
/// Implementations guarantee exact arithmetic and a canonical representation
/// for every element, so `==` is semantic equality and serialization is
/// deterministic.
pub trait Field: Clone + PartialEq + Debug {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` exactly on zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, n: i64) -> Self::Elem;

    /// Prime modulus for finite fields, `None` in characteristic zero.
    fn modulus(&self) -> Option<u32>;

    /// Lift to a quotient of big integers, available in characteristic zero.
    /// Fraction-free elimination uses this to work over cleared denominators.
    fn as_big_ratio(&self, a: &Self::Elem) -> Option<(BigInt, BigInt)>;
    fn from_big_ratio(&self, num: BigInt, den: BigInt) -> Self::Elem;

    /// Canonical text form; parseable back by [`Field::parse`].
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem, Error>;

    /// Uniform-ish sample for randomized checks.  Over a prime field the
    /// distribution is uniform; over the rationals it draws small fractions.
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Elem;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    /// `a + c*b` fused update, the inner loop of elimination.
    fn axpy(&self, a: &Self::Elem, c: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.mul(c, b))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    fn dot(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Self::Elem {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = self.zero();
        for (x, y) in a.iter().zip(b) {
            acc = self.axpy(&acc, x, y);
        }
        acc
    }
}

/// The field of rational numbers with arbitrary-precision representation.
///
/// Elements are kept in lowest terms with positive denominator (the
/// `BigRational` normal form), so equality and formatting are canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn modulus(&self) -> Option<u32> {
        None
    }

    fn as_big_ratio(&self, a: &BigRational) -> Option<(BigInt, BigInt)> {
        Some((a.numer().clone(), a.denom().clone()))
    }

    fn from_big_ratio(&self, num: BigInt, den: BigInt) -> BigRational {
        debug_assert!(!den.is_zero());
        BigRational::new(num, den)
    }

    fn format(&self, a: &BigRational) -> String {
        use alloc::format;
        format!("{}/{}", a.numer(), a.denom())
    }

    fn parse(&self, s: &str) -> Result<BigRational, Error> {
        let bad = || Error::BadScalar(String::from(s));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(num, den))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> BigRational {
        // Small fractions: numerator in [-9, 9], denominator in {1, 2, 3}.
        let num = (rng.next_u32() % 19) as i64 - 9;
        let den = (rng.next_u32() % 3) as i64 + 1;
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// The prime field with `q` elements, `q` a prime below `2^31`.
///
/// Elements are residues in `[0, q)` stored as `u32`; products go through
/// `u64` so they never overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    /// Panics if `q` is not a prime below `2^31`; the modulus comes from
    /// validated configuration, not runtime data.
    pub fn new(q: u32) -> Self {
        assert!(q >= 2 && q < (1 << 31), "modulus out of range");
        assert!(is_prime(q), "modulus {q} is not prime");
        PrimeField { q }
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    fn reduce_i64(&self, n: i64) -> u32 {
        n.rem_euclid(self.q as i64) as u32
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    let n = n as u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }

    fn one(&self) -> u32 {
        1 % self.q
    }

    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }

    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = *a as u64 + *b as u64;
        (s % self.q as u64) as u32
    }

    fn sub(&self, a: &u32, b: &u32) -> u32 {
        let s = *a as u64 + (self.q - *b) as u64;
        (s % self.q as u64) as u32
    }

    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.q - *a
        }
    }

    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.q as u64) as u32
    }

    fn inv(&self, a: &u32) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        // Extended Euclid on (a, q); q is prime so the gcd is 1.
        let (mut r0, mut r1) = (*a as i64, self.q as i64);
        let (mut s0, mut s1) = (1i64, 0i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (s0, s1) = (s1, s0 - quot * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce_i64(s0))
    }

    fn from_i64(&self, n: i64) -> u32 {
        self.reduce_i64(n)
    }

    fn modulus(&self) -> Option<u32> {
        Some(self.q)
    }

    fn as_big_ratio(&self, _a: &u32) -> Option<(BigInt, BigInt)> {
        None
    }

    fn from_big_ratio(&self, num: BigInt, den: BigInt) -> u32 {
        let q = BigInt::from(self.q);
        let n = ((num % &q) + &q) % &q;
        let d = ((den % &q) + &q) % &q;
        let n: u32 = n.try_into().unwrap();
        let d: u32 = d.try_into().unwrap();
        let di = self.inv(&d).expect("denominator divisible by modulus");
        self.mul(&n, &di)
    }

    fn format(&self, a: &u32) -> String {
        use alloc::format;
        format!("{a}")
    }

    fn parse(&self, s: &str) -> Result<u32, Error> {
        let n: i64 = s
            .parse()
            .map_err(|_| Error::BadScalar(String::from(s)))?;
        Ok(self.reduce_i64(n))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> u32 {
        // Rejection sampling for exact uniformity over [0, q).
        let q = self.q as u64;
        let bound = (u64::from(u32::MAX) + 1) / q * q;
        loop {
            let r = rng.next_u32() as u64;
            if r < bound {
                return (r % q) as u32;
            }
        }
    }
}

/// Formats a vector of field elements, space separated.
pub fn format_vec<F: Field>(field: &F, v: &[F::Elem]) -> String {
    let parts: Vec<String> = v.iter().map(|e| field.format(e)).collect();
    parts.join(" ")
}
