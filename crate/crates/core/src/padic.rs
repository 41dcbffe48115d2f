//! Capped-precision arithmetic in `Q_p`.
//!
//! A [`PadicNumber`] is `p^val * unit` where the unit is known modulo
//! `p^prec`. Elements indistinguishable from zero carry only an absolute
//! precision bound and report their valuation as [`Valuation::AtLeast`].

use std::cell::RefCell;
use std::cmp::{min, Ordering};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default number of significant base-`p` digits.
pub const DEFAULT_PRECISION: i64 = 120;

/// Valuation of an element known to finite precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Exact(i64),
    /// The element is zero to the tracked precision; its true valuation is
    /// at least this value.
    AtLeast(i64),
}

impl Valuation {
    pub fn exact(self) -> Option<i64> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }

    /// A guaranteed lower bound.
    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    /// `Some(true)` if the valuation is certainly `>= k`, `Some(false)` if
    /// certainly `< k`, `None` if precision does not decide.
    pub fn at_least(self, k: i64) -> Option<bool> {
        match self {
            Valuation::Exact(v) => Some(v >= k),
            Valuation::AtLeast(b) if b >= k => Some(true),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

thread_local! {
    static POWERS: RefCell<HashMap<(u64, i64), BigInt>> = RefCell::new(HashMap::new());
}

/// `p^k` for `k >= 0`, memoized per thread.
pub fn pow_p(p: u64, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    if k == 0 {
        return BigInt::one();
    }
    POWERS.with(|cache| {
        let mut cache = cache.borrow_mut();
        if let Some(v) = cache.get(&(p, k)) {
            return v.clone();
        }
        let v = num_traits::pow(BigInt::from(p), k as usize);
        if cache.len() > 4096 {
            cache.clear();
        }
        cache.insert((p, k), v.clone());
        v
    })
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `n != 0` as `p^v * m` with `p` not dividing `m`.
pub fn split_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(n)` for a nonzero integer, `None` for zero.
pub fn int_valuation(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        None
    } else {
        Some(split_valuation(n, p).0)
    }
}

#[derive(Clone, Debug)]
pub struct PadicNumber {
    p: u64,
    /// Exact valuation for nonzero elements; absolute precision for zero.
    val: i64,
    /// Relative precision in digits; 0 for zero-to-precision elements.
    prec: i64,
    /// In `[0, p^prec)`, coprime to `p` unless zero.
    unit: BigInt,
}

impl PadicNumber {
    /// Zero known modulo `p^abs_prec`.
    pub fn zero(p: u64, abs_prec: i64) -> Self {
        PadicNumber {
            p,
            val: abs_prec,
            prec: 0,
            unit: BigInt::zero(),
        }
    }

    pub fn one(p: u64, prec: i64) -> Self {
        PadicNumber {
            p,
            val: 0,
            prec,
            unit: BigInt::one(),
        }
    }

    pub fn from_integer(n: &BigInt, p: u64, prec: i64) -> Self {
        if n.is_zero() {
            return Self::zero(p, prec);
        }
        let (v, m) = split_valuation(n, p);
        Self::from_parts(p, v, prec, m)
    }

    pub fn from_i64(n: i64, p: u64, prec: i64) -> Self {
        Self::from_integer(&BigInt::from(n), p, prec)
    }

    /// The image of `num/den` in `Q_p` with `prec` significant digits.
    pub fn from_rational(num: &BigInt, den: &BigInt, p: u64, prec: i64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if num.is_zero() {
            return Ok(Self::zero(p, prec));
        }
        let (vn, mn) = split_valuation(num, p);
        let (vd, md) = split_valuation(den, p);
        let modulus = pow_p(p, prec);
        let inv = mod_inverse(&md, &modulus).ok_or(Error::DivisionByZero)?;
        Ok(Self::from_parts(p, vn - vd, prec, mn * inv))
    }

    pub fn from_big_rational(q: &BigRational, p: u64, prec: i64) -> Result<Self> {
        Self::from_rational(q.numer(), q.denom(), p, prec)
    }

    /// Builds `p^val * unit` where `unit` is coprime to `p` (any sign).
    fn from_parts(p: u64, val: i64, prec: i64, unit: BigInt) -> Self {
        debug_assert!(prec >= 0);
        if prec == 0 {
            return Self::zero(p, val);
        }
        let unit = unit.mod_floor(&pow_p(p, prec));
        PadicNumber { p, val, prec, unit }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Zero to the tracked precision.
    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::AtLeast(self.val)
        } else {
            Valuation::Exact(self.val)
        }
    }

    /// Exact valuation for nonzero elements, absolute precision for zero.
    pub fn lower_valuation(&self) -> i64 {
        self.val
    }

    pub fn abs_precision(&self) -> i64 {
        self.val + self.prec
    }

    pub fn rel_precision(&self) -> i64 {
        self.prec
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing p-adic numbers of different primes");
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        self.check_prime(other);
        let abs = min(self.abs_precision(), other.abs_precision());
        let terms: Vec<&Self> = [self, other]
            .into_iter()
            .filter(|x| !x.is_zero() && x.val < abs)
            .collect();
        let Some(v) = terms.iter().map(|x| x.val).min() else {
            return Self::zero(self.p, abs);
        };
        let digits = abs - v;
        let modulus = pow_p(self.p, digits);
        let mut sum = BigInt::zero();
        for t in terms {
            if t.val == v {
                sum += &t.unit;
            } else {
                sum += &t.unit * pow_p(self.p, t.val - v);
            }
        }
        let sum = sum.mod_floor(&modulus);
        if sum.is_zero() {
            return Self::zero(self.p, abs);
        }
        let (k, m) = split_valuation(&sum, self.p);
        PadicNumber {
            p: self.p,
            val: v + k,
            prec: digits - k,
            unit: m,
        }
    }

    pub fn neg_ref(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        PadicNumber {
            p: self.p,
            val: self.val,
            prec: self.prec,
            unit: pow_p(self.p, self.prec) - &self.unit,
        }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        self.check_prime(other);
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Self::zero(self.p, self.val + other.val),
            (true, false) => Self::zero(self.p, self.val + other.val),
            (false, true) => Self::zero(self.p, self.val + other.val),
            (false, false) => {
                let prec = min(self.prec, other.prec);
                let unit = (&self.unit * &other.unit).mod_floor(&pow_p(self.p, prec));
                PadicNumber {
                    p: self.p,
                    val: self.val + other.val,
                    prec,
                    unit,
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "inverting an element that is zero modulo {}^{}",
                self.p, self.val
            )));
        }
        let unit = unit_inverse(&self.unit, self.p, self.prec);
        Ok(PadicNumber {
            p: self.p,
            val: -self.val,
            prec: self.prec,
            unit,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_ref(&other.inv()?))
    }

    /// Multiplication by `p^k`; exact, no precision change.
    pub fn shift(&self, k: i64) -> Self {
        PadicNumber {
            val: self.val + k,
            ..self.clone()
        }
    }

    /// Drops digits at or beyond absolute position `abs`.
    pub fn truncate(&self, abs: i64) -> Self {
        if abs >= self.abs_precision() {
            return self.clone();
        }
        if self.is_zero() || abs <= self.val {
            return Self::zero(self.p, abs);
        }
        Self::from_parts(self.p, self.val, abs - self.val, self.unit.clone())
    }

    /// Residue modulo `p` of an integral element.
    pub fn residue_digit(&self) -> Result<u64> {
        if self.val < 0 && !self.is_zero() {
            return Err(Error::NotIntegral(self.val));
        }
        if self.is_zero() {
            if self.val < 1 {
                return Err(Error::PrecisionExhausted(
                    "residue of imprecise zero".into(),
                ));
            }
            return Ok(0);
        }
        if self.val > 0 {
            return Ok(0);
        }
        Ok((&self.unit % BigInt::from(self.p)).to_u64().unwrap())
    }

    /// Rational representative with the unit taken in the symmetric range
    /// `(-p^prec/2, p^prec/2]`.
    pub fn to_rational(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let modulus = pow_p(self.p, self.prec);
        let mut u = self.unit.clone();
        if &u * 2 > modulus {
            u -= &modulus;
        }
        if self.val >= 0 {
            BigRational::from_integer(u * pow_p(self.p, self.val))
        } else {
            BigRational::new(u, pow_p(self.p, -self.val))
        }
    }

    /// Integer representative in `[0, p^abs)` for integral elements.
    pub fn to_nonnegative_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return if self.val >= 0 {
                Some(BigInt::zero())
            } else {
                None
            };
        }
        if self.val < 0 {
            return None;
        }
        Some(&self.unit * pow_p(self.p, self.val))
    }

    /// True when `self - other` is zero to the joint precision.
    pub fn eq_to_precision(&self, other: &Self) -> bool {
        self.sub_ref(other).is_zero()
    }
}

/// Inverse of a `p`-adic unit modulo `p^k`, by Newton iteration
/// `x -> x (2 - a x)` from the inverse modulo `p`.
pub fn unit_inverse(a: &BigInt, p: u64, k: i64) -> BigInt {
    let a0 = a
        .mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits");
    let mut x = BigInt::from(inverse_mod_prime(a0, p));
    let mut j = 1;
    while j < k {
        j = min(2 * j, k);
        let m = pow_p(p, j);
        let ax = (a.mod_floor(&m) * &x).mod_floor(&m);
        x = (&x * (BigInt::from(2) - ax)).mod_floor(&m);
    }
    x.mod_floor(&pow_p(p, k))
}

fn inverse_mod_prime(a: u64, p: u64) -> u64 {
    // a^(p-2) mod p
    let (mut base, mut e, mut acc) = (a as u128 % p as u128, p - 2, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let a = a.mod_floor(m);
    let ext = a.extended_gcd(m);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(m))
}

impl PartialEq for PadicNumber {
    /// Representation equality, including precision.
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.val == other.val
            && self.prec == other.prec
            && self.unit == other.unit
    }
}

impl Eq for PadicNumber {}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.val);
        }
        let q = self.to_rational();
        write!(f, "{} + O({}^{})", q, self.p, self.abs_precision())
    }
}

impl<'a> Add<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: &'a PadicNumber) -> PadicNumber {
        self.add_ref(rhs)
    }
}

impl<'a> Sub<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: &'a PadicNumber) -> PadicNumber {
        self.sub_ref(rhs)
    }
}

impl<'a> Mul<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: &'a PadicNumber) -> PadicNumber {
        self.mul_ref(rhs)
    }
}

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.neg_ref()
    }
}

/// Orders valuations treating zero-to-precision as larger than any exact
/// valuation; used to choose pivots.
pub fn pivot_order(a: &PadicNumber, b: &PadicNumber) -> Ordering {
    match (a.is_zero(), b.is_zero()) {
        (false, false) => a.val.cmp(&b.val),
        (false, true) => Ordering::Less,
        (true, false) => Ordering::Greater,
        (true, true) => Ordering::Equal,
    }
}

/// Sign-aware helper used by serializers: `n` as a decimal string.
pub fn int_to_string(n: &BigInt) -> String {
    match n.sign() {
        Sign::Minus => format!("-{}", n.abs()),
        _ => n.to_string(),
    }
}
