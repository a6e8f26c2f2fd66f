//! Truncated digit expansions in K.
//!
//! A nonzero value is stored as `π^v · u` where `u` is a unit of O_K given
//! by its coefficient vector in the basis `1, X, .., X^{f-1}` of
//! `Z_p[X]/(h)`. Since `π = p`, the base-`p` digits of the coefficients are
//! exactly the digit expansion of the value, digit `i` being the residue
//! encoding `Σ_j c_{j,i} p^j`.
//!
//! Precision is relative: an inexact value knows `rel` digits starting at
//! its valuation. Exact values carry integer coefficients without bound.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{poly_mul_reduce, rational_pow, LocalField, DEFAULT_PRECISION};
use crate::error::FieldError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Zero,
    /// Congruent to zero modulo `π^N`; nothing beyond that is known.
    ZeroTo(i64),
    Value {
        val: i64,
        unit: Vec<BigInt>,
        rel: Option<u32>,
    },
}

#[derive(Clone)]
pub struct PAdicNumber {
    field: LocalField,
    kind: Kind,
}

impl PartialEq for PAdicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.kind == other.kind
    }
}

impl Eq for PAdicNumber {}

fn p_pow(p: u32, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), n as usize)
}

/// p-adic valuation of a nonzero integer.
fn vp(x: &BigInt, p: &BigInt) -> u32 {
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

impl PAdicNumber {
    pub fn zero(field: &LocalField) -> Self {
        Self { field: field.clone(), kind: Kind::Zero }
    }

    /// A value known only to be divisible by `π^n`.
    pub fn zero_to(field: &LocalField, n: i64) -> Self {
        Self { field: field.clone(), kind: Kind::ZeroTo(n) }
    }

    pub fn one(field: &LocalField) -> Self {
        Self::from_int(field, 1)
    }

    /// Exact rational integer.
    pub fn from_int(field: &LocalField, n: i64) -> Self {
        let mut c = vec![BigInt::zero(); field.f() as usize];
        c[0] = BigInt::from(n);
        Self::from_coefficients(field, 0, c, None)
    }

    /// Exact `π^n`.
    pub fn pi_power(field: &LocalField, n: i64) -> Self {
        Self::from_int(field, 1).shift(n)
    }

    /// Inexact value `π^valuation · Σ_i digits[i] π^i` known to `digits.len()`
    /// digits past `valuation`, i.e. to absolute precision
    /// `valuation + digits.len()`. Leading zero digits are allowed.
    pub fn from_digits(field: &LocalField, valuation: i64, digits: &[u32]) -> Result<Self, FieldError> {
        let coeffs = digits_to_coefficients(field, digits)?;
        let abs = valuation + digits.len() as i64;
        Ok(Self::from_coefficients(field, valuation, coeffs, Some(abs)))
    }

    /// Exact value with the given finite digit expansion.
    pub fn exact_from_digits(field: &LocalField, valuation: i64, digits: &[u32]) -> Result<Self, FieldError> {
        let coeffs = digits_to_coefficients(field, digits)?;
        Ok(Self::from_coefficients(field, valuation, coeffs, None))
    }

    /// Normalizes `π^v0 · c` with an optional absolute precision.
    fn from_coefficients(field: &LocalField, v0: i64, mut c: Vec<BigInt>, abs: Option<i64>) -> Self {
        let p = field.p();
        if let Some(n) = abs {
            if n <= v0 {
                return Self::zero_to(field, n);
            }
            let m = p_pow(p, (n - v0) as u32);
            for x in c.iter_mut() {
                *x = x.mod_floor(&m);
            }
        }
        if c.iter().all(|x| x.is_zero()) {
            return match abs {
                Some(n) => Self::zero_to(field, n),
                None => Self::zero(field),
            };
        }
        let pb = BigInt::from(p);
        let w = c.iter().filter(|x| !x.is_zero()).map(|x| vp(x, &pb)).min().unwrap();
        if w > 0 {
            let d = p_pow(p, w);
            for x in c.iter_mut() {
                *x /= &d;
            }
        }
        let val = v0 + w as i64;
        let rel = abs.map(|n| (n - val) as u32);
        Self { field: field.clone(), kind: Kind::Value { val, unit: c, rel } }
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    /// True for exact zero and for values that are zero to their precision.
    pub fn is_zero(&self) -> bool {
        !matches!(self.kind, Kind::Value { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, Kind::Zero | Kind::Value { rel: None, .. })
    }

    /// Valuation of a nonzero value; `None` for any kind of zero.
    pub fn valuation(&self) -> Option<i64> {
        match self.kind {
            Kind::Value { val, .. } => Some(val),
            _ => None,
        }
    }

    /// Number of significant digits, `None` when exact.
    pub fn precision(&self) -> Option<u32> {
        match self.kind {
            Kind::Value { rel, .. } => rel,
            Kind::ZeroTo(_) => Some(0),
            Kind::Zero => None,
        }
    }

    /// Absolute precision `N` such that the value is known modulo `π^N`.
    pub fn absolute_precision(&self) -> Option<i64> {
        match self.kind {
            Kind::Value { val, rel, .. } => rel.map(|r| val + r as i64),
            Kind::ZeroTo(n) => Some(n),
            Kind::Zero => None,
        }
    }

    /// Significant digits starting at the valuation. Exact values with a
    /// finite expansion give exactly that expansion; exact values whose
    /// expansion is infinite (negative integers, say) are cut at the
    /// default precision.
    pub fn digits(&self) -> Vec<u32> {
        match &self.kind {
            Kind::Value { unit, rel: Some(r), .. } => coefficients_to_digits(&self.field, unit, *r as usize),
            Kind::Value { unit, rel: None, .. } => {
                if unit.iter().all(|c| !c.is_negative()) {
                    let mut out = Vec::new();
                    let mut c = unit.clone();
                    let p = BigInt::from(self.field.p());
                    while c.iter().any(|x| !x.is_zero()) {
                        out.push(pop_digit(&mut c, &p));
                    }
                    out
                } else {
                    coefficients_to_digits(&self.field, unit, DEFAULT_PRECISION)
                }
            }
            _ => Vec::new(),
        }
    }

    /// First `n` digits of the unit part (zero-padded past the precision).
    pub fn digits_to(&self, n: usize) -> Vec<u32> {
        match &self.kind {
            Kind::Value { unit, .. } => coefficients_to_digits(&self.field, unit, n),
            _ => vec![0; n],
        }
    }

    pub fn leading_digit(&self) -> Option<u32> {
        match &self.kind {
            Kind::Value { unit, .. } => Some(coefficients_to_digits(&self.field, unit, 1)[0]),
            _ => None,
        }
    }

    /// `|x| = t^{v(x)}` as an exact rational; an inexact zero is an error.
    pub fn norm(&self) -> Result<BigRational, FieldError> {
        match self.kind {
            Kind::Zero => Ok(BigRational::zero()),
            Kind::ZeroTo(n) => Err(FieldError::InexactZero(n)),
            Kind::Value { val, .. } => Ok(rational_pow(&self.field.t(), val)),
        }
    }

    /// Multiplication by `π^n`.
    pub fn shift(&self, n: i64) -> Self {
        let kind = match &self.kind {
            Kind::Zero => Kind::Zero,
            Kind::ZeroTo(m) => Kind::ZeroTo(m + n),
            Kind::Value { val, unit, rel } => Kind::Value { val: val + n, unit: unit.clone(), rel: *rel },
        };
        Self { field: self.field.clone(), kind }
    }

    /// The unit part `π^{-v(x)} x`.
    pub fn unit_part(&self) -> Option<Self> {
        self.valuation().map(|v| self.shift(-v))
    }

    /// Representative of the class of `x` modulo `q^Z` with `q = π^{vq}`,
    /// having valuation in `0..vq`.
    pub fn reduce_to_annulus(&self, vq: i64) -> Result<Self, FieldError> {
        if vq <= 0 {
            return Err(FieldError::InvalidArgument(format!("vq must be positive, got {vq}")));
        }
        match self.valuation() {
            None => Err(FieldError::InvalidArgument("cannot reduce zero to the annulus".into())),
            Some(v) => Ok(self.shift(v.rem_euclid(vq) - v)),
        }
    }

    /// Truncate to absolute precision `n`.
    pub fn with_absolute_precision(&self, n: i64) -> Self {
        match &self.kind {
            Kind::Zero => Self::zero_to(&self.field, n),
            Kind::ZeroTo(m) => Self::zero_to(&self.field, n.min(*m)),
            Kind::Value { val, unit, rel } => {
                let cur = rel.map(|r| val + r as i64);
                let n = cur.map_or(n, |c| c.min(n));
                Self::from_coefficients(&self.field, *val, unit.clone(), Some(n))
            }
        }
    }

    fn check_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch(
                format!("{:?}", self.field),
                format!("{:?}", other.field),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        let (va, ca, na) = self.parts();
        let (vb, cb, nb) = other.parts();
        let abs = match (na, nb) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        let (ca, cb) = match (ca, cb) {
            (None, None) => {
                return Ok(match abs {
                    Some(n) => Self::zero_to(&self.field, n),
                    None => Self::zero(&self.field),
                })
            }
            (Some(c), None) => return Ok(Self::from_coefficients(&self.field, va, c.clone(), abs)),
            (None, Some(c)) => return Ok(Self::from_coefficients(&self.field, vb, c.clone(), abs)),
            (Some(a), Some(b)) => (a, b),
        };
        let v0 = va.min(vb);
        let p = self.field.p();
        let sa = p_pow(p, (va - v0) as u32);
        let sb = p_pow(p, (vb - v0) as u32);
        let c = ca.iter().zip(cb).map(|(x, y)| x * &sa + y * &sb).collect();
        Ok(Self::from_coefficients(&self.field, v0, c, abs))
    }

    /// `(valuation, unit coefficients, absolute precision)`; zeros have no unit.
    fn parts(&self) -> (i64, Option<&Vec<BigInt>>, Option<i64>) {
        match &self.kind {
            Kind::Zero => (0, None, None),
            Kind::ZeroTo(n) => (*n, None, Some(*n)),
            Kind::Value { val, unit, rel } => (*val, Some(unit), rel.map(|r| val + r as i64)),
        }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.try_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        match &self.kind {
            Kind::Value { val, unit, rel } => {
                let c = unit.iter().map(|x| -x).collect();
                let abs = rel.map(|r| val + r as i64);
                Self::from_coefficients(&self.field, *val, c, abs)
            }
            _ => self.clone(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        let field = &self.field;
        Ok(match (&self.kind, &other.kind) {
            (Kind::Zero, _) | (_, Kind::Zero) => Self::zero(field),
            (Kind::ZeroTo(a), Kind::ZeroTo(b)) => Self::zero_to(field, a + b),
            (Kind::ZeroTo(n), Kind::Value { val, .. }) | (Kind::Value { val, .. }, Kind::ZeroTo(n)) => {
                Self::zero_to(field, n + val)
            }
            (Kind::Value { val: va, unit: ua, rel: ra }, Kind::Value { val: vb, unit: ub, rel: rb }) => {
                let rel = match (ra, rb) {
                    (Some(a), Some(b)) => Some(*a.min(b)),
                    (a, None) => *a,
                    (None, b) => *b,
                };
                let c = poly_mul_reduce(ua, ub, field.modulus());
                let val = va + vb;
                Self::from_coefficients(field, val, c, rel.map(|r| val + r as i64))
            }
        })
    }

    /// Multiplicative inverse. Inexact inputs keep their relative
    /// precision; exact inputs other than `±π^n` are inverted to the
    /// default precision.
    pub fn inv(&self) -> Result<Self, FieldError> {
        match &self.kind {
            Kind::Value { rel: None, unit, val } if is_plus_minus_one(unit) => Ok(Self {
                field: self.field.clone(),
                kind: Kind::Value { val: -val, unit: unit.clone(), rel: None },
            }),
            Kind::Value { rel, .. } => self.inv_to(rel.unwrap_or(DEFAULT_PRECISION as u32)),
            _ => Err(FieldError::InverseOfZero),
        }
    }

    /// Inverse to `r` significant digits (capped by the input precision).
    pub fn inv_to(&self, r: u32) -> Result<Self, FieldError> {
        let (val, unit, rel) = match &self.kind {
            Kind::Value { val, unit, rel } => (*val, unit, *rel),
            _ => return Err(FieldError::InverseOfZero),
        };
        let r = rel.map_or(r, |x| x.min(r));
        let field = &self.field;
        let p = field.p();
        let f = field.f() as usize;
        let residue = field.residue_field();
        let lead = coefficients_to_digits(field, unit, 1)[0];
        let seed = residue.inv(lead);
        let mut y = digits_to_coefficients(field, &[seed])?;
        let two = {
            let mut c = vec![BigInt::zero(); f];
            c[0] = BigInt::from(2);
            c
        };
        let mut prec = 1u32;
        while prec < r {
            prec = (2 * prec).min(r);
            let m = p_pow(p, prec);
            let uy = poly_mul_reduce(unit, &y, field.modulus());
            let corr: Vec<BigInt> = two.iter().zip(&uy).map(|(a, b)| a - b).collect();
            y = poly_mul_reduce(&y, &corr, field.modulus()).into_iter().map(|x| x.mod_floor(&m)).collect();
        }
        Ok(Self::from_coefficients(field, -val, y, Some(-val + r as i64)))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, FieldError> {
        self.try_mul(&other.inv()?)
    }

    /// Integer power, negative exponents via the inverse.
    pub fn pow(&self, n: i64) -> Result<Self, FieldError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(&self.field);
        let mut b = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&b)?;
            }
            e >>= 1;
            if e > 0 {
                b = b.try_mul(&b)?;
            }
        }
        Ok(acc)
    }
}

fn is_plus_minus_one(unit: &[BigInt]) -> bool {
    unit[1..].iter().all(|c| c.is_zero()) && (unit[0].is_one() || unit[0] == BigInt::from(-1))
}

/// Removes the lowest base-p digit from every coefficient and returns the
/// residue encoding of the removed digit.
fn pop_digit(c: &mut [BigInt], p: &BigInt) -> u32 {
    let mut digit = 0u64;
    let mut scale = 1u64;
    let pu: u64 = p.try_into().unwrap();
    for x in c.iter_mut() {
        let (q, r) = x.div_mod_floor(p);
        let r: u64 = r.try_into().unwrap();
        digit += r * scale;
        scale *= pu;
        *x = q;
    }
    digit as u32
}

fn coefficients_to_digits(field: &LocalField, unit: &[BigInt], n: usize) -> Vec<u32> {
    let p = BigInt::from(field.p());
    let mut c = unit.to_vec();
    (0..n).map(|_| pop_digit(&mut c, &p)).collect()
}

fn digits_to_coefficients(field: &LocalField, digits: &[u32]) -> Result<Vec<BigInt>, FieldError> {
    let p = field.p();
    let f = field.f() as usize;
    let q = field.residue_size();
    let mut coeffs = vec![BigInt::zero(); f];
    let mut scale = BigInt::one();
    for &d in digits {
        if d >= q {
            return Err(FieldError::InvalidArgument(format!("digit {d} outside 0..{q}")));
        }
        let mut d = d;
        for c in coeffs.iter_mut() {
            *c += &scale * (d % p);
            d /= p;
        }
        scale *= p;
    }
    Ok(coeffs)
}

impl fmt::Debug for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Zero => write!(f, "0"),
            Kind::ZeroTo(n) => write!(f, "O(π^{n})"),
            Kind::Value { val, rel, .. } => {
                let d: Vec<String> = self.digits().iter().map(|x| x.to_string()).collect();
                write!(f, "π^{val}·[{}]", d.join(" "))?;
                if let Some(r) = rel {
                    write!(f, " + O(π^{})", val + *r as i64)?;
                }
                Ok(())
            }
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl $tr<&PAdicNumber> for &PAdicNumber {
            type Output = PAdicNumber;
            fn $m(self, rhs: &PAdicNumber) -> PAdicNumber {
                self.$inner(rhs).expect("arithmetic across different fields")
            }
        }
        impl $tr<PAdicNumber> for PAdicNumber {
            type Output = PAdicNumber;
            fn $m(self, rhs: PAdicNumber) -> PAdicNumber {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &PAdicNumber {
    type Output = PAdicNumber;
    fn neg(self) -> PAdicNumber {
        self.neg_ref()
    }
}

impl Neg for PAdicNumber {
    type Output = PAdicNumber;
    fn neg(self) -> PAdicNumber {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k51() -> LocalField {
        LocalField::from_pf(5, 1).unwrap()
    }

    #[test]
    fn two_plus_three_is_pi() {
        let k = k51();
        let s = PAdicNumber::from_int(&k, 2) + PAdicNumber::from_int(&k, 3);
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.digits(), vec![1]);
        let a = PAdicNumber::from_int(&k, 17);
        assert_eq!(&a + &PAdicNumber::zero(&k), a);
    }

    #[test]
    fn cancellation_to_precision() {
        let k = k51();
        let a = PAdicNumber::from_digits(&k, 0, &[1, 0, 0]).unwrap();
        let b = PAdicNumber::from_digits(&k, 0, &[4, 4, 4]).unwrap();
        let s = &a + &b;
        assert!(s.is_zero() && !s.is_exact_zero());
        assert_eq!(s.absolute_precision(), Some(3));
        assert_eq!(s.norm(), Err(FieldError::InexactZero(3)));
    }

    #[test]
    fn inverse_of_six() {
        let k = k51();
        let six = PAdicNumber::from_digits(&k, 0, &[1, 1, 0]).unwrap();
        let inv = six.inv().unwrap();
        assert_eq!(inv.valuation(), Some(0));
        assert_eq!(inv.digits(), vec![1, 4, 0]);
        let pi = PAdicNumber::pi_power(&k, 1);
        let pinv = pi.inv().unwrap();
        assert_eq!(pinv.valuation(), Some(-1));
        assert_eq!(pinv.digits(), vec![1]);
        assert_eq!((&pi * &pi).valuation(), Some(2));
        assert_eq!(PAdicNumber::zero(&k).inv(), Err(FieldError::InverseOfZero));
    }

    #[test]
    fn norms() {
        let k = k51();
        let t = |n: i64| BigRational::new(1.into(), BigInt::from(5).pow(n as u32));
        assert_eq!(PAdicNumber::from_int(&k, 5).norm().unwrap(), t(1));
        assert_eq!(PAdicNumber::from_int(&k, 7).norm().unwrap(), t(0));
        assert_eq!(PAdicNumber::from_int(&k, 625).norm().unwrap(), t(4));
        assert_eq!(PAdicNumber::zero(&k).norm().unwrap(), BigRational::zero());
    }

    #[test]
    fn annulus_reduction() {
        let k = k51();
        let x = PAdicNumber::exact_from_digits(&k, 4, &[2, 3]).unwrap();
        let r = x.reduce_to_annulus(3).unwrap();
        assert_eq!(r.valuation(), Some(1));
        assert_eq!(r.digits(), vec![2, 3]);
        let u = PAdicNumber::from_int(&k, 2);
        assert_eq!(u.reduce_to_annulus(3).unwrap(), u);
        let y = PAdicNumber::pi_power(&k, -2);
        assert_eq!(y.reduce_to_annulus(3).unwrap().valuation(), Some(1));
    }

    #[test]
    fn extension_field_inverse() {
        let k = LocalField::from_pf(5, 2).unwrap();
        for lead in 1..25u32 {
            let x = PAdicNumber::from_digits(&k, 3, &[lead, 7, 19, 0, 4, 11]).unwrap();
            let prod = &x * &x.inv().unwrap();
            let one = PAdicNumber::one(&k);
            let diff = &prod - &one;
            assert!(diff.is_zero(), "{lead}: {diff}");
            assert_eq!(prod.precision(), Some(6));
        }
    }

    #[test]
    fn negation_and_subtraction() {
        let k = k51();
        let x = PAdicNumber::from_digits(&k, 0, &[3, 1, 4, 1]).unwrap();
        let z = &x + &(-&x);
        assert!(z.is_zero());
        assert_eq!(z.absolute_precision(), Some(4));
        let m1 = PAdicNumber::from_int(&k, -1);
        assert_eq!(m1.digits_to(4), vec![4, 4, 4, 4]);
        assert!(m1.is_exact());
    }
}
