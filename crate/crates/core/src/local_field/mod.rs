//! Finite-precision arithmetic in the unramified local field K of residue
//! degree `f` over Q_p, with uniformizer `π = p` and `|π| = p^{-f}`.

mod measure;
mod padic;
mod residue;
mod sampling;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use measure::MeasureModel;
pub use padic::PAdicNumber;
pub use residue::ResidueField;
pub use sampling::{fill_circle_digits, sample_circle, sample_sphere};

use crate::error::FieldError;

/// Default relative precision (significant digits) for constructed numbers.
pub const DEFAULT_PRECISION: usize = 12;

/// The pair `(p, f)` identifying K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub f: u32,
}

impl FieldParams {
    pub fn new(p: u32, f: u32) -> Result<Self, FieldError> {
        if p == 2 || p == 3 {
            return Err(FieldError::ExcludedPrime(p));
        }
        if p < 2 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if f == 0 {
            return Err(FieldError::InvalidDegree(f));
        }
        // keep p^f addressable as a digit and the F_q tables small
        if (p as u64).pow(f) > 4096 {
            return Err(FieldError::ResidueFieldTooLarge { p, f });
        }
        Ok(Self { p, f })
    }

    /// Size of the residue field, `p^f`.
    pub fn residue_size(&self) -> u32 {
        self.p.pow(self.f)
    }

    /// The value `t = |π| = p^{-f}` as an exact rational.
    pub fn t(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.residue_size()))
    }

    pub fn t_f64(&self) -> f64 {
        1.0 / self.residue_size() as f64
    }
}

impl fmt::Display for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, f={})", self.p, self.f)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) struct FieldInner {
    params: FieldParams,
    residue: ResidueField,
    /// Lift of the residue-field modulus to Z.
    modulus: Vec<BigInt>,
    /// `Tr_{K/Q_p}(X^j)` for `j < f`, exact integers.
    traces: Vec<BigInt>,
}

/// Shared handle to the tables of one local field. Cheap to clone.
#[derive(Clone)]
pub struct LocalField(Arc<FieldInner>);

impl fmt::Debug for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalField{}", self.0.params)
    }
}

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        self.0.params == other.0.params
    }
}

impl Eq for LocalField {}

impl LocalField {
    pub fn new(params: FieldParams) -> Self {
        let residue = ResidueField::new(params.p, params.f);
        let modulus: Vec<BigInt> = residue.modulus().iter().map(|&c| BigInt::from(c)).collect();
        let f = params.f as usize;
        let traces = (0..f)
            .map(|j| {
                // trace of multiplication by X^j in the basis 1, X, .., X^{f-1}
                let mut tr = BigInt::zero();
                for i in 0..f {
                    let mut mono = vec![BigInt::zero(); f];
                    mono[i] = BigInt::one();
                    let mut xj = vec![BigInt::zero(); f];
                    xj[j] = BigInt::one();
                    let prod = poly_mul_reduce(&mono, &xj, &modulus);
                    tr += &prod[i];
                }
                tr
            })
            .collect();
        Self(Arc::new(FieldInner { params, residue, modulus, traces }))
    }

    pub fn from_pf(p: u32, f: u32) -> Result<Self, FieldError> {
        Ok(Self::new(FieldParams::new(p, f)?))
    }

    pub fn params(&self) -> FieldParams {
        self.0.params
    }

    pub fn p(&self) -> u32 {
        self.0.params.p
    }

    pub fn f(&self) -> u32 {
        self.0.params.f
    }

    pub fn residue_size(&self) -> u32 {
        self.0.params.residue_size()
    }

    pub fn t(&self) -> BigRational {
        self.0.params.t()
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.0.residue
    }

    pub(crate) fn modulus(&self) -> &[BigInt] {
        &self.0.modulus
    }

    pub(crate) fn traces(&self) -> &[BigInt] {
        &self.0.traces
    }

    pub fn measure(&self) -> MeasureModel {
        MeasureModel::new(self.params())
    }
}

/// Product of two coefficient vectors reduced modulo the monic `modulus`
/// over Z (no reduction of coefficients).
pub(crate) fn poly_mul_reduce(a: &[BigInt], b: &[BigInt], modulus: &[BigInt]) -> Vec<BigInt> {
    let f = modulus.len() - 1;
    let mut prod = vec![BigInt::zero(); 2 * f];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    for d in (f..prod.len()).rev() {
        if prod[d].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut prod[d]);
        for i in 0..f {
            prod[d - f + i] -= &c * &modulus[i];
        }
    }
    prod.truncate(f);
    prod
}

/// `x^n` for rationals, negative exponents allowed.
pub fn rational_pow(x: &BigRational, n: i64) -> BigRational {
    if n >= 0 {
        num_traits::pow(x.clone(), n as usize)
    } else {
        num_traits::pow(x.recip(), (-n) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_composite_primes() {
        assert!(matches!(FieldParams::new(2, 1), Err(FieldError::ExcludedPrime(2))));
        assert!(matches!(FieldParams::new(3, 2), Err(FieldError::ExcludedPrime(3))));
        assert!(matches!(FieldParams::new(9, 1), Err(FieldError::NotPrime(9))));
        assert!(matches!(FieldParams::new(5, 0), Err(FieldError::InvalidDegree(0))));
    }

    #[test]
    fn t_is_exact_and_small() {
        for (p, f) in [(5, 1), (7, 1), (5, 2), (11, 1)] {
            let params = FieldParams::new(p, f).unwrap();
            let t = params.t();
            assert_eq!(t, BigRational::new(1.into(), BigInt::from(p.pow(f))));
            assert!(t < BigRational::new(1.into(), 4.into()));
        }
    }

    #[test]
    fn traces_of_unramified_basis() {
        let k = LocalField::from_pf(5, 2).unwrap();
        // X^2 + 2 = 0: roots ±sqrt(-2), trace(1) = 2, trace(X) = 0
        assert_eq!(k.traces(), &[BigInt::from(2), BigInt::from(0)]);
        let k = LocalField::from_pf(7, 1).unwrap();
        assert_eq!(k.traces(), &[BigInt::from(1)]);
    }
}
