//! Haar-uniform sampling on circles and spheres at digit level.

use rand::Rng;

use super::{LocalField, PAdicNumber};
use crate::error::FieldError;

/// Fills `out` with the digits at positions `k..m` of a Haar-uniform point
/// of `S_k`: leading digit uniform on nonzero residues, the rest uniform.
pub fn fill_circle_digits<R: Rng + ?Sized>(residue_size: u32, out: &mut [u32], rng: &mut R) {
    if let Some((lead, rest)) = out.split_first_mut() {
        *lead = rng.random_range(1..residue_size);
        for d in rest {
            *d = rng.random_range(0..residue_size);
        }
    }
}

/// Uniform point of `S_k = {|x| = t^k}` known to absolute precision `m`.
pub fn sample_circle<R: Rng + ?Sized>(
    field: &LocalField,
    k: i64,
    m: i64,
    rng: &mut R,
) -> Result<PAdicNumber, FieldError> {
    if m <= k {
        return Err(FieldError::InvalidArgument(format!("precision {m} must exceed circle index {k}")));
    }
    let mut digits = vec![0u32; (m - k) as usize];
    fill_circle_digits(field.residue_size(), &mut digits, rng);
    PAdicNumber::from_digits(field, k, &digits)
}

/// Uniform point of `{y : |y - c| = t^ν}` at absolute precision `m`.
///
/// For `ν = v(c)` the sphere meets the circle of `c` in
/// `{|y| = |c|, |y - c| = |c|}`, and the sample is drawn from that set
/// (leading digit different from zero and from the leading digit of `c`).
/// For `ν < v(c)` the sphere is the circle `S_ν`.
pub fn sample_sphere<R: Rng + ?Sized>(
    c: &PAdicNumber,
    nu: i64,
    m: i64,
    rng: &mut R,
) -> Result<PAdicNumber, FieldError> {
    let field = c.field();
    let q = field.residue_size();
    if m <= nu {
        return Err(FieldError::InvalidArgument(format!("precision {m} must exceed sphere index {nu}")));
    }
    let k = match c.valuation() {
        Some(k) => k,
        None if c.is_exact_zero() => return sample_circle(field, nu, m, rng),
        None => return Err(FieldError::PrecisionExhausted("centre is an inexact zero".into())),
    };
    if nu < k {
        return sample_circle(field, nu, m, rng);
    }
    if let Some(a) = c.absolute_precision() {
        if a <= nu {
            return Err(FieldError::PrecisionExhausted(format!(
                "centre known to π^{a}, sphere index {nu}"
            )));
        }
    }
    let cd = c.digits_to((nu - k + 1) as usize);
    let mut digits = vec![0u32; (m - k) as usize];
    let j = (nu - k) as usize;
    digits[..j].copy_from_slice(&cd[..j]);
    digits[j] = if nu == k {
        // q - 2 admissible values; q >= 5 keeps this nonempty
        if q < 3 {
            return Err(FieldError::EmptyStratum(format!("residue field of size {q}")));
        }
        let mut d = rng.random_range(1..q - 1);
        if d >= cd[0] {
            d += 1;
        }
        d
    } else {
        let mut d = rng.random_range(0..q - 1);
        if d >= cd[j] {
            d += 1;
        }
        d
    };
    for d in digits[j + 1..].iter_mut() {
        *d = rng.random_range(0..q);
    }
    PAdicNumber::from_digits(field, k, &digits)
}
