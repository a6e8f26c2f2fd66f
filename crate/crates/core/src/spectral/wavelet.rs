//! Kozyrev-type wavelets on balls inside one circle of the annulus.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::StepFunction;
use crate::error::{FieldError, SpectralError};
use crate::local_field::{LocalField, PAdicNumber};
use crate::tate_model::CurveConfig;

/// `ψ_{B,j}` on `B = {x : v(x - c) ≥ d} ⊂ S_k`, `d > k`, with `c` given by
/// its digits at positions `k..d` and `j ∈ 1..p^f` indexing the character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub k: i64,
    pub d: i64,
    pub center: Vec<u32>,
    pub j: u32,
}

impl WaveletSpec {
    pub fn validate(&self, cfg: &CurveConfig) -> Result<(), SpectralError> {
        let q = cfg.field().residue_size();
        let bad = |m: String| Err(SpectralError::Dimension(m));
        if !(0..cfg.vq()).contains(&self.k) {
            return bad(format!("circle {} outside 0..{}", self.k, cfg.vq()));
        }
        if self.d <= self.k {
            return bad(format!("ball level {} must exceed circle {}", self.d, self.k));
        }
        if self.center.len() != (self.d - self.k) as usize {
            return bad(format!("centre needs {} digits", self.d - self.k));
        }
        if self.center[0] == 0 || self.center.iter().any(|&c| c >= q) {
            return bad(format!("centre digits {:?} invalid", self.center));
        }
        if self.j == 0 || self.j >= q {
            return bad(format!("character index {} outside 1..{q}", self.j));
        }
        Ok(())
    }

    fn contains_digits(&self, digits: &[u32]) -> bool {
        digits.len() >= self.center.len() && digits[..self.center.len()] == self.center[..]
    }
}

/// `exp(2πi {Tr(τ(j) x) / p^{d+1}})` for `x` on `S_k` given by its digits
/// at positions `k..=d`.
fn character(field: &LocalField, w: &WaveletSpec, digits: &[u32]) -> Result<Complex64, FieldError> {
    let x = PAdicNumber::exact_from_digits(field, w.k, &digits[..(w.d - w.k + 1) as usize])?;
    let tau = PAdicNumber::exact_from_digits(field, 0, &[w.j])?;
    let z = tau.try_mul(&x)?;
    let vz = z.valuation().unwrap_or(w.d + 1);
    if vz > w.d {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = BigInt::from(field.p());
    let modulus = p.pow((w.d + 1) as u32);
    // coefficient C_i of X^i in z mod p^{d+1}: digit `pos` carries the
    // base-p digits of the coefficients at that position
    let f = field.f() as usize;
    let mut coeff = vec![BigInt::zero(); f];
    let mut scale = p.pow(vz as u32);
    for digit in z.digits_to((w.d + 1 - vz) as usize) {
        let mut a = digit;
        for c in coeff.iter_mut() {
            *c += &scale * BigInt::from(a % field.p());
            a /= field.p();
        }
        scale *= &p;
    }
    let tr = coeff
        .iter()
        .zip(field.traces())
        .fold(BigInt::zero(), |acc, (c, t)| acc + c * t)
        .mod_floor(&modulus);
    let phase = tr.to_f64().unwrap_or(0.0) / modulus.to_f64().unwrap_or(f64::INFINITY);
    Ok(Complex64::from_polar(1.0, std::f64::consts::TAU * phase))
}

/// `ψ(x) = t^{-d/2} χ(π^{-d-1} τ(j) x) 1_B(x)`, unit norm for Haar measure.
pub fn wavelet_value(w: &WaveletSpec, x: &PAdicNumber) -> Result<Complex64, FieldError> {
    if x.valuation() != Some(w.k) {
        if x.is_zero() && !x.is_exact_zero() && x.absolute_precision().is_some_and(|a| a <= w.k) {
            return Err(FieldError::PrecisionExhausted(format!("point known below π^{}", w.k)));
        }
        return Ok(Complex64::zero());
    }
    if let Some(a) = x.absolute_precision() {
        if a <= w.d {
            return Err(FieldError::PrecisionExhausted(format!("point known to π^{a}, wavelet needs π^{}", w.d + 1)));
        }
    }
    let digits = x.digits_to((w.d - w.k + 1) as usize);
    if !w.contains_digits(&digits) {
        return Ok(Complex64::zero());
    }
    let t = 1.0 / x.field().residue_size() as f64;
    Ok(character(x.field(), w, &digits)? * t.powf(-(w.d as f64) / 2.0))
}

/// The same wavelet normalized in `L²(|ω|)`, where `|ω| = t^{-k}` Haar on `S_k`.
pub fn wavelet_value_omega(w: &WaveletSpec, x: &PAdicNumber) -> Result<Complex64, FieldError> {
    let t = 1.0 / x.field().residue_size() as f64;
    Ok(wavelet_value(w, x)? * t.powf(w.k as f64 / 2.0))
}

/// `|ω|`-normalized wavelet as a step function at resolution `m > d`.
pub fn wavelet_step(w: &WaveletSpec, cfg: &CurveConfig, m: i64) -> Result<StepFunction<Complex64>, SpectralError> {
    w.validate(cfg)?;
    if m <= w.d {
        return Err(SpectralError::Resolution(format!("resolution {m} must exceed ball level {}", w.d)));
    }
    let field = cfg.field();
    let q = field.residue_size();
    let t = 1.0 / q as f64;
    let amp = t.powf((w.k - w.d) as f64 / 2.0);
    // the character only sees the digit at position d
    let mut digits = w.center.clone();
    digits.push(0);
    let mut chi = Vec::with_capacity(q as usize);
    for a in 0..q {
        *digits.last_mut().unwrap() = a;
        chi.push(character(field, w, &digits).map_err(|e| SpectralError::Field(e))? * amp);
    }
    let mut out = StepFunction::<Complex64>::zeros(cfg, m)?;
    let mut ball = vec![0u32; (m - w.k) as usize];
    ball[..w.center.len()].copy_from_slice(&w.center);
    let start = out.index_of(w.k, &ball);
    let block = (q as usize).pow((m - w.d - 1) as u32);
    let vals = out.circle_mut(w.k);
    for (a, &c) in chi.iter().enumerate() {
        let s = start + a * block;
        vals[s..s + block].fill(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Mode;
    use crate::spectral::{apply_operator, build_matrix, degree_vector, inner_product, to_f64};

    fn cfg(p: u32, f: u32, vq: i64) -> CurveConfig {
        CurveConfig::from_parts(p, f, vq).unwrap()
    }

    #[test]
    fn wavelets_are_orthonormal_and_mean_zero() {
        for (p, f) in [(5, 1), (5, 2)] {
            let c = cfg(p, f, 3);
            let q = c.field().residue_size();
            let m = 3;
            let specs: Vec<WaveletSpec> = (1..q.min(5))
                .map(|j| WaveletSpec { k: 1, d: 2, center: vec![2], j })
                .chain([WaveletSpec { k: 1, d: 2, center: vec![1], j: 1 }])
                .collect();
            let steps: Vec<_> = specs.iter().map(|w| wavelet_step(w, &c, m).unwrap()).collect();
            for (i, a) in steps.iter().enumerate() {
                assert!(a.integral().norm() < 1e-12);
                for (j, b) in steps.iter().enumerate() {
                    let ip = inner_product(a, b).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-12, "({p},{f}) {i},{j}: {ip}");
                }
            }
        }
    }

    #[test]
    fn pointwise_value_agrees_with_step() {
        let c = cfg(7, 1, 3);
        let w = WaveletSpec { k: 0, d: 2, center: vec![3, 5], j: 2 };
        let s = wavelet_step(&w, &c, 4).unwrap();
        for a in 0..7 {
            let digs = [3, 5, a, 1];
            let x = PAdicNumber::from_digits(c.field(), 0, &digs).unwrap();
            let v = wavelet_value_omega(&w, &x).unwrap();
            assert!((v - s.circle(0)[s.index_of(0, &digs)]).norm() < 1e-12);
        }
        let outside = PAdicNumber::from_digits(c.field(), 0, &[3, 4, 0, 0]).unwrap();
        assert_eq!(wavelet_value(&w, &outside).unwrap(), Complex64::zero());
        let coarse = PAdicNumber::from_digits(c.field(), 0, &[3, 5]).unwrap();
        assert!(wavelet_value(&w, &coarse).is_err());
    }

    #[test]
    fn wavelet_eigenvalue_approaches_minus_oracle_degree() {
        let c = cfg(5, 1, 3);
        let t = 0.2f64;
        let deg = degree_vector(&build_matrix(&c, Mode::Oracle).unwrap(), &c).to_f64();
        let m = 6;
        for (k, d) in [(1, 2), (1, 5), (2, 4), (0, 3)] {
            let center: Vec<u32> = (0..d - k).map(|i| 1 + (i as u32 % 4)).collect();
            let w = WaveletSpec { k, d, center, j: 1 };
            let psi = wavelet_step(&w, &c, m).unwrap();
            let h = apply_operator(&psi, &c, Mode::Oracle).unwrap();
            let lambda = inner_product(&h, &psi).unwrap();
            let delta = if (2 * k) % 3 == 0 {
                0.0
            } else {
                t.powi((k + 3 * d + 1) as i32) - t.powi((k + 3 * d + 3) as i32) * (1.0 - t) / (1.0 - t.powi(3))
            };
            let want = -deg[k as usize] - delta;
            assert!((lambda.re - want).abs() < 1e-14, "k={k} d={d}: {lambda} vs {want}");
            assert!(lambda.im.abs() < 1e-14);
            let resid = h.zip_with(&psi, |a, b| a - b * lambda.re).unwrap().max_abs();
            assert!(resid < 1e-12, "not an eigenfunction: {resid}");
            let _ = to_f64;
        }
    }
}
