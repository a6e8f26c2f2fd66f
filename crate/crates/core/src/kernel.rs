//! The diffusion kernel `H_θ`: pointwise values, circle-pair integrals
//! `A_σ(k,ℓ)` in closed form, and two independent evaluations of those
//! integrals (stratified exact summation and Monte Carlo).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, ModelError};
use crate::local_field::{fill_circle_digits, rational_pow, MeasureModel, PAdicNumber};
use crate::tate_model::CurveConfig;

/// Which value is used for the diagonal circle-pair entries.
///
/// `Paper` takes the closed form `t^{4k}/(1-t^3)`; `Oracle` takes the
/// stratum-exact integral, whose coincidence stratum has Haar mass
/// `t^k(1-2t)`. All other entries agree between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Paper,
    #[default]
    Oracle,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(Mode::Paper),
            "oracle" => Ok(Mode::Oracle),
            other => Err(format!("unknown mode {other:?} (expected paper or oracle)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CirclePairCase {
    OffDiagonal,
    Diagonal,
    PoleStratum,
}

/// Case split for circles `k, ℓ ∈ 0..vq`; the pole stratum `k + ℓ ≡ 0`
/// takes precedence over `k ≡ ℓ`.
pub fn classify(k: i64, l: i64, vq: i64) -> CirclePairCase {
    if (k + l).rem_euclid(vq) == 0 {
        CirclePairCase::PoleStratum
    } else if (k - l).rem_euclid(vq) == 0 {
        CirclePairCase::Diagonal
    } else {
        CirclePairCase::OffDiagonal
    }
}

/// A point of the fundamental annulus together with its circle index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelDomainPoint {
    x: PAdicNumber,
    k: i64,
}

impl KernelDomainPoint {
    pub fn new(x: &PAdicNumber, cfg: &CurveConfig) -> Result<Self, FieldError> {
        let x = x.reduce_to_annulus(cfg.vq())?;
        let k = x.valuation().unwrap();
        Ok(Self { x, k })
    }

    pub fn point(&self) -> &PAdicNumber {
        &self.x
    }

    pub fn circle(&self) -> i64 {
        self.k
    }
}

/// `H_θ(x, y)`: 1 on the pole strata `v(x) + v(y) ≡ 0 mod v(q)`, and
/// otherwise `|x̃ỹ| |x̃ - ỹ|^2 / |1 - x̃ỹ|^2` at the annulus representatives.
/// Points that agree to the available precision give 0.
pub fn kernel_point(x: &PAdicNumber, y: &PAdicNumber, cfg: &CurveConfig) -> Result<BigRational, ModelError> {
    let xp = KernelDomainPoint::new(x, cfg)?;
    let yp = KernelDomainPoint::new(y, cfg)?;
    if (xp.k + yp.k).rem_euclid(cfg.vq()) == 0 {
        return Ok(BigRational::one());
    }
    let (xr, yr) = (&xp.x, &yp.x);
    let prod = xr * yr;
    let diff = xr - yr;
    let one_minus = &PAdicNumber::one(cfg.field()) - &prod;
    let d = if diff.is_zero() { BigRational::zero() } else { diff.norm()? };
    let den = one_minus.norm()?;
    Ok(prod.norm()? * &d * &d / (&den * &den))
}

/// Kernel value as an exponent of `t`, for the digit-level fast path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelValue {
    One,
    Power(i64),
    Zero,
}

impl KernelValue {
    pub fn to_f64(self, t: f64) -> f64 {
        match self {
            KernelValue::One => 1.0,
            KernelValue::Power(e) => t.powi(e as i32),
            KernelValue::Zero => 0.0,
        }
    }
}

/// `H_θ` for annulus points given by circle index and digits from that
/// index on (`xd[0]`, `yd[0]` nonzero). Equal digit strings mean the points
/// coincide at the available precision.
pub fn kernel_digits(k: i64, xd: &[u32], l: i64, yd: &[u32], vq: i64) -> KernelValue {
    if (k + l).rem_euclid(vq) == 0 {
        return KernelValue::One;
    }
    // |1 - x̃ỹ| = 1 off the pole strata since v(x̃ỹ) > 0
    let dist = if k != l {
        Some(k.min(l))
    } else {
        xd.iter().zip(yd).position(|(a, b)| a != b).map(|j| k + j as i64)
    };
    match dist {
        Some(j) => KernelValue::Power(k + l + 2 * j),
        None => KernelValue::Zero,
    }
}

/// `A_σ(k,ℓ)` in closed form: `t^{k+ℓ+2min(k,ℓ)}` off the diagonal,
/// `t^{4k}/(1-t^3)` on it, and 1 on the pole strata.
pub fn entry_closed_form(k: i64, l: i64, cfg: &CurveConfig) -> BigRational {
    let t = cfg.t();
    match classify(k, l, cfg.vq()) {
        CirclePairCase::PoleStratum => BigRational::one(),
        CirclePairCase::OffDiagonal => rational_pow(&t, k + l + 2 * k.min(l)),
        CirclePairCase::Diagonal => rational_pow(&t, 4 * k) / (BigRational::one() - rational_pow(&t, 3)),
    }
}

/// `A_σ(k,ℓ) = (1-t)^{-1} ∫_{S_ℓ} H_θ(π^k, y) |ω(y)|` by exact summation
/// over the strata `{y ∈ S_ℓ : |y - π^k| = t^ν}`. The kernel is evaluated
/// pointwise at one exact representative per stratum; on the infinite
/// family `ν > k` the terms are checked to be geometric and the tail is
/// summed in closed form.
pub fn entry_oracle(k: i64, l: i64, cfg: &CurveConfig) -> Result<BigRational, ModelError> {
    let field = cfg.field();
    let t = cfg.t();
    let one = BigRational::one();
    let measure = MeasureModel::new(cfg.params());
    let x = PAdicNumber::pi_power(field, k);
    // |ω| = t^{-ℓ} |dy| on S_ℓ, then divide by |ω|(S_ℓ) = 1 - t
    let scale = rational_pow(&t, -l) / (&one - &t);
    if l != k {
        let y = PAdicNumber::pi_power(field, l);
        let mass = rational_pow(&t, l) * (&one - &t);
        return Ok(kernel_point(&x, &y, cfg)? * mass * scale);
    }
    let two = PAdicNumber::from_int(field, 2);
    let term = |nu: i64| -> Result<BigRational, ModelError> {
        let y = if nu == k { two.shift(k) } else { &x + &PAdicNumber::pi_power(field, nu) };
        Ok(kernel_point(&x, &y, cfg)? * measure.stratum_haar(k, nu) * &scale)
    };
    let head = term(k)?;
    let (t1, t2, t3) = (term(k + 1)?, term(k + 2)?, term(k + 3)?);
    if t1.is_zero() {
        return Ok(head);
    }
    let r = &t2 / &t1;
    if &t3 / &t2 != r || r >= one {
        return Err(ModelError::InvalidConfig(format!(
            "stratum terms are not geometric on circle {k}"
        )));
    }
    Ok(head + t1 / (one - r))
}

/// `A_σ(k,ℓ)` for the chosen mode.
pub fn entry(k: i64, l: i64, cfg: &CurveConfig, mode: Mode) -> Result<BigRational, ModelError> {
    match mode {
        Mode::Paper => Ok(entry_closed_form(k, l, cfg)),
        Mode::Oracle => entry_oracle(k, l, cfg),
    }
}

/// Monte Carlo estimate of the same integral: the mean of `H_θ(π^k, y)`
/// over Haar-uniform `y ∈ S_ℓ` sampled to absolute precision `vq + 12`.
/// Returns `(mean, standard error)`.
pub fn entry_oracle_mc<R: Rng + ?Sized>(
    k: i64,
    l: i64,
    cfg: &CurveConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64), ModelError> {
    if n_samples < 1000 {
        return Err(ModelError::Field(FieldError::InvalidArgument(format!(
            "at least 1000 samples required, got {n_samples}"
        ))));
    }
    let vq = cfg.vq();
    let m = vq + 12;
    let q = cfg.field().residue_size();
    let t = cfg.t().to_f64().unwrap();
    let mut xd = vec![0u32; (m - k) as usize];
    xd[0] = 1;
    let mut yd = vec![0u32; (m - l) as usize];
    // Welford's update: exact for constant integrands, no drift in n
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 1..=n_samples {
        fill_circle_digits(q, &mut yd, rng);
        let h = kernel_digits(k, &xd, l, &yd, vq).to_f64(t);
        let delta = h - mean;
        mean += delta / i as f64;
        m2 += delta * (h - mean);
    }
    let n = n_samples as f64;
    let var = m2 / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// `t^{4k}(1-2t)/(1-t) + t^{4k+3}/(1-t^3)`, the stratum-exact diagonal
/// value, in closed form.
pub fn diagonal_exact_closed_form(k: i64, cfg: &CurveConfig) -> BigRational {
    let t = cfg.t();
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    rational_pow(&t, 4 * k) * (&one - two * &t) / (&one - &t)
        + rational_pow(&t, 4 * k + 3) / (&one - rational_pow(&t, 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::sample_circle;
    use crate::tate_model::g_pointwise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(p: u32, f: u32, vq: i64) -> CurveConfig {
        CurveConfig::from_parts(p, f, vq).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn classification() {
        assert_eq!(classify(0, 0, 3), CirclePairCase::PoleStratum);
        assert_eq!(classify(1, 1, 3), CirclePairCase::Diagonal);
        assert_eq!(classify(1, 2, 3), CirclePairCase::PoleStratum);
        assert_eq!(classify(0, 1, 3), CirclePairCase::OffDiagonal);
        assert_eq!(classify(2, 2, 4), CirclePairCase::PoleStratum);
    }

    #[test]
    fn pointwise_examples() {
        let c = cfg(5, 1, 3);
        let k = c.field().clone();
        let one = PAdicNumber::one(&k);
        let five = PAdicNumber::from_int(&k, 5);
        assert_eq!(kernel_point(&one, &five, &c).unwrap(), r(1, 5));
        assert_eq!(kernel_point(&one, &five, &c).unwrap(), g_pointwise(&one, &five, &c).unwrap());
        let a = PAdicNumber::from_int(&k, 5);
        let b = PAdicNumber::from_int(&k, 50);
        assert_eq!(kernel_point(&a, &b, &c).unwrap(), BigRational::one());
    }

    #[test]
    fn closed_form_examples() {
        let c = cfg(5, 1, 3);
        assert_eq!(entry_closed_form(0, 1, &c), r(1, 5));
        assert_eq!(entry_closed_form(1, 1, &c), r(1, 620));
        assert_eq!(entry_closed_form(0, 0, &c), BigRational::one());
        assert_eq!(entry_closed_form(2, 2, &c), r(1, 387500));
    }

    #[test]
    fn oracle_examples() {
        let c = cfg(5, 1, 3);
        assert_eq!(entry_oracle(0, 1, &c).unwrap(), r(1, 5));
        assert_eq!(entry_oracle(1, 2, &c).unwrap(), BigRational::one());
        for kk in 0..3 {
            if classify(kk, kk, 3) == CirclePairCase::Diagonal {
                assert_eq!(entry_oracle(kk, kk, &c).unwrap(), diagonal_exact_closed_form(kk, &c));
            }
        }
    }

    #[test]
    fn digit_path_matches_exact_kernel() {
        let c = cfg(7, 1, 5);
        let k = c.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let t = 1.0 / 7.0;
        for _ in 0..500 {
            let a = rng.random_range(0..5);
            let b = rng.random_range(0..5);
            let x = sample_circle(&k, a, 9, &mut rng).unwrap();
            let y = if rng.random_bool(0.5) && a == b {
                let mut d = x.digits();
                d[2] = (d[2] + 1) % 7;
                PAdicNumber::from_digits(&k, a, &d).unwrap()
            } else {
                sample_circle(&k, b, 9, &mut rng).unwrap()
            };
            let exact = kernel_point(&x, &y, &c).unwrap().to_f64().unwrap();
            let fast = kernel_digits(a, &x.digits(), b, &y.digits(), 5).to_f64(t);
            assert!((exact - fast).abs() <= 1e-15 * exact.max(1e-300), "{x} {y}");
        }
    }

    #[test]
    fn monte_carlo_off_diagonal_is_exact() {
        let c = cfg(5, 1, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (m, s) = entry_oracle_mc(0, 1, &c, 100_000, &mut rng).unwrap();
        assert!((m - 0.2).abs() <= 3.0 * s + 1e-12);
        let (m, s) = entry_oracle_mc(1, 1, &c, 100_000, &mut rng).unwrap();
        let exact = entry_oracle(1, 1, &c).unwrap().to_f64().unwrap();
        assert!((m - exact).abs() <= 3.0 * s + 1e-12, "{m} vs {exact} ± {s}");
    }

    #[test]
    fn monte_carlo_error_shrinks_like_inverse_sqrt() {
        let c = cfg(5, 1, 4);
        let (_, s1) = entry_oracle_mc(1, 1, &c, 10_000, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (_, s2) = entry_oracle_mc(1, 1, &c, 160_000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let ratio = s1 / s2;
        assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }
}
