//! Truncated q-series of the Tate curve `E_q : y^2 + xy = x^3 + a4 x + a6`,
//! its uniformization coordinates, the theta function and the theta
//! quotient `g`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{FieldError, ModelError};
use crate::local_field::{rational_pow, FieldParams, LocalField, PAdicNumber};

pub const DEFAULT_ORDER: usize = 8;

/// A Tate curve with `q = π^{vq}` and series kept to `q^N`.
#[derive(Debug, Clone)]
pub struct CurveConfig {
    field: LocalField,
    vq: i64,
    order: usize,
}

impl CurveConfig {
    pub fn new(field: LocalField, vq: i64, order: usize) -> Result<Self, ModelError> {
        if vq < 3 {
            return Err(ModelError::InvalidConfig(format!("v(q) must be at least 3, got {vq}")));
        }
        if order < 4 {
            return Err(ModelError::InvalidConfig(format!("series order must be at least 4, got {order}")));
        }
        Ok(Self { field, vq, order })
    }

    /// Convenience constructor with the default series order.
    pub fn from_parts(p: u32, f: u32, vq: i64) -> Result<Self, ModelError> {
        Self::new(LocalField::from_pf(p, f)?, vq, DEFAULT_ORDER)
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn params(&self) -> FieldParams {
        self.field.params()
    }

    pub fn vq(&self) -> i64 {
        self.vq
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn t(&self) -> BigRational {
        self.field.t()
    }

    pub fn q(&self) -> PAdicNumber {
        PAdicNumber::pi_power(&self.field, self.vq)
    }

    pub fn with_order(&self, order: usize) -> Result<Self, ModelError> {
        Self::new(self.field.clone(), self.vq, order)
    }
}

/// Integer q-series `Σ_{n=offset}^{offset+len-1} c_n q^n`, exact through
/// `q^order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TateSeries {
    offset: i64,
    coeffs: Vec<BigInt>,
    order: usize,
}

impl TateSeries {
    fn new(offset: i64, coeffs: Vec<BigInt>, order: usize) -> Self {
        Self { offset, coeffs, order }
    }

    /// Coefficient of `q^n` (zero outside the stored window).
    pub fn coeff(&self, n: i64) -> BigInt {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Valuation below which the evaluation at `q` is exact.
    pub fn error_valuation(&self, cfg: &CurveConfig) -> i64 {
        cfg.vq * (self.order as i64 + 1)
    }

    /// `Σ c_n q^n` at the configured `q`, truncated to the error valuation.
    pub fn evaluate(&self, cfg: &CurveConfig) -> PAdicNumber {
        let mut acc = PAdicNumber::zero(cfg.field());
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let n = self.offset + i as i64;
            let term = scalar(cfg.field(), c).shift(cfg.vq * n);
            acc = &acc + &term;
        }
        acc.with_absolute_precision(self.error_valuation(cfg))
    }
}

fn scalar(field: &LocalField, c: &BigInt) -> PAdicNumber {
    // exact integers: split off sign so the digit expansion stays finite
    let mag = c.abs();
    let p = BigInt::from(field.p());
    let mut digits = Vec::new();
    let mut m = mag;
    while !m.is_zero() {
        let (q, r) = m.div_rem(&p);
        digits.push(u32::try_from(&r).unwrap());
        m = q;
    }
    let x = PAdicNumber::exact_from_digits(field, 0, &digits).unwrap();
    if c.is_negative() {
        -x
    } else {
        x
    }
}

fn divisors(n: usize) -> impl Iterator<Item = usize> {
    (1..=n).filter(move |m| n % m == 0)
}

/// `s_k(q) = Σ_{n≥1} n^k q^n / (1 - q^n)`; the coefficient of `q^m` is the
/// divisor sum `σ_k(m)`.
pub fn sk_series(k: u32, cfg: &CurveConfig) -> TateSeries {
    let n = cfg.order;
    let mut coeffs = vec![BigInt::zero(); n + 1];
    for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = divisors(m).map(|d| BigInt::from(d).pow(k)).sum();
    }
    TateSeries::new(0, coeffs, n)
}

pub fn a4(cfg: &CurveConfig) -> TateSeries {
    let s3 = sk_series(3, cfg);
    let coeffs = s3.coeffs.iter().map(|c| c * BigInt::from(-5)).collect();
    TateSeries::new(0, coeffs, cfg.order)
}

pub fn a6(cfg: &CurveConfig) -> Result<TateSeries, ModelError> {
    let s3 = sk_series(3, cfg);
    let s5 = sk_series(5, cfg);
    let twelve = BigInt::from(12);
    let coeffs = s3
        .coeffs
        .iter()
        .zip(&s5.coeffs)
        .map(|(a, b)| {
            let num: BigInt = -(a * BigInt::from(5) + b * BigInt::from(7));
            let (q, r) = num.div_rem(&twelve);
            if r.is_zero() {
                Ok(q)
            } else {
                Err(ModelError::NotDivisible)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(TateSeries::new(0, coeffs, cfg.order))
}

fn series_mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∏_{n≥1} (1 - q^n)^{24}` through `q^n`.
fn eta24(n: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); n + 1];
    acc[0] = BigInt::one();
    for m in 1..=n {
        let mut factor = vec![BigInt::zero(); n + 1];
        factor[0] = BigInt::one();
        factor[m] = BigInt::from(-1);
        for _ in 0..24 {
            acc = series_mul(&acc, &factor, n);
        }
    }
    acc
}

/// `Δ = q ∏_{n≥1} (1 - q^n)^{24}`.
pub fn discriminant(cfg: &CurveConfig) -> TateSeries {
    let n = cfg.order;
    let e = eta24(n);
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[1..].clone_from_slice(&e[..n]);
    TateSeries::new(0, coeffs, n)
}

/// Discriminant of `y^2 + xy = x^3 + a4 x + a6` from the Weierstrass
/// coefficients: `-(a6 - a4^2) - 64 a4^3 - 432 a6^2 + 72 a4 a6`.
pub fn discriminant_from_coefficients(cfg: &CurveConfig) -> Result<TateSeries, ModelError> {
    let n = cfg.order;
    let a4 = a4(cfg).coeffs;
    let a6 = a6(cfg)?.coeffs;
    let a4sq = series_mul(&a4, &a4, n);
    let a4cu = series_mul(&a4sq, &a4, n);
    let a6sq = series_mul(&a6, &a6, n);
    let a4a6 = series_mul(&a4, &a6, n);
    let coeffs = (0..=n)
        .map(|i| -(&a6[i] - &a4sq[i]) - &a4cu[i] * 64 - &a6sq[i] * 432 + &a4a6[i] * 72)
        .collect();
    Ok(TateSeries::new(0, coeffs, n))
}

/// `j = c4^3 / Δ = q^{-1} + 744 + Σ c(n) q^n` with `c4 = 1 + 240 s_3`.
/// Returns the leading valuation `-v(q)` and the series (offset `-1`).
pub fn j_invariant(cfg: &CurveConfig) -> (i64, TateSeries) {
    let n = cfg.order;
    let s3 = sk_series(3, cfg).coeffs;
    let mut c4: Vec<BigInt> = s3.iter().map(|c| c * 240).collect();
    c4[0] += 1;
    let c4sq = series_mul(&c4, &c4, n + 1);
    let c4cu = series_mul(&c4sq, &c4, n + 1);
    // divide by the unit series ∏(1 - q^n)^24, leading coefficient 1
    let d = eta24(n + 1);
    let mut quot = vec![BigInt::zero(); n + 2];
    for i in 0..=n + 1 {
        let mut r = c4cu.get(i).cloned().unwrap_or_default();
        for j in 1..=i {
            r -= &d[j] * &quot[i - j];
        }
        quot[i] = r;
    }
    (-cfg.vq, TateSeries::new(-1, quot, n))
}

fn check_annulus_argument(u: &PAdicNumber, cfg: &CurveConfig) -> Result<i64, ModelError> {
    let k = u
        .valuation()
        .ok_or_else(|| ModelError::Field(FieldError::InvalidArgument("u must be nonzero".into())))?;
    if k.abs() >= cfg.vq {
        return Err(ModelError::Field(FieldError::InvalidArgument(format!(
            "v(u) = {k} outside (-v(q), v(q))"
        ))));
    }
    Ok(k)
}

fn one_minus(u: &PAdicNumber) -> Result<PAdicNumber, ModelError> {
    let d = &PAdicNumber::one(u.field()) - u;
    if d.is_zero() {
        return Err(ModelError::NearPole(format!("1 - u vanishes to precision for u = {u}")));
    }
    Ok(d)
}

/// Largest `d` whose `q^d` terms can still matter above the error
/// valuation `v(q)(N+1)`: the term `q^d u^{±m}` has valuation at least
/// `d(v(q) - |v(u)|)`.
fn series_terms(k: i64, cfg: &CurveConfig) -> usize {
    let floor = cfg.vq * (cfg.order as i64 + 1);
    let step = cfg.vq - k.abs();
    ((floor - 1) / step).max(0) as usize
}

fn small(field: &LocalField, n: i64) -> PAdicNumber {
    PAdicNumber::from_int(field, n)
}

/// Powers `u^m` and `u^{-m}` for `m = 0..=d`.
fn power_table(u: &PAdicNumber, d: usize) -> Result<(Vec<PAdicNumber>, Vec<PAdicNumber>), ModelError> {
    let one = PAdicNumber::one(u.field());
    let uinv = u.inv()?;
    let mut pos = vec![one.clone()];
    let mut neg = vec![one];
    for m in 1..=d + 1 {
        pos.push(&pos[m - 1] * u);
        neg.push(&neg[m - 1] * &uinv);
    }
    Ok((pos, neg))
}

/// `X(u,q) = u/(1-u)^2 + Σ_{d≥1} Σ_{m|d} m (u^m + u^{-m} - 2) q^d`.
pub fn coord_x(u: &PAdicNumber, cfg: &CurveConfig) -> Result<PAdicNumber, ModelError> {
    let k = check_annulus_argument(u, cfg)?;
    let field = cfg.field();
    let om = one_minus(u)?;
    let mut acc = u.try_div(&(&om * &om))?;
    let dmax = series_terms(k, cfg);
    let (pos, neg) = power_table(u, dmax)?;
    let two = small(field, 2);
    for d in 1..=dmax {
        let mut inner = PAdicNumber::zero(field);
        for m in divisors(d) {
            let t = &(&pos[m] + &neg[m]) - &two;
            inner = &inner + &(&small(field, m as i64) * &t);
        }
        acc = &acc + &inner.shift(cfg.vq * d as i64);
    }
    Ok(acc)
}

/// `Y(u,q) = u^2/(1-u)^3 + Σ_{d≥1} Σ_{m|d} (m(m-1)/2 u^m - m(m+1)/2 u^{-m} + m) q^d`.
pub fn coord_y(u: &PAdicNumber, cfg: &CurveConfig) -> Result<PAdicNumber, ModelError> {
    let k = check_annulus_argument(u, cfg)?;
    let field = cfg.field();
    let om = one_minus(u)?;
    let mut acc = (u * u).try_div(&(&(&om * &om) * &om))?;
    let dmax = series_terms(k, cfg);
    let (pos, neg) = power_table(u, dmax)?;
    for d in 1..=dmax {
        let mut inner = PAdicNumber::zero(field);
        for m in divisors(d) {
            let m = m as i64;
            let a = &small(field, m * (m - 1) / 2) * &pos[m as usize];
            let b = &small(field, m * (m + 1) / 2) * &neg[m as usize];
            inner = &inner + &(&(&a - &b) + &small(field, m));
        }
        acc = &acc + &inner.shift(cfg.vq * d as i64);
    }
    Ok(acc)
}

/// Formal derivative `dX/du = (1+u)/(1-u)^3 + Σ_d Σ_{m|d} m^2 (u^{m-1} - u^{-m-1}) q^d`.
pub fn coord_x_derivative(u: &PAdicNumber, cfg: &CurveConfig) -> Result<PAdicNumber, ModelError> {
    let k = check_annulus_argument(u, cfg)?;
    let field = cfg.field();
    let om = one_minus(u)?;
    let mut acc = (&PAdicNumber::one(field) + u).try_div(&(&(&om * &om) * &om))?;
    let dmax = series_terms(k, cfg);
    let (pos, neg) = power_table(u, dmax)?;
    for d in 1..=dmax {
        let mut inner = PAdicNumber::zero(field);
        for m in divisors(d) {
            let t = &pos[m - 1] - &neg[m + 1];
            inner = &inner + &(&small(field, (m * m) as i64) * &t);
        }
        acc = &acc + &inner.shift(cfg.vq * d as i64);
    }
    Ok(acc)
}

/// Lower bound on the valuation of a value: its valuation when nonzero,
/// otherwise the precision to which it vanishes (`i64::MAX` for exact 0).
pub fn valuation_floor(x: &PAdicNumber) -> i64 {
    match x.valuation() {
        Some(v) => v,
        None => x.absolute_precision().unwrap_or(i64::MAX),
    }
}

/// Valuation of `Y^2 + XY - X^3 - a4 X - a6` at `(X(u,q), Y(u,q))`.
/// When the residual vanishes to the working precision, that precision is
/// returned as the bound.
pub fn weierstrass_residual(u: &PAdicNumber, cfg: &CurveConfig) -> Result<i64, ModelError> {
    let x = coord_x(u, cfg)?;
    let y = coord_y(u, cfg)?;
    let a4 = a4(cfg).evaluate(cfg);
    let a6 = a6(cfg)?.evaluate(cfg);
    let r = &(&(&(&y * &y) + &(&x * &y)) - &(&(&x * &x) * &x)) - &(&(&a4 * &x) + &a6);
    Ok(valuation_floor(&r))
}

/// `|(2Y + X)^{-1} dX/du|` at `u`.
pub fn invariant_density(u: &PAdicNumber, cfg: &CurveConfig) -> Result<BigRational, ModelError> {
    let x = coord_x(u, cfg)?;
    let y = coord_y(u, cfg)?;
    let dx = coord_x_derivative(u, cfg)?;
    let den = &(&small(cfg.field(), 2) * &y) + &x;
    if den.is_zero() || dx.is_zero() {
        return Err(ModelError::Field(FieldError::PrecisionExhausted(
            "invariant differential lost all digits".into(),
        )));
    }
    Ok(dx.try_div(&den)?.norm()?)
}

/// Truncated product `θ(z) = Π_{n≥0}(1 - q^n z^{-1}) Π_{n>0}(1 - q^n z)`,
/// dropping factors whose correction term has valuation at least `floor`.
pub fn theta(z: &PAdicNumber, cfg: &CurveConfig, floor: i64) -> Result<PAdicNumber, ModelError> {
    let w = z
        .valuation()
        .ok_or_else(|| ModelError::Field(FieldError::InvalidArgument("θ(0) is undefined".into())))?;
    let one = PAdicNumber::one(cfg.field());
    let zinv = z.inv()?;
    let mut acc = one.clone();
    let mut n = 0i64;
    loop {
        let e1 = n * cfg.vq - w;
        let e2 = n * cfg.vq + w;
        if e1 >= floor && (n == 0 || e2 >= floor) {
            break;
        }
        if e1 < floor {
            acc = &acc * &(&one - &zinv.shift(n * cfg.vq));
        }
        if n > 0 && e2 < floor {
            acc = &acc * &(&one - &z.shift(n * cfg.vq));
        }
        n += 1;
    }
    Ok(acc)
}

/// `|θ(z)|` by valuation bookkeeping: the factor with correction of
/// valuation `e` contributes `t^{min(0,e)}`, except when `e = 0`, where it
/// is `|1 - u|` for the unit part `u` of `z`. Returns 0 on `q^Z`.
pub fn theta_norm(z: &PAdicNumber, cfg: &CurveConfig) -> Result<BigRational, ModelError> {
    let w = z
        .valuation()
        .ok_or_else(|| ModelError::Field(FieldError::InvalidArgument("θ(0) is undefined".into())))?;
    let vq = cfg.vq;
    let mut e = 0i64;
    let mut n = 0;
    while n * vq < w {
        e += n * vq - w;
        n += 1;
    }
    let mut n = 1;
    while n * vq < -w {
        e += n * vq + w;
        n += 1;
    }
    let mut norm = rational_pow(&cfg.t(), e);
    if w.rem_euclid(vq) == 0 {
        let u = z.unit_part().unwrap();
        let d = &PAdicNumber::one(cfg.field()) - &u;
        if d.is_exact_zero() {
            return Ok(BigRational::zero());
        }
        norm *= d.norm()?;
    }
    Ok(norm)
}

/// `|g(x,y)| = |θ(x^{-1}y) θ(y^{-1}x)| / |θ(xy)|^2`, evaluated at the
/// annulus representatives of `x` and `y`.
pub fn g_pointwise(x: &PAdicNumber, y: &PAdicNumber, cfg: &CurveConfig) -> Result<BigRational, ModelError> {
    let xr = x.reduce_to_annulus(cfg.vq)?;
    let yr = y.reduce_to_annulus(cfg.vq)?;
    let prod = &xr * &yr;
    let den = match theta_norm(&prod, cfg) {
        Ok(d) if d.is_zero() => return Err(ModelError::Pole),
        Err(ModelError::Field(FieldError::InexactZero(_))) => return Err(ModelError::Pole),
        other => other?,
    };
    let a = yr.try_div(&xr)?;
    let b = xr.try_div(&yr)?;
    let num = match (theta_norm(&a, cfg), theta_norm(&b, cfg)) {
        (Ok(na), Ok(nb)) => na * nb,
        // x̃ and ỹ agree to the available precision
        (Err(ModelError::Field(FieldError::InexactZero(_))), _)
        | (_, Err(ModelError::Field(FieldError::InexactZero(_)))) => BigRational::zero(),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(num / (&den * &den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::sample_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(p: u32, f: u32, vq: i64) -> CurveConfig {
        CurveConfig::from_parts(p, f, vq).unwrap()
    }

    #[test]
    fn divisor_sum_coefficients() {
        let c = cfg(5, 1, 3);
        let s3 = sk_series(3, &c);
        assert_eq!(s3.coeff(0), BigInt::zero());
        assert_eq!(s3.coeff(1), BigInt::from(1));
        assert_eq!(s3.coeff(2), BigInt::from(9));
        // σ_3(6) = 1 + 8 + 27 + 216
        assert_eq!(s3.coeff(6), BigInt::from(252));
        assert_eq!(a4(&c).coeff(1), BigInt::from(-5));
        assert_eq!(a6(&c).unwrap().coeff(1), BigInt::from(-1));
        assert_eq!(a4(&c).coeff(0), BigInt::zero());
        assert_eq!(a6(&c).unwrap().coeff(0), BigInt::zero());
    }

    #[test]
    fn discriminant_two_ways() {
        let c = cfg(7, 1, 4).with_order(12).unwrap();
        assert_eq!(discriminant(&c), discriminant_from_coefficients(&c).unwrap());
        // Ramanujan τ: q - 24q^2 + 252q^3 - 1472q^4
        let d = discriminant(&c);
        let tau: Vec<i64> = (1..=4).map(|n| i64::try_from(d.coeff(n)).unwrap()).collect();
        assert_eq!(tau, vec![1, -24, 252, -1472]);
    }

    #[test]
    fn j_coefficients() {
        let c = cfg(5, 1, 3);
        let (lead, j) = j_invariant(&c);
        assert_eq!(lead, -3);
        assert_eq!(j.coeff(-1), BigInt::from(1));
        assert_eq!(j.coeff(0), BigInt::from(744));
        assert_eq!(j.coeff(1), BigInt::from(196884));
        assert_eq!(j.coeff(2), BigInt::from(21493760));
        assert_eq!(j.evaluate(&c).valuation(), Some(-3));
        assert_eq!(discriminant(&c).evaluate(&c).valuation(), Some(3));
    }

    #[test]
    fn degenerate_cubic_at_q_zero() {
        // u = 2: X = 2, Y = -4 solve y^2 + xy = x^3 exactly
        let k = LocalField::from_pf(5, 1).unwrap();
        let u = PAdicNumber::from_int(&k, 2);
        let om = &PAdicNumber::one(&k) - &u;
        let x = u.try_div(&(&om * &om)).unwrap();
        let y = (&u * &u).try_div(&(&(&om * &om) * &om)).unwrap();
        let r = &(&(&y * &y) + &(&x * &y)) - &(&(&x * &x) * &x);
        assert!(r.is_exact_zero());
    }

    #[test]
    fn residual_at_two() {
        let c = cfg(5, 1, 3);
        let field = c.field().clone();
        let u = PAdicNumber::from_int(&field, 2).with_absolute_precision(60);
        let v = weierstrass_residual(&u, &c).unwrap();
        assert!(v >= 18, "residual valuation {v}");
        assert_eq!(coord_x(&u, &c).unwrap().valuation(), Some(0));
    }

    #[test]
    fn residual_improves_with_order() {
        let c8 = cfg(7, 1, 3);
        let c9 = c8.with_order(9).unwrap();
        let field = c8.field().clone();
        let u = PAdicNumber::from_digits(&field, 1, &[3; 60]).unwrap();
        let r8 = weierstrass_residual(&u, &c8).unwrap();
        let r9 = weierstrass_residual(&u, &c9).unwrap();
        assert!(r8 >= 18 && r9 >= r8 + 3, "{r8} {r9}");
    }

    #[test]
    fn theta_examples() {
        let c = cfg(5, 1, 3);
        let k = c.field().clone();
        let five = BigRational::from_integer(5.into());
        assert_eq!(theta_norm(&PAdicNumber::pi_power(&k, 1), &c).unwrap(), five);
        let unit = PAdicNumber::from_digits(&k, 0, &[3, 1, 4]).unwrap();
        assert_eq!(theta_norm(&unit, &c).unwrap(), BigRational::one());
        assert!(theta_norm(&PAdicNumber::one(&k), &c).unwrap().is_zero());
        assert!(theta_norm(&PAdicNumber::pi_power(&k, 6), &c).unwrap().is_zero());
    }

    #[test]
    fn theta_product_matches_bookkeeping() {
        let c = cfg(7, 1, 4);
        let k = c.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for w in -9..10 {
            let z = sample_circle(&k, w, w + 20, &mut rng).unwrap();
            let th = theta(&z, &c, 40).unwrap();
            assert_eq!(th.norm().unwrap(), theta_norm(&z, &c).unwrap(), "w = {w}");
        }
    }

    #[test]
    fn g_examples() {
        let c = cfg(5, 1, 3);
        let k = c.field().clone();
        let one = PAdicNumber::one(&k);
        let five = PAdicNumber::from_int(&k, 5);
        let six = PAdicNumber::from_int(&k, 6).with_absolute_precision(12);
        assert_eq!(g_pointwise(&one, &five, &c).unwrap(), BigRational::new(1.into(), 5.into()));
        assert_eq!(g_pointwise(&one, &six, &c).unwrap(), BigRational::one());
        assert_eq!(g_pointwise(&five, &one, &c).unwrap(), g_pointwise(&one, &five, &c).unwrap());
        let pole = PAdicNumber::pi_power(&k, 2);
        assert_eq!(g_pointwise(&five, &pole, &c), Err(ModelError::Pole));
    }

    #[test]
    fn density_examples() {
        let c = cfg(5, 1, 3);
        let k = c.field().clone();
        let u = PAdicNumber::from_digits(&k, 0, &[2; 50]).unwrap();
        assert_eq!(invariant_density(&u, &c).unwrap(), BigRational::one());
        let u = PAdicNumber::from_digits(&k, 1, &[2; 50]).unwrap();
        assert_eq!(invariant_density(&u, &c).unwrap(), BigRational::from_integer(5.into()));
    }

    /// Independent route: `X = Σ_{n∈Z} q^n u/(1 - q^n u)^2 - 2 s_1(q)` and
    /// `Y = Σ_{n∈Z} (q^n u)^2/(1 - q^n u)^3 + s_1(q)`.
    fn lattice_sums(u: &PAdicNumber, c: &CurveConfig, span: i64) -> (PAdicNumber, PAdicNumber) {
        let k = c.field().clone();
        let one = PAdicNumber::one(&k);
        let mut x = PAdicNumber::zero(&k);
        let mut y = PAdicNumber::zero(&k);
        for n in -span..=span {
            let w = u.shift(n * c.vq());
            let om = &one - &w;
            x = &x + &w.try_div(&(&om * &om)).unwrap();
            y = &y + &(&w * &w).try_div(&(&(&om * &om) * &om)).unwrap();
        }
        let mut s1 = PAdicNumber::zero(&k);
        for m in 1..=(c.order() as i64 + 2) {
            let sigma: i64 = (1..=m).filter(|d| m % d == 0).sum();
            s1 = &s1 + &PAdicNumber::from_int(&k, sigma).shift(m * c.vq());
        }
        let two = PAdicNumber::from_int(&k, 2);
        (&x - &(&two * &s1), &y + &s1)
    }

    #[test]
    fn coordinates_agree_with_lattice_sums() {
        let c = cfg(5, 1, 3);
        let k = c.field().clone();
        let floor = c.vq() * (c.order() as i64 + 1);
        for (v, digits) in [(0, [2u32; 60]), (1, [3; 60]), (2, [4; 60])] {
            let u = PAdicNumber::from_digits(&k, v, &digits).unwrap();
            let (xl, yl) = lattice_sums(&u, &c, 12);
            let dx = &coord_x(&u, &c).unwrap() - &xl;
            let dy = &coord_y(&u, &c).unwrap() - &yl;
            assert!(valuation_floor(&dx) >= floor - c.vq(), "X at v={v}: {dx}");
            assert!(valuation_floor(&dy) >= floor - c.vq(), "Y at v={v}: {dy}");
        }
    }
}
