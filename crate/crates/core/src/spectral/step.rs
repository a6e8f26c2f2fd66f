//! Step functions on the fundamental annulus at resolution `m` (constant on
//! balls of radius `t^m`) and the exact action of `H_θ` on them.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use super::{build_matrix, degree_vector, to_f64};
use crate::error::SpectralError;
use crate::kernel::Mode;
use crate::tate_model::CurveConfig;

/// Upper bound on the number of balls a step function may carry.
pub const MAX_BALLS: usize = 1 << 22;

pub trait Scalar:
    Copy + Debug + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    /// `self · conj(other)`.
    fn mul_conj(self, other: Self) -> Self;
}

impl Scalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn mul_conj(self, other: Self) -> Self {
        self * other
    }
}

impl Scalar for Complex64 {
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn mul_conj(self, other: Self) -> Self {
        self * Complex64::conj(&other)
    }
}

/// Function on the annulus that is constant on balls of radius `t^m`.
///
/// On circle `k` a ball is given by the digits at positions `k..m`, leading
/// digit nonzero; balls are stored in mixed-radix order with the leading
/// digit most significant, so balls sharing a digit prefix are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    q: u32,
    vq: i64,
    m: i64,
    t: f64,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn zeros(cfg: &CurveConfig, m: i64) -> Result<Self, SpectralError> {
        let q = cfg.field().residue_size();
        let vq = cfg.vq();
        if m < vq {
            return Err(SpectralError::Resolution(format!("resolution {m} below v(q) = {vq}")));
        }
        let mut total = 0usize;
        let mut values = Vec::with_capacity(vq as usize);
        for k in 0..vq {
            let n = circle_len(q, m, k).filter(|&n| n <= MAX_BALLS).ok_or_else(|| {
                SpectralError::Resolution(format!("resolution {m} needs too many balls for p^f = {q}"))
            })?;
            total += n;
            values.push(vec![T::zero(); n]);
        }
        if total > MAX_BALLS {
            return Err(SpectralError::Resolution(format!("{total} balls exceed the cap {MAX_BALLS}")));
        }
        Ok(Self { q, vq, m, t: cfg.params().t_f64(), values })
    }

    /// Step function with value `f(k, digits)` on the ball with the given
    /// digits at positions `k..m`.
    pub fn from_fn(cfg: &CurveConfig, m: i64, mut f: impl FnMut(i64, &[u32]) -> T) -> Result<Self, SpectralError> {
        let mut s = Self::zeros(cfg, m)?;
        for k in 0..s.vq {
            let mut digits = vec![0u32; (m - k) as usize];
            digits[0] = 1;
            for i in 0..s.values[k as usize].len() {
                s.values[k as usize][i] = f(k, &digits);
                increment(&mut digits, s.q);
            }
        }
        Ok(s)
    }

    /// Lift of a radial vector: value `phi[k]` on all of `S_k`.
    pub fn from_radial(cfg: &CurveConfig, m: i64, phi: &[T]) -> Result<Self, SpectralError> {
        if phi.len() != cfg.vq() as usize {
            return Err(SpectralError::Dimension(format!("{} values for {} circles", phi.len(), cfg.vq())));
        }
        let mut s = Self::zeros(cfg, m)?;
        for (vals, &v) in s.values.iter_mut().zip(phi) {
            vals.fill(v);
        }
        Ok(s)
    }

    pub fn resolution(&self) -> i64 {
        self.m
    }

    pub fn vq(&self) -> i64 {
        self.vq
    }

    pub fn residue_size(&self) -> u32 {
        self.q
    }

    pub fn circle(&self, k: i64) -> &[T] {
        &self.values[k as usize]
    }

    pub fn circle_mut(&mut self, k: i64) -> &mut [T] {
        &mut self.values[k as usize]
    }

    pub fn len(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|ω|` of one ball of radius `t^m` on circle `k`.
    pub fn ball_mass(&self, k: i64) -> f64 {
        self.t.powi((self.m - k) as i32)
    }

    /// Index of the ball with digits at positions `k..m`.
    pub fn index_of(&self, k: i64, digits: &[u32]) -> usize {
        let mut idx = (digits[0] - 1) as usize;
        for &d in &digits[1..(self.m - k) as usize] {
            idx = idx * self.q as usize + d as usize;
        }
        idx
    }

    pub fn digits_of(&self, k: i64, mut idx: usize) -> Vec<u32> {
        let n = (self.m - k) as usize;
        let mut digits = vec![0u32; n];
        for i in (1..n).rev() {
            digits[i] = (idx % self.q as usize) as u32;
            idx /= self.q as usize;
        }
        digits[0] = idx as u32 + 1;
        digits
    }

    pub fn circle_integral(&self, k: i64) -> T {
        let s = self.values[k as usize].iter().fold(T::zero(), |a, &x| a + x);
        s * self.ball_mass(k)
    }

    /// `∫ u |ω|` over the annulus.
    pub fn integral(&self) -> T {
        (0..self.vq).fold(T::zero(), |a, k| a + self.circle_integral(k))
    }

    /// `|ω|`-mean on each circle.
    pub fn average(&self) -> Vec<T> {
        self.values
            .iter()
            .map(|v| v.iter().fold(T::zero(), |a, &x| a + x) * (1.0 / v.len() as f64))
            .collect()
    }

    pub fn map(&self, mut f: impl FnMut(i64, T) -> T) -> Self {
        let mut out = self.clone();
        for (k, vals) in out.values.iter_mut().enumerate() {
            for x in vals.iter_mut() {
                *x = f(k as i64, *x);
            }
        }
        out
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Result<Self, SpectralError> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x = f(*x, y);
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), SpectralError> {
        if self.q != other.q || self.vq != other.vq || self.m != other.m {
            return Err(SpectralError::Dimension("step functions on different grids".into()));
        }
        Ok(())
    }
}

impl StepFunction<f64> {
    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl StepFunction<Complex64> {
    pub fn re(&self) -> StepFunction<f64> {
        StepFunction {
            q: self.q,
            vq: self.vq,
            m: self.m,
            t: self.t,
            values: self.values.iter().map(|v| v.iter().map(|z| z.re).collect()).collect(),
        }
    }
}

fn circle_len(q: u32, m: i64, k: i64) -> Option<usize> {
    let mut n = (q - 1) as usize;
    for _ in 0..(m - k - 1) {
        n = n.checked_mul(q as usize)?;
    }
    Some(n)
}

fn increment(digits: &mut [u32], q: u32) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < q {
            return;
        }
        digits[i] = 0;
    }
}

/// `⟨u, v⟩_ω = ∫ u v̄ |ω|`.
pub fn inner_product<T: Scalar>(u: &StepFunction<T>, v: &StepFunction<T>) -> Result<T, SpectralError> {
    u.check_same_shape(v)?;
    let mut acc = T::zero();
    for k in 0..u.vq {
        let s = u.values[k as usize]
            .iter()
            .zip(&v.values[k as usize])
            .fold(T::zero(), |a, (&x, &y)| a + x.mul_conj(y));
        acc = acc + s * u.ball_mass(k);
    }
    Ok(acc)
}

/// `A_θ u(x) = ∫ H_θ(x,y) u(y) |ω(y)|`, exactly for step data.
///
/// Across circles the kernel is constant. Within a non-pole circle `k`,
/// `H_θ(x,y) = t^{2k} |x - y|^2`: balls whose digits first differ at
/// position `j` contribute `t^{2k+2j}` times their mass, and the ball of
/// `x` itself contributes `t^{k+3m}(1-t)/(1-t^3)` times `u(x)`.
pub fn apply_adjacency<T: Scalar>(u: &StepFunction<T>, cfg: &CurveConfig) -> Result<StepFunction<T>, SpectralError> {
    if u.vq != cfg.vq() || u.q != cfg.field().residue_size() {
        return Err(SpectralError::Dimension("step function built for another curve".into()));
    }
    let (vq, m, t, q) = (u.vq, u.m, u.t, u.q as usize);
    let integrals: Vec<T> = (0..vq).map(|k| u.circle_integral(k)).collect();
    let mut out = u.clone();
    for k in 0..vq {
        let mut cross = T::zero();
        for l in 0..vq {
            if l == k {
                continue;
            }
            let c = if (k + l) % vq == 0 { 1.0 } else { t.powi((k + l + 2 * k.min(l)) as i32) };
            cross = cross + integrals[l as usize] * c;
        }
        let vals = &u.values[k as usize];
        let res = &mut out.values[k as usize];
        if (2 * k) % vq == 0 {
            let v = cross + integrals[k as usize];
            res.fill(v);
            continue;
        }
        let n = vals.len();
        let self_ball = t.powi((k + 3 * m) as i32) * (1.0 - t) / (1.0 - t.powi(3));
        for (r, &x) in res.iter_mut().zip(vals) {
            *r = cross + x * self_ball;
        }
        // block sums at prefix length j - k, finest first
        let mass = t.powi((m - k) as i32);
        let mut finer: Vec<T> = vals.clone();
        let mut finer_block = 1usize;
        for j in (k..m).rev() {
            let block = if j == k { n } else { finer_block * q };
            let coarse: Vec<T> = finer
                .chunks(block / finer_block)
                .map(|c| c.iter().fold(T::zero(), |a, &x| a + x))
                .collect();
            let c = t.powi((2 * k + 2 * j) as i32) * mass;
            for (i, r) in res.iter_mut().enumerate() {
                let diff = coarse[i / block] - finer[i / finer_block];
                *r = *r + diff * c;
            }
            finer = coarse;
            finer_block = block;
        }
    }
    Ok(out)
}

/// `H_θ u = A_θ u - deg_k u` with the degrees of the chosen mode.
pub fn apply_operator<T: Scalar>(
    u: &StepFunction<T>,
    cfg: &CurveConfig,
    mode: Mode,
) -> Result<StepFunction<T>, SpectralError> {
    let a = build_matrix(cfg, mode)?;
    let deg = degree_vector(&a, cfg);
    let au = apply_adjacency(u, cfg)?;
    let mut out = au;
    for k in 0..u.vq {
        let d = to_f64(deg.get(k as usize));
        for (r, &x) in out.values[k as usize].iter_mut().zip(&u.values[k as usize]) {
            *r = *r - x * d;
        }
    }
    Ok(out)
}
