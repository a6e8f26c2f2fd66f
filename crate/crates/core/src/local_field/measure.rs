use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{rational_pow, FieldParams};

/// Haar measure `|du|` and the gauge measure `|ω| = |du|/|u|` on the
/// circles `S_k = {|u| = t^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureModel {
    params: FieldParams,
}

impl MeasureModel {
    pub fn new(params: FieldParams) -> Self {
        Self { params }
    }

    fn t(&self) -> BigRational {
        self.params.t()
    }

    /// `|ω|(S_k) = 1 - t`, the same for every circle.
    pub fn circle_mass(&self, _k: i64) -> BigRational {
        BigRational::one() - self.t()
    }

    /// `|ω|` of the fundamental annulus `{t^{vq} < |u| <= 1}`.
    pub fn annulus_mass(&self, vq: i64) -> BigRational {
        (BigRational::one() - self.t()) * BigRational::from_integer(BigInt::from(vq))
    }

    /// Haar measure of a closed ball of radius `t^d`.
    pub fn haar_ball(&self, d: i64) -> BigRational {
        rational_pow(&self.t(), d)
    }

    /// `|ω|` of a ball of radius `t^d` inside `S_k` (requires `d > k`).
    pub fn omega_ball(&self, k: i64, d: i64) -> BigRational {
        rational_pow(&self.t(), d - k)
    }

    /// Haar measure of `{y ∈ S_k : |y - c| = t^ν}` for `c ∈ S_k`:
    /// `t^k (1 - 2t)` when `ν = k`, `t^ν (1 - t)` when `ν > k`.
    pub fn stratum_haar(&self, k: i64, nu: i64) -> BigRational {
        let t = self.t();
        let two = BigRational::from_integer(BigInt::from(2));
        if nu == k {
            rational_pow(&t, k) * (BigRational::one() - two * &t)
        } else {
            rational_pow(&t, nu) * (BigRational::one() - &t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strata_partition_the_circle() {
        let params = FieldParams::new(7, 1).unwrap();
        let m = MeasureModel::new(params);
        let t = params.t();
        let k = 2;
        // Σ_{ν>k} t^ν(1-t) = t^{k+1}, so the strata fill t^k(1-t)
        let tail = rational_pow(&t, k + 1);
        assert_eq!(m.stratum_haar(k, k) + tail, rational_pow(&t, k) * (BigRational::one() - &t));
        assert_eq!(m.annulus_mass(3), m.circle_mass(0) * BigRational::from_integer(3.into()));
    }
}
