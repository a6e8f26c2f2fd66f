//! Recovering `v(q)` and congruence data from the degree eigenvalues.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::HearingError;
use crate::kernel::Mode;
use crate::local_field::FieldParams;
use crate::spectral::{build_matrix, degree_vector, SpectrumDescriptor};
use crate::tate_model::CurveConfig;

/// Default tolerance for float fingerprints.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FingerprintValues {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl FingerprintValues {
    pub fn len(&self) -> usize {
        match self {
            Self::Exact(v) => v.len(),
            Self::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sorted_f64(&self) -> Vec<f64> {
        let mut v: Vec<f64> = match self {
            Self::Exact(v) => v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            Self::Float(v) => v.clone(),
        };
        v.sort_by(f64::total_cmp);
        v
    }
}

/// The wavelet part of a spectrum, `{-deg_k}`, over a known field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFingerprint {
    pub field: FieldParams,
    pub degrees: FingerprintValues,
    pub radial: Option<Vec<f64>>,
}

impl SpectralFingerprint {
    pub fn new(field: FieldParams, degrees: FingerprintValues) -> Result<Self, HearingError> {
        if degrees.is_empty() {
            return Err(HearingError::EmptyFingerprint);
        }
        let negative = match &degrees {
            FingerprintValues::Exact(v) => v.iter().all(|x| x < &BigRational::from_integer(0.into())),
            FingerprintValues::Float(v) => v.iter().all(|&x| x < 0.0),
        };
        if !negative {
            return Err(HearingError::InvalidWindow("degree eigenvalues must be negative".into()));
        }
        Ok(Self { field, degrees, radial: None })
    }

    pub fn from_spectrum(field: FieldParams, s: &SpectrumDescriptor) -> Result<Self, HearingError> {
        let mut fp = Self::new(field, FingerprintValues::Exact(s.degree_values()))?;
        fp.radial = Some(s.radial_eigenvalues.clone());
        Ok(fp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HearingReport {
    pub vq: i64,
    pub parity: Parity,
    pub two_torsion_level: Option<i64>,
    pub third_root_pairs: Vec<(i64, i64)>,
    pub residual: f64,
}

impl HearingReport {
    pub fn for_vq(vq: i64, residual: f64) -> Self {
        Self {
            vq,
            parity: if vq % 2 == 0 { Parity::Even } else { Parity::Odd },
            two_torsion_level: detect_two_torsion(vq),
            third_root_pairs: third_root_solutions(vq),
            residual,
        }
    }
}

/// The level `k ≠ 0` with `2k ≡ 0 mod v(q)`, if any.
pub fn detect_two_torsion(vq: i64) -> Option<i64> {
    (vq % 2 == 0).then_some(vq / 2)
}

/// All `(k, ℓ) ∈ {0..v(q)}²` with `k + 3ℓ ≡ 0 mod v(q)`, in lexicographic order.
pub fn third_root_solutions(vq: i64) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = (0..vq).map(|l| ((-3 * l).rem_euclid(vq), l)).collect();
    out.sort_unstable();
    out
}

/// `{-deg_k}` predicted for `v(q) = vq`, as an exact sorted multiset.
pub fn predicted_fingerprint(field: FieldParams, vq: i64, mode: Mode) -> Result<Vec<BigRational>, HearingError> {
    let cfg = CurveConfig::from_parts(field.p, field.f, vq)?;
    let a = build_matrix(&cfg, mode)?;
    let mut v: Vec<BigRational> = degree_vector(&a, &cfg).0.into_iter().map(|d| -d).collect();
    v.sort();
    Ok(v)
}

fn residual(fp: &FingerprintValues, predicted: &[BigRational]) -> f64 {
    if fp.len() != predicted.len() {
        return f64::INFINITY;
    }
    if let FingerprintValues::Exact(v) = fp {
        let mut v = v.clone();
        v.sort();
        if v == predicted {
            return 0.0;
        }
    }
    let pf: Vec<f64> = predicted.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    fp.sorted_f64().iter().zip(&pf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Searches `v ∈ 3..=vq_max` for the degree multiset matching `fp`.
///
/// Exact fingerprints match only on exact equality; float fingerprints
/// match when the sorted `L∞` distance is at most `tol`. Equal best
/// residuals are reported as ambiguous.
pub fn invert_spectrum(
    fp: &SpectralFingerprint,
    vq_max: i64,
    tol: f64,
    mode: Mode,
) -> Result<HearingReport, HearingError> {
    if vq_max < 3 {
        return Err(HearingError::InvalidWindow(format!("vq_max = {vq_max} is below 3")));
    }
    if !(tol >= 0.0) {
        return Err(HearingError::InvalidWindow(format!("tolerance {tol}")));
    }
    if fp.degrees.is_empty() {
        return Err(HearingError::EmptyFingerprint);
    }
    let exact = matches!(fp.degrees, FingerprintValues::Exact(_));
    let scored: Vec<(i64, f64)> = (3..=vq_max)
        .into_par_iter()
        .map(|v| Ok((v, residual(&fp.degrees, &predicted_fingerprint(fp.field, v, mode)?))))
        .collect::<Result<_, HearingError>>()?;
    let accept = |r: f64| if exact { r == 0.0 } else { r <= tol };
    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    if !accept(best) {
        return Err(HearingError::NoMatch(best));
    }
    let winners: Vec<i64> = scored.iter().filter(|s| s.1 == best).map(|s| s.0).collect();
    if winners.len() > 1 {
        return Err(HearingError::Ambiguous(winners));
    }
    Ok(HearingReport::for_vq(winners[0], best))
}

/// Pairs `v < w` in `3..=vq_max` whose predicted fingerprints coincide.
pub fn fingerprint_collisions(field: FieldParams, vq_max: i64, mode: Mode) -> Result<Vec<(i64, i64)>, HearingError> {
    let fps: Vec<_> = (3..=vq_max).map(|v| predicted_fingerprint(field, v, mode)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            if fps[i] == fps[j] {
                out.push((i as i64 + 3, j as i64 + 3));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectrum;

    fn params(p: u32, f: u32) -> FieldParams {
        FieldParams::new(p, f).unwrap()
    }

    #[test]
    fn congruence_helpers() {
        assert_eq!(detect_two_torsion(4), Some(2));
        assert_eq!(detect_two_torsion(3), None);
        assert_eq!(detect_two_torsion(10), Some(5));
        assert_eq!(third_root_solutions(3), vec![(0, 0), (0, 1), (0, 2)]);
        assert_eq!(third_root_solutions(4), vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        for v in 3..20 {
            let s = third_root_solutions(v);
            assert_eq!(s.len() as i64, v);
            assert!(s.iter().all(|&(k, l)| (k + 3 * l) % v == 0));
        }
    }

    #[test]
    fn round_trip_small() {
        let f = params(5, 1);
        for (vq, parity) in [(3, Parity::Odd), (4, Parity::Even)] {
            let cfg = CurveConfig::from_parts(5, 1, vq).unwrap();
            let s = spectrum(&cfg, Mode::Paper).unwrap();
            let fp = SpectralFingerprint::from_spectrum(f, &s).unwrap();
            let r = invert_spectrum(&fp, 12, DEFAULT_TOLERANCE, Mode::Paper).unwrap();
            assert_eq!(r.vq, vq);
            assert_eq!(r.parity, parity);
            assert_eq!(r.two_torsion_level, detect_two_torsion(vq));
            assert_eq!(r.residual, 0.0);
        }
    }

    #[test]
    fn float_fingerprint_and_perturbation() {
        let f = params(7, 1);
        let fp = predicted_fingerprint(f, 5, Mode::Oracle).unwrap();
        let mut floats: Vec<f64> = fp.iter().map(|x| x.to_f64().unwrap()).collect();
        let good = SpectralFingerprint::new(f, FingerprintValues::Float(floats.clone())).unwrap();
        assert_eq!(invert_spectrum(&good, 12, 1e-9, Mode::Oracle).unwrap().vq, 5);
        floats[2] += 1e-3;
        let bad = SpectralFingerprint::new(f, FingerprintValues::Float(floats)).unwrap();
        assert!(matches!(invert_spectrum(&bad, 12, 1e-9, Mode::Oracle), Err(HearingError::NoMatch(_))));
    }

    #[test]
    fn rejects_bad_input() {
        let f = params(5, 1);
        assert!(SpectralFingerprint::new(f, FingerprintValues::Float(vec![])).is_err());
        assert!(SpectralFingerprint::new(f, FingerprintValues::Float(vec![0.5])).is_err());
        let fp = SpectralFingerprint::new(f, FingerprintValues::Float(vec![-1.0])).unwrap();
        assert!(invert_spectrum(&fp, 2, 1e-9, Mode::Paper).is_err());
    }

    #[test]
    fn no_collisions_on_small_grid() {
        for (p, fdeg) in [(5, 1), (7, 1), (5, 2)] {
            for mode in [Mode::Paper, Mode::Oracle] {
                assert!(fingerprint_collisions(params(p, fdeg), 12, mode).unwrap().is_empty());
            }
        }
    }
}
