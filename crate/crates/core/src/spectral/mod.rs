//! The radial matrix `A_σ`, degrees, the Laplacian `L` on the complete
//! graph of circles, and the spectrum of `H_θ` on `L²(E_q(K), |ω|)`:
//! eigenvalues of `L` on radial functions, `-deg_k` on wavelets.

mod step;
mod wavelet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::kernel::{entry, Mode};
use crate::local_field::rational_pow;
use crate::tate_model::CurveConfig;

pub use step::{apply_adjacency, apply_operator, inner_product, Scalar, StepFunction, MAX_BALLS};
pub use wavelet::{wavelet_step, wavelet_value, wavelet_value_omega, WaveletSpec};

/// Residual bound for every eigenpair of `L`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("finite rational")
}

/// `A_σ(k,ℓ)` for `k, ℓ ∈ 0..vq`, exact.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMatrix {
    entries: Vec<Vec<BigRational>>,
    mode: Mode,
}

impl RadialMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, l: usize) -> &BigRational {
        &self.entries[k][l]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

pub fn build_matrix(cfg: &CurveConfig, mode: Mode) -> Result<RadialMatrix, SpectralError> {
    let n = cfg.vq();
    let entries = (0..n)
        .map(|k| (0..n).map(|l| entry(k, l, cfg, mode)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RadialMatrix { entries, mode })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<BigRational>);

impl DegreeVector {
    pub fn get(&self, k: usize) -> &BigRational {
        &self.0[k]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

/// `deg_k = (1-t) Σ_ℓ A_σ(k,ℓ)`.
pub fn degree_vector(a: &RadialMatrix, cfg: &CurveConfig) -> DegreeVector {
    let w = BigRational::one() - cfg.t();
    DegreeVector(
        a.entries
            .iter()
            .map(|row| row.iter().fold(BigRational::zero(), |acc, x| acc + x) * &w)
            .collect(),
    )
}

/// The literal closed form
/// `(1-t)[1 + t^k Σ_{ℓ<k} t^{3ℓ} + t^{3k} Σ_{ℓ>k} t^ℓ + ε_q(k) t^{4k}]`,
/// with both sums restricted to `ℓ + k ≢ 0 mod v(q)` and
/// `ε_q(k) = 1/(1-t^3)` when `v(q)` is even and `v(q) ∤ k`, else 1.
/// It is kept for comparison with the row sums.
pub fn degree_closed_form(k: i64, cfg: &CurveConfig) -> BigRational {
    let t = cfg.t();
    let vq = cfg.vq();
    let one = BigRational::one();
    let mut s = one.clone();
    for l in 0..k {
        if (l + k) % vq != 0 {
            s += rational_pow(&t, k + 3 * l);
        }
    }
    for l in k + 1..vq {
        if (l + k) % vq != 0 {
            s += rational_pow(&t, 3 * k + l);
        }
    }
    s += epsilon_q(k, cfg) * rational_pow(&t, 4 * k);
    s * (one - t)
}

pub fn epsilon_q(k: i64, cfg: &CurveConfig) -> BigRational {
    let vq = cfg.vq();
    if vq % 2 == 0 && k % vq != 0 {
        BigRational::one() / (BigRational::one() - rational_pow(&cfg.t(), 3))
    } else {
        BigRational::one()
    }
}

/// `L = (1-t) A_σ - diag(deg)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: Vec<Vec<BigRational>>,
}

impl LaplacianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, l: usize) -> &BigRational {
        &self.entries[k][l]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.entries.iter().map(|r| r.iter().fold(BigRational::zero(), |a, x| a + x)).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| to_f64(&self.entries[i][j]))
    }

    /// `(Lφ)_k` for an exact vector.
    pub fn apply(&self, phi: &[BigRational]) -> Vec<BigRational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(phi).fold(BigRational::zero(), |a, (x, y)| a + x * y))
            .collect()
    }
}

pub fn build_laplacian(
    a: &RadialMatrix,
    deg: &DegreeVector,
    cfg: &CurveConfig,
) -> Result<LaplacianMatrix, SpectralError> {
    let n = a.dim();
    if deg.len() != n {
        return Err(SpectralError::Dimension(format!("matrix {n}x{n}, degree vector {}", deg.len())));
    }
    let w = BigRational::one() - cfg.t();
    let entries = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let x = &w * a.get(k, l);
                    if k == l {
                        x - deg.get(k)
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    Ok(LaplacianMatrix { entries })
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct RadialEigen {
    pub values: Vec<f64>,
    /// Unit eigenvectors, `vectors[i]` belonging to `values[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub max_residual: f64,
}

pub fn eigen_radial(l: &LaplacianMatrix) -> Result<RadialEigen, SpectralError> {
    if !l.is_symmetric() {
        return Err(SpectralError::Dimension("matrix is not symmetric".into()));
    }
    symmetric_eigen(&l.to_dmatrix())
}

pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<RadialEigen, SpectralError> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut max_residual = 0.0f64;
    for &i in &order {
        let lambda = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i).into_owned();
        let r = (m * &v - &v * lambda).amax();
        max_residual = max_residual.max(r);
        values.push(lambda);
        vectors.push(v.iter().copied().collect());
    }
    if !(max_residual <= EIGEN_RESIDUAL_TOL) {
        return Err(SpectralError::Convergence(format!("residual {max_residual:e}")));
    }
    Ok(RadialEigen { values, vectors, max_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletEigenvalue {
    pub k: i64,
    #[serde(with = "crate::ratio_serde")]
    pub value: BigRational,
}

/// The full spectrum: eigenvalues of `L` on radial functions and, for every
/// circle, `-deg_k` with infinite multiplicity on wavelets supported there.
#[derive(Debug, Clone)]
pub struct SpectrumDescriptor {
    pub mode: Mode,
    pub radial_eigenvalues: Vec<f64>,
    pub radial_eigenvectors: Vec<Vec<f64>>,
    pub wavelet_eigenvalues: Vec<WaveletEigenvalue>,
    pub wavelet_multiplicity_infinite: bool,
}

impl SpectrumDescriptor {
    pub fn degree_values(&self) -> Vec<BigRational> {
        self.wavelet_eigenvalues.iter().map(|w| w.value.clone()).collect()
    }
}

/// Everything the spectrum is built from, kept together for reporting.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub matrix: RadialMatrix,
    pub degrees: DegreeVector,
    pub laplacian: LaplacianMatrix,
    pub spectrum: SpectrumDescriptor,
}

pub fn spectral_data(cfg: &CurveConfig, mode: Mode) -> Result<SpectralData, SpectralError> {
    let matrix = build_matrix(cfg, mode)?;
    let degrees = degree_vector(&matrix, cfg);
    let laplacian = build_laplacian(&matrix, &degrees, cfg)?;
    let eig = eigen_radial(&laplacian)?;
    let wavelet_eigenvalues = degrees
        .0
        .iter()
        .enumerate()
        .map(|(k, d)| WaveletEigenvalue { k: k as i64, value: -d.clone() })
        .collect();
    let spectrum = SpectrumDescriptor {
        mode,
        radial_eigenvalues: eig.values,
        radial_eigenvectors: eig.vectors,
        wavelet_eigenvalues,
        wavelet_multiplicity_infinite: true,
    };
    Ok(SpectralData { matrix, degrees, laplacian, spectrum })
}

pub fn spectrum(cfg: &CurveConfig, mode: Mode) -> Result<SpectrumDescriptor, SpectralError> {
    Ok(spectral_data(cfg, mode)?.spectrum)
}

/// One entry of the comparison between the two modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDifference {
    pub quantity: String,
    pub k: i64,
    #[serde(with = "crate::ratio_serde")]
    pub paper: BigRational,
    #[serde(with = "crate::ratio_serde")]
    pub oracle: BigRational,
}

/// Entries and degrees where the modes differ, in a fixed order.
pub fn mode_differences(cfg: &CurveConfig) -> Result<Vec<ModeDifference>, SpectralError> {
    let ap = build_matrix(cfg, Mode::Paper)?;
    let ao = build_matrix(cfg, Mode::Oracle)?;
    let dp = degree_vector(&ap, cfg);
    let dop = degree_vector(&ao, cfg);
    let mut out = Vec::new();
    for k in 0..ap.dim() {
        for l in 0..ap.dim() {
            if ap.get(k, l) != ao.get(k, l) {
                out.push(ModeDifference {
                    quantity: format!("A_sigma({k},{l})"),
                    k: k as i64,
                    paper: ap.get(k, l).clone(),
                    oracle: ao.get(k, l).clone(),
                });
            }
        }
    }
    for k in 0..dp.len() {
        if dp.get(k) != dop.get(k) {
            out.push(ModeDifference {
                quantity: format!("deg({k})"),
                k: k as i64,
                paper: dp.get(k).clone(),
                oracle: dop.get(k).clone(),
            });
        }
    }
    Ok(out)
}

/// Exact rational from a machine integer pair, for fixtures and reports.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// True when every off-diagonal entry is positive.
pub fn off_diagonal_positive(l: &LaplacianMatrix) -> bool {
    let n = l.dim();
    (0..n).all(|i| (0..n).all(|j| i == j || l.get(i, j).is_positive()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::classify;
    use crate::kernel::CirclePairCase;

    fn cfg(p: u32, f: u32, vq: i64) -> CurveConfig {
        CurveConfig::from_parts(p, f, vq).unwrap()
    }

    #[test]
    fn closed_form_matrix_fixture() {
        let c = cfg(5, 1, 3);
        let a = build_matrix(&c, Mode::Paper).unwrap();
        let expect = [
            [ratio(1, 1), ratio(1, 5), ratio(1, 25)],
            [ratio(1, 5), ratio(1, 620), ratio(1, 1)],
            [ratio(1, 25), ratio(1, 1), ratio(1, 387500)],
        ];
        for k in 0..3 {
            for l in 0..3 {
                assert_eq!(a.get(k, l), &expect[k][l]);
            }
        }
        let d = degree_vector(&a, &c);
        assert_eq!(d.get(0), &ratio(124, 125));
        assert_eq!(d.get(1), &ratio(149, 155));
        assert_eq!(d.get(2), &(ratio(4, 5) * ratio(403001, 387500)));
    }

    #[test]
    fn modes_differ_only_on_diagonal_entries() {
        for (p, f, vq) in [(5, 1, 3), (7, 1, 5), (5, 2, 4), (7, 1, 6)] {
            let c = cfg(p, f, vq);
            let ap = build_matrix(&c, Mode::Paper).unwrap();
            let ao = build_matrix(&c, Mode::Oracle).unwrap();
            assert!(ap.is_symmetric() && ao.is_symmetric());
            for k in 0..vq as usize {
                for l in 0..vq as usize {
                    let diag = classify(k as i64, l as i64, vq) == CirclePairCase::Diagonal;
                    assert_eq!(ap.get(k, l) == ao.get(k, l), !diag, "({k},{l})");
                }
            }
        }
    }

    #[test]
    fn corollary_literal_values() {
        let c = cfg(5, 1, 3);
        assert_eq!(degree_closed_form(0, &c), ratio(4, 5) * (ratio(2, 1) + ratio(1, 5) + ratio(1, 25)));
        assert_eq!(degree_closed_form(1, &c), ratio(4, 5) * (ratio(1, 1) + ratio(1, 5) + ratio(1, 625)));
        let c4 = cfg(5, 1, 4);
        assert_eq!(epsilon_q(0, &c4), BigRational::one());
        assert_eq!(epsilon_q(1, &c4), BigRational::one() / (BigRational::one() - ratio(1, 125)));
        assert_eq!(epsilon_q(1, &c), BigRational::one());
    }

    #[test]
    fn laplacian_fixture() {
        let c = cfg(5, 1, 3);
        let a = build_matrix(&c, Mode::Paper).unwrap();
        let d = degree_vector(&a, &c);
        let l = build_laplacian(&a, &d, &c).unwrap();
        assert_eq!(l.get(0, 1), &ratio(4, 25));
        assert!(l.is_symmetric());
        assert!(l.row_sums().iter().all(|s| s.is_zero()));
        assert!(off_diagonal_positive(&l));
    }

    #[test]
    fn radial_spectrum_regression() {
        let c = cfg(5, 1, 3);
        let s = spectrum(&c, Mode::Paper).unwrap();
        let v = &s.radial_eigenvalues;
        assert!(v[2].abs() < 1e-12);
        assert!(v[0] < -1e-3 && v[1] < -1e-3);
        assert!((v[0] + 1.704_6).abs() < 1e-3 && (v[1] + 0.279_4).abs() < 1e-3, "{v:?}");
        let z = &s.radial_eigenvectors[2];
        assert!(z.iter().all(|x| (x.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-10));
    }

    #[test]
    fn eigenvalues_invariant_under_permutation() {
        let c = cfg(7, 1, 5);
        let a = build_matrix(&c, Mode::Oracle).unwrap();
        let d = degree_vector(&a, &c);
        let l = build_laplacian(&a, &d, &c).unwrap();
        let base = eigen_radial(&l).unwrap().values;
        let perm = [3usize, 0, 4, 1, 2];
        let m = l.to_dmatrix();
        let pm = DMatrix::from_fn(5, 5, |i, j| m[(perm[i], perm[j])]);
        let other = symmetric_eigen(&pm).unwrap().values;
        for (x, y) in base.iter().zip(&other) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn wavelet_part_fixture() {
        let c = cfg(5, 1, 3);
        let s = spectrum(&c, Mode::Paper).unwrap();
        let w = s.degree_values();
        assert_eq!(w, vec![-ratio(124, 125), -ratio(149, 155), -(ratio(4, 5) * ratio(403001, 387500))]);
        assert!(s.wavelet_multiplicity_infinite);
    }
}
