//! The Cauchy problem `∂u/∂t = ε H_θ u` on step functions, solved in the
//! eigenbasis, and the circle-level semigroup `P(t) = exp(tεQ)`.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::SpectralError;
use crate::kernel::Mode;
use crate::spectral::{
    build_laplacian, build_matrix, degree_vector, symmetric_eigen, to_f64, LaplacianMatrix, RadialEigen,
    StepFunction,
};
use crate::tate_model::CurveConfig;

/// A real step function at time `time` under the flow with rate `epsilon`.
#[derive(Debug, Clone)]
pub struct HeatState {
    pub time: f64,
    pub epsilon: f64,
    pub values: StepFunction<f64>,
}

impl HeatState {
    pub fn new(values: StepFunction<f64>, epsilon: f64) -> Result<Self, SpectralError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(SpectralError::Dimension(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { time: 0.0, epsilon, values })
    }

    pub fn resolution(&self) -> i64 {
        self.values.resolution()
    }

    pub fn mass(&self) -> f64 {
        self.values.integral()
    }
}

/// Circle means and the mean-zero remainder.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub radial: Vec<f64>,
    pub fluctuation: StepFunction<f64>,
}

pub fn decompose(u: &HeatState) -> Decomposition {
    let radial = u.values.average();
    let fluctuation = u.values.map(|k, x| x - radial[k as usize]);
    Decomposition { radial, fluctuation }
}

pub fn recompose(d: &Decomposition) -> StepFunction<f64> {
    d.fluctuation.map(|k, x| x + d.radial[k as usize])
}

/// Eigendata of `L` and the decay rates, shared across many times.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    cfg: CurveConfig,
    mode: Mode,
    laplacian: LaplacianMatrix,
    eigen: RadialEigen,
    degrees: Vec<f64>,
    oracle_degrees: Vec<f64>,
}

impl HeatSolver {
    pub fn new(cfg: &CurveConfig, mode: Mode) -> Result<Self, SpectralError> {
        let a = build_matrix(cfg, mode)?;
        let deg = degree_vector(&a, cfg);
        let laplacian = build_laplacian(&a, &deg, cfg)?;
        let eigen = symmetric_eigen(&laplacian.to_dmatrix())?;
        let oracle_degrees = match mode {
            Mode::Oracle => deg.to_f64(),
            Mode::Paper => degree_vector(&build_matrix(cfg, Mode::Oracle)?, cfg).to_f64(),
        };
        Ok(Self { cfg: cfg.clone(), mode, laplacian, eigen, degrees: deg.to_f64(), oracle_degrees })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn laplacian(&self) -> &LaplacianMatrix {
        &self.laplacian
    }

    /// Eigenvalues of `L`, ascending; the last is 0.
    pub fn radial_eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Largest nonzero eigenvalue of `L`.
    pub fn spectral_gap(&self) -> f64 {
        let v = &self.eigen.values;
        v[v.len() - 2]
    }

    /// `exp(sL)` from the eigendecomposition.
    pub fn radial_propagator(&self, s: f64) -> DMatrix<f64> {
        let n = self.eigen.values.len();
        let mut out = DMatrix::zeros(n, n);
        for (lambda, v) in self.eigen.values.iter().zip(&self.eigen.vectors) {
            let e = (s * lambda).exp();
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += e * v[i] * v[j];
                }
            }
        }
        out
    }

    /// Eigenvalue of `H_θ` on mean-zero functions of circle `k` that are
    /// constant on balls of level `d + 1` and average to zero on balls of
    /// level `d`.
    ///
    /// Paper mode uses `-deg_k` for every level. Oracle mode uses the exact
    /// value `-deg_k - δ_k(d)`, where the correction
    /// `δ_k(d) = t^{k+3d+1} - t^{k+3d+3}(1-t)/(1-t^3)` comes from the kernel
    /// mass inside the ball and vanishes on pole circles.
    pub fn fluctuation_rate(&self, k: i64, d: i64) -> f64 {
        match self.mode {
            Mode::Paper => -self.degrees[k as usize],
            Mode::Oracle => {
                let vq = self.cfg.vq();
                let t = self.cfg.params().t_f64();
                let delta = if (2 * k) % vq == 0 {
                    0.0
                } else {
                    t.powi((k + 3 * d + 1) as i32) - t.powi((k + 3 * d + 3) as i32) * (1.0 - t) / (1.0 - t.powi(3))
                };
                -self.oracle_degrees[k as usize] - delta
            }
        }
    }

    /// `u(s)` for `s = time` elapsed from `u0`.
    pub fn evolve(&self, u0: &HeatState, time: f64) -> Result<HeatState, SpectralError> {
        if time < 0.0 {
            return Err(SpectralError::Dimension(format!("negative time {time}")));
        }
        if u0.values.vq() != self.cfg.vq() {
            return Err(SpectralError::Dimension("state built for another curve".into()));
        }
        if time == 0.0 {
            return Ok(u0.clone());
        }
        Ok(self.propagate(u0, time))
    }

    /// The spectral formula, valid for either sign of `time`.
    fn propagate(&self, u0: &HeatState, time: f64) -> HeatState {
        let s = time * u0.epsilon;
        let Decomposition { radial, .. } = decompose(u0);
        let phi = self.radial_propagator(s) * nalgebra::DVector::from_vec(radial.clone());
        let q = u0.values.residue_size() as usize;
        let m = u0.values.resolution();
        let mut out = u0.values.clone();
        for k in 0..self.cfg.vq() {
            let vals = u0.values.circle(k);
            let n = vals.len();
            // block averages for prefix lengths 0..=m-k, coarsest first
            let levels = (m - k) as usize;
            let mut blocks = Vec::with_capacity(levels + 1);
            let mut size = n;
            blocks.push(n);
            for r in 1..=levels {
                size = if r == 1 { n / (q - 1) } else { size / q };
                blocks.push(size);
            }
            let avgs: Vec<Vec<f64>> = blocks
                .iter()
                .map(|&b| vals.chunks(b).map(|c| c.iter().sum::<f64>() / b as f64).collect())
                .collect();
            let res = out.circle_mut(k);
            for (i, r) in res.iter_mut().enumerate() {
                let mut acc = phi[k as usize];
                for lvl in 0..levels {
                    let diff = avgs[lvl + 1][i / blocks[lvl + 1]] - avgs[lvl][i / blocks[lvl]];
                    let rate = match self.mode {
                        Mode::Paper => self.fluctuation_rate(k, k),
                        Mode::Oracle => self.fluctuation_rate(k, k + lvl as i64),
                    };
                    acc += (s * rate).exp() * diff;
                }
                *r = acc;
            }
        }
        HeatState { time: u0.time + time, epsilon: u0.epsilon, values: out }
    }
}

pub fn evolve(u0: &HeatState, time: f64, cfg: &CurveConfig, mode: Mode) -> Result<HeatState, SpectralError> {
    HeatSolver::new(cfg, mode)?.evolve(u0, time)
}

/// `sup |u - ū|`, with `ū` the constant of equal mass.
pub fn sup_deviation(u: &StepFunction<f64>, cfg: &CurveConfig) -> f64 {
    let bar = u.integral() / (cfg.vq() as f64 * (1.0 - cfg.params().t_f64()));
    u.map(|_, x| x - bar).max_abs()
}

/// The circle-level generator: `Q_{kℓ} = (1-t)A_σ(k,ℓ)` off the diagonal,
/// rows summing to zero.
///
/// Same-circle jumps carry rate `(1-t)A_σ(k,k)`, which enters both the
/// diagonal of `L` and `deg_k`; so `Q = L` entry for entry.
pub fn generator(cfg: &CurveConfig, mode: Mode) -> Result<Vec<Vec<BigRational>>, SpectralError> {
    let a = build_matrix(cfg, mode)?;
    let w = BigRational::one() - cfg.t();
    let n = a.dim();
    let mut q: Vec<Vec<BigRational>> = (0..n)
        .map(|k| (0..n).map(|l| if k == l { BigRational::zero() } else { &w * a.get(k, l) }).collect())
        .collect();
    for (k, row) in q.iter_mut().enumerate() {
        let s = row.iter().fold(BigRational::zero(), |acc, x| acc + x);
        row[k] = -s;
    }
    Ok(q)
}

/// Row-stochastic `P(t) = exp(tεQ)` on circle labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub time: f64,
    pub entries: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k][l]
    }

    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.entries[i][k] * other.entries[k][j]).sum()).collect())
            .collect();
        Self { time: self.time + other.time, entries }
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.entries.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn transition_matrix(time: f64, epsilon: f64, cfg: &CurveConfig, mode: Mode) -> Result<TransitionMatrix, SpectralError> {
    if time < 0.0 || !(epsilon > 0.0) {
        return Err(SpectralError::Dimension(format!("need t ≥ 0 and ε > 0, got t = {time}, ε = {epsilon}")));
    }
    let q = generator(cfg, mode)?;
    let n = q.len();
    let qm = DMatrix::from_fn(n, n, |i, j| to_f64(&q[i][j]));
    let eig = symmetric_eigen(&qm)?;
    let mut entries = vec![vec![0.0; n]; n];
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let e = (time * epsilon * lambda).exp();
        for i in 0..n {
            for j in 0..n {
                entries[i][j] += e * v[i] * v[j];
            }
        }
    }
    for row in entries.iter_mut() {
        for x in row.iter_mut() {
            if x.abs() < 1e-300 {
                *x = 0.0;
            }
        }
    }
    Ok(TransitionMatrix { time, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_operator, wavelet_step, WaveletSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(vq: i64) -> CurveConfig {
        CurveConfig::from_parts(5, 1, vq).unwrap()
    }

    fn random_state(c: &CurveConfig, m: i64, seed: u64) -> HeatState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = StepFunction::from_fn(c, m, |_, _| rng.random_range(0.0..2.0)).unwrap();
        HeatState::new(u, 1.0).unwrap()
    }

    #[test]
    fn decomposition_round_trip() {
        let c = cfg(3);
        let constant = HeatState::new(StepFunction::from_radial(&c, 4, &[2.0, 2.0, 2.0]).unwrap(), 1.0).unwrap();
        let d = decompose(&constant);
        assert_eq!(d.fluctuation.max_abs(), 0.0);
        assert_eq!(recompose(&d), constant.values);
        let w = WaveletSpec { k: 1, d: 2, center: vec![3], j: 2 };
        let psi = wavelet_step(&w, &c, 4).unwrap().re();
        let d = decompose(&HeatState::new(psi, 1.0).unwrap());
        assert!(d.radial.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn generator_equals_laplacian() {
        for vq in 3..7 {
            let c = cfg(vq);
            for mode in [Mode::Paper, Mode::Oracle] {
                let q = generator(&c, mode).unwrap();
                let l = HeatSolver::new(&c, mode).unwrap();
                assert_eq!(q, l.laplacian().rows());
            }
        }
    }

    #[test]
    fn indicator_relaxes_to_a_third() {
        let c = cfg(3);
        let eta = HeatState::new(StepFunction::from_radial(&c, 4, &[1.0, 0.0, 0.0]).unwrap(), 1.0).unwrap();
        let late = evolve(&eta, 200.0, &c, Mode::Paper).unwrap();
        assert!(late.values.map(|_, x| x - 1.0 / 3.0).max_abs() < 1e-12);
        assert_eq!(late.time, 200.0);
    }

    #[test]
    fn derivative_matches_operator() {
        let c = cfg(3);
        let u0 = random_state(&c, 5, 1);
        let solver = HeatSolver::new(&c, Mode::Oracle).unwrap();
        let h = 1e-4;
        let plus = solver.propagate(&u0, h).values;
        let minus = solver.propagate(&u0, -h).values;
        let fd = plus.zip_with(&minus, |a, b| (a - b) / (2.0 * h)).unwrap();
        let exact = apply_operator(&u0.values, &c, Mode::Oracle).unwrap();
        let err = fd.zip_with(&exact, |a, b| a - b).unwrap().max_abs() / exact.max_abs();
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn mass_positivity_and_maximum_principle() {
        let c = cfg(4);
        let u0 = random_state(&c, 6, 2);
        for mode in [Mode::Paper, Mode::Oracle] {
            let solver = HeatSolver::new(&c, mode).unwrap();
            for t in [0.0, 0.1, 1.0, 10.0] {
                let u = solver.evolve(&u0, t).unwrap();
                assert!((u.mass() - u0.mass()).abs() < 1e-12);
                assert!(u.values.min_value() >= u0.values.min_value() - 1e-10);
                assert!(u.values.max_value() <= u0.values.max_value() + 1e-10);
            }
            assert_eq!(solver.evolve(&u0, 0.0).unwrap().values.zip_with(&u0.values, |a, b| a - b).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn fluctuations_decay_at_degree_rate() {
        let c = cfg(3);
        let u0 = random_state(&c, 5, 3);
        let solver = HeatSolver::new(&c, Mode::Paper).unwrap();
        let f1 = decompose(&solver.evolve(&u0, 1.0).unwrap()).fluctuation;
        let f2 = decompose(&solver.evolve(&u0, 2.5).unwrap()).fluctuation;
        for k in 0..3 {
            let want = (-1.5 * -solver.fluctuation_rate(k, k)).exp();
            for (a, b) in f1.circle(k).iter().zip(f2.circle(k)) {
                if a.abs() > 1e-3 {
                    assert!((b / a - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn semigroup_properties() {
        let c = cfg(5);
        let p0 = transition_matrix(0.0, 1.0, &c, Mode::Oracle).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((p0.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let p1 = transition_matrix(1.0, 1.0, &c, Mode::Oracle).unwrap();
        let p2 = transition_matrix(2.0, 1.0, &c, Mode::Oracle).unwrap();
        let pp = p1.compose(&p1);
        for i in 0..5 {
            for j in 0..5 {
                assert!((pp.get(i, j) - p2.get(i, j)).abs() < 1e-10);
                assert!(p1.get(i, j) >= 0.0);
            }
        }
        assert!(p1.max_row_sum_error() < 1e-12);
        let late = transition_matrix(200.0, 1.0, &cfg(3), Mode::Paper).unwrap();
        assert!(late.entries.iter().flatten().all(|x| (x - 1.0 / 3.0).abs() < 1e-10));
    }
}
