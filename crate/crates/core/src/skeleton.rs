//! The skeleton of `E_q`: a metrized circle of circumference `v(q)` with
//! one node per circle `S_k`, atomic measures on it, the `dd^c` Laplacian of
//! piecewise-affine functions, and potentials of balanced measures.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::SkeletonError;
use crate::kernel::Mode;
use crate::local_field::PAdicNumber;
use crate::spectral::{
    build_matrix, symmetric_eigen, to_f64, Scalar, SpectrumDescriptor, StepFunction,
    WaveletEigenvalue,
};
use crate::tate_model::CurveConfig;

/// Circle of circumference `n` with unit-length arcs between consecutive
/// integer nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonGraph {
    circumference: i64,
}

impl SkeletonGraph {
    pub fn new(circumference: i64) -> Result<Self, SkeletonError> {
        if circumference < 1 {
            return Err(SkeletonError::InvalidFunction(format!("circumference {circumference}")));
        }
        Ok(Self { circumference })
    }

    pub fn of(cfg: &CurveConfig) -> Self {
        Self { circumference: cfg.vq() }
    }

    pub fn circumference(&self) -> i64 {
        self.circumference
    }

    pub fn nodes(&self) -> std::ops::Range<i64> {
        0..self.circumference
    }
}

/// `σ(x)`: the node of the circle containing `x` after reduction by `q^Z`.
pub fn retract(x: &PAdicNumber, cfg: &CurveConfig) -> Result<i64, SkeletonError> {
    x.valuation()
        .map(|v| v.rem_euclid(cfg.vq()))
        .ok_or_else(|| SkeletonError::Retraction(format!("{x} has no valuation")))
}

/// Finitely many weighted atoms at nodes; zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkeletonMeasure {
    atoms: BTreeMap<i64, BigRational>,
}

impl SkeletonMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dirac(node: i64) -> Self {
        let mut m = Self::new();
        m.add_atom(node, BigRational::one());
        m
    }

    pub fn add_atom(&mut self, node: i64, w: BigRational) {
        let e = self.atoms.entry(node).or_insert_with(BigRational::zero);
        *e += w;
        if e.is_zero() {
            self.atoms.remove(&node);
        }
    }

    pub fn weight(&self, node: i64) -> BigRational {
        self.atoms.get(&node).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.atoms.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> BigRational {
        self.atoms.values().fold(BigRational::zero(), |a, x| a + x)
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        let mut out = Self::new();
        for (&k, v) in &self.atoms {
            out.add_atom(k, v * c);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, v) in &other.atoms {
            out.add_atom(k, v.clone());
        }
        out
    }

    /// `∫ φ dμ` for a function given by its node values.
    pub fn integrate(&self, phi: &[BigRational]) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |a, (&k, w)| a + w * &phi[k as usize])
    }
}

/// Continuous function on the circle, affine between consecutive
/// breakpoints (cyclically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseAffine {
    circumference: i64,
    breakpoints: Vec<(i64, BigRational)>,
}

impl PiecewiseAffine {
    /// Breakpoints at distinct integer positions in `0..circumference`.
    pub fn new(circumference: i64, mut breakpoints: Vec<(i64, BigRational)>) -> Result<Self, SkeletonError> {
        if circumference < 1 || breakpoints.is_empty() {
            return Err(SkeletonError::InvalidFunction("needs a positive circumference and a breakpoint".into()));
        }
        breakpoints.sort_by_key(|b| b.0);
        if breakpoints.windows(2).any(|w| w[0].0 == w[1].0)
            || breakpoints.iter().any(|b| !(0..circumference).contains(&b.0))
        {
            return Err(SkeletonError::InvalidFunction("breakpoints must be distinct nodes of the circle".into()));
        }
        Ok(Self { circumference, breakpoints })
    }

    pub fn from_node_values(values: Vec<BigRational>) -> Result<Self, SkeletonError> {
        let n = values.len() as i64;
        Self::new(n, (0..n).zip(values).collect())
    }

    pub fn breakpoints(&self) -> &[(i64, BigRational)] {
        &self.breakpoints
    }

    /// Value at an integer position, interpolating along the arc.
    pub fn value_at(&self, x: i64) -> BigRational {
        let x = x.rem_euclid(self.circumference);
        let n = self.breakpoints.len();
        if n == 1 {
            return self.breakpoints[0].1.clone();
        }
        let i = self.breakpoints.partition_point(|b| b.0 <= x);
        let (a, va) = if i == 0 {
            let (p, v) = &self.breakpoints[n - 1];
            (p - self.circumference, v)
        } else {
            let (p, v) = &self.breakpoints[i - 1];
            (*p, v)
        };
        let (b, vb) = if i == n {
            let (p, v) = &self.breakpoints[0];
            (p + self.circumference, v)
        } else {
            let (p, v) = &self.breakpoints[i];
            (*p, v)
        };
        let xx = if x < a { x + self.circumference } else { x };
        va + (vb - va) * BigRational::new((xx - a).into(), (b - a).into())
    }

    pub fn node_values(&self) -> Vec<BigRational> {
        (0..self.circumference).map(|x| self.value_at(x)).collect()
    }

    pub fn plus(&self, other: &Self) -> Result<Self, SkeletonError> {
        if self.circumference != other.circumference {
            return Err(SkeletonError::InvalidFunction("different circles".into()));
        }
        let v = self.node_values().into_iter().zip(other.node_values()).map(|(a, b)| a + b).collect();
        Self::from_node_values(v)
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        Self {
            circumference: self.circumference,
            breakpoints: self.breakpoints.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }

    pub fn shifted(&self, c: &BigRational) -> Self {
        Self {
            circumference: self.circumference,
            breakpoints: self.breakpoints.iter().map(|(p, v)| (*p, v + c)).collect(),
        }
    }
}

/// `dd^c f`: at each breakpoint, the sum of the two outgoing slopes.
pub fn ddc(f: &PiecewiseAffine) -> SkeletonMeasure {
    let n = f.breakpoints.len();
    let mut out = SkeletonMeasure::new();
    if n == 1 {
        return out;
    }
    let c = f.circumference;
    for i in 0..n {
        let (p, v) = &f.breakpoints[i];
        let (pn, vn) = &f.breakpoints[(i + 1) % n];
        let (pp, vp) = &f.breakpoints[(i + n - 1) % n];
        let ahead = (pn - p).rem_euclid(c);
        let behind = (p - pp).rem_euclid(c);
        let ahead = if ahead == 0 { c } else { ahead };
        let behind = if behind == 0 { c } else { behind };
        let s = (vn - v) / BigRational::from_integer(ahead.into()) + (vp - v) / BigRational::from_integer(behind.into());
        out.add_atom(*p, s);
    }
    out
}

/// The potential `g` with `dd^c g = μ` and `g(0) = 0`; `μ` must be balanced.
///
/// With node values `s_i` and arc slopes `d_i = s_{i+1} - s_i`, the atom at
/// node `i` is `d_i - d_{i-1}`; the slopes close up when `Σ d_i = 0`.
pub fn poisson_solve(mu: &SkeletonMeasure, graph: &SkeletonGraph) -> Result<PiecewiseAffine, SkeletonError> {
    let n = graph.circumference();
    let mass = mu.mass();
    if !mass.is_zero() {
        return Err(SkeletonError::Unbalanced(crate::ratio_serde::to_string(&mass)));
    }
    if let Some((k, _)) = mu.atoms().find(|(k, _)| !(0..n).contains(k)) {
        return Err(SkeletonError::InvalidFunction(format!("atom at {k} is not a node")));
    }
    // d_i = d_0 + Σ_{j=1}^{i} μ_j
    let mut partial = vec![BigRational::zero(); n as usize];
    for i in 1..n as usize {
        partial[i] = &partial[i - 1] + mu.weight(i as i64);
    }
    let total = partial.iter().fold(BigRational::zero(), |a, x| a + x);
    let d0 = -total / BigRational::from_integer(n.into());
    let mut values = Vec::with_capacity(n as usize);
    let mut s = BigRational::zero();
    for p in &partial {
        values.push(s.clone());
        s += &d0 + p;
    }
    PiecewiseAffine::from_node_values(values)
}

/// `μ_k = σ_*(H_θ(x,·)|ω|)` for `x ∈ S_k`: atom `(1-t)A_σ(k,ℓ)` at node `ℓ`.
pub fn push_mu(k: i64, cfg: &CurveConfig, mode: Mode) -> Result<SkeletonMeasure, SkeletonError> {
    check_node(k, cfg)?;
    let a = build_matrix(cfg, mode)?;
    let w = BigRational::one() - cfg.t();
    let mut m = SkeletonMeasure::new();
    for l in 0..cfg.vq() {
        m.add_atom(l, &w * a.get(k as usize, l as usize));
    }
    Ok(m)
}

/// `ν_k = μ_k - deg_k δ_k`, balanced.
pub fn nu_measure(k: i64, cfg: &CurveConfig, mode: Mode) -> Result<SkeletonMeasure, SkeletonError> {
    let mut m = push_mu(k, cfg, mode)?;
    let deg = m.mass();
    m.add_atom(k, -deg);
    Ok(m)
}

fn check_node(k: i64, cfg: &CurveConfig) -> Result<(), SkeletonError> {
    if !(0..cfg.vq()).contains(&k) {
        return Err(SkeletonError::InvalidFunction(format!("node {k} outside 0..{}", cfg.vq())));
    }
    Ok(())
}

/// The potential of `ν_k`.
pub fn assemble_g_theta(k: i64, cfg: &CurveConfig, mode: Mode) -> Result<PiecewiseAffine, SkeletonError> {
    poisson_solve(&nu_measure(k, cfg, mode)?, &SkeletonGraph::of(cfg))
}

/// The same potential built as `Σ_ℓ α_ℓ g_{ℓ,k}` from the pairwise
/// potentials of `δ_ℓ - δ_k`, with `α_ℓ = (1-t)A_σ(k,ℓ)`.
pub fn assemble_g_theta_pairwise(k: i64, cfg: &CurveConfig, mode: Mode) -> Result<PiecewiseAffine, SkeletonError> {
    let graph = SkeletonGraph::of(cfg);
    let mu = push_mu(k, cfg, mode)?;
    let mut acc = PiecewiseAffine::from_node_values(vec![BigRational::zero(); cfg.vq() as usize])?;
    for (l, alpha) in mu.atoms() {
        if l == k {
            continue;
        }
        let mut pair = SkeletonMeasure::dirac(l);
        pair.add_atom(k, -BigRational::one());
        acc = acc.plus(&poisson_solve(&pair, &graph)?.scaled(alpha))?;
    }
    Ok(acc)
}

/// `(H_{θ,σ} φ)_k = ∫ φ dν_k`.
pub fn radial_apply(phi: &[BigRational], cfg: &CurveConfig, mode: Mode) -> Result<Vec<BigRational>, SkeletonError> {
    if phi.len() != cfg.vq() as usize {
        return Err(SkeletonError::InvalidFunction(format!("{} values for {} nodes", phi.len(), cfg.vq())));
    }
    (0..cfg.vq()).map(|k| Ok(nu_measure(k, cfg, mode)?.integrate(phi))).collect()
}

/// Per-node `|ω|`-mean over the fibre of the retraction.
pub fn average<T: Scalar>(phi: &StepFunction<T>) -> Vec<T> {
    phi.average()
}

/// The spectrum assembled on the skeleton: eigenvalues of `radial_apply`
/// and the negative masses of `μ_k`.
pub fn skeleton_spectrum(cfg: &CurveConfig, mode: Mode) -> Result<SpectrumDescriptor, SkeletonError> {
    let n = cfg.vq() as usize;
    let mut cols = Vec::with_capacity(n);
    for l in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[l] = BigRational::one();
        cols.push(radial_apply(&e, cfg, mode)?);
    }
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(&cols[j][i]));
    let eig = symmetric_eigen(&m)?;
    let wavelet_eigenvalues = (0..cfg.vq())
        .map(|k| Ok(WaveletEigenvalue { k, value: -push_mu(k, cfg, mode)?.mass() }))
        .collect::<Result<_, SkeletonError>>()?;
    Ok(SpectrumDescriptor {
        mode,
        radial_eigenvalues: eig.values,
        radial_eigenvectors: eig.vectors,
        wavelet_eigenvalues,
        wavelet_multiplicity_infinite: true,
    })
}

/// Largest atom in absolute value, for reports.
pub fn max_atom(m: &SkeletonMeasure) -> BigRational {
    m.atoms().map(|(_, w)| w.abs()).fold(BigRational::zero(), |a, x| if x > a { x } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_laplacian, degree_vector, ratio};

    fn cfg(vq: i64) -> CurveConfig {
        CurveConfig::from_parts(5, 1, vq).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn retraction() {
        let c = cfg(3);
        let f = c.field();
        assert_eq!(retract(&PAdicNumber::from_int(f, 7), &c).unwrap(), 0);
        assert_eq!(retract(&PAdicNumber::pi_power(f, 4), &c).unwrap(), 1);
        assert_eq!(retract(&PAdicNumber::pi_power(f, -2), &c).unwrap(), 1);
        assert!(retract(&PAdicNumber::zero(f), &c).is_err());
    }

    #[test]
    fn push_forward_fixture() {
        let mu = push_mu(0, &cfg(3), Mode::Paper).unwrap();
        assert_eq!(mu.weight(0), ratio(4, 5));
        assert_eq!(mu.weight(1), ratio(4, 25));
        assert_eq!(mu.weight(2), ratio(4, 125));
        assert_eq!(mu.mass(), ratio(124, 125));
        assert!(nu_measure(0, &cfg(3), Mode::Paper).unwrap().mass().is_zero());
    }

    #[test]
    fn tent_function() {
        let f = PiecewiseAffine::new(3, vec![(0, r(0)), (1, r(1)), (2, r(0))]).unwrap();
        let m = ddc(&f);
        assert_eq!(m.weight(1), r(-2));
        assert_eq!(m.weight(0), r(1));
        assert_eq!(m.weight(2), r(1));
        assert!(m.mass().is_zero());
        assert_eq!(ddc(&f.shifted(&r(5))), m);
        let flat = PiecewiseAffine::new(4, vec![(1, r(3))]).unwrap();
        assert!(ddc(&flat).is_empty());
    }

    #[test]
    fn sparse_breakpoints_interpolate() {
        let f = PiecewiseAffine::new(6, vec![(1, r(0)), (4, r(3))]).unwrap();
        assert_eq!(f.value_at(2), r(1));
        assert_eq!(f.value_at(5), r(2));
        assert_eq!(f.value_at(0), r(1));
        let m = ddc(&f);
        assert_eq!(m.weight(1), r(2));
        assert_eq!(m.weight(4), r(-2));
    }

    #[test]
    fn dipole_potential() {
        let g = SkeletonGraph::new(3).unwrap();
        let mut mu = SkeletonMeasure::dirac(1);
        mu.add_atom(0, r(-1));
        let pot = poisson_solve(&mu, &g).unwrap();
        assert_eq!(pot.value_at(0) - pot.value_at(1), ratio(2, 3));
        assert_eq!(ddc(&pot), mu);
        assert!(poisson_solve(&SkeletonMeasure::dirac(0), &g).is_err());
        let zero = poisson_solve(&SkeletonMeasure::new(), &g).unwrap();
        assert!(zero.node_values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn assembly_two_ways() {
        for vq in 3..8 {
            let c = cfg(vq);
            for mode in [Mode::Paper, Mode::Oracle] {
                for k in 0..vq {
                    let direct = assemble_g_theta(k, &c, mode).unwrap();
                    let pairwise = assemble_g_theta_pairwise(k, &c, mode).unwrap();
                    assert_eq!(direct.node_values(), pairwise.node_values());
                    assert_eq!(ddc(&direct), nu_measure(k, &c, mode).unwrap());
                }
            }
        }
    }

    #[test]
    fn potential_fixture() {
        let g = assemble_g_theta(0, &cfg(3), Mode::Paper).unwrap();
        assert_eq!(g.node_values(), vec![r(0), ratio(-44, 375), ratio(-28, 375)]);
    }

    #[test]
    fn radial_apply_is_the_laplacian() {
        for vq in 3..7 {
            let c = cfg(vq);
            for mode in [Mode::Paper, Mode::Oracle] {
                let a = build_matrix(&c, mode).unwrap();
                let l = build_laplacian(&a, &degree_vector(&a, &c), &c).unwrap();
                for j in 0..vq as usize {
                    let mut e = vec![BigRational::zero(); vq as usize];
                    e[j] = BigRational::one();
                    let col = radial_apply(&e, &c, mode).unwrap();
                    for i in 0..vq as usize {
                        assert_eq!(&col[i], l.get(i, j));
                    }
                }
                let ones = vec![BigRational::one(); vq as usize];
                assert!(radial_apply(&ones, &c, mode).unwrap().iter().all(|x| x.is_zero()));
            }
        }
    }
}
