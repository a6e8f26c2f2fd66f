//! Exact-event simulation of the jump process generated by `ε H_θ`, and
//! estimators comparing sample paths with the circle-level semigroup.

use std::io::{self, Write};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::SimulationError;
use crate::kernel::Mode;
use crate::local_field::{sample_circle, sample_sphere, PAdicNumber};
use crate::spectral::{build_matrix, degree_vector};
use crate::tate_model::CurveConfig;

/// Jump law out of circle `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDistribution {
    pub k: i64,
    /// Rate of leaving a point of `S_k`, i.e. `deg_k`.
    pub degree: BigRational,
    /// `(1-t)A_σ(k,ℓ)/deg_k`; sums to 1 exactly.
    pub targets: Vec<BigRational>,
    /// Weight of the stratum `|y - x| = t^k` in the same-circle law; the
    /// strata `ν > k` follow geometrically with ratio `t^3`. `None` on pole
    /// circles, where the kernel is constant on `S_k`.
    pub diagonal_head: Option<BigRational>,
}

impl JumpDistribution {
    pub fn new(k: i64, cfg: &CurveConfig, mode: Mode) -> Result<Self, SimulationError> {
        let a = build_matrix(cfg, mode)?;
        let deg = degree_vector(&a, cfg);
        Ok(Self::from_parts(k, cfg, mode, a.rows(), deg.get(k as usize)))
    }

    fn from_parts(k: i64, cfg: &CurveConfig, mode: Mode, rows: &[Vec<BigRational>], deg: &BigRational) -> Self {
        let t = cfg.t();
        let one = BigRational::one();
        let w = &one - &t;
        let targets = rows[k as usize].iter().map(|a| &w * a / deg).collect();
        let diagonal_head = ((2 * k) % cfg.vq() != 0).then(|| {
            // stratum weights ∝ t^{3ν} × (1-2t or 1-t at ν = k, 1-t beyond)
            let head = match mode {
                Mode::Oracle => &one - &t - &t,
                Mode::Paper => w.clone(),
            };
            let t3 = &t * &t * &t;
            let tail = &w * &t3 / (&one - &t3);
            &head / (&head + tail)
        });
        Self { k, degree: deg.clone(), targets, diagonal_head }
    }

    /// Probability that a same-circle jump lands at distance `t^ν`.
    pub fn diagonal_stratum_probability(&self, nu: i64, t: &BigRational) -> BigRational {
        let one = BigRational::one();
        match &self.diagonal_head {
            None => BigRational::zero(),
            Some(h) if nu == self.k => h.clone(),
            Some(_) if nu < self.k => BigRational::zero(),
            Some(h) => {
                let t3 = t * t * t;
                let j = nu - self.k - 1;
                (&one - h) * (&one - &t3) * crate::local_field::rational_pow(&t3, j)
            }
        }
    }

    fn sample_distance<R: Rng + ?Sized>(&self, head: f64, t3: f64, rng: &mut R) -> i64 {
        if rng.random_bool(head) {
            return self.k;
        }
        // geometric number of failures with success probability 1 - t^3
        let mut nu = self.k + 1;
        while rng.random_bool(t3) {
            nu += 1;
        }
        nu
    }
}

/// One jump-process state: circle and digits at positions `k..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub circle: i64,
    pub digits: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub path_id: u64,
    pub seed: u64,
    pub epsilon: f64,
    pub precision: i64,
    pub t_max: f64,
    pub events: Vec<Event>,
}

impl PathRecord {
    /// Circle occupied at time `s`.
    pub fn circle_at(&self, s: f64) -> i64 {
        let i = self.events.partition_point(|e| e.time <= s);
        self.events[i.saturating_sub(1)].state.circle
    }

    pub fn jump_count(&self) -> usize {
        self.events.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    pub epsilon: f64,
    pub t_max: f64,
    pub precision: i64,
    pub mode: Mode,
    /// Fixed starting circle; `None` starts from the `|ω|`-uniform law.
    pub initial_circle: Option<i64>,
}

impl SimulationParams {
    pub fn validate(&self, cfg: &CurveConfig) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidParameters(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.precision <= cfg.vq() {
            return bad(format!("precision {} must exceed v(q) = {}", self.precision, cfg.vq()));
        }
        if let Some(k) = self.initial_circle {
            if !(0..cfg.vq()).contains(&k) {
                return bad(format!("initial circle {k} outside 0..{}", cfg.vq()));
            }
        }
        Ok(())
    }
}

/// Precomputed jump laws for all circles.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: CurveConfig,
    params: SimulationParams,
    laws: Vec<JumpDistribution>,
    target_index: Vec<WeightedIndex<f64>>,
    heads: Vec<f64>,
    rates: Vec<f64>,
}

impl Simulator {
    pub fn new(cfg: &CurveConfig, params: SimulationParams) -> Result<Self, SimulationError> {
        params.validate(cfg)?;
        let a = build_matrix(cfg, params.mode)?;
        let deg = degree_vector(&a, cfg);
        let laws: Vec<_> = (0..cfg.vq())
            .map(|k| JumpDistribution::from_parts(k, cfg, params.mode, a.rows(), deg.get(k as usize)))
            .collect();
        let target_index = laws
            .iter()
            .map(|l| {
                WeightedIndex::new(l.targets.iter().map(|p| p.to_f64().unwrap_or(0.0)))
                    .map_err(|e| SimulationError::InvalidParameters(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let heads = laws.iter().map(|l| l.diagonal_head.as_ref().map_or(1.0, |h| h.to_f64().unwrap())).collect();
        let rates = laws.iter().map(|l| l.degree.to_f64().unwrap() * params.epsilon).collect();
        Ok(Self { cfg: cfg.clone(), params, laws, target_index, heads, rates })
    }

    pub fn law(&self, k: i64) -> &JumpDistribution {
        &self.laws[k as usize]
    }

    /// Path `path_id` of the family seeded by `seed`; each path draws from
    /// its own ChaCha stream.
    pub fn run(&self, seed: u64, path_id: u64) -> Result<PathRecord, SimulationError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_id);
        let field = self.cfg.field();
        let m = self.params.precision;
        let vq = self.cfg.vq();
        let k0 = self.params.initial_circle.unwrap_or_else(|| rng.random_range(0..vq));
        let x0 = sample_circle(field, k0, m, &mut rng)?;
        let mut state = State { circle: k0, digits: x0.digits_to((m - k0) as usize) };
        let mut events = vec![Event { time: 0.0, state: state.clone() }];
        let mut time = 0.0;
        loop {
            let k = state.circle as usize;
            let hold = Exp::new(self.rates[k]).map_err(|e| SimulationError::InvalidParameters(e.to_string()))?;
            let next = time + hold.sample(&mut rng);
            if next > self.params.t_max {
                break;
            }
            if next <= time {
                return Err(SimulationError::InvalidParameters("holding time underflow".into()));
            }
            time = next;
            let l = self.target_index[k].sample(&mut rng) as i64;
            let new_state = if l != state.circle || self.laws[k].diagonal_head.is_none() {
                let y = sample_circle(field, l, m, &mut rng)?;
                State { circle: l, digits: y.digits_to((m - l) as usize) }
            } else {
                self.jump_within_circle(&state, &mut rng)?
            };
            state = new_state;
            events.push(Event { time, state: state.clone() });
        }
        Ok(PathRecord {
            path_id,
            seed,
            epsilon: self.params.epsilon,
            precision: m,
            t_max: self.params.t_max,
            events,
        })
    }

    /// Landing point of a same-circle jump from `state` on a non-pole
    /// circle: distance `t^ν` from the stratified law, then uniform on that
    /// sphere. Distances below the resolution leave the state unchanged.
    pub fn jump_within_circle<R: Rng + ?Sized>(&self, state: &State, rng: &mut R) -> Result<State, SimulationError> {
        let k = state.circle;
        let m = self.params.precision;
        let t3 = self.cfg.params().t_f64().powi(3);
        let nu = self.laws[k as usize].sample_distance(self.heads[k as usize], t3, rng);
        if nu >= m {
            return Ok(state.clone());
        }
        let x = PAdicNumber::from_digits(self.cfg.field(), k, &state.digits)?;
        let y = sample_sphere(&x, nu, m, rng)?;
        Ok(State { circle: k, digits: y.digits_to((m - k) as usize) })
    }

    /// `n_paths` independent paths, simulated in parallel.
    pub fn run_many(&self, seed: u64, n_paths: u64) -> Result<Vec<PathRecord>, SimulationError> {
        (0..n_paths).into_par_iter().map(|i| self.run(seed, i)).collect()
    }
}

pub fn simulate(cfg: &CurveConfig, params: SimulationParams, seed: u64) -> Result<PathRecord, SimulationError> {
    Simulator::new(cfg, params)?.run(seed, 0)
}

/// Time spent on each circle up to `t_max`.
fn occupation_times(path: &PathRecord, vq: usize) -> Vec<f64> {
    let mut out = vec![0.0; vq];
    for (i, e) in path.events.iter().enumerate() {
        let end = path.events.get(i + 1).map_or(path.t_max, |n| n.time);
        out[e.state.circle as usize] += end - e.time;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationStats {
    pub fractions: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub total_time: f64,
}

fn check_paths(paths: &[PathRecord], vq: i64) -> Result<(), SimulationError> {
    if vq < 2 {
        return Err(SimulationError::InsufficientData(format!("{vq} circle(s): nothing to compare")));
    }
    if paths.len() < 2 {
        return Err(SimulationError::InsufficientData("at least two paths are needed for error bars".into()));
    }
    let jumps: usize = paths.iter().map(|p| p.jump_count()).sum();
    if jumps < 1000 {
        return Err(SimulationError::InsufficientData(format!("{jumps} jumps, need at least 1000")));
    }
    Ok(())
}

/// Time-weighted circle fractions with path-level batch standard errors.
pub fn occupation_stats(paths: &[PathRecord], vq: i64) -> Result<OccupationStats, SimulationError> {
    check_paths(paths, vq)?;
    let per_path: Vec<Vec<f64>> = paths.iter().map(|p| occupation_times(p, vq as usize)).collect();
    let totals: Vec<f64> = per_path.iter().map(|v| v.iter().sum()).collect();
    let total_time: f64 = totals.iter().sum();
    let n = paths.len() as f64;
    let mean_total = total_time / n;
    let mut fractions = vec![0.0; vq as usize];
    let mut std_errors = vec![0.0; vq as usize];
    for k in 0..vq as usize {
        let tk: f64 = per_path.iter().map(|v| v[k]).sum();
        let f = tk / total_time;
        let ss: f64 = per_path.iter().zip(&totals).map(|(v, &tot)| (v[k] - f * tot).powi(2)).sum();
        fractions[k] = f;
        std_errors[k] = (ss / (n * (n - 1.0))).sqrt() / mean_total;
    }
    Ok(OccupationStats { fractions, std_errors, total_time })
}

/// Estimated `εQ`: off-diagonal rates `N_{kℓ}/T_k` with Poisson errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorEstimate {
    pub rates: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub jumps: Vec<Vec<u64>>,
    pub holding_times: Vec<f64>,
}

pub fn empirical_generator(paths: &[PathRecord], vq: i64) -> Result<GeneratorEstimate, SimulationError> {
    check_paths(paths, vq)?;
    let n = vq as usize;
    let mut jumps = vec![vec![0u64; n]; n];
    let mut holding_times = vec![0.0; n];
    for p in paths {
        for (h, x) in holding_times.iter_mut().zip(occupation_times(p, n)) {
            *h += x;
        }
        for w in p.events.windows(2) {
            jumps[w[0].state.circle as usize][w[1].state.circle as usize] += 1;
        }
    }
    let mut rates = vec![vec![0.0; n]; n];
    let mut std_errors = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            if k != l {
                rates[k][l] = jumps[k][l] as f64 / holding_times[k];
                std_errors[k][l] = (jumps[k][l] as f64).sqrt() / holding_times[k];
            }
        }
        let off: f64 = rates[k].iter().sum();
        rates[k][k] = -off;
        std_errors[k][k] = (jumps[k].iter().enumerate().filter(|&(l, _)| l != k).map(|(_, &c)| c).sum::<u64>() as f64)
            .sqrt()
            / holding_times[k];
    }
    Ok(GeneratorEstimate { rates, std_errors, jumps, holding_times })
}

/// Circle-to-circle frequencies over lag `tau`, sampled on the grid
/// `0, τ, 2τ, …` of every path.
#[derive(Debug, Clone, PartialEq)]
pub struct LagTransitions {
    pub tau: f64,
    pub counts: Vec<Vec<u64>>,
    pub frequencies: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
}

pub fn lag_transitions(paths: &[PathRecord], vq: i64, tau: f64) -> Result<LagTransitions, SimulationError> {
    check_paths(paths, vq)?;
    if !(tau > 0.0) {
        return Err(SimulationError::InvalidParameters(format!("lag must be positive, got {tau}")));
    }
    let n = vq as usize;
    let mut counts = vec![vec![0u64; n]; n];
    for p in paths {
        let steps = (p.t_max / tau).floor() as usize;
        let mut prev = p.circle_at(0.0);
        for i in 1..=steps {
            let cur = p.circle_at(i as f64 * tau);
            counts[prev as usize][cur as usize] += 1;
            prev = cur;
        }
    }
    let mut frequencies = vec![vec![0.0; n]; n];
    let mut std_errors = vec![vec![0.0; n]; n];
    for k in 0..n {
        let row: u64 = counts[k].iter().sum();
        if row == 0 {
            return Err(SimulationError::InsufficientData(format!("no lag samples start on circle {k}")));
        }
        for l in 0..n {
            let f = counts[k][l] as f64 / row as f64;
            frequencies[k][l] = f;
            std_errors[k][l] = (f * (1.0 - f) / row as f64).sqrt();
        }
    }
    Ok(LagTransitions { tau, counts, frequencies, std_errors })
}

pub const CSV_HEADER: &str = "path_id,event_index,time,circle,digits";

/// One row per event; times carry 17 significant digits.
pub fn write_csv<W: Write>(paths: &[PathRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in paths {
        for (i, e) in p.events.iter().enumerate() {
            let digits: Vec<String> = e.state.digits.iter().map(|d| d.to_string()).collect();
            writeln!(out, "{},{},{:.16e},{},{}", p.path_id, i, e.time, e.state.circle, digits.join(" "))?;
        }
    }
    Ok(())
}
