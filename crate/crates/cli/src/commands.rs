use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use tate_diffusion::hearing::{invert_spectrum, FingerprintValues, HearingReport, SpectralFingerprint, DEFAULT_TOLERANCE};
use tate_diffusion::heat::{sup_deviation, HeatSolver, HeatState};
use tate_diffusion::kernel::{classify, entry_closed_form, entry_oracle, kernel_point, CirclePairCase, Mode};
use tate_diffusion::local_field::{sample_circle, FieldParams, PAdicNumber};
use tate_diffusion::markov::{occupation_stats, write_csv, SimulationParams, Simulator};
use tate_diffusion::ratio_serde;
use tate_diffusion::skeleton::{
    assemble_g_theta, assemble_g_theta_pairwise, ddc, nu_measure, radial_apply, skeleton_spectrum,
};
use tate_diffusion::spectral::{
    build_matrix, degree_closed_form, degree_vector, mode_differences, spectral_data, StepFunction,
};
use tate_diffusion::tate_model::{
    discriminant, discriminant_from_coefficients, g_pointwise, invariant_density, j_invariant, theta_norm,
    weierstrass_residual, CurveConfig,
};
use tate_diffusion::ModelError;

use crate::config::{InitialCondition, RunConfig};
use crate::report::*;
use crate::{internal, usage, CliError};

fn field_out(run: &RunConfig) -> FieldOut {
    FieldOut { p: run.p, f: run.f }
}

fn strings(rows: &[Vec<BigRational>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(ratio_serde::to_string).collect()).collect()
}

/// Paper-versus-oracle entries and degrees, plus the degree closed form
/// against the paper-mode row sums.
fn spectrum_errata(cfg: &CurveConfig) -> Result<Vec<Erratum>, CliError> {
    let mut out: Vec<Erratum> = mode_differences(cfg)
        .map_err(internal)?
        .into_iter()
        .map(|d| Erratum::new(d.quantity, d.k, &d.paper, &d.oracle, "closed form vs stratum-exact integral"))
        .collect();
    let a = build_matrix(cfg, Mode::Paper).map_err(internal)?;
    let deg = degree_vector(&a, cfg);
    for k in 0..cfg.vq() {
        let stated = degree_closed_form(k, cfg);
        if &stated != deg.get(k as usize) {
            out.push(Erratum::new(
                format!("deg_closed_form({k})"),
                k,
                &stated,
                deg.get(k as usize),
                "closed form vs row sum of the paper-mode matrix",
            ));
        }
    }
    Ok(out)
}

pub fn cmd_spectrum(run: &RunConfig) -> Result<SpectrumReport, CliError> {
    let cfg = run.validate()?;
    let data = spectral_data(&cfg, run.mode).map_err(internal)?;
    let l = &data.laplacian;
    if !l.is_symmetric() || l.row_sums().iter().any(|s| !s.is_zero()) {
        return Err(internal("Laplacian is not symmetric with zero row sums"));
    }
    Ok(SpectrumReport {
        field: field_out(run),
        vq: run.vq,
        mode: run.mode,
        matrix_a: strings(data.matrix.rows()),
        matrix_l: strings(l.rows()),
        radial_eigenvalues: data.spectrum.radial_eigenvalues.clone(),
        degree_eigenvalues: data
            .degrees
            .0
            .iter()
            .enumerate()
            .map(|(k, d)| DegreeEntry { k: k as i64, rational: ratio_serde::to_string(d), float: d.to_f64().unwrap() })
            .collect(),
        errata: spectrum_errata(&cfg)?,
    })
}

fn initial_state(cfg: &CurveConfig, run: &RunConfig, init: &InitialCondition) -> Result<StepFunction<f64>, CliError> {
    match init {
        InitialCondition::Radial(v) => {
            if v.len() != cfg.vq() as usize {
                return Err(usage(format!("{} circle values for v(q) = {}", v.len(), cfg.vq())));
            }
            StepFunction::from_radial(cfg, run.resolution(), v).map_err(usage)
        }
        InitialCondition::Step(s) => {
            if run.resolution.is_some_and(|m| m != s.resolution) {
                return Err(usage(format!("file resolution {} disagrees with --resolution", s.resolution)));
            }
            let mut u = StepFunction::zeros(cfg, s.resolution).map_err(usage)?;
            if s.circles.len() != cfg.vq() as usize {
                return Err(usage(format!("{} circles for v(q) = {}", s.circles.len(), cfg.vq())));
            }
            for (k, vals) in s.circles.iter().enumerate() {
                let dst = u.circle_mut(k as i64);
                if dst.len() != vals.len() {
                    return Err(usage(format!("circle {k}: {} values, expected {}", vals.len(), dst.len())));
                }
                dst.copy_from_slice(vals);
            }
            Ok(u)
        }
    }
}

pub fn cmd_heat(run: &RunConfig, init: &InitialCondition) -> Result<HeatReport, CliError> {
    let cfg = run.validate()?;
    if run.t_list.is_empty() {
        return Err(usage("no output times"));
    }
    let u0 = HeatState::new(initial_state(&cfg, run, init)?, run.epsilon).map_err(usage)?;
    let solver = HeatSolver::new(&cfg, run.mode).map_err(internal)?;
    let rows = run
        .t_list
        .iter()
        .map(|&t| {
            let u = solver.evolve(&u0, t).map_err(internal)?;
            Ok(HeatRow {
                t,
                mass: u.mass(),
                min: u.values.min_value(),
                max: u.values.max_value(),
                sup_deviation: sup_deviation(&u.values, &cfg),
                circle_means: u.values.average(),
                values: (0..cfg.vq()).map(|k| u.values.circle(k).to_vec()).collect(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(HeatReport {
        field: field_out(run),
        vq: run.vq,
        mode: run.mode,
        epsilon: run.epsilon,
        resolution: u0.resolution(),
        spectral_gap: solver.spectral_gap(),
        rows,
    })
}

/// The path CSV and its summary.
pub fn cmd_simulate(run: &RunConfig) -> Result<(String, SimulationSummary), CliError> {
    let cfg = run.validate()?;
    let params = SimulationParams {
        epsilon: run.epsilon,
        t_max: run.t_max,
        precision: run.precision,
        mode: run.mode,
        initial_circle: None,
    };
    let sim = Simulator::new(&cfg, params).map_err(usage)?;
    let paths = sim.run_many(run.seed, run.paths).map_err(internal)?;
    let mut buf = Vec::new();
    write_csv(&paths, &mut buf)?;
    let occupation = occupation_stats(&paths, run.vq).ok().map(|s| {
        let expected = 1.0 / run.vq as f64;
        Occupation {
            within_3sigma: s.fractions.iter().zip(&s.std_errors).map(|(f, e)| (f - expected).abs() <= 3.0 * e).collect(),
            fractions: s.fractions,
            std_errors: s.std_errors,
            expected,
        }
    });
    let summary = SimulationSummary {
        field: field_out(run),
        vq: run.vq,
        mode: run.mode,
        epsilon: run.epsilon,
        seed: run.seed,
        paths: run.paths,
        t_max: run.t_max,
        precision: run.precision,
        total_jumps: paths.iter().map(|p| p.jump_count() as u64).sum(),
        occupation,
    };
    Ok((String::from_utf8(buf).expect("CSV is ASCII"), summary))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertOptions {
    pub vq_max: i64,
    pub tol: f64,
    /// Overrides the mode recorded in the input.
    pub mode: Option<Mode>,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self { vq_max: 12, tol: DEFAULT_TOLERANCE, mode: None }
    }
}

#[derive(Deserialize)]
struct FingerprintInput {
    field: FieldOut,
    #[serde(default)]
    mode: Option<Mode>,
    degree_eigenvalues: Vec<FingerprintEntry>,
}

#[derive(Deserialize)]
struct FingerprintEntry {
    #[serde(default)]
    rational: Option<String>,
    #[serde(default)]
    float: Option<f64>,
}

/// Reads a `spectrum` artifact (or any JSON with `field` and
/// `degree_eigenvalues`) and searches for `v(q)`. Entries with a
/// `rational` make an exact fingerprint; otherwise the floats are used.
pub fn cmd_invert(input: &str, opts: InvertOptions) -> Result<HearingReport, CliError> {
    let parsed: FingerprintInput = serde_json::from_str(input).map_err(usage)?;
    let field = FieldParams::new(parsed.field.p, parsed.field.f).map_err(usage)?;
    let entries = &parsed.degree_eigenvalues;
    let degrees = if entries.iter().all(|e| e.rational.is_some()) {
        let v = entries
            .iter()
            .map(|e| ratio_serde::parse(e.rational.as_deref().unwrap()).map(|r| -r))
            .collect::<Result<_, _>>()
            .map_err(usage)?;
        FingerprintValues::Exact(v)
    } else if entries.iter().all(|e| e.float.is_some()) {
        FingerprintValues::Float(entries.iter().map(|e| -e.float.unwrap()).collect())
    } else {
        return Err(usage("every degree entry needs a rational or a float"));
    };
    let fp = SpectralFingerprint::new(field, degrees).map_err(usage)?;
    let mode = opts.mode.or(parsed.mode).unwrap_or_default();
    invert_spectrum(&fp, opts.vq_max, opts.tol, mode).map_err(internal)
}

const THETA_SAMPLES: usize = 1000;
const POINTS_PER_CIRCLE: usize = 5;
const MAX_LISTED: usize = 10;

fn check(name: &str, severity: Severity, ok: bool, detail: String, discrepancies: Vec<Erratum>) -> Check {
    let status = match (ok, severity) {
        (true, _) => Status::Pass,
        (false, Severity::Hard) => Status::Fail,
        (false, Severity::Soft) => Status::Finding,
    };
    Check { name: name.into(), severity, status, detail, discrepancies }
}

fn model_checks(cfg: &CurveConfig, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let vq = cfg.vq();
    let mut out = Vec::new();
    let delta = discriminant(cfg).evaluate(cfg);
    let from_coeffs = discriminant_from_coefficients(cfg).map(|d| d.evaluate(cfg));
    let agree = from_coeffs.as_ref().is_ok_and(|d| d == &delta);
    out.push(check(
        "discriminant_valuation",
        Severity::Hard,
        delta.valuation() == Some(vq) && agree,
        format!("v(Delta) = {:?}, coefficient route agrees: {agree}", delta.valuation()),
        vec![],
    ));
    let (lead, j) = j_invariant(cfg);
    let vj = j.evaluate(cfg).valuation();
    out.push(check(
        "j_leading_valuation",
        Severity::Hard,
        lead == -vq && vj == Some(-vq),
        format!("leading {lead}, evaluated {vj:?}"),
        vec![],
    ));
    let floor = vq * (cfg.order() as i64 - 2);
    let (mut tested, mut skipped, mut low, mut density_bad) = (0, 0, Vec::new(), 0);
    for k in 0..vq {
        for _ in 0..POINTS_PER_CIRCLE {
            let u = sample_circle(cfg.field(), k, k + floor + 40, rng).expect("valid circle");
            match weierstrass_residual(&u, cfg) {
                Ok(r) => {
                    tested += 1;
                    if r < floor {
                        low.push(format!("k={k}: {r}"));
                    }
                }
                Err(ModelError::NearPole(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => low.push(format!("k={k}: {e}")),
            }
            let want = u.norm().map(|n| BigRational::one() / n);
            if invariant_density(&u, cfg).ok() != want.ok() {
                density_bad += 1;
            }
        }
    }
    out.push(check(
        "weierstrass_residual",
        Severity::Hard,
        low.is_empty(),
        format!("{}/{tested} points reach valuation {floor}; {skipped} skipped near u = 1; {low:?}", tested - low.len()),
        vec![],
    ));
    out.push(check(
        "invariant_density",
        Severity::Hard,
        density_bad == 0,
        format!("{}/{tested} points give |omega| = 1/|u|", tested - density_bad),
        vec![],
    ));
    out
}

fn theta_check(cfg: &CurveConfig, rng: &mut ChaCha8Rng) -> Check {
    let one = PAdicNumber::one(cfg.field());
    let mut ok = 0;
    for i in 0..THETA_SAMPLES {
        let k = (i as i64) % cfg.vq();
        let z = sample_circle(cfg.field(), k, k + 12, rng).expect("valid circle");
        let want = z.inv().and_then(|zi| (&one - &zi).norm());
        if let (Ok(got), Ok(want)) = (theta_norm(&z, cfg), want) {
            ok += usize::from(got == want);
        }
    }
    check(
        "theta_identity",
        Severity::Hard,
        ok == THETA_SAMPLES,
        format!("{ok}/{THETA_SAMPLES}"),
        vec![],
    )
}

fn kernel_checks(cfg: &CurveConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let vq = cfg.vq();
    let mut bad = Vec::new();
    let mut diag = Vec::new();
    let mut n = 0;
    for k in 0..vq {
        for l in 0..vq {
            let oracle = entry_oracle(k, l, cfg).map_err(internal)?;
            let closed = entry_closed_form(k, l, cfg);
            match classify(k, l, vq) {
                CirclePairCase::Diagonal => {
                    if oracle != closed {
                        diag.push(Erratum::new(format!("A_sigma({k},{k})"), k, &closed, &oracle, "closed-form diagonal vs oracle"));
                    }
                }
                _ => {
                    n += 1;
                    if oracle != closed {
                        bad.push(Erratum::new(format!("A_sigma({k},{l})"), k, &closed, &oracle, "closed form vs oracle"));
                    }
                }
            }
        }
    }
    let mut out = vec![
        check(
            "kernel_oracle_off_diagonal",
            Severity::Hard,
            bad.is_empty(),
            format!("{}/{n} off-diagonal and pole-stratum entries agree exactly", n - bad.len()),
            bad,
        ),
        check(
            "diagonal_entries",
            Severity::Soft,
            diag.is_empty(),
            format!("{} diagonal entries differ between the closed form and the oracle", diag.len()),
            diag,
        ),
    ];
    // g at annulus points against the closed-form kernel
    let (mut agree, mut listed) = (0, Vec::new());
    for i in 0..THETA_SAMPLES {
        let k = (i as i64) % vq;
        let l = (k + 1 + (i as i64 / vq) % (vq - 1)) % vq;
        let (k, l) = if (k + l) % vq == 0 { (k, (l + 1) % vq) } else { (k, l) };
        if (k + l) % vq == 0 {
            continue;
        }
        let x = sample_circle(cfg.field(), k, k + 12, rng).expect("valid circle");
        let y = sample_circle(cfg.field(), l, l + 12, rng).expect("valid circle");
        match (g_pointwise(&x, &y, cfg), kernel_point(&x, &y, cfg)) {
            (Ok(g), Ok(h)) if g == h => agree += 1,
            (Ok(g), Ok(h)) => {
                if listed.len() < MAX_LISTED {
                    listed.push(Erratum::new(format!("g(S_{k}, S_{l})"), k, &h, &g, "closed-form kernel vs |g|"));
                }
            }
            _ => {}
        }
    }
    out.push(check(
        "g_pointwise_closed_form",
        Severity::Soft,
        listed.is_empty(),
        format!("{agree}/{THETA_SAMPLES} sampled pairs agree; first disagreements listed"),
        listed,
    ));
    Ok(out)
}

fn spectral_checks(cfg: &CurveConfig, mode: Mode) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let data = spectral_data(cfg, mode);
    let (ok, detail) = match &data {
        Ok(d) => {
            let l = &d.laplacian;
            let zero_rows = l.row_sums().iter().all(|s| s.is_zero());
            let ev = &d.spectrum.radial_eigenvalues;
            let simple = ev[..ev.len() - 1].iter().all(|&x| x < 0.0);
            (
                l.is_symmetric() && zero_rows && simple,
                format!("symmetric {}, zero row sums {zero_rows}, zero simple and rest negative {simple}", l.is_symmetric()),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(check("laplacian", Severity::Hard, ok, detail, vec![]));
    if let Ok(d) = &data {
        let positive = d.degrees.0.iter().all(|x| x > &BigRational::zero());
        out.push(check("degree_positivity", Severity::Hard, positive, format!("{:?}", d.degrees.to_f64()), vec![]));
    }
    let a = build_matrix(cfg, Mode::Paper).map_err(internal)?;
    let deg = degree_vector(&a, cfg);
    let diffs: Vec<Erratum> = (0..cfg.vq())
        .filter_map(|k| {
            let stated = degree_closed_form(k, cfg);
            (&stated != deg.get(k as usize)).then(|| {
                Erratum::new(format!("deg({k})"), k, &stated, deg.get(k as usize), "closed form vs row sum")
            })
        })
        .collect();
    out.push(check(
        "degree_closed_form",
        Severity::Soft,
        diffs.is_empty(),
        format!("{} of {} degrees differ from the row sum", diffs.len(), cfg.vq()),
        diffs,
    ));
    Ok(out)
}

pub fn cmd_verify(run: &RunConfig) -> Result<VerifyReport, CliError> {
    let cfg = run.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut checks = model_checks(&cfg, &mut rng);
    checks.push(theta_check(&cfg, &mut rng));
    checks.extend(kernel_checks(&cfg, &mut rng)?);
    checks.extend(spectral_checks(&cfg, run.mode)?);
    let hard_passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifyReport {
        field: field_out(run),
        vq: run.vq,
        order: run.order,
        mode: run.mode,
        seed: run.seed,
        checks,
        hard_passed,
    })
}

pub fn cmd_skeleton(run: &RunConfig) -> Result<SkeletonReport, CliError> {
    let cfg = run.validate()?;
    let n = cfg.vq() as usize;
    let mut circles = Vec::with_capacity(n);
    for k in 0..cfg.vq() {
        let nu = nu_measure(k, &cfg, run.mode).map_err(internal)?;
        let g = assemble_g_theta(k, &cfg, run.mode).map_err(internal)?;
        let pairwise = assemble_g_theta_pairwise(k, &cfg, run.mode).map_err(internal)?;
        let (gv, pv) = (g.node_values(), pairwise.node_values());
        let shift = &pv[0] - &gv[0];
        circles.push(SkeletonCircle {
            k,
            nu_measure: nu.atoms().map(|(node, w)| Atom { node, weight: ratio_serde::to_string(w) }).collect(),
            nu_mass: ratio_serde::to_string(&nu.mass()),
            g_theta: gv.iter().map(ratio_serde::to_string).collect(),
            ddc_round_trip: ddc(&g) == nu,
            pairwise_superposition: gv.iter().zip(&pv).all(|(a, b)| b - a == shift),
        });
    }
    let data = spectral_data(&cfg, run.mode).map_err(internal)?;
    let mut matches = true;
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        matches &= radial_apply(&e, &cfg, run.mode).map_err(internal)? == data.laplacian.apply(&e);
    }
    let sk = skeleton_spectrum(&cfg, run.mode).map_err(internal)?;
    let base = data.spectrum;
    let coincide = sk.degree_values() == base.degree_values()
        && sk.radial_eigenvalues.iter().zip(&base.radial_eigenvalues).all(|(a, b)| (a - b).abs() <= 1e-12);
    Ok(SkeletonReport {
        field: field_out(run),
        vq: run.vq,
        mode: run.mode,
        circles,
        radial_apply_matches_laplacian: matches,
        skeleton_spectrum: sk.radial_eigenvalues,
        base_spectrum: base.radial_eigenvalues,
        spectra_coincide: coincide,
    })
}
