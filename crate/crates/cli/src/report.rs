//! Serialized artifacts. Exact rationals are `"num/den"` strings; floats
//! ride alongside where useful. Every struct rejects unknown fields, so
//! re-parsing an artifact checks its shape.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use tate_diffusion::hearing::HearingReport;
use tate_diffusion::kernel::Mode;
use tate_diffusion::ratio_serde;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldOut {
    pub p: u32,
    pub f: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeEntry {
    pub k: i64,
    pub rational: String,
    pub float: f64,
}

/// A documented disagreement between a stated formula and a computed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Erratum {
    pub quantity: String,
    pub k: i64,
    pub stated: String,
    pub computed: String,
    pub difference: String,
    pub note: String,
}

impl Erratum {
    pub fn new(quantity: String, k: i64, stated: &BigRational, computed: &BigRational, note: &str) -> Self {
        Self {
            quantity,
            k,
            stated: ratio_serde::to_string(stated),
            computed: ratio_serde::to_string(computed),
            difference: ratio_serde::to_string(&(stated - computed)),
            note: note.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumReport {
    pub field: FieldOut,
    pub vq: i64,
    pub mode: Mode,
    #[serde(rename = "matrix_A")]
    pub matrix_a: Vec<Vec<String>>,
    #[serde(rename = "matrix_L")]
    pub matrix_l: Vec<Vec<String>>,
    pub radial_eigenvalues: Vec<f64>,
    pub degree_eigenvalues: Vec<DegreeEntry>,
    pub errata: Vec<Erratum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatRow {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub sup_deviation: f64,
    pub circle_means: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatReport {
    pub field: FieldOut,
    pub vq: i64,
    pub mode: Mode,
    pub epsilon: f64,
    pub resolution: i64,
    pub spectral_gap: f64,
    pub rows: Vec<HeatRow>,
}

impl HeatReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass,min,max,sup_deviation");
        for k in 0..self.vq {
            out.push_str(&format!(",mean_{k}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}", r.t, r.mass, r.min, r.max, r.sup_deviation));
            for m in &r.circle_means {
                out.push_str(&format!(",{m}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occupation {
    pub fractions: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub expected: f64,
    pub within_3sigma: Vec<bool>,
}

/// Sidecar written next to the path CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSummary {
    pub field: FieldOut,
    pub vq: i64,
    pub mode: Mode,
    pub epsilon: f64,
    pub seed: u64,
    pub paths: u64,
    pub t_max: f64,
    pub precision: i64,
    pub total_jumps: u64,
    /// Absent when there are too few paths or jumps for error bars.
    pub occupation: Option<Occupation>,
}

/// Schema of `invert` output; the report itself comes from the library.
pub type InvertReport = HearingReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A soft check that found a documented discrepancy.
    Finding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub severity: Severity,
    pub status: Status,
    pub detail: String,
    pub discrepancies: Vec<Erratum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub field: FieldOut,
    pub vq: i64,
    pub order: usize,
    pub mode: Mode,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub hard_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub node: i64,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonCircle {
    pub k: i64,
    pub nu_measure: Vec<Atom>,
    pub nu_mass: String,
    /// Potential of `nu_measure` at the nodes, zero at node 0.
    pub g_theta: Vec<String>,
    pub ddc_round_trip: bool,
    pub pairwise_superposition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonReport {
    pub field: FieldOut,
    pub vq: i64,
    pub mode: Mode,
    pub circles: Vec<SkeletonCircle>,
    pub radial_apply_matches_laplacian: bool,
    pub skeleton_spectrum: Vec<f64>,
    pub base_spectrum: Vec<f64>,
    pub spectra_coincide: bool,
}
