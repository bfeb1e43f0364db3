use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ScenarioLabel};
use crate::attack::{best_single_eve, collude_estimate, Averaging};
use crate::channel_sim::{simulate_trace, ProbeTrace};
use crate::dsp::{estimate_filter_size, mwa, Dct, FilterChoice, SpectralSeq};
use crate::error::Result;
use crate::keygen::{derive_key, kdr, reconcilable, KeyBits};
use crate::metrics::{secret_key_capacity, MetricsReport};
use crate::randomness::{run_suite, RandomnessParams, RandomnessReport};

/// Knobs of the per-trace analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub bin_db: f64,
    pub averaging: Averaging,
    pub mwa_windows: Vec<usize>,
    pub z_max: usize,
    pub key_length: usize,
    pub curve_z_max: usize,
    pub feasibility_floor_bits: f64,
    pub randomness: RandomnessParams,
}

impl From<&ExperimentConfig> for AnalysisParams {
    fn from(c: &ExperimentConfig) -> Self {
        AnalysisParams {
            bin_db: c.bin_db,
            averaging: c.averaging,
            mwa_windows: c.mwa_windows.clone(),
            z_max: c.z_max,
            key_length: c.key_length,
            curve_z_max: c.curve_z_max,
            feasibility_floor_bits: c.feasibility_floor_bits,
            randomness: c.randomness,
        }
    }
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams::from(&ExperimentConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwaEntry {
    pub window: usize,
    pub report: MetricsReport,
}

/// Key disagreement before and after filtering; Eves filter too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdrTable {
    pub ab_before: f64,
    pub ab_after: f64,
    pub aec_before: f64,
    pub aec_after: f64,
    pub aem_before: Vec<f64>,
    pub aem_after: Vec<f64>,
}

impl KdrTable {
    pub fn ab_reconcilable(&self) -> bool {
        reconcilable(self.ab_after)
    }

    pub fn aec_reconcilable(&self) -> bool {
        reconcilable(self.aec_after)
    }
}

/// Capacity after suppressing `z` components; general case leaves the
/// Eves' sequences alone, worst case filters them as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub z: usize,
    pub c_k_general: f64,
    pub c_k_worst: f64,
    pub r_ck_general: Option<f64>,
    pub r_ck_worst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub raw: MetricsReport,
    /// Most correlated single Eve, 1-based, with `|ρ|`.
    pub best_single_eve: Option<(usize, f64)>,
    pub mwa: Vec<MwaEntry>,
    pub filter: FilterChoice<f64>,
    pub post_general: MetricsReport,
    pub post_worst: MetricsReport,
    pub kdr: KdrTable,
    /// Bob's key from his filtered sequence.
    pub bob_key: String,
    pub randomness: RandomnessReport,
    /// `I(A;B)` reaches the feasibility floor.
    pub feasible: bool,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub scenario: ScenarioLabel,
    pub r_wavelengths: f64,
    pub seed: u64,
    pub result: Option<CellResult>,
    pub failure: Option<String>,
}

impl CellOutcome {
    pub fn id(&self) -> String {
        format!("{}_r{}_s{}", self.scenario, self.r_wavelengths, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    pub fn failed(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_none())
    }
}

fn metrics_for(trace: &ProbeTrace, params: &AnalysisParams) -> Result<MetricsReport> {
    let ec = collude_estimate(trace, params.averaging)?;
    secret_key_capacity(trace, &ec, params.bin_db)
}

fn keys(trace: &ProbeTrace, params: &AnalysisParams) -> Result<(Vec<KeyBits>, KeyBits)> {
    let rows = trace
        .parties()
        .into_iter()
        .zip(trace.rows())
        .map(|(p, row)| derive_key(row, params.key_length, p.to_string()))
        .collect::<Result<Vec<_>>>()?;
    let ec = collude_estimate(trace, params.averaging)?;
    Ok((rows, derive_key(&ec.x_ec, params.key_length, "eve_c")?))
}

/// All rows with DCT components `1..=z` removed.
fn filtered_rows(plan: &Dct<f64>, spectra: &[SpectralSeq<f64>], z: usize) -> Result<Vec<Vec<f64>>> {
    spectra.iter().map(|s| plan.suppress_low(s, z)).collect()
}

/// Runs the analysis chain on one trace: collusion, raw metrics, the MWA
/// study, filter negotiation, post-filter metrics, keys, KDR and randomness.
pub fn analyze_trace(trace: &ProbeTrace, params: &AnalysisParams) -> Result<CellResult> {
    let raw = metrics_for(trace, params)?;
    let best = best_single_eve(trace).ok();

    let mwa_reports = params
        .mwa_windows
        .iter()
        .map(|&w| {
            let rows = trace.rows().iter().map(|r| mwa(r, w)).collect::<Result<Vec<_>>>()?;
            let smoothed = trace.derive(rows, format!("mwa window {w}"))?;
            Ok(MwaEntry {
                window: w,
                report: metrics_for(&smoothed, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Bob alone sizes the filter; everyone then applies the same cut.
    let filter = estimate_filter_size(trace.bob(), params.z_max, params.bin_db)?;
    let plan = Dct::new(trace.len())?;
    let spectra = trace.rows().iter().map(|r| plan.forward(r)).collect::<Result<Vec<_>>>()?;

    let worst_rows = filtered_rows(&plan, &spectra, filter.z0)?;
    let mut general_rows = trace.rows().to_vec();
    general_rows[0] = worst_rows[0].clone();
    general_rows[1] = worst_rows[1].clone();
    let general = trace.derive(general_rows, "legitimate parties filtered")?;
    let worst = trace.derive(worst_rows, "all parties filtered")?;
    let post_general = metrics_for(&general, params)?;
    let post_worst = metrics_for(&worst, params)?;

    let (before, ec_before) = keys(trace, params)?;
    let (after, ec_after) = keys(&worst, params)?;
    let kdr_table = KdrTable {
        ab_before: kdr(&before[0], &before[1])?,
        ab_after: kdr(&after[0], &after[1])?,
        aec_before: kdr(&before[0], &ec_before)?,
        aec_after: kdr(&after[0], &ec_after)?,
        aem_before: before[2..].iter().map(|k| kdr(&before[0], k)).collect::<Result<_>>()?,
        aem_after: after[2..].iter().map(|k| kdr(&after[0], k)).collect::<Result<_>>()?,
    };
    let randomness = run_suite(after[1].bits(), &params.randomness)?;

    let curve = (1..=params.curve_z_max)
        .into_par_iter()
        .map(|z| {
            let worst_rows = filtered_rows(&plan, &spectra, z)?;
            let mut general_rows = trace.rows().to_vec();
            general_rows[0] = worst_rows[0].clone();
            general_rows[1] = worst_rows[1].clone();
            let g = metrics_for(&trace.derive(general_rows, "curve")?, params)?;
            let w = metrics_for(&trace.derive(worst_rows, "curve")?, params)?;
            Ok(CurvePoint {
                z,
                c_k_general: g.c_k,
                c_k_worst: w.c_k,
                r_ck_general: g.r_ck,
                r_ck_worst: w.r_ck,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CellResult {
        feasible: raw.mi_ab >= params.feasibility_floor_bits,
        raw,
        best_single_eve: best,
        mwa: mwa_reports,
        filter,
        post_general,
        post_worst,
        kdr: kdr_table,
        bob_key: after[1].to_hex(),
        randomness,
        curve,
    })
}

/// Simulates the trace of one sweep cell.
pub fn simulate_cell(config: &ExperimentConfig, label: ScenarioLabel, r_wavelengths: f64, seed: u64) -> Result<ProbeTrace> {
    let env = config.environment(label);
    let spec = env.scenario(label.kind(), config.n_rounds, seed);
    let geom = config.geometry(r_wavelengths)?;
    simulate_trace(&spec, &geom, &env.large_scale, &env.radio)
}

/// Runs every (scenario, r, seed) cell. Failures are recorded per cell and
/// do not stop the sweep; output order follows the configuration.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let params = AnalysisParams::from(config);
    let mut jobs = Vec::new();
    for &label in &config.scenarios {
        for &r in &config.r_wavelengths {
            for &seed in &config.seeds {
                jobs.push((label, r, seed));
            }
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|(label, r, seed)| {
            let outcome = simulate_cell(config, label, r, seed).and_then(|t| analyze_trace(&t, &params));
            match outcome {
                Ok(res) => CellOutcome {
                    scenario: label,
                    r_wavelengths: r,
                    seed,
                    result: Some(res),
                    failure: None,
                },
                Err(e) => {
                    log::error!("cell {label} r={r} seed={seed} failed: {e}");
                    CellOutcome {
                        scenario: label,
                        r_wavelengths: r,
                        seed,
                        result: None,
                        failure: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        cells,
    })
}
