//! Experiment runner: named experiments with structured JSON configs,
//! seeded reproducible execution, and CSV/JSON result documents.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{WaveformConfig, WaveformKind};
use crate::error::{Error, Result};
use crate::metrics::{ccdf, modulation_complexity, spectral_efficiency};
use crate::sensing::resolutions;
use crate::sim::{self, SensingScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    PaprCcdf,
    ComplexityTable,
    SpectralEfficiency,
    BerVsSnr,
    MixRangeProfile,
    PmsrVsIsr,
    MfMap,
    PdVsClipping,
    Resolutions,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::PaprCcdf,
        ExperimentName::ComplexityTable,
        ExperimentName::SpectralEfficiency,
        ExperimentName::BerVsSnr,
        ExperimentName::MixRangeProfile,
        ExperimentName::PmsrVsIsr,
        ExperimentName::MfMap,
        ExperimentName::PdVsClipping,
        ExperimentName::Resolutions,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ExperimentName::PaprCcdf => "papr_ccdf",
            ExperimentName::ComplexityTable => "complexity_table",
            ExperimentName::SpectralEfficiency => "spectral_efficiency",
            ExperimentName::BerVsSnr => "ber_vs_snr",
            ExperimentName::MixRangeProfile => "mix_range_profile",
            ExperimentName::PmsrVsIsr => "pmsr_vs_isr",
            ExperimentName::MfMap => "mf_map",
            ExperimentName::PdVsClipping => "pd_vs_clipping",
            ExperimentName::Resolutions => "resolutions",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.label() == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown experiment '{name}'; expected one of: {}",
                    Self::ALL.map(|e| e.label()).join(", ")
                ))
            })
    }
}

/// Channel and geometry knobs for the sensing and link experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub snr_db: f64,
    pub isr_db: f64,
    pub l_paths: usize,
    pub target_range_m: f64,
    pub target_velocity_mps: f64,
    pub interferer_range_m: f64,
    /// Round-trip reflection gain of the own echo, dB.
    pub echo_gain_db: f64,
    /// SNR for the detection-probability leg of the clipping study.
    pub pd_snr_db: f64,
    /// Slow-time symbols for the detection-probability leg.
    pub pd_slow_symbols: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            snr_db: -5.0,
            isr_db: -10.0,
            l_paths: 3,
            target_range_m: 96.0,
            target_velocity_mps: 0.0,
            interferer_range_m: 36.0,
            echo_gain_db: 0.0,
            pd_snr_db: -40.0,
            pd_slow_symbols: 512,
        }
    }
}

impl ScenarioConfig {
    pub fn sensing(&self) -> SensingScenario {
        SensingScenario {
            snr_db: self.snr_db,
            isr_db: self.isr_db,
            echo_gain_db: self.echo_gain_db,
            target_range_m: self.target_range_m,
            target_velocity_mps: self.target_velocity_mps,
            interferer_range_m: self.interferer_range_m,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub values: Vec<f64>,
}

/// A fully resolved experiment description; `run` is deterministic for a
/// fixed spec.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub waveform: WaveformConfig,
    pub scenario: ScenarioConfig,
    pub sweep: Option<Sweep>,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Per-experiment defaults. Link experiments start from the small
    /// ML-friendly setup; sensing experiments from the wideband setup (with
    /// M = 32 so the target delay of 32 samples is payload-transparent in
    /// the mixer); everything else from the wideband setup unchanged.
    pub fn default_for(name: ExperimentName) -> Self {
        let mut waveform = WaveformConfig::scenario_i();
        let mut scenario = ScenarioConfig::default();
        let mut sweep = None;
        let mut trials = 200u64;
        match name {
            ExperimentName::PaprCcdf => {
                trials = 20_000;
            }
            ExperimentName::ComplexityTable
            | ExperimentName::SpectralEfficiency
            | ExperimentName::Resolutions => {
                trials = 1;
            }
            ExperimentName::BerVsSnr => {
                waveform = WaveformConfig::scenario_ii();
                waveform.waveform = WaveformKind::ChirpedDftSOfdm;
                trials = 20_000;
                sweep = Some(Sweep {
                    variable: "snr_db".into(),
                    values: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
                });
            }
            ExperimentName::MixRangeProfile => {
                waveform.m = 32;
                scenario.echo_gain_db = -10.0;
            }
            ExperimentName::PmsrVsIsr => {
                waveform.m = 32;
                sweep = Some(Sweep {
                    variable: "isr_db".into(),
                    values: vec![-20.0, -15.0, -10.0, -5.0, 0.0],
                });
            }
            ExperimentName::MfMap => {
                scenario.snr_db = -20.0;
                scenario.target_range_m = 27.0;
                trials = 1;
            }
            ExperimentName::PdVsClipping => {
                scenario.snr_db = -20.0;
                scenario.target_range_m = 27.0;
                trials = 200;
                sweep = Some(Sweep {
                    variable: "clipping_ratio_db".into(),
                    values: vec![f64::INFINITY, 6.0, 3.0, 0.0],
                });
            }
        }
        ExperimentSpec {
            name,
            waveform,
            scenario,
            sweep,
            trials,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            let allowed = match self.name {
                ExperimentName::BerVsSnr => "snr_db",
                ExperimentName::PmsrVsIsr => "isr_db",
                ExperimentName::PdVsClipping => "clipping_ratio_db",
                _ => {
                    return Err(Error::Config(format!(
                        "experiment {} takes no sweep",
                        self.name.label()
                    )))
                }
            };
            if sweep.variable != allowed {
                return Err(Error::Config(format!(
                    "sweep variable for {} must be '{allowed}', got '{}'",
                    self.name.label(),
                    sweep.variable
                )));
            }
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep values must be non-empty".into()));
            }
            for (i, v) in sweep.values.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::Config(format!("sweep value #{i} is NaN")));
                }
                // Infinity is meaningful only as a disabled clipping ratio.
                if v.is_infinite() && self.name != ExperimentName::PdVsClipping {
                    return Err(Error::Config(format!("sweep value #{i} is not finite")));
                }
                if sweep.values[..i].contains(v) {
                    return Err(Error::Config(format!(
                        "sweep values must be distinct; {v} repeats"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        self.sweep.as_ref().map(|s| s.values.clone()).unwrap_or_default()
    }
}

/// Overlay the key/value pairs of a JSON object onto a serializable struct,
/// rejecting unknown keys by name.
fn merge_section<T: Serialize + for<'de> Deserialize<'de>>(
    base: &T,
    patch: &Value,
    section: &str,
) -> Result<T> {
    let mut tree = serde_json::to_value(base).expect("config types serialize");
    if patch.is_null() {
        return Ok(base_clone(tree));
    }
    let obj = patch.as_object().ok_or_else(|| {
        Error::Config(format!("'{section}' must be a JSON object"))
    })?;
    let target = tree.as_object_mut().expect("struct serializes to object");
    for (key, value) in obj {
        if !target.contains_key(key) {
            return Err(Error::Config(format!(
                "unknown field '{key}' in '{section}'"
            )));
        }
        target.insert(key.clone(), normalize_number(value.clone()));
    }
    serde_json::from_value(tree)
        .map_err(|e| Error::Config(format!("invalid value in '{section}': {e}")))
}

fn base_clone<T: for<'de> Deserialize<'de>>(tree: Value) -> T {
    serde_json::from_value(tree).expect("round-trip of serialized defaults")
}

/// Accept "inf" spellings for disabled clipping.
fn normalize_number(v: Value) -> Value {
    if let Value::String(s) = &v {
        match s.as_str() {
            "inf" | "Inf" | "infinity" => return Value::from(f64::MAX),
            _ => {}
        }
    }
    v
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    experiment: Option<String>,
    #[serde(default)]
    waveform: Value,
    #[serde(default)]
    scenario: Value,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(default)]
    trials: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    values: Vec<Value>,
}

/// Parse a JSON experiment config into a fully validated spec with defaults
/// filled in. `name` (from the command line) wins over an "experiment" key
/// in the document.
pub fn parse_config(name: Option<&str>, json_text: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = serde_json::from_str(json_text)
        .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    let name = match (name, &raw.experiment) {
        (Some(n), _) => n.to_string(),
        (None, Some(n)) => n.clone(),
        (None, None) => {
            return Err(Error::Config(
                "no experiment name given (field 'experiment')".into(),
            ))
        }
    };
    let mut spec = ExperimentSpec::default_for(ExperimentName::parse(&name)?);
    spec.waveform = merge_section(&spec.waveform, &raw.waveform, "waveform")?;
    spec.scenario = merge_section(&spec.scenario, &raw.scenario, "scenario")?;
    if let Some(sweep) = raw.sweep {
        let values = sweep
            .values
            .iter()
            .map(parse_db_value)
            .collect::<Result<Vec<f64>>>()?;
        spec.sweep = Some(Sweep {
            variable: sweep.variable,
            values,
        });
    }
    if let Some(trials) = raw.trials {
        spec.trials = trials;
    }
    if let Some(seed) = raw.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn parse_db_value(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Config(format!("sweep value {n} is not representable"))),
        Value::String(s) if matches!(s.as_str(), "inf" | "Inf" | "infinity") => {
            Ok(f64::INFINITY)
        }
        other => Err(Error::Config(format!(
            "sweep values must be numbers or \"inf\", got {other}"
        ))),
    }
}

/// Apply one `--set key=value` override. Keys are routed by name to the
/// waveform config, the scenario config, or the spec itself.
pub fn apply_override(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<()> {
    const WAVEFORM_KEYS: [&str; 12] = [
        "n",
        "m",
        "q",
        "p",
        "l_cp",
        "k",
        "bandwidth_hz",
        "carrier_hz",
        "constellation",
        "waveform",
        "m_otfs",
        "n_otfs",
    ];
    const SCENARIO_KEYS: [&str; 9] = [
        "snr_db",
        "isr_db",
        "l_paths",
        "target_range_m",
        "target_velocity_mps",
        "interferer_range_m",
        "echo_gain_db",
        "pd_snr_db",
        "pd_slow_symbols",
    ];
    let parsed: Value = serde_json::from_str(value).unwrap_or(Value::String(value.to_string()));
    let patch = serde_json::json!({ key: parsed });
    if WAVEFORM_KEYS.contains(&key) {
        spec.waveform = merge_section(&spec.waveform, &patch, "waveform")?;
    } else if SCENARIO_KEYS.contains(&key) {
        spec.scenario = merge_section(&spec.scenario, &patch, "scenario")?;
    } else if key == "trials" {
        spec.trials = parsed
            .as_u64()
            .ok_or_else(|| Error::Config(format!("trials must be an integer, got {value}")))?;
    } else if key == "seed" {
        spec.seed = parsed
            .as_u64()
            .ok_or_else(|| Error::Config(format!("seed must be an integer, got {value}")))?;
    } else {
        return Err(Error::Config(format!("unknown --set key '{key}'")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub library: String,
    pub version: String,
    pub seed: u64,
}

/// Result document: the spec echo, the experiment's table, and metadata.
/// Byte-identical for identical (spec, seed).
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub spec: ExperimentSpec,
    pub table: Table,
    pub meta: Meta,
}

fn table(name: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> Table {
    Table {
        name: name.into(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

/// Execute an experiment. Deterministic for a fixed (spec, seed).
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let tab = match spec.name {
        ExperimentName::PaprCcdf => run_papr_ccdf(spec)?,
        ExperimentName::ComplexityTable => run_complexity(spec)?,
        ExperimentName::SpectralEfficiency => run_spectral_efficiency(spec)?,
        ExperimentName::BerVsSnr => run_ber(spec)?,
        ExperimentName::MixRangeProfile => run_mix_range_profile(spec)?,
        ExperimentName::PmsrVsIsr => run_pmsr_vs_isr(spec)?,
        ExperimentName::MfMap => run_mf_map(spec)?,
        ExperimentName::PdVsClipping => run_pd_vs_clipping(spec)?,
        ExperimentName::Resolutions => run_resolutions(spec)?,
    };
    Ok(RunOutput {
        spec: spec.clone(),
        table: tab,
        meta: Meta {
            library: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: spec.seed,
        },
    })
}

const CCDF_WAVEFORMS: [WaveformKind; 5] = [
    WaveformKind::DftSOfdm,
    WaveformKind::ChirpedDftSOfdm,
    WaveformKind::Ofdm,
    WaveformKind::Afdm,
    WaveformKind::Otfs,
];

fn run_papr_ccdf(spec: &ExperimentSpec) -> Result<Table> {
    let thresholds: Vec<f64> = (0..=48).map(|i| i as f64 * 0.25).collect();
    let mut curves = Vec::new();
    for kind in CCDF_WAVEFORMS {
        let mut cfg = spec.waveform.clone();
        cfg.waveform = kind;
        let samples = sim::papr_samples(&cfg, spec.trials, spec.seed)?;
        curves.push(ccdf(&samples, &thresholds)?);
    }
    let mut rows = Vec::new();
    for (i, &lambda) in thresholds.iter().enumerate() {
        let mut row = vec![Cell::Num(lambda)];
        row.extend(curves.iter().map(|c| Cell::Num(c.points[i].1)));
        rows.push(row);
    }
    let mut columns = vec!["lambda_db".to_string()];
    columns.extend(
        CCDF_WAVEFORMS
            .iter()
            .map(|w| format!("ccdf_{}", w.label())),
    );
    Ok(Table {
        name: "papr_ccdf".into(),
        columns,
        rows,
    })
}

fn run_complexity(spec: &ExperimentSpec) -> Result<Table> {
    let kinds = [
        WaveformKind::Ofdm,
        WaveformKind::DftSOfdm,
        WaveformKind::ChirpedDftSOfdm,
        WaveformKind::DftSOfdmCm,
        WaveformKind::Afdm,
        WaveformKind::Otfs,
    ];
    let mut rows = Vec::new();
    for kind in kinds {
        let mut cfg = spec.waveform.clone();
        cfg.waveform = kind;
        let report = modulation_complexity(&cfg)?;
        rows.push(vec![
            Cell::Text(kind.label().into()),
            Cell::Int(report.multiplications),
            Cell::Num(report.normalized_to_ofdm),
        ]);
    }
    Ok(table(
        "complexity_table",
        &["waveform", "multiplications", "normalized_to_ofdm"],
        rows,
    ))
}

fn run_spectral_efficiency(spec: &ExperimentSpec) -> Result<Table> {
    let kinds = [
        WaveformKind::DftSOfdm,
        WaveformKind::ChirpedDftSOfdm,
        WaveformKind::DftSOfdmCm,
        WaveformKind::Ofdm,
        WaveformKind::Afdm,
        WaveformKind::Otfs,
    ];
    let rows = kinds
        .iter()
        .map(|&kind| {
            let mut cfg = spec.waveform.clone();
            cfg.waveform = kind;
            vec![
                Cell::Text(kind.label().into()),
                Cell::Num(spectral_efficiency(&cfg)),
            ]
        })
        .collect();
    Ok(table(
        "spectral_efficiency",
        &["waveform", "bits_per_s_per_hz"],
        rows,
    ))
}

fn run_ber(spec: &ExperimentSpec) -> Result<Table> {
    let snrs = spec.sweep_values();
    let points = sim::ber_curve(
        &spec.waveform,
        spec.scenario.l_paths,
        &snrs,
        spec.trials,
        spec.seed,
    )?;
    let rows = points
        .iter()
        .map(|p| {
            vec![
                Cell::Num(p.snr_db),
                Cell::Num(p.ber()),
                Cell::Int(p.bit_errors),
                Cell::Int(p.bits),
            ]
        })
        .collect();
    Ok(table(
        "ber_vs_snr",
        &["snr_db", "ber", "bit_errors", "bits"],
        rows,
    ))
}

fn run_mix_range_profile(spec: &ExperimentSpec) -> Result<Table> {
    let (fmcw_db, chirped_db) = sim::ghost_profiles(
        &spec.waveform,
        &spec.scenario.sensing(),
        spec.trials,
        spec.seed,
    )?;
    let bin_m = crate::config::SPEED_OF_LIGHT / (2.0 * spec.waveform.bandwidth_hz);
    let rows = (0..spec.waveform.n)
        .map(|bin| {
            vec![
                Cell::Int(bin as u64),
                Cell::Num(bin as f64 * bin_m),
                Cell::Num(fmcw_db[bin]),
                Cell::Num(chirped_db[bin]),
            ]
        })
        .collect();
    Ok(table(
        "mix_range_profile",
        &["bin", "range_m", "fmcw_db", "chirped_dft_s_ofdm_db"],
        rows,
    ))
}

fn run_pmsr_vs_isr(spec: &ExperimentSpec) -> Result<Table> {
    let points = sim::pmsr_vs_isr(
        &spec.waveform,
        &spec.scenario.sensing(),
        &spec.sweep_values(),
        spec.trials,
        spec.seed,
    )?;
    let rows = points
        .iter()
        .map(|&(isr, fmcw, chirped)| {
            vec![Cell::Num(isr), Cell::Num(fmcw), Cell::Num(chirped)]
        })
        .collect();
    Ok(table(
        "pmsr_vs_isr",
        &["isr_db", "pmsr_fmcw_db", "pmsr_chirped_dft_s_ofdm_db"],
        rows,
    ))
}

fn run_mf_map(spec: &ExperimentSpec) -> Result<Table> {
    let scen = spec.scenario.sensing();
    let mut cuts = Vec::new();
    for kind in [WaveformKind::DftSOfdm, WaveformKind::ChirpedDftSOfdm] {
        let mut cfg = spec.waveform.clone();
        cfg.waveform = kind;
        cuts.push(sim_mf_cut(&cfg, &scen, spec.seed)?);
    }
    let bin_m = crate::config::SPEED_OF_LIGHT / (2.0 * spec.waveform.bandwidth_hz);
    let rows = (0..spec.waveform.n)
        .map(|bin| {
            vec![
                Cell::Int(bin as u64),
                Cell::Num(bin as f64 * bin_m),
                Cell::Num(cuts[0][bin]),
                Cell::Num(cuts[1][bin]),
            ]
        })
        .collect();
    Ok(table(
        "mf_map",
        &[
            "range_bin",
            "range_m",
            "dft_s_ofdm_db",
            "chirped_dft_s_ofdm_db",
        ],
        rows,
    ))
}

/// Range cut of the matched-filter map at the target's velocity bin,
/// normalized to the peak.
fn sim_mf_cut(cfg: &WaveformConfig, scen: &SensingScenario, seed: u64) -> Result<Vec<f64>> {
    use crate::channel::{propagate_with_rng, radar_echo, ChannelProfile};
    use crate::sensing::matched_filter_map;
    use crate::waveform::random_frame;
    use num_complex::Complex64;

    let mut rng = sim::trial_rng(seed, 40, 0);
    let tx = random_frame(cfg, &mut rng)?;
    let gain = Complex64::new(10f64.powf(scen.echo_gain_db / 20.0), 0.0);
    let echo = radar_echo(scen.target_range_m, scen.target_velocity_mps, gain, cfg)?;
    let profile = ChannelProfile {
        taps: vec![echo],
        snr_db: scen.snr_db,
        interferers: vec![],
        clipping_ratio_db: f64::INFINITY,
        noise_ref_power: Some(1.0),
    };
    let rx = propagate_with_rng(&tx, &profile, cfg, &mut rng)?;
    let map = matched_filter_map(&tx, &rx, cfg)?;
    let (_, vbin) = map.peak_bins();
    let cut = map.range_cut(vbin);
    let peak = cut.iter().cloned().fold(0.0, f64::max).max(1e-300);
    Ok(cut.iter().map(|v| 20.0 * (v / peak).log10()).collect())
}

const CLIPPING_WAVEFORMS: [WaveformKind; 3] = [
    WaveformKind::ChirpedDftSOfdm,
    WaveformKind::Afdm,
    WaveformKind::Otfs,
];

fn run_pd_vs_clipping(spec: &ExperimentSpec) -> Result<Table> {
    let crs = spec.sweep_values();
    let scen = spec.scenario.sensing();
    let mut pmsr_curves = Vec::new();
    let mut pd_curves = Vec::new();
    for kind in CLIPPING_WAVEFORMS {
        let mut cfg = spec.waveform.clone();
        cfg.waveform = kind;
        pmsr_curves.push(sim::clipping_pmsr(&cfg, &scen, &crs, spec.trials, spec.seed)?);
        pd_curves.push(sim::clipping_pd(
            &cfg,
            &scen,
            spec.scenario.pd_snr_db,
            spec.scenario.pd_slow_symbols,
            &crs,
            spec.trials,
            spec.seed,
        )?);
    }
    let mut rows = Vec::new();
    for (i, &cr) in crs.iter().enumerate() {
        let mut row = vec![Cell::Num(cr)];
        for wf in &pmsr_curves {
            row.push(Cell::Num(wf[i].1));
        }
        for wf in &pd_curves {
            row.push(Cell::Num(wf[i].1));
        }
        rows.push(row);
    }
    let mut columns = vec!["clipping_ratio_db".to_string()];
    for w in &CLIPPING_WAVEFORMS {
        columns.push(format!("pmsr_{}_db", w.label()));
    }
    for w in &CLIPPING_WAVEFORMS {
        columns.push(format!("pd_{}", w.label()));
    }
    Ok(Table {
        name: "pd_vs_clipping".into(),
        columns,
        rows,
    })
}

fn run_resolutions(spec: &ExperimentSpec) -> Result<Table> {
    let (range_m, velocity_mps) = resolutions(&spec.waveform)?;
    Ok(table(
        "resolutions",
        &["range_res_m", "velocity_res_mps"],
        vec![vec![Cell::Num(range_m), Cell::Num(velocity_mps)]],
    ))
}

/// Format with 9 significant digits.
fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.8e}")
}

/// CSV rendering: header row, one row per point.
pub fn to_csv(output: &RunOutput) -> String {
    let mut out = String::new();
    out.push_str(&output.table.columns.join(","));
    out.push('\n');
    for row in &output.table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_num(*x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON result document.
pub fn to_json(output: &RunOutput) -> String {
    let mut text = serde_json::to_string_pretty(output).expect("output serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        for name in ExperimentName::ALL {
            let spec = ExperimentSpec::default_for(name);
            spec.validate().unwrap();
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let spec = parse_config(Some("papr_ccdf"), "{}").unwrap();
        assert_eq!(spec.waveform.n, 256);
        assert_eq!(spec.waveform.m, 128);
        assert_eq!(spec.waveform.q, 4);
        assert_eq!(spec.waveform.l_cp, 32);
        assert_eq!(spec.waveform.k, 64);
    }

    #[test]
    fn rejects_non_power_of_two_m_by_name() {
        let err = parse_config(Some("papr_ccdf"), r#"{"waveform": {"m": 100}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains('m'), "{err}");
    }

    #[test]
    fn rejects_bad_otfs_product_by_constraint() {
        let err = parse_config(
            Some("papr_ccdf"),
            r#"{"waveform": {"m_otfs": 64, "n_otfs": 2}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("m_otfs * n_otfs"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_by_name() {
        let err = parse_config(Some("papr_ccdf"), r#"{"waveform": {"frobnicate": 3}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("frobnicate"), "{err}");
        let err = parse_config(Some("papr_ccdf"), r#"{"bogus_section": {}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus_section"), "{err}");
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        assert!(parse_config(Some("papr"), "{}").is_err());
        assert!(ExperimentName::parse("papr_ccdf").is_ok());
    }

    #[test]
    fn sweep_validation() {
        let mut spec = ExperimentSpec::default_for(ExperimentName::BerVsSnr);
        spec.sweep = Some(Sweep {
            variable: "isr_db".into(),
            values: vec![1.0],
        });
        assert!(spec.validate().is_err(), "wrong variable");
        spec.sweep = Some(Sweep {
            variable: "snr_db".into(),
            values: vec![1.0, 1.0],
        });
        assert!(spec.validate().is_err(), "repeated values");
        spec.sweep = Some(Sweep {
            variable: "snr_db".into(),
            values: vec![1.0, 2.0],
        });
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn overrides_route_by_key() {
        let mut spec = ExperimentSpec::default_for(ExperimentName::BerVsSnr);
        apply_override(&mut spec, "m", "8").unwrap();
        assert_eq!(spec.waveform.m, 8);
        apply_override(&mut spec, "waveform", "dft_s_ofdm_cm").unwrap();
        assert_eq!(spec.waveform.waveform, WaveformKind::DftSOfdmCm);
        apply_override(&mut spec, "snr_db", "-5.5").unwrap();
        assert_eq!(spec.scenario.snr_db, -5.5);
        apply_override(&mut spec, "trials", "77").unwrap();
        assert_eq!(spec.trials, 77);
        assert!(apply_override(&mut spec, "nope", "1").is_err());
    }

    #[test]
    fn resolutions_experiment_reports_3m() {
        let spec = ExperimentSpec::default_for(ExperimentName::Resolutions);
        let out = run(&spec).unwrap();
        match out.table.rows[0][0] {
            Cell::Num(x) => assert_eq!(x, 3.0),
            _ => panic!("range resolution should be numeric"),
        }
    }

    #[test]
    fn complexity_experiment_reports_normalized_otfs() {
        let spec = ExperimentSpec::default_for(ExperimentName::ComplexityTable);
        let out = run(&spec).unwrap();
        let otfs_row = out
            .table
            .rows
            .iter()
            .find(|r| matches!(&r[0], Cell::Text(s) if s == "otfs"))
            .unwrap();
        match otfs_row[2] {
            Cell::Num(x) => assert!((x - 1.875).abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn run_output_is_byte_deterministic() {
        let mut spec = ExperimentSpec::default_for(ExperimentName::PaprCcdf);
        spec.trials = 10;
        spec.seed = 42;
        let a = to_json(&run(&spec).unwrap());
        let b = to_json(&run(&spec).unwrap());
        assert_eq!(a, b);
        let csv_a = to_csv(&run(&spec).unwrap());
        let csv_b = to_csv(&run(&spec).unwrap());
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn csv_has_documented_header() {
        let mut spec = ExperimentSpec::default_for(ExperimentName::PaprCcdf);
        spec.trials = 5;
        let csv = to_csv(&run(&spec).unwrap());
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "lambda_db,ccdf_dft_s_ofdm,ccdf_chirped_dft_s_ofdm,ccdf_ofdm,ccdf_afdm,ccdf_otfs"
        );
    }
}
