//! Scenario execution behind the `redlab` binary: config resolution, seeded
//! runs, CSV persistence, and the run manifest.
//!
//! Every run writes into its output directory:
//! - `manifest.txt` — the fully resolved configuration (every key with its
//!   final value), the artifact version, and the pinned RNG algorithms;
//!   identical manifests produce byte-identical result files,
//! - `summary.txt` — the human-readable result (also printed to stdout by
//!   the binary),
//! - one or more scenario CSVs with the schemas documented per module.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::blocks::{evolve_blocks, BlockError, BlockSample};
use crate::config::{
    BlocksConfig, ConfigError, CrosscheckConfig, Diagnostic, EprSectionConfig, FokkerPlanckConfig,
    PearleConfig, ProximitySweepConfig, RawConfig, ResolvedSection,
};
use crate::epr::{epr_run, independence_check, EprError};
use crate::fokker_planck::{FpError, FpGrid};
use crate::linalg::{frobenius_norm, random_complex, random_hermitian, random_unit_vector};
use crate::model::{BlockDensityMatrix, HamiltonianBlocks};
use crate::proximity::{overlap, overlap_sweep, proximity_window, spread_fluctuation};
use crate::reduction::{born_statistics_with, StepMode, TrajectoryOptions};
use crate::report;
use crate::rng::{child_seed, GaussianStream};

/// Identifier of the pinned generator algorithms, recorded in manifests.
pub const RNG_CONTRACT: &str = "splitmix64-seeding/xoshiro256++/polar-box-muller";

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "REDLAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Blocks,
    Proximity,
    Pearle,
    FokkerPlanck,
    Epr,
    Crosscheck,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Blocks => "blocks",
            Scenario::Proximity => "proximity",
            Scenario::Pearle => "pearle",
            Scenario::FokkerPlanck => "fokker-planck",
            Scenario::Epr => "epr",
            Scenario::Crosscheck => "crosscheck",
        }
    }
}

impl FromStr for Scenario {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "blocks" => Ok(Scenario::Blocks),
            "proximity" => Ok(Scenario::Proximity),
            "pearle" => Ok(Scenario::Pearle),
            "fokker-planck" => Ok(Scenario::FokkerPlanck),
            "epr" => Ok(Scenario::Epr),
            "crosscheck" => Ok(Scenario::Crosscheck),
            other => Err(RunError::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("config syntax: {0}")]
    Syntax(#[from] ConfigError),
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Config(Vec<Diagnostic>),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl RunError {
    /// Process exit code: 1 unknown scenario, 2 config problems,
    /// 3 invariant violations during a run, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::UnknownScenario(_) => 1,
            RunError::Syntax(_) | RunError::Config(_) => 2,
            RunError::Invariant(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl From<BlockError> for RunError {
    fn from(e: BlockError) -> Self {
        RunError::Invariant(e.to_string())
    }
}

impl From<FpError> for RunError {
    fn from(e: FpError) -> Self {
        RunError::Invariant(e.to_string())
    }
}

impl From<EprError> for RunError {
    fn from(e: EprError) -> Self {
        RunError::Invariant(e.to_string())
    }
}

/// A fully specified run: scenario, config text, overrides, output location.
#[derive(Clone, Debug)]
pub struct RunRequest {
    pub scenario: Scenario,
    /// `None` uses the built-in defaults.
    pub config_text: Option<String>,
    /// `--key value` pairs applied on top of the config file.
    pub overrides: Vec<(String, String)>,
    /// Overrides the scenario's `seed` key when set.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

fn write_manifest(
    out_dir: &Path,
    scenario: Scenario,
    section: &ResolvedSection,
) -> Result<PathBuf, RunError> {
    let mut text = String::new();
    text.push_str(&format!("scenario = {}\n", scenario.name()));
    text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("rng = {RNG_CONTRACT}\n"));
    text.push_str(&format!("[{}]\n", scenario.name()));
    for line in section.manifest_lines() {
        text.push_str(&line);
        text.push('\n');
    }
    let path = out_dir.join("manifest.txt");
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

/// Resolve the scenario's section from config text plus overrides.
fn resolve_section(req: &RunRequest) -> Result<ResolvedSection, RunError> {
    let text = req.config_text.as_deref().unwrap_or("");
    let raw = RawConfig::parse(text)?;
    let mut overrides = req.overrides.clone();
    if let Some(seed) = req.seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }
    ResolvedSection::resolve(req.scenario.name(), &raw, &overrides).map_err(RunError::Config)
}

/// Validate a config text against every scenario schema; an empty list means
/// the config is valid.
pub fn validate_config(text: &str) -> Result<Vec<Diagnostic>, RunError> {
    Ok(crate::config::validate_text(text)?)
}

/// Execute a scenario and persist its results.
///
/// Nothing is written until the resolved configuration passes the typed
/// validation, so a rejected run leaves no files behind.
pub fn run_scenario(req: &RunRequest) -> Result<RunOutput, RunError> {
    let section = resolve_section(req)?;
    let diags = crate::config::validate_section(&section);
    if !diags.is_empty() {
        return Err(RunError::Config(diags));
    }
    fs::create_dir_all(&req.out_dir)?;
    let mut files = vec![write_manifest(&req.out_dir, req.scenario, &section)?];

    let summary = match req.scenario {
        Scenario::Blocks => run_blocks(&section, &req.out_dir, &mut files)?,
        Scenario::Proximity => run_proximity(&section, &req.out_dir, &mut files)?,
        Scenario::Pearle => run_pearle(&section, &req.out_dir, &mut files)?,
        Scenario::FokkerPlanck => run_fokker_planck(&section, &req.out_dir, &mut files)?,
        Scenario::Epr => run_epr(&section, &req.out_dir, &mut files)?,
        Scenario::Crosscheck => run_crosscheck(&section, &req.out_dir, &mut files)?,
    };

    let summary_path = req.out_dir.join("summary.txt");
    write_file(&summary_path, summary.as_bytes())?;
    files.push(summary_path);
    Ok(RunOutput { summary, files })
}

// ---------------------------------------------------------------------------
// blocks
// ---------------------------------------------------------------------------

/// Reproducible toy model: random Hermitian diagonal blocks of unit Frobenius
/// norm, a coupling block of Frobenius norm `coupling` (optionally damped by
/// the spectator overlap), and a pure initial state carrying the requested
/// channel weights.
pub fn build_toy_model(cfg: &BlocksConfig) -> (HamiltonianBlocks, BlockDensityMatrix) {
    let d = cfg.d;
    let mut rng = GaussianStream::from_seed(child_seed(cfg.seed, 0));
    let normalize = |m: ndarray::Array2<C64>| {
        let n = frobenius_norm(&m);
        if n > 0.0 {
            m.mapv(|z| z / n)
        } else {
            m
        }
    };
    let h1 = normalize(random_hermitian(d, &mut rng));
    let h2 = normalize(random_hermitian(d, &mut rng));
    let coupling_scale = if cfg.proximity_scale {
        cfg.coupling * overlap(&cfg.proximity)
    } else {
        cfg.coupling
    };
    let h12 = normalize(random_complex(d, &mut rng)).mapv(|z| z * coupling_scale);
    let h = HamiltonianBlocks::new(h1, h2, h12).expect("random blocks are Hermitian");

    let p = cfg.p0.probs();
    let v1 = random_unit_vector(d, &mut rng).mapv(|z| z * C64::new(p[0].sqrt(), 0.0));
    let v2 = random_unit_vector(d, &mut rng).mapv(|z| z * C64::new(p[1].sqrt(), 0.0));
    let rho0 = BlockDensityMatrix::from_amplitude_vectors(&v1, &v2)
        .expect("pure state from normalized weights");
    (h, rho0)
}

fn run_blocks(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = BlocksConfig::from_section(section).map_err(RunError::Config)?;
    let (h, rho0) = build_toy_model(&cfg);
    let series = evolve_blocks(&h, &rho0, cfg.t_final, cfg.dt)?;

    let stride = (series.len() / 2000).max(1);
    let sampled: Vec<BlockSample> = series
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == series.len() - 1)
        .map(|(_, s)| s.clone())
        .collect();
    let mut csv = Vec::new();
    report::write_block_series_csv(&mut csv, &sampled)?;
    let csv_path = out_dir.join("blocks.csv");
    write_file(&csv_path, &csv)?;
    files.push(csv_path);

    let max_herm = series
        .iter()
        .map(|s| s.herm_defect())
        .fold(0.0f64, f64::max);
    let max_trace = series
        .iter()
        .map(|s| s.trace_defect())
        .fold(0.0f64, f64::max);
    let min_eig = series
        .iter()
        .step_by(stride)
        .map(|s| s.state.min_block_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let last = series.last().expect("series includes the initial state");
    let mut summary = String::new();
    summary.push_str(&format!(
        "blocks: d={} steps={} dt={}\n",
        cfg.d,
        series.len() - 1,
        cfg.dt
    ));
    if cfg.proximity_scale {
        summary.push_str(&format!(
            "coupling scaled by spectator overlap: {}\n",
            overlap(&cfg.proximity)
        ));
    }
    summary.push_str(&format!(
        "p1: {} -> {}\np2: {} -> {}\n",
        rho0.p1(),
        last.p1(),
        rho0.p2(),
        last.p2()
    ));
    summary.push_str(&format!(
        "max hermiticity defect = {max_herm}\nmax trace defect = {max_trace}\n"
    ));
    summary.push_str(&format!(
        "min block eigenvalue over sampled run = {min_eig}\n"
    ));
    Ok(summary)
}

// ---------------------------------------------------------------------------
// proximity
// ---------------------------------------------------------------------------

fn run_proximity(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = ProximitySweepConfig::from_section(section).map_err(RunError::Config)?;
    let n = cfg.xi_steps;
    let xis: Vec<f64> = (0..n)
        .map(|i| cfg.xi_max * i as f64 / (n - 1) as f64)
        .collect();
    let sweep = overlap_sweep(&cfg.params, &xis);

    let mut csv = Vec::new();
    report::write_proximity_sweep_csv(&mut csv, &sweep)?;
    let csv_path = out_dir.join("proximity.csv");
    write_file(&csv_path, &csv)?;
    files.push(csv_path);

    let window = proximity_window(&cfg.params, cfg.threshold);
    let spread_unit = spread_fluctuation(1.0, &cfg.params);
    let mut summary = String::new();
    summary.push_str(&format!(
        "proximity: n'={} delta={}\n",
        cfg.params.n_prime(),
        cfg.params.delta()
    ));
    summary.push_str(&format!(
        "window xi* (overlap >= {}) = {window}\n",
        cfg.threshold
    ));
    summary.push_str(&format!(
        "overlap at xi*: {}\n",
        overlap(&cfg.params.with_xi(window).expect("window is a valid xi"))
    ));
    summary.push_str(&format!(
        "fluctuation spreading factor n/N = {spread_unit}\n"
    ));
    Ok(summary)
}

// ---------------------------------------------------------------------------
// pearle
// ---------------------------------------------------------------------------

fn run_pearle(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = PearleConfig::from_section(section).map_err(RunError::Config)?;
    let opts = TrajectoryOptions {
        mode: cfg.mode,
        path_stride: None,
    };
    let stats = born_statistics_with(&cfg.p0, &cfg.spec, cfg.max_steps, cfg.runs, cfg.seed, &opts)
        .map_err(|e| RunError::Invariant(e.to_string()))?;

    let mut csv = Vec::new();
    report::write_trajectories_csv(&mut csv, &stats.records)?;
    let csv_path = out_dir.join("trajectories.csv");
    write_file(&csv_path, &csv)?;
    files.push(csv_path);

    let mut summary = String::new();
    summary.push_str(&format!(
        "pearle: runs={} lambda={} sources={} dt={}\n",
        cfg.runs,
        cfg.spec.intensity(),
        cfg.spec.num_sources(),
        cfg.spec.dt()
    ));
    summary.push_str(&report::born_summary(&stats));
    for j in 0..stats.frequencies.len() {
        let dev = (stats.frequencies[j] - stats.expected[j]).abs();
        let three_sigma = 3.0 * stats.standard_errors[j];
        summary.push_str(&format!(
            "channel {j}: |freq - expected| = {dev} vs 3*stderr = {three_sigma} -> {}\n",
            if dev <= three_sigma { "ok" } else { "DEVIATES" }
        ));
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// fokker-planck
// ---------------------------------------------------------------------------

fn run_fokker_planck(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = FokkerPlanckConfig::from_section(section).map_err(RunError::Config)?;
    let mut grid = FpGrid::delta_at(cfg.p0.probs()[0], cfg.resolution)?;
    let dt = if cfg.dt > 0.0 {
        cfg.dt
    } else {
        grid.stable_dt(&cfg.spec)
    };
    let steps = if cfg.t_final > 0.0 {
        let n = (cfg.t_final / dt).round().max(0.0) as u64;
        grid.advance(&cfg.spec, dt, n.min(cfg.max_steps))?;
        n.min(cfg.max_steps)
    } else {
        grid.advance_until_interior_below(&cfg.spec, dt, cfg.target_interior, cfg.max_steps)?
    };

    let mut csv = Vec::new();
    report::write_fp_snapshot_csv(&mut csv, &grid)?;
    let csv_path = out_dir.join("fp_snapshot.csv");
    write_file(&csv_path, &csv)?;
    files.push(csv_path);

    let (a0, a1, interior) = crate::fokker_planck::absorbed_fractions(&grid);
    let mut summary = String::new();
    summary.push_str(&format!(
        "fokker-planck: resolution={} dt={dt} steps={steps} t={}\n",
        cfg.resolution,
        grid.time()
    ));
    summary.push_str(&format!(
        "absorbed_0 = {a0}\nabsorbed_1 = {a1}\ninterior = {interior}\n"
    ));
    summary.push_str(&format!(
        "mean = {} (initial {})\nmass defect = {}\n",
        grid.mean(),
        cfg.p0.probs()[0],
        (grid.total_mass() - 1.0).abs()
    ));
    Ok(summary)
}

// ---------------------------------------------------------------------------
// epr
// ---------------------------------------------------------------------------

fn run_epr(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = EprSectionConfig::from_section(section).map_err(RunError::Config)?;
    let outcome = epr_run(&cfg.epr)?;

    let mut csv = Vec::new();
    report::write_epr_runs_csv(&mut csv, &outcome)?;
    let csv_path = out_dir.join("epr_runs.csv");
    write_file(&csv_path, &csv)?;
    files.push(csv_path);

    let mut summary = String::new();
    summary.push_str(&format!(
        "epr: runs={} lambda'={} lambda\"={} dt={}\n",
        cfg.epr.num_runs, cfg.epr.intensity_a, cfg.epr.intensity_b, cfg.epr.dt
    ));
    summary.push_str(&report::epr_summary(&outcome));
    if cfg.independence_samples > 0 {
        let rep = independence_check(&cfg.epr, cfg.independence_samples)?;
        summary.push_str(&format!(
            "independence over {} samples: correlations = {:?}\n",
            rep.num_samples, rep.correlations
        ));
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// crosscheck
// ---------------------------------------------------------------------------

fn run_crosscheck(
    section: &ResolvedSection,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let cfg = CrosscheckConfig::from_section(section).map_err(RunError::Config)?;

    // Monte Carlo side
    let stats = born_statistics_with(
        &cfg.p0,
        &cfg.spec,
        cfg.max_steps,
        cfg.runs,
        cfg.seed,
        &TrajectoryOptions {
            mode: StepMode::Auto,
            path_stride: None,
        },
    )
    .map_err(|e| RunError::Invariant(e.to_string()))?;
    let mc_freq = stats.frequencies[0];
    let mc_se = stats.standard_errors[0];

    // PDE side at two resolutions
    let mut pde = Vec::new();
    for resolution in [cfg.resolution, cfg.resolution * 2] {
        let mut grid = FpGrid::delta_at(cfg.p0.probs()[0], resolution)?;
        let dt = grid.stable_dt(&cfg.spec);
        grid.advance_until_interior_below(&cfg.spec, dt, cfg.target_interior, cfg.max_steps)?;
        pde.push((resolution, grid.absorbed_mass()[1], grid.interior_mass()));
    }

    let mut csv = String::from("source,resolution,estimate,error_bound\n");
    csv.push_str(&format!("mc,,{mc_freq},{}\n", 3.0 * mc_se));
    for (res, a1, interior) in &pde {
        csv.push_str(&format!("pde,{res},{a1},{interior}\n"));
    }
    let csv_path = out_dir.join("crosscheck.csv");
    write_file(&csv_path, csv.as_bytes())?;
    files.push(csv_path);

    let mut summary = String::new();
    summary.push_str(&format!(
        "crosscheck: p0={} runs={} lambda={} sources={}\n",
        cfg.p0.probs()[0],
        cfg.runs,
        cfg.spec.intensity(),
        cfg.spec.num_sources()
    ));
    summary.push_str(&format!(
        "mc absorption frequency (channel 0) = {mc_freq} +- {mc_se}\n"
    ));
    let mut all_ok = true;
    for (res, a1, interior) in &pde {
        let diff = (mc_freq - a1).abs();
        let bound = 3.0 * mc_se + interior;
        let ok = diff <= bound;
        all_ok &= ok;
        summary.push_str(&format!(
            "pde resolution {res}: absorbed_1 = {a1} (interior {interior}); |mc - pde| = {diff} vs {bound} -> {}\n",
            if ok { "ok" } else { "MISMATCH" }
        ));
    }
    let richardson = (pde[0].1 - pde[1].1).abs();
    summary.push_str(&format!("|pde(h) - pde(h/2)| = {richardson}\n"));
    summary.push_str(if all_ok {
        "crosscheck PASS\n"
    } else {
        "crosscheck FAIL\n"
    });
    Ok(summary)
}
