//! Flat, line-oriented run configuration.
//!
//! The format is `key = value` lines grouped under `[scenario]` section
//! headers, with `#` comments — trivially parseable and diff-friendly, which
//! is what makes the run manifests useful. No nesting.
//!
//! Resolution order per key: built-in default, then the config file, then
//! command-line overrides. Every key of the active scenario ends up in the
//! run manifest with its final value.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::epr::EprConfig;
use crate::fokker_planck::FpGrid;
use crate::model::{ChannelState, DiffusionSpec, ProximityParams};
use crate::reduction::StepMode;

/// Built-in defaults for every scenario; also the config text that `validate`
/// accepts with an empty diagnostics list.
pub const DEFAULT_CONFIG: &str = "\
# reduction-lab default configuration
# one section per scenario; values here are the built-in defaults

[blocks]
d = 2
coupling = 0.4
p0 = 0.36,0.64
t_final = 10.0
dt = 0.001
seed = 1
proximity_scale = 0
n_prime = 100
xi = 0.1
delta = 1.0

[proximity]
n_prime = 100
delta = 1.0
t_re = 1.0
t_im = 0.0
cluster_n = 10
pointer_total = 1000
xi_max = 0.6
xi_steps = 120
threshold = 0.5

[pearle]
p0 = 0.36,0.64
lambda = 1.0
num_sources = 1
dt = 0.0001
max_steps = 1000000
runs = 100000
seed = 42
mode = auto

[fokker-planck]
p0 = 0.3,0.7
lambda = 1.0
num_sources = 1
resolution = 160
dt = 0
t_final = 0
target_interior = 0.0001
max_steps = 10000000

[epr]
amp_hv_re = 0.7071067811865476
amp_hv_im = 0.0
amp_vh_re = -0.7071067811865476
amp_vh_im = 0.0
lambda_a = 1.0
lambda_b = 1.0
dt = 0.0001
max_steps = 1000000
runs = 10000
seed = 7
independence_samples = 0

[crosscheck]
p0 = 0.3,0.7
lambda = 1.0
num_sources = 1
dt = 0.0001
max_steps = 1000000
runs = 200000
seed = 11
resolution = 160
target_interior = 0.0001
";

pub const SCENARIO_NAMES: [&str; 6] = [
    "blocks",
    "proximity",
    "pearle",
    "fokker-planck",
    "epr",
    "crosscheck",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// One validation finding: where and what.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn keyed(line: Option<usize>, key: &str, message: String) -> Self {
        Self {
            line,
            key: Some(key.to_string()),
            message,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(line), Some(key)) => write!(f, "line {line}, key `{key}`: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "key `{key}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Parsed config text: sections of raw string entries.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or(ConfigError::Syntax {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim().to_string();
                if name.is_empty() {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        message: "empty section name".into(),
                    });
                }
                cfg.sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let section = current.as_ref().ok_or(ConfigError::Syntax {
                line: line_no,
                message: "key outside of any [section]".into(),
            })?;
            cfg.sections.get_mut(section).unwrap().insert(
                key.trim().to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line: Some(line_no),
                },
            );
        }
        Ok(cfg)
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(|s| s.as_str())
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, Entry>> {
        self.sections.get(name)
    }
}

fn known_keys(scenario: &str) -> &'static [&'static str] {
    match scenario {
        "blocks" => &[
            "d",
            "coupling",
            "p0",
            "t_final",
            "dt",
            "seed",
            "proximity_scale",
            "n_prime",
            "xi",
            "delta",
        ],
        "proximity" => &[
            "n_prime",
            "delta",
            "t_re",
            "t_im",
            "cluster_n",
            "pointer_total",
            "xi_max",
            "xi_steps",
            "threshold",
        ],
        "pearle" => &[
            "p0",
            "lambda",
            "num_sources",
            "dt",
            "max_steps",
            "runs",
            "seed",
            "mode",
        ],
        "fokker-planck" => &[
            "p0",
            "lambda",
            "num_sources",
            "resolution",
            "dt",
            "t_final",
            "target_interior",
            "max_steps",
        ],
        "epr" => &[
            "amp_hv_re",
            "amp_hv_im",
            "amp_vh_re",
            "amp_vh_im",
            "lambda_a",
            "lambda_b",
            "dt",
            "max_steps",
            "runs",
            "seed",
            "independence_samples",
        ],
        "crosscheck" => &[
            "p0",
            "lambda",
            "num_sources",
            "dt",
            "max_steps",
            "runs",
            "seed",
            "resolution",
            "target_interior",
        ],
        _ => &[],
    }
}

/// All keys of one scenario with their final values after overlaying
/// defaults, file, and overrides.
#[derive(Clone, Debug)]
pub struct ResolvedSection {
    pub scenario: String,
    entries: BTreeMap<String, Entry>,
}

impl ResolvedSection {
    /// Overlay order: built-in defaults, file section, then overrides.
    /// Unknown keys anywhere produce diagnostics.
    pub fn resolve(
        scenario: &str,
        file: &RawConfig,
        overrides: &[(String, String)],
    ) -> Result<Self, Vec<Diagnostic>> {
        let defaults = RawConfig::parse(DEFAULT_CONFIG).expect("default config parses");
        let keys = known_keys(scenario);
        let mut diags = Vec::new();
        let mut entries: BTreeMap<String, Entry> = defaults
            .section(scenario)
            .expect("every scenario has defaults")
            .iter()
            .map(|(k, e)| {
                (
                    k.clone(),
                    Entry {
                        value: e.value.clone(),
                        line: None,
                    },
                )
            })
            .collect();
        debug_assert_eq!(entries.len(), keys.len());

        if let Some(section) = file.section(scenario) {
            for (k, e) in section {
                if keys.contains(&k.as_str()) {
                    entries.insert(k.clone(), e.clone());
                } else {
                    diags.push(Diagnostic::keyed(
                        e.line,
                        k,
                        format!("unknown key in [{scenario}]"),
                    ));
                }
            }
        }
        for (k, v) in overrides {
            if keys.contains(&k.as_str()) {
                entries.insert(
                    k.clone(),
                    Entry {
                        value: v.clone(),
                        line: None,
                    },
                );
            } else {
                diags.push(Diagnostic::keyed(
                    None,
                    k,
                    format!("unknown key for scenario `{scenario}`"),
                ));
            }
        }
        if diags.is_empty() {
            Ok(Self {
                scenario: scenario.to_string(),
                entries,
            })
        } else {
            Err(diags)
        }
    }

    pub fn get(&self, key: &str) -> &str {
        &self.entries[key].value
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries[key].line
    }

    /// Final `key = value` lines, sorted by key; the manifest body.
    pub fn manifest_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|(k, e)| format!("{k} = {}", e.value))
            .collect()
    }

    fn f64(&self, key: &str, diags: &mut Vec<Diagnostic>) -> f64 {
        match self.get(key).parse::<f64>() {
            Ok(v) => v,
            Err(_) => {
                diags.push(Diagnostic::keyed(
                    self.line(key),
                    key,
                    format!("`{}` is not a real number", self.get(key)),
                ));
                f64::NAN
            }
        }
    }

    fn u64(&self, key: &str, diags: &mut Vec<Diagnostic>) -> u64 {
        match self.get(key).parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                diags.push(Diagnostic::keyed(
                    self.line(key),
                    key,
                    format!("`{}` is not a non-negative integer", self.get(key)),
                ));
                0
            }
        }
    }

    fn f64_list(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Vec<f64> {
        let raw = self.get(key);
        let mut out = Vec::new();
        for part in raw.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    diags.push(Diagnostic::keyed(
                        self.line(key),
                        key,
                        format!("`{raw}` is not a comma-separated list of reals"),
                    ));
                    return Vec::new();
                }
            }
        }
        out
    }

    fn bool01(&self, key: &str, diags: &mut Vec<Diagnostic>) -> bool {
        match self.get(key) {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                diags.push(Diagnostic::keyed(
                    self.line(key),
                    key,
                    format!("`{other}` is not a flag (use 0/1 or true/false)"),
                ));
                false
            }
        }
    }
}

fn channel_state(
    section: &ResolvedSection,
    key: &str,
    want_len: Option<usize>,
    diags: &mut Vec<Diagnostic>,
) -> Option<ChannelState> {
    let list = section.f64_list(key, diags);
    if list.is_empty() {
        return None;
    }
    if let Some(n) = want_len {
        if list.len() != n {
            diags.push(Diagnostic::keyed(
                section.line(key),
                key,
                format!("expected {n} channels, got {}", list.len()),
            ));
            return None;
        }
    }
    match ChannelState::new(&list) {
        Ok(s) => Some(s),
        Err(e) => {
            diags.push(Diagnostic::keyed(
                section.line(key),
                key,
                format!("ChannelState invariant: {e}"),
            ));
            None
        }
    }
}

fn diffusion_spec(
    section: &ResolvedSection,
    lambda_key: &str,
    sources_key: &str,
    dt_key: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<DiffusionSpec> {
    let lambda = section.f64(lambda_key, diags);
    let sources = section.u64(sources_key, diags);
    let dt = section.f64(dt_key, diags);
    match DiffusionSpec::new(lambda, sources.min(u32::MAX as u64) as u32, dt) {
        Ok(s) => Some(s),
        Err(e) => {
            let key = match format!("{e}") {
                m if m.contains("intensity") => lambda_key,
                m if m.contains("num_sources") => sources_key,
                _ => dt_key,
            };
            diags.push(Diagnostic::keyed(
                section.line(key),
                key,
                format!("DiffusionSpec.{key}: {e}"),
            ));
            None
        }
    }
}

/// Typed `[pearle]` section.
#[derive(Clone, Debug)]
pub struct PearleConfig {
    pub p0: ChannelState,
    pub spec: DiffusionSpec,
    pub max_steps: u64,
    pub runs: u64,
    pub seed: u64,
    pub mode: StepMode,
}

impl PearleConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let p0 = channel_state(section, "p0", None, &mut diags);
        let spec = diffusion_spec(section, "lambda", "num_sources", "dt", &mut diags);
        let max_steps = section.u64("max_steps", &mut diags);
        let runs = section.u64("runs", &mut diags);
        let seed = section.u64("seed", &mut diags);
        let mode = match section.get("mode") {
            "auto" => StepMode::Auto,
            "general" => StepMode::GeneralOnly,
            other => {
                diags.push(Diagnostic::keyed(
                    section.line("mode"),
                    "mode",
                    format!("`{other}` is not a step mode (auto|general)"),
                ));
                StepMode::Auto
            }
        };
        if max_steps == 0 {
            diags.push(Diagnostic::keyed(
                section.line("max_steps"),
                "max_steps",
                "must be at least 1".into(),
            ));
        }
        if runs < 100 {
            diags.push(Diagnostic::keyed(
                section.line("runs"),
                "runs",
                "ensemble statistics need at least 100 runs".into(),
            ));
        }
        match (p0, spec, diags.is_empty()) {
            (Some(p0), Some(spec), true) => Ok(Self {
                p0,
                spec,
                max_steps,
                runs,
                seed,
                mode,
            }),
            _ => Err(diags),
        }
    }
}

/// Typed `[blocks]` section.
#[derive(Clone, Debug)]
pub struct BlocksConfig {
    pub d: usize,
    pub coupling: f64,
    pub p0: ChannelState,
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
    pub proximity_scale: bool,
    pub proximity: ProximityParams,
}

impl BlocksConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let d = section.u64("d", &mut diags) as usize;
        if d == 0 || d > 16 {
            diags.push(Diagnostic::keyed(
                section.line("d"),
                "d",
                "block dimension must be in 1..=16".into(),
            ));
        }
        let coupling = section.f64("coupling", &mut diags);
        if !coupling.is_finite() {
            diags.push(Diagnostic::keyed(
                section.line("coupling"),
                "coupling",
                "must be finite".into(),
            ));
        }
        let p0 = channel_state(section, "p0", Some(2), &mut diags);
        let t_final = section.f64("t_final", &mut diags);
        let dt = section.f64("dt", &mut diags);
        if !dt.is_nan() && dt <= 0.0 {
            diags.push(Diagnostic::keyed(
                section.line("dt"),
                "dt",
                "time step must be > 0".into(),
            ));
        }
        if !t_final.is_nan() && t_final < 0.0 {
            diags.push(Diagnostic::keyed(
                section.line("t_final"),
                "t_final",
                "final time must be >= 0".into(),
            ));
        }
        let seed = section.u64("seed", &mut diags);
        let proximity_scale = section.bool01("proximity_scale", &mut diags);
        let n_prime = section.u64("n_prime", &mut diags);
        let xi = section.f64("xi", &mut diags);
        let delta = section.f64("delta", &mut diags);
        let proximity = match ProximityParams::new(n_prime, xi, delta, 1, 1, C64::new(1.0, 0.0)) {
            Ok(p) => Some(p),
            Err(e) => {
                diags.push(Diagnostic::keyed(None, "n_prime", format!("{e}")));
                None
            }
        };
        match (p0, proximity, diags.is_empty()) {
            (Some(p0), Some(proximity), true) => Ok(Self {
                d,
                coupling,
                p0,
                t_final,
                dt,
                seed,
                proximity_scale,
                proximity,
            }),
            _ => Err(diags),
        }
    }
}

/// Typed `[proximity]` section.
#[derive(Clone, Debug)]
pub struct ProximitySweepConfig {
    pub params: ProximityParams,
    pub xi_max: f64,
    pub xi_steps: u64,
    pub threshold: f64,
}

impl ProximitySweepConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let n_prime = section.u64("n_prime", &mut diags);
        let delta = section.f64("delta", &mut diags);
        let t_re = section.f64("t_re", &mut diags);
        let t_im = section.f64("t_im", &mut diags);
        let cluster_n = section.u64("cluster_n", &mut diags);
        let pointer_total = section.u64("pointer_total", &mut diags);
        let xi_max = section.f64("xi_max", &mut diags);
        let xi_steps = section.u64("xi_steps", &mut diags);
        let threshold = section.f64("threshold", &mut diags);
        if !xi_max.is_nan() && xi_max <= 0.0 {
            diags.push(Diagnostic::keyed(
                section.line("xi_max"),
                "xi_max",
                "sweep range must be > 0".into(),
            ));
        }
        if xi_steps < 2 {
            diags.push(Diagnostic::keyed(
                section.line("xi_steps"),
                "xi_steps",
                "sweep needs at least 2 points".into(),
            ));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            diags.push(Diagnostic::keyed(
                section.line("threshold"),
                "threshold",
                "threshold must be in (0, 1)".into(),
            ));
        }
        let params = match ProximityParams::new(
            n_prime,
            0.0,
            delta,
            cluster_n,
            pointer_total,
            C64::new(t_re, t_im),
        ) {
            Ok(p) => Some(p),
            Err(e) => {
                diags.push(Diagnostic {
                    line: None,
                    key: None,
                    message: format!("ProximityParams invariant: {e}"),
                });
                None
            }
        };
        match (params, diags.is_empty()) {
            (Some(params), true) => Ok(Self {
                params,
                xi_max,
                xi_steps,
                threshold,
            }),
            _ => Err(diags),
        }
    }
}

/// Typed `[fokker-planck]` section.
#[derive(Clone, Debug)]
pub struct FokkerPlanckConfig {
    pub p0: ChannelState,
    pub spec: DiffusionSpec,
    pub resolution: usize,
    /// 0 means: pick a stable step automatically.
    pub dt: f64,
    /// 0 means: run until `target_interior` instead of to a fixed time.
    pub t_final: f64,
    pub target_interior: f64,
    pub max_steps: u64,
}

impl FokkerPlanckConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let p0 = channel_state(section, "p0", Some(2), &mut diags);
        // the PDE has no Euler-Maruyama step; reuse the diffusion parameters
        // with a placeholder sde step
        let lambda = section.f64("lambda", &mut diags);
        let sources = section.u64("num_sources", &mut diags);
        let spec = match DiffusionSpec::new(lambda, sources.min(255) as u32, 1e-6) {
            Ok(s) => Some(s),
            Err(e) => {
                let key = if format!("{e}").contains("num_sources") {
                    "num_sources"
                } else {
                    "lambda"
                };
                diags.push(Diagnostic::keyed(
                    section.line(key),
                    key,
                    format!("DiffusionSpec.{key}: {e}"),
                ));
                None
            }
        };
        let resolution = section.u64("resolution", &mut diags) as usize;
        let dt = section.f64("dt", &mut diags);
        let t_final = section.f64("t_final", &mut diags);
        let target_interior = section.f64("target_interior", &mut diags);
        let max_steps = section.u64("max_steps", &mut diags);
        if !dt.is_nan() && dt < 0.0 {
            diags.push(Diagnostic::keyed(
                section.line("dt"),
                "dt",
                "dt must be >= 0 (0 selects a stable step)".into(),
            ));
        }
        if !t_final.is_nan() && t_final < 0.0 {
            diags.push(Diagnostic::keyed(
                section.line("t_final"),
                "t_final",
                "t_final must be >= 0 (0 runs to target_interior)".into(),
            ));
        }
        if !(target_interior > 0.0 && target_interior < 1.0) {
            diags.push(Diagnostic::keyed(
                section.line("target_interior"),
                "target_interior",
                "must be in (0, 1)".into(),
            ));
        }
        if max_steps == 0 {
            diags.push(Diagnostic::keyed(
                section.line("max_steps"),
                "max_steps",
                "must be at least 1".into(),
            ));
        }
        if let Some(ref state) = p0 {
            if let Err(e) = FpGrid::delta_at(state.probs()[0], resolution.max(1)) {
                diags.push(Diagnostic::keyed(
                    section.line("resolution"),
                    "resolution",
                    format!("FpGrid invariant: {e}"),
                ));
            }
        }
        match (p0, spec, diags.is_empty()) {
            (Some(p0), Some(spec), true) => Ok(Self {
                p0,
                spec,
                resolution,
                dt,
                t_final,
                target_interior,
                max_steps,
            }),
            _ => Err(diags),
        }
    }
}

/// Typed `[epr]` section.
#[derive(Clone, Debug)]
pub struct EprSectionConfig {
    pub epr: EprConfig,
    pub independence_samples: u64,
}

impl EprSectionConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let amp_hv = C64::new(
            section.f64("amp_hv_re", &mut diags),
            section.f64("amp_hv_im", &mut diags),
        );
        let amp_vh = C64::new(
            section.f64("amp_vh_re", &mut diags),
            section.f64("amp_vh_im", &mut diags),
        );
        let epr = EprConfig {
            amplitudes: [amp_hv, amp_vh],
            intensity_a: section.f64("lambda_a", &mut diags),
            intensity_b: section.f64("lambda_b", &mut diags),
            dt: section.f64("dt", &mut diags),
            max_steps: section.u64("max_steps", &mut diags),
            num_runs: section.u64("runs", &mut diags),
            seed: section.u64("seed", &mut diags),
        };
        let independence_samples = section.u64("independence_samples", &mut diags);
        if diags.is_empty() {
            if let Err(e) = epr.validate() {
                let key = match &e {
                    crate::epr::EprError::AmplitudesNotNormalized(_) => "amp_hv_re",
                    crate::epr::EprError::BadIntensities(..) => "lambda_a",
                    crate::epr::EprError::BadTimeStep(_) => "dt",
                    _ => "runs",
                };
                diags.push(Diagnostic::keyed(
                    section.line(key),
                    key,
                    format!("EprConfig invariant: {e}"),
                ));
            }
        }
        if diags.is_empty() {
            Ok(Self {
                epr,
                independence_samples,
            })
        } else {
            Err(diags)
        }
    }
}

/// Typed `[crosscheck]` section.
#[derive(Clone, Debug)]
pub struct CrosscheckConfig {
    pub p0: ChannelState,
    pub spec: DiffusionSpec,
    pub max_steps: u64,
    pub runs: u64,
    pub seed: u64,
    pub resolution: usize,
    pub target_interior: f64,
}

impl CrosscheckConfig {
    pub fn from_section(section: &ResolvedSection) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let p0 = channel_state(section, "p0", Some(2), &mut diags);
        let spec = diffusion_spec(section, "lambda", "num_sources", "dt", &mut diags);
        let max_steps = section.u64("max_steps", &mut diags);
        let runs = section.u64("runs", &mut diags);
        let seed = section.u64("seed", &mut diags);
        let resolution = section.u64("resolution", &mut diags) as usize;
        let target_interior = section.f64("target_interior", &mut diags);
        if runs < 100 {
            diags.push(Diagnostic::keyed(
                section.line("runs"),
                "runs",
                "ensemble statistics need at least 100 runs".into(),
            ));
        }
        if max_steps == 0 {
            diags.push(Diagnostic::keyed(
                section.line("max_steps"),
                "max_steps",
                "must be at least 1".into(),
            ));
        }
        if !(target_interior > 0.0 && target_interior < 1.0) {
            diags.push(Diagnostic::keyed(
                section.line("target_interior"),
                "target_interior",
                "must be in (0, 1)".into(),
            ));
        }
        if let Some(ref state) = p0 {
            // the doubled resolution must also be a valid grid
            for r in [resolution, resolution * 2] {
                if let Err(e) = FpGrid::delta_at(state.probs()[0], r.max(1)) {
                    diags.push(Diagnostic::keyed(
                        section.line("resolution"),
                        "resolution",
                        format!("FpGrid invariant at resolution {r}: {e}"),
                    ));
                }
            }
        }
        match (p0, spec, diags.is_empty()) {
            (Some(p0), Some(spec), true) => Ok(Self {
                p0,
                spec,
                max_steps,
                runs,
                seed,
                resolution,
                target_interior,
            }),
            _ => Err(diags),
        }
    }
}

/// Typed-validation pass for one resolved section; empty on success.
pub(crate) fn validate_section(section: &ResolvedSection) -> Vec<Diagnostic> {
    let result = match section.scenario.as_str() {
        "blocks" => BlocksConfig::from_section(section).map(|_| ()).err(),
        "proximity" => ProximitySweepConfig::from_section(section).map(|_| ()).err(),
        "pearle" => PearleConfig::from_section(section).map(|_| ()).err(),
        "fokker-planck" => FokkerPlanckConfig::from_section(section).map(|_| ()).err(),
        "epr" => EprSectionConfig::from_section(section).map(|_| ()).err(),
        "crosscheck" => CrosscheckConfig::from_section(section).map(|_| ()).err(),
        _ => None,
    };
    result.unwrap_or_default()
}

/// Validate every section of a config text against the scenario schemas and
/// the model invariants. An empty list means the config is valid.
pub fn validate_text(text: &str) -> Result<Vec<Diagnostic>, ConfigError> {
    let raw = RawConfig::parse(text)?;
    let mut diags = Vec::new();
    for name in raw.section_names() {
        if !SCENARIO_NAMES.contains(&name) {
            diags.push(Diagnostic {
                line: None,
                key: None,
                message: format!("unknown section [{name}]"),
            });
        }
    }
    for scenario in SCENARIO_NAMES {
        match ResolvedSection::resolve(scenario, &raw, &[]) {
            Ok(section) => diags.append(&mut validate_section(&section)),
            Err(mut resolve_diags) => diags.append(&mut resolve_diags),
        }
    }
    Ok(diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let diags = validate_text(DEFAULT_CONFIG).unwrap();
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn empty_config_is_valid_via_defaults() {
        let diags = validate_text("").unwrap();
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = RawConfig::parse("[pearle]\nwhat is this\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 2),
        }
        let err = RawConfig::parse("key = 1\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 1),
        }
        let err = RawConfig::parse("[unterminated\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 1),
        }
    }

    #[test]
    fn unnormalized_probs_name_the_invariant() {
        let diags = validate_text("[pearle]\np0 = 0.4,0.5\n").unwrap();
        assert_eq!(diags.len(), 1);
        let d = &diags[0];
        assert_eq!(d.key.as_deref(), Some("p0"));
        assert_eq!(d.line, Some(2));
        assert!(d.message.contains("ChannelState invariant"), "{d}");
        assert!(d.message.contains("sum"), "{d}");
    }

    #[test]
    fn negative_lambda_names_diffusion_intensity() {
        let diags = validate_text("[pearle]\nlambda = -1\n").unwrap();
        assert_eq!(diags.len(), 1);
        let d = &diags[0];
        assert_eq!(d.key.as_deref(), Some("lambda"));
        assert!(d.message.contains("DiffusionSpec"), "{d}");
        assert!(d.message.contains("intensity"), "{d}");
    }

    #[test]
    fn unknown_keys_are_reported() {
        let diags = validate_text("[pearle]\nbogus = 1\n").unwrap();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].key.as_deref(), Some("bogus"));
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let raw = RawConfig::parse("# header\n\n[pearle]  \n  seed =  9  # trailing\n").unwrap();
        let section = ResolvedSection::resolve("pearle", &raw, &[]).unwrap();
        assert_eq!(section.get("seed"), "9");
        // untouched keys come from defaults
        assert_eq!(section.get("lambda"), "1.0");
    }

    #[test]
    fn overrides_win_over_file() {
        let raw = RawConfig::parse("[pearle]\nseed = 9\nruns = 500\n").unwrap();
        let overrides = vec![("seed".to_string(), "77".to_string())];
        let section = ResolvedSection::resolve("pearle", &raw, &overrides).unwrap();
        assert_eq!(section.get("seed"), "77");
        assert_eq!(section.get("runs"), "500");

        let bad = vec![("nope".to_string(), "1".to_string())];
        assert!(ResolvedSection::resolve("pearle", &raw, &bad).is_err());
    }

    #[test]
    fn manifest_lines_cover_every_key() {
        let raw = RawConfig::parse("").unwrap();
        let section = ResolvedSection::resolve("pearle", &raw, &[]).unwrap();
        let lines = section.manifest_lines();
        for key in known_keys("pearle") {
            assert!(
                lines.iter().any(|l| l.starts_with(&format!("{key} = "))),
                "missing {key}"
            );
        }
    }

    #[test]
    fn typed_sections_build_from_defaults() {
        let raw = RawConfig::parse("").unwrap();
        let pearle =
            PearleConfig::from_section(&ResolvedSection::resolve("pearle", &raw, &[]).unwrap())
                .unwrap();
        assert_eq!(pearle.runs, 100_000);
        assert_eq!(pearle.mode, StepMode::Auto);

        let blocks =
            BlocksConfig::from_section(&ResolvedSection::resolve("blocks", &raw, &[]).unwrap())
                .unwrap();
        assert_eq!(blocks.d, 2);
        assert!(!blocks.proximity_scale);

        let fp = FokkerPlanckConfig::from_section(
            &ResolvedSection::resolve("fokker-planck", &raw, &[]).unwrap(),
        )
        .unwrap();
        assert_eq!(fp.resolution, 160);

        let epr = EprSectionConfig::from_section(
            &ResolvedSection::resolve("epr", &raw, &[]).unwrap(),
        )
        .unwrap();
        assert!((epr.epr.amplitudes[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let cc = CrosscheckConfig::from_section(
            &ResolvedSection::resolve("crosscheck", &raw, &[]).unwrap(),
        )
        .unwrap();
        assert_eq!(cc.resolution, 160);

        let prox = ProximitySweepConfig::from_section(
            &ResolvedSection::resolve("proximity", &raw, &[]).unwrap(),
        )
        .unwrap();
        assert_eq!(prox.params.n_prime(), 100);
    }
}
