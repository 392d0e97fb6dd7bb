//! Run configuration: `[chain]`, `[bath]` and `[run]` sections in TOML, or the
//! same structure as JSON when the file name ends in `.json`.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use spinbath::bath::{BathConfig, SiteBath};
use spinbath::dynamics::{Engine, PopulationState, DEFAULT_KERNEL_TOL};
use spinbath::model::{ChainSpec, Coupling, DEFAULT_DEGENERACY_TOL};
use spinbath::{grid, GapPolicy, PauliAxis, Spacing};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    chain: RawChain,
    bath: RawBath,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    fields: Vec<f64>,
    #[serde(default)]
    couplings: Vec<RawCoupling>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    sites: [usize; 2],
    delta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    temperature: f64,
    kappa: Vec<f64>,
    /// One axis for all sites, or one per site. Defaults to x.
    #[serde(default)]
    axis: Option<AxisSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AxisSpec {
    One(String),
    PerSite(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub spacing: SpacingName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpacingName {
    Linear,
    Log,
}

fn linear() -> SpacingName {
    SpacingName::Linear
}

impl GridSpec {
    pub fn values(&self) -> spinbath::Result<Vec<f64>> {
        let spacing = match self.spacing {
            SpacingName::Linear => Spacing::Linear,
            SpacingName::Log => Spacing::Log,
        };
        grid(self.start, self.stop, self.points, spacing)
    }

    fn describe(&self) -> String {
        let s = match self.spacing {
            SpacingName::Linear => "linear",
            SpacingName::Log => "log",
        };
        format!("{}..{} ({} {s} points)", self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Pauli,
    Lindblad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Strict,
    Group,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    command: Option<String>,
    initial_level: Option<usize>,
    initial_populations: Option<Vec<f64>>,
    engine: EngineName,
    times: GridSpec,
    eval_time: f64,
    temperature_grid: GridSpec,
    kappa_grid: GridSpec,
    kappa_site: usize,
    fig2_temperatures: Vec<f64>,
    fig2_kappas: Vec<f64>,
    degeneracy_tol: f64,
    kernel_tol: f64,
    gap_policy: PolicyName,
    block_threshold: f64,
    seed: Option<u64>,
    zeros_max_n: usize,
    zeros_draws: usize,
}

impl Default for RawRun {
    fn default() -> Self {
        Self {
            command: None,
            initial_level: None,
            initial_populations: None,
            engine: EngineName::Pauli,
            times: GridSpec { start: 0.0, stop: 10.0, points: 101, spacing: SpacingName::Linear },
            eval_time: 10.0,
            temperature_grid: GridSpec { start: 0.1, stop: 10.0, points: 25, spacing: SpacingName::Log },
            kappa_grid: GridSpec { start: 1e-3, stop: 1.0, points: 25, spacing: SpacingName::Log },
            kappa_site: 1,
            fig2_temperatures: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            fig2_kappas: vec![1e-3, 1e-2, 1e-1, 1.0],
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            kernel_tol: DEFAULT_KERNEL_TOL,
            gap_policy: PolicyName::Strict,
            block_threshold: 0.0,
            seed: None,
            zeros_max_n: 4,
            zeros_draws: 100,
        }
    }
}

/// Validated run settings.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub command: Option<String>,
    pub initial: PopulationState<f64>,
    pub engine: Engine,
    pub times: Vec<f64>,
    pub times_spec: GridSpec,
    pub eval_time: f64,
    pub temperature_grid: GridSpec,
    pub kappa_grid: GridSpec,
    pub kappa_site: usize,
    pub fig2_temperatures: Vec<f64>,
    pub fig2_kappas: Vec<f64>,
    pub degeneracy_tol: f64,
    pub kernel_tol: f64,
    pub gap_policy: GapPolicy,
    pub block_threshold: f64,
    pub seed: Option<u64>,
    pub zeros_max_n: usize,
    pub zeros_draws: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub chain: ChainSpec<f64>,
    pub baths: BathConfig<f64>,
    pub run: RunSettings,
    /// Hex SHA-256 of the raw config bytes.
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text, Format::from_path(path))
}

pub fn parse_str(text: &str, format: Format) -> Result<RunConfig> {
    let raw: RawConfig = match format {
        Format::Toml => toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?,
        Format::Json => serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?,
    };
    build(raw, sha256_hex(text.as_bytes()))
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn build(raw: RawConfig, hash: String) -> Result<RunConfig> {
    let sites = raw.chain.fields.len();
    let couplings = raw.chain.couplings.iter().map(|c| Coupling::new(c.sites[0], c.sites[1], c.delta)).collect();
    let chain = ChainSpec::new(raw.chain.fields, couplings).map_err(|e| config_err(format!("[chain]: {e}")))?;

    if raw.bath.kappa.len() != sites {
        return Err(config_err(format!(
            "[bath] kappa: expected {sites} values (one per site), got {}",
            raw.bath.kappa.len()
        )));
    }
    if !(raw.bath.temperature >= 0.0 && raw.bath.temperature.is_finite()) {
        return Err(config_err(format!("[bath] temperature: must be finite and >= 0, got {}", raw.bath.temperature)));
    }
    for (n, k) in raw.bath.kappa.iter().enumerate() {
        if !(*k >= 0.0 && k.is_finite()) {
            return Err(config_err(format!("[bath] kappa[{}]: coupling must be finite and >= 0, got {k}", n + 1)));
        }
    }
    let axes: Vec<PauliAxis> = match &raw.bath.axis {
        None => vec![PauliAxis::X; sites],
        Some(AxisSpec::One(a)) => vec![parse_axis(a)?; sites],
        Some(AxisSpec::PerSite(v)) => {
            if v.len() != sites {
                return Err(config_err(format!("[bath] axis: expected {sites} entries, got {}", v.len())));
            }
            v.iter().map(|a| parse_axis(a)).collect::<Result<_>>()?
        }
    };
    let site_baths = axes.into_iter().zip(&raw.bath.kappa).map(|(axis, &kappa)| SiteBath { axis, kappa }).collect();
    let baths = BathConfig::new(raw.bath.temperature, site_baths).map_err(|e| config_err(format!("[bath]: {e}")))?;

    let run = build_run(raw.run, chain.dimension(), sites)?;
    Ok(RunConfig { chain, baths, run, hash })
}

fn parse_axis(a: &str) -> Result<PauliAxis> {
    a.parse().map_err(|e| config_err(format!("[bath] axis: {e}")))
}

fn build_run(r: RawRun, dimension: usize, sites: usize) -> Result<RunSettings> {
    let initial = match (r.initial_level, r.initial_populations) {
        (Some(_), Some(_)) => {
            return Err(config_err("[run]: give initial_level or initial_populations, not both"));
        }
        (None, Some(p)) => {
            if p.len() != dimension {
                return Err(config_err(format!(
                    "[run] initial_populations: expected {dimension} values, got {}",
                    p.len()
                )));
            }
            PopulationState::new(p).map_err(|e| config_err(format!("[run] initial_populations: {e}")))?
        }
        (level, None) => {
            let level = level.unwrap_or(1);
            if level == 0 || level > dimension {
                return Err(config_err(format!("[run] initial_level: {level} outside 1..={dimension}")));
            }
            PopulationState::basis(dimension, level - 1).map_err(|e| config_err(e.to_string()))?
        }
    };
    let times = r.times.values().map_err(|e| config_err(format!("[run] times: {e}")))?;
    for (name, g) in [("temperature_grid", &r.temperature_grid), ("kappa_grid", &r.kappa_grid)] {
        g.values().map_err(|e| config_err(format!("[run] {name}: {e}")))?;
    }
    if !(r.eval_time > 0.0 && r.eval_time.is_finite()) {
        return Err(config_err(format!("[run] eval_time: must be > 0, got {}", r.eval_time)));
    }
    if r.kappa_site == 0 || r.kappa_site > sites {
        return Err(config_err(format!("[run] kappa_site: {} outside 1..={sites}", r.kappa_site)));
    }
    for (name, v) in [("fig2_temperatures", &r.fig2_temperatures), ("fig2_kappas", &r.fig2_kappas)] {
        if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(config_err(format!("[run] {name}: needs finite values >= 0")));
        }
    }
    for (name, v) in [("degeneracy_tol", r.degeneracy_tol), ("kernel_tol", r.kernel_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_err(format!("[run] {name}: must be > 0, got {v}")));
        }
    }
    if !(r.block_threshold >= 0.0 && r.block_threshold.is_finite()) {
        return Err(config_err(format!("[run] block_threshold: must be >= 0, got {}", r.block_threshold)));
    }
    Ok(RunSettings {
        command: r.command,
        initial,
        engine: match r.engine {
            EngineName::Pauli => Engine::Pauli,
            EngineName::Lindblad => Engine::Lindblad,
        },
        times,
        times_spec: r.times,
        eval_time: r.eval_time,
        temperature_grid: r.temperature_grid,
        kappa_grid: r.kappa_grid,
        kappa_site: r.kappa_site,
        fig2_temperatures: r.fig2_temperatures,
        fig2_kappas: r.fig2_kappas,
        degeneracy_tol: r.degeneracy_tol,
        kernel_tol: r.kernel_tol,
        gap_policy: match r.gap_policy {
            PolicyName::Strict => GapPolicy::Strict,
            PolicyName::Group => GapPolicy::Group,
        },
        block_threshold: r.block_threshold,
        seed: r.seed,
        zeros_max_n: r.zeros_max_n,
        zeros_draws: r.zeros_draws,
    })
}

impl RunConfig {
    /// `#`-prefixed parameter echo used in every output header.
    pub fn echo(&self) -> Vec<String> {
        let fields: Vec<String> = self.chain.fields().iter().map(|h| crate::output::num(*h)).collect();
        let couplings: Vec<String> = self
            .chain
            .couplings()
            .iter()
            .map(|c| format!("({},{}):{}", c.a, c.b, crate::output::num(c.delta)))
            .collect();
        let kappas: Vec<String> = self.baths.kappas().iter().map(|k| crate::output::num(*k)).collect();
        let axes: Vec<String> = self.baths.sites().iter().map(|s| s.axis.to_string()).collect();
        vec![
            format!("fields = [{}]", fields.join(", ")),
            format!("couplings = [{}]", couplings.join(", ")),
            format!("temperature = {}", crate::output::num(self.baths.temperature())),
            format!("kappa = [{}]", kappas.join(", ")),
            format!("axis = [{}]", axes.join(", ")),
            format!("eval_time = {}", crate::output::num(self.run.eval_time)),
            format!("times = {}", self.run.times_spec.describe()),
        ]
    }

    pub fn temperature_grid(&self) -> Vec<f64> {
        self.run.temperature_grid.values().expect("validated at parse time")
    }

    pub fn kappa_grid(&self) -> Vec<f64> {
        self.run.kappa_grid.values().expect("validated at parse time")
    }

    pub fn describe_grid(g: &GridSpec) -> String {
        g.describe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED: &str = include_str!("../../../configs/ising2_paper.toml");

    #[test]
    fn shipped_config_is_the_reference_model() {
        let cfg = parse_str(SHIPPED, Format::Toml).unwrap();
        assert_eq!(cfg.chain.fields(), &[1.0, 0.5]);
        assert_eq!(cfg.chain.couplings().len(), 1);
        assert!((cfg.chain.couplings()[0].delta - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cfg.baths.kappas(), vec![1e-5, 1.0]);
        assert_eq!(cfg.baths.temperature(), 10.0);
        let t = cfg.temperature_grid();
        assert_eq!((t[0], t[24], t.len()), (0.1, 10.0, 25));
        assert_eq!(cfg.run.eval_time, 10.0);
        assert_eq!(cfg.run.initial.get(0), 1.0);
    }

    #[test]
    fn empty_file_is_a_schema_error() {
        let err = parse_str("", Format::Toml).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("chain"), "{err}");
    }

    #[test]
    fn negative_kappa_rejected() {
        let text = SHIPPED.replace("kappa = [1e-5, 1.0]", "kappa = [-1.0, 1.0]");
        assert_ne!(text, SHIPPED);
        let err = parse_str(&text, Format::Toml).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("kappa"), "{err}");
    }

    #[test]
    fn unknown_key_reports_location() {
        let text = SHIPPED.replace("[bath]\n", "[bath]\ncolour = \"red\"\n");
        let err = parse_str(&text, Format::Toml).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line"), "{err}");
    }

    #[test]
    fn wrong_type_names_key() {
        let text = SHIPPED.replace("temperature = 10.0", "temperature = \"hot\"");
        let err = parse_str(&text, Format::Toml).unwrap_err().to_string();
        assert!(err.contains("temperature") && err.contains("line"), "{err}");
    }

    #[test]
    fn json_encoding() {
        let json = r#"{"chain": {"fields": [1.0, 0.5], "couplings": [{"sites": [1, 2], "delta": 0.25}]},
                       "bath": {"temperature": 1.0, "kappa": [0.0, 1.0], "axis": "x"},
                       "run": {"initial_level": 3}}"#;
        let cfg = parse_str(json, Format::Json).unwrap();
        assert_eq!(cfg.run.initial.get(2), 1.0);
        assert_eq!(cfg.hash.len(), 64);
        assert!(parse_str(r#"{"chain": {"fields": [1.0]}, "bath": {"temperature": 1.0, "kappa": [1.0]}, "extra": 1}"#, Format::Json).is_err());
    }

    #[test]
    fn run_section_checks() {
        let base = "[chain]\nfields = [1.0, 0.5]\n[bath]\ntemperature = 1.0\nkappa = [1.0, 1.0]\n";
        assert!(parse_str(&format!("{base}[run]\ninitial_level = 5\n"), Format::Toml).is_err());
        assert!(parse_str(&format!("{base}[run]\nkappa_site = 3\n"), Format::Toml).is_err());
        assert!(parse_str(&format!("{base}[run]\neval_time = 0.0\n"), Format::Toml).is_err());
        assert!(parse_str(&format!("{base}[run]\ninitial_populations = [0.5, 0.5, 0.0]\n"), Format::Toml).is_err());
        let cfg = parse_str(&format!("{base}[run]\ninitial_populations = [0.5, 0.5, 0.0, 0.0]\n"), Format::Toml).unwrap();
        assert_eq!(cfg.run.initial.get(1), 0.5);
        assert!(parse_str(&format!("{base}[bath]\n"), Format::Toml).is_err());
    }
}
