//! Experiment harness: TOML configs with a strict schema, named experiments
//! reproducing the checkable statements, deterministic CSV/JSON outputs, and
//! plot-script generation.

pub mod experiments;

use crate::environment::ConductanceLaw;
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, DEFAULT_VERTEX_CAP};
use crate::walk::WalkKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    QipMarginal,
    MixingTrend,
    LocalClt,
    GeometryAudit,
    HolesTail,
    DirichletLln,
    ExitEnvelope,
    BlockEvents,
    WindowAgreement,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::QipMarginal,
        ExperimentName::MixingTrend,
        ExperimentName::LocalClt,
        ExperimentName::GeometryAudit,
        ExperimentName::HolesTail,
        ExperimentName::DirichletLln,
        ExperimentName::ExitEnvelope,
        ExperimentName::BlockEvents,
        ExperimentName::WindowAgreement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::QipMarginal => "qip-marginal",
            ExperimentName::MixingTrend => "mixing-trend",
            ExperimentName::LocalClt => "local-clt",
            ExperimentName::GeometryAudit => "geometry-audit",
            ExperimentName::HolesTail => "holes-tail",
            ExperimentName::DirichletLln => "dirichlet-lln",
            ExperimentName::ExitEnvelope => "exit-envelope",
            ExperimentName::BlockEvents => "block-events",
            ExperimentName::WindowAgreement => "window-agreement",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .iter()
            .find(|e| e.as_str() == s)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown experiment `{s}`; expected one of {}",
                    ExperimentName::ALL.map(|e| e.as_str()).join(", ")
                ))
            })
    }
}

/// Inclusive seed range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn count(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.start..=self.end
    }
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("seed range must look like `a..b`, got `{s}`")))?;
        let start: u64 = a
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad seed `{a}`")))?;
        let end: u64 = b
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad seed `{b}`")))?;
        if end < start {
            return Err(Error::Config(format!("empty seed range `{s}`")));
        }
        Ok(SeedRange { start, end })
    }
}

/// One experiment's full configuration. Unknown keys are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub domain: DomainSpec,
    pub law: ConductanceLaw,
    pub seeds: SeedRange,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub scales: Vec<u32>,
    #[serde(default = "default_walk")]
    pub walk: WalkKind,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Conductance truncation level `K`; defaults from the law.
    #[serde(default)]
    pub truncation: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Paths per scale for Monte Carlo experiments.
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub block_scales: Option<Vec<u32>>,
    #[serde(default)]
    pub radii: Option<Vec<u32>>,
    /// Diffusion time scale for continuum oracles; defaults to `2w` for
    /// constant laws.
    #[serde(default)]
    pub c_hat: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub vertex_cap: Option<u64>,
}

fn default_walk() -> WalkKind {
    WalkKind::Vsrw
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validate every field before any computation runs.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.law.validate()?;
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Config(format!("eps must lie in (0,1), got {eps}")));
            }
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(Error::Config("horizon must be positive".into()));
            }
        }
        if let Some(k) = self.truncation {
            if !(k > 0.0) {
                return Err(Error::Config("truncation must be positive".into()));
            }
        }
        if let Some(p) = self.paths {
            if p == 0 {
                return Err(Error::Config("paths must be >= 1".into()));
            }
        }
        if let Some(c) = self.c_hat {
            if !(c > 0.0) {
                return Err(Error::Config("c-hat must be positive".into()));
            }
        }
        if let Some(grid) = &self.t_grid {
            let mut prev = 0.0;
            for &t in grid {
                if !(t > prev) {
                    return Err(Error::Config(
                        "t-grid must be strictly increasing and positive".into(),
                    ));
                }
                prev = t;
            }
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("scales must be strictly increasing".into()));
        }
        match self.experiment {
            ExperimentName::QipMarginal => {
                if !matches!(self.domain, DomainSpec::Orthant { .. }) {
                    return Err(Error::Config("qip-marginal needs an orthant domain".into()));
                }
                if self.scales.is_empty() {
                    return Err(Error::Config("qip-marginal needs scales".into()));
                }
            }
            ExperimentName::MixingTrend | ExperimentName::LocalClt | ExperimentName::DirichletLln => {
                if !matches!(self.domain, DomainSpec::Box { .. }) {
                    return Err(Error::Config(format!(
                        "{} needs a box domain",
                        self.experiment
                    )));
                }
                if self.scales.is_empty() {
                    return Err(Error::Config(format!("{} needs scales", self.experiment)));
                }
                if self.experiment != ExperimentName::DirichletLln && self.walk != WalkKind::Vsrw {
                    return Err(Error::Config(format!(
                        "{} is defined for the variable-speed walk",
                        self.experiment
                    )));
                }
                if self.experiment != ExperimentName::DirichletLln {
                    self.effective_c_hat()?;
                }
            }
            ExperimentName::ExitEnvelope => {
                if !matches!(self.domain, DomainSpec::FullLattice { .. }) {
                    return Err(Error::Config("exit-envelope runs on the full lattice".into()));
                }
            }
            ExperimentName::WindowAgreement
            | ExperimentName::BlockEvents
            | ExperimentName::GeometryAudit
            | ExperimentName::HolesTail => {
                if matches!(self.domain, DomainSpec::Box { .. }) {
                    return Err(Error::Config(format!(
                        "{} needs an unbounded domain",
                        self.experiment
                    )));
                }
            }
        }
        Ok(())
    }

    /// Continuum time scale: explicit `c-hat`, or `2w` for constant laws.
    pub fn effective_c_hat(&self) -> Result<f64> {
        if let Some(c) = self.c_hat {
            return Ok(c);
        }
        match self.law {
            ConductanceLaw::Constant { w } if w > 0.0 => Ok(2.0 * w),
            _ => Err(Error::Config(
                "c-hat is required unless the law is a positive constant".into(),
            )),
        }
    }

    pub fn vertex_cap(&self) -> u64 {
        if let Ok(s) = std::env::var("PERCWALK_CAP_VERTICES") {
            if let Ok(v) = s.parse::<u64>() {
                return v;
            }
        }
        self.vertex_cap.unwrap_or(DEFAULT_VERTEX_CAP)
    }

    /// FNV-style hash of the canonical serialization, hex-encoded.
    pub fn hash(&self) -> String {
        let text = self.to_toml();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Pass/fail record for one acceptance criterion addressed by a run.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub pass: bool,
    pub observed: serde_json::Value,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(id: &str, pass: bool, observed: serde_json::Value, detail: String) -> Self {
        CriterionResult { id: id.to_string(), pass, observed, detail }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
    pub out_dir: PathBuf,
    pub config_hash: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    config_hash: &'a str,
    passed: bool,
    criteria: &'a [CriterionResult],
}

/// Deterministic text artifacts produced by one experiment.
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts { files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }
}

/// Run one experiment: validate, compute, and write `summary.json`, raw
/// CSVs, a gnuplot script, and a separate timestamped `run_meta.json`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let out_dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("percwalk-out").join(cfg.experiment.as_str()));
    std::fs::create_dir_all(&out_dir)?;

    let workers = cfg.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut artifacts = Artifacts::new();
    let criteria = pool.install(|| -> Result<Vec<CriterionResult>> {
        match cfg.experiment {
            ExperimentName::QipMarginal => experiments::qip_marginal(cfg, &mut artifacts),
            ExperimentName::MixingTrend => experiments::mixing_trend(cfg, &mut artifacts),
            ExperimentName::LocalClt => experiments::local_clt(cfg, &mut artifacts),
            ExperimentName::GeometryAudit => experiments::geometry_audit(cfg, &mut artifacts),
            ExperimentName::HolesTail => experiments::holes_tail(cfg, &mut artifacts),
            ExperimentName::DirichletLln => experiments::dirichlet_lln(cfg, &mut artifacts),
            ExperimentName::ExitEnvelope => experiments::exit_envelope(cfg, &mut artifacts),
            ExperimentName::BlockEvents => experiments::block_events(cfg, &mut artifacts),
            ExperimentName::WindowAgreement => experiments::window_agreement(cfg, &mut artifacts),
        }
    })?;

    let config_hash = cfg.hash();
    let passed = criteria.iter().all(|c| c.pass);
    for (name, body) in &artifacts.files {
        std::fs::write(out_dir.join(name), body)?;
    }
    let summary = Summary {
        experiment: cfg.experiment.as_str(),
        config_hash: &config_hash,
        passed,
        criteria: &criteria,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    let meta = serde_json::json!({
        "finished_unix_ms": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0),
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "workers": workers,
    });
    std::fs::write(
        out_dir.join("run_meta.json"),
        serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
    )?;
    Ok(RunOutcome { passed, criteria, out_dir, config_hash })
}

/// Load a config file and reconcile it with the CLI-selected experiment and
/// overrides.
pub fn load_config(
    path: &Path,
    experiment: ExperimentName,
    seeds: Option<SeedRange>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if cfg.experiment != experiment {
        return Err(Error::Config(format!(
            "config declares experiment `{}` but `{}` was requested",
            cfg.experiment, experiment
        )));
    }
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    if let Some(o) = out {
        cfg.out_dir = Some(o);
    }
    if let Some(w) = workers {
        cfg.workers = Some(w);
    }
    cfg.validate()?;
    Ok(cfg)
}
