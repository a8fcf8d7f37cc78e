//! Experiment configuration: a TOML file with a `[common]` table and one
//! table per command. Every key is optional.

use std::path::{Path, PathBuf};

use quench_core::evolution::{RadialStencil, SweepTemplate, DEFAULT_DT, DEFAULT_MAX_STEPS, DEFAULT_N, DEFAULT_STOP_TOL};
use quench_core::Domain;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainName {
    Slab,
    Disk,
}

impl DomainName {
    pub fn domain(self) -> Domain {
        match self {
            DomainName::Slab => Domain::slab(),
            DomainName::Disk => Domain::unit_disk(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    pub domain: DomainName,
    /// Number of mesh intervals.
    pub n: usize,
    pub dt: f64,
    pub stop_tol: f64,
    pub max_steps: u64,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub radial_stencil: RadialStencil,
}

impl Default for Common {
    fn default() -> Self {
        Self {
            domain: DomainName::Slab,
            n: DEFAULT_N,
            dt: DEFAULT_DT,
            stop_tol: DEFAULT_STOP_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            lambdas: Vec::new(),
            deltas: Vec::new(),
            snapshot_times: Vec::new(),
            out_dir: PathBuf::from("out"),
            radial_stencil: RadialStencil::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsOptions {
    pub domains: Vec<DomainName>,
    /// Absolute deviation from a reference entry that raises a flag.
    pub flag_tol: f64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self { domains: vec![DomainName::Slab, DomainName::Disk], flag_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullinOptions {
    /// Defaults to `common.domain`.
    pub domains: Option<Vec<DomainName>>,
    pub alpha_grid: usize,
    pub branch_csv: bool,
}

impl Default for PullinOptions {
    fn default() -> Self {
        Self { domains: None, alpha_grid: 64, branch_csv: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    pub lambda: f64,
    pub delta: f64,
    /// Record a trace line every `trace_stride` steps; 0 disables the trace.
    pub trace_stride: u64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { lambda: 3.0, delta: 0.7, trace_stride: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Defaults to `common.domain`.
    pub domains: Option<Vec<DomainName>>,
    /// Explicit `[δ, λ]` cells; when empty the sweep covers
    /// `common.deltas × common.lambdas`.
    pub cells: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitRateOptions {
    pub lambda: f64,
    pub delta: f64,
    /// Output directory of an earlier `evolve` run with a trace. When absent
    /// the run is computed inline.
    pub source: Option<PathBuf>,
    /// Fit window in `T − t`; defaults to `[10 dt, T/10]`.
    pub gap_lo: Option<f64>,
    pub gap_hi: Option<f64>,
}

impl Default for FitRateOptions {
    fn default() -> Self {
        Self { lambda: 10.0, delta: 0.0, source: None, gap_lo: None, gap_hi: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareOptions {
    pub lambda: f64,
    pub delta: f64,
    pub source: Option<PathBuf>,
    /// Absolute comparison time; overrides `lead`.
    pub t_eval: Option<f64>,
    /// Comparison time as a lead `T − t` before the computed quench.
    pub lead: f64,
    pub r_window: f64,
    /// Compare the analytic local form against itself.
    pub self_test: bool,
    pub reduced_correction: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            lambda: 3.0,
            delta: 0.7,
            source: None,
            t_eval: None,
            lead: 2.58e-4,
            r_window: 0.1,
            self_test: false,
            reduced_correction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub common: Common,
    pub bounds: BoundsOptions,
    pub pullin: PullinOptions,
    pub evolve: EvolveOptions,
    pub sweep_quench: SweepOptions,
    pub fit_rate: FitRateOptions,
    pub compare_local: CompareOptions,
}

impl ExperimentConfig {
    /// Parses TOML text. `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            match line {
                Some(l) => CliError::Config(format!("{origin}:{l}: {}", e.message())),
                None => CliError::Config(format!("{origin}: {}", e.message())),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.common;
        let bad = |msg: String| Err(CliError::Config(msg));
        if c.n < 4 {
            return bad(format!("common.n = {} is below 4", c.n));
        }
        if !(c.dt > 0.0 && c.dt.is_finite()) {
            return bad(format!("common.dt = {} must be positive", c.dt));
        }
        if !(c.stop_tol > 0.0 && c.stop_tol <= 1e-6) {
            return bad(format!("common.stop_tol = {} outside (0, 1e-6]", c.stop_tol));
        }
        if c.lambdas.iter().chain(&c.deltas).any(|v| !v.is_finite()) {
            return bad("common.lambdas and common.deltas must be finite".into());
        }
        if c.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("common.snapshot_times must be finite and >= 0".into());
        }
        if self.pullin.alpha_grid < 32 {
            return bad(format!("pullin.alpha_grid = {} is below 32", self.pullin.alpha_grid));
        }
        if !(self.compare_local.r_window > 0.0) {
            return bad("compare_local.r_window must be positive".into());
        }
        if !(self.compare_local.lead > 0.0) {
            return bad("compare_local.lead must be positive".into());
        }
        Ok(())
    }

    pub fn sweep_template(&self) -> SweepTemplate {
        let c = &self.common;
        SweepTemplate {
            n_interior: c.n,
            dt: c.dt,
            stop_tol: c.stop_tol,
            max_steps: c.max_steps,
            radial_stencil: c.radial_stencil,
        }
    }
}
