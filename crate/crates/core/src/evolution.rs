//! Explicit finite-difference time stepping of the cubic-transformed problem
//!
//! ```text
//! ζ_t = Δζ − (2/3)|∇ζ|²/ζ − (δλ^{2/3}/3^{4/3}) |∇ζ|²/ζ^{4/3} − 1,   ζ = 1/(3λ) on ∂Ω and at t = 0,
//! ```
//!
//! forward Euler in time, centered second order in space. A run stops when
//! the nodal minimum of `ζ` drops below `stop_tol` (quenching) or when no
//! node moves by more than `stop_tol` in one step (steady state).

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_grid, Domain, DomainKind, Field, Grid, Params};
use crate::transforms::u_of_cubic_unchecked;

pub const DEFAULT_STOP_TOL: f64 = 1e-10;
pub const DEFAULT_DT: f64 = 6e-6;
pub const DEFAULT_N: usize = 200;
pub const DEFAULT_MAX_STEPS: u64 = 200_000_000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: Params,
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub stop_tol: f64,
    pub max_steps: u64,
    /// Sorted output times; each is served by the last step not after it.
    pub snapshot_times: Vec<f64>,
    /// Record a [`TracePoint`] every `trace_stride` steps (0 disables).
    pub trace_stride: u64,
    pub radial_stencil: RadialStencil,
}

/// Radius used in the `(n−1)/r` first-derivative term of the radial scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialStencil {
    /// `r_j = j·h` with `j` counted from 1 at the origin, i.e. one mesh
    /// width beyond the node. This is the layout the published disk quench
    /// times were computed with; it converges only at first order.
    #[default]
    ShiftedIndex,
    /// `r_j` equal to the node coordinate; second-order consistent.
    NodeRadius,
}

impl RadialStencil {
    fn offset(&self) -> f64 {
        match self {
            RadialStencil::ShiftedIndex => 1.0,
            RadialStencil::NodeRadius => 0.0,
        }
    }
}

impl RunConfig {
    pub fn new(params: Params, grid: Arc<Grid>, dt: f64) -> Result<Self> {
        let cfg = Self {
            params,
            grid,
            dt,
            stop_tol: DEFAULT_STOP_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            snapshot_times: Vec::new(),
            trace_stride: 0,
            radial_stencil: RadialStencil::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The experiment defaults: `N = 200`, `dt = 6e-6`.
    pub fn standard(params: Params, domain: Domain) -> Result<Self> {
        Self::new(params, Arc::new(build_grid(domain, DEFAULT_N)?), DEFAULT_DT)
    }

    pub fn with_snapshots(mut self, mut times: Vec<f64>) -> Self {
        times.sort_by(|a, b| a.total_cmp(b));
        self.snapshot_times = times;
        self
    }

    pub fn with_trace(mut self, stride: u64) -> Self {
        self.trace_stride = stride;
        self
    }

    pub fn with_radial_stencil(mut self, stencil: RadialStencil) -> Self {
        self.radial_stencil = stencil;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Largest stable step: `h²/4`, tightened to `h²/(2n)` at the origin of
    /// higher-dimensional balls.
    pub fn stability_limit(&self) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        let n = self.grid.domain.dim as f64;
        (h2 / 4.0).min(h2 / (2.0 * n))
    }

    pub fn validate(&self) -> Result<()> {
        let limit = self.stability_limit();
        if !(self.dt > 0.0 && self.dt < limit) {
            return Err(Error::Unstable { dt: self.dt, limit });
        }
        if !(self.stop_tol > 0.0 && self.stop_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!("stop_tol = {} outside (0, 1e-6]", self.stop_tol)));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidParameter("snapshot times must be >= 0".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("snapshot times must be sorted".into()));
        }
        Ok(())
    }

    /// Fringing coefficient `δλ^{2/3}/3^{4/3}` of the `|∇ζ|²/ζ^{4/3}` term.
    fn fringe_coefficient(&self) -> f64 {
        self.params.delta * self.params.lambda.powf(2.0 / 3.0) / 3f64.powf(4.0 / 3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    Quenched,
    Steady,
    BudgetExceeded,
}

impl OutcomeKind {
    pub fn label(&self) -> &'static str {
        match self {
            OutcomeKind::Quenched => "quenched",
            OutcomeKind::Steady => "steady",
            OutcomeKind::BudgetExceeded => "budget_exceeded",
        }
    }
}

/// Per-step diagnostics recorded when tracing is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time: f64,
    pub min_zeta: f64,
    pub argmin: usize,
    /// `max_x u = 1 − (3λ min ζ)^{1/3}`.
    pub max_u: f64,
    /// Largest centered-difference `|∂u/∂x|` over interior nodes.
    pub max_grad_u: f64,
}

#[derive(Debug, Clone)]
pub struct QuenchOutcome {
    pub kind: OutcomeKind,
    /// Stop time `m·dt` (quenched or steady).
    pub t_ex: Option<f64>,
    /// Quench time with the threshold crossing linearly interpolated
    /// between the last two steps.
    pub t_ex_interp: Option<f64>,
    pub steps: u64,
    pub quench_index: Option<usize>,
    pub quench_node: Option<f64>,
    /// Largest nodal change over the last step.
    pub last_change: f64,
    pub final_field: Field,
    pub snapshots: Vec<Field>,
    pub trace: Vec<TracePoint>,
}

impl QuenchOutcome {
    pub fn is_quenched(&self) -> bool {
        self.kind == OutcomeKind::Quenched
    }
}

/// Writes one forward-Euler update of `zeta` into `out`.
fn advance(zeta: &[f64], out: &mut [f64], cfg: &RunConfig, fringe: f64) -> Result<()> {
    let grid = &*cfg.grid;
    let h = grid.h;
    let inv_h2 = 1.0 / (h * h);
    let dt = cfg.dt;
    let boundary = cfg.params.zeta_boundary();
    let floor = cfg.stop_tol * cfg.stop_tol;
    let last = zeta.len() - 1;
    let radial = grid.domain.kind == DomainKind::RadialDisk;
    let n = grid.domain.dim as f64;
    let offset = cfg.radial_stencil.offset() * h;

    for j in 1..last {
        let z = zeta[j];
        if !(z > 0.0) {
            return Err(Error::NonPositive { node: j, value: z });
        }
        let (zl, zr) = (zeta[j - 1], zeta[j + 1]);
        // (zr + zl) is symmetric under reflection, so mirrored data stay mirrored bit for bit
        let second = ((zr + zl) - 2.0 * z) * inv_h2;
        let diff = zr - zl;
        let grad2 = diff * diff * inv_h2;
        let zf = z.max(floor);
        let mut rhs = second - grad2 / (6.0 * zf) - fringe * grad2 / (4.0 * zf * zf.cbrt()) - 1.0;
        if radial {
            rhs += (n - 1.0) * diff / (2.0 * h * (grid.nodes[j] + offset));
        }
        out[j] = z + dt * rhs;
    }
    if radial {
        let z0 = zeta[0];
        if !(z0 > 0.0) {
            return Err(Error::NonPositive { node: 0, value: z0 });
        }
        // Δζ(0) = 2n (ζ(h) − ζ(0))/h² by symmetry; gradient terms vanish there
        out[0] = z0 + 2.0 * n * dt * inv_h2 * (zeta[1] - z0) - dt;
    } else {
        out[0] = boundary;
    }
    out[last] = boundary;
    Ok(())
}

fn check_grid_kind(field: &Field, cfg: &RunConfig, radial: bool) -> Result<()> {
    if field.values.len() != cfg.grid.len() {
        return Err(Error::InvalidParameter("field and grid sizes differ".into()));
    }
    if cfg.grid.is_radial() != radial {
        return Err(Error::UnsupportedDomain(format!(
            "{} stepper called on a {} grid",
            if radial { "disk" } else { "slab" },
            cfg.grid.domain.label()
        )));
    }
    Ok(())
}

/// One explicit step of the slab scheme.
pub fn step_slab(field: &Field, cfg: &RunConfig) -> Result<Field> {
    check_grid_kind(field, cfg, false)?;
    let mut out = vec![0.0; field.values.len()];
    advance(&field.values, &mut out, cfg, cfg.fringe_coefficient())?;
    Field::new(field.grid.clone(), out, field.time + cfg.dt)
}

/// One explicit step of the radial scheme, including the origin update.
pub fn step_disk(field: &Field, cfg: &RunConfig) -> Result<Field> {
    check_grid_kind(field, cfg, true)?;
    let mut out = vec![0.0; field.values.len()];
    advance(&field.values, &mut out, cfg, cfg.fringe_coefficient())?;
    Field::new(field.grid.clone(), out, field.time + cfg.dt)
}

fn min_with_index(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

fn trace_point(values: &[f64], cfg: &RunConfig, time: f64) -> TracePoint {
    let lambda = cfg.params.lambda;
    let (argmin, min_zeta) = min_with_index(values);
    let h = cfg.grid.h;
    let mut max_grad = 0.0f64;
    for j in 1..values.len() - 1 {
        let ul = u_of_cubic_unchecked(values[j - 1].max(0.0), lambda);
        let ur = u_of_cubic_unchecked(values[j + 1].max(0.0), lambda);
        max_grad = max_grad.max(((ur - ul) / (2.0 * h)).abs());
    }
    TracePoint {
        time,
        min_zeta,
        argmin,
        max_u: u_of_cubic_unchecked(min_zeta.max(0.0), lambda),
        max_grad_u: max_grad,
    }
}

/// Time-steps from the flat initial state until quenching, steady state or
/// the step budget.
pub fn run(cfg: &RunConfig) -> Result<QuenchOutcome> {
    cfg.validate()?;
    let fringe = cfg.fringe_coefficient();
    let dt = cfg.dt;
    let mut cur = Field::initial_zeta(cfg.grid.clone(), &cfg.params).values;
    let mut next = cur.clone();
    let snapshot_steps: Vec<u64> = cfg.snapshot_times.iter().map(|t| (t / dt + 1e-9).floor() as u64).collect();
    let mut pending = 0usize;
    let mut snapshots = Vec::new();
    let mut trace = Vec::new();
    let mut prev_min = min_with_index(&cur).1;
    let mut m: u64 = 0;

    let snapshot = |values: &[f64], m: u64| Field {
        grid: cfg.grid.clone(),
        values: values.to_vec(),
        time: m as f64 * dt,
    };

    if cfg.trace_stride > 0 {
        trace.push(trace_point(&cur, cfg, 0.0));
    }

    loop {
        while pending < snapshot_steps.len() && snapshot_steps[pending] == m {
            snapshots.push(snapshot(&cur, m));
            pending += 1;
        }
        if m >= cfg.max_steps {
            return Ok(QuenchOutcome {
                kind: OutcomeKind::BudgetExceeded,
                t_ex: None,
                t_ex_interp: None,
                steps: m,
                quench_index: None,
                quench_node: None,
                last_change: f64::NAN,
                final_field: snapshot(&cur, m),
                snapshots,
                trace,
            });
        }
        advance(&cur, &mut next, cfg, fringe)?;
        m += 1;

        let (argmin, min_next) = min_with_index(&next);
        let change = cur.iter().zip(&next).fold(0.0f64, |acc, (a, b)| acc.max((b - a).abs()));
        let quenched = min_next < cfg.stop_tol;
        let steady = !quenched && change < cfg.stop_tol;

        if cfg.trace_stride > 0 && (m.is_multiple_of(cfg.trace_stride) || quenched || steady) {
            trace.push(trace_point(&next, cfg, m as f64 * dt));
        }

        if quenched || steady {
            while pending < snapshot_steps.len() && snapshot_steps[pending] == m {
                snapshots.push(snapshot(&next, m));
                pending += 1;
            }
            let t_ex = m as f64 * dt;
            let (kind, interp, qi) = if quenched {
                let frac = ((prev_min - cfg.stop_tol) / (prev_min - min_next)).clamp(0.0, 1.0);
                (OutcomeKind::Quenched, (m - 1) as f64 * dt + frac * dt, Some(argmin))
            } else {
                (OutcomeKind::Steady, t_ex, None)
            };
            return Ok(QuenchOutcome {
                kind,
                t_ex: Some(t_ex),
                t_ex_interp: Some(interp),
                steps: m,
                quench_index: qi,
                quench_node: qi.map(|i| cfg.grid.nodes[i]),
                last_change: change,
                final_field: snapshot(&next, m),
                snapshots,
                trace,
            });
        }
        prev_min = min_next;
        std::mem::swap(&mut cur, &mut next);
    }
}

/// Nodal deflection `u = 1 − (3λζ)^{1/3}` of a `ζ` field.
pub fn u_view(field: &Field, params: &Params) -> Field {
    let values = field.values.iter().map(|&z| u_of_cubic_unchecked(z, params.lambda)).collect();
    Field { grid: field.grid.clone(), values, time: field.time }
}

/// Discretization shared by every cell of a quench-time sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub n_interior: usize,
    pub dt: f64,
    pub stop_tol: f64,
    pub max_steps: u64,
    pub radial_stencil: RadialStencil,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        Self {
            n_interior: DEFAULT_N,
            dt: DEFAULT_DT,
            stop_tol: DEFAULT_STOP_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            radial_stencil: RadialStencil::default(),
        }
    }
}

/// One `(δ, λ)` cell of a quench-time table. `t_ex` is infinite for steady
/// runs and NaN for failed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchRow {
    pub delta: f64,
    pub lambda: f64,
    pub outcome: std::result::Result<OutcomeKind, String>,
    pub t_ex: f64,
    pub t_ex_interp: f64,
    pub lambda_t_ex: f64,
    pub quench_node: Option<f64>,
    pub steps: u64,
}

fn table_cell(domain: Domain, delta: f64, lambda: f64, template: &SweepTemplate) -> QuenchRow {
    let failed = |msg: String| QuenchRow {
        delta,
        lambda,
        outcome: Err(msg),
        t_ex: f64::NAN,
        t_ex_interp: f64::NAN,
        lambda_t_ex: f64::NAN,
        quench_node: None,
        steps: 0,
    };
    let result = (|| {
        let params = Params::new(lambda, delta)?;
        let grid = Arc::new(build_grid(domain, template.n_interior)?);
        let mut cfg = RunConfig::new(params, grid, template.dt)?
            .with_max_steps(template.max_steps)
            .with_radial_stencil(template.radial_stencil);
        cfg.stop_tol = template.stop_tol;
        cfg.validate()?;
        run(&cfg)
    })();
    match result {
        Err(e) => failed(e.to_string()),
        Ok(out) => {
            let (t, ti) = match out.kind {
                OutcomeKind::Quenched => (out.t_ex.unwrap(), out.t_ex_interp.unwrap()),
                OutcomeKind::Steady => (f64::INFINITY, f64::INFINITY),
                OutcomeKind::BudgetExceeded => (f64::NAN, f64::NAN),
            };
            QuenchRow {
                delta,
                lambda,
                outcome: Ok(out.kind),
                t_ex: t,
                t_ex_interp: ti,
                lambda_t_ex: lambda * t,
                quench_node: out.quench_node,
                steps: out.steps,
            }
        }
    }
}

/// Quench times over the `deltas × lambdas` grid, one row per pair in
/// `(δ, λ)` input order. Cells run in parallel on the current rayon pool
/// and never share state.
pub fn quench_time_table(domain: Domain, deltas: &[f64], lambdas: &[f64], template: &SweepTemplate) -> Vec<QuenchRow> {
    let cells: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| lambdas.iter().map(move |&l| (d, l))).collect();
    cells.par_iter().map(|&(d, l)| table_cell(domain, d, l, template)).collect()
}

/// Like [`quench_time_table`] for an explicit list of `(δ, λ)` pairs.
pub fn quench_time_cells(domain: Domain, cells: &[(f64, f64)], template: &SweepTemplate) -> Vec<QuenchRow> {
    cells.par_iter().map(|&(d, l)| table_cell(domain, d, l, template)).collect()
}
