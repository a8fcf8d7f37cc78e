use std::path::Path;
use std::sync::Arc;

use quench_core::asymptotics::{
    compare_profile, default_gap_window, local_zeta, max_u_series, rate_fit_sensitivity, ExpansionCoeffs,
};
use quench_core::evolution::{quench_time_cells, run, u_view, OutcomeKind, RunConfig};
use quench_core::geometry::build_grid;
use quench_core::stationary::{
    bound_asymptotic_p, bound_lambda_l, bound_lambda_u1, bound_natural, default_truncation_order, pull_in,
    ShootingOptions,
};
use quench_core::{Field, Params, QuenchOutcome};
use rayon::prelude::*;

use crate::config::{DomainName, ExperimentConfig};
use crate::reference::{bounds_reference, pull_in_reference, quench_reference};
use crate::report::{num, opt_num, parse_columns, two_columns, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Pullin,
    Evolve,
    SweepQuench,
    FitRate,
    CompareLocal,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Pullin => "pullin",
            Command::Evolve => "evolve",
            Command::SweepQuench => "sweep-quench",
            Command::FitRate => "fit-rate",
            Command::CompareLocal => "compare-local",
        }
    }
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        Command::Bounds => cmd_bounds(cfg),
        Command::Pullin => cmd_pullin(cfg),
        Command::Evolve => cmd_evolve(cfg),
        Command::SweepQuench => cmd_sweep_quench(cfg),
        Command::FitRate => cmd_fit_rate(cfg),
        Command::CompareLocal => cmd_compare_local(cfg),
    }
}

/// Config echo without the output location, so reports written to
/// different directories stay identical.
fn echo(cfg: &ExperimentConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(common) = v.get_mut("common").and_then(|c| c.as_object_mut()) {
        common.remove("out_dir");
    }
    v
}

fn scheme_notes(rep: &mut Report, cfg: &ExperimentConfig) {
    rep.note("scheme: explicit Euler in time, centred second-order differences in space, cubic-transformed field");
    rep.note(format!(
        "radial stencil: {}",
        serde_json::to_value(cfg.common.radial_stencil).unwrap().as_str().unwrap_or_default()
    ));
    rep.note("t_ex is the stop time m*dt; t_ex_interp interpolates the threshold crossing within the last step");
}

fn rel_dev(value: f64, reference: Option<f64>) -> String {
    reference.map(|r| num((value - r) / r)).unwrap_or_default()
}

pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report::new(
        "bounds",
        echo(cfg),
        &[
            "domain",
            "delta",
            "lambda_l",
            "lambda_u1",
            "natural",
            "truncation_p",
            "large_delta_bound",
            "ref_lambda_l",
            "ref_lambda_u1",
            "flag_lambda_l",
            "flag_lambda_u1",
        ],
    );
    let tol = cfg.bounds.flag_tol;
    let flag = |value: f64, reference: Option<f64>| match reference {
        None => String::new(),
        Some(r) if (value - r).abs() <= tol => "ok".into(),
        Some(_) => "discrepancy".into(),
    };
    for &name in &cfg.bounds.domains {
        let domain = name.domain();
        for &delta in &cfg.common.deltas {
            if !(delta >= 0.0) {
                return Err(CliError::Config(format!("delta must be >= 0, got {delta}")));
            }
            let l = bound_lambda_l(delta, &domain);
            let u1 = bound_lambda_u1(delta, &domain)?;
            let nat = bound_natural(&domain)?;
            let p = default_truncation_order(delta);
            let big = bound_asymptotic_p(p, &domain)?;
            let reference = bounds_reference(name, delta);
            rep.push(vec![
                domain.label().into(),
                num(delta),
                num(l),
                num(u1),
                num(nat),
                p.to_string(),
                num(big),
                opt_num(reference.map(|r| r.0)),
                opt_num(reference.map(|r| r.1)),
                flag(l, reference.map(|r| r.0)),
                flag(u1, reference.map(|r| r.1)),
            ]);
        }
    }
    rep.note(format!("flags compare against the embedded reference table with absolute tolerance {tol:e}"));
    Ok(rep)
}

pub fn cmd_pullin(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report::new(
        "pullin",
        echo(cfg),
        &["domain", "delta", "status", "lambda_star", "alpha_star", "bracket_width", "interior_maxima", "reference", "rel_dev"],
    );
    let domains = cfg.pullin.domains.clone().unwrap_or_else(|| vec![cfg.common.domain]);
    let tasks: Vec<(DomainName, f64)> =
        domains.iter().flat_map(|&d| cfg.common.deltas.iter().map(move |&delta| (d, delta))).collect();
    let opts = ShootingOptions::default();
    let results: Vec<_> =
        tasks.par_iter().map(|&(d, delta)| pull_in(delta, &d.domain(), cfg.pullin.alpha_grid, &opts)).collect();
    for (k, (&(name, delta), res)) in tasks.iter().zip(results).enumerate() {
        let label = name.domain().label();
        match res {
            Ok(r) => {
                let reference = pull_in_reference(name, delta);
                rep.push(vec![
                    label.into(),
                    num(delta),
                    "ok".into(),
                    num(r.lambda_star),
                    num(r.alpha_star),
                    num(r.tolerance),
                    r.interior_maxima().to_string(),
                    opt_num(reference),
                    rel_dev(r.lambda_star, reference),
                ]);
                if cfg.pullin.branch_csv {
                    let mut csv = String::from("alpha,lambda\n");
                    for (a, l) in &r.branch {
                        csv.push_str(&format!("{},{}\n", num(*a), num(*l)));
                    }
                    rep.artifact(format!("pullin_branch_{label}_{k:03}.csv"), "branch", None, csv);
                }
            }
            Err(e) => {
                rep.failures += 1;
                let mut row = vec![label.into(), num(delta), format!("error: {e}")];
                row.resize(rep.columns.len(), String::new());
                rep.push(row);
            }
        }
    }
    rep.note("lambda_star maximizes lambda(alpha) along the shooting branch; bracket_width is the final alpha bracket");
    Ok(rep)
}

fn run_config(cfg: &ExperimentConfig, params: Params, name: DomainName) -> Result<RunConfig, CliError> {
    let c = &cfg.common;
    let grid = Arc::new(build_grid(name.domain(), c.n)?);
    let mut rc = RunConfig::new(params, grid, c.dt)?
        .with_max_steps(c.max_steps)
        .with_radial_stencil(c.radial_stencil);
    rc.stop_tol = c.stop_tol;
    rc.validate()?;
    Ok(rc)
}

fn profile_artifacts(rep: &mut Report, tag: &str, field: &Field, params: &Params) {
    let u = u_view(field, params);
    rep.artifact(format!("evolve_zeta_{tag}.dat"), "zeta", Some(field.time), two_columns(&field.grid.nodes, &field.values));
    rep.artifact(format!("evolve_u_{tag}.dat"), "u", Some(field.time), two_columns(&u.grid.nodes, &u.values));
}

pub fn cmd_evolve(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let opts = &cfg.evolve;
    let params = Params::new(opts.lambda, opts.delta)?;
    let mut times = cfg.common.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let rc = run_config(cfg, params, cfg.common.domain)?.with_snapshots(times.clone()).with_trace(opts.trace_stride);
    let out = run(&rc)?;

    let mut rep = Report::new(
        "evolve",
        echo(cfg),
        &["domain", "lambda", "delta", "outcome", "t_ex", "t_ex_interp", "steps", "quench_node", "last_change"],
    );
    scheme_notes(&mut rep, cfg);
    rep.push(vec![
        rc.grid.domain.label().into(),
        num(params.lambda),
        num(params.delta),
        out.kind.label().into(),
        opt_num(out.t_ex),
        opt_num(out.t_ex_interp),
        out.steps.to_string(),
        opt_num(out.quench_node),
        num(out.last_change),
    ]);
    for (k, snap) in out.snapshots.iter().enumerate() {
        profile_artifacts(&mut rep, &format!("{k:03}"), snap, &params);
    }
    profile_artifacts(&mut rep, "final", &out.final_field, &params);
    let missed = times.len() - out.snapshots.len();
    if missed > 0 {
        rep.note(format!("{missed} snapshot time(s) after the stop time were not reached"));
    }
    if !out.trace.is_empty() {
        let mut csv = String::from("t,min_zeta,max_u,argmin,max_grad_u\n");
        for p in &out.trace {
            csv.push_str(&format!("{},{},{},{},{}\n", num(p.time), num(p.min_zeta), num(p.max_u), p.argmin, num(p.max_grad_u)));
        }
        rep.artifact("evolve_trace.csv".into(), "trace", None, csv);
    }
    if out.kind == OutcomeKind::BudgetExceeded {
        rep.failures += 1;
        rep.note(format!("step budget of {} exhausted", cfg.common.max_steps));
    }
    Ok(rep)
}

pub fn cmd_sweep_quench(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report::new(
        "sweep-quench",
        echo(cfg),
        &[
            "domain",
            "delta",
            "lambda",
            "status",
            "t_ex",
            "lambda_t_ex",
            "t_ex_interp",
            "lambda_t_ex_interp",
            "quench_node",
            "steps",
            "reference_t",
            "rel_dev",
        ],
    );
    scheme_notes(&mut rep, cfg);
    let mut cells: Vec<(f64, f64)> = if cfg.sweep_quench.cells.is_empty() {
        cfg.common.deltas.iter().flat_map(|&d| cfg.common.lambdas.iter().map(move |&l| (d, l))).collect()
    } else {
        cfg.sweep_quench.cells.iter().map(|c| (c[0], c[1])).collect()
    };
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let template = cfg.sweep_template();
    let domains = cfg.sweep_quench.domains.clone().unwrap_or_else(|| vec![cfg.common.domain]);
    for name in domains {
        for row in quench_time_cells(name.domain(), &cells, &template) {
            let status = match &row.outcome {
                Ok(kind) => kind.label().to_string(),
                Err(e) => format!("error: {e}"),
            };
            if !matches!(row.outcome, Ok(OutcomeKind::Quenched | OutcomeKind::Steady)) {
                rep.failures += 1;
            }
            let reference = quench_reference(name, row.delta, row.lambda);
            let quenched = row.outcome == Ok(OutcomeKind::Quenched);
            rep.push(vec![
                name.domain().label().into(),
                num(row.delta),
                num(row.lambda),
                status,
                num(row.t_ex),
                num(row.lambda_t_ex),
                num(row.t_ex_interp),
                num(row.lambda * row.t_ex_interp),
                opt_num(row.quench_node),
                row.steps.to_string(),
                opt_num(reference),
                if quenched { rel_dev(row.t_ex, reference) } else { String::new() },
            ]);
        }
    }
    rep.note("steady cells report t_ex = inf; failed and budget-exhausted cells report nan");
    Ok(rep)
}

/// A completed run: quench time, time step and the data needed downstream.
struct RunData {
    params: Params,
    t_quench: f64,
    dt: f64,
    series: Vec<(f64, f64)>,
    profiles: Vec<(f64, Vec<f64>, Vec<f64>)>,
    dim: usize,
}

fn quench_time(out: &QuenchOutcome) -> Result<f64, CliError> {
    match (out.kind, out.t_ex_interp) {
        (OutcomeKind::Quenched, Some(t)) => Ok(t),
        (kind, _) => Err(CliError::Numerical(format!("reference run ended {}, not quenched", kind.label()))),
    }
}

/// Loads an `evolve` output directory.
fn load_run(dir: &Path, params: Params) -> Result<RunData, CliError> {
    let rep = Report::read(&dir.join("evolve.json"))?;
    let row = rep.rows.first().ok_or_else(|| CliError::Config(format!("{}: empty evolve report", dir.display())))?;
    let get = |name: &str| -> Result<f64, CliError> {
        rep.column(name)
            .and_then(|i| row[i].parse::<f64>().ok())
            .ok_or_else(|| CliError::Config(format!("{}: evolve report lacks {name}", dir.display())))
    };
    let stored = Params::new(get("lambda")?, get("delta")?)?;
    if (stored.lambda - params.lambda).abs() > 1e-12 * params.lambda || (stored.delta - params.delta).abs() > 1e-12 * params.delta.max(1.0) {
        return Err(CliError::Config(format!(
            "run reference has lambda = {}, delta = {}; configured {}, {}",
            stored.lambda, stored.delta, params.lambda, params.delta
        )));
    }
    let t_quench = get("t_ex_interp")?;
    if rep.rows[0][rep.column("outcome").unwrap_or(0)] != "quenched" {
        return Err(CliError::Numerical("reference run did not quench".into()));
    }
    let dt = rep.config["common"]["dt"]
        .as_f64()
        .ok_or_else(|| CliError::Config(format!("{}: config echo lacks common.dt", dir.display())))?;
    let domain = rep.config["common"]["domain"].as_str().unwrap_or("slab");
    let dim = if domain == "disk" { 2 } else { 1 };
    let read = |name: &str| -> Result<Vec<Vec<f64>>, CliError> {
        let text = std::fs::read_to_string(dir.join(name))
            .map_err(|e| CliError::Config(format!("missing run reference {}: {e}", dir.join(name).display())))?;
        parse_columns(&text)
    };
    let series = if rep.artifacts.iter().any(|a| a.kind == "trace") {
        read("evolve_trace.csv")?.iter().map(|r| (r[0], r[2])).collect()
    } else {
        Vec::new()
    };
    let mut profiles = Vec::new();
    for a in rep.artifacts.iter().filter(|a| a.kind == "zeta") {
        let cols = read(&a.name)?;
        let (xs, zs) = cols.iter().map(|r| (r[0], r[1])).unzip();
        profiles.push((a.time.unwrap_or(f64::NAN), xs, zs));
    }
    Ok(RunData { params, t_quench, dt, series, profiles, dim })
}

pub fn cmd_fit_rate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let opts = &cfg.fit_rate;
    let params = Params::new(opts.lambda, opts.delta)?;
    let data = match &opts.source {
        Some(dir) => load_run(dir, params)?,
        None => {
            let rc = run_config(cfg, params, cfg.common.domain)?.with_trace(1);
            let out = run(&rc)?;
            RunData {
                params,
                t_quench: quench_time(&out)?,
                dt: rc.dt,
                series: max_u_series(&out.trace),
                profiles: Vec::new(),
                dim: rc.grid.domain.dim,
            }
        }
    };
    if data.series.is_empty() {
        return Err(CliError::Config("missing run reference: the source run has no trace (set evolve.trace_stride)".into()));
    }
    let default = default_gap_window(data.t_quench, data.dt);
    let window = (opts.gap_lo.unwrap_or(default.0), opts.gap_hi.unwrap_or(default.1));
    let fit = rate_fit_sensitivity(&data.series, data.t_quench, data.dt, window)?;
    let mut rep = Report::new(
        "fit-rate",
        echo(cfg),
        &[
            "lambda",
            "delta",
            "t_quench",
            "exponent",
            "amplitude",
            "amplitude_expected",
            "residual",
            "gap_lo",
            "gap_hi",
            "samples",
            "exponent_t_minus_dt",
            "exponent_t_plus_dt",
            "amplitude_t_minus_dt",
            "amplitude_t_plus_dt",
        ],
    );
    let c = fit.central;
    rep.push(vec![
        num(data.params.lambda),
        num(data.params.delta),
        num(data.t_quench),
        num(c.exponent),
        num(c.amplitude),
        num((3.0 * data.params.lambda).cbrt()),
        num(c.residual),
        num(window.0),
        num(window.1),
        c.samples.to_string(),
        num(fit.minus.exponent),
        num(fit.plus.exponent),
        num(fit.minus.amplitude),
        num(fit.plus.amplitude),
    ]);
    rep.note("least-squares fit of log(1 - max u) against log(T - t); amplitude_expected is (3 lambda)^(1/3)");
    Ok(rep)
}

pub fn cmd_compare_local(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let opts = &cfg.compare_local;
    let params = Params::new(opts.lambda, opts.delta)?;
    let data = match &opts.source {
        Some(dir) => load_run(dir, params)?,
        None => {
            let rc = run_config(cfg, params, cfg.common.domain)?;
            let t_quench = quench_time(&run(&rc)?)?;
            let t_eval = opts.t_eval.unwrap_or(t_quench - opts.lead);
            let out = run(&rc.clone().with_snapshots(vec![t_eval]))?;
            let profiles = out.snapshots.iter().map(|s| (s.time, s.grid.nodes.clone(), s.values.clone())).collect();
            RunData { params, t_quench, dt: rc.dt, series: Vec::new(), profiles, dim: rc.grid.domain.dim }
        }
    };
    let t_eval = opts.t_eval.unwrap_or(data.t_quench - opts.lead);
    if !(t_eval < data.t_quench) {
        return Err(CliError::Config(format!("comparison time {t_eval} is not before the quench time {}", data.t_quench)));
    }
    let (t_snap, radii, mut zeta) = data
        .profiles
        .into_iter()
        .min_by(|a, b| (a.0 - t_eval).abs().total_cmp(&(b.0 - t_eval).abs()))
        .ok_or_else(|| CliError::Config("missing run reference: no profile snapshots".into()))?;
    let mut coeffs = ExpansionCoeffs::new(data.t_quench, data.params, data.dim)?;
    if opts.reduced_correction {
        coeffs = coeffs.with_reduced_correction();
    }
    if opts.self_test {
        zeta = radii.iter().map(|r| local_zeta(r.abs(), t_snap, &coeffs)).collect::<Result<_, _>>()?;
    }
    let rows = compare_profile(&radii, &zeta, t_snap, &coeffs, opts.r_window)?;
    let mut rep = Report::new("compare-local", echo(cfg), &["r", "zeta_numeric", "zeta_local", "abs_err", "rel_err"]);
    for r in &rows {
        rep.push(vec![num(r.r), num(r.zeta_numeric), num(r.zeta_local), num(r.abs_err), num(r.rel_err)]);
    }
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    rep.note(format!("quench time {}, profile time {}, max rel_err {}", num(data.t_quench), num(t_snap), num(worst)));
    if opts.self_test {
        rep.note("self-test: the numeric column is the analytic local form");
    }
    Ok(rep)
}
