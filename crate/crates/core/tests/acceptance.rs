//! Acceptance report: one PASS/FAIL line per criterion, with the measured
//! values and the tolerances they are held to.
//!
//! Built with `harness = false` so the lines always reach stdout. Criterion
//! verdicts are reported, not turned into a non-zero exit; a criterion whose
//! evaluation errors out does exit non-zero.

use std::process::ExitCode;

use quench_core::asymptotics::{
    compare_local, compare_profile, default_gap_window, local_zeta, max_u_series, rate_fit_window, ExpansionCoeffs,
};
use quench_core::evolution::{quench_time_cells, run, QuenchRow, RunConfig, SweepTemplate};
use quench_core::geometry::build_grid;
use quench_core::stationary::{
    bound_lambda_l, bound_lambda_u1, bound_natural, bound_t_upper, pull_in, pull_in_convergence, ShootingOptions,
};
use quench_core::transforms::{cubic_of_u, u_of_cubic, TransformContext};
use quench_core::{Domain, OutcomeKind, Params, QuenchOutcome, Result};

struct Report {
    passed: usize,
    failed: Vec<u32>,
    quenched: Vec<(String, f64, f64)>,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, ok: bool, details: &[String]) {
        println!("[{}] {id:>2}. {title}", if ok { "PASS" } else { "FAIL" });
        for d in details {
            println!("        {d}");
        }
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id);
        }
    }

    /// Remembers a quenched run for the quench-point criterion.
    fn note_row(&mut self, domain: &Domain, row: &QuenchRow) {
        if let Some(x) = row.quench_node {
            self.quenched.push((format!("{} δ={} λ={}", domain.label(), row.delta, row.lambda), x, h_of(domain)));
        }
    }

    fn note_run(&mut self, domain: &Domain, p: &Params, out: &QuenchOutcome) {
        if let Some(x) = out.quench_node {
            self.quenched.push((format!("{} δ={} λ={}", domain.label(), p.delta, p.lambda), x, h_of(domain)));
        }
    }
}

fn h_of(domain: &Domain) -> f64 {
    build_grid(*domain, 200).map(|g| g.h).unwrap_or(f64::NAN)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cells(domain: Domain, cells: &[(f64, f64)], rep: &mut Report) -> Vec<QuenchRow> {
    let rows = quench_time_cells(domain, cells, &SweepTemplate::default());
    for r in &rows {
        rep.note_row(&domain, r);
    }
    rows
}

fn standard(lambda: f64, delta: f64, domain: Domain) -> Result<(Params, RunConfig)> {
    let p = Params::new(lambda, delta)?;
    Ok((p, RunConfig::standard(p, domain)?))
}

fn criterion_1(rep: &mut Report) -> Result<()> {
    let slab = Domain::slab();
    let rows = cells(slab, &[(0.0, 10.0), (0.0, 100.0), (0.1, 2000.0), (10.0, 200.0)], rep);
    let checks = [
        ("δ=0 λ=10 T_ex", rows[0].t_ex, 0.034122, 0.03),
        ("δ=0 λ=100 λT_ex", rows[1].lambda_t_ex, 0.3333, 0.01),
        ("δ=0.1 λ=2000 λT_ex", rows[2].lambda_t_ex, 0.0960, 0.05),
        ("δ=10 λ=200 λT_ex", rows[3].lambda_t_ex, 0.0132, 0.05),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for ((name, got, want, tol), row) in checks.iter().zip(&rows) {
        let e = rel(*got, *want);
        ok &= e <= *tol;
        details.push(format!(
            "{name} = {got:.6} (target {want} ± {:.0}%, off {:.2}%, {} steps)",
            tol * 100.0,
            e * 100.0,
            row.steps
        ));
    }
    rep.line(1, "quench-time anchors, slab N=200 dt=6e-6", ok, &details);
    Ok(())
}

fn criterion_2(rep: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut details = Vec::new();
    for domain in [Domain::slab(), Domain::unit_disk()] {
        for row in cells(domain, &[(0.0, 50.0), (0.0, 100.0)], rep) {
            let e = rel(row.lambda_t_ex, 1.0 / 3.0);
            ok &= e <= 0.01;
            details.push(format!("{} λ={} λT_ex = {:.5} (off {:.3}% from 1/3, tol 1%)", domain.label(), row.lambda, row.lambda_t_ex, e * 100.0));
        }
    }
    rep.line(2, "λT_ex → 1/3 without fringing", ok, &details);
    Ok(())
}

fn criterion_3(rep: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut details = Vec::new();
    for (domain, lambda, targets) in [(Domain::slab(), 3.0, [(0.0, 0.1515), (0.7, 0.134262)]), (Domain::unit_disk(), 1.0, [(0.0, 0.7076), (0.7, 0.578232)])] {
        let list: Vec<(f64, f64)> = targets.iter().map(|(d, _)| (*d, lambda)).collect();
        for (row, (_, want)) in cells(domain, &list, rep).iter().zip(targets) {
            let e = rel(row.t_ex, want);
            ok &= e <= 0.02;
            details.push(format!("{} λ={lambda} δ={} T_ex = {:.6} (target {want} ± 2%, off {:.3}%)", domain.label(), row.delta, row.t_ex, e * 100.0));
        }
    }
    rep.line(3, "experiment quench times", ok, &details);
    Ok(())
}

fn criterion_4_6(rep: &mut Report) -> Result<Vec<(Domain, f64, f64)>> {
    let opts = ShootingOptions::default();
    let deltas = [0.0, 0.1, 0.7, 7.0, 70.0, 700.0, 7000.0];
    let mut ok = true;
    let mut details = Vec::new();
    let mut stars = Vec::new();
    for domain in [Domain::slab(), Domain::unit_disk()] {
        let mut values = Vec::new();
        for &d in &deltas {
            let res = pull_in(d, &domain, 64, &opts)?;
            values.push(res.lambda_star);
            stars.push((domain, d, res.lambda_star));
        }
        let row: Vec<String> = deltas.iter().zip(&values).map(|(d, l)| format!("δ={d}: {l:.6}")).collect();
        details.push(format!("{} λ* {}", domain.label(), row.join(", ")));
        let table: Vec<f64> = deltas.iter().zip(&values).filter(|(d, _)| **d != 0.1).map(|(_, l)| *l).collect();
        let monotone = table.windows(2).all(|w| w[1] < w[0]);
        let tail = *values.last().unwrap() < 0.05;
        ok &= monotone && tail;
        details.push(format!("{} monotone over the table ladder: {monotone}; λ*(7000) < 0.05: {tail}", domain.label()));
    }
    let pick = |dom: &str, d: f64| stars.iter().find(|s| s.0.label() == dom && s.1 == d).map(|s| s.2).unwrap();
    for (dom, d, lo, hi) in [("slab", 0.0, 1.39, 1.46), ("slab", 0.7, 1.15, 1.22), ("disk", 0.0, 0.78, 0.81)] {
        let v = pick(dom, d);
        let inside = v >= lo && v <= hi;
        ok &= inside;
        details.push(format!("{dom} λ*_{d} = {v:.6} in [{lo}, {hi}]: {inside}"));
    }
    for domain in [Domain::slab(), Domain::unit_disk()] {
        let study = pull_in_convergence(0.0, &domain, 64, &opts)?;
        let conv = study.relative_change < 1e-4;
        ok &= conv;
        details.push(format!(
            "{} step halving: {:.8} → {:.8} (relative change {:.1e}, need < 1e-4)",
            domain.label(),
            study.coarse,
            study.fine,
            study.relative_change
        ));
    }
    rep.line(4, "pull-in voltages", ok, &details);

    // 6. bounds
    let slab = Domain::slab();
    let mut ok6 = true;
    let mut d6 = Vec::new();
    let l = bound_lambda_l(0.0, &slab);
    let u1 = bound_lambda_u1(0.0, &slab)?;
    ok6 &= (l - 1.1852).abs() <= 1e-4 && (u1 - 1.4622).abs() <= 1e-4;
    d6.push(format!("slab δ=0: λ_l = {l:.6} (1.1852 ± 1e-4), λ_u1 = {u1:.6} (1.4622 ± 1e-4)"));
    for domain in [Domain::slab(), Domain::unit_disk()] {
        let top = bound_natural(&domain)?;
        for d in [0.0, 0.1, 0.7] {
            let star = pick(domain.label(), d);
            let low = bound_lambda_l(d, &domain);
            let ordered = low <= star && star <= top;
            ok6 &= ordered;
            d6.push(format!("{} δ={d}: λ_l = {low:.5} ≤ λ* = {star:.5} ≤ (4/27)μ₀ = {top:.5}: {ordered}", domain.label()));
        }
        let (p, cfg) = standard(10.0, 0.0, domain)?;
        let out = run(&cfg)?;
        rep.note_run(&domain, &p, &out);
        let t = out.t_ex.unwrap_or(f64::NAN);
        let bound = bound_t_upper(10.0, &domain)?;
        ok6 &= bound >= t;
        d6.push(format!("{} λ=10: T upper bound {bound:.6} ≥ T_ex {t:.6}: {}", domain.label(), bound >= t));
    }
    rep.line(6, "bounds", ok6, &d6);
    Ok(stars)
}

fn criterion_5(rep: &mut Report, stars: &[(Domain, f64, f64)]) -> Result<()> {
    let slab = Domain::slab();
    let star = stars.iter().find(|s| s.0.label() == "slab" && s.1 == 0.7).map(|s| s.2).unwrap();
    let below = run(&standard(0.97 * star, 0.7, slab)?.1)?;
    let (p_above, cfg_above) = standard(1.03 * star, 0.7, slab)?;
    let above = run(&cfg_above)?;
    rep.note_run(&slab, &p_above, &above);
    let ok = below.kind == OutcomeKind::Steady && above.kind == OutcomeKind::Quenched;
    rep.line(
        5,
        "pull-in / evolution consistency, slab δ=0.7",
        ok,
        &[format!(
            "λ*={star:.6}: 0.97λ* → {} (t={:.4}), 1.03λ* → {} (t={:.4})",
            below.kind.label(),
            below.t_ex.unwrap_or(f64::NAN),
            above.kind.label(),
            above.t_ex.unwrap_or(f64::NAN)
        )],
    );
    Ok(())
}

fn criterion_7(rep: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut details = Vec::new();
    for (lambda, delta) in [(10.0, 0.0), (3.0, 0.7)] {
        let (p, cfg) = standard(lambda, delta, Domain::slab())?;
        let cfg = cfg.with_trace(1);
        let out = run(&cfg)?;
        rep.note_run(&Domain::slab(), &p, &out);
        let t = out.t_ex_interp.unwrap_or(f64::NAN);
        let fit = rate_fit_window(&max_u_series(&out.trace), t, default_gap_window(t, cfg.dt))?;
        let amp = (3.0 * lambda).cbrt();
        let e_exp = (fit.exponent - 1.0 / 3.0).abs();
        let e_amp = rel(fit.amplitude, amp);
        ok &= e_exp <= 0.02 && e_amp <= 0.05;
        details.push(format!(
            "λ={lambda} δ={delta}: exponent {:.5} (1/3 ± 0.02, off {e_exp:.4}), amplitude {:.5} ((3λ)^(1/3) = {amp:.5} ± 5%, off {:.2}%), {} samples",
            fit.exponent,
            fit.amplitude,
            e_amp * 100.0,
            fit.samples
        ));
    }
    rep.line(7, "quenching rate over the default window", ok, &details);
    Ok(())
}

fn criterion_9(rep: &mut Report) -> Result<()> {
    let mut exp_err = 0.0f64;
    let mut cubic_err = 0.0f64;
    let mut fd_err = 0.0f64;
    let mut tail_err = 0.0f64;
    for (lambda, delta) in [(1.0, 0.0), (1.0, 0.7), (3.0, 0.1)] {
        let p = Params::new(lambda, delta)?;
        let c = TransformContext::new(p);
        for i in 0..=98 {
            let u = i as f64 / 100.0;
            let v = c.exp_transform(u)?;
            exp_err = exp_err.max((c.exp_transform(c.u_of_exp(v)?)? - v).abs());
            cubic_err = cubic_err.max((u_of_cubic(cubic_of_u(u, &p)?, &p)? - u).abs());
        }
        for v in [0.1, 0.5, 1.0, 2.0] {
            if delta == 0.0 && v >= 1.0 {
                continue;
            }
            let eps = 1e-5 * v;
            let fd = (c.rho(v + eps)? - c.rho(v - eps)?) / (2.0 * eps);
            fd_err = fd_err.max(rel(fd, c.rho_prime(v)?));
        }
        for v0 in [0.2, 1.0] {
            let n = 4000;
            let v_max = 10.0;
            let h = (v_max - v0) / n as f64;
            let mut sum = 0.0;
            for k in 0..=n {
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += w / c.rho(v0 + k as f64 * h)?;
            }
            let direct = sum * h / 3.0;
            let closed = c.rho_tail_integral(v0)? - c.rho_tail_integral(v_max)?;
            tail_err = tail_err.max((direct - closed).abs());
        }
    }
    let ok = exp_err <= 1e-9 && cubic_err <= 1e-14 && fd_err <= 1e-6 && tail_err <= 1e-6;
    rep.line(
        9,
        "transform suite",
        ok,
        &[format!(
            "exp round trip {exp_err:.1e} (≤1e-9), cubic round trip {cubic_err:.1e} (≤1e-14), ρ′ finite difference {fd_err:.1e} (≤1e-6), tail integral {tail_err:.1e} (≤1e-6)"
        )],
    );
    Ok(())
}

fn criterion_10(rep: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut details = Vec::new();
    // lead times T − t_eval of the published comparison instants
    for (domain, lambda, lead, window) in [(Domain::slab(), 3.0, 0.134262 - 0.134004, 0.1), (Domain::unit_disk(), 1.0, 0.578232 - 0.57822, 0.2)] {
        let (p, cfg) = standard(lambda, 0.7, domain)?;
        let first = run(&cfg)?;
        rep.note_run(&domain, &p, &first);
        let t = first.t_ex_interp.unwrap_or(f64::NAN);
        let t_eval = t - lead;
        let out = run(&cfg.clone().with_snapshots(vec![t_eval]))?;
        let coeffs = ExpansionCoeffs::new(t, p, domain.dim)?;
        let rows = compare_local(&out, &coeffs, t_eval, window)?;
        let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
        let t_snap = out.snapshots.first().map(|s| s.time).unwrap_or(f64::NAN);
        let radii: Vec<f64> = rows.iter().map(|r| r.r).collect();
        let exact: Vec<f64> = radii.iter().map(|r| local_zeta(r.abs(), t_snap, &coeffs)).collect::<Result<_>>()?;
        let selftest = compare_profile(&radii, &exact, t_snap, &coeffs, window)?.iter().all(|r| r.abs_err == 0.0);
        ok &= worst <= 0.15 && selftest;
        details.push(format!(
            "{} λ={lambda} δ=0.7 at T−t = {lead:.3e}: max relative error {:.2}% over r ≤ {window} ({} nodes, tol 15%); self-test zero: {selftest}",
            domain.label(),
            worst * 100.0,
            rows.len()
        ));
    }
    rep.line(10, "local expansion near the quench", ok, &details);
    Ok(())
}

fn criterion_11(rep: &mut Report) -> Result<()> {
    let slab = Domain::slab();
    let lam = cells(slab, &[(0.1, 2.0), (0.1, 20.0), (0.1, 200.0)], rep);
    let del = cells(slab, &[(0.1, 2.0), (1.0, 2.0), (10.0, 2.0)], rep);
    let lam_ok = lam.windows(2).all(|w| w[1].t_ex < w[0].t_ex);
    let del_ok = del.windows(2).all(|w| w[1].t_ex < w[0].t_ex);
    let fmt = |rows: &[QuenchRow]| rows.iter().map(|r| format!("{:.6}", r.t_ex)).collect::<Vec<_>>().join(" > ");
    rep.line(
        11,
        "monotonicity ladders, slab",
        lam_ok && del_ok,
        &[
            format!("δ=0.1, λ = 2, 20, 200: T_ex {} : {lam_ok}", fmt(&lam)),
            format!("λ=2, δ = 0.1, 1, 10: T_ex {} : {del_ok}", fmt(&del)),
        ],
    );
    Ok(())
}

fn criterion_8(rep: &mut Report) {
    let bad: Vec<String> = rep
        .quenched
        .iter()
        .filter(|(_, x, h)| x.abs() > 2.0 * h)
        .map(|(name, x, h)| format!("{name}: quench node {x:.5} ({:.1} h from the centre)", x.abs() / h))
        .collect();
    let total = rep.quenched.len();
    let mut details = vec![format!("{} of {total} quenched runs within 2h of the centre", total - bad.len())];
    details.extend(bad.iter().cloned());
    rep.line(8, "quench point at the centre", bad.is_empty(), &details);
}

fn main() -> ExitCode {
    let mut rep = Report { passed: 0, failed: Vec::new(), quenched: Vec::new() };
    let started = std::time::Instant::now();
    let mut errors = Vec::new();
    let mut guard = |id: &str, r: Result<()>| {
        if let Err(e) = r {
            errors.push(format!("criterion {id}: {e}"));
        }
    };
    guard("1", criterion_1(&mut rep));
    guard("2", criterion_2(&mut rep));
    guard("3", criterion_3(&mut rep));
    match criterion_4_6(&mut rep) {
        Ok(stars) => guard("5", criterion_5(&mut rep, &stars)),
        Err(e) => guard("4-6", Err(e)),
    }
    guard("7", criterion_7(&mut rep));
    guard("9", criterion_9(&mut rep));
    guard("10", criterion_10(&mut rep));
    guard("11", criterion_11(&mut rep));
    criterion_8(&mut rep);

    let mut failed = rep.failed.clone();
    failed.sort();
    println!(
        "acceptance: {} of {} criteria pass; failing: {:?} ({:.1}s)",
        rep.passed,
        rep.passed + failed.len(),
        failed,
        started.elapsed().as_secs_f64()
    );
    if errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        for e in &errors {
            println!("error: {e}");
        }
        ExitCode::FAILURE
    }
}
