use std::sync::Arc;

use quench_core::evolution::{quench_time_table, run, step_slab, u_view, RunConfig, SweepTemplate};
use quench_core::geometry::build_grid;
use quench_core::{Domain, Field, OutcomeKind, Params};

fn slab_run(lambda: f64, delta: f64) -> RunConfig {
    RunConfig::standard(Params::new(lambda, delta).unwrap(), Domain::slab()).unwrap()
}

#[test]
fn slab_steps_preserve_symmetry() {
    let cfg = slab_run(3.0, 0.7);
    let mut field = Field::initial_zeta(cfg.grid.clone(), &cfg.params);
    for _ in 0..3000 {
        field = step_slab(&field, &cfg).unwrap();
        let v = &field.values;
        let n = v.len();
        for j in 0..n / 2 {
            assert!((v[j] - v[n - 1 - j]).abs() <= 1e-12, "asymmetry at node {j}");
        }
    }
}

#[test]
fn steady_below_pull_in() {
    let out = run(&slab_run(1.0, 0.7)).unwrap();
    assert_eq!(out.kind, OutcomeKind::Steady);
    assert!(out.last_change < 1e-10);
}

#[test]
fn fringing_tips_the_balance() {
    let with = run(&slab_run(1.35, 0.7)).unwrap();
    assert_eq!(with.kind, OutcomeKind::Quenched);
    let min = with.final_field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min < 1e-10);
    let without = run(&slab_run(1.35, 0.0)).unwrap();
    assert_eq!(without.kind, OutcomeKind::Steady);
}

#[test]
fn mesh_refinement_changes_quench_time_by_under_one_percent() {
    let p = Params::new(10.0, 0.0).unwrap();
    let coarse = run(&slab_run(10.0, 0.0)).unwrap().t_ex.unwrap();
    let grid = Arc::new(build_grid(Domain::slab(), 400).unwrap());
    let fine = run(&RunConfig::new(p, grid, 1.5e-6).unwrap()).unwrap().t_ex.unwrap();
    assert!(((fine - coarse) / coarse).abs() < 0.01, "coarse {coarse} fine {fine}");
}

#[test]
fn one_sided_rate_bounded_below() {
    let cfg = slab_run(10.0, 0.0).with_trace(1);
    let out = run(&cfg).unwrap();
    let t_quench = out.t_ex_interp.unwrap();
    let lambda = cfg.params.lambda;
    let ratios: Vec<f64> = out
        .trace
        .iter()
        .filter(|p| t_quench - p.time > 0.0 && p.time >= 0.9 * t_quench)
        .map(|p| (3.0 * lambda * p.min_zeta).cbrt() / (t_quench - p.time).cbrt())
        .collect();
    assert!(ratios.len() > 100);
    let lowest = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lowest > 0.5 * (3.0 * lambda).cbrt(), "lowest ratio {lowest}");
}

#[test]
fn u_view_of_quenched_field() {
    let cfg = slab_run(3.0, 0.0);
    let out = run(&cfg).unwrap();
    let u = u_view(&out.final_field, &cfg.params);
    let (imax, umax) = u.argmax();
    assert!(umax >= 1.0 - (3.0 * 3.0 * cfg.stop_tol).cbrt());
    assert_eq!(imax, out.final_field.argmin().0);
    assert_eq!(u.values[0], 0.0);
    assert_eq!(*u.values.last().unwrap(), 0.0);
}

#[test]
fn sweep_marks_steady_rows_and_keeps_order() {
    let rows = quench_time_table(Domain::slab(), &[0.0, 0.7], &[1.0, 10.0], &SweepTemplate::default());
    assert_eq!(rows.len(), 4);
    let steady = &rows[0];
    assert_eq!((steady.delta, steady.lambda), (0.0, 1.0));
    assert_eq!(steady.outcome, Ok(OutcomeKind::Steady));
    assert!(steady.t_ex.is_infinite());
    let q = &rows[1];
    assert_eq!((q.delta, q.lambda), (0.0, 10.0));
    assert!((q.lambda_t_ex - 10.0 * q.t_ex).abs() < 1e-15);
    assert!(rows[3].t_ex < rows[1].t_ex);
}
