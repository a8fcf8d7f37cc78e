//! Post-processing near the quench: similarity variables, the quenching
//! rate fit, the weighted energy, and the local expansion about the origin.
//!
//! Everything here works on finished runs and never touches the stepper.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{QuenchOutcome, TracePoint};
use crate::geometry::{sphere_area, Field, Params};

/// Default half-width `C` of the window `|x − a| ≤ C√(T−t)`.
pub const DEFAULT_WINDOW_C: f64 = 5.0;
/// Default growth factor used by [`classify_point`].
pub const DEFAULT_GROWTH_FACTOR: f64 = 10.0;
/// Bracket exponent used by [`local_u`].
pub const DEFAULT_BRACKET_EXPONENT: f64 = 1.0 / 3.0;

/// One node mapped into similarity variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilaritySample {
    /// Original coordinate (radius on the disk).
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub w: f64,
    /// `∂w/∂y`, from centered differences on the original grid.
    pub w_y: f64,
}

/// All samples taken from one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityLevel {
    pub t: f64,
    pub s: f64,
    pub samples: Vec<SimilaritySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityFrame {
    pub a: f64,
    pub t_quench: f64,
    pub window_c: f64,
    /// Spatial dimension used for radial measures.
    pub dim: usize,
    pub radial: bool,
    /// Levels in strictly increasing `s`.
    pub levels: Vec<SimilarityLevel>,
}

impl SimilarityFrame {
    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|l| l.samples.is_empty())
    }

    /// Flat list of `(y, s, w)` triples.
    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        self.levels.iter().flat_map(|l| l.samples.iter().map(|p| (p.y, p.s, p.w))).collect()
    }

    /// Deflection recovered from a stored sample, `u = 1 − w e^{−s/3}`.
    pub fn reconstruct_u(sample: &SimilaritySample) -> f64 {
        1.0 - sample.w * (-sample.s / 3.0).exp()
    }

    pub fn s_span(&self) -> f64 {
        match (self.levels.first(), self.levels.last()) {
            (Some(a), Some(b)) => b.s - a.s,
            _ => 0.0,
        }
    }
}

fn centered_derivative(values: &[f64], h: f64, radial: bool) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
    }
    if n >= 3 {
        d[0] = if radial { 0.0 } else { (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h) };
        d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    }
    d
}

/// Maps deflection snapshots `u` into `(y, s, w)` about the point `a`.
///
/// Nodes outside `|x − a| ≤ C√(T−t)` and nodes with `u ≥ 1` are skipped.
/// Snapshots sharing a time are kept once. The result may have no samples.
pub fn similarity_frame(u_snapshots: &[Field], a: f64, t_quench: f64, window_c: f64) -> Result<SimilarityFrame> {
    if !(window_c > 0.0) {
        return Err(Error::InvalidParameter(format!("window constant must be positive, got {window_c}")));
    }
    let first = u_snapshots.first().ok_or_else(|| Error::InvalidParameter("no snapshots supplied".into()))?;
    let domain = first.grid.domain;
    let radial = first.grid.is_radial();
    let (lo, hi) = if radial { (0.0, domain.size) } else { (-domain.size, domain.size) };
    if !(a >= lo && a <= hi) {
        return Err(Error::OutOfRange(format!("point a = {a} outside the domain [{lo}, {hi}]")));
    }
    if radial && a != 0.0 {
        return Err(Error::UnsupportedDomain("radial frames are centred at the origin".into()));
    }

    let mut order: Vec<&Field> = u_snapshots.iter().collect();
    order.sort_by(|p, q| p.time.total_cmp(&q.time));
    let mut levels: Vec<SimilarityLevel> = Vec::new();
    for field in order {
        let gap = t_quench - field.time;
        if !(gap > 0.0) {
            return Err(Error::OutOfRange(format!("snapshot at t = {} is not before T = {t_quench}", field.time)));
        }
        let s = -gap.ln();
        if levels.last().is_some_and(|l| l.s >= s) {
            continue;
        }
        let root = gap.sqrt();
        let scale = gap.cbrt();
        let du = centered_derivative(&field.values, field.grid.h, radial);
        let samples = field
            .grid
            .nodes
            .iter()
            .zip(&field.values)
            .zip(&du)
            .filter(|((x, _), _)| (**x - a).abs() <= window_c * root)
            .filter_map(|((&x, &u), &ux)| {
                let w = (1.0 - u) / scale;
                (w > 0.0).then_some(SimilaritySample { x, y: (x - a) / root, s, w, w_y: -ux * root / scale })
            })
            .collect();
        levels.push(SimilarityLevel { t: field.time, s, samples });
    }
    Ok(SimilarityFrame { a, t_quench, window_c, dim: domain.dim, radial, levels })
}

/// Least-squares power law `1 − max u ≈ amplitude·(T−t)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Time window `(t_lo, t_hi)` of the samples used.
    pub window: (f64, f64),
    pub residual: f64,
    pub samples: usize,
}

/// Default fit window expressed as `T − t ∈ [10·dt, T/10]`.
pub fn default_gap_window(t_quench: f64, dt: f64) -> (f64, f64) {
    (10.0 * dt, t_quench / 10.0)
}

/// `(t, max u)` pairs from a run trace.
pub fn max_u_series(trace: &[TracePoint]) -> Vec<(f64, f64)> {
    trace.iter().map(|p| (p.time, p.max_u)).collect()
}

fn usable(series: &[(f64, f64)], t_quench: f64) -> Vec<(f64, f64)> {
    series
        .iter()
        .filter(|(t, u)| t_quench - t > 0.0 && *u < 1.0 && u.is_finite())
        .map(|&(t, u)| (t_quench - t, 1.0 - u))
        .collect()
}

fn check_span(points: &[(f64, f64)], what: &str) -> Result<()> {
    if points.len() < 20 {
        return Err(Error::InsufficientSpan(format!("{what}: {} usable samples, need 20", points.len())));
    }
    let (min, max) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if (max / min).log10() < 2.0 {
        return Err(Error::InsufficientSpan(format!("{what}: T - t spans {:.3} decades, need 2", (max / min).log10())));
    }
    Ok(())
}

fn fit_points(points: &[(f64, f64)], t_quench: f64) -> Result<RateFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = crate::numerics::fit_line(&xs, &ys)?;
    let (gmin, gmax) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    Ok(RateFit {
        exponent: line.slope,
        amplitude: line.intercept.exp(),
        window: (t_quench - gmax, t_quench - gmin),
        residual: line.rms,
        samples: points.len(),
    })
}

/// Fits every usable sample of `series`.
pub fn rate_fit(series: &[(f64, f64)], t_quench: f64) -> Result<RateFit> {
    let points = usable(series, t_quench);
    check_span(&points, "series")?;
    fit_points(&points, t_quench)
}

/// Fits only samples with `T − t` inside `gap_window`. The span requirement
/// applies to the whole series; the window itself needs 20 samples.
pub fn rate_fit_window(series: &[(f64, f64)], t_quench: f64, gap_window: (f64, f64)) -> Result<RateFit> {
    let (glo, ghi) = gap_window;
    if !(glo > 0.0 && ghi > glo && ghi < t_quench) {
        return Err(Error::InvalidParameter(format!("fit window {gap_window:?} must satisfy 0 < lo < hi < T")));
    }
    let all = usable(series, t_quench);
    check_span(&all, "series")?;
    let inside: Vec<(f64, f64)> = all.into_iter().filter(|p| p.0 >= glo && p.0 <= ghi).collect();
    if inside.len() < 20 {
        return Err(Error::InsufficientSpan(format!("window holds {} samples, need 20", inside.len())));
    }
    fit_points(&inside, t_quench)
}

/// Fits repeated with `T` shifted by `±dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSensitivity {
    pub central: RateFit,
    pub minus: RateFit,
    pub plus: RateFit,
}

pub fn rate_fit_sensitivity(series: &[(f64, f64)], t_quench: f64, dt: f64, gap_window: (f64, f64)) -> Result<RateSensitivity> {
    Ok(RateSensitivity {
        central: rate_fit_window(series, t_quench, gap_window)?,
        minus: rate_fit_window(series, t_quench - dt, gap_window)?,
        plus: rate_fit_window(series, t_quench + dt, gap_window)?,
    })
}

/// The three terms of the weighted energy and the Gaussian mass covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    /// `½∫ρ|∇w|²`
    pub gradient: f64,
    /// `(1/6)∫ρw²`
    pub quadratic: f64,
    /// `λ∫ρ/w`
    pub singular: f64,
    pub total: f64,
    /// `∫ρ` over the covered nodes divided by `∫ρ` over all of space.
    pub mass_fraction: f64,
}

fn gaussian(y: f64) -> f64 {
    (-y * y / 4.0).exp()
}

/// Trapezoid rule over `(y, f)` pairs sorted by `y`, with the radial
/// measure `|S^{n−1}| |y|^{n−1}` when `radial`.
fn trapezoid(points: &[(f64, f64)], dim: usize, radial: bool) -> f64 {
    let weight = |y: f64| if radial { sphere_area(dim) * y.abs().powi(dim as i32 - 1) } else { 1.0 };
    points.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 * weight(p[0].0) + p[1].1 * weight(p[1].0))).sum()
}

fn ball_samples(level: &SimilarityLevel, ball_radius: f64) -> Vec<SimilaritySample> {
    let mut inside: Vec<SimilaritySample> = level.samples.iter().copied().filter(|p| p.y.abs() < ball_radius).collect();
    inside.sort_by(|p, q| p.y.total_cmp(&q.y));
    inside
}

/// Weighted energy of level `level` over the ball `|y| < ball_radius`.
pub fn energy(frame: &SimilarityFrame, level: usize, ball_radius: f64, params: &Params) -> Result<EnergyTerms> {
    let lvl = frame
        .levels
        .get(level)
        .ok_or_else(|| Error::OutOfRange(format!("level {level} of {}", frame.levels.len())))?;
    let pts = ball_samples(lvl, ball_radius);
    if pts.len() < 3 {
        return Err(Error::TooFewNodes { needed: 3, have: pts.len() });
    }
    let integral = |f: &dyn Fn(&SimilaritySample) -> f64| {
        let v: Vec<(f64, f64)> = pts.iter().map(|p| (p.y, gaussian(p.y) * f(p))).collect();
        trapezoid(&v, frame.dim, frame.radial)
    };
    let gradient = 0.5 * integral(&|p| p.w_y * p.w_y);
    let quadratic = integral(&|p| p.w * p.w) / 6.0;
    let singular = params.lambda * integral(&|p| 1.0 / p.w);
    let mass = integral(&|_| 1.0);
    let full = (4.0 * std::f64::consts::PI).powf(frame.dim as f64 / 2.0);
    Ok(EnergyTerms { gradient, quadratic, singular, total: gradient - quadratic - singular, mass_fraction: mass / full })
}

/// `∫ s e^{s/3} ∫_{|y|<s} ρ|∇w|² dy ds` over the frame's levels, by the
/// trapezoid rule in `s`. Levels with fewer than two samples contribute 0.
pub fn condition_monitor(frame: &SimilarityFrame) -> f64 {
    let inner: Vec<(f64, f64)> = frame
        .levels
        .iter()
        .map(|l| {
            let pts = ball_samples(l, l.s);
            let v: Vec<(f64, f64)> = pts.iter().map(|p| (p.y, gaussian(p.y) * p.w_y * p.w_y)).collect();
            (l.s, l.s * (l.s / 3.0).exp() * trapezoid(&v, frame.dim, frame.radial))
        })
        .collect();
    inner.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1)).sum()
}

/// Scaled gradient `max|∇u|·(T−t)^{1/6}` along a trace.
pub fn gradient_scaling(trace: &[TracePoint], t_quench: f64) -> Vec<(f64, f64)> {
    trace
        .iter()
        .filter(|p| t_quench - p.time > 0.0)
        .map(|p| (p.time, p.max_grad_u * (t_quench - p.time).powf(1.0 / 6.0)))
        .collect()
}

/// Determined coefficients of the local expansion of `ζ` about a quench at
/// the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCoeffs {
    pub t_quench: f64,
    pub params: Params,
    pub dim: usize,
    /// Leading coefficient of `ζ₂ ~ c (T−t)^{1/3}`.
    pub zeta2: f64,
    /// Coefficient of the `(T−t)^{1/3}` correction inside the bracket.
    pub zeta0_correction: f64,
}

impl ExpansionCoeffs {
    pub fn new(t_quench: f64, params: Params, dim: usize) -> Result<Self> {
        if !(params.delta > 0.0) {
            return Err(Error::InvalidParameter("local expansion needs delta > 0".into()));
        }
        if !(t_quench > 0.0) || dim == 0 {
            return Err(Error::InvalidParameter(format!("bad expansion data T = {t_quench}, n = {dim}")));
        }
        let d = params.delta * params.lambda.powf(2.0 / 3.0);
        Ok(Self {
            t_quench,
            params,
            dim,
            zeta2: 3f64.cbrt() / (2.0 * d),
            zeta0_correction: -3f64.powf(4.0 / 3.0) * dim as f64 / (8.0 * d),
        })
    }

    /// Same expansion with the weaker correction `−3^{1/3}n/(8δλ^{2/3})`.
    pub fn with_reduced_correction(mut self) -> Self {
        self.zeta0_correction /= 3.0;
        self
    }

    /// `1 + c₀(T−t)^{1/3} + (ζ₂/2) r²/(T−t)^{2/3}`.
    pub fn bracket(&self, r: f64, t: f64) -> Result<f64> {
        let tau = self.t_quench - t;
        if !(tau > 0.0) {
            return Err(Error::OutOfRange(format!("t = {t} is not before T = {}", self.t_quench)));
        }
        Ok(1.0 + self.zeta0_correction * tau.cbrt() + 0.5 * self.zeta2 * r * r / tau.powf(2.0 / 3.0))
    }
}

/// `ζ ≈ (T−t)·bracket`.
pub fn local_zeta(r: f64, t: f64, coeffs: &ExpansionCoeffs) -> Result<f64> {
    Ok((coeffs.t_quench - t) * coeffs.bracket(r, t)?)
}

/// `u ≈ 1 − (3λ(T−t))^{1/3} · bracket^{1/3}`.
pub fn local_u(r: f64, t: f64, coeffs: &ExpansionCoeffs) -> Result<f64> {
    local_u_with_exponent(r, t, coeffs, DEFAULT_BRACKET_EXPONENT)
}

pub fn local_u_with_exponent(r: f64, t: f64, coeffs: &ExpansionCoeffs, exponent: f64) -> Result<f64> {
    let b = coeffs.bracket(r, t)?;
    if !(b > 0.0) {
        return Err(Error::NegativeBracket(b));
    }
    let tau = coeffs.t_quench - t;
    Ok(1.0 - (3.0 * coeffs.params.lambda * tau).cbrt() * b.powf(exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalRow {
    pub r: f64,
    pub zeta_numeric: f64,
    pub zeta_local: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// Compares a `ζ` profile at time `t` with [`local_zeta`] for `r ≤ r_window`.
pub fn compare_profile(radii: &[f64], zeta: &[f64], t: f64, coeffs: &ExpansionCoeffs, r_window: f64) -> Result<Vec<LocalRow>> {
    let mut rows = Vec::new();
    for (&r, &z) in radii.iter().zip(zeta) {
        if r.abs() > r_window {
            continue;
        }
        let loc = local_zeta(r.abs(), t, coeffs)?;
        let abs_err = (z - loc).abs();
        rows.push(LocalRow { r, zeta_numeric: z, zeta_local: loc, abs_err, rel_err: abs_err / z.abs() });
    }
    Ok(rows)
}

/// Compares the snapshot of `run` closest to `t_eval` with the local form.
/// The snapshot's own time is used for the expansion.
pub fn compare_local(run: &QuenchOutcome, coeffs: &ExpansionCoeffs, t_eval: f64, r_window: f64) -> Result<Vec<LocalRow>> {
    let snap = run
        .snapshots
        .iter()
        .min_by(|p, q| (p.time - t_eval).abs().total_cmp(&(q.time - t_eval).abs()))
        .ok_or_else(|| Error::InvalidParameter("run has no snapshots".into()))?;
    compare_profile(&snap.grid.nodes, &snap.values, snap.time, coeffs, r_window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointClass {
    QuenchCandidate,
    NonQuench,
}

/// `NonQuench` when `min w` over each level grows monotonically by at least
/// `growth_factor` across the frame, `QuenchCandidate` otherwise.
pub fn classify_point(frame: &SimilarityFrame, growth_factor: f64) -> Result<PointClass> {
    if frame.window_c < 1.0 {
        return Err(Error::InsufficientRange(format!("window C = {} below 1", frame.window_c)));
    }
    let mins: Vec<f64> = frame
        .levels
        .iter()
        .filter(|l| !l.samples.is_empty())
        .map(|l| l.samples.iter().map(|p| p.w).fold(f64::INFINITY, f64::min))
        .collect();
    if mins.len() < 2 || frame.s_span() < 2.0 {
        return Err(Error::InsufficientRange(format!("frame covers {:.3} units of s, need 2", frame.s_span())));
    }
    let monotone = mins.windows(2).all(|p| p[1] >= p[0]);
    let grew = mins[mins.len() - 1] >= growth_factor * mins[0];
    Ok(if monotone && grew { PointClass::NonQuench } else { PointClass::QuenchCandidate })
}
