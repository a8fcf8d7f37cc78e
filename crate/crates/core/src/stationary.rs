//! Pull-in voltage by shooting on the radial stationary problem
//!
//! ```text
//! u'' + ((n−1)/r) u' + λ (1 + δ u'²)/(1 − u)² = 0,   u'(0) = 0,   u(R) = 0,
//! ```
//!
//! parameterised by the center deflection `α = u(0)`. For each `α` the
//! voltage `λ(α)` that hits the boundary condition is found by bisection; the
//! pull-in voltage is the fold `max_α λ(α)`. The slab `[-a, a]` is handled as
//! `n = 1` on `[0, a]` by symmetry.
//!
//! The module also collects the closed-form bounds on the pull-in voltage and
//! the quenching time.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{eigenpair, torsion, Domain};
use crate::numerics::golden_section_max;

/// Integration controls for the shooting problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Fixed RK4 step as a fraction of the radius.
    pub step_fraction: f64,
    /// Step-doubling error control switches on once `1 − u` drops below this.
    pub halving_threshold: f64,
    /// Local error tolerance for the step-doubling control.
    pub halving_tol: f64,
    /// Relative width at which the bisection in `λ` stops.
    pub lambda_rel_tol: f64,
    /// Width in `α` at which golden-section refinement of the fold stops.
    pub alpha_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { step_fraction: 1e-4, halving_threshold: 0.1, halving_tol: 1e-12, lambda_rel_tol: 1e-10, alpha_tol: 1e-8 }
    }
}

impl ShootingOptions {
    pub fn with_step_fraction(mut self, step_fraction: f64) -> Self {
        self.step_fraction = step_fraction;
        self
    }
}

/// A point of the shooting trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootState {
    pub r: f64,
    pub u: f64,
    pub up: f64,
}

const LAMBDA_MIN: f64 = 1e-8;
const LAMBDA_MAX: f64 = 1e4;
/// Below this the trajectory is certainly past the boundary condition.
const DIVERGED: f64 = -1e8;

struct RadialOde {
    n: f64,
    lambda: f64,
    delta: f64,
}

impl RadialOde {
    fn accel(&self, r: f64, u: f64, up: f64) -> f64 {
        let g = 1.0 - u;
        let forcing = self.lambda * (1.0 + self.delta * up * up) / (g * g);
        if r == 0.0 {
            // u'(0) = 0 and u''(0) = −f/n by l'Hôpital on (n−1)u'/r
            -forcing / self.n
        } else {
            -(self.n - 1.0) / r * up - forcing
        }
    }

    fn rk4(&self, s: ShootState, h: f64) -> ShootState {
        let (r, u, p) = (s.r, s.u, s.up);
        let k1u = p;
        let k1p = self.accel(r, u, p);
        let k2u = p + 0.5 * h * k1p;
        let k2p = self.accel(r + 0.5 * h, u + 0.5 * h * k1u, k2u);
        let k3u = p + 0.5 * h * k2p;
        let k3p = self.accel(r + 0.5 * h, u + 0.5 * h * k2u, k3u);
        let k4u = p + h * k3p;
        let k4p = self.accel(r + h, u + h * k3u, k4u);
        ShootState {
            r: r + h,
            u: u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            up: p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        }
    }

    /// One step of size `h`, split recursively while the step-doubling
    /// estimate exceeds `tol`.
    fn controlled_step(&self, s: ShootState, h: f64, tol: f64, depth: u32) -> ShootState {
        let full = self.rk4(s, h);
        let half = self.rk4(self.rk4(s, 0.5 * h), 0.5 * h);
        let err = (full.u - half.u).abs().max(h * (full.up - half.up).abs());
        if err <= tol || depth == 0 || !err.is_finite() {
            return half;
        }
        let mid = self.controlled_step(s, 0.5 * h, tol, depth - 1);
        self.controlled_step(mid, 0.5 * h, tol, depth - 1)
    }
}

fn radial_setup(domain: &Domain) -> (f64, f64) {
    (domain.dim as f64, domain.size)
}

/// Integrates the radial stationary ODE from `u(0) = alpha`, `u'(0) = 0` to
/// the boundary and returns `u(R)`. Trajectories that run off to `-∞`
/// return `f64::NEG_INFINITY`.
pub fn integrate_radial(alpha: f64, lambda: f64, delta: f64, domain: &Domain, opts: &ShootingOptions) -> Result<f64> {
    integrate_radial_trajectory(alpha, lambda, delta, domain, opts, false).map(|(u, _)| u)
}

/// As [`integrate_radial`], optionally keeping every accepted state.
pub fn integrate_radial_trajectory(
    alpha: f64,
    lambda: f64,
    delta: f64,
    domain: &Domain,
    opts: &ShootingOptions,
    keep: bool,
) -> Result<(f64, Vec<ShootState>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(lambda > 0.0) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("need lambda > 0, delta >= 0; got {lambda}, {delta}")));
    }
    let (n, radius) = radial_setup(domain);
    let ode = RadialOde { n, lambda, delta };
    let steps = (1.0 / opts.step_fraction).round().max(1.0) as usize;
    let h = radius / steps as f64;
    let mut s = ShootState { r: 0.0, u: alpha, up: 0.0 };
    let mut path = Vec::new();
    if keep {
        path.push(s);
    }
    for i in 0..steps {
        s = if 1.0 - s.u < opts.halving_threshold {
            ode.controlled_step(s, h, opts.halving_tol, 20)
        } else {
            ode.rk4(s, h)
        };
        s.r = (i + 1) as f64 * h;
        if keep {
            path.push(s);
        }
        if s.u >= 1.0 {
            return Err(Error::SingularBeforeBoundary { r: s.r });
        }
        if !s.u.is_finite() || !s.up.is_finite() || s.u < DIVERGED {
            return Ok((f64::NEG_INFINITY, path));
        }
    }
    Ok((s.u, path))
}

/// The voltage `λ(α)` for which the shot from center deflection `α` meets
/// `u(R) = 0`.
pub fn lambda_of_alpha(alpha: f64, delta: f64, domain: &Domain, opts: &ShootingOptions) -> Result<f64> {
    let shoot = |lambda: f64| integrate_radial(alpha, lambda, delta, domain, opts);
    let no_bracket = Error::NoBracket { alpha, lo: LAMBDA_MIN, hi: LAMBDA_MAX };

    // u(R) decreases in λ; bracket the sign change starting from λ = 1
    let (mut lo, mut hi);
    if shoot(1.0)? > 0.0 {
        lo = 1.0;
        hi = 2.0;
        while shoot(hi)? > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_MAX {
                return Err(no_bracket);
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while shoot(lo)? <= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo < LAMBDA_MIN {
                return Err(no_bracket);
            }
        }
    }
    while (hi - lo) > opts.lambda_rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if shoot(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pull-in voltage with the fold location and the sampled branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullInResult {
    pub delta: f64,
    pub lambda_star: f64,
    pub alpha_star: f64,
    /// `(α, λ(α))` on the uniform grid; α values without a bracket are omitted.
    pub branch: Vec<(f64, f64)>,
    /// Final width of the golden-section bracket in `α`.
    pub tolerance: f64,
}

impl PullInResult {
    /// Number of strict interior local maxima of the sampled branch.
    pub fn interior_maxima(&self) -> usize {
        self.branch.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1).count()
    }

    /// True when the sampled branch has a single interior maximum. The disk
    /// branch oscillates about `λ = 4/9` as `α → 1`; those wiggles produce
    /// local minima on the grid but no second maximum at the default sizes.
    pub fn is_unimodal(&self) -> bool {
        self.interior_maxima() == 1
    }
}

/// Samples `λ(α)` on `alpha_grid_size` uniform points of `(0, 1)` and refines
/// the maximum by golden-section search.
pub fn pull_in(delta: f64, domain: &Domain, alpha_grid_size: usize, opts: &ShootingOptions) -> Result<PullInResult> {
    if alpha_grid_size < 32 {
        return Err(Error::InvalidParameter(format!("alpha grid needs >= 32 points, got {alpha_grid_size}")));
    }
    let m = alpha_grid_size;
    let alphas: Vec<f64> = (1..=m).map(|i| i as f64 / (m + 1) as f64).collect();
    let samples: Vec<Option<f64>> =
        alphas.par_iter().map(|&a| lambda_of_alpha(a, delta, domain, opts).ok()).collect();
    let branch: Vec<(f64, f64)> =
        alphas.iter().zip(&samples).filter_map(|(a, l)| l.map(|l| (*a, l))).collect();
    if branch.is_empty() {
        return Err(Error::EmptyBranch);
    }
    let peak = (0..branch.len()).fold(0, |best, i| if branch[i].1 > branch[best].1 { i } else { best });
    let step = 1.0 / (m + 1) as f64;
    let lo = (branch[peak].0 - step).max(0.5 * step);
    let hi = (branch[peak].0 + step).min(1.0 - 0.5 * step);
    let (alpha_star, refined) =
        golden_section_max(|a| lambda_of_alpha(a, delta, domain, opts), lo, hi, opts.alpha_tol)?;
    let (alpha_star, lambda_star) =
        if refined >= branch[peak].1 { (alpha_star, refined) } else { branch[peak] };
    Ok(PullInResult { delta, lambda_star, alpha_star, branch, tolerance: opts.alpha_tol })
}

/// Pull-in voltage at the given step and at half the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
}

pub fn pull_in_convergence(
    delta: f64,
    domain: &Domain,
    alpha_grid_size: usize,
    opts: &ShootingOptions,
) -> Result<ConvergenceStudy> {
    let coarse = pull_in(delta, domain, alpha_grid_size, opts)?.lambda_star;
    let fine_opts = opts.with_step_fraction(0.5 * opts.step_fraction);
    let fine = pull_in(delta, domain, alpha_grid_size, &fine_opts)?.lambda_star;
    Ok(ConvergenceStudy { coarse, fine, relative_change: ((fine - coarse) / fine).abs() })
}

/// Lower bound `λ_l = (4/27)‖ξ‖∞ / (‖ξ‖∞² + δ‖Δξ‖∞²)` from the torsion function.
pub fn bound_lambda_l(delta: f64, domain: &Domain) -> f64 {
    let t = torsion(domain);
    4.0 / 27.0 * t.xi_sup / (t.xi_sup * t.xi_sup + delta * t.lap_xi_sup * t.lap_xi_sup)
}

/// Comparison bound `(4/27)μ₀`, valid for every `δ`.
pub fn bound_natural(domain: &Domain) -> Result<f64> {
    Ok(4.0 / 27.0 * eigenpair(domain)?.mu0)
}

/// First-order small-`δ` upper bound `λ_{u,1} = (4/27)μ₀(1 − δ/(27‖ξ‖∞))`.
pub fn bound_lambda_u1(delta: f64, domain: &Domain) -> Result<f64> {
    let t = torsion(domain);
    Ok(bound_natural(domain)? * (1.0 - delta / (27.0 * t.xi_sup)))
}

/// Quenching-time bound `‖φ₀‖₁/(3λ‖φ₀‖₁ − ‖Δφ₀‖₁) = 1/(3λ − μ₀)`,
/// valid for `λ > μ₀/3`.
pub fn bound_t_upper(lambda: f64, domain: &Domain) -> Result<f64> {
    let pair = eigenpair(domain)?;
    let phi_l1 = 1.0;
    let denom = 3.0 * lambda * phi_l1 - pair.laplacian_l1();
    if !(denom > 0.0) {
        return Err(Error::OutOfRange(format!(
            "quench-time bound needs lambda > mu0/3 = {}, got {lambda}",
            pair.mu0 / 3.0
        )));
    }
    Ok(phi_l1 / denom)
}

/// Default truncation order `P = max(3, ⌈2 + √δ⌉)` for [`bound_asymptotic_p`].
pub fn default_truncation_order(delta: f64) -> u32 {
    ((2.0 + delta.sqrt()).ceil() as u32).max(3)
}

/// Nonexistence level `μ₀/(P − 2)` from the large-`δ` argument.
pub fn bound_asymptotic_p(p: u32, domain: &Domain) -> Result<f64> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!("truncation order P must be >= 3, got {p}")));
    }
    Ok(eigenpair(domain)?.mu0 / (p as f64 - 2.0))
}
