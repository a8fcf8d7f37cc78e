//! The two changes of variable used throughout.
//!
//! * the exponential transform `v = ∫₀ᵘ exp(λδ/(1−s)) ds`, which removes the
//!   gradient term and turns the problem into `v_t − Δv = λρ(v)`;
//! * the cubic transform `ζ = (1−u)³/(3λ)`, which maps touchdown `u = 1` to
//!   `ζ = 0` and is the variable the time stepper works in.

use crate::error::{Error, Result};
use crate::geometry::Params;
use crate::numerics::adaptive_simpson;

/// Largest deflection accepted by the exponential transform.
pub const U_MAX: f64 = 1.0 - 1e-12;

/// Largest exponent `λδ/(1−u)` for which `exp` stays finite.
const MAX_EXPONENT: f64 = 700.0;

/// `ζ = (1−u)³/(3λ)`.
pub fn cubic_of_u(u: f64, params: &Params) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfRange(format!("u = {u} outside [0, 1]")));
    }
    Ok((1.0 - u).powi(3) / (3.0 * params.lambda))
}

/// `u = 1 − (3λζ)^{1/3}`, the inverse of [`cubic_of_u`].
pub fn u_of_cubic(zeta: f64, params: &Params) -> Result<f64> {
    let top = params.zeta_boundary();
    if !(zeta >= 0.0) || zeta > top * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::OutOfRange(format!("zeta = {zeta} outside [0, 1/(3 lambda) = {top}]")));
    }
    Ok(1.0 - (3.0 * params.lambda * zeta).cbrt())
}

/// Same map without the range check; used for nodal views of fields that
/// have crossed the quench threshold.
pub fn u_of_cubic_unchecked(zeta: f64, lambda: f64) -> f64 {
    1.0 - (3.0 * lambda * zeta).cbrt()
}

/// Parameters plus the quadrature and root-finding tolerances used by the
/// exponential transform and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformContext {
    pub params: Params,
    pub quadrature_tol: f64,
    pub root_tol: f64,
}

impl TransformContext {
    pub fn new(params: Params) -> Self {
        Self { params, quadrature_tol: 1e-12, root_tol: 1e-12 }
    }

    pub fn with_tolerances(params: Params, quadrature_tol: f64, root_tol: f64) -> Result<Self> {
        for (name, t) in [("quadrature_tol", quadrature_tol), ("root_tol", root_tol)] {
            if !(t > 0.0 && t <= 1e-6) {
                return Err(Error::InvalidParameter(format!("{name} = {t} outside (0, 1e-6]")));
            }
        }
        Ok(Self { params, quadrature_tol, root_tol })
    }

    fn ld(&self) -> f64 {
        self.params.lambda_delta()
    }

    /// `dv/du = exp(λδ/(1−u))`.
    pub fn exp_derivative(&self, u: f64) -> f64 {
        (self.ld() / (1.0 - u)).exp()
    }

    /// `v = ∫₀ᵘ exp(λδ/(1−s)) ds`.
    pub fn exp_transform(&self, u: f64) -> Result<f64> {
        if !(0.0..=U_MAX).contains(&u) {
            return Err(Error::OutOfRange(format!("u = {u} outside [0, 1 - 1e-12]")));
        }
        if self.ld() == 0.0 {
            return Ok(u);
        }
        if self.ld() / (1.0 - u) > MAX_EXPONENT {
            return Err(Error::Numerical(format!("exp(λδ/(1−u)) overflows at u = {u}")));
        }
        Ok(self.integrate(u))
    }

    fn integrate(&self, u: f64) -> f64 {
        let ld = self.ld();
        adaptive_simpson(&|s: f64| (ld / (1.0 - s)).exp(), 0.0, u, self.quadrature_tol)
    }

    /// Inverse of [`Self::exp_transform`]: bracketing bisection safeguarding
    /// Newton steps with `dv/du` as the derivative.
    ///
    /// With `λδ = 0` the transform is the identity on `[0, 1)` and values
    /// `v >= 1` are clamped to [`U_MAX`].
    pub fn u_of_exp(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::OutOfRange(format!("v = {v} must be finite and >= 0")));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        if self.ld() == 0.0 {
            return Ok(v.min(U_MAX));
        }
        // past the overflow point the transform is effectively infinite
        let residual = |u: f64| -> Result<f64> {
            if self.ld() / (1.0 - u) > MAX_EXPONENT {
                return Ok(f64::INFINITY);
            }
            Ok(self.integrate(u) - v)
        };

        // bracket: push the upper end towards 1 until the transform passes v
        let mut lo = 0.0;
        let mut hi = 0.5;
        let mut k = 1;
        loop {
            let r = residual(hi)?;
            if r >= 0.0 {
                break;
            }
            lo = hi;
            k += 1;
            if hi == U_MAX {
                return Ok(U_MAX);
            }
            hi = (1.0 - 10f64.powi(-k)).min(U_MAX);
        }

        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = residual(u)?;
            if r == 0.0 {
                return Ok(u);
            }
            if r < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u - r / self.exp_derivative(u);
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            let step = (next - u).abs();
            u = next;
            if step < self.root_tol || hi - lo < self.root_tol {
                return Ok(u);
            }
        }
        Err(Error::Numerical(format!("inverse exponential transform did not converge for v = {v}")))
    }

    /// `ρ(v) = exp(λδ/(1−u))/(1−u)²` with `u = u_of_exp(v)`.
    pub fn rho(&self, v: f64) -> Result<f64> {
        let u = self.u_of_exp(v)?;
        Ok(self.rho_of_u(u))
    }

    /// `ρ'(v) = (2 + λδ/(1−u))/(1−u)³`.
    pub fn rho_prime(&self, v: f64) -> Result<f64> {
        let u = self.u_of_exp(v)?;
        Ok(self.rho_prime_of_u(u))
    }

    /// `ρ''(v) = 2 exp(−λδ/(1−u)) (3 + 2λδ/(1−u))/(1−u)⁴`.
    pub fn rho_second(&self, v: f64) -> Result<f64> {
        let u = self.u_of_exp(v)?;
        Ok(self.rho_second_of_u(u))
    }

    pub fn rho_of_u(&self, u: f64) -> f64 {
        let g = 1.0 - u;
        (self.ld() / g).exp() / (g * g)
    }

    pub fn rho_prime_of_u(&self, u: f64) -> f64 {
        let g = 1.0 - u;
        (2.0 + self.ld() / g) / (g * g * g)
    }

    pub fn rho_second_of_u(&self, u: f64) -> f64 {
        let g = 1.0 - u;
        2.0 * (-self.ld() / g).exp() * (3.0 + 2.0 * self.ld() / g) / g.powi(4)
    }

    /// `∫_{v₀}^∞ ds/ρ(s) = (1 − u_of_exp(v₀))³/3`.
    pub fn rho_tail_integral(&self, v0: f64) -> Result<f64> {
        if !(v0 > 0.0) {
            return Err(Error::OutOfRange(format!("tail integral needs v0 > 0, got {v0}")));
        }
        let u0 = self.u_of_exp(v0)?;
        Ok((1.0 - u0).powi(3) / 3.0)
    }
}
