//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Power series for `|x| <= 12`, Hankel asymptotic expansion beyond.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;
const MAX_ARGUMENT: f64 = 50.0;

/// `J_order(x)` for `order ∈ {0, 1}` and `|x| <= 50`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::OutOfRange(format!("Bessel order {order} not supported")));
    }
    if !(x.abs() <= MAX_ARGUMENT) {
        return Err(Error::OutOfRange(format!("Bessel argument {x} outside [-50, 50]")));
    }
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT { series(order, ax) } else { hankel(order, ax) };
    // J0 is even, J1 is odd
    Ok(if order == 1 && x < 0.0 { -value } else { value })
}

fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let nu = order as f64;
    for k in 1..200 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    let (mut p, mut q) = (0.0, 0.0);
    // a_k / x^k with a_k = Π_{j<=k} (μ - (2j-1)²) / (k! 8^k)
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
