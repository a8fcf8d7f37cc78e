//! Domains, uniform grids, nodal fields and the closed-form spectral and
//! torsion data of the slab and the disk.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::bisect;
use crate::special::bessel_j;

/// Applied voltage `λ` and fringing coefficient `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub delta: f64,
}

impl Params {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be finite and > 0, got {lambda}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be finite and >= 0, got {delta}")));
        }
        Ok(Self { lambda, delta })
    }

    /// The product `λδ` that controls the exponential transform.
    pub fn lambda_delta(&self) -> f64 {
        self.lambda * self.delta
    }

    /// Boundary and initial value `1/(3λ)` of the cubic-transformed field.
    pub fn zeta_boundary(&self) -> f64 {
        1.0 / (3.0 * self.lambda)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Slab,
    #[serde(alias = "disk")]
    RadialDisk,
}

/// The slab `[-a, a]` or the radially symmetric ball of radius `R` in `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    /// Half-width for the slab, radius for the disk.
    pub size: f64,
    pub dim: usize,
}

impl Domain {
    /// The slab `[-1/2, 1/2]`.
    pub fn slab() -> Self {
        Self { kind: DomainKind::Slab, size: 0.5, dim: 1 }
    }

    /// The unit disk in `ℝ²`.
    pub fn unit_disk() -> Self {
        Self { kind: DomainKind::RadialDisk, size: 1.0, dim: 2 }
    }

    pub fn new(kind: DomainKind, size: f64, dim: usize) -> Result<Self> {
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::InvalidParameter(format!("domain size must be > 0, got {size}")));
        }
        match kind {
            DomainKind::Slab if dim != 1 => {
                Err(Error::InvalidParameter(format!("slab requires dim = 1, got {dim}")))
            }
            DomainKind::RadialDisk if dim < 2 => {
                Err(Error::InvalidParameter(format!("radial disk requires dim >= 2, got {dim}")))
            }
            _ => Ok(Self { kind, size, dim }),
        }
    }

    /// Length of the discretized interval (`2a` for the slab, `R` for the disk).
    pub fn extent(&self) -> f64 {
        match self.kind {
            DomainKind::Slab => 2.0 * self.size,
            DomainKind::RadialDisk => self.size,
        }
    }

    /// Coordinate of the center: the symmetry point of the slab, `r = 0` for the disk.
    pub fn center(&self) -> f64 {
        0.0
    }

    /// Short lowercase label used in reports.
    pub fn label(&self) -> &'static str {
        match self.kind {
            DomainKind::Slab => "slab",
            DomainKind::RadialDisk => "disk",
        }
    }
}

/// Uniform node layout with both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub n_interior: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_radial(&self) -> bool {
        self.domain.kind == DomainKind::RadialDisk
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let start = self.nodes[0];
        let i = ((x - start) / self.h).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }
}

/// Builds the uniform grid with `n_interior` interior nodes.
pub fn build_grid(domain: Domain, n_interior: usize) -> Result<Grid> {
    if n_interior < 4 {
        return Err(Error::InvalidParameter(format!("grid needs at least 4 interior nodes, got {n_interior}")));
    }
    let (start, end) = match domain.kind {
        DomainKind::Slab => (-domain.size, domain.size),
        DomainKind::RadialDisk => (0.0, domain.size),
    };
    let intervals = n_interior + 1;
    let h = (end - start) / intervals as f64;
    let mut nodes: Vec<f64> = (0..=intervals).map(|i| start + i as f64 * h).collect();
    nodes[intervals] = end;
    Ok(Grid { domain, n_interior, h, nodes })
}

/// Nodal values at one time level.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// The initial cubic-transformed field `ζ ≡ 1/(3λ)`.
    pub fn initial_zeta(grid: Arc<Grid>, params: &Params) -> Self {
        let values = vec![params.zeta_boundary(); grid.len()];
        Self { grid, values, time: 0.0 }
    }

    /// Index and value of the smallest nodal value.
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
    }
}

/// First Dirichlet eigenpair of `-Δ`, with `φ₀` normalized to unit integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub domain: Domain,
    pub mu0: f64,
    /// Radial frequency: `π/(2a)` on the slab, `z₀/R` on the disk.
    freq: f64,
    amplitude: f64,
}

impl EigenPair {
    /// Evaluates `φ₀` at a node coordinate (`x` on the slab, `r` on the disk).
    pub fn phi0_at(&self, x: f64) -> f64 {
        match self.domain.kind {
            DomainKind::Slab => self.amplitude * (self.freq * (x + self.domain.size)).sin(),
            DomainKind::RadialDisk => {
                self.amplitude * bessel_j(0, self.freq * x).expect("argument within Bessel range")
            }
        }
    }

    /// `‖Δφ₀‖₁ = μ₀‖φ₀‖₁ = μ₀` since `φ₀ > 0` and `∫φ₀ = 1`.
    pub fn laplacian_l1(&self) -> f64 {
        self.mu0
    }
}

/// First positive zero of `J₀`, located by bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    bisect(|x| bessel_j(0, x).expect("x in [2, 3]"), 2.0, 3.0, 1e-13).expect("J0 changes sign on [2, 3]")
}

pub fn eigenpair(domain: &Domain) -> Result<EigenPair> {
    match domain.kind {
        DomainKind::Slab => {
            let width = 2.0 * domain.size;
            let freq = PI / width;
            // ∫ sin(freq (x + a)) dx over the slab is 2/freq
            Ok(EigenPair { domain: *domain, mu0: freq * freq, freq, amplitude: freq / 2.0 })
        }
        DomainKind::RadialDisk if domain.dim == 2 => {
            let z0 = bessel_j0_first_zero();
            let radius = domain.size;
            let j1 = bessel_j(1, z0)?;
            // 2π ∫₀ᴿ J₀(z₀ r/R) r dr = 2π R² J₁(z₀)/z₀
            let amplitude = z0 / (2.0 * PI * radius * radius * j1);
            Ok(EigenPair { domain: *domain, mu0: (z0 / radius).powi(2), freq: z0 / radius, amplitude })
        }
        DomainKind::RadialDisk => Err(Error::UnsupportedDomain(format!(
            "closed-form eigenpair only for the 2D disk, got dim = {}",
            domain.dim
        ))),
    }
}

/// Torsion function `ξ`: `-Δξ = 1` in Ω, `ξ = 0` on ∂Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionSolution {
    pub domain: Domain,
    pub xi_sup: f64,
    pub lap_xi_sup: f64,
}

impl TorsionSolution {
    pub fn xi_at(&self, x: f64) -> f64 {
        let a2 = self.domain.size * self.domain.size;
        (a2 - x * x) / (2.0 * self.domain.dim as f64)
    }
}

pub fn torsion(domain: &Domain) -> TorsionSolution {
    let a2 = domain.size * domain.size;
    TorsionSolution { domain: *domain, xi_sup: a2 / (2.0 * domain.dim as f64), lap_xi_sup: 1.0 }
}

/// Integral of nodal `values` over the domain: composite Simpson on the
/// grid, with the radial measure `|S^{n-1}| r^{n-1}` on the disk.
pub fn integrate_over_domain(grid: &Grid, values: &[f64]) -> f64 {
    match grid.domain.kind {
        DomainKind::Slab => simpson_uniform(values, grid.h),
        DomainKind::RadialDisk => {
            let n = grid.domain.dim;
            let weighted: Vec<f64> =
                grid.nodes.iter().zip(values).map(|(r, v)| v * r.powi(n as i32 - 1)).collect();
            sphere_area(n) * simpson_uniform(&weighted, grid.h)
        }
    }
}

/// Surface measure of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals closes with the Simpson 3/8 rule on the last three.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let intervals = values.len().saturating_sub(1);
    match intervals {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let (even_end, tail) = if intervals.is_multiple_of(2) { (intervals, 0.0) } else {
                let k = intervals - 3;
                let t = 3.0 * h / 8.0 * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
                (k, t)
            };
            let mut sum = values[0] + values[even_end];
            for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
                sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * sum + tail
        }
    }
}
