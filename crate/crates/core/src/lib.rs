//! Numerical laboratory for the MEMS evolution problem with a fringing field,
//!
//! ```text
//! u_t = Δu + λ (1 + δ|∇u|²) / (1 − u)²,   u = 0 on ∂Ω,   u(x, 0) = 0,
//! ```
//!
//! on the slab `[-1/2, 1/2]` and on radially symmetric disks. The crate covers
//! the changes of variable the problem is analysed in, explicit time stepping
//! of the cubic-transformed equation with quench detection, pull-in voltages by
//! shooting on the radial stationary problem, closed-form bounds, and
//! post-processing of quenching runs in similarity variables.

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod numerics;
pub mod special;
pub mod stationary;
pub mod transforms;

pub use error::{Error, Result};
pub use evolution::{OutcomeKind, QuenchOutcome, RunConfig};
pub use geometry::{Domain, DomainKind, EigenPair, Field, Grid, Params, TorsionSolution};
pub use stationary::PullInResult;

