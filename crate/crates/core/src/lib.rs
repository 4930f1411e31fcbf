//! Three-phase finite-gap solutions of the focusing NLS, KP-I and Hirota
//! equations built on the symmetric genus-3 curve
//!
//! ```text
//! χ² = ((λ−λ0)⁴ − 2a²(λ−λ0)² cos2φ + a⁴)((λ−λ0)⁴ − 2b²(λ−λ0)² cos2φ + b⁴)
//! ```
//!
//! The curve covers three elliptic curves, so every transcendental object
//! (period matrix, theta function, wave vectors) reduces to elliptic data.
//! The crate is `no_std` and only needs `alloc`.
//!
//! Typical use goes through [`pipeline::solve`]:
//!
//! ```
//! use threephase_core::curve::CurveParams;
//! use threephase_core::pipeline::{solve, SolveOptions};
//! use threephase_core::solution::{eval_field, FieldKind, FieldRequest};
//!
//! let params = CurveParams::new(1.0 / 1.3, 1.3, 0.3 * core::f64::consts::PI, 0.0, 0.1).unwrap();
//! let sol = solve(&params, &SolveOptions::default()).unwrap();
//! let u = eval_field(&FieldRequest {
//!     field: FieldKind::KpiU,
//!     x: 0.0, z: 0.0, t: 0.0,
//!     wave: &sol.wave,
//!     eps: 1e-15,
//! }).unwrap();
//! assert!(u > 0.0);
//! ```

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curve;
pub mod error;
pub mod linalg;
pub mod periods;
pub mod pipeline;
pub mod quadrature;
pub mod solution;
pub mod theta;
pub mod verify;

pub use error::Error;
pub use num_complex::Complex64;

/// Reference parameter set: ab = 1, √(b/a) = 1.3, φ = 0.3π.
pub mod reference {
    use core::f64::consts::PI;

    pub const A: f64 = 1.0 / 1.3;
    pub const B: f64 = 1.3;
    pub const PHI: f64 = 0.3 * PI;
    pub const HIROTA_ALPHA: f64 = 0.1;
}
