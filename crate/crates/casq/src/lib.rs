//! Photon Green's functions, geometric integrals, and form factors for
//! predicting the relative phase and magnitude of cascading versus direct
//! nonlinear-optical signals.
//!
//! A cascading signal is a sequential process: the polarization emitted by
//! one molecule drives another, producing a contribution with the same phase
//! matching as the direct signal but quadratic scaling in molecule number.
//! Whether that contribution is in phase or π/2 out of phase with the direct
//! signal is controlled entirely by a geometric factor, the integrated photon
//! Green's function
//!
//! ```text
//! I(r_a, k_b, ω_b) = Σ_b exp(i k_b·(r_b − r_a)) G(r_a, r_b; ω_b)
//! ```
//!
//! summed over source molecules b (or integrated over a continuum region).
//! This crate evaluates that factor for explicit point clouds
//! ([`discrete`]), for large convex continuum regions in 3D, 2D, and
//! reflecting-plane cylinder geometries ([`continuum`]), and assembles the
//! heterodyne signal and phase decomposition from pluggable molecular
//! response models ([`signal`]).

pub mod continuum;
pub mod discrete;
pub mod error;
pub mod export;
pub mod geometry;
pub mod kernels;
pub mod math;
pub mod quad;
pub mod signal;

pub use error::{Error, Result};
pub use math::{ComplexTensor3, Vec3};
