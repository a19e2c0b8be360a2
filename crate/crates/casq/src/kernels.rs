//! Scalar and dipole (vector) photon Green's functions.
//!
//! The scalar Helmholtz kernel is
//!
//! ```text
//! G(r_a, r_b; ω) = exp(i (ω/c) r) / r,        r = |r_a − r_b|
//! ```
//!
//! and the full dipole tensor obtained by acting with `(−∇²δ + ∇∇)` on
//! `exp(i(ω/c)r)/(2πr)` is
//!
//! ```text
//! G^{νν'} = −exp(i(ω/c)r)/(2πr³) · [ (δ − 3 r̂r̂)(1 − i(ω/c)r)
//!                                    − (δ − r̂r̂)(ω/c)² r² ]
//! ```
//!
//! with near (r⁻³), mid (r⁻²), and far (r⁻¹, purely transverse) terms.
//! Two normalization conventions are in circulation for these kernels
//! (per 1/(2πr) and per 1/r); [`Normalization`] selects, and all phase
//! statements are independent of the choice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{dot, norm, normalize, sub, ComplexTensor3, Vec3};
use crate::quad::sphere_quadrature_adaptive;

/// Kernel normalization: `Bare` = 1/r, `OverTwoPi` = 1/(2πr).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    OverTwoPi,
    Bare,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Speed of light (length/time); 1 in natural units.
    pub c: f64,
    /// Resonance regularization, same units as ω². Zero is allowed but
    /// makes the k-space kernel singular on shell.
    pub eta: f64,
    pub normalization: Normalization,
}

impl KernelConfig {
    pub fn new(c: f64, eta: f64, normalization: Normalization) -> Self {
        assert!(c > 0.0, "speed of light must be positive");
        assert!(eta >= 0.0, "eta must be non-negative");
        Self { c, eta, normalization }
    }

    /// Natural units, bare 1/r scalar kernel.
    pub fn scalar_default() -> Self {
        Self::new(1.0, 0.0, Normalization::Bare)
    }

    /// Natural units, 1/(2πr)-normalized tensor kernel.
    pub fn vector_default() -> Self {
        Self::new(1.0, 0.0, Normalization::OverTwoPi)
    }

    /// Default regularization used by the k-space kernel when none is set:
    /// small enough not to shift off-resonant values at reported tolerances,
    /// large enough to avoid overflow at resonance.
    pub fn default_eta(omega: f64) -> f64 {
        1e-6 * omega * omega
    }

    fn norm_factor(&self) -> f64 {
        match self.normalization {
            Normalization::Bare => 1.0,
            Normalization::OverTwoPi => 1.0 / (2.0 * std::f64::consts::PI),
        }
    }
}

/// Free-space scalar Helmholtz kernel `e^{i(ω/c)r}/r` (times the
/// normalization factor).
pub fn scalar_green(r_a: &Vec3, r_b: &Vec3, omega: f64, cfg: &KernelConfig) -> Result<Complex64> {
    let r = norm(&sub(r_a, r_b));
    if r <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let phase = Complex64::new(0.0, omega / cfg.c * r).exp();
    Ok(phase / r * cfg.norm_factor())
}

/// The three scale-separated pieces of the dipole tensor.
pub struct GreenTerms {
    /// r⁻³ static dipole-dipole term.
    pub near: ComplexTensor3,
    /// r⁻² intermediate term (carries a factor i).
    pub mid: ComplexTensor3,
    /// r⁻¹ radiative term; purely transverse (`far·r̂ = 0`).
    pub far: ComplexTensor3,
}

impl GreenTerms {
    pub fn total(&self) -> ComplexTensor3 {
        self.near.add(&self.mid).add(&self.far)
    }
}

/// Dipole tensor split into near/mid/far terms. `near + mid + far` equals
/// [`vector_green`] exactly.
pub fn vector_green_terms(
    r_a: &Vec3,
    r_b: &Vec3,
    omega: f64,
    cfg: &KernelConfig,
) -> Result<GreenTerms> {
    let d = sub(r_a, r_b);
    let r = norm(&d);
    if r <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let rhat = normalize(&d);
    let kr = omega / cfg.c * r;
    // 2π convention is the printed tensor form; Bare multiplies it back out.
    let scale = cfg.norm_factor() * 2.0 * std::f64::consts::PI;
    let pref = -Complex64::new(0.0, kr).exp() / (2.0 * std::f64::consts::PI * r.powi(3)) * scale;

    let mut near = ComplexTensor3::zero();
    let mut mid = ComplexTensor3::zero();
    let mut far = ComplexTensor3::zero();
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let aniso = delta - 3.0 * rhat[i] * rhat[j];
            let trans = delta - rhat[i] * rhat[j];
            near.entries[i][j] = pref * aniso;
            mid.entries[i][j] = pref * aniso * Complex64::new(0.0, -kr);
            far.entries[i][j] = pref * (-trans * kr * kr);
        }
    }
    Ok(GreenTerms { near, mid, far })
}

/// Full dipole photon Green's tensor G^{νν'}(r_a, r_b, ω).
pub fn vector_green(
    r_a: &Vec3,
    r_b: &Vec3,
    omega: f64,
    cfg: &KernelConfig,
) -> Result<ComplexTensor3> {
    Ok(vector_green_terms(r_a, r_b, omega, cfg)?.total())
}

/// Isotropic-limit k-space kernel
/// `(−4/3)·ω² / (ω² − k²c² + i·eta)`, the coefficient of δ_{νν'} for a
/// large homogeneous sample. The sign of the imaginary part at resonance
/// selects outgoing waves.
pub fn kspace_green_continuum(k: f64, omega: f64, cfg: &KernelConfig) -> Result<Complex64> {
    debug_assert!(k >= 0.0);
    let denom = Complex64::new(omega * omega - k * k * cfg.c * cfg.c, cfg.eta);
    if denom.norm() == 0.0 {
        return Err(Error::ResonanceSingularity);
    }
    Ok(Complex64::new(-4.0 / 3.0 * omega * omega, 0.0) / denom)
}

pub fn mirror_point(p: &Vec3) -> Vec3 {
    [p[0], p[1], -p[2]]
}

/// Scalar kernel in the half-space z ≥ 0 with a reflecting plane at z = 0:
/// the free-space term minus its image, so the kernel vanishes on the plane.
pub fn reflecting_green(
    r_a: &Vec3,
    r_b: &Vec3,
    omega: f64,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    if r_a[2] < 0.0 || r_b[2] < 0.0 {
        return Err(Error::InvalidHalfSpace);
    }
    let direct = scalar_green(r_a, r_b, omega, cfg)?;
    let image = scalar_green(r_a, &mirror_point(r_b), omega, cfg)?;
    Ok(direct - image)
}

/// Numerically integrates `∫dΩ (δ_{νν'} − k̂_ν k̂_ν') e^{i k_v k̂·r}` over the
/// unit sphere of mode directions k̂. Validation oracle for the mode-sum
/// identity: the result equals `4π·(−∇²δ + ∇∇) sin(k_v r)/(k_v³ r)`.
pub fn solid_angle_oracle(r: &Vec3, k_v: f64) -> Result<ComplexTensor3> {
    if norm(r) <= 0.0 || k_v <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let integrand = |khat: Vec3| -> ComplexTensor3 {
        let phase = Complex64::new(0.0, k_v * dot(&khat, r)).exp();
        let mut t = ComplexTensor3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                t.entries[i][j] = (delta - khat[i] * khat[j]) * phase;
            }
        }
        t
    };
    Ok(sphere_quadrature_adaptive(integrand, 1e-8, 12))
}

/// Finite-difference evaluation of the analytic side of the mode-sum
/// identity, `4π·(−∇²δ_{νν'} + ∇_ν∇_ν') sin(k_v r)/(k_v³ r)`, using
/// 4th-order central differences with step `h = 1e-3·r`.
pub fn solid_angle_analytic_fd(r: &Vec3, k_v: f64) -> Result<ComplexTensor3> {
    let rn = norm(r);
    if rn <= 0.0 || k_v <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let f = |p: &Vec3| -> f64 {
        let d = norm(p);
        // sin(kd)/(k³ d); regular at d → 0 but we never evaluate there.
        (k_v * d).sin() / (k_v.powi(3) * d)
    };
    let h = 1e-3 * rn;
    let d1 = |g: &dyn Fn(&Vec3) -> f64, p: &Vec3, axis: usize| -> f64 {
        let eval = |step: f64| {
            let mut q = *p;
            q[axis] += step;
            g(&q)
        };
        (-eval(2.0 * h) + 8.0 * eval(h) - 8.0 * eval(-h) + eval(-2.0 * h)) / (12.0 * h)
    };
    let d2_same = |p: &Vec3, axis: usize| -> f64 {
        let eval = |step: f64| {
            let mut q = *p;
            q[axis] += step;
            f(&q)
        };
        (-eval(2.0 * h) + 16.0 * eval(h) - 30.0 * eval(0.0) + 16.0 * eval(-h) - eval(-2.0 * h))
            / (12.0 * h * h)
    };
    let d2_mixed = |p: &Vec3, ax1: usize, ax2: usize| -> f64 {
        let inner = move |q: &Vec3| d1(&f, q, ax2);
        d1(&inner, p, ax1)
    };

    let lap = d2_same(r, 0) + d2_same(r, 1) + d2_same(r, 2);
    let mut t = ComplexTensor3::zero();
    for i in 0..3 {
        for j in 0..3 {
            let dd = if i == j { d2_same(r, i) } else { d2_mixed(r, i, j) };
            let delta = if i == j { 1.0 } else { 0.0 };
            let val = 4.0 * std::f64::consts::PI * (-lap * delta + dd);
            t.entries[i][j] = Complex64::new(val, 0.0);
        }
    }
    Ok(t)
}
