//! Continuum evaluation of the integrated Green's function
//! `I(r_a, k_b, ω_b) = ∫_V dr_b exp(i k_b·(r_b − r_a)) G(r_a, r_b; ω_b)`
//! for three geometry cases, with the scalar kernel:
//!
//! * case 3D — convex region, size ≫ wavelength, poor matching: `I` is real
//!   (in phase), bulk value `−4π/((ω/c)² − k²)`.
//! * case 2D — convex planar region: `I` is imaginary (π/2 out of phase),
//!   bulk value `−i/√((ω/c)² − k²)` in the contour-average convention of the
//!   closed form (see [`PLANAR_SUM_TO_CASE2`]).
//! * cylinder on a reflecting plane, k_b ⊥ plane, good matching:
//!   `I ≈ 2πi(c/ω) z_a exp(i k_b z_a)`.
//!
//! The radial integrals are exact differentials in the inhomogeneous
//! coordinates and are always done analytically; only angular (and axial)
//! integrals are numerical. Each result splits into the slowly-varying bulk
//! `value` and the fast-oscillating boundary remainder `boundary_term`,
//! which stationary phase shows is suppressed by (size·ω/c)^(−1/2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use crate::discrete::BeamSet;
use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, RegionKind};
use crate::kernels::{KernelConfig, Normalization};
use crate::math::Vec3;
use crate::quad::{gl_integrate_adaptive, periodic_trapezoid_adaptive, sphere_quadrature};

/// Relates the raw in-plane sum/integral of the bare kernel to the case-2D
/// closed form: `analytic_2d = PLANAR_SUM_TO_CASE2 × ∫_disk e^{ik·Δ}e^{iAρ}/ρ`.
/// The closed form is the angular contour average and carries this constant
/// relative to the plain surface integral.
pub const PLANAR_SUM_TO_CASE2: f64 = -1.0 / (2.0 * PI);

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub angular_order: usize,
    pub radial_order: usize,
    pub refinement_tol: f64,
    pub max_refinements: usize,
}

impl QuadratureSpec {
    pub fn new(
        angular_order: usize,
        radial_order: usize,
        refinement_tol: f64,
        max_refinements: usize,
    ) -> Result<Self> {
        if angular_order < 4 || radial_order < 4 {
            return Err(Error::config("quadrature", "orders must be ≥ 4"));
        }
        if !(refinement_tol > 0.0) {
            return Err(Error::config("quadrature", "refinement_tol must be > 0"));
        }
        Ok(Self { angular_order, radial_order, refinement_tol, max_refinements })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { angular_order: 64, radial_order: 32, refinement_tol: 1e-10, max_refinements: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Convex3D,
    Convex2D,
    Cylinder,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuumResult {
    /// Bulk (slowly varying) part of I.
    pub value: Complex64,
    /// The neglected fast-oscillating boundary part, evaluated numerically.
    pub boundary_term: Complex64,
    /// Richardson estimate of the quadrature error in `value`.
    pub est_error: f64,
    pub case: CaseKind,
}

/// sinc(x) = sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Infinite-medium 3D bulk value `−4π/((ω/c)² − k²)`; purely real (in phase).
pub fn analytic_3d(k_b: f64, omega_b: f64, c: f64) -> Result<Complex64> {
    let a = omega_b / c;
    if k_b == a {
        return Err(Error::ResonanceSingularity);
    }
    Ok(Complex64::new(-4.0 * PI / (a * a - k_b * k_b), 0.0))
}

/// Large-disk 2D bulk value `−i/√((ω/c)² − k²)`; purely imaginary
/// (π/2 out of phase).
pub fn analytic_2d(k_b: f64, omega_b: f64, c: f64) -> Result<Complex64> {
    let a = omega_b / c;
    if k_b >= a {
        return Err(Error::ResonanceSingularity);
    }
    Ok(Complex64::new(0.0, -1.0 / (a * a - k_b * k_b).sqrt()))
}

/// Phase-matched cylinder value `2πi(c/ω) z_a exp(i k_b z_a)`.
pub fn analytic_cylinder_matched(z_a: f64, k_b: f64, omega_b: f64, c: f64) -> Complex64 {
    debug_assert!(z_a > 0.0);
    Complex64::new(0.0, 2.0 * PI * c / omega_b * z_a) * Complex64::new(0.0, k_b * z_a).exp()
}

fn norm_scale(cfg: &KernelConfig) -> f64 {
    match cfg.normalization {
        Normalization::Bare => 1.0,
        Normalization::OverTwoPi => 1.0 / (2.0 * PI),
    }
}

fn warn_if_near_boundary(min_dist: f64, omega: f64, c: f64, case: &str) {
    let wavelength = 2.0 * PI * c / omega;
    if min_dist < wavelength {
        log::warn!(
            "{case}: observation point within one wavelength of the boundary \
             (dist = {min_dist:.3e}, λ = {wavelength:.3e}); asymptotics degrade"
        );
    }
}

/// Case 3D: convex region, `|k_b| < ω_b/c`. The radial integral is exact per
/// direction; `value` is the shape-independent bulk angular integral
/// `−∫dΩ/α(n)²` and `boundary_term` the oscillatory surface integral
/// `∫dΩ (1/α² − i d(n)/α) e^{i d(n) α}` with `d(n)` the boundary distance
/// from r_a and `α(n) = ω/c + k_b·n`.
pub fn integrate_case_3d(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    q: &QuadratureSpec,
    cfg: &KernelConfig,
) -> Result<ContinuumResult> {
    if region.kind != RegionKind::Ball3D {
        return Err(Error::KindMismatch { expected: "ball3d", got: region.kind.name() });
    }
    let a = beams.omega_b / cfg.c;
    let k = crate::math::norm(&beams.k_b);
    if k >= a {
        return Err(Error::PreconditionViolated(format!(
            "case 3D needs |k_b| < ω_b/c (got k = {k}, ω/c = {a})"
        )));
    }
    if !region.contains(r_a) {
        return Err(Error::OutsideRegion);
    }

    let alpha = |n: Vec3| a + crate::math::dot(&beams.k_b, &n);

    // Bulk: shape-independent, real.
    let eval_bulk = |order: usize| {
        sphere_quadrature(|n| Complex64::new(-1.0 / alpha(n).powi(2), 0.0), order, 2 * order)
    };
    let mut order = q.angular_order.max(8);
    let mut bulk = eval_bulk(order);
    let mut est = f64::INFINITY;
    for _ in 0..q.max_refinements {
        order *= 2;
        let fine = eval_bulk(order);
        est = (fine - bulk).norm();
        bulk = fine;
        if est <= q.refinement_tol * fine.norm().max(1e-300) {
            break;
        }
    }

    // Boundary: oscillation scale d·α ~ R ω/c per node; resolve it.
    let min_dist = Cell::new(f64::INFINITY);
    let dist_err: RefCell<Option<Error>> = RefCell::new(None);
    let osc = (region.size_r * (a + k)).ceil() as usize;
    let b_order = q.angular_order.max(osc / 2).max(16);
    let boundary = sphere_quadrature(
        |n| {
            if dist_err.borrow().is_some() {
                return Complex64::ZERO;
            }
            match region.boundary_distance(r_a, &n) {
                Ok(d) => {
                    min_dist.set(min_dist.get().min(d));
                    let al = alpha(n);
                    let radial = Complex64::new(1.0 / (al * al), -d / al);
                    radial * Complex64::new(0.0, d * al).exp()
                }
                Err(e) => {
                    *dist_err.borrow_mut() = Some(e);
                    Complex64::ZERO
                }
            }
        },
        b_order,
        2 * b_order,
    );
    if let Some(e) = dist_err.into_inner() {
        return Err(e);
    }
    warn_if_near_boundary(min_dist.get(), beams.omega_b, cfg.c, "case 3D");

    let s = norm_scale(cfg);
    Ok(ContinuumResult {
        value: bulk * s,
        boundary_term: boundary * s,
        est_error: est * s,
        case: CaseKind::Convex3D,
    })
}

/// Case 2D: convex planar region, in-plane `|k_∥| < ω_b/c`. Radial integral
/// exact per azimuth; `value` is the contour-average bulk
/// `−(i/2π)∫dφ/α(φ)` and `boundary_term` the oscillatory remainder
/// `+(i/2π)∫dφ e^{i α(φ) d(φ)}/α(φ)`.
pub fn integrate_case_2d(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    q: &QuadratureSpec,
    cfg: &KernelConfig,
) -> Result<ContinuumResult> {
    if region.kind != RegionKind::Disk2D {
        return Err(Error::KindMismatch { expected: "disk2d", got: region.kind.name() });
    }
    let a = beams.omega_b / cfg.c;
    let k_par = [beams.k_b[0], beams.k_b[1]];
    let k = (k_par[0] * k_par[0] + k_par[1] * k_par[1]).sqrt();
    if k >= a {
        return Err(Error::PreconditionViolated(format!(
            "case 2D needs in-plane |k_b| < ω_b/c (got k = {k}, ω/c = {a})"
        )));
    }
    if !region.contains(r_a) {
        return Err(Error::OutsideRegion);
    }

    let alpha = |phi: f64| a + k_par[0] * phi.cos() + k_par[1] * phi.sin();

    let (bulk, est) = periodic_trapezoid_adaptive(
        |phi| Complex64::new(0.0, -1.0 / (2.0 * PI)) / alpha(phi),
        q.angular_order.max(8),
        q.refinement_tol,
        q.max_refinements,
    );

    let min_dist = Cell::new(f64::INFINITY);
    let dist_err: RefCell<Option<Error>> = RefCell::new(None);
    let from_xy = [r_a[0], r_a[1]];
    let osc = (region.size_r * (a + k)).ceil() as usize;
    let (boundary, _best) = periodic_trapezoid_adaptive(
        |phi| {
            if dist_err.borrow().is_some() {
                return Complex64::ZERO;
            }
            match region.cross_section_distance(&from_xy, phi) {
                Ok(d) => {
                    min_dist.set(min_dist.get().min(d));
                    let al = alpha(phi);
                    Complex64::new(0.0, 1.0 / (2.0 * PI)) / al
                        * Complex64::new(0.0, al * d).exp()
                }
                Err(e) => {
                    *dist_err.borrow_mut() = Some(e);
                    Complex64::ZERO
                }
            }
        },
        q.angular_order.max(4 * osc).max(32),
        q.refinement_tol,
        q.max_refinements.min(4),
    );
    if let Some(e) = dist_err.into_inner() {
        return Err(e);
    }
    warn_if_near_boundary(min_dist.get(), beams.omega_b, cfg.c, "case 2D");

    let s = norm_scale(cfg);
    Ok(ContinuumResult {
        value: bulk * s,
        boundary_term: boundary * s,
        est_error: est * s,
        case: CaseKind::Convex2D,
    })
}

/// Per-slab principal parts of the cylinder integral: the cross-section
/// integral at height z contributes `2πi(c/ω) e^{ikz}(e^{iA|z−z_a|} −
/// e^{iA(z+z_a)})`, and the z-integral of the three pieces has exact sinc
/// closed forms. The result carries the absolute phase convention
/// `∫ dr_b e^{i k_b·r_b} G` (equal to the relative convention times
/// `e^{i k_b z_a}`), which is the convention of the matched closed form.
fn cylinder_sinc_terms(z_a: f64, l: f64, k: f64, a: f64, c_over_w: f64) -> [Complex64; 3] {
    let pref = Complex64::new(0.0, 2.0 * PI * c_over_w);
    // lower slab 0..z_a: e^{iAz_a} ∫₀^{z_a} e^{i(k−A)z} dz
    let t1 = pref
        * Complex64::new(0.0, a * z_a).exp()
        * Complex64::new(0.0, (k - a) * z_a / 2.0).exp()
        * (z_a * sinc((k - a) * z_a / 2.0));
    // upper slab z_a..l: e^{−iAz_a} ∫_{z_a}^{l} e^{i(k+A)z} dz
    let t2 = pref
        * Complex64::new(0.0, -a * z_a).exp()
        * Complex64::new(0.0, (k + a) * (l + z_a) / 2.0).exp()
        * ((l - z_a) * sinc((k + a) * (l - z_a) / 2.0));
    // image (reflecting surface): −e^{iAz_a} ∫₀^{l} e^{i(k+A)z} dz
    let t3 = -pref
        * Complex64::new(0.0, a * z_a).exp()
        * Complex64::new(0.0, (k + a) * l / 2.0).exp()
        * (l * sinc((k + a) * l / 2.0));
    [t1, t2, t3]
}

/// Case cylinder-on-reflecting-plane with k_b ⊥ plane. `value` is the sum of
/// the three sinc-structured slab contributions; `boundary_term` is the
/// fast-oscillating cross-section remainder evaluated by z × φ quadrature.
pub fn integrate_cylinder(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    q: &QuadratureSpec,
    cfg: &KernelConfig,
) -> Result<ContinuumResult> {
    let parts = cylinder_parts(region, r_a, beams, cfg)?;
    let CylinderSetup { z_a, l, k, a, c_over_w, .. } = parts;
    let [t1, t2, t3] = cylinder_sinc_terms(z_a, l, k, a, c_over_w);
    let value = t1 + t2 + t3;

    // Remainder: ∫₀^l dz i(c/ω) e^{ikz} ∫dφ [e^{iA√(d(φ)²+(z+z_a)²)} − e^{iA√(d(φ)²+(z−z_a)²)}].
    // The cross-section profile d(φ) is z-independent, so tabulate it once.
    let from_xy = [r_a[0], r_a[1]];
    let osc = (region.size_r * a).ceil() as usize;
    let phi_order = q.angular_order.max(4 * osc).max(64);
    let mut profile = Vec::with_capacity(phi_order);
    for j in 0..phi_order {
        let phi = 2.0 * PI * j as f64 / phi_order as f64;
        profile.push(region.cross_section_distance(&from_xy, phi)?);
    }
    let cross = |z: f64| -> Complex64 {
        let mut ring = Complex64::ZERO;
        for d in &profile {
            let rho_m = (d * d + (z - z_a).powi(2)).sqrt();
            let rho_s = (d * d + (z + z_a).powi(2)).sqrt();
            ring += Complex64::new(0.0, a * rho_s).exp() - Complex64::new(0.0, a * rho_m).exp();
        }
        ring *= 2.0 * PI / phi_order as f64;
        Complex64::new(0.0, c_over_w) * Complex64::new(0.0, k * z).exp() * ring
    };
    // Split at the |z − z_a| kink.
    let (b1, e1) = gl_integrate_adaptive(&cross, 0.0, z_a, q.radial_order.max(16), 1e-8, 8);
    let (b2, e2) = gl_integrate_adaptive(&cross, z_a, l, q.radial_order.max(16), 1e-8, 8);
    warn_if_near_boundary(z_a.min(l - z_a), beams.omega_b, cfg.c, "cylinder");

    let s = norm_scale(cfg);
    Ok(ContinuumResult {
        value: value * s,
        boundary_term: (b1 + b2) * s,
        est_error: (e1 + e2) * s,
        case: CaseKind::Cylinder,
    })
}

/// Reflecting-surface (image) share of the cylinder value: |t3| / |t1+t2+t3|.
pub fn cylinder_reflecting_fraction(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    cfg: &KernelConfig,
) -> Result<f64> {
    let p = cylinder_parts(region, r_a, beams, cfg)?;
    let [t1, t2, t3] = cylinder_sinc_terms(p.z_a, p.l, p.k, p.a, p.c_over_w);
    Ok(t3.norm() / (t1 + t2 + t3).norm())
}

/// Oracle path: numeric z-quadrature of the per-slab principal parts, for
/// cross-checking the sinc closed forms.
pub fn integrate_cylinder_numeric_z(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    q: &QuadratureSpec,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    let p = cylinder_parts(region, r_a, beams, cfg)?;
    let integrand = |z: f64| -> Complex64 {
        let pref = Complex64::new(0.0, 2.0 * PI * p.c_over_w);
        let m = Complex64::new(0.0, p.a * (z - p.z_a).abs()).exp();
        let s = Complex64::new(0.0, p.a * (z + p.z_a)).exp();
        pref * Complex64::new(0.0, p.k * z).exp() * (m - s)
    };
    let (i1, _) = gl_integrate_adaptive(&integrand, 0.0, p.z_a, q.radial_order.max(16), 1e-12, 14);
    let (i2, _) = gl_integrate_adaptive(&integrand, p.z_a, p.l, q.radial_order.max(16), 1e-12, 14);
    Ok((i1 + i2) * norm_scale(cfg))
}

struct CylinderSetup {
    z_a: f64,
    l: f64,
    k: f64,
    a: f64,
    c_over_w: f64,
}

fn cylinder_parts(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    cfg: &KernelConfig,
) -> Result<CylinderSetup> {
    if region.kind != RegionKind::CylinderOnPlane {
        return Err(Error::KindMismatch { expected: "cylinder_on_plane", got: region.kind.name() });
    }
    let k_mag = crate::math::norm(&beams.k_b);
    let transverse = (beams.k_b[0].powi(2) + beams.k_b[1].powi(2)).sqrt();
    if transverse > 1e-9 * k_mag.max(1e-300) {
        return Err(Error::PreconditionViolated(
            "cylinder case needs k_b directed along ẑ".into(),
        ));
    }
    if !region.contains(r_a) {
        return Err(Error::OutsideRegion);
    }
    let z_a = r_a[2] - region.center_r0[2];
    let l = region.thickness_l;
    if !(z_a > 0.0 && z_a < l) {
        return Err(Error::PreconditionViolated(format!(
            "need 0 < z_a < l (z_a = {z_a}, l = {l})"
        )));
    }
    Ok(CylinderSetup {
        z_a,
        l,
        k: beams.k_b[2],
        a: beams.omega_b / cfg.c,
        c_over_w: cfg.c / beams.omega_b,
    })
}

/// One stationary point of the boundary phase.
#[derive(Debug, Clone, Copy)]
pub struct SaddlePoint {
    pub phi: f64,
    pub action: f64,
    pub curvature: f64,
}

/// Stationary-phase estimate of the 2D boundary term I₁. The phase is
/// `S(φ) = α(φ)·d(φ)` with `d` the boundary distance from r_a; every
/// nondegenerate stationary point contributes
/// `i·(2π|S″|)^{−1/2}·α(φ₀)^{−1}·e^{i(S(φ₀) + sgn(S″)π/4)}` and the
/// contributions are summed.
pub fn boundary_saddle_estimate(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    let saddles = find_boundary_saddles(region, r_a, beams, cfg)?;
    let a = beams.omega_b / cfg.c;
    let k_par = [beams.k_b[0], beams.k_b[1]];
    let alpha = |phi: f64| a + k_par[0] * phi.cos() + k_par[1] * phi.sin();
    let mut total = Complex64::ZERO;
    for s in &saddles {
        let amp = 1.0 / (2.0 * PI * s.curvature.abs()).sqrt() / alpha(s.phi);
        let phase = s.action + s.curvature.signum() * PI / 4.0;
        total += Complex64::new(0.0, 1.0) * amp * Complex64::new(0.0, phase).exp();
    }
    Ok(total * norm_scale(cfg))
}

/// Locate the stationary points of S(φ) by dense scan + bisection on dS/dφ.
pub fn find_boundary_saddles(
    region: &ConvexRegion,
    r_a: &Vec3,
    beams: &BeamSet,
    cfg: &KernelConfig,
) -> Result<Vec<SaddlePoint>> {
    if region.kind != RegionKind::Disk2D {
        return Err(Error::KindMismatch { expected: "disk2d", got: region.kind.name() });
    }
    if !region.contains(r_a) {
        return Err(Error::OutsideRegion);
    }
    let a = beams.omega_b / cfg.c;
    let k_par = [beams.k_b[0], beams.k_b[1]];
    let from_xy = [r_a[0], r_a[1]];
    let action = |phi: f64| -> Result<f64> {
        let alpha = a + k_par[0] * phi.cos() + k_par[1] * phi.sin();
        Ok(alpha * region.cross_section_distance(&from_xy, phi)?)
    };
    let n_scan = 1024usize;
    let h = 2.0 * PI / n_scan as f64;
    let mut s_vals = Vec::with_capacity(n_scan);
    for i in 0..n_scan {
        s_vals.push(action(i as f64 * h)?);
    }
    let s_max = s_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s_min = s_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if s_max - s_min < 1e-10 * s_max.abs().max(1.0) {
        // dS/dφ ≡ 0: every angle is stationary.
        return Err(Error::DegenerateSaddle);
    }
    let ds = |phi: f64| -> Result<f64> {
        let dh = 1e-5;
        Ok((action(phi + dh)? - action(phi - dh)?) / (2.0 * dh))
    };
    let mut saddles = Vec::new();
    for i in 0..n_scan {
        let (p0, p1) = (i as f64 * h, (i as f64 + 1.0) * h);
        let (d0, d1) = (ds(p0)?, ds(p1)?);
        if d0 == 0.0 || d0 * d1 >= 0.0 {
            if d0 == 0.0 {
                saddles.push(p0);
            }
            continue;
        }
        let (mut lo, mut hi) = (p0, p1);
        let (mut dlo, _) = (d0, d1);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let dm = ds(mid)?;
            if dm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if dlo * dm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                dlo = dm;
            }
        }
        saddles.push(0.5 * (lo + hi));
    }
    if saddles.is_empty() {
        return Err(Error::SaddleNotFound);
    }
    let mut out = Vec::new();
    for phi0 in saddles {
        let dh = 1e-4;
        let s0 = action(phi0)?;
        let curv = (action(phi0 + dh)? - 2.0 * s0 + action(phi0 - dh)?) / (dh * dh);
        if curv.abs() < 1e-8 * s0.abs().max(1.0) {
            return Err(Error::DegenerateSaddle);
        }
        out.push(SaddlePoint { phi: phi0.rem_euclid(2.0 * PI), action: s0, curvature: curv });
    }
    Ok(out)
}
