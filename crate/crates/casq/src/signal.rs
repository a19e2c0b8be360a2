//! Assembles direct and cascading polarizations from a pluggable molecular
//! response model and the geometry engines, and reports their relative
//! phase.
//!
//! The direct term is `P(k_a, ω_s)·f(k_a − k_s)`; the cascading term is the
//! contraction of `P̃(k_a, ω_s; −ω_b)` with `P(k_b, ω_b)` through the
//! geometric factor `Σ_a e^{i(k_a+k_b−k_s)·r_a}·I(r_a, k_b, ω_b)`. With an
//! off-resonant (real) response the relative phase of the two terms is
//! carried entirely by the geometric factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::continuum::{
    integrate_case_2d, integrate_case_3d, integrate_cylinder, QuadratureSpec,
};
use crate::discrete::{
    form_factor, integrated_green_discrete, BeamSet, KernelKind, SumOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, MoleculeCloud, RegionKind};
use crate::kernels::KernelConfig;
use crate::math::{dot, norm, sub, ComplexTensor3, KahanSum, Vec3};
use crate::quad::{gauss_legendre, periodic_trapezoid};

pub type CVec3 = [Complex64; 3];

/// Molecular response model: `P(k, ω)` is the polarization amplitude of a
/// single molecule and `P̃(k, ω; ω')` the polarization from one perturbative
/// interaction with a neighbour's field. The shipped models are a constant
/// real (off-resonant) susceptibility pair and a single Lorentzian for
/// demonstrating resonant phase contamination.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ResponseModel {
    OffResonant {
        chi: f64,
        chi_tilde: f64,
        /// Polarization unit vector of the emitted response.
        polarization: Vec3,
    },
    Lorentzian {
        chi: f64,
        chi_tilde: f64,
        omega0: f64,
        gamma: f64,
        polarization: Vec3,
    },
}

impl ResponseModel {
    pub fn off_resonant(chi: f64, chi_tilde: f64) -> Self {
        ResponseModel::OffResonant { chi, chi_tilde, polarization: [1.0, 0.0, 0.0] }
    }

    fn susceptibility(&self, omega: f64) -> Result<Complex64> {
        match self {
            ResponseModel::OffResonant { chi, .. } => Ok(Complex64::new(*chi, 0.0)),
            ResponseModel::Lorentzian { chi, omega0, gamma, .. } => {
                let denom = Complex64::new(omega0 * omega0 - omega * omega, -gamma * omega);
                if denom.norm() == 0.0 {
                    return Err(Error::ResponseDomainError(format!(
                        "Lorentzian response singular at ω = {omega} (γ = 0)"
                    )));
                }
                Ok(Complex64::new(chi * omega0 * omega0, 0.0) / denom)
            }
        }
    }

    fn tilde_susceptibility(&self, omega: f64) -> Result<Complex64> {
        match self {
            ResponseModel::OffResonant { chi_tilde, .. } => Ok(Complex64::new(*chi_tilde, 0.0)),
            ResponseModel::Lorentzian { chi_tilde, omega0, gamma, .. } => {
                let denom = Complex64::new(omega0 * omega0 - omega * omega, -gamma * omega);
                if denom.norm() == 0.0 {
                    return Err(Error::ResponseDomainError(format!(
                        "Lorentzian response singular at ω = {omega} (γ = 0)"
                    )));
                }
                Ok(Complex64::new(chi_tilde * omega0 * omega0, 0.0) / denom)
            }
        }
    }

    pub fn polarization_dir(&self) -> Vec3 {
        match self {
            ResponseModel::OffResonant { polarization, .. }
            | ResponseModel::Lorentzian { polarization, .. } => *polarization,
        }
    }

    /// Single-molecule polarization amplitude P(k, ω).
    pub fn p(&self, _k: &Vec3, omega: f64) -> Result<CVec3> {
        let chi = self.susceptibility(omega)?;
        let e = self.polarization_dir();
        Ok([chi * e[0], chi * e[1], chi * e[2]])
    }

    /// Neighbour-driven polarization tensor P̃(k, ω; ω').
    pub fn p_tilde(&self, _k: &Vec3, omega: f64, _omega_prime: f64) -> Result<ComplexTensor3> {
        Ok(ComplexTensor3::diagonal(self.tilde_susceptibility(omega)?))
    }
}

/// Sample representation handed to the polarization assemblers.
#[derive(Debug, Clone)]
pub enum SampleModel {
    Cloud(MoleculeCloud),
    Region {
        region: ConvexRegion,
        /// Molecular concentration: per volume (3D/cylinder) or per area (2D).
        concentration: f64,
        /// Observation molecule; defaults to the region center (cylinder:
        /// mid-height on the axis).
        probe: Option<Vec3>,
    },
}

impl SampleModel {
    fn name(&self) -> &'static str {
        match self {
            SampleModel::Cloud(_) => "cloud",
            SampleModel::Region { .. } => "region",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    DiscreteSum,
    Continuum3D,
    Continuum2D,
    ContinuumCylinder,
}

impl Engine {
    fn name(&self) -> &'static str {
        match self {
            Engine::DiscreteSum => "discrete_sum",
            Engine::Continuum3D => "continuum_3d",
            Engine::Continuum2D => "continuum_2d",
            Engine::ContinuumCylinder => "continuum_cylinder",
        }
    }
}

/// Magnitude, argument, and in/out-of-phase decomposition of the cascading
/// signal relative to the direct one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseReport {
    pub direct: [[f64; 2]; 3],
    pub cascade: [[f64; 2]; 3],
    /// arg(cascade/direct) of the dominant Cartesian component, in (−π, π].
    pub rel_phase: f64,
    pub in_phase_frac: f64,
    pub out_phase_frac: f64,
}

/// `f(k)` for a continuum region: `n·∫_V e^{ik·r} dr`. Equals N at k = 0 and
/// is sinc-suppressed away from the matching point.
pub fn region_form_factor(region: &ConvexRegion, concentration: f64, k: &Vec3) -> Complex64 {
    let k_mag = norm(k);
    match region.kind {
        RegionKind::Ball3D => {
            if let crate::geometry::ShapeFn::Unit = region.xi {
                let r = region.size_r;
                let v = if k_mag * r < 1e-8 {
                    4.0 / 3.0 * PI * r.powi(3)
                } else {
                    let kr = k_mag * r;
                    4.0 * PI * (kr.sin() - kr * kr.cos()) / k_mag.powi(3)
                };
                let phase = Complex64::new(0.0, dot(k, &region.center_r0)).exp();
                return phase * v * concentration;
            }
            region_fourier_numeric(region, k) * concentration
        }
        RegionKind::Disk2D | RegionKind::CylinderOnPlane => {
            region_fourier_numeric(region, k) * concentration
        }
    }
}

/// Numeric `∫_V e^{ik·r} dr` over the region using the homogeneous measures.
fn region_fourier_numeric(region: &ConvexRegion, k: &Vec3) -> Complex64 {
    let c = region.center_r0;
    let r_scale = region.size_r;
    let nr = 48;
    let (rx, rw) = gauss_legendre(nr);
    match region.kind {
        RegionKind::Ball3D => {
            let (ux, uw) = gauss_legendre(64);
            let m = 128;
            let mut acc = Complex64::ZERO;
            for (ui, uwi) in ux.iter().zip(uw.iter()) {
                let theta = ui.acos();
                let st = theta.sin();
                for j in 0..m {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    let xi = region.xi.eval(theta, phi);
                    let dir = [st * phi.cos(), st * phi.sin(), *ui];
                    for (ri, rwi) in rx.iter().zip(rw.iter()) {
                        let r01 = 0.5 * (ri + 1.0);
                        let w = 0.5 * rwi * uwi;
                        // d(cosθ) absorbs the sinθ of the measure
                        let meas = xi.powi(3) * r01 * r01 * r_scale.powi(3);
                        let rho = xi * r01 * r_scale;
                        let p = [c[0] + rho * dir[0], c[1] + rho * dir[1], c[2] + rho * dir[2]];
                        acc += Complex64::new(0.0, dot(k, &p)).exp() * meas * w
                            * (2.0 * PI / m as f64);
                    }
                }
            }
            acc
        }
        RegionKind::Disk2D => {
            let m = 256;
            let mut acc = Complex64::ZERO;
            for j in 0..m {
                let phi = 2.0 * PI * j as f64 / m as f64;
                let xi = region.xi.eval(PI / 2.0, phi);
                for (ri, rwi) in rx.iter().zip(rw.iter()) {
                    let r01 = 0.5 * (ri + 1.0);
                    let w = 0.5 * rwi;
                    let rho = xi * r01 * r_scale;
                    let p = [c[0] + rho * phi.cos(), c[1] + rho * phi.sin(), c[2]];
                    let meas = xi.powi(2) * r01 * r_scale.powi(2);
                    acc += Complex64::new(0.0, dot(k, &p)).exp() * meas * w * (2.0 * PI / m as f64);
                }
            }
            acc
        }
        RegionKind::CylinderOnPlane => {
            // cross-section numeric × exact axial sinc
            let disk = ConvexRegion {
                kind: RegionKind::Disk2D,
                center_r0: c,
                xi: region.xi.clone(),
                size_r: region.size_r,
                thickness_l: 0.0,
            };
            let cross = region_fourier_numeric(&disk, &[k[0], k[1], 0.0]);
            let l = region.thickness_l;
            let axial = Complex64::new(0.0, k[2] * l / 2.0).exp()
                * (l * crate::continuum::sinc(k[2] * l / 2.0));
            cross * axial
        }
    }
}

/// Direct polarization `P(k_a, ω_s)·f(k_a − k_s)`.
pub fn direct_polarization(
    resp: &ResponseModel,
    sample: &SampleModel,
    beams: &BeamSet,
) -> Result<CVec3> {
    let p = resp.p(&beams.k_a, beams.omega_s)?;
    let dk = sub(&beams.k_a, &beams.k_s);
    let f = match sample {
        SampleModel::Cloud(cloud) => form_factor(cloud, &dk),
        SampleModel::Region { region, concentration, .. } => {
            region_form_factor(region, *concentration, &dk)
        }
    };
    Ok([p[0] * f, p[1] * f, p[2] * f])
}

/// Geometric factor `Σ_a e^{iΔk·r_a} I(r_a, k_b, ω_b)` over a cloud with the
/// full dipole kernel.
pub fn cloud_geometric_factor(
    cloud: &MoleculeCloud,
    beams: &BeamSet,
    cfg: &KernelConfig,
) -> Result<ComplexTensor3> {
    let dk = beams.delta_k();
    let mut accs = [[KahanSum::new(); 3]; 3];
    for r_a in &cloud.positions {
        let i = integrated_green_discrete(
            cloud,
            r_a,
            beams,
            KernelKind::Vector,
            cfg,
            SumOptions { reproducible: true, exclude_self: true },
        )?;
        let t = i.value.as_tensor();
        let phase = Complex64::new(0.0, dot(&dk, r_a)).exp();
        for i in 0..3 {
            for j in 0..3 {
                accs[i][j].add(t.entries[i][j] * phase);
            }
        }
    }
    let mut out = ComplexTensor3::zero();
    for i in 0..3 {
        for j in 0..3 {
            out.entries[i][j] = accs[i][j].value();
        }
    }
    Ok(out)
}

/// Matched-limit macroscopic cascade coefficient `−i·4π n k_b c/3` (the
/// residue of the isotropic k-space kernel at ω_b = k_b c).
fn matched_macroscopic_coefficient(concentration: f64, k_b: f64, c: f64) -> Complex64 {
    Complex64::new(0.0, -4.0 * PI * concentration * k_b * c / 3.0)
}

/// Cascading polarization through the chosen geometry engine.
pub fn cascade_polarization(
    resp: &ResponseModel,
    sample: &SampleModel,
    beams: &BeamSet,
    engine: Engine,
    cfg: &KernelConfig,
    quad: &QuadratureSpec,
) -> Result<CVec3> {
    let p_b = resp.p(&beams.k_b, beams.omega_b)?;
    let p_tilde = resp.p_tilde(&beams.k_a, beams.omega_s, -beams.omega_b)?;
    let dk = beams.delta_k();

    let geo: ComplexTensor3 = match (engine, sample) {
        (Engine::DiscreteSum, SampleModel::Cloud(cloud)) => {
            cloud_geometric_factor(cloud, beams, cfg)?
        }
        (Engine::Continuum3D, SampleModel::Region { region, concentration, probe }) => {
            let f = region_form_factor(region, *concentration, &dk);
            let k_mag = norm(&beams.k_b);
            let mismatch = (beams.omega_b / cfg.c - k_mag).abs();
            if mismatch <= 1e-9 * (beams.omega_b / cfg.c) {
                // Perfect matching: the ω_b integral collapses to the pole
                // contribution; the bulk principal value vanishes by symmetry.
                let coeff = matched_macroscopic_coefficient(*concentration, k_mag, cfg.c);
                ComplexTensor3::diagonal(coeff * f)
            } else {
                let r_a = probe.unwrap_or(region.center_r0);
                let i3 = integrate_case_3d(region, &r_a, beams, quad, cfg)?;
                ComplexTensor3::diagonal(i3.value * *concentration * f)
            }
        }
        (Engine::Continuum2D, SampleModel::Region { region, concentration, probe }) => {
            let f = region_form_factor(region, *concentration, &dk);
            let r_a = probe.unwrap_or(region.center_r0);
            let i2 = integrate_case_2d(region, &r_a, beams, quad, cfg)?;
            ComplexTensor3::diagonal(i2.value * *concentration * f)
        }
        (Engine::ContinuumCylinder, SampleModel::Region { region, concentration, probe }) => {
            let f = region_form_factor(region, *concentration, &dk);
            let r_a = probe.unwrap_or_else(|| {
                let mut p = region.center_r0;
                p[2] += 0.5 * region.thickness_l;
                p
            });
            let ic = integrate_cylinder(region, &r_a, beams, quad, cfg)?;
            ComplexTensor3::diagonal(ic.value * *concentration * f)
        }
        (engine, sample) => {
            return Err(Error::EngineMismatch { engine: engine.name(), sample: sample.name() })
        }
    };

    // cascade^ν = P̃^{νν_v} Geo^{ν_v ν'_v} P^{ν'_v}
    let geo_p = geo.apply(&p_b);
    Ok(p_tilde.apply(&geo_p))
}

/// Heterodyne signal `Im[E_s* · P_total]`.
pub fn heterodyne_signal(e_s: &CVec3, p_total: &CVec3) -> f64 {
    let mut overlap = Complex64::ZERO;
    for i in 0..3 {
        overlap += e_s[i].conj() * p_total[i];
    }
    overlap.im
}

/// Decompose the cascade against the direct term's complex phase.
///
/// Each component of `cascade` is rotated by the phase of the corresponding
/// `direct` component; the squared-magnitude fractions of the co-phase and
/// quadrature parts give `in_phase_frac`/`out_phase_frac`, and `rel_phase`
/// comes from the dominant Cartesian component of `direct`.
pub fn phase_analysis(direct: &CVec3, cascade: &CVec3) -> Result<PhaseReport> {
    let dir_norm_sq: f64 = direct.iter().map(|z| z.norm_sqr()).sum();
    if dir_norm_sq == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let mut in_energy = 0.0;
    let mut out_energy = 0.0;
    for i in 0..3 {
        if direct[i].norm() == 0.0 {
            // No phase reference on this axis; attribute nothing.
            continue;
        }
        let rot = cascade[i] * (direct[i].conj() / direct[i].norm());
        in_energy += rot.re * rot.re;
        out_energy += rot.im * rot.im;
    }
    let total = in_energy + out_energy;
    let (in_frac, out_frac) = if total > 0.0 {
        (in_energy / total, out_energy / total)
    } else {
        (1.0, 0.0)
    };
    let dominant = (0..3)
        .max_by(|&i, &j| direct[i].norm().total_cmp(&direct[j].norm()))
        .unwrap();
    let rel_phase = if cascade[dominant].norm() == 0.0 {
        0.0
    } else {
        (cascade[dominant] / direct[dominant]).arg()
    };
    let pack = |v: &CVec3| [[v[0].re, v[0].im], [v[1].re, v[1].im], [v[2].re, v[2].im]];
    Ok(PhaseReport {
        direct: pack(direct),
        cascade: pack(cascade),
        rel_phase,
        in_phase_frac: in_frac,
        out_phase_frac: out_frac,
    })
}

/// Principal-value / δ-shell split of the macroscopic cascading kernel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MacroscopicCascade {
    /// Real, off-resonant (in-phase) part.
    pub pv_part: Complex64,
    /// Imaginary, on-shell (π/2-shifted) part; the η→0 Lorentzian limit of
    /// the δ distribution, reported at the given η.
    pub delta_part: Complex64,
    pub eta: f64,
}

/// Splits `k_b²c²/(ω_b² − k_b²c² + iη)` into its principal-value and δ-like
/// parts and contracts them with `P̃` and the transverse-projected
/// polarization `P⊥ = (δ − k̂k̂)P`.
pub fn macroscopic_cascade(
    resp: &ResponseModel,
    beams: &BeamSet,
    eta: f64,
) -> Result<MacroscopicCascade> {
    assert!(eta > 0.0, "eta must be positive");
    let k = norm(&beams.k_b);
    let kc = k * beams.c;
    let x = beams.omega_b * beams.omega_b - kc * kc;
    let denom = x * x + eta * eta;
    let pv_kernel = kc * kc * x / denom;
    let delta_kernel = -kc * kc * eta / denom; // imaginary coefficient

    let p = resp.p(&beams.k_b, beams.omega_b)?;
    let p_tilde = resp.p_tilde(&beams.k_a, beams.omega_s, -beams.omega_b)?;
    // transverse projection against k̂_b
    let mut p_perp = p;
    if k > 0.0 {
        let khat = [beams.k_b[0] / k, beams.k_b[1] / k, beams.k_b[2] / k];
        let k_dot_p = khat[0] * p[0] + khat[1] * p[1] + khat[2] * p[2];
        for i in 0..3 {
            p_perp[i] = p[i] - k_dot_p * khat[i];
        }
    }
    let driven = p_tilde.apply(&p_perp);
    let es = resp.polarization_dir();
    let mut overlap = Complex64::ZERO;
    for i in 0..3 {
        overlap += driven[i] * es[i];
    }
    Ok(MacroscopicCascade {
        pv_part: overlap * pv_kernel,
        delta_part: overlap * Complex64::new(0.0, delta_kernel),
        eta,
    })
}

/// Sum over the trivially-degenerate in-plane k_b orientations; helper for
/// angular sweeps in the CLI.
pub fn rotate_in_plane(k_mag: f64, angle: f64) -> Vec3 {
    [k_mag * angle.cos(), k_mag * angle.sin(), 0.0]
}

/// Average of f over the azimuth, for isotropy diagnostics.
pub fn azimuthal_average(f: impl Fn(f64) -> Complex64, m: usize) -> Complex64 {
    periodic_trapezoid(f, m) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn off() -> ResponseModel {
        ResponseModel::off_resonant(1.0, 1.0)
    }

    #[test]
    fn heterodyne_examples_and_linearity() {
        let one = Complex64::ONE;
        let i = Complex64::I;
        let zero = Complex64::ZERO;
        assert_eq!(heterodyne_signal(&[one, zero, zero], &[i, zero, zero]), 1.0);
        assert_eq!(heterodyne_signal(&[one, zero, zero], &[one, zero, zero]), 0.0);
        assert_eq!(heterodyne_signal(&[zero, one, zero], &[i, zero, zero]), 0.0);

        // additivity and real-scalar homogeneity in both slots
        let e = [Complex64::new(0.3, -0.2), Complex64::new(0.0, 1.1), Complex64::new(0.5, 0.4)];
        let p1 = [Complex64::new(-0.7, 0.9), Complex64::new(0.2, 0.1), Complex64::new(0.0, -1.3)];
        let p2 = [Complex64::new(0.4, 0.0), Complex64::new(-0.6, 0.8), Complex64::new(1.0, 0.2)];
        let sum = [p1[0] + p2[0], p1[1] + p2[1], p1[2] + p2[2]];
        assert_relative_eq!(
            heterodyne_signal(&e, &sum),
            heterodyne_signal(&e, &p1) + heterodyne_signal(&e, &p2),
            max_relative = 1e-12
        );
        let scaled = [p1[0] * 2.5, p1[1] * 2.5, p1[2] * 2.5];
        assert_relative_eq!(
            heterodyne_signal(&e, &scaled),
            2.5 * heterodyne_signal(&e, &p1),
            max_relative = 1e-12
        );
    }

    #[test]
    fn phase_analysis_reference_cases() {
        let d = [Complex64::new(2.0, 1.0), Complex64::ZERO, Complex64::ZERO];
        let c_out = [d[0] * Complex64::new(0.0, -1.0), Complex64::ZERO, Complex64::ZERO];
        let rep = phase_analysis(&d, &c_out).unwrap();
        assert_relative_eq!(rep.rel_phase, -PI / 2.0, max_relative = 1e-12);
        assert_relative_eq!(rep.out_phase_frac, 1.0, max_relative = 1e-12);
        assert!(rep.in_phase_frac < 1e-12);

        let c_in = [d[0] * 2.0, Complex64::ZERO, Complex64::ZERO];
        let rep = phase_analysis(&d, &c_in).unwrap();
        assert_eq!(rep.rel_phase, 0.0);
        assert_relative_eq!(rep.in_phase_frac, 1.0, max_relative = 1e-12);

        let z = Complex64::new(1.0, 1.0) / 2.0f64.sqrt();
        let c_mix = [d[0] * z, Complex64::ZERO, Complex64::ZERO];
        let rep = phase_analysis(&d, &c_mix).unwrap();
        assert_relative_eq!(rep.in_phase_frac, 0.5, max_relative = 1e-9);
        assert_relative_eq!(rep.out_phase_frac, 0.5, max_relative = 1e-9);
        assert_relative_eq!(rep.in_phase_frac + rep.out_phase_frac, 1.0, epsilon = 1e-12);

        assert!(matches!(
            phase_analysis(&[Complex64::ZERO; 3], &c_mix),
            Err(Error::DegenerateReference)
        ));
    }

    #[test]
    fn direct_polarization_form_factor_cases() {
        let resp = off();
        // k_a = k_s: factor = N exactly
        let cloud = MoleculeCloud::new(
            (0..13).map(|i| [0.3 * i as f64, 0.1, -0.2]).collect(),
        )
        .unwrap();
        let beams = BeamSet::new([1.0, 0.0, 0.0], [0.0; 3], [1.0, 0.0, 0.0], 1.0, 1.0, 1.0);
        let d = direct_polarization(&resp, &SampleModel::Cloud(cloud), &beams).unwrap();
        assert_relative_eq!(d[0].re, 13.0, max_relative = 1e-12);

        // two molecules at ±(d/2)ẑ with k_a − k_s = kẑ: factor 2cos(kd/2)
        let dist = 0.9;
        let cloud2 =
            MoleculeCloud::new(vec![[0.0, 0.0, dist / 2.0], [0.0, 0.0, -dist / 2.0]]).unwrap();
        let k = 1.7;
        let beams2 = BeamSet::new([0.0, 0.0, k], [0.0; 3], [0.0; 3], 1.0, 1.0, 1.0);
        let d = direct_polarization(&resp, &SampleModel::Cloud(cloud2), &beams2).unwrap();
        assert_relative_eq!(d[0].re, 2.0 * (k * dist / 2.0).cos(), max_relative = 1e-12);
    }

    #[test]
    fn region_form_factor_limits() {
        let region = ConvexRegion::ball([0.0; 3], 5.0);
        let n = 2.0;
        let f0 = region_form_factor(&region, n, &[0.0; 3]);
        assert_relative_eq!(f0.re, n * region.measure(), max_relative = 1e-12);
        // sinc suppression away from matching
        let f1 = region_form_factor(&region, n, &[3.0, 0.0, 0.0]);
        assert!(f1.norm() < 0.05 * f0.norm());
        // closed form agrees with the numeric path
        let numeric = region_fourier_numeric(&region, &[0.4, 0.2, -0.3]) * n;
        let closed = region_form_factor(&region, n, &[0.4, 0.2, -0.3]);
        assert!((closed - numeric).norm() < 1e-6 * closed.norm());
    }

    #[test]
    fn macroscopic_split_matching_and_detuned() {
        let resp = ResponseModel::OffResonant {
            chi: 1.0,
            chi_tilde: 1.0,
            polarization: [1.0, 0.0, 0.0],
        };
        let omega = 2.0;
        let eta = 1e-6 * omega * omega;
        // exact matching, k_b ⊥ polarization: pv = 0, delta purely imaginary
        let matched = BeamSet::new([0.0; 3], [0.0, 0.0, omega], [0.0; 3], omega, omega, 1.0);
        let m = macroscopic_cascade(&resp, &matched, eta).unwrap();
        assert_eq!(m.pv_part.norm(), 0.0);
        assert!(m.delta_part.im.abs() > 0.0);
        assert_eq!(m.delta_part.re, 0.0);

        // 2× detuning: delta/pv vanishes as η→0
        let detuned = BeamSet::new([0.0; 3], [0.0, 0.0, omega / 2.0], [0.0; 3], omega, omega, 1.0);
        let d = macroscopic_cascade(&resp, &detuned, eta).unwrap();
        assert!(d.delta_part.norm() < 1e-3 * d.pv_part.norm());
        assert!(d.pv_part.im == 0.0);

        // longitudinal polarization is annihilated
        let resp_l = ResponseModel::OffResonant {
            chi: 1.0,
            chi_tilde: 1.0,
            polarization: [0.0, 0.0, 1.0],
        };
        let m = macroscopic_cascade(&resp_l, &matched, eta).unwrap();
        assert_eq!(m.pv_part.norm(), 0.0);
        assert_eq!(m.delta_part.norm(), 0.0);
    }

    #[test]
    fn engine_mismatch_is_reported() {
        let resp = off();
        let beams = BeamSet::new([0.0; 3], [0.1, 0.0, 0.0], [0.0; 3], 1.0, 1.0, 1.0);
        let cloud = SampleModel::Cloud(MoleculeCloud::new(vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap());
        let err = cascade_polarization(
            &resp,
            &cloud,
            &beams,
            Engine::Continuum2D,
            &KernelConfig::scalar_default(),
            &QuadratureSpec::default(),
        );
        assert!(matches!(err, Err(Error::EngineMismatch { .. })));
    }

    #[test]
    fn continuum_2d_engine_gives_quarter_turn() {
        let resp = off();
        let omega = 1.0;
        let wavelength = 2.0 * PI;
        let region = ConvexRegion::disk([0.0; 3], 25.0 * wavelength);
        // colinear-ish: k_a + k_b = k_s keeps Δk = 0
        let k_b = [0.5, 0.0, 0.0];
        let beams = BeamSet::new([0.7, 0.0, 0.0], k_b, [1.2, 0.0, 0.0], omega, omega, 1.0);
        let sample = SampleModel::Region {
            region,
            concentration: 3.0,
            probe: None,
        };
        let d = direct_polarization(&resp, &sample, &beams).unwrap();
        let c = cascade_polarization(
            &resp,
            &sample,
            &beams,
            Engine::Continuum2D,
            &KernelConfig::scalar_default(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let rep = phase_analysis(&d, &c).unwrap();
        assert!((rep.rel_phase + PI / 2.0).abs() < 0.05, "rel = {}", rep.rel_phase);
        assert!(rep.out_phase_frac > 0.99);
    }

    #[test]
    fn matched_continuum_3d_engine_reproduces_macroscopic_form() {
        let resp = off();
        let omega = 1.0;
        let region = ConvexRegion::ball([0.0; 3], 40.0);
        let n = 1.5;
        let k_b = [0.0, 0.0, omega]; // matched
        let beams = BeamSet::new([0.4, 0.0, 0.0], k_b, [0.4, 0.0, omega], omega, omega, 1.0);
        let sample = SampleModel::Region { region: region.clone(), concentration: n, probe: None };
        let c = cascade_polarization(
            &resp,
            &sample,
            &beams,
            Engine::Continuum3D,
            &KernelConfig::scalar_default(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let f = region_form_factor(&region, n, &beams.delta_k());
        let expect = matched_macroscopic_coefficient(n, omega, 1.0) * f;
        assert!((c[0] - expect).norm() < 1e-9 * expect.norm());
        assert_relative_eq!((c[0] / f).arg(), -PI / 2.0, epsilon = 1e-12);
    }
}
