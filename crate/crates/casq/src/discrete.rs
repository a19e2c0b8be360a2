//! Discrete molecular-sum quantities: form factor, integrated Green's
//! function over a point cloud, the double-sum k-space Green's function,
//! the two-molecule closed form, and the 3-body cascading factor.
//!
//! Phase conventions are fixed once, crate-wide:
//!
//! * form factor: `f(k) = Σ_a exp(+i k·r_a)`
//! * k-space double sum: `G(k, k', ω) = Σ_{a≠b} exp(−i(k·r_a + k'·r_b)) G_ab`
//! * integrated Green's function: `I(r_a, k_b, ω_b) = Σ_b exp(+i k_b·(r_b − r_a)) G_ab`
//!
//! These are mutually consistent: `G(k_s−k_a, −k_b, ω) =
//! Σ_a exp(i(k_a+k_b−k_s)·r_a)·I(r_a, k_b, ω)` holds exactly, and the
//! two-molecule closed form carries the phase `exp(i((ω_b/c)r − k_b·r))`
//! with `r` the separation vector pointing from source to receiver.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MoleculeCloud;
use crate::kernels::{scalar_green, vector_green, KernelConfig, Normalization};
use crate::math::{dot, norm, sub, ComplexTensor3, KahanSum, Vec3};

/// Classical field wavevectors and frequencies driving a cascading process.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeamSet {
    pub k_a: Vec3,
    pub k_b: Vec3,
    pub k_s: Vec3,
    pub omega_s: f64,
    pub omega_b: f64,
    pub c: f64,
}

impl BeamSet {
    pub fn new(k_a: Vec3, k_b: Vec3, k_s: Vec3, omega_s: f64, omega_b: f64, c: f64) -> Self {
        assert!(c > 0.0 && omega_s.is_finite() && omega_b.is_finite());
        Self { k_a, k_b, k_s, omega_s, omega_b, c }
    }

    /// |ω_b/c − |k_b||, the internal-mode phase-matching diagnostic.
    pub fn phase_mismatch(&self) -> f64 {
        (self.omega_b / self.c - norm(&self.k_b)).abs()
    }

    /// k_a + k_b − k_s, the cascading phase-matching combination.
    pub fn delta_k(&self) -> Vec3 {
        [
            self.k_a[0] + self.k_b[0] - self.k_s[0],
            self.k_a[1] + self.k_b[1] - self.k_s[1],
            self.k_a[2] + self.k_b[2] - self.k_s[2],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Scalar,
    Vector,
}

/// Scalar-or-tensor result of a Green's function sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum GreenValue {
    Scalar(Complex64),
    Tensor(ComplexTensor3),
}

impl GreenValue {
    /// Embed as a 3×3 tensor (scalar becomes s·δ).
    pub fn as_tensor(&self) -> ComplexTensor3 {
        match self {
            GreenValue::Scalar(s) => ComplexTensor3::diagonal(*s),
            GreenValue::Tensor(t) => *t,
        }
    }

    pub fn scalar(&self) -> Option<Complex64> {
        match self {
            GreenValue::Scalar(s) => Some(*s),
            GreenValue::Tensor(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GreenMeta {
    pub kernel: KernelKind,
    pub normalization: Normalization,
    /// Number of source molecules actually summed.
    pub n_b_used: usize,
}

/// I(r_a, k_b, ω_b) evaluated over a cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratedGreen {
    pub value: GreenValue,
    pub r_a: Vec3,
    pub meta: GreenMeta,
}

/// Summation options for the pairwise sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct SumOptions {
    /// Fixed-order compensated summation: bitwise reproducible and
    /// independent of thread count. Off = rayon tree reduction.
    pub reproducible: bool,
    /// Skip source molecules coincident with r_a instead of erroring.
    pub exclude_self: bool,
}

impl SumOptions {
    pub fn reproducible() -> Self {
        Self { reproducible: true, exclude_self: true }
    }
}

/// Sample form factor `f(k) = Σ_a exp(i k·r_a)`. |f| ≤ N with equality iff
/// all phases align.
pub fn form_factor(cloud: &MoleculeCloud, k: &Vec3) -> Complex64 {
    let mut acc = KahanSum::new();
    for p in &cloud.positions {
        acc.add(Complex64::new(0.0, dot(k, p)).exp());
    }
    acc.value()
}

fn eval_kernel(
    kind: KernelKind,
    r_a: &Vec3,
    r_b: &Vec3,
    omega: f64,
    cfg: &KernelConfig,
) -> Result<GreenValue> {
    Ok(match kind {
        KernelKind::Scalar => GreenValue::Scalar(scalar_green(r_a, r_b, omega, cfg)?),
        KernelKind::Vector => GreenValue::Tensor(vector_green(r_a, r_b, omega, cfg)?),
    })
}

/// `I(r_a, k_b, ω_b) = Σ_{b≠a} exp(i k_b·(r_b − r_a)) G(r_a, r_b, ω_b)`.
///
/// When `r_a` coincides with a cloud point the self term is excluded if
/// `opts.exclude_self` is set; otherwise the coincidence is an error.
pub fn integrated_green_discrete(
    cloud: &MoleculeCloud,
    r_a: &Vec3,
    beams: &BeamSet,
    kernel: KernelKind,
    cfg: &KernelConfig,
    opts: SumOptions,
) -> Result<IntegratedGreen> {
    let omega = beams.omega_b;
    let k_b = beams.k_b;
    let term = |r_b: &Vec3| -> Result<Option<GreenValue>> {
        let d = sub(r_b, r_a);
        if norm(&d) == 0.0 {
            return if opts.exclude_self {
                Ok(None)
            } else {
                Err(Error::SingularSeparation)
            };
        }
        let phase = Complex64::new(0.0, dot(&k_b, &d)).exp();
        let g = eval_kernel(kernel, r_a, r_b, omega, cfg)?;
        Ok(Some(match g {
            GreenValue::Scalar(s) => GreenValue::Scalar(s * phase),
            GreenValue::Tensor(t) => GreenValue::Tensor(t.scale(phase)),
        }))
    };

    let mut used = 0usize;
    let value = match kernel {
        KernelKind::Scalar => {
            let mut acc_value = Complex64::ZERO;
            if opts.reproducible {
                let mut acc = KahanSum::new();
                for r_b in &cloud.positions {
                    if let Some(GreenValue::Scalar(s)) = term(r_b)? {
                        acc.add(s);
                        used += 1;
                    }
                }
                acc_value = acc.value();
            } else {
                let terms: Vec<Complex64> = cloud
                    .positions
                    .par_iter()
                    .map(|r_b| term(r_b).map(|t| t.and_then(|g| g.scalar())))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .flatten()
                    .collect();
                used = terms.len();
                for t in terms {
                    acc_value += t;
                }
            }
            GreenValue::Scalar(acc_value)
        }
        KernelKind::Vector => {
            let mut acc = ComplexTensor3::zero();
            for r_b in &cloud.positions {
                if let Some(GreenValue::Tensor(t)) = term(r_b)? {
                    acc = acc.add(&t);
                    used += 1;
                }
            }
            GreenValue::Tensor(acc)
        }
    };
    if used == 0 {
        return Err(Error::InsufficientBodies { needed: 1, got: 0 });
    }
    Ok(IntegratedGreen {
        value,
        r_a: *r_a,
        meta: GreenMeta { kernel, normalization: cfg.normalization, n_b_used: used },
    })
}

/// Double-sum k-space Green's function
/// `G(k, k', ω) = Σ_{a≠b} exp(−i(k·r_a + k'·r_b)) G(r_a, r_b, ω)`.
/// Scalar kernels are embedded on the diagonal.
pub fn kspace_green_discrete(
    cloud: &MoleculeCloud,
    k: &Vec3,
    k_prime: &Vec3,
    omega: f64,
    kernel: KernelKind,
    cfg: &KernelConfig,
    opts: SumOptions,
) -> Result<ComplexTensor3> {
    if cloud.len() < 2 {
        return Err(Error::InsufficientBodies { needed: 2, got: cloud.len() });
    }
    let pair = |a: usize, b: usize| -> Result<ComplexTensor3> {
        let r_a = &cloud.positions[a];
        let r_b = &cloud.positions[b];
        let phase = Complex64::new(0.0, -(dot(k, r_a) + dot(k_prime, r_b))).exp();
        Ok(eval_kernel(kernel, r_a, r_b, omega, cfg)?.as_tensor().scale(phase))
    };
    let n = cloud.len();
    if opts.reproducible {
        let mut accs = [[KahanSum::new(); 3]; 3];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let t = pair(a, b)?;
                for i in 0..3 {
                    for j in 0..3 {
                        accs[i][j].add(t.entries[i][j]);
                    }
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
    } else {
        let parts: Vec<ComplexTensor3> = (0..n)
            .into_par_iter()
            .map(|a| -> Result<ComplexTensor3> {
                let mut acc = ComplexTensor3::zero();
                for b in 0..n {
                    if a != b {
                        acc = acc.add(&pair(a, b)?);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(parts
            .into_iter()
            .fold(ComplexTensor3::zero(), |acc, t| acc.add(&t)))
    }
}

/// Two molecules separated by `separation` along ẑ: the integrated Green's
/// function collapses to a diagonal tensor with overall phase
/// `exp(i((ω_b/c)r − k_b·r ẑ))`. The zz entry has no far-field (r⁻¹) term:
/// dipoles aligned with the separation axis produce no long-range cascading.
pub fn two_molecule_green(
    separation: f64,
    k_b: &Vec3,
    omega_b: f64,
    cfg: &KernelConfig,
) -> Result<ComplexTensor3> {
    if separation <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let r = separation;
    let kr = omega_b / cfg.c * r;
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm_scale = match cfg.normalization {
        Normalization::OverTwoPi => 1.0,
        Normalization::Bare => two_pi,
    };
    let phase = Complex64::new(0.0, kr - k_b[2] * r).exp();
    let pref = -phase / (two_pi * r.powi(3)) * norm_scale;
    let radial = Complex64::new(1.0, -kr); // (1 − i(ω/c)r)
    let mut t = ComplexTensor3::zero();
    for nu in 0..3 {
        let is_z = nu == 2;
        let aniso = if is_z { -2.0 } else { 1.0 }; // (1 − 3δ_{ννz})
        let trans = if is_z { 0.0 } else { 1.0 }; // (1 − δ_{ννz})
        t.entries[nu][nu] = pref * (radial * aniso - trans * kr * kr);
    }
    Ok(t)
}

/// Far-field (r⁻¹) part of [`two_molecule_green`], used for long-range phase
/// analysis.
pub fn two_molecule_green_far(
    separation: f64,
    k_b: &Vec3,
    omega_b: f64,
    cfg: &KernelConfig,
) -> Result<ComplexTensor3> {
    if separation <= 0.0 {
        return Err(Error::SingularSeparation);
    }
    let r = separation;
    let kr = omega_b / cfg.c * r;
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm_scale = match cfg.normalization {
        Normalization::OverTwoPi => 1.0,
        Normalization::Bare => two_pi,
    };
    let phase = Complex64::new(0.0, kr - k_b[2] * r).exp();
    let pref = -phase / (two_pi * r.powi(3)) * norm_scale;
    let mut t = ComplexTensor3::zero();
    for nu in 0..2 {
        t.entries[nu][nu] = pref * (-kr * kr);
    }
    Ok(t)
}

/// Rank-4 three-body cascading factor
/// `T^{νν'μμ'} = Σ_a exp(iΔk·r_a)·I^{νν'}(r_a,k_b,ω_b)·I^{μμ'}(r_a,k_c,ω_c)`
/// with Δk = k_a + k_b + k_c − k_s (k_a, k_s from `beams_b`) and each I
/// summed over sources ≠ a.
#[derive(Debug, Clone)]
pub struct ThreeBodyFactor {
    /// entries[ν][ν'][μ][μ']
    pub entries: Box<[[[[Complex64; 3]; 3]; 3]; 3]>,
}

impl ThreeBodyFactor {
    pub fn zero() -> Self {
        Self { entries: Box::new([[[[Complex64::ZERO; 3]; 3]; 3]; 3]) }
    }

    /// Pairwise contraction Σ M_b^{νν'} M_c^{μμ'} T^{νν'μμ'}.
    pub fn contract(&self, m_b: &ComplexTensor3, m_c: &ComplexTensor3) -> Complex64 {
        let mut s = Complex64::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        s += m_b.entries[i][j] * m_c.entries[k][l] * self.entries[i][j][k][l];
                    }
                }
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.entries[i][j][k][l].norm_sqr();
                    }
                }
            }
        }
        s.sqrt()
    }
}

/// Materialize the full 81-entry three-body tensor. For memory-proportional
/// use, prefer [`three_body_contracted`].
pub fn three_body_factor(
    cloud: &MoleculeCloud,
    beams_b: &BeamSet,
    beams_c: &BeamSet,
    omega_b: f64,
    omega_c: f64,
    cfg: &KernelConfig,
) -> Result<ThreeBodyFactor> {
    if cloud.len() < 3 {
        return Err(Error::InsufficientBodies { needed: 3, got: cloud.len() });
    }
    let delta_k = three_body_delta_k(beams_b, beams_c);
    let mut out = ThreeBodyFactor::zero();
    for r_a in &cloud.positions {
        let phase = Complex64::new(0.0, dot(&delta_k, r_a)).exp();
        let i_b = source_sum(cloud, r_a, &beams_b.k_b, omega_b, cfg)?;
        let i_c = source_sum(cloud, r_a, &beams_c.k_b, omega_c, cfg)?;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        out.entries[i][j][k][l] +=
                            phase * i_b.entries[i][j] * i_c.entries[k][l];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Contract the three-body factor against the two response tensors without
/// materializing the rank-4 object.
pub fn three_body_contracted(
    cloud: &MoleculeCloud,
    beams_b: &BeamSet,
    beams_c: &BeamSet,
    omega_b: f64,
    omega_c: f64,
    cfg: &KernelConfig,
    m_b: &ComplexTensor3,
    m_c: &ComplexTensor3,
) -> Result<Complex64> {
    if cloud.len() < 3 {
        return Err(Error::InsufficientBodies { needed: 3, got: cloud.len() });
    }
    let delta_k = three_body_delta_k(beams_b, beams_c);
    let mut acc = KahanSum::new();
    for r_a in &cloud.positions {
        let phase = Complex64::new(0.0, dot(&delta_k, r_a)).exp();
        let i_b = source_sum(cloud, r_a, &beams_b.k_b, omega_b, cfg)?;
        let i_c = source_sum(cloud, r_a, &beams_c.k_b, omega_c, cfg)?;
        acc.add(phase * i_b.contract(m_b) * i_c.contract(m_c));
    }
    Ok(acc.value())
}

fn three_body_delta_k(beams_b: &BeamSet, beams_c: &BeamSet) -> Vec3 {
    [
        beams_b.k_a[0] + beams_b.k_b[0] + beams_c.k_b[0] - beams_b.k_s[0],
        beams_b.k_a[1] + beams_b.k_b[1] + beams_c.k_b[1] - beams_b.k_s[1],
        beams_b.k_a[2] + beams_b.k_b[2] + beams_c.k_b[2] - beams_b.k_s[2],
    ]
}

fn source_sum(
    cloud: &MoleculeCloud,
    r_a: &Vec3,
    k: &Vec3,
    omega: f64,
    cfg: &KernelConfig,
) -> Result<ComplexTensor3> {
    let mut acc = ComplexTensor3::zero();
    for r_b in &cloud.positions {
        let d = sub(r_b, r_a);
        if norm(&d) == 0.0 {
            continue;
        }
        let phase = Complex64::new(0.0, dot(k, &d)).exp();
        acc = acc.add(&vector_green(r_a, r_b, omega, cfg)?.scale(phase));
    }
    Ok(acc)
}
