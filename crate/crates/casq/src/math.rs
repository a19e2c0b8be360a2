//! Small vector/tensor helpers used throughout the crate.
//!
//! Positions and wavevectors are plain `[f64; 3]`; complex 3×3 Cartesian
//! tensors get a thin newtype with the handful of operations the Green's
//! function algebra needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

pub fn is_finite(a: &Vec3) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// 3×3 complex Cartesian tensor, row-major: `entries[nu][nu_prime]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTensor3 {
    pub entries: [[Complex64; 3]; 3],
}

impl ComplexTensor3 {
    pub fn zero() -> Self {
        Self { entries: [[Complex64::ZERO; 3]; 3] }
    }

    /// s·δ_{νν'}
    pub fn diagonal(s: Complex64) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.entries[i][i] = s;
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.entries[i][j] = self.entries[i][j] + other.entries[i][j];
            }
        }
        t
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut t = *self;
        for row in t.entries.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        t
    }

    /// Contract on the second index: (T·v)_ν = Σ_ν' T_{νν'} v_ν'.
    pub fn apply(&self, v: &[Complex64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.entries[i][j] * v[j];
            }
        }
        out
    }

    /// Full contraction Σ_{νν'} M_{νν'} T_{νν'}.
    pub fn contract(&self, m: &Self) -> Complex64 {
        let mut s = Complex64::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                s += m.entries[i][j] * self.entries[i][j];
            }
        }
        s
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Largest |T_{νν'} − T_{ν'ν}| over all index pairs.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.entries[i][j] - self.entries[j][i]).norm());
            }
        }
        m
    }
}

/// Compensated (Kahan–Neumaier) accumulator for complex values; used where
/// bitwise-reproducible fixed-order sums are required.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.sum_re = neumaier_step(self.sum_re, z.re, &mut self.c_re);
        self.sum_im = neumaier_step(self.sum_im, z.im, &mut self.c_im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re + self.c_re, self.sum_im + self.c_im)
    }
}

fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}
