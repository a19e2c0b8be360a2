//! Quadrature building blocks: Gauss–Legendre nodes, periodic trapezoid
//! rules, and adaptive product rules on the circle and the unit sphere.
//!
//! The continuum integrals only ever need angular (and axial) quadrature —
//! radial integrals are done analytically — so everything here is 1D/2D.
//! Error estimates come from Richardson comparison of successive refinement
//! levels.

use num_complex::Complex64;

use crate::math::{ComplexTensor3, Vec3};

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Trapezoid rule for a 2π-periodic integrand: ∫₀^{2π} f(φ) dφ with `m`
/// uniform nodes. Spectrally accurate for smooth periodic functions.
pub fn periodic_trapezoid(f: impl Fn(f64) -> Complex64, m: usize) -> Complex64 {
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let mut acc = Complex64::ZERO;
    for j in 0..m {
        acc += f(j as f64 * h);
    }
    acc * h
}

/// Adaptive periodic trapezoid: doubles the node count until two successive
/// levels agree to `tol` (relative), starting from `m0` nodes. Returns the
/// refined value and the Richardson error estimate |fine − coarse|.
pub fn periodic_trapezoid_adaptive(
    f: impl Fn(f64) -> Complex64,
    m0: usize,
    tol: f64,
    max_refinements: usize,
) -> (Complex64, f64) {
    let mut m = m0.max(4);
    let mut coarse = periodic_trapezoid(&f, m);
    let mut est = f64::INFINITY;
    for _ in 0..max_refinements {
        m *= 2;
        let fine = periodic_trapezoid(&f, m);
        est = (fine - coarse).norm();
        let scale = fine.norm().max(1e-300);
        coarse = fine;
        if est <= tol * scale {
            break;
        }
    }
    (coarse, est)
}

/// Product rule over the unit sphere: Gauss–Legendre in u = cosθ ×
/// trapezoid in φ. `f` receives the direction unit vector.
pub fn sphere_quadrature(
    f: impl Fn(Vec3) -> Complex64,
    n_polar: usize,
    m_azimuth: usize,
) -> Complex64 {
    let (u, w) = gauss_legendre(n_polar);
    let h = 2.0 * std::f64::consts::PI / m_azimuth as f64;
    let mut acc = Complex64::ZERO;
    for (ui, wi) in u.iter().zip(w.iter()) {
        let sin_theta = (1.0 - ui * ui).sqrt();
        let mut ring = Complex64::ZERO;
        for j in 0..m_azimuth {
            let phi = j as f64 * h;
            ring += f([sin_theta * phi.cos(), sin_theta * phi.sin(), *ui]);
        }
        acc += ring * h * *wi;
    }
    acc
}

/// Adaptive sphere product rule with Richardson error estimate.
pub fn sphere_quadrature_adaptive_scalar(
    f: impl Fn(Vec3) -> Complex64,
    n0: usize,
    tol: f64,
    max_refinements: usize,
) -> (Complex64, f64) {
    let mut n = n0.max(4);
    let mut coarse = sphere_quadrature(&f, n, 2 * n);
    let mut est = f64::INFINITY;
    for _ in 0..max_refinements {
        n *= 2;
        let fine = sphere_quadrature(&f, n, 2 * n);
        est = (fine - coarse).norm();
        let scale = fine.norm().max(1e-300);
        coarse = fine;
        if est <= tol * scale {
            break;
        }
    }
    (coarse, est)
}

/// Tensor-valued adaptive sphere quadrature (entrywise product rule, shared
/// nodes). Refines until the worst entry stabilizes to `tol` relative to the
/// largest entry.
pub fn sphere_quadrature_adaptive(
    f: impl Fn(Vec3) -> ComplexTensor3,
    tol: f64,
    max_refinements: usize,
) -> ComplexTensor3 {
    let eval = |n: usize| -> ComplexTensor3 {
        let (u, w) = gauss_legendre(n);
        let m = 2 * n;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut acc = ComplexTensor3::zero();
        for (ui, wi) in u.iter().zip(w.iter()) {
            let sin_theta = (1.0 - ui * ui).sqrt();
            for j in 0..m {
                let phi = j as f64 * h;
                let t = f([sin_theta * phi.cos(), sin_theta * phi.sin(), *ui]);
                acc = acc.add(&t.scale(Complex64::new(h * *wi, 0.0)));
            }
        }
        acc
    };
    let mut n = 8;
    let mut coarse = eval(n);
    for _ in 0..max_refinements {
        n *= 2;
        let fine = eval(n);
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((fine.entries[i][j] - coarse.entries[i][j]).norm());
            }
        }
        let scale = fine.max_abs_entry().max(1e-300);
        coarse = fine;
        if worst <= tol * scale {
            break;
        }
    }
    coarse
}

/// Gauss–Legendre quadrature of a complex integrand on [a, b].
pub fn gl_integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::ZERO;
    for (xi, wi) in x.iter().zip(w.iter()) {
        acc += f(mid + half * xi) * *wi;
    }
    acc * half
}

/// Adaptive panel-doubling Gauss–Legendre on [a, b]: splits the interval into
/// 2^k panels of fixed order until two levels agree to `tol` relative.
pub fn gl_integrate_adaptive(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    order: usize,
    tol: f64,
    max_refinements: usize,
) -> (Complex64, f64) {
    let panels_eval = |k: usize| -> Complex64 {
        let n_panels = 1usize << k;
        let step = (b - a) / n_panels as f64;
        let mut acc = Complex64::ZERO;
        for p in 0..n_panels {
            let lo = a + p as f64 * step;
            acc += gl_integrate(&f, lo, lo + step, order);
        }
        acc
    };
    let mut k = 0;
    let mut coarse = panels_eval(k);
    let mut est = f64::INFINITY;
    for _ in 0..max_refinements {
        k += 1;
        let fine = panels_eval(k);
        est = (fine - coarse).norm();
        let scale = fine.norm().max(1e-300);
        coarse = fine;
        if est <= tol * scale {
            break;
        }
    }
    (coarse, est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // ∫_{-1}^{1} x^14 dx = 2/15 (degree ≤ 2n−1 exact)
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert_relative_eq!(s, 2.0 / 15.0, max_relative = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_handles_oscillatory_periodic() {
        // ∫₀^{2π} e^{i 5 φ} dφ = 0; ∫₀^{2π} cos²φ dφ = π
        let z = periodic_trapezoid(|phi| Complex64::new(0.0, 5.0 * phi).exp(), 64);
        assert!(z.norm() < 1e-12);
        let c = periodic_trapezoid(|phi| Complex64::new(phi.cos().powi(2), 0.0), 64);
        assert_relative_eq!(c.re, PI, max_relative = 1e-13);
    }

    #[test]
    fn sphere_rule_recovers_surface_area_and_plane_wave() {
        let area = sphere_quadrature(|_| Complex64::ONE, 16, 32);
        assert_relative_eq!(area.re, 4.0 * PI, max_relative = 1e-12);
        // ∫dΩ e^{i k·r} = 4π sinc(kr)
        let kr: f64 = 3.0;
        let z = sphere_quadrature(
            |n| Complex64::new(0.0, kr * n[2]).exp(),
            32,
            64,
        );
        assert_relative_eq!(z.re, 4.0 * PI * kr.sin() / kr, max_relative = 1e-12);
        assert!(z.im.abs() < 1e-12);
    }

    #[test]
    fn adaptive_gl_converges_on_oscillatory_integrand() {
        // ∫₀^{10} e^{i 20 t} dt
        let (z, est) = gl_integrate_adaptive(
            |t| Complex64::new(0.0, 20.0 * t).exp(),
            0.0,
            10.0,
            16,
            1e-12,
            12,
        );
        let exact = (Complex64::new(0.0, 200.0).exp() - Complex64::ONE) / Complex64::new(0.0, 20.0);
        assert!((z - exact).norm() < 1e-10);
        assert!(est.is_finite());
    }
}
