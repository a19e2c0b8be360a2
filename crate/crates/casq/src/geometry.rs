//! Discrete point clouds and parametric convex regions.
//!
//! A convex region is described in "inhomogeneous" polar/spherical
//! coordinates: a positive shape function ξ over directions, with the region
//! { r ≤ ξ(direction)·R } around a center point. In these coordinates the
//! integration measures are homogeneous, ξ²(φ)·r dr dφ in 2D and
//! ξ³(θ,φ)·r² sinθ dr dθ dφ in 3D — no derivatives of ξ appear.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, Vec3};

/// Explicit list of molecular positions; the discrete sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoleculeCloud {
    pub positions: Vec<Vec3>,
    /// Number density N/V when the cloud was drawn from a known region.
    pub concentration_n: Option<f64>,
}

impl MoleculeCloud {
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        Self::with_concentration(positions, None)
    }

    pub fn with_concentration(positions: Vec<Vec3>, concentration_n: Option<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptySample);
        }
        for p in &positions {
            if !math::is_finite(p) {
                return Err(Error::InvalidGeometry("non-finite molecule position".into()));
            }
        }
        Ok(Self { positions, concentration_n })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Pairwise-distinct check; O(N²), intended for validation at desk scale.
    pub fn validate_distinct(&self) -> Result<()> {
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                if math::norm(&math::sub(&self.positions[i], &self.positions[j])) == 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "molecules {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn translated(&self, shift: &Vec3) -> Self {
        Self {
            positions: self.positions.iter().map(|p| math::add(p, shift)).collect(),
            concentration_n: self.concentration_n,
        }
    }

    /// Write as CSV with header `x,y,z`, one molecule per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,z")?;
        for p in &self.positions {
            writeln!(w, "{},{},{}", p[0], p[1], p[2])?;
        }
        Ok(())
    }

    /// Read from CSV; the `x,y,z` header row is required.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::config("csv", "empty cloud file"))??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["x", "y", "z"] {
            return Err(Error::config("csv", format!("expected header x,y,z, got `{header}`")));
        }
        let mut positions = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::config(format!("csv row {}", idx + 2), e.to_string()))?;
            if vals.len() != 3 {
                return Err(Error::config(
                    format!("csv row {}", idx + 2),
                    format!("expected 3 columns, got {}", vals.len()),
                ));
            }
            positions.push([vals[0], vals[1], vals[2]]);
        }
        Self::new(positions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Ball3D,
    Disk2D,
    CylinderOnPlane,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::Ball3D => "ball3d",
            RegionKind::Disk2D => "disk2d",
            RegionKind::CylinderOnPlane => "cylinder_on_plane",
        }
    }
}

/// Direction-dependent radius function ξ. Either a closure or a tabulated
/// profile on a uniform angular grid with linear interpolation.
///
/// For 2D kinds (and cylinder cross-sections) ξ depends on the azimuth φ
/// only; for 3D kinds on (θ, φ).
#[derive(Clone)]
pub enum ShapeFn {
    /// ξ ≡ 1: homogeneous ball/disk/cylinder.
    Unit,
    /// In-plane ellipse with semi-axes (a, b) in units of R:
    /// ξ(φ) = ab/√(b²cos²φ + a²sin²φ).
    Ellipse2D { a: f64, b: f64 },
    /// Triaxial ellipsoid with semi-axes (a, b, c) in units of R.
    Ellipsoid3D { a: f64, b: f64, c: f64 },
    /// User closure over (θ, φ); θ is ignored by 2D kinds.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    /// Tabulated ξ(φ) on a uniform azimuthal grid, linear interpolation,
    /// periodic. 2D kinds only.
    TablePhi(Vec<f64>),
}

impl std::fmt::Debug for ShapeFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeFn::Unit => write!(f, "ShapeFn::Unit"),
            ShapeFn::Ellipse2D { a, b } => write!(f, "ShapeFn::Ellipse2D({a}, {b})"),
            ShapeFn::Ellipsoid3D { a, b, c } => write!(f, "ShapeFn::Ellipsoid3D({a}, {b}, {c})"),
            ShapeFn::Custom(_) => write!(f, "ShapeFn::Custom"),
            ShapeFn::TablePhi(v) => write!(f, "ShapeFn::TablePhi(len={})", v.len()),
        }
    }
}

impl ShapeFn {
    /// Evaluate ξ at polar angle θ (from +z) and azimuth φ.
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        match self {
            ShapeFn::Unit => 1.0,
            ShapeFn::Ellipse2D { a, b } => {
                let (s, c) = phi.sin_cos();
                a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
            }
            ShapeFn::Ellipsoid3D { a, b, c } => {
                let st = theta.sin();
                let x = st * phi.cos() / a;
                let y = st * phi.sin() / b;
                let z = theta.cos() / c;
                1.0 / (x * x + y * y + z * z).sqrt()
            }
            ShapeFn::Custom(f) => f(theta, phi),
            ShapeFn::TablePhi(v) => {
                let n = v.len();
                let t = phi.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
                let i = (t.floor() as usize) % n;
                let frac = t - t.floor();
                v[i] * (1.0 - frac) + v[(i + 1) % n] * frac
            }
        }
    }

    /// Upper bound on ξ, used by rejection sampling and ray bracketing.
    fn max_bound(&self) -> f64 {
        match self {
            ShapeFn::Unit => 1.0,
            ShapeFn::Ellipse2D { a, b } => a.max(*b),
            ShapeFn::Ellipsoid3D { a, b, c } => a.max(*b).max(*c),
            ShapeFn::Custom(_) | ShapeFn::TablePhi(_) => {
                let mut m: f64 = 0.0;
                for i in 0..256 {
                    let phi = 2.0 * PI * i as f64 / 256.0;
                    for j in 0..64 {
                        let theta = PI * (j as f64 + 0.5) / 64.0;
                        m = m.max(self.eval(theta, phi));
                    }
                }
                m * 1.01
            }
        }
    }
}

/// Parametric convex domain: { r ≤ ξ(direction)·R } around `center_r0`,
/// with [`RegionKind::CylinderOnPlane`] extruded over 0 ≤ z ≤ l.
#[derive(Debug, Clone)]
pub struct ConvexRegion {
    pub kind: RegionKind,
    pub center_r0: Vec3,
    pub xi: ShapeFn,
    pub size_r: f64,
    /// Cylinder thickness; unused by other kinds.
    pub thickness_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    UniformRandom,
    Lattice,
}

impl ConvexRegion {
    pub fn ball(center: Vec3, radius: f64) -> Self {
        Self::new(RegionKind::Ball3D, center, ShapeFn::Unit, radius, 0.0).unwrap()
    }

    pub fn disk(center: Vec3, radius: f64) -> Self {
        Self::new(RegionKind::Disk2D, center, ShapeFn::Unit, radius, 0.0).unwrap()
    }

    pub fn cylinder(base_center: Vec3, radius: f64, thickness: f64) -> Self {
        Self::new(RegionKind::CylinderOnPlane, base_center, ShapeFn::Unit, radius, thickness)
            .unwrap()
    }

    pub fn new(
        kind: RegionKind,
        center_r0: Vec3,
        xi: ShapeFn,
        size_r: f64,
        thickness_l: f64,
    ) -> Result<Self> {
        if size_r <= 0.0 || !size_r.is_finite() {
            return Err(Error::InvalidGeometry("size R must be positive".into()));
        }
        if kind == RegionKind::CylinderOnPlane && thickness_l <= 0.0 {
            return Err(Error::InvalidGeometry("cylinder thickness l must be positive".into()));
        }
        Ok(Self { kind, center_r0, xi, size_r, thickness_l })
    }

    fn expect_kind(&self, kind: RegionKind) -> Result<()> {
        if self.kind != kind {
            Err(Error::KindMismatch { expected: kind.name(), got: self.kind.name() })
        } else {
            Ok(())
        }
    }

    /// Point-membership test.
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = math::sub(p, &self.center_r0);
        match self.kind {
            RegionKind::Ball3D => {
                let r = math::norm(&d);
                if r == 0.0 {
                    return true;
                }
                let theta = (d[2] / r).clamp(-1.0, 1.0).acos();
                let phi = d[1].atan2(d[0]);
                r <= self.xi.eval(theta, phi) * self.size_r
            }
            RegionKind::Disk2D => {
                if d[2].abs() > 1e-9 * self.size_r {
                    return false;
                }
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let phi = d[1].atan2(d[0]);
                r <= self.xi.eval(PI / 2.0, phi) * self.size_r
            }
            RegionKind::CylinderOnPlane => {
                if d[2] < 0.0 || d[2] > self.thickness_l {
                    return false;
                }
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let phi = d[1].atan2(d[0]);
                r <= self.xi.eval(PI / 2.0, phi) * self.size_r
            }
        }
    }

    /// Area (2D), volume (3D), or volume (cylinder) from the homogeneous
    /// measures, by quadrature over the shape function.
    pub fn measure(&self) -> f64 {
        match self.kind {
            RegionKind::Disk2D => self.size_r.powi(2) * 0.5 * self.integral_xi_pow(2),
            RegionKind::Ball3D => self.size_r.powi(3) / 3.0 * self.integral_xi3_sphere(),
            RegionKind::CylinderOnPlane => {
                self.thickness_l * self.size_r.powi(2) * 0.5 * self.integral_xi_pow(2)
            }
        }
    }

    fn integral_xi_pow(&self, p: i32) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|j| self.xi.eval(PI / 2.0, j as f64 * h).powi(p))
            .sum::<f64>()
            * h
    }

    fn integral_xi3_sphere(&self) -> f64 {
        let (u, w) = crate::quad::gauss_legendre(64);
        let m = 128;
        let h = 2.0 * PI / m as f64;
        let mut acc = 0.0;
        for (ui, wi) in u.iter().zip(w.iter()) {
            let theta = ui.acos();
            let mut ring = 0.0;
            for j in 0..m {
                ring += self.xi.eval(theta, j as f64 * h).powi(3);
            }
            acc += ring * h * wi;
        }
        acc
    }

    /// Distance from an interior point `from` to the region boundary along
    /// the unit direction `dir` (for 2D kinds, `dir` must be in-plane).
    /// Convexity guarantees a single crossing; found by bracketed bisection.
    pub fn boundary_distance(&self, from: &Vec3, dir: &Vec3) -> Result<f64> {
        if !self.contains(from) {
            return Err(Error::OutsideRegion);
        }
        // ξ ≡ 1 ball: chord length in closed form.
        if matches!(self.xi, ShapeFn::Unit) && self.kind == RegionKind::Ball3D {
            let d = math::sub(from, &self.center_r0);
            let du = math::dot(&d, dir);
            let disc = du * du + self.size_r * self.size_r - math::dot(&d, &d);
            if disc >= 0.0 {
                return Ok(-du + disc.sqrt());
            }
        }
        // Bracket: expand until outside.
        let mut hi = self.size_r * self.xi.max_bound() * 0.5;
        let cap = 4.0
            * (self.size_r * self.xi.max_bound()
                + math::norm(&math::sub(from, &self.center_r0))
                + self.thickness_l);
        let outside = |t: f64| !self.contains(&math::add(from, &math::scale(dir, t)));
        let mut guard = 0;
        while !outside(hi) {
            hi *= 2.0;
            guard += 1;
            if hi > cap || guard > 80 {
                return Err(Error::InvalidGeometry(
                    "boundary bracketing failed; region may be unbounded".into(),
                ));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if outside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-13 * self.size_r.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Distance from `from` to the boundary of the in-plane cross-section at
    /// azimuth φ (cylinder / disk cross-sections).
    pub fn cross_section_distance(&self, from_xy: &[f64; 2], phi: f64) -> Result<f64> {
        let z_probe = match self.kind {
            RegionKind::Disk2D => self.center_r0[2],
            RegionKind::CylinderOnPlane => self.center_r0[2] + 0.5 * self.thickness_l,
            RegionKind::Ball3D => {
                return Err(Error::KindMismatch { expected: "disk2d|cylinder_on_plane", got: "ball3d" })
            }
        };
        // ξ ≡ 1 circle: chord length in closed form.
        if matches!(self.xi, ShapeFn::Unit) {
            let dx = from_xy[0] - self.center_r0[0];
            let dy = from_xy[1] - self.center_r0[1];
            let du = dx * phi.cos() + dy * phi.sin();
            let disc = du * du + self.size_r * self.size_r - (dx * dx + dy * dy);
            if disc < 0.0 {
                return Err(Error::OutsideRegion);
            }
            return Ok(-du + disc.sqrt());
        }
        let from = [from_xy[0], from_xy[1], z_probe];
        self.boundary_distance(&from, &[phi.cos(), phi.sin(), 0.0])
    }
}

/// Polar integration measure for 2D regions: ξ²(φ)·r, with r ∈ [0, 1] the
/// normalized inhomogeneous radius. The physical measure carries an extra
/// R² from the caller.
pub fn polar_measure(region: &ConvexRegion, r: f64, phi: f64) -> Result<f64> {
    region.expect_kind(RegionKind::Disk2D)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::PreconditionViolated(format!("r = {r} outside [0, 1]")));
    }
    Ok(region.xi.eval(PI / 2.0, phi).powi(2) * r)
}

/// Spherical integration measure for 3D regions: ξ³(θ,φ)·r²·sinθ, with
/// r ∈ [0, 1]. The physical measure carries an extra R³ from the caller.
pub fn spherical_measure(region: &ConvexRegion, r: f64, theta: f64, phi: f64) -> Result<f64> {
    region.expect_kind(RegionKind::Ball3D)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::PreconditionViolated(format!("r = {r} outside [0, 1]")));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::PreconditionViolated(format!("theta = {theta} outside [0, π]")));
    }
    Ok(region.xi.eval(theta, phi).powi(3) * r * r * theta.sin())
}

/// Stochastic midpoint-chord convexity test: draws `n_samples` boundary
/// point pairs and checks every chord midpoint stays inside (within a small
/// tolerance on the boundary radius).
pub fn check_convexity(region: &ConvexRegion, n_samples: usize) -> bool {
    assert!(n_samples >= 8, "need at least 8 samples");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0ffee);
    let tol = 1.0 + 1e-9;
    let boundary_point = |rng: &mut ChaCha8Rng| -> Vec3 {
        match region.kind {
            RegionKind::Disk2D | RegionKind::CylinderOnPlane => {
                let phi = rng.gen::<f64>() * 2.0 * PI;
                let rad = region.xi.eval(PI / 2.0, phi) * region.size_r;
                let z = match region.kind {
                    RegionKind::Disk2D => region.center_r0[2],
                    _ => region.center_r0[2] + rng.gen::<f64>() * region.thickness_l,
                };
                [
                    region.center_r0[0] + rad * phi.cos(),
                    region.center_r0[1] + rad * phi.sin(),
                    z,
                ]
            }
            RegionKind::Ball3D => {
                let u: f64 = rng.gen_range(-1.0..1.0);
                let phi = rng.gen::<f64>() * 2.0 * PI;
                let st = (1.0 - u * u).sqrt();
                let theta = u.acos();
                let rad = region.xi.eval(theta, phi) * region.size_r;
                [
                    region.center_r0[0] + rad * st * phi.cos(),
                    region.center_r0[1] + rad * st * phi.sin(),
                    region.center_r0[2] + rad * u,
                ]
            }
        }
    };
    let inside_scaled = |p: &Vec3| -> bool {
        // Same membership test but with a hair of tolerance for roundoff.
        let d = math::sub(p, &region.center_r0);
        let (r, theta, phi) = match region.kind {
            RegionKind::Ball3D => {
                let r = math::norm(&d);
                if r == 0.0 {
                    return true;
                }
                (r, (d[2] / r).clamp(-1.0, 1.0).acos(), d[1].atan2(d[0]))
            }
            _ => {
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                (r, PI / 2.0, d[1].atan2(d[0]))
            }
        };
        r <= region.xi.eval(theta, phi) * region.size_r * tol
    };
    for _ in 0..n_samples {
        let p = boundary_point(&mut rng);
        let q = boundary_point(&mut rng);
        let mid = math::scale(&math::add(&p, &q), 0.5);
        if !inside_scaled(&mid) {
            return false;
        }
    }
    true
}

/// Draw `count` molecule positions inside the region. `UniformRandom` uses
/// inverse-CDF radii for ξ ≡ 1 and rejection sampling otherwise, and is
/// reproducible given the seed. `Lattice` lays a cubic/square grid whose
/// spacing is tuned so the in-region point count comes close to `count`
/// (the returned cloud reports its actual length via `concentration_n`).
pub fn sample_points(
    region: &ConvexRegion,
    count: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<MoleculeCloud> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    let positions = match mode {
        SampleMode::UniformRandom => sample_uniform(region, count, seed),
        SampleMode::Lattice => sample_lattice(region, count),
    };
    if positions.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = positions.len() as f64 / region.measure();
    MoleculeCloud::with_concentration(positions, Some(n))
}

fn sample_uniform(region: &ConvexRegion, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let unit_shape = matches!(region.xi, ShapeFn::Unit);
    while out.len() < count {
        let p = match region.kind {
            RegionKind::Ball3D if unit_shape => {
                let u: f64 = rng.gen_range(-1.0f64..1.0);
                let phi = rng.gen::<f64>() * 2.0 * PI;
                let rad = region.size_r * rng.gen::<f64>().cbrt();
                let st = (1.0 - u * u).sqrt();
                [
                    region.center_r0[0] + rad * st * phi.cos(),
                    region.center_r0[1] + rad * st * phi.sin(),
                    region.center_r0[2] + rad * u,
                ]
            }
            RegionKind::Disk2D if unit_shape => {
                let phi = rng.gen::<f64>() * 2.0 * PI;
                let rad = region.size_r * rng.gen::<f64>().sqrt();
                [
                    region.center_r0[0] + rad * phi.cos(),
                    region.center_r0[1] + rad * phi.sin(),
                    region.center_r0[2],
                ]
            }
            _ => {
                // Rejection from the bounding box of the ξ-bounded support.
                let bound = region.size_r * region.xi.max_bound();
                let x = region.center_r0[0] + bound * rng.gen_range(-1.0f64..1.0);
                let y = region.center_r0[1] + bound * rng.gen_range(-1.0f64..1.0);
                let z = match region.kind {
                    RegionKind::Ball3D => region.center_r0[2] + bound * rng.gen_range(-1.0f64..1.0),
                    RegionKind::Disk2D => region.center_r0[2],
                    RegionKind::CylinderOnPlane => {
                        region.center_r0[2] + region.thickness_l * rng.gen::<f64>()
                    }
                };
                let p = [x, y, z];
                if !region.contains(&p) {
                    continue;
                }
                p
            }
        };
        out.push(p);
    }
    out
}

fn sample_lattice(region: &ConvexRegion, count: usize) -> Vec<Vec3> {
    let dim = match region.kind {
        RegionKind::Ball3D | RegionKind::CylinderOnPlane => 3.0,
        RegionKind::Disk2D => 2.0,
    };
    let measure = region.measure();
    let mut h = (measure / count as f64).powf(1.0 / dim);
    // A few secant-style corrections on the spacing to land near `count`.
    let mut best: Option<Vec<Vec3>> = None;
    for _ in 0..24 {
        let pts = lattice_points(region, h);
        let n = pts.len();
        let better = match &best {
            None => true,
            Some(b) => {
                (n as i64 - count as i64).abs() < (b.len() as i64 - count as i64).abs() && n > 0
            }
        };
        if better {
            best = Some(pts);
        }
        if n == count {
            break;
        }
        let n_eff = n.max(1) as f64;
        h *= (n_eff / count as f64).powf(1.0 / dim);
    }
    best.unwrap_or_default()
}

fn lattice_points(region: &ConvexRegion, h: f64) -> Vec<Vec3> {
    let bound = region.size_r * region.xi.max_bound();
    let c = region.center_r0;
    let mut pts = Vec::new();
    let steps = (2.0 * bound / h).ceil() as i64 + 1;
    let (z_lo, z_hi) = match region.kind {
        RegionKind::Ball3D => (-steps, steps),
        RegionKind::Disk2D => (0, 0),
        RegionKind::CylinderOnPlane => (0, (region.thickness_l / h).ceil() as i64 + 1),
    };
    for ix in -steps..=steps {
        for iy in -steps..=steps {
            for iz in z_lo..=z_hi {
                let p = match region.kind {
                    RegionKind::Disk2D => [c[0] + ix as f64 * h, c[1] + iy as f64 * h, c[2]],
                    RegionKind::CylinderOnPlane => {
                        [c[0] + ix as f64 * h, c[1] + iy as f64 * h, c[2] + (iz as f64 + 0.5) * h]
                    }
                    RegionKind::Ball3D => {
                        [c[0] + ix as f64 * h, c[1] + iy as f64 * h, c[2] + iz as f64 * h]
                    }
                };
                if region.contains(&p) {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polar_measure_matches_examples() {
        let disk = ConvexRegion::disk([0.0; 3], 1.0);
        assert_relative_eq!(polar_measure(&disk, 0.5, 1.2).unwrap(), 0.5);
        assert_eq!(polar_measure(&disk, 0.0, 0.3).unwrap(), 0.0);
        let ball = ConvexRegion::ball([0.0; 3], 1.0);
        assert!(matches!(
            polar_measure(&ball, 0.5, 0.0),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn polar_measure_integrates_to_ellipse_area() {
        let (a, b) = (1.0, 0.5);
        let region = ConvexRegion::new(
            RegionKind::Disk2D,
            [0.0; 3],
            ShapeFn::Ellipse2D { a, b },
            1.0,
            0.0,
        )
        .unwrap();
        // ∫₀^{2π}∫₀^1 ξ²(φ) r dr dφ — midpoint in r (exact for linear), fine grid in φ.
        let (nr, np) = (200, 2000);
        let mut total = 0.0;
        for j in 0..np {
            let phi = 2.0 * PI * j as f64 / np as f64;
            for i in 0..nr {
                let r = (i as f64 + 0.5) / nr as f64;
                total += polar_measure(&region, r, phi).unwrap();
            }
        }
        total *= (1.0 / nr as f64) * (2.0 * PI / np as f64);
        assert_relative_eq!(total, PI * a * b, max_relative = 1e-6);
    }

    #[test]
    fn spherical_measure_matches_examples() {
        let ball = ConvexRegion::ball([0.0; 3], 1.0);
        assert_eq!(spherical_measure(&ball, 0.4, 0.0, 1.0).unwrap(), 0.0);
        let v = spherical_measure(&ball, 0.5, PI / 2.0, 0.0).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-14);
        // ξ ≡ 1 reproduces r² sinθ exactly at several sample points.
        for (r, th) in [(0.3, 0.7), (0.9, 2.1), (1.0, 3.0)] {
            assert_eq!(
                spherical_measure(&ball, r, th, 0.4).unwrap(),
                r * r * th.sin()
            );
        }
    }

    #[test]
    fn spherical_measure_integrates_to_ellipsoid_volume() {
        let (a, b, c) = (1.0, 0.7, 0.4);
        let region = ConvexRegion::new(
            RegionKind::Ball3D,
            [0.0; 3],
            ShapeFn::Ellipsoid3D { a, b, c },
            1.0,
            0.0,
        )
        .unwrap();
        assert_relative_eq!(
            region.measure(),
            4.0 / 3.0 * PI * a * b * c,
            max_relative = 1e-6
        );
        // Unit ball volume via the same path.
        let ball = ConvexRegion::ball([0.0; 3], 1.0);
        assert_relative_eq!(ball.measure(), 4.0 / 3.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn convexity_classifies_shapes() {
        let ball = ConvexRegion::ball([0.0; 3], 2.0);
        assert!(check_convexity(&ball, 2000));

        let ellipse = ConvexRegion::new(
            RegionKind::Disk2D,
            [0.0; 3],
            ShapeFn::Ellipse2D { a: 1.0, b: 0.5 },
            1.0,
            0.0,
        )
        .unwrap();
        assert!(check_convexity(&ellipse, 2000));

        let star = ConvexRegion::new(
            RegionKind::Disk2D,
            [0.0; 3],
            ShapeFn::Custom(Arc::new(|_, phi| 1.0 + 0.8 * (4.0 * phi).cos())),
            1.0,
            0.0,
        )
        .unwrap();
        assert!(!check_convexity(&star, 2000));
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let ball = ConvexRegion::ball([1.0, -2.0, 0.5], 3.0);
        let a = sample_points(&ball, 500, 42, SampleMode::UniformRandom).unwrap();
        let b = sample_points(&ball, 500, 42, SampleMode::UniformRandom).unwrap();
        assert_eq!(a.positions, b.positions);
        assert!(a.positions.iter().all(|p| ball.contains(p)));
        let n = a.concentration_n.unwrap();
        assert_relative_eq!(n, 500.0 / ball.measure(), max_relative = 1e-12);
    }

    #[test]
    fn sampling_empty_count_errors() {
        let ball = ConvexRegion::ball([0.0; 3], 1.0);
        assert!(matches!(
            sample_points(&ball, 0, 1, SampleMode::UniformRandom),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn ball_radii_follow_r_squared_density() {
        // χ² against 20 equal-probability bins of the r² law.
        let ball = ConvexRegion::ball([0.0; 3], 1.0);
        let cloud = sample_points(&ball, 20000, 7, SampleMode::UniformRandom).unwrap();
        let bins = 20;
        let mut counts = vec![0usize; bins];
        for p in &cloud.positions {
            let r = math::norm(p);
            let q = (r.powi(3) * bins as f64) as usize;
            counts[q.min(bins - 1)] += 1;
        }
        let expect = cloud.len() as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 19 dof; 43.8 is the p ≈ 0.001 cut. Seeded, so deterministic.
        assert!(chi2 < 43.8, "chi2 = {chi2}");
    }

    #[test]
    fn lattice_spacing_is_uniform() {
        let disk = ConvexRegion::disk([0.0; 3], 1.0);
        let cloud = sample_points(&disk, 300, 0, SampleMode::Lattice).unwrap();
        assert!(cloud.len() >= 250 && cloud.len() <= 350, "n = {}", cloud.len());
        // Nearest-neighbour distance is the lattice constant for interior points.
        let mut nn_dists: Vec<f64> = Vec::new();
        for (i, p) in cloud.positions.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, q) in cloud.positions.iter().enumerate() {
                if i != j {
                    best = best.min(math::norm(&math::sub(p, q)));
                }
            }
            nn_dists.push(best);
        }
        let h = nn_dists.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(nn_dists.iter().all(|&d| d < 2.0 * h + 1e-12));
    }

    #[test]
    fn cloud_csv_roundtrip_and_header_check() {
        let cloud = MoleculeCloud::new(vec![[0.0, 1.5, -2.0], [3.25, 0.0, 0.125]]).unwrap();
        let mut buf = Vec::new();
        cloud.write_csv(&mut buf).unwrap();
        let back = MoleculeCloud::read_csv(&buf[..]).unwrap();
        assert_eq!(back.positions, cloud.positions);

        let bad = b"a,b,c\n1,2,3\n";
        assert!(MoleculeCloud::read_csv(&bad[..]).is_err());
    }

    #[test]
    fn boundary_distance_on_unit_ball() {
        let ball = ConvexRegion::ball([0.0; 3], 2.0);
        let d = ball.boundary_distance(&[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(d, 1.5, epsilon = 1e-9);
        let d = ball.boundary_distance(&[0.5, 0.0, 0.0], &[-1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(d, 2.5, epsilon = 1e-9);
    }
}
