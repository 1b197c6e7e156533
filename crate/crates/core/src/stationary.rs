//! The stationary potential φ: harmonic outside the hole, zero on its
//! boundary, and growing like `log|x|` at infinity.
//!
//! Three evaluation paths exist and are cross-checked against each other:
//!
//! * [`phi_disk`], the closed form `log(|x|/r)` for a disk hole;
//! * [`phi_conformal`], inversion through a circle followed by the inverse of
//!   an explicit conformal map (scaled identity for disks, Joukowski for
//!   ellipses);
//! * [`solve_stationary_numeric`], a finite-volume Laplace solve on a
//!   truncated domain, producing a [`StationaryField`].
//!
//! The numeric solve discretizes in conformal coordinates whenever the hole
//! admits them (log-polar for disks, elliptic for ellipses), where the
//! Laplacian keeps its Cartesian form and `φ` is nearly linear in the radial
//! coordinate. Other holes use a masked Cartesian grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{build_masked_grid, norm, CellKind, HoleGeometry, MaskedGrid2D, Point};
use crate::network::{BoundaryLink, FluxNetwork};

/// A scalar potential with gradient, evaluated pointwise.
pub trait Potential {
    fn phi(&self, x: Point) -> f64;
    fn grad(&self, x: Point) -> [f64; 2];
}

/// `log(|x|/r)`, the stationary potential of the disk of radius `r`. Points
/// within a relative `1e-12` inside the circle count as boundary points.
pub fn phi_disk(r: f64, x: Point) -> Result<f64> {
    let d = norm(x);
    if d < r * (1.0 - 1e-12) {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: format!("|x| = {d} is inside the disk of radius {r}"),
        });
    }
    Ok((d / r).ln().max(0.0))
}

/// Closed-form potential of a disk hole centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPotential {
    pub radius: f64,
}

impl Potential for DiskPotential {
    fn phi(&self, x: Point) -> f64 {
        (norm(x) / self.radius).ln()
    }

    fn grad(&self, x: Point) -> [f64; 2] {
        let r2 = x[0] * x[0] + x[1] * x[1];
        [x[0] / r2, x[1] / r2]
    }
}

/// Conformal map family from the unit disk onto the inverted domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapFamily {
    /// Disk hole of the given radius: `f(w) = (r²/R) w`.
    ScaledIdentity { radius: f64 },
    /// Ellipse hole with semi-axes `a` (along x) and `b`:
    /// `f(w) = r² w / (A + B w²)`, `A = (a+b)/2`, `B = (a−b)/2`.
    Joukowski { a: f64, b: f64 },
}

/// A conformal map `f` from the unit disk onto the image of the exterior
/// domain under inversion in the circle of radius `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalMapSpec {
    family: MapFamily,
    r: f64,
}

impl ConformalMapSpec {
    /// Validates the map by sampling: `f'` must not vanish on the closed unit
    /// disk and the boundary image must be a simple closed curve around 0.
    pub fn new(family: MapFamily, inversion_radius: f64) -> Result<Self> {
        if !(inversion_radius > 0.0) {
            return Err(Error::param(format!("inversion radius must be positive, got {inversion_radius}")));
        }
        match family {
            MapFamily::ScaledIdentity { radius } if !(radius > 0.0) => {
                return Err(Error::geometry(format!("disk radius must be positive, got {radius}")))
            }
            MapFamily::Joukowski { a, b } if !(a > 0.0 && b > 0.0) => {
                return Err(Error::geometry(format!("ellipse semi-axes must be positive, got ({a}, {b})")))
            }
            _ => {}
        }
        let spec = ConformalMapSpec {
            family,
            r: inversion_radius,
        };
        spec.check_by_sampling()?;
        Ok(spec)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(MapFamily::ScaledIdentity { radius }, radius)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(MapFamily::Joukowski { a, b }, a.min(b))
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    pub fn inversion_radius(&self) -> f64 {
        self.r
    }

    /// The hole whose exterior this map encodes.
    pub fn hole(&self) -> HoleGeometry {
        match self.family {
            MapFamily::ScaledIdentity { radius } => HoleGeometry::Disk { radius },
            MapFamily::Joukowski { a, b } => HoleGeometry::Ellipse { semi_axes: [a, b] },
        }
    }

    pub fn f(&self, w: Complex64) -> Complex64 {
        let r2 = self.r * self.r;
        match self.family {
            MapFamily::ScaledIdentity { radius } => w * (r2 / radius),
            MapFamily::Joukowski { a, b } => {
                let (ca, cb) = (0.5 * (a + b), 0.5 * (a - b));
                w * r2 / (ca + cb * w * w)
            }
        }
    }

    pub fn df(&self, w: Complex64) -> Complex64 {
        let r2 = self.r * self.r;
        match self.family {
            MapFamily::ScaledIdentity { radius } => Complex64::new(r2 / radius, 0.0),
            MapFamily::Joukowski { a, b } => {
                let (ca, cb) = (0.5 * (a + b), 0.5 * (a - b));
                let den = ca + cb * w * w;
                r2 * (ca - cb * w * w) / (den * den)
            }
        }
    }

    /// Solves `f(w) = y` by Newton's method from the linearization at 0.
    pub fn invert(&self, y: Complex64) -> Result<Complex64> {
        let a0 = self.df(Complex64::new(0.0, 0.0));
        let mut w = y / a0;
        let scale = y.norm().max(f64::MIN_POSITIVE);
        let mut residual = f64::INFINITY;
        for it in 0..60 {
            let res = self.f(w) - y;
            residual = res.norm() / scale;
            if residual <= 1e-15 {
                return Ok(w);
            }
            let step = res / self.df(w);
            w -= step;
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::MapInversion {
                    residual,
                    iterations: it + 1,
                });
            }
        }
        if residual <= 1e-13 {
            return Ok(w);
        }
        Err(Error::MapInversion { residual, iterations: 60 })
    }

    fn check_by_sampling(&self) -> Result<()> {
        let n_theta = 256;
        for k in 0..=32 {
            let rho = k as f64 / 32.0;
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                let d = self.df(Complex64::from_polar(rho, th));
                if !(d.norm() > 0.0) || !d.re.is_finite() {
                    return Err(Error::geometry(format!("map derivative vanishes near w = {rho}·e^(i{th:.3})")));
                }
            }
        }
        let boundary: Vec<Point> = (0..n_theta)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                let z = self.f(Complex64::from_polar(1.0, th));
                [z.re, z.im]
            })
            .collect();
        HoleGeometry::curve(boundary)
            .map(|_| ())
            .map_err(|e| Error::geometry(format!("boundary image is not a simple curve around 0: {e}")))
    }
}

/// Inverted point `r² x / |x|²` as a complex number.
fn kelvin(r: f64, x: Point) -> Complex64 {
    let d2 = x[0] * x[0] + x[1] * x[1];
    Complex64::new(r * r * x[0] / d2, r * r * x[1] / d2)
}

/// `φ(x) = −log|f⁻¹(r² x / |x|²)|`.
pub fn phi_conformal(map: &ConformalMapSpec, x: Point) -> Result<f64> {
    let w = map.invert(kelvin(map.r, x))?;
    if w.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: "point lies inside the hole".into(),
        });
    }
    Ok(-w.norm().ln())
}

/// Gradient of [`phi_conformal`] by the chain rule through `f⁻¹`: as a
/// complex number it equals `r² / (x̄² f'(w) w)` with `x̄` the conjugate point.
pub fn grad_conformal(map: &ConformalMapSpec, x: Point) -> Result<[f64; 2]> {
    let w = map.invert(kelvin(map.r, x))?;
    let s = Complex64::new(x[0], -x[1]);
    let g = map.r * map.r / (s * s * map.df(w) * w);
    Ok([g.re, g.im])
}

/// [`phi_conformal`] as a [`Potential`]; points inside the hole evaluate to 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalPotential {
    pub map: ConformalMapSpec,
}

impl Potential for ConformalPotential {
    fn phi(&self, x: Point) -> f64 {
        phi_conformal(&self.map, x).unwrap_or(0.0).max(0.0)
    }

    fn grad(&self, x: Point) -> [f64; 2] {
        grad_conformal(&self.map, x).unwrap_or([f64::NAN; 2])
    }
}

/// Conformal coordinates `x = F(s + iθ)` used by the curvilinear solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coordinates {
    /// `F(ζ) = r e^ζ`; the hole boundary is `s = 0`.
    LogPolar { radius: f64 },
    /// `F(ζ) = c cosh ζ` (foci on the x axis) or its quarter-turn rotation
    /// when `swap` (foci on the y axis); the hole boundary is `s = s₀`.
    Elliptic { c: f64, swap: bool },
}

impl Coordinates {
    fn map(&self, z: Complex64) -> Complex64 {
        match *self {
            Coordinates::LogPolar { radius } => radius * z.exp(),
            Coordinates::Elliptic { c, swap } => {
                let p = c * z.cosh();
                if swap {
                    p * Complex64::i()
                } else {
                    p
                }
            }
        }
    }

    fn dmap(&self, z: Complex64) -> Complex64 {
        match *self {
            Coordinates::LogPolar { radius } => radius * z.exp(),
            Coordinates::Elliptic { c, swap } => {
                let p = c * z.sinh();
                if swap {
                    p * Complex64::i()
                } else {
                    p
                }
            }
        }
    }

    /// Inverse map, with `θ` normalized to `[0, 2π)`.
    fn inverse(&self, x: Point) -> (f64, f64) {
        let z = Complex64::new(x[0], x[1]);
        let zeta = match *self {
            Coordinates::LogPolar { radius } => Complex64::new((z.norm() / radius).ln(), z.arg()),
            Coordinates::Elliptic { c, swap } => {
                let p = if swap { z * Complex64::new(0.0, -1.0) } else { z };
                let q = (p / c).acosh();
                if q.re < 0.0 {
                    -q
                } else {
                    q
                }
            }
        };
        (zeta.re, zeta.im.rem_euclid(2.0 * std::f64::consts::PI))
    }
}

/// Discretization carried by a [`StationaryField`].
#[derive(Clone, Debug, PartialEq)]
pub enum FieldGrid {
    /// Uniform cells in conformal coordinates `(s, θ)`: `n_s × n_theta`
    /// cells starting at the hole boundary `s = s0`, spacing `ds` and `2π/n_theta`.
    Curvilinear {
        coords: Coordinates,
        s0: f64,
        ds: f64,
        n_s: usize,
        n_theta: usize,
    },
    Cartesian(MaskedGrid2D),
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        match self {
            FieldGrid::Curvilinear { n_s, n_theta, .. } => n_s * n_theta,
            FieldGrid::Cartesian(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical position of cell `k`.
    pub fn center(&self, k: usize) -> Point {
        match self {
            FieldGrid::Curvilinear {
                coords, s0, ds, n_theta, ..
            } => {
                let (i, j) = (k / n_theta, k % n_theta);
                let dth = 2.0 * std::f64::consts::PI / *n_theta as f64;
                let z = coords.map(Complex64::new(s0 + (i as f64 + 0.5) * ds, (j as f64 + 0.5) * dth));
                [z.re, z.im]
            }
            FieldGrid::Cartesian(g) => g.center(k),
        }
    }

    /// True for cells carrying an unknown of the Laplace solve.
    pub fn is_fluid(&self, k: usize) -> bool {
        match self {
            FieldGrid::Curvilinear { .. } => true,
            FieldGrid::Cartesian(g) => g.kind(k) == CellKind::Fluid,
        }
    }

    /// Short textual descriptor used in file headers.
    pub fn descriptor(&self) -> String {
        match self {
            FieldGrid::Curvilinear {
                coords: Coordinates::LogPolar { radius },
                s0,
                ds,
                n_s,
                n_theta,
            } => {
                format!("logpolar radius={radius:?} s0={s0:?} ds={ds:?} n_s={n_s} n_theta={n_theta}")
            }
            FieldGrid::Curvilinear {
                coords: Coordinates::Elliptic { c, swap },
                s0,
                ds,
                n_s,
                n_theta,
            } => {
                format!("elliptic c={c:?} swap={swap} s0={s0:?} ds={ds:?} n_s={n_s} n_theta={n_theta}")
            }
            FieldGrid::Cartesian(g) => format!("cartesian n={} h={:?}", g.n(), g.h()),
        }
    }

    /// Row-major `(rows, cols)` layout of the per-cell arrays.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            FieldGrid::Curvilinear { n_s, n_theta, .. } => (*n_s, *n_theta),
            FieldGrid::Cartesian(g) => (g.n(), g.n()),
        }
    }
}

/// Discrete solution of the stationary problem, certified by its residual
/// and by the bound `|φ − log|x|| ≤ c_phi` on the solved cells.
#[derive(Clone, Debug)]
pub struct StationaryField {
    hole: HoleGeometry,
    grid: FieldGrid,
    phi: Vec<f64>,
    grad: Vec<[f64; 2]>,
    /// `(∂_s φ, ∂_θ φ)` per cell for curvilinear grids.
    dcomp: Vec<[f64; 2]>,
    c_far: f64,
    c_far_spread: f64,
    c_phi: f64,
    residual: f64,
    tol: f64,
}

impl StationaryField {
    pub fn hole(&self) -> &HoleGeometry {
        &self.hole
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn gradients(&self) -> &[[f64; 2]] {
        &self.grad
    }

    /// Far-field constant: `φ(x) − log|x| → c_far`.
    pub fn c_far(&self) -> f64 {
        self.c_far
    }

    /// Difference of the far-field constants from the two truncation radii.
    pub fn c_far_spread(&self) -> f64 {
        self.c_far_spread
    }

    /// `max |φ − log|x||` over solved cells.
    pub fn c_phi(&self) -> f64 {
        self.c_phi
    }

    /// Relative residual of the final linear solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Positions of the solved cells.
    pub fn fluid_cells(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        (0..self.grid.len())
            .filter(|&k| self.grid.is_fluid(k))
            .map(|k| (k, self.grid.center(k)))
    }

    /// Radius beyond which evaluation falls back to `log|x| + c_far`.
    pub fn extent_radius(&self) -> f64 {
        match &self.grid {
            FieldGrid::Curvilinear { coords, s0, ds, n_s, .. } => {
                let s = s0 + *n_s as f64 * ds;
                match coords {
                    Coordinates::LogPolar { radius } => radius * s.exp(),
                    Coordinates::Elliptic { c, .. } => c * s.sinh(),
                }
            }
            FieldGrid::Cartesian(g) => g.truncation_radius(),
        }
    }

    fn far(&self, x: Point) -> Option<(f64, [f64; 2])> {
        let d = norm(x);
        if d < self.extent_radius() {
            return None;
        }
        let d2 = d * d;
        Some((d.ln() + self.c_far, [x[0] / d2, x[1] / d2]))
    }

    /// Bilinear stencil in `(s, θ)`: four `(cell, weight)` pairs, or the
    /// boundary ramp when below the first cell center.
    fn curvilinear_stencil(&self, s: f64, th: f64) -> ([(usize, f64); 4], f64) {
        let FieldGrid::Curvilinear { s0, ds, n_s, n_theta, .. } = self.grid else {
            unreachable!()
        };
        let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
        let ft = th / dth - 0.5;
        let j0 = ft.floor();
        let wt = ft - j0;
        let ja = (j0 as i64).rem_euclid(n_theta as i64) as usize;
        let jb = (ja + 1) % n_theta;
        let fs = (s - s0) / ds - 0.5;
        let (i0, ws, ramp) = if fs < 0.0 {
            // between the boundary (φ = 0) and the first cell center
            (0usize, 0.0, ((s - s0) / (0.5 * ds)).clamp(0.0, 1.0))
        } else if fs >= (n_s - 1) as f64 {
            (n_s - 2, 1.0, 1.0)
        } else {
            let i = fs.floor() as usize;
            (i, fs - i as f64, 1.0)
        };
        let k = |i: usize, j: usize| i * n_theta + j;
        (
            [
                (k(i0, ja), (1.0 - ws) * (1.0 - wt)),
                (k(i0, jb), (1.0 - ws) * wt),
                (k(i0 + 1, ja), ws * (1.0 - wt)),
                (k(i0 + 1, jb), ws * wt),
            ],
            ramp,
        )
    }

    fn cartesian_eval(&self, g: &MaskedGrid2D, x: Point) -> (f64, [f64; 2]) {
        let half = 0.5 * g.extent();
        let fi = (x[0] + half) / g.h() - 0.5;
        let fj = (x[1] + half) / g.h() - 0.5;
        let (i0, j0) = (fi.floor().max(0.0) as usize, fj.floor().max(0.0) as usize);
        let (wi, wj) = (fi - i0 as f64, fj - j0 as f64);
        let mut v = 0.0;
        let mut gr = [0.0; 2];
        for (di, dj, w) in [
            (0, 0, (1.0 - wi) * (1.0 - wj)),
            (1, 0, wi * (1.0 - wj)),
            (0, 1, (1.0 - wi) * wj),
            (1, 1, wi * wj),
        ] {
            let k = g.index((i0 + di).min(g.n() - 1), (j0 + dj).min(g.n() - 1));
            v += w * self.phi[k];
            gr[0] += w * self.grad[k][0];
            gr[1] += w * self.grad[k][1];
        }
        (v, gr)
    }

    /// Writes `φ` as a binary field file (see [`crate::harness::io`]) with
    /// the grid descriptor as header.
    pub fn write_binary(&self, path: &std::path::Path) -> Result<()> {
        let (rows, cols) = self.grid.shape();
        crate::harness::io::write_field(path, &self.grid.descriptor(), rows, cols, &self.phi)
    }
}

impl Potential for StationaryField {
    fn phi(&self, x: Point) -> f64 {
        if self.hole.contains(x) {
            return 0.0;
        }
        if let Some((v, _)) = self.far(x) {
            return v;
        }
        match &self.grid {
            FieldGrid::Curvilinear { coords, .. } => {
                let (s, th) = coords.inverse(x);
                let (st, ramp) = self.curvilinear_stencil(s, th);
                ramp * st.iter().map(|&(k, w)| w * self.phi[k]).sum::<f64>()
            }
            FieldGrid::Cartesian(g) => self.cartesian_eval(g, x).0,
        }
    }

    fn grad(&self, x: Point) -> [f64; 2] {
        if let Some((_, g)) = self.far(x) {
            return g;
        }
        match &self.grid {
            FieldGrid::Curvilinear { coords, .. } => {
                let (s, th) = coords.inverse(x);
                let (st, _) = self.curvilinear_stencil(s, th);
                let (mut ps, mut pt) = (0.0, 0.0);
                for &(k, w) in &st {
                    ps += w * self.dcomp[k][0];
                    pt += w * self.dcomp[k][1];
                }
                let g = (Complex64::new(ps, -pt) / coords.dmap(Complex64::new(s, th))).conj();
                [g.re, g.im]
            }
            FieldGrid::Cartesian(g) => self.cartesian_eval(g, x).1,
        }
    }
}

/// Resolution knobs for [`solve_stationary_numeric`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    /// Angular cells of curvilinear grids; radial spacing matches `2π/n_theta`.
    pub n_theta: usize,
    /// Truncation radius of the larger solve, in units of the hole's outer radius.
    pub truncation_factor: f64,
    /// Cartesian spacing as a fraction of the hole's inner radius.
    pub cartesian_h_fraction: f64,
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            n_theta: 128,
            truncation_factor: 64.0,
            cartesian_h_fraction: 1.0 / 12.0,
            max_iter: 200_000,
        }
    }
}

/// Outer truncation condition of a single solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OuterCondition {
    /// `log|x| + C`.
    Shifted(f64),
    /// `log(|x| / R)` with `R` the hole's outer radius, as in the
    /// monotone-approximation argument for existence.
    OverOuterRadius,
}

/// One truncated Laplace problem, with the outer values kept symbolic.
struct Truncated {
    grid: FieldGrid,
    net: FluxNetwork,
    /// network index → grid cell
    cells: Vec<usize>,
    /// first link index of the outer boundary (earlier links are on the hole)
    outer_from: usize,
    /// `log|x|` at the far side of each outer link
    outer_log: Vec<f64>,
}

impl Truncated {
    fn curvilinear(coords: Coordinates, s0: f64, n_theta: usize, s_max: f64) -> Self {
        let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
        let ds = dth;
        let n_s = (((s_max - s0) / ds).round() as usize).max(2);
        let grid = FieldGrid::Curvilinear {
            coords,
            s0,
            ds,
            n_s,
            n_theta,
        };
        let k = |i: usize, j: usize| i * n_theta + j;
        let mut net = FluxNetwork {
            volumes: Vec::with_capacity(n_s * n_theta),
            ..Default::default()
        };
        for i in 0..n_s {
            for j in 0..n_theta {
                let z = Complex64::new(s0 + (i as f64 + 0.5) * ds, (j as f64 + 0.5) * dth);
                net.volumes.push(coords.dmap(z).norm_sqr() * ds * dth);
                if i + 1 < n_s {
                    net.faces.push((k(i, j), k(i + 1, j), dth / ds));
                }
                net.faces.push((k(i, j), k(i, (j + 1) % n_theta), ds / dth));
            }
        }
        for j in 0..n_theta {
            net.boundary.push(BoundaryLink {
                cell: k(0, j),
                conductance: 2.0 * dth / ds,
                value: 0.0,
            });
        }
        let outer_from = net.boundary.len();
        let mut outer_log = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            net.boundary.push(BoundaryLink {
                cell: k(n_s - 1, j),
                conductance: 2.0 * dth / ds,
                value: 0.0,
            });
            let z = coords.map(Complex64::new(s0 + n_s as f64 * ds, (j as f64 + 0.5) * dth));
            outer_log.push(z.norm().ln());
        }
        Truncated {
            grid,
            net,
            cells: (0..n_s * n_theta).collect(),
            outer_from,
            outer_log,
        }
    }

    fn cartesian(grid: MaskedGrid2D) -> Self {
        let n = grid.n();
        let h = grid.h();
        let mut index = vec![usize::MAX; grid.len()];
        let mut cells = Vec::new();
        for k in 0..grid.len() {
            if grid.kind(k) == CellKind::Fluid {
                index[k] = cells.len();
                cells.push(k);
            }
        }
        let mut net = FluxNetwork {
            volumes: vec![h * h; cells.len()],
            ..Default::default()
        };
        let mut outer = Vec::new();
        for (a, &k) in cells.iter().enumerate() {
            let (i, j) = (k % n, k / n);
            for (ni, nj) in [(i + 1, j), (i, j + 1), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1))] {
                let q = grid.index(ni, nj);
                match grid.kind(q) {
                    CellKind::Fluid => {
                        if q > k {
                            net.faces.push((a, index[q], 1.0));
                        }
                    }
                    CellKind::Hole => {
                        let s = grid.hole().unwrap().crossing_fraction(grid.center(k), grid.center(q));
                        net.boundary.push(BoundaryLink {
                            cell: a,
                            conductance: 1.0 / s.max(0.25),
                            value: 0.0,
                        });
                    }
                    CellKind::Truncation => outer.push((a, norm(grid.center(q)).ln())),
                }
            }
        }
        let outer_from = net.boundary.len();
        let mut outer_log = Vec::with_capacity(outer.len());
        for (a, lg) in outer {
            net.boundary.push(BoundaryLink {
                cell: a,
                conductance: 1.0,
                value: 0.0,
            });
            outer_log.push(lg);
        }
        Truncated {
            grid: FieldGrid::Cartesian(grid),
            net,
            cells,
            outer_from,
            outer_log,
        }
    }

    fn set_outer(&mut self, f: impl Fn(f64) -> f64) {
        for (l, &lg) in self.net.boundary[self.outer_from..].iter_mut().zip(&self.outer_log) {
            l.value = f(lg);
        }
    }

    fn solve(&self, tol: f64, max_iter: usize, guess: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut p = guess.to_vec();
        let res = self.net.solve_laplace(&mut p, tol, max_iter)?;
        Ok((p, res))
    }

    /// Outward flux of `∇φ` through the truncation boundary.
    fn outer_flux(&self, p: &[f64]) -> f64 {
        self.net.boundary[self.outer_from..]
            .iter()
            .map(|l| l.conductance * (l.value - p[l.cell]))
            .sum()
    }

    /// Solves with outer values `log|x| + C`, `C` chosen so that the outward
    /// flux is `2π`. Returns `(φ, C, residual)`.
    fn solve_flux_matched(&mut self, tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, f64)> {
        let zero = vec![0.0; self.net.len()];
        self.set_outer(|lg| lg);
        let (p0, r0) = self.solve(tol, max_iter, &zero)?;
        let f0 = self.outer_flux(&p0);
        self.set_outer(|lg| lg + 1.0);
        let (p1, r1) = self.solve(tol, max_iter, &p0)?;
        let f1 = self.outer_flux(&p1);
        let c = (2.0 * std::f64::consts::PI - f0) / (f1 - f0);
        let p: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| a + c * (b - a)).collect();
        Ok((p, c, r0.max(r1)))
    }
}

fn curvilinear_setup(hole: &HoleGeometry) -> Option<(Coordinates, f64)> {
    match *hole {
        HoleGeometry::Disk { radius } => Some((Coordinates::LogPolar { radius }, 0.0)),
        HoleGeometry::Ellipse { semi_axes: [a, b] } if a == b => Some((Coordinates::LogPolar { radius: a }, 0.0)),
        HoleGeometry::Ellipse { semi_axes: [a, b] } => {
            let (big, small, swap) = if a > b { (a, b, false) } else { (b, a, true) };
            let c = (big * big - small * small).sqrt();
            Some((Coordinates::Elliptic { c, swap }, (small / big).atanh()))
        }
        _ => None,
    }
}

/// Radial coordinate of the curvilinear grid reaching physical radius `radius`.
fn s_at_radius(coords: Coordinates, radius: f64) -> f64 {
    match coords {
        Coordinates::LogPolar { radius: r } => (radius / r).ln(),
        Coordinates::Elliptic { c, .. } => (radius / c).asinh(),
    }
}

fn truncated_problem(hole: &HoleGeometry, opts: &StationaryOptions, radius: f64) -> Result<Truncated> {
    if let Some((coords, s0)) = curvilinear_setup(hole) {
        return Ok(Truncated::curvilinear(coords, s0, opts.n_theta, s_at_radius(coords, radius)));
    }
    let h = hole.inner_radius() * opts.cartesian_h_fraction;
    let grid = build_masked_grid(hole.clone(), 2.0 * (radius + h), h)?;
    Ok(Truncated::cartesian(grid))
}

/// Solves the stationary problem with default resolution.
pub fn solve_stationary_numeric(hole: &HoleGeometry, tol: f64) -> Result<StationaryField> {
    solve_stationary_with(hole, tol, &StationaryOptions::default())
}

/// Solves the stationary problem on two truncated domains (radii `R/2` and
/// `R`, `R = truncation_factor · outer radius`), each with outer values
/// `log|x| + C` and `C` matched to the total flux `2π`; the two constants are
/// Richardson-combined and the larger solve is rerun with the result.
pub fn solve_stationary_with(hole: &HoleGeometry, tol: f64, opts: &StationaryOptions) -> Result<StationaryField> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let big_r = opts.truncation_factor * hole.outer_radius();
    let mut small = truncated_problem(hole, opts, 0.5 * big_r)?;
    let mut large = truncated_problem(hole, opts, big_r)?;
    let (_, c1, _) = small.solve_flux_matched(tol, opts.max_iter)?;
    let (p2, c2, _) = large.solve_flux_matched(tol, opts.max_iter)?;
    // C(R) − C(∞) decays like R^{-2}
    let c_est = (4.0 * c2 - c1) / 3.0;
    large.set_outer(|lg| lg + c_est);
    let (p, residual) = large.solve(tol, opts.max_iter, &p2)?;
    Ok(finish(hole, large, p, c_est, (c2 - c1).abs(), residual, tol))
}

/// Single truncated solve at physical radius `radius` with the given outer
/// condition; the returned field extends beyond `radius` by `log|x| + C`
/// (with `C = −log R` for [`OuterCondition::OverOuterRadius`]).
pub fn solve_truncated(
    hole: &HoleGeometry,
    tol: f64,
    radius: f64,
    outer: OuterCondition,
    opts: &StationaryOptions,
) -> Result<StationaryField> {
    let mut prob = truncated_problem(hole, opts, radius)?;
    let c = match outer {
        OuterCondition::Shifted(c) => c,
        OuterCondition::OverOuterRadius => -hole.outer_radius().ln(),
    };
    prob.set_outer(|lg| lg + c);
    let zero = vec![0.0; prob.net.len()];
    let (p, residual) = prob.solve(tol, opts.max_iter, &zero)?;
    Ok(finish(hole, prob, p, c, 0.0, residual, tol))
}

fn finish(hole: &HoleGeometry, prob: Truncated, p: Vec<f64>, c_far: f64, spread: f64, residual: f64, tol: f64) -> StationaryField {
    let n = prob.grid.len();
    let mut phi = vec![0.0; n];
    for (a, &k) in prob.cells.iter().enumerate() {
        phi[k] = p[a];
    }
    let outer_value: Vec<f64> = prob.net.boundary[prob.outer_from..].iter().map(|l| l.value).collect();
    let (grad, dcomp) = match &prob.grid {
        FieldGrid::Curvilinear {
            coords,
            s0,
            ds,
            n_s,
            n_theta,
        } => curvilinear_gradients(*coords, *s0, *ds, *n_s, *n_theta, &phi, &outer_value),
        FieldGrid::Cartesian(g) => {
            // truncation cells carry their Dirichlet values for interpolation
            let mut phi_full = phi.clone();
            for k in 0..g.len() {
                if g.kind(k) == CellKind::Truncation {
                    phi_full[k] = norm(g.center(k)).ln() + c_far;
                }
            }
            phi = phi_full;
            (cartesian_gradients(g, &phi), Vec::new())
        }
    };
    let mut c_phi: f64 = 0.0;
    for k in 0..n {
        if prob.grid.is_fluid(k) {
            c_phi = c_phi.max((phi[k] - norm(prob.grid.center(k)).ln()).abs());
        }
    }
    StationaryField {
        hole: hole.clone(),
        grid: prob.grid,
        phi,
        grad,
        dcomp,
        c_far,
        c_far_spread: spread,
        c_phi,
        residual,
        tol,
    }
}

fn curvilinear_gradients(
    coords: Coordinates,
    s0: f64,
    ds: f64,
    n_s: usize,
    n_theta: usize,
    phi: &[f64],
    outer: &[f64],
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
    let k = |i: usize, j: usize| i * n_theta + j;
    let mut grad = Vec::with_capacity(n_s * n_theta);
    let mut dcomp = Vec::with_capacity(n_s * n_theta);
    for i in 0..n_s {
        for j in 0..n_theta {
            let ps = if i == 0 {
                // quadratic through the boundary (0), this cell and the next
                (phi[k(0, j)] + phi[k(1, j)] / 3.0) / ds
            } else if i == n_s - 1 {
                (-phi[k(i - 1, j)] / 3.0 - phi[k(i, j)] + 4.0 / 3.0 * outer[j]) / ds
            } else {
                (phi[k(i + 1, j)] - phi[k(i - 1, j)]) / (2.0 * ds)
            };
            let pt = (phi[k(i, (j + 1) % n_theta)] - phi[k(i, (j + n_theta - 1) % n_theta)]) / (2.0 * dth);
            let z = Complex64::new(s0 + (i as f64 + 0.5) * ds, (j as f64 + 0.5) * dth);
            let g = (Complex64::new(ps, -pt) / coords.dmap(z)).conj();
            grad.push([g.re, g.im]);
            dcomp.push([ps, pt]);
        }
    }
    (grad, dcomp)
}

fn cartesian_gradients(g: &MaskedGrid2D, phi: &[f64]) -> Vec<[f64; 2]> {
    let n = g.n();
    let h = g.h();
    let mut out = vec![[0.0; 2]; g.len()];
    for k in 0..g.len() {
        if g.kind(k) == CellKind::Hole {
            continue;
        }
        let (i, j) = (k % n, k / n);
        let mut comp = [0.0; 2];
        for (axis, c) in comp.iter_mut().enumerate() {
            let (lo, hi) = if axis == 0 {
                (
                    if i > 0 { Some(g.index(i - 1, j)) } else { None },
                    if i + 1 < n { Some(g.index(i + 1, j)) } else { None },
                )
            } else {
                (
                    if j > 0 { Some(g.index(i, j - 1)) } else { None },
                    if j + 1 < n { Some(g.index(i, j + 1)) } else { None },
                )
            };
            let is_hole = |q: Option<usize>| q.map_or(false, |q| g.kind(q) == CellKind::Hole);
            // one-sided quadratic through the boundary crossing (φ = 0), this
            // cell and the opposite neighbour
            let near_wall = |wall: usize, other: usize| {
                let s = g.hole().unwrap().crossing_fraction(g.center(k), g.center(wall)).max(0.25);
                (phi[k] * (1.0 - s) / s + phi[other] * s / (1.0 + s)) / h
            };
            *c = match (lo, hi) {
                (Some(a), Some(b)) if !is_hole(lo) && !is_hole(hi) => (phi[b] - phi[a]) / (2.0 * h),
                (Some(a), Some(b)) if is_hole(lo) && !is_hole(hi) => near_wall(a, b),
                (Some(a), Some(b)) if !is_hole(lo) && is_hole(hi) => -near_wall(b, a),
                (None, Some(b)) => (phi[b] - phi[k]) / h,
                (Some(a), None) => (phi[k] - phi[a]) / h,
                _ => 0.0,
            };
        }
        out[k] = comp;
    }
    out
}

/// Empirical gradient bounds of a solved field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientReport {
    /// `min |x||∇φ|` over solved cells.
    pub c_low: f64,
    /// `max |x||∇φ|` over solved cells.
    pub c_high: f64,
    /// Smallest cell radius beyond which `1/2 ≤ x·∇φ ≤ |x||∇φ| ≤ 2` holds at every cell.
    pub r_split: f64,
    /// `min x·∇φ` over cells with `|x| ≥ r_split`.
    pub radial_min: f64,
    /// `max |x||∇φ|` over cells with `|x| ≥ r_split`.
    pub radial_max: f64,
}

/// Computes `c_low`, `C_high` and the split radius of the far-field bounds.
pub fn check_gradient_bounds(field: &StationaryField) -> Result<GradientReport> {
    let mut samples: Vec<(f64, f64, f64)> = field
        .fluid_cells()
        .map(|(k, x)| {
            let g = field.grad[k];
            (norm(x), x[0] * g[0] + x[1] * g[1], norm(x) * norm(g))
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyRegion("stationary field has no solved cells".into()));
    }
    let c_low = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let c_high = samples.iter().map(|s| s.2).fold(0.0, f64::max);
    if !(c_low > 0.0) {
        return Err(Error::DegenerateGradient { c_low });
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ok = |s: &(f64, f64, f64)| s.1 >= 0.5 && s.1 <= s.2 * (1.0 + 1e-12) && s.2 <= 2.0;
    let first_bad = samples.iter().position(|s| !ok(s));
    let keep = first_bad.unwrap_or(samples.len());
    let r_split = match first_bad {
        None => samples.last().unwrap().0,
        Some(0) => f64::INFINITY,
        Some(i) => samples[i - 1].0,
    };
    let kept = &samples[..keep];
    Ok(GradientReport {
        c_low,
        c_high,
        r_split,
        radial_min: kept.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
        radial_max: kept.iter().map(|s| s.2).fold(0.0, f64::max),
    })
}

/// `inf φ` over the curve at distance `r0` outside the hole boundary,
/// sampled at `n` boundary points displaced along their outward normals.
pub fn alpha_bar_0(phi: &dyn Potential, hole: &HoleGeometry, r0: f64, n: usize) -> f64 {
    let b = hole.boundary_samples(n);
    let m = b.len();
    (0..m)
        .map(|i| {
            let (p, q) = (b[(i + m - 1) % m], b[(i + 1) % m]);
            let (tx, ty) = (q[0] - p[0], q[1] - p[1]);
            let tn = tx.hypot(ty);
            let mut nrm = [ty / tn, -tx / tn];
            let probe = 1e-6 * hole.outer_radius();
            if hole.contains([b[i][0] + probe * nrm[0], b[i][1] + probe * nrm[1]]) {
                nrm = [-nrm[0], -nrm[1]];
            }
            phi.phi([b[i][0] + r0 * nrm[0], b[i][1] + r0 * nrm[1]])
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn disk_formula_examples() {
        assert_eq!(phi_disk(1.0, [1.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(phi_disk(1.0, [0.0, E]).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(phi_disk(2.0, [4.0, 0.0]).unwrap(), std::f64::consts::LN_2, max_relative = 1e-15);
        assert!(matches!(phi_disk(1.0, [0.5, 0.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn kelvin_identity_on_disks() {
        for r in [0.5, 1.0, 3.0] {
            let map = ConformalMapSpec::disk(r).unwrap();
            for k in 0..200 {
                let th = 0.37 * k as f64;
                let d = r * (1.0 + 0.07 * k as f64);
                let x = [d * th.cos(), d * th.sin()];
                let a = phi_conformal(&map, x).unwrap();
                let b = phi_disk(r, x).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
                let g = grad_conformal(&map, x).unwrap();
                let ge = DiskPotential { radius: r }.grad(x);
                assert!((g[0] - ge[0]).abs() < 1e-12 && (g[1] - ge[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conformal_vanishes_on_boundary() {
        let map = ConformalMapSpec::ellipse(2.0, 1.0).unwrap();
        for k in 0..64 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let x = [2.0 * th.cos(), th.sin()];
            assert!(phi_conformal(&map, x).unwrap().abs() < 1e-10);
        }
    }

    /// Oracle: elliptic coordinates give φ = μ − μ₀ in closed form.
    #[test]
    fn joukowski_matches_elliptic_coordinates() {
        let map = ConformalMapSpec::ellipse(2.0, 1.0).unwrap();
        let c = 3f64.sqrt();
        let mu0 = 0.5f64.atanh();
        for (mu, th) in [(0.7, 0.3), (1.5, 2.0), (3.0, 4.0), (0.6, 1.6)] {
            let x = [c * f64::cosh(mu) * f64::cos(th), c * f64::sinh(mu) * f64::sin(th)];
            assert_relative_eq!(phi_conformal(&map, x).unwrap(), mu - mu0, max_relative = 1e-12);
        }
        // gradient against centered differences of the potential
        let x = [2.5, 1.3];
        let g = grad_conformal(&map, x).unwrap();
        let h = 1e-6;
        let fd = [
            (phi_conformal(&map, [x[0] + h, x[1]]).unwrap() - phi_conformal(&map, [x[0] - h, x[1]]).unwrap()) / (2.0 * h),
            (phi_conformal(&map, [x[0], x[1] + h]).unwrap() - phi_conformal(&map, [x[0], x[1] - h]).unwrap()) / (2.0 * h),
        ];
        assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
    }

    #[test]
    fn disk_numeric_solve() {
        let field = solve_stationary_numeric(&HoleGeometry::disk(1.0).unwrap(), 1e-12).unwrap();
        let err = field
            .fluid_cells()
            .map(|(k, x)| (field.values()[k] - norm(x).ln()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "max error {err}");
        assert!(field.residual() <= 1e-12);
        assert!(field.c_far().abs() < 1e-6);
        let rep = check_gradient_bounds(&field).unwrap();
        assert!((rep.c_low - 1.0).abs() < 1e-6 && (rep.c_high - 1.0).abs() < 1e-6, "{rep:?}");
        for (k, x) in field.fluid_cells() {
            let g = field.gradients()[k];
            assert!((x[0] * g[0] + x[1] * g[1] - 1.0).abs() < 1e-6);
        }
        let field2 = solve_stationary_numeric(&HoleGeometry::disk(2.0).unwrap(), 1e-12).unwrap();
        assert!((field2.phi([4.0, 0.0]) - 2f64.ln()).abs() <= 1e-4);
        assert!((field2.phi([0.0, 4.0]) - 2f64.ln()).abs() <= 1e-4);
    }

    #[test]
    fn ellipse_numeric_solve_agrees_with_conformal() {
        let hole = HoleGeometry::ellipse(2.0, 1.0).unwrap();
        let field = solve_stationary_numeric(&hole, 1e-12).unwrap();
        let map = ConformalMapSpec::ellipse(2.0, 1.0).unwrap();
        let exact = phi_conformal(&map, [4.0, 0.0]).unwrap();
        assert!(
            (field.phi([4.0, 0.0]) - exact).abs() <= 1e-6,
            "{} vs {exact}",
            field.phi([4.0, 0.0])
        );
        // far-field constant: φ − log|x| → −μ₀ − log(c/2)
        let c_exact = -(0.5f64.atanh()) - (3f64.sqrt() / 2.0).ln();
        assert!((field.c_far() - c_exact).abs() < 1e-6, "{} vs {c_exact}", field.c_far());
        let rep = check_gradient_bounds(&field).unwrap();
        assert!(rep.c_low > 0.0 && rep.r_split <= 20.0, "{rep:?}");
    }

    #[test]
    fn rotated_ellipse() {
        let field = solve_stationary_numeric(&HoleGeometry::ellipse(1.0, 2.0).unwrap(), 1e-12).unwrap();
        let map = ConformalMapSpec::ellipse(1.0, 2.0).unwrap();
        for x in [[0.0, 4.0], [1.5, 0.5], [-3.0, 2.0]] {
            assert!((field.phi(x) - phi_conformal(&map, x).unwrap()).abs() < 1e-6);
            let (g, ge) = (field.grad(x), grad_conformal(&map, x).unwrap());
            assert!((g[0] - ge[0]).abs() < 1e-3 && (g[1] - ge[1]).abs() < 1e-3, "{g:?} vs {ge:?}");
        }
    }

    #[test]
    fn curve_hole_uses_cartesian_grid() {
        // octagon inscribed in the unit circle: φ lies between the potentials
        // of the inscribed and circumscribed disks
        let pts: Vec<Point> = (0..8)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 4.0;
                [th.cos(), th.sin()]
            })
            .collect();
        let hole = HoleGeometry::curve(pts).unwrap();
        let opts = StationaryOptions {
            truncation_factor: 8.0,
            cartesian_h_fraction: 1.0 / 10.0,
            ..Default::default()
        };
        let field = solve_stationary_with(&hole, 1e-10, &opts).unwrap();
        let r_in = (std::f64::consts::PI / 8.0).cos();
        for x in [[2.0, 0.0], [1.5, 1.5], [-3.0, 1.0], [0.0, -5.0]] {
            let v = field.phi(x);
            let d = norm(x);
            assert!(v >= d.ln() - 0.02 && v <= (d / r_in).ln() + 0.02, "{x:?}: {v}");
        }
    }

    #[test]
    fn alpha_bar_on_disk() {
        let p = DiskPotential { radius: 1.0 };
        let a = alpha_bar_0(&p, &HoleGeometry::disk(1.0).unwrap(), 0.1, 64);
        assert_relative_eq!(a, 1.1f64.ln(), max_relative = 1e-9);
    }
}
