//! Conservative explicit time integration of `∂ₜu = Δuᵐ` outside a hole.
//!
//! Every mesh is turned into a [`FluxNetwork`]: cells with volumes, faces
//! with conductances, and Dirichlet links to the hole (where `u = 0`). One
//! explicit Euler step moves `c (u_iᵐ − u_jᵐ) dt` across each face, so mass
//! changes only through the hole links and the change is recorded exactly.
//! Under the step-size bound of [`SolverState::stable_dt`] every cell update
//! is a nonnegative combination of old values, which makes the scheme
//! positivity preserving and order preserving.
//!
//! Radial meshes use the geometric-mean cell centers and the conductance
//! `2π / log(r_{i+1}/r_i)`, for which `log(r/ρ₀)` is exactly discretely
//! harmonic; the weighted moment `Σ u φ V` is then conserved up to round-off.
//! Masked Cartesian meshes use unit conductances between fluid cells and
//! `1/s` on links into the hole, `s h` being the distance from the cell
//! center to the boundary along the link (clamped below at `h/4`).
//!
//! Cells carry exact zeros beyond the numerical support; a run doubles the
//! outer truncation radius whenever the support passes 70% of it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{norm, CellKind, HoleGeometry, MaskedGrid2D, Point, RadialGrid};
use crate::network::{BoundaryLink, FluxNetwork};
use crate::special::ProfileSpec;
use crate::stationary::{Potential, StationaryField};

/// The spatial discretization of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Mesh {
    /// Radially symmetric data: annular cells outside a disk hole, or a
    /// whole-plane grid starting at the origin.
    Radial(RadialGrid),
    /// Uniform Cartesian grid with hole and truncation masks.
    Masked(MaskedGrid2D),
}

impl Mesh {
    /// The hole the mesh excludes; `None` for whole-plane meshes.
    pub fn hole(&self) -> Option<HoleGeometry> {
        match self {
            Mesh::Radial(g) if g.is_whole_plane() => None,
            Mesh::Radial(g) => Some(HoleGeometry::Disk { radius: g.r_in() }),
            Mesh::Masked(g) => g.hole().cloned(),
        }
    }

    /// Radius of the largest origin-centered disk the mesh resolves.
    pub fn outer_radius(&self) -> f64 {
        match self {
            Mesh::Radial(g) => g.r_out(),
            Mesh::Masked(g) => g.truncation_radius(),
        }
    }

    /// Smallest cell width.
    pub fn h_min(&self) -> f64 {
        match self {
            Mesh::Radial(g) => (0..g.len()).map(|i| g.width(i)).fold(f64::INFINITY, f64::min),
            Mesh::Masked(g) => g.h(),
        }
    }

    /// Short human-readable description, used in run summaries.
    pub fn describe(&self) -> String {
        match self {
            Mesh::Radial(g) => format!(
                "radial cells={} r_in={} r_out={} stretch={} h_min={}",
                g.len(),
                g.r_in(),
                g.r_out(),
                g.stretch(),
                self.h_min()
            ),
            Mesh::Masked(g) => format!("masked n={} h={} extent={}", g.n(), g.h(), g.extent()),
        }
    }

    fn doubled(&self) -> Result<Mesh> {
        Ok(match self {
            Mesh::Radial(g) => {
                let mut g = g.clone();
                let target = 2.0 * g.r_out();
                g.extend_to(target);
                Mesh::Radial(g)
            }
            Mesh::Masked(g) => Mesh::Masked(g.enlarged(2)?),
        })
    }
}

/// A mesh together with its flux network and per-cell geometry.
#[derive(Debug)]
pub struct Discretization {
    mesh: Mesh,
    network: FluxNetwork,
    /// Mesh index of each network cell (identity for radial meshes).
    cells: Vec<usize>,
    centers: Vec<Point>,
    radii: Vec<f64>,
    /// Per-cell `Σ conductances / volume`.
    rate: Vec<f64>,
    inv_volume: Vec<f64>,
    face_i: Vec<u32>,
    face_j: Vec<u32>,
    face_c: Vec<f64>,
    /// Mesh index → network cell.
    lookup: Vec<Option<usize>>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let (network, cells, centers) = match &mesh {
            Mesh::Radial(g) => radial_network(g),
            Mesh::Masked(g) => masked_network(g),
        };
        if network.is_empty() {
            return Err(Error::geometry("mesh has no fluid cells"));
        }
        let mesh_len = match &mesh {
            Mesh::Radial(g) => g.len(),
            Mesh::Masked(g) => g.len(),
        };
        let mut lookup = vec![None; mesh_len];
        for (c, &k) in cells.iter().enumerate() {
            lookup[k] = Some(c);
        }
        let radii = centers.iter().map(|&x| norm(x)).collect();
        let total = network.total_conductance();
        let rate = total.iter().zip(&network.volumes).map(|(d, v)| d / v).collect();
        let inv_volume = network.volumes.iter().map(|v| 1.0 / v).collect();
        let face_i = network.faces.iter().map(|f| f.0 as u32).collect();
        let face_j = network.faces.iter().map(|f| f.1 as u32).collect();
        let face_c = network.faces.iter().map(|f| f.2).collect();
        Ok(Discretization {
            mesh,
            network,
            cells,
            centers,
            radii,
            rate,
            inv_volume,
            face_i,
            face_j,
            face_c,
            lookup,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn network(&self) -> &FluxNetwork {
        &self.network
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Representative point of each cell; radial cells sit on the positive x-axis.
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn volumes(&self) -> &[f64] {
        &self.network.volumes
    }

    /// Network cell containing `x`, if it is a fluid cell of the mesh.
    pub fn cell_of(&self, x: Point) -> Option<usize> {
        match &self.mesh {
            Mesh::Radial(g) => g.locate(norm(x)).and_then(|k| self.lookup[k]),
            Mesh::Masked(g) => g.cell_at(x).and_then(|k| self.lookup[k]),
        }
    }

    /// Mesh index of network cell `c`.
    pub fn mesh_index(&self, c: usize) -> usize {
        self.cells[c]
    }

    /// Cell averages of `f` by composite midpoint quadrature (32 radial
    /// sub-rings weighted by area, or 8×8 sub-squares).
    pub fn cell_averages(&self, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
        match &self.mesh {
            Mesh::Radial(g) => (0..g.len())
                .map(|i| {
                    let (a, b) = (g.edges()[i], g.edges()[i + 1]);
                    let q = 32;
                    let (mut acc, mut wsum) = (0.0, 0.0);
                    for k in 0..q {
                        let r = a + (b - a) * (k as f64 + 0.5) / q as f64;
                        acc += f([r, 0.0]) * r;
                        wsum += r;
                    }
                    acc / wsum
                })
                .collect(),
            Mesh::Masked(g) => self
                .cells
                .iter()
                .map(|&k| {
                    let [cx, cy] = g.center(k);
                    let q = 8;
                    let h = g.h();
                    let mut acc = 0.0;
                    for a in 0..q {
                        for b in 0..q {
                            let dx = h * ((a as f64 + 0.5) / q as f64 - 0.5);
                            let dy = h * ((b as f64 + 0.5) / q as f64 - 0.5);
                            acc += f([cx + dx, cy + dy]);
                        }
                    }
                    acc / (q * q) as f64
                })
                .collect(),
        }
    }
}

fn radial_network(g: &RadialGrid) -> (FluxNetwork, Vec<usize>, Vec<Point>) {
    use std::f64::consts::PI;
    let n = g.len();
    let centers: Vec<f64> = g.centers();
    let mut net = FluxNetwork {
        volumes: (0..n).map(|i| g.area(i)).collect(),
        ..Default::default()
    };
    let whole = g.is_whole_plane();
    for i in 0..n.saturating_sub(1) {
        let c = if whole {
            2.0 * PI * g.edges()[i + 1] / (centers[i + 1] - centers[i])
        } else {
            2.0 * PI / (centers[i + 1] / centers[i]).ln()
        };
        net.faces.push((i, i + 1, c));
    }
    if !whole {
        net.boundary.push(BoundaryLink {
            cell: 0,
            conductance: 2.0 * PI / (centers[0] / g.r_in()).ln(),
            value: 0.0,
        });
    }
    (net, (0..n).collect(), centers.iter().map(|&r| [r, 0.0]).collect())
}

/// Smallest distance fraction used for links into the hole.
const MIN_WALL_FRACTION: f64 = 0.25;

fn masked_network(g: &MaskedGrid2D) -> (FluxNetwork, Vec<usize>, Vec<Point>) {
    let n = g.n();
    let cells: Vec<usize> = (0..g.len()).filter(|&k| g.kind(k) == CellKind::Fluid).collect();
    let mut index = vec![usize::MAX; g.len()];
    for (c, &k) in cells.iter().enumerate() {
        index[k] = c;
    }
    let mut net = FluxNetwork {
        volumes: vec![g.h() * g.h(); cells.len()],
        ..Default::default()
    };
    for (c, &k) in cells.iter().enumerate() {
        let (i, j) = (k % n, k / n);
        // fluid cells never touch the grid edge: the truncation ring surrounds them
        let neighbours = [g.index(i + 1, j), g.index(i, j + 1), g.index(i - 1, j), g.index(i, j - 1)];
        for (dir, &nb) in neighbours.iter().enumerate() {
            match g.kind(nb) {
                CellKind::Fluid if dir < 2 => net.faces.push((c, index[nb], 1.0)),
                CellKind::Hole => {
                    let hole = g.hole().expect("hole cells imply a hole");
                    let s = hole.crossing_fraction(g.center(k), g.center(nb));
                    net.boundary.push(BoundaryLink {
                        cell: c,
                        conductance: 1.0 / s.max(MIN_WALL_FRACTION),
                        value: 0.0,
                    });
                }
                _ => {}
            }
        }
    }
    let centers = cells.iter().map(|&k| g.center(k)).collect();
    (net, cells, centers)
}

/// `u^{m−1}` with fast paths for the exponents used most.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Power {
    Two,
    Three,
    ThreeHalves,
    General(f64),
}

impl Power {
    fn new(m: f64) -> Self {
        if m == 2.0 {
            Power::Two
        } else if m == 3.0 {
            Power::Three
        } else if m == 1.5 {
            Power::ThreeHalves
        } else {
            Power::General(m - 1.0)
        }
    }

    #[inline(always)]
    fn pressure(self, u: f64) -> f64 {
        match self {
            Power::Two => u,
            Power::Three => u * u,
            Power::ThreeHalves => u.sqrt(),
            Power::General(e) => u.powf(e),
        }
    }
}

/// Initial density, sampled at cell centers.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Zero,
    /// `A (1 − |x − c|²/ρ²)₊²`. Radial meshes require `c = 0`.
    Bump {
        center: Point,
        radius: f64,
        amplitude: f64,
    },
    /// `A (1 − ((|x| − R)/w)²)₊²`, a radially symmetric annular bump.
    Ring {
        radius: f64,
        width: f64,
        amplitude: f64,
    },
    /// Cell averages of the two-dimensional Barenblatt profile of the given
    /// mass at time `t0`.
    Barenblatt {
        mass: f64,
        t0: f64,
    },
    /// Explicit values, one per network cell.
    Values(Vec<f64>),
}

impl InitialData {
    fn sample(&self, disc: &Discretization, m: f64) -> Result<Vec<f64>> {
        let bump = |s: f64| if s < 1.0 { (1.0 - s).powi(2) } else { 0.0 };
        let u: Vec<f64> = match self {
            InitialData::Zero => vec![0.0; disc.len()],
            InitialData::Bump { center, radius, amplitude } => {
                if matches!(disc.mesh, Mesh::Radial(_)) && *center != [0.0, 0.0] {
                    return Err(Error::param("an off-center bump needs a masked mesh"));
                }
                disc.centers
                    .iter()
                    .map(|x| {
                        let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                        amplitude * bump(d2 / radius.powi(2))
                    })
                    .collect()
            }
            InitialData::Ring { radius, width, amplitude } => disc
                .radii
                .iter()
                .map(|r| amplitude * bump(((r - radius) / width).powi(2)))
                .collect(),
            InitialData::Barenblatt { mass, t0 } => {
                let spec = ProfileSpec::new(m, 2, *mass)?;
                disc.cell_averages(&|x| spec.eval_radial(norm(x), *t0))
            }
            InitialData::Values(v) => {
                if v.len() != disc.len() {
                    return Err(Error::param(format!("expected {} initial values, got {}", disc.len(), v.len())));
                }
                v.clone()
            }
        };
        if let Some(bad) = u.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::param(format!(
                "initial data must be finite and nonnegative (cell {bad}: {})",
                u[bad]
            )));
        }
        Ok(u)
    }
}

/// Density on a mesh at one instant, plus the boundary outflow accumulated so far.
#[derive(Clone, Debug)]
pub struct SolverState {
    disc: Arc<Discretization>,
    u: Vec<f64>,
    t: f64,
    m: f64,
    power: Power,
    outflow: f64,
    dt_max: f64,
    /// Largest center radius with `u > 0`.
    front: f64,
}

impl SolverState {
    pub fn new(mesh: Mesh, m: f64, t: f64, initial: &InitialData) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(Error::param(format!("m > 1 required, got {m}")));
        }
        let disc = Arc::new(Discretization::new(mesh)?);
        let u = initial.sample(&disc, m)?;
        let mut state = SolverState {
            disc,
            u,
            t,
            m,
            power: Power::new(m),
            outflow: 0.0,
            dt_max: f64::INFINITY,
            front: 0.0,
        };
        state.front = state.support_front();
        Ok(state)
    }

    /// Caps the time step; without a cap `u ≡ 0` admits any step.
    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn mesh(&self) -> &Mesh {
        &self.disc.mesh
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Mass that has left through the hole boundary since the start.
    pub fn outflow(&self) -> f64 {
        self.outflow
    }

    /// `Σ u V`.
    pub fn mass(&self) -> f64 {
        self.u.iter().zip(self.disc.volumes()).map(|(u, v)| u * v).sum()
    }

    pub fn sup(&self) -> f64 {
        self.u.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// `Σ u φ(center) V`.
    pub fn weighted_moment_with(&self, phi: &dyn Potential) -> f64 {
        self.u
            .iter()
            .zip(&self.disc.centers)
            .zip(self.disc.volumes())
            .filter(|((u, _), _)| **u > 0.0)
            .map(|((u, &x), v)| u * phi.phi(x) * v)
            .sum()
    }

    /// Density in the cell containing `x` (zero outside the fluid cells).
    pub fn value_at(&self, x: Point) -> f64 {
        self.disc.cell_of(x).map_or(0.0, |c| self.u[c])
    }

    /// Piecewise-linear reconstruction through the cell centers: linear in
    /// `r` on radial meshes (reaching 0 on the hole boundary), bilinear on
    /// masked meshes with non-fluid cells read as 0.
    pub fn interpolate(&self, x: Point) -> f64 {
        let disc = &*self.disc;
        match &disc.mesh {
            Mesh::Radial(g) => {
                let r = norm(x);
                let radii = &disc.radii;
                let last = radii.len() - 1;
                if r <= radii[0] {
                    if g.is_whole_plane() {
                        self.u[0]
                    } else if r < g.r_in() {
                        0.0
                    } else {
                        self.u[0] * (r - g.r_in()) / (radii[0] - g.r_in())
                    }
                } else if r >= radii[last] {
                    if r <= g.r_out() {
                        self.u[last]
                    } else {
                        0.0
                    }
                } else {
                    let k = radii.partition_point(|&c| c <= r) - 1;
                    let w = (r - radii[k]) / (radii[k + 1] - radii[k]);
                    self.u[k] * (1.0 - w) + self.u[k + 1] * w
                }
            }
            Mesh::Masked(g) => {
                let (n, h) = (g.n() as f64, g.h());
                let fx = x[0] / h + 0.5 * n - 0.5;
                let fy = x[1] / h + 0.5 * n - 0.5;
                if !(fx >= 0.0 && fy >= 0.0 && fx <= n - 1.0 && fy <= n - 1.0) {
                    return 0.0;
                }
                let (i0, j0) = ((fx.floor() as usize).min(g.n() - 2), (fy.floor() as usize).min(g.n() - 2));
                let (wx, wy) = (fx - i0 as f64, fy - j0 as f64);
                let at = |i: usize, j: usize| disc.lookup[g.index(i, j)].map_or(0.0, |c| self.u[c]);
                (1.0 - wx) * (1.0 - wy) * at(i0, j0)
                    + wx * (1.0 - wy) * at(i0 + 1, j0)
                    + (1.0 - wx) * wy * at(i0, j0 + 1)
                    + wx * wy * at(i0 + 1, j0 + 1)
            }
        }
    }

    fn support_front(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.disc.radii)
            .filter(|(u, _)| **u > 0.0)
            .fold(0.0, |a, (_, &r)| a.max(r))
    }

    /// Largest step for which the explicit update stays monotone:
    /// `safety · min_i V_i / (D_i m u_i^{m−1})`, `D_i` the total conductance of
    /// cell `i`. On a uniform Cartesian grid `V/D = h²/4`, so this is
    /// `safety · h² / (2·2·m·max u^{m−1})`.
    pub fn stable_dt(&self, safety: f64) -> f64 {
        let worst = self
            .u
            .iter()
            .zip(&self.disc.rate)
            .fold(0.0f64, |a, (&u, &r)| a.max(self.power.pressure(u) * r));
        if worst == 0.0 {
            self.dt_max
        } else {
            (safety / (self.m * worst)).min(self.dt_max)
        }
    }

    /// One explicit Euler step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let disc = &*self.disc;
        let n = self.u.len();
        let mut p = Vec::with_capacity(n);
        p.extend(self.u.iter().map(|&u| u * self.power.pressure(u)));
        let mut du = vec![0.0; n];
        for ((&i, &j), &c) in disc.face_i.iter().zip(&disc.face_j).zip(&disc.face_c) {
            let (i, j) = (i as usize, j as usize);
            let f = c * (p[i] - p[j]);
            du[i] -= f;
            du[j] += f;
        }
        let mut out = 0.0;
        for l in &disc.network.boundary {
            let f = l.conductance * p[l.cell];
            du[l.cell] -= f;
            out += f;
        }
        let mut front = 0.0f64;
        for c in 0..n {
            let v = self.u[c] + dt * du[c] * disc.inv_volume[c];
            if v < 0.0 || !v.is_finite() {
                return Err(Error::StabilityFault {
                    t: self.t,
                    cell: c,
                    value: v,
                });
            }
            if v > 0.0 && disc.radii[c] > front {
                front = disc.radii[c];
            }
            self.u[c] = v;
        }
        self.outflow += out * dt;
        self.front = front;
        self.t += dt;
        Ok(())
    }

    /// The same density on a mesh whose truncation radius is doubled.
    fn grown(&self) -> Result<SolverState> {
        let mesh = self.disc.mesh.doubled()?;
        let disc = Arc::new(Discretization::new(mesh)?);
        let mut u = vec![0.0; disc.len()];
        match (&self.disc.mesh, &disc.mesh) {
            (Mesh::Radial(_), Mesh::Radial(_)) => u[..self.u.len()].copy_from_slice(&self.u),
            (Mesh::Masked(small), Mesh::Masked(big)) => {
                for (c, &val) in self.u.iter().enumerate() {
                    let k = big.embed_index(small, self.disc.cells[c]);
                    let target = disc.lookup[k].expect("fluid cells stay fluid when the grid grows");
                    u[target] = val;
                }
            }
            _ => unreachable!("doubling keeps the mesh family"),
        }
        Ok(SolverState { disc, u, ..self.clone() })
    }
}

/// `M_φ = Σ u φ V` with the numerically computed potential; the field must
/// describe the same hole as the run.
pub fn weighted_moment(state: &SolverState, field: &StationaryField) -> Result<f64> {
    match state.mesh().hole() {
        Some(h) if &h == field.hole() => Ok(state.weighted_moment_with(field)),
        other => Err(Error::IncompatibleGrids(format!(
            "run hole {other:?} differs from stationary-field hole {:?}",
            field.hole()
        ))),
    }
}

/// Support radii `(ζ₋, ζ₊)` for the positivity cutoff `threshold`.
///
/// `ζ₊` is the largest radius of a cell with `u > threshold`, and `ζ₋` the
/// smallest radius of a cell with `u ≤ threshold`. Across each face joining
/// a cell above the cutoff to one below it, the crossing radius is obtained
/// by linear interpolation of `u` between the inside cell center and the face
/// midpoint, and that crossing replaces the cell radius.
pub fn support_radii(state: &SolverState, threshold: f64) -> Result<(f64, f64)> {
    if !(threshold > 0.0) {
        return Err(Error::param(format!("support threshold must be positive, got {threshold}")));
    }
    let disc = &*state.disc;
    let u = &state.u;
    let r = &disc.radii;
    let above = |c: usize| u[c] > threshold;
    if !(0..u.len()).any(above) {
        return Err(Error::EmptySupport { threshold });
    }
    let mut plus: Vec<f64> = (0..u.len()).map(|c| if above(c) { r[c] } else { f64::NEG_INFINITY }).collect();
    let mut minus: Vec<f64> = (0..u.len()).map(|c| if above(c) { f64::INFINITY } else { r[c] }).collect();
    let mut plus_seen = vec![false; u.len()];
    let mut minus_seen = vec![false; u.len()];
    for &(i, j, _) in &disc.network.faces {
        let (hi, lo) = match (above(i), above(j)) {
            (true, false) => (i, j),
            (false, true) => (j, i),
            _ => continue,
        };
        let face = 0.5 * (r[hi] + r[lo]);
        let cross = r[hi] + (face - r[hi]) * (u[hi] - threshold) / (u[hi] - u[lo]);
        plus[hi] = if plus_seen[hi] { plus[hi].max(cross) } else { cross };
        minus[lo] = if minus_seen[lo] { minus[lo].min(cross) } else { cross };
        plus_seen[hi] = true;
        minus_seen[lo] = true;
    }
    let zp = plus.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let zm = minus.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    // support filling the whole mesh: the first unresolved radius is the truncation
    let zm = if zm.is_finite() { zm } else { disc.mesh.outer_radius() };
    Ok((zm, zp))
}

/// What to do when the support approaches the truncation radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthPolicy {
    /// Double the truncation radius, extending by zeros.
    Extend,
    /// Stop with [`Error::TruncationReached`].
    Abort,
}

/// Time-stepping and bookkeeping options of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// Fraction of the monotonicity step bound actually used.
    pub safety: f64,
    pub t_end: f64,
    /// Ratio between consecutive checkpoint times.
    pub checkpoint_ratio: f64,
    /// Support cutoff relative to `sup u`.
    pub support_threshold: f64,
    pub growth: GrowthPolicy,
    /// Fraction of the truncation radius the support may reach before growth.
    pub growth_trigger: f64,
    /// Keep a copy of the state at every checkpoint.
    pub keep_snapshots: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            safety: 0.45,
            t_end: 10.0,
            checkpoint_ratio: 10f64.powf(0.125),
            support_threshold: 1e-12,
            growth: GrowthPolicy::Extend,
            growth_trigger: 0.7,
            keep_snapshots: false,
        }
    }
}

/// Checkpoint times: `t_start`, every `ratioᵏ` strictly between, and `t_end`.
/// Powers within 1e-9 relative of a power of ten are snapped to it.
pub fn checkpoint_times(t_start: f64, t_end: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(ratio > 1.0) {
        return Err(Error::param(format!("checkpoint ratio must exceed 1, got {ratio}")));
    }
    if !(t_end >= t_start) {
        return Err(Error::param(format!("t_end {t_end} precedes t_start {t_start}")));
    }
    let mut times = vec![t_start];
    let lr = ratio.ln();
    let mut k = (t_start.ln() / lr).floor() as i64;
    loop {
        let mut t = (k as f64 * lr).exp();
        let decade = 10f64.powf(t.log10().round());
        if ((t - decade) / decade).abs() < 1e-9 {
            t = decade;
        }
        k += 1;
        if t <= t_start * (1.0 + 1e-12) {
            continue;
        }
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        times.push(t);
    }
    if t_end > t_start {
        times.push(t_end);
    }
    Ok(times)
}

/// Diagnostics at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub mass: f64,
    /// `NaN` when the run has no potential attached.
    pub weighted_moment: f64,
    pub zeta_minus: f64,
    pub zeta_plus: f64,
    pub sup_u: f64,
    pub outflow: f64,
}

/// Diagnostics of a run, with optional snapshots taken at the checkpoints.
#[derive(Clone, Debug, Default)]
pub struct RunRecord {
    pub checkpoints: Vec<Checkpoint>,
    pub snapshots: Vec<SolverState>,
    pub steps: u64,
    pub growths: u32,
}

impl RunRecord {
    pub fn times(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.t).collect()
    }

    /// The checkpoint whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&Checkpoint> {
        self.checkpoints.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Snapshot whose time is within 1e-9 relative of `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&SolverState> {
        self.snapshots.iter().find(|s| ((s.t - t) / t).abs() < 1e-9)
    }
}

fn checkpoint(state: &SolverState, cfg: &SimulationConfig, phi: Option<&dyn Potential>) -> Result<Checkpoint> {
    let sup = state.sup();
    let (zm, zp) = if sup > 0.0 {
        support_radii(state, cfg.support_threshold * sup)?
    } else {
        (0.0, 0.0)
    };
    Ok(Checkpoint {
        t: state.t,
        mass: state.mass(),
        weighted_moment: phi.map_or(f64::NAN, |p| state.weighted_moment_with(p)),
        zeta_minus: zm,
        zeta_plus: zp,
        sup_u: sup,
        outflow: state.outflow,
    })
}

/// Advances `state` to `cfg.t_end`, recording diagnostics at the checkpoint
/// times; `phi` supplies the weight of the weighted moment.
pub fn run(state: SolverState, cfg: &SimulationConfig, phi: Option<&dyn Potential>) -> Result<(RunRecord, SolverState)> {
    let (mut records, mut states) = run_ensemble(vec![state], cfg, &[phi])?;
    Ok((records.remove(0), states.remove(0)))
}

/// Advances several states in lockstep with a common time step (the smallest
/// stable step among them), so that their discrete solutions can be compared
/// cell by cell. When one member's support needs room, every member's mesh
/// is doubled.
pub fn run_ensemble(
    mut states: Vec<SolverState>,
    cfg: &SimulationConfig,
    phis: &[Option<&dyn Potential>],
) -> Result<(Vec<RunRecord>, Vec<SolverState>)> {
    if states.is_empty() || phis.len() != states.len() {
        return Err(Error::param("ensemble needs one potential slot per state"));
    }
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(Error::param(format!("safety must lie in (0, 1], got {}", cfg.safety)));
    }
    if !(cfg.growth_trigger > 0.0 && cfg.growth_trigger < 1.0) {
        return Err(Error::param(format!(
            "growth trigger must lie in (0, 1), got {}",
            cfg.growth_trigger
        )));
    }
    let t0 = states[0].t;
    if states.iter().any(|s| s.t != t0) {
        return Err(Error::param("ensemble members must start at the same time"));
    }
    let times = checkpoint_times(t0, cfg.t_end, cfg.checkpoint_ratio)?;
    let mut records: Vec<RunRecord> = states.iter().map(|_| RunRecord::default()).collect();
    let mut next = 0;
    let mut t = t0;
    loop {
        while next < times.len() && t >= times[next] {
            for ((s, rec), phi) in states.iter_mut().zip(records.iter_mut()).zip(phis) {
                s.t = times[next];
                rec.checkpoints.push(checkpoint(s, cfg, *phi)?);
                if cfg.keep_snapshots {
                    rec.snapshots.push(s.clone());
                }
            }
            next += 1;
        }
        if next == times.len() {
            break;
        }
        let target = times[next];
        let mut dt = target - t;
        for s in &states {
            dt = dt.min(s.stable_dt(cfg.safety));
        }
        let landing = dt >= target - t;
        for s in states.iter_mut() {
            s.step(dt)?;
        }
        t = if landing { target } else { t + dt };
        for rec in records.iter_mut() {
            rec.steps += 1;
        }
        if states.iter().any(|s| s.front > cfg.growth_trigger * s.mesh().outer_radius()) {
            if cfg.growth == GrowthPolicy::Abort {
                let s = states
                    .iter()
                    .find(|s| s.front > cfg.growth_trigger * s.mesh().outer_radius())
                    .unwrap();
                return Err(Error::TruncationReached {
                    t,
                    zeta_plus: s.front,
                    r_out: s.mesh().outer_radius(),
                });
            }
            for (s, rec) in states.iter_mut().zip(records.iter_mut()) {
                *s = s.grown()?;
                rec.growths += 1;
            }
        }
        for s in states.iter_mut() {
            s.t = t;
        }
    }
    Ok((records, states))
}
