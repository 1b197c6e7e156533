//! Hole geometries and the grids that discretize their exterior.
//!
//! A [`HoleGeometry`] is the excluded set; the origin always lies strictly
//! inside it. Two grid families cover the exterior domain:
//!
//! * [`RadialGrid`] for holes that are disks centered at the origin, with
//!   optional geometric stretching so that late-time runs can reach large
//!   radii without a fine absolute resolution;
//! * [`MaskedGrid2D`], a uniform Cartesian grid whose cells are classified as
//!   fluid, hole, or the outer truncation ring.
//!
//! Truncation at a finite radius belongs to the grids, never to the geometry.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub(crate) fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

/// The excluded set ℋ.
#[derive(Clone, Debug, PartialEq)]
pub enum HoleGeometry {
    Disk {
        radius: f64,
    },
    Ellipse {
        semi_axes: [f64; 2],
    },
    /// Closed polyline; the last point connects back to the first.
    Curve {
        points: Vec<Point>,
    },
    /// Union of disks, possibly disconnected. Only masked grids support it.
    Disks {
        disks: Vec<(Point, f64)>,
    },
}

impl HoleGeometry {
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::geometry(format!("disk radius must be positive, got {radius}")));
        }
        Ok(HoleGeometry::Disk { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::geometry(format!("ellipse semi-axes must be positive, got ({a}, {b})")));
        }
        Ok(HoleGeometry::Ellipse { semi_axes: [a, b] })
    }

    pub fn curve(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::geometry("a curve hole needs at least three points"));
        }
        let n = points.len();
        for i in 0..n {
            let (p, q) = (points[i], points[(i + 1) % n]);
            if p == q {
                return Err(Error::geometry(format!("consecutive points {i} and {} coincide", (i + 1) % n)));
            }
        }
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                    return Err(Error::geometry(format!("polyline self-intersects (segments {i} and {j})")));
                }
            }
        }
        let hole = HoleGeometry::Curve { points };
        if !hole.contains([0.0, 0.0]) || hole.inner_radius() <= 0.0 {
            return Err(Error::geometry("origin is not strictly inside the curve"));
        }
        Ok(hole)
    }

    pub fn disks(disks: Vec<(Point, f64)>) -> Result<Self> {
        if disks.is_empty() || disks.iter().any(|&(_, r)| !(r > 0.0)) {
            return Err(Error::geometry("disk union needs at least one disk with positive radius"));
        }
        let hole = HoleGeometry::Disks { disks };
        if hole.inner_radius() <= 0.0 {
            return Err(Error::geometry("origin is not strictly inside any disk of the union"));
        }
        Ok(hole)
    }

    /// True iff `x` lies in the open hole.
    pub fn contains(&self, x: Point) -> bool {
        match self {
            HoleGeometry::Disk { radius } => norm(x) < *radius,
            HoleGeometry::Ellipse { semi_axes: [a, b] } => (x[0] / a).powi(2) + (x[1] / b).powi(2) < 1.0,
            HoleGeometry::Curve { points } => winding_number(points, x) != 0,
            HoleGeometry::Disks { disks } => disks.iter().any(|&(c, r)| norm([x[0] - c[0], x[1] - c[1]]) < r),
        }
    }

    /// Radius of the largest disk centered at the origin that fits inside the hole.
    pub fn inner_radius(&self) -> f64 {
        match self {
            HoleGeometry::Disk { radius } => *radius,
            HoleGeometry::Ellipse { semi_axes: [a, b] } => a.min(*b),
            HoleGeometry::Curve { points } => {
                let n = points.len();
                (0..n)
                    .map(|i| segment_distance([0.0, 0.0], points[i], points[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            HoleGeometry::Disks { disks } => disks.iter().map(|&(c, r)| r - norm(c)).fold(0.0, f64::max),
        }
    }

    /// Radius of the smallest disk centered at the origin containing the hole.
    pub fn outer_radius(&self) -> f64 {
        match self {
            HoleGeometry::Disk { radius } => *radius,
            HoleGeometry::Ellipse { semi_axes: [a, b] } => a.max(*b),
            HoleGeometry::Curve { points } => points.iter().map(|&p| norm(p)).fold(0.0, f64::max),
            HoleGeometry::Disks { disks } => disks.iter().map(|&(c, r)| norm(c) + r).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.outer_radius()
    }

    /// A disk centered at the origin: the only hole a [`RadialGrid`] can represent.
    pub fn is_radial(&self) -> bool {
        matches!(self, HoleGeometry::Disk { .. })
    }

    /// Fraction `s ∈ (0, 1]` along the segment from the fluid point `from`
    /// to the hole point `to` at which the boundary is crossed.
    pub fn crossing_fraction(&self, from: Point, to: Point) -> f64 {
        debug_assert!(!self.contains(from) && self.contains(to));
        let at = |s: f64| [from[0] + s * (to[0] - from[0]), from[1] + s * (to[1] - from[1])];
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.contains(at(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `n` points on the hole boundary (for curves, the polyline vertices are
    /// resampled by arclength).
    pub fn boundary_samples(&self, n: usize) -> Vec<Point> {
        let theta = |k: usize| 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        match self {
            HoleGeometry::Disk { radius } => (0..n).map(|k| [radius * theta(k).cos(), radius * theta(k).sin()]).collect(),
            HoleGeometry::Ellipse { semi_axes: [a, b] } => (0..n).map(|k| [a * theta(k).cos(), b * theta(k).sin()]).collect(),
            HoleGeometry::Curve { points } => resample_polyline(points, n),
            HoleGeometry::Disks { disks } => {
                let per = (n / disks.len()).max(1);
                disks
                    .iter()
                    .flat_map(|&(c, r)| {
                        (0..per).map(move |k| {
                            let th = 2.0 * std::f64::consts::PI * k as f64 / per as f64;
                            [c[0] + r * th.cos(), c[1] + r * th.sin()]
                        })
                    })
                    .filter(|&p| {
                        // drop points swallowed by another disk of the union
                        !disks.iter().any(|&(c, r)| norm([p[0] - c[0], p[1] - c[1]]) < r * (1.0 - 1e-9))
                    })
                    .collect()
            }
        }
    }
}

/// Inside test for the hole.
pub fn point_in_hole(hole: &HoleGeometry, x: Point) -> bool {
    hole.contains(x)
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0 && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn winding_number(poly: &[Point], x: Point) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a[1] <= x[1] {
            if b[1] > x[1] && cross(a, b, x) > 0.0 {
                wn += 1;
            }
        } else if b[1] <= x[1] && cross(a, b, x) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    norm([x[0] - a[0] - s * dx, x[1] - a[1] - s * dy])
}

fn resample_polyline(points: &[Point], n: usize) -> Vec<Point> {
    let m = points.len();
    let seg: Vec<f64> = (0..m).map(|i| norm(sub(points[(i + 1) % m], points[i]))).collect();
    let total: f64 = seg.iter().sum();
    let mut out = Vec::with_capacity(n);
    let (mut i, mut acc) = (0usize, 0.0);
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while acc + seg[i] < target {
            acc += seg[i];
            i += 1;
        }
        let s = (target - acc) / seg[i];
        let (a, b) = (points[i], points[(i + 1) % m]);
        out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
    }
    out
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Radial cells `[ρ_k, ρ_{k+1}]` covering an annulus (or, for whole-plane
/// runs, a disk starting at the origin).
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    edges: Vec<f64>,
    stretch: f64,
}

impl RadialGrid {
    /// Uniform grid on `[0, r_out]`; the first cell is the disk of radius `r_out / n`.
    pub fn whole_plane(r_out: f64, n: usize) -> Result<Self> {
        if !(r_out > 0.0) || n == 0 {
            return Err(Error::geometry(format!(
                "whole-plane grid needs r_out > 0 and n > 0, got ({r_out}, {n})"
            )));
        }
        let edges = (0..=n).map(|k| r_out * k as f64 / n as f64).collect();
        Ok(RadialGrid { edges, stretch: 1.0 })
    }

    /// Cells whose widths grow by the constant factor `exp(dlog)`, i.e. uniform in `log r`.
    pub fn log_uniform(r_in: f64, r_out: f64, dlog: f64) -> Result<Self> {
        if !(dlog > 0.0) {
            return Err(Error::param(format!("log spacing must be positive, got {dlog}")));
        }
        let n = ((r_out / r_in).ln() / dlog).ceil().max(1.0) as usize;
        let s = dlog.exp();
        if !(r_out > r_in && r_in > 0.0) {
            return Err(Error::geometry(format!("need r_out > r_in > 0, got ({r_in}, {r_out})")));
        }
        let edges = (0..=n).map(|k| r_in * s.powi(k as i32)).collect();
        Ok(RadialGrid { edges, stretch: s })
    }

    /// Rebuilds a grid from stored edges; `stretch` is the width ratio used
    /// by [`Self::extend_to`].
    pub fn from_edges(edges: Vec<f64>, stretch: f64) -> Result<Self> {
        if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) || !(stretch >= 1.0) {
            return Err(Error::geometry(
                "radial edges must be nonnegative and strictly increasing, with stretch ≥ 1",
            ));
        }
        Ok(RadialGrid { edges, stretch })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn r_in(&self) -> f64 {
        self.edges[0]
    }

    pub fn r_out(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_whole_plane(&self) -> bool {
        self.edges[0] == 0.0
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Representative radius of cell `i`: the geometric mean of its edges for
    /// annular grids (exact midpoint in `log r`), the arithmetic midpoint for
    /// whole-plane grids.
    pub fn center(&self, i: usize) -> f64 {
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        if self.is_whole_plane() {
            0.5 * (a + b)
        } else {
            (a * b).sqrt()
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Area of cell `i`.
    pub fn area(&self, i: usize) -> f64 {
        std::f64::consts::PI * (self.edges[i + 1].powi(2) - self.edges[i].powi(2))
    }

    /// Appends cells (continuing the width progression) until `r_out >= target`.
    pub fn extend_to(&mut self, target: f64) {
        while self.r_out() < target {
            let n = self.len();
            let w = self.width(n - 1) * self.stretch;
            let next = self.r_out() + w;
            self.edges.push(next);
        }
    }

    /// Index of the cell containing radius `r`, if any.
    pub fn locate(&self, r: f64) -> Option<usize> {
        if r < self.r_in() || r > self.r_out() {
            return None;
        }
        let k = self.edges.partition_point(|&e| e <= r);
        Some(k.saturating_sub(1).min(self.len() - 1))
    }
}

/// Builds `n` radial cells on `[r_in, r_out]` whose widths grow by `stretch`.
pub fn build_radial_grid(r_in: f64, r_out: f64, n: usize, stretch: f64) -> Result<RadialGrid> {
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::geometry(format!("need r_out > r_in > 0, got ({r_in}, {r_out})")));
    }
    if n == 0 {
        return Err(Error::geometry("radial grid needs at least one cell"));
    }
    if !(stretch >= 1.0) {
        return Err(Error::param(format!("stretch must be >= 1, got {stretch}")));
    }
    let span = r_out - r_in;
    let w0 = if stretch == 1.0 {
        span / n as f64
    } else {
        span * (stretch - 1.0) / (stretch.powi(n as i32) - 1.0)
    };
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(r_in);
    for k in 1..n {
        edges.push(
            r_in + if stretch == 1.0 {
                span * k as f64 / n as f64
            } else {
                w0 * (stretch.powi(k as i32) - 1.0) / (stretch - 1.0)
            },
        );
    }
    edges.push(r_out);
    Ok(RadialGrid { edges, stretch })
}

/// Classification of a Cartesian cell by its center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Fluid,
    Hole,
    /// Outermost ring of cells, where the domain is truncated.
    Truncation,
}

/// Uniform `n × n` Cartesian grid over `[-extent/2, extent/2]²` with a hole mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedGrid2D {
    hole: Option<HoleGeometry>,
    n: usize,
    h: f64,
    mask: Vec<CellKind>,
}

impl MaskedGrid2D {
    /// The masked hole; `None` for whole-plane grids.
    pub fn hole(&self) -> Option<&HoleGeometry> {
        self.hole.as_ref()
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Linear index of cell `(i, j)`, `i` along x (fastest), `j` along y.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn center(&self, k: usize) -> Point {
        let (i, j) = (k % self.n, k / self.n);
        let half = 0.5 * self.extent();
        [-half + (i as f64 + 0.5) * self.h, -half + (j as f64 + 0.5) * self.h]
    }

    pub fn kind(&self, k: usize) -> CellKind {
        self.mask[k]
    }

    pub fn mask(&self) -> &[CellKind] {
        &self.mask
    }

    /// Index of the cell containing `x`, if inside the extent.
    pub fn cell_at(&self, x: Point) -> Option<usize> {
        let half = 0.5 * self.extent();
        let fi = ((x[0] + half) / self.h).floor();
        let fj = ((x[1] + half) / self.h).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.n as f64 || fj >= self.n as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.mask.iter().filter(|&&k| k == kind).count()
    }

    /// Radius of the largest origin-centered disk fully inside the non-truncation cells.
    pub fn truncation_radius(&self) -> f64 {
        0.5 * self.extent() - self.h
    }

    /// Same hole and spacing, `factor` times as many cells per side; old cell
    /// centers coincide with new ones.
    pub fn enlarged(&self, factor: usize) -> Result<Self> {
        build_masked_grid_n(self.hole.clone(), self.n * factor, self.h)
    }

    /// Index in `self` of the cell of `smaller` with index `k`, for grids
    /// sharing spacing and center.
    pub fn embed_index(&self, smaller: &MaskedGrid2D, k: usize) -> usize {
        let off = (self.n - smaller.n) / 2;
        let (i, j) = (k % smaller.n, k / smaller.n);
        self.index(i + off, j + off)
    }
}

/// Builds a masked Cartesian grid of spacing `h` over a square of side `extent`.
pub fn build_masked_grid(hole: HoleGeometry, extent: f64, h: f64) -> Result<MaskedGrid2D> {
    if !(h > 0.0 && extent > 0.0) {
        return Err(Error::geometry(format!("need extent > 0 and h > 0, got ({extent}, {h})")));
    }
    if extent <= 2.0 * hole.diameter() {
        return Err(Error::geometry(format!(
            "extent {extent} must exceed twice the hole diameter {}",
            hole.diameter()
        )));
    }
    if h >= hole.inner_radius() / 4.0 {
        return Err(Error::Resolution(format!(
            "h = {h} must be below a quarter of the hole's inner radius {}",
            hole.inner_radius()
        )));
    }
    let mut n = (extent / h).round() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    build_masked_grid_n(Some(hole), n, h)
}

/// Uniform grid without a hole, for Cauchy-problem runs.
pub fn build_whole_plane_grid(extent: f64, h: f64) -> Result<MaskedGrid2D> {
    if !(h > 0.0 && extent > 4.0 * h) {
        return Err(Error::geometry(format!("need extent > 4h > 0, got ({extent}, {h})")));
    }
    let mut n = (extent / h).round() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    build_masked_grid_n(None, n, h)
}

/// Masked grid of `n × n` cells of spacing `h` centered at the origin; `None`
/// gives a whole-plane grid.
pub fn build_masked_grid_n(hole: Option<HoleGeometry>, n: usize, h: f64) -> Result<MaskedGrid2D> {
    if let Some(hole) = &hole {
        if !hole.contains([0.0, 0.0]) {
            return Err(Error::geometry("origin is not inside the hole"));
        }
    }
    let mut grid = MaskedGrid2D {
        hole,
        n,
        h,
        mask: vec![CellKind::Fluid; n * n],
    };
    for k in 0..n * n {
        let (i, j) = (k % n, k / n);
        grid.mask[k] = if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
            CellKind::Truncation
        } else if grid.hole.as_ref().is_some_and(|hole| hole.contains(grid.center(k))) {
            CellKind::Hole
        } else {
            CellKind::Fluid
        };
    }
    check_fluid_connected(&grid)?;
    Ok(grid)
}

fn check_fluid_connected(grid: &MaskedGrid2D) -> Result<()> {
    let n = grid.n;
    let Some(start) = grid.mask.iter().position(|&k| k == CellKind::Fluid) else {
        return Err(Error::geometry("grid has no fluid cells"));
    };
    let mut seen = vec![false; n * n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 0usize;
    while let Some(k) = stack.pop() {
        count += 1;
        let (i, j) = (k % n, k / n);
        let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
        for (a, b) in nbrs {
            if a < n && b < n {
                let q = b * n + a;
                if !seen[q] && grid.mask[q] == CellKind::Fluid {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    if count != grid.count(CellKind::Fluid) {
        return Err(Error::geometry(
            "fluid cells are not connected (bounded fluid pockets between holes)",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_radial_partition() {
        let g = build_radial_grid(1.0, 2.0, 4, 1.0).unwrap();
        assert_eq!(g.edges(), &[1.0, 1.25, 1.5, 1.75, 2.0]);
    }

    #[test]
    fn radial_endpoint_is_preserved() {
        let e = std::f64::consts::E;
        let g = build_radial_grid(1.0, e, 8, 1.0).unwrap();
        assert_eq!(g.r_out(), e);
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn stretched_widths_follow_geometric_series() {
        let g = build_radial_grid(1.0, 100.0, 256, 1.02).unwrap();
        // oracle: w_k = w_0 s^k with w_0 fixed by the geometric sum
        let w0 = 99.0 * 0.02 / (1.02f64.powi(256) - 1.0);
        assert!((g.width(0) - w0).abs() < 1e-12);
        for k in 1..256 {
            let ratio = g.width(k) / g.width(k - 1);
            assert!((ratio - 1.02).abs() < 1e-9, "k={k} ratio={ratio}");
        }
        let total: f64 = (0..256).map(|k| g.width(k)).sum();
        assert!((total - 99.0).abs() < 1e-12 * 99.0);
    }

    #[test]
    fn radial_grid_rejects_bad_radii() {
        assert!(matches!(build_radial_grid(0.0, 2.0, 8, 1.0), Err(Error::InvalidGeometry(_))));
        assert!(matches!(build_radial_grid(2.0, 1.0, 8, 1.0), Err(Error::InvalidGeometry(_))));
        assert!(matches!(build_radial_grid(-1.0, 1.0, 8, 1.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn extension_keeps_progression() {
        let mut g = RadialGrid::log_uniform(1.0, 10.0, 0.05).unwrap();
        let n0 = g.len();
        g.extend_to(40.0);
        assert!(g.r_out() >= 40.0);
        for k in n0..g.len() {
            assert!((g.width(k) / g.width(k - 1) - 0.05f64.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_grid_classifies_centers() {
        let g = build_masked_grid(HoleGeometry::disk(1.0).unwrap(), 8.0, 0.1).unwrap();
        let origin = g.cell_at([0.0, 0.0]).unwrap();
        assert_eq!(g.kind(origin), CellKind::Hole);
        let k = g.cell_at([3.0, 3.0]).unwrap();
        assert_eq!(g.kind(k), CellKind::Fluid);
        for k in 0..g.len() {
            match g.kind(k) {
                CellKind::Hole => assert!(point_in_hole(g.hole().unwrap(), g.center(k))),
                CellKind::Fluid => assert!(!point_in_hole(g.hole().unwrap(), g.center(k))),
                CellKind::Truncation => {}
            }
        }
    }

    #[test]
    fn ellipse_hole_area_by_cell_count() {
        let g = build_masked_grid(HoleGeometry::ellipse(2.0, 1.0).unwrap(), 12.0, 0.05).unwrap();
        let expected = 2.0 * std::f64::consts::PI / (0.05 * 0.05);
        let got = g.count(CellKind::Hole) as f64;
        assert!((got - expected).abs() < 0.02 * expected, "{got} vs {expected}");
    }

    #[test]
    fn masked_grid_errors() {
        let disk = HoleGeometry::disk(1.0).unwrap();
        assert!(matches!(build_masked_grid(disk.clone(), 8.0, 0.3), Err(Error::Resolution(_))));
        assert!(matches!(build_masked_grid(disk, 3.0, 0.1), Err(Error::InvalidGeometry(_))));
        let off = HoleGeometry::Disk { radius: 1.0 };
        assert!(off.contains([0.0, 0.0]));
        let shifted = HoleGeometry::disks(vec![([3.0, 0.0], 1.0)]);
        assert!(shifted.is_err());
    }

    #[test]
    fn ellipse_inside_test() {
        let e = HoleGeometry::ellipse(2.0, 1.0).unwrap();
        assert!(point_in_hole(&e, [1.5, 0.5]));
        assert!(!point_in_hole(&e, [1.5, 0.7]));
        let d = HoleGeometry::disk(1.0).unwrap();
        assert!(point_in_hole(&d, [0.0, 0.0]));
        assert!(!point_in_hole(&d, [2.0, 0.0]));
    }

    #[test]
    fn curve_validation() {
        let square = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let hole = HoleGeometry::curve(square).unwrap();
        assert!(hole.contains([0.5, 0.5]));
        assert!(!hole.contains([1.5, 0.0]));
        assert!((hole.inner_radius() - 1.0).abs() < 1e-12);
        let bowtie = vec![[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]];
        assert!(HoleGeometry::curve(bowtie).is_err());
        let dup = vec![[-1.0, -1.0], [-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        assert!(HoleGeometry::curve(dup).is_err());
        let away = vec![[2.0, 2.0], [3.0, 2.0], [3.0, 3.0]];
        assert!(HoleGeometry::curve(away).is_err());
    }

    #[test]
    fn crossing_fraction_on_disk() {
        let d = HoleGeometry::disk(1.0).unwrap();
        let s = d.crossing_fraction([1.5, 0.0], [0.5, 0.0]);
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn enlarged_grid_embeds_old_cells() {
        let g = build_masked_grid(HoleGeometry::disk(1.0).unwrap(), 8.0, 0.2).unwrap();
        let big = g.enlarged(2).unwrap();
        for k in [0, 17, g.len() / 2 + 3, g.len() - 1] {
            let c = g.center(k);
            let q = big.embed_index(&g, k);
            let c2 = big.center(q);
            assert!((c[0] - c2[0]).abs() < 1e-12 && (c[1] - c2[1]).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn radial_cells_tile_the_annulus(r_in in 0.1f64..5.0, span in 0.5f64..200.0, n in 8usize..400, stretch in 1.0f64..1.05) {
                let g = build_radial_grid(r_in, r_in + span, n, stretch).unwrap();
                let total: f64 = (0..g.len()).map(|k| g.width(k)).sum();
                prop_assert!((total - span).abs() <= 1e-12 * (r_in + span) * 4.0);
                prop_assert!(g.edges().windows(2).all(|w| w[1] > w[0]));
                prop_assert_eq!(g.r_in(), r_in);
            }

            #[test]
            fn mask_agrees_with_inside_test(a in 0.8f64..2.0, b in 0.8f64..2.0) {
                let hole = HoleGeometry::ellipse(a, b).unwrap();
                let h = a.min(b) / 5.0;
                let g = build_masked_grid(hole.clone(), 5.0 * a.max(b), h).unwrap();
                let tiled = g.extent().powi(2);
                prop_assert!((tiled - (g.n() as f64 * g.h()).powi(2)).abs() <= 1e-12 * tiled);
                for k in 0..g.len() {
                    let inside = point_in_hole(&hole, g.center(k));
                    match g.kind(k) {
                        CellKind::Hole => prop_assert!(inside),
                        CellKind::Fluid => prop_assert!(!inside),
                        CellKind::Truncation => {}
                    }
                }
            }
        }
    }
}
