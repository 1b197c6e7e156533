//! Predicted large-time profiles and the error functionals that compare them
//! with solver output.
//!
//! Far from the hole the solution approaches the critical profile `G`, the
//! two-dimensional Barenblatt solution with mass `2m M_φ* / log t`. Near the
//! hole it approaches `(2mφ/log t)^{1/m} G`. The functionals below measure
//! both, together with the mass law, the support law, the limit on compact
//! sets and the self-similar rescaling. All of them converge at logarithmic
//! rates, so they are reported as [`TrendSeries`] over checkpoint times.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::geometry::{norm, Point};
use crate::solver::{RunRecord, SolverState};
use crate::special::CriticalOuterSpec;
use crate::stationary::Potential;

/// Which side of the comparison argument a region split serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Super,
    Sub,
}

impl Side {
    /// Default exponent `p` of the split radius `t^{1/2m} / (log t)^p`.
    pub fn default_split_exponent(self) -> f64 {
        match self {
            Side::Super => 2.0,
            Side::Sub => 1.0,
        }
    }
}

/// The sets on which the functionals and sign checks are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// `I_δ(t) = {|x| ≤ δ t^{1/2m} (log t)^{−(m−1)/2m}}`.
    Inner,
    /// The complement `O_δ(t) = {|x| > δ t^{1/2m} (log t)^{−(m−1)/2m}}`.
    Outer,
    /// The part of `I_δ(t)` inside the split radius.
    InnerInner,
    /// The part of `I_δ(t)` outside the split radius.
    InnerOuter,
}

/// A region at one time, parametrized by `τ = log t` so that very large
/// times stay representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSpec {
    pub delta: f64,
    pub tau: f64,
    pub kind: RegionKind,
    pub side: Side,
    pub split_exponent: f64,
    m: f64,
}

impl RegionSpec {
    /// Validates `δ ∈ (0, δ_*)` and `t > e`; the split exponent defaults by side.
    pub fn new(spec: &CriticalOuterSpec, delta: f64, t: f64, kind: RegionKind, side: Side) -> Result<Self> {
        Self::at_log_time(spec, delta, t.ln(), kind, side)
    }

    pub fn at_log_time(spec: &CriticalOuterSpec, delta: f64, tau: f64, kind: RegionKind, side: Side) -> Result<Self> {
        if !(delta > 0.0 && delta < spec.delta_star()) {
            return Err(Error::param(format!("δ must lie in (0, δ_* = {}), got {delta}", spec.delta_star())));
        }
        if !(tau > 1.0) {
            return Err(Error::TimeDomain {
                t: tau.exp(),
                reason: "regions need log t > 1".into(),
            });
        }
        Ok(RegionSpec {
            delta,
            tau,
            kind,
            side,
            split_exponent: side.default_split_exponent(),
            m: spec.m(),
        })
    }

    pub fn with_split_exponent(mut self, p: f64) -> Self {
        self.split_exponent = p;
        self
    }

    pub fn t(&self) -> f64 {
        self.tau.exp()
    }

    /// `δ t^{1/2m} (log t)^{−(m−1)/2m}`.
    pub fn inner_radius(&self) -> f64 {
        let m = self.m;
        self.delta * (self.tau / (2.0 * m) - (m - 1.0) / (2.0 * m) * self.tau.ln()).exp()
    }

    /// `t^{1/2m} / (log t)^p`.
    pub fn split_radius(&self) -> f64 {
        (self.tau / (2.0 * self.m) - self.split_exponent * self.tau.ln()).exp()
    }

    /// Membership by radius (the fluid-domain condition is the caller's).
    pub fn contains_radius(&self, r: f64) -> bool {
        let inner = r <= self.inner_radius();
        match self.kind {
            RegionKind::Inner => inner,
            RegionKind::Outer => !inner,
            RegionKind::InnerInner => inner && r < self.split_radius(),
            RegionKind::InnerOuter => inner && r >= self.split_radius(),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.contains_radius(norm(x))
    }
}

/// Smallest `log t` beyond which the split radius lies inside `I_δ(t)`:
/// `δ (log t)^{−(m−1)/2m} > (log t)^{−p}` holds iff `log t > δ^{−1/(p−(m−1)/2m)}`.
pub fn split_crossover_log_time(m: f64, delta: f64, p: f64) -> Result<f64> {
    let e = p - (m - 1.0) / (2.0 * m);
    if !(e > 0.0) {
        return Err(Error::param(format!(
            "split exponent {p} never falls inside the inner region for m = {m}"
        )));
    }
    Ok(delta.powf(-1.0 / e).max(1.0))
}

/// Values of a functional over checkpoint times.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log |value − target|` against `log log t`
    /// (available from four points on).
    pub slope: Option<f64>,
    pub target: f64,
}

impl TrendSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, target: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::param("times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("trend times must be strictly increasing"));
        }
        let slope = fit_slope(&times, &values, target);
        Ok(TrendSeries {
            times,
            values,
            slope,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at the time closest to `t` (within 1e-9 relative).
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times.iter().position(|&s| ((s - t) / t).abs() < 1e-9).map(|i| self.values[i])
    }

    /// `|value − target|` at the requested times, which must all be present.
    pub fn deviations(&self, times: &[f64]) -> Result<Vec<f64>> {
        times
            .iter()
            .map(|&t| {
                self.at(t)
                    .map(|v| (v - self.target).abs())
                    .ok_or_else(|| Error::param(format!("no checkpoint at t = {t}")))
            })
            .collect()
    }

    /// True iff `|value − target|` strictly decreases across `times`.
    pub fn approaches_target(&self, times: &[f64]) -> Result<bool> {
        let d = self.deviations(times)?;
        Ok(d.windows(2).all(|w| w[1] < w[0]))
    }

    /// The last `k` values.
    pub fn tail(&self, k: usize) -> &[f64] {
        &self.values[self.values.len().saturating_sub(k)..]
    }
}

fn fit_slope(times: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t > E && (**v - target).abs() > 0.0)
        .map(|(t, v)| (t.ln().ln(), (v - target).abs().ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn check_time(t: f64) -> Result<()> {
    if t > E {
        Ok(())
    } else {
        Err(Error::TimeDomain {
            t,
            reason: "the critical asymptotics need log t > 1".into(),
        })
    }
}

/// Near-field prediction `(2mφ(x)/log t)^{1/m} G(x, t)`.
pub fn inner_prediction(phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, t: f64) -> Result<f64> {
    check_time(t)?;
    let p = phi.phi(x);
    if p < 0.0 {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: "point lies in the hole".into(),
        });
    }
    let m = spec.m();
    Ok((2.0 * m * p / t.ln()).powf(1.0 / m) * spec.eval_radial(norm(x), t))
}

/// Signed extremes of a functional over the cells of a region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorExtrema {
    pub sup: f64,
    pub inf: f64,
    pub arg_sup: Point,
    pub arg_inf: Point,
    /// Number of cells evaluated.
    pub count: usize,
    /// Smallest cell width of the mesh, reported with the functional.
    pub h_min: f64,
}

impl ErrorExtrema {
    /// `max(|sup|, |inf|)`.
    pub fn abs_max(&self) -> f64 {
        self.sup.abs().max(self.inf.abs())
    }
}

/// Reference profile of a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    /// `(2mφ/log t)^{1/m} G`.
    Inner,
    /// `G`.
    Outer,
}

/// Time prefactor of a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prefactor {
    /// `t^{1/m} (log t)^{2/m}`.
    NearField,
    /// `(t log t)^{1/m}`.
    FarField,
}

/// The ingredients of an error functional `prefactor · (u − prediction) · weight`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalSpec {
    pub region: RegionKind,
    pub prediction: Prediction,
    pub prefactor: Prefactor,
    /// Divide by `(log(|x| + e))^{1/m}`.
    pub log_weight: bool,
}

impl FunctionalSpec {
    pub const WEIGHTED: FunctionalSpec = FunctionalSpec {
        region: RegionKind::Inner,
        prediction: Prediction::Inner,
        prefactor: Prefactor::NearField,
        log_weight: true,
    };
    pub const OUTER: FunctionalSpec = FunctionalSpec {
        region: RegionKind::Outer,
        prediction: Prediction::Outer,
        prefactor: Prefactor::FarField,
        log_weight: false,
    };
}

/// Evaluates a functional at the cell centers of `state` (at the state's time).
/// Ties keep the first cell index.
pub fn error_functional(
    state: &SolverState,
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    delta: f64,
    f: FunctionalSpec,
) -> Result<ErrorExtrema> {
    let t = state.t();
    check_time(t)?;
    let region = RegionSpec::new(spec, delta, t, f.region, Side::Super)?;
    let m = spec.m();
    let lt = t.ln();
    let pre = match f.prefactor {
        Prefactor::NearField => t.powf(1.0 / m) * lt.powf(2.0 / m),
        Prefactor::FarField => (t * lt).powf(1.0 / m),
    };
    let disc = state.discretization();
    let mut out = ErrorExtrema {
        sup: f64::NEG_INFINITY,
        inf: f64::INFINITY,
        arg_sup: [f64::NAN; 2],
        arg_inf: [f64::NAN; 2],
        count: 0,
        h_min: state.mesh().h_min(),
    };
    for (&x, &u) in disc.centers().iter().zip(state.u()) {
        let r = norm(x);
        if !region.contains_radius(r) {
            continue;
        }
        let g = spec.eval_radial(r, t);
        let pred = match f.prediction {
            Prediction::Outer => g,
            Prediction::Inner => (2.0 * m * phi.phi(x).max(0.0) / lt).powf(1.0 / m) * g,
        };
        let weight = if f.log_weight { (r + E).ln().powf(-1.0 / m) } else { 1.0 };
        let v = pre * (u - pred) * weight;
        out.count += 1;
        if v > out.sup {
            out.sup = v;
            out.arg_sup = x;
        }
        if v < out.inf {
            out.inf = v;
            out.arg_inf = x;
        }
    }
    if out.count == 0 {
        return Err(Error::EmptyRegion(format!("{:?} at δ = {delta}, t = {t}", f.region)));
    }
    Ok(out)
}

/// `𝓜 = t^{1/m}(log t)^{2/m}(u − (2mφ/log t)^{1/m}G)/(log(|x|+e))^{1/m}` over `I_δ(t)`.
pub fn weighted_error(state: &SolverState, phi: &dyn Potential, spec: &CriticalOuterSpec, delta: f64) -> Result<ErrorExtrema> {
    error_functional(state, phi, spec, delta, FunctionalSpec::WEIGHTED)
}

/// `(t log t)^{1/m} (u − G)` over `O_δ(t)`.
pub fn outer_error(state: &SolverState, phi: &dyn Potential, spec: &CriticalOuterSpec, delta: f64) -> Result<ErrorExtrema> {
    error_functional(state, phi, spec, delta, FunctionalSpec::OUTER)
}

fn valid_checkpoints(record: &RunRecord) -> impl Iterator<Item = &crate::solver::Checkpoint> {
    record.checkpoints.iter().filter(|c| c.t > E)
}

/// `log t · M(t) / (2m M_φ*)`, which tends to 1.
pub fn mass_ratio(record: &RunRecord, spec: &CriticalOuterSpec) -> Result<TrendSeries> {
    let pts: Vec<_> = valid_checkpoints(record).collect();
    let span = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (b.t / a.t).log10(),
        _ => 0.0,
    };
    if span < 3.0 - 1e-9 {
        return Err(Error::param(format!("the mass law needs three decades of t > e, got {span:.2}")));
    }
    let norm = 2.0 * spec.m() * spec.m_phi_star();
    TrendSeries::new(
        pts.iter().map(|c| c.t).collect(),
        pts.iter().map(|c| c.t.ln() * c.mass / norm).collect(),
        1.0,
    )
}

/// Support ratios `ζ± (log t)^{(m−1)/2m} t^{−1/2m} / ξ_*` as `(minus, plus)`.
pub fn support_ratio(record: &RunRecord, spec: &CriticalOuterSpec) -> Result<(TrendSeries, TrendSeries)> {
    let pts: Vec<_> = valid_checkpoints(record).collect();
    if let Some(c) = pts.iter().find(|c| !(c.sup_u > 0.0)) {
        return Err(Error::EmptySupport { threshold: c.sup_u });
    }
    let times: Vec<f64> = pts.iter().map(|c| c.t).collect();
    let scale = |c: &&crate::solver::Checkpoint, z: f64| z / spec.support_radius(c.t);
    Ok((
        TrendSeries::new(times.clone(), pts.iter().map(|c| scale(c, c.zeta_minus)).collect(), 1.0)?,
        TrendSeries::new(times, pts.iter().map(|c| scale(c, c.zeta_plus)).collect(), 1.0)?,
    ))
}

/// `(m M_φ*/π)^{1/m}`, the constant of the limit on compact sets, after
/// checking it against the equivalent `(2m)^{1/m} F_*(0)`.
pub fn limit_constant(spec: &CriticalOuterSpec) -> Result<f64> {
    let m = spec.m();
    let direct = (m * spec.m_phi_star() / PI).powf(1.0 / m);
    let via_profile = (2.0 * m).powf(1.0 / m) * spec.f_star_zero();
    if ((direct - via_profile) / direct).abs() > 1e-12 {
        return Err(Error::param(format!("limit constant mismatch: {direct} vs {via_profile}")));
    }
    Ok(direct)
}

/// The compact-set limit at one probe point.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactProbe {
    pub x: Point,
    /// `(m M_φ*/π)^{1/m} φ(x)^{1/m}`.
    pub limit: f64,
    /// `(t log² t)^{1/m} u(x, t)` per snapshot.
    pub scaled: TrendSeries,
    /// `scaled / limit` (absent when the limit vanishes).
    pub ratio: Option<TrendSeries>,
}

/// `(t log² t)^{1/m} u(x, t)` compared with its limit at fixed probes, using
/// the snapshots with `t > e`.
pub fn compact_limit(
    snapshots: &[SolverState],
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    probes: &[Point],
) -> Result<Vec<CompactProbe>> {
    let c = limit_constant(spec)?;
    let m = spec.m();
    let snaps: Vec<&SolverState> = snapshots.iter().filter(|s| s.t() > E).collect();
    let times: Vec<f64> = snaps.iter().map(|s| s.t()).collect();
    probes
        .iter()
        .map(|&x| {
            let p = phi.phi(x);
            if p < 0.0 {
                return Err(Error::OutsideDomain {
                    x: x[0],
                    y: x[1],
                    reason: "probe lies in the hole".into(),
                });
            }
            let limit = c * p.powf(1.0 / m);
            let scaled: Vec<f64> = snaps
                .iter()
                .map(|s| {
                    let t = s.t();
                    (t * t.ln().powi(2)).powf(1.0 / m) * s.interpolate(x)
                })
                .collect();
            let ratio = (limit > 0.0)
                .then(|| TrendSeries::new(times.clone(), scaled.iter().map(|v| v / limit).collect(), 1.0))
                .transpose()?;
            Ok(CompactProbe {
                x,
                limit,
                scaled: TrendSeries::new(times.clone(), scaled, limit)?,
                ratio,
            })
        })
        .collect()
}

/// A field in the self-similar variables of the critical profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledProfile {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub w: Vec<f64>,
}

impl ScaledProfile {
    /// `sup |w − F_*|` over the grid.
    pub fn distance_to_profile(&self, spec: &CriticalOuterSpec) -> f64 {
        self.xi
            .iter()
            .zip(&self.w)
            .map(|(&s, &w)| (w - spec.f_star(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// `w(ξ̃, τ) = (t log t)^{1/m} u(ξ̃ t^{1/2m}(log t)^{−(m−1)/2m}, t)` with `t = e^τ`,
/// sampled along the direction `angle` at the points `xi`.
pub fn to_scaled_variables(state: &SolverState, spec: &CriticalOuterSpec, xi: &[f64], angle: f64) -> Result<ScaledProfile> {
    let t = state.t();
    check_time(t)?;
    let m = spec.m();
    let (amp, len) = ((t * t.ln()).powf(1.0 / m), spec.length_scale(t));
    let (c, s) = (angle.cos(), angle.sin());
    let w = xi.iter().map(|&k| amp * state.interpolate([k * len * c, k * len * s])).collect();
    Ok(ScaledProfile {
        tau: t.ln(),
        xi: xi.to_vec(),
        w,
    })
}
