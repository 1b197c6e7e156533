//! Explicit barriers around the solution: the supersolution `V` and the
//! subsolution `v`, both of the form `η c(t) G(x, t) w(x, t)`.
//!
//! The residual `∂ₜV − ΔVᵐ` splits as `𝒜 + ℬ`, where `𝒜` gathers the terms
//! driven by the time dependence of `c`, `G` and `w` and `ℬ` those driven by
//! the spatial variation of `w`:
//!
//! ```text
//! 𝒜 = η c′ G w + η c w ∂ₜG − ηᵐ cᵐ wᵐ ΔGᵐ + η c G ∂ₜw
//! ℬ = −ηᵐ cᵐ Gᵐ Δwᵐ − 2 ηᵐ cᵐ ∇wᵐ · ∇Gᵐ
//! ```
//!
//! Every ingredient is evaluated from its closed form. Signs are the object
//! of study and the interesting times are astronomically large, so the
//! ingredients are computed from `τ = log t` and multiplied by
//! `S = t^{1+1/m}`, which keeps them of moderate size; [`ABValue`] carries the
//! scaled values together with `log S`.

use std::f64::consts::{E, PI};

use crate::asymptotics::{RegionKind, RegionSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::{norm, HoleGeometry, Point};
use crate::solver::{Mesh, RunRecord, SolverState};
use crate::special::CriticalOuterSpec;
use crate::stationary::Potential;

/// Parameters of the supersolution `V = η c G w`, with
/// `c(t) = 1 + κ₀(T/t)^μ`, `ν(t) = 1 − 1/log t` and
/// `w = ((φ^ν + k)/((log t)/2m)^ν)^{1/m}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperParams {
    pub eta: f64,
    pub kappa0: f64,
    pub mu: f64,
    pub k: f64,
    /// `log T`.
    pub log_t0: f64,
}

impl SuperParams {
    pub fn new(eta: f64, kappa0: f64, mu: f64, k: f64, big_t: f64) -> Result<Self> {
        Self::at_log_time(eta, kappa0, mu, k, big_t.ln())
    }

    pub fn at_log_time(eta: f64, kappa0: f64, mu: f64, k: f64, log_t0: f64) -> Result<Self> {
        if !(eta > 1.0) {
            return Err(Error::param(format!("supersolution needs η > 1, got {eta}")));
        }
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(Error::param(format!("supersolution needs κ₀ > 0, got {kappa0}")));
        }
        check_mu(mu)?;
        if !(k > 0.0) {
            return Err(Error::param(format!("supersolution needs k > 0, got {k}")));
        }
        check_log_t0(log_t0)?;
        Ok(SuperParams {
            eta,
            kappa0,
            mu,
            k,
            log_t0,
        })
    }
}

/// Parameters of the subsolution `v = η c G w`, with
/// `c(t) = 1 − κ₀(T/t)^μ`, `ν(t) = 1 + 1/log t` and
/// `w = ((φ^ν − α₀^ν)/((log t)/2m)^ν)^{1/m}` on `Ω_{α₀} = {φ > α₀}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubParams {
    pub eta: f64,
    pub kappa0: f64,
    pub mu: f64,
    pub alpha0: f64,
    pub log_t0: f64,
}

impl SubParams {
    pub fn new(eta: f64, kappa0: f64, mu: f64, alpha0: f64, big_t: f64) -> Result<Self> {
        Self::at_log_time(eta, kappa0, mu, alpha0, big_t.ln())
    }

    pub fn at_log_time(eta: f64, kappa0: f64, mu: f64, alpha0: f64, log_t0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::param(format!("subsolution needs η ∈ (0, 1), got {eta}")));
        }
        if !(kappa0 > 0.0 && kappa0 < 1.0) {
            return Err(Error::param(format!("subsolution needs κ₀ ∈ (0, 1), got {kappa0}")));
        }
        check_mu(mu)?;
        if !(alpha0 > 0.0) {
            return Err(Error::param(format!("subsolution needs α₀ > 0, got {alpha0}")));
        }
        check_log_t0(log_t0)?;
        Ok(SubParams {
            eta,
            kappa0,
            mu,
            alpha0,
            log_t0,
        })
    }

    /// Rejects `α₀ ≥ ᾱ₀`.
    pub fn check_alpha_bar(&self, alpha_bar: f64) -> Result<()> {
        if self.alpha0 < alpha_bar {
            Ok(())
        } else {
            Err(Error::param(format!("α₀ = {} must lie below ᾱ₀ = {alpha_bar}", self.alpha0)))
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("μ must lie in (0, 1), got {mu}")))
    }
}

fn check_log_t0(log_t0: f64) -> Result<()> {
    if log_t0 > 1.0 && log_t0.is_finite() {
        Ok(())
    } else {
        Err(Error::TimeDomain {
            t: log_t0.exp(),
            reason: "the barrier start time must exceed e".into(),
        })
    }
}

/// A supersolution or subsolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Barrier {
    Super(SuperParams),
    Sub(SubParams),
}

impl Barrier {
    pub fn side(&self) -> Side {
        match self {
            Barrier::Super(_) => Side::Super,
            Barrier::Sub(_) => Side::Sub,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            Barrier::Super(p) => p.eta,
            Barrier::Sub(p) => p.eta,
        }
    }

    pub fn kappa0(&self) -> f64 {
        match self {
            Barrier::Super(p) => p.kappa0,
            Barrier::Sub(p) => p.kappa0,
        }
    }

    pub fn log_t0(&self) -> f64 {
        match self {
            Barrier::Super(p) => p.log_t0,
            Barrier::Sub(p) => p.log_t0,
        }
    }

    /// The same barrier with another `κ₀` (validated).
    pub fn with_kappa0(&self, kappa0: f64) -> Result<Barrier> {
        Ok(match *self {
            Barrier::Super(p) => Barrier::Super(SuperParams::at_log_time(p.eta, kappa0, p.mu, p.k, p.log_t0)?),
            Barrier::Sub(p) => Barrier::Sub(SubParams::at_log_time(p.eta, kappa0, p.mu, p.alpha0, p.log_t0)?),
        })
    }

    /// The same barrier started at another time.
    pub fn with_log_t0(&self, log_t0: f64) -> Result<Barrier> {
        Ok(match *self {
            Barrier::Super(p) => Barrier::Super(SuperParams::at_log_time(p.eta, p.kappa0, p.mu, p.k, log_t0)?),
            Barrier::Sub(p) => Barrier::Sub(SubParams::at_log_time(p.eta, p.kappa0, p.mu, p.alpha0, log_t0)?),
        })
    }

    fn decay(&self, tau: f64) -> (f64, f64) {
        let (kappa0, mu, t0) = match self {
            Barrier::Super(p) => (p.kappa0, p.mu, p.log_t0),
            Barrier::Sub(p) => (p.kappa0, p.mu, p.log_t0),
        };
        let d = kappa0 * (mu * (t0 - tau)).exp();
        (d, mu)
    }

    /// `c(t)`.
    pub fn c(&self, tau: f64) -> f64 {
        let (d, _) = self.decay(tau);
        match self {
            Barrier::Super(_) => 1.0 + d,
            Barrier::Sub(_) => 1.0 - d,
        }
    }

    /// `t c′(t)`.
    pub fn t_dc(&self, tau: f64) -> f64 {
        let (d, mu) = self.decay(tau);
        match self {
            Barrier::Super(_) => -mu * d,
            Barrier::Sub(_) => mu * d,
        }
    }

    /// `ν(t)`.
    pub fn nu(&self, tau: f64) -> f64 {
        match self {
            Barrier::Super(_) => 1.0 - 1.0 / tau,
            Barrier::Sub(_) => 1.0 + 1.0 / tau,
        }
    }

    /// `φ^ν ± (k or α₀^ν)`, the numerator of `wᵐ`.
    fn numerator(&self, p: f64, nu: f64) -> f64 {
        match self {
            Barrier::Super(s) => p.powf(nu) + s.k,
            Barrier::Sub(s) => p.powf(nu) - s.alpha0.powf(nu),
        }
    }

    /// `wᵐ`; negative values mean the point lies outside `Ω_{α₀}`.
    pub fn w_m(&self, p: f64, tau: f64, m: f64) -> f64 {
        let nu = self.nu(tau);
        self.numerator(p, nu) * (-nu * (tau / (2.0 * m)).ln()).exp()
    }

    /// `t ∂ₜw / w`.
    pub fn t_dw_over_w(&self, p: f64, tau: f64, m: f64) -> f64 {
        let nu = self.nu(tau);
        let l2 = tau * tau;
        let log_scale = (tau / (2.0 * m)).ln();
        let bracket = match self {
            Barrier::Super(s) => {
                let pn = p.powf(nu);
                pn * p.ln() / ((pn + s.k) * l2) - log_scale / l2 - nu / tau
            }
            Barrier::Sub(s) => {
                let (pn, an) = (p.powf(nu), s.alpha0.powf(nu));
                log_scale / l2 - nu / tau - s.alpha0.ln() / l2 - pn * (p.ln() - s.alpha0.ln()) / (l2 * (pn - an))
            }
        };
        bracket / m
    }

    /// Coefficient `ν φ^{ν−1} ((log t)/2m)^{−ν}` of `∇φ` in `∇wᵐ`.
    pub fn grad_w_m_coeff(&self, p: f64, tau: f64, m: f64) -> f64 {
        let nu = self.nu(tau);
        nu * p.powf(nu - 1.0) * (-nu * (tau / (2.0 * m)).ln()).exp()
    }

    /// Coefficient `ν(ν−1) φ^{ν−2} ((log t)/2m)^{−ν}` of `|∇φ|²` in `Δwᵐ`.
    pub fn lap_w_m_coeff(&self, p: f64, tau: f64, m: f64) -> f64 {
        let nu = self.nu(tau);
        nu * (nu - 1.0) * p.powf(nu - 2.0) * (-nu * (tau / (2.0 * m)).ln()).exp()
    }
}

fn check_barrier_time(barrier: &Barrier, t: f64) -> Result<f64> {
    let tau = t.ln();
    if !(tau >= barrier.log_t0() * (1.0 - 1e-12)) {
        return Err(Error::TimeDomain {
            t,
            reason: format!("barriers start at T = {}", barrier.log_t0().exp()),
        });
    }
    Ok(tau)
}

fn value_unchecked(barrier: &Barrier, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, tau: f64) -> Result<f64> {
    let m = spec.m();
    let p = phi.phi(x);
    let wm = barrier.w_m(p.max(0.0), tau, m);
    let on_level = match barrier {
        Barrier::Sub(s) => (p - s.alpha0).abs() <= 1e-12 * s.alpha0,
        Barrier::Super(_) => false,
    };
    let wm = if on_level { wm.max(0.0) } else { wm };
    if wm < 0.0 || p < 0.0 {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: match barrier {
                Barrier::Super(_) => "point lies in the hole".into(),
                Barrier::Sub(s) => format!("φ = {p} is below α₀ = {}", s.alpha0),
            },
        });
    }
    let g = spec.eval_radial(norm(x), tau.exp());
    Ok(barrier.eta() * barrier.c(tau) * g * wm.powf(1.0 / m))
}

/// `V(x, t)` (the barrier must be a supersolution; `t ≥ T`).
pub fn eval_super(params: &SuperParams, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, t: f64) -> Result<f64> {
    let b = Barrier::Super(*params);
    value_unchecked(&b, phi, spec, x, check_barrier_time(&b, t)?)
}

/// `v(x, t)`; points with `φ(x) < α₀` are rejected.
pub fn eval_sub(params: &SubParams, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, t: f64) -> Result<f64> {
    let b = Barrier::Sub(*params);
    value_unchecked(&b, phi, spec, x, check_barrier_time(&b, t)?)
}

/// Value of either barrier at `t ≥ T`.
pub fn eval_barrier(barrier: &Barrier, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, t: f64) -> Result<f64> {
    value_unchecked(barrier, phi, spec, x, check_barrier_time(barrier, t)?)
}

/// `𝒜`, `ℬ` and their ingredients at one point, all multiplied by
/// `S = t^{1+1/m}` except where noted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABValue {
    pub a_scaled: f64,
    pub b_scaled: f64,
    /// `log S = (1 + 1/m) log t`.
    pub log_scale: f64,
    /// `I^i` or `I^o` by the side's default split radius.
    pub region: RegionKind,
    /// False outside the support of `G`, where everything vanishes.
    pub in_support: bool,
    /// `S ∂ₜG`.
    pub dt_g: f64,
    /// `S ΔGᵐ`.
    pub lap_g_m: f64,
    /// `t ∂ₜw` (scaled by `t` only).
    pub dt_w: f64,
    /// `∇wᵐ · S∇Gᵐ`.
    pub grad_dot: f64,
    /// `Δwᵐ` (unscaled).
    pub lap_w_m: f64,
}

impl ABValue {
    pub fn a(&self) -> f64 {
        self.a_scaled * (-self.log_scale).exp()
    }

    pub fn b(&self) -> f64 {
        self.b_scaled * (-self.log_scale).exp()
    }

    /// `𝒜 + ℬ` unscaled: the PDE residual `∂ₜV − ΔVᵐ`.
    pub fn residual(&self) -> f64 {
        (self.a_scaled + self.b_scaled) * (-self.log_scale).exp()
    }

    pub fn sum_scaled(&self) -> f64 {
        self.a_scaled + self.b_scaled
    }
}

/// Closed-form `𝒜` and `ℬ` at `x` and `τ = log t`.
pub fn eval_ab(barrier: &Barrier, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, tau: f64) -> Result<ABValue> {
    let m = spec.m();
    let r = norm(x);
    let p = phi.phi(x);
    let side = barrier.side();
    let split = (tau / (2.0 * m) - side.default_split_exponent() * tau.ln()).exp();
    let region = if r < split {
        RegionKind::InnerInner
    } else {
        RegionKind::InnerOuter
    };
    let log_scale = (1.0 + 1.0 / m) * tau;
    // ξ̃² / ξ_*²
    let xi = (r.ln() + (m - 1.0) / (2.0 * m) * tau.ln() - tau / (2.0 * m)).exp();
    let s = (xi / spec.xi_star()).powi(2);
    if s >= 1.0 {
        return Ok(ABValue {
            a_scaled: 0.0,
            b_scaled: 0.0,
            log_scale,
            region,
            in_support: false,
            dt_g: 0.0,
            lap_g_m: 0.0,
            dt_w: 0.0,
            grad_dot: 0.0,
            lap_w_m: 0.0,
        });
    }
    let wm = barrier.w_m(p.max(0.0), tau, m);
    if !(p > 0.0) || !(wm > 0.0) {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: format!("φ = {p} leaves no room for the barrier"),
        });
    }
    let w = wm.powf(1.0 / m);
    let (eta, c) = (barrier.eta(), barrier.c(tau));
    let a0 = spec.f_star_zero();
    let q = 1.0 / (m - 1.0);
    let l = tau;
    let one_s = 1.0 - s;
    let f = a0 * one_s.powf(q);
    // t^{1/m} G
    let g_s = l.powf(-1.0 / m) * f;
    let lap_g_m = -(a0 / m) * l.powf(-1.0 / m) * one_s.powf(q - 1.0) * (1.0 - m / (m - 1.0) * s);
    let dt_g = lap_g_m - (a0 / m) * l.powf(-1.0 - 1.0 / m) * one_s.powf(q - 1.0);
    // S Gᵐ
    let s_g_m = (tau / m).exp() / l * a0.powf(m) * one_s.powf(m * q);
    // S ∇Gᵐ = −(a0/2m) L^{−1/m} (1−s)^q x
    let grad_g_coeff = -(a0 / (2.0 * m)) * l.powf(-1.0 / m) * one_s.powf(q);
    let grad_phi = phi.grad(x);
    let dt_w = w * barrier.t_dw_over_w(p, tau, m);
    let grad_dot = barrier.grad_w_m_coeff(p, tau, m) * grad_g_coeff * (grad_phi[0] * x[0] + grad_phi[1] * x[1]);
    let lap_w_m = barrier.lap_w_m_coeff(p, tau, m) * (grad_phi[0].powi(2) + grad_phi[1].powi(2));
    let (em, cm) = (eta.powf(m), c.powf(m));
    let a_scaled = eta * barrier.t_dc(tau) * g_s * w + eta * c * w * dt_g - em * cm * wm * lap_g_m + eta * c * g_s * dt_w;
    let b_scaled = -em * cm * s_g_m * lap_w_m - 2.0 * em * cm * grad_dot;
    Ok(ABValue {
        a_scaled,
        b_scaled,
        log_scale,
        region,
        in_support: true,
        dt_g,
        lap_g_m,
        dt_w,
        grad_dot,
        lap_w_m,
    })
}

/// Finite-difference residual `∂ₜV − ΔVᵐ` at `(x, t)`: five-point Laplacian
/// of spacing `h` and a Richardson-extrapolated centered time difference.
pub fn fd_residual(barrier: &Barrier, phi: &dyn Potential, spec: &CriticalOuterSpec, x: Point, t: f64, h: f64, dt: f64) -> Result<f64> {
    let m = spec.m();
    let at = |y: Point, s: f64| value_unchecked(barrier, phi, spec, y, s.ln());
    let d = |k: f64| -> Result<f64> { Ok((at(x, t + k)? - at(x, t - k)?) / (2.0 * k)) };
    let dt_v = (4.0 * d(dt / 2.0)? - d(dt)?) / 3.0;
    let vm = |y: Point| -> Result<f64> { Ok(at(y, t)?.powf(m)) };
    let lap = (vm([x[0] + h, x[1]])? + vm([x[0] - h, x[1]])? + vm([x[0], x[1] + h])? + vm([x[0], x[1] - h])? - 4.0 * vm(x)?) / (h * h);
    Ok(dt_v - lap)
}

/// A sign claimed for some combination of `𝒜` and `ℬ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Claim {
    ANonNegative,
    BNonNegative,
    SumPositive,
    SumNonPositive,
}

impl Claim {
    fn holds(self, v: &ABValue) -> bool {
        match self {
            Claim::ANonNegative => v.a_scaled >= 0.0,
            Claim::BNonNegative => v.b_scaled >= 0.0,
            Claim::SumPositive => v.sum_scaled() > 0.0,
            Claim::SumNonPositive => v.sum_scaled() <= 0.0,
        }
    }

    /// The claims made for a side on a region.
    pub fn for_region(side: Side, region: RegionKind) -> Result<Vec<Claim>> {
        match (side, region) {
            (Side::Super, RegionKind::InnerOuter) => Ok(vec![Claim::ANonNegative, Claim::BNonNegative]),
            (Side::Super, RegionKind::InnerInner) => Ok(vec![Claim::SumPositive]),
            (Side::Super, RegionKind::Inner) => Ok(vec![Claim::SumPositive]),
            (Side::Sub, RegionKind::Inner) => Ok(vec![Claim::SumNonPositive]),
            _ => Err(Error::param(format!("no sign claim for the {side:?} side on {region:?}"))),
        }
    }
}

/// Sampling of a sign sweep: `n_times` values of `τ` spread linearly over
/// `[log T, tau_factor · log T]`, and at each time `n_radii` geometrically
/// spaced radii along each of `n_angles` rays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub delta: f64,
    pub n_times: usize,
    pub n_radii: usize,
    pub n_angles: usize,
    pub tau_factor: f64,
    /// Exponent of the split radius; `None` uses the side's default.
    pub split_exponent: Option<f64>,
    /// A sweep with fewer points (the region may be empty at early times)
    /// does not pass.
    pub min_samples: usize,
}

impl SweepOptions {
    pub fn new(delta: f64) -> Self {
        SweepOptions {
            delta,
            n_times: 100,
            n_radii: 100,
            n_angles: 1,
            tau_factor: 3.0,
            split_exponent: None,
            min_samples: 0,
        }
    }
}

/// Outcome of one claim over a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaimResult {
    pub claim: Claim,
    pub holds: bool,
    pub failures: usize,
    /// Earliest sampled `τ` from which the claim holds at every later sample.
    pub settled_tau: Option<f64>,
}

/// Extremes of the scaled `𝒜`, `ℬ`, `𝒜 + ℬ` over a sweep, with claim verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct SignReport {
    pub side: Side,
    pub region: RegionKind,
    pub log_t0: f64,
    pub samples: usize,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub sum_range: (f64, f64),
    pub claims: Vec<ClaimResult>,
    pub passed: bool,
}

/// Radius along the ray at `angle` where `φ` first exceeds `level`.
fn ray_entry(phi: &dyn Potential, hole: &HoleGeometry, angle: f64, level: f64) -> f64 {
    let dir = [angle.cos(), angle.sin()];
    let above = |r: f64| phi.phi([r * dir[0], r * dir[1]]) > level;
    let mut lo = hole.inner_radius() * (1.0 - 1e-9);
    let mut hi = hole.outer_radius().max(lo) * 1.01 + 1e-9;
    while !above(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// One point of a sign sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbSample {
    /// Index of the sample time within the sweep.
    pub time_index: usize,
    pub tau: f64,
    pub x: Point,
    pub value: ABValue,
}

/// Evaluates `𝒜`, `ℬ` on the sweep grid of `opts` over `region`, for
/// `log t` from `log T` to `tau_factor · log T`. Rays start where `φ` exceeds
/// zero (super side) or `α₀` (sub side).
pub fn sample_ab(
    barrier: &Barrier,
    phi: &dyn Potential,
    hole: &HoleGeometry,
    spec: &CriticalOuterSpec,
    region: RegionKind,
    opts: &SweepOptions,
) -> Result<Vec<AbSample>> {
    if opts.n_times < 1 || opts.n_radii < 2 || opts.n_angles < 1 || !(opts.tau_factor >= 1.0) {
        return Err(Error::param("sweep needs n_times ≥ 1, n_radii ≥ 2, n_angles ≥ 1, tau_factor ≥ 1"));
    }
    if region == RegionKind::Outer {
        return Err(Error::param("sign sweeps cover the inner region and its parts"));
    }
    let side = barrier.side();
    let level = match barrier {
        Barrier::Super(_) => 1e-12,
        Barrier::Sub(s) => s.alpha0 * (1.0 + 1e-9),
    };
    let tau0 = barrier.log_t0();
    let entries: Vec<f64> = (0..opts.n_angles)
        .map(|a| ray_entry(phi, hole, 2.0 * PI * a as f64 / opts.n_angles as f64, level))
        .collect();
    let mut out = Vec::with_capacity(opts.n_times * opts.n_radii * opts.n_angles);
    for j in 0..opts.n_times {
        let tau = if opts.n_times == 1 {
            tau0
        } else {
            tau0 + (opts.tau_factor - 1.0) * tau0 * j as f64 / (opts.n_times - 1) as f64
        };
        let mut rs = RegionSpec::at_log_time(spec, opts.delta, tau, region, side)?;
        if let Some(p) = opts.split_exponent {
            rs = rs.with_split_exponent(p);
        }
        for (a, &entry) in entries.iter().enumerate() {
            let angle = 2.0 * PI * a as f64 / opts.n_angles as f64;
            let (lo, hi) = match region {
                RegionKind::InnerInner => (entry, rs.inner_radius().min(rs.split_radius())),
                RegionKind::InnerOuter => (entry.max(rs.split_radius()), rs.inner_radius()),
                _ => (entry, rs.inner_radius()),
            };
            if !(hi > lo) {
                continue;
            }
            for i in 0..opts.n_radii {
                let r = lo * (hi / lo).powf(i as f64 / (opts.n_radii - 1) as f64);
                let x = [r * angle.cos(), r * angle.sin()];
                out.push(AbSample {
                    time_index: j,
                    tau,
                    x,
                    value: eval_ab(barrier, phi, spec, x, tau)?,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyRegion(format!("{region:?} has no sample points for log T = {tau0}")));
    }
    Ok(out)
}

/// Samples `𝒜`, `ℬ` over `region` (see [`sample_ab`]) and tests the side's
/// sign claims there.
pub fn verify_residual_signs(
    barrier: &Barrier,
    phi: &dyn Potential,
    hole: &HoleGeometry,
    spec: &CriticalOuterSpec,
    region: RegionKind,
    opts: &SweepOptions,
) -> Result<SignReport> {
    let claims = Claim::for_region(barrier.side(), region)?;
    let samples = sample_ab(barrier, phi, hole, spec, region, opts)?;
    Ok(summarize_signs(barrier, region, &claims, &samples, opts.min_samples))
}

/// Extremes and claim verdicts of a sweep.
pub fn summarize_signs(barrier: &Barrier, region: RegionKind, claims: &[Claim], samples: &[AbSample], min_samples: usize) -> SignReport {
    let mut last_fail: Vec<Option<usize>> = vec![None; claims.len()];
    let mut failures = vec![0usize; claims.len()];
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    // sample time of each index, for the settled-time report
    let mut taus: Vec<f64> = Vec::new();
    for s in samples {
        if taus.len() <= s.time_index {
            taus.resize(s.time_index + 1, f64::NAN);
        }
        taus[s.time_index] = s.tau;
        let v = &s.value;
        for (k, val) in [v.a_scaled, v.b_scaled, v.sum_scaled()].into_iter().enumerate() {
            ranges[k].0 = ranges[k].0.min(val);
            ranges[k].1 = ranges[k].1.max(val);
        }
        for (c, claim) in claims.iter().enumerate() {
            if !claim.holds(v) {
                failures[c] += 1;
                last_fail[c] = Some(last_fail[c].map_or(s.time_index, |j| j.max(s.time_index)));
            }
        }
    }
    let first_after = |j: usize| taus.iter().skip(j + 1).copied().find(|t| !t.is_nan());
    let results: Vec<ClaimResult> = claims
        .iter()
        .enumerate()
        .map(|(c, &claim)| ClaimResult {
            claim,
            holds: failures[c] == 0,
            failures: failures[c],
            settled_tau: match last_fail[c] {
                None => taus.iter().copied().find(|t| !t.is_nan()),
                Some(j) => first_after(j),
            },
        })
        .collect();
    let passed = results.iter().all(|r| r.holds) && samples.len() >= min_samples;
    SignReport {
        side: barrier.side(),
        region,
        log_t0: barrier.log_t0(),
        samples: samples.len(),
        a_range: ranges[0],
        b_range: ranges[1],
        sum_range: ranges[2],
        claims: results,
        passed,
    }
}

/// Outcome of a threshold search over starting times.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    /// Smallest `log T` on the ladder for which every claim held.
    pub log_t0: Option<f64>,
    pub attempts: Vec<SignReport>,
    /// Ladder values whose sweep found the region empty at every sample.
    pub empty: Vec<f64>,
}

/// Runs [`verify_residual_signs`] for each `log T` of `ladder` (ascending) and
/// stops at the first that passes. Starting times at which the region is
/// empty throughout the sweep are skipped.
pub fn find_sign_threshold(
    barrier: &Barrier,
    phi: &dyn Potential,
    hole: &HoleGeometry,
    spec: &CriticalOuterSpec,
    region: RegionKind,
    opts: &SweepOptions,
    ladder: &[f64],
) -> Result<ThresholdReport> {
    let mut attempts = Vec::new();
    let mut empty = Vec::new();
    for &tau in ladder {
        let b = barrier.with_log_t0(tau)?;
        let report = match verify_residual_signs(&b, phi, hole, spec, region, opts) {
            Ok(r) => r,
            Err(Error::EmptyRegion(_)) => {
                empty.push(tau);
                continue;
            }
            Err(e) => return Err(e),
        };
        let passed = report.passed;
        attempts.push(report);
        if passed {
            return Ok(ThresholdReport {
                log_t0: Some(tau),
                attempts,
                empty,
            });
        }
    }
    Ok(ThresholdReport {
        log_t0: None,
        attempts,
        empty,
    })
}

/// Range of `η w` over the circle `|x| = δ t^{1/2m} (log t)^{−(m−1)/2m}`,
/// the outer edge of the inner region where the barrier meets `G`.
pub fn matching_band(
    barrier: &Barrier,
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    delta: f64,
    tau: f64,
    n_angles: usize,
) -> (f64, f64) {
    let m = spec.m();
    let r = delta * (tau / (2.0 * m) - (m - 1.0) / (2.0 * m) * tau.ln()).exp();
    (0..n_angles.max(1))
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n_angles.max(1) as f64;
            let p = phi.phi([r * th.cos(), r * th.sin()]);
            barrier.eta() * barrier.w_m(p, tau, m).max(0.0).powf(1.0 / m)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Points where both compared values are below this fraction of `sup u` are
/// skipped: exact zeros beyond the free boundary against round-off.
pub const FREE_BOUNDARY_TOLERANCE: f64 = 1e-14;

/// Chooses `κ₀` from the state at `t = T`: the smallest value (no smaller
/// than the barrier's own) with `V(·, T) ≥ ‖u(·, T)‖∞` on `I_δ(T)`, or, for the
/// subsolution, with `v(·, T) ≤ ℓ = min u(·, T)` on `I_δ(T) ∩ Ω_{α₀}`.
pub fn calibrate(barrier: &Barrier, phi: &dyn Potential, spec: &CriticalOuterSpec, at_t0: &SolverState, delta: f64) -> Result<Barrier> {
    let t0 = at_t0.t();
    let tau = t0.ln();
    if ((tau - barrier.log_t0()) / tau).abs() > 1e-9 {
        return Err(Error::Calibration(format!(
            "state time {t0} differs from T = {}",
            barrier.log_t0().exp()
        )));
    }
    let rs = RegionSpec::new(spec, delta, t0, RegionKind::Inner, barrier.side())?;
    let unit = barrier.with_kappa0(match barrier {
        Barrier::Super(_) => 1.0,
        Barrier::Sub(_) => 0.5,
    })?;
    // barrier values with c ≡ 1 over the region at T
    let mut base = Vec::new();
    for (&x, &u) in at_t0.discretization().centers().iter().zip(at_t0.u()) {
        if !rs.contains(x) {
            continue;
        }
        match value_unchecked(&unit, phi, spec, x, tau) {
            Ok(v) => base.push((v / unit.c(tau), u)),
            Err(Error::OutsideDomain { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if base.is_empty() {
        return Err(Error::Calibration(format!("no cells of I_δ(T) for δ = {delta}, T = {t0}")));
    }
    match barrier {
        Barrier::Super(_) => {
            let sup = at_t0.sup();
            let low = base.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
            let needed = sup / low - 1.0;
            barrier.with_kappa0(barrier.kappa0().max(needed))
        }
        Barrier::Sub(_) => {
            let ell = base.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
            let high = base.iter().map(|b| b.0).fold(0.0, f64::max);
            if !(ell > 0.0) {
                return Err(Error::Calibration(format!(
                    "u(·, T) vanishes somewhere on I_δ(T) ∩ Ω_α₀ (ℓ = {ell}); no κ₀ < 1 orders v below it"
                )));
            }
            let needed = 1.0 - ell / high;
            let k = barrier.kappa0().max(needed * (1.0 + 1e-12));
            if k >= 1.0 {
                return Err(Error::Calibration(format!("need κ₀ = {k} ≥ 1 (ℓ = {ell}, max ηGw = {high})")));
            }
            barrier.with_kappa0(k)
        }
    }
}

/// Pointwise comparison of solver snapshots with a barrier.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingReport {
    pub side: Side,
    pub times: Vec<f64>,
    pub samples: usize,
    pub passed_samples: usize,
    /// Largest violation `u − V` (or `v − u`), relative to `sup u`.
    pub worst_violation: f64,
    pub worst_at: Option<(f64, Point)>,
    /// True when the region held no sample points at all.
    pub degenerate: bool,
    pub kappa0: f64,
}

impl OrderingReport {
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.passed_samples as f64 / self.samples as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.passed_samples == self.samples
    }
}

/// Checks `u ≤ V` (super) or `u ≥ v` (sub) at every cell of `I_δ(t)` (and
/// `Ω_{α₀}` for the subsolution) for the snapshots with `t ∈ [T, t_max]`.
pub fn verify_ordering(
    snapshots: &[SolverState],
    barrier: &Barrier,
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    delta: f64,
    t_max: f64,
) -> Result<OrderingReport> {
    let t0 = barrier.log_t0().exp();
    let mut report = OrderingReport {
        side: barrier.side(),
        times: Vec::new(),
        samples: 0,
        passed_samples: 0,
        worst_violation: f64::NEG_INFINITY,
        worst_at: None,
        degenerate: false,
        kappa0: barrier.kappa0(),
    };
    for snap in snapshots {
        let t = snap.t();
        if t < t0 * (1.0 - 1e-12) || t > t_max * (1.0 + 1e-12) {
            continue;
        }
        report.times.push(t);
        let tau = t.ln().max(barrier.log_t0());
        let rs = RegionSpec::at_log_time(spec, delta, t.ln(), RegionKind::Inner, barrier.side())?;
        let sup = snap.sup();
        for (&x, &u) in snap.discretization().centers().iter().zip(snap.u()) {
            if !rs.contains(x) {
                continue;
            }
            let b = match value_unchecked(barrier, phi, spec, x, tau) {
                Ok(b) => b,
                Err(Error::OutsideDomain { .. }) => continue,
                Err(e) => return Err(e),
            };
            if u < FREE_BOUNDARY_TOLERANCE * sup && b < FREE_BOUNDARY_TOLERANCE * sup {
                continue;
            }
            let violation = match barrier {
                Barrier::Super(_) => u - b,
                Barrier::Sub(_) => b - u,
            } / sup;
            report.samples += 1;
            if violation <= 0.0 {
                report.passed_samples += 1;
            }
            if violation > report.worst_violation {
                report.worst_violation = violation;
                report.worst_at = Some((t, x));
            }
        }
    }
    report.degenerate = report.samples == 0;
    Ok(report)
}

/// Outcome of the three-hole comparison `u_r ≥ u ≥ u_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub times: Vec<f64>,
    pub samples: usize,
    pub violations: usize,
    /// Largest violation relative to `sup u`.
    pub worst: f64,
    /// `(T, M⁺ − M⁻, (M⁺ − M⁻) log T)` at the requested times.
    pub mass_gap: Vec<(f64, f64, f64)>,
}

impl SandwichReport {
    pub fn ordered(&self) -> bool {
        self.violations == 0
    }

    /// Every reported `(M⁺ − M⁻) log T` is finite and at most `limit`.
    pub fn gap_bounded(&self, limit: f64) -> bool {
        !self.mass_gap.is_empty() && self.mass_gap.iter().all(|g| g.2.is_finite() && g.2 <= limit)
    }
}

/// Large-time limit `2m M₀ log(R/r)` of `(M⁺ − M⁻) log T` for disk holes of
/// radii `r < R` and initial mass `M₀`: the two weighted moments differ by
/// `M₀ log(R/r)` and each mass behaves like `2m M_φ / log T`.
pub fn sandwich_gap_limit(m: f64, initial_mass: f64, r_small: f64, r_big: f64) -> f64 {
    2.0 * m * initial_mass * (r_big / r_small).ln()
}

/// Compares snapshots of runs with nested holes `B_r ⊂ ℋ ⊂ B_R` on identical
/// masked grids. A cell that is hole in a run carries `u = 0` there.
pub fn sandwich_check(
    small_hole: &RunRecord,
    middle: &RunRecord,
    big_hole: &RunRecord,
    gap_times: &[f64],
    tolerance: f64,
) -> Result<SandwichReport> {
    let mut report = SandwichReport {
        times: Vec::new(),
        samples: 0,
        violations: 0,
        worst: f64::NEG_INFINITY,
        mass_gap: Vec::new(),
    };
    if small_hole.snapshots.len() != middle.snapshots.len() || middle.snapshots.len() != big_hole.snapshots.len() {
        return Err(Error::IncompatibleGrids("the three runs have different snapshot counts".into()));
    }
    for ((a, b), c) in small_hole.snapshots.iter().zip(&middle.snapshots).zip(&big_hole.snapshots) {
        if a.t() != b.t() || b.t() != c.t() {
            return Err(Error::IncompatibleGrids(format!(
                "snapshot times differ: {} {} {}",
                a.t(),
                b.t(),
                c.t()
            )));
        }
        let (ga, gb, gc) = match (a.mesh(), b.mesh(), c.mesh()) {
            (Mesh::Masked(x), Mesh::Masked(y), Mesh::Masked(z)) => (x, y, z),
            _ => return Err(Error::IncompatibleGrids("sandwich runs need masked grids".into())),
        };
        if ga.n() != gb.n() || gb.n() != gc.n() || ga.h() != gb.h() || gb.h() != gc.h() {
            return Err(Error::IncompatibleGrids(format!("grids differ at t = {}", a.t())));
        }
        report.times.push(a.t());
        let value = |s: &SolverState, k: usize| {
            let d = s.discretization();
            let x = match s.mesh() {
                Mesh::Masked(g) => g.center(k),
                Mesh::Radial(_) => unreachable!(),
            };
            d.cell_of(x).map_or(0.0, |c| s.u()[c])
        };
        let sup = b.sup().max(a.sup());
        for k in 0..ga.len() {
            if ga.kind(k) != crate::geometry::CellKind::Fluid {
                continue;
            }
            let (ua, ub, uc) = (value(a, k), value(b, k), value(c, k));
            report.samples += 1;
            let v = (ub - ua).max(uc - ub) / sup.max(f64::MIN_POSITIVE);
            if v > tolerance {
                report.violations += 1;
            }
            report.worst = report.worst.max(v);
        }
    }
    for &t in gap_times {
        let find = |r: &RunRecord| {
            r.checkpoints
                .iter()
                .find(|c| ((c.t - t) / t).abs() < 1e-9)
                .map(|c| c.mass)
                .ok_or_else(|| Error::param(format!("no checkpoint at T = {t}")))
        };
        let gap = find(small_hole)? - find(big_hole)?;
        report.mass_gap.push((t, gap, gap * t.ln()));
    }
    Ok(report)
}

/// `ᾱ₀ = inf φ` over the curve at distance `r0` outside the hole, and the
/// default `α₀ = ᾱ₀/2`.
pub fn default_alpha0(phi: &dyn Potential, hole: &HoleGeometry, r0: f64) -> (f64, f64) {
    let bar = crate::stationary::alpha_bar_0(phi, hole, r0, 256);
    (bar, bar / 2.0)
}

/// Smallest `t` with `log t > 1`, the start of the critical asymptotics.
pub const MIN_TIME: f64 = E;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::DiskPotential;
    use approx::assert_relative_eq;

    fn spec() -> CriticalOuterSpec {
        CriticalOuterSpec::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(SuperParams::new(1.0, 1.0, 0.1, 1.0, 100.0).is_err());
        assert!(SuperParams::new(1.1, 0.0, 0.1, 1.0, 100.0).is_err());
        assert!(SuperParams::new(1.1, 1.0, 1.0, 1.0, 100.0).is_err());
        assert!(SuperParams::new(1.1, 1.0, 0.1, 1.0, 2.0).is_err());
        assert!(SubParams::new(0.5, 1.0, 0.1, 0.1, 100.0).is_err());
        assert!(SubParams::new(1.5, 0.5, 0.1, 0.1, 100.0).is_err());
        let p = SubParams::new(0.5, 0.5, 0.1, 0.2, 100.0).unwrap();
        assert!(p.check_alpha_bar(0.1).is_err());
        assert!(p.check_alpha_bar(0.3).is_ok());
    }

    #[test]
    fn super_with_unit_factors_reduces_to_g() {
        // k → 0, φ = log t/(2m), η c → 1: w = 1
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let t = 8f64.exp();
        let x = [2f64.exp(), 0.0];
        let b = Barrier::Super(SuperParams::at_log_time(1.0 + 1e-12, 1e-12, 0.5, 1e-300, 8.0).unwrap());
        let v = value_unchecked(&b, &phi, &s, x, t.ln()).unwrap();
        assert_relative_eq!(v, s.eval_radial(norm(x), t), max_relative = 1e-10);
    }

    #[test]
    fn documented_super_value() {
        // disk(1), m = 2, η = 1.1, κ₀ = 1, μ = 0.1, k = 1, T = e⁴, x = (e, 0), t = e⁴:
        // c = 2, ν = 3/4, w = ((1 + 1)/1^{3/4})^{1/2} = √2
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let p = SuperParams::new(1.1, 1.0, 0.1, 1.0, 4f64.exp()).unwrap();
        let t = 4f64.exp();
        let v = eval_super(&p, &phi, &s, [E, 0.0], t).unwrap();
        let g = s.eval_radial(E, t);
        assert_relative_eq!(v, 1.1 * 2.0 * g * 2f64.sqrt(), max_relative = 1e-13);
        assert!(v > 0.0);
    }

    #[test]
    fn sub_vanishes_on_level_set_and_rejects_inside() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let p = SubParams::new(0.5, 0.5, 0.1, 0.2, 50.0).unwrap();
        let r = 0.2f64.exp();
        assert!(eval_sub(&p, &phi, &s, [r, 0.0], 60.0).unwrap().abs() < 1e-12);
        assert!(matches!(eval_sub(&p, &phi, &s, [1.1, 0.0], 60.0), Err(Error::OutsideDomain { .. })));
        let sup = SuperParams::new(1.1, 0.5, 0.1, 1.0, 50.0).unwrap();
        let x = [2.0, 0.5];
        assert!(eval_sub(&p, &phi, &s, x, 60.0).unwrap() < eval_super(&sup, &phi, &s, x, 60.0).unwrap());
    }

    #[test]
    fn outside_support_everything_vanishes() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let b = Barrier::Super(SuperParams::new(1.5, 1.0, 0.1, 1.0, 100.0).unwrap());
        let tau = 200f64.ln();
        let far = [10.0 * s.support_radius(200.0), 0.0];
        let v = eval_ab(&b, &phi, &s, far, tau).unwrap();
        assert!(!v.in_support);
        assert_eq!((v.a_scaled, v.b_scaled), (0.0, 0.0));
    }

    #[test]
    fn lap_g_m_changes_sign_at_predicted_radius() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let b = Barrier::Super(SuperParams::new(1.5, 1.0, 0.1, 1.0, 1e3).unwrap());
        let t: f64 = 1e6;
        let r_flip = s.support_radius(t) * ((s.m() - 1.0) / s.m()).sqrt();
        let inside = eval_ab(&b, &phi, &s, [0.98 * r_flip, 0.0], t.ln()).unwrap();
        let outside = eval_ab(&b, &phi, &s, [1.02 * r_flip, 0.0], t.ln()).unwrap();
        assert!(inside.lap_g_m < 0.0 && outside.lap_g_m > 0.0);
    }

    #[test]
    fn closed_form_matches_finite_differences() {
        let s = CriticalOuterSpec::new(2.0, 3.0).unwrap();
        let phi = DiskPotential { radius: 1.0 };
        let t: f64 = 50.0;
        for b in [
            Barrier::Super(SuperParams::new(1.3, 0.7, 0.2, 1.0, 30.0).unwrap()),
            Barrier::Sub(SubParams::new(0.6, 0.4, 0.2, 0.05, 30.0).unwrap()),
        ] {
            for x in [[1.8, 0.3], [2.5, -1.0], [0.2, 3.1]] {
                let ab = eval_ab(&b, &phi, &s, x, t.ln()).unwrap();
                let e1 = (fd_residual(&b, &phi, &s, x, t, 2e-2, 1e-2).unwrap() - ab.residual()).abs();
                let e2 = (fd_residual(&b, &phi, &s, x, t, 1e-2, 1e-2).unwrap() - ab.residual()).abs();
                assert!(e2 < 1e-3 * ab.residual().abs().max(1e-6), "{b:?} {x:?}: {e2} vs {}", ab.residual());
                let ratio = e1 / e2;
                assert!((3.5..4.5).contains(&ratio), "{b:?} {x:?} ratio {ratio}");
            }
        }
    }

    #[test]
    fn parameter_monotonicity() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let x = [2.2, 0.4];
        let v1 = eval_super(&SuperParams::new(1.2, 1.0, 0.1, 0.5, 20.0).unwrap(), &phi, &s, x, 30.0).unwrap();
        let v2 = eval_super(&SuperParams::new(1.2, 1.0, 0.1, 2.0, 20.0).unwrap(), &phi, &s, x, 30.0).unwrap();
        assert!(v2 > v1);
        let w1 = eval_sub(&SubParams::new(0.5, 0.5, 0.1, 0.05, 20.0).unwrap(), &phi, &s, x, 30.0).unwrap();
        let w2 = eval_sub(&SubParams::new(0.5, 0.5, 0.1, 0.2, 20.0).unwrap(), &phi, &s, x, 30.0).unwrap();
        assert!(w2 < w1);
    }

    #[test]
    fn boundary_compatibility() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let sup = SuperParams::new(1.2, 1.0, 0.1, 1.0, 20.0).unwrap();
        let sub = SubParams::new(0.5, 0.5, 0.1, 0.1, 20.0).unwrap();
        let scale = eval_sub(&sub, &phi, &s, [2.0, 0.0], 25.0).unwrap();
        for k in 0..32 {
            let th = 2.0 * PI * k as f64 / 32.0;
            assert!(eval_super(&sup, &phi, &s, [th.cos(), th.sin()], 25.0).unwrap() > 0.0);
            let r = 0.1f64.exp();
            // w carries a 1/m power, so round-off in φ − α₀ shows up at its square root
            assert!(eval_sub(&sub, &phi, &s, [r * th.cos(), r * th.sin()], 25.0).unwrap() < 1e-6 * scale);
        }
    }

    #[test]
    fn matching_band_holds_at_late_times() {
        let s = spec();
        let phi = DiskPotential { radius: 1.0 };
        let delta = s.delta_star() / 2.0;
        let sup = Barrier::Super(SuperParams::at_log_time(1.5, 1.0, 0.1, 1.0, 5.0).unwrap());
        let sub = Barrier::Sub(SubParams::at_log_time(0.5, 0.5, 0.1, 0.05, 5.0).unwrap());
        for tau in [60.0, 120.0, 400.0] {
            assert!(matching_band(&sup, &phi, &s, delta, tau, 16).0 >= 1.25);
            assert!(matching_band(&sub, &phi, &s, delta, tau, 16).1 <= 0.75);
        }
    }

    #[test]
    fn sweep_reports_samples_and_thresholds() {
        let s = CriticalOuterSpec::new(2.0, 5.0).unwrap();
        let phi = DiskPotential { radius: 1.0 };
        let hole = HoleGeometry::disk(1.0).unwrap();
        let b = Barrier::Sub(SubParams::at_log_time(0.5, 0.5, 0.05, 0.05, 10.0).unwrap());
        let opts = SweepOptions {
            n_times: 10,
            n_radii: 10,
            ..SweepOptions::new(s.delta_star() / 2.0)
        };
        let rep = verify_residual_signs(&b, &phi, &hole, &s, RegionKind::Inner, &opts).unwrap();
        assert_eq!(rep.samples, 100);
        assert_eq!(rep.claims.len(), 1);
        assert!(Claim::for_region(Side::Sub, RegionKind::Outer).is_err());
    }
}
