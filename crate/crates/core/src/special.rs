//! Closed-form special solutions: the Barenblatt family, the critical outer
//! profile `G` of the exterior problem, and the one-dimensional dipole.
//!
//! Every evaluation is a pure function of its spec and the point `(x, t)`.

use crate::error::{Error, Result};
use crate::geometry::{norm, Point};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, nine terms), with
/// the reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Euler beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::param(format!("m > 1 required, got {m}")));
    }
    Ok(())
}

/// Self-similarity exponents `(α, β)` of the Barenblatt solution in dimension `n`.
pub fn exponents(m: f64, n: usize) -> Result<(f64, f64)> {
    check_m(m)?;
    if !(n == 1 || n == 2) {
        return Err(Error::param(format!("dimension must be 1 or 2, got {n}")));
    }
    let beta = 1.0 / (n as f64 * (m - 1.0) + 2.0);
    Ok((n as f64 * beta, beta))
}

/// Parameters of the Barenblatt solution `𝒰(x, t; M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSpec {
    m: f64,
    n: usize,
    mass: f64,
    alpha: f64,
    beta: f64,
    xi: f64,
}

impl ProfileSpec {
    pub fn new(m: f64, n: usize, mass: f64) -> Result<Self> {
        let (alpha, beta) = exponents(m, n)?;
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::param(format!("mass must be nonnegative, got {mass}")));
        }
        let xi = support_constant(m, n, beta) * mass.powf((m - 1.0) * beta);
        Ok(ProfileSpec {
            m,
            n,
            mass,
            alpha,
            beta,
            xi,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Support radius `ξ_M` of the profile.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Profile `F_M` at `|ξ| = s`.
    pub fn profile(&self, s: f64) -> f64 {
        profile_value(self.m, self.beta, self.xi, s)
    }

    /// Support radius `ξ_M t^β` at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        self.xi * t.powf(self.beta)
    }

    /// Radial evaluation `t^{-α} F_M(r / t^β)`.
    pub fn eval_radial(&self, r: f64, t: f64) -> f64 {
        t.powf(-self.alpha) * self.profile(r * t.powf(-self.beta))
    }
}

/// `ξ_M` for unit mass: the Γ-function prefactor of the support radius.
fn support_constant(m: f64, n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    let ratio = gamma(1.0 / (2.0 * (m - 1.0) * beta)) / (4.0 * m * std::f64::consts::PI.powf(nf / 2.0) * gamma(m / (m - 1.0)));
    ratio.powf((m - 1.0) * beta) * (2.0 * m / ((m - 1.0) * beta)).powf(m * beta)
}

fn profile_value(m: f64, beta: f64, xi: f64, s: f64) -> f64 {
    let gap = xi * xi - s * s;
    if gap <= 0.0 {
        return 0.0;
    }
    ((m - 1.0) * beta / (2.0 * m) * gap).powf(1.0 / (m - 1.0))
}

/// Support radius `ξ_M` of the Barenblatt profile.
pub fn xi_m(spec: &ProfileSpec) -> f64 {
    spec.xi()
}

/// `𝒰(x, t; M) = t^{-α} F_M(x / t^β)`; `x` has `spec.dim()` components.
pub fn barenblatt(spec: &ProfileSpec, x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param(format!("Barenblatt needs t > 0, got {t}")));
    }
    if x.len() != spec.dim() {
        return Err(Error::param(format!(
            "point has {} components, spec dimension is {}",
            x.len(),
            spec.dim()
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(spec.eval_radial(r, t))
}

/// The critical outer profile of the exterior problem: the two-dimensional
/// Barenblatt solution whose mass decays like `2m M_φ* / log t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalOuterSpec {
    m: f64,
    m_phi: f64,
    profile: ProfileSpec,
}

impl CriticalOuterSpec {
    pub fn new(m: f64, m_phi_star: f64) -> Result<Self> {
        check_m(m)?;
        if !(m_phi_star > 0.0 && m_phi_star.is_finite()) {
            return Err(Error::param(format!("weighted mass must be positive, got {m_phi_star}")));
        }
        let profile = ProfileSpec::new(m, 2, 2.0 * m * m_phi_star)?;
        Ok(CriticalOuterSpec {
            m,
            m_phi: m_phi_star,
            profile,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// The conserved weighted mass `M_φ*`.
    pub fn m_phi_star(&self) -> f64 {
        self.m_phi
    }

    /// Mass `2m M_φ*` of the profile `F_*`.
    pub fn mass_star(&self) -> f64 {
        self.profile.mass()
    }

    /// Barenblatt spec with mass `2m M_φ*` (dimension 2).
    pub fn profile_spec(&self) -> &ProfileSpec {
        &self.profile
    }

    pub fn xi_star(&self) -> f64 {
        self.profile.xi()
    }

    /// `δ_* = ξ_* √((m−1)/(2m))`.
    pub fn delta_star(&self) -> f64 {
        self.xi_star() * ((self.m - 1.0) / (2.0 * self.m)).sqrt()
    }

    /// `F_*` at `|ξ̃| = s`.
    pub fn f_star(&self, s: f64) -> f64 {
        self.profile.profile(s)
    }

    pub fn f_star_zero(&self) -> f64 {
        self.profile.profile(0.0)
    }

    /// Length scale `t^{1/2m} (log t)^{-(m−1)/2m}` mapping `ξ̃` to `x`.
    pub fn length_scale(&self, t: f64) -> f64 {
        let m = self.m;
        t.powf(0.5 / m) * t.ln().powf(-(m - 1.0) / (2.0 * m))
    }

    /// Support radius `ξ_* t^{1/2m} (log t)^{-(m−1)/2m}` of `G(·, t)`.
    pub fn support_radius(&self, t: f64) -> f64 {
        self.xi_star() * self.length_scale(t)
    }

    /// Amplitude `(t log t)^{-1/m}`.
    pub fn amplitude(&self, t: f64) -> f64 {
        (t * t.ln()).powf(-1.0 / self.m)
    }

    /// `G` at radius `r`, assuming `t > e` has been checked.
    pub fn eval_radial(&self, r: f64, t: f64) -> f64 {
        self.amplitude(t) * self.f_star(r / self.length_scale(t))
    }
}

/// `G(x, t) = (t log t)^{-1/m} F_*(ξ̃)` with `ξ̃ = x (log t)^{(m−1)/2m} / t^{1/2m}`.
pub fn critical_g(spec: &CriticalOuterSpec, x: Point, t: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return Err(Error::TimeDomain {
            t,
            reason: "the critical profile needs log t > 1".into(),
        });
    }
    Ok(spec.eval_radial(norm(x), t))
}

/// Parameters of the one-dimensional dipole solution with first moment `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleSpec {
    m: f64,
    moment: f64,
    xi: f64,
}

impl DipoleSpec {
    pub fn new(m: f64, moment: f64) -> Result<Self> {
        check_m(m)?;
        if !(moment >= 0.0 && moment.is_finite()) {
            return Err(Error::param(format!("first moment must be nonnegative, got {moment}")));
        }
        let q = (m + 1.0) / m;
        let integral = beta_fn(1.0 + 1.0 / q, m / (m - 1.0)) / q;
        let xi = (2.0 * m * (m + 1.0) / ((m - 1.0) * integral.powf(m - 1.0))).powf(0.5 / m) * moment.powf((m - 1.0) / (2.0 * m));
        Ok(DipoleSpec { m, moment, xi })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn moment(&self) -> f64 {
        self.moment
    }

    /// `α_d = 1/m`.
    pub fn alpha(&self) -> f64 {
        1.0 / self.m
    }

    /// `β_d = 1/(2m)`.
    pub fn beta(&self) -> f64 {
        0.5 / self.m
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Profile `D_M(ξ)` for `ξ ≥ 0`.
    pub fn profile(&self, s: f64) -> f64 {
        let m = self.m;
        let q = (m + 1.0) / m;
        let gap = self.xi.powf(q) - s.powf(q);
        if s <= 0.0 || gap <= 0.0 {
            return 0.0;
        }
        ((m - 1.0) / (2.0 * m * (m + 1.0))).powf(1.0 / (m - 1.0)) * s.powf(1.0 / m) * gap.powf(1.0 / (m - 1.0))
    }
}

/// `𝒟(x, t; M) = t^{-1/m} D_M(x / t^{1/2m})` on the half-line.
pub fn dipole(spec: &DipoleSpec, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param(format!("dipole needs t > 0, got {t}")));
    }
    if x < 0.0 {
        return Err(Error::OutsideDomain {
            x,
            y: 0.0,
            reason: "dipole lives on the half-line x >= 0".into(),
        });
    }
    Ok(t.powf(-spec.alpha()) * spec.profile(x * t.powf(-spec.beta())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn lanczos_matches_reference_gamma() {
        for k in 0..=190 {
            let x = 0.5 + 0.05 * k as f64;
            let want = statrs::function::gamma::gamma(x);
            assert_relative_eq!(gamma(x), want, max_relative = 1e-12);
        }
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
    }

    #[test]
    fn exponent_values() {
        let (a, b) = exponents(2.0, 2).unwrap();
        assert_eq!((a, b), (0.5, 0.25));
        let (a, b) = exponents(2.0, 1).unwrap();
        assert_relative_eq!(a, 1.0 / 3.0);
        assert_relative_eq!(b, 1.0 / 3.0);
        assert!(matches!(exponents(1.0, 2), Err(Error::Parameter(_))));
        assert!(matches!(exponents(0.5, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn support_radius_examples() {
        assert_eq!(ProfileSpec::new(2.0, 2, 0.0).unwrap().xi(), 0.0);
        let one = ProfileSpec::new(2.0, 2, 1.0).unwrap();
        // For m = N = 2 both Γ factors are Γ(2) = 1.
        let want = 4.0 * (8.0 * PI).powf(-0.25);
        assert_relative_eq!(one.xi(), want, max_relative = 1e-13);
        let sixteen = ProfileSpec::new(2.0, 2, 16.0).unwrap();
        assert_relative_eq!(sixteen.xi(), 2.0 * one.xi(), max_relative = 1e-13);
    }

    #[test]
    fn barenblatt_center_and_support() {
        let spec = ProfileSpec::new(2.0, 2, 1.0).unwrap();
        let xi = spec.xi();
        // ((m−1)β/2m)^{1/(m−1)} = 1/16 for m = N = 2
        assert_relative_eq!(barenblatt(&spec, &[0.0, 0.0], 1.0).unwrap(), xi * xi / 16.0, max_relative = 1e-14);
        assert_relative_eq!(xi * xi / 16.0, 0.199_471, max_relative = 1e-5);
        assert_eq!(barenblatt(&spec, &[xi * 2f64.powf(0.25) * 1.0001, 0.0], 2.0).unwrap(), 0.0);
        assert!(barenblatt(&spec, &[0.0, 0.0], 0.0).is_err());
    }

    /// Mass by midpoint quadrature in the variable θ with r = R sin θ, which
    /// removes the edge singularity of the profile.
    fn radial_mass(spec: &ProfileSpec, t: f64, n: usize) -> f64 {
        let big_r = spec.support_radius(t);
        let dth = 0.5 * PI / n as f64;
        let mut sum = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) * dth;
            let r = big_r * th.sin();
            let jac = big_r * th.cos();
            let w = if spec.dim() == 2 { 2.0 * PI * r } else { 2.0 };
            sum += w * spec.eval_radial(r, t) * jac * dth;
        }
        sum
    }

    #[test]
    fn barenblatt_conserves_mass() {
        for m in [1.5, 2.0, 3.0] {
            for n in [1, 2] {
                for mass in [1.0, 16.0] {
                    let spec = ProfileSpec::new(m, n, mass).unwrap();
                    for t in [1.0, 10.0] {
                        let got = radial_mass(&spec, t, 20_000);
                        assert_relative_eq!(got, mass, max_relative = 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn critical_profile_example() {
        let spec = CriticalOuterSpec::new(2.0, 1.0).unwrap();
        let xi4 = 4.0 * (8.0 * PI).powf(-0.25) * 4f64.powf(0.25);
        assert_relative_eq!(spec.xi_star(), xi4, max_relative = 1e-13);
        let t = E * E;
        let want = (2.0 * E * E).powf(-0.5) * xi4 * xi4 / 16.0;
        assert_relative_eq!(critical_g(&spec, [0.0, 0.0], t).unwrap(), want, max_relative = 1e-13);
        let edge = spec.support_radius(t);
        assert_eq!(critical_g(&spec, [edge, 0.0], t).unwrap(), 0.0);
        assert!(matches!(critical_g(&spec, [0.0, 0.0], E), Err(Error::TimeDomain { .. })));
    }

    #[test]
    fn critical_profile_is_barenblatt_with_decaying_mass() {
        let spec = CriticalOuterSpec::new(1.5, 0.7).unwrap();
        for t in [5.0, 40.0, 1e4] {
            let u = ProfileSpec::new(1.5, 2, spec.mass_star() / f64::ln(t)).unwrap();
            for r in [0.0, 0.3, 1.0, 2.5] {
                let x = [r, 0.0];
                let a = critical_g(&spec, x, t).unwrap();
                let b = barenblatt(&u, &x, t).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn compact_limit_constant_identity() {
        // F_*(0)^m = M_φ*/(2π), hence (m M_φ*/π)^{1/m} = (2m)^{1/m} F_*(0).
        for m in [1.5, 2.0, 3.0, 4.5] {
            for mp in [0.1, 1.0, 7.0] {
                let spec = CriticalOuterSpec::new(m, mp).unwrap();
                let f0 = spec.f_star_zero();
                assert_relative_eq!(f0.powf(m), mp / (2.0 * PI), max_relative = 1e-12);
                assert_relative_eq!((m * mp / PI).powf(1.0 / m), (2.0 * m).powf(1.0 / m) * f0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn dipole_first_moment() {
        for m in [1.5, 2.0, 3.0] {
            for moment in [1.0, 5.0] {
                let spec = DipoleSpec::new(m, moment).unwrap();
                for t in [1.0f64, 10.0] {
                    let big_r = spec.xi() * t.powf(spec.beta());
                    // x = R sin θ again smooths the edge
                    let n = 40_000;
                    let dth = 0.5 * PI / n as f64;
                    let got: f64 = (0..n)
                        .map(|k| {
                            let th = (k as f64 + 0.5) * dth;
                            let x = big_r * th.sin();
                            x * dipole(&spec, x, t).unwrap() * big_r * th.cos() * dth
                        })
                        .sum();
                    assert_relative_eq!(got, moment, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn dipole_edges() {
        let spec = DipoleSpec::new(2.0, 1.0).unwrap();
        assert_eq!(dipole(&spec, 0.0, 3.0).unwrap(), 0.0);
        assert_eq!(dipole(&spec, spec.xi() * 3f64.powf(0.25), 3.0).unwrap(), 0.0);
        assert!(dipole(&spec, -1.0, 1.0).is_err());
        assert_relative_eq!(spec.alpha(), 2.0 * spec.beta());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn self_similar_scaling(m in 1.1f64..4.0, mass in 0.1f64..20.0, r in 0.0f64..3.0, t in 0.1f64..100.0) {
                let spec = ProfileSpec::new(m, 2, mass).unwrap();
                let lhs = barenblatt(&spec, &[r, 0.0], t).unwrap();
                let rhs = t.powf(-spec.alpha()) * barenblatt(&spec, &[r * t.powf(-spec.beta()), 0.0], 1.0).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
            }

            #[test]
            fn profile_monotone_in_radius_and_mass(m in 1.1f64..4.0, m1 in 0.1f64..10.0, dm in 0.0f64..10.0, s in 0.0f64..1.0, ds in 1e-6f64..0.5) {
                let a = ProfileSpec::new(m, 2, m1).unwrap();
                let b = ProfileSpec::new(m, 2, m1 + dm).unwrap();
                let s1 = s * a.xi();
                let s2 = (s + ds) * a.xi();
                if s2 < a.xi() {
                    prop_assert!(a.profile(s2) < a.profile(s1));
                }
                prop_assert!(a.profile(s1) <= b.profile(s1));
            }

            #[test]
            fn alpha_is_n_beta(m in 1.01f64..10.0, n in 1usize..=2) {
                let (a, b) = exponents(m, n).unwrap();
                prop_assert_eq!(a, n as f64 * b);
                prop_assert!(CriticalOuterSpec::new(m, 1.0).unwrap().delta_star() < CriticalOuterSpec::new(m, 1.0).unwrap().xi_star());
            }
        }
    }
}
