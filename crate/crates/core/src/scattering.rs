//! Closed-form scattering data for a unit H2 wave incident from +∞.
//!
//! With q = e^{iπσ}, p = e^{-iπσ} and X = [Γ(1-σ)/Γ(1+σ)](kε/2)^{2σ}, the
//! small-kε continuity relation is R + iT·q ≈ (1 - Xq)/(1 - Xp) and the
//! derivative jump at ε fixes
//!
//! ```text
//! Λ = λε - 1 = -σ [ (1 + Xq - R(1 + Xp)) / (1 - Xq - R(1 - Xp)) + (1 + Xp)/(1 - Xp) ].
//! ```
//!
//! Along an RG trajectory the combination X·(y - 1)/(y + 1), y = Λ/2σ, is the
//! invariant X_*, and R = (X_* cos πσ - 1)/(X_* p - 1), T = -i·p·(1 - R).

use crate::conventions;
use crate::model::{positive, sigma_from_alpha, ModelError, Regime, SigmaOrder, Wavenumber};
use crate::rgflow::reduced_ratio;
use crate::special::{gamma_ratio, hankel, HankelKind, SpecialError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("resonance: X_*·e^(-iπσ) = 1 for X_* = {x_star}")]
    Resonance { x_star: Complex64 },
    #[error("the O(X) expansion is singular at R = 1")]
    ExpansionInvalid,
    #[error("singular Möbius relation: {0}")]
    Singular(&'static str),
    #[error("expected a {expected:?} potential, got alpha = {alpha}")]
    WrongRegime { expected: Regime, alpha: f64 },
    #[error("|Q| = {q} lies inside the excised region |Q| < {eps}")]
    InsideExcision { q: f64, eps: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn phases(sigma: Complex64) -> (Complex64, Complex64) {
    ((I * PI * sigma).exp(), (-I * PI * sigma).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XFactor {
    pub value: Complex64,
    pub k: Wavenumber,
    pub eps: f64,
    pub sigma: SigmaOrder,
}

/// X = [Γ(1-σ)/Γ(1+σ)]·(kε/2)^{2σ}; with ε → ε_* this is X_*.
pub fn x_factor(sigma: &SigmaOrder, k: f64, eps: f64) -> Result<XFactor, ScatteringError> {
    sigma.require_closed_form()?;
    let kk = Wavenumber::new(k)?;
    positive("eps", eps)?;
    let s = sigma.sigma();
    let value = gamma_ratio(s) * (2.0 * s * (k * eps / 2.0).ln()).exp();
    Ok(XFactor {
        value,
        k: kk,
        eps,
        sigma: *sigma,
    })
}

/// -H2(kε)/H1(kε), the exact right-hand side of the continuity relation.
pub fn continuity_relation_exact(sigma: &SigmaOrder, k: f64, eps: f64) -> Result<Complex64, ScatteringError> {
    sigma.require_closed_form()?;
    positive("k", k)?;
    positive("eps", eps)?;
    let order = sigma.cylinder_order()?;
    let z = k * eps;
    let h1 = hankel(HankelKind::First, order, z)?.value;
    let h2 = hankel(HankelKind::Second, order, z)?.value;
    Ok(-h2 / h1)
}

/// Small-kε form (1 - X·e^{iπσ})/(1 - X·e^{-iπσ}).
pub fn continuity_relation_small(sigma: &SigmaOrder, k: f64, eps: f64) -> Result<Complex64, ScatteringError> {
    let x = x_factor(sigma, k, eps)?.value;
    let (q, p) = phases(sigma.sigma());
    let den = 1.0 - x * p;
    if den.norm() < POLE_TOL {
        return Err(ScatteringError::Singular("1 - X·e^(-iπσ) = 0"));
    }
    Ok((1.0 - x * q) / den)
}

/// Λ from R at a given X, for any complex σ.
pub fn reduced_from_r(r: Complex64, sigma: Complex64, x: Complex64) -> Result<Complex64, ScatteringError> {
    let (q, p) = phases(sigma);
    let d1 = 1.0 - x * q - r * (1.0 - x * p);
    let d2 = 1.0 - x * p;
    if d1.norm() < POLE_TOL {
        return Err(ScatteringError::Singular("reflection bracket denominator vanishes"));
    }
    if d2.norm() < POLE_TOL {
        return Err(ScatteringError::Singular("1 - X·e^(-iπσ) = 0"));
    }
    let f1 = (1.0 + x * q - r * (1.0 + x * p)) / d1;
    let f2 = (1.0 + x * p) / d2;
    Ok(-sigma * (f1 + f2))
}

/// First-order expansion Λ ≈ -2σ[1 + Xq(1 - R·q⁻²)/(1 - R) + Xp].
pub fn coupling_expansion(r: Complex64, sigma: Complex64, x: Complex64) -> Result<Complex64, ScatteringError> {
    if (1.0 - r).norm() < POLE_TOL {
        return Err(ScatteringError::ExpansionInvalid);
    }
    let (q, p) = phases(sigma);
    Ok(-2.0 * sigma * (1.0 + x * q * (1.0 - r * p * p) / (1.0 - r) + x * p))
}

/// R from Λ at a given X: algebraic inverse of [`reduced_from_r`].
pub fn reflection_from_reduced(big_lambda: Complex64, sigma: Complex64, x: Complex64) -> Result<Complex64, ScatteringError> {
    let (q, p) = phases(sigma);
    let d2 = 1.0 - x * p;
    if d2.norm() < POLE_TOL {
        return Err(ScatteringError::Singular("1 - X·e^(-iπσ) = 0"));
    }
    let f1 = -big_lambda / sigma - (1.0 + x * p) / d2;
    let den = (1.0 + x * p) - f1 * (1.0 - x * p);
    if den.norm() < POLE_TOL {
        return Err(ScatteringError::Singular("no finite R reproduces this coupling"));
    }
    Ok((1.0 + x * q - f1 * (1.0 - x * q)) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimate {
    pub lambda: Complex64,
    #[serde(rename = "Lambda")]
    pub big_lambda: Complex64,
    /// Λ from the first-order expansion; absent at R = 1 where it is singular.
    pub expansion: Option<Complex64>,
}

/// λ(ε) reproducing a given R, in either regime.
pub fn coupling_from_r(r: Complex64, sigma: &SigmaOrder, k: f64, eps: f64) -> Result<CouplingEstimate, ScatteringError> {
    let x = x_factor(sigma, k, eps)?.value;
    let s = sigma.sigma();
    let big_lambda = reduced_from_r(r, s, x)?;
    Ok(CouplingEstimate {
        lambda: (big_lambda + 1.0) / eps,
        big_lambda,
        expansion: coupling_expansion(r, s, x).ok(),
    })
}

fn sub_order(sigma: f64) -> Result<SigmaOrder, ScatteringError> {
    let s = sigma_from_alpha(0.25 - sigma * sigma)?;
    if s.regime() != Regime::Subcritical || sigma <= 0.0 {
        return Err(ScatteringError::WrongRegime {
            expected: Regime::Subcritical,
            alpha: s.alpha(),
        });
    }
    Ok(s)
}

fn super_order(zeta: f64) -> Result<SigmaOrder, ScatteringError> {
    let s = sigma_from_alpha(0.25 + zeta * zeta)?;
    if s.regime() != Regime::Supercritical || zeta <= 0.0 {
        return Err(ScatteringError::WrongRegime {
            expected: Regime::Supercritical,
            alpha: s.alpha(),
        });
    }
    Ok(s)
}

pub fn coupling_from_r_sub(r: Complex64, sigma: f64, k: f64, eps: f64) -> Result<CouplingEstimate, ScatteringError> {
    coupling_from_r(r, &sub_order(sigma)?, k, eps)
}

pub fn coupling_from_r_super(r: Complex64, zeta: f64, k: f64, eps: f64) -> Result<CouplingEstimate, ScatteringError> {
    coupling_from_r(r, &super_order(zeta)?, k, eps)
}

/// R recovered from a coupling Λ at regulator ε.
pub fn reflection_from_coupling(big_lambda: Complex64, sigma: &SigmaOrder, k: f64, eps: f64) -> Result<Complex64, ScatteringError> {
    let x = x_factor(sigma, k, eps)?.value;
    reflection_from_reduced(big_lambda, sigma.sigma(), x)
}

/// X_* = X(ε)·(y - 1)/(y + 1), constant along the exact flow.
pub fn x_star_from_coupling(sigma: &SigmaOrder, k: f64, big_lambda: Complex64, eps: f64) -> Result<Complex64, ScatteringError> {
    let x = x_factor(sigma, k, eps)?.value;
    let ratio = reduced_ratio(big_lambda, sigma.sigma());
    if !(ratio.re.is_finite() && ratio.im.is_finite()) {
        return Err(ScatteringError::Singular("coupling sits on the Λ = -2σ fixed point"));
    }
    Ok(x * ratio)
}

/// R = (X_* cos πσ - 1)/(X_* e^{-iπσ} - 1) for either regime.
pub fn reflection(x_star: Complex64, sigma: Complex64) -> Result<Complex64, ScatteringError> {
    let (_, p) = phases(sigma);
    let den = x_star * p - 1.0;
    if den.norm() < POLE_TOL * (1.0 + x_star.norm()) {
        return Err(ScatteringError::Resonance { x_star });
    }
    Ok((x_star * (PI * sigma).cos() - 1.0) / den)
}

/// T = -i·e^{-iπσ}·(1 - R).
pub fn transmission(r: Complex64, sigma: Complex64) -> Complex64 {
    -I * phases(sigma).1 * (ONE - r)
}

pub fn reflection_sub(x_star: Complex64, sigma: f64) -> Result<Complex64, ScatteringError> {
    reflection(x_star, Complex64::new(sigma, 0.0))
}

pub fn transmission_sub(r: Complex64, sigma: f64) -> Complex64 {
    transmission(r, Complex64::new(sigma, 0.0))
}

pub fn reflection_super(x_star: Complex64, zeta: f64) -> Result<Complex64, ScatteringError> {
    reflection(x_star, Complex64::new(0.0, -zeta))
}

pub fn transmission_super(r: Complex64, zeta: f64) -> Complex64 {
    transmission(r, Complex64::new(0.0, -zeta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub r: Complex64,
    pub t: Complex64,
}

/// Small-argument supercritical wavefunction: incident plus reflected wave
/// for Q ≥ ε, transmitted wave for Q ≤ -ε, built from the monomials
/// (kQ/2)^{±iζ}/Γ(1±iζ).
pub fn supercritical_wavefunction(q: f64, amps: Amplitudes, zeta: f64, k: f64, eps: f64) -> Result<Complex64, ScatteringError> {
    super_order(zeta)?;
    positive("k", k)?;
    positive("eps", eps)?;
    if !q.is_finite() || q.abs() < eps {
        return Err(ScatteringError::InsideExcision { q, eps });
    }
    let x = k * q.abs();
    let l = (x / 2.0).ln();
    let up = (I * zeta * l).exp() / crate::special::gamma(Complex64::new(1.0, zeta));
    let down = (-I * zeta * l).exp() / crate::special::gamma(Complex64::new(1.0, -zeta));
    let sh = (PI * zeta).sinh();
    let ez = (PI * zeta).exp();
    // Small-argument H2 and H1 of order -iζ.
    let h2 = (-up + ez * down) / sh;
    let h1 = (up - down / ez) / sh;
    let root = x.sqrt();
    if q > 0.0 {
        Ok(root * (h2 + amps.r * h1))
    } else {
        let c = conventions::transmitted_phase(Complex64::new(0.0, -zeta));
        Ok(c * amps.t * root * h1)
    }
}

/// Reflection/transmission pair with its inputs and absorbed flux fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolutionRecord", into = "SolutionRecord")]
pub struct ScatteringSolution {
    pub alpha: f64,
    pub k: f64,
    pub eps_star: Option<f64>,
    pub r: Complex64,
    pub t: Complex64,
    pub flux_deficit: f64,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct SolutionRecord {
    alpha: f64,
    k: f64,
    eps_star: Option<f64>,
    re_R: f64,
    im_R: f64,
    re_T: f64,
    im_T: f64,
    flux_deficit: f64,
}

impl From<ScatteringSolution> for SolutionRecord {
    fn from(s: ScatteringSolution) -> Self {
        SolutionRecord {
            alpha: s.alpha,
            k: s.k,
            eps_star: s.eps_star,
            re_R: s.r.re,
            im_R: s.r.im,
            re_T: s.t.re,
            im_T: s.t.im,
            flux_deficit: s.flux_deficit,
        }
    }
}

impl TryFrom<SolutionRecord> for ScatteringSolution {
    type Error = ModelError;
    fn try_from(r: SolutionRecord) -> Result<Self, Self::Error> {
        sigma_from_alpha(r.alpha)?;
        Ok(ScatteringSolution {
            alpha: r.alpha,
            k: r.k,
            eps_star: r.eps_star,
            r: Complex64::new(r.re_R, r.im_R),
            t: Complex64::new(r.re_T, r.im_T),
            flux_deficit: r.flux_deficit,
        })
    }
}

impl ScatteringSolution {
    pub fn from_x_star(alpha: f64, k: f64, x_star: Complex64, eps_star: Option<f64>) -> Result<Self, ScatteringError> {
        let sigma = sigma_from_alpha(alpha)?;
        sigma.require_closed_form()?;
        Wavenumber::new(k)?;
        let s = sigma.sigma();
        let r = reflection(x_star, s)?;
        let t = transmission(r, s);
        Ok(ScatteringSolution {
            alpha,
            k,
            eps_star,
            r,
            t,
            flux_deficit: conventions::flux_deficit(r, t, s),
        })
    }

    /// The trajectory whose small-ε form is Λ/2σ ≈ -1 - 2(ε/ε_*)^{2σ}.
    pub fn from_eps_star(alpha: f64, k: f64, eps_star: f64) -> Result<Self, ScatteringError> {
        let sigma = sigma_from_alpha(alpha)?;
        let x_star = x_factor(&sigma, k, eps_star)?.value;
        Self::from_x_star(alpha, k, x_star, Some(eps_star))
    }

    /// Amplitudes for the trajectory through Λ at regulator ε.
    pub fn from_coupling(alpha: f64, k: f64, big_lambda: Complex64, eps: f64) -> Result<Self, ScatteringError> {
        let sigma = sigma_from_alpha(alpha)?;
        let x_star = x_star_from_coupling(&sigma, k, big_lambda, eps)?;
        Self::from_x_star(alpha, k, x_star, None)
    }

    pub fn regime(&self) -> Regime {
        sigma_from_alpha(self.alpha).map(|s| s.regime()).unwrap_or(Regime::Critical)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgflow::{flow_analytic, trajectory_through};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // Frozen values below: direct evaluation with mpmath at 40 digits.
    #[test]
    fn x_factor_reference() {
        let x = x_factor(&sigma_from_alpha(0.16).unwrap(), 1.0, 1e-3).unwrap().value;
        assert!(rel(x, c(0.015123591253224694658, 0.0)) < 1e-13);
        let x = x_factor(&sigma_from_alpha(1.25).unwrap(), 1.0, 1e-3).unwrap().value;
        assert!(rel(x, c(-0.44516394283955835966, 0.89544908509392002027)) < 1e-13);
        assert!((x.norm() - 1.0).abs() < 1e-13);
        let x = x_factor(&sigma_from_alpha(0.24).unwrap(), 1.0, 1e-4).unwrap().value;
        assert!(rel(x, c(0.15498160763659736627, 0.0)) < 1e-12);
        assert!(x_factor(&sigma_from_alpha(0.25).unwrap(), 1.0, 1e-3).is_err());
    }

    #[test]
    fn closed_form_reference_values() {
        let r = reflection_sub(c(1.0, 0.0), 0.3).unwrap();
        assert!(rel(r, c(0.20610737385376343542, -0.40450849718747371205)) < 1e-14);
        assert!(rel(transmission_sub(r, 0.3), c(-0.40450849718747371205, -0.79389262614623656458)) < 1e-14);
        let r = reflection_sub(c(1.0, 0.0), 0.5).unwrap();
        assert!(rel(r, c(0.5, -0.5)) < 1e-15);
        assert!(rel(transmission_sub(r, 0.5), c(-0.5, -0.5)) < 1e-15);
        let r = reflection_super(c(1.0, 0.0), 1.0).unwrap();
        assert!(rel(r, c(-11.070346316389634503, 0.0)) < 1e-14);
        assert!(rel(transmission_super(r, 1.0), c(0.0, -0.52160695913188612489)) < 1e-14);
        let r = reflection_super(c(0.0, 1.0), 0.5).unwrap();
        assert!(rel(r, c(1.4585761678336371732, -2.2059702828134824875)) < 1e-14);
        assert!(rel(transmission_super(r, 0.5), c(0.45857616783363717319, 0.095328619493812385943)) < 1e-14);
    }

    #[test]
    fn limits() {
        assert_eq!(reflection_sub(c(0.0, 0.0), 0.3).unwrap(), c(1.0, 0.0));
        assert_eq!(transmission_sub(c(1.0, 0.0), 0.3), c(0.0, 0.0));
        let s = 0.3;
        let r = reflection_sub(c(1e12, 0.0), s).unwrap();
        let lim = (PI * s).cos() * c(0.0, PI * s).exp();
        assert!(rel(r, lim) < 1e-10);
        assert!(((r.norm_sqr()) - (PI * s).cos().powi(2)).abs() < 1e-10);
        assert_eq!(reflection_super(c(0.0, 0.0), 1.0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn resonance_is_typed() {
        let zeta = 0.7;
        let x = c((PI * zeta).exp(), 0.0);
        assert!(matches!(reflection_super(x, zeta), Err(ScatteringError::Resonance { .. })));
    }

    #[test]
    fn coupling_x_to_zero_limits() {
        let l = reduced_from_r(c(0.3, 0.2), c(0.3, 0.0), c(0.0, 0.0)).unwrap();
        assert!((l - c(-0.6, 0.0)).norm() < 1e-15);
        let l = reduced_from_r(c(0.3, 0.2), c(0.0, -1.0), c(0.0, 0.0)).unwrap();
        assert!((l - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn r_equal_one_flags_expansion() {
        let s = sigma_from_alpha(0.16).unwrap();
        let est = coupling_from_r(c(1.0, 0.0), &s, 1.0, 1e-3).unwrap();
        assert!(est.expansion.is_none());
        assert!(est.lambda.re.is_finite());
        assert!(matches!(
            coupling_expansion(c(1.0, 0.0), c(0.3, 0.0), c(0.01, 0.0)),
            Err(ScatteringError::ExpansionInvalid)
        ));
    }

    #[test]
    fn expansion_matches_exact_to_second_order() {
        let s = c(0.3, 0.0);
        let r = c(0.4, -0.3);
        let mut prev = None;
        for x in [1e-2, 1e-3] {
            let xx = c(x, 0.0);
            let err = (reduced_from_r(r, s, xx).unwrap() - coupling_expansion(r, s, xx).unwrap()).norm();
            if let Some(p) = prev {
                let ratio: f64 = p / err;
                assert!((ratio.log10() - 2.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(err);
        }
    }

    #[test]
    fn inversion_round_trip() {
        for (sig, x) in [(c(0.3, 0.0), c(0.02, 0.0)), (c(0.0, -1.0), c(0.6, 0.8))] {
            let r = c(0.35, -0.4);
            let l = reduced_from_r(r, sig, x).unwrap();
            assert!(rel(reflection_from_reduced(l, sig, x).unwrap(), r) < 1e-12);
        }
    }

    // σ → -σ leaves Bessel's equation unchanged; relabelling the waves gives
    // R → R·e^{-2iπσ} and X → 1/X for the same physical coupling. On the
    // imaginary axis -σ is the conjugate branch +iζ.
    #[test]
    fn conjugate_branch_symmetry() {
        for (r, sig, x) in [
            (c(0.2, 0.5), c(0.0, -1.0), c(0.6, 0.8)),
            (c(0.2, 0.5), c(0.3, 0.0), c(0.02, 0.0)),
        ] {
            let a = reduced_from_r(r, sig, x).unwrap();
            let b = reduced_from_r(r * (-2.0 * I * PI * sig).exp(), -sig, 1.0 / x).unwrap();
            assert!(rel(a, b) < 1e-13);
        }
    }

    #[test]
    fn continuity_small_vs_exact() {
        for alpha in [0.1, 0.16, 0.24, 1.25] {
            let s = sigma_from_alpha(alpha).unwrap();
            for ke in [1e-2, 1e-3] {
                let a = continuity_relation_exact(&s, 1.0, ke).unwrap();
                let b = continuity_relation_small(&s, 1.0, ke).unwrap();
                assert!(rel(b, a) < 5.0 * ke * ke, "α {alpha} kε {ke}: {}", rel(b, a));
            }
        }
    }

    #[test]
    fn half_order_continuity_is_exact_phase() {
        // H_{1/2}^{(1,2)}(z) = ∓i·√(2/πz)·e^{±iz} ⇒ -H2/H1 = e^{-2iz}.
        let s = sigma_from_alpha(0.0).unwrap();
        let z: f64 = 0.01;
        let got = continuity_relation_exact(&s, 1.0, z).unwrap();
        assert!(rel(got, c(0.0, -2.0 * z).exp()) < 1e-10);
    }

    #[test]
    fn x_star_is_invariant_along_exact_flow() {
        let s = sigma_from_alpha(0.5).unwrap();
        let (k, l0, e0) = (1.3, c(0.4, -0.9), 1e-4);
        let a = x_star_from_coupling(&s, k, l0, e0).unwrap();
        for e in [3e-4, 1e-3, 1e-2] {
            let l = flow_analytic(l0, e0, &s, e).unwrap();
            let b = x_star_from_coupling(&s, k, l, e).unwrap();
            assert!(rel(b, a) < 1e-11);
        }
    }

    #[test]
    fn x_star_from_eps_star_trajectory() {
        let s = sigma_from_alpha(0.16).unwrap();
        let eps_star = 0.5;
        let eps = 1e-4;
        let l = trajectory_through(eps_star, &s, eps).unwrap();
        let a = x_star_from_coupling(&s, 1.0, l, eps).unwrap();
        let b = x_factor(&s, 1.0, eps_star).unwrap().value;
        assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn unitarity_on_real_family() {
        for s in [0.05, 0.3, 0.49] {
            for x in [1e-3, 0.7, 40.0] {
                let r = reflection_sub(c(x, 0.0), s).unwrap();
                let t = transmission_sub(r, s);
                assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn supercritical_wavefunction_continuity() {
        let (zeta, k, eps) = (1.0, 1.0, 1e-3);
        let s = sigma_from_alpha(0.25 + zeta * zeta).unwrap();
        let rhs = continuity_relation_small(&s, k, eps).unwrap();
        let r = c(0.3, -0.2);
        // R + iT e^{πζ} = rhs
        let t = (rhs - r) / (I * (PI * zeta).exp());
        let amps = Amplitudes { r, t };
        let a = supercritical_wavefunction(eps, amps, zeta, k, eps).unwrap();
        let b = supercritical_wavefunction(-eps, amps, zeta, k, eps).unwrap();
        assert!(rel(a, b) < 1e-12);
        assert!(supercritical_wavefunction(eps / 2.0, amps, zeta, k, eps).is_err());
    }

    #[test]
    fn supercritical_wavefunction_matches_hankel() {
        let (zeta, k, q) = (0.5, 1.0, 1e-4);
        let order = sigma_from_alpha(0.5).unwrap().cylinder_order().unwrap();
        let h2 = hankel(HankelKind::Second, order, k * q).unwrap().value;
        let amps = Amplitudes { r: c(0.0, 0.0), t: c(0.0, 0.0) };
        let v = supercritical_wavefunction(q, amps, zeta, k, q).unwrap();
        assert!(rel(v, (k * q).sqrt() * h2) < 1e-7);
    }

    #[test]
    fn solution_record_round_trip() {
        let sol = ScatteringSolution::from_eps_star(1.25, 1.0, 0.3).unwrap();
        let json = serde_json::to_string(&sol).unwrap();
        for key in ["alpha", "k", "eps_star", "re_R", "im_R", "re_T", "im_T", "flux_deficit"] {
            assert!(json.contains(&format!("\"{key}\"")));
        }
        let back: ScatteringSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sol);
    }
}
