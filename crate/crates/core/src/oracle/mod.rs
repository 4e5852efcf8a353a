//! Direct numerical solution of the regulated scattering problem.
//!
//! The region |Q| < ε is excised. Outside it Bessel's equation (in t = ln kx,
//! x = |Q|) is integrated for two real fundamental solutions from kε to
//! kQ_max, where they are matched to the asymptotic Hankel expansions. That
//! yields H1, H2 and their t-derivatives at kε, from which the derivative
//! jump λ and continuity at the source fix R and T.

pub mod verify;

use crate::conventions;
use crate::model::{positive, sigma_from_alpha, ModelError, SigmaOrder};
use crate::ode::{integrate_dense, OdeError, OdeOptions};
use crate::special::{hankel_asymptotic_series, HankelKind, SpecialError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Matching is refused when the fundamental matrix is worse conditioned than this.
pub const MAX_CONDITION: f64 = 1e10;
/// Largest admissible kε.
pub const MAX_K_EPS: f64 = 1e-2;
/// Tolerance on the flux identity J(ε) - J(-ε) = 2 Im(λ)|χ(ε)|².
pub const FLUX_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("matching matrix condition number {condition:.3e} exceeds {MAX_CONDITION:e}; try a larger Q_max")]
    IllConditioned { condition: f64 },
    #[error("flux bookkeeping inconsistent: imbalance {imbalance:e} vs expected {expected:e}")]
    Inconsistent { imbalance: f64, expected: f64 },
    #[error("sample Q = {q} outside [-Q_max, -eps] ∪ [eps, Q_max]")]
    OutsideDomain { q: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulatedProblem {
    pub alpha: f64,
    pub k: f64,
    pub eps: f64,
    pub lambda: Complex64,
    #[serde(rename = "Q_max")]
    pub q_max: f64,
}

impl RegulatedProblem {
    pub fn new(alpha: f64, k: f64, eps: f64, lambda: Complex64, q_max: f64) -> Result<Self, OracleError> {
        let sigma = sigma_from_alpha(alpha)?;
        positive("k", k)?;
        positive("eps", eps)?;
        positive("Q_max", q_max)?;
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(OracleError::Invalid(format!("lambda must be finite, got {lambda}")));
        }
        if k * eps > MAX_K_EPS {
            return Err(OracleError::Invalid(format!("k*eps = {} exceeds {MAX_K_EPS}", k * eps)));
        }
        let need = min_k_q_max(&sigma);
        if k * q_max < need {
            return Err(OracleError::Invalid(format!(
                "k*Q_max = {} is below the asymptotic matching bound {need}",
                k * q_max
            )));
        }
        if eps >= q_max {
            return Err(OracleError::Invalid("eps must be smaller than Q_max".into()));
        }
        Ok(RegulatedProblem {
            alpha,
            k,
            eps,
            lambda,
            q_max,
        })
    }

    /// Uses kQ_max = 40(1 + |σ|²).
    pub fn with_default_q_max(alpha: f64, k: f64, eps: f64, lambda: Complex64) -> Result<Self, OracleError> {
        let sigma = sigma_from_alpha(alpha)?;
        positive("k", k)?;
        let q_max = 40.0 * (1.0 + sigma.sigma().norm_sqr()) / k;
        Self::new(alpha, k, eps, lambda, q_max)
    }

    /// Same, with the coupling given as Λ = λε - 1.
    pub fn from_reduced(alpha: f64, k: f64, eps: f64, big_lambda: Complex64) -> Result<Self, OracleError> {
        positive("eps", eps)?;
        Self::with_default_q_max(alpha, k, eps, (big_lambda + 1.0) / eps)
    }

    pub fn sigma(&self) -> SigmaOrder {
        sigma_from_alpha(self.alpha).expect("validated at construction")
    }

    pub fn big_lambda(&self) -> Complex64 {
        self.lambda * self.eps - 1.0
    }
}

fn min_k_q_max(sigma: &SigmaOrder) -> f64 {
    30.0 * (1.0 + sigma.sigma().norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxClass {
    Sink,
    Source,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    #[serde(rename = "J_plus")]
    pub j_plus: f64,
    #[serde(rename = "J_minus")]
    pub j_minus: f64,
    pub imbalance: f64,
    /// 2 Im(λ)|χ(ε)|².
    pub expected_imbalance: f64,
    pub classification: FluxClass,
}

/// Probability currents J = 2 Im(χ* ∂_Q χ) on both sides of the source,
/// checked against J(ε) - J(-ε) = 2 Im(λ)|χ(ε)|².
pub fn flux_report(
    chi_eps: Complex64,
    dchi_plus: Complex64,
    dchi_minus: Complex64,
    lambda: Complex64,
) -> Result<FluxReport, OracleError> {
    let j_plus = 2.0 * (chi_eps.conj() * dchi_plus).im;
    let j_minus = 2.0 * (chi_eps.conj() * dchi_minus).im;
    assess_currents(j_plus, j_minus, chi_eps, dchi_plus, dchi_minus, lambda)
}

fn assess_currents(
    j_plus: f64,
    j_minus: f64,
    chi_eps: Complex64,
    dchi_plus: Complex64,
    dchi_minus: Complex64,
    lambda: Complex64,
) -> Result<FluxReport, OracleError> {
    let imbalance = j_plus - j_minus;
    let expected = 2.0 * lambda.im * chi_eps.norm_sqr();
    // Currents can cancel far below |χ||χ'|, so rounding is judged against the products.
    let scale = (2.0 * chi_eps.norm() * dchi_plus.norm().max(dchi_minus.norm()).max(lambda.norm() * chi_eps.norm()))
        .max(f64::MIN_POSITIVE);
    if (imbalance - expected).abs() > FLUX_TOLERANCE * scale {
        return Err(OracleError::Inconsistent { imbalance, expected });
    }
    let classification = if lambda.im.abs() < 1e-12 {
        FluxClass::Unitary
    } else if lambda.im < 0.0 {
        FluxClass::Sink
    } else {
        FluxClass::Source
    };
    Ok(FluxReport {
        j_plus,
        j_minus,
        imbalance,
        expected_imbalance: expected,
        classification,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

impl OracleOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions::with_tolerances(self.rtol, self.atol)
    }
}

/// H1, H2 and their t-derivatives at z = kε reconstructed by matching.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SourceBasis {
    h1: Complex64,
    h1t: Complex64,
    h2: Complex64,
    h2t: Complex64,
    /// The same waves at the matching point, and det of the real transport.
    far: [Complex64; 4],
    det: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub problem: RegulatedProblem,
    #[serde(rename = "R")]
    pub r: Complex64,
    #[serde(rename = "T")]
    pub t: Complex64,
    pub chi_eps: Complex64,
    pub dchi_plus: Complex64,
    pub dchi_minus: Complex64,
    pub flux: FluxReport,
    /// 1 - |R e^{-iπσ}|² - |T|².
    pub flux_deficit: f64,
    /// -(J(ε) - J(-ε)) divided by the incoming flux.
    pub normalized_imbalance: f64,
    pub condition: f64,
    /// u and u_t (t = ln kx) at kε for the right and left waves.
    right_at_eps: (Complex64, Complex64),
    left_at_eps: (Complex64, Complex64),
}

impl OracleSolution {
    pub fn flux_residual(&self) -> f64 {
        (self.flux_deficit - self.normalized_imbalance).abs()
    }
}

fn bessel_t_rhs(sigma_sq: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |t, y| {
        let c = sigma_sq - (2.0 * t).exp();
        [y[1], c * y[0], y[3], c * y[2]]
    }
}

fn match_basis(problem: &RegulatedProblem, opts: OracleOptions) -> Result<(SourceBasis, f64), OracleError> {
    let sigma = problem.sigma();
    let order = sigma.cylinder_order()?;
    let sigma_sq = (sigma.sigma() * sigma.sigma()).re;
    let z_eps = problem.k * problem.eps;
    let z_m = problem.k * problem.q_max;
    let (t0, t1) = (z_eps.ln(), z_m.ln());
    let end = integrate_dense(bessel_t_rhs(sigma_sq), t0, [1.0, 0.0, 0.0, 1.0], &[t1], opts.ode())?[0];
    let (p1, p1t, p2, p2t) = (end[0], end[1], end[2], end[3]);
    let det = p1 * p2t - p2 * p1t;
    let condition = (p1 * p1 + p1t * p1t + p2 * p2 + p2t * p2t) / det.abs();
    if !(condition <= MAX_CONDITION) {
        return Err(OracleError::IllConditioned { condition });
    }
    let far = |kind: HankelKind| -> Result<(Complex64, Complex64), OracleError> {
        let vs = hankel_asymptotic_series(kind, order, z_m)?;
        Ok((vs.value, vs.slope * z_m))
    };
    let back = |(h, ht): (Complex64, Complex64)| ((h * p2t - ht * p2) / det, (ht * p1 - h * p1t) / det);
    let (f1, f1t) = far(HankelKind::First)?;
    let (f2, f2t) = far(HankelKind::Second)?;
    let (h1, h1t) = back((f1, f1t));
    let (h2, h2t) = back((f2, f2t));
    Ok((
        SourceBasis {
            h1,
            h1t,
            h2,
            h2t,
            far: [f1, f1t, f2, f2t],
            det,
        },
        condition,
    ))
}

pub fn solve_scattering(problem: &RegulatedProblem) -> Result<OracleSolution, OracleError> {
    solve_scattering_with(problem, OracleOptions::default())
}

pub fn solve_scattering_with(problem: &RegulatedProblem, opts: OracleOptions) -> Result<OracleSolution, OracleError> {
    let (b, condition) = match_basis(problem, opts)?;
    let sigma = problem.sigma().sigma();
    let c = conventions::transmitted_phase(sigma);

    // Λ = ελ - 1 equals (u_t/u) of the right wave plus (u_t/u) of H1 on the left.
    let kappa = problem.big_lambda() - b.h1t / b.h1;
    let r = (kappa * b.h2 - b.h2t) / (b.h1t - kappa * b.h1);
    let u = b.h2 + r * b.h1;
    let ut = b.h2t + r * b.h1t;
    let t = u / (c * b.h1);

    let z = problem.k * problem.eps;
    let root = z.sqrt();
    let chi_eps = root * u;
    let dchi_plus = problem.k / root * (0.5 * u + ut);
    let left_u = c * t * b.h1;
    let left_ut = c * t * b.h1t;
    let dchi_minus = -problem.k / root * (0.5 * left_u + left_ut);

    // The bulk potential is real, so each current is constant on its half-line.
    // Evaluating it from the matching-point data avoids the cancellation in
    // Im(ū u_t) near the source, where the irregular solution dominates.
    let [f1, f1t, f2, f2t] = b.far;
    let current = |u: Complex64, ut: Complex64| 2.0 * problem.k * (u.conj() * ut).im / b.det;
    let j_plus = current(f2 + r * f1, f2t + r * f1t);
    let j_minus = -current(c * t * f1, c * t * f1t);
    let flux = assess_currents(j_plus, j_minus, chi_eps, dchi_plus, dchi_minus, problem.lambda)?;
    let normalized_imbalance = -flux.imbalance / conventions::incoming_flux(sigma, problem.k);
    Ok(OracleSolution {
        problem: *problem,
        r,
        t,
        chi_eps,
        dchi_plus,
        dchi_minus,
        flux,
        flux_deficit: conventions::flux_deficit(r, t, sigma),
        normalized_imbalance,
        condition,
        right_at_eps: (u, ut),
        left_at_eps: (left_u, left_ut),
    })
}

/// χ(Q) on a grid inside [-Q_max, -ε] ∪ [ε, Q_max], in the grid's order.
pub fn wavefunction_sample(solution: &OracleSolution, q_grid: &[f64]) -> Result<Vec<Complex64>, OracleError> {
    let p = &solution.problem;
    for &q in q_grid {
        if !q.is_finite() || q.abs() < p.eps || q.abs() > p.q_max {
            return Err(OracleError::OutsideDomain { q });
        }
    }
    let sigma_sq = (p.sigma().sigma() * p.sigma().sigma()).re;
    let mut ts: Vec<f64> = q_grid.iter().map(|q| (p.k * q.abs()).ln()).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let t0 = (p.k * p.eps).ln();
    let states = integrate_dense(bessel_t_rhs(sigma_sq), t0, [1.0, 0.0, 0.0, 1.0], &ts, OracleOptions::default().ode())?;
    let lookup = |t: f64| {
        let i = ts.partition_point(|&x| x < t);
        states[i]
    };
    Ok(q_grid
        .iter()
        .map(|&q| {
            let z = p.k * q.abs();
            let y = lookup(z.ln());
            let (u0, ut0) = if q > 0.0 { solution.right_at_eps } else { solution.left_at_eps };
            z.sqrt() * (u0 * y[0] + ut0 * y[2])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn validation() {
        assert!(RegulatedProblem::new(0.16, 1.0, 0.02, c(1.0, 0.0), 100.0).is_err());
        assert!(RegulatedProblem::new(0.16, 1.0, 1e-3, c(1.0, 0.0), 10.0).is_err());
        assert!(RegulatedProblem::new(0.16, 1.0, 1e-3, c(f64::NAN, 0.0), 100.0).is_err());
        assert!(RegulatedProblem::new(0.16, 1.0, 1e-3, c(1.0, 0.0), 100.0).is_ok());
    }

    #[test]
    fn flux_report_examples() {
        let rep = flux_report(c(2f64.sqrt(), 0.0), c(0.0, 0.0) + c(1.0, -0.5) * 2f64.sqrt(), c(0.0, 0.0), c(1.0, -0.5)).unwrap();
        assert!((rep.imbalance + 2.0).abs() < 1e-14);
        assert_eq!(rep.classification, FluxClass::Sink);
        let rep = flux_report(c(0.3, 0.1), c(0.7, 0.2), c(0.7, 0.2) - c(2.0, 0.0) * c(0.3, 0.1), c(2.0, 0.0)).unwrap();
        assert!(rep.imbalance.abs() < 1e-15);
        assert_eq!(rep.classification, FluxClass::Unitary);
        assert!(flux_report(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn free_particle() {
        let p = RegulatedProblem::with_default_q_max(0.0, 1.0, 1e-3, c(0.0, 0.0)).unwrap();
        let s = solve_scattering(&p).unwrap();
        assert!(s.r.norm() < 1e-6);
        assert!((s.t.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn t_matches_continuity_relation() {
        let p = RegulatedProblem::from_reduced(0.5, 2.0, 1e-4, c(0.3, -0.7)).unwrap();
        let s = solve_scattering(&p).unwrap();
        let sigma = p.sigma().sigma();
        let rhs = crate::scattering::continuity_relation_exact(&p.sigma(), p.k, p.eps).unwrap();
        let lhs = s.r + Complex64::i() * s.t * (Complex64::i() * std::f64::consts::PI * sigma).exp();
        assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn grid_convergence() {
        let p = RegulatedProblem::from_reduced(1.25, 1.0, 1e-3, c(0.4, -1.2)).unwrap();
        let a = solve_scattering(&p).unwrap();
        let b = solve_scattering_with(&p, OracleOptions { rtol: 0.5e-12, atol: 0.5e-14 }).unwrap();
        assert!((a.r - b.r).norm() < 1e-8);
    }

    #[test]
    fn wavefunction_is_continuous_and_matches_boundary() {
        let p = RegulatedProblem::from_reduced(1.25, 1.0, 1e-3, c(0.0, -2.0)).unwrap();
        let s = solve_scattering(&p).unwrap();
        let v = wavefunction_sample(&s, &[p.eps, -p.eps, 0.5, -0.5]).unwrap();
        assert!(rel(v[0], s.chi_eps) < 1e-12);
        assert!(rel(v[1], s.chi_eps) < 1e-9);
        assert!(wavefunction_sample(&s, &[p.eps / 2.0]).is_err());
    }

    #[test]
    fn coupling_tuned_to_unit_reflection() {
        let p0 = RegulatedProblem::with_default_q_max(0.16, 1.0, 1e-3, c(0.0, 0.0)).unwrap();
        let b = match_basis(&p0, OracleOptions::default()).unwrap().0;
        let big_l = (b.h2t + b.h1t) / (b.h2 + b.h1) + b.h1t / b.h1;
        let p = RegulatedProblem::from_reduced(0.16, 1.0, 1e-3, big_l).unwrap();
        let s = solve_scattering(&p).unwrap();
        assert!((s.r - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn frozen_regressions() {
        let cases = [
            (0.16, 1.0, 1e-3, c(1.1, 0.0) / 1e-3, c(0.99977221342531162587, -0.0036594704822209521929), c(-0.012296939772480489579, 0.017056224983122175155)),
            (1.25, 1.0, 1e-3, c(1.0, -2.0) / 1e-3, c(6.4214352836194004849, -9.9402961367567917827), c(-0.42955931203515339505, -0.23428140503808148531)),
            (0.5, 2.0, 1e-4, c(1.3, -0.7) / 1e-4, c(2.722362201765690227, -0.53644725673600789072), c(-0.34290256982714990357, -0.32486456227717436495)),
            (0.0, 1.0, 1e-3, c(0.0, 0.0), c(0.0, 0.0), c(-0.99999800000066666658, 0.0019999986666669333749)),
            (-0.75, 1.0, 1e-2, c(3.0, 0.0) / 1e-2, c(0.99999999383487074815, -0.000078519318508837998058), c(0.000078517355078884375196, -6.1651292499192697925e-9)),
        ];
        for (alpha, k, eps, lambda, r, t) in cases {
            let p = RegulatedProblem::with_default_q_max(alpha, k, eps, lambda).unwrap();
            let s = solve_scattering(&p).unwrap();
            assert!((s.r - r).norm() < 1e-8 * (1.0 + r.norm()), "alpha {alpha}: R {} vs {}", s.r, r);
            assert!((s.t - t).norm() < 1e-8 * (1.0 + t.norm()), "alpha {alpha}: T {} vs {}", s.t, t);
            assert!(s.flux_residual() < 1e-8);
        }
        let p = RegulatedProblem::with_default_q_max(1.25, 1.0, 1e-3, c(1.0, -2.0) / 1e-3).unwrap();
        assert!((solve_scattering(&p).unwrap().flux_deficit - 0.49906627620634752402).abs() < 1e-8);
        let p = RegulatedProblem::with_default_q_max(0.5, 2.0, 1e-4, c(1.3, -0.7) / 1e-4).unwrap();
        assert!((solve_scattering(&p).unwrap().flux_deficit - 0.4441755207811183042).abs() < 1e-8);
    }
}
