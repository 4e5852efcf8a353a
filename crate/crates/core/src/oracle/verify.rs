//! Oracle versus closed-form comparison over a parameter grid.

use super::{solve_scattering, OracleError, RegulatedProblem};
use crate::model::sigma_from_alpha;
use crate::rgflow::trajectory_through;
use crate::scattering::ScatteringSolution;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const ALPHA_GRID: [f64; 7] = [0.1, 0.2, 0.24, 0.3, 0.5, 1.25, 2.0];
pub const K_EPS_GRID: [f64; 2] = [1e-4, 1e-3];
pub const K_EPS_STAR_GRID: [f64; 5] = [0.03, 0.07, 0.15, 0.4, 0.9];
/// Largest allowed flux residual for any solved case.
pub const FLUX_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Relative R/T tolerance at a given kε.
pub fn amplitude_tolerance(k_eps: f64) -> f64 {
    if k_eps <= 1e-4 {
        1e-6
    } else {
        1e-4
    }
}

/// Allowed change of R between regulators ε and ε', with kε_max the larger.
pub fn regulator_tolerance(k_eps_max: f64) -> f64 {
    10.0 * k_eps_max * k_eps_max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub quick: bool,
    /// Flip the sign of the closed-form T to exercise the failure path.
    pub mutate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub alpha: f64,
    pub k: f64,
    pub k_eps: f64,
    pub k_eps_star: f64,
}

pub fn grid(config: VerifyConfig) -> Vec<VerifyCase> {
    let (alphas, k_epss, stars): (&[f64], &[f64], &[f64]) = if config.quick {
        (&[0.2, 1.25], &[1e-3], &[0.15, 0.4])
    } else {
        (&ALPHA_GRID, &K_EPS_GRID, &K_EPS_STAR_GRID)
    };
    let mut cases = Vec::new();
    for &alpha in alphas {
        for &k_eps in k_epss {
            for &k_eps_star in stars {
                cases.push(VerifyCase {
                    alpha,
                    k: 1.0,
                    k_eps,
                    k_eps_star,
                });
            }
        }
    }
    cases
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: VerifyCase,
    #[serde(rename = "Lambda")]
    pub big_lambda: Option<Complex64>,
    pub r_oracle: Option<Complex64>,
    pub t_oracle: Option<Complex64>,
    pub r_closed: Option<Complex64>,
    pub t_closed: Option<Complex64>,
    pub rel_err_r: Option<f64>,
    pub rel_err_t: Option<f64>,
    pub amplitude_tolerance: f64,
    pub flux_residual: Option<f64>,
    /// |R(ε) - R(10ε)| along the same trajectory.
    pub regulator_shift: Option<f64>,
    pub regulator_tolerance: f64,
    pub amplitudes_pass: bool,
    pub flux_pass: bool,
    pub regulator_pass: bool,
    pub error: Option<String>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.amplitudes_pass && self.flux_pass && self.regulator_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub cases: Vec<CaseReport>,
    pub passed: usize,
    pub failed: usize,
    pub max_rel_err: f64,
    pub max_flux_residual: f64,
    pub max_regulator_ratio: f64,
    pub all_pass: bool,
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

struct Evaluated {
    big_lambda: Complex64,
    r_oracle: Complex64,
    t_oracle: Complex64,
    r_closed: Complex64,
    t_closed: Complex64,
    flux_residual: f64,
    regulator_shift: f64,
}

fn oracle_at(case: &VerifyCase, k_eps: f64) -> Result<(Complex64, super::OracleSolution), String> {
    let sigma = sigma_from_alpha(case.alpha).map_err(|e| e.to_string())?;
    let eps = k_eps / case.k;
    let big_lambda = trajectory_through(case.k_eps_star / case.k, &sigma, eps).map_err(|e| e.to_string())?;
    let problem = RegulatedProblem::from_reduced(case.alpha, case.k, eps, big_lambda).map_err(|e: OracleError| e.to_string())?;
    let sol = solve_scattering(&problem).map_err(|e| e.to_string())?;
    Ok((big_lambda, sol))
}

fn evaluate(case: &VerifyCase, config: VerifyConfig) -> Result<Evaluated, String> {
    let closed = ScatteringSolution::from_eps_star(case.alpha, case.k, case.k_eps_star / case.k).map_err(|e| e.to_string())?;
    let t_closed = if config.mutate { -closed.t } else { closed.t };
    let (big_lambda, sol) = oracle_at(case, case.k_eps)?;
    let (_, coarse) = oracle_at(case, 10.0 * case.k_eps)?;
    Ok(Evaluated {
        big_lambda,
        r_oracle: sol.r,
        t_oracle: sol.t,
        r_closed: closed.r,
        t_closed,
        flux_residual: sol.flux_residual().max(coarse.flux_residual()),
        regulator_shift: (sol.r - coarse.r).norm(),
    })
}

pub fn run_case(case: VerifyCase, config: VerifyConfig) -> CaseReport {
    let amplitude_tol = amplitude_tolerance(case.k_eps);
    let regulator_tol = regulator_tolerance(10.0 * case.k_eps);
    match evaluate(&case, config) {
        Ok(e) => {
            let er = rel_err(e.r_oracle, e.r_closed);
            let et = rel_err(e.t_oracle, e.t_closed);
            CaseReport {
                case,
                big_lambda: Some(e.big_lambda),
                r_oracle: Some(e.r_oracle),
                t_oracle: Some(e.t_oracle),
                r_closed: Some(e.r_closed),
                t_closed: Some(e.t_closed),
                rel_err_r: Some(er),
                rel_err_t: Some(et),
                amplitude_tolerance: amplitude_tol,
                flux_residual: Some(e.flux_residual),
                regulator_shift: Some(e.regulator_shift),
                regulator_tolerance: regulator_tol,
                amplitudes_pass: er < amplitude_tol && et < amplitude_tol,
                flux_pass: e.flux_residual < FLUX_RESIDUAL_TOLERANCE,
                regulator_pass: e.regulator_shift < regulator_tol,
                error: None,
            }
        }
        Err(msg) => CaseReport {
            case,
            big_lambda: None,
            r_oracle: None,
            t_oracle: None,
            r_closed: None,
            t_closed: None,
            rel_err_r: None,
            rel_err_t: None,
            amplitude_tolerance: amplitude_tol,
            flux_residual: None,
            regulator_shift: None,
            regulator_tolerance: regulator_tol,
            amplitudes_pass: false,
            flux_pass: false,
            regulator_pass: false,
            error: Some(msg),
        },
    }
}

pub fn run(config: VerifyConfig) -> VerifyReport {
    let cases: Vec<CaseReport> = grid(config).into_par_iter().map(|c| run_case(c, config)).collect();
    let passed = cases.iter().filter(|c| c.passed()).count();
    let fold = |f: &dyn Fn(&CaseReport) -> Option<f64>| cases.iter().filter_map(f).fold(0.0, f64::max);
    VerifyReport {
        config,
        passed,
        failed: cases.len() - passed,
        max_rel_err: fold(&|c| Some(c.rel_err_r?.max(c.rel_err_t?))),
        max_flux_residual: fold(&|c| c.flux_residual),
        max_regulator_ratio: fold(&|c| Some(c.regulator_shift? / c.regulator_tolerance)),
        all_pass: passed == cases.len(),
        cases,
    }
}
