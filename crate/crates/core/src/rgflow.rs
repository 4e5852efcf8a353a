//! Renormalization-group flow of the reduced coupling Λ in s = ln ε:
//!
//! ```text
//! dΛ/ds = 2σ² - Λ²/2
//! ```
//!
//! The flow is a Möbius map in Λ. Numerically it is integrated on two charts,
//! Λ itself and μ = 1/Λ, so trajectories pass through Λ = ∞ (Dirichlet-like
//! boundary data) without trouble.

use crate::model::{ModelError, Regime, SigmaOrder};
use crate::ode::{Dopri5, OdeError, OdeOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("trajectory hits Λ = ∞ at ln ε ≈ {ln_eps}")]
    Pole { ln_eps: f64 },
    #[error("invalid epsilon grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite initial coupling {0}")]
    NonFiniteSeed(Complex64),
    #[error("epsilon values must be positive and finite")]
    InvalidScale,
    #[error("operation requires a supercritical trajectory")]
    NotSupercritical,
    #[error("trajectory sits on a fixed point and carries no scale")]
    AtFixedPoint,
    #[error("no Re Λ = 0 crossing in the sampled window; it must span at least one log-period ({period})")]
    WindowTooNarrow { period: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}

pub fn flow_rhs(big_lambda: Complex64, sigma: Complex64) -> Complex64 {
    2.0 * sigma * sigma - 0.5 * big_lambda * big_lambda
}

fn check_scale(eps: f64) -> Result<f64, FlowError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(eps)
    } else {
        Err(FlowError::InvalidScale)
    }
}

/// tanh for arguments with large real part, avoiding overflow.
fn tanh_stable(a: Complex64) -> Complex64 {
    if a.re >= 0.0 {
        let e = (-2.0 * a).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        -tanh_stable(-a)
    }
}

/// Homogeneous coordinates [p : q] with Λ = p / q after flowing a distance
/// `l` in ln ε. Finite everywhere, including through Möbius poles.
fn flow_homogeneous(lambda0: Complex64, sigma: Complex64, l: f64) -> (Complex64, Complex64) {
    if sigma.norm() == 0.0 {
        return (lambda0, 1.0 + 0.5 * lambda0 * l);
    }
    let two_s = 2.0 * sigma;
    let y0 = lambda0 / two_s;
    let a = sigma * l;
    if a.re.abs() <= 30.0 {
        let (ch, sh) = (a.cosh(), a.sinh());
        (two_s * (y0 * ch + sh), ch + y0 * sh)
    } else {
        let t = tanh_stable(a);
        (two_s * (y0 + t), 1.0 + y0 * t)
    }
}

/// Closed-form flow Λ(ε) from Λ(ε₀) = Λ₀.
pub fn flow_analytic(lambda0: Complex64, eps0: f64, sigma: &SigmaOrder, eps: f64) -> Result<Complex64, FlowError> {
    check_scale(eps0)?;
    check_scale(eps)?;
    if !(lambda0.re.is_finite() && lambda0.im.is_finite()) {
        return Err(FlowError::NonFiniteSeed(lambda0));
    }
    if eps == eps0 {
        return Ok(lambda0);
    }
    let (p, q) = flow_homogeneous(lambda0, sigma.sigma(), (eps / eps0).ln());
    let scale = (p.norm() / (2.0 * sigma.sigma().norm()).max(1.0)).max(1.0);
    if q.norm() < 1e-12 * scale {
        return Err(FlowError::Pole { ln_eps: eps.ln() });
    }
    Ok(p / q)
}

/// μ = 1/Λ along the analytic flow.
fn inverse_coupling(lambda0: Complex64, eps0: f64, sigma: Complex64, eps: f64) -> Complex64 {
    let (p, q) = flow_homogeneous(lambda0, sigma, (eps / eps0).ln());
    q / p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "SampleRecord", into = "SampleRecord")]
pub struct FlowSample {
    pub epsilon: f64,
    pub big_lambda: Complex64,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct SampleRecord {
    epsilon: f64,
    re_Lambda: f64,
    im_Lambda: f64,
}

impl From<FlowSample> for SampleRecord {
    fn from(s: FlowSample) -> Self {
        SampleRecord {
            epsilon: s.epsilon,
            re_Lambda: s.big_lambda.re,
            im_Lambda: s.big_lambda.im,
        }
    }
}

impl From<SampleRecord> for FlowSample {
    fn from(r: SampleRecord) -> Self {
        FlowSample {
            epsilon: r.epsilon,
            big_lambda: Complex64::new(r.re_Lambda, r.im_Lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub sigma: SigmaOrder,
    pub lambda0: Complex64,
    pub eps0: f64,
    pub samples: Vec<FlowSample>,
    /// Index of the first sample of each branch between pole crossings.
    pub branch_starts: Vec<usize>,
    /// ln ε of every pass through Λ = ∞ inside the window.
    pub pole_crossings: Vec<f64>,
    pub eps_star: Option<f64>,
    pub y_star: Option<f64>,
    pub log_period: Option<f64>,
}

impl FlowTrajectory {
    pub fn branches(&self) -> Vec<&[FlowSample]> {
        let mut out = Vec::new();
        for (i, &start) in self.branch_starts.iter().enumerate() {
            let end = self.branch_starts.get(i + 1).copied().unwrap_or(self.samples.len());
            if start < end {
                out.push(&self.samples[start..end]);
            }
        }
        out
    }

    /// Largest |dΛ/ds - rhs(Λ)| using seven-point central differences on
    /// runs of uniformly log-spaced samples inside a branch. Returns None
    /// when no such run of length seven exists.
    pub fn ode_residual(&self) -> Option<f64> {
        let sigma = self.sigma.sigma();
        let mut worst: Option<f64> = None;
        for branch in self.branches() {
            for w in branch.windows(7) {
                let s: Vec<f64> = w.iter().map(|p| p.epsilon.ln()).collect();
                let h = s[1] - s[0];
                let uniform = (1..6).all(|i| ((s[i + 1] - s[i]) - h).abs() < 1e-9 * h.abs());
                if !uniform {
                    continue;
                }
                let l: Vec<Complex64> = w.iter().map(|p| p.big_lambda).collect();
                let d = (-l[0] + 9.0 * l[1] - 45.0 * l[2] + 45.0 * l[4] - 9.0 * l[5] + l[6]) / (60.0 * h);
                let r = (d - flow_rhs(l[3], sigma)).norm();
                worst = Some(worst.map_or(r, |x: f64| x.max(r)));
            }
        }
        worst
    }

    /// Largest separation between samples exactly one or more log-periods
    /// apart, comparing the first period against the last complete one.
    /// Needs a uniform log grid commensurate with the period.
    pub fn cycle_closure(&self) -> Option<f64> {
        let period = self.log_period?;
        if self.samples.len() < 2 || self.branch_starts.len() > 1 {
            return None;
        }
        let h = self.samples[1].epsilon.ln() - self.samples[0].epsilon.ln();
        let per = (period / h.abs()).round();
        if per < 1.0 || (per * h.abs() - period).abs() > 1e-9 * period {
            return None;
        }
        let per = per as usize;
        let n = self.samples.len();
        let cycles = (n - 1) / per;
        if cycles < 1 {
            return None;
        }
        let offset = cycles * per;
        let mut worst: f64 = 0.0;
        for i in 0..=(n - 1 - offset).min(per) {
            let a = self.samples[i].big_lambda;
            let b = self.samples[i + offset].big_lambda;
            worst = worst.max((a - b).norm());
        }
        Some(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    Direct,
    Inverse,
}

fn chart_rhs(chart: Chart, s2: Complex64, y: &[f64; 2]) -> [f64; 2] {
    let v = Complex64::new(y[0], y[1]);
    let d = match chart {
        Chart::Direct => 2.0 * s2 - 0.5 * v * v,
        Chart::Inverse => 0.5 - 2.0 * s2 * v * v,
    };
    [d.re, d.im]
}

/// Integrates from s0 through the monotone list `targets`, switching charts
/// as needed. Returns Λ at each target and the ln ε of pole crossings.
fn integrate_flow(
    lambda0: Complex64,
    s0: f64,
    sigma: Complex64,
    targets: &[f64],
    opts: OdeOptions,
) -> Result<(Vec<Complex64>, Vec<f64>), FlowError> {
    let s2 = sigma * sigma;
    let switch = 4.0 * (1.0 + 2.0 * sigma.norm());
    let mut chart = if lambda0.norm() > switch {
        Chart::Inverse
    } else {
        Chart::Direct
    };
    let mut v = match chart {
        Chart::Direct => lambda0,
        Chart::Inverse => 1.0 / lambda0,
    };
    let mut out = Vec::with_capacity(targets.len());
    let mut poles = Vec::new();
    let Some(&t_last) = targets.last() else {
        return Ok((out, poles));
    };
    let mut s = s0;
    let mut f = move |_: f64, y: &[f64; 2]| chart_rhs(chart, s2, y);
    let mut stepper = Dopri5::new(&mut f, s, [v.re, v.im], t_last, opts);
    for &target in targets {
        while s != target {
            let mut f = move |_: f64, y: &[f64; 2]| chart_rhs(chart, s2, y);
            stepper.step_toward(&mut f, target)?;
            let y = stepper.y();
            let nv = Complex64::new(y[0], y[1]);
            let ns = stepper.t();
            if chart == Chart::Inverse && v.re * nv.re < 0.0 {
                let frac = v.re / (v.re - nv.re);
                let mu_cross = v + frac * (nv - v);
                if mu_cross.norm() < 1e-6 {
                    poles.push(s + frac * (ns - s));
                }
            }
            v = nv;
            s = ns;
            let new_chart = match chart {
                Chart::Direct if v.norm() > switch => Some(Chart::Inverse),
                Chart::Inverse if v.norm() > 2.0 / switch => Some(Chart::Direct),
                _ => None,
            };
            if let Some(c) = new_chart {
                chart = c;
                v = 1.0 / v;
                let mut f = move |_: f64, y: &[f64; 2]| chart_rhs(chart, s2, y);
                stepper = Dopri5::new(&mut f, s, [v.re, v.im], t_last, opts);
            }
        }
        out.push(match chart {
            Chart::Direct => v,
            Chart::Inverse => 1.0 / v,
        });
    }
    Ok((out, poles))
}

fn flow_options() -> OdeOptions {
    OdeOptions::with_tolerances(1e-12, 1e-13)
}

fn is_fixed_point(lambda0: Complex64, sigma: Complex64) -> bool {
    let tol = 1e-12 * (1.0 + 2.0 * sigma.norm());
    (lambda0 - 2.0 * sigma).norm() < tol || (lambda0 + 2.0 * sigma).norm() < tol
}

/// Numerical integration of the flow over a monotone grid of ε values.
pub fn flow_numeric(
    lambda0: Complex64,
    eps0: f64,
    sigma: &SigmaOrder,
    eps_grid: &[f64],
) -> Result<FlowTrajectory, FlowError> {
    check_scale(eps0)?;
    if !(lambda0.re.is_finite() && lambda0.im.is_finite()) {
        return Err(FlowError::NonFiniteSeed(lambda0));
    }
    for &e in eps_grid {
        if !(e > 0.0 && e.is_finite()) {
            return Err(FlowError::InvalidGrid(format!("non-positive or non-finite value {e}")));
        }
    }
    let increasing = eps_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = eps_grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(FlowError::InvalidGrid("grid must be strictly monotone".into()));
    }
    let s0 = eps0.ln();
    let s_grid: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let sig = sigma.sigma();

    // Integrate outwards from ε₀ on each side so no stretch is traversed twice.
    let split = s_grid.partition_point(|&s| if increasing { s < s0 } else { s > s0 });
    let (before, after) = s_grid.split_at(split);
    let mut values = vec![Complex64::new(0.0, 0.0); s_grid.len()];
    let mut poles = Vec::new();
    if !before.is_empty() {
        let rev: Vec<f64> = before.iter().rev().copied().collect();
        let (vals, p) = integrate_flow(lambda0, s0, sig, &rev, flow_options())?;
        for (i, v) in vals.into_iter().enumerate() {
            values[split - 1 - i] = v;
        }
        poles.extend(p);
    }
    if !after.is_empty() {
        let (vals, p) = integrate_flow(lambda0, s0, sig, after, flow_options())?;
        for (i, v) in vals.into_iter().enumerate() {
            values[split + i] = v;
        }
        poles.extend(p);
    }
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if decreasing {
        poles.reverse();
    }
    // Keep crossings inside the sampled window.
    if let (Some(&first), Some(&last)) = (s_grid.first(), s_grid.last()) {
        let (lo, hi) = if first <= last { (first, last) } else { (last, first) };
        poles.retain(|&p| p >= lo && p <= hi);
    }

    let samples: Vec<FlowSample> = eps_grid
        .iter()
        .zip(&values)
        .map(|(&epsilon, &big_lambda)| FlowSample { epsilon, big_lambda })
        .collect();
    let mut branch_starts = vec![0];
    for &p in &poles {
        let idx = s_grid.partition_point(|&s| if increasing { s < p } else { s > p });
        if idx > *branch_starts.last().unwrap() && idx < samples.len() {
            branch_starts.push(idx);
        }
    }

    let mut traj = FlowTrajectory {
        sigma: *sigma,
        lambda0,
        eps0,
        samples,
        branch_starts,
        pole_crossings: poles,
        eps_star: None,
        y_star: None,
        log_period: None,
    };
    populate_invariants(&mut traj);
    Ok(traj)
}

/// Fills eps_star / y_star / log_period from the initial data analytically.
fn populate_invariants(traj: &mut FlowTrajectory) {
    let sig = traj.sigma.sigma();
    if sig.norm() == 0.0 || is_fixed_point(traj.lambda0, sig) {
        return;
    }
    let y0 = traj.lambda0 / (2.0 * sig);
    let w0 = (y0 + 1.0) / (y0 - 1.0);
    match traj.sigma.regime() {
        Regime::Subcritical => {
            traj.eps_star = Some(traj.eps0 * w0.norm().powf(-1.0 / (2.0 * sig.re)));
        }
        Regime::Supercritical => {
            let zeta = -sig.im;
            let period = PI / zeta;
            traj.log_period = Some(period);
            let s_min = traj
                .samples
                .iter()
                .map(|p| p.epsilon.ln())
                .fold(traj.eps0.ln(), f64::min);
            let l_min = s_min - traj.eps0.ln();
            let base = w0.arg() / (2.0 * zeta);
            let m = ((l_min - base) / period).ceil();
            let l_star = base + m * period;
            let eps_star = traj.eps0 * l_star.exp();
            traj.eps_star = Some(eps_star);
            traj.y_star = crossing_y(traj.lambda0, traj.eps0, sig, eps_star);
        }
        Regime::Critical => {}
    }
}

fn crossing_y(lambda0: Complex64, eps0: f64, sigma: Complex64, eps: f64) -> Option<f64> {
    let (p, q) = flow_homogeneous(lambda0, sigma, (eps / eps0).ln());
    let v = p / q;
    (v.im.is_finite() && q.norm() > 1e-12 * p.norm()).then_some(v.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsStar {
    pub eps_star: f64,
    /// Im Λ at the crossing; absent when the crossing is through Λ = ∞.
    pub y_star: Option<f64>,
}

/// Locates the smallest ε in the sampled window where Re Λ increases
/// through zero (equivalently Re(1/Λ) goes from negative to positive).
pub fn extract_eps_star(traj: &FlowTrajectory) -> Result<EpsStar, FlowError> {
    let zeta = traj.sigma.zeta().ok_or(FlowError::NotSupercritical)?;
    let sig = traj.sigma.sigma();
    if is_fixed_point(traj.lambda0, sig) {
        return Err(FlowError::AtFixedPoint);
    }
    let mut pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|p| (p.epsilon.ln(), (1.0 / p.big_lambda).re))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mu = |s: f64| inverse_coupling(traj.lambda0, traj.eps0, sig, s.exp()).re;
    for w in pts.windows(2) {
        let ((sa, ma), (sb, mb)) = (w[0], w[1]);
        if !(ma.is_finite() && mb.is_finite()) {
            continue;
        }
        if ma < 0.0 && mb >= 0.0 {
            let (mut lo, mut hi) = (sa, sb);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mu(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * mid.abs().max(1.0) {
                    break;
                }
            }
            let s_star = 0.5 * (lo + hi);
            let eps_star = s_star.exp();
            return Ok(EpsStar {
                eps_star,
                y_star: crossing_y(traj.lambda0, traj.eps0, sig, eps_star),
            });
        }
    }
    Err(FlowError::WindowTooNarrow { period: PI / zeta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointRegime {
    RealPair,
    Merged,
    ConjugatePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Attracting as ε grows.
    IrStable,
    /// Repelling as ε grows (attracting towards the UV).
    IrUnstable,
    /// Neutral: nearby trajectories circle it.
    Center,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointPair {
    pub lambda_minus: Complex64,
    pub lambda_plus: Complex64,
    pub regime: FixedPointRegime,
    pub stability_minus: Stability,
    pub stability_plus: Stability,
}

pub fn fixed_points(sigma: &SigmaOrder) -> FixedPointPair {
    let s = sigma.sigma();
    let (regime, minus, plus) = match sigma.regime() {
        Regime::Subcritical => (FixedPointRegime::RealPair, Stability::IrUnstable, Stability::IrStable),
        Regime::Critical => (FixedPointRegime::Merged, Stability::Marginal, Stability::Marginal),
        Regime::Supercritical => (FixedPointRegime::ConjugatePair, Stability::Center, Stability::Center),
    };
    FixedPointPair {
        lambda_minus: -2.0 * s,
        lambda_plus: 2.0 * s,
        regime,
        stability_minus: minus,
        stability_plus: plus,
    }
}

/// Fixed-point separation Λ₊ - Λ₋ = 4σ across a grid of α.
pub fn merger_scan(alpha_grid: &[f64]) -> Result<Vec<(f64, Complex64)>, FlowError> {
    alpha_grid
        .iter()
        .map(|&a| {
            let s = crate::model::sigma_from_alpha(a)?;
            let fp = fixed_points(&s);
            Ok((a, fp.lambda_plus - fp.lambda_minus))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitWindow {
    pub eps0: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub samples: usize,
}

impl PortraitWindow {
    pub fn grid(&self) -> Result<Vec<f64>, FlowError> {
        log_grid(self.eps_min, self.eps_max, self.samples)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, FlowError> {
    check_scale(lo)?;
    check_scale(hi)?;
    if n < 2 || lo == hi {
        return Err(FlowError::InvalidGrid("need at least two distinct points".into()));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Log grid whose spacing divides the supercritical log-period exactly.
pub fn periodic_grid(eps_min: f64, sigma: &SigmaOrder, periods: usize, per_period: usize) -> Result<Vec<f64>, FlowError> {
    let zeta = sigma.zeta().ok_or(FlowError::NotSupercritical)?;
    check_scale(eps_min)?;
    let h = PI / zeta / per_period as f64;
    let a = eps_min.ln();
    Ok((0..=periods * per_period).map(|i| (a + h * i as f64).exp()).collect())
}

/// Flows every seed over the same window; output order matches the seeds.
pub fn portrait_sample(
    sigma: &SigmaOrder,
    seeds: &[Complex64],
    window: &PortraitWindow,
) -> Result<Vec<FlowTrajectory>, FlowError> {
    let grid = window.grid()?;
    seeds
        .par_iter()
        .map(|&seed| flow_numeric(seed, window.eps0, sigma, &grid))
        .collect()
}

/// The exact trajectory whose small-ε form is Λ/2σ ≈ -1 - 2(ε/ε_*)^{2σ}:
/// Λ = 2σ coth(σ ln(ε/ε_*)).
pub fn trajectory_through(eps_star: f64, sigma: &SigmaOrder, eps: f64) -> Result<Complex64, FlowError> {
    check_scale(eps_star)?;
    check_scale(eps)?;
    let s = sigma.sigma();
    let a = s * (eps / eps_star).ln();
    let t = if a.re.abs() > 30.0 { tanh_stable(a) } else { a.tanh() };
    if t.norm() < 1e-300 {
        return Err(FlowError::Pole { ln_eps: eps.ln() });
    }
    Ok(2.0 * s / t)
}

pub(crate) fn reduced_ratio(big_lambda: Complex64, sigma: Complex64) -> Complex64 {
    let y = big_lambda / (2.0 * sigma);
    (y - ONE) / (y + ONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sigma_from_alpha;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rhs_examples() {
        let s = c(0.3, 0.0);
        assert_eq!(flow_rhs(2.0 * s, s), c(0.0, 0.0));
        assert!((flow_rhs(c(0.0, 0.0), s) - c(0.18, 0.0)).norm() < 1e-16);
        assert!((flow_rhs(c(0.0, 0.0), c(0.0, -1.0)) - c(-2.0, 0.0)).norm() < 1e-16);
    }

    // Independent oracle: classical fixed-step RK4 on the flow equation.
    fn rk4(lambda0: Complex64, sigma: Complex64, l: f64, n: usize) -> Complex64 {
        let h = l / n as f64;
        let mut v = lambda0;
        for _ in 0..n {
            let k1 = flow_rhs(v, sigma);
            let k2 = flow_rhs(v + 0.5 * h * k1, sigma);
            let k3 = flow_rhs(v + 0.5 * h * k2, sigma);
            let k4 = flow_rhs(v + h * k3, sigma);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        v
    }

    #[test]
    fn analytic_examples() {
        let s = sigma_from_alpha(0.16).unwrap();
        let v = flow_analytic(c(0.0, 0.0), 1.0, &s, std::f64::consts::E).unwrap();
        // 0.6·tanh(0.3), mpmath
        assert!((v - c(0.17478756747095453093, 0.0)).norm() < 1e-15);
        assert!((rk4(c(0.0, 0.0), s.sigma(), 1.0, 2000) - v).norm() < 1e-12);
        assert_eq!(flow_analytic(c(0.4, 0.1), 2.0, &s, 2.0).unwrap(), c(0.4, 0.1));
        let fp = flow_analytic(c(0.6, 0.0), 1.0, &s, 123.0).unwrap();
        assert!((fp - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn analytic_matches_rk4_supercritical() {
        let s = sigma_from_alpha(1.25).unwrap();
        let seed = c(0.7, -1.3);
        let v = flow_analytic(seed, 1.0, &s, 20.0).unwrap();
        let w = rk4(seed, s.sigma(), 20f64.ln(), 20000);
        assert!((v - w).norm() < 1e-10);
    }

    #[test]
    fn analytic_pole_reported() {
        let s = sigma_from_alpha(0.0).unwrap();
        // σ = 1/2, y0 = -2: denominator 1 - 2 tanh(L/2) vanishes at tanh = 1/2.
        let l = 2.0 * 0.5f64.atanh();
        let err = flow_analytic(c(-2.0, 0.0), 1.0, &s, l.exp()).unwrap_err();
        assert!(matches!(err, FlowError::Pole { .. }));
    }

    #[test]
    fn critical_flow() {
        let s = sigma_from_alpha(0.25).unwrap();
        let v = flow_analytic(c(1.0, 0.0), 1.0, &s, 1.0f64.exp()).unwrap();
        assert!((v - c(1.0 / 1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn numeric_tracks_analytic() {
        for (alpha, seed) in [(0.16, c(-0.59, 0.0)), (1.25, c(1.0, 0.0)), (2.0, c(0.3, -4.0))] {
            let s = sigma_from_alpha(alpha).unwrap();
            let grid = log_grid(1e-2, 1e1, 300).unwrap();
            let traj = flow_numeric(seed, 0.3, &s, &grid).unwrap();
            for p in traj.branches().concat() {
                match flow_analytic(seed, 0.3, &s, p.epsilon) {
                    Ok(v) if v.norm() < 1e6 => {
                        assert!((v - p.big_lambda).norm() < 1e-8 * v.norm().max(1.0), "α {alpha} ε {}", p.epsilon)
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn numeric_passes_through_poles() {
        let s = sigma_from_alpha(1.25).unwrap();
        let grid = periodic_grid(1e-2, &s, 3, 64).unwrap();
        let traj = flow_numeric(c(1.0, 0.0), 1e-2, &s, &grid).unwrap();
        assert_eq!(traj.pole_crossings.len(), 3);
        assert_eq!(traj.branch_starts.len(), 4);
        assert!(traj.samples.iter().all(|p| p.big_lambda.im == 0.0 || p.big_lambda.im.abs() < 1e-9));
    }

    #[test]
    fn fixed_point_seed_is_constant() {
        let s = sigma_from_alpha(2.0).unwrap();
        let fp = fixed_points(&s);
        let grid = log_grid(1e-3, 1.0, 50).unwrap();
        let traj = flow_numeric(fp.lambda_plus, 0.01, &s, &grid).unwrap();
        assert!(traj.samples.iter().all(|p| (p.big_lambda - fp.lambda_plus).norm() < 1e-12));
        assert_eq!(traj.eps_star, None);
        assert!(matches!(extract_eps_star(&traj), Err(FlowError::AtFixedPoint)));
    }

    #[test]
    fn fixed_point_examples() {
        let fp = fixed_points(&sigma_from_alpha(0.16).unwrap());
        assert!((fp.lambda_minus - c(-0.6, 0.0)).norm() < 1e-15);
        assert_eq!(fp.regime, FixedPointRegime::RealPair);
        assert_eq!(fp.stability_plus, Stability::IrStable);
        let fp = fixed_points(&sigma_from_alpha(0.25).unwrap());
        assert_eq!(fp.regime, FixedPointRegime::Merged);
        assert_eq!(fp.lambda_plus, c(0.0, 0.0));
        let fp = fixed_points(&sigma_from_alpha(4.25).unwrap());
        assert_eq!(fp.regime, FixedPointRegime::ConjugatePair);
        assert!((fp.lambda_plus - c(0.0, -4.0)).norm() < 1e-15);
        assert!((fp.lambda_minus - c(0.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn merger_examples() {
        let scan = merger_scan(&[0.24, 0.25, 0.26]).unwrap();
        assert!((scan[0].1 - c(0.4, 0.0)).norm() < 1e-14);
        assert_eq!(scan[1].1, c(0.0, 0.0));
        assert!((scan[2].1 - c(0.0, -0.4)).norm() < 1e-14);
    }

    #[test]
    fn eps_star_round_trip_from_exact_trajectory() {
        let s = sigma_from_alpha(1.25).unwrap();
        let eps_star = 1.0;
        let eps0 = 0.05;
        let seed = trajectory_through(eps_star, &s, eps0).unwrap();
        let grid = log_grid(eps0, eps0 * (2.5 * PI).exp(), 400).unwrap();
        let traj = flow_numeric(seed, eps0, &s, &grid).unwrap();
        let got = extract_eps_star(&traj).unwrap();
        let n = (got.eps_star / eps_star).ln() / PI;
        assert!((n - n.round()).abs() < 1e-6, "ε_* = {}", got.eps_star);
        assert!(got.y_star.is_none());
        // Analytic population agrees with extraction.
        assert!((traj.eps_star.unwrap() / got.eps_star - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eps_star_covariant_under_rescaling() {
        let s = sigma_from_alpha(2.0).unwrap();
        let seed = c(0.5, -3.0);
        let scale = 7.3;
        let g1 = log_grid(1e-3, 1e-3 * (2.0 * PI).exp(), 300).unwrap();
        let g2: Vec<f64> = g1.iter().map(|e| e * scale).collect();
        let a = extract_eps_star(&flow_numeric(seed, 1e-2, &s, &g1).unwrap()).unwrap();
        let b = extract_eps_star(&flow_numeric(seed, 1e-2 * scale, &s, &g2).unwrap()).unwrap();
        assert!((b.eps_star / a.eps_star - scale).abs() < 1e-9 * scale);
        assert!(a.y_star.unwrap() < -2.0 * s.zeta().unwrap());
    }

    #[test]
    fn narrow_window_is_rejected() {
        let s = sigma_from_alpha(1.25).unwrap();
        let seed = trajectory_through(1.0, &s, 0.9).unwrap();
        let grid = log_grid(0.9, 0.95, 10).unwrap();
        let traj = flow_numeric(seed, 0.9, &s, &grid).unwrap();
        assert!(matches!(extract_eps_star(&traj), Err(FlowError::WindowTooNarrow { .. })));
    }

    #[test]
    fn supercritical_cycle_closes() {
        let s = sigma_from_alpha(1.25).unwrap();
        let grid = periodic_grid(1e-3, &s, 3, 400).unwrap();
        let traj = flow_numeric(c(0.2, -1.0), 1e-3, &s, &grid).unwrap();
        assert!(traj.cycle_closure().unwrap() < 1e-6);
        let res = traj.ode_residual().unwrap();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn portrait_keeps_seed_order() {
        let s = sigma_from_alpha(0.16).unwrap();
        let seeds: Vec<Complex64> = (0..8).map(|i| c(-0.5 + 0.1 * i as f64, 0.0)).collect();
        let w = PortraitWindow { eps0: 1.0, eps_min: 1e-2, eps_max: 1e2, samples: 20 };
        let out = portrait_sample(&s, &seeds, &w).unwrap();
        for (t, seed) in out.iter().zip(&seeds) {
            assert_eq!(t.lambda0, *seed);
        }
    }

    #[test]
    fn trajectory_json_round_trip() {
        let s = sigma_from_alpha(1.25).unwrap();
        let traj = flow_numeric(c(0.3, -1.0), 1.0, &s, &log_grid(0.5, 40.0, 7).unwrap()).unwrap();
        let json = serde_json::to_string(&traj).unwrap();
        assert!(json.contains("re_Lambda") && json.contains("im_Lambda"));
        let back: FlowTrajectory = serde_json::from_str(&json).unwrap();
        assert_eq!(back, traj);
    }
}
