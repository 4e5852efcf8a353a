//! Hankel functions H1, H2 of real or negative-imaginary order on the
//! positive real axis.
//!
//! Three evaluation regimes are stitched together: the ascending series near
//! the origin, the large-argument asymptotic series, and numerical
//! continuation of Bessel's equation (in t = ln z) in between.

use super::gamma::gamma;
use crate::ode::{Dopri5, OdeError, OdeOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Orders with |σ| below this are treated as degenerate for the two-term form.
pub const DEGENERATE_ORDER: f64 = 1e-3;
/// The ascending series is only summed for arguments up to this value.
pub const SERIES_MAX_ARGUMENT: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("order {0} must be real or of the form -i*zeta with zeta > 0")]
    InvalidOrder(Complex64),
    #[error("order {0} is degenerate (zero or integer) for this representation")]
    DegenerateOrder(Complex64),
    #[error("argument {z} lies outside the {regime} regime (threshold {threshold})")]
    OutsideRegime {
        z: f64,
        regime: Regime,
        threshold: f64,
    },
    #[error("argument must be positive and finite, got {0}")]
    InvalidArgument(f64),
    #[error("continuation failed: {0}")]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HankelKind {
    #[serde(rename = "H1")]
    First,
    #[serde(rename = "H2")]
    Second,
}

impl HankelKind {
    pub fn other(self) -> Self {
        match self {
            HankelKind::First => HankelKind::Second,
            HankelKind::Second => HankelKind::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Series,
    OdeContinued,
    Asymptotic,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Series => "series",
            Regime::OdeContinued => "ode-continued",
            Regime::Asymptotic => "asymptotic",
        };
        f.write_str(s)
    }
}

/// A cylinder-function order that is either real or purely negative imaginary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct CylinderOrder {
    sigma: Complex64,
}

impl CylinderOrder {
    pub fn new(sigma: Complex64) -> Result<Self, SpecialError> {
        let ok_real = sigma.im == 0.0 && sigma.re.is_finite();
        let ok_imag = sigma.re == 0.0 && sigma.im < 0.0 && sigma.im.is_finite();
        if ok_real || ok_imag {
            Ok(CylinderOrder { sigma })
        } else {
            Err(SpecialError::InvalidOrder(sigma))
        }
    }

    pub fn real(sigma: f64) -> Result<Self, SpecialError> {
        Self::new(Complex64::new(sigma, 0.0))
    }

    /// σ = -iζ with ζ > 0.
    pub fn imaginary(zeta: f64) -> Result<Self, SpecialError> {
        if !(zeta > 0.0) {
            return Err(SpecialError::InvalidOrder(Complex64::new(0.0, -zeta)));
        }
        Self::new(Complex64::new(0.0, -zeta))
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    /// σ², which is real for every admissible order.
    pub fn sigma_squared(&self) -> f64 {
        if self.is_real() {
            self.sigma.re * self.sigma.re
        } else {
            -self.sigma.im * self.sigma.im
        }
    }

    pub fn is_real(&self) -> bool {
        self.sigma.im == 0.0
    }

    pub fn zeta(&self) -> Option<f64> {
        (!self.is_real()).then_some(-self.sigma.im)
    }

    pub fn abs(&self) -> f64 {
        self.sigma.norm()
    }

    /// Zero or integer orders, where J_σ and J_{-σ} are linearly dependent.
    pub fn is_degenerate(&self) -> bool {
        if self.abs() < DEGENERATE_ORDER {
            return true;
        }
        self.is_real() && (self.sigma.re - self.sigma.re.round()).abs() < 1e-12
    }

    pub fn series_threshold(&self) -> f64 {
        1e-2 * (1.0f64).min(1.0 / (1.0 + self.abs()))
    }

    pub fn asymptotic_threshold(&self) -> f64 {
        30.0 * (1.0 + self.abs().powi(2))
    }
}

impl TryFrom<Complex64> for CylinderOrder {
    type Error = SpecialError;
    fn try_from(value: Complex64) -> Result<Self, Self::Error> {
        CylinderOrder::new(value)
    }
}

impl From<CylinderOrder> for Complex64 {
    fn from(value: CylinderOrder) -> Self {
        value.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderEval {
    pub kind: HankelKind,
    pub order: CylinderOrder,
    pub argument: f64,
    pub value: Complex64,
    pub regime: Regime,
}

/// Value and z-derivative of a cylinder function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueAndSlope {
    pub value: Complex64,
    pub slope: Complex64,
}

fn check_argument(z: f64) -> Result<(), SpecialError> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(SpecialError::InvalidArgument(z))
    }
}

fn combine(kind: HankelKind, sigma: Complex64, j_minus: Complex64, j_plus: Complex64) -> Complex64 {
    let s = (PI * sigma).sin();
    match kind {
        HankelKind::First => (j_minus - (-I * PI * sigma).exp() * j_plus) / (I * s),
        HankelKind::Second => (j_minus - (I * PI * sigma).exp() * j_plus) / (-I * s),
    }
}

/// Two-term small-argument form built from the leading monomials
/// (z/2)^{±σ} / Γ(1 ± σ).
pub fn hankel_small_z(kind: HankelKind, order: CylinderOrder, z: f64) -> Result<Complex64, SpecialError> {
    check_argument(z)?;
    if order.is_degenerate() {
        return Err(SpecialError::DegenerateOrder(order.sigma));
    }
    let threshold = order.series_threshold();
    if z >= threshold {
        return Err(SpecialError::OutsideRegime {
            z,
            regime: Regime::Series,
            threshold,
        });
    }
    let sigma = order.sigma;
    let lz = (z / 2.0).ln();
    let j_plus = (sigma * lz).exp() / gamma(1.0 + sigma);
    let j_minus = (-sigma * lz).exp() / gamma(1.0 - sigma);
    Ok(combine(kind, sigma, j_minus, j_plus))
}

/// J_ν(z) and J_ν'(z) from the ascending series.
fn bessel_j_series(nu: Complex64, z: f64) -> (Complex64, Complex64) {
    let half = z / 2.0;
    let q = -half * half;
    let mut term = (nu * half.ln()).exp() / gamma(1.0 + nu);
    let mut sum = term;
    let mut dsum = term * nu;
    for m in 1..500 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        dsum += term * (2.0 * mf + nu);
        if term.norm() <= 1e-17 * sum.norm() && mf > half {
            break;
        }
    }
    (sum, dsum / z)
}

/// Hankel function and derivative from the full ascending series of J_{±σ}.
pub fn hankel_series(kind: HankelKind, order: CylinderOrder, z: f64) -> Result<ValueAndSlope, SpecialError> {
    check_argument(z)?;
    if order.is_degenerate() {
        return Err(SpecialError::DegenerateOrder(order.sigma));
    }
    if z > SERIES_MAX_ARGUMENT {
        return Err(SpecialError::OutsideRegime {
            z,
            regime: Regime::Series,
            threshold: SERIES_MAX_ARGUMENT,
        });
    }
    let sigma = order.sigma;
    let (jp, djp) = bessel_j_series(sigma, z);
    let (jm, djm) = bessel_j_series(-sigma, z);
    Ok(ValueAndSlope {
        value: combine(kind, sigma, jm, jp),
        slope: combine(kind, sigma, djm, djp),
    })
}

fn phase(kind: HankelKind, sigma: Complex64, z: f64) -> Complex64 {
    let omega = z - FRAC_PI_2 * sigma - FRAC_PI_4;
    match kind {
        HankelKind::First => (I * omega).exp(),
        HankelKind::Second => (-I * omega).exp(),
    }
}

fn check_asymptotic(order: CylinderOrder, z: f64) -> Result<(), SpecialError> {
    check_argument(z)?;
    let threshold = order.asymptotic_threshold();
    if z <= threshold {
        return Err(SpecialError::OutsideRegime {
            z,
            regime: Regime::Asymptotic,
            threshold,
        });
    }
    Ok(())
}

/// Leading large-argument behaviour sqrt(2/(πz)) exp(±i(z - πσ/2 - π/4)).
pub fn hankel_asymptotic(kind: HankelKind, order: CylinderOrder, z: f64) -> Result<Complex64, SpecialError> {
    check_asymptotic(order, z)?;
    Ok((2.0 / (PI * z)).sqrt() * phase(kind, order.sigma, z))
}

/// Asymptotic expansion summed to its smallest term, with derivative.
/// Unlike [`hankel_asymptotic`] this accepts any z > 0 and leaves judging
/// the truncation error to the caller.
pub fn hankel_asymptotic_series(kind: HankelKind, order: CylinderOrder, z: f64) -> Result<ValueAndSlope, SpecialError> {
    check_argument(z)?;
    let sigma = order.sigma;
    let mu = 4.0 * sigma * sigma;
    let rot = match kind {
        HankelKind::First => I,
        HankelKind::Second => -I,
    };
    let mut a = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(1.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    let mut rot_k = Complex64::new(1.0, 0.0);
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        rot_k *= rot;
        zk *= z;
        let term = rot_k * a / zk;
        let size = term.norm();
        if size > last {
            break;
        }
        s += term;
        ds -= kf * term / z;
        last = size;
        if size <= 1e-17 * s.norm() {
            break;
        }
    }
    let pref = (2.0 / (PI * z)).sqrt();
    let e = phase(kind, sigma, z);
    let value = pref * e * s;
    let slope = pref * e * (s * (rot - 0.5 / z) + ds);
    Ok(ValueAndSlope { value, slope })
}

fn bessel_rhs(sigma_sq: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |t, y| {
        let c = sigma_sq - (2.0 * t).exp();
        [y[1], c * y[0], y[3], c * y[2]]
    }
}

// The absolute floor follows the smallest seed component so that a
// subdominant real or imaginary part keeps its relative accuracy.
fn continuation_options(seed: &[f64]) -> OdeOptions {
    let floor = seed
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0)
        .fold(1.0f64, f64::min);
    OdeOptions::with_tolerances(1e-13, 1e-15 * floor.max(1e-290))
}

/// Integrates Bessel's equation of order σ from `z_from` to `z_to` starting
/// from `seed` (value and z-derivative). The kind label is only carried for
/// error reporting symmetry with the other evaluators.
pub fn hankel_ode_continue(
    _kind: HankelKind,
    order: CylinderOrder,
    z_from: f64,
    z_to: f64,
    seed: ValueAndSlope,
) -> Result<ValueAndSlope, SpecialError> {
    check_argument(z_from)?;
    check_argument(z_to)?;
    let t0 = z_from.ln();
    let t1 = z_to.ln();
    let ut = seed.slope * z_from;
    let y0 = [seed.value.re, ut.re, seed.value.im, ut.im];
    let mut f = bessel_rhs(order.sigma_squared());
    let mut stepper = Dopri5::new(&mut f, t0, y0, t1, continuation_options(&y0));
    stepper.advance_to(&mut f, t1)?;
    let y = stepper.y();
    let value = Complex64::new(y[0], y[2]);
    let slope = Complex64::new(y[1], y[3]) / z_to;
    Ok(ValueAndSlope { value, slope })
}

/// Dispatching evaluator: value, derivative and the regime that produced them.
pub fn hankel_with_derivative(
    kind: HankelKind,
    order: CylinderOrder,
    z: f64,
) -> Result<(CylinderEval, Complex64), SpecialError> {
    check_argument(z)?;
    let z_s = order.series_threshold();
    let z_a = order.asymptotic_threshold();
    let (vs, regime) = if z > z_a {
        (hankel_asymptotic_series(kind, order, z)?, Regime::Asymptotic)
    } else if !order.is_degenerate() {
        if z <= z_s {
            (hankel_series(kind, order, z)?, Regime::Series)
        } else {
            let seed = hankel_series(kind, order, z_s)?;
            (hankel_ode_continue(kind, order, z_s, z, seed)?, Regime::OdeContinued)
        }
    } else {
        // Integer orders: integrate inwards from the asymptotic region.
        let z0 = z_a * (1.0 + 1e-9);
        let seed = hankel_asymptotic_series(kind, order, z0)?;
        (hankel_ode_continue(kind, order, z0, z, seed)?, Regime::OdeContinued)
    };
    let eval = CylinderEval {
        kind,
        order,
        argument: z,
        value: vs.value,
        regime,
    };
    Ok((eval, vs.slope))
}

pub fn hankel(kind: HankelKind, order: CylinderOrder, z: f64) -> Result<CylinderEval, SpecialError> {
    hankel_with_derivative(kind, order, z).map(|(e, _)| e)
}

/// Expected Wronskian H1 H2' - H2 H1' = -4i/(πz).
pub fn wronskian_expected(z: f64) -> Complex64 {
    -4.0 * I / (PI * z)
}

/// Continues H1 and H2 jointly from `z_from` to `z_to` and reports the
/// relative Wronskian residual at each of `checkpoints` log-spaced points.
pub fn wronskian_along_path(
    order: CylinderOrder,
    z_from: f64,
    z_to: f64,
    checkpoints: usize,
) -> Result<Vec<(f64, f64)>, SpecialError> {
    check_argument(z_from)?;
    check_argument(z_to)?;
    let (h1, d1) = hankel_with_derivative(HankelKind::First, order, z_from)?;
    let (h2, d2) = hankel_with_derivative(HankelKind::Second, order, z_from)?;
    let sigma_sq = order.sigma_squared();
    let mut f = move |t: f64, y: &[f64; 8]| {
        let c = sigma_sq - (2.0 * t).exp();
        [y[1], c * y[0], y[3], c * y[2], y[5], c * y[4], y[7], c * y[6]]
    };
    let t0 = z_from.ln();
    let t1 = z_to.ln();
    let (u1, u2) = (h1.value, h2.value);
    let (w1, w2) = (d1 * z_from, d2 * z_from);
    let y0 = [u1.re, w1.re, u1.im, w1.im, u2.re, w2.re, u2.im, w2.im];
    let mut stepper = Dopri5::new(&mut f, t0, y0, t1, continuation_options(&y0));
    let n = checkpoints.max(1);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        stepper.advance_to(&mut f, t)?;
        let y = stepper.y();
        let a = Complex64::new(y[0], y[2]);
        let at = Complex64::new(y[1], y[3]);
        let b = Complex64::new(y[4], y[6]);
        let bt = Complex64::new(y[5], y[7]);
        // In t = ln z the Wronskian is z times the z-Wronskian, a constant.
        let w = a * bt - b * at;
        let expected = -4.0 * I / PI;
        out.push((t.exp(), (w - expected).norm() / expected.norm()));
    }
    Ok(out)
}

/// Given the value of the opposite kind at z, returns `target` at the
/// rotated argument: H1(e^{iπ} z) = -e^{-iπσ} H2(z) and
/// H2(e^{-iπ} z) = -e^{iπσ} H1(z).
pub fn reflect_negative_argument(target: HankelKind, order: CylinderOrder, other_at_z: Complex64) -> Complex64 {
    -reflection_phase(target, order) * other_at_z
}

/// Inverse of [`reflect_negative_argument`].
pub fn unreflect_negative_argument(target: HankelKind, order: CylinderOrder, rotated: Complex64) -> Complex64 {
    -rotated / reflection_phase(target, order)
}

fn reflection_phase(target: HankelKind, order: CylinderOrder) -> Complex64 {
    match target {
        HankelKind::First => (-I * PI * order.sigma).exp(),
        HankelKind::Second => (I * PI * order.sigma).exp(),
    }
}
