//! Core domain types: potential strength, the index σ, couplings and scales.
//!
//! Natural units ħ = 2m = 1 are used throughout, so the regulated equation is
//! -χ'' - (α/Q²)χ + λδ(Q)χ = k²χ and λ carries units of 1/length.

use crate::special::{CylinderOrder, SpecialError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CRITICAL_ALPHA: f64 = 0.25;
/// Closed-form evaluators refuse |α - 1/4| below this.
pub const CRITICAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("alpha = {alpha} lies within {CRITICAL_BAND} of the critical value 1/4")]
    CriticalBand { alpha: f64 },
    #[error("scale hierarchy violated: need r < eps/10 < a/100 (r = {r}, eps = {eps}, a = {a})")]
    ScaleHierarchy { r: f64, eps: f64, a: f64 },
    #[error("a vanishing coefficient leaves the solution scale invariant")]
    ScaleInvariant,
    #[error("critical order has no intrinsic length from the power-law ratio")]
    CriticalOrder,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialStrength {
    alpha: f64,
}

impl PotentialStrength {
    pub fn new(alpha: f64) -> Result<Self, ModelError> {
        Ok(PotentialStrength {
            alpha: finite("alpha", alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        if self.alpha < CRITICAL_ALPHA {
            Regime::Subcritical
        } else if self.alpha > CRITICAL_ALPHA {
            Regime::Supercritical
        } else {
            Regime::Critical
        }
    }

    pub fn in_critical_band(&self) -> bool {
        (self.alpha - CRITICAL_ALPHA).abs() < CRITICAL_BAND
    }

    pub fn sigma(&self) -> SigmaOrder {
        let d = CRITICAL_ALPHA - self.alpha;
        let (sigma, zeta) = match self.regime() {
            Regime::Subcritical => (Complex64::new(d.sqrt(), 0.0), None),
            Regime::Critical => (Complex64::new(0.0, 0.0), None),
            Regime::Supercritical => {
                let z = (-d).sqrt();
                (Complex64::new(0.0, -z), Some(z))
            }
        };
        SigmaOrder {
            alpha: self.alpha,
            sigma,
            zeta,
            regime: self.regime(),
        }
    }
}

/// σ = √(1/4 - α) on the branch Re σ ≥ 0, with σ = -iζ (ζ > 0) above criticality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaRecord", into = "SigmaRecord")]
pub struct SigmaOrder {
    alpha: f64,
    sigma: Complex64,
    zeta: Option<f64>,
    regime: Regime,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SigmaRecord {
    alpha: f64,
    sigma: Complex64,
    zeta: Option<f64>,
    regime: Regime,
}

impl From<SigmaOrder> for SigmaRecord {
    fn from(s: SigmaOrder) -> Self {
        SigmaRecord {
            alpha: s.alpha,
            sigma: s.sigma,
            zeta: s.zeta,
            regime: s.regime,
        }
    }
}

impl TryFrom<SigmaRecord> for SigmaOrder {
    type Error = ModelError;
    fn try_from(r: SigmaRecord) -> Result<Self, Self::Error> {
        // alpha is authoritative; the other fields are derived.
        sigma_from_alpha(r.alpha)
    }
}

pub fn sigma_from_alpha(alpha: f64) -> Result<SigmaOrder, ModelError> {
    Ok(PotentialStrength::new(alpha)?.sigma())
}

impl SigmaOrder {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_supercritical(&self) -> bool {
        self.regime == Regime::Supercritical
    }

    /// 1/4 - σ².
    pub fn recovered_alpha(&self) -> f64 {
        CRITICAL_ALPHA - (self.sigma * self.sigma).re
    }

    pub fn cylinder_order(&self) -> Result<CylinderOrder, ModelError> {
        Ok(match self.zeta {
            Some(z) => CylinderOrder::imaginary(z)?,
            None => CylinderOrder::real(self.sigma.re)?,
        })
    }

    /// Checks the order is far enough from criticality for closed forms.
    pub fn require_closed_form(&self) -> Result<&Self, ModelError> {
        if (self.alpha - CRITICAL_ALPHA).abs() < CRITICAL_BAND {
            Err(ModelError::CriticalBand { alpha: self.alpha })
        } else {
            Ok(self)
        }
    }
}

/// Source-bulk coupling λ at regulator ε together with Λ = λε - 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoupling {
    pub lambda: Complex64,
    pub epsilon: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: Complex64,
}

impl ReducedCoupling {
    pub fn from_lambda(lambda: Complex64, epsilon: f64) -> Result<Self, ModelError> {
        positive("epsilon", epsilon)?;
        Ok(ReducedCoupling {
            lambda,
            epsilon,
            big_lambda: lambda * epsilon - 1.0,
        })
    }

    pub fn from_reduced(big_lambda: Complex64, epsilon: f64) -> Result<Self, ModelError> {
        positive("epsilon", epsilon)?;
        Ok(ReducedCoupling {
            lambda: (big_lambda + 1.0) / epsilon,
            epsilon,
            big_lambda,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self, ModelError> {
        Ok(Wavenumber(positive("k", k)?))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn energy(&self) -> f64 {
        self.0 * self.0
    }
}

/// Source size r, regulator ε and observation scale a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleHierarchy {
    pub source_size: f64,
    pub epsilon: f64,
    pub observation: f64,
}

impl ScaleHierarchy {
    pub fn new(source_size: f64, epsilon: f64, observation: f64) -> Result<Self, ModelError> {
        positive("source_size", source_size)?;
        positive("epsilon", epsilon)?;
        positive("observation", observation)?;
        if source_size < epsilon / 10.0 && epsilon / 10.0 < observation / 100.0 {
            Ok(ScaleHierarchy {
                source_size,
                epsilon,
                observation,
            })
        } else {
            Err(ModelError::ScaleHierarchy {
                r: source_size,
                eps: epsilon,
                a: observation,
            })
        }
    }
}

/// C₊ Q^{1/2+σ} + C₋ Q^{1/2-σ}, the zero-energy solutions away from the origin.
pub fn short_range_solution(
    alpha: f64,
    c_plus: Complex64,
    c_minus: Complex64,
    q: f64,
) -> Result<Complex64, ModelError> {
    let sigma = sigma_from_alpha(alpha)?.sigma();
    positive("Q", q)?;
    let lq = q.ln();
    Ok(c_plus * ((0.5 + sigma) * lq).exp() + c_minus * ((0.5 - sigma) * lq).exp())
}

/// Length at which the two power laws have equal weight. Above criticality
/// the ratio is a phase and the scale is fixed modulo e^{π/ζ}.
pub fn intrinsic_length(c_plus: Complex64, c_minus: Complex64, sigma: &SigmaOrder) -> Result<f64, ModelError> {
    if c_plus == Complex64::new(0.0, 0.0) || c_minus == Complex64::new(0.0, 0.0) {
        return Err(ModelError::ScaleInvariant);
    }
    let ratio = c_plus / c_minus;
    match sigma.regime() {
        Regime::Subcritical => Ok(ratio.norm().powf(-1.0 / (2.0 * sigma.sigma().re))),
        Regime::Supercritical => Ok((ratio.arg() / (2.0 * sigma.zeta().unwrap_or(f64::NAN))).exp()),
        Regime::Critical => Err(ModelError::CriticalOrder),
    }
}
