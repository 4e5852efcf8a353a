//! Special functions: complex Gamma and Hankel functions.

pub mod gamma;
pub mod hankel;

pub use gamma::{gamma, gamma_ratio};
pub use hankel::{
    hankel, hankel_asymptotic, hankel_asymptotic_series, hankel_ode_continue, hankel_series,
    hankel_small_z, hankel_with_derivative, reflect_negative_argument, unreflect_negative_argument,
    wronskian_along_path, CylinderEval, CylinderOrder, HankelKind, Regime, SpecialError,
    ValueAndSlope,
};
