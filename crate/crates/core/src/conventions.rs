//! Wave normalization shared by the closed-form amplitudes and the ODE oracle.
//!
//! Right of the source the solution is √(kQ)·(H2(kQ) + R·H1(kQ)): a unit
//! H2 wave incoming from +∞ plus the reflected H1 wave. Left of the source,
//! in x = |Q|, it is c·T·√(kx)·H1(kx) with c = -i·e^{iπσ}. With this choice
//! continuity at the source reads R + iT·e^{iπσ} = -H2(kε)/H1(kε).

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Prefactor c of the transmitted wave on the left half-line.
pub fn transmitted_phase(sigma: Complex64) -> Complex64 {
    -I * (I * PI * sigma).exp()
}

/// Amplitude A of the incoming wave, √(kQ)·H2(kQ) ~ A·e^{-ikQ}.
pub fn incoming_amplitude(sigma: Complex64) -> Complex64 {
    (2.0 / PI).sqrt() * (I * (0.5 * PI * sigma + FRAC_PI_4)).exp()
}

/// Outgoing right-moving amplitude per unit R, relative to the incoming one.
pub fn reflected_factor(sigma: Complex64) -> Complex64 {
    (-I * PI * sigma).exp()
}

/// Magnitude of the incoming probability current, 2k·|A|².
pub fn incoming_flux(sigma: Complex64, k: f64) -> f64 {
    2.0 * k * incoming_amplitude(sigma).norm_sqr()
}

/// Fraction of incoming flux absorbed at the source:
/// 1 - |R·e^{-iπσ}|² - |T|². For real σ the phase has unit modulus.
pub fn flux_deficit(r: Complex64, t: Complex64, sigma: Complex64) -> f64 {
    1.0 - (r * reflected_factor(sigma)).norm_sqr() - t.norm_sqr()
}
