//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size real systems.
//!
//! Complex-valued problems are integrated by splitting into real and imaginary
//! parts. The stepper exposes single accepted steps so callers can watch the
//! state between steps (chart switches, pole detection, dense sampling).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `f64::INFINITY` disables it.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        OdeOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Single-trajectory DOPRI5 stepper with FSAL reuse.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    t: f64,
    y: [f64; N],
    f_at_t: [f64; N],
    h: f64,
    opts: OdeOptions,
    steps: usize,
}

impl<const N: usize> Dopri5<N> {
    /// Starts a stepper at (t0, y0) heading towards `t_dir` (only its sign
    /// relative to t0 matters, plus the magnitude for the initial step guess).
    pub fn new<F>(f: &mut F, t0: f64, y0: [f64; N], t_dir: f64, opts: OdeOptions) -> Self
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let f0 = f(t0, &y0);
        let span = t_dir - t0;
        let h = initial_step(f, t0, &y0, &f0, span, &opts);
        Dopri5 {
            t: t0,
            y: y0,
            f_at_t: f0,
            h,
            opts,
            steps: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Takes one accepted step towards `t_end`, never stepping past it.
    pub fn step_toward<F>(&mut self, f: &mut F, t_end: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let dir = if t_end >= self.t { 1.0 } else { -1.0 };
        let remaining = (t_end - self.t).abs();
        if remaining == 0.0 {
            return Ok(());
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(OdeError::MaxSteps {
                    t: self.t,
                    max_steps: self.opts.max_steps,
                });
            }
            let mut h_abs = self.h.abs().min(self.opts.h_max);
            let last = h_abs >= remaining;
            if last {
                h_abs = remaining;
            }
            let h = dir * h_abs;
            let min_h = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h_abs < min_h && !last {
                return Err(OdeError::StepSizeUnderflow { t: self.t });
            }

            let (y_new, f_new, err) = self.trial(f, h);
            self.steps += 1;
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                // Treat as a rejected step and shrink hard.
                self.h = dir * h_abs * FAC_MIN;
                if h_abs * FAC_MIN < min_h {
                    return Err(OdeError::NonFinite { t: self.t });
                }
                continue;
            }
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.f_at_t = f_new;
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                // Keep the pre-truncation step size when the last step was clipped.
                let base = if last { self.h.abs().max(h_abs) } else { h_abs };
                self.h = dir * base * fac;
                return Ok(());
            }
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            self.h = dir * h_abs * fac;
        }
    }

    /// Integrates up to exactly `t_end`.
    pub fn advance_to<F>(&mut self, f: &mut F, t_end: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        while self.t != t_end {
            self.step_toward(f, t_end)?;
        }
        Ok(())
    }

    fn trial<F>(&self, f: &mut F, h: f64) -> ([f64; N], [f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let t = self.t;
        let y = &self.y;
        let k1 = self.f_at_t;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        (y_new, k7, (acc / N as f64).sqrt())
    }
}

fn rms_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let s: f64 = v
        .iter()
        .zip(scale)
        .map(|(a, b)| (a / b).powi(2))
        .sum();
    (s / N as f64).sqrt()
}

// Hairer-Norsett-Wanner starting step heuristic.
fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    opts: &OdeOptions,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut scale = [0.0; N];
    for i in 0..N {
        scale[i] = opts.atol + opts.rtol * y0[i].abs();
    }
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span.abs().max(f64::MIN_POSITIVE)).min(opts.h_max);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = f(t0 + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let h = (100.0 * h0).min(h1).min(opts.h_max);
    if h.is_finite() && h > 0.0 {
        dir * h
    } else {
        dir * 1e-6
    }
}

/// Integrates from t0 to t1 and returns the final state.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: OdeOptions,
) -> Result<[f64; N], OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut stepper = Dopri5::new(&mut f, t0, y0, t1, opts);
    stepper.advance_to(&mut f, t1)?;
    Ok(*stepper.y())
}

/// Integrates through a monotone list of output times, returning the state at each.
pub fn integrate_dense<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: OdeOptions,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let Some(&t_last) = outputs.last() else {
        return Ok(Vec::new());
    };
    let mut stepper = Dopri5::new(&mut f, t0, y0, t_last, opts);
    let mut out = Vec::with_capacity(outputs.len());
    for &t in outputs {
        stepper.advance_to(&mut f, t)?;
        out.push(*stepper.y());
    }
    Ok(out)
}
