//! Slow, independent reference computations.
//!
//! A classical Runge–Kutta integrator for a single mode and a composite
//! trapezoid rule. Neither shares code with the closed-form propagator or the
//! adaptive quadrature they are used to check.

use num_complex::Complex64;
use crate::error::{domain, Error, Result};
use crate::symbols::{log_symbol_unchecked, roots_from, DampingParams};

/// Trajectory of `u' = v`, `v' = −L v − r² u`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeRun {
    pub r: f64,
    pub l: f64,
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    /// `(t, u, v)`, about a thousand evenly spaced samples including both ends.
    pub samples: Vec<(f64, [f64; 2], [f64; 2])>,
    pub final_u: Complex64,
    pub final_v: Complex64,
}

/// Largest horizon the oracle accepts.
pub const MAX_HORIZON: f64 = 100.0;

pub fn rk4_mode(r: f64, params: &DampingParams, horizon: f64, dt: f64, u1hat: Complex64) -> Result<OdeRun> {
    if !(r.is_finite() && r >= 0.0) {
        return domain(format!("radius must be finite and non-negative, got {r}"));
    }
    rk4_system(r, log_symbol_unchecked(r, params.theta()), horizon, dt, u1hat)
}

/// RK4 for an arbitrary damping coefficient `l`, e.g. `l = 0` for the
/// undamped oscillator.
pub fn rk4_system(r: f64, l: f64, horizon: f64, dt: f64, u1hat: Complex64) -> Result<OdeRun> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("step must be positive, got {dt}"));
    }
    if !(0.0..=MAX_HORIZON).contains(&horizon) {
        return domain(format!("horizon must lie in [0, {MAX_HORIZON}], got {horizon}"));
    }
    let (lp, lm) = roots_from(r, l);
    let stiff = lp.norm().max(lm.norm());
    if dt * stiff >= 0.1 {
        return Err(Error::Instability(format!(
            "dt * max|lambda| = {:.3e} must stay below 0.1",
            dt * stiff
        )));
    }
    let steps = (horizon / dt).round() as usize;
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let r2 = r * r;
    let rhs = |u: Complex64, v: Complex64| (v, -l * v - r2 * u);
    let energy = |u: Complex64, v: Complex64| 0.5 * (v.norm_sqr() + r2 * u.norm_sqr());

    let stride = (steps / 1000).max(1);
    let mut u = Complex64::new(0.0, 0.0);
    let mut v = u1hat;
    let mut e = energy(u, v);
    let mut samples = vec![(0.0, [u.re, u.im], [v.re, v.im])];
    for k in 1..=steps {
        let (k1u, k1v) = rhs(u, v);
        let (k2u, k2v) = rhs(u + k1u * (0.5 * h), v + k1v * (0.5 * h));
        let (k3u, k3v) = rhs(u + k2u * (0.5 * h), v + k2v * (0.5 * h));
        let (k4u, k4v) = rhs(u + k3u * h, v + k3v * h);
        u += (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        let e_next = energy(u, v);
        if e_next > e * (1.0 + 1e-8) + f64::MIN_POSITIVE {
            return Err(Error::Instability(format!(
                "mode energy grew by {:.3e} relative at step {k}",
                e_next / e - 1.0
            )));
        }
        e = e_next;
        if k % stride == 0 || k == steps {
            samples.push((k as f64 * h, [u.re, u.im], [v.re, v.im]));
        }
    }
    Ok(OdeRun {
        r,
        l,
        dt: h,
        horizon,
        steps,
        samples,
        final_u: u,
        final_v: v,
    })
}

/// `|(w Δu, Δv)| / |(w u, v)|` with `w = r`, or `w = 1` at `r = 0`.
pub fn mode_relative_error(r: f64, u: Complex64, v: Complex64, u_ref: Complex64, v_ref: Complex64) -> f64 {
    let w = if r > 0.0 { r } else { 1.0 };
    let num = (w * w * (u - u_ref).norm_sqr() + (v - v_ref).norm_sqr()).sqrt();
    let den = (w * w * u_ref.norm_sqr() + v_ref.norm_sqr()).sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Composite trapezoid rule with `m` intervals on `[a, b]`.
pub fn brute_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let m = m.max(1);
    let h = (b - a) / m as f64;
    let mut acc = crate::sum::CompensatedSum::new();
    acc.add(0.5 * (f(a) + f(b)));
    for k in 1..m {
        acc.add(f(a + h * k as f64));
    }
    acc.value() * h
}

/// Trapezoid rule on `[a, ∞)` after `x = a + s/(1 − s)`. The integrand must
/// decay faster than `x^{−2}`.
pub fn brute_quadrature_half_line<F: Fn(f64) -> f64>(f: F, a: f64, m: usize) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            0.0
        } else {
            let d = 1.0 - s;
            f(a + s / d) / (d * d)
        }
    };
    brute_quadrature(g, 0.0, 1.0, m)
}
