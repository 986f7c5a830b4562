//! Exact solution of a single Fourier mode and its asymptotic profiles.
//!
//! A mode with `û(0) = 0`, `û_t(0) = û₁` evolves as
//!
//! ```text
//! û(t)   = û₁ e^{−Lt/2} S(q, t)
//! û_t(t) = û₁ e^{−Lt/2} (C(q, t) − (L/2) S(q, t)),     q = r² − L²/4,
//! ```
//!
//! with `S = sin(√q t)/√q`, `C = cos(√q t)` continued analytically through
//! `q = 0` (where `S = t`, `C = 1`) to `sinh`/`cosh` for `q < 0`. Both
//! amplitudes are real multiples of `û₁`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::symbols::{log_symbol_unchecked, DampingParams};

/// Displacement and velocity of one Fourier mode at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeState {
    pub r: f64,
    pub t: f64,
    #[serde(serialize_with = "ser_complex")]
    pub u: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub v: Complex64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut tup = s.serialize_tuple(2)?;
    tup.serialize_element(&z.re)?;
    tup.serialize_element(&z.im)?;
    tup.end()
}

impl ModeState {
    pub fn initial(r: f64, u1hat: Complex64) -> Self {
        Self {
            r,
            t: 0.0,
            u: Complex64::new(0.0, 0.0),
            v: u1hat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `P₁ e^{−tL/2} sin(rt)/r`
    Displacement,
    /// `P₁ e^{−tL/2} cos(rt)`
    Velocity,
}

const SERIES_CUTOFF: f64 = 1e-4;

/// `(S, C)` as power series in `x = −q t²`; valid for `|x|` small.
fn kernel_series(q: f64, t: f64) -> (f64, f64) {
    let x = -q * t * t;
    // S/t = Σ x^k/(2k+1)!,  C = Σ x^k/(2k)!
    let (mut s, mut c) = (1.0, 1.0);
    let (mut ts, mut tc) = (1.0, 1.0);
    for k in 1..8 {
        let k = k as f64;
        tc *= x / ((2.0 * k - 1.0) * (2.0 * k));
        ts *= x / ((2.0 * k) * (2.0 * k + 1.0));
        c += tc;
        s += ts;
    }
    (t * s, c)
}

/// Real multipliers `(m_u, m_v)` with `û = m_u û₁`, `û_t = m_v û₁`, each
/// scaled by `e^{log_shift}`. The shift is folded into the exponent before
/// exponentiation so that `log_shift ≈ γt` keeps high-frequency values
/// representable at large `t`.
pub(crate) fn multipliers_from(r: f64, l: f64, t: f64, log_shift: f64) -> (f64, f64) {
    let a = 0.5 * l;
    let q = (r - a) * (r + a);
    if q.abs() * t * t < SERIES_CUTOFF {
        let (s, c) = kernel_series(q, t);
        let e = (log_shift - a * t).exp();
        return (e * s, e * (c - a * s));
    }
    if q > 0.0 {
        let w = q.sqrt();
        let (sn, cs) = (w * t).sin_cos();
        let e = (log_shift - a * t).exp();
        let s = sn / w;
        (e * s, e * (cs - a * s))
    } else {
        let kappa = (-q).sqrt();
        let minus = -(a + kappa);
        let plus = r * r / minus;
        let e = (log_shift + plus * t).exp();
        let decay = (-2.0 * kappa * t).exp();
        let mu = e * (-(-2.0 * kappa * t).exp_m1()) / (2.0 * kappa);
        let mv = e * (plus - minus * decay) / (2.0 * kappa);
        (mu, mv)
    }
}

/// `sin(rt)/r` with its `r → 0` limit.
fn sinc_t(r: f64, t: f64) -> f64 {
    let x = r * t;
    if x.abs() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        (x).sin() / r
    }
}

/// Profile multipliers `(sin(rt)/r, cos(rt))·e^{−tL/2 + log_shift}`.
pub(crate) fn profile_multipliers_from(r: f64, l: f64, t: f64, log_shift: f64) -> (f64, f64) {
    let e = (log_shift - 0.5 * l * t).exp();
    (e * sinc_t(r, t), e * (r * t).cos())
}

fn check(r: f64, t: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return domain(format!("radius must be finite and non-negative, got {r}"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return domain(format!("time must be finite and non-negative, got {t}"));
    }
    Ok(())
}

/// `(m_u, m_v)` such that the mode is `(m_u û₁, m_v û₁)`.
pub fn mode_multipliers(r: f64, params: &DampingParams, t: f64) -> Result<(f64, f64)> {
    check(r, t)?;
    Ok(multipliers_from(r, log_symbol_unchecked(r, params.theta()), t, 0.0))
}

pub fn mode_solution(r: f64, params: &DampingParams, t: f64, u1hat: Complex64) -> Result<ModeState> {
    let (mu, mv) = mode_multipliers(r, params, t)?;
    Ok(ModeState {
        r,
        t,
        u: u1hat * mu,
        v: u1hat * mv,
    })
}

pub fn profile(kind: ProfileKind, r: f64, params: &DampingParams, t: f64, p1: f64) -> Result<Complex64> {
    check(r, t)?;
    let (d, v) = profile_multipliers_from(r, log_symbol_unchecked(r, params.theta()), t, 0.0);
    let m = match kind {
        ProfileKind::Displacement => d,
        ProfileKind::Velocity => v,
    };
    Ok(Complex64::new(p1 * m, 0.0))
}

/// Mode minus profile, by direct subtraction.
pub fn residual(
    kind: ProfileKind,
    r: f64,
    params: &DampingParams,
    t: f64,
    u1hat: Complex64,
    p1: f64,
) -> Result<Complex64> {
    let state = mode_solution(r, params, t, u1hat)?;
    let prof = profile(kind, r, params, t, p1)?;
    Ok(match kind {
        ProfileKind::Displacement => state.u - prof,
        ProfileKind::Velocity => state.v - prof,
    })
}

/// `½(|û_t|² + r²|û|²)`
pub fn mode_energy(state: &ModeState) -> f64 {
    0.5 * (state.v.norm_sqr() + state.r * state.r * state.u.norm_sqr())
}
