//! Gamma and Beta functions, the Gauss series, and the integrals
//!
//! ```text
//! I_{μ;x₁,x₂}(t) = ∫_{x₁}^{x₂} x^{μ−1} (1 + x)^{−t} dx
//! ```
//!
//! together with their large-`t` limits.

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};
use crate::quadrature::gk;

/// One point of a convergence study `lhs(t) → limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCheck {
    pub t: f64,
    pub lhs: f64,
    pub limit: f64,
    pub relerr: f64,
}

impl AsymptoticCheck {
    fn new(t: f64, lhs: f64, limit: f64) -> Self {
        Self {
            t,
            lhs,
            limit,
            relerr: (lhs / limit - 1.0).abs(),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {x}"))
    }
}

pub fn gamma_fn(x: f64) -> Result<f64> {
    positive("gamma argument", x)?;
    Ok(gamma(x))
}

pub fn ln_gamma_fn(x: f64) -> Result<f64> {
    positive("gamma argument", x)?;
    Ok(ln_gamma(x))
}

/// `ln B(a, b)`.
pub fn ln_beta_fn(a: f64, b: f64) -> Result<f64> {
    positive("beta argument", a)?;
    positive("beta argument", b)?;
    let (small, big) = if a < b { (a, b) } else { (b, a) };
    if big >= STIRLING_MIN {
        Ok(ln_gamma(small) - ln_gamma_diff(big, small))
    } else {
        Ok(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
    }
}

const STIRLING_MIN: f64 = 20.0;

/// `B_{2k}/(2k(2k − 1))`, the Stirling series coefficients.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn stirling_tail(y: f64) -> f64 {
    let w = 1.0 / (y * y);
    STIRLING.iter().rev().fold(0.0, |acc, c| acc * w + c) / y
}

/// `ln Γ(x + a) − ln Γ(x)` without forming the two large logarithms when
/// both arguments are at least 20.
fn ln_gamma_diff(x: f64, a: f64) -> f64 {
    if x.min(x + a) < STIRLING_MIN {
        return ln_gamma(x + a) - ln_gamma(x);
    }
    a * x.ln() + (x + a - 0.5) * (a / x).ln_1p() - a + (stirling_tail(x + a) - stirling_tail(x))
}

pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    positive("beta argument", a)?;
    positive("beta argument", b)?;
    if a.max(b) < STIRLING_MIN {
        Ok(gamma(a) * gamma(b) / gamma(a + b))
    } else {
        Ok(ln_beta_fn(a, b)?.exp())
    }
}

/// `I_{μ;0,∞}(t) = B(μ, t − μ)`.
pub fn i_mu_exact(mu: f64, t: f64) -> Result<f64> {
    positive("mu", mu)?;
    if !(t > mu) {
        return Err(Error::Divergence(format!(
            "I_mu(0, inf) needs t > mu, got mu = {mu}, t = {t}"
        )));
    }
    beta_fn(mu, t - mu)
}

fn ln_i_mu_exact(mu: f64, t: f64) -> Result<f64> {
    positive("mu", mu)?;
    if !(t > mu) {
        return Err(Error::Divergence(format!(
            "I_mu(0, inf) needs t > mu, got mu = {mu}, t = {t}"
        )));
    }
    ln_beta_fn(mu, t - mu)
}

const QUAD_TOL: f64 = 1e-10;
/// Integrand drop, in e-folds below its peak, treated as negligible.
const DROP: f64 = 46.0;

/// `ln I_{μ;x₁,x₂}(t)` by adaptive quadrature.
///
/// With `x = e^y` the integrand becomes `exp(μy − t·ln(1 + e^y))`, whose
/// exponent is concave in `y`. That removes the `x^{μ−1}` endpoint
/// singularity, bounds both tails by exponentials, and lets the peak value be
/// factored out so that very small integrals stay representable.
pub fn ln_i_mu_quad(mu: f64, x1: f64, x2: f64, t: f64) -> Result<f64> {
    if !(mu.is_finite() && t.is_finite() && t > 0.0) {
        return domain(format!("need finite mu and t > 0, got mu = {mu}, t = {t}"));
    }
    if !(x1 >= 0.0 && x1.is_finite() && x2 > x1) {
        return domain(format!("need 0 <= x1 < x2, got x1 = {x1}, x2 = {x2}"));
    }
    if x1 == 0.0 && mu <= 0.0 {
        return domain(format!("x1 = 0 requires mu > 0, got mu = {mu}"));
    }
    if x2.is_infinite() && t <= mu {
        return domain(format!("x2 = inf requires t > mu, got mu = {mu}, t = {t}"));
    }
    let phi = |y: f64| mu * y - t * softplus(y);
    let slope = |y: f64| mu - t / (1.0 + (-y).exp());

    // concave: the maximum over the range sits at the clamped stationary point
    let y_star = if t > mu && mu > 0.0 {
        (mu / (t - mu)).ln()
    } else if mu <= 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    let lo_end = if x1 > 0.0 { x1.ln() } else { f64::NEG_INFINITY };
    let hi_end = if x2.is_finite() { x2.ln() } else { f64::INFINITY };
    let y_max = y_star.clamp(lo_end, hi_end);
    let peak = phi(y_max);

    let reach = |dir: f64, end: f64| -> f64 {
        if end.is_finite() {
            return end;
        }
        let s = slope(y_max).abs().max(1e-3);
        let mut d = 1.0 / s;
        while phi(y_max + dir * d) > peak - DROP {
            d *= 2.0;
        }
        y_max + dir * d
    };
    let lo = reach(-1.0, lo_end) - y_max;
    let hi = reach(1.0, hi_end) - y_max;
    // relative to the peak: φ(y_max + d) − φ(y_max) = μd − t·ln(1 + σ(y_max)(e^d − 1))
    let sigma = 1.0 / (1.0 + (-y_max).exp());
    let f = |d: f64| (mu * d - t * (sigma * d.exp_m1()).ln_1p()).exp();
    let mut breaks: Vec<f64> = (0..=32).map(|k| lo + (hi - lo) * k as f64 / 32.0).collect();
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
    }
    let res = gk::adaptive_breaks(&f, &breaks, 0.0, QUAD_TOL * 0.1, 20_000, true)?;
    Ok(peak + res.value.ln())
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// `I_{μ;x₁,x₂}(t)`; `x2 = f64::INFINITY` selects the half line.
pub fn i_mu_quad(mu: f64, x1: f64, x2: f64, t: f64) -> Result<f64> {
    Ok(ln_i_mu_quad(mu, x1, x2, t)?.exp())
}

/// `₂F₁(a, b; c; z)` for `|z| < 1`. Negative `z` goes through
/// `₂F₁(a, b; c; z) = (1 − z)^{−a} ₂F₁(a, c − b; c; z/(z − 1))` (or the same
/// with `a` and `b` swapped) so the series runs on `(0, 1)`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return domain(format!("the series needs |z| < 1, got z = {z}"));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return domain(format!("c must not be a non-positive integer, got {c}"));
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        let negatives = |p: f64, q: f64| (p < 0.0) as u8 + (q < 0.0) as u8;
        let (keep, other) = if negatives(a, c - b) <= negatives(b, c - a) { (a, b) } else { (b, a) };
        return Ok((1.0 - z).powf(-keep) * gauss_series(keep, c - other, c, w)?);
    }
    gauss_series(a, b, c, z)
}

fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = crate::sum::CompensatedSum::new();
    sum.add(1.0);
    for n in 0..100_000 {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum.add(term);
        if term == 0.0 || term.abs() < 1e-14 * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::NoConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) did not converge in 1e5 terms"
    )))
}

/// `t^s Γ(t − s)/Γ(t)`, which tends to 1.
pub fn gautschi_ratio(t: f64, s: f64) -> Result<AsymptoticCheck> {
    if !(0.0..=1.0).contains(&s) || !(t > s) {
        return domain(format!("need 0 <= s <= 1 and t > s, got t = {t}, s = {s}"));
    }
    let lhs = if s == 0.0 {
        1.0
    } else if s == 1.0 {
        t / (t - 1.0)
    } else {
        (s * t.ln() - ln_gamma_diff(t - s, s)).exp()
    };
    Ok(AsymptoticCheck::new(t, lhs, 1.0))
}

/// Which large-`t` limit to study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    /// `t^μ I_{μ;0,x₂}(t) → Γ(μ)`
    Origin { mu: f64, x2: f64 },
    /// `(1 + x₁)^{t−1} t I_{μ;x₁,x₂}(t) → x₁^{μ−1}`
    Shifted { mu: f64, x1: f64, x2: f64 },
    /// `t^{(p+1)/(2θ)} ∫₀^{η₂} (1 + r^{2θ})^{−t} r^p dr → Γ((p+1)/(2θ))/(2θ)`
    Radial { p: f64, theta: f64, eta2: f64 },
    /// `(1 + η^{2θ})^{t−1} t ∫_η^{η₂} (1 + r^{2θ})^{−t} r^p dr → η^{p+1−2θ}/(2θ)`
    RadialShifted { eta: f64, p: f64, theta: f64, eta2: f64 },
}

/// `t ∈ {10², 10^{2.5}, …, 10⁶}`
pub fn default_t_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect()
}

fn ln_i_mu(mu: f64, x1: f64, x2: f64, t: f64) -> Result<f64> {
    if x1 == 0.0 && x2.is_infinite() {
        ln_i_mu_exact(mu, t)
    } else {
        ln_i_mu_quad(mu, x1, x2, t)
    }
}

/// Scaled quantity and its predicted limit along `t_grid`.
pub fn limit_checks(kind: LimitKind, t_grid: &[f64]) -> Result<Vec<AsymptoticCheck>> {
    t_grid
        .iter()
        .map(|&t| {
            let (ln_lhs, limit) = match kind {
                LimitKind::Origin { mu, x2 } => {
                    positive("mu", mu)?;
                    (mu * t.ln() + ln_i_mu(mu, 0.0, x2, t)?, gamma_fn(mu)?)
                }
                LimitKind::Shifted { mu, x1, x2 } => {
                    positive("x1", x1)?;
                    let ln_i = ln_i_mu(mu, x1, x2, t)?;
                    ((t - 1.0) * x1.ln_1p() + t.ln() + ln_i, x1.powf(mu - 1.0))
                }
                LimitKind::Radial { p, theta, eta2 } => {
                    positive("theta", theta)?;
                    if p <= -1.0 {
                        return domain(format!("need p > -1, got {p}"));
                    }
                    let mu = (p + 1.0) / (2.0 * theta);
                    let x2 = eta2.powf(2.0 * theta);
                    let ln_i = ln_i_mu(mu, 0.0, x2, t)? - (2.0 * theta).ln();
                    (mu * t.ln() + ln_i, gamma_fn(mu)? / (2.0 * theta))
                }
                LimitKind::RadialShifted { eta, p, theta, eta2 } => {
                    positive("theta", theta)?;
                    positive("eta", eta)?;
                    let mu = (p + 1.0) / (2.0 * theta);
                    let x1 = eta.powf(2.0 * theta);
                    let x2 = eta2.powf(2.0 * theta);
                    let ln_i = ln_i_mu(mu, x1, x2, t)? - (2.0 * theta).ln();
                    (
                        (t - 1.0) * x1.ln_1p() + t.ln() + ln_i,
                        eta.powf(p + 1.0 - 2.0 * theta) / (2.0 * theta),
                    )
                }
            };
            Ok(AsymptoticCheck::new(t, ln_lhs.exp(), limit))
        })
        .collect()
}

/// Which integral representation of `A_{n,θ}` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AConstForm {
    /// `∫₀^∞ e^{−s^{2θ}} s^{n−3} ds = Γ((n−2)/(2θ))/(2θ)`, needs `n > 2`
    HalfLine,
    /// `∫₀¹ s^{(3θ+n−2)/θ} e^{−s²} ds`
    UnitInterval,
}

pub fn a_const(n: u32, theta: f64, form: AConstForm) -> Result<f64> {
    positive("theta", theta)?;
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    match form {
        AConstForm::HalfLine => {
            if n <= 2 {
                return Err(Error::Divergence(format!(
                    "the integrand s^(n-3) is not integrable at 0 for n = {n}"
                )));
            }
            Ok(gamma_fn((n as f64 - 2.0) / (2.0 * theta))? / (2.0 * theta))
        }
        AConstForm::UnitInterval => {
            let k = (3.0 * theta + n as f64 - 2.0) / theta;
            let f = |s: f64| s.powf(k) * (-s * s).exp();
            Ok(gk::adaptive(&f, 0.0, 1.0, 1e-15, 1e-13)?.value)
        }
    }
}
