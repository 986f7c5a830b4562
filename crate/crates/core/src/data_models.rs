//! Initial data with closed-form Fourier transforms.
//!
//! The transform convention is `û(ξ) = ∫ e^{−ix·ξ} u(x) dx`, so `P₁ = û₁(0)`
//! is the mass of the datum. Each entry also knows the weighted norms
//! `‖u₁‖_{1,κ} = ∫ (1 + |x|^κ)|u₁| dx`, its L² norm, and enough about the
//! decay of `û₁` to bound quadrature tails.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{gk, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DatumKind {
    /// `e^{−|x|²/(2σ²)}`
    Gaussian { sigma: f64 },
    /// `e^{−|x − x₀|²/(2σ²)}` with `|x₀| = shift`; not radial, so the Fourier
    /// transform picks up the phase `e^{−iξ·x₀}`.
    ShiftedGaussian { sigma: f64, shift: f64 },
    /// Indicator of `[−h, h]`, `n = 1`.
    Box { h: f64 },
    /// Indicator of the ball of radius `h`, `n = 3`.
    Ball { h: f64 },
    /// The measure `P₁ δ₀`; not in L², so only profile and residual studies
    /// accept it.
    DeltaLike { p1: f64 },
}

/// An initial velocity `u₁` together with its moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatumSpec {
    pub kind: DatumKind,
    pub n: u32,
    /// `û₁(0) = ∫ u₁`
    pub p1: f64,
    pub norm_l1: f64,
    /// `‖u₁‖_{1,1}`
    pub norm_11: f64,
    /// `+∞` when the datum is not in L².
    pub norm_l2: f64,
    /// `‖u₁‖_{1,1} + ‖u₁‖_{L²}`
    pub i0: f64,
    pub in_l2: bool,
}

/// `û₁(ξ) = P₁ + A₁(ξ) − iB₁(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub p1: f64,
    pub a1: f64,
    pub b1: f64,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Datum(format!("{name} must be positive and finite, got {x}")))
    }
}

/// `1 − j_n(ρ)` for the angular mean `j_n` of `cos(ξ·x)` over the sphere.
fn one_minus_j(n: u32, rho: f64) -> f64 {
    match n {
        1 => {
            let s = (0.5 * rho).sin();
            2.0 * s * s
        }
        _ => {
            if rho < 1e-2 {
                let r2 = rho * rho;
                r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0))
            } else {
                (rho - rho.sin()) / rho
            }
        }
    }
}

impl DatumSpec {
    fn build(kind: DatumKind, n: u32) -> Result<Self> {
        let (p1, norm_l1, norm_l2) = match kind {
            DatumKind::Gaussian { sigma } | DatumKind::ShiftedGaussian { sigma, .. } => {
                let s2 = sigma * sigma;
                let p1 = (2.0 * PI * s2).powf(0.5 * n as f64);
                (p1, p1, (PI * s2).powf(0.25 * n as f64))
            }
            DatumKind::Box { h } => (2.0 * h, 2.0 * h, (2.0 * h).sqrt()),
            DatumKind::Ball { h } => {
                let p1 = 4.0 * PI * h.powi(3) / 3.0;
                (p1, p1, p1.sqrt())
            }
            DatumKind::DeltaLike { p1 } => (p1, p1.abs(), f64::INFINITY),
        };
        let mut spec = Self {
            kind,
            n,
            p1,
            norm_l1,
            norm_11: 0.0,
            norm_l2,
            i0: 0.0,
            in_l2: norm_l2.is_finite(),
        };
        spec.norm_11 = spec.norm_1k(1.0)?;
        spec.i0 = spec.norm_11 + spec.norm_l2;
        Ok(spec)
    }

    /// `‖u₁‖_{1,κ}` for `κ ∈ [0, 1]`.
    pub fn norm_1k(&self, kappa: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::Datum(format!("kappa must lie in [0, 1], got {kappa}")));
        }
        let n = self.n as f64;
        Ok(match self.kind {
            DatumKind::Gaussian { sigma } => {
                let m = 0.5 * (n + kappa);
                self.p1 + 0.5 * sphere_area(self.n) * (2.0 * sigma * sigma).powf(m) * ln_gamma(m).exp()
            }
            DatumKind::ShiftedGaussian { sigma, shift } => {
                self.p1 + shifted_moment(self.n, sigma, shift, kappa)?
            }
            DatumKind::Box { h } => 2.0 * h + 2.0 * h.powf(kappa + 1.0) / (kappa + 1.0),
            DatumKind::Ball { h } => self.p1 + 4.0 * PI * h.powf(kappa + 3.0) / (kappa + 3.0),
            DatumKind::DeltaLike { p1 } => {
                // |x|^κ vanishes on the support except for κ = 0
                if kappa == 0.0 {
                    2.0 * p1.abs()
                } else {
                    p1.abs()
                }
            }
        })
    }

    /// Short identifier used in reports, e.g. `gaussian:sigma=1`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    /// Radial amplitude `c(r)`: `û₁` itself for radial data, `|û₁|` for the
    /// shifted Gaussian.
    pub fn radial(&self, r: f64) -> f64 {
        match self.kind {
            DatumKind::Gaussian { sigma } | DatumKind::ShiftedGaussian { sigma, .. } => {
                self.p1 * (-0.5 * sigma * sigma * r * r).exp()
            }
            DatumKind::Box { h } => {
                let x = h * r;
                if x < 1e-4 {
                    2.0 * h * (1.0 - x * x / 6.0)
                } else {
                    2.0 * x.sin() / r
                }
            }
            DatumKind::Ball { h } => {
                let x = h * r;
                let shape = if x < 1e-2 {
                    let x2 = x * x;
                    1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
                } else {
                    (x.sin() - x * x.cos()) / (x * x * x)
                };
                4.0 * PI * h.powi(3) * shape
            }
            DatumKind::DeltaLike { p1 } => p1,
        }
    }

    /// `(c(r), c(r) − ⟨Re û₁⟩(r))`, where `⟨·⟩` is the mean over the sphere
    /// `|ξ| = r`. The second entry vanishes for radial data.
    ///
    /// For a real multiplier `m` and profile `P₁m₀` this gives the angular
    /// mean `⟨|û₁m − P₁m₀|²⟩ = (c m − P₁m₀)² + 2P₁ m m₀ (c − ⟨Re û₁⟩)` without
    /// cancellation.
    pub fn radial_parts(&self, r: f64) -> (f64, f64) {
        let c = self.radial(r);
        match self.kind {
            DatumKind::ShiftedGaussian { shift, .. } => (c, c * one_minus_j(self.n, r * shift)),
            _ => (c, 0.0),
        }
    }

    /// `û₁(ξ)` at `|ξ| = r`, with `ξ` parallel to the shift if there is one.
    pub fn fourier_along(&self, r: f64) -> Complex64 {
        let c = self.radial(r);
        match self.kind {
            DatumKind::ShiftedGaussian { shift, .. } => {
                let (s, co) = (r * shift).sin_cos();
                Complex64::new(c * co, -c * s)
            }
            _ => Complex64::new(c, 0.0),
        }
    }

    /// `sup_{r ≥ R} |û₁|`
    pub fn sup_beyond(&self, big_r: f64) -> f64 {
        match self.kind {
            DatumKind::Gaussian { .. } | DatumKind::ShiftedGaussian { .. } => self.radial(big_r),
            DatumKind::Box { h } => (2.0 * h).min(2.0 / big_r),
            DatumKind::Ball { h } => self.p1.min(4.0 * PI * (1.0 + h * big_r) / big_r.powi(3)),
            DatumKind::DeltaLike { p1 } => p1.abs(),
        }
    }

    /// `ln` of a bound on `∫_R^∞ |û₁|² r^{n−1} dr`.
    pub fn ln_l2_tail(&self, big_r: f64) -> f64 {
        match self.kind {
            DatumKind::Gaussian { sigma } | DatumKind::ShiftedGaussian { sigma, .. } => {
                // P₁² σ^{−n} Γ(n/2, σ²R²)/2
                let a = 0.5 * self.n as f64;
                let x = sigma * sigma * big_r * big_r;
                let ln_upper = if x > 50.0 {
                    // Γ(a, x) ≤ x^{a−1} e^{−x} / (1 − (a−1)/x) for x > a − 1
                    let corr = if a > 1.0 { -(1.0 - (a - 1.0) / x).ln() } else { 0.0 };
                    (a - 1.0) * x.ln() - x + corr
                } else {
                    gamma_ur(a, x).ln() + ln_gamma(a)
                };
                // the tiny additive margin absorbs rounding in the exact value
                2.0 * self.p1.ln() - self.n as f64 * sigma.ln() - 2f64.ln() + ln_upper + 1e-12
            }
            DatumKind::Box { .. } => (4.0 / big_r).ln(),
            DatumKind::Ball { h } => {
                let r = big_r;
                (16.0 * PI * PI * (1.0 / (3.0 * r.powi(3)) + h / (r * r) + h * h / r)).ln()
            }
            DatumKind::DeltaLike { .. } => f64::INFINITY,
        }
    }

    /// Oscillation frequency of `û₁` in `r`.
    pub fn freq(&self) -> f64 {
        match self.kind {
            DatumKind::Box { h } | DatumKind::Ball { h } => h,
            DatumKind::ShiftedGaussian { shift, .. } => shift,
            _ => 0.0,
        }
    }

    /// Radius beyond which `û₁` is negligible, `+∞` for slowly decaying data.
    pub fn scale(&self) -> f64 {
        match self.kind {
            DatumKind::Gaussian { sigma } | DatumKind::ShiftedGaussian { sigma, .. } => 1.0 / sigma,
            _ => f64::INFINITY,
        }
    }
}

impl fmt::Display for DatumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DatumKind::Gaussian { sigma } => write!(f, "gaussian:sigma={sigma}"),
            DatumKind::ShiftedGaussian { sigma, shift } => {
                write!(f, "shifted_gaussian:shift={shift},sigma={sigma}")
            }
            DatumKind::Box { h } => write!(f, "box:h={h}"),
            DatumKind::Ball { h } => write!(f, "ball:h={h}"),
            DatumKind::DeltaLike { p1 } => write!(f, "delta_like:p1={p1}"),
        }
    }
}

/// `∫ |x|^κ e^{−|x−x₀|²/(2σ²)} dx` with `|x₀| = shift`, for `n ∈ {1, 3}`.
fn shifted_moment(n: u32, sigma: f64, shift: f64, kappa: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    let reach = shift + 40.0 * sigma;
    match n {
        1 => {
            let f = |x: f64| x.abs().powf(kappa) * (-(x - shift) * (x - shift) / (2.0 * s2)).exp();
            let lo = shift - 40.0 * sigma;
            let mut breaks = vec![lo, reach];
            if lo < 0.0 {
                breaks.insert(1, 0.0);
            }
            Ok(gk::adaptive_breaks(&f, &breaks, 1e-300, 1e-13, 4000, true)?.value)
        }
        3 => {
            // mean of the Gaussian over the sphere of radius ρ:
            // e^{−(ρ−s)²/(2σ²)} (1 − e^{−2ρs/σ²}) / (2ρs/σ²)
            let f = |rho: f64| {
                let z = 2.0 * rho * shift / s2;
                let shell = if z == 0.0 {
                    1.0
                } else {
                    -(-z).exp_m1() / z
                };
                4.0 * PI
                    * rho.powf(kappa + 2.0)
                    * (-(rho - shift) * (rho - shift) / (2.0 * s2)).exp()
                    * shell
            };
            Ok(gk::adaptive_breaks(&f, &[0.0, shift, reach], 1e-300, 1e-13, 4000, true)?.value)
        }
        _ => Err(Error::Datum(format!(
            "shifted_gaussian is available for n = 1 and n = 3, not n = {n}"
        ))),
    }
}

/// Build a catalog entry from its name and `key=value` parameters.
pub fn catalog(name: &str, params: &[(String, f64)], n: u32) -> Result<DatumSpec> {
    if n == 0 {
        return Err(Error::Datum("dimension must be at least 1".into()));
    }
    let get = |key: &str, default: f64| -> Result<f64> {
        let mut found = None;
        for (k, v) in params {
            if k == key {
                found = Some(*v);
            }
        }
        Ok(found.unwrap_or(default))
    };
    let allowed: &[&str] = match name {
        "gaussian" => &["sigma"],
        "shifted_gaussian" => &["sigma", "shift"],
        "box" | "ball" => &["h"],
        "delta_like" => &["p1"],
        other => return Err(Error::Datum(format!("unknown datum `{other}`"))),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::Datum(format!("datum `{name}` has no parameter `{k}`")));
    }
    let kind = match name {
        "gaussian" => DatumKind::Gaussian {
            sigma: positive("sigma", get("sigma", 1.0)?)?,
        },
        "shifted_gaussian" => {
            if n != 1 && n != 3 {
                return Err(Error::Datum(format!(
                    "shifted_gaussian is available for n = 1 and n = 3, not n = {n}"
                )));
            }
            DatumKind::ShiftedGaussian {
                sigma: positive("sigma", get("sigma", 1.0)?)?,
                shift: positive("shift", get("shift", 1.0)?)?,
            }
        }
        "box" => {
            if n != 1 {
                return Err(Error::Datum(format!("box is one-dimensional, got n = {n}")));
            }
            DatumKind::Box {
                h: positive("h", get("h", 1.0)?)?,
            }
        }
        "ball" => {
            if n != 3 {
                return Err(Error::Datum(format!("ball is three-dimensional, got n = {n}")));
            }
            DatumKind::Ball {
                h: positive("h", get("h", 1.0)?)?,
            }
        }
        _ => {
            let p1 = get("p1", 1.0)?;
            if !(p1.is_finite() && p1 != 0.0) {
                return Err(Error::Datum(format!("p1 must be finite and non-zero, got {p1}")));
            }
            DatumKind::DeltaLike { p1 }
        }
    };
    DatumSpec::build(kind, n)
}

/// Parse `name` or `name:key=value,key=value`.
pub fn parse(text: &str, n: u32) -> Result<DatumSpec> {
    let text = text.trim();
    let (name, rest) = match text.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, ""),
    };
    let mut params = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Datum(format!("expected key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Datum(format!("`{}` is not a number", v.trim())))?;
        params.push((k.trim().to_string(), v));
    }
    catalog(name, &params, n)
}

/// `A₁ = Re û₁ − P₁`, `B₁ = −Im û₁` at `|ξ| = r` (along the shift if any).
pub fn decompose(datum: &DatumSpec, xi_r: f64) -> Decomposition {
    if xi_r == 0.0 {
        return Decomposition {
            p1: datum.p1,
            a1: 0.0,
            b1: 0.0,
        };
    }
    let z = datum.fourier_along(xi_r);
    let a1 = match datum.kind {
        // Re û₁ − P₁ without cancellation for the smooth Gaussians
        DatumKind::Gaussian { sigma } => datum.p1 * (-0.5 * sigma * sigma * xi_r * xi_r).exp_m1(),
        _ => z.re - datum.p1,
    };
    Decomposition {
        p1: datum.p1,
        a1,
        b1: -z.im,
    }
}

/// Empirical constants `K̂ = max |A₁|/(r^κ ‖u₁‖_{1,κ})` and the same for `B₁`
/// over the positive radii of `r_grid`.
pub fn verify_moment_bounds(datum: &DatumSpec, kappa: f64, r_grid: &[f64]) -> Result<(f64, f64)> {
    let norm = datum.norm_1k(kappa)?;
    if !norm.is_finite() {
        return Err(Error::Datum("the weighted norm of this datum is infinite".into()));
    }
    let mut k_hat: f64 = 0.0;
    let mut m_hat: f64 = 0.0;
    for &r in r_grid.iter().filter(|&&r| r > 0.0) {
        let d = decompose(datum, r);
        let w = r.powf(kappa) * norm;
        k_hat = k_hat.max(d.a1.abs() / w);
        m_hat = m_hat.max(d.b1.abs() / w);
    }
    Ok((k_hat, m_hat))
}
