//! Symbols of the damped wave operator in Fourier variables.
//!
//! For a radial frequency `r = |ξ|` the damping multiplier is
//! `L(r) = ln(1 + r^{2θ})` and the elastic symbol is `r²`, so every Fourier
//! mode solves `y'' + L y' + r² y = 0` with characteristic roots
//! `λ± = (−L ± √(L² − 4r²)) / 2`.
//!
//! The roots are complex near the origin (for `θ > 1/2`) and far out, and may
//! be real on bands of intermediate frequency when `θ` is large.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Damping exponent together with the knobs that pin down derived thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampingParams {
    theta: f64,
    /// Constant in the low-frequency bound `|(b − r)/b| ≤ C r^{4θ−2}`.
    pub delta1_constant: f64,
    /// Relative width of the double-root band: `|disc| < tol · max(4r², L²)`.
    pub branch_tol: f64,
    /// Absolute tolerance of every threshold bisection.
    pub search_tol: f64,
}

impl DampingParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return domain(format!("theta must be a positive finite number, got {theta}"));
        }
        Ok(Self {
            theta,
            delta1_constant: 1.0,
            branch_tol: 1e-10,
            search_tol: 1e-10,
        })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Reject `θ ≤ 1/2`, the range where the low-frequency analysis breaks.
    pub fn require_above_half(&self) -> Result<()> {
        if self.theta > 0.5 {
            Ok(())
        } else {
            Err(Error::UnsupportedParameter(format!(
                "theta = {} but the low-frequency results require theta > 1/2",
                self.theta
            )))
        }
    }
}

/// Which kind of characteristic roots a frequency has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `4r² − L² > 0`: a damped oscillation.
    Complex,
    /// `4r² ≈ L²` within the branch tolerance.
    Double,
    /// `4r² − L² < 0`: overdamped.
    Real,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Complex => "complex",
            Branch::Double => "double",
            Branch::Real => "real",
        }
    }
}

/// All symbol values at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolEval {
    pub r: f64,
    /// `ln(1 + r^{2θ})`
    pub l: f64,
    /// `L / 2`
    pub a: f64,
    /// `4r² − L²`
    pub disc: f64,
    pub branch: Branch,
}

/// Frequency thresholds splitting the low- and high-frequency zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Largest radius `≤ 1` with `g ≤ 1/2` on `(0, δ₀]`.
    pub delta0: f64,
    /// Largest radius `≤ δ₀` on which `|(b − r)/b| ≤ C r^{4θ−2}`.
    pub delta1: f64,
    /// Smallest `B ≥ 1` with `L(r) ≤ r` for every `r ≥ B`.
    pub big_b: f64,
    /// `inf_{r ≥ δ₁} Re(−λ₊(r))`.
    pub gamma: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        domain(format!("radius must be finite and non-negative, got {r}"))
    }
}

#[inline]
pub(crate) fn log_symbol_unchecked(r: f64, theta: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.powf(2.0 * theta).ln_1p()
    }
}

/// `L(r) = ln(1 + r^{2θ})`.
pub fn log_symbol(r: f64, params: &DampingParams) -> Result<f64> {
    check_radius(r)?;
    Ok(log_symbol_unchecked(r, params.theta))
}

/// `4r² − L(r)²`.
pub fn discriminant(r: f64, params: &DampingParams) -> Result<f64> {
    let l = log_symbol(r, params)?;
    Ok(4.0 * r * r - l * l)
}

fn classify(r: f64, l: f64, disc: f64, params: &DampingParams) -> Branch {
    if disc == 0.0 || disc.abs() < params.branch_tol * (4.0 * r * r).max(l * l) {
        Branch::Double
    } else if disc > 0.0 {
        Branch::Complex
    } else {
        Branch::Real
    }
}

pub fn evaluate(r: f64, params: &DampingParams) -> Result<SymbolEval> {
    let l = log_symbol(r, params)?;
    let disc = 4.0 * r * r - l * l;
    Ok(SymbolEval {
        r,
        l,
        a: 0.5 * l,
        disc,
        branch: classify(r, l, disc, params),
    })
}

/// Roots `(λ₊, λ₋)` of `λ² + Lλ + r² = 0`, ordered by `Re λ₊ ≥ Re λ₋`.
///
/// Uses the sign of the exact discriminant; the branch tolerance only
/// affects labels, so Vieta's relations hold to rounding everywhere.
pub fn roots(r: f64, params: &DampingParams) -> Result<(Complex64, Complex64)> {
    let l = log_symbol(r, params)?;
    Ok(roots_from(r, l))
}

pub(crate) fn roots_from(r: f64, l: f64) -> (Complex64, Complex64) {
    let disc = 4.0 * r * r - l * l;
    if disc > 0.0 {
        let b = 0.5 * disc.sqrt();
        (Complex64::new(-0.5 * l, b), Complex64::new(-0.5 * l, -b))
    } else if disc == 0.0 {
        let x = Complex64::new(-0.5 * l, 0.0);
        (x, x)
    } else {
        // λ₋ carries the large magnitude; λ₊ = r²/λ₋ avoids cancellation.
        let minus = -0.5 * (l + (-disc).sqrt());
        let plus = r * r / minus;
        (Complex64::new(plus, 0.0), Complex64::new(minus, 0.0))
    }
}

/// `(a, b)` with `λ± = −a ± ib`; only defined on the complex branch.
pub fn ab(r: f64, params: &DampingParams) -> Result<(f64, f64)> {
    let s = evaluate(r, params)?;
    match s.branch {
        Branch::Complex => Ok((s.a, 0.5 * s.disc.sqrt())),
        other => Err(Error::Branch {
            r,
            message: format!("roots are on the {} branch; use `roots`", other.as_str()),
        }),
    }
}

/// `g(r) = L²/(4r²)` and `h(r) = −1/(1 − g + √(1 − g))`, so that
/// `(b − r)/b = g·h`.
pub fn g_h(r: f64, params: &DampingParams) -> Result<(f64, f64)> {
    check_radius(r)?;
    if r == 0.0 {
        return domain("g is defined for r > 0");
    }
    let g = g_unchecked(r, params.theta);
    if g >= 1.0 {
        return domain(format!("g(r) = {g} >= 1, b is undefined at r = {r}"));
    }
    let s = (1.0 - g).sqrt();
    Ok((g, -1.0 / (1.0 - g + s)))
}

#[inline]
fn g_unchecked(r: f64, theta: f64) -> f64 {
    let q = log_symbol_unchecked(r, theta) / (2.0 * r);
    q * q
}

/// `Re(−λ₊(r))`, the decay rate of the slowest component of mode `r`.
pub fn decay_rate(r: f64, params: &DampingParams) -> Result<f64> {
    let l = log_symbol(r, params)?;
    Ok(decay_rate_from(r, l))
}

pub(crate) fn decay_rate_from(r: f64, l: f64) -> f64 {
    let disc = 4.0 * r * r - l * l;
    if disc >= 0.0 {
        0.5 * l
    } else {
        2.0 * r * r / (l + (-disc).sqrt())
    }
}

fn bisect<F: Fn(f64) -> bool>(mut good: f64, mut bad: f64, tol: f64, is_good: F) -> f64 {
    while (bad - good).abs() > tol {
        let mid = 0.5 * (good + bad);
        if is_good(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

fn log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..=m)
        .map(|k| (a + (b - a) * k as f64 / m as f64).exp())
        .collect()
}

/// First radius in `(0, cap]` where `ok` fails, refined by bisection; `cap`
/// when it never fails on the scan.
fn first_violation<F: Fn(f64) -> bool>(cap: f64, tol: f64, ok: F) -> f64 {
    let grid = log_grid(1e-8 * cap, cap, 4096);
    let mut prev = grid[0];
    if !ok(prev) {
        return bisect(0.0, prev, tol, &ok);
    }
    for &r in &grid[1..] {
        if !ok(r) {
            return bisect(prev, r, tol, &ok);
        }
        prev = r;
    }
    cap
}

/// Smallest `B ≥ 1` with `L(r) ≤ r` for all `r ≥ B`. Defined for any `θ > 0`.
pub fn big_b(params: &DampingParams) -> f64 {
    let theta = params.theta;
    let excess = |r: f64| log_symbol_unchecked(r, theta) - r;
    // ln(1 + r^{2θ}) ≤ ln 2 + 2θ ln r for r ≥ 1
    let mut hi = 2.0_f64;
    while std::f64::consts::LN_2 + 2.0 * theta * hi.ln() > hi {
        hi *= 2.0;
    }
    let grid = log_grid(1.0, hi, 8192);
    match grid.iter().rposition(|&r| excess(r) > 0.0) {
        None => 1.0,
        Some(k) => {
            let bad = grid[k];
            let good = grid[(k + 1).min(grid.len() - 1)];
            bisect(good, bad, params.search_tol, |r| excess(r) <= 0.0)
        }
    }
}

/// `inf_{r ≥ r_lo} Re(−λ₊(r))`.
///
/// Above `B` the roots are complex and `a(r)` increases, so only `[r_lo, B]`
/// needs a scan; the minimum is refined by golden-section search.
pub fn min_decay_rate_above(r_lo: f64, params: &DampingParams) -> Result<f64> {
    check_radius(r_lo)?;
    let theta = params.theta;
    let rate = |r: f64| decay_rate_from(r, log_symbol_unchecked(r, theta));
    let b = big_b(params);
    if r_lo >= b {
        return Ok(rate(r_lo));
    }
    let m = 4000;
    let grid: Vec<f64> = (0..=m)
        .map(|k| r_lo + (b - r_lo) * k as f64 / m as f64)
        .collect();
    let (k, _) = grid
        .iter()
        .map(|&r| rate(r))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(m)];
    let refined = golden_min(lo, hi, params.search_tol, rate);
    Ok(refined.min(rate(grid[k])).min(rate(r_lo)).min(rate(b)))
}

fn golden_min<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64 {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Intervals of `(0, B]` where the characteristic roots are real.
pub fn real_bands(params: &DampingParams) -> Vec<(f64, f64)> {
    let theta = params.theta;
    let disc = |r: f64| {
        let l = log_symbol_unchecked(r, theta);
        4.0 * r * r - l * l
    };
    let b = big_b(params);
    let grid = log_grid(1e-8, b, 20_000);
    let mut bands = Vec::new();
    let mut start: Option<f64> = None;
    for w in grid.windows(2) {
        let (r0, r1) = (w[0], w[1]);
        match (disc(r0) < 0.0, disc(r1) < 0.0) {
            (false, true) => {
                start = Some(bisect(r1, r0, params.search_tol, |r| disc(r) < 0.0));
            }
            (true, false) => {
                let end = bisect(r0, r1, params.search_tol, |r| disc(r) < 0.0);
                bands.push((start.take().unwrap_or(0.0), end));
            }
            (true, true) if start.is_none() => start = Some(r0.min(1e-8)),
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((s, b));
    }
    bands
}

/// Frequency thresholds for `θ > 1/2`.
pub fn thresholds(params: &DampingParams) -> Result<Thresholds> {
    params.require_above_half()?;
    let theta = params.theta;
    let tol = params.search_tol;

    let delta0 = first_violation(1.0, tol, |r| g_unchecked(r, theta) <= 0.5);

    let c = params.delta1_constant;
    let holds = |r: f64| {
        let g = g_unchecked(r, theta);
        if g >= 1.0 {
            return false;
        }
        let h = 1.0 / (1.0 - g + (1.0 - g).sqrt());
        g * h <= c * r.powf(4.0 * theta - 2.0)
    };
    let delta1 = first_violation(delta0, tol, holds);

    let big_b = big_b(params);
    let gamma = min_decay_rate_above(delta1, params)?;
    Ok(Thresholds {
        delta0,
        delta1,
        big_b,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(theta: f64) -> DampingParams {
        DampingParams::new(theta).unwrap()
    }

    #[test]
    fn log_symbol_values() {
        assert_eq!(log_symbol(0.0, &p(1.0)).unwrap(), 0.0);
        assert_relative_eq!(log_symbol(1.0, &p(0.5)).unwrap(), std::f64::consts::LN_2);
        assert!(log_symbol(-1.0, &p(1.0)).is_err());
        assert!(DampingParams::new(0.0).is_err());
        assert!(DampingParams::new(f64::NAN).is_err());
    }

    #[test]
    fn log_symbol_keeps_accuracy_for_tiny_argument() {
        let l = log_symbol(1e-10, &p(1.0)).unwrap();
        assert_relative_eq!(l, 1e-20, max_relative = 1e-15);
    }

    #[test]
    fn discriminant_values() {
        assert_eq!(discriminant(0.0, &p(2.0)).unwrap(), 0.0);
        let ln2 = std::f64::consts::LN_2;
        assert_relative_eq!(discriminant(1.0, &p(1.0)).unwrap(), 4.0 - ln2 * ln2);
        let pr = p(0.6);
        for k in 1..=1000 {
            let r = k as f64 / 1000.0;
            assert!(discriminant(r, &pr).unwrap() > 0.0);
        }
    }

    #[test]
    fn roots_at_one() {
        let (lp, lm) = roots(1.0, &p(1.0)).unwrap();
        // 50-digit evaluation of the closed form
        let re = -0.346_573_590_279_972_654_708_616_060_729_088_3;
        let im = 0.938_022_785_714_957_802_609_272_283_778_508_9;
        assert_relative_eq!(lp.re, re, max_relative = 1e-15);
        assert_relative_eq!(lp.im, im, max_relative = 1e-15);
        assert_relative_eq!(lm.im, -im, max_relative = 1e-15);
        let (z0, z1) = roots(0.0, &p(1.0)).unwrap();
        assert_eq!(z0, Complex64::new(0.0, 0.0));
        assert_eq!(z1, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn real_roots_when_overdamped() {
        let pr = p(3.0);
        let s = evaluate(2.0, &pr).unwrap();
        assert_eq!(s.branch, Branch::Real);
        let (lp, lm) = roots(2.0, &pr).unwrap();
        assert!(lp.re >= lm.re && lp.re < 0.0);
        assert_eq!(lp.im, 0.0);
        assert!(ab(2.0, &pr).is_err());
    }

    #[test]
    fn ab_values_and_small_r_limit() {
        let (a, b) = ab(1.0, &p(1.0)).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert_relative_eq!(a, ln2 / 2.0);
        assert_relative_eq!(b, 0.5 * (4.0 - ln2 * ln2).sqrt());
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let r = 10f64.powi(-k);
            let (_, b) = ab(r, &p(1.0)).unwrap();
            let dev = (b / r - 1.0).abs();
            assert!(dev <= prev || dev < 1e-15);
            prev = dev;
        }
        assert!(prev < 1e-15);
    }

    #[test]
    fn g_h_limits() {
        let pr = p(0.75);
        let r = 1e-6;
        let (g, h) = g_h(r, &pr).unwrap();
        assert!(g < 1e-5);
        assert_relative_eq!(h.abs(), 0.5, max_relative = 1e-5);
        assert_relative_eq!(g / r.powf(4.0 * 0.75 - 2.0), 0.25, max_relative = 1e-5);
        assert!(g_h(0.0, &pr).is_err());
        assert!(g_h(2.0, &p(3.0)).is_err());
    }

    #[test]
    fn g_h_reproduces_relative_gap() {
        let pr = p(1.3);
        for k in 1..200 {
            let r = k as f64 * 0.005;
            let (g, h) = g_h(r, &pr).unwrap();
            let (_, b) = ab(r, &pr).unwrap();
            // the direct quotient cancels, so compare absolutely
            let direct = (b - r) / b;
            assert!((g * h - direct).abs() < 1e-15, "r = {r}");
        }
    }

    #[test]
    fn thresholds_theta_one() {
        let pr = p(1.0);
        let th = thresholds(&pr).unwrap();
        // g ≤ r^{4θ−2}/4 ≤ 1/4 on (0, 1], so neither search is cut short
        assert_eq!(th.delta0, 1.0);
        assert_eq!(th.delta1, 1.0);
        // ln(1 + r²) < r for every r > 0
        assert_eq!(th.big_b, 1.0);
        assert_relative_eq!(th.gamma, std::f64::consts::LN_2 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn big_b_solves_defining_equation() {
        for theta in [1.5, 2.0, 3.0] {
            let pr = p(theta);
            let b = big_b(&pr);
            assert!(b > 1.0);
            assert!((log_symbol(b, &pr).unwrap() - b).abs() < 1e-8);
            for k in 1..500 {
                let r = b * (1.0 + k as f64 * 0.01);
                assert!(log_symbol(r, &pr).unwrap() <= r);
            }
        }
    }

    #[test]
    fn gamma_positive() {
        for theta in [0.6, 1.0, 2.0, 3.0] {
            let th = thresholds(&p(theta)).unwrap();
            assert!(th.gamma > 0.0, "theta = {theta}");
            assert!(th.delta1 <= th.delta0 && th.delta1 > 0.0);
        }
    }

    #[test]
    fn thresholds_reject_small_theta() {
        assert!(matches!(
            thresholds(&p(0.5)),
            Err(Error::UnsupportedParameter(_))
        ));
        assert!(big_b(&p(0.3)) >= 1.0);
    }

    #[test]
    fn bands_only_for_large_theta() {
        assert!(real_bands(&p(1.0)).is_empty());
        let bands = real_bands(&p(3.0));
        assert!(!bands.is_empty());
        for (lo, hi) in bands {
            let mid = 0.5 * (lo + hi);
            assert!(discriminant(mid, &p(3.0)).unwrap() < 0.0);
        }
    }

    #[test]
    fn high_frequency_discriminant_bound() {
        for theta in [1.5, 3.0] {
            let pr = p(theta);
            let b = big_b(&pr);
            for k in 0..400 {
                let r = b * (1.0 + 0.05 * k as f64);
                assert!(discriminant(r, &pr).unwrap() >= 2.0 * r * r);
                let (a, bb) = ab(r, &pr).unwrap();
                assert!(a / bb <= 1.0);
            }
        }
    }
}
