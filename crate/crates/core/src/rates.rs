//! Norm curves, rate fits and the theorem report.
//!
//! Every norm is a Plancherel integral of the squared mode amplitude. Quantities
//! are grouped so that `‖∇u‖` and `‖u_t‖` (and hence the energy) come from a
//! single set of panels. The fits work on `ln v` throughout, which keeps the
//! exponentially small high-frequency curves usable.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::data_models::{DatumKind, DatumSpec};
use crate::error::{domain, Error, Result};
use crate::exec::ExecPolicy;
use crate::propagator::{multipliers_from, profile_multipliers_from};
use crate::quadrature::{ln_power_tail, radial_integral_multi, RadialIntegrand, MAXK};
use crate::symbols::{log_symbol_unchecked, min_decay_rate_above, thresholds, DampingParams, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    #[serde(rename = "u_l2")]
    UL2,
    #[serde(rename = "grad_l2")]
    GradL2,
    #[serde(rename = "ut_l2")]
    UtL2,
    /// `E = ½(‖u_t‖² + ‖∇u‖²)`
    #[serde(rename = "energy")]
    Energy,
    /// `‖P₁ F⁻¹(e^{−tL/2} sin(rt)/r)‖`
    #[serde(rename = "profile_u")]
    ProfileU,
    /// `‖P₁ F⁻¹(e^{−tL/2} cos(rt))‖`
    #[serde(rename = "profile_ut")]
    ProfileUt,
    #[serde(rename = "residual_u")]
    ResidualU,
    #[serde(rename = "residual_ut")]
    ResidualUt,
    /// `‖u‖` restricted to `|ξ| ≥ δ₁`
    #[serde(rename = "highfreq_u")]
    HighfreqU,
    #[serde(rename = "highfreq_ut")]
    HighfreqUt,
}

impl Quantity {
    pub const ALL: [Quantity; 10] = [
        Quantity::UL2,
        Quantity::GradL2,
        Quantity::UtL2,
        Quantity::Energy,
        Quantity::ProfileU,
        Quantity::ProfileUt,
        Quantity::ResidualU,
        Quantity::ResidualUt,
        Quantity::HighfreqU,
        Quantity::HighfreqUt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::UL2 => "u_l2",
            Quantity::GradL2 => "grad_l2",
            Quantity::UtL2 => "ut_l2",
            Quantity::Energy => "energy",
            Quantity::ProfileU => "profile_u",
            Quantity::ProfileUt => "profile_ut",
            Quantity::ResidualU => "residual_u",
            Quantity::ResidualUt => "residual_ut",
            Quantity::HighfreqU => "highfreq_u",
            Quantity::HighfreqUt => "highfreq_ut",
        }
    }

    /// Quantities that make sense for a datum outside L².
    pub fn accepts_measure(self) -> bool {
        matches!(
            self,
            Quantity::ProfileU | Quantity::ProfileUt | Quantity::ResidualU | Quantity::ResidualUt
        )
    }

    fn is_highfreq(self) -> bool {
        matches!(self, Quantity::HighfreqU | Quantity::HighfreqUt)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown quantity '{s}'")))
    }
}

// ---------------------------------------------------------------------------
// spectral densities

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Comp {
    U,
    Grad,
    Ut,
    Pu,
    Pv,
    Ru,
    Rv,
}

fn components(q: Quantity) -> &'static [Comp] {
    match q {
        Quantity::UL2 | Quantity::HighfreqU => &[Comp::U],
        Quantity::HighfreqUt => &[Comp::Ut],
        Quantity::GradL2 | Quantity::UtL2 | Quantity::Energy => &[Comp::Grad, Comp::Ut],
        Quantity::ProfileU => &[Comp::Pu],
        Quantity::ProfileUt => &[Comp::Pv],
        Quantity::ResidualU => &[Comp::Ru],
        Quantity::ResidualUt => &[Comp::Rv],
    }
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Shared data for one time `t`.
struct Setup<'a> {
    datum: &'a DatumSpec,
    params: &'a DampingParams,
    th: &'a Thresholds,
    n: u32,
    t: f64,
    /// Every multiplier is scaled by `e^{shift}`.
    shift: f64,
}

impl Setup<'_> {
    fn density(&self, comps: &[Comp], r: f64, out: &mut [f64; MAXK]) {
        let theta = self.params.theta();
        let l = log_symbol_unchecked(r, theta);
        let (c, deficit) = self.datum.radial_parts(r);
        let p1 = self.datum.p1;
        let (mu, mv) = multipliers_from(r, l, self.t, self.shift);
        let (pu, pv) = profile_multipliers_from(r, l, self.t, self.shift);
        for (k, comp) in comps.iter().enumerate() {
            out[k] = match comp {
                Comp::U => (c * mu).powi(2),
                Comp::Grad => (r * c * mu).powi(2),
                Comp::Ut => (c * mv).powi(2),
                Comp::Pu => (p1 * pu).powi(2),
                Comp::Pv => (p1 * pv).powi(2),
                Comp::Ru => (c * mu - p1 * pu).powi(2) + 2.0 * p1 * mu * pu * deficit,
                Comp::Rv => (c * mv - p1 * pv).powi(2) + 2.0 * p1 * mv * pv * deficit,
            };
        }
    }

    fn ln_sup2(&self, r: f64) -> f64 {
        2.0 * self.datum.sup_beyond(r).abs().ln()
    }

    fn power_tail(&self, p: f64, r: f64) -> f64 {
        ln_power_tail(p, self.params.theta(), self.t, r)
    }

    /// `ln ∫_R^∞ |mode|² r^{n−1} dr` for `R ≥ B`, where the roots are
    /// complex with `a/w ≤ 1/√3`.
    fn mode_tail_beyond(&self, comp: Comp, r: f64) -> f64 {
        let n = self.n as f64;
        let (ln_k, p) = match comp {
            Comp::U => (LN_2, n - 3.0),
            Comp::Grad => (LN_2, n - 1.0),
            _ => (2.0 * LN_2, n - 1.0),
        };
        let by_sup = self.ln_sup2(r) + self.power_tail(p, r);
        let l = log_symbol_unchecked(r, self.params.theta());
        let by_l2 = self.datum.ln_l2_tail(r) - self.t * l;
        ln_k + 2.0 * self.shift + by_sup.min(by_l2)
    }

    fn mode_tail(&self, comp: Comp, r: f64) -> f64 {
        let b = self.th.big_b;
        if r >= b {
            return self.mode_tail_beyond(comp, r);
        }
        // on [R, B): |m_u| ≤ t e^{−γt}, |m_v| ≤ (1 + tB) e^{−γt}
        let gamma = min_decay_rate_above(r, self.params).unwrap_or(0.0);
        let t = self.t;
        let w = match comp {
            Comp::U => 2.0 * t.ln(),
            Comp::Grad => 2.0 * (t * b).ln(),
            _ => 2.0 * (t * b).ln_1p(),
        };
        let n = self.n as f64;
        let vol = ((b.powf(n) - r.powf(n)) / n).ln();
        let mass = (self.ln_sup2(r) + vol).min(self.datum.ln_l2_tail(r));
        let segment = w + 2.0 * self.shift - 2.0 * gamma * t + mass;
        logaddexp(segment, self.mode_tail_beyond(comp, b))
    }

    fn profile_tail(&self, comp: Comp, r: f64) -> f64 {
        let n = self.n as f64;
        let p = if comp == Comp::Pu { n - 3.0 } else { n - 1.0 };
        2.0 * self.datum.p1.abs().ln() + 2.0 * self.shift + self.power_tail(p, r)
    }

    fn ln_tail(&self, comp: Comp, r: f64) -> f64 {
        match comp {
            Comp::U | Comp::Grad | Comp::Ut => self.mode_tail(comp, r),
            Comp::Pu | Comp::Pv => self.profile_tail(comp, r),
            // |x − y|² ≤ 2|x|² + 2|y|²
            Comp::Ru => LN_2 + logaddexp(self.mode_tail(Comp::U, r), self.profile_tail(Comp::Pu, r)),
            Comp::Rv => LN_2 + logaddexp(self.mode_tail(Comp::Ut, r), self.profile_tail(Comp::Pv, r)),
        }
    }
}

/// `L'(r)`
fn log_symbol_slope(r: f64, theta: f64) -> f64 {
    let p = r.powf(2.0 * theta);
    2.0 * theta * p / (r * (1.0 + p))
}

/// Spectral integrals `ω_n ∫ |·|² r^{n−1} dr` for the components of `q`,
/// scaled by `e^{2 shift}`; returns them with the shift.
fn integrals(
    q: Quantity,
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    th: &Thresholds,
    t: f64,
    tol: f64,
    policy: ExecPolicy,
) -> Result<(Vec<f64>, f64)> {
    let comps = components(q);
    let theta = params.theta();
    let (lower, shift) = if q.is_highfreq() {
        (th.delta1, th.gamma * t)
    } else {
        (0.0, 0.0)
    };
    let setup = Setup {
        datum,
        params,
        th,
        n,
        t,
        shift,
    };
    let spread = (10.0 / tol).ln();
    let dscale = datum.scale();
    let (scale, cutoff) = if q.is_highfreq() {
        let local = if t > 0.0 {
            (1.0 / (t * log_symbol_slope(lower, theta))).min(1.0)
        } else {
            1.0
        };
        let s = local.min(dscale);
        (s, lower + s * spread)
    } else {
        let ts = if t > 0.0 { t.powf(-0.5 / theta) } else { f64::INFINITY };
        let mut c = (ts * spread.powf(0.5 / theta)).min(dscale * (2.0 * spread).sqrt());
        let mut s = ts.min(dscale);
        if !s.is_finite() {
            s = 1.0;
            c = spread;
        }
        (s, c)
    };
    let density = |r: f64, out: &mut [f64; MAXK]| setup.density(comps, r, out);
    let ln_tail = |r: f64, out: &mut [f64; MAXK]| {
        for (k, &c) in comps.iter().enumerate() {
            out[k] = setup.ln_tail(c, r);
        }
    };
    let spec = RadialIntegrand {
        density: &density,
        dims: comps.len(),
        lower,
        scale,
        freq: t.max(datum.freq()),
        initial_cutoff: cutoff,
        ln_tail: &ln_tail,
    };
    let res = radial_integral_multi(&spec, n, tol, policy)?;
    Ok((res.iter().map(|r| r.value).collect(), shift))
}

/// `ln` of the quantity from its spectral integral(s).
fn ln_norm_from(q: Quantity, n: u32, values: &[f64], shift: f64) -> f64 {
    let ln_pl = -0.5 * n as f64 * (2.0 * PI).ln();
    let ln_norm = |v: f64| ln_pl + 0.5 * v.max(0.0).ln() - shift;
    match q {
        Quantity::GradL2 => ln_norm(values[0]),
        Quantity::UtL2 => ln_norm(values[1]),
        Quantity::Energy => 2.0 * ln_pl + (0.5 * (values[0] + values[1])).ln(),
        _ => ln_norm(values[0]),
    }
}

fn check_datum(q: Quantity, datum: &DatumSpec, n: u32) -> Result<()> {
    if datum.n != n {
        return domain(format!("datum is {}-dimensional, expected n = {n}", datum.n));
    }
    if !datum.in_l2 && !q.accepts_measure() {
        return Err(Error::Datum(format!(
            "{} needs an L² datum; {} only supports profile and residual quantities",
            q,
            datum.id()
        )));
    }
    Ok(())
}

/// `ln` of the quantity at time `t ≥ 0`, without validation of the datum.
fn ln_value_at(
    q: Quantity,
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    th: &Thresholds,
    t: f64,
    tol: f64,
    policy: ExecPolicy,
) -> Result<f64> {
    if t == 0.0 {
        // u(0) = 0, so only the velocity and energy survive
        match q {
            Quantity::UL2 | Quantity::GradL2 | Quantity::ProfileU | Quantity::ResidualU | Quantity::HighfreqU => {
                return Ok(f64::NEG_INFINITY)
            }
            Quantity::UtL2 | Quantity::Energy => {
                let (v, _) = integrals(Quantity::HighfreqUt, datum, n, params, &zero_zone(th), 0.0, tol, policy)?;
                let pair = [0.0, v[0]];
                return Ok(ln_norm_from(q, n, &pair, 0.0));
            }
            Quantity::ProfileUt | Quantity::ResidualUt => {
                if matches!(datum.kind, DatumKind::DeltaLike { .. }) && q == Quantity::ResidualUt {
                    return Ok(f64::NEG_INFINITY);
                }
                return Err(Error::Datum(format!("{q} is not square integrable at t = 0")));
            }
            Quantity::HighfreqUt => {}
        }
    }
    let (v, shift) = integrals(q, datum, n, params, th, t, tol, policy)?;
    Ok(ln_norm_from(q, n, &v, shift))
}

/// Thresholds with the high-frequency zone moved to the whole half-line.
fn zero_zone(th: &Thresholds) -> Thresholds {
    Thresholds {
        delta1: 0.0,
        gamma: 0.0,
        ..*th
    }
}

/// The quantity `q` at a single time `t ≥ 0`; `tol` is the relative
/// quadrature tolerance.
pub fn norm_value(
    q: Quantity,
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    t: f64,
    tol: f64,
    policy: ExecPolicy,
) -> Result<f64> {
    check_datum(q, datum, n)?;
    if !(t.is_finite() && t >= 0.0) {
        return domain(format!("time must be finite and non-negative, got {t}"));
    }
    let th = thresholds(params)?;
    Ok(ln_value_at(q, datum, n, params, &th, t, tol, policy)?.exp())
}

// ---------------------------------------------------------------------------
// curves

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCurve {
    pub quantity: Quantity,
    pub t_values: Vec<f64>,
    /// May underflow to zero for the high-frequency quantities; `ln_values`
    /// stays exact.
    pub values: Vec<f64>,
    pub ln_values: Vec<f64>,
    pub n: u32,
    pub theta: f64,
    pub datum: String,
}

impl NormCurve {
    pub fn from_ln(
        quantity: Quantity,
        t_values: Vec<f64>,
        ln_values: Vec<f64>,
        n: u32,
        theta: f64,
        datum: String,
    ) -> Result<Self> {
        if t_values.len() != ln_values.len() {
            return domain("t and value lengths differ");
        }
        if t_values.windows(2).any(|w| !(w[1] > w[0])) || t_values.iter().any(|&t| !(t > 0.0)) {
            return domain("t values must be positive and strictly increasing");
        }
        if let Some(k) = ln_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Fit(format!(
                "{quantity} is not positive and finite at t = {:e}",
                t_values[k]
            )));
        }
        Ok(Self {
            quantity,
            values: ln_values.iter().map(|v| v.exp()).collect(),
            t_values,
            ln_values,
            n,
            theta,
            datum,
        })
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    fn with_ln(&self, quantity: Quantity, ln_values: Vec<f64>) -> Self {
        Self {
            quantity,
            values: ln_values.iter().map(|v| v.exp()).collect(),
            ln_values,
            ..self.clone()
        }
    }
}

/// `points` geometrically spaced times from `t_min` to `t_max`.
pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || points < 2 {
        return domain(format!(
            "need 0 < t_min < t_max and at least 2 points, got [{t_min}, {t_max}] with {points}"
        ));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let m = (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => t_min,
            k if k == points - 1 => t_max,
            k => (a + (b - a) * k as f64 / m).exp(),
        })
        .collect())
}

/// 16 points on `[10², 10⁵]`.
pub fn default_grid() -> Vec<f64> {
    geometric_grid(1e2, 1e5, 16).expect("valid grid")
}

/// Eight points on `[t_min, 10 t_min]`, the window on which an
/// exponentially decaying curve is still well above underflow.
pub fn highfreq_grid(t_min: f64) -> Result<Vec<f64>> {
    geometric_grid(t_min, 10.0 * t_min, 8)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 8 {
        return domain(format!("a curve needs at least 8 times, got {}", t_grid.len()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return domain("t grid must be positive and strictly increasing");
    }
    Ok(())
}

/// Spectral integrals on a grid; distinct times run through `policy`.
fn grid_integrals(
    q: Quantity,
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    th: &Thresholds,
    t_grid: &[f64],
    tol: f64,
    policy: ExecPolicy,
) -> Result<Vec<(Vec<f64>, f64)>> {
    policy
        .map(t_grid, |&t| integrals(q, datum, n, params, th, t, tol, policy))
        .into_iter()
        .collect()
}

/// `q` evaluated on `t_grid`.
pub fn norm_curve(
    q: Quantity,
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    t_grid: &[f64],
    tol: f64,
    policy: ExecPolicy,
) -> Result<NormCurve> {
    check_datum(q, datum, n)?;
    check_grid(t_grid)?;
    let th = thresholds(params)?;
    let raw = grid_integrals(q, datum, n, params, &th, t_grid, tol, policy)?;
    let ln_values = raw.iter().map(|(v, s)| ln_norm_from(q, n, v, *s)).collect();
    NormCurve::from_ln(q, t_grid.to_vec(), ln_values, n, params.theta(), datum.id())
}

/// `(‖∇u‖, ‖u_t‖, E)` from one pass over the panels.
pub fn energy_curves(
    datum: &DatumSpec,
    n: u32,
    params: &DampingParams,
    t_grid: &[f64],
    tol: f64,
    policy: ExecPolicy,
) -> Result<(NormCurve, NormCurve, NormCurve)> {
    check_datum(Quantity::Energy, datum, n)?;
    check_grid(t_grid)?;
    let th = thresholds(params)?;
    let raw = grid_integrals(Quantity::Energy, datum, n, params, &th, t_grid, tol, policy)?;
    let make = |q: Quantity| {
        let ln = raw.iter().map(|(v, s)| ln_norm_from(q, n, v, *s)).collect();
        NormCurve::from_ln(q, t_grid.to_vec(), ln, n, params.theta(), datum.id())
    };
    Ok((make(Quantity::GradL2)?, make(Quantity::UtL2)?, make(Quantity::Energy)?))
}

// ---------------------------------------------------------------------------
// fits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `v ~ C t^α`
    Power,
    /// `v² ~ A + C ln t`
    LogSqrt,
    /// `v² ~ A + C t`
    SqrtT,
}

impl GrowthModel {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthModel::Power => "power",
            GrowthModel::LogSqrt => "log_sqrt",
            GrowthModel::SqrtT => "sqrt_t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub model: GrowthModel,
    /// Slope of `ln v` against `ln t`; only for the power model.
    pub exponent: Option<f64>,
    pub amplitude: f64,
    /// `A` of the `v²` models, `0` for the power model.
    pub offset: f64,
    /// Coefficient of determination of `ln v`.
    pub r2: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Exponential fit `v ≈ C e^{−γ̂ t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub rate: f64,
    pub ln_amplitude: f64,
    pub r2: f64,
}

/// `(slope, intercept, r²)` of ordinary least squares.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = ym - slope * xm;
    let pred: Vec<f64> = x.iter().map(|a| intercept + slope * a).collect();
    (slope, intercept, r_squared(y, &pred))
}

fn r_squared(y: &[f64], pred: &[f64]) -> f64 {
    let m = y.len() as f64;
    let ym = y.iter().sum::<f64>() / m;
    let tot: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let res: f64 = y.iter().zip(pred).map(|(v, p)| (v - p).powi(2)).sum();
    if tot == 0.0 {
        if res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - res / tot).clamp(0.0, 1.0)
    }
}

/// Indices of the points whose `ln t` lies in the top `span` of the range.
fn window(curve: &NormCurve, ln_span: f64) -> Result<Vec<usize>> {
    let lt: Vec<f64> = curve.t_values.iter().map(|t| t.ln()).collect();
    let last = *lt.last().ok_or_else(|| Error::Fit("empty curve".into()))?;
    let from = last - ln_span * (1.0 + 1e-12);
    let idx: Vec<usize> = (0..lt.len()).filter(|&k| lt[k] >= from).collect();
    if idx.len() < 5 {
        return Err(Error::Fit(format!(
            "{} points in the fit window, at least 5 are needed",
            idx.len()
        )));
    }
    Ok(idx)
}

fn power_on(curve: &NormCurve, idx: &[usize]) -> RateFit {
    let x: Vec<f64> = idx.iter().map(|&k| curve.t_values[k].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&k| curve.ln_values[k]).collect();
    let (slope, intercept, r2) = least_squares(&x, &y);
    RateFit {
        model: GrowthModel::Power,
        exponent: Some(slope),
        amplitude: intercept.exp(),
        offset: 0.0,
        r2,
        window: (curve.t_values[idx[0]], curve.t_values[*idx.last().unwrap()]),
        points: idx.len(),
    }
}

/// Least-squares power law on the top `window_fraction` of the `ln t` range.
pub fn fit_power(curve: &NormCurve, window_fraction: f64) -> Result<RateFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return domain(format!("window fraction must lie in (0, 1], got {window_fraction}"));
    }
    let span = curve.t_values.last().unwrap_or(&1.0).ln() - curve.t_values.first().unwrap_or(&1.0).ln();
    let idx = window(curve, window_fraction * span)?;
    Ok(power_on(curve, &idx))
}

/// `v² = A + C x` fitted linearly, judged by `r²` of `ln v`.
fn square_model(curve: &NormCurve, idx: &[usize], model: GrowthModel) -> Option<RateFit> {
    let top = idx.iter().map(|&k| curve.ln_values[k]).fold(f64::NEG_INFINITY, f64::max);
    let x: Vec<f64> = idx
        .iter()
        .map(|&k| match model {
            GrowthModel::LogSqrt => curve.t_values[k].ln(),
            _ => curve.t_values[k],
        })
        .collect();
    // v² relative to the largest value
    let y: Vec<f64> = idx.iter().map(|&k| (2.0 * (curve.ln_values[k] - top)).exp()).collect();
    let (c, a, _) = least_squares(&x, &y);
    if !(c > 0.0) {
        return None;
    }
    let mut pred = Vec::with_capacity(idx.len());
    for xv in &x {
        let v2 = a + c * xv;
        if !(v2 > 0.0) {
            return None;
        }
        pred.push(top + 0.5 * v2.ln());
    }
    let obs: Vec<f64> = idx.iter().map(|&k| curve.ln_values[k]).collect();
    let scale = (2.0 * top).exp();
    Some(RateFit {
        model,
        exponent: None,
        amplitude: c * scale,
        offset: a * scale,
        r2: r_squared(&obs, &pred),
        window: (curve.t_values[idx[0]], curve.t_values[*idx.last().unwrap()]),
        points: idx.len(),
    })
}

/// A power-law winner this close to `t^{1/2}` is reported as `√t`.
pub const SQRT_T_BAND: f64 = 0.05;

/// Power, `√log t` and `√t` laws compete by `r²` on the top decade; ties go
/// to the power law. Since `√t` is itself a power law, a power winner with
/// exponent within [`SQRT_T_BAND`] of `1/2` is reported as `√t`.
pub fn classify_growth(curve: &NormCurve) -> Result<(GrowthModel, RateFit)> {
    let idx = window(curve, std::f64::consts::LN_10)?;
    let power = power_on(curve, &idx);
    let sqrt_t = square_model(curve, &idx, GrowthModel::SqrtT);
    let mut best = power;
    for fit in [square_model(curve, &idx, GrowthModel::LogSqrt), sqrt_t].into_iter().flatten() {
        if fit.r2 > best.r2 + 1e-12 {
            best = fit;
        }
    }
    if best.model == GrowthModel::Power {
        let near_half = power.exponent.is_some_and(|a| (a - 0.5).abs() <= SQRT_T_BAND);
        if let (true, Some(fit)) = (near_half, sqrt_t) {
            best = fit;
        }
    }
    Ok((best.model, best))
}

/// Least squares of `ln v` against `t` over the whole curve.
pub fn fit_exponential(curve: &NormCurve) -> Result<ExpFit> {
    if curve.len() < 5 {
        return Err(Error::Fit("an exponential fit needs at least 5 points".into()));
    }
    let (slope, intercept, r2) = least_squares(&curve.t_values, &curve.ln_values);
    Ok(ExpFit {
        rate: -slope,
        ln_amplitude: intercept,
        r2,
    })
}

// ---------------------------------------------------------------------------
// predictions

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    /// `v ≍ t^α`
    Power { alpha: f64 },
    /// `v ≲ t^α`
    PowerUpperBound { alpha: f64 },
    /// `v ≍ √(log t)`
    LogSqrt,
    /// `v ≍ √t`
    SqrtT,
    /// `v ≲ e^{−γ t}`
    Exponential { rate: f64 },
}

impl Law {
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Law::Power { alpha } | Law::PowerUpperBound { alpha } => Some(alpha),
            _ => None,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Power { alpha } => write!(f, "t^{alpha:.4}"),
            Law::PowerUpperBound { alpha } => write!(f, "<= t^{alpha:.4}"),
            Law::LogSqrt => f.write_str("sqrt(log t)"),
            Law::SqrtT => f.write_str("sqrt(t)"),
            Law::Exponential { rate } => write!(f, "exp(-{rate:.4} t)"),
        }
    }
}

/// Predicted large-time law. For [`Quantity::Energy`] the law is that of the
/// energy norm `√(2E)`.
pub fn predicted_exponent(q: Quantity, n: u32, params: &DampingParams) -> Result<Law> {
    params.require_above_half()?;
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    let th = params.theta();
    let nf = n as f64;
    Ok(match q {
        Quantity::UL2 | Quantity::ProfileU => match n {
            1 => Law::SqrtT,
            2 => Law::LogSqrt,
            _ => Law::Power {
                alpha: -(nf - 2.0) / (4.0 * th),
            },
        },
        Quantity::GradL2 | Quantity::UtL2 | Quantity::Energy | Quantity::ProfileUt => Law::Power {
            alpha: -nf / (4.0 * th),
        },
        Quantity::ResidualU => {
            let alpha = if n == 1 && th < 0.625 {
                1.0 / th - 1.5
            } else {
                -nf / (4.0 * th) + (6.0 - 8.0 * th).max(0.0) / (4.0 * th)
            };
            Law::PowerUpperBound { alpha }
        }
        Quantity::ResidualUt => {
            let alpha = if th <= 1.0 {
                -(nf + 4.0 * th - 2.0) / (4.0 * th)
            } else {
                -(nf + 2.0) / (4.0 * th)
            };
            Law::PowerUpperBound { alpha }
        }
        Quantity::HighfreqU | Quantity::HighfreqUt => Law::Exponential {
            rate: thresholds(params)?.gamma,
        },
    })
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed `|α_fit − α_pred|`.
    pub exponent: f64,
    /// `γ̂` must lie within this factor of `γ`.
    pub gamma_factor: f64,
    /// Required gap between the profile and residual exponents for `n ≥ 3`.
    pub separation: f64,
    /// The high-frequency power slope must lie below this.
    pub highfreq_slope: f64,
    /// Relative quadrature tolerance.
    pub quad: f64,
    pub window_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exponent: 0.05,
            gamma_factor: 2.0,
            separation: 0.1,
            highfreq_slope: -10.0,
            quad: 1e-8,
            window_fraction: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub quantity: Option<Quantity>,
    pub predicted: Option<Law>,
    pub fitted: Option<f64>,
    pub model: Option<GrowthModel>,
    pub r2: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub n: u32,
    pub theta: f64,
    pub datum: String,
    pub thresholds: Thresholds,
    pub t_grid: Vec<f64>,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub curves: Vec<NormCurve>,
    pub pass: bool,
}

fn rate_check(curve: &NormCurve, law: Law, tol: &Tolerances, name: &str) -> Result<Check> {
    let q = curve.quantity;
    let mut check = Check {
        name: name.to_string(),
        quantity: Some(q),
        predicted: Some(law),
        fitted: None,
        model: None,
        r2: None,
        pass: false,
        detail: String::new(),
    };
    match law {
        Law::Power { alpha } | Law::PowerUpperBound { alpha } => {
            let fit = fit_power(curve, tol.window_fraction)?;
            let a = fit.exponent.unwrap_or(f64::NAN);
            check.fitted = Some(a);
            check.model = Some(fit.model);
            check.r2 = Some(fit.r2);
            check.pass = if matches!(law, Law::Power { .. }) {
                (a - alpha).abs() <= tol.exponent
            } else {
                a <= alpha + tol.exponent
            };
            check.detail = format!("fitted exponent {a:.4}, predicted {law}");
        }
        Law::LogSqrt | Law::SqrtT => {
            let (model, fit) = classify_growth(curve)?;
            let want = if law == Law::LogSqrt {
                GrowthModel::LogSqrt
            } else {
                GrowthModel::SqrtT
            };
            let slope = power_on(curve, &window(curve, std::f64::consts::LN_10)?).exponent;
            check.fitted = slope;
            check.model = Some(model);
            check.r2 = Some(fit.r2);
            check.pass = model == want;
            check.detail = format!("classified {}, predicted {}", model.as_str(), want.as_str());
        }
        Law::Exponential { rate } => {
            let fit = fit_exponential(curve)?;
            check.fitted = Some(fit.rate);
            check.r2 = Some(fit.r2);
            check.pass = fit.rate >= rate / tol.gamma_factor && fit.rate <= rate * tol.gamma_factor;
            check.detail = format!("fitted rate {:.4}, gamma {rate:.4}", fit.rate);
        }
    }
    Ok(check)
}

fn plain_check(name: &str, pass: bool, fitted: Option<f64>, detail: String) -> Check {
    Check {
        name: name.to_string(),
        quantity: None,
        predicted: None,
        fitted,
        model: None,
        r2: None,
        pass,
        detail,
    }
}

fn failed_check(name: &str, q: Option<Quantity>, err: &Error) -> Check {
    Check {
        name: name.to_string(),
        quantity: q,
        predicted: None,
        fitted: None,
        model: None,
        r2: None,
        pass: false,
        detail: format!("error: {err}"),
    }
}

/// Builds every supported curve, fits it and compares with the predicted
/// law. Curve failures become failed checks with the error message.
pub fn theorem_report(
    n: u32,
    params: &DampingParams,
    datum: &DatumSpec,
    t_grid: &[f64],
    tol: &Tolerances,
    policy: ExecPolicy,
) -> Result<Report> {
    params.require_above_half()?;
    check_grid(t_grid)?;
    if datum.n != n {
        return domain(format!("datum is {}-dimensional, expected n = {n}", datum.n));
    }
    let th = thresholds(params)?;
    let mut checks = Vec::new();
    let mut curves = Vec::new();

    let record = |curve: &NormCurve, law: Law, name: &str, checks: &mut Vec<Check>| {
        match rate_check(curve, law, tol, name) {
            Ok(c) => checks.push(c),
            Err(e) => checks.push(failed_check(name, Some(curve.quantity), &e)),
        }
    };

    if datum.in_l2 {
        let law = predicted_exponent(Quantity::UL2, n, params)?;
        match norm_curve(Quantity::UL2, datum, n, params, t_grid, tol.quad, policy) {
            Ok(c) => {
                record(&c, law, "u_l2", &mut checks);
                curves.push(c);
            }
            Err(e) => checks.push(failed_check("u_l2", Some(Quantity::UL2), &e)),
        }
        match energy_curves(datum, n, params, t_grid, tol.quad, policy) {
            Ok((grad, ut, energy)) => {
                let law = predicted_exponent(Quantity::GradL2, n, params)?;
                record(&grad, law, "grad_l2", &mut checks);
                record(&ut, law, "ut_l2", &mut checks);
                let norm_ln = energy.ln_values.iter().map(|e| 0.5 * (LN_2 + e)).collect();
                record(&energy.with_ln(Quantity::Energy, norm_ln), law, "energy_norm", &mut checks);
                let worst = energy
                    .ln_values
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                checks.push(plain_check(
                    "energy_monotone",
                    worst <= 1e-12,
                    None,
                    format!("largest step of ln E: {worst:.3e}"),
                ));
                curves.extend([grad, ut, energy]);
            }
            Err(e) => checks.push(failed_check("energy", Some(Quantity::Energy), &e)),
        }
    }

    for q in [Quantity::ProfileU, Quantity::ProfileUt, Quantity::ResidualU, Quantity::ResidualUt] {
        let law = predicted_exponent(q, n, params)?;
        match norm_curve(q, datum, n, params, t_grid, tol.quad, policy) {
            Ok(c) => {
                record(&c, law, q.as_str(), &mut checks);
                curves.push(c);
            }
            Err(e) => checks.push(failed_check(q.as_str(), Some(q), &e)),
        }
    }

    if n >= 3 {
        let fitted = |name: &str| checks.iter().find(|c| c.name == name).and_then(|c| c.fitted);
        match (fitted("residual_u"), fitted("profile_u")) {
            (Some(r), Some(p)) => checks.push(plain_check(
                "residual_faster_than_profile",
                r < p - tol.separation,
                Some(p - r),
                format!("residual {r:.4} vs profile {p:.4}"),
            )),
            _ => checks.push(plain_check(
                "residual_faster_than_profile",
                false,
                None,
                "missing fits".into(),
            )),
        }
    }

    if datum.in_l2 {
        let grid = highfreq_grid(t_grid[0])?;
        for q in [Quantity::HighfreqU, Quantity::HighfreqUt] {
            let law = predicted_exponent(q, n, params)?;
            match norm_curve(q, datum, n, params, &grid, tol.quad, policy) {
                Ok(c) => {
                    record(&c, law, q.as_str(), &mut checks);
                    let name = format!("{q}_faster_than_power");
                    match fit_power(&c, 1.0) {
                        Ok(fit) => {
                            let a = fit.exponent.unwrap_or(f64::NAN);
                            checks.push(plain_check(
                                &name,
                                a < tol.highfreq_slope,
                                Some(a),
                                format!("power slope {a:.2} on [{:e}, {:e}]", grid[0], grid[grid.len() - 1]),
                            ));
                        }
                        Err(e) => checks.push(failed_check(&name, Some(q), &e)),
                    }
                    curves.push(c);
                }
                Err(e) => checks.push(failed_check(q.as_str(), Some(q), &e)),
            }
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        n,
        theta: params.theta(),
        datum: datum.id(),
        thresholds: th,
        t_grid: t_grid.to_vec(),
        tolerances: *tol,
        checks,
        curves,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_models::parse;
    use approx::assert_relative_eq;

    fn p(theta: f64) -> DampingParams {
        DampingParams::new(theta).unwrap()
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> NormCurve {
        let t = geometric_grid(1e2, 1e5, 16).unwrap();
        let ln = t.iter().map(|&x| f(x).ln()).collect();
        NormCurve::from_ln(Quantity::UL2, t, ln, 3, 1.0, "synthetic".into()).unwrap()
    }

    #[test]
    fn power_fit_examples() {
        let fit = fit_power(&synthetic(|t| 3.0 * t.powf(-0.5)), 1.0 / 3.0).unwrap();
        assert!((fit.exponent.unwrap() + 0.5).abs() < 1e-10);
        assert_relative_eq!(fit.amplitude, 3.0, max_relative = 1e-9);
        let wobble = fit_power(&synthetic(|t| (1.0 + 0.1 * t.ln().sin()) / t), 1.0).unwrap();
        assert!((wobble.exponent.unwrap() + 1.0).abs() < 0.05);
        assert_eq!(classify_growth(&synthetic(|t| t.sqrt())).unwrap().0, GrowthModel::SqrtT);
        assert_eq!(classify_growth(&synthetic(|t| t.powf(0.7))).unwrap().0, GrowthModel::Power);
        let flat = fit_power(&synthetic(|_| 2.0), 1.0 / 3.0).unwrap();
        assert_eq!(flat.exponent, Some(0.0));
    }

    #[test]
    fn fit_needs_points() {
        let c = synthetic(|t| t);
        assert!(fit_power(&c, 0.05).is_err());
    }

    #[test]
    fn growth_models_recovered() {
        assert_eq!(classify_growth(&synthetic(|t| (50.0 + t).sqrt())).unwrap().0, GrowthModel::SqrtT);
        assert_eq!(
            classify_growth(&synthetic(|t| (2.0 + t.ln()).sqrt())).unwrap().0,
            GrowthModel::LogSqrt
        );
        assert_eq!(classify_growth(&synthetic(|t| t.powf(-0.25))).unwrap().0, GrowthModel::Power);
    }

    #[test]
    fn predictions() {
        let law = predicted_exponent(Quantity::UL2, 3, &p(1.0)).unwrap();
        assert_eq!(law, Law::Power { alpha: -0.25 });
        let law = predicted_exponent(Quantity::ResidualUt, 3, &p(1.0)).unwrap();
        assert_eq!(law.exponent(), Some(-1.25));
        let a = predicted_exponent(Quantity::ResidualU, 1, &p(0.55)).unwrap().exponent().unwrap();
        assert!((a - (1.0 / 0.55 - 1.5)).abs() < 1e-15);
        assert_eq!(predicted_exponent(Quantity::UL2, 2, &p(0.75)).unwrap(), Law::LogSqrt);
        assert!(predicted_exponent(Quantity::UL2, 3, &p(0.5)).is_err());
    }

    #[test]
    fn initial_energy() {
        let d = parse("gaussian:sigma=1", 3).unwrap();
        let e = norm_value(Quantity::Energy, &d, 3, &p(1.0), 0.0, 1e-10, ExecPolicy::Sequential).unwrap();
        assert_relative_eq!(e, 0.5 * d.norm_l2 * d.norm_l2, max_relative = 1e-9);
        let delta = parse("delta_like:p1=1", 3).unwrap();
        let r = norm_value(Quantity::ResidualU, &delta, 3, &p(1.0), 0.0, 1e-10, ExecPolicy::Sequential).unwrap();
        assert_eq!(r, 0.0);
        assert!(norm_value(Quantity::UL2, &delta, 3, &p(1.0), 1.0, 1e-8, ExecPolicy::Sequential).is_err());
    }

    #[test]
    fn energy_identity() {
        let d = parse("gaussian:sigma=1", 2).unwrap();
        let grid = geometric_grid(1.0, 1e3, 8).unwrap();
        let (g, u, e) = energy_curves(&d, 2, &p(0.75), &grid, 1e-8, ExecPolicy::Sequential).unwrap();
        for k in 0..grid.len() {
            let lhs = g.values[k].powi(2) + u.values[k].powi(2);
            assert_relative_eq!(lhs, 2.0 * e.values[k], max_relative = 1e-10);
        }
        assert!(e.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn decay_exponents_n3() {
        let d = parse("gaussian:sigma=1", 3).unwrap();
        let grid = default_grid();
        let pr = p(1.0);
        let c = norm_curve(Quantity::UL2, &d, 3, &pr, &grid, 1e-8, ExecPolicy::Parallel).unwrap();
        let a = fit_power(&c, 1.0 / 3.0).unwrap().exponent.unwrap();
        assert!((a + 0.25).abs() < 0.02, "{a}");
        let c = norm_curve(Quantity::ResidualUt, &d, 3, &pr, &grid, 1e-8, ExecPolicy::Parallel).unwrap();
        let a = fit_power(&c, 1.0 / 3.0).unwrap().exponent.unwrap();
        assert!((a + 1.25).abs() < 0.05, "{a}");
    }

    #[test]
    fn doubling_the_datum() {
        let d1 = parse("gaussian:sigma=1", 3).unwrap();
        let pr = p(1.0);
        let mut d2 = d1.clone();
        d2.p1 *= 2.0;
        let v1 = norm_value(Quantity::GradL2, &d1, 3, &pr, 50.0, 1e-9, ExecPolicy::Sequential).unwrap();
        let v2 = norm_value(Quantity::GradL2, &d2, 3, &pr, 50.0, 1e-9, ExecPolicy::Sequential).unwrap();
        assert_relative_eq!(v2, 2.0 * v1, max_relative = 1e-12);
    }

    #[test]
    fn highfreq_is_exponential() {
        let d = parse("gaussian:sigma=1", 3).unwrap();
        let pr = p(1.0);
        let grid = highfreq_grid(100.0).unwrap();
        let c = norm_curve(Quantity::HighfreqU, &d, 3, &pr, &grid, 1e-8, ExecPolicy::Parallel).unwrap();
        let fit = fit_exponential(&c).unwrap();
        let gamma = 0.5 * LN_2;
        assert!(fit.rate > gamma / 2.0 && fit.rate < 2.0 * gamma, "{}", fit.rate);
        assert!(fit_power(&c, 1.0).unwrap().exponent.unwrap() < -10.0);
    }

    #[test]
    fn parse_quantities() {
        for q in Quantity::ALL {
            assert_eq!(q.as_str().parse::<Quantity>().unwrap(), q);
        }
        assert!("speed".parse::<Quantity>().is_err());
    }
}
