//! Radial integrals over `R^n` of spectral quantities.
//!
//! Every integral here has the form `ω_n ∫_{r₀}^∞ F(r) r^{n−1} dr` where `F`
//! usually carries the envelope `(1 + r^{2θ})^{−t}` and, at large `t`, the fast
//! oscillation `sin²(rt)` or `cos²(rt)`. The half line is cut at a radius `R`
//! where a caller-supplied analytic tail bound drops below half the tolerance;
//! `[r₀, R]` is split into panels no wider than a fraction of an oscillation,
//! each panel is integrated by an adaptive Gauss–Kronrod rule, and the panel
//! sums are reduced left to right with compensated summation. Panel work may
//! run in parallel, the reduction never does, so results do not depend on the
//! thread count.

pub mod gk;

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::exec::ExecPolicy;
use crate::specfun::{a_const, AConstForm};
use crate::sum::CompensatedSum;
use crate::symbols::{log_symbol_unchecked, DampingParams};

/// Maximum number of integrands sharing one set of panels.
pub const MAXK: usize = 8;

/// Outcome of one radial integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    /// `ω_n ∫ F r^{n−1} dr`
    pub value: f64,
    /// Panel error estimate plus the tail bound.
    pub err_est: f64,
    pub panels: usize,
    /// Bound on the discarded part `ω_n ∫_R^∞ |F| r^{n−1} dr`; at most
    /// `tol/2 · |value|`.
    pub tail_bound: f64,
    pub cutoff: f64,
}

/// `ω_n = 2π^{n/2}/Γ(n/2)`, the area of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    (2.0f64.ln() + h * PI.ln() - ln_gamma(h)).exp()
}

/// A family of `dims` radial densities integrated on common panels.
pub struct RadialIntegrand<'a> {
    /// Writes `F_k(r)` for `k < dims` into the buffer.
    pub density: &'a (dyn Fn(f64, &mut [f64; MAXK]) + Sync),
    pub dims: usize,
    /// Lower limit `r₀ ≥ 0`.
    pub lower: f64,
    /// Width of the region carrying the mass.
    pub scale: f64,
    /// Angular frequency of the fastest oscillation in `r`.
    pub freq: f64,
    /// First cutoff to try; grown by 1.5 until the tail bound holds.
    pub initial_cutoff: f64,
    /// `ln` of a bound on `∫_R^∞ |F_k| r^{n−1} dr` for each `k`.
    pub ln_tail: &'a (dyn Fn(f64, &mut [f64; MAXK]) + Sync),
}

impl<'a> RadialIntegrand<'a> {
    pub fn new(
        density: &'a (dyn Fn(f64, &mut [f64; MAXK]) + Sync),
        dims: usize,
        scale: f64,
        ln_tail: &'a (dyn Fn(f64, &mut [f64; MAXK]) + Sync),
    ) -> Self {
        Self {
            density,
            dims,
            lower: 0.0,
            scale,
            freq: 0.0,
            initial_cutoff: 4.0 * scale,
            ln_tail,
        }
    }
}

type Vk = [f64; MAXK];

fn gk15_vec<F: Fn(f64, &mut Vk) + ?Sized>(f: &F, dims: usize, a: f64, b: f64) -> (Vk, Vk) {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_845_693_013,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; MAXK];
    let mut g = [0.0; MAXK];
    let mut buf = [0.0; MAXK];
    let mut buf2 = [0.0; MAXK];
    f(c, &mut buf);
    for i in 0..dims {
        k[i] = buf[i] * WGK[7];
        g[i] = buf[i] * WG[3];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        f(c - dx, &mut buf);
        f(c + dx, &mut buf2);
        for i in 0..dims {
            let pair = buf[i] + buf2[i];
            k[i] += WGK[j] * pair;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * pair;
            }
        }
    }
    let mut err = [0.0; MAXK];
    for i in 0..dims {
        err[i] = ((k[i] - g[i]) * h).abs();
        k[i] *= h;
    }
    (k, err)
}

/// Recursive bisection until every component meets its local tolerance.
fn refine<F: Fn(f64, &mut Vk) + ?Sized>(
    f: &F,
    dims: usize,
    a: f64,
    b: f64,
    est: (Vk, Vk),
    tol: &Vk,
    depth: u32,
    count: &mut usize,
) -> (Vk, Vk) {
    let ok = (0..dims).all(|i| est.1[i] <= tol[i]);
    if ok || depth == 0 {
        return est;
    }
    let m = 0.5 * (a + b);
    let mut half = [0.0; MAXK];
    for i in 0..dims {
        half[i] = 0.5 * tol[i];
    }
    *count += 1;
    let left = refine(f, dims, a, m, gk15_vec(f, dims, a, m), &half, depth - 1, count);
    let right = refine(f, dims, m, b, gk15_vec(f, dims, m, b), &half, depth - 1, count);
    let mut v = [0.0; MAXK];
    let mut e = [0.0; MAXK];
    for i in 0..dims {
        v[i] = left.0[i] + right.0[i];
        e[i] = left.1[i] + right.1[i];
    }
    (v, e)
}

struct Pass {
    value: Vk,
    err: Vk,
    panels: usize,
}

const MAX_PANELS: usize = 4_000_000;

fn integrate_panels(
    g: &(dyn Fn(f64, &mut Vk) + Sync),
    dims: usize,
    lower: f64,
    upper: f64,
    width: f64,
    tol: f64,
    policy: ExecPolicy,
) -> Result<Pass> {
    let span = upper - lower;
    let m = (span / width).ceil().max(1.0);
    if m > MAX_PANELS as f64 {
        return Err(Error::NoConvergence(format!(
            "radial quadrature would need {m:e} panels"
        )));
    }
    let m = m as usize;
    let edges: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let a = lower + span * k as f64 / m as f64;
            let b = if k + 1 == m {
                upper
            } else {
                lower + span * (k + 1) as f64 / m as f64
            };
            (a, b)
        })
        .collect();
    let first = policy.map(&edges, |&(a, b)| gk15_vec(g, dims, a, b));

    let mut rough = [CompensatedSum::new(); MAXK];
    for (v, _) in &first {
        for i in 0..dims {
            rough[i].add(v[i].abs());
        }
    }
    let mut local = [0.0; MAXK];
    for i in 0..dims {
        local[i] = (0.1 * tol * rough[i].value() / m as f64).max(f64::MIN_POSITIVE);
    }

    let jobs: Vec<usize> = (0..m).collect();
    let refined = policy.map(&jobs, |&k| {
        let (a, b) = edges[k];
        let mut count = 0;
        let r = refine(g, dims, a, b, first[k], &local, 14, &mut count);
        (r, count)
    });

    let mut val = [CompensatedSum::new(); MAXK];
    let mut err = [CompensatedSum::new(); MAXK];
    let mut panels = 0;
    for ((v, e), extra) in &refined {
        panels += 1 + extra;
        for i in 0..dims {
            val[i].add(v[i]);
            err[i].add(e[i]);
        }
    }
    let mut value = [0.0; MAXK];
    let mut errs = [0.0; MAXK];
    for i in 0..dims {
        value[i] = val[i].value();
        errs[i] = err[i].value();
    }
    Ok(Pass {
        value,
        err: errs,
        panels,
    })
}

/// Local power `p` with `|g(r)| ~ r^p` near the origin, from two probes.
fn local_exponent(g: &(dyn Fn(f64, &mut Vk) + Sync), dims: usize, scale: f64) -> Vk {
    let (r1, r2) = (1e-10 * scale, 1e-12 * scale);
    let mut a = [0.0; MAXK];
    let mut b = [0.0; MAXK];
    g(r1, &mut a);
    g(r2, &mut b);
    let mut p = [0.0; MAXK];
    for i in 0..dims {
        let (x, y) = (a[i].abs(), b[i].abs());
        p[i] = if x == 0.0 && y == 0.0 {
            f64::INFINITY
        } else {
            (x / y).ln() / (r1 / r2).ln()
        };
    }
    p
}

/// `ω_n ∫_{r₀}^∞ F_k(r) r^{n−1} dr` for every component `k`.
///
/// `tol` is relative: each tail bound is pushed below `tol/2 · |value_k|`
/// and panels are refined to about `tol/10` of the panel mass.
pub fn radial_integral_multi(
    f: &RadialIntegrand<'_>,
    n: u32,
    tol: f64,
    policy: ExecPolicy,
) -> Result<Vec<QuadratureResult>> {
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    if !(tol > 0.0 && tol < 1.0) {
        return domain(format!("tolerance must lie in (0, 1), got {tol}"));
    }
    if !(f.scale > 0.0 && f.scale.is_finite()) {
        return domain(format!("scale must be positive and finite, got {}", f.scale));
    }
    if f.dims == 0 || f.dims > MAXK {
        return domain(format!("between 1 and {MAXK} densities, got {}", f.dims));
    }
    let dims = f.dims;
    let pw = (n - 1) as i32;
    let density = f.density;
    let g = move |r: f64, out: &mut Vk| {
        density(r, out);
        let w = r.powi(pw);
        for x in out.iter_mut().take(dims) {
            *x *= w;
        }
    };

    if f.lower == 0.0 {
        let p = local_exponent(&g, dims, f.scale);
        if let Some(k) = (0..dims).find(|&k| p[k] <= -1.0) {
            return Err(Error::Divergence(format!(
                "density {k} behaves like r^{:.3} at the origin in dimension {n}",
                p[k]
            )));
        }
    }

    let width = if f.freq > 0.0 {
        (0.5 * f.scale).min(PI / (2.0 * f.freq))
    } else {
        0.5 * f.scale
    };
    let omega = sphere_area(n);
    let mut upper = f.initial_cutoff.max(f.lower + width);
    let mut tails = [0.0; MAXK];
    for _ in 0..80 {
        let pass = integrate_panels(&g, dims, f.lower, upper, width, tol, policy)?;
        (f.ln_tail)(upper, &mut tails);
        let done = (0..dims).all(|k| {
            let v = pass.value[k].abs();
            tails[k] == f64::NEG_INFINITY || (v > 0.0 && tails[k] <= (0.5 * tol * v).ln())
        });
        if done {
            return Ok((0..dims)
                .map(|k| {
                    let tail = tails[k].exp();
                    QuadratureResult {
                        value: omega * pass.value[k],
                        err_est: omega * (pass.err[k] + tail),
                        panels: pass.panels,
                        tail_bound: omega * tail,
                        cutoff: upper,
                    }
                })
                .collect());
        }
        upper = f.lower + 1.5 * (upper - f.lower);
    }
    Err(Error::NoConvergence(format!(
        "tail bound never dropped below the tolerance (cutoff reached {upper:e})"
    )))
}

/// Scalar form of [`radial_integral_multi`].
pub fn radial_integral(
    density: &(dyn Fn(f64) -> f64 + Sync),
    ln_tail: &(dyn Fn(f64) -> f64 + Sync),
    scale: f64,
    freq: f64,
    n: u32,
    tol: f64,
    policy: ExecPolicy,
) -> Result<QuadratureResult> {
    let d = |r: f64, out: &mut Vk| out[0] = density(r);
    let tl = |r: f64, out: &mut Vk| out[0] = ln_tail(r);
    let mut spec = RadialIntegrand::new(&d, 1, scale, &tl);
    spec.freq = freq;
    Ok(radial_integral_multi(&spec, n, tol, policy)?[0])
}

/// `(2π)^{−n/2} √(value)`: the physical-space L² norm of a radial quantity
/// from the Fourier-side integral of its squared modulus.
pub fn plancherel_norm(n: u32, integral: f64) -> f64 {
    (2.0 * PI).powf(-0.5 * n as f64) * integral.max(0.0).sqrt()
}

/// Physical L² norm of `q` given `|q̂(r)|²` as the first density of `f`.
pub fn spectral_l2(f: &RadialIntegrand<'_>, n: u32, tol: f64, policy: ExecPolicy) -> Result<f64> {
    let res = radial_integral_multi(f, n, tol, policy)?;
    Ok(plancherel_norm(n, res[0].value))
}

/// `ln` of a bound on `∫_{x₁}^∞ x^{μ−1}(1 + x)^{−t} dx`, or `+∞` when no
/// elementary bound applies.
pub fn ln_beta_tail_bound(mu: f64, x1: f64, t: f64) -> f64 {
    let mut best = f64::INFINITY;
    if mu >= 1.0 && t > mu {
        // x^{μ−1} ≤ (1+x)^{μ−1}
        best = best.min((mu - t) * x1.ln_1p() - (t - mu).ln());
    }
    if mu < 1.0 && x1 > 0.0 {
        if t > 1.0 {
            // x^{μ−1} ≤ x₁^{μ−1}
            best = best.min((mu - 1.0) * x1.ln() + (1.0 - t) * x1.ln_1p() - (t - 1.0).ln());
        }
        if t > mu {
            // (1+x)^{−t} ≤ x^{−t}
            best = best.min((mu - t) * x1.ln() - (t - mu).ln());
        }
    }
    best
}

/// `ln` of a bound on `∫_R^∞ (1 + r^{2θ})^{−t} r^p dr`.
pub fn ln_power_tail(p: f64, theta: f64, t: f64, r: f64) -> f64 {
    let mu = (p + 1.0) / (2.0 * theta);
    ln_beta_tail_bound(mu, r.powf(2.0 * theta), t) - (2.0 * theta).ln()
}

/// Weights available to [`oscillatory_norm2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OscKind {
    /// `sin²(rt)/r²`
    Sin2OverR2,
    /// `cos²(rt)`
    Cos2,
    /// `a(r)² sin²(rt)/r²` with `a = L/2`
    Sin2TimesA2OverR2,
    /// `1`
    Plain,
}

impl OscKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OscKind::Sin2OverR2 => "sin2_over_r2",
            OscKind::Cos2 => "cos2",
            OscKind::Sin2TimesA2OverR2 => "sin2_times_a2_over_r2",
            OscKind::Plain => "plain",
        }
    }
}

/// `e^{−tL}` times a model weight; `sin²(rt)/r²` uses its series near 0.
fn osc_density(kind: OscKind, r: f64, theta: f64, t: f64) -> f64 {
    let l = log_symbol_unchecked(r, theta);
    let env = (-t * l).exp();
    let sin2_r2 = || {
        let x = r * t;
        if x < 1e-4 {
            t * t * (1.0 - x * x / 3.0)
        } else {
            let s = x.sin() / r;
            s * s
        }
    };
    env * match kind {
        OscKind::Plain => 1.0,
        OscKind::Cos2 => {
            let c = (r * t).cos();
            c * c
        }
        OscKind::Sin2OverR2 => sin2_r2(),
        OscKind::Sin2TimesA2OverR2 => 0.25 * l * l * sin2_r2(),
    }
}

/// `∫_{R^n} (1 + |ξ|^{2θ})^{−t} w(|ξ|) dξ` for the chosen weight `w`.
pub fn oscillatory_norm2(
    kind: OscKind,
    n: u32,
    params: &DampingParams,
    t: f64,
    tol: f64,
    policy: ExecPolicy,
) -> Result<QuadratureResult> {
    if !(t >= 1.0 && t.is_finite()) {
        return domain(format!("need t >= 1, got {t}"));
    }
    let theta = params.theta();
    let scale = t.powf(-1.0 / (2.0 * theta));
    let nf = n as f64;
    let density = |r: f64| osc_density(kind, r, theta, t);
    // weights bounded by 1, 1/r², and (r^{2θ−2}/4) using ln(1+x) ≤ √x
    let ln_tail = move |r: f64| match kind {
        OscKind::Plain | OscKind::Cos2 => ln_power_tail(nf - 1.0, theta, t, r),
        OscKind::Sin2OverR2 => ln_power_tail(nf - 3.0, theta, t, r),
        OscKind::Sin2TimesA2OverR2 => ln_power_tail(nf - 3.0 + 2.0 * theta, theta, t, r) - 4f64.ln(),
    };
    let d = |r: f64, out: &mut Vk| out[0] = density(r);
    let tl = |r: f64, out: &mut Vk| out[0] = ln_tail(r);
    let mut spec = RadialIntegrand::new(&d, 1, scale, &tl);
    spec.freq = t;
    spec.initial_cutoff = scale * (10.0 / tol).ln().powf(1.0 / (2.0 * theta));
    Ok(radial_integral_multi(&spec, n, tol, policy)?[0])
}

/// `F_{n,θ}(t) = ∫₀^∞ e^{−s^{2θ}} s^{n−3} cos(2 t^{(2θ−1)/(2θ)} s) ds`.
pub fn riemann_lebesgue_probe(n: u32, params: &DampingParams, t: f64) -> Result<f64> {
    if n <= 2 {
        return domain(format!("the probe needs n > 2, got n = {n}"));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return domain(format!("need t >= 1, got {t}"));
    }
    let theta = params.theta();
    let w = 2.0 * t.powf((2.0 * theta - 1.0) / (2.0 * theta));
    let k = n as i32 - 3;
    let f = move |s: f64| (-s.powf(2.0 * theta)).exp() * s.powi(k) * (w * s).cos();
    // e^{−S^{2θ}} S^{n−3} below 1e−17
    let mut s_max = 1.0f64;
    while -s_max.powf(2.0 * theta) + k as f64 * s_max.ln() > (1e-17f64).ln() {
        s_max *= 1.25;
    }
    let width = 0.5f64.min(PI / (2.0 * w));
    let m = (s_max / width).ceil() as usize;
    let mut acc = CompensatedSum::new();
    for j in 0..m {
        let a = s_max * j as f64 / m as f64;
        let b = s_max * (j + 1) as f64 / m as f64;
        acc.add(gk::adaptive_breaks(&f, &[a, b], 1e-18, 1e-13, 64, false)?.value);
    }
    Ok(acc.value())
}

/// First grid time from which `|F_{n,θ}| ≤ A_{n,θ}/2` holds on the rest of
/// the grid.
pub fn locate_t0(n: u32, params: &DampingParams, t_grid: &[f64]) -> Result<Option<f64>> {
    let half = 0.5 * a_const(n, params.theta(), AConstForm::HalfLine)?;
    let values = t_grid
        .iter()
        .map(|&t| riemann_lebesgue_probe(n, params, t))
        .collect::<Result<Vec<_>>>()?;
    let mut t0 = None;
    for (k, &t) in t_grid.iter().enumerate().rev() {
        if values[k].abs() <= half {
            t0 = Some(t);
        } else {
            break;
        }
    }
    Ok(t0)
}
