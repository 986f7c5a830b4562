//! The five subcommands. Each returns whether its verification passed.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use logdamp::data_models::parse;
use logdamp::oracle::{mode_relative_error, rk4_mode, MAX_HORIZON};
use logdamp::propagator::mode_solution;
use logdamp::rates::{geometric_grid, norm_curve, theorem_report, Quantity, Tolerances};
use logdamp::specfun::{default_t_grid, gautschi_ratio, limit_checks, AsymptoticCheck, LimitKind};
use logdamp::symbols::{evaluate, roots, thresholds, DampingParams};
use logdamp::ExecPolicy;

use crate::config::{Flags, GridSpec, NORM_GRID};
use crate::output::{csv_text, emit, json_text, sci, short};

pub const SCHEMA: &str = "logdamp-report/1";
const DEFAULT_DATUM: &str = "gaussian:sigma=1";

fn damping(f: &Flags) -> Result<DampingParams> {
    Ok(DampingParams::new(f.theta.unwrap_or(1.0))?)
}

/// Damping parameters for the decay results, which assume θ > 1/2.
fn decay_damping(f: &Flags) -> Result<DampingParams> {
    let p = damping(f)?;
    p.require_above_half()?;
    Ok(p)
}

fn norm_grid(f: &Flags) -> Result<(GridSpec, Vec<f64>)> {
    let g = GridSpec::from_flags(f, NORM_GRID)?;
    Ok((g, geometric_grid(g.t_min, g.t_max, g.points)?))
}

pub fn report(f: &Flags) -> Result<bool> {
    let n = f.n.unwrap_or(3);
    let params = decay_damping(f)?;
    let datum_text = f.datum.as_deref().unwrap_or(DEFAULT_DATUM);
    let datum = parse(datum_text, n)?;
    let (g, grid) = norm_grid(f)?;
    let tol = Tolerances {
        exponent: f.tol_exp.unwrap_or(Tolerances::default().exponent),
        ..Tolerances::default()
    };
    let rep = theorem_report(n, &params, &datum, &grid, &tol, ExecPolicy::Parallel)?;

    let mut quantities = Map::new();
    for c in &rep.checks {
        quantities.insert(
            c.name.clone(),
            json!({
                "quantity": c.quantity,
                "predicted": c.predicted,
                "fitted": c.fitted,
                "model": c.model,
                "r2": c.r2,
                "pass": c.pass,
                "detail": c.detail,
            }),
        );
    }
    let doc = json!({
        "schema": SCHEMA,
        "config": {
            "command": "report",
            "n": n,
            "theta": params.theta(),
            "datum": rep.datum,
            "t_min": g.t_min,
            "t_max": g.t_max,
            "points": g.points,
            "tolerances": rep.tolerances,
        },
        "thresholds": rep.thresholds,
        "quantities": Value::Object(quantities),
        "pass": rep.pass,
    });
    emit(f.out.as_deref(), &json_text(doc)?)?;
    Ok(rep.pass)
}

pub fn curve(f: &Flags) -> Result<bool> {
    let q: Quantity = f
        .quantity
        .as_deref()
        .ok_or_else(|| anyhow!("curve needs --quantity (one of {})", quantity_names()))?
        .parse()
        .with_context(|| format!("quantities are {}", quantity_names()))?;
    let n = f.n.unwrap_or(3);
    let params = decay_damping(f)?;
    let datum = parse(f.datum.as_deref().unwrap_or(DEFAULT_DATUM), n)?;
    let (_, grid) = norm_grid(f)?;
    let tol = Tolerances::default().quad;
    let c = norm_curve(q, &datum, n, &params, &grid, tol, ExecPolicy::Parallel)?;
    let rows: Vec<Vec<String>> = c
        .t_values
        .iter()
        .zip(&c.values)
        .map(|(&t, &v)| vec![sci(t), sci(v), q.to_string(), n.to_string(), short(params.theta()), c.datum.clone()])
        .collect();
    let text = csv_text(&["t", "value", "quantity", "n", "theta", "datum"], &rows)?;
    emit(f.out.as_deref(), &text)?;
    Ok(true)
}

fn quantity_names() -> String {
    Quantity::ALL.iter().map(|q| q.as_str()).collect::<Vec<_>>().join(", ")
}

pub fn specfun(f: &Flags) -> Result<bool> {
    let kind = f.kind.as_deref().unwrap_or("origin");
    let grid = if f.t_min.is_some() || f.t_max.is_some() || f.points.is_some() {
        let g = GridSpec::from_flags(
            f,
            GridSpec {
                t_min: 1e2,
                t_max: 1e6,
                points: 9,
            },
        )?;
        geometric_grid(g.t_min, g.t_max, g.points)?
    } else {
        default_t_grid()
    };
    let upper = f.x2.unwrap_or(f64::INFINITY);
    let theta = f.theta.unwrap_or(1.0);
    let rows: Vec<AsymptoticCheck> = match kind {
        "gautschi" => {
            let s = f.s.unwrap_or(0.5);
            grid.iter().map(|&t| gautschi_ratio(t, s)).collect::<logdamp::Result<_>>()?
        }
        _ => {
            let lk = match kind {
                "origin" => LimitKind::Origin {
                    mu: f.mu.unwrap_or(1.0),
                    x2: upper,
                },
                "shifted" => LimitKind::Shifted {
                    mu: f.mu.unwrap_or(1.0),
                    x1: f.x1.unwrap_or(1.0),
                    x2: upper,
                },
                "radial" => LimitKind::Radial {
                    p: f.p.unwrap_or(2.0),
                    theta,
                    eta2: upper,
                },
                "radial_shifted" => LimitKind::RadialShifted {
                    eta: f.eta.unwrap_or(1.0),
                    p: f.p.unwrap_or(2.0),
                    theta,
                    eta2: upper,
                },
                other => bail!(
                    "unknown specfun kind `{other}`; use origin, shifted, radial, radial_shifted or gautschi"
                ),
            };
            limit_checks(lk, &grid)?
        }
    };
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![sci(r.t), sci(r.lhs), sci(r.limit), sci(r.relerr)])
        .collect();
    emit(f.out.as_deref(), &csv_text(&["t", "lhs", "limit", "relerr"], &table)?)?;
    let check = f.check.unwrap_or(1e-2);
    Ok(rows.last().is_some_and(|r| r.relerr < check))
}

pub fn mode(f: &Flags) -> Result<bool> {
    let params = damping(f)?;
    let r = f.r.unwrap_or(1.0);
    let t = f.t.unwrap_or(5.0);
    if !(0.0..=MAX_HORIZON).contains(&t) {
        bail!("mode needs 0 <= t <= {MAX_HORIZON}, got t = {t}");
    }
    let u1: Complex64 = match f.u1hat.as_deref() {
        None => Complex64::new(1.0, 0.0),
        Some(s) => s
            .parse()
            .map_err(|_| anyhow!("--u1hat expects a complex number such as 1 or 0.5+2i, got `{s}`"))?,
    };
    let sym = evaluate(r, &params)?;
    let (lp, lm) = roots(r, &params)?;
    let dt = f.dt.unwrap_or(1e-3 / lp.norm().max(lm.norm()).max(1.0));
    let exact = mode_solution(r, &params, t, u1)?;
    let run = rk4_mode(r, &params, t, dt, u1)?;
    let rel = mode_relative_error(r, exact.u, exact.v, run.final_u, run.final_v);

    let mut rows: Vec<Vec<String>> = [
        ("r", short(r)),
        ("theta", short(params.theta())),
        ("t", short(t)),
        ("u1hat_re", short(u1.re)),
        ("u1hat_im", short(u1.im)),
        ("branch", sym.branch.as_str().to_string()),
        ("discriminant", sci(sym.disc)),
        ("dt", sci(run.dt)),
        ("steps", run.steps.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| vec![k.to_string(), v])
    .collect();
    for (name, z) in [
        ("closed_form_u", exact.u),
        ("closed_form_v", exact.v),
        ("oracle_u", run.final_u),
        ("oracle_v", run.final_v),
    ] {
        rows.push(vec![format!("{name}_re"), sci(z.re)]);
        rows.push(vec![format!("{name}_im"), sci(z.im)]);
    }
    rows.push(vec!["relative_difference".to_string(), sci(rel)]);
    emit(f.out.as_deref(), &csv_text(&["key", "value"], &rows)?)?;
    Ok(rel <= f.check.unwrap_or(1e-6))
}

pub fn thresholds_cmd(f: &Flags) -> Result<bool> {
    let params = damping(f)?;
    let th = thresholds(&params)?;
    let table = vec![
        vec!["theta".to_string(), short(params.theta())],
        vec!["delta0".to_string(), sci(th.delta0)],
        vec!["delta1".to_string(), sci(th.delta1)],
        vec!["big_b".to_string(), sci(th.big_b)],
        vec!["gamma".to_string(), sci(th.gamma)],
    ];
    emit(f.out.as_deref(), &csv_text(&["key", "value"], &table)?)?;
    Ok(true)
}
