//! JSON encodings: the symbol schema consumed by every subcommand, and the
//! serializers for analysis, factorization, constants, and verification
//! reports.
//!
//! Conventions (bit-exact contract):
//! * complex scalars are `[re, im]`;
//! * matrices are row-major nested arrays of complex scalars;
//! * angles are given as `"theta"` in radians;
//! * factor objects are discriminated by `"kind"` ∈ {`laurent`,
//!   `exp_laurent`, `jump`, `piecewise_constant`, `builtin`, `inverse`,
//!   `tilde`};
//! * every document carries `"schema_version": "1"`.

use std::collections::BTreeMap;

use btoep_core::engine::{AsymptoticReport, OpdetEstimate};
use btoep_core::factorization::Factorization;
use btoep_core::symbol::{Arc, Builtin, Factor, LaurentPoly, PiecewiseConstant};
use btoep_core::{Complex64, ComplexMatrix, JumpAnalysis, SymbolExpr, UnitPoint};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1";

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.n_rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.n_cols()).map(|j| complex_to_json(m[(i, j)])).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

fn as_f64(v: &Value, what: &str) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{what}: expected a number"))
}

/// Accepts `[re, im]` pairs and bare numbers (treated as real).
pub fn parse_complex(v: &Value, what: &str) -> Result<Complex64, String> {
    match v {
        Value::Number(_) => Ok(Complex64::new(as_f64(v, what)?, 0.0)),
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(
            as_f64(&a[0], what)?,
            as_f64(&a[1], what)?,
        )),
        _ => Err(format!("{what}: expected [re, im] or a number")),
    }
}

pub fn parse_matrix(v: &Value, what: &str) -> Result<ComplexMatrix, String> {
    let rows = v.as_array().ok_or_else(|| format!("{what}: expected a matrix"))?;
    if rows.is_empty() {
        return Err(format!("{what}: empty matrix"));
    }
    let n_rows = rows.len();
    let mut data = Vec::new();
    let mut n_cols = None;
    for row in rows {
        let cells = row.as_array().ok_or_else(|| format!("{what}: expected matrix rows"))?;
        match n_cols {
            None => n_cols = Some(cells.len()),
            Some(c) if c != cells.len() => return Err(format!("{what}: ragged matrix rows")),
            _ => {}
        }
        for cell in cells {
            data.push(parse_complex(cell, what)?);
        }
    }
    ComplexMatrix::from_rows(n_rows, n_cols.unwrap(), data).map_err(|e| format!("{what}: {e}"))
}

fn parse_laurent_coeffs(v: &Value, n: usize, what: &str) -> Result<LaurentPoly, String> {
    let obj = v.as_object().ok_or_else(|| format!("{what}: expected an object of offset -> matrix"))?;
    let mut coeffs = alloc_coeffs();
    for (key, mat) in obj {
        let k: i64 = key.parse().map_err(|_| format!("{what}: offset key '{key}' is not an integer"))?;
        coeffs.insert(k, parse_matrix(mat, what)?);
    }
    LaurentPoly::new(n, coeffs).map_err(|e| format!("{what}: {e}"))
}

fn alloc_coeffs() -> std::collections::BTreeMap<i64, ComplexMatrix> {
    std::collections::BTreeMap::new()
}

/// Builds a builtin from name + parameter map (shared by JSON and `--param`).
pub fn builtin_from_params(
    name: &str,
    params: &BTreeMap<String, Complex64>,
) -> Result<Builtin, String> {
    let get = |key: &str| params.get(key).copied();
    let require = |key: &str| {
        get(key).ok_or_else(|| format!("builtin '{name}': missing required parameter '{key}'"))
    };
    let real = |key: &str, z: Complex64| -> Result<f64, String> {
        if z.im != 0.0 {
            return Err(format!("builtin '{name}': parameter '{key}' must be real"));
        }
        Ok(z.re)
    };
    let known = |allowed: &[&str]| -> Result<(), String> {
        for k in params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(format!("builtin '{name}': unknown parameter '{k}'"));
            }
        }
        Ok(())
    };
    match name {
        "xy_entropy" => {
            known(&["lambda", "alpha", "gamma"])?;
            Ok(Builtin::XyEntropy {
                lambda: require("lambda")?,
                alpha: get("alpha").map(|z| real("alpha", z)).transpose()?.unwrap_or(1.0),
                gamma: get("gamma").map(|z| real("gamma", z)).transpose()?.unwrap_or(1.0),
            })
        }
        "kitaev_longrange" => {
            known(&["lambda", "h", "theta0"])?;
            Ok(Builtin::KitaevLongrange {
                lambda: require("lambda")?,
                h: real("h", require("h")?)?,
                theta0: real("theta0", require("theta0")?)?,
            })
        }
        "triangular_2x2" => {
            known(&["beta1", "beta2", "beta_g", "theta1", "theta2", "theta_g", "g_scale"])?;
            Ok(Builtin::Triangular2x2 {
                beta1: get("beta1").unwrap_or(Complex64::new(0.3, 0.0)),
                beta2: get("beta2").unwrap_or(Complex64::new(-0.2, 0.0)),
                beta_g: get("beta_g").unwrap_or(Complex64::new(0.25, 0.0)),
                theta1: get("theta1").map(|z| real("theta1", z)).transpose()?.unwrap_or(0.0),
                theta2: get("theta2")
                    .map(|z| real("theta2", z))
                    .transpose()?
                    .unwrap_or(std::f64::consts::PI),
                theta_g: get("theta_g")
                    .map(|z| real("theta_g", z))
                    .transpose()?
                    .unwrap_or(std::f64::consts::FRAC_PI_2),
                g_scale: get("g_scale").unwrap_or(Complex64::new(1.0, 0.0)),
            })
        }
        "jump_offdiag_2x2" => {
            known(&["beta", "b", "c", "theta"])?;
            Ok(Builtin::JumpOffdiag2x2 {
                beta: require("beta")?,
                b: require("b")?,
                c: require("c")?,
                theta: get("theta").map(|z| real("theta", z)).transpose()?.unwrap_or(0.0),
            })
        }
        other => Err(format!(
            "unknown builtin '{other}' (expected xy_entropy, kitaev_longrange, triangular_2x2, jump_offdiag_2x2)"
        )),
    }
}

fn parse_builtin(obj: &Map<String, Value>) -> Result<Builtin, String> {
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or("builtin factor: missing 'name'")?;
    let mut params = BTreeMap::new();
    if let Some(p) = obj.get("params") {
        let map = p.as_object().ok_or("builtin factor: 'params' must be an object")?;
        for (k, v) in map {
            params.insert(k.clone(), parse_complex(v, &format!("param '{k}'"))?);
        }
    }
    builtin_from_params(name, &params)
}

fn parse_factor(v: &Value, n: usize) -> Result<Factor, String> {
    let obj = v.as_object().ok_or("factor: expected an object")?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or("factor: missing 'kind'")?;
    match kind {
        "laurent" => {
            let coeffs = obj.get("coeffs").ok_or("laurent factor: missing 'coeffs'")?;
            Ok(Factor::Laurent(parse_laurent_coeffs(coeffs, n, "laurent coeffs")?))
        }
        "exp_laurent" => {
            let coeffs = obj.get("exponent").ok_or("exp_laurent factor: missing 'exponent'")?;
            Ok(Factor::ExpLaurent(parse_laurent_coeffs(coeffs, n, "exp_laurent exponent")?))
        }
        "jump" => {
            let theta = as_f64(obj.get("theta").ok_or("jump factor: missing 'theta'")?, "theta")?;
            let b = parse_matrix(obj.get("b").ok_or("jump factor: missing 'b'")?, "jump matrix")?;
            Ok(Factor::Jump { tau: UnitPoint::from_theta(theta), b })
        }
        "piecewise_constant" => {
            let arcs = obj
                .get("arcs")
                .and_then(Value::as_array)
                .ok_or("piecewise_constant factor: missing 'arcs'")?;
            let mut parsed = Vec::new();
            for arc in arcs {
                let a = arc.as_object().ok_or("arc: expected an object")?;
                parsed.push(Arc {
                    from: UnitPoint::from_theta(as_f64(
                        a.get("from").ok_or("arc: missing 'from'")?,
                        "arc from",
                    )?),
                    to: UnitPoint::from_theta(as_f64(
                        a.get("to").ok_or("arc: missing 'to'")?,
                        "arc to",
                    )?),
                    value: parse_matrix(a.get("value").ok_or("arc: missing 'value'")?, "arc value")?,
                });
            }
            Ok(Factor::PiecewiseConstant(
                PiecewiseConstant::new(parsed).map_err(|e| e.to_string())?,
            ))
        }
        "builtin" => Ok(Factor::Builtin(parse_builtin(obj)?)),
        "inverse" => {
            let inner = parse_symbol(obj.get("of").ok_or("inverse factor: missing 'of'")?)?;
            Ok(Factor::Inverse(inner))
        }
        "tilde" => {
            let inner = parse_symbol(obj.get("of").ok_or("tilde factor: missing 'of'")?)?;
            Ok(Factor::Tilde(inner))
        }
        other => Err(format!("unknown factor kind '{other}'")),
    }
}

pub fn parse_symbol(v: &Value) -> Result<SymbolExpr, String> {
    let obj = v.as_object().ok_or("symbol: expected an object")?;
    if let Some(ver) = obj.get("schema_version") {
        if ver.as_str() != Some(SCHEMA_VERSION) {
            return Err(format!("unsupported schema_version {ver}"));
        }
    }
    let n = obj
        .get("N")
        .and_then(Value::as_u64)
        .ok_or("symbol: missing block size 'N'")? as usize;
    if n == 0 {
        return Err("symbol: N must be positive".into());
    }
    let factors_json = obj
        .get("factors")
        .and_then(Value::as_array)
        .ok_or("symbol: missing 'factors' array")?;
    let mut factors = Vec::new();
    for f in factors_json {
        factors.push(parse_factor(f, n)?);
    }
    SymbolExpr::from_factors(n, factors).map_err(|e| e.to_string())
}

fn builtin_to_json(b: &Builtin) -> Value {
    match b {
        Builtin::XyEntropy { lambda, alpha, gamma } => json!({
            "kind": "builtin", "name": "xy_entropy",
            "params": {"lambda": complex_to_json(*lambda), "alpha": alpha, "gamma": gamma}
        }),
        Builtin::KitaevLongrange { lambda, h, theta0 } => json!({
            "kind": "builtin", "name": "kitaev_longrange",
            "params": {"lambda": complex_to_json(*lambda), "h": h, "theta0": theta0}
        }),
        Builtin::Triangular2x2 { beta1, beta2, beta_g, theta1, theta2, theta_g, g_scale } => {
            json!({
                "kind": "builtin", "name": "triangular_2x2",
                "params": {
                    "beta1": complex_to_json(*beta1), "beta2": complex_to_json(*beta2),
                    "beta_g": complex_to_json(*beta_g), "theta1": theta1, "theta2": theta2,
                    "theta_g": theta_g, "g_scale": complex_to_json(*g_scale)
                }
            })
        }
        Builtin::JumpOffdiag2x2 { beta, b, c, theta } => json!({
            "kind": "builtin", "name": "jump_offdiag_2x2",
            "params": {
                "beta": complex_to_json(*beta), "b": complex_to_json(*b),
                "c": complex_to_json(*c), "theta": theta
            }
        }),
    }
}

fn laurent_to_json(p: &LaurentPoly) -> Value {
    let mut map = Map::new();
    for (k, m) in p.coeffs() {
        map.insert(k.to_string(), matrix_to_json(m));
    }
    Value::Object(map)
}

fn factor_to_json(f: &Factor) -> Result<Value, String> {
    Ok(match f {
        Factor::Laurent(p) => json!({"kind": "laurent", "coeffs": laurent_to_json(p)}),
        Factor::ExpLaurent(p) => json!({"kind": "exp_laurent", "exponent": laurent_to_json(p)}),
        Factor::Jump { tau, b } => {
            json!({"kind": "jump", "theta": tau.theta(), "b": matrix_to_json(b)})
        }
        Factor::PiecewiseConstant(pc) => {
            let arcs: Vec<Value> = pc
                .arcs()
                .iter()
                .map(|a| {
                    json!({
                        "from": a.from.theta(), "to": a.to.theta(),
                        "value": matrix_to_json(&a.value)
                    })
                })
                .collect();
            json!({"kind": "piecewise_constant", "arcs": arcs})
        }
        Factor::Builtin(b) => builtin_to_json(b),
        Factor::Inverse(s) => json!({"kind": "inverse", "of": symbol_to_json(s)?}),
        Factor::Tilde(s) => json!({"kind": "tilde", "of": symbol_to_json(s)?}),
        Factor::Det(_) => return Err("determinant factors are internal and not serializable".into()),
    })
}

pub fn symbol_to_json(sym: &SymbolExpr) -> Result<Value, String> {
    let factors: Result<Vec<Value>, String> = sym.factors().iter().map(factor_to_json).collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "N": sym.block_size(),
        "factors": factors?,
    }))
}

pub fn jumps_to_json(jumps: &[JumpAnalysis]) -> Value {
    let rows: Vec<Value> = jumps
        .iter()
        .map(|j| {
            json!({
                "theta": j.tau.theta(),
                "betas": j.betas.iter().map(|b| complex_to_json(*b)).collect::<Vec<_>>(),
                "trace_l": complex_to_json(j.trace_l()),
                "margin": j.margin,
                "l": matrix_to_json(&j.l),
                "ratio": matrix_to_json(&j.ratio),
            })
        })
        .collect();
    Value::Array(rows)
}

pub fn factorization_to_json(fact: &Factorization, phi0_residual: f64) -> Result<Value, String> {
    let jumps: Vec<Value> = fact
        .jumps
        .iter()
        .map(|(tau, b)| json!({"theta": tau.theta(), "b": matrix_to_json(b)}))
        .collect();
    let sim: Vec<Value> = fact.s_chain.iter().map(matrix_to_json).collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "factor",
        "N": fact.phi0.block_size(),
        "jumps": jumps,
        "similarity": sim,
        "phi0": symbol_to_json(&fact.phi0)?,
        "phi0_residual_max": phi0_residual,
    }))
}

fn opdet_to_json(o: &OpdetEstimate) -> Value {
    json!({
        "value": complex_to_json(o.value),
        "section_size": o.section_size,
        "converged": o.converged,
    })
}

/// Per-row residual: relative distance of `E_n` from the reference
/// (extrapolated `E` when available, otherwise the final grid value).
pub fn report_residuals(rep: &AsymptoticReport) -> Vec<f64> {
    let reference = rep
        .e_extrapolated
        .or_else(|| rep.rows.last().map(|r| r.e_n))
        .unwrap_or(Complex64::new(1.0, 0.0));
    rep.rows
        .iter()
        .map(|r| (r.e_n - reference).norm() / reference.norm().max(1e-300))
        .collect()
}

pub fn report_to_json(rep: &AsymptoticReport) -> Value {
    let residuals = report_residuals(rep);
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .zip(&residuals)
        .map(|(r, res)| {
            json!({
                "n": r.n,
                "log_det": complex_to_json(r.log_det),
                "e_n": complex_to_json(r.e_n),
                "residual": res,
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "N": rep.block_size,
        "fredholm_index": rep.index,
        "g": complex_to_json(rep.constants.g),
        "log_g": complex_to_json(rep.constants.log_g),
        "omega": complex_to_json(rep.constants.omega),
        "e_barnes": complex_to_json(rep.constants.e_barnes),
        "rows": rows,
        "e_extrapolated": rep.e_extrapolated.map(complex_to_json),
        "fitted_rate": rep.fitted_rate,
        "cauchy": rep.cauchy,
        "e_opdet": rep.e_opdet.as_ref().map(opdet_to_json),
        "e_formula": rep.e_formula.map(complex_to_json),
        "route_residual": rep.route_residual,
        "sectoriality_min": rep.sectoriality_min,
    })
}

/// Debug serialization of a coefficient table (same complex encoding).
pub fn table_to_json(table: &btoep_core::FourierTable) -> Value {
    let mut coeffs = Map::new();
    for k in -table.k_max()..=table.k_max() {
        coeffs.insert(k.to_string(), matrix_to_json(table.coeff(k)));
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "N": table.block_size(),
        "K": table.k_max(),
        "est_tail": table.est_tail,
        "coeffs": coeffs,
    })
}

/// CSV with columns `n, re_log_dn, im_log_dn, re_en, im_en, residual`.
pub fn report_to_csv(rep: &AsymptoticReport) -> String {
    let mut out = String::from("n,re_log_dn,im_log_dn,re_en,im_en,residual\n");
    for (r, res) in rep.rows.iter().zip(report_residuals(rep)) {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.6e}\n",
            r.n, r.log_det.re, r.log_det.im, r.e_n.re, r.e_n.im, res
        ));
    }
    out
}
