//! `btoep` — block Toeplitz determinant analysis from the command line.
//!
//! Subcommands: `analyze` (jump table, regularity, winding numbers, Fredholm
//! index), `factor` (canonical jump factorization), `constants` (G, Ω, and
//! the Barnes part of E), `verify` (finite-section sweep against
//! `G^n·n^Ω·E`), and `barnes` (Barnes G-function values).
//!
//! Exit codes: 0 ok; 2 invalid input; 3 theorem-hypothesis violation
//! (regularity failure or nonzero index); 4 numerical failure. Errors print
//! a machine-readable JSON object on standard error.

use btoep_cli::schema;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use btoep_core::constants::{barnes_factor, compute_g, compute_omega, log_barnes_g};
use btoep_core::engine::{geometric_n_grid, verify_asymptotics, VerifyOptions};
use btoep_core::factorization::factorize;
use btoep_core::jumps::analyze_jumps;
use btoep_core::symbol::Side;
use btoep_core::winding::{winding_c_with, winding_i_with};
use btoep_core::{Complex64, Error as CoreError, SymbolExpr};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "btoep", version, about = "Block Toeplitz determinants for piecewise continuous matrix symbols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Jump table, regularity verdict, winding numbers (both routes), index.
    Analyze(SymbolArgs),
    /// Canonical factorization φ = φ₀·u_{B₁,τ₁}⋯u_{B_R,τ_R}.
    Factor(SymbolArgs),
    /// Asymptotic constants G, Ω and the Barnes part of E.
    Constants(SymbolArgs),
    /// Determinant sweep over an n-grid, verified against G^n·n^Ω·E.
    Verify(VerifyArgs),
    /// Barnes G-function: log G(1+z) and G(1+z).
    Barnes(BarnesArgs),
}

#[derive(Args)]
struct SymbolArgs {
    /// JSON symbol file (see README for the schema).
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    symbol: Option<PathBuf>,
    /// Builtin symbol name: xy_entropy, kitaev_longrange, triangular_2x2,
    /// jump_offdiag_2x2.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Builtin parameter, repeatable: --param lambda=3 --param b=0.1+0.2i
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Quadrature / verification tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output format (csv is available for `verify` only).
    #[arg(long, default_value = "json")]
    format: String,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    sym: SymbolArgs,
    /// Grid specification "start:stop:geometric" or "start:stop:linear[:step]".
    #[arg(long = "n-grid", default_value = "16:512:geometric")]
    n_grid: String,
    /// Initial section block order for the operator-determinant estimate.
    #[arg(long = "section-size", default_value_t = 32)]
    section_size: usize,
    /// Skip the finite-section operator-determinant estimate.
    #[arg(long = "no-opdet")]
    no_opdet: bool,
}

#[derive(Args)]
struct BarnesArgs {
    /// Argument z: G(1+z) is evaluated. Accepts "0.3", "0.3+0.2i", "-1.5i".
    z: String,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    payload: Value,
}

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            payload: json!({
                "schema_version": schema::SCHEMA_VERSION,
                "error": {"kind": "invalid_input", "message": msg.into()},
            }),
        }
    }
}

fn core_failure(err: CoreError) -> Failure {
    let (code, kind, extra) = match &err {
        CoreError::NotIRegular(f) => {
            let mut extra = serde_json::Map::new();
            extra.insert("condition".into(), json!(f.condition().to_string()));
            extra.insert("boundary_case".into(), json!(f.is_boundary_case()));
            if let btoep_core::RegularityFailure::LogBranch { theta, eigenvalue, distance } = f {
                extra.insert("theta".into(), json!(theta));
                extra.insert("eigenvalue".into(), schema::complex_to_json(*eigenvalue));
                extra.insert("distance".into(), json!(distance));
            }
            (3, "not_i_regular", extra)
        }
        CoreError::IndexNonzero { index } => {
            let mut extra = serde_json::Map::new();
            extra.insert("index".into(), json!(index));
            (3, "index_nonzero", extra)
        }
        CoreError::SingularValue { theta } => {
            let mut extra = serde_json::Map::new();
            extra.insert("theta".into(), json!(theta));
            (3, "singular_value", extra)
        }
        CoreError::DimensionMismatch(..)
        | CoreError::InvalidArgument(_)
        | CoreError::JumpPointEvaluation { .. }
        | CoreError::PoleOfBarnes { .. } => (2, "invalid_input", serde_json::Map::new()),
        _ => (4, "numerical_failure", serde_json::Map::new()),
    };
    let mut error = serde_json::Map::new();
    error.insert("kind".into(), json!(kind));
    error.insert("message".into(), json!(err.to_string()));
    for (k, v) in extra {
        error.insert(k, v);
    }
    Failure {
        code,
        payload: json!({"schema_version": schema::SCHEMA_VERSION, "error": error}),
    }
}

/// Parses "3", "-0.5", "0.3+0.2i", "1.5i", "0.3-i".
fn parse_complex_str(s: &str) -> Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    if let Some(im_part) = t.strip_suffix('i') {
        // split at the last +/- that is not a leading sign or exponent sign
        let bytes = im_part.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&im_part[..idx], &im_part[idx..]),
            None => ("0", im_part),
        };
        let re: f64 = if re_str.is_empty() { 0.0 } else { re_str.parse().map_err(|_| format!("bad complex literal '{s}'"))? };
        let im: f64 = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse().map_err(|_| format!("bad complex literal '{s}'"))?,
        };
        return Ok(Complex64::new(re, im));
    }
    Err(format!("bad complex literal '{s}' (expected forms: 1.5, 0.3+0.2i, -2i)"))
}

fn build_symbol(args: &SymbolArgs) -> Result<SymbolExpr, Failure> {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::invalid("--tol must be positive"));
    }
    match (&args.symbol, &args.builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("invalid JSON: {e}")))?;
            schema::parse_symbol(&value).map_err(Failure::invalid)
        }
        (None, Some(name)) => {
            let mut params = BTreeMap::new();
            for p in &args.params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Failure::invalid(format!("bad --param '{p}', expected KEY=VALUE")))?;
                params.insert(
                    k.trim().to_string(),
                    parse_complex_str(v).map_err(Failure::invalid)?,
                );
            }
            let builtin = schema::builtin_from_params(name, &params).map_err(Failure::invalid)?;
            SymbolExpr::builtin(builtin).map_err(core_failure)
        }
        _ => Err(Failure::invalid("exactly one of --symbol FILE or --builtin NAME is required")),
    }
}

fn parse_n_grid(spec: &str) -> Result<Vec<usize>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 {
        return Err(Failure::invalid("n-grid must be start:stop:geometric|linear[:step]"));
    }
    let start: usize = parts[0].parse().map_err(|_| Failure::invalid("bad n-grid start"))?;
    let stop: usize = parts[1].parse().map_err(|_| Failure::invalid("bad n-grid stop"))?;
    if start == 0 || stop < start {
        return Err(Failure::invalid("n-grid needs 0 < start <= stop"));
    }
    match parts[2] {
        "geometric" => {
            if parts.len() == 4 {
                return Err(Failure::invalid("geometric n-grid takes no step"));
            }
            Ok(geometric_n_grid(start, stop))
        }
        "linear" => {
            let step: usize = if parts.len() == 4 {
                parts[3].parse().map_err(|_| Failure::invalid("bad n-grid step"))?
            } else {
                ((stop - start) / 10).max(1)
            };
            if step == 0 {
                return Err(Failure::invalid("n-grid step must be positive"));
            }
            Ok((start..=stop).step_by(step).collect())
        }
        other => Err(Failure::invalid(format!("unknown n-grid kind '{other}'"))),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| {
                    if !text.ends_with('\n') {
                        stdout.write_all(b"\n")
                    } else {
                        Ok(())
                    }
                })
                .map_err(|e| Failure::invalid(format!("cannot write to stdout: {e}")))
        }
    }
}

fn require_json(format: &str) -> Result<(), Failure> {
    if format != "json" {
        return Err(Failure::invalid(format!(
            "format '{format}' is not available for this command (json only)"
        )));
    }
    Ok(())
}

fn cmd_analyze(args: &SymbolArgs) -> Result<(), Failure> {
    require_json(&args.format)?;
    let sym = build_symbol(args)?;
    let jumps = analyze_jumps(&sym).map_err(core_failure)?;
    let wi = winding_i_with(&sym, &jumps).map_err(core_failure)?;
    let wc = winding_c_with(&sym, &jumps).map_err(core_failure)?;
    if wi != wc {
        return Err(core_failure(CoreError::RouteMismatch {
            context: "winding_i vs winding_c",
            left: Complex64::new(wi as f64, 0.0),
            right: Complex64::new(wc as f64, 0.0),
        }));
    }
    let doc = json!({
        "schema_version": schema::SCHEMA_VERSION,
        "command": "analyze",
        "N": sym.block_size(),
        "i_regular": true,
        "jumps": schema::jumps_to_json(&jumps),
        "winding_i": wi,
        "winding_c": wc,
        "fredholm_index": -wi,
    });
    emit(&args.out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_factor(args: &SymbolArgs) -> Result<(), Failure> {
    require_json(&args.format)?;
    let sym = build_symbol(args)?;
    let fact = factorize(&sym).map_err(core_failure)?;
    let mut residual: f64 = 0.0;
    for (tau, _) in &fact.jumps {
        let plus = fact.phi0.eval_sided(*tau, Side::Plus).map_err(core_failure)?;
        let minus = fact.phi0.eval_sided(*tau, Side::Minus).map_err(core_failure)?;
        residual = residual.max(plus.sub(&minus).max_norm() / plus.max_norm().max(1.0));
    }
    let doc = schema::factorization_to_json(&fact, residual).map_err(Failure::invalid)?;
    emit(&args.out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_constants(args: &SymbolArgs) -> Result<(), Failure> {
    require_json(&args.format)?;
    let sym = build_symbol(args)?;
    let fact = factorize(&sym).map_err(core_failure)?;
    let (g, log_g) = compute_g(&fact.phi0, args.tol).map_err(core_failure)?;
    let omega = compute_omega(&fact.analyses).map_err(core_failure)?;
    let e_barnes = barnes_factor(&fact.analyses).map_err(core_failure)?;
    let doc = json!({
        "schema_version": schema::SCHEMA_VERSION,
        "command": "constants",
        "N": sym.block_size(),
        "g": schema::complex_to_json(g),
        "log_g": schema::complex_to_json(log_g),
        "omega": schema::complex_to_json(omega),
        "e_barnes": schema::complex_to_json(e_barnes),
    });
    emit(&args.out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    if args.sym.format != "json" && args.sym.format != "csv" {
        return Err(Failure::invalid("verify supports --format json or csv"));
    }
    let sym = build_symbol(&args.sym)?;
    let grid = parse_n_grid(&args.n_grid)?;
    let opts = VerifyOptions {
        quad_tol: args.sym.tol,
        opdet: !args.no_opdet,
        opdet_initial: args.section_size.max(32),
        opdet_cap: args.section_size.max(32) * 4,
        ..VerifyOptions::default()
    };
    let rep = verify_asymptotics(&sym, &grid, &opts).map_err(core_failure)?;
    let text = if args.sym.format == "csv" {
        schema::report_to_csv(&rep)
    } else {
        serde_json::to_string_pretty(&schema::report_to_json(&rep)).unwrap()
    };
    emit(&args.sym.out, &text)
}

fn cmd_barnes(args: &BarnesArgs) -> Result<(), Failure> {
    require_json(&args.format)?;
    let z = parse_complex_str(&args.z).map_err(Failure::invalid)?;
    let log_g = log_barnes_g(z).map_err(core_failure)?;
    let doc = json!({
        "schema_version": schema::SCHEMA_VERSION,
        "command": "barnes",
        "z": schema::complex_to_json(z),
        "log_g1pz": schema::complex_to_json(log_g),
        "g1pz": schema::complex_to_json(log_g.exp()),
    });
    emit(&args.out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Factor(a) => cmd_factor(a),
        Command::Constants(a) => cmd_constants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Barnes(a) => cmd_barnes(a),
    };
    if let Err(failure) = result {
        eprintln!("{}", serde_json::to_string(&failure.payload).unwrap());
        std::process::exit(failure.code);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_parse() {
        assert_eq!(parse_complex_str("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex_str("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(parse_complex_str("0.3+0.2i").unwrap(), Complex64::new(0.3, 0.2));
        assert_eq!(parse_complex_str("0.3-0.2i").unwrap(), Complex64::new(0.3, -0.2));
        assert_eq!(parse_complex_str("1.5i").unwrap(), Complex64::new(0.0, 1.5));
        assert_eq!(parse_complex_str("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex_str("1e-3+2e-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert!(parse_complex_str("abc").is_err());
    }

    #[test]
    fn n_grid_specs_parse() {
        assert_eq!(parse_n_grid("16:64:geometric").unwrap(), vec![16, 23, 32, 45, 64]);
        assert_eq!(parse_n_grid("10:40:linear:10").unwrap(), vec![10, 20, 30, 40]);
        assert!(parse_n_grid("0:10:linear").is_err());
        assert!(parse_n_grid("10:5:geometric").is_err());
        assert!(parse_n_grid("1:2:fibonacci").is_err());
    }
}
