use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use berger_core::einstein::{
    classify, einstein_variety, expected_class, solve_numeric_with, EinsteinSolver, EpsRange, NRange, VarietyClass,
};
use berger_core::equivariance::{invariant_bilinear_space, ConnectionSpaces};
use berger_core::nomizu::RicciConvention;
use berger_core::report::{build_export, expected_dims, export_json, verify_with, VerifyReport};
use berger_core::tolerance::Tolerances;
use clap::{Args, Parser, Subcommand, ValueEnum};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "berger", version, about = "Invariant connections and Einstein skew torsion on Berger spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Tolerance for identities between computed tensors [env: BERGER_TOL_NUM]
    #[arg(long, global = true)]
    tol_num: Option<f64>,
    /// Tolerance for solved defects and curvature norms [env: BERGER_TOL_SOL]
    #[arg(long, global = true)]
    tol_sol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimensions of the invariant, metric and skew-torsion spaces.
    Dims {
        #[arg(long, value_parser = parse_n)]
        n: usize,
    },
    /// Closed forms against the generic calculus, plus structural checks.
    Verify {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        #[arg(long, value_parser = parse_eps, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value = "first-slot")]
        ricci_convention: RicciConvention,
    },
    /// Type of the Einstein solution set, its equation and sample points.
    Classify {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        #[arg(long, value_parser = parse_eps, allow_hyphen_values = true)]
        eps: f64,
    },
    /// All sixteen regime cells against the expected classification.
    Table,
    /// Full JSON report for one `(n, eps)`.
    Export {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        #[arg(long, value_parser = parse_eps, allow_hyphen_values = true)]
        eps: f64,
    },
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    Ok(n)
}

/// Decimal or `p/q`.
fn parse_eps(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("numerator: {e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("denominator: {e}"))?;
            if q == 0.0 {
                return Err("zero denominator".into());
            }
            p / q
        }
        None => f64::from_str(s.trim()).map_err(|e| format!("{e}"))?,
    };
    if !v.is_finite() || v == 0.0 {
        return Err("eps must be finite and nonzero".into());
    }
    Ok(v)
}

fn env_tol(name: &str) -> Result<Option<f64>, String> {
    match std::env::var(name) {
        Ok(v) => v.parse().map(Some).map_err(|e| format!("{name}: {e}")),
        Err(_) => Ok(None),
    }
}

fn tolerances(g: &Global) -> Result<Tolerances, String> {
    let mut t = Tolerances::default();
    if let Some(v) = g.tol_num.or(env_tol("BERGER_TOL_NUM")?) {
        t.num = v;
    }
    if let Some(v) = g.tol_sol.or(env_tol("BERGER_TOL_SOL")?) {
        t.sol = v;
    }
    if !(t.num > 0.0 && t.sol > 0.0) {
        return Err("tolerances must be positive".into());
    }
    Ok(t)
}

/// Command output and whether it counts as a pass.
struct Outcome {
    text: String,
    passed: bool,
}

fn fmt_eps(eps: f64) -> String {
    format!("{eps}")
}

const DIMS_EPS: [f64; 5] = [-3.0, -1.0, -0.5, 1.0, 2.0];

fn cmd_dims(n: usize, format: Format) -> berger_core::Result<Outcome> {
    let invariant = invariant_bilinear_space(n)?;
    let (ei, em, es) = expected_dims(n);
    let mut rows = Vec::new();
    for eps in DIMS_EPS {
        let s = ConnectionSpaces::from_invariant(invariant.clone(), eps)?;
        rows.push((eps, s.invariant.dim(), s.metric.dim(), s.skew.dim()));
    }
    let passed = rows.iter().all(|&(_, i, m, k)| (i, m, k) == (ei, em, es));
    let mut text = String::new();
    match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(eps, i, m, k)| {
                    serde_json::json!({"n": n, "eps": eps, "invariant": i, "metric": m, "skew_torsion_directions": k})
                })
                .collect();
            text = serde_json::to_string_pretty(&v).expect("plain values") + "\n";
        }
        Format::Csv => {
            text.push_str("n,eps,invariant,metric,skew_torsion_directions\n");
            for (eps, i, m, k) in &rows {
                let _ = writeln!(text, "{n},{eps},{i},{m},{k}");
            }
        }
        Format::Text => {
            let _ = writeln!(text, "n = {n}, rank gap {:.3e}", invariant.rank_gap());
            for (eps, i, m, k) in &rows {
                let _ = writeln!(text, "eps = {:>5}: invariant {i}, metric {m}, skew torsion {k} (affine)", fmt_eps(*eps));
            }
            let _ = writeln!(text, "expected: invariant {ei}, metric {em}, skew torsion {es}");
            let _ = writeln!(text, "{}", if passed { "PASS" } else { "FAIL: dims" });
        }
    }
    Ok(Outcome { text, passed })
}

fn render_verify(r: &VerifyReport, format: Format) -> String {
    let mut text = String::new();
    match format {
        Format::Json => text = serde_json::to_string_pretty(r).expect("plain values") + "\n",
        Format::Csv => {
            text.push_str("check,residual,tolerance,passed\n");
            for c in &r.checks {
                let _ = writeln!(text, "{},{:e},{:e},{}", c.name, c.residual, c.tolerance, c.passed());
            }
        }
        Format::Text => {
            let _ = writeln!(text, "n = {}, eps = {}, ricci convention {}", r.n, fmt_eps(r.eps), r.convention);
            for c in &r.checks {
                let status = if c.passed() { "ok" } else { "FAIL" };
                let _ = writeln!(text, "  {:<22} {:>12.3e}  <= {:<8.1e} {status}", c.name, c.residual, c.tolerance);
            }
            match r.first_failure() {
                None => text.push_str("PASS\n"),
                Some(c) => {
                    let _ = writeln!(text, "FAIL: {}", c.name);
                }
            }
        }
    }
    text
}

fn cmd_verify(n: usize, eps: f64, conv: RicciConvention, tol: &Tolerances, seed: u64, format: Format) -> berger_core::Result<Outcome> {
    let spaces = ConnectionSpaces::compute(n, eps)?;
    let r = verify_with(&spaces, tol, conv, seed)?;
    if let Some(c) = r.first_failure() {
        eprintln!("verification failed: {} (residual {:e}, tolerance {:e})", c.name, c.residual, c.tolerance);
    }
    Ok(Outcome {
        text: render_verify(&r, format),
        passed: r.passed(),
    })
}

fn cmd_classify(n: usize, eps: f64, tol: &Tolerances, seed: u64, format: Format) -> berger_core::Result<Outcome> {
    let v = einstein_variety(n, eps, 6, seed, tol.sol)?;
    let mut text = String::new();
    match format {
        Format::Json => text = serde_json::to_string_pretty(&v).expect("plain values") + "\n",
        Format::Csv => {
            text.push_str("n,eps,kind,equation\n");
            let _ = writeln!(text, "{n},{eps},{},\"{}\"", v.kind, v.equation.text());
        }
        Format::Text => {
            let _ = writeln!(text, "n = {n}, eps = {}", fmt_eps(eps));
            let _ = writeln!(text, "kind: {}", v.kind);
            let _ = writeln!(text, "equation: {}", v.equation.text());
            for p in &v.sample_points {
                let coords: Vec<String> = p.iter().map(|x| format!("{x:.10}")).collect();
                let _ = writeln!(text, "  ({})", coords.join(", "));
            }
        }
    }
    Ok(Outcome { text, passed: true })
}

struct Cell {
    eps_range: EpsRange,
    n_range: NRange,
    expected: VarietyClass,
    got: VarietyClass,
    numeric: usize,
    numeric_ok: bool,
}

impl Cell {
    fn passed(&self) -> bool {
        self.expected == self.got && self.numeric_ok
    }
}

fn cmd_table(tol: &Tolerances, seed: u64, format: Format) -> berger_core::Result<Outcome> {
    let mut cells = Vec::new();
    for er in EpsRange::ALL {
        for nr in NRange::ALL {
            let (n, eps) = (nr.representative(), er.representative());
            let got = classify(n, eps)?;
            let pts = solve_numeric_with(&EinsteinSolver::closed_form(n, eps)?, 16, seed, tol.sol)?;
            let numeric_ok = match got {
                VarietyClass::Empty => pts.is_empty(),
                VarietyClass::OnePoint => pts.len() == 1,
                VarietyClass::TwoPoints => pts.len() == 2,
                _ => !pts.is_empty(),
            };
            cells.push(Cell {
                eps_range: er,
                n_range: nr,
                expected: expected_class(nr, er),
                got,
                numeric: pts.len(),
                numeric_ok,
            });
        }
    }
    let matched = cells.iter().filter(|c| c.passed()).count();
    let passed = matched == cells.len();
    let mut text = String::new();
    match format {
        Format::Json => {
            let v: Vec<_> = cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "eps_range": c.eps_range.label(),
                        "n_range": c.n_range.label(),
                        "expected": c.expected.name(),
                        "got": c.got.name(),
                        "numeric_points": c.numeric,
                        "match": c.passed(),
                    })
                })
                .collect();
            text = serde_json::to_string_pretty(&v).expect("plain values") + "\n";
        }
        Format::Csv => {
            text.push_str("eps_range,n_range,expected,got,numeric_points,match\n");
            for c in &cells {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    c.eps_range.label(),
                    c.n_range.label(),
                    c.expected,
                    c.got,
                    c.numeric,
                    c.passed()
                );
            }
        }
        Format::Text => {
            let _ = write!(text, "{:<14}", "");
            for nr in NRange::ALL {
                let _ = write!(text, "{:<24}", nr.label());
            }
            text.push('\n');
            for row in cells.chunks(4) {
                let _ = write!(text, "{:<14}", row[0].eps_range.label());
                for c in row {
                    let mark = if c.passed() { "" } else { " (!)" };
                    let _ = write!(text, "{:<24}", format!("{}{mark}", c.got));
                }
                text.push('\n');
            }
            let _ = writeln!(text, "{matched}/{} cells match", cells.len());
        }
    }
    Ok(Outcome { text, passed })
}

fn cmd_export(n: usize, eps: f64, tol: &Tolerances, seed: u64) -> berger_core::Result<Outcome> {
    let e = build_export(n, eps, tol, seed, VERSION)?;
    let passed = e.residuals.iter().all(|c| c.passed());
    Ok(Outcome {
        text: export_json(&e)?,
        passed,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let g = &cli.global;
    let tol = match tolerances(g) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Dims { n } => cmd_dims(n, g.format),
        Command::Verify { n, eps, ricci_convention } => cmd_verify(n, eps, ricci_convention, &tol, g.seed, g.format),
        Command::Classify { n, eps } => cmd_classify(n, eps, &tol, g.seed, g.format),
        Command::Table => cmd_table(&tol, g.seed, g.format),
        Command::Export { n, eps } => cmd_export(n, eps, &tol, g.seed),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &g.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{}", outcome.text),
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use berger_core::nomizu::CALIBRATED;

    #[test]
    fn eps_parsing() {
        assert_eq!(parse_eps("-3/2").unwrap(), -1.5);
        assert_eq!(parse_eps("0.7").unwrap(), 0.7);
        assert_eq!(parse_eps(" 1 / 4 ").unwrap(), 0.25);
        assert!(parse_eps("0").is_err());
        assert!(parse_eps("1/0").is_err());
        assert!(parse_eps("abc").is_err());
    }

    #[test]
    fn n_parsing() {
        assert_eq!(parse_n("4").unwrap(), 4);
        assert!(parse_n("0").is_err());
        assert!(parse_n("-1").is_err());
    }

    #[test]
    fn calibrated_convention_is_default() {
        assert_eq!(RicciConvention::from_str("first-slot").unwrap(), CALIBRATED);
    }
}
