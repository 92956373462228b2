//! `nilheat` command-line entry point.

mod config;
mod tables;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use nilheat::algebra::LieAlgebra;
use nilheat::experiments::{
    algebra_from_spec, config_hash, run_convergence, run_harnack, run_logsob, run_moments,
    ExperimentConfig, ExperimentReport, RunOptions,
};
use nilheat::geometry::ricci_lower_bound;
use nilheat::stochastic::{sample_path_stream, BmFormula, EulerScheme};
use serde::Serialize;
use serde_json::json;

use config::{Common, Format, Resolved};
use tables::Table;

const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;
const EXIT_RESOURCE: u8 = 70;

/// A fatal error with its exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<nilheat::Error> for Failure {
    fn from(e: nilheat::Error) -> Self {
        use nilheat::Error::*;
        let code = match e {
            Resource(_) | Numeric(_) | Rank(_) => EXIT_RESOURCE,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nilheat", version, about = "Brownian motion and heat kernel inequalities on nilpotent Lie groups")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Scheme {
    Formula,
    Euler,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients of the Baker-Campbell-Hausdorff-Dynkin series.
    BchdTable {
        #[arg(long, default_value_t = 4)]
        step: usize,
        /// One row per (k, n, m) summand instead of per merged ad-word.
        #[arg(long)]
        raw: bool,
    },
    /// Strichartz coefficients `c_n^σ` for all permutations of `n`.
    CoefTable {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Simplex polynomials `f_α` and their decomposition in powers of `t`.
    FalphaTable {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Ricci matrix, curvature bound `k` and subalgebra witnesses.
    Ricci {
        #[arg(long, default_value_t = 20)]
        subsamples: usize,
    },
    /// Samples of `g_t`, one row per path.
    Simulate {
        #[arg(long, value_enum, default_value_t = Scheme::Formula)]
        scheme: Scheme,
    },
    /// Integrated Harnack inequality for right and left translations.
    Harnack {
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        /// Comma-separated test-function identifiers.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
    },
    /// Log-Sobolev inequality for cylinder polynomials.
    Logsob {
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
    },
    /// Projection convergence along a ladder of leading quotients.
    Converge {
        /// Comma-separated increasing ranks ending at most at the dimension.
        #[arg(long, value_delimiter = ',')]
        ladder: Vec<usize>,
    },
    /// Closed-form moment checks (Heisenberg and abelian algebras).
    Moments,
    /// Checks antisymmetry, Jacobi identity and nilpotency of an algebra.
    ValidateAlgebra {
        /// Algebra JSON file; `--algebra` is used when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Writes an algebra as JSON.
    ExportAlgebra,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BchdTable { .. } => "bchd-table",
            Command::CoefTable { .. } => "coef-table",
            Command::FalphaTable { .. } => "falpha-table",
            Command::Ricci { .. } => "ricci",
            Command::Simulate { .. } => "simulate",
            Command::Harnack { .. } => "harnack",
            Command::Logsob { .. } => "logsob",
            Command::Converge { .. } => "converge",
            Command::Moments => "moments",
            Command::ValidateAlgebra { .. } => "validate-algebra",
            Command::ExportAlgebra => "export-algebra",
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunManifest<'a> {
    subcommand: &'a str,
    config_path: Option<&'a Path>,
    config: &'a serde_json::Value,
    config_hash: &'a str,
    seed: u64,
    tool_version: &'a str,
    outputs: Vec<&'a Path>,
}

fn write_output(text: &str, res: &Resolved) -> Result<(), Failure> {
    match &res.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::config(format!("stdout: {e}")))
        }
    }
}

fn write_manifest(
    command: &str,
    res: &Resolved,
    config: &serde_json::Value,
    hash: &str,
) -> Result<(), Failure> {
    let Some(out) = &res.out else { return Ok(()) };
    let mut path = out.clone().into_os_string();
    path.push(".manifest.json");
    let path = PathBuf::from(path);
    let manifest = RunManifest {
        subcommand: command,
        config_path: res.config_path.as_deref(),
        config,
        config_hash: hash,
        seed: res.experiment.seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        outputs: vec![out.as_path()],
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// Summary lines go to stdout when the output is a file, else to stderr.
fn summarize(lines: &[String], res: &Resolved) {
    for l in lines {
        if res.out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
}

fn emit_table(command: &str, table: Table, res: &Resolved) -> Result<u8, Failure> {
    let hash = config_hash(&table.params);
    let text = match res.format {
        Format::Csv => table.to_csv(&hash),
        Format::Json => table.to_json(&hash),
    };
    write_output(&text, res)?;
    write_manifest(command, res, &table.params, &hash)?;
    Ok(0)
}

fn emit_report(command: &str, report: ExperimentReport, res: &Resolved) -> Result<u8, Failure> {
    let text = match res.format {
        Format::Csv => report.to_csv(),
        Format::Json if res.reproducible => report.reproducible_json() + "\n",
        Format::Json => report.to_json() + "\n",
    };
    write_output(&text, res)?;
    let cfg = serde_json::to_value(&report.config).expect("config serializes");
    write_manifest(command, res, &cfg, &report.config_hash)?;
    summarize(&report.summary_lines(), res);
    Ok(report.exit_code() as u8)
}

fn checked(res: &Resolved) -> Result<(ExperimentConfig, RunOptions), Failure> {
    res.experiment.check()?;
    Ok((
        res.experiment.clone(),
        RunOptions {
            workers: res.workers,
        },
    ))
}

fn simulate(scheme: Scheme, res: &Resolved) -> Result<u8, Failure> {
    let (cfg, _) = checked(res)?;
    let alg = cfg.load_algebra()?;
    let dim = alg.dim();
    let params = json!({ "command": "simulate", "scheme": scheme, "config": cfg });
    let evaluate: Box<dyn Fn(&nilheat::stochastic::BrownianPath) -> nilheat::Result<Vec<f64>>> =
        match scheme {
            Scheme::Formula => {
                let f = BmFormula::new(&alg)?;
                Box::new(move |p| f.evaluate(p))
            }
            Scheme::Euler => {
                let e = EulerScheme::new(&alg)?;
                Box::new(move |p| e.evaluate(p))
            }
        };
    let mut columns = vec!["path".to_string()];
    columns.extend((0..dim).map(|j| format!("g{j}")));
    let mut table = Table::new(params, columns);
    for i in 0..cfg.paths {
        let path = sample_path_stream(dim, cfg.t, cfg.steps, cfg.seed, i as u64)?;
        let g = evaluate(&path)?;
        let mut row = vec![i.to_string()];
        row.extend(g.iter().map(|x| format!("{x:e}")));
        table.rows.push(row);
    }
    emit_table("simulate", table, res)
}

fn ricci(subsamples: usize, res: &Resolved) -> Result<u8, Failure> {
    let alg = algebra_from_spec(&res.experiment.algebra)?;
    let report = ricci_lower_bound(&alg, subsamples, res.experiment.seed)?;
    let params = json!({
        "command": "ricci",
        "algebra": res.experiment.algebra,
        "subsamples": subsamples,
        "seed": res.experiment.seed,
    });
    let hash = config_hash(&params);
    let chain = report.chain_holds(1e-10);
    let text = match res.format {
        Format::Json => {
            let doc = json!({ "config": params, "configHash": hash, "report": report, "chainHolds": chain });
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
        Format::Csv => {
            let mut t = Table::new(params.clone(), vec!["quantity".into(), "value".into()]);
            let mut push = |k: String, v: f64| t.rows.push(vec![k, format!("{v:e}")]);
            push("k".into(), report.k);
            push("eigenResidual".into(), report.eigen_residual);
            push("hsBound".into(), report.hs_bound);
            for (i, e) in report.ricci_eigenvalues.iter().enumerate() {
                push(format!("ricciEigenvalue[{i}]"), *e);
            }
            for (i, w) in report.witnesses.iter().enumerate() {
                push(format!("kPi[{i}]"), w.k_pi);
            }
            t.to_csv(&hash)
        }
    };
    write_output(&text, res)?;
    write_manifest("ricci", res, &params, &hash)?;
    summarize(
        &[format!(
            "{} k={:.6e} residual={:.1e} hsBound={:.6e} chain {}",
            alg.label(),
            report.k,
            report.eigen_residual,
            report.hs_bound,
            if chain { "holds" } else { "violated" }
        )],
        res,
    );
    Ok(if chain { 0 } else { 2 })
}

fn validate(input: Option<&Path>, res: &Resolved) -> Result<u8, Failure> {
    let (alg, source) = match input {
        Some(p) => (LieAlgebra::load(p)?, p.display().to_string()),
        None => (
            algebra_from_spec(&res.experiment.algebra)?,
            res.experiment.algebra.clone(),
        ),
    };
    let diag = alg.validate();
    let params = json!({ "command": "validate-algebra", "source": source, "triplets": alg.triplets() });
    let hash = config_hash(&params);
    let text = match res.format {
        Format::Json => {
            let doc = json!({ "configHash": hash, "label": alg.label(), "dim": alg.dim(), "diagnostics": diag });
            serde_json::to_string_pretty(&doc).expect("diagnostics serialize") + "\n"
        }
        Format::Csv => {
            let step = diag
                .detected_step
                .map_or("none".to_string(), |s| s.to_string());
            format!(
                "{}\nstep {step}\nHS²={}\nantisymmetry {:e}\njacobi {:e}\ndeclared step {}\nconfigHash {hash}\n",
                if diag.pass { "pass" } else { "fail" },
                diag.hs_norm_sq,
                diag.max_antisymmetry_violation,
                diag.max_jacobi_violation,
                diag.declared_step,
            )
        }
    };
    write_output(&text, res)?;
    Ok(if diag.pass { 0 } else { 2 })
}

fn export(res: &Resolved) -> Result<u8, Failure> {
    let alg = algebra_from_spec(&res.experiment.algebra)?;
    write_output(&(alg.to_json()? + "\n"), res)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let name = cli.command.name();
    // Tables and diagnostics read as text by default; reports as JSON.
    let default_format = match cli.command {
        Command::Harnack { .. }
        | Command::Logsob { .. }
        | Command::Converge { .. }
        | Command::Moments
        | Command::Ricci { .. } => Format::Json,
        _ => Format::Csv,
    };
    let mut res = cli.common.resolve(default_format)?;
    match cli.command {
        Command::BchdTable { step, raw } => emit_table(name, tables::bchd(step, raw)?, &res),
        Command::CoefTable { n } => emit_table(name, tables::coefficients(n)?, &res),
        Command::FalphaTable { n } => emit_table(name, tables::f_alpha(n)?, &res),
        Command::Ricci { subsamples } => ricci(subsamples, &res),
        Command::Simulate { scheme } => simulate(scheme, &res),
        Command::Harnack { q, suite } => {
            if let Some(q) = q {
                res.experiment.q = q;
            }
            if !suite.is_empty() {
                res.experiment.suite = suite;
            }
            let (cfg, opts) = checked(&res)?;
            emit_report(name, run_harnack(&cfg, &opts)?, &res)
        }
        Command::Logsob { suite } => {
            if !suite.is_empty() {
                res.experiment.suite = suite;
            }
            let (cfg, opts) = checked(&res)?;
            emit_report(name, run_logsob(&cfg, &opts)?, &res)
        }
        Command::Converge { ladder } => {
            if !ladder.is_empty() {
                res.experiment.ladder = ladder;
            }
            let (cfg, opts) = checked(&res)?;
            emit_report(name, run_convergence(&cfg, &opts)?, &res)
        }
        Command::Moments => {
            let (cfg, opts) = checked(&res)?;
            emit_report(name, run_moments(&cfg, &opts)?, &res)
        }
        Command::ValidateAlgebra { input } => validate(input.as_deref(), &res),
        Command::ExportAlgebra => export(&res),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("nilheat: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
