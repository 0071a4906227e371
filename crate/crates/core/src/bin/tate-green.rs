use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tate_green::analytic::{b_value, c_matrix, make_analytic_params};
use tate_green::domain::Params;
use tate_green::export::{self, Format};
use tate_green::operator::{build_operator_matrix, spectrum};
use tate_green::oracle::{normalize, solve_green, Normalization};
use tate_green::rational::parse_tolerance;
use tate_green::verify::verify;

#[derive(Parser)]
#[command(name = "tate-green", version, about = "Green's functions of the flat Laplacian on the Tate curve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Prime p.
    #[arg(long, global = true, default_value_t = 2)]
    p: u64,
    /// Residue degree; the effective base is q = p^f.
    #[arg(long, global = true, default_value_t = 1)]
    f: u32,
    /// Ramification index (recorded only).
    #[arg(long, global = true, default_value_t = 1)]
    e: u32,
    #[arg(long, global = true, default_value_t = 1)]
    m: u32,
    /// Level of the finite quotient.
    #[arg(long, global = true, default_value_t = 1)]
    k: u32,
    /// Enclosure radius bound, as an exact rational expression.
    #[arg(long, global = true, default_value = "1/10^12")]
    tol: String,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long, global = true, value_enum, default_value_t = NormalizeArg::MaxZero)]
    normalize: NormalizeArg,
    /// Index pair `i,j` for `--normalize anchored`.
    #[arg(long, global = true)]
    anchor: Option<String>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker count hint.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    MaxZero,
    Anchored,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Green table at level k.
    Green,
    /// The m × m matrix C.
    Cmatrix,
    /// The operator matrix at level k.
    Operator,
    /// Eigenvalues and exact kernel dimension of the operator.
    Spectrum,
    /// Enclosure of B for valuations i, j and v(x - y) = l.
    Bvalue {
        #[arg(long)]
        i: u32,
        #[arg(long)]
        j: u32,
        #[arg(long)]
        l: u32,
    },
    /// Full verification; exits 1 on any failure.
    Verify,
}

enum Failure {
    /// Bad flags or parameters: exit code 2.
    Usage(anyhow::Error),
    /// Anything that goes wrong after validation: exit code 1.
    Runtime(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn parse_anchor(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once(',').context("anchor must look like i,j")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let c = &cli.common;
    let params = Params::with_ramification(c.p, c.f, c.e, c.m, c.k).map_err(usage)?;
    let tol = parse_tolerance(&c.tol).map_err(usage)?;
    let format = match c.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let mode = match (c.normalize, &c.anchor) {
        (NormalizeArg::MaxZero, _) => Normalization::MaxZero,
        (NormalizeArg::Anchored, Some(a)) => {
            let (i, j) = parse_anchor(a).map_err(usage)?;
            Normalization::Anchored(i, j)
        }
        (NormalizeArg::Anchored, None) => return Err(usage(anyhow!("--normalize anchored needs --anchor i,j"))),
    };

    let mut passed = true;
    let text = match &cli.command {
        Command::Green => {
            let table = solve_green(&params).map_err(runtime)?;
            let table = normalize(&table, mode).map_err(usage)?;
            export::render_green(&table, format)
        }
        Command::Cmatrix => {
            export::render_matrix(&params, &export::valuation_labels(params.m()), &c_matrix(&params), format)
        }
        Command::Operator => {
            export::render_matrix(&params, &export::coset_labels(&params), &build_operator_matrix(&params), format)
        }
        Command::Spectrum => {
            let s = spectrum(&build_operator_matrix(&params)).map_err(runtime)?;
            export::render_spectrum(&params, &s, format)
        }
        Command::Bvalue { i, j, l } => {
            if *i >= params.m() || *j >= params.m() {
                return Err(usage(anyhow!("valuations must lie below m = {}", params.m())));
            }
            let v = b_value(*i, *j, *l, &make_analytic_params(&params), &tol).map_err(usage)?;
            export::render_bounded(&v, format)
        }
        Command::Verify => {
            let report = verify(&params, &tol).map_err(runtime)?;
            passed = report.all_passed();
            export::render_report(&report, format)
        }
    };
    write_output(c.out.as_ref(), &text).map_err(runtime)?;
    Ok(passed)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
