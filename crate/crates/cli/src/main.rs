//! `bcspectra` command-line front end.
//!
//! Exit codes: 0 on success, 1 for domain errors (including a failing
//! `verify`), 2 for configuration and I/O problems.

mod csv;
mod demo;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcspectra::config::{
    bound_state_json, load_bc, load_model, matrix_json, segment_state_json, verdict_name, ResolvedBc,
};
use bcspectra::current::{sign_structure_invariance, CurrentDiagonalization};
use bcspectra::hamiltonian::PolyMatrixHamiltonian;
use bcspectra::models::n4_current_eigenvalues;
use bcspectra::scan::{default_window, scan_haar, scan_nu_grid, ScanRow};
use bcspectra::spectra::{segment_wavefunction, solve_half_line, solve_segment, wavefunction};
use bcspectra::verify::{self, Injection};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bcspectra", version, about = "Boundary conditions and bound states of polynomial k.p Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Current matrix, mover counts and admissibility of a model.
    Analyze {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long, default_value_t = 1.0)]
        l: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bound states on the half-line x >= 0.
    Solve(SolveArgs),
    /// Eigenstates of the segment [0, X].
    Segment {
        #[command(flatten)]
        common: SolveArgs,
        /// Segment length.
        #[arg(short = 'X', long = "length")]
        length: f64,
        /// Boundary file for the right end (defaults to the left one).
        #[arg(long)]
        bc_right: Option<PathBuf>,
    },
    /// Half-line spectra over a family of boundary conditions, as CSV.
    Scan(ScanArgs),
    /// Run the self-check suites and print a JSON summary.
    Verify {
        #[arg(long, value_enum, default_value_t = InjectArg::None)]
        inject: InjectArg,
    },
    /// Analytic versus numeric tables for the worked models, as CSV.
    Demo {
        #[arg(value_enum)]
        name: demo::DemoName,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    model: PathBuf,
    #[arg(short, long)]
    bc: PathBuf,
    /// Energy window `lo,hi`.
    #[arg(short, long, allow_hyphen_values = true)]
    window: String,
    /// Number of grid points of the energy scan (at least 64).
    #[arg(short = 'n', long, default_value_t = 256)]
    grid: usize,
    #[arg(short, long, default_value_t = 1.0)]
    l: f64,
    /// JSON output file (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the wavefunctions on a uniform grid to this CSV file.
    #[arg(long)]
    psi_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    psi_points: usize,
    /// Right end of the wavefunction grid (half-line only).
    #[arg(long)]
    psi_x_max: Option<f64>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(short, long)]
    model: PathBuf,
    /// Scan `U = exp(-i nu)` over this many angles in (-pi, pi].
    #[arg(long, conflicts_with = "haar", required_unless_present = "haar")]
    nu_grid: Option<usize>,
    /// Scan this many Haar-random unitaries.
    #[arg(long)]
    haar: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Energy window `lo,hi` (defaults to the widest bulk gap).
    #[arg(short, long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(short = 'n', long, default_value_t = 128)]
    grid: usize,
    #[arg(short, long, default_value_t = 1.0)]
    l: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectArg {
    None,
    NonHermitian,
    SymmetricOnlySegment,
}

#[derive(Debug)]
enum CliError {
    Domain(String),
    Config(String),
}

impl From<bcspectra::Error> for CliError {
    fn from(e: bcspectra::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::Analyze { model, l, output } => {
            check_length(l)?;
            let h = load_model(&model)?;
            emit(output.as_deref(), &pretty(&analyze(&h, l)?))?;
        }
        Command::Solve(args) => solve(&args)?,
        Command::Segment {
            common,
            length,
            bc_right,
        } => segment(&common, length, bc_right.as_deref())?,
        Command::Scan(args) => scan(&args)?,
        Command::Verify { inject } => {
            let injection = match inject {
                InjectArg::None => Injection::None,
                InjectArg::NonHermitian => Injection::NonHermitian,
                InjectArg::SymmetricOnlySegment => Injection::SymmetricOnlySegment,
            };
            let report = verify::run(injection);
            emit(None, &pretty(&report.to_json()))?;
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Demo { name, output } => emit(output.as_deref(), &demo::run(name)?.render())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_length(l: f64) -> CliResult<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("--l must be a positive number, got {l}")))
    }
}

fn parse_window(text: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Config(format!("--window expects `lo,hi`, got `{text}`"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!("--window needs finite lo < hi, got {lo}, {hi}")));
    }
    Ok((lo, hi))
}

fn check_grid(grid: usize) -> CliResult<()> {
    if grid < 64 {
        return Err(CliError::Config(format!("--grid must be at least 64, got {grid}")));
    }
    Ok(())
}

fn analyze(h: &PolyMatrixHamiltonian, l: f64) -> CliResult<Value> {
    let d = CurrentDiagonalization::for_hamiltonian(h, l)?;
    let decade: Vec<f64> = (0..5).map(|k| l * 10f64.powf((k as f64 - 2.0) / 4.0)).collect();
    let invariance = match sign_structure_invariance(h, &decade) {
        Ok(_) => json!({ "l_values": decade, "unchanged": true }),
        Err(e) => json!({ "l_values": decade, "unchanged": false, "error": e.to_string() }),
    };
    let admissible = d.n_plus == d.n_minus;
    let verdict = if admissible {
        format!("admissible boundary conditions form U({})", d.n_plus)
    } else {
        let msg = format!(
            "no admissible BCs: a boundary cannot be introduced with {} right and {} left movers",
            d.n_plus, d.n_minus
        );
        eprintln!("warning: {msg}");
        msg
    };
    let mut report = json!({
        "m": h.m(),
        "top_orders": h.top_orders(),
        "nc": h.nc(),
        "l": l,
        "current_matrix": matrix_json(&d.j_matrix),
        "eigenvalues": d.eigvals,
        "n_plus": d.n_plus,
        "n_minus": d.n_minus,
        "admissible": admissible,
        "verdict": verdict,
        "length_invariance": invariance,
    });
    let coeffs = h.coeffs();
    let pure_quartic = h.m() == 1
        && h.top_orders() == [4]
        && coeffs[1][(0, 0)].norm() == 0.0
        && coeffs[3][(0, 0)].norm() == 0.0
        && coeffs[2][(0, 0)].im == 0.0
        && coeffs[4][(0, 0)].im == 0.0;
    if pure_quartic {
        let closed = n4_current_eigenvalues(coeffs[2][(0, 0)].re, coeffs[4][(0, 0)].re, l);
        report["closed_form_eigenvalues"] = json!(closed);
    }
    Ok(report)
}

fn solve(args: &SolveArgs) -> CliResult<()> {
    check_length(args.l)?;
    check_grid(args.grid)?;
    let window = parse_window(&args.window)?;
    let h = load_model(&args.model)?;
    let d = CurrentDiagonalization::for_hamiltonian(&h, args.l)?;
    let bc = load_bc(&args.bc)?.resolve(&d)?.admissible()?;
    let states = solve_half_line(&bc, window, args.grid)?;
    let doc = json!({
        "kind": "half_line",
        "l": args.l,
        "window": [window.0, window.1],
        "u": matrix_json(bc.u()),
        "energies": states.iter().map(|s| s.energy).collect::<Vec<_>>(),
        "states": states.iter().map(bound_state_json).collect::<Vec<_>>(),
    });
    emit(args.output.as_deref(), &pretty(&doc))?;
    if let Some(path) = &args.psi_csv {
        let x_max = match args.psi_x_max {
            Some(x) if x.is_finite() && x > 0.0 => x,
            Some(x) => return Err(CliError::Config(format!("--psi-x-max must be positive, got {x}"))),
            None => {
                let slowest = states
                    .iter()
                    .flat_map(|s| s.solutions.iter().map(|p| p.p.im))
                    .fold(f64::INFINITY, f64::min);
                if slowest.is_finite() { 10.0 / slowest } else { 1.0 }
            }
        };
        let xs = grid(0.0, x_max, args.psi_points)?;
        let columns = states.iter().map(|s| wavefunction(s, &xs)).collect::<Result<Vec<_>, _>>()?;
        emit(Some(path), &csv::psi_table(&xs, &columns).render())?;
    }
    Ok(())
}

fn segment(args: &SolveArgs, length: f64, bc_right: Option<&Path>) -> CliResult<()> {
    check_length(args.l)?;
    check_grid(args.grid)?;
    if !(length.is_finite() && length > 0.0) {
        return Err(CliError::Config(format!("--length must be positive, got {length}")));
    }
    let window = parse_window(&args.window)?;
    let h = load_model(&args.model)?;
    let d = CurrentDiagonalization::for_hamiltonian(&h, args.l)?;
    let resolved_left = load_bc(&args.bc)?.resolve(&d)?;
    let resolved_right = match bc_right {
        Some(p) => load_bc(p)?.resolve(&d)?,
        None => resolved_left.clone(),
    };
    let verdict = |r: &ResolvedBc| match r {
        ResolvedBc::Admissible(_) => "admissible",
        ResolvedBc::Other { verdict, .. } => verdict_name(verdict),
    };
    let verdicts = json!({ "left": verdict(&resolved_left), "right": verdict(&resolved_right) });
    let left = resolved_left.into_segment_boundary(&d);
    let right = resolved_right.into_segment_boundary(&d);
    let states = solve_segment(&h, &left, &right, length, window, args.grid)?;
    let doc = json!({
        "kind": "segment",
        "l": args.l,
        "length": length,
        "window": [window.0, window.1],
        "boundaries": verdicts,
        "energies": states.iter().map(|s| s.energy).collect::<Vec<_>>(),
        "states": states.iter().map(segment_state_json).collect::<Vec<_>>(),
    });
    emit(args.output.as_deref(), &pretty(&doc))?;
    if let Some(path) = &args.psi_csv {
        let xs = grid(0.0, length, args.psi_points)?;
        let columns = states.iter().map(|s| segment_wavefunction(s, &xs)).collect::<Result<Vec<_>, _>>()?;
        emit(Some(path), &csv::psi_table(&xs, &columns).render())?;
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Config(format!("--psi-points must be at least 2, got {points}")));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn scan(args: &ScanArgs) -> CliResult<()> {
    check_length(args.l)?;
    check_grid(args.grid)?;
    let h = load_model(&args.model)?;
    let window = match &args.window {
        Some(w) => parse_window(w)?,
        None => default_window(&h, args.l)?,
    };
    let (label, rows): (&str, Vec<ScanRow>) = match (args.nu_grid, args.haar) {
        (Some(n), None) if n > 0 => ("nu", scan_nu_grid(&h, args.l, n, window, args.grid)?),
        (None, Some(n)) if n > 0 => ("sample", scan_haar(&h, args.l, n, args.seed, window, args.grid)?),
        _ => return Err(CliError::Config("give exactly one of --nu-grid N or --haar N with N > 0".into())),
    };
    emit(args.output.as_deref(), &csv::scan_table(label, &rows).render())
}
