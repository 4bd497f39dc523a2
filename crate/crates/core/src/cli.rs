//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ansatz::{FitConfig, MagnitudeTarget};
use crate::error::{Error, Result};
use crate::fci::{SolveMode, SolverOptions};
use crate::integrals::{build_hubbard, Boundary, Fcidump, HubbardSpec};
use crate::metrics::{evaluate, prepare_reference, sweep, write_sweep_csv, BasisChoice, FitReport, Scheme, SweepSpec};

pub const THREADS_ENV: &str = "OCCFACTOR_THREADS";

const DEFAULT_US: &str = "-10,-5,-2,-1,0,1,2,5,10";

#[derive(Parser, Debug)]
#[command(name = "occfactor", version, about = "Fit occupation-product ansatz models to full-CI wavefunctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the integrals of a Hubbard chain as an FCIDUMP file.
    Hubbard(HubbardArgs),
    /// Solve for the ground state of an FCIDUMP system.
    Solve(SolveArgs),
    /// Fit an ansatz model and report its quality.
    Fit(FitArgs),
    /// Fit a grid of Hubbard chains and orders, writing a CSV table.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct Electrons {
    /// Alpha electrons (required with --nbeta for odd site counts).
    #[arg(long)]
    nalpha: Option<usize>,
    /// Beta electrons.
    #[arg(long)]
    nbeta: Option<usize>,
}

#[derive(Args, Debug)]
struct HubbardArgs {
    #[arg(long)]
    sites: usize,
    #[arg(long, allow_hyphen_values = true)]
    u: f64,
    #[arg(long)]
    periodic: bool,
    /// Diagonal one-body term.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Hopping term.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    beta: f64,
    #[command(flatten)]
    electrons: Electrons,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BasisArg {
    Site,
    No,
}

impl From<BasisArg> for BasisChoice {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Site => BasisChoice::Site,
            BasisArg::No => BasisChoice::Natural,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Auto,
    Dense,
    Davidson,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => SolveMode::Auto,
            ModeArg::Dense => SolveMode::Dense,
            ModeArg::Davidson => SolveMode::Davidson,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Main,
    WeightedAbs,
    WeightedSquare,
    IrlsPnorm,
    IrlsCapped,
    IrlsKl,
    Iols,
}

impl SchemeArg {
    fn scheme(self) -> Scheme {
        let name = self.to_possible_value().expect("no skipped variants").get_name().replace('-', "_");
        Scheme::from_name(&name).expect("every variant names a scheme")
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TargetArg {
    Squared,
    Absolute,
}

impl From<TargetArg> for MagnitudeTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Squared => MagnitudeTarget::Squared,
            TargetArg::Absolute => MagnitudeTarget::Absolute,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long, value_enum, default_value = "site")]
    basis: BasisArg,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Number of dominant determinants to list.
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[command(flatten)]
    electrons: Electrons,
}

#[derive(Args, Debug)]
struct FitOptions {
    #[arg(long, value_enum, default_value = "main")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "squared")]
    target: TargetArg,
    /// Initial step multiplier of the refinement stage.
    #[arg(long, default_value_t = 1.0)]
    step_scale: f64,
    #[arg(long, value_enum, default_value = "no")]
    basis: BasisArg,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
}

impl FitOptions {
    fn fit_config(&self) -> FitConfig {
        FitConfig {
            target: self.target.into(),
            step_scale: self.step_scale,
            ..FitConfig::default()
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            mode: self.mode.into(),
            ..SolverOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long)]
    order: usize,
    #[command(flatten)]
    options: FitOptions,
    /// Write the fitted model (main scheme only).
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    #[command(flatten)]
    electrons: Electrons,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    sites: usize,
    /// Inclusive range `a..b` or a comma-separated list.
    #[arg(long, default_value = "1..5")]
    orders: String,
    /// Comma-separated on-site repulsions.
    #[arg(long, default_value = DEFAULT_US, allow_hyphen_values = true)]
    u: String,
    #[arg(long)]
    periodic: bool,
    #[command(flatten)]
    options: FitOptions,
    /// Write 0 in the wall_seconds column so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    electrons: Electrons,
    #[arg(long)]
    out: PathBuf,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn electron_counts(n: usize, e: &Electrons) -> Result<(usize, usize)> {
    match (e.nalpha, e.nbeta) {
        (Some(a), Some(b)) => Ok((a, b)),
        (None, None) if n % 2 == 0 => Ok((n / 2, n / 2)),
        (None, None) => Err(usage(format!("{n} sites is odd; give --nalpha and --nbeta"))),
        _ => Err(usage("--nalpha and --nbeta must be given together")),
    }
}

fn parse_orders(s: &str) -> Result<Vec<usize>> {
    let bad = || usage(format!("cannot parse orders `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_us(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|u| u.is_finite())
                .ok_or_else(|| usage(format!("cannot parse u value `{t}`")))
        })
        .collect()
}

fn read_system(path: &PathBuf, e: &Electrons) -> Result<(Fcidump, usize, usize)> {
    let dump = Fcidump::read(path)?;
    let (na, nb) = match (e.nalpha, e.nbeta) {
        (None, None) => dump.electron_counts()?,
        _ => electron_counts(dump.integrals.n_spatial(), e)?,
    };
    Ok((dump, na, nb))
}

fn format_report(r: &FitReport) -> String {
    let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
    [
        format!("scheme: {}", r.scheme),
        format!("basis: {}", r.basis),
        format!("order: {}", r.order),
        format!("overlap: {}", r.overlap),
        format!("r_squared: {}", r.r_squared),
        format!("e_true: {}", r.e_true),
        format!("e_approx: {}", r.e_approx),
        format!("rel_log_error: {}", r.rel_log_error),
        format!("n_parameters: {}", r.n_parameters),
        format!("fci_dimension: {}", r.fci_dimension),
        format!("parameter_fraction: {}", r.parameter_fraction),
        format!("magnitude_objective: {}", opt(r.magnitude_objective.map(|x| x.to_string()))),
        format!("restarted: {}", opt(r.restarted.map(|x| x.to_string()))),
        format!("converged: {}", opt(r.converged.map(|x| x.to_string()))),
        format!("ridge_used: {}", opt(r.ridge_used.map(|x| x.to_string()))),
    ]
    .join("\n")
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Hubbard(a) => {
            let (na, nb) = electron_counts(a.sites, &a.electrons)?;
            let spec = HubbardSpec {
                n_sites: a.sites,
                u: a.u,
                alpha: a.alpha,
                beta: a.beta,
                boundary: if a.periodic { Boundary::Periodic } else { Boundary::Open },
            };
            if na > a.sites || nb > a.sites {
                return Err(usage("more electrons of one spin than sites"));
            }
            let dump = Fcidump {
                integrals: build_hubbard(&spec)?,
                n_electrons: na + nb,
                ms2: na as i64 - nb as i64,
            };
            dump.write(&a.out)?;
        }
        Command::Solve(a) => {
            let (dump, na, nb) = read_system(&a.fcidump, &a.electrons)?;
            let solver = SolverOptions {
                mode: a.mode.into(),
                ..SolverOptions::default()
            };
            let reference = prepare_reference(&dump.integrals, na, nb, a.basis.into(), &solver)?;
            let psi = &reference.psi;
            let n = dump.integrals.n_spatial();
            writeln!(out, "energy: {:.12}", psi.energy()).map_err(out_err)?;
            writeln!(out, "determinants: {}", psi.len()).map_err(out_err)?;
            writeln!(out, "index alpha beta coefficient").map_err(out_err)?;
            for i in psi.dominant(a.top) {
                let d = psi.basis().get(i);
                writeln!(
                    out,
                    "{i} {:0w$b} {:0w$b} {:.12}",
                    d.alpha_occ,
                    d.beta_occ,
                    psi.coefficients()[i],
                    w = n
                )
                .map_err(out_err)?;
            }
        }
        Command::Fit(a) => {
            let (dump, na, nb) = read_system(&a.fcidump, &a.electrons)?;
            let scheme = a.options.scheme.scheme();
            if a.save_model.is_some() && scheme != Scheme::Main {
                return Err(usage("--save-model needs --scheme main"));
            }
            let reference = prepare_reference(&dump.integrals, na, nb, a.options.basis.into(), &a.options.solver())?;
            let eval = evaluate(&reference, a.order, &scheme, &a.options.fit_config())?;
            if let (Some(path), Some(model)) = (&a.save_model, &eval.model) {
                model.save(path)?;
            }
            match a.format {
                FormatArg::Text => writeln!(out, "{}", format_report(&eval.report)),
                FormatArg::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&eval.report).expect("report serializes")
                ),
            }
            .map_err(out_err)?;
        }
        Command::Sweep(a) => {
            let (na, nb) = electron_counts(a.sites, &a.electrons)?;
            let spec = SweepSpec {
                n_sites: a.sites,
                n_alpha: na,
                n_beta: nb,
                boundary: if a.periodic { Boundary::Periodic } else { Boundary::Open },
                us: parse_us(&a.u)?,
                orders: parse_orders(&a.orders)?,
                basis: a.options.basis.into(),
                scheme: a.options.scheme.scheme(),
                fit: a.options.fit_config(),
                solver: a.options.solver(),
            };
            let mut rows = sweep(&spec);
            if a.no_timing {
                rows.iter_mut().for_each(|r| r.wall_seconds = 0.0);
            }
            let file = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
            write_sweep_csv(&rows, std::io::BufWriter::new(file))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            writeln!(out, "wrote {} rows to {} ({failed} failed)", rows.len(), a.out.display()).map_err(out_err)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // a pool built earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs the command line `argv` (program name first), writing normal output
/// to `out` and diagnostics to `err`. Returns the process exit code: 0 on
/// success, 1 for usage or input errors, 2 for numerical failures.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| execute(cli, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
