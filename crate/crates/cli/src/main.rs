use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use capshock_core::contour::evans_contour;
use capshock_core::evans::{evans, real_axis_scan};
use capshock_core::io::{contour_table, evans_table, phase_table, profile_table, scan_table};
use capshock_core::profile::{solve_profile, validate};
use capshock_core::sweep::{run_sweep, summary_table};
use capshock_core::{ContourSpec, EvansSystem, GasParams, MeshOptions, ProfileSolution, SweepConfig, Tolerances};

const EXIT_NUMERIC: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_INVALID: u8 = 3;

/// Shock profiles of the isentropic gas with capillarity and their Evans-function stability.
#[derive(Parser)]
#[command(name = "capshock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one profile and print its validation report.
    Profile {
        #[command(flatten)]
        point: PointArgs,
        /// Write the profile table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate D₊ at one λ, or its winding number around the contour.
    Evans {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        contour: ContourArgs,
        /// λ as `re,im`; without it the whole contour is run.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Option<Complex64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Real-axis scan of D₊ on (origin_offset, radius].
    ScanReal {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        contour: ContourArgs,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a (v₊, d) grid sweep.
    Sweep(SweepArgs),
    /// Write figure data files.
    Emit {
        #[arg(value_enum)]
        kind: EmitKind,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        contour: ContourArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    Profile,
    Phase,
    Contour,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 1.4)]
    gamma: f64,
    #[arg(long)]
    v_plus: f64,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = -25.0, allow_hyphen_values = true)]
    l_minus: f64,
    #[arg(long, default_value_t = 25.0)]
    l_plus: f64,
    #[arg(long, default_value_t = MeshOptions::default().l_cap)]
    l_cap: f64,
    #[arg(long, default_value_t = Tolerances::default().abs)]
    abs_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().rel)]
    rel_tol: f64,
}

#[derive(Args)]
struct ContourArgs {
    #[arg(long, default_value_t = ContourSpec::default().radius)]
    radius: f64,
    #[arg(long, default_value_t = ContourSpec::default().n_arc)]
    n_arc: usize,
    #[arg(long, default_value_t = ContourSpec::default().n_imag)]
    n_imag: usize,
    #[arg(long, default_value_t = ContourSpec::default().origin_offset)]
    origin_offset: f64,
    #[arg(long, default_value_t = ContourSpec::default().max_depth)]
    max_depth: usize,
}

/// Config-file keys as flags; a flag wins over the file.
#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    v_plus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<f64>>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    n_arc: Option<usize>,
    #[arg(long)]
    n_imag: Option<usize>,
    #[arg(long)]
    origin_offset: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    l_minus: Option<f64>,
    #[arg(long)]
    l_plus: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    resume: bool,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re = re.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = im.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Complex64::new(re, im))
}

/// Failure before any computation: bad flags, parameters or config.
#[derive(Debug)]
struct Invalid(anyhow::Error);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid input: {:#}", self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| Invalid(e.into()).into())
}

impl PointArgs {
    fn params(&self) -> Result<GasParams> {
        invalid(GasParams::new(self.gamma, self.v_plus, self.d))
    }

    fn solve(&self) -> Result<ProfileSolution> {
        let params = self.params()?;
        let mesh = MeshOptions {
            l_cap: self.l_cap,
            ..MeshOptions::default()
        };
        solve_profile(&params, self.l_minus, self.l_plus, &mesh).context("profile solve failed")
    }

    fn system(&self, profile: ProfileSolution) -> EvansSystem {
        EvansSystem::new(profile).with_tolerances(Tolerances::new(self.abs_tol, self.rel_tol))
    }
}

impl ContourArgs {
    fn spec(&self) -> Result<ContourSpec> {
        let spec = ContourSpec {
            radius: self.radius,
            n_arc: self.n_arc,
            n_imag: self.n_imag,
            origin_offset: self.origin_offset,
            max_depth: self.max_depth,
            ..ContourSpec::default()
        };
        invalid(spec.validate())?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Profile { point, out } => {
            let profile = point.solve()?;
            let report = validate(&profile)?;
            if let Some(path) = out {
                profile_table(&profile).write(&path)?;
            }
            println!(
                "classification {} nodes {} L [{}, {}]",
                profile.classification,
                profile.len(),
                profile.l_minus(),
                profile.l_plus()
            );
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.numerically_valid() { 0 } else { EXIT_NUMERIC })
        }
        Command::Evans {
            point,
            contour,
            lambda,
            out,
        } => {
            let spec = contour.spec()?;
            let system = point.system(point.solve()?);
            match lambda {
                Some(l) => {
                    let e = evans(l, &system)?;
                    println!("lambda {} D {} ln D {} steps {}", l, e.value, e.log_value, e.stats().steps);
                    if let Some(path) = out {
                        evans_table(&[e]).write(&path)?;
                    }
                    Ok(0)
                }
                None => {
                    let r = evans_contour(&system, &spec)?;
                    println!(
                        "winding {} samples {} refinements {} min ln|D| {:.6}",
                        r.winding,
                        r.samples.len(),
                        r.refinements_used,
                        r.min_ln_abs_d
                    );
                    if let Some(path) = out {
                        contour_table(&r).write(&path)?;
                    }
                    Ok(if r.winding == 0 { 0 } else { EXIT_UNSTABLE })
                }
            }
        }
        Command::ScanReal {
            point,
            contour,
            points,
            out,
        } => {
            let spec = contour.spec()?;
            let system = point.system(point.solve()?);
            let r = real_axis_scan(&system, spec.origin_offset, spec.radius, points)?;
            println!(
                "points {} sign changes {:?} min ln|D| {:.6} at {}",
                r.lambdas.len(),
                r.sign_changes,
                r.min_ln_abs,
                r.argmin
            );
            if let Some(path) = out {
                scan_table(&r).write(&path)?;
            }
            Ok(if r.has_crossing() { EXIT_NUMERIC } else { 0 })
        }
        Command::Sweep(args) => sweep(args),
        Command::Emit {
            kind,
            point,
            contour,
            out,
        } => {
            let spec = contour.spec()?;
            let profile = point.solve()?;
            let table = match kind {
                EmitKind::Profile => profile_table(&profile),
                EmitKind::Phase => phase_table(&profile),
                EmitKind::Contour => contour_table(&evans_contour(&point.system(profile), &spec)?),
            };
            table.write(&out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn sweep(args: SweepArgs) -> Result<u8> {
    let mut cfg = match &args.config {
        Some(path) => invalid(SweepConfig::load(path))?,
        None => SweepConfig::default(),
    };
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { cfg.$field = v; })*
        };
    }
    apply!(gamma, v_plus, d, radius, n_arc, n_imag, origin_offset, l_minus, l_plus, abs_tol, rel_tol, jobs, out_dir);
    cfg.resume |= args.resume;
    invalid(cfg.validate())?;
    let records = run_sweep(&cfg)?;
    print!("{}", summary_table(&records));
    let failed = records.iter().filter(|r| !r.pass).count();
    eprintln!("{} points, {} failed", records.len(), failed);
    Ok(if records.iter().any(|r| r.unstable()) {
        EXIT_UNSTABLE
    } else if failed > 0 {
        EXIT_NUMERIC
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Invalid>() { EXIT_INVALID } else { EXIT_NUMERIC })
        }
    }
}
