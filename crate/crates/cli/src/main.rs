use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthobracket::config::{parse_coeffs, parse_sizes};
use orthobracket::{run, Command, Compare, ConfigError, Family, FlowConfig, FlowKindArg, RunConfig};

#[derive(Parser)]
#[command(name = "orthobracket", version, about = "Poisson bracket verification for OPRL and OPUC")]
struct Cli {
    /// TOML run configuration; replaces the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand)]
enum Sub {
    /// Bracket identities, roundtrips, stripping, interlacing, periodic checks.
    Verify(Common),
    /// Integrate a Hamiltonian flow and compare with the exact solution.
    Flow(FlowArgs),
    /// Jacobian determinants of the spectral maps.
    Jacobian(Common),
    /// Monodromy, discriminant and Floquet checks for the given periods.
    Periodic(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Oprl,
    Opuc,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Toda,
    Schur,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareArg {
    Exact,
    None,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Sizes: "2..6", "3" or "2,4".
    #[arg(long = "n", default_value = "2..6")]
    n: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replaces every default tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 8)]
    grid: usize,
    /// JSON report destination (trajectory CSV for `flow`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "toda")]
    kind: KindArg,
    /// OPRL: c_0,c_1,...; OPUC: re,im pairs of b_0,b_1,...
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value = "exact")]
    compare: CompareArg,
}

fn family(f: Option<FamilyArg>) -> Option<Family> {
    f.map(|f| match f {
        FamilyArg::Oprl => Family::Oprl,
        FamilyArg::Opuc => Family::Opuc,
    })
}

fn from_common(command: Command, c: Common) -> Result<RunConfig, ConfigError> {
    Ok(RunConfig {
        command,
        family: family(c.family),
        seed: c.seed,
        sizes: parse_sizes(&c.n)?,
        tolerance: c.tol,
        tolerances: BTreeMap::new(),
        grid: c.grid,
        flow: None,
        out: c.out,
    })
}

fn build(cli: Cli) -> Result<RunConfig, ConfigError> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(ConfigError("--config and a subcommand are mutually exclusive".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)
        }
        (None, None) => Err(ConfigError("a subcommand or --config is required".into())),
        (None, Some(sub)) => {
            let cfg = match sub {
                Sub::Verify(c) => from_common(Command::Verify, c)?,
                Sub::Jacobian(c) => from_common(Command::Jacobian, c)?,
                Sub::Periodic(c) => from_common(Command::Periodic, c)?,
                Sub::Flow(f) => {
                    let mut cfg = from_common(Command::Flow, f.common)?;
                    cfg.flow = Some(FlowConfig {
                        kind: match f.kind {
                            KindArg::Toda => FlowKindArg::Toda,
                            KindArg::Schur => FlowKindArg::Schur,
                            KindArg::Custom => FlowKindArg::Custom,
                        },
                        coeffs: f.coeffs.as_deref().map(parse_coeffs).transpose()?.unwrap_or_default(),
                        t: f.t,
                        dt: f.dt,
                        compare: match f.compare {
                            CompareArg::Exact => Compare::Exact,
                            CompareArg::None => Compare::None,
                        },
                    });
                    cfg
                }
            };
            cfg.validate()?;
            Ok(cfg)
        }
    }
}

fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

fn main() -> ExitCode {
    let cfg = match build(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for m in &out.messages {
        eprintln!("{m}");
    }
    for (path, text) in &out.csv {
        if let Err(e) = write_file(path, text) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    // flows send the CSV to --out, so their JSON stays on stdout
    match (&cfg.out, cfg.command) {
        (Some(path), c) if c != Command::Flow => {
            if let Err(e) = write_file(path, &out.json) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.json.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    for f in out.failures() {
        eprintln!("FAIL {} N={}: residual {:e} > {:e} {}", f.identity_id, f.size, f.max_residual, f.tolerance, f.notes);
    }
    ExitCode::from(out.exit_code() as u8)
}
