use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ncw_cli::commands::{run_command, Command};
use ncw_cli::dsl::parse_structure;
use ncw_cli::report::Format;
use ncw_core::symmetry::Flavor;

#[derive(Parser)]
#[command(name = "ncw", version, about = "Exact Newton-Cartan symmetry computations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Structure file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Cor,
    Mil,
    Gal,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Flavor {
        match f {
            FlavorArg::Cor => Flavor::Coriolis,
            FlavorArg::Mil => Flavor::Milne,
            FlavorArg::Gal => Flavor::Galilei,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structure invariants
    Validate(Common),
    /// Print the connection components
    Connection(Common),
    /// Print the curvature and check its Newtonian symmetry
    Curvature(Common),
    /// Solve for a symmetry algebra up to a degree bound
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        #[arg(long, default_value_t = 1)]
        degree: u32,
    },
    /// Structure constants of a solved algebra
    Brackets {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = FlavorArg::Gal)]
        flavor: FlavorArg,
        #[arg(long, default_value_t = 1)]
        degree: u32,
    },
    /// Classify a vector field, given as comma-separated components
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        field: String,
    },
    /// Extended algebra, bracket table and cocycle verdict
    Extend {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        #[arg(long, default_value_t = 1)]
        degree: u32,
    },
    /// Infinitesimal gauge variation and connection invariance
    Gauge {
        #[command(flatten)]
        common: Common,
        /// Boost 1-form, comma-separated components
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// Optional vector field part of the gauge element
        #[arg(long, allow_hyphen_values = true)]
        field: Option<String>,
    },
}

fn split(cmd: Cmd) -> (Common, Command) {
    match cmd {
        Cmd::Validate(c) => (c, Command::Validate),
        Cmd::Connection(c) => (c, Command::Connection),
        Cmd::Curvature(c) => (c, Command::Curvature),
        Cmd::Solve { common, flavor, degree } => (
            common,
            Command::Solve {
                flavor: flavor.into(),
                degree,
            },
        ),
        Cmd::Brackets { common, flavor, degree } => (
            common,
            Command::Brackets {
                flavor: flavor.into(),
                degree,
            },
        ),
        Cmd::Classify { common, field } => (common, Command::Classify { field }),
        Cmd::Extend { common, flavor, degree } => (
            common,
            Command::Extend {
                flavor: flavor.into(),
                degree,
            },
        ),
        Cmd::Gauge { common, psi, f, field } => (common, Command::Gauge { psi, f, field }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (common, command) = split(cli.command);
    let text = match std::fs::read_to_string(&common.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.input.display());
            return ExitCode::from(2);
        }
    };
    let outcome = parse_structure(&text).and_then(|doc| run_command(&doc, &command));
    match outcome {
        Ok(o) => {
            let format = match common.format {
                OutputFormat::Text => Format::Text,
                OutputFormat::Json => Format::Json,
            };
            print!("{}", o.report.render(format));
            ExitCode::from(if o.verdict { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}: {e}", common.input.display());
            ExitCode::from(2)
        }
    }
}
