//! `posheaf`: sheaf cohomology on finite posets, bundles of sheaves and the
//! chain-level certificate of their spectral sequence.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posheaf::linalg::Ring;

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "posheaf", version, about = "Sheaf cohomology on finite posets and bundles of sheaves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Coefficient ring (defaults to the document's ring).
    #[arg(long, global = true, value_enum)]
    pub ring: Option<RingArg>,
    /// Highest cohomological degree to report.
    #[arg(long, global = true)]
    pub max_degree: Option<usize>,
    /// Seed for random generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings (reports are then not reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Normalize non-canonical rationals such as "2/4" instead of rejecting them.
    #[arg(long, global = true)]
    pub lenient: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RingArg {
    Rational,
    Integer,
}

impl From<RingArg> for Ring {
    fn from(r: RingArg) -> Self {
        match r {
            RingArg::Rational => Ring::Rational,
            RingArg::Integer => Ring::Integer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a poset, sheaf or bundle document.
    Validate(Input),
    /// Cohomology of a sheaf (a poset gets the constant sheaf, a bundle its total sheaf).
    Cohomology(Input),
    /// Emit the total sheaf of a bundle as a sheaf document.
    TotalSheaf(Input),
    /// Spectral pages with the E_2 and convergence checks.
    Pages(Input),
    /// Check that the traversal map is a chain map and a quasi-isomorphism.
    PhiCheck(Input),
    /// Admissible witness and recursive decomposition of a base poset.
    Admissible(Input),
    /// Certificate tree for the main theorem over a recursively admissible base.
    VerifyMain(Input),
    /// Generate a fixture document.
    Gen {
        #[command(subcommand)]
        fixture: Fixture,
    },
}

#[derive(Args, Debug)]
pub struct Input {
    /// Input document; `-` or omitted reads stdin.
    pub path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Boolean,
    Chain,
    Antichain,
}

#[derive(Subcommand, Debug)]
pub enum Fixture {
    /// Boolean lattice B_n.
    Boolean { n: usize },
    /// Chain with n elements.
    Chain { n: usize },
    /// Antichain with n elements.
    Antichain { n: usize },
    /// Constant bundle with a chain fiber and constant stalks.
    ConstantBundle {
        #[arg(long, value_enum, default_value_t = Shape::Boolean)]
        base: Shape,
        #[arg(long, default_value_t = 2)]
        base_size: usize,
        /// Number of elements of the chain fiber.
        #[arg(long, default_value_t = 2)]
        fiber: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Random natural bundle over a random recursively admissible base.
    Random {
        #[arg(long, default_value_t = 4)]
        max_base: usize,
        #[arg(long, default_value_t = 3)]
        max_fiber: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Use B_n as the base instead of a random one.
        #[arg(long)]
        boolean_base: Option<usize>,
    },
    /// Random sheaf on a random poset.
    RandomSheaf {
        #[arg(long, default_value_t = 6)]
        elements: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
    },
    /// Base 0 < 1, fiber over 0 a chain, fiber over 1 a point.
    I1 {
        #[arg(long, default_value_t = 2)]
        len: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Square of 2-dimensional stalks over B_2.
    Cube,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, code) = match commands::run(&cli) {
        Ok(commands::Output::Document(text)) => (text, report::EXIT_PASS),
        Ok(commands::Output::Report(r)) => render(&cli.global, r),
        Err(r) => render(&cli.global, *r),
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output) {
                eprintln!("posheaf: cannot write {}: {e}", path.display());
                return ExitCode::from(report::EXIT_IO as u8);
            }
        }
        None => print!("{output}"),
    }
    ExitCode::from(code as u8)
}

fn render(global: &Global, r: Report) -> (String, i32) {
    if let Some(e) = &r.error {
        eprintln!("posheaf {}: {e}", r.command);
    }
    let text = match global.format {
        Format::Json => r.to_json(),
        Format::Text => r.to_text(),
    };
    (text, r.exit_code)
}
