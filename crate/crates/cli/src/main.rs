mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ultrastab::reynolds::RepTag;

#[derive(Parser, Debug)]
#[command(name = "ultrastab", version, about = "Exact p-adic stability bounds for SL2 representations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Each can also be set through an
/// `ULTRASTAB_*` environment variable.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Residue characteristic.
    #[arg(long, global = true, env = "ULTRASTAB_P")]
    pub p: Option<u64>,
    /// Representation: standard, adjoint or symN.
    #[arg(long, global = true, env = "ULTRASTAB_REP")]
    pub rep: Option<RepTag>,
    /// Congruence level cap.
    #[arg(long, global = true, env = "ULTRASTAB_LEVEL")]
    pub level: Option<u32>,
    /// Radius of the window around the origin.
    #[arg(long, global = true, env = "ULTRASTAB_WINDOW")]
    pub window: Option<u64>,
    #[arg(long, global = true, env = "ULTRASTAB_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "ULTRASTAB_SAMPLES")]
    pub samples: Option<usize>,
    /// JSON harness configuration; flags override its fields.
    #[arg(long, global = true, env = "ULTRASTAB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Write the result here, with a run manifest next to it.
    #[arg(long, global = true, env = "ULTRASTAB_OUT")]
    pub out: Option<PathBuf>,
    /// Run sweeps on one thread.
    #[arg(long, global = true, env = "ULTRASTAB_SEQUENTIAL")]
    pub sequential: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Gauss norms of Laurent polynomials on the apartment.
    #[command(subcommand)]
    Tropical(TropicalCmd),
    /// Vertices of the tree of SL2.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Weight spaces and Reynolds projectors of a representation.
    #[command(subcommand)]
    Rep(RepCmd),
    /// Stability constants and sampled verification.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// Run every property sweep and print a pass/fail table.
    Selftest(SelftestArgs),
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TropicalCmd {
    /// Gauss norm valuation of a polynomial at a point.
    Eval {
        /// Polynomial as JSON: {"rank", "p", "terms": [{"chi", "coeff"}]}.
        #[arg(long)]
        poly: String,
        /// Comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Affine pieces of the tropicalisation.
    Pieces {
        #[arg(long)]
        poly: String,
    },
    /// Midpoint convexity along a segment.
    Convexity {
        #[arg(long)]
        poly: String,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupChoice {
    Torus,
    Special,
}

/// Vertices are JSON `{"a", "b", "p"}` or `a,b` with the prime from `--p`.
#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeCmd {
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    Path {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Convex hull of the given vertices.
    Hull {
        #[arg(long = "vertex", required = true, allow_hyphen_values = true)]
        vertices: Vec<String>,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
    },
    /// Orbit of a vertex under a compact group.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        vertex: String,
        #[arg(long, value_enum, default_value = "torus")]
        group: GroupChoice,
    },
    /// A fixed point of the integral torus in the hull of the orbit.
    Fixed {
        #[arg(long, allow_hyphen_values = true)]
        vertex: String,
    },
    /// Whether a group element lies in the section over the window.
    Ymember {
        /// Element as JSON: {"p", "rows": [["a", "b"], ["c", "d"]]}.
        #[arg(long)]
        element: String,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepCmd {
    /// Torus weight spaces of gl(V).
    Decompose,
    /// Compare both sides of the Reynolds identity.
    Reynolds {
        #[arg(long)]
        element: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, allow_hyphen_values = true)]
        covector: String,
    },
    /// Separation by the torus sample set and the centralizer complement.
    Star {
        /// Exponents `j` of `diag(p^j, p^-j)`; defaults to a centred run.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityCmd {
    Constants,
    /// Sample the bound with the safe constant.
    Verify {
        #[arg(long, value_enum, default_value = "json")]
        format: SampleFormat,
    },
    /// Sweep each inequality of the chain separately.
    Chain {
        #[arg(long)]
        chain_samples: Option<usize>,
    },
    /// Write `g = y z` with `y` in the section over the window.
    Decompose {
        #[arg(long)]
        element: String,
    },
    /// Constants, sampled bound and chain sweeps together.
    Report,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SelftestArgs {
    /// Divide every sample count by ten.
    #[arg(long)]
    pub quick: bool,
    /// Emit the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.precondition());
            ExitCode::from(1)
        }
    }
}
