use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "fnv", version, about = "Fixed-node CTMC verifier for local Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn common(&self) -> &Common {
        match &self.command {
            Command::Verify { common, .. }
            | Command::Estimate { common }
            | Command::OracleCheck { common }
            | Command::MakeInstance { common, .. }
            | Command::SampleTrajectory { common }
            | Command::InspectGenerator { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Args, Serialize)]
pub struct Common {
    /// Instance file, or a bundle holding instance and witness.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Witness file; defaults to the witness inside the instance bundle.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Horizon t (default ⌈10n/ε⌉).
    #[arg(long)]
    pub t: Option<f64>,
    /// Transition cap M (default 2^k·m·n³·t·‖H‖).
    #[arg(long = "M")]
    pub max_transitions: Option<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Continuous)]
    pub mode: Mode,
    /// Grid step of the discretized walk (default 1e-6·t).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    /// One JSON record per line (trajectories only).
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Product,
    History,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Matrix {
    FixedNode,
    Generator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    T,
    Trials,
    Epsilon,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One verification run on trial stream 0.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Keep the visited path in the trace.
        #[arg(long)]
        record_trajectory: bool,
    },
    /// Acceptance frequency over --trials independent runs.
    Estimate {
        #[command(flatten)]
        common: Common,
    },
    /// Dense lemma suite on the shifted instance and the witness state.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Generate an instance with a witness.
    MakeInstance {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        family: Family,
        /// Qubits (product, no) or circuit wires (history).
        #[arg(long)]
        n: usize,
        /// Ground energy of a No instance.
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Extra two-qubit projectors in a product instance (default n − 1).
        #[arg(long)]
        extra: Option<usize>,
        /// Random phases in product states; the instance is realified.
        #[arg(long)]
        complex: bool,
    },
    /// Gillespie trajectory of the witness generator (must be legal).
    SampleTrajectory {
        #[command(flatten)]
        common: Common,
    },
    /// One column of the fixed-node matrix or of the generator.
    InspectGenerator {
        #[command(flatten)]
        common: Common,
        /// Basis string of the column (default x_in).
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum, default_value_t = Matrix::Generator)]
        matrix: Matrix,
    },
    /// Re-estimate acceptance for each value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}
