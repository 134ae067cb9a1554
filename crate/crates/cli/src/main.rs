//! `qroute`: build, verify and benchmark graph-local routing circuits.
//!
//! Exit codes: 0 on success, 1 on a usage or validation error, 2 when a
//! self-test or verification finds a wrong circuit.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const VERSION: &str = env!("QROUTE_VERSION");

#[derive(Debug, Parser)]
#[command(name = "qroute", version = VERSION, about = "Reversible sorting networks, quantum data movement and circuit emulation on host graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or inspect a host graph.
    Topo(TopoArgs),
    /// Build, verify and compile sorting networks.
    Sortnet(SortnetArgs),
    /// Build the data mover V_N and check it on random permutations.
    Move(MoveArgs),
    /// Build the parallel lookup U_(N,N) and check it against the gather oracle.
    Pram(PramArgs),
    /// Emulate a logical circuit on a host graph.
    Emulate(EmulateArgs),
    /// Grover search dynamics against the closed form.
    Grover(GroverArgs),
    /// Element Distinctness experiments.
    Distinct(DistinctArgs),
    /// Collision Finding experiments.
    Collision(CollisionArgs),
    /// Depth and width series per topology family.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Line,
    Grid,
    Hypercube,
    Complete,
}

/// Host graph given either as a JSON file or a family and node count.
#[derive(Debug, Args)]
pub struct HostArgs {
    /// Topology JSON file; overrides --family.
    #[arg(long)]
    pub topo: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hypercube")]
    pub family: FamilyArg,
}

#[derive(Debug, Args)]
pub struct TopoArgs {
    #[arg(long, value_enum, required_unless_present = "input")]
    pub kind: Option<FamilyArg>,
    /// Node count (line, hypercube, complete).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Describe an existing topology file instead of building one.
    #[arg(long, conflicts_with = "kind")]
    pub input: Option<PathBuf>,
    /// Write the topology as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetKind {
    Bitonic,
    Oets,
    Grid,
}

#[derive(Debug, Args)]
pub struct SortnetArgs {
    #[arg(long, value_enum, required_unless_present = "input")]
    pub kind: Option<NetKind>,
    /// Bitonic order: 2^t wires.
    #[arg(long)]
    pub t: Option<usize>,
    /// Wires of an odd-even transposition network.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Load a network JSON file instead of building one.
    #[arg(long, conflicts_with = "kind")]
    pub input: Option<PathBuf>,
    /// Check the network with the 0-1 principle.
    #[arg(long)]
    pub verify: bool,
    /// Also compile the network reversibly with keys of this many bits.
    #[arg(long)]
    pub key_bits: Option<usize>,
    /// Write the network as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MoveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[command(flatten)]
    pub host: HostArgs,
    /// Fixed permutation, comma separated: slot i receives x[perm[i]].
    /// Without it destinations are a quantum register.
    #[arg(long, value_delimiter = ',')]
    pub perm: Option<Vec<usize>>,
    #[arg(long, default_value_t = 500)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the circuit as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelfTest {
    Random,
    Adversarial,
}

#[derive(Debug, Args)]
pub struct PramArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[command(flatten)]
    pub host: HostArgs,
    /// Build U_(1,N) instead of U_(N,N).
    #[arg(long)]
    pub single: bool,
    #[arg(long, value_enum)]
    pub selftest: Option<SelfTest>,
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    /// Logical circuit JSON (`slices` or flat `gates`).
    #[arg(long, required_unless_present = "random_width")]
    pub circuit: Option<PathBuf>,
    /// Generate a random {H, T, CNOT} circuit of this width instead.
    #[arg(long, conflicts_with = "circuit")]
    pub random_width: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub random_depth: usize,
    /// Save the logical circuit used as JSON.
    #[arg(long)]
    pub save_circuit: Option<PathBuf>,
    #[command(flatten)]
    pub host: HostArgs,
    /// Node count when the host is given by --family; defaults to the
    /// circuit width.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Move data even for gates on adjacent nodes.
    #[arg(long)]
    pub no_skip: bool,
    /// Check statevector equivalence of the emulated circuit.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the emulated physical circuit as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Iteration count or `auto` for floor(pi/4 sqrt(N/M)).
    #[arg(long, default_value = "auto")]
    pub iters: String,
    /// Measurement shots to sample from the final state.
    #[arg(long, default_value_t = 0)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DistinctArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use injective tables instead of planting one collision.
    #[arg(long)]
    pub injective: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollisionArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub s: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the direct parallel search instead of the reduction.
    #[arg(long)]
    pub direct: bool,
    /// Use one-to-one tables instead of two-to-one.
    #[arg(long)]
    pub one_to_one: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "hypercube,line,complete")]
    pub families: Vec<FamilyArg>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    SelfTestFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Topo(a) => commands::topo(&a),
        Command::Sortnet(a) => commands::sortnet(&a),
        Command::Move(a) => commands::data_move(&a),
        Command::Pram(a) => commands::pram(&a),
        Command::Emulate(a) => commands::emulate(&a),
        Command::Grover(a) => commands::grover(&a),
        Command::Distinct(a) => commands::distinct(&a),
        Command::Collision(a) => commands::collision(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::SelfTestFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
