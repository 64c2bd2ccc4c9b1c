//! Times the machines on family members.
//!
//! ```text
//! cargo run --release --example bench -- sigma:4 sigma:8 sigma:12
//! cargo run --release --example bench -- --engine oracle --lines cutpi:3,4
//! ```

use clap::{Parser, ValueEnum};
use sesame_core::bench::{bench, Engine};
use sesame_core::families::FamilySpec;

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Sesame,
    Oracle,
}

#[derive(Parser)]
struct Args {
    /// Family members; σ_4..σ_12 when empty.
    specs: Vec<FamilySpec>,
    #[arg(long, value_enum, default_value_t = EngineArg::Sesame)]
    engine: EngineArg,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// key=value records instead of a table.
    #[arg(long)]
    lines: bool,
}

fn main() {
    let args = Args::parse();
    let specs = if args.specs.is_empty() { (4..=12).map(FamilySpec::Sigma).collect() } else { args.specs };
    let engine = match args.engine {
        EngineArg::Sesame => Engine::Sesame,
        EngineArg::Oracle => Engine::Oracle,
    };
    let report = bench(&specs, engine, args.repetitions);
    print!("{}", if args.lines { report.to_lines() } else { report.to_table() });
}
