use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reskernel_cli::{execute, Command, Format, RunConfig, DEFAULT_MEMORY_BUDGET_MIB};

/// Exact restriction-kernel computations over F_p.
#[derive(Debug, Parser)]
#[command(name = "reskernel", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Odd prime p (default 3, or the spec file's value).
    #[arg(long, global = true)]
    p: Option<u32>,

    /// Truncation degree D.
    #[arg(long = "max-degree", global = true)]
    max_degree: Option<usize>,

    /// Number of copies of V (abelian only).
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Algebra spec JSON file.
    #[arg(long, global = true, conflicts_with = "preset")]
    spec: Option<PathBuf>,

    /// Named algebra: thompson-mod-p, divided-power, exterior-pair,
    /// truncated-cubic, trivial.
    #[arg(long, global = true)]
    preset: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Abort tensor computations whose estimated footprint exceeds this (MiB).
    #[arg(long = "memory-budget", global = true, default_value_t = DEFAULT_MEMORY_BUDGET_MIB)]
    memory_budget: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Minimal generators of the augmentation ideal of R.
    FgProfile,
    /// Kernel of restriction on H^1 for S = R^{⊗p²}, degree by degree.
    TensorKernel,
    /// The V^n ⋊ ⟨σ⟩ example.
    Abelian,
    /// Recompute the kernel profile by brute force and compare.
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
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
    let cfg = RunConfig {
        command: match cli.command {
            Cmd::FgProfile => Command::FgProfile,
            Cmd::TensorKernel => Command::TensorKernel,
            Cmd::Abelian => Command::Abelian,
            Cmd::Oracle => Command::Oracle,
        },
        p: cli.p,
        max_degree: cli.max_degree,
        n: cli.n,
        spec: cli.spec,
        preset: cli.preset,
        format: match cli.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
        out: cli.out,
        jobs: cli.jobs,
        memory_budget_mib: cli.memory_budget,
    };
    ExitCode::from(execute(&cfg) as u8)
}
