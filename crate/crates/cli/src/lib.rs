//! Library side of the `reskernel` binary: configuration, the four commands
//! and report rendering.
//!
//! Reports are JSON objects with sorted keys, or CSV with a fixed column
//! order (see [`csv_header`]).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use reskernel_core::abelian::{self, AbelianExampleConfig};
use reskernel_core::algebra::{build_algebra, ideal_minimal_generators, AlgebraSpec};
use reskernel_core::oracle::{compare, oracle_profile};
use reskernel_core::restriction::{kernel_generator_profile, one_module_check};
use reskernel_core::tensor::{estimated_level_bytes, kunneth_dims, CyclicAction};
use reskernel_core::{Error, PrimeField, TensorPower};
use serde::Serialize;
use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_MEMORY_BUDGET_MIB: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FgProfile,
    TensorKernel,
    Abelian,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FgProfile => "fg-profile",
            Command::TensorKernel => "tensor-kernel",
            Command::Abelian => "abelian",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Overrides the spec file's `p` when given; defaults to 3.
    pub p: Option<u32>,
    /// Overrides the spec file's truncation when given.
    pub max_degree: Option<usize>,
    pub n: Option<usize>,
    pub spec: Option<PathBuf>,
    pub preset: Option<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 means one per core. Not embedded in reports, so
    /// output does not depend on it.
    #[serde(skip)]
    pub jobs: usize,
    pub memory_budget_mib: u64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            p: None,
            max_degree: None,
            n: None,
            spec: None,
            preset: None,
            format: Format::Json,
            out: None,
            jobs: 0,
            memory_budget_mib: DEFAULT_MEMORY_BUDGET_MIB,
        }
    }
}

/// Failure before a report could be produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModulus(_)
            | Error::InvalidGenerator { .. }
            | Error::InvalidConfig(_)
            | Error::DegreeOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Outcome attached to a finished report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A checked property or the oracle disagreed.
    Mismatch(Vec<String>),
    /// Stopped before the requested degree; the report holds completed degrees.
    BudgetExceeded { degree: usize, estimate_mib: u64 },
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Mismatch(_) => 2,
            Status::BudgetExceeded { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub csv_rows: Vec<Vec<String>>,
    pub status: Status,
}

/// Column order of the CSV output for each command.
pub fn csv_header(command: Command) -> &'static [&'static str] {
    match command {
        Command::FgProfile => &["degree", "dim_R", "min_generators"],
        Command::TensorKernel => &[
            "degree",
            "dim_S",
            "type1",
            "type2",
            "type3",
            "dim_invariants",
            "dim_coinvariants",
            "dim_kernel",
            "min_generators",
        ],
        Command::Abelian => &[
            "p",
            "n",
            "dim_E2_11",
            "dim_invariants",
            "dim_image",
            "obstruction_dim",
            "norm_is_zero",
        ],
        Command::Oracle => &[
            "degree",
            "dim_S",
            "dim_invariants",
            "dim_coinvariants",
            "dim_kernel",
            "min_generators",
            "fast_dim_kernel",
            "fast_min_generators",
        ],
    }
}

fn field(cfg: &RunConfig, spec_p: Option<PrimeField>) -> Result<PrimeField, CliError> {
    match (cfg.p, spec_p) {
        (Some(p), _) => Ok(PrimeField::new(p)?),
        (None, Some(f)) => Ok(f),
        (None, None) => Ok(PrimeField::new(3)?),
    }
}

/// Resolves `--spec`/`--preset` plus the `--p`/`--max-degree` overrides.
pub fn resolve_spec(cfg: &RunConfig) -> Result<AlgebraSpec, CliError> {
    match (&cfg.spec, &cfg.preset) {
        (Some(_), Some(_)) => Err(CliError::Usage("--spec and --preset are exclusive".into())),
        (None, None) => Err(CliError::Usage("one of --spec or --preset is required".into())),
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let mut spec: AlgebraSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed spec {}: {e}", path.display())))?;
            spec.field = field(cfg, Some(spec.field))?;
            if let Some(d) = cfg.max_degree {
                spec.truncation = d;
            }
            spec.validate()?;
            Ok(spec)
        }
        (None, Some(name)) => {
            let d = cfg
                .max_degree
                .ok_or_else(|| CliError::Usage("--max-degree is required with --preset".into()))?;
            Ok(AlgebraSpec::preset(name, field(cfg, None)?, d)?)
        }
    }
}

fn header(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("format_version".into(), json!(FORMAT_VERSION));
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

pub fn cmd_fg_profile(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = resolve_spec(cfg)?;
    let algebra = build_algebra(&spec)?;
    let profile = ideal_minimal_generators(&algebra);
    let hilbert = algebra.hilbert();
    let mut m = header(cfg);
    m.insert("algebra".into(), to_value(&spec));
    m.insert("hilbert".into(), to_value(&hilbert));
    m.insert("generators".into(), to_value(&profile.counts));
    m.insert("total_generators".into(), json!(profile.total()));
    let csv_rows = (1..=spec.truncation)
        .map(|d| vec![d.to_string(), hilbert[d].to_string(), profile.count(d).to_string()])
        .collect();
    Ok(Report {
        json: Value::Object(m),
        csv_rows,
        status: Status::Ok,
    })
}

/// Largest degree whose cumulative tensor estimate fits the budget, and the
/// estimate (MiB) at the first degree that does not.
fn budget_limit(algebra: &reskernel_core::GradedAlgebra, max_degree: usize, budget_mib: u64) -> (Option<usize>, u64) {
    let width = CyclicAction::for_field(algebra.field()).width();
    let dims = kunneth_dims(algebra, width, max_degree);
    let budget = budget_mib as u128 * 1024 * 1024;
    let mut total = 0u128;
    for (d, &dim) in dims.iter().enumerate() {
        total += estimated_level_bytes(dim, width);
        if total > budget {
            let mib = (total / (1024 * 1024)) as u64;
            return (d.checked_sub(1), mib);
        }
    }
    (Some(max_degree), 0)
}

fn tensor_setup(cfg: &RunConfig) -> Result<(AlgebraSpec, Option<TensorPower>, Status), CliError> {
    let spec = resolve_spec(cfg)?;
    let algebra = build_algebra(&spec)?;
    let (limit, mib) = budget_limit(&algebra, spec.truncation, cfg.memory_budget_mib);
    let status = match limit {
        Some(d) if d == spec.truncation => Status::Ok,
        _ => Status::BudgetExceeded {
            degree: limit.map_or(0, |d| d + 1),
            estimate_mib: mib,
        },
    };
    let tp = match limit {
        Some(d) => Some(TensorPower::up_to(&algebra, spec.field, d)?),
        None => None,
    };
    Ok((spec, tp, status))
}

fn budget_fields(m: &mut serde_json::Map<String, Value>, status: &Status, tp: &Option<TensorPower>) {
    let completed = tp.as_ref().map(|t| t.max_degree());
    m.insert("completed_through_degree".into(), to_value(&completed));
    let aborted = match status {
        Status::BudgetExceeded { degree, estimate_mib } => {
            json!({"degree": degree, "estimate_mib": estimate_mib})
        }
        _ => Value::Null,
    };
    m.insert("budget_abort".into(), aborted);
}

pub fn cmd_tensor_kernel(cfg: &RunConfig) -> Result<Report, CliError> {
    let (spec, tp, mut status) = tensor_setup(cfg)?;
    let mut m = header(cfg);
    m.insert("algebra".into(), to_value(&spec));
    budget_fields(&mut m, &status, &tp);
    let mut csv_rows = Vec::new();
    match &tp {
        Some(tp) => {
            let profile = kernel_generator_profile(tp)?;
            let one = one_module_check(tp)?;
            if !one.passed && status == Status::Ok {
                let bad = one
                    .rows
                    .iter()
                    .filter(|r| !r.equals_type1_span || r.intersection_with_type2 != 0)
                    .map(|r| format!("one-module check failed in degree {}", r.degree))
                    .collect();
                status = Status::Mismatch(bad);
            }
            for r in &profile.rows {
                csv_rows.push(
                    [
                        r.degree,
                        r.dim_s,
                        r.orbit_counts.type1,
                        r.orbit_counts.type2,
                        r.orbit_counts.type3,
                        r.dim_invariants,
                        r.dim_coinvariants,
                        r.dim_kernel,
                        r.min_generators,
                    ]
                    .iter()
                    .map(usize::to_string)
                    .collect(),
                );
            }
            m.insert("kernel_generators".into(), to_value(&profile.generators()));
            m.insert("rows".into(), to_value(&profile.rows));
            m.insert("one_module_check".into(), to_value(&one));
        }
        None => {
            m.insert("kernel_generators".into(), json!({}));
            m.insert("rows".into(), json!([]));
            m.insert("one_module_check".into(), Value::Null);
        }
    }
    Ok(Report {
        json: Value::Object(m),
        csv_rows,
        status,
    })
}

pub fn cmd_abelian(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = cfg
        .n
        .ok_or_else(|| CliError::Usage("--n is required for abelian".into()))?;
    let ab = AbelianExampleConfig::new(cfg.p.unwrap_or(3), n)?;
    let r = abelian::report(&ab)?;
    let mut problems = Vec::new();
    if r.obstruction_dim != n {
        problems.push(format!("obstruction_dim {} != n = {n}", r.obstruction_dim));
    }
    if !r.norm_is_zero {
        problems.push("norm operator is not zero".to_string());
    }
    if !r.invariants_equal_image {
        problems.push("invariants differ from im(1 - σ)".to_string());
    }
    let mut m = header(cfg);
    if let Value::Object(fields) = to_value(&r) {
        m.extend(fields);
    }
    let csv_rows = vec![vec![
        r.p.to_string(),
        r.n.to_string(),
        r.dim_e2_11.to_string(),
        r.dim_invariants.to_string(),
        r.dim_image.to_string(),
        r.obstruction_dim.to_string(),
        r.norm_is_zero.to_string(),
    ]];
    Ok(Report {
        json: Value::Object(m),
        csv_rows,
        status: if problems.is_empty() {
            Status::Ok
        } else {
            Status::Mismatch(problems)
        },
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Report, CliError> {
    let (spec, tp, mut status) = tensor_setup(cfg)?;
    let mut m = header(cfg);
    m.insert("algebra".into(), to_value(&spec));
    budget_fields(&mut m, &status, &tp);
    let mut csv_rows = Vec::new();
    let (rows, fast, mismatches) = match &tp {
        Some(tp) => {
            let fast = kernel_generator_profile(tp)?;
            let rows = oracle_profile(tp)?;
            let mismatches = compare(&fast, &rows);
            (rows, fast.rows, mismatches)
        }
        None => Default::default(),
    };
    for (o, f) in rows.iter().zip(&fast) {
        csv_rows.push(
            [
                o.degree,
                o.dim_s,
                o.dim_invariants,
                o.dim_coinvariants,
                o.dim_kernel,
                o.min_generators,
                f.dim_kernel,
                f.min_generators,
            ]
            .iter()
            .map(usize::to_string)
            .collect(),
        );
    }
    if !mismatches.is_empty() && status == Status::Ok {
        status = Status::Mismatch(
            mismatches
                .iter()
                .map(|x| {
                    format!(
                        "degree {}: {} fast={} oracle={}",
                        x.degree, x.quantity, x.fast, x.oracle
                    )
                })
                .collect(),
        );
    }
    m.insert("agree".into(), json!(mismatches.is_empty()));
    m.insert("mismatches".into(), to_value(&mismatches));
    m.insert("oracle_rows".into(), to_value(&rows));
    m.insert("fast_rows".into(), to_value(&fast));
    Ok(Report {
        json: Value::Object(m),
        csv_rows,
        status,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::FgProfile => cmd_fg_profile(cfg),
        Command::TensorKernel => cmd_tensor_kernel(cfg),
        Command::Abelian => cmd_abelian(cfg),
        Command::Oracle => cmd_oracle(cfg),
    }
}

/// Serializes a report in the configured format.
pub fn render(cfg: &RunConfig, report: &Report) -> Result<String, CliError> {
    match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(csv_header(cfg.command)).map_err(io)?;
            for row in &report.csv_rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Runs a configuration end to end on a pool of `cfg.jobs` threads, writes
/// the report to `--out` or stdout, and returns the process exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| run(cfg)).and_then(|r| Ok((render(cfg, &r)?, r.status)));
    let (text, status) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let written = match &cfg.out {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 2;
    }
    match &status {
        Status::Ok => {}
        Status::Mismatch(lines) => {
            for l in lines {
                eprintln!("mismatch: {l}");
            }
        }
        Status::BudgetExceeded { degree, estimate_mib } => eprintln!(
            "memory budget of {} MiB exceeded at degree {degree} (estimate {estimate_mib} MiB); \
             report covers lower degrees only",
            cfg.memory_budget_mib
        ),
    }
    status.exit_code()
}
