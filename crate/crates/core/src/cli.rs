//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 failed self-test, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::acceptance::{self, AcceptanceConfig};
use crate::analysis::{self, emit_table, lookup, TableFormat, TestFunction};
use crate::error::FcError;
use crate::finite_diff::{make_stencil, Side, StencilSpec};
use crate::pipeline::FcApproximant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_ACCEPTANCE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Relative tolerance on the spacing of file-sourced grids.
const GRID_SPACING_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "fcont", version, about = "Fourier continuation approximation on equispaced grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the continued data profile on x_j = j/n, j = -n..n
    Continue(RunArgs),
    /// Evaluate the approximant on the dense grid z_j = j/N
    Approximate(RunArgs),
    /// Dump the trigonometric coefficients c_k
    Coeffs(RunArgs),
    /// Convergence table over n = 2^from .. 2^to
    Convergence(ConvergenceArgs),
    /// Print exact one-sided stencil weights
    Stencil(StencilArgs),
    /// Run the acceptance checks
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Clone)]
struct SourceArgs {
    /// Built-in test function name
    #[arg(long = "fn", value_name = "NAME", conflicts_with = "data")]
    function: Option<String>,
    /// Data file with rows `x,f` or a single column `f`
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
struct OutputArgs {
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Grid half-size n (built-in functions only; files define their own grid)
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Dense evaluation grid size N
    #[arg(long, default_value_t = analysis::DEFAULT_DENSE_GRID)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[arg(long = "fn", value_name = "NAME")]
    function: String,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Smallest exponent a in n = 2^a
    #[arg(long, default_value_t = 6)]
    from: u32,
    /// Largest exponent b in n = 2^b
    #[arg(long, default_value_t = 12)]
    to: u32,
    #[arg(long, default_value_t = analysis::DEFAULT_DENSE_GRID)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct StencilArgs {
    /// Derivative order
    #[arg(long)]
    m: usize,
    /// Accuracy order
    #[arg(long)]
    p: usize,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Shift every stencil weight by this amount (negative control)
    #[arg(long, hide = true)]
    perturb_stencils: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Acceptance(m) => write!(f, "{m}"),
        }
    }
}

impl From<FcError> for CliError {
    fn from(e: FcError) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Continue(args) => {
            let input = load_input(&args)?;
            let approx = input.approximant(&args)?;
            let profile = approx.extended_profile(&input.samples)?;
            let n = input.n() as i64;
            let mut table = DataTable::new(&["x", "value"]);
            for (idx, v) in profile.iter().enumerate() {
                let j = idx as i64 - n;
                table.push(vec![Cell::Float(j as f64 / n as f64), Cell::Float(*v)]);
            }
            emit(&table, &args.output, stdout)
        }
        Command::Approximate(args) => {
            let input = load_input(&args)?;
            let approx = input.approximant(&args)?;
            let values = approx.evaluate_dense(args.grid)?;
            let table = match &input.function {
                Some(f) => {
                    let mut table = DataTable::new(&["z", "approx", "exact", "abs_error"]);
                    for (j, v) in values.iter().enumerate() {
                        let z = j as f64 / args.grid as f64;
                        let exact = f.value(z);
                        table.push(vec![
                            Cell::Float(z),
                            Cell::Float(*v),
                            Cell::Float(exact),
                            Cell::Float((v - exact).abs()),
                        ]);
                    }
                    table
                }
                None => {
                    let mut table = DataTable::new(&["z", "approx"]);
                    for (j, v) in values.iter().enumerate() {
                        table.push(vec![Cell::Float(j as f64 / args.grid as f64), Cell::Float(*v)]);
                    }
                    table
                }
            };
            emit(&table, &args.output, stdout)
        }
        Command::Coeffs(args) => {
            let input = load_input(&args)?;
            let approx = input.approximant(&args)?;
            let mut table = DataTable::new(&["k", "re", "im"]);
            for (k, c) in approx.coefficients().iter() {
                table.push(vec![Cell::Int(k), Cell::Float(c.re), Cell::Float(c.im)]);
            }
            emit(&table, &args.output, stdout)
        }
        Command::Convergence(args) => {
            let format: TableFormat = args.output.format.parse()?;
            if args.from > args.to || args.to > 24 {
                return Err(CliError::Validation(format!(
                    "invalid exponent range {}..={}",
                    args.from, args.to
                )));
            }
            let f = lookup(&args.function)?;
            let ns: Vec<usize> = (args.from..=args.to).map(|e| 1usize << e).collect();
            let records = analysis::convergence_study(&f, args.r, args.p, &ns, args.grid)?;
            write_output(&emit_table(&records, format), args.output.out.as_deref(), stdout)
        }
        Command::Stencil(args) => {
            let stencil = make_stencil(StencilSpec::new(args.m, args.p, Side::Forward)?)?;
            write_output(&format!("{stencil}\n"), None, stdout)
        }
        Command::Selftest(args) => {
            let config = AcceptanceConfig {
                stencil_perturbation: args.perturb_stencils,
            };
            let outcomes = acceptance::run_all(&config);
            let mut text = String::new();
            for o in &outcomes {
                let _ = writeln!(text, "{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let _ = writeln!(
                text,
                "{} of {} criteria passed",
                outcomes.len() - failed,
                outcomes.len()
            );
            write_output(&text, None, stdout)?;
            if failed > 0 {
                return Err(CliError::Acceptance(format!("{failed} criteria failed")));
            }
            Ok(())
        }
    }
}

struct Input {
    samples: Vec<f64>,
    function: Option<TestFunction>,
}

impl Input {
    fn n(&self) -> usize {
        self.samples.len() - 1
    }

    fn approximant(&self, args: &RunArgs) -> CliResult<FcApproximant> {
        Ok(FcApproximant::new(&self.samples, args.r, args.p)?)
    }
}

fn load_input(args: &RunArgs) -> CliResult<Input> {
    match (&args.source.function, &args.source.data) {
        (Some(name), None) => {
            let f = lookup(name)?;
            Ok(Input {
                samples: f.sample(args.n),
                function: Some(f),
            })
        }
        (None, Some(path)) => Ok(Input {
            samples: read_samples(path)?,
            function: None,
        }),
        _ => Err(CliError::Validation(
            "exactly one of --fn or --data is required".into(),
        )),
    }
}

/// Reads `x,f` rows (header optional) or a single column `f` on `x_j = j/n`.
pub fn read_samples(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_samples(&text)
}

pub fn parse_samples(text: &str) -> CliResult<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(values) => rows.push(values),
            Err(_) if rows.is_empty() => continue, // header
            Err(_) => {
                return Err(CliError::Validation(format!(
                    "line {}: cannot parse `{line}`",
                    line_no + 1
                )))
            }
        }
    }
    if rows.len() < 3 {
        return Err(CliError::Validation(format!(
            "need at least 3 samples, found {}",
            rows.len()
        )));
    }
    let width = rows[0].len();
    if !(1..=2).contains(&width) || rows.iter().any(|r| r.len() != width) {
        return Err(CliError::Validation(
            "rows must all have one column (f) or two columns (x,f)".into(),
        ));
    }
    if let Some((j, _)) = rows.iter().enumerate().find(|(_, r)| r.iter().any(|v| !v.is_finite())) {
        return Err(CliError::Validation(format!("sample {j} is not finite")));
    }
    if width == 1 {
        return Ok(rows.into_iter().map(|r| r[0]).collect());
    }
    let n = rows.len() - 1;
    let h = 1.0 / n as f64;
    for (j, row) in rows.iter().enumerate() {
        let expected = j as f64 * h;
        if (row[0] - expected).abs() > GRID_SPACING_TOL * h {
            return Err(CliError::Validation(format!(
                "grid point {j} is x = {}, expected {expected} (equispaced on [0, 1])",
                row[0]
            )));
        }
    }
    Ok(rows.into_iter().map(|r| r[1]).collect())
}

enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
        }
    }
}

struct DataTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl DataTable {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    fn render(&self, format: TableFormat) -> String {
        let mut out = String::new();
        match format {
            TableFormat::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            TableFormat::Json => {
                let items: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                out = serde_json::to_string_pretty(&items).expect("table serializes");
                out.push('\n');
            }
            TableFormat::Markdown => {
                let _ = writeln!(out, "| {} |", self.columns.join(" | "));
                let _ = writeln!(out, "|{}", "---|".repeat(self.columns.len()));
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|c| match c {
                            Cell::Int(v) => v.to_string(),
                            Cell::Float(v) => format!("{v:.6e}"),
                        })
                        .collect();
                    let _ = writeln!(out, "| {} |", cells.join(" | "));
                }
            }
        }
        out
    }
}

fn emit(table: &DataTable, output: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let format: TableFormat = output.format.parse()?;
    write_output(&table.render(format), output.out.as_deref(), stdout)
}

fn write_output(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
