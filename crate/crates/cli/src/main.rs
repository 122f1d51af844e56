//! `xolap` command-line tool.
//!
//! Exit status: 0 success, 1 diagnostics or pipeline errors, 2 malformed or
//! missing input, 3 no XQuery processor configured for `compile --run`.

use std::fs;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xolap_core::algebra::{evaluate, Pipeline, QueryState};
use xolap_core::codegen::{compile, run_external, ExternalError, QueryDialect};
use xolap_core::model::SchemaError;
use xolap_core::present::{serialize, Format};
use xolap_core::sample::{random_warehouse, sample_warehouse, RandomConfig};
use xolap_core::store::{validate_warehouse, StoreError, WarehouseFiles};
use xolap_core::Instance;

#[derive(Parser)]
#[command(name = "xolap", version, about = "XML-native OLAP warehouse engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a warehouse; prints one diagnostic per line on standard error.
    Validate { warehouse: PathBuf },
    /// Evaluate a pipeline and print the result.
    Query {
        warehouse: PathBuf,
        /// Pipeline JSON file, or `-` for standard input.
        pipeline: PathBuf,
        #[arg(long, default_value = "xml")]
        format: Format,
    },
    /// Print the XQuery for a pipeline.
    Compile {
        warehouse: PathBuf,
        /// Pipeline JSON file, or `-` for standard input.
        pipeline: PathBuf,
        #[arg(long, default_value = "xq31")]
        dialect: QueryDialect,
        /// Execute through the processor in XOLAP_XQUERY_CMD and print its cells.
        #[arg(long)]
        run: bool,
    },
    /// Write SampleWH, or with --facts a generated warehouse.
    GenSample {
        target: PathBuf,
        /// Seed for the generated warehouse; ignored without --facts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        facts: Option<usize>,
    },
    /// Serve the HTTP API over a warehouse.
    Serve {
        warehouse: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn new(status: u8, message: impl ToString) -> Self {
        Self { status, message: message.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn store_failure(e: StoreError) -> Failure {
    match e {
        StoreError::Integrity(_) | StoreError::Schema(SchemaError::SchemaViolation(_)) => Failure::new(1, e),
        _ => Failure::new(2, e),
    }
}

fn open(dir: &Path) -> Result<Instance, Failure> {
    Instance::open(dir).map_err(store_failure)
}

fn read_pipeline(path: &Path) -> Result<Pipeline, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::new(2, format!("cannot read standard input: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))?
    };
    Pipeline::parse(&text).map_err(|e| Failure::new(1, e))
}

fn prepare(warehouse: &Path, pipeline: &Path) -> Result<(Instance, QueryState), Failure> {
    let inst = open(warehouse)?;
    let state = read_pipeline(pipeline)?.apply(&inst).map_err(|e| Failure::new(1, e))?;
    Ok((inst, state))
}

fn emit(text: &str) -> Outcome {
    io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::new(1, e))
}

fn validate(dir: &Path) -> Outcome {
    let files = WarehouseFiles::read_dir(dir).map_err(|e| Failure::new(2, e))?;
    let diags = validate_warehouse(&files, dir).map_err(|e| Failure::new(2, e))?;
    if diags.is_empty() {
        return Ok(());
    }
    let mut err = io::stderr().lock();
    for d in &diags {
        let _ = writeln!(err, "{d}");
    }
    Err(Failure::new(1, ""))
}

fn query(warehouse: &Path, pipeline: &Path, format: Format) -> Outcome {
    let (inst, state) = prepare(warehouse, pipeline)?;
    let view = evaluate(&inst, &state).map_err(|e| Failure::new(1, e))?;
    emit(&serialize(&view, format))
}

fn compile_cmd(warehouse: &Path, pipeline: &Path, dialect: QueryDialect, run: bool) -> Outcome {
    let (inst, state) = prepare(warehouse, pipeline)?;
    let query = compile(&state, &inst.schema, dialect).map_err(|e| Failure::new(1, e))?;
    if !run {
        return emit(&query.text);
    }
    match run_external(&query, warehouse) {
        Ok(result) => emit(&result.to_xml()),
        Err(e @ ExternalError::ProcessorUnavailable) => Err(Failure::new(3, e)),
        Err(e) => Err(Failure::new(1, e)),
    }
}

fn gen_sample(target: &Path, seed: u64, facts: Option<usize>) -> Outcome {
    let files = match facts {
        None => sample_warehouse(),
        Some(n) => random_warehouse(&RandomConfig::desk(n, seed)),
    };
    files.write_to(target).map_err(|e| Failure::new(1, format!("cannot write {}: {e}", target.display())))
}

fn serve(warehouse: &Path, port: u16) -> Outcome {
    let inst = open(warehouse).map_err(|f| Failure::new(1, f.message))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(1, e))?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new(1, format!("cannot bind port {port}: {e}")))?;
        let local = listener.local_addr().map_err(|e| Failure::new(1, e))?;
        eprintln!("listening on http://{local}");
        xolap_server::serve_on(inst, listener).await.map_err(|e| Failure::new(1, e))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { warehouse } => validate(warehouse),
        Command::Query { warehouse, pipeline, format } => query(warehouse, pipeline, *format),
        Command::Compile { warehouse, pipeline, dialect, run } => compile_cmd(warehouse, pipeline, *dialect, *run),
        Command::GenSample { target, seed, facts } => gen_sample(target, *seed, *facts),
        Command::Serve { warehouse, port } => serve(warehouse, *port),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message.replace('\n', "; "));
            }
            ExitCode::from(f.status)
        }
    }
}
