//! Command-line front end. Exit codes: 0 success, 1 domain failure,
//! 2 usage or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cui::{page_to_wire, render_html, render_report, ReportFormat};
use crate::data_admin::{load_fixtures, FixtureStore, MockDataAdmin};
use crate::feature_model::{
    canonical_line, enumerate_with_ceiling, parse_document, validate_model, DirectorySource,
    DEFAULT_CEILING,
};
use crate::interaction::{run_scripted, GeneratorMode, ScriptError, ScriptedAnswers, Session};
use crate::server::{serve, ServerConfig};
use crate::service::{load_service, Service, ServiceDirectory};
use crate::transform::registry_json;

#[derive(Parser, Debug)]
#[command(
    name = "formweave",
    version,
    about = "E-form generation from feature models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormMode {
    Offline,
    Initial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SimMode {
    Offline,
    Initial,
    Runtime,
}

impl From<SimMode> for GeneratorMode {
    fn from(m: SimMode) -> Self {
        match m {
            SimMode::Offline => GeneratorMode::Offline,
            SimMode::Initial => GeneratorMode::Initial,
            SimMode::Runtime => GeneratorMode::Runtime,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Text,
    Xml,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a family model; diagnostics go to stderr.
    Validate { model: PathBuf },
    /// Write the complete form as page-001.html and page-001.json.
    Generate {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "offline")]
        mode: FormMode,
        #[arg(long)]
        citizen: Option<String>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Defaults to the model's sibling `.catalog.json`.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run a session with scripted answers and print the report.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        answers: PathBuf,
        #[arg(long, value_enum, default_value = "runtime")]
        mode: SimMode,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Overrides the citizen named in the answers file.
        #[arg(long)]
        citizen: Option<String>,
        #[arg(long, default_value = "trace.json")]
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the number of configurations, then one line per configuration.
    Enumerate {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: u32,
        #[arg(long, default_value_t = DEFAULT_CEILING)]
        ceiling: u64,
    },
    /// Print the transformation rule registry as JSON.
    Rules,
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "FORMWEAVE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "services")]
        services_dir: PathBuf,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        snapshot_file: Option<PathBuf>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Use a remote data administration instead of the fixtures.
        #[arg(long)]
        data_admin_url: Option<String>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn domain(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = Result<(), Failure>;

fn load(model: &Path, catalog: Option<&Path>) -> Result<Arc<Service>, Failure> {
    load_service(model, catalog)
        .map(Arc::new)
        .map_err(|e| usage(e.to_string()))
}

/// Fixture files may cover several services, so they are checked against
/// every service next to the model as well as the model's own.
fn fixtures(service: &Service, path: Option<&Path>) -> Result<FixtureStore, Failure> {
    let Some(path) = path else {
        return Ok(FixtureStore::default());
    };
    let dir = service
        .model_file
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let siblings = ServiceDirectory::load(dir).unwrap_or_default();
    let mut catalogs = vec![(service.model.as_ref(), &service.catalog)];
    catalogs.extend(siblings.catalogs());
    load_fixtures(path, &catalogs).map_err(|e| usage(e.to_string()))
}

fn validate(model: &Path, err: &mut dyn Write) -> Outcome {
    let text =
        std::fs::read_to_string(model).map_err(|e| usage(format!("{}: {e}", model.display())))?;
    let parsed = parse_document(&text, &DirectorySource::for_file(model))
        .map_err(|e| usage(e.to_string()))?;
    let diagnostics = validate_model(&parsed);
    for d in &diagnostics {
        let _ = writeln!(err, "{d}");
    }
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(domain(String::new()))
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model: &Path,
    mode: FormMode,
    citizen: Option<&str>,
    fixture_file: Option<&Path>,
    catalog: Option<&Path>,
    out_dir: &Path,
    err: &mut dyn Write,
) -> Outcome {
    let service = load(model, catalog)?;
    let session = match mode {
        FormMode::Offline => Session::start(
            service,
            "",
            GeneratorMode::Offline,
            &MockDataAdmin::default(),
        ),
        FormMode::Initial => {
            let citizen = citizen.ok_or_else(|| usage("initial mode needs --citizen"))?;
            let fixture_file =
                fixture_file.ok_or_else(|| usage("initial mode needs --fixtures"))?;
            let store = fixtures(&service, Some(fixture_file))?;
            Session::start(
                service,
                citizen,
                GeneratorMode::Initial,
                &MockDataAdmin::new(store),
            )
        }
    }
    .map_err(|e| domain(e.to_string()))?;
    for w in session.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    std::fs::create_dir_all(out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    if let Ok(page) = session.page() {
        let write = |name: String, text: String| {
            let path = out_dir.join(name);
            std::fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
        };
        write(format!("{}.html", page.id), render_html(page))?;
        write(format!("{}.json", page.id), page_to_wire(page) + "\n")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    model: &Path,
    answers: &Path,
    mode: SimMode,
    catalog: Option<&Path>,
    fixture_file: Option<&Path>,
    citizen: Option<&str>,
    trace: &Path,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let service = load(model, catalog)?;
    let store = fixtures(&service, fixture_file)?;
    let script = ScriptedAnswers::load(answers).map_err(|e| usage(e.to_string()))?;
    let client = MockDataAdmin::new(store);
    let outcome =
        run_scripted(service, mode.into(), &client, &script, citizen).map_err(|e| match e {
            ScriptError::Io(_) | ScriptError::Json(_) => usage(e.to_string()),
            _ => domain(e.to_string()),
        })?;
    for w in outcome.session.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    let trace_text = serde_json::to_string_pretty(&outcome.trace_json()).expect("trace serializes");
    std::fs::write(trace, trace_text + "\n")
        .map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    let format = match format {
        Format::Text => ReportFormat::Text,
        Format::Xml => ReportFormat::Xml,
    };
    let _ = out.write_all(render_report(&outcome.report, format).as_bytes());
    Ok(())
}

fn enumerate(model: &Path, bound: u32, ceiling: u64, out: &mut dyn Write) -> Outcome {
    let text =
        std::fs::read_to_string(model).map_err(|e| usage(format!("{}: {e}", model.display())))?;
    let parsed = crate::feature_model::parse_feature_model_with(
        &text,
        &DirectorySource::for_file(model),
        Default::default(),
    )
    .map_err(|e| usage(e.to_string()))?;
    let configs =
        enumerate_with_ceiling(&parsed, bound, ceiling).map_err(|e| domain(e.to_string()))?;
    let _ = writeln!(out, "{}", configs.len());
    for c in &configs {
        let _ = writeln!(out, "{}", canonical_line(c));
    }
    Ok(())
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Validate { model } => validate(&model, err),
        Command::Generate {
            model,
            mode,
            citizen,
            fixtures,
            catalog,
            out: dir,
        } => generate(
            &model,
            mode,
            citizen.as_deref(),
            fixtures.as_deref(),
            catalog.as_deref(),
            &dir,
            err,
        ),
        Command::Simulate {
            model,
            answers,
            mode,
            catalog,
            fixtures,
            citizen,
            trace,
            format,
        } => simulate(
            &model,
            &answers,
            mode,
            catalog.as_deref(),
            fixtures.as_deref(),
            citizen.as_deref(),
            &trace,
            format,
            out,
            err,
        ),
        Command::Enumerate {
            model,
            bound,
            ceiling,
        } => enumerate(&model, bound, ceiling, out),
        Command::Rules => {
            let _ = writeln!(out, "{}", registry_json());
            Ok(())
        }
        Command::Serve {
            port,
            services_dir,
            fixtures,
            snapshot_file,
            ui_dir,
            data_admin_url,
        } => {
            let config = ServerConfig {
                port,
                services_dir,
                fixtures,
                snapshot_file,
                ui_dir,
                data_admin_url,
            };
            tokio::runtime::Runtime::new()
                .map_err(|e| usage(e.to_string()))
                .and_then(|rt| rt.block_on(serve(config)).map_err(|e| usage(e.to_string())))
        }
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}
