use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use kgvb_core::interaction_model::{load_model, validate, InteractionModel};
use kgvb_core::query_engine::{duplicate_disease_titles, Backend, Budget, Catalogue, QueryExecutor};
use kgvb_core::skill_service::{serve_skill, Skill, SkillConfig};
use kgvb_core::sparql_client::{EndpointConfig, SparqlClient, MAX_TIMEOUT_MS};
use kgvb_core::triple_store::{parse_ntriples, serve, TripleSet};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_NO_MATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "kgvb", version, about = "Voice-style question answering over a gene-disease knowledge graph")]
struct Cli {
    /// Interaction model JSON
    #[arg(long, global = true, default_value = "models/disease-skill.json")]
    model: PathBuf,

    /// Directory holding templates.json and plans.json
    #[arg(long, global = true, default_value = "queries")]
    queries: PathBuf,

    /// N-Triples file to answer from
    #[arg(long, global = true, conflicts_with = "endpoint")]
    fixture: Option<PathBuf>,

    /// Remote SPARQL endpoint URL
    #[arg(long, global = true, env = "KGVB_ENDPOINT")]
    endpoint: Option<String>,

    /// Port for the skill service
    #[arg(long, global = true, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    port: u16,

    /// Port for the embedded SPARQL endpoint (defaults to --port + 1)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    sparql_port: Option<u16>,

    /// Maximum number of query layers per answer
    #[arg(long, global = true)]
    max_layers: Option<usize>,

    /// Total time budget per answer in milliseconds
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,

    /// Built console assets to serve under /console
    #[cfg(feature = "console")]
    #[arg(long, global = true)]
    console_dir: Option<PathBuf>,

    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive question loop (`:json` toggles envelopes, `:quit` exits)
    Repl,
    /// Answer one question and exit
    Ask { text: String },
    /// Run the skill service (and the embedded endpoint with --fixture)
    Serve,
    /// Check the model, query catalogue and fixture
    Validate,
    /// Run a raw SPARQL query and print the table as TSV
    Query { sparql: String },
}

struct Failure {
    code: u8,
    message: String,
}

fn config_error(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.to_string() }
}

fn runtime_error(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_RUNTIME, message: message.to_string() }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if cli.verbose { "debug" } else { "warn" };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_level)))
        .with_writer(std::io::stderr)
        .init();

    match run(cli).await {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

async fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate => validate_all(&cli),
        Command::Ask { text } => {
            let skill = build_skill(&cli, local_backend(&cli)?)?;
            let turn = skill.converse("kgvb-ask", text).await;
            println!("{}", turn.answer);
            Ok(if turn.intent.is_some() { 0 } else { EXIT_NO_MATCH })
        }
        Command::Repl => {
            let skill = build_skill(&cli, local_backend(&cli)?)?;
            repl(&skill).await.map_err(runtime_error)?;
            Ok(0)
        }
        Command::Query { sparql } => {
            let backend = local_backend(&cli)?;
            let table = backend.run(sparql).await.map_err(runtime_error)?;
            print!("{}", table.to_tsv());
            Ok(0)
        }
        Command::Serve => serve_all(&cli).await,
    }
}

fn load_fixture(path: &Path) -> Result<TripleSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let store = parse_ntriples(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let dupes = duplicate_disease_titles(&store);
    if !dupes.is_empty() {
        return Err(config_error(format!("disease titles are not unique: {}", dupes.join(", "))));
    }
    Ok(store)
}

fn budget(cli: &Cli) -> Result<Budget, Failure> {
    let default = Budget::default();
    Budget::new(
        cli.max_layers.unwrap_or(default.max_layers),
        cli.timeout_ms.unwrap_or(default.total_timeout_ms),
    )
    .map_err(config_error)
}

fn remote_client(cli: &Cli, url: &str) -> Result<SparqlClient, Failure> {
    let timeout = cli.timeout_ms.unwrap_or(Budget::default().total_timeout_ms).min(MAX_TIMEOUT_MS);
    let cfg = EndpointConfig::new(url).and_then(|c| c.with_timeout_ms(timeout)).map_err(config_error)?;
    SparqlClient::new(cfg).map_err(config_error)
}

/// In-process store for --fixture, HTTP client for --endpoint.
fn local_backend(cli: &Cli) -> Result<Backend, Failure> {
    match (&cli.fixture, &cli.endpoint) {
        (Some(path), _) => Ok(Backend::Local(Arc::new(load_fixture(path)?))),
        (None, Some(url)) => Ok(Backend::Remote(remote_client(cli, url)?)),
        (None, None) => Err(config_error("one of --fixture or --endpoint (or KGVB_ENDPOINT) is required")),
    }
}

fn load_parts(cli: &Cli) -> Result<(InteractionModel, Catalogue), Failure> {
    let model = load_model(&cli.model).map_err(config_error)?;
    let catalogue = Catalogue::load(&cli.queries).map_err(config_error)?;
    Ok((model, catalogue))
}

fn build_skill(cli: &Cli, backend: Backend) -> Result<Skill, Failure> {
    let (model, catalogue) = load_parts(cli)?;
    let config = SkillConfig { budget: budget(cli)?, ..SkillConfig::default() };
    Skill::new(model, catalogue, backend, config).map_err(config_error)
}

fn validate_all(cli: &Cli) -> Result<u8, Failure> {
    let (model, catalogue) = load_parts(cli)?;
    let mut failed = false;
    for v in validate(&model) {
        println!("model: {v}");
        failed = true;
    }
    for p in catalogue.problems(Some(&model)) {
        println!("queries: {p}");
        failed = true;
    }
    if let Some(path) = &cli.fixture {
        match load_fixture(path) {
            Ok(store) => println!("fixture: {} triples", store.len()),
            Err(f) => {
                println!("fixture: {}", f.message);
                failed = true;
            }
        }
    }
    if failed {
        return Err(config_error("validation failed"));
    }
    let samples: usize = model.intents.iter().map(|i| i.samples.len()).sum();
    println!("model: {} intents, {} sample utterances, ok", model.intents.len(), samples);
    println!("queries: {} templates, {} plans, ok", catalogue.templates.len(), catalogue.plans.len());
    Ok(0)
}

async fn serve_all(cli: &Cli) -> Result<u8, Failure> {
    let endpoint = match (&cli.fixture, &cli.endpoint) {
        (Some(path), _) => {
            let store = Arc::new(load_fixture(path)?);
            let sparql_port = match cli.sparql_port {
                Some(p) => p,
                None => cli.port.checked_add(1).ok_or_else(|| config_error("no port left for the SPARQL endpoint; set --sparql-port"))?,
            };
            let handle = serve(store, sparql_port).await.map_err(runtime_error)?;
            println!("SPARQL endpoint on {}", handle.sparql_url());
            Some(handle)
        }
        (None, Some(_)) => None,
        (None, None) => return Err(config_error("one of --fixture or --endpoint (or KGVB_ENDPOINT) is required")),
    };
    let url = match (&endpoint, &cli.endpoint) {
        (Some(h), _) => h.sparql_url(),
        (None, Some(url)) => url.clone(),
        (None, None) => unreachable!("checked above"),
    };
    let skill = Arc::new(build_skill(cli, Backend::Remote(remote_client(cli, &url)?))?);
    let addr = SocketAddr::from(([127, 0, 0, 1], cli.port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| runtime_error(format!("cannot bind {addr}: {e}")))?;
    println!("skill service on http://{addr} (POST /alexa, POST /converse, GET /health)");
    #[cfg(feature = "console")]
    let server = async {
        match &cli.console_dir {
            Some(dir) => kgvb_core::skill_service::serve_skill_with_console(skill, listener, dir).await,
            None => serve_skill(skill, listener).await,
        }
    };
    #[cfg(not(feature = "console"))]
    let server = serve_skill(skill, listener);
    tokio::select! {
        r = server => r.map_err(runtime_error)?,
        _ = tokio::signal::ctrl_c() => {}
    }
    if let Some(h) = endpoint {
        h.shutdown().await;
    }
    Ok(0)
}

async fn repl(skill: &Skill) -> std::io::Result<()> {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    let mut show_json = false;
    println!("{}", skill.greeting());
    loop {
        write!(stdout, "> ")?;
        stdout.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        match line.trim() {
            ":quit" => break,
            ":json" => {
                show_json = !show_json;
                println!("envelope display {}", if show_json { "on" } else { "off" });
                continue;
            }
            _ => {}
        }
        let turn = skill.converse("kgvb-repl", line.trim_end_matches(['\r', '\n'])).await;
        if show_json {
            println!("request:  {}", turn.request.get());
            println!("response: {}", turn.response.get());
        }
        println!("{}", turn.answer);
    }
    Ok(())
}
