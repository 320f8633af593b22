mod config;
mod error;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use graphilosophy::benchmark::{
    benchmark_embedder, chunking_benchmark, evaluate_chunking, retrieval_benchmark, BENCHMARK_SEED,
};
use graphilosophy::chunking::{chunk_document, fixed_chunk, Chunk};
use graphilosophy::corpus::{parse_commentary, Corpus, Normalizer};
use graphilosophy::embedding::{EmbedderSpec, EmbeddingProvider};
use graphilosophy::extraction::{
    default_speakers, default_taxonomy, load_speakers, load_taxonomy, ConceptDef, SpeakerPattern,
};
use graphilosophy::graph::{self, stats, Graph};
use graphilosophy::ontology::{Layer, RelationType};
use graphilosophy::pipeline::{build_graph, BuildReport};
use graphilosophy::query::{bfs_subgraph, Filters, QueryEngine, QueryMode, QueryRequest};
use graphilosophy::retrieval::{
    graph_documents, parse_benchmark, run_benchmark, Bm25Params, Method, DEFAULT_K_RRF,
};
use graphilosophy_server::{envelope, AppState};

use config::Config;
use error::{CliError, Code};

#[derive(Debug, Parser)]
#[command(name = "graphilosophy", version, about = "Build, inspect, query and serve tri-parallel text graphs")]
struct Cli {
    /// TOML configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Embedding provider: hash, hash:<dim>:<seed>, file:<path> or http.
    #[arg(long, global = true)]
    embedder: Option<String>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a corpus, build its graph in memory and report problems.
    Validate(CorpusArgs),
    /// Build a graph file from a corpus directory.
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-layer build report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print graph statistics as a table followed by one JSON record.
    Stats { graph: PathBuf },
    /// Chunk a text file, or every row of a commentary JSONL file.
    Chunk(ChunkArgs),
    /// Run a query and print the resulting subgraph.
    Query(QueryArgs),
    /// Evaluate BM25, semantic and hybrid retrieval.
    Eval(EvalArgs),
    /// Serve the read-only HTTP API.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        /// Listen address; GRAPHILOSOPHY_BIND overrides it.
        #[arg(long)]
        bind: Option<String>,
        /// Allowed CORS origin (repeatable); any origin when absent.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
    },
    /// Write a visualization payload for offline use.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Directory holding main_text.jsonl, dictionary.jsonl and commentary.jsonl.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    speakers: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChunkMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Args)]
struct ChunkArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "adaptive")]
    mode: ChunkMode,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    max_tokens: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    #[arg(long)]
    min_chars: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryFormat {
    Table,
    GraphJson,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    text: String,
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    max_seeds: usize,
    /// Comma-separated layers to expand into.
    #[arg(long)]
    layers: Option<String>,
    /// Comma-separated relations to expand along.
    #[arg(long)]
    relations: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    format: QueryFormat,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, required_unless_present = "synthetic")]
    graph: Option<PathBuf>,
    /// Line-delimited {query, relevant_doc_ids} records.
    #[arg(long, required_unless_present = "synthetic")]
    benchmark: Option<PathBuf>,
    /// Use the bundled synthetic retrieval and chunking benchmarks instead.
    #[arg(long, conflicts_with_all = ["graph", "benchmark"])]
    synthetic: bool,
    #[arg(long, default_value = "bm25,semantic,hybrid")]
    methods: String,
    #[arg(long, default_value = "1,3,5,10")]
    k: String,
    /// Write the machine-readable report here as well.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    /// Subgraph payload exactly as served by `/subgraph`.
    GraphJson,
    /// The graph file format.
    GraphJsonl,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "graph-json")]
    format: ExportFormat,
    /// Seed node ids (comma-separated); the whole graph when absent.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = if cli.verbose { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| filter.into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(e) = cli.embedder {
        cfg.embedder = Some(e);
    }
    match cli.command {
        Command::Validate(args) => validate(cfg, args),
        Command::Build { corpus, out, report } => build(cfg, corpus, &out, report.as_deref()),
        Command::Stats { graph } => print_stats(&graph),
        Command::Chunk(args) => chunk(cfg, args),
        Command::Query(args) => query(cfg, args),
        Command::Eval(args) => eval(cfg, args),
        Command::Serve { graph, bind, cors_origins } => {
            if let Some(b) = bind {
                cfg.bind = b;
            }
            if !cors_origins.is_empty() {
                cfg.cors_origins = cors_origins;
            }
            cfg.apply_env();
            let g = graph::load(&graph)?;
            let embedder = embedder_for(&cfg, Some(&g))?;
            let state = AppState::new(g, embedder)?;
            graphilosophy_server::run(state, &cfg.bind, &cfg.cors_origins)?;
            Ok(())
        }
        Command::Export(args) => export(args),
    }
}

// ── helpers ──────────────────────────────────────────────────────────────────

/// Flag or config value, else the provider recorded in the graph header when
/// it can be rebuilt from its id, else the default hash embedder.
fn embedder_for(cfg: &Config, graph: Option<&Graph>) -> Result<Box<dyn EmbeddingProvider>, CliError> {
    let spec = match (&cfg.embedder, graph) {
        (Some(s), _) => EmbedderSpec::parse(s)?,
        (None, Some(g)) if g.header.embedder_id.starts_with("hash:") => EmbedderSpec::parse(&g.header.embedder_id)?,
        (None, Some(g)) if g.header.embedder_id.starts_with("http:") => EmbedderSpec::Http,
        (None, Some(g)) if !g.header.embedder_id.is_empty() && g.header.embedder_id != "hash" => {
            return Err(CliError::bad_input(format!(
                "graph was built with `{}`; pass --embedder to reproduce it",
                g.header.embedder_id
            )))
        }
        _ => EmbedderSpec::parse("hash")?,
    };
    Ok(spec.build(cfg.http_cache.as_deref())?)
}

fn tables(cfg: &Config, args: &CorpusArgs) -> Result<(Vec<ConceptDef>, Vec<SpeakerPattern>), CliError> {
    let taxonomy = match args.taxonomy.as_ref().or(cfg.taxonomy.as_ref()) {
        Some(p) => load_taxonomy(p)?,
        None => default_taxonomy(),
    };
    let speakers = match args.speakers.as_ref().or(cfg.speakers.as_ref()) {
        Some(p) => load_speakers(p)?,
        None => default_speakers(),
    };
    Ok((taxonomy, speakers))
}

fn load_corpus(cfg: &Config, dir: &Path) -> Result<Corpus, CliError> {
    if !dir.is_dir() {
        return Err(CliError::bad_input(format!("corpus directory {} not found", dir.display())));
    }
    Ok(Corpus::load(dir, &Normalizer::new(&cfg.strip_patterns)?)?)
}

fn build_from(cfg: &Config, args: &CorpusArgs) -> Result<(Corpus, Graph, BuildReport), CliError> {
    let corpus = load_corpus(cfg, &args.corpus)?;
    let (taxonomy, speakers) = tables(cfg, args)?;
    let embedder = embedder_for(cfg, None)?;
    let (graph, report) = build_graph(&corpus, &cfg.pipeline(), &taxonomy, &speakers, embedder.as_ref())?;
    Ok((corpus, graph, report))
}

fn parse_list<T>(raw: &str, what: &str) -> Result<BTreeSet<T>, CliError>
where
    T: std::str::FromStr + Ord,
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| CliError::bad_input(format!("{what}: {e}"))))
        .collect()
}

fn filters(layers: Option<&str>, relations: Option<&str>) -> Result<Filters, CliError> {
    Ok(Filters {
        layers: layers.map(|l| parse_list::<Layer>(l, "--layers")).transpose()?,
        relations: relations.map(|r| parse_list::<RelationType>(r, "--relations")).transpose()?,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new(Code::Io, format!("{}: {e}", path.display())))
}

// ── commands ─────────────────────────────────────────────────────────────────

fn validate(cfg: Config, args: CorpusArgs) -> Result<(), CliError> {
    let (corpus, graph, report) = build_from(&cfg, &args)?;
    let violations = graph.schema_violations();
    println!("sentences           {}", corpus.sentences.len());
    println!(
        "dictionary          {} rows, {} entries after consolidation",
        corpus.dictionary_rows.len(),
        corpus.dictionary.len()
    );
    println!("commentaries        {}", corpus.commentaries.len());
    println!("chunks              {} ({} fixed-size fallbacks)", report.chunk_count, report.fallbacks.len());
    let gaps: usize = report.steps.values().map(|d| d.gaps.len()).sum();
    println!("dictionary gaps     {gaps}");
    for flag in &corpus.flags {
        println!("flag                {}", serde_json::to_string(flag).expect("flag serializes"));
    }
    println!("graph               {} nodes, {} edges", graph.node_count(), graph.edge_count());
    println!("{violations} schema violations");
    if violations > 0 {
        return Err(CliError::new(Code::SchemaViolation, format!("{violations} schema violations")));
    }
    Ok(())
}

fn build(cfg: Config, args: CorpusArgs, out: &Path, report_path: Option<&Path>) -> Result<(), CliError> {
    let (_, graph, report) = build_from(&cfg, &args)?;
    graph::save(&graph, out)?;
    if let Some(p) = report_path {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &report).expect("report serializes");
        w.flush()?;
    }
    for (step, delta) in &report.steps {
        tracing::info!(step, nodes = delta.nodes, edges = delta.edges, "layer built");
    }
    println!("wrote {} ({} nodes, {} edges)", out.display(), graph.node_count(), graph.edge_count());
    Ok(())
}

fn print_stats(path: &Path) -> Result<(), CliError> {
    let g = graph::load(path)?;
    let s = stats(&g)?;
    print!("{}", s.render_table());
    println!("{}", serde_json::to_string(&s).expect("stats serialize"));
    Ok(())
}

fn chunk(cfg: Config, args: ChunkArgs) -> Result<(), CliError> {
    let mut params = cfg.chunking;
    params.theta = args.theta.unwrap_or(params.theta);
    params.window = args.window.unwrap_or(params.window);
    params.max_tokens = args.max_tokens.unwrap_or(params.max_tokens);
    params.overlap = args.overlap.unwrap_or(params.overlap);
    params.min_chars = args.min_chars.unwrap_or(params.min_chars);
    params.validate()?;

    let raw = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::bad_input(format!("{}: {e}", args.input.display())))?;
    let norm = Normalizer::new(&cfg.strip_patterns)?;
    let docs: Vec<(String, String)> = if args.input.extension().is_some_and(|e| e == "jsonl") {
        parse_commentary(raw.as_bytes(), &norm, &BTreeSet::new())?
            .records
            .into_iter()
            .map(|r| (r.commentary_id, r.text))
            .collect()
    } else {
        let id = args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        vec![(id, norm.normalize(&raw))]
    };
    let embedder = embedder_for(&cfg, None)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mode = match args.mode {
        ChunkMode::Adaptive => "adaptive",
        ChunkMode::Fixed => "fixed",
    };
    let header = json!({ "header": { "mode": mode, "params": params, "embedder_id": embedder.id() } });
    writeln!(out, "{header}")?;
    for (id, text) in &docs {
        let chunks: Vec<Chunk> = match args.mode {
            ChunkMode::Adaptive => chunk_document(id, text, embedder.as_ref(), &params)?.chunks,
            ChunkMode::Fixed => fixed_chunk(id, text, params.max_tokens, params.overlap)?,
        };
        for c in &chunks {
            let rec = json!({
                "source_id": c.source_id,
                "span": c.span,
                "text": c.text,
                "token_count": c.token_count,
                "method": c.method,
            });
            writeln!(out, "{rec}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn query(cfg: Config, args: QueryArgs) -> Result<(), CliError> {
    let g = graph::load(&args.graph)?;
    let embedder = embedder_for(&cfg, Some(&g))?;
    let engine = QueryEngine::new(g, embedder);
    let req = QueryRequest {
        text: args.text,
        mode: args.mode.parse::<QueryMode>()?,
        depth: args.depth,
        max_seeds: args.max_seeds,
        filters: filters(args.layers.as_deref(), args.relations.as_deref())?,
    };
    let res = engine.run(&req)?;
    match args.format {
        QueryFormat::Table => {
            println!("mode: {}", serde_json::to_value(res.mode).expect("mode serializes").as_str().unwrap_or(""));
            print!("{}", res.subgraph.render_table());
        }
        QueryFormat::GraphJson => {
            std::io::stdout().write_all(&envelope(&res.subgraph.payload()))?;
            println!();
        }
    }
    Ok(())
}

fn eval(cfg: Config, args: EvalArgs) -> Result<(), CliError> {
    let methods: Vec<Method> = parse_list::<Method>(&args.methods, "--methods")?.into_iter().collect();
    let ks: Vec<usize> = parse_list::<usize>(&args.k, "--k")?.into_iter().collect();
    if methods.is_empty() || ks.is_empty() {
        return Err(CliError::bad_input("--methods and --k must not be empty"));
    }
    let record = if args.synthetic {
        let bench = retrieval_benchmark(BENCHMARK_SEED, 40);
        let e = benchmark_embedder();
        let report = run_benchmark(&bench.docs, &bench.queries, &methods, &ks, &e, Bm25Params::default(), DEFAULT_K_RRF)?;
        print!("{}", report.render_table());
        let chunking = evaluate_chunking(&chunking_benchmark(BENCHMARK_SEED), &e, &cfg.chunking)
            .map_err(|err| CliError::bad_input(err.to_string()))?;
        println!(
            "chunking  adaptive Recall@5 {:.3} NDCG@5 {:.3} ({} chunks) | fixed Recall@5 {:.3} NDCG@5 {:.3} ({} chunks)",
            chunking.adaptive.recall_at_5,
            chunking.adaptive.ndcg_at_5,
            chunking.adaptive.chunk_count,
            chunking.fixed.recall_at_5,
            chunking.fixed.ndcg_at_5,
            chunking.fixed.chunk_count
        );
        json!({
            "header": { "benchmark": "synthetic", "seed": BENCHMARK_SEED, "embedder_id": e.id(), "chunking": cfg.chunking },
            "retrieval": report,
            "chunking": chunking,
        })
    } else {
        let bench_path = args.benchmark.expect("clap enforces --benchmark");
        let file = File::open(&bench_path)
            .map_err(|e| CliError::bad_input(format!("benchmark {}: {e}", bench_path.display())))?;
        let queries = parse_benchmark(BufReader::new(file))?;
        let g = graph::load(&args.graph.expect("clap enforces --graph"))?;
        let embedder = embedder_for(&cfg, Some(&g))?;
        let docs = graph_documents(&g);
        let report = run_benchmark(&docs, &queries, &methods, &ks, embedder.as_ref(), Bm25Params::default(), DEFAULT_K_RRF)?;
        print!("{}", report.render_table());
        json!({
            "header": { "benchmark": bench_path, "embedder_id": embedder.id(), "corpus_hash": g.header.corpus_hash },
            "retrieval": report,
        })
    };
    let line = serde_json::to_string(&record).expect("report serializes");
    println!("{line}");
    if let Some(p) = args.json {
        let mut w = create(&p)?;
        writeln!(w, "{line}")?;
        w.flush()?;
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<(), CliError> {
    let g = graph::load(&args.graph)?;
    let mut w = create(&args.out)?;
    match args.format {
        ExportFormat::GraphJsonl => graph::write_to(&g, &mut w)?,
        ExportFormat::GraphJson => {
            let sub = match &args.seed {
                Some(seeds) => {
                    let seeds: Vec<String> = seeds.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                    bfs_subgraph(&g, &seeds, args.depth, &filters(args.layers.as_deref(), None)?)?
                }
                None => graphilosophy::query::Subgraph {
                    nodes: g.nodes().to_vec(),
                    edges: g.edges().to_vec(),
                    seeds: Vec::new(),
                },
            };
            w.write_all(&envelope(&sub.payload()))?;
        }
    }
    w.flush()?;
    Ok(())
}
