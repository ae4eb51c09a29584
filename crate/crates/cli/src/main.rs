//! `padkit`: validate a coded corpus, compute its frequency tables, emit its
//! graph documents, or serve it for interactive categorization.

use std::fs::{self, File};
use std::io::BufReader;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use padkit_core::graphics::{
    self, DagOptions, DyadCount, GraphDoc, GraphicsError, SvgLayout, Widths,
};
use padkit_core::ingest::{
    assemble_corpus, export_csv, load_corpus_json, load_nodes_csv, load_triads_csv, to_json_string,
    IngestError,
};
use padkit_core::metrics::{self, DyadGranularity};
use padkit_core::{validate_corpus, Corpus, Kind, ValidationReport};
use padkit_service::{AppState, ServiceConfig};

#[derive(Parser)]
#[command(
    name = "padkit",
    version,
    about = "Pipeline for P/A/D coded literature corpora"
)]
struct Cli {
    #[command(flatten)]
    input: Input,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Node table `label,code,category_code`; requires --triads.
    #[arg(long, global = true, value_name = "FILE")]
    nodes: Option<PathBuf>,
    /// Triad table `ru_id,p,a,d`; requires --nodes.
    #[arg(long, global = true, value_name = "FILE")]
    triads: Option<PathBuf>,
    /// Corpus JSON document, instead of the two tables.
    #[arg(long, global = true, value_name = "FILE")]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Directory for the generated files.
    #[arg(long, default_value = ".", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct Render {
    #[command(flatten)]
    output: Output,
    /// Also render each document to SVG.
    #[arg(long)]
    svg: bool,
    /// SVG layout: `auto` tries the external command and falls back to the
    /// built-in layered layout.
    #[arg(long, value_enum, default_value_t = Layout::Auto)]
    layout: Layout,
    /// External layout command reading DOT on stdin, e.g. "dot -Tsvg".
    #[arg(long, value_name = "CMD")]
    layout_cmd: Option<String>,
    #[arg(long, default_value_t = graphics::DEFAULT_MIN_WIDTH)]
    min_width: f64,
    #[arg(long, default_value_t = graphics::DEFAULT_MAX_WIDTH)]
    max_width: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Auto,
    Builtin,
}

#[derive(Clone, Copy, ValueEnum)]
enum DyadCountArg {
    Occurrence,
    RuBinary,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Category,
    Node,
}

#[derive(Subcommand)]
enum Command {
    /// Check the corpus and print every issue; exits 1 on errors.
    Validate,
    /// Write the six frequency tables and the average challenge count as CSV.
    Stats {
        #[command(flatten)]
        output: Output,
        /// Deduplicate W_P dyads per category pair or per node pair.
        #[arg(long, value_enum, default_value_t = GranularityArg::Category)]
        dyad_granularity: GranularityArg,
    },
    /// Causality DAG: P, A and D columns with aggregated links.
    Dag {
        #[command(flatten)]
        render: Render,
        /// One vertex per code instead of per category.
        #[arg(long)]
        node_level: bool,
    },
    /// Triads graphic: one P-A-D polyline per category triad.
    Triads {
        #[command(flatten)]
        render: Render,
    },
    /// Dyad graphic of one problem category.
    Dyads {
        #[command(flatten)]
        render: Render,
        /// Problem category label, e.g. P2.
        #[arg(long, value_name = "LABEL")]
        problem: String,
        #[arg(long, value_enum, default_value_t = DyadCountArg::Occurrence)]
        dyad_count: DyadCountArg,
    },
    /// Category taxonomy of one kind.
    Taxonomy {
        #[command(flatten)]
        render: Render,
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
    },
    /// Write the corpus as JSON, or as the two CSV tables.
    Export {
        #[command(flatten)]
        output: Output,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Serve the corpus over HTTP for interactive categorization.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Where `POST /api/save` writes the corpus document.
        #[arg(long, value_name = "FILE")]
        save: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse::<Kind>()
        .map_err(|_| format!("expected P, A or D, got `{s}`"))
}

/// Errors reported with exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// A corpus that failed validation is kept only as its report.
struct Loaded {
    corpus: Option<Corpus>,
    report: ValidationReport,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn load(input: &Input) -> Result<Loaded> {
    let corpus = match (&input.corpus, &input.nodes, &input.triads) {
        (Some(path), None, None) => load_corpus_json(open(path)?)
            .with_context(|| format!("cannot load {}", path.display()))?,
        (None, Some(nodes), Some(triads)) => {
            let node_rows = load_nodes_csv(open(nodes)?)
                .with_context(|| format!("cannot load {}", nodes.display()))?;
            let triad_rows = load_triads_csv(open(triads)?)
                .with_context(|| format!("cannot load {}", triads.display()))?;
            match assemble_corpus(&node_rows, &triad_rows) {
                Ok(corpus) => corpus,
                Err(IngestError::Invalid(report)) => {
                    return Ok(Loaded {
                        corpus: None,
                        report,
                    })
                }
                Err(err) => return Err(err).context("cannot assemble corpus"),
            }
        }
        (None, None, None) => {
            return Err(UsageError(
                "no input: give --corpus FILE or --nodes FILE --triads FILE".into(),
            )
            .into())
        }
        (Some(_), _, _) => {
            return Err(
                UsageError("--corpus cannot be combined with --nodes or --triads".into()).into(),
            )
        }
        (None, _, _) => {
            return Err(UsageError("--nodes and --triads must be given together".into()).into())
        }
    };
    let report = validate_corpus(&corpus);
    Ok(Loaded {
        corpus: report.is_clean().then_some(corpus),
        report,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let loaded = load(&cli.input);
    if let (Command::Validate, Err(err)) = (&cli.command, &loaded) {
        if err.downcast_ref::<UsageError>().is_none() {
            println!("error: {err:#}");
            return Ok(ExitCode::from(1));
        }
    }
    let Loaded { corpus, report } = loaded?;
    if let Command::Validate = cli.command {
        print!("{report}");
        return Ok(match corpus {
            Some(corpus) => {
                println!(
                    "ok: {} research units, {} triads, {} nodes, {} categories",
                    corpus.research_units.len(),
                    corpus.triad_count(),
                    corpus.nodes.len(),
                    corpus.categories.len()
                );
                ExitCode::SUCCESS
            }
            None => ExitCode::from(1),
        });
    }
    let Some(corpus) = corpus else {
        eprint!("{report}");
        anyhow::bail!("corpus has {} validation error(s)", report.error_count());
    };
    match cli.command {
        Command::Validate => unreachable!("handled above"),
        Command::Stats {
            output,
            dyad_granularity,
        } => stats(&corpus, &output.out, dyad_granularity),
        Command::Dag { render, node_level } => {
            let options = DagOptions {
                node_level,
                widths: widths(&render)?,
            };
            let doc = graphics::emit_causality_dag(&corpus, &options)?;
            write_doc(&render, "dag", &doc)
        }
        Command::Triads { render } => {
            let doc = graphics::emit_triads_graphic(&corpus, widths(&render)?)?;
            write_doc(&render, "triads", &doc)
        }
        Command::Dyads {
            render,
            problem,
            dyad_count,
        } => {
            let count = match dyad_count {
                DyadCountArg::Occurrence => DyadCount::Occurrence,
                DyadCountArg::RuBinary => DyadCount::RuBinary,
            };
            let doc = match graphics::emit_pa_dyads(&corpus, &problem, count, widths(&render)?) {
                Err(
                    err @ (GraphicsError::UnknownCategory(_)
                    | GraphicsError::KindMismatch { .. }
                    | GraphicsError::NotMetricCategory(_)),
                ) => return Err(UsageError(format!("--problem {problem}: {err}")).into()),
                other => other?,
            };
            let label = doc.name.trim_start_matches("dyads_").to_owned();
            write_doc(&render, &format!("dyads_{label}"), &doc)
        }
        Command::Taxonomy { render, kind } => {
            let doc = graphics::emit_taxonomy(&corpus, kind)?;
            write_doc(&render, &format!("taxonomy_{}", kind.symbol()), &doc)
        }
        Command::Export { output, format } => export(&corpus, &output.out, format),
        Command::Serve { port, host, save } => serve(corpus, SocketAddr::new(host, port), save),
    }
}

fn widths(render: &Render) -> Result<Widths> {
    let w = Widths {
        min: render.min_width,
        max: render.max_width,
    };
    graphics::thickness_scale(&[1], w.min, w.max).map_err(|e| UsageError(e.to_string()))?;
    Ok(w)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn write_doc(render: &Render, stem: &str, doc: &GraphDoc) -> Result<ExitCode> {
    let dir = &render.output.out;
    write_file(dir, &format!("{stem}.dot"), &doc.to_dot())?;
    if render.svg {
        let layout = match (&render.layout_cmd, render.layout) {
            (Some(cmd), _) => SvgLayout::External(cmd.clone()),
            (None, Layout::Auto) => SvgLayout::Auto,
            (None, Layout::Builtin) => SvgLayout::Builtin,
        };
        let svg = graphics::render_svg(doc, &layout)?;
        write_file(dir, &format!("{stem}.svg"), &svg)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(corpus: &Corpus, dir: &Path, granularity: GranularityArg) -> Result<ExitCode> {
    let granularity = match granularity {
        GranularityArg::Category => DyadGranularity::Category,
        GranularityArg::Node => DyadGranularity::Node,
    };
    let mut set = metrics::all_metrics(corpus)?;
    if granularity == DyadGranularity::Node {
        let w = metrics::w_p_with(corpus, granularity)?;
        for t in &mut set.tables {
            if t.metric == w.metric {
                *t = w.clone();
            }
        }
    }
    for table in &set.tables {
        write_file(
            dir,
            &format!("{}.csv", table.metric.stem()),
            &table.to_csv(),
        )?;
    }
    write_file(
        dir,
        "avg_challenges.txt",
        &metrics::avg_challenges_csv(set.avg_challenges_per_ru),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn export(corpus: &Corpus, dir: &Path, format: Format) -> Result<ExitCode> {
    match format {
        Format::Json => write_file(dir, "corpus.json", &to_json_string(corpus))?,
        Format::Csv => {
            if let Some(c) = corpus
                .categories
                .values()
                .find(|c| corpus.is_super_category(c))
            {
                anyhow::bail!(
                    "super-category {} cannot be written to nodes.csv; export as JSON",
                    c.label
                );
            }
            let (nodes, triads) = export_csv(corpus);
            write_file(dir, "nodes.csv", &nodes)?;
            write_file(dir, "triads.csv", &triads)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(corpus: Corpus, addr: SocketAddr, save: Option<PathBuf>) -> Result<ExitCode> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new().context("cannot start runtime")?;
    runtime.block_on(async move {
        let state = AppState::new(corpus, ServiceConfig { save_path: save })?;
        let listener = padkit_service::bind(addr).await?;
        let local = listener.local_addr()?;
        eprintln!("listening on http://{local}");
        padkit_service::serve(state, listener, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(ExitCode::SUCCESS)
    })
}
