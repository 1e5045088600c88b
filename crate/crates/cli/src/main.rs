use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparqlog_core::report::{run_pipeline, PipelineOptions, ReportBundle, TableKind};
use sparqlog_core::streak::StreakConfig;
use sparqlog_core::workload::{gmark_presets, write_rq_dir, FlowerParams, GenQueryType, GenShape, GenSpec};
use sparqlog_core::{generate, AnalysisOptions, DedupMode, FlowerMode, LogFormat, WidthOptions};

#[derive(Parser)]
#[command(name = "sparqlog", version, about = "Structural analysis of SPARQL query logs")]
struct Cli {
    /// Worker threads for per-query analysis (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus counts, keywords, operator sets, triple counts and fragments.
    Analyze(AnalyzeArgs),
    /// Shape classification of CQ, CQF and CQFO queries.
    Shapes(AnalyzeArgs),
    /// Treewidth and hypertree width of CQFO queries.
    Widths(AnalyzeArgs),
    /// Property path templates.
    Paths(AnalyzeArgs),
    /// Streaks of similar queries within a sliding window.
    Streaks(StreakArgs),
    /// Generate a synthetic workload of queries with a known shape.
    Gen(GenArgs),
    /// Every table, including the streak histogram.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Log files, or directories of .rq files with --format rq-dir.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    #[arg(long, default_value = "lines")]
    format: LogFormat,

    /// Write CSV tables and summary.json here instead of printing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "whitespace")]
    dedup_mode: DedupMode,

    /// Also write one row per analyzed query (queries.csv, needs --out).
    #[arg(long)]
    details: bool,
}

#[derive(Args)]
struct AnalysisArgs {
    /// Treat IRIs and literals as non-nodes when building canonical graphs.
    #[arg(long)]
    no_constants: bool,

    /// Largest hypertree width to decide.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    k_max: u8,

    /// Search budget per query and width measure.
    #[arg(long, default_value_t = sparqlog_core::width::DEFAULT_BUDGET)]
    budget: u64,

    #[arg(long, value_enum, default_value_t = Flowers::Strict)]
    flowers: Flowers,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flowers {
    Strict,
    Relaxed,
}

#[derive(Args)]
struct DedupFlags {
    /// Drop duplicate queries (default).
    #[arg(long, overrides_with = "no_dedup")]
    dedup: bool,
    /// Keep duplicates; counts then report unique = valid.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Args)]
struct StreakFlags {
    /// Sliding window size in queries.
    #[arg(long, default_value_t = sparqlog_core::streak::DEFAULT_WINDOW)]
    window: usize,
    /// Maximum normalized edit distance between similar queries.
    #[arg(long, default_value_t = sparqlog_core::streak::DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dedup: DedupFlags,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args)]
struct StreakArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Deduplicate before detecting streaks (off by default).
    #[arg(long, overrides_with = "no_dedup")]
    dedup: bool,
    #[arg(long)]
    no_dedup: bool,
    #[command(flatten)]
    streak: StreakFlags,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dedup: DedupFlags,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(flatten)]
    streak: StreakFlags,
}

#[derive(Args)]
struct GenArgs {
    /// chain, cycle, star, tree, petal, flower or flowerset.
    #[arg(long, required_unless_present = "preset")]
    shape: Option<GenShape>,
    /// Number of triples per query.
    #[arg(long, default_value_t = 5)]
    length: usize,
    /// Queries per workload (also applies to each preset workload).
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ask")]
    query_type: GenQueryType,
    /// Draw predicates from a vocabulary of this size.
    #[arg(long)]
    vocabulary: Option<usize>,
    /// Exact flower layout as petals,stamens,stems.
    #[arg(long, value_parser = parse_flower)]
    flower: Option<FlowerParams>,
    /// Write a preset suite instead of a single workload.
    #[arg(long, value_enum, conflicts_with = "shape")]
    preset: Option<Preset>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Gmark,
}

fn parse_flower(s: &str) -> Result<FlowerParams, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [petals, stamens, stems] => Ok(FlowerParams { petals, stamens, stems }),
        _ => Err("expected petals,stamens,stems".into()),
    }
}

impl DedupFlags {
    fn enabled(&self) -> bool {
        !self.no_dedup
    }
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            include_constants: !self.no_constants,
            flower_mode: match self.flowers {
                Flowers::Strict => FlowerMode::Strict,
                Flowers::Relaxed => FlowerMode::Relaxed,
            },
            widths: WidthOptions {
                k_max: self.k_max as usize,
                budget: self.budget,
                ..WidthOptions::default()
            },
        }
    }
}

impl StreakFlags {
    fn config(&self) -> Result<StreakConfig> {
        if self.window == 0 {
            bail!("--window must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            bail!("--threshold must lie in [0, 1]");
        }
        Ok(StreakConfig { window: self.window, threshold: self.threshold })
    }
}

fn base_options(input: &InputArgs, dedup: bool) -> PipelineOptions {
    PipelineOptions {
        format: input.format,
        dedup,
        dedup_mode: input.dedup_mode,
        details: input.details && input.out.is_some(),
        ..PipelineOptions::default()
    }
}

fn analyze(input: &InputArgs, opts: &PipelineOptions, kinds: &[TableKind]) -> Result<()> {
    // Unreadable inputs are logged by the pipeline and listed in summary.json.
    let bundle = run_pipeline(&input.inputs, opts);
    if bundle.skipped.len() == input.inputs.len() {
        bail!("none of the inputs could be read");
    }
    emit(&bundle, input.out.as_deref(), kinds)
}

fn emit(bundle: &ReportBundle, out: Option<&Path>, kinds: &[TableKind]) -> Result<()> {
    if let Some(dir) = out {
        bundle
            .write_dir(dir, kinds)
            .with_context(|| format!("writing reports to {}", dir.display()))?;
        log::info!("wrote {} report groups to {}", bundle.groups.len(), dir.display());
        return Ok(());
    }
    // Without --out only the merged group is printed, one CSV block per table.
    let all = bundle.all();
    let stdout = io::stdout();
    let mut w = stdout.lock();
    for (i, &k) in kinds.iter().enumerate() {
        if i > 0 {
            writeln!(w)?;
        }
        if kinds.len() > 1 {
            writeln!(w, "# {}", k.name())?;
        }
        all.table(k).write_to(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let specs = match (args.preset, args.shape) {
        (Some(Preset::Gmark), _) => gmark_presets(args.seed)
            .into_iter()
            .map(|(name, mut spec)| {
                spec.count = args.count;
                spec.query_type = args.query_type;
                (name, spec)
            })
            .collect(),
        (None, Some(shape)) => {
            let mut spec = GenSpec::new(shape, args.length, args.count, args.seed);
            spec.query_type = args.query_type;
            spec.vocabulary = args.vocabulary;
            spec.flower = args.flower;
            vec![(String::new(), spec)]
        }
        (None, None) => bail!("--shape or --preset is required"),
    };
    for (name, spec) in specs {
        let queries = generate(&spec)?;
        let dir = if name.is_empty() { args.out.clone() } else { args.out.join(&name) };
        write_rq_dir(&queries, &dir).with_context(|| format!("writing {}", dir.display()))?;
        log::info!("wrote {} queries to {}", queries.len(), dir.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    use TableKind::*;
    match cli.command {
        Command::Analyze(a) => {
            let mut opts = base_options(&a.input, a.dedup.enabled());
            opts.analysis = a.analysis.options();
            analyze(&a.input, &opts, &[Corpus, Keywords, Operators, Triples, TripleSummary, Fragments])
        }
        Command::Shapes(a) => {
            let mut opts = base_options(&a.input, a.dedup.enabled());
            opts.analysis = a.analysis.options();
            analyze(&a.input, &opts, &[Corpus, Fragments, Shapes, Girth])
        }
        Command::Widths(a) => {
            let mut opts = base_options(&a.input, a.dedup.enabled());
            opts.analysis = a.analysis.options();
            analyze(&a.input, &opts, &[Corpus, Widths, DecompositionNodes])
        }
        Command::Paths(a) => {
            let mut opts = base_options(&a.input, a.dedup.enabled());
            opts.analysis = a.analysis.options();
            analyze(&a.input, &opts, &[Corpus, Paths])
        }
        Command::Streaks(a) => {
            let mut opts = base_options(&a.input, a.dedup && !a.no_dedup);
            opts.streaks = Some(a.streak.config()?);
            let kinds: &[TableKind] = if a.input.out.is_some() {
                &[Corpus, StreakHistogram]
            } else {
                &[StreakHistogram]
            };
            analyze(&a.input, &opts, kinds)
        }
        Command::Report(a) => {
            let mut opts = base_options(&a.input, a.dedup.enabled());
            opts.analysis = a.analysis.options();
            opts.streaks = Some(a.streak.config()?);
            analyze(&a.input, &opts, &TableKind::ALL)
        }
        Command::Gen(a) => gen(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
