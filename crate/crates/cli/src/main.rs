use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evsel::dataset::{generate_synthetic, load_csv, save_csv};
use evsel::harness::{format_summary, run_experiment, save_report, ExperimentConfig};
use evsel::prefilter::{bss_wss_rank, select_top_k};
use evsel::relevance::{
    check_lambda, exact_relevance, exact_relevance_from_table, read_truth_table, ExactOracleResult,
    DEFAULT_ENUMERATION_GUARD,
};
use evsel::search::{run_search, write_trace, DEFAULT_LAMBDA};
use evsel::{
    AccumulationMode, Algorithm, Error, InducerKind, LabelColumn, Result, SearchConfig, SubsetScorer, SyntheticSpec,
    WeightingFn,
};

/// Wrapper feature selection by sequential backward/forward generation.
#[derive(Parser, Debug)]
#[command(name = "evsel", version, about)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log one line per search step.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic two-class dataset with planted features.
    Synth(SynthArgs),
    /// Keep the k genes with the highest BSS/WSS ratio.
    Prefilter(PrefilterArgs),
    /// Run one search on a dataset and report the best subset.
    Select(SelectArgs),
    /// Paired 5x2 comparison of a plain and an accumulated search.
    Experiment(Box<ExperimentArgs>),
    /// Exact relevance of every feature by full subset enumeration.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 120)]
    samples: usize,
    /// Number of class-shifted columns (placed first).
    #[arg(long, default_value_t = 3)]
    informative: usize,
    #[arg(long, default_value_t = 9)]
    noise: usize,
    /// Mean shift of the informative columns in class c1.
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Input CSV, one sample per row.
    #[arg(long)]
    data: PathBuf,
    /// Label column: "last", a 0-based index, or a header name.
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
}

#[derive(Args, Debug)]
struct PrefilterArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Number of genes to keep.
    #[arg(long)]
    k: usize,
    /// Output CSV path for the reduced dataset.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the `new_index,original_name` map (default: <out>.map.csv).
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InducerArgs {
    /// Inducer: 1nn or lda.
    #[arg(long, default_value = "1nn")]
    inducer: InducerKind,
    /// Ridge factor for LDA's pooled covariance.
    #[arg(long)]
    lda_gamma: Option<f64>,
}

impl InducerArgs {
    fn resolve(&self) -> Result<InducerKind> {
        let inducer = match (self.inducer, self.lda_gamma) {
            (InducerKind::Lda { .. }, Some(gamma)) => InducerKind::Lda { gamma },
            (InducerKind::OneNn, Some(_)) => {
                return Err(Error::Validation("--lda-gamma requires --inducer lda".into()));
            }
            (inducer, None) => inducer,
        };
        inducer.validate()?;
        Ok(inducer)
    }
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    input: DataArgs,
    #[command(flatten)]
    inducer: InducerArgs,
    /// Search algorithm: sbg, sbg+, sfg or sfg+.
    #[arg(long, default_value = "sbg+")]
    algo: Algorithm,
    /// Weight of the accumulated evidence, in [0, 1].
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// Evidence weighting: unit, size or score.
    #[arg(long, default_value = "unit")]
    weighting: WeightingFn,
    /// Accumulation mode: per_subset or literal_alg2.
    #[arg(long, default_value = "per_subset")]
    accumulation: AccumulationMode,
    /// Seed of the inner 5x2 evaluation plan.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-evaluation trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV; without it a synthetic dataset is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    synth_samples: Option<usize>,
    #[arg(long)]
    synth_informative: Option<usize>,
    #[arg(long)]
    synth_noise: Option<usize>,
    #[arg(long)]
    synth_separation: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Inducer: 1nn or lda.
    #[arg(long)]
    inducer: Option<String>,
    #[arg(long)]
    lda_gamma: Option<f64>,
    /// Keep the top k genes of each training half before searching.
    #[arg(long)]
    prefilter_k: Option<usize>,
    /// Rank genes once on all samples (reads test rows).
    #[arg(long)]
    global_prefilter: bool,
    #[arg(long)]
    lambda: Option<f64>,
    /// Evidence weighting: unit, size or score.
    #[arg(long)]
    weighting: Option<String>,
    /// Accumulation mode: per_subset or literal_alg2.
    #[arg(long)]
    accumulation: Option<String>,
    /// backward (sbg vs sbg+) or forward (sfg vs sfg+).
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    outer_seed: Option<u64>,
    #[arg(long)]
    inner_seed: Option<u64>,
    /// Write the report CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Truth table of `bitstring,score` lines covering every subset.
    #[arg(long, conflicts_with = "data")]
    table: Option<PathBuf>,
    /// Score subsets of this dataset with the inner 5x2 protocol instead.
    #[arg(long, required_unless_present = "table")]
    data: Option<PathBuf>,
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
    #[command(flatten)]
    inducer: InducerArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse to enumerate more than 2^N subsets.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_GUARD)]
    n_guard: usize,
    /// Weighting for the weighted relevance: unit, size or score.
    #[arg(long, default_value = "unit")]
    weighting: WeightingFn,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn flush(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n_samples: args.samples,
        n_informative: args.informative,
        n_noise: args.noise,
        class_separation: args.separation,
        seed: args.seed,
    })?;
    save_csv(&data, &args.out)?;
    println!(
        "wrote {} samples x {} features to {}",
        data.n_samples(),
        data.n_features(),
        args.out.display()
    );
    Ok(())
}

fn cmd_prefilter(args: &PrefilterArgs) -> Result<()> {
    let data = load_csv(&args.input.data, &args.input.label_column)?;
    if args.k == 0 || args.k > data.n_features() {
        return Err(Error::Validation(format!(
            "--k must lie in [1, {}], got {}",
            data.n_features(),
            args.k
        )));
    }
    let ranking = bss_wss_rank(&data)?;
    let (reduced, kept) = select_top_k(&data, &ranking, args.k)?;
    save_csv(&reduced, &args.out)?;

    let map_path = args.map.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".map.csv");
        PathBuf::from(p)
    });
    let mut w = create(&map_path)?;
    let io_err = |source| Error::Io {
        path: map_path.clone(),
        source,
    };
    writeln!(w, "new_index,original_name").map_err(io_err)?;
    for (new, &old) in kept.iter().enumerate() {
        writeln!(w, "{new},{}", data.feature_names()[old]).map_err(io_err)?;
    }
    flush(w, &map_path)?;
    println!("kept {} of {} genes; map in {}", args.k, data.n_features(), map_path.display());
    Ok(())
}

fn cmd_select(args: &SelectArgs) -> Result<()> {
    check_lambda(args.lambda)?;
    let inducer = args.inducer.resolve()?;
    let config = SearchConfig {
        algorithm: args.algo,
        lambda: args.lambda,
        weighting: args.weighting,
        accumulation_mode: args.accumulation,
    };
    config.validate()?;

    let data = load_csv(&args.input.data, &args.input.label_column)?;
    let scorer = SubsetScorer::new(inducer, args.seed).bind(&data)?;
    let result = run_search(&scorer, &config)?;

    if let Some(path) = &args.trace {
        let mut w = create(path)?;
        write_trace(&result.trace, &mut w)?;
        flush(w, path)?;
    }

    let names: Vec<&str> = result
        .best_mask
        .iter()
        .map(|j| data.feature_names()[j].as_str())
        .collect();
    println!("algorithm: {}", args.algo);
    println!("best subset: {}", names.join(","));
    match result.best_score {
        Some(s) => println!("inner score: {s} ({:.1}% accuracy)", 100.0 * s),
        None => println!("inner score: not evaluated"),
    }
    println!("subset size: {}", result.best_mask.len());
    println!("evaluations: {}", result.trace.call_count);
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides: [(&str, Option<String>); 17] = [
        ("data", args.data.as_ref().map(|p| p.display().to_string())),
        ("label_column", args.label_column.clone()),
        ("synth_samples", args.synth_samples.map(|v| v.to_string())),
        ("synth_informative", args.synth_informative.map(|v| v.to_string())),
        ("synth_noise", args.synth_noise.map(|v| v.to_string())),
        ("synth_separation", args.synth_separation.map(|v| v.to_string())),
        ("synth_seed", args.synth_seed.map(|v| v.to_string())),
        ("inducer", args.inducer.clone()),
        ("prefilter_k", args.prefilter_k.map(|v| v.to_string())),
        ("global_prefilter", args.global_prefilter.then(|| "true".to_string())),
        ("lambda", args.lambda.map(|v| v.to_string())),
        ("weighting", args.weighting.clone()),
        ("accumulation_mode", args.accumulation.clone()),
        ("direction", args.direction.clone()),
        ("outer_seed", args.outer_seed.map(|v| v.to_string())),
        ("inner_seed", args.inner_seed.map(|v| v.to_string())),
        ("lda_gamma", args.lda_gamma.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            cfg.set(key, &value)?;
        }
    }
    cfg.validate()?;

    let report = run_experiment(&cfg)?;
    if let Some(path) = &args.out {
        save_report(&report, path)?;
    }
    print!("{}", format_summary(&report));
    let (minus, plus) = cfg.algorithms();
    let folds = report.differences.len().max(1) as f64;
    let error: f64 = report.differences.iter().map(|d| d.test_error).sum::<f64>() / folds;
    let size: f64 = report.differences.iter().map(|d| d.subset_size).sum::<f64>() / folds;
    println!("paired difference ({plus} - {minus}): test error {:+.1}%, subset size {size:+.1}", 100.0 * error);
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let result: ExactOracleResult = if let Some(path) = &args.table {
        let (n, scores) = read_truth_table(BufReader::new(open(path)?), args.n_guard)?;
        exact_relevance_from_table(&scores, n, args.weighting)?
    } else {
        let path = args.data.as_ref().expect("clap requires --data without --table");
        let inducer = args.inducer.resolve()?;
        let data = load_csv(path, &args.label_column)?;
        let n = data.n_features();
        if n > args.n_guard {
            return Err(Error::EnumerationGuard { n, guard: args.n_guard });
        }
        let scorer = SubsetScorer::new(inducer, args.seed).bind(&data)?;
        exact_relevance(|m| scorer.score_subset(m), n, args.weighting, args.n_guard)?
    };

    println!("weighting: {}", result.weighting);
    for (j, f) in result.features.iter().enumerate() {
        println!(
            "f{j}: L+={:.6} L-={:.6} R={:.6} R_compact={:.6} R_w={:.6}",
            f.plus, f.minus, f.relevance, f.relevance_compact, f.relevance_weighted
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Prefilter(a) => cmd_prefilter(a),
        Command::Select(a) => cmd_select(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
