use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use qpp_core::corpus::{load_queries, snapshot, Qrels, SenseLexicon, Tokenizer};
use qpp_core::eval::{evaluate_predictions, predictor_correlation_matrix, rmse_single, CorrMetric, EvalReport};
use qpp_core::fusion::{fit_combiner, minmax_fit_apply, predict, Combiner, ScoreTable};
use qpp_core::harness::{load_index, run_experiment, ExperimentConfig, Protocol};
use qpp_core::postret::{PostScores, POST_PREDICTORS};
use qpp_core::preret::{PreScores, PRE_PREDICTORS};
use qpp_core::retrieval::{average_precision, format_run, retrieve};
use qpp_core::tsv::{fmt4, write_file};

#[derive(Parser)]
#[command(name = "qpp", version, about = "Query performance prediction experiments")]
struct Cli {
    /// Experiment config (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overriding `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding `output.dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Documents file (overrides `corpus.docs`).
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Queries file (overrides `corpus.queries`).
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Qrels file (overrides `corpus.qrels`).
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Index snapshot written by `qpp index` (overrides `corpus.index`).
    #[arg(long)]
    index: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the index; writes `index.bin` and `index_stats.tsv`.
    Index(CorpusArgs),
    /// Rank documents for every query; writes `run.txt` and `ap.tsv`.
    Retrieve(CorpusArgs),
    /// Pre-retrieval predictors; writes `pre.tsv`.
    PredictPre(CorpusArgs),
    /// Post-retrieval predictors; writes `post.tsv`.
    PredictPost(CorpusArgs),
    /// Fit a combiner on a score table; writes `model.txt` and, with
    /// `--test`, `predictions.tsv`.
    Fuse {
        /// Training table (`query_id`, predictor columns, `AP`).
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long, default_value = "ols")]
        combiner: String,
        /// Comma-separated columns to use; default all.
        #[arg(long)]
        features: Option<String>,
    },
    /// Evaluate every column of a score table against its `AP` column;
    /// writes `report.tsv`.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
    },
    /// Pairwise predictor correlations; writes `corr_<metric>.tsv`.
    Heatmap {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "pearson")]
        metric: String,
    },
    /// Full pipeline over a split plan.
    Experiment {
        /// Split protocol (overrides `split.protocol`).
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn apply_corpus(cfg: &mut ExperimentConfig, args: &CorpusArgs) {
    if let Some(p) = &args.docs {
        cfg.docs = Some(p.clone());
    }
    if let Some(p) = &args.queries {
        cfg.queries = Some(p.clone());
    }
    if let Some(p) = &args.qrels {
        cfg.qrels = Some(p.clone());
    }
    if let Some(p) = &args.index {
        cfg.index = Some(p.clone());
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    write_file(&path, text)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn queries_of(cfg: &ExperimentConfig, index: &qpp_core::corpus::Index) -> Result<Vec<qpp_core::corpus::Query>> {
    let path = cfg.queries.as_ref().context("no queries file: set corpus.queries or --queries")?;
    Ok(load_queries(path, &Tokenizer::new(index.tokenizer_config().clone()))?)
}

fn full(v: f64) -> String {
    format!("{v}")
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    let out = cfg.output_dir.clone();
    match &cli.command {
        Command::Index(args) => {
            apply_corpus(&mut cfg, args);
            let index = load_index(&cfg)?;
            snapshot::save(&index, &out.join("index.bin"))?;
            write(&out, "index_stats.tsv", &index.stats_dump())?;
            println!(
                "indexed {} documents, {} terms, {} tokens",
                index.num_docs(),
                index.num_terms(),
                index.total_tokens()
            );
        }
        Command::Retrieve(args) => {
            apply_corpus(&mut cfg, args);
            let index = load_index(&cfg)?;
            let queries = queries_of(&cfg, &index)?;
            let qrels = cfg.qrels.as_ref().map(|p| Qrels::load(p)).transpose()?;
            let mut lists = Vec::new();
            let mut ap = String::from("query_id\tAP\n");
            for q in &queries {
                let r = retrieve(&index, q, cfg.depth, cfg.mu)?;
                if let Some(qrels) = &qrels {
                    let v = average_precision(&r.ranked, qrels, cfg.ap_cutoff).ok();
                    let _ = writeln!(ap, "{}\t{}", q.query_id, v.map_or("NA".into(), full));
                }
                lists.push(r.ranked);
            }
            write(&out, "run.txt", &format_run(&lists, &cfg.run_tag))?;
            if qrels.is_some() {
                write(&out, "ap.tsv", &ap)?;
            }
        }
        Command::PredictPre(args) => {
            apply_corpus(&mut cfg, args);
            let index = load_index(&cfg)?;
            let queries = queries_of(&cfg, &index)?;
            let lexicon = cfg.lexicon.as_ref().map(|p| SenseLexicon::load(p)).transpose()?;
            let mut text = format!("query_id\t{}\n", PRE_PREDICTORS.join("\t"));
            for q in &queries {
                let s = PreScores::compute(&index, q, lexicon.as_ref(), cfg.semantics);
                text.push_str(&q.query_id);
                for v in s.values() {
                    let cell = if s.is_degenerate() { "NA".into() } else { full(v) };
                    let _ = write!(text, "\t{cell}");
                }
                text.push('\n');
            }
            write(&out, "pre.tsv", &text)?;
        }
        Command::PredictPost(args) => {
            apply_corpus(&mut cfg, args);
            let index = load_index(&cfg)?;
            let queries = queries_of(&cfg, &index)?;
            let mut text = format!("query_id\t{}\n", POST_PREDICTORS.join("\t"));
            for q in &queries {
                let r = retrieve(&index, q, cfg.depth, cfg.mu)?;
                text.push_str(&q.query_id);
                if r.degenerate {
                    text.push_str(&"\tNA".repeat(POST_PREDICTORS.len()));
                } else {
                    let s = PostScores::compute(&index, q, &r.ranked, &cfg.post)?;
                    for v in s.values() {
                        let _ = write!(text, "\t{}", v.map_or("NA".into(), full));
                    }
                }
                text.push('\n');
            }
            write(&out, "post.tsv", &text)?;
        }
        Command::Fuse {
            train,
            test,
            combiner,
            features,
        } => {
            let combiner: Combiner = combiner.parse()?;
            let mut table = ScoreTable::load(train)?;
            if let Some(f) = features {
                let names: Vec<&str> = f.split(',').map(str::trim).collect();
                table = table.select_columns(&names)?;
            }
            let test_table = match test {
                Some(p) => ScoreTable::load(p)?.select_columns(table.names())?,
                None => table.clone(),
            };
            let (train_n, _, norm) = minmax_fit_apply(&table, &test_table)?;
            let mut model = fit_combiner(combiner, &train_n, &cfg.fusion, cfg.seed)?;
            model.normalization = Some(norm);
            write(&out, "model.txt", &model.to_text())?;
            if test.is_some() {
                let pred = predict(&model, &test_table, cfg.fusion.clamp)?;
                let mut text = String::from("query_id\tprediction\n");
                for (q, p) in test_table.query_ids().iter().zip(pred) {
                    let _ = writeln!(text, "{q}\t{}", full(p));
                }
                write(&out, "predictions.tsv", &text)?;
            }
            println!("{}: support {:?}", model.method, model.support());
        }
        Command::Evaluate { scores } => {
            let table = ScoreTable::load(scores)?;
            let ap = table.target()?;
            let all: Vec<usize> = (0..table.num_rows()).collect();
            let mut rows = Vec::new();
            for (j, name) in table.names().iter().enumerate() {
                // Map the raw score onto the AP scale with an in-sample line
                // so RMSE is comparable across predictors.
                let fit = rmse_single(table.column(j), ap, &all, &all)?;
                rows.push(evaluate_predictions(name, &fit.predictions, ap)?);
            }
            let report = EvalReport { rows };
            write(&out, "report.tsv", &report.to_tsv())?;
            for r in &report.rows {
                println!("{}\trho={}", r.name, r.rho.map_or("NA".into(), fmt4));
            }
        }
        Command::Heatmap { scores, metric } => {
            let metric: CorrMetric = metric.parse()?;
            let table = ScoreTable::load(scores)?;
            let matrix = predictor_correlation_matrix(&table, metric)?;
            write(&out, &format!("corr_{metric}.tsv"), &matrix.to_tsv())?;
            for (i, j, reason) in &matrix.missing {
                eprintln!("warning: {} / {}: {reason}", matrix.names[*i], matrix.names[*j]);
            }
        }
        Command::Experiment { protocol, repeats } => {
            if let Some(p) = protocol {
                cfg.split.protocol = p.parse::<Protocol>()?;
            }
            if let Some(r) = repeats {
                if *r == 0 {
                    bail!("--repeats must be positive");
                }
                cfg.split.repeats = *r;
            }
            let outcome = run_experiment(&cfg)?;
            println!("{}", outcome.evaluation.aggregate.to_tsv().trim_end());
            println!(
                "regime {} / outcome {}; artifacts in {}",
                outcome.hypothesis.regime,
                outcome.hypothesis.outcome.map_or("NA".into(), |o| o.to_string()),
                out.display()
            );
        }
    }
    Ok(())
}
