//! End-to-end experiment: index, retrieve, score predictors, then fuse and
//! evaluate over a split plan.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ErrorKind, ExperimentConfig, Protocol};
use super::external::import_external_scores;
use super::hypothesis::{hypothesis_report, HypothesisReport};
use super::split::{parse_train_ids, split_fixed, split_fixed_fraction, split_leave_one_out, split_random_halves, SplitPlan};
use crate::corpus::{ingest, load_queries, snapshot, Index, Qrels, Query, SenseLexicon, Tokenizer, TokenizerConfig};
use crate::error::{Result, StageExt};
use crate::eval::{
    evaluate_predictions, paired_t_one_sided, predictor_correlation_matrix, rmse_single, split_rows_tsv, CorrMatrix,
    CorrMetric, EvalReport, EvalRow,
};
use crate::fusion::{fit_combiner, minmax_fit_apply, predict, ScoreTable};
use crate::postret::{PostScores, POST_PREDICTORS};
use crate::preret::PreScores;
use crate::retrieval::{average_precision, format_run, retrieve, RankedList};
use crate::seed::derive_seed;
use crate::tsv::{read_to_string, write_file};

/// Everything the pipeline reads from disk.
pub struct Inputs {
    pub index: Index,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
    pub lexicon: Option<SenseLexicon>,
}

pub fn tokenizer_config(cfg: &ExperimentConfig) -> Result<TokenizerConfig> {
    let mut tok = cfg.tokenizer.clone();
    if let Some(p) = &cfg.stopwords {
        tok.stopwords = TokenizerConfig::stopwords_from_str(&read_to_string(p)?);
    }
    Ok(tok)
}

pub fn load_index(cfg: &ExperimentConfig) -> Result<Index> {
    if let Some(p) = &cfg.index {
        return snapshot::load(p);
    }
    let docs_path = cfg
        .docs
        .as_ref()
        .ok_or_else(|| crate::Error::Config("set corpus.docs or corpus.index".into()))?;
    let docs = ingest(docs_path, cfg.doc_format)?;
    Index::build(&docs, &tokenizer_config(cfg)?)
}

pub fn load_inputs(cfg: &ExperimentConfig) -> Result<Inputs> {
    cfg.check_files().stage("config")?;
    let index = load_index(cfg).stage("index")?;
    let tokenizer = Tokenizer::new(index.tokenizer_config().clone());
    let queries = load_queries(cfg.queries.as_ref().expect("checked"), &tokenizer).stage("queries")?;
    let qrels = Qrels::load(cfg.qrels.as_ref().expect("checked")).stage("qrels")?;
    let lexicon = cfg
        .lexicon
        .as_ref()
        .map(|p| SenseLexicon::load(p))
        .transpose()
        .stage("lexicon")?;
    Ok(Inputs {
        index,
        queries,
        qrels,
        lexicon,
    })
}

/// Per-query predictor values with AP as the target, plus what was
/// dropped on the way.
#[derive(Debug, Clone)]
pub struct PredictorTable {
    pub table: ScoreTable,
    pub runs: Vec<RankedList>,
    /// (query_id, reason) in query-file order.
    pub exclusions: Vec<(String, String)>,
    /// (scope, message).
    pub warnings: Vec<(String, String)>,
    /// RM1 probability mass of every query with post-retrieval scores.
    pub rm_mass: Vec<(String, f64)>,
}

struct QueryOutcome {
    ranked: RankedList,
    ap: Option<f64>,
    exclusion: Option<String>,
    values: BTreeMap<&'static str, Option<f64>>,
    warnings: Vec<String>,
    rm_mass: Option<f64>,
}

fn score_query(cfg: &ExperimentConfig, inputs: &Inputs, query: &Query, need_post: bool) -> Result<QueryOutcome> {
    let retrieval = retrieve(&inputs.index, query, cfg.depth, cfg.mu)?;
    let mut out = QueryOutcome {
        ranked: retrieval.ranked,
        ap: None,
        exclusion: None,
        values: BTreeMap::new(),
        warnings: Vec::new(),
        rm_mass: None,
    };
    if !retrieval.dropped_terms.is_empty() {
        out.warnings
            .push(format!("terms not in the index: {}", retrieval.dropped_terms.join(",")));
    }
    if retrieval.degenerate {
        out.exclusion = Some("degenerate query: no query term occurs in the collection".into());
        return Ok(out);
    }
    match average_precision(&out.ranked, &inputs.qrels, cfg.ap_cutoff) {
        Ok(ap) => out.ap = Some(ap),
        Err(crate::Error::Undefined(_)) => {
            out.exclusion = Some("undefined AP: no relevant documents judged".into());
            return Ok(out);
        }
        Err(e) => return Err(e),
    }
    let pre = PreScores::compute(&inputs.index, query, inputs.lexicon.as_ref(), cfg.semantics);
    out.warnings.extend(pre.warnings.iter().cloned());
    out.values.extend(pre.named().map(|(n, v)| (n, Some(v))));
    if need_post {
        let post = PostScores::compute(&inputs.index, query, &out.ranked, &cfg.post)?;
        out.warnings.extend(post.warnings.iter().cloned());
        out.values.extend(post.named());
        out.rm_mass = Some(post.rm_mass);
    }
    Ok(out)
}

pub fn compute_predictor_table(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<PredictorTable> {
    let need_post = cfg.predictors.iter().any(|p| POST_PREDICTORS.contains(&p.as_str()));
    let outcomes: Vec<QueryOutcome> = inputs
        .queries
        .par_iter()
        .map(|q| score_query(cfg, inputs, q, need_post))
        .collect::<Result<_>>()
        .stage("predictors")?;

    let mut exclusions = Vec::new();
    let mut warnings = Vec::new();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut target = Vec::new();
    let mut rm_mass = Vec::new();
    let mut runs = Vec::new();
    for (q, o) in inputs.queries.iter().zip(outcomes) {
        for w in &o.warnings {
            warnings.push((format!("query:{}", q.query_id), w.clone()));
        }
        runs.push(o.ranked);
        if let Some(reason) = o.exclusion {
            exclusions.push((q.query_id.clone(), reason));
            continue;
        }
        if let Some(m) = o.rm_mass {
            rm_mass.push((q.query_id.clone(), m));
        }
        ids.push(q.query_id.clone());
        rows.push(
            cfg.predictors
                .iter()
                .map(|p| o.values.get(p.as_str()).copied().flatten())
                .collect(),
        );
        target.push(o.ap.expect("AP defined for kept queries"));
    }
    let (mut table, dropped) =
        ScoreTable::from_rows(ids, cfg.predictors.clone(), rows, Some(target)).stage("predictors")?;
    exclusions.extend(dropped);

    for (name, path) in &cfg.external {
        let col = import_external_scores(path, table.query_ids()).stage("external")?;
        for id in &col.unmatched {
            warnings.push((format!("external:{name}"), format!("query `{id}` is not in the experiment")));
        }
        table.add_column(name, col.values).stage("external")?;
    }
    Ok(PredictorTable {
        table,
        runs,
        exclusions,
        warnings,
        rm_mass,
    })
}

pub fn make_plan(cfg: &ExperimentConfig, query_ids: &[String]) -> Result<SplitPlan> {
    let plan = match cfg.split.protocol {
        Protocol::Halves => split_random_halves(query_ids, cfg.split.repeats, cfg.seed)?,
        Protocol::LeaveOneOut => split_leave_one_out(query_ids)?,
        Protocol::Fixed => match &cfg.split.train_ids {
            Some(p) => split_fixed(query_ids, &parse_train_ids(&read_to_string(p)?))?,
            None => split_fixed_fraction(query_ids, cfg.split.train_fraction, cfg.seed)?,
        },
    };
    plan.check_partitions(query_ids)?;
    Ok(plan)
}

/// Held-out predictions of every method (single predictors first, then
/// combiners) for one split.
struct SplitPredictions {
    test_rows: Vec<usize>,
    methods: Vec<(String, Vec<f64>)>,
    warnings: Vec<String>,
}

fn predict_split(
    cfg: &ExperimentConfig,
    table: &ScoreTable,
    features: &[String],
    plan: &SplitPlan,
    split: usize,
) -> Result<SplitPredictions> {
    let pair = &plan.pairs[split];
    let train_rows = table.rows_of(&pair.train)?;
    let test_rows = table.rows_of(&pair.test)?;
    let ap = table.target()?;
    let mut methods = Vec::new();
    let mut warnings = Vec::new();
    for (j, name) in table.names().iter().enumerate() {
        let fit = rmse_single(table.column(j), ap, &train_rows, &test_rows)?;
        methods.push((name.clone(), fit.predictions));
    }
    if !cfg.combiners.is_empty() {
        let train = table.select_rows(&train_rows).select_columns(features)?;
        let test = table.select_rows(&test_rows).select_columns(features)?;
        let (train_n, _, norm) = minmax_fit_apply(&train, &test)?;
        let fit_seed = derive_seed(cfg.seed, &[plan.protocol.name().into(), split.into(), "fit".into()]);
        for &c in &cfg.combiners {
            let mut model = fit_combiner(c, &train_n, &cfg.fusion, fit_seed)?;
            warnings.extend(model.warnings.iter().map(|w| format!("{}: {w}", c.name())));
            model.normalization = Some(norm.clone());
            methods.push((c.name().to_string(), predict(&model, &test, cfg.fusion.clamp)?));
        }
    }
    Ok(SplitPredictions {
        test_rows,
        methods,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// One report per evaluation unit: each split, or a single pooled unit
    /// for leave-one-out.
    pub units: Vec<EvalReport>,
    pub aggregate: EvalReport,
    /// Single predictor with the lowest mean RMSE; p-values test each
    /// other method against it.
    pub reference: Option<String>,
    pub warnings: Vec<(String, String)>,
}

fn query_errors(pred: &[f64], ap: &[f64], kind: ErrorKind) -> Vec<f64> {
    pred.iter()
        .zip(ap)
        .map(|(p, a)| match kind {
            ErrorKind::Squared => (p - a).powi(2),
            ErrorKind::Absolute => (p - a).abs(),
        })
        .collect()
}

pub fn evaluate_plan(cfg: &ExperimentConfig, table: &ScoreTable, plan: &SplitPlan) -> Result<Evaluation> {
    let features: Vec<String> = if cfg.features.is_empty() {
        table.names().to_vec()
    } else {
        cfg.features.clone()
    };
    let per_split: Vec<SplitPredictions> = (0..plan.len())
        .into_par_iter()
        .map(|s| predict_split(cfg, table, &features, plan, s))
        .collect::<Result<_>>()
        .stage("fusion")?;

    let mut warnings = Vec::new();
    for (s, p) in per_split.iter().enumerate() {
        for w in &p.warnings {
            warnings.push((format!("split:{s}"), w.clone()));
        }
    }
    let units: Vec<SplitPredictions> = if plan.protocol == Protocol::LeaveOneOut {
        let mut pooled = SplitPredictions {
            test_rows: Vec::new(),
            methods: per_split[0].methods.iter().map(|(n, _)| (n.clone(), Vec::new())).collect(),
            warnings: Vec::new(),
        };
        for p in per_split {
            pooled.test_rows.extend(p.test_rows);
            for (dst, (_, v)) in pooled.methods.iter_mut().zip(p.methods) {
                dst.1.extend(v);
            }
        }
        vec![pooled]
    } else {
        per_split
    };

    let ap = table.target()?;
    let mut reports = Vec::with_capacity(units.len());
    let mut errors: Vec<Vec<Vec<f64>>> = Vec::with_capacity(units.len());
    for u in &units {
        let truth: Vec<f64> = u.test_rows.iter().map(|&r| ap[r]).collect();
        let rows = u
            .methods
            .iter()
            .map(|(name, pred)| evaluate_predictions(name, pred, &truth))
            .collect::<Result<Vec<_>>>()
            .stage("evaluation")?;
        errors.push(
            u.methods
                .iter()
                .map(|(_, pred)| query_errors(pred, &truth, cfg.significance_errors))
                .collect(),
        );
        reports.push(EvalReport { rows });
    }

    let n_single = table.num_columns();
    let mean_rmse = |m: usize| {
        let v: Vec<f64> = reports.iter().filter_map(|r| r.rows[m].rmse).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let mut reference = None;
    for m in 0..n_single {
        if reference.is_none_or(|best| mean_rmse(m) < mean_rmse(best)) {
            reference = Some(m);
        }
    }
    if let Some(best) = reference {
        for (report, errs) in reports.iter_mut().zip(&errors) {
            for (m, row) in report.rows.iter_mut().enumerate() {
                if m != best {
                    row.p_value = paired_t_one_sided(&errs[m], &errs[best]).ok();
                }
            }
        }
    }
    let names: Vec<String> = reports[0].rows.iter().map(|r| r.name.clone()).collect();
    let aggregate = EvalReport {
        rows: names
            .iter()
            .enumerate()
            .map(|(m, name)| EvalRow::mean_of(name, reports.iter().map(|r| &r.rows[m])))
            .collect(),
    };
    Ok(Evaluation {
        units: reports,
        aggregate,
        reference: reference.map(|m| names[m].clone()),
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub predictors: PredictorTable,
    pub plan: SplitPlan,
    pub evaluation: Evaluation,
    pub corr_pearson: Option<CorrMatrix>,
    pub corr_kendall: Option<CorrMatrix>,
    pub hypothesis: HypothesisReport,
    pub config_text: String,
}

fn family_matrix(table: &ScoreTable, metric: CorrMetric) -> Result<CorrMatrix> {
    if table.num_columns() < 2 {
        return Ok(CorrMatrix {
            metric,
            names: table.names().to_vec(),
            cells: vec![vec![Some(1.0); table.num_columns()]; table.num_columns()],
            missing: Vec::new(),
        });
    }
    predictor_correlation_matrix(table, metric)
}

/// Runs the whole pipeline in memory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let inputs = load_inputs(cfg)?;
    let predictors = compute_predictor_table(cfg, &inputs)?;
    let table = &predictors.table;
    log::info!(
        "{} queries kept, {} excluded, {} predictor columns",
        table.num_rows(),
        predictors.exclusions.len(),
        table.num_columns()
    );
    let plan = make_plan(cfg, table.query_ids()).stage("split")?;
    let evaluation = evaluate_plan(cfg, table, &plan)?;

    let matrix = |metric| {
        (table.num_columns() >= 2)
            .then(|| predictor_correlation_matrix(table, metric))
            .transpose()
            .stage("correlation")
    };
    let corr_pearson = matrix(CorrMetric::Pearson)?;
    let corr_kendall = matrix(CorrMetric::Kendall)?;

    let features: Vec<String> = if cfg.features.is_empty() {
        table.names().to_vec()
    } else {
        cfg.features.clone()
    };
    let family = family_matrix(&table.select_columns(&features)?, cfg.hypothesis_metric).stage("hypothesis")?;
    let singles: Vec<EvalRow> = evaluation
        .aggregate
        .rows
        .iter()
        .filter(|r| features.contains(&r.name))
        .cloned()
        .collect();
    let combined: Vec<EvalRow> = evaluation.aggregate.rows[table.num_columns()..].to_vec();
    let hypothesis = hypothesis_report(&family, &singles, &combined, &cfg.hypothesis);

    Ok(ExperimentOutcome {
        predictors,
        plan,
        evaluation,
        corr_pearson,
        corr_kendall,
        hypothesis,
        config_text: cfg.describe(),
    })
}

impl ExperimentOutcome {
    /// File name and contents of every artifact, in write order.
    pub fn artifacts(&self, run_tag: &str) -> Vec<(&'static str, String)> {
        let p = &self.predictors;
        let mut exclusions = String::from("query_id\treason\n");
        for (q, r) in &p.exclusions {
            let _ = writeln!(exclusions, "{q}\t{r}");
        }
        let mut warnings = String::from("scope\tmessage\n");
        for (s, m) in p.warnings.iter().chain(&self.evaluation.warnings) {
            let _ = writeln!(warnings, "{s}\t{m}");
        }
        let mut out = vec![
            ("config.txt", self.config_text.clone()),
            ("run.txt", format_run(&p.runs, run_tag)),
            ("scores.tsv", p.table.to_tsv()),
            ("exclusions.tsv", exclusions),
            ("warnings.tsv", warnings),
            ("splits.tsv", self.plan.to_tsv()),
            ("report_splits.tsv", split_rows_tsv(&self.evaluation.units)),
            ("report.tsv", self.evaluation.aggregate.to_tsv()),
        ];
        if let Some(m) = &self.corr_pearson {
            out.push(("corr_pearson.tsv", m.to_tsv()));
        }
        if let Some(m) = &self.corr_kendall {
            out.push(("corr_kendall.tsv", m.to_tsv()));
        }
        out.push(("hypotheses.tsv", self.hypothesis.to_tsv()));
        out
    }

    pub fn write(&self, dir: &Path, run_tag: &str) -> Result<()> {
        for (name, text) in self.artifacts(run_tag) {
            write_file(&dir.join(name), &text)?;
        }
        Ok(())
    }
}

/// Runs the pipeline and writes every artifact to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let outcome = run_pipeline(cfg)?;
    outcome.write(&cfg.output_dir, &cfg.run_tag).stage("output")?;
    Ok(outcome)
}
