//! Experiment configuration: a flat `key = value` file with dotted keys.
//! Every key is optional; missing keys take the defaults below. Relative
//! paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::corpus::{DocFormat, TokenizerConfig};
use crate::error::{Error, Result};
use crate::eval::CorrMetric;
use crate::fusion::{Combiner, FusionConfig};
use crate::postret::{ListSimilarity, PostConfig, POST_PREDICTORS};
use crate::preret::{TermSemantics, PRE_PREDICTORS};
use crate::retrieval::{DEFAULT_DEPTH, DEFAULT_MU};
use crate::tsv::read_to_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Halves,
    LeaveOneOut,
    Fixed,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Halves => "halves",
            Protocol::LeaveOneOut => "loo",
            Protocol::Fixed => "fixed",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "halves" => Ok(Protocol::Halves),
            "loo" | "leave-one-out" => Ok(Protocol::LeaveOneOut),
            "fixed" => Ok(Protocol::Fixed),
            other => Err(Error::Config(format!("unknown split protocol `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Squared,
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub protocol: Protocol,
    pub repeats: usize,
    pub train_ids: Option<PathBuf>,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisThresholds {
    /// Mean pairwise ρ at or above this is the correlated (H1) regime.
    pub h1_min_mean: f64,
    /// Mean pairwise ρ below this is the low-correlation (H2) regime.
    pub h2_max_mean: f64,
    /// A pair counts as conflicting when its ρ is below this.
    pub negative_rho: f64,
    /// Fraction of conflicting pairs that makes the H3 regime.
    pub h3_min_fraction: f64,
    /// |delta| at or below this counts as no change.
    pub delta_tolerance: f64,
}

impl Default for HypothesisThresholds {
    fn default() -> Self {
        Self {
            h1_min_mean: 0.5,
            h2_max_mean: 0.3,
            negative_rho: -0.1,
            h3_min_fraction: 0.1,
            delta_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub docs: Option<PathBuf>,
    pub doc_format: DocFormat,
    /// Prebuilt index snapshot, used instead of `docs` when set.
    pub index: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub tokenizer: TokenizerConfig,
    pub mu: f64,
    pub depth: usize,
    pub ap_cutoff: usize,
    pub predictors: Vec<String>,
    pub semantics: TermSemantics,
    pub post: PostConfig,
    /// Extra predictor columns read from `query_id<TAB>score` files.
    pub external: BTreeMap<String, PathBuf>,
    pub combiners: Vec<Combiner>,
    /// Columns fed to the combiners; empty means every predictor column.
    pub features: Vec<String>,
    pub fusion: FusionConfig,
    pub split: SplitConfig,
    pub significance_errors: ErrorKind,
    pub hypothesis: HypothesisThresholds,
    pub hypothesis_metric: CorrMetric,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub run_tag: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            docs: None,
            doc_format: DocFormat::Jsonl,
            index: None,
            queries: None,
            qrels: None,
            lexicon: None,
            stopwords: None,
            tokenizer: TokenizerConfig::default(),
            mu: DEFAULT_MU,
            depth: DEFAULT_DEPTH,
            ap_cutoff: DEFAULT_DEPTH,
            predictors: all_predictors(),
            semantics: TermSemantics::Set,
            post: PostConfig::default(),
            external: BTreeMap::new(),
            combiners: Combiner::ALL.to_vec(),
            features: Vec::new(),
            fusion: FusionConfig::default(),
            split: SplitConfig {
                protocol: Protocol::Halves,
                repeats: 30,
                train_ids: None,
                train_fraction: 0.5,
            },
            significance_errors: ErrorKind::Squared,
            hypothesis: HypothesisThresholds::default(),
            hypothesis_metric: CorrMetric::Pearson,
            seed: 42,
            output_dir: PathBuf::from("out"),
            run_tag: "qpp".into(),
        }
    }
}

pub fn all_predictors() -> Vec<String> {
    PRE_PREDICTORS
        .iter()
        .chain(POST_PREDICTORS.iter())
        .map(|s| s.to_string())
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` expects a boolean, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn expand_predictors(v: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in list(v) {
        let group: Vec<String> = match item.to_ascii_lowercase().as_str() {
            "all" => all_predictors(),
            "pre" => PRE_PREDICTORS.iter().map(|s| s.to_string()).collect(),
            "post" => POST_PREDICTORS.iter().map(|s| s.to_string()).collect(),
            _ => {
                let known = all_predictors();
                let name = known
                    .iter()
                    .find(|k| k.eq_ignore_ascii_case(&item))
                    .ok_or_else(|| Error::Config(format!("unknown predictor `{item}`")))?;
                vec![name.clone()]
            }
        };
        for name in group {
            if out.contains(&name) {
                return Err(Error::Config(format!("predictor `{name}` listed twice")));
            }
            out.push(name);
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path, source: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeMap::new();
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, lineno, "expected `key = value`"))?;
            let (key, v) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(Error::parse(source, lineno, format!("key `{key}` set twice")));
            }
            let wrap = |e: Error| match e {
                Error::Config(m) => Error::parse(source, lineno, m),
                other => Error::parse(source, lineno, other.to_string()),
            };
            cfg.set(key, v, &path).map_err(wrap)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    fn set(&mut self, key: &str, v: &str, path: &dyn Fn(&str) -> PathBuf) -> Result<()> {
        if let Some(name) = key.strip_prefix("external.") {
            if name.is_empty() {
                return Err(Error::Config("external column needs a name".into()));
            }
            self.external.insert(name.to_string(), path(v));
            return Ok(());
        }
        match key {
            "corpus.docs" => self.docs = Some(path(v)),
            "corpus.format" => self.doc_format = v.parse()?,
            "corpus.index" => self.index = Some(path(v)),
            "corpus.queries" => self.queries = Some(path(v)),
            "corpus.qrels" => self.qrels = Some(path(v)),
            "corpus.lexicon" => self.lexicon = Some(path(v)),
            "tokenizer.lowercase" => self.tokenizer.lowercase = parse_bool(key, v)?,
            "tokenizer.split_non_alnum" => self.tokenizer.split_non_alnum = parse_bool(key, v)?,
            "tokenizer.stem" => self.tokenizer.stem = parse_bool(key, v)?,
            "tokenizer.stopwords" => self.stopwords = Some(path(v)),
            "retrieval.mu" => {
                // Relevance-model smoothing uses the retrieval mu.
                self.mu = parse_num(key, v)?;
                self.post.mu = self.mu;
            }
            "retrieval.k" => self.depth = parse_num(key, v)?,
            "retrieval.run_tag" => self.run_tag = v.to_string(),
            "eval.ap_cutoff" => self.ap_cutoff = parse_num(key, v)?,
            "eval.significance_errors" => {
                self.significance_errors = match v {
                    "squared" => ErrorKind::Squared,
                    "absolute" => ErrorKind::Absolute,
                    _ => return Err(Error::Config(format!("unknown error kind `{v}`"))),
                }
            }
            "predictors.set" => self.predictors = expand_predictors(v)?,
            "predictors.term_semantics" => {
                self.semantics = match v {
                    "set" => TermSemantics::Set,
                    "multiset" => TermSemantics::Multiset,
                    _ => return Err(Error::Config(format!("unknown term semantics `{v}`"))),
                }
            }
            "postret.k_fb" => self.post.k_fb = parse_num(key, v)?,
            "postret.wig_k" => self.post.wig_k = parse_num(key, v)?,
            "postret.nqc_k" => self.post.nqc_k = parse_num(key, v)?,
            "postret.uef_m" => self.post.uef_m = parse_num(key, v)?,
            "postret.similarity" => {
                self.post.similarity = match v {
                    "pearson" => ListSimilarity::Pearson,
                    "kendall" => ListSimilarity::Kendall,
                    _ => return Err(Error::Config(format!("unknown list similarity `{v}`"))),
                }
            }
            "fusion.combiners" => {
                self.combiners = list(v).iter().map(|c| c.parse()).collect::<Result<_>>()?;
            }
            "fusion.features" => self.features = list(v),
            "fusion.k_folds" => self.fusion.k_folds = parse_num(key, v)?,
            "fusion.grid_size" => self.fusion.grid_size = parse_num(key, v)?,
            "fusion.min_ratio" => self.fusion.min_ratio = parse_num(key, v)?,
            "fusion.enet_alpha" => self.fusion.enet_alpha = parse_num(key, v)?,
            "fusion.bolasso_bootstraps" => self.fusion.bolasso_bootstraps = parse_num(key, v)?,
            "fusion.bolasso_threshold" => self.fusion.bolasso_threshold = parse_num(key, v)?,
            "fusion.n_traps" => {
                self.fusion.n_traps = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "fusion.clamp" => self.fusion.clamp = parse_bool(key, v)?,
            "split.protocol" => self.split.protocol = v.parse()?,
            "split.repeats" => self.split.repeats = parse_num(key, v)?,
            "split.train_ids" => self.split.train_ids = Some(path(v)),
            "split.train_fraction" => self.split.train_fraction = parse_num(key, v)?,
            "hypothesis.metric" => self.hypothesis_metric = v.parse()?,
            "hypothesis.h1_min_mean" => self.hypothesis.h1_min_mean = parse_num(key, v)?,
            "hypothesis.h2_max_mean" => self.hypothesis.h2_max_mean = parse_num(key, v)?,
            "hypothesis.negative_rho" => self.hypothesis.negative_rho = parse_num(key, v)?,
            "hypothesis.h3_min_fraction" => self.hypothesis.h3_min_fraction = parse_num(key, v)?,
            "hypothesis.delta_tolerance" => self.hypothesis.delta_tolerance = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "output.dir" => self.output_dir = path(v),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config("retrieval.mu must be non-negative".into()));
        }
        if self.post.mu != self.mu {
            return Err(Error::Config("post-retrieval mu differs from retrieval.mu".into()));
        }
        if self.depth == 0 || self.ap_cutoff == 0 {
            return Err(Error::Config("retrieval.k and eval.ap_cutoff must be positive".into()));
        }
        if self.split.repeats == 0 {
            return Err(Error::Config("split.repeats must be positive".into()));
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::Config("split.train_fraction must lie in (0, 1)".into()));
        }
        for name in self.external.keys() {
            if self.predictors.contains(name) {
                return Err(Error::Config(format!("external column `{name}` clashes with a predictor")));
            }
        }
        for f in &self.features {
            if !self.predictors.contains(f) && !self.external.contains_key(f) {
                return Err(Error::Config(format!("fusion feature `{f}` is not a configured column")));
            }
        }
        Ok(())
    }

    /// Checks that every referenced input file exists.
    pub fn check_files(&self) -> Result<()> {
        let mut files: Vec<(&str, &PathBuf)> = Vec::new();
        match (&self.index, &self.docs) {
            (Some(p), _) => files.push(("corpus.index", p)),
            (None, Some(p)) => files.push(("corpus.docs", p)),
            (None, None) => return Err(Error::Config("set corpus.docs or corpus.index".into())),
        }
        let queries = self.queries.as_ref().ok_or_else(|| Error::Config("corpus.queries is required".into()))?;
        let qrels = self.qrels.as_ref().ok_or_else(|| Error::Config("corpus.qrels is required".into()))?;
        files.push(("corpus.queries", queries));
        files.push(("corpus.qrels", qrels));
        for (key, p) in [("corpus.lexicon", &self.lexicon), ("tokenizer.stopwords", &self.stopwords), ("split.train_ids", &self.split.train_ids)] {
            if let Some(p) = p {
                files.push((key, p));
            }
        }
        for p in self.external.values() {
            files.push(("external", p));
        }
        for (key, p) in files {
            if !p.is_file() {
                return Err(Error::Config(format!("{key}: file `{}` does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// The settings that shape results, one `key = value` per line. Paths
    /// are omitted so the text does not depend on where inputs live.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("corpus.format", self.doc_format.to_string());
        kv("tokenizer.lowercase", self.tokenizer.lowercase.to_string());
        kv("tokenizer.split_non_alnum", self.tokenizer.split_non_alnum.to_string());
        kv("tokenizer.stem", self.tokenizer.stem.to_string());
        kv("tokenizer.stopword_count", self.tokenizer.stopwords.len().to_string());
        kv("retrieval.mu", self.mu.to_string());
        kv("retrieval.k", self.depth.to_string());
        kv("eval.ap_cutoff", self.ap_cutoff.to_string());
        kv("predictors.set", self.predictors.join(","));
        kv("external", self.external.keys().cloned().collect::<Vec<_>>().join(","));
        kv("postret.k_fb", self.post.k_fb.to_string());
        kv("postret.wig_k", self.post.wig_k.to_string());
        kv("postret.nqc_k", self.post.nqc_k.to_string());
        kv("postret.uef_m", self.post.uef_m.to_string());
        kv(
            "fusion.combiners",
            self.combiners.iter().map(|c| c.key()).collect::<Vec<_>>().join(","),
        );
        kv("fusion.features", self.features.join(","));
        kv("fusion.k_folds", self.fusion.k_folds.to_string());
        kv("fusion.grid_size", self.fusion.grid_size.to_string());
        kv("fusion.min_ratio", self.fusion.min_ratio.to_string());
        kv("fusion.enet_alpha", self.fusion.enet_alpha.to_string());
        kv("fusion.bolasso_bootstraps", self.fusion.bolasso_bootstraps.to_string());
        kv("fusion.bolasso_threshold", self.fusion.bolasso_threshold.to_string());
        kv("fusion.n_traps", self.fusion.n_traps.map_or("auto".into(), |n| n.to_string()));
        kv("fusion.clamp", self.fusion.clamp.to_string());
        kv("split.protocol", self.split.protocol.name().into());
        kv("split.repeats", self.split.repeats.to_string());
        kv("split.train_fraction", self.split.train_fraction.to_string());
        kv("seed", self.seed.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::parse(
            "# toy\nretrieval.mu = 500\nsplit.protocol = loo\nfusion.combiners = ols, lasso-cv\nexternal.bert = b.tsv\n",
            Path::new("/data"),
            "t",
        )
        .unwrap();
        assert_eq!(cfg.mu, 500.0);
        assert_eq!(cfg.post.mu, 500.0);
        assert_eq!(cfg.depth, 1000);
        assert_eq!(cfg.split.protocol, Protocol::LeaveOneOut);
        assert_eq!(cfg.combiners, [Combiner::Ols, Combiner::LassoCv]);
        assert_eq!(cfg.external["bert"], PathBuf::from("/data/b.tsv"));
        assert_eq!(cfg.predictors.len(), 16);
        assert_eq!(ExperimentConfig::default().split.repeats, 30);
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        assert!(ExperimentConfig::parse("retrieval.muu = 1", base, "t").is_err());
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2", base, "t").is_err());
        assert!(ExperimentConfig::parse("retrieval.mu", base, "t").is_err());
        assert!(ExperimentConfig::parse("predictors.set = AvgIDF, avgidf", base, "t").is_err());
        assert!(ExperimentConfig::parse("fusion.features = Bogus", base, "t").is_err());
    }

    #[test]
    fn predictor_groups() {
        let cfg = ExperimentConfig::parse("predictors.set = post, AvgIDF", Path::new("."), "t").unwrap();
        assert_eq!(cfg.predictors.len(), 7);
        assert_eq!(cfg.predictors[6], "AvgIDF");
    }
}
