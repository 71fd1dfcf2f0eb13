//! Corpus sweeps: every problem under every requested engine, aggregated
//! into a [`MetricsReport`].

mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{evaluate_options, prove, replay_validate, EngineConfig, EngineKind, ProofTrace};
use crate::modules::{ModuleBackend, SymbolicBackend};
use crate::oracle::{oracle_label, premise_prf};
use crate::parser::{load_corpus, Label, ParseOptions, Problem};
use crate::remote::{ConfigError, HttpTransport, RemoteBackend, RemoteConfig, TemplateSet};

pub use report::{
    confusion_matrix, CallStats, ConfusionMatrix, CorpusMeta, EngineMetrics, GoldSource, MetricsReport, ProblemResult,
};

/// Trace files are checked by replay against the whole corpus, which is
/// a stricter and larger denominator than a hand-checked sample.
pub const PROOF_ACCURACY_NOTE: &str = "proof_validity replays every completed trace; proof_accuracy replays every \
     correctly labelled trace. Both are automatic checks over all evaluations, not a hand-checked sample.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Symbolic,
    Remote,
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            BackendChoice::Symbolic => "symbolic",
            BackendChoice::Remote => "remote",
        })
    }
}

impl FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "symbolic" => Ok(BackendChoice::Symbolic),
            "remote" => Ok(BackendChoice::Remote),
            other => Err(format!("unknown backend {other:?} (expected symbolic or remote)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub engines: Vec<EngineKind>,
    pub backend: BackendChoice,
    pub engine: EngineConfig,
    /// Worker threads; 0 lets the pool decide.
    pub parallelism: usize,
    pub report: Option<PathBuf>,
    /// Directory for per-problem trace files, one subdirectory per engine.
    pub traces: Option<PathBuf>,
    /// Recorded in the report for generated corpora.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(corpus: impl Into<PathBuf>, engines: Vec<EngineKind>) -> Self {
        RunConfig {
            corpus: vec![corpus.into()],
            engines,
            backend: BackendChoice::Symbolic,
            engine: EngineConfig::default(),
            parallelism: 0,
            report: None,
            traces: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.engines.is_empty() {
            return Err(HarnessError::NoEngines);
        }
        if self.engine.max_steps == 0 {
            return Err(HarnessError::Config("step budget must be at least 1".into()));
        }
        if self.backend == BackendChoice::Remote {
            RemoteConfig::from_env()?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("at least one engine is required")]
    NoEngines,
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Remote(#[from] ConfigError),
    #[error("cannot read corpus {path}: {message}")]
    Corpus { path: PathBuf, message: String },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

/// Builds a fresh backend for one evaluation.
pub type BackendFactory = dyn Fn() -> Box<dyn ModuleBackend> + Sync;

fn backend_factory(choice: BackendChoice) -> Result<Box<BackendFactory>, HarnessError> {
    Ok(match choice {
        BackendChoice::Symbolic => Box::new(|| Box::new(SymbolicBackend) as Box<dyn ModuleBackend>),
        BackendChoice::Remote => {
            // One transport for the whole sweep so the request cap and
            // attempt counter are shared.
            let transport = HttpTransport::new(RemoteConfig::from_env()?);
            let templates = TemplateSet::from_env().map_err(|e| HarnessError::Config(e.to_string()))?;
            Box::new(move || {
                Box::new(RemoteBackend::new(transport.clone(), templates.clone())) as Box<dyn ModuleBackend>
            })
        }
    })
}

/// Loads the corpus, runs the sweep and writes the report and trace files
/// named in `cfg`.
pub fn run_bench(cfg: &RunConfig) -> Result<MetricsReport, HarnessError> {
    cfg.validate()?;
    let factory = backend_factory(cfg.backend)?;
    let (problems, load_errors) = load_problems(&cfg.corpus)?;
    let mut report = run_bench_with(&problems, cfg, &*factory)?;
    report.corpus.load_errors = load_errors;
    report.corpus.paths = cfg.corpus.clone();
    if let Some(path) = &cfg.report {
        report.write(path)?;
    }
    Ok(report)
}

/// Parsed problems from every corpus file, plus a message per entry that
/// failed to parse.
pub fn load_problems(paths: &[PathBuf]) -> Result<(Vec<Problem>, Vec<String>), HarnessError> {
    let mut problems = Vec::new();
    let mut errors = Vec::new();
    let options = ParseOptions { allow_free_text: true };
    for path in paths {
        let entries = load_corpus(path, options)
            .map_err(|e| HarnessError::Corpus { path: path.clone(), message: e.to_string() })?;
        for (i, entry) in entries.into_iter().enumerate() {
            match entry {
                Ok(p) => problems.push(p),
                Err(e) => errors.push(format!("{} entry {}: {e}", path.display(), i + 1)),
            }
        }
    }
    Ok((problems, errors))
}

/// Runs the sweep over already loaded problems with backends from
/// `factory`. A panic inside one evaluation is recorded as that problem's
/// failure.
pub fn run_bench_with(
    problems: &[Problem],
    cfg: &RunConfig,
    factory: &BackendFactory,
) -> Result<MetricsReport, HarnessError> {
    if cfg.engines.is_empty() {
        return Err(HarnessError::NoEngines);
    }
    let golds: Vec<(Option<Label>, GoldSource)> = problems.iter().map(gold_label).collect();
    let jobs: Vec<(usize, EngineKind)> =
        (0..problems.len()).flat_map(|i| cfg.engines.iter().map(move |k| (i, *k))).collect();
    let run = |&(i, kind): &(usize, EngineKind)| {
        let (gold, source) = golds[i];
        let (result, traces) = evaluate(&problems[i], kind, gold, source, &cfg.engine, factory);
        if let Some(dir) = &cfg.traces {
            if let Err(e) = write_traces(dir, kind, i, &problems[i].meta.id, &traces) {
                let mut result = result;
                result.warnings.push(format!("trace file not written: {e}"));
                return result;
            }
        }
        result
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<ProblemResult> = pool.install(|| jobs.par_iter().map(run).collect());

    let engines = cfg
        .engines
        .iter()
        .map(|k| {
            let mine: Vec<&ProblemResult> = results.iter().filter(|r| r.engine == *k).collect();
            EngineMetrics::aggregate(*k, &mine)
        })
        .collect();
    let mut depth_histogram = BTreeMap::new();
    let mut gold_histogram = BTreeMap::new();
    for (p, (gold, _)) in problems.iter().zip(&golds) {
        let key = p.meta.depth.map_or_else(|| "unknown".to_string(), |d| d.to_string());
        *depth_histogram.entry(key).or_insert(0) += 1;
        let key = gold.map_or_else(|| "absent".to_string(), |l| l.to_string());
        *gold_histogram.entry(key).or_insert(0) += 1;
    }
    Ok(MetricsReport {
        corpus: CorpusMeta {
            paths: Vec::new(),
            size: problems.len(),
            load_errors: Vec::new(),
            depth_histogram,
            gold_histogram,
            seed: cfg.seed,
        },
        backend: cfg.backend.to_string(),
        max_steps: cfg.engine.max_steps,
        engines,
        notes: vec![PROOF_ACCURACY_NOTE.to_string()],
        results,
        generated_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    })
}

/// File label first, then the oracle for problems inside the grammar.
pub fn gold_label(problem: &Problem) -> (Option<Label>, GoldSource) {
    if let Some(l) = problem.gold_label {
        return (Some(l), GoldSource::File);
    }
    if problem.meta.remote_only() {
        return (None, GoldSource::Absent);
    }
    match oracle_label(problem) {
        Some(v) => (Some(v.label), GoldSource::Oracle),
        None => (None, GoldSource::Absent),
    }
}

fn evaluate(
    problem: &Problem,
    kind: EngineKind,
    gold: Option<Label>,
    gold_source: GoldSource,
    config: &EngineConfig,
    factory: &BackendFactory,
) -> (ProblemResult, Vec<ProofTrace>) {
    let mut result = ProblemResult {
        id: problem.meta.id.clone(),
        engine: kind,
        depth: problem.meta.depth,
        gold,
        gold_source,
        predicted: None,
        calls: 0,
        valid: false,
        premise_precision: None,
        premise_recall: None,
        option_correct: None,
        warnings: Vec::new(),
        error: None,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let mut backend = factory();
        if problem.hypothesis().is_some() {
            prove(kind, problem, config, backend.as_mut()).map(|v| (vec![v], None))
        } else {
            evaluate_options(problem, config, kind, backend.as_mut()).map(|o| (o.verdicts, Some(o.chosen)))
        }
    }));
    let (verdicts, chosen) = match outcome {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => {
            result.error = Some(e.to_string());
            return (result, Vec::new());
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            result.error = Some(format!("evaluation panicked: {message}"));
            return (result, Vec::new());
        }
    };
    result.calls = verdicts.iter().map(|v| v.calls).sum();
    result.valid = verdicts.iter().all(|v| replay_validate(&v.trace, problem).is_ok());
    result.warnings = verdicts.iter().flat_map(|v| v.warnings.iter().cloned()).collect();
    match chosen {
        Some(chosen) => result.option_correct = problem.meta.answer.map(|a| chosen == Some(a)),
        None => {
            let verdict = &verdicts[0];
            result.predicted = Some(verdict.label);
            if gold == Some(verdict.label) && verdict.label != Label::Unknown && !problem.meta.remote_only() {
                if let Some(proof) = oracle_label(problem).and_then(|o| o.proof) {
                    let score = premise_prf(&verdict.trace, &proof);
                    let pair = |r: num_rational::Ratio<u64>| (*r.numer(), *r.denom());
                    result.premise_precision = Some(pair(score.precision));
                    result.premise_recall = Some(pair(score.recall));
                }
            }
        }
    }
    let traces = verdicts.into_iter().map(|v| v.trace).collect();
    (result, traces)
}

fn file_stem_for(id: &str) -> String {
    let cleaned: String =
        id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    if cleaned.is_empty() {
        "problem".to_string()
    } else {
        cleaned
    }
}

fn write_traces(dir: &Path, kind: EngineKind, index: usize, id: &str, traces: &[ProofTrace]) -> std::io::Result<()> {
    if traces.is_empty() {
        return Ok(());
    }
    let dir = dir.join(kind.to_string());
    std::fs::create_dir_all(&dir)?;
    // The corpus position keeps repeated ids apart.
    let stem = format!("{index:05}-{}", file_stem_for(id));
    if let [single] = traces {
        return std::fs::write(dir.join(format!("{stem}.json")), single.to_json());
    }
    for (i, t) in traces.iter().enumerate() {
        std::fs::write(dir.join(format!("{stem}.option{}.json", i + 1)), t.to_json())?;
    }
    Ok(())
}
