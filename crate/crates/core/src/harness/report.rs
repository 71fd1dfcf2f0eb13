use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::EngineKind;
use crate::parser::Label;

/// Where a problem's gold label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldSource {
    File,
    Oracle,
    Absent,
}

/// Outcome of one problem under one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub id: String,
    pub engine: EngineKind,
    pub depth: Option<u32>,
    pub gold: Option<Label>,
    pub gold_source: GoldSource,
    /// `None` when the evaluation failed or the problem lists options.
    pub predicted: Option<Label>,
    pub calls: usize,
    /// Every trace of the evaluation replayed cleanly.
    pub valid: bool,
    /// Exact precision and recall against the oracle's reference proof,
    /// as (numerator, denominator) pairs.
    pub premise_precision: Option<(u64, u64)>,
    pub premise_recall: Option<(u64, u64)>,
    /// For option lists: whether the chosen option was the expected one.
    pub option_correct: Option<bool>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl ProblemResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Gold (rows) by predicted (columns), both in Proved, Disproved, Unknown
/// order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
    /// Results left out for lack of a gold or predicted label.
    pub skipped: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, gold: Label) -> usize {
        self.counts[gold.index()].iter().sum()
    }

    pub fn get(&self, gold: Label, predicted: Label) -> usize {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }
}

pub fn confusion_matrix(results: impl IntoIterator<Item = (Option<Label>, Option<Label>)>) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for pair in results {
        match pair {
            (Some(gold), Some(predicted)) => m.counts[gold.index()][predicted.index()] += 1,
            _ => m.skipped += 1,
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallStats {
    pub mean: f64,
    pub min: usize,
    pub median: f64,
    pub max: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl CallStats {
    pub fn from_counts(counts: &[usize]) -> Option<Self> {
        if counts.is_empty() {
            return None;
        }
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0 };
        let mut histogram = BTreeMap::new();
        for c in &sorted {
            *histogram.entry(*c).or_insert(0) += 1;
        }
        Some(CallStats {
            mean: sorted.iter().sum::<usize>() as f64 / n as f64,
            min: sorted[0],
            median,
            max: sorted[n - 1],
            histogram,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineMetrics {
    pub engine: EngineKind,
    pub evaluated: usize,
    pub failed: usize,
    pub confusion: ConfusionMatrix,
    /// Trace of the confusion matrix over its total.
    pub accuracy: Option<f64>,
    pub calls: Option<CallStats>,
    /// Fraction of completed evaluations whose traces all replay.
    pub proof_validity: Option<f64>,
    /// Fraction of correctly labelled evaluations whose traces all replay.
    pub proof_accuracy: Option<f64>,
    pub premise_precision: Option<f64>,
    pub premise_recall: Option<f64>,
    /// Evaluations scored for premise precision and recall.
    pub premise_scored: usize,
    pub options_total: usize,
    pub options_correct: usize,
}

impl EngineMetrics {
    /// Aggregates the results of one engine. Sums and counts only, so the
    /// outcome does not depend on evaluation order.
    pub fn aggregate(engine: EngineKind, results: &[&ProblemResult]) -> Self {
        let completed: Vec<&&ProblemResult> = results.iter().filter(|r| !r.failed()).collect();
        let confusion =
            confusion_matrix(results.iter().filter(|r| r.option_correct.is_none()).map(|r| (r.gold, r.predicted)));
        let calls: Vec<usize> = completed.iter().map(|r| r.calls).collect();
        let fraction = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let correct: Vec<&&&ProblemResult> = completed
            .iter()
            .filter(|r| (r.gold.is_some() && r.gold == r.predicted) || r.option_correct == Some(true))
            .collect();
        let scored: Vec<&&ProblemResult> =
            completed.iter().filter(|r| r.premise_precision.is_some()).copied().collect();
        let mean_ratio = |pick: fn(&ProblemResult) -> Option<(u64, u64)>| {
            let values: Vec<f64> = scored.iter().filter_map(|r| pick(r)).map(|(n, d)| n as f64 / d as f64).collect();
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        };
        let options: Vec<bool> = completed.iter().filter_map(|r| r.option_correct).collect();
        EngineMetrics {
            engine,
            evaluated: results.len(),
            failed: results.len() - completed.len(),
            accuracy: confusion.accuracy(),
            confusion,
            calls: CallStats::from_counts(&calls),
            proof_validity: fraction(completed.iter().filter(|r| r.valid).count(), completed.len()),
            proof_accuracy: fraction(correct.iter().filter(|r| r.valid).count(), correct.len()),
            premise_precision: mean_ratio(|r| r.premise_precision),
            premise_recall: mean_ratio(|r| r.premise_recall),
            premise_scored: scored.len(),
            options_total: options.len(),
            options_correct: options.iter().filter(|c| **c).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub paths: Vec<PathBuf>,
    pub size: usize,
    /// Entries that failed to parse; they are not evaluated.
    pub load_errors: Vec<String>,
    /// Keyed by minimal proof depth, or "unknown" when not recorded.
    pub depth_histogram: BTreeMap<String, usize>,
    pub gold_histogram: BTreeMap<String, usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub corpus: CorpusMeta,
    pub backend: String,
    pub max_steps: usize,
    pub engines: Vec<EngineMetrics>,
    pub notes: Vec<String>,
    pub results: Vec<ProblemResult>,
    /// Seconds since the Unix epoch. The only field that varies between
    /// identical runs.
    pub generated_at: u64,
}

impl MetricsReport {
    pub fn engine(&self, kind: EngineKind) -> Option<&EngineMetrics> {
        self.engines.iter().find(|e| e.engine == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Report document at `path`, plus flat tables beside it:
    /// `<stem>.engines.csv`, `<stem>.confusion.csv`, `<stem>.calls.csv`
    /// and `<stem>.problems.csv`.
    pub fn write(&self, path: &Path) -> io::Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json())?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
        let table = |name: &str| path.with_file_name(format!("{stem}.{name}.csv"));
        let mut written = vec![path.to_path_buf()];

        let p = table("engines");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record([
            "engine",
            "evaluated",
            "failed",
            "accuracy",
            "mean_calls",
            "proof_validity",
            "proof_accuracy",
            "premise_precision",
            "premise_recall",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for e in &self.engines {
            w.write_record([
                e.engine.to_string(),
                e.evaluated.to_string(),
                e.failed.to_string(),
                opt(e.accuracy),
                opt(e.calls.as_ref().map(|c| c.mean)),
                opt(e.proof_validity),
                opt(e.proof_accuracy),
                opt(e.premise_precision),
                opt(e.premise_recall),
            ])?;
        }
        w.flush()?;
        written.push(p);

        let p = table("confusion");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["engine", "gold", "predicted", "count"])?;
        for e in &self.engines {
            for gold in Label::ALL {
                for predicted in Label::ALL {
                    w.write_record([
                        e.engine.to_string(),
                        gold.to_string(),
                        predicted.to_string(),
                        e.confusion.get(gold, predicted).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        written.push(p);

        let p = table("calls");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["engine", "calls", "problems"])?;
        for e in &self.engines {
            for (calls, n) in e.calls.iter().flat_map(|c| &c.histogram) {
                w.write_record([e.engine.to_string(), calls.to_string(), n.to_string()])?;
            }
        }
        w.flush()?;
        written.push(p);

        let p = table("problems");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["id", "engine", "depth", "gold", "predicted", "calls", "valid", "error"])?;
        let label = |l: Option<Label>| l.map(|l| l.to_string()).unwrap_or_default();
        for r in &self.results {
            w.write_record([
                r.id.clone(),
                r.engine.to_string(),
                r.depth.map(|d| d.to_string()).unwrap_or_default(),
                label(r.gold),
                label(r.predicted),
                r.calls.to_string(),
                r.valid.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        written.push(p);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn all_correct_is_diagonal() {
        let m = confusion_matrix([Proved, Disproved, Unknown, Proved].map(|l| (Some(l), Some(l))));
        assert_eq!(m.counts, [[2, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(m.accuracy(), Some(1.0));
    }

    #[test]
    fn miss_lands_off_diagonal() {
        let m = confusion_matrix([(Some(Proved), Some(Unknown))]);
        assert_eq!(m.get(Proved, Unknown), 1);
        assert_eq!(m.correct(), 0);
    }

    #[test]
    fn missing_gold_is_skipped() {
        let m = confusion_matrix([(None, Some(Proved)), (Some(Unknown), Some(Unknown))]);
        assert_eq!(m.skipped, 1);
        assert_eq!(m.total(), 1);
    }

    #[test]
    fn row_sums_follow_gold_histogram() {
        let pairs = [
            (Proved, Proved),
            (Proved, Unknown),
            (Disproved, Proved),
            (Unknown, Unknown),
            (Unknown, Disproved),
            (Unknown, Unknown),
        ];
        let m = confusion_matrix(pairs.map(|(g, p)| (Some(g), Some(p))));
        for gold in Label::ALL {
            assert_eq!(m.row_sum(gold), pairs.iter().filter(|(g, _)| *g == gold).count());
        }
        assert_eq!(m.accuracy(), Some(3.0 / 6.0));
    }

    #[test]
    fn call_stats() {
        let s = CallStats::from_counts(&[5, 1, 3, 3]).unwrap();
        assert_eq!((s.min, s.max, s.median, s.mean), (1, 5, 3.0, 3.0));
        assert_eq!(s.histogram.get(&3), Some(&2));
        assert!(CallStats::from_counts(&[]).is_none());
    }
}
