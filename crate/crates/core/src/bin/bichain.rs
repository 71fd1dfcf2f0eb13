use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bichain::engine::{evaluate_options, prove, replay_validate, EngineConfig, EngineKind, ProofTrace};
use bichain::harness::{run_bench, BackendChoice, RunConfig};
use bichain::modules::{ModuleBackend, SymbolicBackend};
use bichain::oracle::{generate_corpus, generate_instance, oracle_label, InstanceSpec};
use bichain::parser::{load_problem, render_literal, render_rule, Label, ParseOptions, Problem};
use bichain::remote::{Cassette, RemoteBackend, TemplateSet};

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "bichain", version, about = "Bidirectional chaining over restricted-English rule bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one problem. Exit code: 0 Proved, 1 Disproved, 2 Unknown.
    Prove {
        file: PathBuf,
        #[arg(long, default_value = "bi")]
        engine: EngineKind,
        #[arg(long, default_value = "symbolic")]
        backend: BackendChoice,
        #[arg(long, default_value_t = 50)]
        max_steps: usize,
        /// Write the proof trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Answer remote prompts from a recorded cassette instead of HTTP.
        #[arg(long)]
        cassette: Option<PathBuf>,
    },
    /// Print the gold label and the reference proof's premises.
    Oracle { file: PathBuf },
    /// Write a generated corpus, one JSON record per line.
    Gen {
        #[arg(long)]
        count: usize,
        /// Proof depth, or a comma-separated list cycled through.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        depth: Vec<u32>,
        /// Fixed label; without it labels cycle through all three.
        #[arg(long)]
        label: Option<Label>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a corpus under several engines and write a metrics report.
    Bench {
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "bi,forward,backward")]
        engines: Vec<EngineKind>,
        #[arg(long, default_value = "symbolic")]
        backend: BackendChoice,
        #[arg(long)]
        report: PathBuf,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        #[arg(long, default_value_t = 50)]
        max_steps: usize,
        /// Per-problem trace directory; defaults to `traces/` beside the report.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Seed the corpus was generated with, recorded in the report.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay a trace against its problem. Exit code 0 iff valid.
    Validate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        problem: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn label_code(label: Label) -> u8 {
    match label {
        Label::Proved => 0,
        Label::Disproved => 1,
        Label::Unknown => 2,
    }
}

fn read_problem(path: &Path) -> Result<Problem, String> {
    load_problem(path, ParseOptions { allow_free_text: true }).map_err(|e| format!("{}: {e}", path.display()))
}

fn make_backend(choice: BackendChoice, cassette: Option<&Path>) -> Result<Box<dyn ModuleBackend>, String> {
    match (choice, cassette) {
        (BackendChoice::Symbolic, None) => Ok(Box::new(SymbolicBackend)),
        (BackendChoice::Symbolic, Some(_)) => Err("--cassette needs --backend remote".into()),
        (BackendChoice::Remote, Some(path)) => {
            let cassette = Cassette::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let templates = TemplateSet::from_env().map_err(|e| e.to_string())?;
            Ok(Box::new(RemoteBackend::new(cassette.responder(), templates)))
        }
        (BackendChoice::Remote, None) => Ok(Box::new(RemoteBackend::from_env().map_err(|e| e.to_string())?)),
    }
}

fn write_trace(path: &Path, trace: &ProofTrace) -> Result<(), String> {
    std::fs::write(path, trace.to_json()).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Prove { file, engine, backend, max_steps, trace, cassette } => {
            let problem = read_problem(&file)?;
            let config = EngineConfig { max_steps, ..EngineConfig::default() };
            let mut backend = make_backend(backend, cassette.as_deref())?;
            if problem.hypothesis().is_none() {
                let outcome =
                    evaluate_options(&problem, &config, engine, backend.as_mut()).map_err(|e| e.to_string())?;
                for (i, v) in outcome.verdicts.iter().enumerate() {
                    println!("option {}: {} ({} calls)", i + 1, v.label, v.calls);
                }
                let calls: usize = outcome.verdicts.iter().map(|v| v.calls).sum();
                match outcome.chosen {
                    Some(k) => println!("chosen: option {k}"),
                    None => println!("chosen: none"),
                }
                println!("calls: {calls}");
                if let Some(path) = trace {
                    let traces: Vec<&ProofTrace> = outcome.verdicts.iter().map(|v| &v.trace).collect();
                    let text = serde_json::to_string_pretty(&traces).map_err(|e| e.to_string())?;
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                }
                return Ok(if outcome.chosen.is_some() { 0 } else { 2 });
            }
            let verdict = prove(engine, &problem, &config, backend.as_mut()).map_err(|e| e.to_string())?;
            for w in &verdict.warnings {
                eprintln!("warning: {w}");
            }
            println!("label: {}", verdict.label);
            println!("calls: {}", verdict.calls);
            if let Some(path) = trace {
                write_trace(&path, &verdict.trace)?;
            }
            Ok(label_code(verdict.label))
        }
        Command::Oracle { file } => {
            let problem = read_problem(&file)?;
            if problem.meta.remote_only() {
                return Err("problem has premises outside the grammar; the oracle cannot label it".into());
            }
            let verdict = oracle_label(&problem).ok_or("the oracle labels single-hypothesis problems only")?;
            println!("label: {}", verdict.label);
            if !verdict.consistent {
                println!("warning: the closure is inconsistent");
            }
            if let Some(proof) = verdict.proof {
                println!("depth: {}", proof.depth);
                println!("premises:");
                for p in proof.premises() {
                    println!("  {p}");
                }
                println!("steps:");
                for step in &proof.steps {
                    let rule = problem.kb.rule(step.rule).map(render_rule).unwrap_or_default();
                    println!("  {} [{}: {rule}]", render_literal(&step.literal), step.rule);
                }
            }
            Ok(0)
        }
        Command::Gen { count, depth, label, seed, out } => {
            let problems = match label {
                None => generate_corpus(count, &depth, seed).map_err(|e| e.to_string())?,
                Some(label) => (0..count)
                    .map(|i| {
                        let d = depth[i % depth.len()];
                        generate_instance(&InstanceSpec::new(label, d, seed.wrapping_add(i as u64)))
                    })
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?,
            };
            let file = File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            let mut w = BufWriter::new(file);
            for p in &problems {
                let line = serde_json::to_string(&p.to_record()).map_err(|e| e.to_string())?;
                writeln!(w, "{line}").map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
            println!("wrote {} problems to {}", problems.len(), out.display());
            Ok(0)
        }
        Command::Bench { corpus, engines, backend, report, parallel, max_steps, traces, seed } => {
            let traces = traces.unwrap_or_else(|| report.with_file_name("traces"));
            let cfg = RunConfig {
                corpus,
                engines,
                backend,
                engine: EngineConfig { max_steps, ..EngineConfig::default() },
                parallelism: parallel,
                report: Some(report.clone()),
                traces: Some(traces),
                seed,
            };
            let metrics = run_bench(&cfg).map_err(|e| e.to_string())?;
            println!(
                "{} problems, {} load errors, backend {}",
                metrics.corpus.size,
                metrics.corpus.load_errors.len(),
                metrics.backend
            );
            println!(
                "{:<10} {:>9} {:>10} {:>9} {:>9} {:>9} {:>9}",
                "engine", "accuracy", "mean calls", "validity", "precision", "recall", "failed"
            );
            let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
            for e in &metrics.engines {
                println!(
                    "{:<10} {:>9} {:>10} {:>9} {:>9} {:>9} {:>9}",
                    e.engine.to_string(),
                    show(e.accuracy),
                    show(e.calls.as_ref().map(|c| c.mean)),
                    show(e.proof_validity),
                    show(e.premise_precision),
                    show(e.premise_recall),
                    e.failed
                );
            }
            println!("report written to {}", report.display());
            Ok(0)
        }
        Command::Validate { trace, problem } => {
            let problem = read_problem(&problem)?;
            let text = std::fs::read_to_string(&trace).map_err(|e| format!("{}: {e}", trace.display()))?;
            let trace = ProofTrace::from_json(&text).map_err(|e| format!("{}: {e}", trace.display()))?;
            match replay_validate(&trace, &problem) {
                Ok(()) => {
                    println!("valid");
                    Ok(0)
                }
                Err(e) => {
                    println!("invalid: {e}");
                    Ok(1)
                }
            }
        }
    }
}
