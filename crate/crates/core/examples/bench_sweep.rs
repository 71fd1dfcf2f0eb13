//! Sweeps a generated depth-5 corpus under all three engines and prints the
//! metrics report; the report and its CSV tables go to a temporary
//! directory.

use bichain::engine::EngineKind;
use bichain::harness::{run_bench_with, RunConfig};
use bichain::modules::{ModuleBackend, SymbolicBackend};
use bichain::oracle::{generate_instance, InstanceSpec};
use bichain::parser::Label;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problems = (0..200u64)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Proved } else { Label::Disproved };
            generate_instance(&InstanceSpec::new(label, 5, 1000 + i))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let out = std::env::temp_dir().join("bichain-bench-sweep");
    let mut cfg = RunConfig::new("generated", EngineKind::ALL.to_vec());
    cfg.traces = Some(out.join("traces"));
    cfg.seed = Some(1000);
    let report = run_bench_with(&problems, &cfg, &|| Box::new(SymbolicBackend) as Box<dyn ModuleBackend>)?;

    println!("{} problems, depth histogram {:?}", report.corpus.size, report.corpus.depth_histogram);
    for e in &report.engines {
        let calls = e.calls.as_ref().ok_or("no completed evaluations")?;
        println!(
            "{:<10} accuracy {:.3}  mean calls {:>6.2} (median {}, max {})  validity {:.3}",
            e.engine.to_string(),
            e.accuracy.unwrap_or(0.0),
            calls.mean,
            calls.median,
            calls.max,
            e.proof_validity.unwrap_or(0.0)
        );
    }
    let mean = |k| report.engine(k).and_then(|e| e.calls.as_ref()).map_or(f64::NAN, |c| c.mean);
    let bi = mean(EngineKind::BiChainer);
    println!("forward / bichainer  = {:.2}", mean(EngineKind::Forward) / bi);
    println!("backward / bichainer = {:.2}", mean(EngineKind::Backward) / bi);

    let bi_matrix = report.engine(EngineKind::BiChainer).ok_or("missing engine")?.confusion;
    println!("bichainer confusion matrix (rows gold, columns predicted):");
    for (gold, row) in Label::ALL.iter().zip(bi_matrix.counts) {
        println!("  {:<10} {row:?}", gold.to_string());
    }
    for path in report.write(&out.join("report.json"))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
