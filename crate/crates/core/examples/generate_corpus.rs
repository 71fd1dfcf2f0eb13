//! Generates labelled instances with a known minimal proof depth and checks
//! them against the oracle. The same seed always gives the same corpus.
//!
//! cargo run --example generate_corpus [-- out.jsonl]

use bichain::oracle::{generate_corpus, generate_instance, oracle_label, InstanceSpec};
use bichain::parser::{render_literal, render_rule, Label};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = InstanceSpec::new(Label::Disproved, 3, 42);
    let problem = generate_instance(&spec)?;
    println!("instance {}:", problem.meta.id);
    for fact in problem.kb.facts() {
        println!("  fact: {}", render_literal(&fact.literal));
    }
    for rule in problem.kb.rules() {
        println!("  rule: {}", render_rule(rule));
    }
    println!("  hypothesis: {}", problem.hypothesis().map(|h| h.render()).unwrap_or_default());

    let corpus = generate_corpus(60, &[0, 1, 2, 3, 4, 5], 7)?;
    let again = generate_corpus(60, &[0, 1, 2, 3, 4, 5], 7)?;
    let same = corpus.iter().zip(&again).all(|(a, b)| a.to_record() == b.to_record());
    let agree = corpus.iter().filter(|p| oracle_label(p).map(|o| o.label) == p.gold_label).count();
    println!("\n{} instances, oracle agrees on {agree}, reproducible: {same}", corpus.len());

    if let Some(path) = std::env::args().nth(1) {
        let lines: Vec<String> =
            corpus.iter().map(|p| serde_json::to_string(&p.to_record())).collect::<Result<_, _>>()?;
        std::fs::write(&path, lines.join("\n") + "\n")?;
        println!("written to {path}");
    }
    Ok(())
}
