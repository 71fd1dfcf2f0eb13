//! Saturates a problem, prints the oracle's label and minimal reference
//! proof, then scores each engine's premises against it.

use bichain::engine::{prove, EngineConfig, EngineKind};
use bichain::modules::SymbolicBackend;
use bichain::oracle::{oracle_label, premise_prf, premise_set};
use bichain::parser::{parse_problem, render_literal, ParseOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = parse_problem(include_str!("../fixtures/cow_chases_bear.pw"), ParseOptions::default())?;
    let oracle = oracle_label(&problem).ok_or("single hypothesis expected")?;
    println!("oracle label: {}", oracle.label);
    println!("closure: {} facts over {} layers", oracle.closure.kb().len(), oracle.closure.layers().len());
    let proof = oracle.proof.ok_or("decided labels carry a proof")?;
    println!("reference proof, depth {}:", proof.depth);
    for step in &proof.steps {
        println!("  {} by {} from {:?}", render_literal(&step.literal), step.rule, step.premises);
    }
    let premises: Vec<String> = proof.premises().iter().map(ToString::to_string).collect();
    println!("reference premises: {}", premises.join(" "));

    for kind in EngineKind::ALL {
        let verdict = prove(kind, &problem, &EngineConfig::default(), &mut SymbolicBackend)?;
        let used: Vec<String> = premise_set(&verdict.trace).iter().map(ToString::to_string).collect();
        let score = premise_prf(&verdict.trace, &proof);
        println!(
            "{kind:<10} precision {:>5} recall {:>5}  used: {}",
            score.precision.to_string(),
            score.recall.to_string(),
            used.join(" ")
        );
    }
    Ok(())
}
