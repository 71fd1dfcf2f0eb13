//! Evaluates a problem that lists several candidate answers. Facts derived
//! while checking one option are reused for the next, so later options
//! tend to need fewer calls.

use bichain::engine::{evaluate_options, EngineConfig, EngineKind};
use bichain::modules::SymbolicBackend;
use bichain::parser::{parse_problem, ParseOptions};

const PROBLEM: &str = "\
id: options-demo
fact: The bear is big.
fact: The bear likes the cat.
fact: The cat is young.
rule: If someone is big then they are strong.
rule: If someone is strong and they like the cat then they are kind.
rule: If someone is kind then the cat is happy.
rule: If the cat is happy and the cat is young then the cat sees the bear.
option: The cat is cold.
option: The bear is not kind.
option: The cat sees the bear.
answer: 3
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = parse_problem(PROBLEM, ParseOptions::default())?;
    for kind in EngineKind::ALL {
        let outcome = evaluate_options(&problem, &EngineConfig::default(), kind, &mut SymbolicBackend)?;
        let per_option: Vec<String> = outcome
            .verdicts
            .iter()
            .map(|v| format!("{} ({} calls, {} inherited)", v.label, v.calls, v.trace.inherited.len()))
            .collect();
        println!("{kind:<10} chosen {:?}: {}", outcome.chosen, per_option.join(", "));
    }
    Ok(())
}
