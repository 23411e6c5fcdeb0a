//! One bilateral debate with a judge, run offline against a scripted backend.
//!
//!     cargo run --example mock_debate

use madre::classify::prompts::bilateral_judge_config;
use madre::engine::{run_debate, speaker_tag};
use madre::llm::{MockBackend, MockRule, MockScript};

fn main() -> anyhow::Result<()> {
    let config = bilateral_judge_config(1);
    let script = MockScript::default()
        .rule(
            MockRule::reply("It describes behaviour the user triggers. CLASSIFICATION: F")
                .for_participant("functional"),
        )
        .rule(MockRule::reply("It constrains how fast, not what. CLASSIFICATION: NF").for_participant("non_functional"))
        .rule(
            MockRule::reply("The response-time bound is the point. CLASSIFICATION: NF")
                .for_participant("judge")
                .when_contains("seconds"),
        )
        .with_default("CLASSIFICATION: F");
    let backend = MockBackend::new(script);

    let outcome = run_debate(&config, "Search results shall be returned within 2 seconds.", &backend)?;
    for m in &outcome.transcript.messages {
        println!("#{} {}", m.seq, speaker_tag(m));
        println!("    {}", m.content);
    }
    println!("decision: {:?} via {:?}", outcome.decision, outcome.agreement_path);
    println!(
        "tokens: {} in, {} out",
        outcome.total_usage.input_tokens, outcome.total_usage.output_tokens
    );
    Ok(())
}
