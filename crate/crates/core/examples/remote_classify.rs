//! Classify one requirement with the baseline prompt against a live
//! OpenAI-compatible endpoint. Needs OPENAI_API_KEY.
//!
//!     cargo run --example remote_classify -- "The system shall export invoices as PDF."

use madre::classify::{parse_label, prompts};
use madre::llm::{ChatBackend, ChatRequest, ModelParams, RemoteBackend, RemoteConfig, Turn};

fn main() -> anyhow::Result<()> {
    let requirement = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "The system shall export invoices as PDF.".into());
    let backend = match RemoteBackend::from_env(&RemoteConfig::default()) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}; nothing to do");
            return Ok(());
        }
    };
    let request = ChatRequest::new(
        prompts::BASELINE_PROMPT,
        vec![
            Turn::user(prompts::REQUIREMENT_PROMPT.replace("{input}", &requirement)),
            Turn::user(prompts::BASELINE_ANSWER_INSTRUCTION),
        ],
        ModelParams::default(),
    );
    let response = backend.complete(&request)?;
    println!("{}", response.text);
    println!("label: {:?}", parse_label(&response.text));
    println!(
        "usage: {} in, {} out, {:?}",
        response.usage.input_tokens, response.usage.output_tokens, response.latency
    );
    Ok(())
}
