//! Four debaters in two groups; a summarizer condenses each group's round
//! for the other group.
//!
//!     cargo run --example grouped_summaries

use std::collections::BTreeSet;

use madre::engine::{run_debate, speaker_tag};
use madre::llm::{MockBackend, MockRule, MockScript};
use madre::model::{AgreementRule, DebateConfig, ExchangeFormat, Participant, Protocol, Role, TaskSpec, Topology};

fn main() -> anyhow::Result<()> {
    let group = |names: &[&str]| names.iter().map(|n| n.to_string()).collect::<BTreeSet<_>>();
    let debater = |name: &str| Participant::new(name, Role::Debater, "You are {name}. Classify the requirement.");
    let config = DebateConfig {
        participants: vec![
            debater("ana"),
            debater("ben"),
            debater("cho"),
            debater("dev"),
            Participant::new("sum", Role::Summarizer, "Summarize the arguments briefly."),
        ],
        topology: Topology::Grouped {
            groups: vec![group(&["ana", "ben"]), group(&["cho", "dev"])],
        },
        protocol: Protocol::Simultaneous,
        format: ExchangeFormat::Verbatim,
        agreement: AgreementRule::MajorityVote,
        rounds: 1,
        task: TaskSpec::labels(&["F", "NF"], "Requirement: {input}"),
    };
    let script = MockScript::default()
        .rule(MockRule::reply("Group view: mostly NF because of the time bound.").for_participant("sum"))
        .rule(
            MockRule::reply("A user-visible action. ANSWER: F")
                .for_participant("ana")
                .in_round(0),
        )
        .with_default("It is a quality constraint. ANSWER: NF");

    let outcome = run_debate(
        &config,
        "Reports shall be generated within 5 seconds.",
        &MockBackend::new(script),
    )?;
    for m in &outcome.transcript.messages {
        println!("{} -> {:?}", speaker_tag(m), m.recipients);
        println!("    {}", m.content);
    }
    println!("decision {:?} ({:?})", outcome.decision, outcome.agreement_path);
    Ok(())
}
