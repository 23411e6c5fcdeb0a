use crate::model::{
    AgreementRule, DebateConfig, ExchangeFormat, Participant, Persona, Protocol, Role, Stance, TaskSpec, Topology,
};

pub const BASELINE_PROMPT: &str = "Act as a requirements engineering domain expert and classify the given list of requirements into functional (F) and non-functional requirements (NF).";

pub const FUNCTIONAL_DEBATER_PROMPT: &str =
    "You are a debater arguing that the received requirement is functional (F).";

pub const NON_FUNCTIONAL_DEBATER_PROMPT: &str =
    "You are a debater arguing that the received requirement is non-functional (NF).";

pub const JUDGE_PROMPT: &str = "You are a moderator. There will be two debaters involved in a debate competition. They will present their answers and discuss their perspectives on whether a given requirement should be classified as functional (F) or non-functional (NF). At the end of each round, you will evaluate their answers and decide which classification is more appropriate.";

pub const REQUIREMENT_PROMPT: &str = "Requirement: {input}";

/// Appended to the baseline request so the reply ends in a parseable marker.
pub const BASELINE_ANSWER_INSTRUCTION: &str = "End your reply with CLASSIFICATION: <label>, where <label> is F or NF.";

pub const FUNCTIONAL_DEBATER: &str = "functional";
pub const NON_FUNCTIONAL_DEBATER: &str = "non_functional";
pub const JUDGE: &str = "judge";

/// Two stance debaters (F and NF) and a judge, debating `rounds` rebuttal
/// iterations and resolved by the judge.
pub fn bilateral_judge_config(rounds: u32) -> DebateConfig {
    let stance = |label: &str| Persona {
        stance: Stance::ArgueFor(label.to_string()),
        ..Persona::default()
    };
    DebateConfig {
        participants: vec![
            Participant::new(FUNCTIONAL_DEBATER, Role::Debater, FUNCTIONAL_DEBATER_PROMPT).with_persona(stance("F")),
            Participant::new(NON_FUNCTIONAL_DEBATER, Role::Debater, NON_FUNCTIONAL_DEBATER_PROMPT)
                .with_persona(stance("NF")),
            Participant::new(JUDGE, Role::Judge, JUDGE_PROMPT),
        ],
        topology: Topology::Bilateral,
        protocol: Protocol::Simultaneous,
        format: ExchangeFormat::Verbatim,
        agreement: AgreementRule::JudgeDecision,
        rounds,
        task: TaskSpec::labels(&["F", "NF"], REQUIREMENT_PROMPT),
    }
}
