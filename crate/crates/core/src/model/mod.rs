//! Debate configuration: participants, topology, protocol, exchange format
//! and agreement rule, plus the pure routing functions that give them meaning.

mod config_file;
mod routing;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config_file::{parse_debate_config, ConfigFileError};
pub use routing::{in_neighbors, recipients, speaking_schedule, Phase, RoutingError};
pub use validate::{validate_config, Violation, ViolationCode};

/// Argumentative position assigned to a participant.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    #[default]
    Neutral,
    ArgueFor(String),
    ArgueAgainst(String),
    Critic,
}

impl Stance {
    pub fn label(&self) -> Option<&str> {
        match self {
            Stance::ArgueFor(label) | Stance::ArgueAgainst(label) => Some(label),
            Stance::Neutral | Stance::Critic => None,
        }
    }

    /// Short human-readable description used when rendering prompt templates.
    pub fn describe(&self) -> String {
        match self {
            Stance::Neutral => "neutral".to_string(),
            Stance::ArgueFor(label) => format!("argue for {label}"),
            Stance::ArgueAgainst(label) => format!("argue against {label}"),
            Stance::Critic => "critic".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Persona {
    #[serde(default)]
    pub background: String,
    #[serde(default)]
    pub stance: Stance,
    #[serde(default)]
    pub traits: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Debater,
    Judge,
    Summarizer,
    Leader,
    Verifier,
    Editor,
}

impl Role {
    /// Whether the engine knows how to run a participant with this role.
    pub fn is_executable(self) -> bool {
        matches!(self, Role::Debater | Role::Judge | Role::Summarizer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    pub name: String,
    pub role: Role,
    #[serde(default)]
    pub persona: Persona,
    pub system_prompt: String,
}

impl Participant {
    pub fn new(name: impl Into<String>, role: Role, system_prompt: impl Into<String>) -> Self {
        Participant {
            name: name.into(),
            role,
            persona: Persona::default(),
            system_prompt: system_prompt.into(),
        }
    }

    pub fn with_persona(mut self, persona: Persona) -> Self {
        self.persona = persona;
        self
    }

    /// Renders the system prompt template. Recognised placeholders are
    /// `{name}`, `{background}`, `{stance}` and `{traits}`; anything else is
    /// left untouched.
    pub fn rendered_system_prompt(&self) -> String {
        self.system_prompt
            .replace("{name}", &self.name)
            .replace("{background}", &self.persona.background)
            .replace("{stance}", &self.persona.stance.describe())
            .replace("{traits}", &self.persona.traits.join(", "))
    }
}

/// A directed edge `from -> to`: `to` receives what `from` says.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "config_file::TopologyRepr")]
pub enum Topology {
    Bilateral,
    FullyConnected,
    Grouped { groups: Vec<BTreeSet<String>> },
    Structured { edges: Vec<Edge> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "config_file::ProtocolRepr")]
pub enum Protocol {
    Simultaneous,
    Sequential {
        order: Vec<String>,
    },
    /// Round 0 simultaneous, later rounds sequential in participant order.
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "config_file::ExchangeFormatRepr")]
pub enum ExchangeFormat {
    Verbatim,
    Summarized { max_words: usize },
    WithConfidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementRule {
    MajorityVote,
    WeightedVote,
    Average,
    JudgeDecision,
    JudgeOnTie,
}

impl AgreementRule {
    /// Rules that read votes out of the debaters' final messages.
    pub fn uses_votes(self) -> bool {
        !matches!(self, AgreementRule::JudgeDecision)
    }

    pub fn needs_judge(self) -> bool {
        matches!(self, AgreementRule::JudgeDecision | AgreementRule::JudgeOnTie)
    }
}

/// What the debaters are asked to decide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    /// Ordered label set; the order is also the tie-break order.
    #[serde(default)]
    pub labels: Vec<String>,
    /// Numeric-answer task (labels are ignored).
    #[serde(default)]
    pub numeric: bool,
    /// User prompt template; `{input}` is replaced by the item text.
    pub user_prompt: String,
}

impl TaskSpec {
    pub fn labels(labels: &[&str], user_prompt: impl Into<String>) -> Self {
        TaskSpec {
            labels: labels.iter().map(|l| l.to_string()).collect(),
            numeric: false,
            user_prompt: user_prompt.into(),
        }
    }

    pub fn render(&self, item_input: &str) -> String {
        self.user_prompt.replace("{input}", item_input)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebateConfig {
    pub participants: Vec<Participant>,
    pub topology: Topology,
    pub protocol: Protocol,
    pub format: ExchangeFormat,
    pub agreement: AgreementRule,
    /// Rebuttal rounds after the opening statements (round 0).
    pub rounds: u32,
    pub task: TaskSpec,
}

impl DebateConfig {
    pub fn participant(&self, name: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.name == name)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Participant> {
        self.participants.iter().filter(move |p| p.role == role)
    }

    /// Debater names in config order.
    pub fn debaters(&self) -> Vec<&str> {
        self.with_role(Role::Debater).map(|p| p.name.as_str()).collect()
    }

    pub fn judge(&self) -> Option<&Participant> {
        self.with_role(Role::Judge).next()
    }

    pub fn summarizer(&self) -> Option<&Participant> {
        self.with_role(Role::Summarizer).next()
    }

    /// Groups of debaters that share a digest. Only `Grouped` topologies have
    /// more than one.
    pub fn debater_groups(&self) -> Vec<Vec<&str>> {
        match &self.topology {
            Topology::Grouped { groups } => {
                let debaters = self.debaters();
                groups
                    .iter()
                    .map(|g| debaters.iter().copied().filter(|d| g.contains(*d)).collect())
                    .collect()
            }
            _ => vec![self.debaters()],
        }
    }

    /// Whether a summarizer is called after each round.
    pub fn summarizes_rounds(&self) -> bool {
        match self.format {
            ExchangeFormat::Summarized { .. } => true,
            _ => matches!(self.topology, Topology::Grouped { .. }) && self.summarizer().is_some(),
        }
    }

    /// Hex SHA-256 over the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("DebateConfig always serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn debater(name: &str) -> Participant {
        Participant::new(name, Role::Debater, format!("You are debater {name}."))
    }

    pub fn config(debaters: &[&str], topology: Topology, protocol: Protocol) -> DebateConfig {
        DebateConfig {
            participants: debaters.iter().map(|d| debater(d)).collect(),
            topology,
            protocol,
            format: ExchangeFormat::Verbatim,
            agreement: AgreementRule::MajorityVote,
            rounds: 2,
            task: TaskSpec::labels(&["F", "NF"], "Requirement: {input}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_prompt_substitutes_persona_fields() {
        let p = Participant::new(
            "a",
            Role::Debater,
            "I am {name}, {background}; I {stance} ({traits}) {other}",
        )
        .with_persona(Persona {
            background: "an RE expert".into(),
            stance: Stance::ArgueFor("F".into()),
            traits: vec!["stubborn".into(), "terse".into()],
        });
        assert_eq!(
            p.rendered_system_prompt(),
            "I am a, an RE expert; I argue for F (stubborn, terse) {other}"
        );
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = fixtures::config(&["A", "B"], Topology::Bilateral, Protocol::Simultaneous);
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.rounds += 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
