use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{AgreementRule, DebateConfig, ExchangeFormat, Protocol, Role, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationCode {
    EmptyName,
    DuplicateName,
    RoleNotExecutable,
    TooFewDebaters,
    MultipleJudges,
    MultipleSummarizers,
    EmptyLabelSet,
    DuplicateLabel,
    StanceLabelUnknown,
    TaskTemplateMissingInput,
    BilateralRequiresTwoDebaters,
    GroupEmpty,
    GroupsOverlap,
    GroupsDoNotCoverDebaters,
    GroupMemberNotDebater,
    EdgeEndpointNotDebater,
    SelfEdge,
    SequentialOrderNotPermutation,
    SummarizedRequiresSummarizer,
    SummarizedMaxWordsZero,
    AgreementRequiresJudge,
    WeightedVoteRequiresConfidence,
    AverageRequiresNumericTask,
    NumericTaskRequiresAverage,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Every invariant the config breaks, in a stable order. Empty means the
/// engine will run it.
pub fn validate_config(config: &DebateConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, message: String| out.push(Violation { code, message });

    let mut seen = BTreeMap::<&str, usize>::new();
    for p in &config.participants {
        if p.name.trim().is_empty() {
            push(
                ViolationCode::EmptyName,
                format!("a {:?} participant has an empty name", p.role),
            );
        }
        *seen.entry(p.name.as_str()).or_default() += 1;
        if !p.role.is_executable() {
            push(
                ViolationCode::RoleNotExecutable,
                format!(
                    "participant `{}` has role {:?}, which the engine cannot run",
                    p.name, p.role
                ),
            );
        }
    }
    for (name, count) in &seen {
        if *count > 1 && !name.trim().is_empty() {
            push(
                ViolationCode::DuplicateName,
                format!("participant name `{name}` used {count} times"),
            );
        }
    }

    let debaters: Vec<&str> = config.debaters();
    let debater_set: BTreeSet<&str> = debaters.iter().copied().collect();
    if debaters.len() < 2 {
        push(
            ViolationCode::TooFewDebaters,
            format!("a debate needs at least 2 debaters, found {}", debaters.len()),
        );
    }
    let judges = config.with_role(Role::Judge).count();
    if judges > 1 {
        push(
            ViolationCode::MultipleJudges,
            format!("at most one judge is supported, found {judges}"),
        );
    }
    let summarizers = config.with_role(Role::Summarizer).count();
    if summarizers > 1 {
        push(
            ViolationCode::MultipleSummarizers,
            format!("at most one summarizer is supported, found {summarizers}"),
        );
    }

    let task = &config.task;
    if !task.numeric {
        if task.labels.is_empty() {
            push(
                ViolationCode::EmptyLabelSet,
                "a label task needs at least one label".into(),
            );
        }
        let mut labels = BTreeSet::new();
        for label in &task.labels {
            if !labels.insert(label.to_uppercase()) {
                push(ViolationCode::DuplicateLabel, format!("label `{label}` declared twice"));
            }
        }
    }
    for p in &config.participants {
        if let Some(label) = p.persona.stance.label() {
            if task.numeric || !task.labels.iter().any(|l| l == label) {
                push(
                    ViolationCode::StanceLabelUnknown,
                    format!(
                        "participant `{}` argues about `{label}`, which is not a task label",
                        p.name
                    ),
                );
            }
        }
    }
    if !task.user_prompt.contains("{input}") {
        push(
            ViolationCode::TaskTemplateMissingInput,
            "task.user_prompt must contain the `{input}` placeholder".into(),
        );
    }

    match &config.topology {
        Topology::Bilateral => {
            if debaters.len() != 2 {
                push(
                    ViolationCode::BilateralRequiresTwoDebaters,
                    format!("bilateral topology needs exactly 2 debaters, found {}", debaters.len()),
                );
            }
        }
        Topology::FullyConnected => {}
        Topology::Grouped { groups } => {
            let mut covered = BTreeSet::new();
            for (i, group) in groups.iter().enumerate() {
                if group.is_empty() {
                    push(ViolationCode::GroupEmpty, format!("group {i} is empty"));
                }
                for member in group {
                    if !debater_set.contains(member.as_str()) {
                        push(
                            ViolationCode::GroupMemberNotDebater,
                            format!("group {i} member `{member}` is not a debater"),
                        );
                    }
                    if !covered.insert(member.as_str()) {
                        push(
                            ViolationCode::GroupsOverlap,
                            format!("`{member}` appears in more than one group"),
                        );
                    }
                }
            }
            let missing: Vec<&str> = debaters.iter().copied().filter(|d| !covered.contains(d)).collect();
            if !missing.is_empty() {
                push(
                    ViolationCode::GroupsDoNotCoverDebaters,
                    format!("debaters not in any group: {}", missing.join(", ")),
                );
            }
        }
        Topology::Structured { edges } => {
            for edge in edges {
                for end in [&edge.from, &edge.to] {
                    if !debater_set.contains(end.as_str()) {
                        push(
                            ViolationCode::EdgeEndpointNotDebater,
                            format!(
                                "edge {} -> {} names `{end}`, which is not a debater",
                                edge.from, edge.to
                            ),
                        );
                    }
                }
                if edge.from == edge.to {
                    push(ViolationCode::SelfEdge, format!("self-edge on `{}`", edge.from));
                }
            }
        }
    }

    if let Protocol::Sequential { order } = &config.protocol {
        let mut sorted: Vec<&str> = order.iter().map(String::as_str).collect();
        sorted.sort_unstable();
        let mut expected: Vec<&str> = debaters.clone();
        expected.sort_unstable();
        if sorted != expected {
            push(
                ViolationCode::SequentialOrderNotPermutation,
                format!(
                    "sequential order [{}] is not a permutation of the debaters [{}]",
                    order.join(", "),
                    debaters.join(", ")
                ),
            );
        }
    }

    if let ExchangeFormat::Summarized { max_words } = config.format {
        if summarizers == 0 {
            push(
                ViolationCode::SummarizedRequiresSummarizer,
                "summarized exchange needs a summarizer participant".into(),
            );
        }
        if max_words == 0 {
            push(
                ViolationCode::SummarizedMaxWordsZero,
                "summarized max_words must be positive".into(),
            );
        }
    }

    let rule = config.agreement;
    if rule.needs_judge() && judges != 1 {
        push(
            ViolationCode::AgreementRequiresJudge,
            format!("{rule:?} needs exactly one judge, found {judges}"),
        );
    }
    if rule == AgreementRule::WeightedVote && config.format != ExchangeFormat::WithConfidence {
        push(
            ViolationCode::WeightedVoteRequiresConfidence,
            "weighted vote needs the with_confidence exchange format".into(),
        );
    }
    if rule == AgreementRule::Average && !task.numeric {
        push(
            ViolationCode::AverageRequiresNumericTask,
            "average needs a numeric task".into(),
        );
    }
    if task.numeric && rule != AgreementRule::Average {
        push(
            ViolationCode::NumericTaskRequiresAverage,
            format!("numeric tasks are resolved by average, not {rule:?}"),
        );
    }

    out
}
