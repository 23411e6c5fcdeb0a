use std::collections::BTreeSet;

use thiserror::Error;

use super::{DebateConfig, Protocol, Role, Topology};

/// Participants speaking concurrently, listed in config order.
pub type Phase = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("unknown participant `{0}`")]
    UnknownSender(String),
    #[error("participant `{0}` is not a debater")]
    NotADebater(String),
    #[error("round {round} outside 0..={max}")]
    RoundOutOfRange { round: u32, max: u32 },
}

/// Debaters that receive what `sender` says. Round-independent for every
/// topology; `round` is accepted so callers need not special-case that.
pub fn recipients(config: &DebateConfig, sender: &str, _round: u32) -> Result<BTreeSet<String>, RoutingError> {
    let participant = config
        .participant(sender)
        .ok_or_else(|| RoutingError::UnknownSender(sender.to_string()))?;
    if participant.role != Role::Debater {
        return Err(RoutingError::NotADebater(sender.to_string()));
    }
    let debaters = config.debaters();
    let others = |keep: &dyn Fn(&str) -> bool| -> BTreeSet<String> {
        debaters
            .iter()
            .filter(|d| **d != sender && keep(d))
            .map(|d| d.to_string())
            .collect()
    };
    Ok(match &config.topology {
        Topology::Bilateral | Topology::FullyConnected => others(&|_| true),
        Topology::Grouped { groups } => match groups.iter().find(|g| g.contains(sender)) {
            Some(group) => others(&|d| group.contains(d)),
            None => BTreeSet::new(),
        },
        Topology::Structured { edges } => {
            let targets: BTreeSet<&str> = edges
                .iter()
                .filter(|e| e.from == sender)
                .map(|e| e.to.as_str())
                .collect();
            others(&|d| targets.contains(d))
        }
    })
}

/// Debaters whose messages `receiver` sees, in config order.
pub fn in_neighbors(config: &DebateConfig, receiver: &str) -> Vec<String> {
    config
        .debaters()
        .into_iter()
        .filter(|sender| {
            recipients(config, sender, 0)
                .map(|r| r.contains(receiver))
                .unwrap_or(false)
        })
        .map(str::to_string)
        .collect()
}

pub fn speaking_schedule(config: &DebateConfig, round: u32) -> Result<Vec<Phase>, RoutingError> {
    if round > config.rounds {
        return Err(RoutingError::RoundOutOfRange {
            round,
            max: config.rounds,
        });
    }
    let all: Phase = config.debaters().into_iter().map(str::to_string).collect();
    let sequential = |order: &[String]| order.iter().map(|d| vec![d.clone()]).collect();
    Ok(match &config.protocol {
        Protocol::Simultaneous => vec![all],
        Protocol::Sequential { order } => sequential(order),
        Protocol::Hybrid if round == 0 => vec![all],
        Protocol::Hybrid => sequential(&all),
    })
}
