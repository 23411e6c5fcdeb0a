use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use super::{DebateConfig, Edge, ExchangeFormat, Protocol, Topology};

#[derive(Debug, Error)]
#[error("invalid debate config: {0}")]
pub struct ConfigFileError(#[from] toml::de::Error);

/// Parses a TOML debate config. Unknown keys are rejected; semantic checks
/// are left to [`validate_config`](super::validate_config).
pub fn parse_debate_config(text: &str) -> Result<DebateConfig, ConfigFileError> {
    Ok(toml::from_str(text)?)
}

// Internally tagged unit variants silently accept extra keys, so the public
// enums deserialize through these mirrors whose variants are all structs.

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub(super) enum TopologyRepr {
    Bilateral {},
    FullyConnected {},
    Grouped { groups: Vec<BTreeSet<String>> },
    Structured { edges: Vec<Edge> },
}

impl From<TopologyRepr> for Topology {
    fn from(repr: TopologyRepr) -> Self {
        match repr {
            TopologyRepr::Bilateral {} => Topology::Bilateral,
            TopologyRepr::FullyConnected {} => Topology::FullyConnected,
            TopologyRepr::Grouped { groups } => Topology::Grouped { groups },
            TopologyRepr::Structured { edges } => Topology::Structured { edges },
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub(super) enum ProtocolRepr {
    Simultaneous {},
    Sequential { order: Vec<String> },
    Hybrid {},
}

impl From<ProtocolRepr> for Protocol {
    fn from(repr: ProtocolRepr) -> Self {
        match repr {
            ProtocolRepr::Simultaneous {} => Protocol::Simultaneous,
            ProtocolRepr::Sequential { order } => Protocol::Sequential { order },
            ProtocolRepr::Hybrid {} => Protocol::Hybrid,
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub(super) enum ExchangeFormatRepr {
    Verbatim {},
    Summarized { max_words: usize },
    WithConfidence {},
}

impl From<ExchangeFormatRepr> for ExchangeFormat {
    fn from(repr: ExchangeFormatRepr) -> Self {
        match repr {
            ExchangeFormatRepr::Verbatim {} => ExchangeFormat::Verbatim,
            ExchangeFormatRepr::Summarized { max_words } => ExchangeFormat::Summarized { max_words },
            ExchangeFormatRepr::WithConfidence {} => ExchangeFormat::WithConfidence,
        }
    }
}
