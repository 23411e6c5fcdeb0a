use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Binary requirement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    F,
    NF,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::F, Label::NF];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::F => "F",
            Label::NF => "NF",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::F => Label::NF,
            Label::NF => Label::F,
        }
    }

    pub fn names() -> Vec<String> {
        Label::ALL.iter().map(|l| l.as_str().to_string()).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" => Ok(Label::F),
            "NF" => Ok(Label::NF),
            other => Err(format!("`{other}` is not F or NF")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRequirement {
    pub id: String,
    pub text: String,
    pub gold: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub items: Vec<LabeledRequirement>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.items.iter().filter(|i| i.gold == label).count()
    }
}

/// Raw dataset label (case-insensitive) to binary class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelMapping {
    pub labels: BTreeMap<String, Label>,
}

/// PROMISE NFR subtypes: availability, fault tolerance, legal, look & feel,
/// maintainability, operational, performance, portability, scalability,
/// security, usability.
const PROMISE_NFR_SUBTYPES: [&str; 12] = ["NF", "A", "FT", "L", "LF", "MN", "O", "PE", "PO", "SC", "SE", "US"];

impl Default for LabelMapping {
    /// `F` stays functional; every PROMISE NFR subtype collapses to `NF`.
    fn default() -> Self {
        let mut labels = BTreeMap::from([("F".to_string(), Label::F)]);
        labels.extend(PROMISE_NFR_SUBTYPES.iter().map(|s| (s.to_string(), Label::NF)));
        LabelMapping { labels }
    }
}

impl LabelMapping {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        let raw: LabelMapping = toml::from_str(text)?;
        Ok(LabelMapping {
            labels: raw
                .labels
                .into_iter()
                .map(|(k, v)| (k.trim().to_uppercase(), v))
                .collect(),
        })
    }

    pub fn map(&self, raw: &str) -> Option<Label> {
        self.labels.get(&raw.trim().to_uppercase()).copied()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("expected header `id,text,label`, found `{0}`")]
    Header(String),
    #[error("row {row}: duplicate id `{id}`")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: empty requirement text")]
    EmptyText { row: usize },
    #[error("row {row}: empty id")]
    EmptyId { row: usize },
    #[error("row {row}: label `{label}` has no mapping")]
    UnmappableLabel { row: usize, label: String },
}

#[derive(Deserialize)]
struct Row {
    id: String,
    text: String,
    label: String,
}

/// Parses an `id,text,label` CSV. Rows are numbered from 1 after the header.
pub fn parse_dataset(name: &str, csv_text: &[u8], mapping: &LabelMapping) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(csv_text);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "text", "label"] {
        return Err(DatasetError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let id = row.id.trim().to_string();
        if id.is_empty() {
            return Err(DatasetError::EmptyId { row: row_no });
        }
        if row.text.trim().is_empty() {
            return Err(DatasetError::EmptyText { row: row_no });
        }
        let gold = mapping.map(&row.label).ok_or_else(|| DatasetError::UnmappableLabel {
            row: row_no,
            label: row.label.clone(),
        })?;
        if !seen.insert(id.clone()) {
            return Err(DatasetError::DuplicateId { row: row_no, id });
        }
        items.push(LabeledRequirement {
            id,
            text: row.text.trim().to_string(),
            gold,
        });
    }
    Ok(Dataset {
        name: name.to_string(),
        items,
    })
}

pub fn load_dataset(path: &Path, mapping: &LabelMapping) -> Result<Dataset, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&name, &bytes, mapping)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, DatasetError> {
        parse_dataset("t", text.as_bytes(), &LabelMapping::default())
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse("id,text,label\n").unwrap().is_empty());
    }

    #[test]
    fn labels_are_normalized_and_mapped() {
        let d =
            parse("id,text,label\n1,\"The system shall, on request, print.\",f\n2,Fast.,SE\n3,Pretty.,us\n").unwrap();
        assert_eq!(d.items[0].text, "The system shall, on request, print.");
        let golds: Vec<Label> = d.items.iter().map(|i| i.gold).collect();
        assert_eq!(golds, vec![Label::F, Label::NF, Label::NF]);
    }

    #[test]
    fn default_mapping_matches_declared_table() {
        let m = LabelMapping::default();
        for subtype in PROMISE_NFR_SUBTYPES {
            assert_eq!(m.map(subtype), Some(Label::NF), "{subtype}");
            assert_eq!(m.map(&subtype.to_lowercase()), Some(Label::NF));
        }
        assert_eq!(m.map("F"), Some(Label::F));
        assert_eq!(m.map("XYZ"), None);
    }

    #[test]
    fn errors_name_the_row() {
        assert!(matches!(
            parse("id,text,label\n1,a,F\n1,b,F\n"),
            Err(DatasetError::DuplicateId { row: 2, .. })
        ));
        assert!(matches!(
            parse("id,text,label\n1,a,F\n2,  ,F\n"),
            Err(DatasetError::EmptyText { row: 2 })
        ));
        assert!(matches!(
            parse("id,text,label\n1,a,QQ\n"),
            Err(DatasetError::UnmappableLabel { row: 1, .. })
        ));
        assert!(matches!(parse("id,label,text\n"), Err(DatasetError::Header(_))));
    }

    #[test]
    fn custom_mapping_file() {
        let m = LabelMapping::from_toml("[labels]\nf = \"F\"\nse = \"F\"\n").unwrap();
        assert_eq!(m.map("SE"), Some(Label::F));
        assert_eq!(m.map("US"), None);
        assert!(LabelMapping::from_toml("[labels]\nF = \"X\"\n").is_err());
    }
}
