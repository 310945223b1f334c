//! Event logs, sequences and the ingestion pipeline that turns delimited
//! text into a [`Dataset`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum sequence length shown by default (sequences of length two or
/// less are treated as noise in the matrix).
pub const DEFAULT_MIN_LEN: usize = 3;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}: expected {expected} columns, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: {message}")]
    BadValue { row: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid length range: minLen={min}, maxLen={max:?}")]
    LengthRange { min: usize, max: Option<usize> },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// Scalar attribute value carried alongside an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, Scalar>,
}

impl Event {
    pub fn new(event_type: impl Into<String>) -> Self {
        Event {
            event_type: event_type.into(),
            timestamp: None,
            attributes: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: String,
    pub events: Vec<Event>,
}

impl Sequence {
    /// Builds a sequence from bare event types.
    pub fn from_types<S: AsRef<str>>(id: impl Into<String>, types: &[S]) -> Self {
        Sequence {
            id: id.into(),
            events: types.iter().map(|t| Event::new(t.as_ref())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event_type(&self, i: usize) -> &str {
        &self.events[i].event_type
    }

    pub fn types(&self) -> impl DoubleEndedIterator<Item = &str> + ExactSizeIterator + '_ {
        self.events.iter().map(|e| e.event_type.as_str())
    }

    pub fn reversed(&self) -> Sequence {
        Sequence {
            id: self.id.clone(),
            events: self.events.iter().rev().cloned().collect(),
        }
    }
}

/// An immutable collection of sequences with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    sequences: Vec<Sequence>,
    alphabet: BTreeSet<String>,
}

impl Dataset {
    /// Builds a dataset, deriving the alphabet from the data.
    ///
    /// Fails when ids repeat, a sequence is empty, or an event type is empty.
    pub fn new(sequences: Vec<Sequence>) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        let mut alphabet = BTreeSet::new();
        for (row, s) in sequences.iter().enumerate() {
            if !seen.insert(s.id.as_str()) {
                return Err(DatasetError::Config(format!("duplicate sequence id {:?}", s.id)));
            }
            if s.events.is_empty() {
                return Err(DatasetError::BadValue {
                    row,
                    message: format!("sequence {:?} has no events", s.id),
                });
            }
            for e in &s.events {
                if e.event_type.is_empty() {
                    return Err(DatasetError::BadValue {
                        row,
                        message: format!("sequence {:?} has an empty event type", s.id),
                    });
                }
                alphabet.insert(e.event_type.clone());
            }
        }
        Ok(Dataset { sequences, alphabet })
    }

    /// Convenience constructor used heavily in tests: ids are `s1, s2, ...`.
    pub fn from_type_lists<S: AsRef<str>>(lists: &[Vec<S>]) -> Self {
        let seqs = lists
            .iter()
            .enumerate()
            .map(|(i, l)| Sequence::from_types(format!("s{}", i + 1), l))
            .collect();
        Dataset::new(seqs).expect("type lists must be non-empty")
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sequence> {
        self.sequences.iter().find(|s| s.id == id)
    }

    /// Index from sequence id to position.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.sequences
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }

    /// Sub-dataset restricted to the given positions, keeping dataset order.
    pub fn subset(&self, positions: impl IntoIterator<Item = usize>) -> Dataset {
        let mut pos: Vec<usize> = positions.into_iter().collect();
        pos.sort_unstable();
        pos.dedup();
        let seqs: Vec<Sequence> = pos.into_iter().map(|i| self.sequences[i].clone()).collect();
        Dataset::new(seqs).expect("subset of a valid dataset is valid")
    }

    /// Every sequence reversed, ids preserved.
    pub fn reversed(&self) -> Dataset {
        Dataset {
            sequences: self.sequences.iter().map(Sequence::reversed).collect(),
            alphabet: self.alphabet.clone(),
        }
    }

    /// Keeps the sequences whose length lies in `[min_len, max_len]`.
    pub fn filter_by_length(
        &self,
        min_len: usize,
        max_len: Option<usize>,
    ) -> Result<Dataset, DatasetError> {
        if min_len < 1 || max_len.is_some_and(|m| m < min_len) {
            return Err(DatasetError::LengthRange {
                min: min_len,
                max: max_len,
            });
        }
        let seqs: Vec<Sequence> = self
            .sequences
            .iter()
            .filter(|s| s.len() >= min_len && max_len.is_none_or(|m| s.len() <= m))
            .cloned()
            .collect();
        Dataset::new(seqs)
    }

    pub fn stats(&self) -> Stats {
        let total: usize = self.sequences.iter().map(Sequence::len).sum();
        let count = self.sequences.len();
        Stats {
            count,
            avg_length: if count == 0 {
                0.0
            } else {
                total as f64 / count as f64
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Stats {
    pub count: usize,
    pub avg_length: f64,
}

/// How to read a delimited event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestConfig {
    pub group_by_column: String,
    pub event_type_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_column: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_has_header")]
    pub has_header: bool,
}

fn default_delimiter() -> char {
    ','
}

fn default_has_header() -> bool {
    true
}

impl IngestConfig {
    pub fn new(group_by: &str, event_type: &str) -> Self {
        IngestConfig {
            group_by_column: group_by.to_string(),
            event_type_column: event_type.to_string(),
            timestamp_column: None,
            delimiter: ',',
            has_header: true,
        }
    }

    pub fn with_timestamp(mut self, column: &str) -> Self {
        self.timestamp_column = Some(column.to_string());
        self
    }

    fn validate(&self) -> Result<u8, DatasetError> {
        if self.group_by_column == self.event_type_column {
            return Err(DatasetError::Config(
                "groupByColumn and eventTypeColumn must differ".into(),
            ));
        }
        if !self.delimiter.is_ascii() {
            return Err(DatasetError::Config(format!(
                "delimiter {:?} is not a single-byte character",
                self.delimiter
            )));
        }
        Ok(self.delimiter as u8)
    }
}

/// Parses a delimited event log and groups rows into sequences.
///
/// Groups appear in order of first occurrence. Inside a group, events are
/// stably sorted by timestamp when every row of the group carries one;
/// otherwise input order is kept. Columns other than group, type and
/// timestamp are kept as event attributes. Without a header, columns are
/// addressed by zero-based index (`"0"`, `"1"`, ...).
pub fn ingest(raw: &[u8], config: &IngestConfig) -> Result<Dataset, DatasetError> {
    let delimiter = config.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(config.has_header)
        .flexible(true)
        .from_reader(raw);

    let header: Option<Vec<String>> = if config.has_header {
        let h = reader.headers()?;
        if h.is_empty() {
            None
        } else {
            Some(h.iter().map(str::to_string).collect())
        }
    } else {
        None
    };

    let mut records = reader.records();
    // Without a header the width comes from the first data row.
    let mut pending = None;
    let names: Vec<String> = match header {
        Some(h) => h,
        None => match records.next() {
            None => return Ok(Dataset::default()),
            Some(first) => {
                let first = first?;
                let names = (0..first.len()).map(|i| i.to_string()).collect();
                pending = Some(first);
                names
            }
        },
    };

    let column = |name: &str| -> Result<usize, DatasetError> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DatasetError::Config(format!("unknown column {name:?}")))
    };
    let group_col = column(&config.group_by_column)?;
    let type_col = column(&config.event_type_column)?;
    let ts_col = config.timestamp_column.as_deref().map(column).transpose()?;

    let mut groups: Vec<(String, Vec<Event>)> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();

    let rows = pending.into_iter().map(Ok).chain(records);
    for (row, rec) in rows.enumerate() {
        let rec = rec?;
        if rec.len() != names.len() {
            return Err(DatasetError::MalformedRow {
                row,
                expected: names.len(),
                found: rec.len(),
            });
        }
        let event_type = rec[type_col].trim();
        if event_type.is_empty() {
            return Err(DatasetError::BadValue {
                row,
                message: "empty event type".into(),
            });
        }
        let timestamp = match ts_col {
            Some(c) if !rec[c].trim().is_empty() => Some(parse_timestamp(rec[c].trim()).ok_or_else(|| {
                DatasetError::BadValue {
                    row,
                    message: format!("unparseable timestamp {:?}", &rec[c]),
                }
            })?),
            _ => None,
        };
        let attributes = names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != group_col && *i != type_col && Some(*i) != ts_col)
            .map(|(i, n)| (n.clone(), parse_scalar(&rec[i])))
            .collect();

        let group = rec[group_col].to_string();
        let idx = *slot.entry(group.clone()).or_insert_with(|| {
            groups.push((group, Vec::new()));
            groups.len() - 1
        });
        groups[idx].1.push(Event {
            event_type: event_type.to_string(),
            timestamp,
            attributes,
        });
    }

    let sequences = groups
        .into_iter()
        .map(|(id, mut events)| {
            if events.iter().all(|e| e.timestamp.is_some()) {
                // sort_by is stable: equal timestamps keep input order
                events.sort_by(|a, b| a.timestamp.unwrap().total_cmp(&b.timestamp.unwrap()));
            }
            Sequence { id, events }
        })
        .collect();
    Dataset::new(sequences)
}

/// Numeric timestamps are taken as-is; RFC 3339 and `YYYY-MM-DD HH:MM:SS`
/// date-times become epoch milliseconds.
fn parse_timestamp(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp_millis() as f64);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp_millis() as f64);
        }
    }
    None
}

fn parse_scalar(s: &str) -> Scalar {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Scalar::Number(v),
        _ => Scalar::Text(s.to_string()),
    }
}

/// A loadable dataset: `{name, csvPath, ingestConfig}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub name: String,
    pub csv_path: PathBuf,
    pub ingest_config: IngestConfig,
}

impl Manifest {
    pub fn from_file(path: &Path) -> Result<Manifest, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| DatasetError::Manifest {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Resolves `csvPath` against `base` (the manifest's directory) and ingests it.
    pub fn load(&self, base: &Path) -> Result<Dataset, DatasetError> {
        let path = if self.csv_path.is_absolute() {
            self.csv_path.clone()
        } else {
            base.join(&self.csv_path)
        };
        let bytes = std::fs::read(&path).map_err(|source| DatasetError::Io { path, source })?;
        ingest(&bytes, &self.ingest_config)
    }
}

/// Reads every `*.json` manifest in `dir`, sorted by file name.
pub fn read_manifest_dir(dir: &Path) -> Result<Vec<Manifest>, DatasetError> {
    let entries = std::fs::read_dir(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| Manifest::from_file(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn types(d: &Dataset, id: &str) -> Vec<String> {
        d.get(id).unwrap().types().map(str::to_string).collect()
    }

    #[test]
    fn groups_rows_by_column() {
        let raw = b"gid,type\ng1,a\ng1,b\ng2,a\n";
        let d = ingest(raw, &IngestConfig::new("gid", "type")).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(types(&d, "g1"), ["a", "b"]);
        assert_eq!(types(&d, "g2"), ["a"]);
        assert_eq!(d.alphabet().len(), 2);
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let d = ingest(b"gid,type\n", &IngestConfig::new("gid", "type")).unwrap();
        assert!(d.is_empty());
        let d = ingest(b"", &IngestConfig::new("gid", "type")).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn sorts_by_timestamp_stably() {
        let raw = b"gid,type,t\ng1,a,3\ng1,b,1\ng1,c,3\ng1,d,1\n";
        let cfg = IngestConfig::new("gid", "type").with_timestamp("t");
        let d = ingest(raw, &cfg).unwrap();
        assert_eq!(types(&d, "g1"), ["b", "d", "a", "c"]);
    }

    #[test]
    fn missing_timestamp_keeps_input_order() {
        let raw = b"gid,type,t\ng1,a,3\ng1,b,\n";
        let cfg = IngestConfig::new("gid", "type").with_timestamp("t");
        let d = ingest(raw, &cfg).unwrap();
        assert_eq!(types(&d, "g1"), ["a", "b"]);
    }

    #[test]
    fn iso_timestamps() {
        let raw = b"gid,type,t\ng1,a,2020-01-01 10:00:05\ng1,b,2020-01-01T10:00:01Z\n";
        let cfg = IngestConfig::new("gid", "type").with_timestamp("t");
        let d = ingest(raw, &cfg).unwrap();
        assert_eq!(types(&d, "g1"), ["b", "a"]);
    }

    #[test]
    fn malformed_row_names_index() {
        let raw = b"gid,type\ng1,a\ng1\n";
        match ingest(raw, &IngestConfig::new("gid", "type")) {
            Err(DatasetError::MalformedRow { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_column_is_config_error() {
        let raw = b"gid,type\ng1,a\n";
        assert!(matches!(
            ingest(raw, &IngestConfig::new("gid", "kind")),
            Err(DatasetError::Config(_))
        ));
        assert!(matches!(
            ingest(raw, &IngestConfig::new("gid", "gid")),
            Err(DatasetError::Config(_))
        ));
    }

    #[test]
    fn headerless_and_custom_delimiter() {
        let raw = b"g1;x;\"q;uoted\"\ng1;y;z\n";
        let cfg = IngestConfig {
            group_by_column: "0".into(),
            event_type_column: "1".into(),
            timestamp_column: None,
            delimiter: ';',
            has_header: false,
        };
        let d = ingest(raw, &cfg).unwrap();
        assert_eq!(types(&d, "g1"), ["x", "y"]);
        assert_eq!(
            d.sequences()[0].events[0].attributes["2"],
            Scalar::Text("q;uoted".into())
        );
    }

    #[test]
    fn filter_by_length_bounds() {
        let d = Dataset::from_type_lists(&[vec!["a"], vec!["a", "b"], vec!["a", "b", "c"], vec!["a", "b", "c", "d"]]);
        let lens = |d: &Dataset| d.sequences().iter().map(Sequence::len).collect::<Vec<_>>();
        assert_eq!(lens(&d.filter_by_length(3, None).unwrap()), [3, 4]);
        assert_eq!(d.filter_by_length(1, None).unwrap(), d);
        assert!(d.filter_by_length(3, Some(2)).is_err());
        assert!(d.filter_by_length(0, None).is_err());

        let d = Dataset::from_type_lists(&[vec!["a"; 2], vec!["a"; 3], vec!["a"; 5]]);
        assert_eq!(lens(&d.filter_by_length(3, Some(4)).unwrap()), [3]);
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn stats_examples() {
        assert_eq!(
            Dataset::default().stats(),
            Stats {
                count: 0,
                avg_length: 0.0
            }
        );
        let d = Dataset::from_type_lists(&[vec!["a", "b"], vec!["a", "b", "c", "d"]]);
        assert_eq!(
            d.stats(),
            Stats {
                count: 2,
                avg_length: 3.0
            }
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let s = Sequence::from_types("x", &["a"]);
        assert!(Dataset::new(vec![s.clone(), s]).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let json = r#"{"name":"demo","csvPath":"demo.csv","ingestConfig":{"groupByColumn":"gid","eventTypeColumn":"type","timestampColumn":"t","delimiter":",","hasHeader":true}}"#;
        let m: Manifest = serde_json::from_str(json).unwrap();
        assert_eq!(m.ingest_config.timestamp_column.as_deref(), Some("t"));
        assert_eq!(serde_json::to_string(&m).unwrap(), json);
    }
}
