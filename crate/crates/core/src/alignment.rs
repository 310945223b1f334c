//! Sequence-level view of one pattern's support set: key-event lookup and
//! vertical alignment on a chosen event.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Sequence;
use crate::mining::Membership;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("{event:?} is not a key event of the pattern")]
    NotKeyEvent { event: String },
    #[error("sequence {sid:?} does not contain {event:?}")]
    MissingEvent { sid: String, event: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub sid: String,
    pub set: Membership,
    pub offset: usize,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentView {
    pub pattern: String,
    pub key_events: Vec<String>,
    pub rows: Vec<AlignmentRow>,
}

pub fn first_occurrence(s: &Sequence, event: &str) -> Option<usize> {
    s.types().position(|t| t == event)
}

fn first_in(events: &[String], event: &str) -> Option<usize> {
    events.iter().position(|t| t == event)
}

impl AlignmentView {
    /// Rows for a pattern's support set, unaligned (all offsets zero).
    /// Rows are ordered set A first, then shared, then B; by id inside a set.
    pub fn new<'a>(
        pattern: impl Into<String>,
        key_events: &[String],
        support: impl IntoIterator<Item = (&'a Sequence, Membership)>,
    ) -> AlignmentView {
        let mut rows: Vec<AlignmentRow> = support
            .into_iter()
            .map(|(s, set)| AlignmentRow {
                sid: s.id.clone(),
                set,
                offset: 0,
                events: s.types().map(str::to_string).collect(),
            })
            .collect();
        rows.sort_by(|a, b| (a.set, &a.sid).cmp(&(b.set, &b.sid)));
        AlignmentView {
            pattern: pattern.into(),
            key_events: key_events.to_vec(),
            rows,
        }
    }

    /// Shifts every row so the first occurrence of `event` lands on the
    /// same baseline index `M = max first occurrence`. `None` clears the
    /// alignment.
    pub fn align_by(&self, event: Option<&str>) -> Result<AlignmentView, AlignmentError> {
        let mut out = self.clone();
        let Some(event) = event else {
            out.rows.iter_mut().for_each(|r| r.offset = 0);
            return Ok(out);
        };
        if !self.key_events.iter().any(|k| k == event) {
            return Err(AlignmentError::NotKeyEvent { event: event.to_string() });
        }
        let firsts = self
            .rows
            .iter()
            .map(|r| {
                first_in(&r.events, event).ok_or_else(|| AlignmentError::MissingEvent {
                    sid: r.sid.clone(),
                    event: event.to_string(),
                })
            })
            .collect::<Result<Vec<usize>, _>>()?;
        let baseline = firsts.iter().copied().max().unwrap_or(0);
        for (row, first) in out.rows.iter_mut().zip(firsts) {
            row.offset = baseline - first;
        }
        Ok(out)
    }

    /// First occurrence of `event` in every row, for hover highlighting.
    pub fn highlight(&self, event: &str) -> Vec<Option<usize>> {
        self.rows.iter().map(|r| first_in(&r.events, event)).collect()
    }
}
