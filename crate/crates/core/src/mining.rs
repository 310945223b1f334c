//! Sequential pattern mining over the union of two selected sets.
//!
//! The miner works on a vertical representation: one position bitmap per
//! (event type, sequence). A pattern is grown one event at a time by a depth
//! first search; for each supporting sequence only the earliest position at
//! which the pattern can end is tracked, so an extension by event `x` is the
//! first set bit of `x`'s bitmap strictly after that position. In maximal
//! mode every pattern without a frequent extension is checked against the
//! result set collected so far: it is dropped when contained in a kept
//! pattern, and kept patterns it contains are evicted.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Sequence};
use crate::matrix::Selection;

pub const DEFAULT_MIN_SUPPORT_PCT: f64 = 30.0;
pub const DEFAULT_MAX_PATTERN_LENGTH: usize = 8;

/// Size limits of the brute-force miner.
pub const BRUTE_FORCE_MAX_SEQUENCES: usize = 30;
pub const BRUTE_FORCE_MAX_LENGTH: usize = 10;
pub const BRUTE_FORCE_MAX_ALPHABET: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum MiningError {
    #[error("minimum support must lie in (0, 100], got {0}")]
    MinSupport(f64),
    #[error("maximum pattern length must be at least 1")]
    MaxLength,
    #[error("cannot mine an empty dataset")]
    EmptyDataset,
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    #[error("sequence {0:?} is not tagged with a selection set")]
    Untagged(String),
    #[error("supporting sequence {0:?} belongs to neither selected set")]
    Orphan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MiningMode {
    #[default]
    Maximal,
    Frequent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MiningConfig {
    pub min_support_pct: f64,
    pub max_pattern_length: usize,
    pub mode: MiningMode,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_support_pct: DEFAULT_MIN_SUPPORT_PCT,
            max_pattern_length: DEFAULT_MAX_PATTERN_LENGTH,
            mode: MiningMode::Maximal,
        }
    }
}

impl MiningConfig {
    pub fn new(min_support_pct: f64, mode: MiningMode) -> Self {
        MiningConfig {
            min_support_pct,
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), MiningError> {
        if !(self.min_support_pct > 0.0 && self.min_support_pct <= 100.0) {
            return Err(MiningError::MinSupport(self.min_support_pct));
        }
        if self.max_pattern_length < 1 {
            return Err(MiningError::MaxLength);
        }
        Ok(())
    }

    /// `count / total * 100 >= min_support_pct`, evaluated without division.
    pub fn is_frequent(&self, count: usize, total: usize) -> bool {
        count > 0 && count as f64 * 100.0 >= self.min_support_pct * total as f64
    }
}

/// Which selected set(s) a sequence was picked into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Membership {
    A,
    #[serde(rename = "AB")]
    Both,
    B,
}

impl Membership {
    pub fn in_a(self) -> bool {
        matches!(self, Membership::A | Membership::Both)
    }

    pub fn in_b(self) -> bool {
        matches!(self, Membership::B | Membership::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Pattern {
    pub events: Vec<String>,
    pub support_ids: BTreeSet<String>,
    pub support_pct: f64,
    pub count_a: usize,
    pub count_b: usize,
}

impl Pattern {
    pub fn support(&self) -> usize {
        self.support_ids.len()
    }
}

/// Result order: larger support first, then lexicographic event lists.
pub fn pattern_order(a: &Pattern, b: &Pattern) -> Ordering {
    b.support()
        .cmp(&a.support())
        .then_with(|| a.events.cmp(&b.events))
}

/// Gapped subsequence test: `p` occurs in `s` in order, not necessarily
/// contiguously. The empty pattern is contained everywhere.
pub fn is_subsequence<S: AsRef<str>>(p: &[S], s: &Sequence) -> bool {
    is_subsequence_of(p, s.types())
}

/// [`is_subsequence`] over any token stream.
pub fn is_subsequence_of<'a, S: AsRef<str>>(p: &[S], tokens: impl IntoIterator<Item = &'a str>) -> bool {
    let mut need = p.iter().peekable();
    for t in tokens {
        match need.peek() {
            None => return true,
            Some(x) if x.as_ref() == t => {
                need.next();
            }
            Some(_) => {}
        }
    }
    need.peek().is_none()
}

fn pattern_contains(longer: &[String], shorter: &[String]) -> bool {
    longer.len() >= shorter.len() && is_subsequence_of(shorter, longer.iter().map(String::as_str))
}

/// Position bitmap of one event type inside one sequence.
#[derive(Debug, Clone)]
struct Bitmap(Vec<u64>);

impl Bitmap {
    fn with_len(len: usize) -> Self {
        Bitmap(vec![0; len.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    /// Lowest set position strictly greater than `pos`.
    fn next_after(&self, pos: usize) -> Option<usize> {
        let start = pos + 1;
        let mut k = start / 64;
        if k >= self.0.len() {
            return None;
        }
        let shift = start % 64;
        let masked = self.0[k] & (u64::MAX << shift);
        if masked != 0 {
            return Some(k * 64 + masked.trailing_zeros() as usize);
        }
        k += 1;
        while k < self.0.len() {
            if self.0[k] != 0 {
                return Some(k * 64 + self.0[k].trailing_zeros() as usize);
            }
            k += 1;
        }
        None
    }
}

/// Vertical database: for every event type, the sequences containing it
/// with their position bitmaps.
struct Vertical {
    items: Vec<String>,
    /// `occurrences[item][seq]`, `None` when the item does not occur.
    occurrences: Vec<Vec<Option<Bitmap>>>,
}

impl Vertical {
    fn build(d: &Dataset) -> Vertical {
        let items: Vec<String> = d.alphabet().iter().cloned().collect();
        let slot: BTreeMap<&str, usize> = items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut occurrences = vec![vec![None; d.len()]; items.len()];
        for (si, s) in d.sequences().iter().enumerate() {
            for (pos, ty) in s.types().enumerate() {
                occurrences[slot[ty]][si]
                    .get_or_insert_with(|| Bitmap::with_len(s.len()))
                    .set(pos);
            }
        }
        Vertical { items, occurrences }
    }
}

/// (sequence index, earliest end position of the pattern in it)
type Projection = Vec<(usize, usize)>;

struct Search<'a> {
    vertical: &'a Vertical,
    cfg: &'a MiningConfig,
    total: usize,
    frequent_items: Vec<usize>,
    found: Vec<(Vec<usize>, Projection)>,
    progress: Option<&'a AtomicUsize>,
}

impl Search<'_> {
    fn extend(&self, projection: &Projection, item: usize) -> Projection {
        let occ = &self.vertical.occurrences[item];
        projection
            .iter()
            .filter_map(|&(seq, end)| occ[seq].as_ref()?.next_after(end).map(|p| (seq, p)))
            .collect()
    }

    fn dfs(&mut self, pattern: &mut Vec<usize>, projection: Projection) {
        if let Some(p) = self.progress {
            p.fetch_add(1, AtomicOrdering::Relaxed);
        }
        let mut has_frequent_child = false;
        if pattern.len() < self.cfg.max_pattern_length {
            for k in 0..self.frequent_items.len() {
                let item = self.frequent_items[k];
                let child = self.extend(&projection, item);
                if self.cfg.is_frequent(child.len(), self.total) {
                    has_frequent_child = true;
                    pattern.push(item);
                    self.dfs(pattern, child);
                    pattern.pop();
                }
            }
        }
        match self.cfg.mode {
            MiningMode::Frequent => self.found.push((pattern.clone(), projection)),
            MiningMode::Maximal if !has_frequent_child => self.offer_maximal(pattern, projection),
            MiningMode::Maximal => {}
        }
    }

    fn offer_maximal(&mut self, pattern: &[usize], projection: Projection) {
        let contains = |longer: &[usize], shorter: &[usize]| {
            longer.len() >= shorter.len() && is_item_subsequence(shorter, longer)
        };
        if self.found.iter().any(|(kept, _)| contains(kept, pattern)) {
            return;
        }
        self.found.retain(|(kept, _)| !contains(pattern, kept));
        self.found.push((pattern.to_vec(), projection));
    }
}

fn is_item_subsequence(p: &[usize], s: &[usize]) -> bool {
    let mut it = s.iter();
    p.iter().all(|x| it.any(|y| y == x))
}

/// Mines sequential patterns from `d` (the union of the two selected sets).
///
/// Counts per selected set are left at zero; see [`tag_support`].
pub fn mine(d: &Dataset, cfg: &MiningConfig) -> Result<Vec<Pattern>, MiningError> {
    mine_inner(d, cfg, None)
}

/// [`mine`], bumping `progress` once per visited search node.
pub fn mine_with_progress(d: &Dataset, cfg: &MiningConfig, progress: &AtomicUsize) -> Result<Vec<Pattern>, MiningError> {
    mine_inner(d, cfg, Some(progress))
}

fn mine_inner(d: &Dataset, cfg: &MiningConfig, progress: Option<&AtomicUsize>) -> Result<Vec<Pattern>, MiningError> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(MiningError::EmptyDataset);
    }
    let vertical = Vertical::build(d);
    let total = d.len();
    let first_occurrences: Vec<Projection> = vertical
        .occurrences
        .iter()
        .map(|occ| {
            occ.iter()
                .enumerate()
                .filter_map(|(seq, bm)| bm.as_ref().and_then(Bitmap::first).map(|p| (seq, p)))
                .collect()
        })
        .collect();
    // An infrequent event can never appear in a frequent pattern.
    let frequent_items: Vec<usize> = (0..vertical.items.len())
        .filter(|&i| cfg.is_frequent(first_occurrences[i].len(), total))
        .collect();

    let mut search = Search {
        vertical: &vertical,
        cfg,
        total,
        frequent_items: frequent_items.clone(),
        found: Vec::new(),
        progress,
    };
    for item in frequent_items {
        let mut pattern = vec![item];
        search.dfs(&mut pattern, first_occurrences[item].clone());
    }

    let ids: Vec<&str> = d.sequences().iter().map(|s| s.id.as_str()).collect();
    let mut out: Vec<Pattern> = search
        .found
        .into_iter()
        .map(|(items, projection)| {
            let support_ids: BTreeSet<String> = projection.iter().map(|&(seq, _)| ids[seq].to_string()).collect();
            Pattern {
                events: items.iter().map(|&i| vertical.items[i].clone()).collect(),
                support_pct: support_ids.len() as f64 * 100.0 / total as f64,
                support_ids,
                count_a: 0,
                count_b: 0,
            }
        })
        .collect();
    out.sort_by(pattern_order);
    Ok(out)
}

/// Exhaustive miner for small instances; shares no code path with [`mine`]
/// beyond the containment test.
pub fn brute_force_mine(d: &Dataset, cfg: &MiningConfig) -> Result<Vec<Pattern>, MiningError> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(MiningError::EmptyDataset);
    }
    if d.len() > BRUTE_FORCE_MAX_SEQUENCES {
        return Err(MiningError::TooLarge(format!("{} sequences", d.len())));
    }
    if let Some(s) = d.sequences().iter().find(|s| s.len() > BRUTE_FORCE_MAX_LENGTH) {
        return Err(MiningError::TooLarge(format!("sequence {:?} has {} events", s.id, s.len())));
    }
    if d.alphabet().len() > BRUTE_FORCE_MAX_ALPHABET {
        return Err(MiningError::TooLarge(format!("{} event types", d.alphabet().len())));
    }

    let mut candidates: BTreeSet<Vec<String>> = BTreeSet::new();
    for s in d.sequences() {
        let n = s.len();
        for mask in 1u32..(1 << n) {
            if mask.count_ones() as usize > cfg.max_pattern_length {
                continue;
            }
            let sub: Vec<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| s.event_type(i).to_string())
                .collect();
            candidates.insert(sub);
        }
    }

    let total = d.len();
    let frequent: Vec<Pattern> = candidates
        .into_iter()
        .filter_map(|events| {
            let support_ids: BTreeSet<String> = d
                .sequences()
                .iter()
                .filter(|s| is_subsequence(&events, s))
                .map(|s| s.id.clone())
                .collect();
            let pct = support_ids.len() as f64 * 100.0 / total as f64;
            cfg.is_frequent(support_ids.len(), total).then_some(Pattern {
                events,
                support_ids,
                support_pct: pct,
                count_a: 0,
                count_b: 0,
            })
        })
        .collect();

    let mut out: Vec<Pattern> = match cfg.mode {
        MiningMode::Frequent => frequent,
        MiningMode::Maximal => frequent
            .iter()
            .filter(|p| {
                !frequent
                    .iter()
                    .any(|q| q.events.len() > p.events.len() && pattern_contains(&q.events, &p.events))
            })
            .cloned()
            .collect(),
    };
    out.sort_by(pattern_order);
    Ok(out)
}

/// Fills `count_a` / `count_b` from a selection. A sequence selected into
/// both sets counts toward both.
pub fn tag_support(patterns: &[Pattern], selection: &Selection) -> Result<Vec<Pattern>, MiningError> {
    patterns
        .iter()
        .map(|p| {
            let mut out = p.clone();
            out.count_a = 0;
            out.count_b = 0;
            for id in &p.support_ids {
                let (a, b) = (selection.set_a.contains(id), selection.set_b.contains(id));
                if !a && !b {
                    return Err(MiningError::Orphan(id.clone()));
                }
                out.count_a += a as usize;
                out.count_b += b as usize;
            }
            Ok(out)
        })
        .collect()
}

/// Membership tag for every sequence of a selection.
pub fn memberships(selection: &Selection) -> BTreeMap<String, Membership> {
    let mut tags = BTreeMap::new();
    for id in &selection.set_a {
        tags.insert(id.clone(), Membership::A);
    }
    for id in &selection.set_b {
        tags.entry(id.clone())
            .and_modify(|m| *m = Membership::Both)
            .or_insert(Membership::B);
    }
    tags
}

/// Mines `d_union` and fills the per-set counts from `tags`.
pub fn mine_tagged(
    d_union: &Dataset,
    tags: &BTreeMap<String, Membership>,
    cfg: &MiningConfig,
) -> Result<Vec<Pattern>, MiningError> {
    if let Some(s) = d_union.sequences().iter().find(|s| !tags.contains_key(&s.id)) {
        return Err(MiningError::Untagged(s.id.clone()));
    }
    let mut patterns = mine(d_union, cfg)?;
    for p in &mut patterns {
        p.count_a = p.support_ids.iter().filter(|id| tags[*id].in_a()).count();
        p.count_b = p.support_ids.iter().filter(|id| tags[*id].in_b()).count();
    }
    Ok(patterns)
}
