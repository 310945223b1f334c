//! Dataset catalog and per-session analysis state.
//!
//! Everything here is synchronous and deterministic; the HTTP layer only
//! routes requests to these methods and serializes the results.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use seqcompare_core::affix::{Metric, SortOrder, DEFAULT_MAX_DEPTH};
use seqcompare_core::alignment::AlignmentView;
use seqcompare_core::dataset::{read_manifest_dir, Dataset, Stats};
use seqcompare_core::layout::{compute_layout, LayoutRequest, LayoutResult, PatternLayout, PatternUnits, Rect, SortKey, UnitLayout};
use seqcompare_core::matrix::{AffixIndex, Grid, LengthFilter, MatrixError, MatrixState, Pick, Selection, Transition};
use seqcompare_core::mining::{memberships, mine_with_progress, Membership, MiningConfig, MiningMode, Pattern};

use crate::error::ServiceError;

/// Loaded datasets plus a cache of affix indexes per length filter.
#[derive(Debug, Default)]
pub struct Catalog {
    datasets: BTreeMap<String, Arc<Dataset>>,
    indexes: Mutex<HashMap<(String, LengthFilter), Arc<AffixIndex>>>,
}

impl Catalog {
    pub fn new(datasets: impl IntoIterator<Item = (String, Dataset)>) -> Catalog {
        Catalog {
            datasets: datasets.into_iter().map(|(n, d)| (n, Arc::new(d))).collect(),
            indexes: Mutex::default(),
        }
    }

    /// Loads every manifest in `dir`. Manifests whose CSV cannot be read are
    /// skipped with a warning so one missing file does not take the
    /// service down.
    pub fn from_dir(dir: &Path) -> Result<Catalog, ServiceError> {
        let manifests = read_manifest_dir(dir).map_err(|e| ServiceError::Internal(e.to_string()))?;
        let mut datasets = Vec::new();
        for m in manifests {
            match m.load(dir) {
                Ok(d) => {
                    tracing::info!(name = %m.name, sequences = d.len(), "loaded dataset");
                    datasets.push((m.name, d));
                }
                Err(e) => tracing::warn!(name = %m.name, error = %e, "skipping dataset"),
            }
        }
        Ok(Catalog::new(datasets))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.datasets.keys().map(String::as_str)
    }

    pub fn dataset(&self, name: &str) -> Result<Arc<Dataset>, ServiceError> {
        self.datasets
            .get(name)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownDataset(name.to_string()))
    }

    pub fn index(&self, name: &str, filter: LengthFilter) -> Result<Arc<AffixIndex>, ServiceError> {
        let key = (name.to_string(), filter);
        if let Some(idx) = self.indexes.lock().unwrap().get(&key) {
            return Ok(idx.clone());
        }
        let dataset = self.dataset(name)?;
        let idx = Arc::new(AffixIndex::build(&dataset, filter, DEFAULT_MAX_DEPTH).map_err(unprocessable)?);
        self.indexes.lock().unwrap().insert(key, idx.clone());
        Ok(idx)
    }
}

fn unprocessable(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Unprocessable(e.to_string())
}

fn conflict(e: MatrixError) -> ServiceError {
    ServiceError::InvalidOp(e.to_string())
}

/// Progress of the current mining run, readable without the session lock.
#[derive(Debug, Default)]
pub struct MiningProgress {
    pub running: AtomicBool,
    pub visited: AtomicUsize,
    pub generation: AtomicU64,
    pub patterns: AtomicUsize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusResponse {
    pub mining: &'static str,
    pub nodes_visited: usize,
    pub generation: u64,
    pub pattern_count: usize,
}

impl MiningProgress {
    pub fn status(&self) -> StatusResponse {
        StatusResponse {
            mining: if self.running.load(Ordering::SeqCst) { "running" } else { "idle" },
            nodes_visited: self.visited.load(Ordering::SeqCst),
            generation: self.generation.load(Ordering::SeqCst),
            pattern_count: self.patterns.load(Ordering::SeqCst),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum MatrixOp {
    ExpandCell {
        #[serde(rename = "rowPath")]
        row_path: Vec<String>,
        #[serde(rename = "colPath")]
        col_path: Vec<String>,
    },
    ExpandRow {
        path: Vec<String>,
    },
    ExpandColumn {
        path: Vec<String>,
    },
    Collapse {
        axis: Axis,
        path: Vec<String>,
    },
    ExpandAllNextLevel,
    CollapseLevel,
    CollapseAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Axis {
    Row,
    Column,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixResponse {
    pub noop: bool,
    pub stats: Stats,
    pub grid: Grid,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateResponse {
    pub session_id: String,
    pub dataset: String,
    pub stats: Stats,
    pub filtered_stats: Stats,
    pub initial_grid: Grid,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionResponse {
    pub size_a: usize,
    pub size_b: usize,
    pub overlap: usize,
    pub provenance: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SupportJson {
    pub pct: f64,
    pub count: usize,
    pub count_a: usize,
    pub count_b: usize,
}

/// `{id, events, support:{pct,count,countA,countB}, sequenceIds}`
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternJson {
    pub id: String,
    pub events: Vec<String>,
    pub support: SupportJson,
    pub sequence_ids: Vec<String>,
}

impl PatternJson {
    fn new(id: &str, p: &Pattern) -> PatternJson {
        PatternJson {
            id: id.to_string(),
            events: p.events.clone(),
            support: SupportJson {
                pct: p.support_pct,
                count: p.support(),
                count_a: p.count_a,
                count_b: p.count_b,
            },
            sequence_ids: p.support_ids.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternsResponse {
    pub generation: u64,
    pub config: MiningConfig,
    pub patterns: Vec<PatternJson>,
    pub layout: LayoutResult,
}

/// Query of `GET /sessions/{id}/patterns`. Absent fields keep the session's
/// mining settings and the default layout.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternQuery {
    pub min_support: Option<f64>,
    pub mode: Option<MiningMode>,
    pub max_length: Option<usize>,
    pub pattern_layout: Option<PatternLayout>,
    pub unit_layout: Option<UnitLayout>,
    pub sort_key: Option<SortKey>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub padding: Option<f64>,
}

#[derive(Debug, Clone)]
struct PatternCache {
    config: MiningConfig,
    generation: u64,
    patterns: Vec<(String, Pattern)>,
    tags: BTreeMap<String, Membership>,
}

/// Persisted form of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSnapshot {
    pub id: String,
    pub dataset_name: String,
    pub matrix_state: MatrixState,
    pub selection: Option<Selection>,
    pub mining_config: MiningConfig,
    pub generation: u64,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    dataset_name: String,
    dataset: Arc<Dataset>,
    index: Arc<AffixIndex>,
    state: MatrixState,
    selection: Option<Selection>,
    mining: MiningConfig,
    cache: Option<PatternCache>,
    generation: u64,
}

impl Session {
    pub fn new(id: String, dataset_name: &str, catalog: &Catalog) -> Result<Session, ServiceError> {
        let dataset = catalog.dataset(dataset_name)?;
        let state = MatrixState::default();
        let index = catalog.index(dataset_name, state.length_filter)?;
        Ok(Session {
            id,
            dataset_name: dataset_name.to_string(),
            dataset,
            index,
            state,
            selection: None,
            mining: MiningConfig::default(),
            cache: None,
            generation: 0,
        })
    }

    pub fn restore(snapshot: SessionSnapshot, catalog: &Catalog) -> Result<Session, ServiceError> {
        let mut s = Session::new(snapshot.id, &snapshot.dataset_name, catalog)?;
        s.index = catalog.index(&snapshot.dataset_name, snapshot.matrix_state.length_filter)?;
        // validates the stored expansion against the rebuilt trees
        s.index.materialize(&snapshot.matrix_state).map_err(conflict)?;
        s.state = snapshot.matrix_state;
        s.selection = snapshot.selection;
        s.mining = snapshot.mining_config;
        s.generation = snapshot.generation;
        Ok(s)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            dataset_name: self.dataset_name.clone(),
            matrix_state: self.state.clone(),
            selection: self.selection.clone(),
            mining_config: self.mining,
            generation: self.generation,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> &MatrixState {
        &self.state
    }

    pub fn grid(&self) -> Result<Grid, ServiceError> {
        Ok(self.index.materialize(&self.state).map_err(conflict)?.grid)
    }

    pub fn created(&self) -> Result<CreateResponse, ServiceError> {
        Ok(CreateResponse {
            session_id: self.id.clone(),
            dataset: self.dataset_name.clone(),
            stats: self.dataset.stats(),
            filtered_stats: self.index.dataset.stats(),
            initial_grid: self.grid()?,
        })
    }

    fn respond(&self, noop: bool) -> Result<MatrixResponse, ServiceError> {
        Ok(MatrixResponse {
            noop,
            stats: self.index.dataset.stats(),
            grid: self.grid()?,
        })
    }

    pub fn matrix(&self) -> Result<MatrixResponse, ServiceError> {
        self.respond(false)
    }

    pub fn apply(&mut self, op: &MatrixOp) -> Result<MatrixResponse, ServiceError> {
        let idx = &self.index;
        let t: Transition = match op {
            MatrixOp::ExpandCell { row_path, col_path } => self.state.expand_cell(idx, row_path, col_path),
            MatrixOp::ExpandRow { path } => self.state.expand(&idx.suffix, path),
            MatrixOp::ExpandColumn { path } => self.state.expand(&idx.prefix, path),
            MatrixOp::Collapse { axis: Axis::Row, path } => self.state.collapse(&idx.suffix, path),
            MatrixOp::Collapse { axis: Axis::Column, path } => self.state.collapse(&idx.prefix, path),
            MatrixOp::ExpandAllNextLevel => self.state.expand_all_next_level(idx),
            MatrixOp::CollapseLevel => Ok(self.state.collapse_level()),
            MatrixOp::CollapseAll => Ok(self.state.collapse_all()),
        }
        .map_err(conflict)?;
        self.state = t.state;
        self.respond(t.noop)
    }

    pub fn sort(&mut self, metric: Metric, order: SortOrder) -> Result<MatrixResponse, ServiceError> {
        self.state = self.state.with_sort(metric, order);
        self.respond(false)
    }

    pub fn set_bar_metric(&mut self, metric: Metric) -> Result<MatrixResponse, ServiceError> {
        self.state.bar_metric = metric;
        self.respond(false)
    }

    /// Rebuilds both trees over the re-filtered dataset; expansion resets.
    pub fn filter(&mut self, catalog: &Catalog, min_len: usize, max_len: Option<usize>) -> Result<MatrixResponse, ServiceError> {
        let state = self.state.with_filter(min_len, max_len).map_err(unprocessable)?;
        self.index = catalog.index(&self.dataset_name, state.length_filter)?;
        self.state = state;
        self.respond(false)
    }

    pub fn select(&mut self, picks_a: &[Pick], picks_b: &[Pick]) -> Result<SelectionResponse, ServiceError> {
        let matrix = self.index.materialize(&self.state).map_err(conflict)?;
        let selection = matrix.select(picks_a, picks_b).map_err(unprocessable)?;
        if !selection.is_complete() {
            return Err(ServiceError::Unprocessable(selection.warnings.join("; ")));
        }
        let response = SelectionResponse {
            size_a: selection.set_a.len(),
            size_b: selection.set_b.len(),
            overlap: selection.overlap.len(),
            provenance: selection.provenance.clone(),
            warnings: selection.warnings.clone(),
        };
        self.selection = Some(selection);
        self.cache = None;
        Ok(response)
    }

    /// Mines (or reuses the cached result for an unchanged selection and
    /// mining configuration) and lays the patterns out.
    pub fn patterns(&mut self, q: &PatternQuery, progress: &MiningProgress) -> Result<PatternsResponse, ServiceError> {
        let selection = self.selection.as_ref().ok_or(ServiceError::NoSelection)?;
        let config = MiningConfig {
            min_support_pct: q.min_support.unwrap_or(self.mining.min_support_pct),
            max_pattern_length: q.max_length.unwrap_or(self.mining.max_pattern_length),
            mode: q.mode.unwrap_or(self.mining.mode),
        };
        config.validate().map_err(unprocessable)?;

        let fresh = self.cache.as_ref().is_some_and(|c| c.config == config);
        if !fresh {
            let tags = memberships(selection);
            let index = self.dataset.index();
            let union = self.dataset.subset(tags.keys().filter_map(|id| index.get(id.as_str()).copied()));
            progress.running.store(true, Ordering::SeqCst);
            progress.visited.store(0, Ordering::SeqCst);
            let mined = mine_with_progress(&union, &config, &progress.visited);
            progress.running.store(false, Ordering::SeqCst);
            let mut mined = mined.map_err(unprocessable)?;
            for p in &mut mined {
                p.count_a = p.support_ids.iter().filter(|id| tags[*id].in_a()).count();
                p.count_b = p.support_ids.iter().filter(|id| tags[*id].in_b()).count();
            }
            self.generation += 1;
            let generation = self.generation;
            progress.generation.store(generation, Ordering::SeqCst);
            progress.patterns.store(mined.len(), Ordering::SeqCst);
            self.mining = config;
            self.cache = Some(PatternCache {
                config,
                generation,
                patterns: mined
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| (format!("g{generation}-p{}", i + 1), p))
                    .collect(),
                tags,
            });
        }
        let cache = self.cache.as_ref().expect("cache filled above");

        let defaults = LayoutRequest::default();
        let request = LayoutRequest {
            canvas: Rect::new(0.0, 0.0, q.width.unwrap_or(defaults.canvas.width), q.height.unwrap_or(defaults.canvas.height)),
            pattern_layout: q.pattern_layout.unwrap_or(defaults.pattern_layout),
            unit_layout: q.unit_layout.unwrap_or(defaults.unit_layout),
            sort_key: q.sort_key.unwrap_or(defaults.sort_key),
            padding_px: q.padding.unwrap_or(defaults.padding_px),
            ..defaults
        };
        let units = cache
            .patterns
            .iter()
            .map(|(id, p)| PatternUnits::from_pattern(id.clone(), p, &cache.tags))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        let layout = compute_layout(&units, &request).map_err(unprocessable)?;
        Ok(PatternsResponse {
            generation: cache.generation,
            config: cache.config,
            patterns: cache.patterns.iter().map(|(id, p)| PatternJson::new(id, p)).collect(),
            layout,
        })
    }

    pub fn sequences(&self, pid: &str, align_event: Option<&str>) -> Result<AlignmentView, ServiceError> {
        let cache = self.cache.as_ref().ok_or_else(|| ServiceError::UnknownPattern(pid.to_string()))?;
        let (_, pattern) = cache
            .patterns
            .iter()
            .find(|(id, _)| id == pid)
            .ok_or_else(|| ServiceError::UnknownPattern(pid.to_string()))?;
        let support = pattern.support_ids.iter().map(|sid| {
            let seq = self.dataset.get(sid).expect("support ids come from the dataset");
            (seq, cache.tags[sid])
        });
        let view = AlignmentView::new(pid, &pattern.events, support);
        view.align_by(align_event).map_err(unprocessable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqcompare_core::matrix::HeaderRef;

    fn catalog() -> Catalog {
        let d = Dataset::from_type_lists(&[
            vec!["a", "b", "c"],
            vec!["a", "b", "c", "c"],
            vec!["a", "x", "c"],
            vec!["b", "y", "d"],
            vec!["b", "b", "d"],
            vec!["b", "y", "y", "d"],
        ]);
        Catalog::new([("t".to_string(), d)])
    }

    fn cell(r: &str, c: &str) -> Pick {
        Pick::Cell {
            row: HeaderRef::node(&[r]),
            column: HeaderRef::node(&[c]),
        }
    }

    #[test]
    fn pattern_cache_survives_layout_changes() {
        let cat = catalog();
        let mut s = Session::new("s1".into(), "t", &cat).unwrap();
        assert!(matches!(s.patterns(&PatternQuery::default(), &MiningProgress::default()), Err(ServiceError::NoSelection)));
        s.select(&[cell("c", "a")], &[cell("d", "b")]).unwrap();
        let progress = MiningProgress::default();
        let first = s.patterns(&PatternQuery::default(), &progress).unwrap();
        let q = PatternQuery {
            pattern_layout: Some(PatternLayout::Filly),
            ..Default::default()
        };
        let second = s.patterns(&q, &progress).unwrap();
        assert_eq!(first.generation, second.generation);
        assert_eq!(
            serde_json::to_string(&first.patterns).unwrap(),
            serde_json::to_string(&second.patterns).unwrap()
        );
        assert_eq!(progress.status().generation, 1);

        s.select(&[cell("c", "a")], &[cell("d", "b")]).unwrap();
        let third = s.patterns(&PatternQuery::default(), &progress).unwrap();
        assert_ne!(third.generation, first.generation);
        assert!(s.sequences(&first.patterns[0].id, None).is_err());
        assert!(s.sequences(&third.patterns[0].id, None).is_ok());
    }

    #[test]
    fn snapshot_round_trip() {
        let cat = catalog();
        let mut s = Session::new("s7".into(), "t", &cat).unwrap();
        s.apply(&MatrixOp::ExpandColumn { path: vec!["a".into()] }).unwrap();
        s.select(&[cell("c", "a")], &[cell("d", "b")]).unwrap_err();
        let snap = s.snapshot();
        let restored = Session::restore(snap.clone(), &cat).unwrap();
        assert_eq!(restored.snapshot(), snap);
        assert_eq!(restored.grid().unwrap(), s.grid().unwrap());
    }

    #[test]
    fn filter_rebuilds_trees() {
        let cat = catalog();
        let mut s = Session::new("s1".into(), "t", &cat).unwrap();
        let r = s.filter(&cat, 4, None).unwrap();
        assert_eq!(r.stats.count, 2);
        assert!(s.filter(&cat, 4, Some(3)).is_err());
    }
}
