//! The prefix x suffix matrix: interaction state, grid materialization and
//! set selection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affix::{AffixError, AffixTree, FrontierItem, Metric, SortOrder, TreeKind, DEFAULT_MAX_DEPTH};
use crate::dataset::{Dataset, DatasetError, DEFAULT_MIN_LEN};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Tree(#[from] AffixError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{axis} {path:?} is not a visible header")]
    UnknownHeader { axis: &'static str, path: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LengthFilter {
    pub min_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
}

impl Default for LengthFilter {
    fn default() -> Self {
        LengthFilter {
            min_len: DEFAULT_MIN_LEN,
            max_len: None,
        }
    }
}

/// Everything that determines the visible matrix besides the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixState {
    pub expanded_prefix: BTreeSet<Vec<String>>,
    pub expanded_suffix: BTreeSet<Vec<String>>,
    pub sort_metric: Metric,
    pub sort_order: SortOrder,
    pub length_filter: LengthFilter,
    pub bar_metric: Metric,
}

impl Default for MatrixState {
    /// Level-one frontier on both axes, default length filter.
    fn default() -> Self {
        let root: BTreeSet<Vec<String>> = [Vec::new()].into();
        MatrixState {
            expanded_prefix: root.clone(),
            expanded_suffix: root,
            sort_metric: Metric::Count,
            sort_order: SortOrder::None,
            length_filter: LengthFilter::default(),
            bar_metric: Metric::Count,
        }
    }
}

/// Result of a state transition. `noop` is set when nothing could change,
/// e.g. when the target is a leaf or already expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub state: MatrixState,
    pub noop: bool,
}

/// Whether `path` lies in the subtree rooted at `ancestor` (inclusive).
fn within(kind: TreeKind, ancestor: &[String], path: &[String]) -> bool {
    match kind {
        TreeKind::Prefix => path.starts_with(ancestor),
        TreeKind::Suffix => path.ends_with(ancestor),
    }
}

impl MatrixState {
    pub fn expanded(&self, kind: TreeKind) -> &BTreeSet<Vec<String>> {
        match kind {
            TreeKind::Prefix => &self.expanded_prefix,
            TreeKind::Suffix => &self.expanded_suffix,
        }
    }

    fn expanded_mut(&mut self, kind: TreeKind) -> &mut BTreeSet<Vec<String>> {
        match kind {
            TreeKind::Prefix => &mut self.expanded_prefix,
            TreeKind::Suffix => &mut self.expanded_suffix,
        }
    }

    /// Adds `path` to the expansion set of its tree. Leaves and already
    /// expanded nodes are no-ops.
    pub fn expand(&self, tree: &AffixTree, path: &[String]) -> Result<Transition, MatrixError> {
        let kind = tree.kind();
        let id = tree.require(path)?;
        let set = self.expanded(kind);
        if let Some(parent) = tree.node(id).parent {
            if !set.contains(&tree.path(parent)) {
                return Err(AffixError::NotVisible {
                    kind,
                    path: path.to_vec(),
                }
                .into());
            }
        }
        let mut state = self.clone();
        let noop = tree.node(id).is_leaf() || set.contains(path);
        if !noop {
            state.expanded_mut(kind).insert(path.to_vec());
        }
        Ok(Transition { state, noop })
    }

    /// Expands the row (suffix) and column (prefix) of a cell together.
    pub fn expand_cell(
        &self,
        index: &AffixIndex,
        row_path: &[String],
        col_path: &[String],
    ) -> Result<Transition, MatrixError> {
        let col = self.expand(&index.prefix, col_path)?;
        let row = col.state.expand(&index.suffix, row_path)?;
        Ok(Transition {
            state: row.state,
            noop: col.noop && row.noop,
        })
    }

    /// Removes `path` and all its descendants from the expansion set.
    pub fn collapse(&self, tree: &AffixTree, path: &[String]) -> Result<Transition, MatrixError> {
        let kind = tree.kind();
        tree.require(path)?;
        let mut state = self.clone();
        let set = state.expanded_mut(kind);
        let before = set.len();
        set.retain(|p| !within(kind, path, p));
        let noop = set.len() == before;
        Ok(Transition { state, noop })
    }

    /// Expands every visible node that has children, on both axes.
    pub fn expand_all_next_level(&self, index: &AffixIndex) -> Result<Transition, MatrixError> {
        let mut state = self.clone();
        let mut noop = true;
        for tree in [&index.prefix, &index.suffix] {
            let frontier = tree.visible_frontier(self.expanded(tree.kind()))?;
            for item in frontier {
                if !item.residual && !tree.node(item.node).is_leaf() {
                    noop &= !state.expanded_mut(tree.kind()).insert(tree.path(item.node));
                }
            }
        }
        Ok(Transition { state, noop })
    }

    /// Folds the deepest expanded level on both axes (never the root).
    pub fn collapse_level(&self) -> Transition {
        let mut state = self.clone();
        let mut noop = true;
        for kind in [TreeKind::Prefix, TreeKind::Suffix] {
            let set = state.expanded_mut(kind);
            let deepest = set.iter().map(Vec::len).max().unwrap_or(0);
            if deepest > 0 {
                set.retain(|p| p.len() < deepest);
                noop = false;
            }
        }
        Transition { state, noop }
    }

    /// Back to the level-one frontier, keeping sort and filter settings.
    pub fn collapse_all(&self) -> Transition {
        let defaults = MatrixState::default();
        let state = MatrixState {
            expanded_prefix: defaults.expanded_prefix,
            expanded_suffix: defaults.expanded_suffix,
            ..self.clone()
        };
        let noop = state == *self;
        Transition { state, noop }
    }

    pub fn with_sort(&self, metric: Metric, order: SortOrder) -> MatrixState {
        MatrixState {
            sort_metric: metric,
            sort_order: order,
            ..self.clone()
        }
    }

    /// New length filter; expansion resets to level one since the trees
    /// are rebuilt.
    pub fn with_filter(&self, min_len: usize, max_len: Option<usize>) -> Result<MatrixState, MatrixError> {
        if min_len < 1 || max_len.is_some_and(|m| m < min_len) {
            return Err(DatasetError::LengthRange { min: min_len, max: max_len }.into());
        }
        let defaults = MatrixState::default();
        Ok(MatrixState {
            expanded_prefix: defaults.expanded_prefix,
            expanded_suffix: defaults.expanded_suffix,
            length_filter: LengthFilter { min_len, max_len },
            ..self.clone()
        })
    }
}

/// The length-filtered dataset together with its prefix and suffix trees.
#[derive(Debug, Clone)]
pub struct AffixIndex {
    pub dataset: Dataset,
    pub prefix: AffixTree,
    pub suffix: AffixTree,
}

impl AffixIndex {
    pub fn build(full: &Dataset, filter: LengthFilter, max_depth: usize) -> Result<AffixIndex, MatrixError> {
        let dataset = full.filter_by_length(filter.min_len, filter.max_len)?;
        Ok(Self::from_filtered(dataset, max_depth))
    }

    pub fn from_filtered(dataset: Dataset, max_depth: usize) -> AffixIndex {
        let prefix = AffixTree::prefix(&dataset, max_depth);
        let suffix = AffixTree::suffix(&dataset, max_depth);
        AffixIndex { dataset, prefix, suffix }
    }

    pub fn with_defaults(full: &Dataset) -> Result<AffixIndex, MatrixError> {
        Self::build(full, LengthFilter::default(), DEFAULT_MAX_DEPTH)
    }

    pub fn tree(&self, kind: TreeKind) -> &AffixTree {
        match kind {
            TreeKind::Prefix => &self.prefix,
            TreeKind::Suffix => &self.suffix,
        }
    }

    /// Builds the visible grid for `state`.
    pub fn materialize(&self, state: &MatrixState) -> Result<Matrix, MatrixError> {
        let prefix = self.prefix.sorted(state.sort_metric, state.sort_order);
        let suffix = self.suffix.sorted(state.sort_metric, state.sort_order);
        let col_items = prefix.visible_frontier(&state.expanded_prefix)?;
        let row_items = suffix.visible_frontier(&state.expanded_suffix)?;
        let lengths: Vec<usize> = self.dataset.sequences().iter().map(|s| s.len()).collect();

        let headers = |tree: &AffixTree, items: &[FrontierItem]| -> (Vec<Header>, Vec<Vec<usize>>) {
            items
                .iter()
                .map(|&item| {
                    let members = tree.item_members(item).to_vec();
                    let header = Header {
                        path: tree.path(item.node),
                        residual: item.residual,
                        summary: Summary::of(&members, &lengths),
                    };
                    (header, members)
                })
                .unzip()
        };
        let (columns, column_members) = headers(&prefix, &col_items);
        let (rows, row_members) = headers(&suffix, &row_items);

        let cells: Vec<Vec<Summary>> = row_members
            .iter()
            .map(|r| {
                column_members
                    .iter()
                    .map(|c| Summary::of(&intersect(r, c), &lengths))
                    .collect()
            })
            .collect();
        let max_cell_count = cells.iter().flatten().map(|c| c.count).max().unwrap_or(0);

        Ok(Matrix {
            grid: Grid {
                columns,
                rows,
                cells,
                max_cell_count,
            },
            row_members,
            column_members,
            ids: self.dataset.sequences().iter().map(|s| s.id.clone()).collect(),
        })
    }
}

/// Intersection of two ascending position lists.
pub fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub count: usize,
    pub avg_length: f64,
}

impl Summary {
    fn of(members: &[usize], lengths: &[usize]) -> Summary {
        let count = members.len();
        let avg_length = if count == 0 {
            0.0
        } else {
            members.iter().map(|&m| lengths[m]).sum::<usize>() as f64 / count as f64
        };
        Summary { count, avg_length }
    }
}

/// A visible row or column. Suffix paths are end-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Header {
    pub path: Vec<String>,
    /// Set for the residual entry of an expanded node: the sequences that
    /// are exactly `path`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub residual: bool,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Serializable grid: `{columns, rows, cells, maxCellCount}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Grid {
    pub columns: Vec<Header>,
    pub rows: Vec<Header>,
    pub cells: Vec<Vec<Summary>>,
    pub max_cell_count: usize,
}

/// A grid plus the member sets behind each header.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub grid: Grid,
    pub row_members: Vec<Vec<usize>>,
    pub column_members: Vec<Vec<usize>>,
    ids: Vec<String>,
}

/// Reference to a visible header by path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderRef {
    pub path: Vec<String>,
    #[serde(default)]
    pub residual: bool,
}

impl HeaderRef {
    pub fn node(path: &[&str]) -> HeaderRef {
        HeaderRef {
            path: path.iter().map(|s| s.to_string()).collect(),
            residual: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum Pick {
    Cell { row: HeaderRef, column: HeaderRef },
    Row { row: HeaderRef },
    Column { column: HeaderRef },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Selection {
    pub set_a: BTreeSet<String>,
    pub set_b: BTreeSet<String>,
    /// Ids present in both sets.
    pub overlap: BTreeSet<String>,
    pub provenance: Vec<String>,
    pub warnings: Vec<String>,
}

impl Selection {
    pub fn is_complete(&self) -> bool {
        !self.set_a.is_empty() && !self.set_b.is_empty()
    }
}

impl Matrix {
    fn find_header(headers: &[Header], r: &HeaderRef, axis: &'static str) -> Result<usize, MatrixError> {
        headers
            .iter()
            .position(|h| h.path == r.path && h.residual == r.residual)
            .ok_or_else(|| MatrixError::UnknownHeader {
                axis,
                path: r.path.clone(),
            })
    }

    pub fn row_index(&self, r: &HeaderRef) -> Result<usize, MatrixError> {
        Self::find_header(&self.grid.rows, r, "row")
    }

    pub fn column_index(&self, r: &HeaderRef) -> Result<usize, MatrixError> {
        Self::find_header(&self.grid.columns, r, "column")
    }

    pub fn cell_members(&self, row: usize, col: usize) -> Vec<usize> {
        intersect(&self.row_members[row], &self.column_members[col])
    }

    /// Dataset positions covered by one pick.
    pub fn resolve(&self, pick: &Pick) -> Result<Vec<usize>, MatrixError> {
        Ok(match pick {
            Pick::Cell { row, column } => self.cell_members(self.row_index(row)?, self.column_index(column)?),
            Pick::Row { row } => self.row_members[self.row_index(row)?].clone(),
            Pick::Column { column } => self.column_members[self.column_index(column)?].clone(),
        })
    }

    fn describe(pick: &Pick) -> String {
        let p = |h: &HeaderRef| {
            format!("[{}]{}", h.path.join(","), if h.residual { "$" } else { "" })
        };
        match pick {
            Pick::Cell { row, column } => format!("cell(row {}, column {})", p(row), p(column)),
            Pick::Row { row } => format!("row {}", p(row)),
            Pick::Column { column } => format!("column {}", p(column)),
        }
    }

    /// Unions each pick group into a sequence-id set. Empty groups produce a
    /// warning; ids in both sets are kept in both and reported as overlap.
    pub fn select(&self, picks_a: &[Pick], picks_b: &[Pick]) -> Result<Selection, MatrixError> {
        let mut provenance = Vec::new();
        let mut warnings = Vec::new();
        let mut gather = |picks: &[Pick], label: &str| -> Result<BTreeSet<String>, MatrixError> {
            let mut set = BTreeSet::new();
            for pick in picks {
                let members = self.resolve(pick)?;
                let what = Self::describe(pick);
                if members.is_empty() {
                    warnings.push(format!("{label}: {what} is empty"));
                }
                provenance.push(format!("{label}: {what}"));
                set.extend(members.into_iter().map(|m| self.ids[m].clone()));
            }
            if set.is_empty() {
                warnings.push(format!("set {label} is empty"));
            }
            Ok(set)
        };
        let set_a = gather(picks_a, "A")?;
        let set_b = gather(picks_b, "B")?;
        let overlap: BTreeSet<String> = set_a.intersection(&set_b).cloned().collect();
        if !overlap.is_empty() {
            warnings.push(format!("{} sequence(s) selected in both sets", overlap.len()));
        }
        Ok(Selection {
            set_a,
            set_b,
            overlap,
            provenance,
            warnings,
        })
    }

    /// Sequence ids by dataset position.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}
