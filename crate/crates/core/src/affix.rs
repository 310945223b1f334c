//! Prefix and suffix tries over a dataset.
//!
//! A node at depth `k` groups the sequences whose first (prefix tree) or last
//! (suffix tree) `k` events match the node's path. Suffix paths are always
//! written end-aligned: the last element is the final event of the sequence.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

pub const DEFAULT_MAX_DEPTH: usize = 10;

pub type NodeId = usize;
pub const ROOT: NodeId = 0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AffixError {
    #[error("{kind:?} path {path:?} is not in the tree")]
    UnknownPath { kind: TreeKind, path: Vec<String> },
    #[error("{kind:?} path {path:?} is not visible: its parent is collapsed")]
    NotVisible { kind: TreeKind, path: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TreeKind {
    Prefix,
    Suffix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    #[default]
    Count,
    AvgLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SortOrder {
    Ascending,
    Descending,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffixNode {
    /// `None` only for the root.
    pub event_type: Option<String>,
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Dataset positions, ascending.
    pub members: Vec<usize>,
    /// Members whose sequence ends exactly at this depth.
    pub terminal: Vec<usize>,
    pub avg_length: f64,
    first_touch: usize,
}

impl AffixNode {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Count => self.count() as f64,
            Metric::AvgLength => self.avg_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffixTree {
    kind: TreeKind,
    max_depth: usize,
    nodes: Vec<AffixNode>,
}

fn mean_length(members: &[usize], lengths: &[usize]) -> f64 {
    if members.is_empty() {
        0.0
    } else {
        members.iter().map(|&m| lengths[m]).sum::<usize>() as f64 / members.len() as f64
    }
}

impl AffixTree {
    pub fn build(d: &Dataset, kind: TreeKind, max_depth: usize) -> AffixTree {
        let max_depth = max_depth.max(1);
        let lengths: Vec<usize> = d.sequences().iter().map(|s| s.len()).collect();
        let mut nodes = vec![AffixNode {
            event_type: None,
            depth: 0,
            parent: None,
            children: Vec::new(),
            members: (0..d.len()).collect(),
            terminal: Vec::new(),
            avg_length: 0.0,
            first_touch: 0,
        }];
        let mut child_of: HashMap<(NodeId, &str), NodeId> = HashMap::new();

        for (pos, seq) in d.sequences().iter().enumerate() {
            let walk: Box<dyn Iterator<Item = &str>> = match kind {
                TreeKind::Prefix => Box::new(seq.types()),
                TreeKind::Suffix => Box::new(seq.types().rev()),
            };
            let mut cur = ROOT;
            for (k, ty) in walk.take(max_depth).enumerate() {
                let next = match child_of.get(&(cur, ty)) {
                    Some(&n) => n,
                    None => {
                        let id = nodes.len();
                        nodes.push(AffixNode {
                            event_type: Some(ty.to_string()),
                            depth: k + 1,
                            parent: Some(cur),
                            children: Vec::new(),
                            members: Vec::new(),
                            terminal: Vec::new(),
                            avg_length: 0.0,
                            first_touch: id,
                        });
                        nodes[cur].children.push(id);
                        child_of.insert((cur, ty), id);
                        id
                    }
                };
                nodes[next].members.push(pos);
                cur = next;
            }
            if seq.len() <= max_depth {
                nodes[cur].terminal.push(pos);
            }
        }
        for n in &mut nodes {
            n.avg_length = mean_length(&n.members, &lengths);
        }
        AffixTree {
            kind,
            max_depth,
            nodes,
        }
    }

    pub fn prefix(d: &Dataset, max_depth: usize) -> AffixTree {
        Self::build(d, TreeKind::Prefix, max_depth)
    }

    pub fn suffix(d: &Dataset, max_depth: usize) -> AffixTree {
        Self::build(d, TreeKind::Suffix, max_depth)
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn root(&self) -> &AffixNode {
        &self.nodes[ROOT]
    }

    pub fn node(&self, id: NodeId) -> &AffixNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1 && self.nodes[ROOT].members.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.nodes.len()
    }

    pub fn child(&self, id: NodeId, event_type: &str) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].event_type.as_deref() == Some(event_type))
    }

    /// Looks a node up by its display path (end-aligned for suffix trees).
    pub fn find(&self, path: &[String]) -> Option<NodeId> {
        let mut cur = ROOT;
        let step = |cur: NodeId, ty: &String| self.child(cur, ty);
        match self.kind {
            TreeKind::Prefix => {
                for ty in path {
                    cur = step(cur, ty)?;
                }
            }
            TreeKind::Suffix => {
                for ty in path.iter().rev() {
                    cur = step(cur, ty)?;
                }
            }
        }
        Some(cur)
    }

    pub fn require(&self, path: &[String]) -> Result<NodeId, AffixError> {
        self.find(path).ok_or_else(|| AffixError::UnknownPath {
            kind: self.kind,
            path: path.to_vec(),
        })
    }

    /// Display path of a node (end-aligned for suffix trees).
    pub fn path(&self, id: NodeId) -> Vec<String> {
        let mut walk = Vec::with_capacity(self.nodes[id].depth);
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            walk.push(self.nodes[cur].event_type.clone().unwrap_or_default());
            cur = p;
        }
        // `walk` runs leaf-to-root; prefix paths read root-to-leaf.
        if self.kind == TreeKind::Prefix {
            walk.reverse();
        }
        walk
    }

    /// Returns a copy with every sibling list reordered by `metric`.
    ///
    /// Ties fall back to event-type order; `SortOrder::None` restores
    /// first-touch order. Only sibling order changes.
    pub fn sorted(&self, metric: Metric, order: SortOrder) -> AffixTree {
        let mut out = self.clone();
        for id in 0..out.nodes.len() {
            let mut children = std::mem::take(&mut out.nodes[id].children);
            children.sort_by(|&a, &b| self.compare_siblings(a, b, metric, order));
            out.nodes[id].children = children;
        }
        out
    }

    fn compare_siblings(&self, a: NodeId, b: NodeId, metric: Metric, order: SortOrder) -> Ordering {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let by_metric = match order {
            SortOrder::None => return na.first_touch.cmp(&nb.first_touch),
            SortOrder::Ascending => na.metric(metric).total_cmp(&nb.metric(metric)),
            SortOrder::Descending => nb.metric(metric).total_cmp(&na.metric(metric)),
        };
        by_metric.then_with(|| na.event_type.cmp(&nb.event_type))
    }

    /// Resolves an expansion set to node ids, checking ancestor closure.
    pub fn resolve_expanded(&self, expanded: &BTreeSet<Vec<String>>) -> Result<BTreeSet<NodeId>, AffixError> {
        let mut ids = BTreeSet::new();
        for path in expanded {
            let id = self.require(path)?;
            if let Some(parent) = self.nodes[id].parent {
                let parent_path = self.path(parent);
                if !expanded.contains(&parent_path) {
                    return Err(AffixError::NotVisible {
                        kind: self.kind,
                        path: path.clone(),
                    });
                }
            }
            ids.insert(id);
        }
        Ok(ids)
    }

    /// Visible nodes for an expansion state, depth first in sibling order.
    ///
    /// An expanded node contributes its residual (the sequences ending at
    /// its depth) ahead of its children, so frontier counts always sum to
    /// the dataset size. With nothing expanded the root alone is visible.
    pub fn visible_frontier(&self, expanded: &BTreeSet<Vec<String>>) -> Result<Vec<FrontierItem>, AffixError> {
        let ids = self.resolve_expanded(expanded)?;
        let mut out = Vec::new();
        self.walk_frontier(ROOT, &ids, &mut out);
        Ok(out)
    }

    fn walk_frontier(&self, id: NodeId, expanded: &BTreeSet<NodeId>, out: &mut Vec<FrontierItem>) {
        let node = &self.nodes[id];
        if !expanded.contains(&id) || node.is_leaf() {
            out.push(FrontierItem { node: id, residual: false });
            return;
        }
        if !node.terminal.is_empty() {
            out.push(FrontierItem { node: id, residual: true });
        }
        for &c in &node.children {
            self.walk_frontier(c, expanded, out);
        }
    }

    pub fn item_members(&self, item: FrontierItem) -> &[usize] {
        let n = &self.nodes[item.node];
        if item.residual {
            &n.terminal
        } else {
            &n.members
        }
    }
}

/// A visible row or column: a tree node, or the residual of an expanded node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrontierItem {
    pub node: NodeId,
    pub residual: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(v: &[&[&str]]) -> BTreeSet<Vec<String>> {
        v.iter()
            .map(|p| p.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn sv(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn sample() -> Dataset {
        Dataset::from_type_lists(&[
            vec!["a", "b", "c"],
            vec!["a", "b", "d"],
            vec!["a", "c"],
            vec!["b", "c"],
        ])
    }

    fn level1(t: &AffixTree) -> Vec<(String, usize)> {
        t.root()
            .children
            .iter()
            .map(|&c| (t.node(c).event_type.clone().unwrap(), t.node(c).count()))
            .collect()
    }

    #[test]
    fn prefix_tree_level_counts() {
        let t = AffixTree::prefix(&sample(), 10);
        assert_eq!(level1(&t), [("a".into(), 3), ("b".into(), 1)]);
        let ab = t.find(&sv(&["a", "b"])).unwrap();
        assert_eq!(t.node(ab).count(), 2);
        assert_eq!(t.path(ab), sv(&["a", "b"]));
    }

    #[test]
    fn suffix_tree_level_counts() {
        let t = AffixTree::suffix(&sample(), 10);
        assert_eq!(level1(&t), [("c".into(), 3), ("d".into(), 1)]);
        let bc = t.find(&sv(&["b", "c"])).unwrap();
        assert_eq!(t.node(bc).members, [0, 3]);
        assert_eq!(t.path(bc), sv(&["b", "c"]));
    }

    #[test]
    fn degenerate_trees() {
        let t = AffixTree::prefix(&Dataset::default(), 10);
        assert_eq!(t.len(), 1);
        assert_eq!(t.root().count(), 0);
        let t = AffixTree::prefix(&Dataset::from_type_lists(&[vec!["x"]]), 10);
        assert_eq!(level1(&t), [("x".into(), 1)]);
    }

    #[test]
    fn truncates_at_max_depth() {
        let t = AffixTree::prefix(&sample(), 1);
        assert_eq!(t.len(), 3);
        assert!(t.node_ids().all(|i| t.node(i).depth <= 1));
    }

    #[test]
    fn frontier_expansions() {
        let t = AffixTree::prefix(&sample(), 10);
        let f = t.visible_frontier(&paths(&[&[]])).unwrap();
        let got: Vec<_> = f.iter().map(|i| t.path(i.node)).collect();
        assert_eq!(got, [sv(&["a"]), sv(&["b"])]);

        let f = t.visible_frontier(&paths(&[&[], &["a"]])).unwrap();
        let got: Vec<_> = f.iter().map(|i| t.path(i.node)).collect();
        assert_eq!(got, [sv(&["a", "b"]), sv(&["a", "c"]), sv(&["b"])]);
        assert!(f.iter().all(|i| !i.residual));

        assert_eq!(t.visible_frontier(&BTreeSet::new()).unwrap(), [FrontierItem { node: ROOT, residual: false }]);
    }

    #[test]
    fn residual_for_terminating_sequences() {
        let mut lists = vec![
            vec!["a", "b", "c"],
            vec!["a", "b", "d"],
            vec!["a", "c"],
            vec!["b", "c"],
        ];
        lists.push(vec!["a"]);
        let d = Dataset::from_type_lists(&lists);
        let t = AffixTree::prefix(&d, 10);
        let f = t.visible_frontier(&paths(&[&[], &["a"]])).unwrap();
        assert_eq!(f[0], FrontierItem { node: t.find(&sv(&["a"])).unwrap(), residual: true });
        assert_eq!(t.item_members(f[0]), [4]);
        let total: usize = f.iter().map(|&i| t.item_members(i).len()).sum();
        assert_eq!(total, d.len());
    }

    #[test]
    fn frontier_rejects_bad_state() {
        let t = AffixTree::prefix(&sample(), 10);
        assert!(matches!(
            t.visible_frontier(&paths(&[&[], &["z"]])),
            Err(AffixError::UnknownPath { .. })
        ));
        assert!(matches!(
            t.visible_frontier(&paths(&[&[], &["a", "b"]])),
            Err(AffixError::NotVisible { .. })
        ));
    }

    #[test]
    fn sibling_sort() {
        let t = AffixTree::prefix(&sample(), 10);
        let asc = t.sorted(Metric::Count, SortOrder::Ascending);
        assert_eq!(level1(&asc), [("b".into(), 1), ("a".into(), 3)]);
        let desc = asc.sorted(Metric::Count, SortOrder::Descending);
        assert_eq!(level1(&desc), [("a".into(), 3), ("b".into(), 1)]);
        // [a,b] stays under [a]
        let ab = desc.find(&sv(&["a", "b"])).unwrap();
        assert_eq!(desc.path(desc.node(ab).parent.unwrap()), sv(&["a"]));
        assert_eq!(desc.sorted(Metric::Count, SortOrder::None), t);

        let tie = AffixTree::prefix(&Dataset::from_type_lists(&[vec!["y"], vec!["x"], vec!["y"], vec!["x"]]), 10);
        let s = tie.sorted(Metric::Count, SortOrder::Descending);
        assert_eq!(level1(&s), [("x".into(), 2), ("y".into(), 2)]);
    }

    #[test]
    fn avg_length_metric() {
        let t = AffixTree::prefix(&sample(), 10);
        let a = t.find(&sv(&["a"])).unwrap();
        assert!((t.node(a).avg_length - 8.0 / 3.0).abs() < 1e-12);
        let s = t.sorted(Metric::AvgLength, SortOrder::Descending);
        assert_eq!(level1(&s)[0].0, "a");
    }
}
