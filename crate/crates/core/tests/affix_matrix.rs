use std::collections::BTreeSet;

use proptest::prelude::*;

use seqcompare_core::affix::{AffixTree, Metric, SortOrder, TreeKind, DEFAULT_MAX_DEPTH};
use seqcompare_core::dataset::Dataset;
use seqcompare_core::matrix::{AffixIndex, Header, HeaderRef, MatrixState, Pick};

fn dataset_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let event = prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from);
    prop::collection::vec(prop::collection::vec(event, 1..7), 1..25)
}

#[derive(Debug, Clone)]
enum Step {
    Expand(TreeKind, usize),
    Collapse(TreeKind, usize),
    AllNext,
    Level,
}

fn step_strategy() -> impl Strategy<Value = Step> {
    let kind = prop::bool::ANY.prop_map(|p| if p { TreeKind::Prefix } else { TreeKind::Suffix });
    prop_oneof![
        4 => (kind.clone(), any::<usize>()).prop_map(|(k, i)| Step::Expand(k, i)),
        2 => (kind, any::<usize>()).prop_map(|(k, i)| Step::Collapse(k, i)),
        1 => Just(Step::AllNext),
        1 => Just(Step::Level),
    ]
}

/// Whether sequence `s` falls under a header, straight from the definition.
fn matches(kind: TreeKind, h: &Header, s: &[String]) -> bool {
    if h.residual {
        return s == h.path.as_slice();
    }
    match kind {
        TreeKind::Prefix => s.starts_with(&h.path),
        TreeKind::Suffix => s.ends_with(&h.path),
    }
}

fn apply(state: &MatrixState, index: &AffixIndex, step: &Step) -> MatrixState {
    match step {
        Step::Expand(kind, i) => {
            let tree = index.tree(*kind);
            let visible: Vec<Vec<String>> = tree
                .visible_frontier(state.expanded(*kind))
                .unwrap()
                .into_iter()
                .filter(|f| !f.residual)
                .map(|f| tree.path(f.node))
                .collect();
            let path = &visible[i % visible.len()];
            state.expand(tree, path).unwrap().state
        }
        Step::Collapse(kind, i) => {
            let expanded: Vec<&Vec<String>> = state.expanded(*kind).iter().collect();
            if expanded.is_empty() {
                return state.clone();
            }
            let path = expanded[i % expanded.len()].clone();
            state.collapse(index.tree(*kind), &path).unwrap().state
        }
        Step::AllNext => state.expand_all_next_level(index).unwrap().state,
        Step::Level => state.collapse_level().state,
    }
}

fn check_suffix_mirrors_reversed_prefix(d: &Dataset) {
    let suffix = AffixTree::suffix(d, DEFAULT_MAX_DEPTH);
    let prefix = AffixTree::prefix(&d.reversed(), DEFAULT_MAX_DEPTH);
    assert_eq!(suffix.len(), prefix.len());
    for id in suffix.node_ids() {
        let mut path = suffix.path(id);
        path.reverse();
        let other = prefix.find(&path).expect("mirrored node exists");
        let (a, b) = (suffix.node(id), prefix.node(other));
        assert_eq!(a.members, b.members);
        assert_eq!(a.terminal, b.terminal);
        let kids = |t: &AffixTree, n: &[usize]| -> Vec<Option<String>> {
            n.iter().map(|&c| t.node(c).event_type.clone()).collect()
        };
        assert_eq!(kids(&suffix, &a.children), kids(&prefix, &b.children));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_walks_keep_grid_consistent(
        lists in dataset_strategy(),
        steps in prop::collection::vec(step_strategy(), 0..10),
        sort in prop::sample::select(vec![SortOrder::None, SortOrder::Ascending, SortOrder::Descending]),
    ) {
        let d = Dataset::from_type_lists(&lists);
        let index = AffixIndex::from_filtered(d.clone(), DEFAULT_MAX_DEPTH);
        let mut state = MatrixState::default().with_sort(Metric::Count, sort);
        for step in &steps {
            state = apply(&state, &index, step);
            let m = index.materialize(&state).unwrap();
            let g = &m.grid;
            let n = d.len();
            prop_assert_eq!(g.columns.iter().map(|h| h.summary.count).sum::<usize>(), n);
            prop_assert_eq!(g.rows.iter().map(|h| h.summary.count).sum::<usize>(), n);
            let seqs: Vec<Vec<String>> = d.sequences().iter().map(|s| s.types().map(String::from).collect()).collect();
            for (r, row) in g.rows.iter().enumerate() {
                for (c, col) in g.columns.iter().enumerate() {
                    let expected = seqs
                        .iter()
                        .filter(|s| matches(TreeKind::Suffix, row, s) && matches(TreeKind::Prefix, col, s))
                        .count();
                    prop_assert_eq!(g.cells[r][c].count, expected);
                }
            }
            prop_assert_eq!(g.max_cell_count, g.cells.iter().flatten().map(|c| c.count).max().unwrap_or(0));
        }
    }

    #[test]
    fn suffix_tree_is_reversed_prefix_tree(lists in dataset_strategy()) {
        check_suffix_mirrors_reversed_prefix(&Dataset::from_type_lists(&lists));
    }

    #[test]
    fn expand_then_collapse_restores_grid(lists in dataset_strategy(), pick in any::<usize>()) {
        let index = AffixIndex::from_filtered(Dataset::from_type_lists(&lists), DEFAULT_MAX_DEPTH);
        let start = MatrixState::default();
        let tree = &index.prefix;
        let frontier = tree.visible_frontier(start.expanded(TreeKind::Prefix)).unwrap();
        let path = tree.path(frontier[pick % frontier.len()].node);
        let expanded = start.expand(tree, &path).unwrap().state;
        let back = expanded.collapse(tree, &path).unwrap().state;
        prop_assert_eq!(
            serde_json::to_string(&index.materialize(&start).unwrap().grid).unwrap(),
            serde_json::to_string(&index.materialize(&back).unwrap().grid).unwrap()
        );
    }

    #[test]
    fn selection_is_union_of_picks(lists in dataset_strategy(), a in any::<usize>(), b in any::<usize>()) {
        let index = AffixIndex::from_filtered(Dataset::from_type_lists(&lists), DEFAULT_MAX_DEPTH);
        let state = index.materialize(&MatrixState::default()).unwrap();
        let g = &state.grid;
        let href = |h: &Header| HeaderRef { path: h.path.clone(), residual: h.residual };
        let cell = |i: usize| {
            let (r, c) = (i % g.rows.len(), (i / g.rows.len()) % g.columns.len());
            Pick::Cell { row: href(&g.rows[r]), column: href(&g.columns[c]) }
        };
        let col = Pick::Column { column: href(&g.columns[b % g.columns.len()]) };
        let sel = state.select(&[cell(a)], &[col.clone(), cell(b)]).unwrap();
        let ids = |p: &Pick| -> BTreeSet<String> {
            state.resolve(p).unwrap().into_iter().map(|i| state.ids()[i].clone()).collect()
        };
        prop_assert_eq!(&sel.set_a, &ids(&cell(a)));
        let union: BTreeSet<String> = ids(&col).union(&ids(&cell(b))).cloned().collect();
        prop_assert_eq!(&sel.set_b, &union);
        let overlap: BTreeSet<String> = sel.set_a.intersection(&sel.set_b).cloned().collect();
        prop_assert_eq!(sel.overlap, overlap);
    }
}

#[test]
fn expand_all_next_level_twice_shows_depth_two() {
    let d = Dataset::from_type_lists(&[vec!["a", "b", "c"], vec!["a", "c"], vec!["b", "a", "a", "d"], vec!["c"]]);
    let index = AffixIndex::from_filtered(d, DEFAULT_MAX_DEPTH);
    let once = MatrixState::default().expand_all_next_level(&index).unwrap().state;
    let twice = once.expand_all_next_level(&index).unwrap().state;
    // Explicit enumeration: every internal node of depth <= 2.
    for kind in [TreeKind::Prefix, TreeKind::Suffix] {
        let tree = index.tree(kind);
        let expected: BTreeSet<Vec<String>> = tree
            .node_ids()
            .filter(|&id| tree.node(id).depth <= 2 && !tree.node(id).is_leaf())
            .map(|id| tree.path(id))
            .collect();
        assert_eq!(twice.expanded(kind), &expected);
    }
}
