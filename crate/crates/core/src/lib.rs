//! Event-sequence comparison engine.
//!
//! The pipeline mirrors an analyst's workflow: summarize a dataset through
//! a prefix x suffix matrix ([`matrix`]), pick two sequence sets from it,
//! mine maximal sequential patterns over their union ([`mining`]), lay the
//! patterns and their supporting sequences out as unit visualizations
//! ([`layout`]), and inspect one pattern's sequences aligned on a key event
//! ([`alignment`]).

pub mod affix;
pub mod alignment;
pub mod dataset;
pub mod layout;
pub mod matrix;
pub mod mining;

pub use affix::{AffixTree, Metric, SortOrder, TreeKind};
pub use alignment::AlignmentView;
pub use dataset::{Dataset, Event, IngestConfig, Manifest, Sequence, Stats};
pub use matrix::{AffixIndex, Grid, MatrixState, Pick, Selection};
pub use mining::{Membership, MiningConfig, MiningMode, Pattern};
