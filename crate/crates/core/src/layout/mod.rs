//! Two-level unit-visualization layouts.
//!
//! The pattern level is non-uniform: each pattern gets a container whose
//! area is proportional to its support. The sequence level is uniform: every
//! unit in every container shares one edge length.

mod containers;
pub mod distance;
pub mod mds;
mod units;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mining::{Membership, Pattern};

pub use containers::{layout_fill, layout_map2d, layout_pack, layout_treemap, Axis};
pub use distance::{levenshtein, pattern_distance};
pub use mds::mds2d;
pub use units::{capacity, layout_units, shared_unit_size, UnitSize};

pub const DEFAULT_FILL_RATIO: f64 = 0.45;
pub const DEFAULT_UNIT_MIN: f64 = 1.0;
pub const DEFAULT_UNIT_MAX: f64 = 24.0;

/// Slack for floating point comparisons on canvas coordinates.
pub const GEOMETRY_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("canvas must have positive finite size, got {0}x{1}")]
    Canvas(f64, f64),
    #[error("invalid distance matrix: {0}")]
    Distances(String),
    #[error("invalid layout parameter: {0}")]
    Parameter(String),
    #[error("sequence {0:?} has no set membership")]
    Untagged(String),
}

/// Axis-aligned rectangle, origin top-left, y down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "h")]
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Rect {
        Rect { x, y, width, height }
    }

    pub fn square(cx: f64, cy: f64, side: f64) -> Rect {
        Rect::new(cx - side / 2.0, cy - side / 2.0, side, side)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.width, self.height].iter().all(|v| v.is_finite())
            && self.width > 0.0
            && self.height > 0.0
    }

    /// Shrinks by `pad` on every side; the inset is capped at a quarter of
    /// the shorter edge so the result keeps a positive size.
    pub fn inset(&self, pad: f64) -> Rect {
        let pad = pad.max(0.0).min(self.width.min(self.height) / 4.0);
        Rect::new(self.x + pad, self.y + pad, self.width - 2.0 * pad, self.height - 2.0 * pad)
    }

    /// `other` lies within `self`, up to `eps`.
    pub fn contains(&self, other: &Rect, eps: f64) -> bool {
        other.x >= self.x - eps
            && other.y >= self.y - eps
            && other.right() <= self.right() + eps
            && other.bottom() <= self.bottom() + eps
    }

    /// Interiors intersect by more than `eps` on both axes.
    pub fn overlaps(&self, other: &Rect, eps: f64) -> bool {
        self.x < other.right() - eps
            && other.x < self.right() - eps
            && self.y < other.bottom() - eps
            && other.y < self.bottom() - eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternLayout {
    #[default]
    Map2d,
    Fillx,
    Filly,
    Maxfill,
    Pack,
}

impl PatternLayout {
    pub const ALL: [PatternLayout; 5] = [
        PatternLayout::Map2d,
        PatternLayout::Fillx,
        PatternLayout::Filly,
        PatternLayout::Maxfill,
        PatternLayout::Pack,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitLayout {
    Fillx,
    Filly,
    #[default]
    Maxfill,
    Pack,
}

impl UnitLayout {
    pub const ALL: [UnitLayout; 4] = [UnitLayout::Fillx, UnitLayout::Filly, UnitLayout::Maxfill, UnitLayout::Pack];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SortKey {
    #[default]
    SupportCount,
    PatternLength,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutRequest {
    pub canvas: Rect,
    pub pattern_layout: PatternLayout,
    pub unit_layout: UnitLayout,
    pub sort_key: SortKey,
    pub padding_px: f64,
    pub fill_ratio: f64,
    pub unit_min: f64,
    pub unit_max: f64,
}

impl Default for LayoutRequest {
    fn default() -> Self {
        LayoutRequest {
            canvas: Rect::new(0.0, 0.0, 800.0, 600.0),
            pattern_layout: PatternLayout::Map2d,
            unit_layout: UnitLayout::Maxfill,
            sort_key: SortKey::SupportCount,
            padding_px: 2.0,
            fill_ratio: DEFAULT_FILL_RATIO,
            unit_min: DEFAULT_UNIT_MIN,
            unit_max: DEFAULT_UNIT_MAX,
        }
    }
}

impl LayoutRequest {
    pub fn with_layouts(pattern_layout: PatternLayout, unit_layout: UnitLayout) -> Self {
        LayoutRequest {
            pattern_layout,
            unit_layout,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), LayoutError> {
        if !self.canvas.is_valid() {
            return Err(LayoutError::Canvas(self.canvas.width, self.canvas.height));
        }
        if !(self.padding_px >= 0.0 && self.padding_px.is_finite()) {
            return Err(LayoutError::Parameter(format!("padding {}", self.padding_px)));
        }
        if !(self.fill_ratio > 0.0 && self.fill_ratio <= 1.0) {
            return Err(LayoutError::Parameter(format!("fill ratio {}", self.fill_ratio)));
        }
        if !(self.unit_min > 0.0 && self.unit_min <= self.unit_max && self.unit_max.is_finite()) {
            return Err(LayoutError::Parameter(format!(
                "unit size bounds [{}, {}]",
                self.unit_min, self.unit_max
            )));
        }
        Ok(())
    }
}

/// One pattern as the layout sees it: its event list and its supporting
/// sequences tagged by selected set.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternUnits {
    pub id: String,
    pub events: Vec<String>,
    /// Sorted set A, then shared, then set B; by id inside a set.
    pub members: Vec<(String, Membership)>,
}

impl PatternUnits {
    pub fn new(id: impl Into<String>, events: Vec<String>, mut members: Vec<(String, Membership)>) -> Self {
        members.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        PatternUnits {
            id: id.into(),
            events,
            members,
        }
    }

    pub fn from_pattern(
        id: impl Into<String>,
        pattern: &Pattern,
        tags: &BTreeMap<String, Membership>,
    ) -> Result<Self, LayoutError> {
        let members = pattern
            .support_ids
            .iter()
            .map(|sid| {
                tags.get(sid)
                    .map(|&m| (sid.clone(), m))
                    .ok_or_else(|| LayoutError::Untagged(sid.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(id, pattern.events.clone(), members))
    }

    /// Number of units, which is also the container weight.
    pub fn weight(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitPlacement {
    pub pid: String,
    pub sid: String,
    pub set: Membership,
    pub x: f64,
    pub y: f64,
}

/// Serialized as `{unitSize, containers, units, overflow}` plus `setOf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutResult {
    pub unit_size: f64,
    pub containers: BTreeMap<String, Rect>,
    pub units: Vec<UnitPlacement>,
    /// Patterns whose units do not fit their container at `unit_size`.
    pub overflow: Vec<String>,
    pub set_of: BTreeMap<String, Membership>,
}

impl LayoutResult {
    pub fn unit_rect(&self, u: &UnitPlacement) -> Rect {
        Rect::new(u.x, u.y, self.unit_size, self.unit_size)
    }
}

/// Orders patterns for strip layouts: key descending, events ascending.
pub(crate) fn sorted_for(patterns: &[PatternUnits], key: SortKey) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..patterns.len()).collect();
    let metric = |p: &PatternUnits| match key {
        SortKey::SupportCount => p.weight(),
        SortKey::PatternLength => p.events.len(),
        SortKey::None => 0,
    };
    if key != SortKey::None {
        idx.sort_by(|&a, &b| {
            metric(&patterns[b])
                .cmp(&metric(&patterns[a]))
                .then_with(|| patterns[a].events.cmp(&patterns[b].events))
        });
    }
    idx
}

/// Computes container and unit geometry for a pattern list.
pub fn compute_layout(patterns: &[PatternUnits], req: &LayoutRequest) -> Result<LayoutResult, LayoutError> {
    req.validate()?;
    let ids: BTreeSet<&str> = patterns.iter().map(|p| p.id.as_str()).collect();
    if ids.len() != patterns.len() {
        return Err(LayoutError::Parameter("duplicate pattern ids".into()));
    }
    let rects: Vec<Rect> = if patterns.is_empty() {
        Vec::new()
    } else {
        match req.pattern_layout {
            PatternLayout::Map2d => layout_map2d(patterns, &req.canvas, req.fill_ratio)?,
            PatternLayout::Fillx => layout_fill(patterns, &req.canvas, Axis::X, req.sort_key, req.padding_px),
            PatternLayout::Filly => layout_fill(patterns, &req.canvas, Axis::Y, req.sort_key, req.padding_px),
            PatternLayout::Maxfill => layout_treemap(patterns, &req.canvas),
            PatternLayout::Pack => layout_pack(patterns, &req.canvas, req.fill_ratio),
        }
    };

    let inner: Vec<Rect> = rects.iter().map(|r| r.inset(req.padding_px)).collect();
    let counts: Vec<usize> = patterns.iter().map(PatternUnits::weight).collect();
    let UnitSize { size, overflow } = shared_unit_size(&inner, &counts, req.unit_layout, req.unit_min, req.unit_max);

    let mut units = Vec::new();
    let mut set_of = BTreeMap::new();
    for (p, area) in patterns.iter().zip(&inner) {
        let placed = layout_units(area, p.members.len(), req.unit_layout, size);
        for ((sid, set), r) in p.members.iter().zip(placed) {
            units.push(UnitPlacement {
                pid: p.id.clone(),
                sid: sid.clone(),
                set: *set,
                x: r.x,
                y: r.y,
            });
            set_of.insert(sid.clone(), *set);
        }
    }
    Ok(LayoutResult {
        unit_size: size,
        containers: patterns.iter().map(|p| p.id.clone()).zip(rects).collect(),
        units,
        overflow: overflow.into_iter().map(|i| patterns[i].id.clone()).collect(),
        set_of,
    })
}
