//! Sequence-level placement: uniform square units inside a container.

use super::{Rect, UnitLayout, GEOMETRY_EPS};

/// Whole cells of edge `u` fitting into `extent`.
fn cells(extent: f64, u: f64) -> usize {
    (extent / u + GEOMETRY_EPS).floor().max(0.0) as usize
}

/// How many units of edge `u` fit into `area` with the given layout.
pub fn capacity(area: &Rect, u: f64, layout: UnitLayout) -> usize {
    let (cols, rows) = (cells(area.width, u), cells(area.height, u));
    match layout {
        UnitLayout::Maxfill | UnitLayout::Pack => cols * rows,
        UnitLayout::Fillx => if rows >= 1 { cols } else { 0 },
        UnitLayout::Filly => if cols >= 1 { rows } else { 0 },
    }
}

/// Largest edge at which `count` units fit into `area`.
fn largest_fitting(area: &Rect, count: usize, layout: UnitLayout) -> f64 {
    if count == 0 {
        return f64::INFINITY;
    }
    let (w, h) = (area.width, area.height);
    match layout {
        UnitLayout::Fillx => (w / count as f64).min(h),
        UnitLayout::Filly => (h / count as f64).min(w),
        // The optimum has `cols` columns for some cols in 1..=count, with
        // just enough rows for the rest.
        UnitLayout::Maxfill | UnitLayout::Pack => (1..=count)
            .map(|cols| {
                let rows = count.div_ceil(cols);
                (w / cols as f64).min(h / rows as f64)
            })
            .fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitSize {
    pub size: f64,
    /// Indices of containers that cannot hold their units at `size`.
    pub overflow: Vec<usize>,
}

/// The shared unit edge: the largest `u` in `[u_min, u_max]` at which every
/// container holds its units. When even `u_min` is too large for some
/// container, `u_min` is used and those containers are reported.
pub fn shared_unit_size(areas: &[Rect], counts: &[usize], layout: UnitLayout, u_min: f64, u_max: f64) -> UnitSize {
    let best = areas
        .iter()
        .zip(counts)
        .map(|(a, &c)| largest_fitting(a, c, layout))
        .fold(f64::INFINITY, f64::min);
    let size = best.clamp(u_min, u_max);
    let overflow = areas
        .iter()
        .zip(counts)
        .enumerate()
        .filter(|(_, (a, &c))| capacity(a, size, layout) < c)
        .map(|(i, _)| i)
        .collect();
    UnitSize { size, overflow }
}

/// Positions `count` units of edge `u` in `area`, in order.
///
/// `Maxfill` is a row-major grid from the top-left corner, `Pack` centers
/// each grid row horizontally, and `Fillx` / `Filly` use a single row or
/// column. Units that do not fit continue past the container edge.
pub fn layout_units(area: &Rect, count: usize, layout: UnitLayout, u: f64) -> Vec<Rect> {
    let cols = cells(area.width, u).max(1);
    (0..count)
        .map(|i| {
            let (dx, dy) = match layout {
                UnitLayout::Fillx => (i as f64 * u, 0.0),
                UnitLayout::Filly => (0.0, i as f64 * u),
                UnitLayout::Maxfill => ((i % cols) as f64 * u, (i / cols) as f64 * u),
                UnitLayout::Pack => {
                    let row = i / cols;
                    let in_row = (count - row * cols).min(cols);
                    let offset = ((area.width - in_row as f64 * u) / 2.0).max(0.0);
                    (offset + (i % cols) as f64 * u, row as f64 * u)
                }
            };
            Rect::new(area.x + dx, area.y + dy, u, u)
        })
        .collect()
}
