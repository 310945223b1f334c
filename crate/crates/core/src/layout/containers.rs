//! Pattern-level container layouts. Every layout returns one rectangle per
//! input pattern, in input order, with area proportional to its weight.

use super::distance::distance_matrix;
use super::mds::mds2d;
use super::{sorted_for, LayoutError, PatternUnits, Rect, SortKey};

const SEPARATION_ROUNDS: usize = 200;
const SHRINK_ATTEMPTS: usize = 60;
const SHRINK_FACTOR: f64 = 0.85;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

fn weights(patterns: &[PatternUnits]) -> Vec<f64> {
    patterns.iter().map(|p| p.weight() as f64).collect()
}

/// Square sides with `side² ∝ weight` and total area `fill × canvas`,
/// capped so the largest square still fits the canvas.
fn square_sides(w: &[f64], canvas: &Rect, fill: f64) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return vec![0.0; w.len()];
    }
    let mut k = fill * canvas.area() / total;
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let limit = canvas.width.min(canvas.height);
    if (k * wmax).sqrt() > limit {
        k = limit * limit / wmax;
    }
    w.iter().map(|wi| (k * wi).sqrt()).collect()
}

fn any_overlap(centers: &[(f64, f64)], sides: &[f64], eps: f64) -> bool {
    let n = centers.len();
    (0..n).any(|i| {
        (i + 1..n).any(|j| {
            let a = Rect::square(centers[i].0, centers[i].1, sides[i]);
            let b = Rect::square(centers[j].0, centers[j].1, sides[j]);
            a.overlaps(&b, eps)
        })
    })
}

/// Pushes overlapping squares apart along the line between their centers
/// and clamps them back into the canvas, for a bounded number of rounds.
/// Returns whether the final arrangement is overlap-free.
fn separate(centers: &mut [(f64, f64)], sides: &[f64], canvas: &Rect) -> bool {
    let n = centers.len();
    let eps = 1e-9 * canvas.width.max(canvas.height);
    let clamp = |c: &mut (f64, f64), s: f64| {
        c.0 = c.0.clamp(canvas.x + s / 2.0, canvas.right() - s / 2.0);
        c.1 = c.1.clamp(canvas.y + s / 2.0, canvas.bottom() - s / 2.0);
    };
    for round in 0..SEPARATION_ROUNDS {
        let mut moved = false;
        for i in 0..n {
            for j in i + 1..n {
                let half = (sides[i] + sides[j]) / 2.0;
                let (dx, dy) = (centers[j].0 - centers[i].0, centers[j].1 - centers[i].1);
                if dx.abs() >= half - eps || dy.abs() >= half - eps {
                    continue;
                }
                let len = dx.hypot(dy);
                let (ux, uy) = if len > eps {
                    (dx / len, dy / len)
                } else {
                    let theta = GOLDEN_ANGLE * (i * n + j + round) as f64;
                    (theta.cos(), theta.sin())
                };
                // Travel along u until one axis separates.
                let need = |d: f64, u: f64| {
                    if u.abs() > 1e-12 {
                        (half - d.abs()) / u.abs()
                    } else {
                        f64::INFINITY
                    }
                };
                let step = need(dx, ux).min(need(dy, uy)) * 0.5 + eps;
                centers[i].0 -= ux * step;
                centers[i].1 -= uy * step;
                centers[j].0 += ux * step;
                centers[j].1 += uy * step;
                moved = true;
            }
        }
        for (c, &s) in centers.iter_mut().zip(sides) {
            clamp(c, s);
        }
        if !moved {
            break;
        }
    }
    !any_overlap(centers, sides, eps)
}

/// Squares at MDS positions of the pattern distance matrix.
///
/// Positions are scaled uniformly into the canvas, then overlaps are
/// resolved by pairwise separation. If separation fails, all squares shrink
/// by the same factor and the attempt is repeated from the MDS positions.
pub fn layout_map2d(patterns: &[PatternUnits], canvas: &Rect, fill: f64) -> Result<Vec<Rect>, LayoutError> {
    if !canvas.is_valid() {
        return Err(LayoutError::Canvas(canvas.width, canvas.height));
    }
    let events: Vec<&[String]> = patterns.iter().map(|p| p.events.as_slice()).collect();
    let points = mds2d(&distance_matrix(&events))?;
    let mut sides = square_sides(&weights(patterns), canvas, fill);
    let eps = 1e-9 * canvas.width.max(canvas.height);

    let (min_x, max_x) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
    let (min_y, max_y) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[1]), hi.max(p[1])));
    let (cx, cy) = canvas.center();

    for _ in 0..SHRINK_ATTEMPTS {
        let margin = sides.iter().copied().fold(0.0, f64::max) / 2.0;
        let avail_w = (canvas.width - 2.0 * margin).max(0.0);
        let avail_h = (canvas.height - 2.0 * margin).max(0.0);
        let span_x = max_x - min_x;
        let span_y = max_y - min_y;
        let scale = [(span_x, avail_w), (span_y, avail_h)]
            .iter()
            .filter(|(span, _)| *span > 1e-12)
            .map(|(span, avail)| avail / span)
            .fold(f64::INFINITY, f64::min);
        let scale = if scale.is_finite() { scale } else { 0.0 };
        let mid = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
        let mut centers: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (cx + (p[0] - mid.0) * scale, cy + (p[1] - mid.1) * scale))
            .collect();
        if separate(&mut centers, &sides, canvas) {
            return Ok(centers
                .iter()
                .zip(&sides)
                .map(|(c, &s)| Rect::square(c.0, c.1, s))
                .collect());
        }
        sides.iter_mut().for_each(|s| *s *= SHRINK_FACTOR);
    }
    // Unreachable in practice: tiny squares always separate. Fall back to a
    // row-major grid of equal cells holding the squares.
    let n = patterns.len();
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let cell = (canvas.width / cols as f64).min(canvas.height / rows as f64);
    let smax = sides.iter().copied().fold(eps, f64::max);
    Ok(sides
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let s = s * cell / smax;
            let c = (
                canvas.x + ((i % cols) as f64 + 0.5) * cell,
                canvas.y + ((i / cols) as f64 + 0.5) * cell,
            );
            Rect::square(c.0, c.1, s)
        })
        .collect())
}

/// Full-width (axis `Y`) or full-height (axis `X`) strips, stacked along
/// the axis in `key` order, with extents proportional to weight. Padding
/// separates consecutive strips and is dropped when it would eat the canvas.
pub fn layout_fill(patterns: &[PatternUnits], canvas: &Rect, axis: Axis, key: SortKey, padding: f64) -> Vec<Rect> {
    let order = sorted_for(patterns, key);
    let w = weights(patterns);
    let total: f64 = w.iter().sum();
    let n = patterns.len();
    let extent = match axis {
        Axis::X => canvas.width,
        Axis::Y => canvas.height,
    };
    let gaps = padding * n.saturating_sub(1) as f64;
    let (pad, usable) = if gaps < extent { (padding, extent - gaps) } else { (0.0, extent) };

    let mut out = vec![Rect::new(0.0, 0.0, 0.0, 0.0); n];
    let mut cursor = 0.0;
    for i in order {
        let len = if total > 0.0 { usable * w[i] / total } else { usable / n as f64 };
        out[i] = match axis {
            Axis::X => Rect::new(canvas.x + cursor, canvas.y, len, canvas.height),
            Axis::Y => Rect::new(canvas.x, canvas.y + cursor, canvas.width, len),
        };
        cursor += len + pad;
    }
    out
}

/// Squarified treemap over the weights, largest first.
pub fn layout_treemap(patterns: &[PatternUnits], canvas: &Rect) -> Vec<Rect> {
    let order = sorted_for(patterns, SortKey::SupportCount);
    let w = weights(patterns);
    let total: f64 = w.iter().sum();
    let areas: Vec<f64> = order
        .iter()
        .map(|&i| {
            if total > 0.0 {
                w[i] * canvas.area() / total
            } else {
                canvas.area() / patterns.len() as f64
            }
        })
        .collect();
    let placed = squarify(&areas, *canvas);
    let mut out = vec![Rect::new(0.0, 0.0, 0.0, 0.0); patterns.len()];
    for (slot, r) in order.into_iter().zip(placed) {
        out[slot] = r;
    }
    out
}

/// Worst aspect ratio of a row of `areas` laid along a side of length `side`.
fn worst(row: &[f64], side: f64) -> f64 {
    let sum: f64 = row.iter().sum();
    let (lo, hi) = row
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let s2 = side * side;
    let sum2 = sum * sum;
    (s2 * hi / sum2).max(sum2 / (s2 * lo))
}

fn squarify(areas: &[f64], mut rect: Rect) -> Vec<Rect> {
    let mut out = Vec::with_capacity(areas.len());
    let mut start = 0;
    while start < areas.len() {
        let side = rect.width.min(rect.height);
        let mut end = start + 1;
        while end < areas.len() && worst(&areas[start..=end], side) <= worst(&areas[start..end], side) {
            end += 1;
        }
        let last = end == areas.len();
        rect = lay_row(&areas[start..end], rect, last, &mut out);
        start = end;
    }
    out
}

/// Places one row along the shorter side of `rect` and returns what is left.
/// The final row takes the remaining rectangle exactly.
fn lay_row(row: &[f64], rect: Rect, last: bool, out: &mut Vec<Rect>) -> Rect {
    let sum: f64 = row.iter().sum();
    let vertical = rect.width >= rect.height;
    let length = if vertical { rect.height } else { rect.width };
    let thickness = if last {
        if vertical { rect.width } else { rect.height }
    } else {
        sum / length
    };
    let mut cursor = 0.0;
    for (k, &a) in row.iter().enumerate() {
        let span = if k + 1 == row.len() { length - cursor } else { a / thickness };
        out.push(if vertical {
            Rect::new(rect.x, rect.y + cursor, thickness, span)
        } else {
            Rect::new(rect.x + cursor, rect.y, span, thickness)
        });
        cursor += span;
    }
    if vertical {
        Rect::new(rect.x + thickness, rect.y, rect.width - thickness, rect.height)
    } else {
        Rect::new(rect.x, rect.y + thickness, rect.width, rect.height - thickness)
    }
}

/// Greedy spiral packing of squares.
///
/// Squares are placed largest first, each at the first position along an
/// Archimedean spiral from the canvas center where it overlaps nothing
/// placed so far. The finished arrangement is scaled uniformly (down only)
/// to fit the canvas and centered.
pub fn layout_pack(patterns: &[PatternUnits], canvas: &Rect, fill: f64) -> Vec<Rect> {
    let order = sorted_for(patterns, SortKey::SupportCount);
    let sides = square_sides(&weights(patterns), canvas, fill);
    let eps = 1e-9 * canvas.width.max(canvas.height);
    let mut placed: Vec<Rect> = Vec::with_capacity(patterns.len());
    let mut slots: Vec<usize> = Vec::with_capacity(patterns.len());
    let (cx, cy) = canvas.center();

    for &i in &order {
        let s = sides[i].max(eps);
        let spacing = s * 0.5 / std::f64::consts::TAU;
        let mut theta = 0.0f64;
        let spot = loop {
            let r = spacing * theta;
            let cand = Rect::square(cx + r * theta.cos(), cy + r * theta.sin(), s);
            if placed.iter().all(|p| !p.overlaps(&cand, -eps)) {
                break cand;
            }
            // Advance roughly a quarter side along the arc.
            theta += if r > s { 0.25 * s / r } else { 0.25 };
        };
        placed.push(Rect::new(spot.x, spot.y, sides[i], sides[i]));
        slots.push(i);
    }

    let (min_x, min_y, max_x, max_y) = placed.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), r| (a.min(r.x), b.min(r.y), c.max(r.right()), d.max(r.bottom())),
    );
    let (bw, bh) = (max_x - min_x, max_y - min_y);
    let f = [canvas.width / bw, canvas.height / bh, 1.0]
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let (bx, by) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);

    let mut out = vec![Rect::new(0.0, 0.0, 0.0, 0.0); patterns.len()];
    for (r, slot) in placed.into_iter().zip(slots) {
        out[slot] = Rect::new(cx + (r.x - bx) * f, cy + (r.y - by) * f, r.width * f, r.height * f);
    }
    out
}
