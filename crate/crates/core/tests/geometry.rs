use std::collections::HashMap;

use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;

use seqcompare_core::layout::distance::{levenshtein, pattern_distance};
use seqcompare_core::layout::mds::mds2d;

/// Edit distance by memoized recursion on suffixes.
fn edit_oracle(a: &[u8], b: &[u8]) -> usize {
    fn go(a: &[u8], b: &[u8], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo).min(go(a, b, i, j + 1, memo)).min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn euclid(p: &[[f64; 2]]) -> Vec<Vec<f64>> {
    p.iter()
        .map(|a| p.iter().map(|b| (a[0] - b[0]).hypot(a[1] - b[1])).collect())
        .collect()
}

/// Residual of the best rotation/reflection plus translation taking `x` onto `y`.
fn procrustes_residual(x: &[[f64; 2]], y: &[[f64; 2]]) -> f64 {
    let n = x.len() as f64;
    let mean = |p: &[[f64; 2]]| p.iter().fold(Vector2::zeros(), |acc, q| acc + Vector2::new(q[0], q[1])) / n;
    let (mx, my) = (mean(x), mean(y));
    let mut h = Matrix2::zeros();
    for (a, b) in x.iter().zip(y) {
        h += (Vector2::new(a[0], a[1]) - mx) * (Vector2::new(b[0], b[1]) - my).transpose();
    }
    let svd = h.svd(true, true);
    let r = svd.v_t.unwrap().transpose() * svd.u.unwrap().transpose();
    x.iter()
        .zip(y)
        .map(|(a, b)| (r * (Vector2::new(a[0], a[1]) - mx) + my - Vector2::new(b[0], b[1])).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn levenshtein_matches_oracle(
        a in prop::collection::vec(0u8..4, 0..12),
        b in prop::collection::vec(0u8..4, 0..12),
    ) {
        let d = levenshtein(&a, &b);
        prop_assert_eq!(d, edit_oracle(&a, &b));
        prop_assert_eq!(d, levenshtein(&b, &a));
        let norm = pattern_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&norm));
    }

    #[test]
    fn mds_recovers_planar_points(pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..30)) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let d = euclid(&pts);
        let scale = d.iter().flatten().copied().fold(0.0, f64::max);
        prop_assume!(scale > 1e-3);
        let rec = mds2d(&d).unwrap();
        let back = euclid(&rec);
        for (r, e) in back.iter().flatten().zip(d.iter().flatten()) {
            prop_assert!((r - e).abs() <= 1e-9 * scale, "{} vs {}", r, e);
        }
        prop_assert!(procrustes_residual(&rec, &pts) <= 1e-9 * scale);
    }
}

#[test]
fn triangle_inequality_on_small_alphabet() {
    let words: Vec<Vec<u8>> = (0..40u32).map(|i| (0..(i % 6)).map(|k| ((i * 7 + k * 3) % 3) as u8).collect()).collect();
    for a in &words {
        for b in &words {
            for c in &words {
                assert!(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
            }
        }
    }
}
