/// Levenshtein edit distance over token lists, unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance between two patterns normalized by the longer one, so the
/// result lies in `[0, 1]`.
pub fn pattern_distance<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        0.0
    } else {
        levenshtein(a, b) as f64 / longest as f64
    }
}

/// Pairwise [`pattern_distance`] matrix.
pub fn distance_matrix<T: PartialEq>(patterns: &[&[T]]) -> Vec<Vec<f64>> {
    let n = patterns.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = pattern_distance(patterns[i], patterns[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}
