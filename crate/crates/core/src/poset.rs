//! Transitive reduction of finite strict partial orders.

/// Covering pairs `(a, b)` of the strict order `above`, where `above(a, b)`
/// means `a` is strictly greater than `b`.
///
/// `extension` must list every item in a linear extension of the order,
/// greatest first. Output is sorted by the position of `a`, then `b`, in
/// that extension.
pub fn covers(extension: &[usize], above: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let n = extension.len();
    let words = n.div_ceil(64);
    // below[p] holds the positions strictly below the item at position p.
    let mut below = vec![0u64; n * words];
    for p in 0..n {
        for q in p + 1..n {
            if above(extension[p], extension[q]) {
                below[p * words + q / 64] |= 1 << (q % 64);
            }
        }
    }
    let mut out = Vec::new();
    let mut reached = vec![0u64; words];
    for p in 0..n {
        reached.iter_mut().for_each(|w| *w = 0);
        for q in p + 1..n {
            let bit = 1u64 << (q % 64);
            if below[p * words + q / 64] & bit == 0 || reached[q / 64] & bit != 0 {
                continue;
            }
            out.push((extension[p], extension[q]));
            for (r, b) in reached.iter_mut().zip(&below[q * words..(q + 1) * words]) {
                *r |= b;
            }
        }
    }
    out
}

/// Covering pairs of a relation given as a boolean matrix `rel[a][b]`
/// (strict, transitive). Items are ordered by how many items lie below them.
pub fn covers_of_matrix(rel: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = rel.len();
    let mut extension: Vec<usize> = (0..n).collect();
    let below = |a: usize| rel[a].iter().filter(|&&x| x).count();
    extension.sort_by_key(|&a| (std::cmp::Reverse(below(a)), a));
    let mut out = covers(&extension, |a, b| rel[a][b]);
    out.sort_unstable();
    out
}
