//! Lexicographic combination stepping, shared by the enumeration oracle
//! and the brute-force batch solver.

/// Advances `idx` (a strictly increasing selection out of 0..m) to the
/// next combination in lexicographic order. Returns false when `idx`
/// was the last combination.
pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let n = idx.len();
    if n == 0 {
        return false;
    }
    let mut i = n;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if idx[i] != i + m - n {
            break;
        }
    }
    idx[i] += 1;
    for j in i + 1..n {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Number of n-subsets of an m-set, saturating at f64 range.
pub fn binomial(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let n = n.min(m - n);
    let mut acc = 1.0f64;
    for i in 0..n {
        acc = acc * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}
