//! Optimal one-to-one assignment on a square score matrix.

/// Largest size solved by enumerating permutations.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Assignment maximizing `Σ_i score[i][assignment[i]]`.
pub fn max_assignment(score: &[Vec<f64>]) -> Vec<usize> {
    if score.len() <= EXHAUSTIVE_LIMIT {
        exhaustive(score)
    } else {
        hungarian_max(score)
    }
}

pub fn assignment_total(score: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| score[i][j]).sum()
}

/// Heap's algorithm over all permutations.
pub fn exhaustive(score: &[Vec<f64>]) -> Vec<usize> {
    let n = score.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_total = assignment_total(score, &perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let total = assignment_total(score, &perm);
            if total > best_total {
                best_total = total;
                best.clone_from(&perm);
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Kuhn–Munkres with row/column potentials, O(n³). Maximizes by minimizing
/// the negated scores.
pub fn hungarian_max(score: &[Vec<f64>]) -> Vec<usize> {
    let n = score.len();
    let cost = |i: usize, j: usize| -score[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row matched to column j (1-based, 0 = none).
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Rng;

    #[test]
    fn hungarian_matches_exhaustive() {
        let mut rng = Rng::seed_from(17);
        for n in 1..=7 {
            for _ in 0..20 {
                let s: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.uniform()).collect())
                    .collect();
                let a = exhaustive(&s);
                let b = hungarian_max(&s);
                assert!((assignment_total(&s, &a) - assignment_total(&s, &b)).abs() < 1e-12);
                let mut sorted = b.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn large_instances_use_a_valid_permutation() {
        let mut rng = Rng::seed_from(3);
        let s: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..20).map(|_| rng.uniform()).collect())
            .collect();
        let mut a = max_assignment(&s);
        a.sort_unstable();
        assert_eq!(a, (0..20).collect::<Vec<_>>());
    }
}
