//! Rectangular linear assignment (Hungarian algorithm with potentials).

/// Minimum-cost matching of `min(rows, cols)` pairs. Returns the matched
/// `(row, col)` pairs sorted by row, and the summed cost of those entries.
pub fn lap_assign(cost: &[Vec<f64>]) -> (Vec<(usize, usize)>, f64) {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (Vec::new(), 0.0);
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    let mut pairs = if rows <= cols {
        hungarian(rows, cols, |i, j| cost[i][j])
    } else {
        hungarian(cols, rows, |i, j| cost[j][i])
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect()
    };
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(i, j)| cost[i][j]).sum();
    (pairs, total)
}

/// Assign every one of `n` rows to a distinct column among `m >= n`.
fn hungarian(n: usize, m: usize, c: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
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
    (1..=m).filter(|&j| p[j] != 0).map(|j| (p[j] - 1, j - 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_diagonal() {
        let (pairs, cost) = lap_assign(&[vec![0.0, 9.0], vec![9.0, 0.0]]);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn small_brute_force_case() {
        // Permutations: 1 + 0 = 1 versus 2 + 3 = 5.
        let (pairs, cost) = lap_assign(&[vec![1.0, 2.0], vec![3.0, 0.0]]);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn rectangular_leaves_a_column() {
        let (pairs, cost) = lap_assign(&[vec![5.0, 1.0, 3.0], vec![2.0, 4.0, 0.5]]);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert_eq!(cost, 1.5);
        let (tp, tc) = lap_assign(&[vec![5.0, 2.0], vec![1.0, 4.0], vec![3.0, 0.5]]);
        assert_eq!(tp, vec![(1, 0), (2, 1)]);
        assert_eq!(tc, 1.5);
    }

    #[test]
    fn empty_matrix() {
        assert_eq!(lap_assign(&[]), (Vec::new(), 0.0));
        assert_eq!(lap_assign(&[vec![]]), (Vec::new(), 0.0));
    }
}
