//! Exact rectangular assignment via the Hungarian algorithm.
//!
//! Potential-based shortest-augmenting-path formulation, O(N^2 M) for N rows
//! (UAVs) and M >= N columns (slots). Costs must be finite.

use crate::{Error, Result};

/// Minimum-cost injective assignment of each row to a distinct column.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `col_of_row[n]` is the column assigned to row `n`.
    pub col_of_row: Vec<usize>,
    pub total_cost: f64,
}

/// Solves min sum cost[row][col] over injective row -> col maps.
///
/// `cost` is indexed `cost[row][col]`; requires `rows <= cols`.
pub fn solve(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty cost matrix".into()));
    }
    let m = cost[0].len();
    if n > m {
        return Err(Error::TooManyStreams { n, m });
    }
    for row in cost {
        if row.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: row.len() });
        }
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteEntries);
        }
    }

    // 1-indexed potentials; p[j] is the row matched to column j (0 = free).
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
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
        // unwind augmenting path
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    let total_cost = col_of_row.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
    Ok(Assignment { col_of_row, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamPurpose};
    use approx::assert_relative_eq;
    use rand::Rng;

    /// Exhaustive minimum over all injective row -> col maps.
    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for col in 0..cost[0].len() {
                if !used[col] {
                    used[col] = true;
                    best = best.min(cost[row][col] + rec(cost, row + 1, used));
                    used[col] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost[0].len()])
    }

    #[test]
    fn diagonal_zero_cost() {
        let cost = vec![vec![0.0, 5.0], vec![5.0, 0.0]];
        let a = solve(&cost).unwrap();
        assert_eq!(a.col_of_row, vec![0, 1]);
        assert_relative_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn single_row_takes_cheapest_column() {
        let cost = vec![vec![4.0, 1.0, 7.0, 2.0]];
        let a = solve(&cost).unwrap();
        assert_eq!(a.col_of_row, vec![1]);
    }

    #[test]
    fn rejects_more_rows_than_columns() {
        let cost = vec![vec![1.0], vec![2.0]];
        assert!(matches!(solve(&cost), Err(Error::TooManyStreams { n: 2, m: 1 })));
    }

    #[test]
    fn matches_brute_force_on_random_integer_costs() {
        let mut rng = stream(1, StreamPurpose::InitialPlacement, 0, 0);
        for _ in 0..500 {
            let cost: Vec<Vec<f64>> =
                (0..3).map(|_| (0..4).map(|_| rng.random_range(0..10) as f64).collect()).collect();
            let a = solve(&cost).unwrap();
            assert_relative_eq!(a.total_cost, brute_force(&cost), epsilon = 1e-9);
        }
    }

    #[test]
    fn matches_brute_force_on_random_sizes() {
        let mut rng = stream(2, StreamPurpose::InitialPlacement, 0, 0);
        for _ in 0..300 {
            let m = rng.random_range(1..=6);
            let n = rng.random_range(1..=m);
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..m).map(|_| rng.random::<f64>() * 100.0).collect()).collect();
            let a = solve(&cost).unwrap();
            assert_relative_eq!(a.total_cost, brute_force(&cost), epsilon = 1e-9);
            // injectivity
            let mut seen = vec![false; m];
            for &c in &a.col_of_row {
                assert!(!seen[c]);
                seen[c] = true;
            }
        }
    }
}
