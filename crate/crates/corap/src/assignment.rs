//! Minimum-cost linear assignment for square cost matrices.
//!
//! Shortest-augmenting-path formulation with dual potentials, O(n³). The
//! factor error metric uses it to find the optimal column matching between
//! a true factor matrix and an estimate.

use ndarray::ArrayView2;

/// Column `assignment[r]` of the cost matrix is matched to row `r`, with
/// minimal total cost. The matrix must be square; entries must be finite.
pub fn minimize_assignment(cost: &ArrayView2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square cost matrix");
    if n == 0 {
        return Vec::new();
    }

    // 1-based arrays with a virtual 0th row/column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut path = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    path[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = path[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}
