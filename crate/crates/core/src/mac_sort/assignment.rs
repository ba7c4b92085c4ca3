//! Rectangular linear assignment with forbidden (`+∞`) entries.
//!
//! Shortest-augmenting-path Hungarian method over a dense matrix. Forbidden
//! entries are replaced by a penalty larger than any achievable finite total,
//! so the solver first maximises the number of finite matches and then
//! minimises their cost. Matches through a forbidden entry are discarded.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Assignment {
    /// Sum of `cost` over the matched pairs, in row order.
    pub fn total(&self, cost: &[Vec<f64>]) -> f64 {
        self.matches.iter().map(|&(r, c)| cost[r][c]).sum()
    }
}

/// Minimum-cost one-to-one assignment over the finite entries of `cost`.
///
/// All rows must have the same length. Non-finite entries are forbidden. With
/// no rows the column count is unknown and `unmatched_cols` is empty.
pub fn linear_assignment(cost: &[Vec<f64>]) -> Assignment {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    if rows == 0 || cols == 0 {
        return Assignment { matches: Vec::new(), unmatched_rows: (0..rows).collect(), unmatched_cols: (0..cols).collect() };
    }

    let finite = |x: f64| x.is_finite();
    let (lo, hi) = cost
        .iter()
        .flatten()
        .copied()
        .filter(|&x| finite(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !lo.is_finite() {
        return Assignment { matches: Vec::new(), unmatched_rows: (0..rows).collect(), unmatched_cols: (0..cols).collect() };
    }
    let n = rows.min(cols);
    let penalty = (hi - lo + 1.0) * (n as f64 + 1.0);

    // Solve with the smaller dimension as rows.
    let transposed = rows > cols;
    let (r, c) = if transposed { (cols, rows) } else { (rows, cols) };
    let entry = |i: usize, j: usize| {
        let x = if transposed { cost[j][i] } else { cost[i][j] };
        if finite(x) {
            x - lo
        } else {
            penalty
        }
    };
    let row_to_col = hungarian(r, c, entry);

    let mut matches = Vec::with_capacity(n);
    for (i, j) in row_to_col.into_iter().enumerate() {
        let (row, col) = if transposed { (j, i) } else { (i, j) };
        if finite(cost[row][col]) {
            matches.push((row, col));
        }
    }
    matches.sort_unstable();
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    for &(i, j) in &matches {
        row_used[i] = true;
        col_used[j] = true;
    }
    Assignment {
        matches,
        unmatched_rows: (0..rows).filter(|&i| !row_used[i]).collect(),
        unmatched_cols: (0..cols).filter(|&j| !col_used[j]).collect(),
    }
}

/// Dense Hungarian method for `rows <= cols`; returns the column of each row.
fn hungarian(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(rows <= cols);
    // 1-based potentials; index 0 is the virtual root.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![0.0; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}
