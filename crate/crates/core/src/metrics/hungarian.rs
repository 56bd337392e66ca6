use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_ASSIGNMENT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("cost matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("cost matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("cost matrix is {0}x{0}, larger than {MAX_ASSIGNMENT}")]
    TooLarge(usize),
}

/// A bijection from predicted rows to ground-truth rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// `perm[i]` is the ground-truth row matched to predicted row `i`.
    pub perm: Vec<usize>,
    pub cost: f64,
}

impl Matching {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            cost: 0.0,
        }
    }

    /// Inverse map: ground-truth row to predicted row.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }
}

/// Minimum-cost perfect matching. Among optimal permutations the
/// lexicographically smallest `perm` is returned.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Matching, AssignmentError> {
    let n = cost.len();
    if n > MAX_ASSIGNMENT {
        return Err(AssignmentError::TooLarge(n));
    }
    for (i, row) in cost.iter().enumerate() {
        if row.len() != n {
            return Err(AssignmentError::NotSquare { row: i, len: row.len(), n });
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(AssignmentError::NonFinite(i, j));
        }
    }
    if n == 0 {
        return Ok(Matching::identity(0));
    }

    // Shortest augmenting paths with row potentials `u` and column
    // potentials `v`; reduced costs c - u - v stay non-negative and vanish
    // on matched edges. Index 0 is a sentinel.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
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
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[col_row[j] - 1] = j - 1;
    }

    // Every optimal assignment lives on the tight edges of an optimal dual.
    let scale = cost.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| (cost[i][j] - u[i + 1] - v[j + 1]).abs() <= eps).collect())
        .collect();
    lexicographic_min(&tight, &mut perm);

    let total = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(Matching { perm, cost: total })
}

/// Rewrite the perfect matching `perm` (all edges tight) into the
/// lexicographically smallest perfect matching of the tight graph.
fn lexicographic_min(tight: &[Vec<bool>], perm: &mut [usize]) {
    let n = perm.len();
    let mut owner = vec![0; n];
    for (i, &j) in perm.iter().enumerate() {
        owner[j] = i;
    }
    for i in 0..n {
        for j in 0..perm[i] {
            let r = owner[j];
            if !tight[i][j] || r < i {
                continue;
            }
            // Give column j to row i; row r must reach the column i frees
            // through rows that are not yet fixed.
            let freed = perm[i];
            let mut trial = perm.to_vec();
            let mut trial_owner = owner.clone();
            trial[i] = j;
            trial_owner[j] = i;
            let mut seen = vec![false; n];
            if augment(tight, r, i, freed, &mut trial, &mut trial_owner, &mut seen) {
                perm.copy_from_slice(&trial);
                owner = trial_owner;
                break;
            }
        }
    }
}

/// Alternating-path search from unmatched row `r` to column `free`,
/// touching only rows after `fixed`.
fn augment(
    tight: &[Vec<bool>],
    r: usize,
    fixed: usize,
    free: usize,
    perm: &mut [usize],
    owner: &mut [usize],
    seen: &mut [bool],
) -> bool {
    for j in 0..perm.len() {
        if !tight[r][j] || seen[j] {
            continue;
        }
        seen[j] = true;
        let next = owner[j];
        let reachable = if j == free {
            true
        } else if next > fixed && next != r {
            augment(tight, next, fixed, free, perm, owner, seen)
        } else {
            false
        };
        if reachable {
            perm[r] = j;
            owner[j] = r;
            return true;
        }
    }
    false
}
