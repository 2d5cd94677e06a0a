//! Sparse real LU with a minimum-degree column ordering and threshold
//! partial pivoting (left-looking, Gilbert-Peierls).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative pivot threshold: the diagonal candidate is kept when it is at
/// least this fraction of the largest candidate in its column.
const DIAGONAL_PREFERENCE: f64 = 0.1;

/// Pivots at or below this fraction of the largest matrix entry are singular.
const SINGULAR_RATIO: f64 = 1e-14;

/// Compressed sparse column matrix of reals. Row indices are sorted and
/// unique within each column; stored zeros are part of the pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
        }
        entries.sort_by_key(|a| (a.1, a.0));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let triplets = rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(j, v)| (i, j, *v))
        });
        Self::from_triplets(nrows, ncols, triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[range.clone()].binary_search(&row) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for (c, &xc) in x.iter().enumerate().take(self.ncols) {
            for (r, v) in self.col(c) {
                y[r] += v * xc;
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for c in 0..self.ncols {
            for (r, v) in self.col(c) {
                dense[r][c] = v;
            }
        }
        dense
    }

    fn same_pattern(&self, col_ptr: &[usize], row_idx: &[usize]) -> bool {
        self.col_ptr == col_ptr && self.row_idx == row_idx
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Column ordering computed from the sparsity pattern alone, reusable for
/// every matrix sharing that pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicLu {
    n: usize,
    col_perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SymbolicLu {
    pub fn analyze(m: &CscMatrix) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::DimensionMismatch {
                expected: m.nrows,
                found: m.ncols,
            });
        }
        Ok(Self {
            n: m.ncols,
            col_perm: minimum_degree(m),
            col_ptr: m.col_ptr.clone(),
            row_idx: m.row_idx.clone(),
        })
    }

    /// Elimination order: position `k` holds the column eliminated `k`-th.
    pub fn column_order(&self) -> &[usize] {
        &self.col_perm
    }

    pub fn matches(&self, m: &CscMatrix) -> bool {
        m.nrows == self.n && m.same_pattern(&self.col_ptr, &self.row_idx)
    }

    pub fn factorize(&self, m: &CscMatrix) -> Result<LuFactors> {
        if !self.matches(m) {
            return Err(Error::InvalidConfig(
                "matrix pattern differs from the analyzed pattern",
            ));
        }
        numeric_lu(m, &self.col_perm)
    }
}

/// Analyzes and factorizes in one go.
pub fn factorize(m: &CscMatrix) -> Result<LuFactors> {
    SymbolicLu::analyze(m)?.factorize(m)
}

/// `P A Q = L U`, with `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Original row chosen as pivot for step `k`.
    pivot_row: Vec<usize>,
    col_perm: Vec<usize>,
    /// Strictly lower part of `L` by column, rows in original numbering.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Strictly upper part of `U` by column, rows in pivot-step numbering.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros in `L + U` (diagonal counted once).
    pub fn nnz(&self) -> usize {
        self.n
            + self.l_cols.iter().map(Vec::len).sum::<usize>()
            + self.u_cols.iter().map(Vec::len).sum::<usize>()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut work = b.to_vec();
        let mut z = vec![0.0; self.n];
        for k in 0..self.n {
            let val = work[self.pivot_row[k]];
            z[k] = val;
            if val != 0.0 {
                for &(r, l) in &self.l_cols[k] {
                    work[r] -= l * val;
                }
            }
        }
        for k in (0..self.n).rev() {
            z[k] /= self.u_diag[k];
            let zk = z[k];
            if zk != 0.0 {
                for &(j, u) in &self.u_cols[k] {
                    z[j] -= u * zk;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = z[k];
        }
        Ok(x)
    }
}

fn numeric_lu(m: &CscMatrix, col_perm: &[usize]) -> Result<LuFactors> {
    const UNSET: usize = usize::MAX;
    let n = m.ncols;
    let tiny = SINGULAR_RATIO * m.max_abs();

    let mut pinv = vec![UNSET; n];
    let mut pivot_row = vec![0usize; n];
    let mut l_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut u_diag = Vec::with_capacity(n);

    let mut x = vec![0.0; n];
    let mut touched_mark = vec![false; n];
    let mut visited = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut topo: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for (k, &col) in col_perm.iter().enumerate() {
        touched.clear();
        topo.clear();
        for (r, v) in m.col(col) {
            x[r] = v;
            if !touched_mark[r] {
                touched_mark[r] = true;
                touched.push(r);
            }
        }

        // Reach of the column through the columns of L computed so far,
        // collected in post-order.
        for (r, _) in m.col(col) {
            let start = pinv[r];
            if start == UNSET || visited[start] == k {
                continue;
            }
            visited[start] = k;
            stack.push((start, 0));
            while let Some(&(j, mut next)) = stack.last() {
                let entries = &l_cols[j];
                let mut child = None;
                while next < entries.len() {
                    let candidate = pinv[entries[next].0];
                    next += 1;
                    if candidate != UNSET && visited[candidate] != k {
                        child = Some(candidate);
                        break;
                    }
                }
                if let Some(top) = stack.last_mut() {
                    top.1 = next;
                }
                match child {
                    Some(c) => {
                        visited[c] = k;
                        stack.push((c, 0));
                    }
                    None => {
                        topo.push(j);
                        stack.pop();
                    }
                }
            }
        }

        let mut u_col = Vec::with_capacity(topo.len());
        for &j in topo.iter().rev() {
            let xj = x[pivot_row[j]];
            u_col.push((j, xj));
            if xj == 0.0 {
                continue;
            }
            for &(r, l) in &l_cols[j] {
                x[r] -= l * xj;
                if !touched_mark[r] {
                    touched_mark[r] = true;
                    touched.push(r);
                }
            }
        }

        let mut best = UNSET;
        let mut best_abs = -1.0;
        for &r in &touched {
            if pinv[r] == UNSET && x[r].abs() > best_abs {
                best_abs = x[r].abs();
                best = r;
            }
        }
        if best == UNSET || best_abs <= tiny {
            return Err(Error::SingularMatrix { pivot: k });
        }
        if pinv[col] == UNSET && touched_mark[col] && x[col].abs() >= DIAGONAL_PREFERENCE * best_abs
        {
            best = col;
        }

        let pivot = x[best];
        pinv[best] = k;
        pivot_row[k] = best;
        let l_col = touched
            .iter()
            .filter(|&&r| pinv[r] == UNSET && x[r] != 0.0)
            .map(|&r| (r, x[r] / pivot))
            .collect();

        for &r in &touched {
            x[r] = 0.0;
            touched_mark[r] = false;
        }
        l_cols.push(l_col);
        u_cols.push(u_col);
        u_diag.push(pivot);
    }

    Ok(LuFactors {
        n,
        pivot_row,
        col_perm: col_perm.to_vec(),
        l_cols,
        u_cols,
        u_diag,
    })
}

/// Minimum-degree ordering on the pattern of `M + M^T`, ties broken by the
/// lowest index.
fn minimum_degree(m: &CscMatrix) -> Vec<usize> {
    let n = m.ncols;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for c in 0..n {
        for (r, _) in m.col(c) {
            if r != c {
                adj[r].insert(c);
                adj[c].insert(r);
            }
        }
    }
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let p = (0..n)
            .filter(|&i| !eliminated[i])
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
        eliminated[p] = true;
        order.push(p);
        let neighbors: Vec<usize> = core::mem::take(&mut adj[p]).into_iter().collect();
        for &a in &neighbors {
            adj[a].remove(&p);
            for &b in &neighbors {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    order
}
