//! Compressed-sparse-column matrices and a sparse LU factorization.
//!
//! The factorization is the classic left-looking scheme: each column of `L`
//! and `U` is obtained from one sparse triangular solve whose nonzero
//! pattern is found by a depth-first search through the columns of `L`
//! computed so far. Rows are chosen by partial pivoting with a preference
//! for the diagonal entry, and columns are pre-ordered by reverse
//! Cuthill–McKee so that fill stays inside a narrow profile.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Square or rectangular complex matrix in CSC layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CscMatrix {
    /// Assembles a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; entries whose summed magnitude is `<= drop_tol` are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
        drop_tol: f64,
    ) -> Self {
        triplets.sort_unstable_by_key(|t| (t.1, t.0));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            debug_assert!(i < nrows && j < ncols);
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if i2 != i || j2 != j {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v.norm() > drop_tol {
                row_idx.push(i);
                values.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
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

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[C64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// `Aᵀ y` (plain transpose, no conjugation).
    pub fn tr_mul_vec(&self, y: &[C64]) -> Vec<C64> {
        assert_eq!(y.len(), self.nrows);
        (0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum()
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Dense copy, for small matrices in tests and diagnostics.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Symmetric adjacency of the pattern of `A + Aᵀ`, without self loops.
    fn symmetric_pattern(&self) -> Vec<Vec<usize>> {
        let n = self.nrows.max(self.ncols);
        let mut adj = vec![Vec::new(); n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

/// Reverse Cuthill–McKee ordering of the symmetrized pattern. Every
/// connected component is ordered separately, so block-diagonal structure
/// survives the permutation.
pub fn rcm_ordering(a: &CscMatrix) -> Vec<usize> {
    let adj = a.symmetric_pattern();
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

// A few rounds of "jump to the farthest, lowest-degree node".
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut start = seed;
    let mut eccentricity = 0;
    for _ in 0..8 {
        let (levels, last) = bfs_levels(start, adj);
        if levels <= eccentricity {
            break;
        }
        eccentricity = levels;
        let candidate = last
            .into_iter()
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(start);
        if candidate == start {
            break;
        }
        start = candidate;
    }
    start
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(start, 0usize);
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in &adj[v] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(u) {
                    e.insert(depth + 1);
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

const UNSET: usize = usize::MAX;

/// `P A Q = L U` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    l: CscMatrix,
    u: CscMatrix,
    /// `pinv[i]` is the pivot position of original row `i`.
    pinv: Vec<usize>,
    /// Column `k` of the factorization is original column `q[k]`.
    q: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl SparseLu {
    /// Factorizes a square matrix with an RCM column pre-ordering.
    pub fn factorize(a: &CscMatrix) -> Result<Self> {
        let q = rcm_ordering(a);
        Self::factorize_with_ordering(a, q, 0.1)
    }

    /// `diag_tol` in `(0, 1]`: the diagonal row is kept as pivot whenever
    /// its magnitude is at least `diag_tol` times the column maximum.
    pub fn factorize_with_ordering(a: &CscMatrix, q: Vec<usize>, diag_tol: f64) -> Result<Self> {
        let n = a.ncols;
        if a.nrows != n || q.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows,
            });
        }

        let mut lp = vec![0usize; n + 1];
        let mut li: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut lx: Vec<C64> = Vec::with_capacity(4 * a.nnz() + n);
        let mut up = vec![0usize; n + 1];
        let mut ui: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut ux: Vec<C64> = Vec::with_capacity(4 * a.nnz() + n);

        let mut pinv = vec![UNSET; n];
        let mut x = vec![C64::new(0.0, 0.0); n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut marked = vec![false; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;

        for k in 0..n {
            lp[k] = li.len();
            up[k] = ui.len();
            let col = q[k];

            // Pattern of x = L \ A(:, col), in topological order xi[top..n].
            let (a_rows, a_vals) = a.col(col);
            let mut top = n;
            for &i in a_rows {
                if !marked[i] {
                    top = dfs(
                        i,
                        &lp,
                        &li,
                        &pinv,
                        top,
                        &mut xi,
                        &mut stack,
                        &mut pstack,
                        &mut marked,
                    );
                }
            }
            for &i in &xi[top..n] {
                marked[i] = false;
                x[i] = C64::new(0.0, 0.0);
            }
            for (&i, &v) in a_rows.iter().zip(a_vals) {
                x[i] = v;
            }
            for &j in &xi[top..n] {
                let jcol = pinv[j];
                if jcol == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj == C64::new(0.0, 0.0) {
                    continue;
                }
                // skip the unit diagonal stored first in each L column
                for p in lp[jcol] + 1..lp[jcol + 1] {
                    x[li[p]] -= lx[p] * xj;
                }
            }

            let mut ipiv = UNSET;
            let mut best = -1.0f64;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let mag = x[i].norm();
                    if mag > best {
                        best = mag;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv == UNSET || best <= 0.0 {
                return Err(Error::Singular { column: k });
            }
            if pinv[col] == UNSET && x[col].norm() >= diag_tol * best {
                ipiv = col;
            }
            let pivot = x[ipiv];
            min_pivot = min_pivot.min(pivot.norm());
            max_pivot = max_pivot.max(pivot.norm());
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(C64::new(1.0, 0.0));
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    li.push(i);
                    lx.push(x[i] / pivot);
                }
                x[i] = C64::new(0.0, 0.0);
            }
        }
        lp[n] = li.len();
        up[n] = ui.len();
        for r in &mut li {
            *r = pinv[*r];
        }

        Ok(SparseLu {
            n,
            l: CscMatrix {
                nrows: n,
                ncols: n,
                col_ptr: lp,
                row_idx: li,
                values: lx,
            },
            u: CscMatrix {
                nrows: n,
                ncols: n,
                col_ptr: up,
                row_idx: ui,
                values: ux,
            },
            pinv,
            q,
            min_pivot,
            max_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot magnitude divided by the largest.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Stored entries of `L` and `U` together.
    pub fn fill(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let mut x = vec![C64::new(0.0, 0.0); self.n];
        for (i, &bi) in b.iter().enumerate() {
            x[self.pinv[i]] = bi;
        }
        // L y = P b (unit diagonal first in each column)
        for j in 0..self.n {
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let (rows, vals) = self.l.col(j);
            for (&i, &v) in rows.iter().zip(vals).skip(1) {
                x[i] -= v * xj;
            }
        }
        // U z = y (diagonal last in each column)
        for j in (0..self.n).rev() {
            let (rows, vals) = self.u.col(j);
            let last = rows.len() - 1;
            x[j] /= vals[last];
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for (&i, &v) in rows[..last].iter().zip(&vals[..last]) {
                x[i] -= v * xj;
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (k, &col) in self.q.iter().enumerate() {
            out[col] = x[k];
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    root: usize,
    lp: &[usize],
    li: &[usize],
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    stack: &mut [usize],
    pstack: &mut [usize],
    marked: &mut [bool],
) -> usize {
    let mut head: isize = 0;
    stack[0] = root;
    while head >= 0 {
        let h = head as usize;
        let j = stack[h];
        let jcol = pinv[j];
        if !marked[j] {
            marked[j] = true;
            pstack[h] = if jcol == UNSET { 0 } else { lp[jcol] };
        }
        let end = if jcol == UNSET { 0 } else { lp[jcol + 1] };
        let mut done = true;
        let mut p = pstack[h];
        while p < end {
            let i = li[p];
            p += 1;
            if marked[i] {
                continue;
            }
            pstack[h] = p;
            head += 1;
            stack[head as usize] = i;
            done = false;
            break;
        }
        if done {
            head -= 1;
            top -= 1;
            xi[top] = j;
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_sparse(n: usize, density: f64, seed: u64) -> CscMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            // diagonally weighted so the matrix is safely nonsingular
            t.push((i, i, c(4.0 + rng.random::<f64>(), rng.random::<f64>())));
            for j in 0..n {
                if i != j && rng.random::<f64>() < density {
                    t.push((
                        i,
                        j,
                        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    ));
                }
            }
        }
        CscMatrix::from_triplets(n, n, t, 0.0)
    }

    #[test]
    fn triplets_are_summed_and_small_entries_dropped() {
        let m = CscMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 0, c(2.0, 0.0)),
                (1, 0, c(1e-17, 0.0)),
                (0, 1, c(0.0, 1.0)),
            ],
            1e-15,
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), c(3.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, 1.0));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = random_sparse(40, 0.05, 3);
        let mut q = rcm_ordering(&a);
        q.sort_unstable();
        assert_eq!(q, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn lu_solves_random_systems() {
        for seed in 0..5 {
            let n = 60;
            let a = random_sparse(n, 0.04, seed);
            let lu = SparseLu::factorize(&a).unwrap();
            let b: Vec<C64> = (0..n).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
            let x = lu.solve(&b);
            let r = a.mul_vec(&x);
            let err: f64 = r
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-11, "seed {seed}: residual {err}");
        }
    }

    #[test]
    fn lu_pivots_off_the_diagonal_when_needed() {
        // zero diagonal forces row exchanges
        let a = CscMatrix::from_triplets(
            3,
            3,
            vec![
                (1, 0, c(2.0, 0.0)),
                (0, 1, c(1.0, 0.0)),
                (2, 1, c(1.0, 1.0)),
                (0, 2, c(3.0, 0.0)),
                (2, 2, c(0.0, 0.0)),
            ],
            0.0,
        );
        let lu = SparseLu::factorize(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let x = lu.solve(&b);
        let dense: DMatrix<C64> = a.to_dense();
        let xd = dense
            .lu()
            .solve(&nalgebra::DVector::from_vec(b.clone()))
            .unwrap();
        for i in 0..3 {
            assert!((x[i] - xd[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CscMatrix::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))], 0.0);
        assert!(matches!(
            SparseLu::factorize(&a),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn transpose_product_matches_dense() {
        let a = random_sparse(12, 0.2, 9);
        let y: Vec<C64> = (0..12).map(|i| c(1.0, i as f64)).collect();
        let got = a.tr_mul_vec(&y);
        let d = a.to_dense();
        for j in 0..12 {
            let want: C64 = (0..12).map(|i| d[(i, j)] * y[i]).sum();
            assert!((got[j] - want).norm() < 1e-12);
        }
    }
}
