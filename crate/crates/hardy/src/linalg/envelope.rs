use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{HardyError, Result};

/// Reverse Cuthill–McKee ordering of the symmetrized pattern; `order[new] = old`.
pub fn reverse_cuthill_mckee(m: &CsrMatrix) -> Vec<usize> {
    let n = m.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in m.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut depth = bfs_levels(current, adj).len();
    loop {
        let levels = bfs_levels(current, adj);
        let last = levels.last().unwrap();
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let cand_depth = bfs_levels(candidate, adj).len();
        if cand_depth <= depth {
            return current;
        }
        current = candidate;
        depth = cand_depth;
    }
}

/// Cholesky factor `P M Pᵀ = L Lᵀ` stored by rows over the envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `m` in the ordering `perm` (`perm[new] = old`); fails with the
    /// offending row when a pivot is not positive.
    pub fn factor(m: &CsrMatrix, perm: &[usize]) -> Result<Self> {
        let n = m.dim();
        if perm.len() != n {
            return Err(HardyError::invalid("permutation length differs from matrix dimension"));
        }
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in m.row(old) {
                let jn = inv[j];
                if jn < new {
                    first[new] = first[new].min(jn);
                } else if jn > new {
                    first[jn] = first[jn].min(new);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut data = vec![0.0; total];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in m.row(old) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + jn - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &done[start[j]..start[j] + j - fj + 1];
                let mut s = row_i[j - fi];
                s -= row_i[lo - fi..j - fi]
                    .iter()
                    .zip(&row_j[lo - fj..j - fj])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
                row_i[j - fi] = s / row_j[j - fj];
            }
            let off: f64 = row_i[..i - fi].iter().map(|v| v * v).sum();
            let pivot = row_i[i - fi] - off;
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(HardyError::NotPositiveDefinite { row: perm[i] });
            }
            row_i[i - fi] = pivot.sqrt();
        }
        Ok(EnvelopeCholesky { perm: perm.to_vec(), first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrBuilder;

    fn grid_laplacian(nx: usize, ny: usize) -> CsrMatrix {
        let id = |i: usize, j: usize| i * ny + j;
        let mut b = CsrBuilder::new(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                b.add(id(i, j), id(i, j), 4.0);
                if i > 0 {
                    b.add(id(i, j), id(i - 1, j), -1.0);
                }
                if i + 1 < nx {
                    b.add(id(i, j), id(i + 1, j), -1.0);
                }
                if j > 0 {
                    b.add(id(i, j), id(i, j - 1), -1.0);
                }
                if j + 1 < ny {
                    b.add(id(i, j), id(i, j + 1), -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_envelope() {
        let a = grid_laplacian(30, 5);
        let mut order = reverse_cuthill_mckee(&a);
        let natural: Vec<usize> = (0..a.dim()).collect();
        let f_rcm = EnvelopeCholesky::factor(&a, &order).unwrap();
        let f_nat = EnvelopeCholesky::factor(&a, &natural).unwrap();
        assert!(f_rcm.envelope_size() <= f_nat.envelope_size());
        order.sort_unstable();
        assert_eq!(order, natural);
    }

    #[test]
    fn solve_reproduces_constructed_solution() {
        let a = grid_laplacian(12, 9);
        let x: Vec<f64> = (0..a.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let rhs = a.mul_vec(&x);
        let f = EnvelopeCholesky::factor(&a, &reverse_cuthill_mckee(&a)).unwrap();
        for (u, v) in f.solve(&rhs).iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::diagonal(&[1.0, -2.0]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a, &[0, 1]),
            Err(HardyError::NotPositiveDefinite { row: 1 })
        ));
    }
}
