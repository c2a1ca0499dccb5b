use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::math;
use crate::{Error, Result};

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.rows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| a.row(r).map(|(c, _)| c).filter(|&c| c != r).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
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

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(current, adj);
        let far = levels
            .iter()
            .copied()
            .filter(|&l| l != usize::MAX)
            .max()
            .unwrap_or(0);
        if far <= ecc {
            break;
        }
        ecc = far;
        current = (0..adj.len())
            .filter(|&i| levels[i] == far)
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
    }
    current
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if level[u] == usize::MAX {
                level[u] = level[v] + 1;
                queue.push_back(u);
            }
        }
    }
    level
}

/// Profile (skyline) Cholesky factorization `P A Pᵀ = L Lᵀ` of a sparse SPD matrix.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factor `a` after a reverse Cuthill–McKee reordering. `label` is used in
    /// the error when a pivot is not positive.
    pub fn factor(a: &CsrMatrix, label: &str) -> Result<Self> {
        let n = a.rows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old_r in 0..n {
            let r = inv[old_r];
            for (old_c, _) in a.row(old_r) {
                let c = inv[old_c];
                if c < r && c < first[r] {
                    first[r] = c;
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for old_r in 0..n {
            let r = inv[old_r];
            for (old_c, v) in a.row(old_r) {
                let c = inv[old_c];
                if c <= r {
                    data[start[r] + c - first[r]] += v;
                }
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = data[start[i] + j - first[i]];
                for k in lo..j {
                    s -= data[start[i] + k - first[i]] * data[start[j] + k - first[j]];
                }
                if j == i {
                    if s <= 1e-14 * scale {
                        return Err(Error::NotPositiveDefinite {
                            block: String::from(label),
                            detail: format!("pivot {s:.3e} at original index {}", perm[i]),
                        });
                    }
                    data[start[i] + i - first[i]] = math::sqrt(s);
                } else {
                    data[start[i] + j - first[i]] = s / data[start[j] + j - first[j]];
                }
            }
        }
        Ok(Self {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored profile entries of `L`.
    pub fn profile_len(&self) -> usize {
        self.data.len()
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.data[self.start[i] + j - self.first[i]]
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.l(i, k) * y[k];
            }
            y[i] = s / self.l(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.l(i, i);
            let yi = y[i];
            for k in self.first[i]..i {
                y[k] -= self.l(i, k) * yi;
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
    use crate::linalg::TripletBuilder;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(50);
        let chol = SkylineCholesky::factor(&a, "test").unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = chol.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn rcm_is_a_permutation_and_keeps_profile_small() {
        // 2D grid laplacian numbered badly (column-major shuffled by stride)
        let m = 12;
        let n = m * m;
        let id = |i: usize, j: usize| (i * 7 + j * 5 * m) % n;
        let mut t = TripletBuilder::new(n, n);
        for i in 0..m {
            for j in 0..m {
                t.push(id(i, j), id(i, j), 4.0);
                if i + 1 < m {
                    t.push(id(i, j), id(i + 1, j), -1.0);
                    t.push(id(i + 1, j), id(i, j), -1.0);
                }
                if j + 1 < m {
                    t.push(id(i, j), id(i, j + 1), -1.0);
                    t.push(id(i, j + 1), id(i, j), -1.0);
                }
            }
        }
        let a = t.build();
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
        let chol = SkylineCholesky::factor(&a, "grid").unwrap();
        assert!(chol.profile_len() < n * (2 * m + 2));
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let x = chol.solve(&b);
        let r = a.mul_vec(&x);
        assert!(r.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9));
    }

    #[test]
    fn indefinite_matrix_reports_pivot() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 2.0);
        t.push(1, 1, 1.0);
        let err = SkylineCholesky::factor(&t.build(), "block").unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }
}
