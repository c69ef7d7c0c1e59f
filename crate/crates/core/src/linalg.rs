//! Solves with anchored graph Laplacians.
//!
//! The least-squares normal matrices are `M = L_w + diag(a)` with `L_w` a
//! weighted graph Laplacian and `a ≥ 0` anchor weights. Such matrices are
//! factorized as `M = L D Lᵀ` under a reverse Cuthill-McKee ordering. Pivots
//! are formed as `d_k = e_k + Σ_{j>k} |S_jk|` from the tracked row excess
//! `e` of the Schur complement, so every quantity is a sum of terms of one
//! sign and edge weights spanning hundreds of orders of magnitude stay
//! accurate. Systems whose envelope would exceed [`ENVELOPE_LIMIT`] entries
//! fall back to Jacobi-preconditioned conjugate gradients.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Largest envelope (stored strictly lower entries) factorized directly.
pub const ENVELOPE_LIMIT: usize = 20_000_000;

const CG_REL_TOL: f64 = 1e-12;

/// `M = L_w + diag(a)` in adjacency form.
#[derive(Debug, Clone)]
pub struct AnchoredLaplacian {
    adjacency: Vec<Vec<(usize, f64)>>,
    anchors: Vec<f64>,
}

impl AnchoredLaplacian {
    pub fn new(n: usize) -> Self {
        AnchoredLaplacian {
            adjacency: vec![Vec::new(); n],
            anchors: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.anchors.len()
    }

    /// Adds `w (e_i - e_j)(e_i - e_j)ᵀ`.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        if i == j {
            return;
        }
        for (a, b) in [(i, j), (j, i)] {
            match self.adjacency[a].iter_mut().find(|(c, _)| *c == b) {
                Some((_, x)) => *x += w,
                None => self.adjacency[a].push((b, w)),
            }
        }
    }

    /// Adds `w e_i e_iᵀ`.
    pub fn add_anchor(&mut self, i: usize, w: f64) {
        self.anchors[i] += w;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.adjacency
            .iter()
            .zip(&self.anchors)
            .map(|(row, a)| a + row.iter().map(|&(_, w)| w).sum::<f64>())
            .collect()
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.adjacency[i];
            *o = self.anchors[i] * x[i] + row.iter().map(|&(j, w)| w * (x[i] - x[j])).sum::<f64>();
        }
    }
}

/// Reverse Cuthill-McKee permutation: `order[k]` is the original index placed at `k`.
fn reverse_cuthill_mckee(m: &AnchoredLaplacian) -> Vec<usize> {
    let n = m.dim();
    let degree: Vec<usize> = m.adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            let mut next: Vec<usize> = m.adjacency[i]
                .iter()
                .map(|&(j, _)| j)
                .filter(|&j| !visited[j])
                .collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// `L D Lᵀ` with `L` unit lower triangular, stored by rows over the envelope.
#[derive(Debug, Clone)]
struct EnvelopeLdl {
    /// `perm[old] = new`.
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    /// Strictly lower entries; `S_ij` (negative) before elimination, `L_ij` after.
    values: Vec<f64>,
    pivots: Vec<f64>,
}

impl EnvelopeLdl {
    fn envelope(m: &AnchoredLaplacian, perm: &[usize]) -> (Vec<usize>, usize) {
        let n = m.dim();
        let mut first: Vec<usize> = (0..n).collect();
        for (old, row) in m.adjacency.iter().enumerate() {
            let i = perm[old];
            for &(j_old, _) in row {
                first[i] = first[i].min(perm[j_old]);
            }
        }
        let size = first.iter().enumerate().map(|(i, &f)| i - f).sum();
        (first, size)
    }

    fn factor(m: &AnchoredLaplacian, perm: Vec<usize>, first: Vec<usize>) -> Result<Self> {
        let n = m.dim();
        let mut offset = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        for (i, &f) in first.iter().enumerate() {
            offset.push(acc);
            acc += i - f;
        }
        offset.push(acc);
        let mut values = vec![0.0; acc];
        let mut excess = vec![0.0; n];
        for (old, row) in m.adjacency.iter().enumerate() {
            let i = perm[old];
            excess[i] = m.anchors[old];
            for &(j_old, w) in row {
                let j = perm[j_old];
                if j < i {
                    values[offset[i] + j - first[i]] -= w;
                }
            }
        }
        // rows whose envelope reaches column k, for k < row
        let mut column_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for k in first[i]..i {
                column_rows[k].push(i);
            }
        }
        let at = |i: usize, k: usize| offset[i] + k - first[i];
        let mut pivots = vec![0.0; n];
        for k in 0..n {
            let rows = &column_rows[k];
            let d = excess[k] + rows.iter().map(|&j| -values[at(j, k)]).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { row: k, pivot: d });
            }
            pivots[k] = d;
            for (p, &i) in rows.iter().enumerate() {
                let sik = values[at(i, k)];
                excess[i] += -sik * excess[k] / d;
                for &j in &rows[..p] {
                    let sjk = values[at(j, k)];
                    values[at(i, j)] -= sik * sjk / d;
                }
            }
            for &i in rows {
                values[at(i, k)] /= d;
            }
        }
        Ok(EnvelopeLdl {
            perm,
            first,
            offset,
            values,
            pivots,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = vec![0.0; n];
        for (old, &v) in rhs.iter().enumerate() {
            y[self.perm[old]] = v;
        }
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for (v, d) in y.iter_mut().zip(&self.pivots) {
            *v /= d;
        }
        for i in (0..n).rev() {
            let yi = y[i];
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            for (k, a) in row.iter().enumerate() {
                y[fi + k] -= a * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (old, &new) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Direct(EnvelopeLdl),
    Iterative {
        matrix: AnchoredLaplacian,
        inv_diag: Vec<f64>,
    },
}

/// Reusable solver for `M x = b`.
#[derive(Debug, Clone)]
pub struct LaplacianSolver {
    backend: Backend,
}

impl LaplacianSolver {
    pub fn new(matrix: AnchoredLaplacian) -> Result<Self> {
        Self::with_limit(matrix, ENVELOPE_LIMIT)
    }

    pub fn with_limit(matrix: AnchoredLaplacian, envelope_limit: usize) -> Result<Self> {
        let order = reverse_cuthill_mckee(&matrix);
        let mut perm = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        let (first, size) = EnvelopeLdl::envelope(&matrix, &perm);
        if size <= envelope_limit {
            return Ok(LaplacianSolver {
                backend: Backend::Direct(EnvelopeLdl::factor(&matrix, perm, first)?),
            });
        }
        let diag = matrix.diagonal();
        if let Some(row) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                row,
                pivot: diag[row],
            });
        }
        Ok(LaplacianSolver {
            backend: Backend::Iterative {
                inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                matrix,
            },
        })
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves `M x = rhs`; `guess` warm-starts the iterative backend.
    pub fn solve(&self, rhs: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Direct(ldl) => Ok(ldl.solve(rhs)),
            Backend::Iterative { matrix, inv_diag } => pcg(matrix, inv_diag, rhs, guess),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pcg(m: &AnchoredLaplacian, inv_diag: &[f64], b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = guess.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    m.mul(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let max_iters = 10 * n + 100;
    for _ in 0..max_iters {
        if dot(&r, &r).sqrt() <= CG_REL_TOL * bnorm {
            return Ok(x);
        }
        m.mul(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve {
        iterations: max_iters,
        residual: dot(&r, &r).sqrt() / bnorm,
    })
}
