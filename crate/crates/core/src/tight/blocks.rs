//! Block operators `A_i`, offsets `b_i` and the normal-equation solver.
//!
//! The unknowns are the interior values stacked node-major,
//! `x = (u(v_1), ..., u(v_N)) ∈ R^{N m}`. Block `i` has one group of `m`
//! rows per neighbor `y` of `v_i`:
//!
//! * interior neighbor `v_l`: `sqrt(w) (x_i - x_l)`, offset `0`;
//! * boundary neighbor `y`: `sqrt(w) x_i`, offset `sqrt(w) g(y)`.
//!
//! Hence the groups of `A_i x - b_i` are the weighted differences
//! `sqrt(w) (u(v_i) - u(y))` and `‖A_i x - b_i‖₂,∞ = S u(v_i)`.
//!
//! Least-squares steps minimize `Σ_g ω_g |A_g x - r_g|²` over the row
//! groups `g` with positive group weights `ω` (all ones by default). Every
//! group acts identically on all channels, so the normal matrix is
//! `L ⊗ I_m` with `L` a boundary-anchored weighted graph Laplacian, which
//! is factorized once per choice of weights.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{BoundaryProblem, VertexFunction};
use crate::linalg::{AnchoredLaplacian, LaplacianSolver};

/// Neighbor reference of one row group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupKind {
    /// Interior neighbor, by interior index.
    Interior(usize),
    /// Boundary neighbor, by node id.
    Boundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowGroup {
    pub kind: GroupKind,
    pub sqrt_weight: f64,
}

/// The stacked system `A x - b` with its reusable least-squares solver.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    dim: usize,
    interior: Vec<usize>,
    groups: Vec<RowGroup>,
    block_start: Vec<usize>,
    offset: Vec<f64>,
    weights: Vec<f64>,
    solver: LaplacianSolver,
}

impl BlockSystem {
    /// Assembles all blocks with unit group weights.
    pub fn assemble(prob: &BoundaryProblem) -> Result<Self> {
        let interior = prob.interior();
        if interior.is_empty() {
            return Err(Error::NothingToExtend);
        }
        let n = prob.node_count();
        let m = prob.dim();
        let mut slot = vec![usize::MAX; n];
        for (k, &x) in interior.iter().enumerate() {
            slot[x] = k;
        }
        let graph = prob.graph();
        let mut groups = Vec::new();
        let mut block_start = Vec::with_capacity(interior.len() + 1);
        let mut offset = Vec::new();
        for &x in &interior {
            block_start.push(groups.len());
            for &(y, w) in graph.neighbors(x) {
                let sw = w.sqrt();
                match prob.boundary_value(y) {
                    Some(g) => {
                        groups.push(RowGroup {
                            kind: GroupKind::Boundary(y),
                            sqrt_weight: sw,
                        });
                        offset.extend(g.iter().map(|v| sw * v));
                    }
                    None => {
                        groups.push(RowGroup {
                            kind: GroupKind::Interior(slot[y]),
                            sqrt_weight: sw,
                        });
                        offset.extend(std::iter::repeat(0.0).take(m));
                    }
                }
            }
        }
        block_start.push(groups.len());
        let weights = vec![1.0; groups.len()];
        let solver = Self::factor(interior.len(), &groups, &block_start, &weights)?;
        Ok(BlockSystem {
            dim: m,
            interior,
            groups,
            block_start,
            offset,
            weights,
            solver,
        })
    }

    fn factor(
        n: usize,
        groups: &[RowGroup],
        block_start: &[usize],
        weights: &[f64],
    ) -> Result<LaplacianSolver> {
        let mut normal = AnchoredLaplacian::new(n);
        for i in 0..n {
            for (k, g) in groups.iter().enumerate().take(block_start[i + 1]).skip(block_start[i]) {
                let w = weights[k] * g.sqrt_weight * g.sqrt_weight;
                match g.kind {
                    GroupKind::Interior(l) => normal.add_edge(i, l, w),
                    GroupKind::Boundary(_) => normal.add_anchor(i, w),
                }
            }
        }
        LaplacianSolver::new(normal)
    }

    /// Replaces the group weights `ω` and refactorizes.
    pub fn reweight(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.groups.len() {
            return Err(Error::DimensionMismatch {
                expected: self.groups.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("group weight {w} is not positive")));
        }
        self.solver = Self::factor(self.interior.len(), &self.groups, &self.block_start, &weights)?;
        self.weights = weights;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N`, the number of interior nodes.
    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Interior node ids, in unknown order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// `k_i` for every block.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.block_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total_groups(&self) -> usize {
        self.groups.len()
    }

    /// Length of the stacked unknown vector, `N m`.
    pub fn unknowns(&self) -> usize {
        self.interior.len() * self.dim
    }

    /// Length of the stacked row vector, `Σ k_i m`.
    pub fn rows(&self) -> usize {
        self.groups.len() * self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Group range of block `i`.
    pub fn block_group_range(&self, i: usize) -> Range<usize> {
        self.block_start[i]..self.block_start[i + 1]
    }

    /// Row range of block `i` in stacked vectors.
    pub fn block_rows(&self, i: usize) -> Range<usize> {
        self.block_start[i] * self.dim..self.block_start[i + 1] * self.dim
    }

    pub fn block_groups(&self, i: usize) -> &[RowGroup] {
        &self.groups[self.block_start[i]..self.block_start[i + 1]]
    }

    /// The stacked offset `b`.
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn block_offset(&self, i: usize) -> &[f64] {
        &self.offset[self.block_rows(i)]
    }

    pub(crate) fn scale_offset(&mut self, c: f64) {
        self.offset.iter_mut().for_each(|b| *b *= c);
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.interior.len() {
            let rows = self.block_rows(i);
            self.apply_block_into(i, x, &mut out[rows]);
        }
    }

    /// `A_i x`.
    pub fn apply_block(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.block_rows(i).len()];
        self.apply_block_into(i, x, &mut out);
        out
    }

    fn apply_block_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let m = self.dim;
        let xi = &x[i * m..(i + 1) * m];
        for (g, o) in self.block_groups(i).iter().zip(out.chunks_mut(m)) {
            match g.kind {
                GroupKind::Interior(l) => {
                    let xl = &x[l * m..(l + 1) * m];
                    for c in 0..m {
                        o[c] = g.sqrt_weight * (xi[c] - xl[c]);
                    }
                }
                GroupKind::Boundary(_) => {
                    for c in 0..m {
                        o[c] = g.sqrt_weight * xi[c];
                    }
                }
            }
        }
    }

    /// `Σ_g ω_g A_gᵀ y_g`.
    fn weighted_transpose(&self, y: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; self.unknowns()];
        for i in 0..self.interior.len() {
            let range = self.block_group_range(i);
            let weights = &self.weights[range];
            let rows = self.block_rows(i);
            for ((g, yg), omega) in self.block_groups(i).iter().zip(y[rows].chunks(m)).zip(weights) {
                let f = omega * g.sqrt_weight;
                for c in 0..m {
                    out[i * m + c] += f * yg[c];
                }
                if let GroupKind::Interior(l) = g.kind {
                    for c in 0..m {
                        out[l * m + c] -= f * yg[c];
                    }
                }
            }
        }
        out
    }

    /// `Aᵀ y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; self.unknowns()];
        for i in 0..self.interior.len() {
            let rows = self.block_rows(i);
            for (g, yg) in self.block_groups(i).iter().zip(y[rows].chunks(m)) {
                for c in 0..m {
                    out[i * m + c] += g.sqrt_weight * yg[c];
                }
                if let GroupKind::Interior(l) = g.kind {
                    for c in 0..m {
                        out[l * m + c] -= g.sqrt_weight * yg[c];
                    }
                }
            }
        }
        out
    }

    /// Minimizer of `Σ_g ω_g |A_g x - rhs_g|²` (plain least squares for unit
    /// weights), using the stored factorization.
    pub fn least_squares_step(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.least_squares_warm(rhs, None)
    }

    pub(crate) fn least_squares_warm(&self, rhs: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        if rhs.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                found: rhs.len(),
            });
        }
        let m = self.dim;
        let n = self.interior.len();
        let atb = self.weighted_transpose(rhs);
        let mut x = vec![0.0; self.unknowns()];
        for c in 0..m {
            let col: Vec<f64> = (0..n).map(|i| atb[i * m + c]).collect();
            let g: Option<Vec<f64>> = guess.map(|g| (0..n).map(|i| g[i * m + c]).collect());
            let sol = self.solver.solve(&col, g.as_deref())?;
            for i in 0..n {
                x[i * m + c] = sol[i];
            }
        }
        Ok(x)
    }

    /// Interior values of `u`, stacked.
    pub fn pack(&self, u: &VertexFunction) -> Vec<f64> {
        self.interior
            .iter()
            .flat_map(|&x| u.get(x).iter().copied())
            .collect()
    }

    /// The extension with interior values `x` and `g` on `U`.
    pub fn unpack(&self, x: &[f64], prob: &BoundaryProblem) -> VertexFunction {
        let mut u = prob.filled_with(&vec![0.0; self.dim]);
        for (k, &node) in self.interior.iter().enumerate() {
            u.set(node, &x[k * self.dim..(k + 1) * self.dim]);
        }
        u
    }

    /// Dense rows of `A_i` (size `k_i m` by `N m`), for inspection.
    pub fn dense_block(&self, i: usize) -> Vec<Vec<f64>> {
        let m = self.dim;
        let cols = self.unknowns();
        let mut rows = Vec::new();
        for g in self.block_groups(i) {
            for c in 0..m {
                let mut row = vec![0.0; cols];
                row[i * m + c] = g.sqrt_weight;
                if let GroupKind::Interior(l) = g.kind {
                    row[l * m + c] = -g.sqrt_weight;
                }
                rows.push(row);
            }
        }
        rows
    }
}
