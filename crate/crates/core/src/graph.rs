//! Weighted graphs, boundary problems and local Lipschitz constants.
//!
//! A [`WeightedGraph`] is undirected, connected and carries weights in `(0, 1]`.
//! A [`BoundaryProblem`] fixes vector values on a nonempty node set `U`; the
//! remaining nodes are the interior that the solvers extend into.
//!
//! The local Lipschitz constant of `u` at `x` is
//! `S u(x) = max_{y ~ x} sqrt(w(x, y)) * |u(y) - u(x)|` with the Euclidean norm
//! on the value space.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};

const PARALLEL_THRESHOLD: usize = 2048;

/// Undirected connected graph stored as symmetric adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl WeightedGraph {
    /// Builds a graph from undirected edges, each listed once.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); node_count];
        for &(i, j, w) in edges {
            check_edge(node_count, i, j, w)?;
            if adjacency[i].iter().any(|&(y, _)| y == j) {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        let graph = WeightedGraph {
            adjacency,
            edge_count: edges.len(),
        };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Builds a graph from per-node adjacency lists, which must already be
    /// symmetric.
    pub fn from_adjacency(adjacency: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut half_edges = 0usize;
        for (i, list) in adjacency.iter().enumerate() {
            for (pos, &(j, w)) in list.iter().enumerate() {
                check_edge(n, i, j, w)?;
                if list[..pos].iter().any(|&(y, _)| y == j) {
                    return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
                }
                match adjacency[j].iter().find(|&&(y, _)| y == i) {
                    Some(&(_, back)) if back == w => {}
                    Some(&(_, back)) => {
                        return Err(Error::AsymmetricWeight {
                            i,
                            j,
                            forward: w,
                            backward: back,
                        })
                    }
                    None => {
                        return Err(Error::AsymmetricWeight {
                            i,
                            j,
                            forward: w,
                            backward: 0.0,
                        })
                    }
                }
                half_edges += 1;
            }
        }
        let graph = WeightedGraph {
            adjacency,
            edge_count: half_edges / 2,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(unreachable) => Err(Error::Disconnected { unreachable }),
            None => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Neighbors of `x` with their weights, in insertion order.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency
            .get(x)?
            .iter()
            .find(|&&(z, _)| z == y)
            .map(|&(_, w)| w)
    }

    /// Undirected edges `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                list.iter()
                    .filter(move |&&(j, _)| i < j)
                    .map(move |&(j, w)| (i, j, w))
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    /// Returns the same graph with node `x` renamed to `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(i, j, w)| (perm[i], perm[j], w))
            .collect();
        WeightedGraph::from_edges(n, &edges)
    }
}

fn check_edge(n: usize, i: usize, j: usize, w: f64) -> Result<()> {
    for index in [i, j] {
        if index >= n {
            return Err(Error::NodeOutOfRange {
                index,
                node_count: n,
            });
        }
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidWeight {
            i: i.min(j),
            j: i.max(j),
            weight: w,
        });
    }
    Ok(())
}

/// A function `u: V -> R^m`, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    dim: usize,
    data: Vec<f64>,
}

impl VertexFunction {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * (data.len() / dim + 1),
                found: data.len(),
            });
        }
        Ok(VertexFunction { dim, data })
    }

    pub fn zeros(node_count: usize, dim: usize) -> Self {
        VertexFunction {
            dim,
            data: vec![0.0; node_count * dim],
        }
    }

    /// Builds a function from one value vector per node.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        VertexFunction::new(dim, data)
    }

    /// Scalar function from one value per node.
    pub fn scalar(values: Vec<f64>) -> Self {
        VertexFunction { dim: 1, data: values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn get(&self, x: usize) -> &[f64] {
        &self.data[x * self.dim..(x + 1) * self.dim]
    }

    pub fn get_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.data[x * self.dim..(x + 1) * self.dim]
    }

    pub fn set(&mut self, x: usize, value: &[f64]) {
        self.get_mut(x).copy_from_slice(value);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Channel `j` as a scalar function.
    pub fn component(&self, j: usize) -> VertexFunction {
        VertexFunction::scalar(self.data.iter().skip(j).step_by(self.dim).copied().collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> VertexFunction {
        VertexFunction {
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Largest Euclidean distance between corresponding node values.
    pub fn max_distance(&self, other: &VertexFunction) -> f64 {
        self.data
            .chunks(self.dim)
            .zip(other.data.chunks(other.dim))
            .map(|(a, b)| euclidean(a, b))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Graph plus boundary data `g: U -> R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProblem {
    graph: WeightedGraph,
    dim: usize,
    boundary: Vec<usize>,
    values: Vec<f64>,
    slot: Vec<Option<usize>>,
}

impl BoundaryProblem {
    /// `entries` maps boundary nodes to their values; order does not matter.
    pub fn new<R: AsRef<[f64]>>(graph: WeightedGraph, entries: &[(usize, R)]) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(Error::InvalidBoundary("boundary set is empty".into()));
        };
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::InvalidBoundary("boundary values have dimension 0".into()));
        }
        let n = graph.node_count();
        let mut sorted: Vec<(usize, &[f64])> =
            entries.iter().map(|(x, v)| (*x, v.as_ref())).collect();
        sorted.sort_by_key(|&(x, _)| x);
        let mut slot = vec![None; n];
        let mut boundary = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len() * dim);
        for (x, v) in sorted {
            if x >= n {
                return Err(Error::NodeOutOfRange {
                    index: x,
                    node_count: n,
                });
            }
            if slot[x].is_some() {
                return Err(Error::InvalidBoundary(format!(
                    "node {x} has more than one boundary value"
                )));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidBoundary(format!(
                    "node {x} has a non-finite boundary value"
                )));
            }
            slot[x] = Some(boundary.len());
            boundary.push(x);
            values.extend_from_slice(v);
        }
        Ok(BoundaryProblem {
            graph,
            dim,
            boundary,
            values,
            slot,
        })
    }

    /// Scalar boundary problem from `(node, value)` pairs.
    pub fn scalar(graph: WeightedGraph, entries: &[(usize, f64)]) -> Result<Self> {
        let rows: Vec<(usize, [f64; 1])> = entries.iter().map(|&(x, v)| (x, [v])).collect();
        BoundaryProblem::new(graph, &rows)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Boundary nodes in increasing order.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, x: usize) -> bool {
        self.slot[x].is_some()
    }

    pub fn boundary_value(&self, x: usize) -> Option<&[f64]> {
        self.slot[x].map(|k| &self.values[k * self.dim..(k + 1) * self.dim])
    }

    /// Interior nodes `V \ U` in increasing order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&x| self.slot[x].is_none())
            .collect()
    }

    pub fn interior_count(&self) -> usize {
        self.node_count() - self.boundary.len()
    }

    /// Coordinate-wise minimum and maximum of the boundary values.
    pub fn value_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for row in self.values.chunks(self.dim) {
            for (j, &v) in row.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        (lo, hi)
    }

    /// Mean of the boundary values, kept inside [`Self::value_bounds`].
    pub fn boundary_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in self.values.chunks(self.dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let count = self.boundary.len() as f64;
        let (lo, hi) = self.value_bounds();
        for (j, m) in mean.iter_mut().enumerate() {
            *m = (*m / count).clamp(lo[j], hi[j]);
        }
        mean
    }

    /// The function equal to `g` on `U` and to `fill` elsewhere.
    pub fn filled_with(&self, fill: &[f64]) -> VertexFunction {
        let mut u = VertexFunction::zeros(self.node_count(), self.dim);
        for x in 0..self.node_count() {
            match self.boundary_value(x) {
                Some(g) => u.set(x, g),
                None => u.set(x, fill),
            }
        }
        u
    }

    /// Writes `g` over the boundary nodes of `u`.
    pub fn impose_boundary(&self, u: &mut VertexFunction) {
        for (k, &x) in self.boundary.iter().enumerate() {
            u.set(x, &self.values[k * self.dim..(k + 1) * self.dim]);
        }
    }

    /// Scalar problem for channel `j`.
    pub fn component(&self, j: usize) -> BoundaryProblem {
        BoundaryProblem {
            graph: self.graph.clone(),
            dim: 1,
            boundary: self.boundary.clone(),
            values: self.values.iter().skip(j).step_by(self.dim).copied().collect(),
            slot: self.slot.clone(),
        }
    }

    /// Applies `f` to every boundary value row.
    pub fn map_values(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<BoundaryProblem> {
        let entries: Vec<(usize, Vec<f64>)> = self
            .boundary
            .iter()
            .map(|&x| (x, f(self.boundary_value(x).unwrap())))
            .collect();
        BoundaryProblem::new(self.graph.clone(), &entries)
    }

    /// Checks that `u` has the right shape.
    pub fn check_shape(&self, u: &VertexFunction) -> Result<()> {
        if u.node_count() != self.node_count() || u.as_slice().len() % u.dim() != 0 {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                found: u.node_count(),
            });
        }
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.dim(),
            });
        }
        Ok(())
    }

    /// Checks shape and exact agreement with `g` on `U`.
    pub fn check_extension(&self, u: &VertexFunction) -> Result<()> {
        self.check_shape(u)?;
        for &x in &self.boundary {
            if u.get(x) != self.boundary_value(x).unwrap() {
                return Err(Error::BoundaryMismatch(x));
            }
        }
        Ok(())
    }
}

/// Local Lipschitz constant without shape checks. `x` must have a neighbor.
pub(crate) fn lipschitz_at(graph: &WeightedGraph, data: &[f64], dim: usize, x: usize) -> f64 {
    let ux = &data[x * dim..(x + 1) * dim];
    graph
        .neighbors(x)
        .iter()
        .map(|&(y, w)| w.sqrt() * euclidean(&data[y * dim..(y + 1) * dim], ux))
        .fold(0.0, f64::max)
}

/// `S u(x) = max_{y ~ x} sqrt(w(x, y)) |u(y) - u(x)|`.
pub fn local_lipschitz(u: &VertexFunction, prob: &BoundaryProblem, x: usize) -> Result<f64> {
    prob.check_shape(u)?;
    if x >= prob.node_count() {
        return Err(Error::NodeOutOfRange {
            index: x,
            node_count: prob.node_count(),
        });
    }
    if prob.graph().degree(x) == 0 {
        return Err(Error::IsolatedNode(x));
    }
    Ok(lipschitz_at(prob.graph(), u.as_slice(), u.dim(), x))
}

/// `S u` on the interior nodes, together with the nonincreasing rearrangement `l(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzProfile {
    nodes: Vec<usize>,
    per_node: Vec<f64>,
    sorted: Vec<f64>,
}

impl LipschitzProfile {
    /// Builds a profile from explicit values; mainly useful for comparisons.
    pub fn from_values(per_node: Vec<f64>) -> Self {
        let nodes = (0..per_node.len()).collect();
        let mut sorted = per_node.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        LipschitzProfile {
            nodes,
            per_node,
            sorted,
        }
    }

    /// Interior nodes, aligned with [`per_node`](Self::per_node).
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn per_node(&self) -> &[f64] {
        &self.per_node
    }

    /// `l(u)`: the values in nonincreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.per_node.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_node.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.sorted.first().copied().unwrap_or(0.0)
    }
}

/// Local Lipschitz constants over `V \ U`.
pub fn lipschitz_profile(u: &VertexFunction, prob: &BoundaryProblem) -> Result<LipschitzProfile> {
    prob.check_shape(u)?;
    let nodes = prob.interior();
    let graph = prob.graph();
    let dim = u.dim();
    let data = u.as_slice();
    let per_node: Vec<f64> = if nodes.len() >= PARALLEL_THRESHOLD {
        nodes
            .par_iter()
            .map(|&x| lipschitz_at(graph, data, dim, x))
            .collect()
    } else {
        nodes
            .iter()
            .map(|&x| lipschitz_at(graph, data, dim, x))
            .collect()
    };
    let mut sorted = per_node.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(LipschitzProfile {
        nodes,
        per_node,
        sorted,
    })
}

/// Whether `u` is tighter than `v`: the worst constant `v` loses to `u`
/// exceeds the worst constant `u` loses to `v`. An empty side counts as
/// negative infinity.
pub fn is_tighter(u: &VertexFunction, v: &VertexFunction, prob: &BoundaryProblem) -> Result<bool> {
    prob.check_extension(u)?;
    prob.check_extension(v)?;
    let su = lipschitz_profile(u, prob)?;
    let sv = lipschitz_profile(v, prob)?;
    let mut v_worse = f64::NEG_INFINITY;
    let mut u_worse = f64::NEG_INFINITY;
    for (&a, &b) in su.per_node().iter().zip(sv.per_node()) {
        if a < b {
            v_worse = v_worse.max(b);
        } else if b < a {
            u_worse = u_worse.max(a);
        }
    }
    Ok(v_worse > u_worse)
}

/// Lexicographic comparison of the sorted profiles `l(a)` and `l(b)`.
pub fn lex_compare(a: &LipschitzProfile, b: &LipschitzProfile) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::ProfileLength(a.len(), b.len()));
    }
    for (x, y) in a.sorted().iter().zip(b.sorted()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return Ok(other),
        }
    }
    Ok(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn constant_function_has_zero_constant() {
        let prob = BoundaryProblem::scalar(path3(), &[(0, 0.0), (2, 0.0)]).unwrap();
        let u = VertexFunction::scalar(vec![0.0; 3]);
        assert_eq!(local_lipschitz(&u, &prob, 1).unwrap(), 0.0);
    }

    #[test]
    fn star_center_takes_symmetric_max() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(1, 1.0), (2, -1.0)]).unwrap();
        let u = VertexFunction::scalar(vec![0.0, 1.0, -1.0]);
        assert_eq!(local_lipschitz(&u, &prob, 0).unwrap(), 1.0);
    }

    #[test]
    fn weight_enters_as_square_root() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 0.25)]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 0.0)]).unwrap();
        let u = VertexFunction::scalar(vec![0.0, 4.0]);
        assert_eq!(local_lipschitz(&u, &prob, 1).unwrap(), 2.0);
    }

    #[test]
    fn lone_node_has_no_neighbors() {
        let g = WeightedGraph::from_edges(1, &[]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 1.0)]).unwrap();
        let u = VertexFunction::scalar(vec![1.0]);
        assert!(matches!(
            local_lipschitz(&u, &prob, 0),
            Err(Error::IsolatedNode(0))
        ));
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(matches!(
            WeightedGraph::from_edges(2, &[]),
            Err(Error::Disconnected { unreachable: 1 })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 0, 1.0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 1, 1.5)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 1, 0.0)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 2, 1.0)]),
            Err(Error::NodeOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn adjacency_must_be_symmetric() {
        let adj = vec![vec![(1, 0.5)], vec![(0, 0.25)]];
        assert!(matches!(
            WeightedGraph::from_adjacency(adj),
            Err(Error::AsymmetricWeight { .. })
        ));
        let adj = vec![vec![(1, 0.5)], vec![(0, 0.5)]];
        assert_eq!(WeightedGraph::from_adjacency(adj).unwrap().edge_count(), 1);
    }

    #[test]
    fn all_boundary_gives_empty_profile() {
        let prob = BoundaryProblem::scalar(path3(), &[(0, 0.0), (1, 1.0), (2, 2.0)]).unwrap();
        let u = VertexFunction::scalar(vec![0.0, 1.0, 2.0]);
        assert!(lipschitz_profile(&u, &prob).unwrap().is_empty());
    }

    #[test]
    fn lex_compare_orders_sorted_profiles() {
        let a = LipschitzProfile::from_values(vec![0.0, 1.0]);
        let b = LipschitzProfile::from_values(vec![1.0, 1.0]);
        assert_eq!(lex_compare(&a, &b).unwrap(), Ordering::Less);
        let z = LipschitzProfile::from_values(vec![0.0, 0.0]);
        assert_eq!(lex_compare(&z, &z).unwrap(), Ordering::Equal);
        let c = LipschitzProfile::from_values(vec![2.0, 1.0]);
        let d = LipschitzProfile::from_values(vec![1.0, 9.0]);
        assert_eq!(lex_compare(&c, &d).unwrap(), Ordering::Less);
        let c = LipschitzProfile::from_values(vec![1.0, 2.0]);
        let d = LipschitzProfile::from_values(vec![1.0, 1.5]);
        assert_eq!(lex_compare(&c, &d).unwrap(), Ordering::Greater);
        assert!(matches!(
            lex_compare(&a, &LipschitzProfile::from_values(vec![0.0])),
            Err(Error::ProfileLength(2, 1))
        ));
    }

    #[test]
    fn is_tighter_requires_boundary_agreement() {
        let prob = BoundaryProblem::scalar(path3(), &[(0, 0.0), (2, 1.0)]).unwrap();
        let u = VertexFunction::scalar(vec![0.0, 0.5, 1.0]);
        let v = VertexFunction::scalar(vec![0.1, 0.5, 1.0]);
        assert!(matches!(
            is_tighter(&u, &v, &prob),
            Err(Error::BoundaryMismatch(0))
        ));
        assert!(!is_tighter(&u, &u, &prob).unwrap());
    }
}
