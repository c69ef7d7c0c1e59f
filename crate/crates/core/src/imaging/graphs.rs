//! Pixel graphs: the lattice graph and the patch-similarity k-NN graph.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BoundaryProblem, WeightedGraph};
use crate::imaging::grid::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjacency {
    #[default]
    Four,
    Eight,
}

/// Lattice graph over all pixels with `1/dist` weights; known pixels form
/// the boundary.
pub fn build_grid_graph(img: &ImageGrid, adjacency: Adjacency) -> Result<BoundaryProblem> {
    let (w, h) = (img.width(), img.height());
    let mut edges = Vec::new();
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    for y in 0..h {
        for x in 0..w {
            let i = img.index(x, y);
            if x + 1 < w {
                edges.push((i, i + 1, 1.0));
            }
            if y + 1 < h {
                edges.push((i, i + w, 1.0));
            }
            if adjacency == Adjacency::Eight && y + 1 < h {
                if x + 1 < w {
                    edges.push((i, i + w + 1, diag));
                }
                if x > 0 {
                    edges.push((i, i + w - 1, diag));
                }
            }
        }
    }
    let graph = if img.pixel_count() == 1 {
        WeightedGraph::from_edges(1, &[])?
    } else {
        WeightedGraph::from_edges(img.pixel_count(), &edges)?
    };
    known_problem(graph, img, |i| !img.is_missing(i))
}

pub(crate) fn known_problem(
    graph: WeightedGraph,
    img: &ImageGrid,
    is_known: impl Fn(usize) -> bool,
) -> Result<BoundaryProblem> {
    let entries: Vec<(usize, &[f64])> = (0..graph.node_count())
        .filter(|&i| is_known(i))
        .map(|i| (i, img.pixel(i)))
        .collect();
    if entries.is_empty() {
        return Err(Error::NoKnownPixels);
    }
    BoundaryProblem::new(graph, &entries)
}

/// Parameters of the patch-similarity graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchConfig {
    /// Patches are `(2p+1)²` squares.
    pub patch_half: usize,
    /// Candidates lie in the `(2r+1)²` square around a pixel.
    pub radius: usize,
    pub neighbors: usize,
    pub sigma: f64,
}

impl Default for PatchConfig {
    fn default() -> Self {
        PatchConfig {
            patch_half: 7,
            radius: 15,
            neighbors: 10,
            sigma: 0.1,
        }
    }
}

impl PatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_half == 0 || self.radius == 0 || self.neighbors == 0 {
            return Err(Error::InvalidParameter(format!(
                "patch size, radius and neighbor count must be at least 1, got p={} r={} k={}",
                self.patch_half, self.radius, self.neighbors
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// A search radius below the patch size is allowed but unusual.
    pub fn radius_below_patch(&self) -> bool {
        self.radius < self.patch_half
    }

    fn min_overlap(&self) -> usize {
        let side = 2 * self.patch_half + 1;
        // |A| must exceed side²/4
        side * side / 4 + 1
    }
}

fn channel_distance(img: &ImageGrid, a: usize, b: usize) -> f64 {
    img.pixel(a)
        .iter()
        .zip(img.pixel(b))
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Patch dissimilarity of pixels `u` and `v`; `+∞` outside the search
/// radius or when too few offsets are known in both patches.
pub fn patch_distance(img: &ImageGrid, u: usize, v: usize, cfg: &PatchConfig) -> f64 {
    let (ux, uy) = img.coords(u);
    let (vx, vy) = img.coords(v);
    if ux.abs_diff(vx) > cfg.radius || uy.abs_diff(vy) > cfg.radius {
        return f64::INFINITY;
    }
    let p = cfg.patch_half as isize;
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut sum = 0.0;
    let mut count = 0usize;
    for dy in -p..=p {
        for dx in -p..=p {
            let (ax, ay) = (ux as isize + dx, uy as isize + dy);
            let (bx, by) = (vx as isize + dx, vy as isize + dy);
            if ax < 0 || ay < 0 || bx < 0 || by < 0 || ax >= w || ay >= h || bx >= w || by >= h {
                continue;
            }
            let a = img.index(ax as usize, ay as usize);
            let b = img.index(bx as usize, by as usize);
            if img.is_missing(a) || img.is_missing(b) {
                continue;
            }
            sum += channel_distance(img, a, b);
            count += 1;
        }
    }
    if count < cfg.min_overlap() {
        f64::INFINITY
    } else {
        sum / count as f64
    }
}

/// Symmetric pixel graph that may be disconnected or have isolated nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl KnnGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors sorted by index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn is_isolated(&self, x: usize) -> bool {
        self.adjacency[x].is_empty()
    }

    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&(j, _)| j > i).map(|&(j, w)| (i, j, w)));
        }
        out
    }

    /// The graph in the boundary-problem text format with `known` pixels
    /// of `img` as boundary. The result may describe a disconnected graph.
    pub fn to_text(&self, img: &ImageGrid, known: &[bool]) -> String {
        let edges = self.edges();
        let mut s = String::new();
        let _ = writeln!(s, "graph {} {} {}", self.node_count(), edges.len(), img.channels());
        for (i, j, w) in edges {
            let _ = writeln!(s, "e {i} {j} {w:?}");
        }
        let boundary: Vec<usize> = (0..known.len()).filter(|&i| known[i]).collect();
        let _ = writeln!(s, "boundary {}", boundary.len());
        for x in boundary {
            let _ = write!(s, "b {x}");
            for v in img.pixel(x) {
                let _ = write!(s, " {v:?}");
            }
            s.push('\n');
        }
        s
    }
}

/// Up to `k` candidates in increasing `(distance, index)` order.
#[derive(Clone, Default)]
struct Nearest {
    best: Vec<(f64, usize)>,
}

impl Nearest {
    fn offer(&mut self, k: usize, d: f64, j: usize) {
        let key = (d, j);
        let less = |a: &(f64, usize), b: &(f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        if self.best.len() == k && !less(&key, self.best.last().unwrap()) {
            return;
        }
        let pos = self.best.partition_point(|c| less(c, &key));
        self.best.insert(pos, key);
        self.best.truncate(k);
    }
}

/// Box sums of `values` over the `(2p+1)²` window around every pixel.
fn window_sums(values: &[f64], w: usize, h: usize, p: usize, rows: &mut [f64], out: &mut [f64]) {
    for y in 0..h {
        for x in 0..w {
            let (lo, hi) = (x.saturating_sub(p), (x + p).min(w - 1));
            rows[y * w + x] = values[y * w + lo..=y * w + hi].iter().sum();
        }
    }
    for y in 0..h {
        let (lo, hi) = (y.saturating_sub(p), (y + p).min(h - 1));
        for x in 0..w {
            out[y * w + x] = (lo..=hi).map(|yy| rows[yy * w + x]).sum();
        }
    }
}

/// Offers every in-radius pair `(u, u + d)` for displacements `d` in the
/// half plane, so each unordered pair is scored once.
fn scan_displacements(img: &ImageGrid, cfg: &PatchConfig, displacements: &[(isize, isize)]) -> Vec<Nearest> {
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let p = cfg.patch_half;
    let k = cfg.neighbors;
    let min_overlap = cfg.min_overlap() as f64;
    let mut nearest = vec![Nearest::default(); n];
    let mut terms = vec![0.0; n];
    let mut counts = vec![0.0; n];
    let mut rows = vec![0.0; n];
    let mut sums = vec![0.0; n];
    let mut overlaps = vec![0.0; n];
    for &(dx, dy) in displacements {
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let (bx, by) = (x as isize + dx, y as isize + dy);
                terms[i] = 0.0;
                counts[i] = 0.0;
                if bx < 0 || by < 0 || bx >= w as isize || by >= h as isize {
                    continue;
                }
                let j = by as usize * w + bx as usize;
                if !img.is_missing(i) && !img.is_missing(j) {
                    terms[i] = channel_distance(img, i, j);
                    counts[i] = 1.0;
                }
            }
        }
        window_sums(&terms, w, h, p, &mut rows, &mut sums);
        window_sums(&counts, w, h, p, &mut rows, &mut overlaps);
        for y in 0..h {
            for x in 0..w {
                let (bx, by) = (x as isize + dx, y as isize + dy);
                if bx < 0 || by < 0 || bx >= w as isize || by >= h as isize {
                    continue;
                }
                let u = y * w + x;
                if overlaps[u] < min_overlap {
                    continue;
                }
                let v = by as usize * w + bx as usize;
                let d = sums[u] / overlaps[u];
                nearest[u].offer(k, d, v);
                nearest[v].offer(k, d, u);
            }
        }
    }
    nearest
}

/// k-nearest-neighbor graph under [`patch_distance`], symmetrized by union,
/// with weights `exp(-s/σ)` clamped to the smallest positive normal.
///
/// Only pairs with finite distance become edges, so pixels whose patches
/// are mostly unknown end up isolated.
pub fn build_knn_graph(img: &ImageGrid, cfg: &PatchConfig) -> Result<KnnGraph> {
    cfg.validate()?;
    let n = img.pixel_count();
    let r = cfg.radius as isize;
    let displacements: Vec<(isize, isize)> = (0..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dy > 0 || dx > 0)
        .filter(|&(dx, dy)| dx.unsigned_abs() < img.width() && (dy as usize) < img.height())
        .collect();
    let chunk = displacements.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let k = cfg.neighbors;
    let nearest = displacements
        .par_chunks(chunk)
        .map(|ds| scan_displacements(img, cfg, ds))
        .reduce(
            || vec![Nearest::default(); n],
            |mut a, b| {
                for (x, other) in a.iter_mut().zip(b) {
                    for (d, j) in other.best {
                        x.offer(k, d, j);
                    }
                }
                a
            },
        );

    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, list) in nearest.iter().enumerate() {
        for &(d, v) in &list.best {
            let w = (-d / cfg.sigma).exp().max(f64::MIN_POSITIVE);
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(j, _)| j);
        list.dedup_by_key(|&mut (j, _)| j);
    }
    Ok(KnnGraph { adjacency })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> ImageGrid {
        let px = (0..w * h).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        ImageGrid::known(w, h, 1, px).unwrap()
    }

    #[test]
    fn grid_graph_counts() {
        let img = ramp(2, 2);
        let p4 = build_grid_graph(&img, Adjacency::Four).unwrap();
        assert_eq!(p4.graph().edge_count(), 4);
        assert!(p4.graph().edges().iter().all(|e| e.2 == 1.0));
        let p8 = build_grid_graph(&img, Adjacency::Eight).unwrap();
        assert_eq!(p8.graph().edge_count(), 6);
        let diag: Vec<_> = p8.graph().edges().into_iter().filter(|e| e.2 < 1.0).collect();
        assert_eq!(diag.len(), 2);
        assert!((diag[0].2 - 0.5f64.sqrt()).abs() < 1e-16);
        let path = build_grid_graph(&ramp(3, 1), Adjacency::Eight).unwrap();
        assert_eq!(path.graph().edges().iter().map(|e| (e.0, e.1)).collect::<Vec<_>>(), [(0, 1), (1, 2)]);
    }

    #[test]
    fn grid_boundary_is_known_set() {
        let img = ramp(3, 2).with_mask(vec![false, true, false, true, true, false]).unwrap();
        let prob = build_grid_graph(&img, Adjacency::Four).unwrap();
        assert_eq!(prob.boundary(), &[0, 2, 5]);
        assert_eq!(prob.boundary_value(2).unwrap(), img.pixel(2));
    }

    #[test]
    fn distance_cases() {
        let cfg = PatchConfig {
            patch_half: 1,
            radius: 2,
            neighbors: 2,
            sigma: 0.1,
        };
        let flat = ImageGrid::known(6, 6, 1, vec![0.5; 36]).unwrap();
        assert_eq!(patch_distance(&flat, 7, 14, &cfg), 0.0);
        assert_eq!(patch_distance(&flat, 0, 3, &cfg), f64::INFINITY);
        let mut mask = vec![false; 36];
        for y in 0..4 {
            for x in 0..4 {
                mask[y * 6 + x] = true;
            }
        }
        let holed = flat.with_mask(mask).unwrap();
        for v in [1, 6, 7, 13, 14] {
            assert_eq!(patch_distance(&holed, 7, v, &cfg), f64::INFINITY);
        }
    }

    #[test]
    fn knn_matches_direct_distances() {
        let cfg = PatchConfig {
            patch_half: 1,
            radius: 2,
            neighbors: 3,
            sigma: 0.5,
        };
        let img = ramp(7, 5).with_mask((0..35).map(|i| i % 4 == 1).collect()).unwrap();
        let g = build_knn_graph(&img, &cfg).unwrap();
        for (u, v, w) in g.edges() {
            let d = patch_distance(&img, u, v, &cfg);
            assert!(d.is_finite());
            assert!((w - (-d / cfg.sigma).exp()).abs() < 1e-12);
        }
        for u in 0..35 {
            let mut cands: Vec<(f64, usize)> = (0..35)
                .filter(|&v| v != u)
                .map(|v| (patch_distance(&img, u, v, &cfg), v))
                .filter(|c| c.0.is_finite())
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(d, v) in cands.iter().take(3) {
                // near-ties may order differently under different summation orders
                let close = cands.iter().filter(|c| (c.0 - d).abs() < 1e-12).count();
                if close == 1 {
                    assert!(g.neighbors(u).iter().any(|&(j, _)| j == v), "u={u} v={v}");
                }
            }
        }
    }

    #[test]
    fn tiny_sigma_keeps_edges() {
        let cfg = PatchConfig {
            patch_half: 1,
            radius: 1,
            neighbors: 1,
            sigma: 1e-30,
        };
        let img = ramp(4, 4);
        let g = build_knn_graph(&img, &cfg).unwrap();
        assert!(g.edge_count() > 0);
        assert!(g.edges().iter().all(|e| e.2 > 0.0 && e.2 <= 1.0));
        let mut cfg = cfg;
        cfg.neighbors = 0;
        assert!(build_knn_graph(&img, &cfg).is_err());
    }
}
