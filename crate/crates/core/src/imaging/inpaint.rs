//! Filling missing pixels with graph extensions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{BoundaryProblem, VertexFunction, WeightedGraph};
use crate::graph_io::graph_to_string;
use crate::imaging::color::ColorTransform;
use crate::imaging::graphs::{build_grid_graph, build_knn_graph, Adjacency, KnnGraph, PatchConfig};
use crate::imaging::grid::ImageGrid;
use crate::infinity::{extend_componentwise, IterationConfig};
use crate::tight::{minimize_is, AdmmConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// The infinity-Laplacian iteration on each channel.
    Componentwise,
    /// `I_s` minimization over all channels jointly.
    Admm { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Grid(Adjacency),
    Knn(PatchConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ColorSpace {
    #[default]
    Rgb,
    Yuv { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintConfig {
    pub method: Method,
    pub graph: GraphKind,
    pub color: ColorSpace,
    pub iteration: IterationConfig,
    pub admm: AdmmConfig,
    /// Cap on graph rebuilds for the k-NN graph.
    pub max_outer: usize,
    /// Keep the text form of every graph that was solved on.
    pub export_graphs: bool,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        InpaintConfig {
            method: Method::Componentwise,
            graph: GraphKind::Grid(Adjacency::Four),
            color: ColorSpace::Rgb,
            iteration: IterationConfig {
                tol: 1e-7,
                max_iters: 1_000_000,
                ..IterationConfig::default()
            },
            admm: AdmmConfig::default(),
            max_outer: 64,
            export_graphs: false,
        }
    }
}

impl InpaintConfig {
    pub fn validate(&self) -> Result<()> {
        self.iteration.validate()?;
        if let Method::Admm { s } = self.method {
            AdmmConfig { s, ..self.admm }.validate()?;
        }
        if let GraphKind::Knn(p) = self.graph {
            p.validate()?;
        }
        if let ColorSpace::Yuv { scale } = self.color {
            ColorTransform::yuv(scale)?;
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be positive".into()));
        }
        Ok(())
    }
}

/// Statistics of one extension solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub outer: usize,
    pub nodes: usize,
    pub interior: usize,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InpaintOutcome {
    /// The filled image; its mask marks pixels that could not be reached.
    pub image: ImageGrid,
    /// Pixels filled by each outer iteration.
    pub frontier_sizes: Vec<usize>,
    pub solves: Vec<SolveStats>,
    pub unreachable: Vec<usize>,
    /// Text form of each solved graph when requested.
    pub graphs: Vec<String>,
}

/// Fills every missing pixel or fails.
pub fn inpaint(img: &ImageGrid, cfg: &InpaintConfig) -> Result<InpaintOutcome> {
    match inpaint_partial(img, cfg)? {
        (outcome, None) => Ok(outcome),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`inpaint`], but a stall or solver failure returns the pixels
/// filled so far together with the error.
pub fn inpaint_partial(img: &ImageGrid, cfg: &InpaintConfig) -> Result<(InpaintOutcome, Option<Error>)> {
    cfg.validate()?;
    let transform = match cfg.color {
        ColorSpace::Rgb => None,
        ColorSpace::Yuv { scale } => {
            if img.channels() != 3 {
                return Err(Error::InvalidImage(format!(
                    "YUV processing needs 3 channels, got {}",
                    img.channels()
                )));
            }
            Some(ColorTransform::yuv(scale)?)
        }
    };
    let work = match &transform {
        Some(t) => img.with_pixels(img.pixels().chunks_exact(3).flat_map(|p| t.forward(p)).collect())?,
        None => img.clone(),
    };

    let mut run = Run {
        cfg,
        work: work.pixels().to_vec(),
        known: img.mask().iter().map(|&m| !m).collect(),
        outcome: InpaintOutcome {
            image: img.clone(),
            frontier_sizes: Vec::new(),
            solves: Vec::new(),
            unreachable: Vec::new(),
            graphs: Vec::new(),
        },
    };
    let failure = if img.missing_count() == 0 {
        None
    } else {
        match cfg.graph {
            GraphKind::Grid(adj) => run.grid(&work, adj).err(),
            GraphKind::Knn(patch) => run.knn(&work, &patch).err(),
        }
    };
    if let Some(err) = &failure {
        if !matches!(
            err,
            Error::Stalled { .. }
                | Error::NotConverged { .. }
                | Error::RootFinding { .. }
                | Error::LinearSolve { .. }
                | Error::NotPositiveDefinite { .. }
        ) {
            return Err(failure.unwrap());
        }
    }
    Ok(run.finish(img, transform.as_ref(), failure))
}

struct Run<'a> {
    cfg: &'a InpaintConfig,
    work: Vec<f64>,
    known: Vec<bool>,
    outcome: InpaintOutcome,
}

impl Run<'_> {
    fn grid(&mut self, work: &ImageGrid, adj: Adjacency) -> Result<()> {
        let prob = build_grid_graph(work, adj)?;
        let frontier = prob.interior();
        self.solve(0, &prob, &frontier, &frontier)?;
        self.outcome.frontier_sizes.push(frontier.len());
        for x in frontier {
            self.known[x] = true;
        }
        Ok(())
    }

    fn knn(&mut self, work: &ImageGrid, patch: &PatchConfig) -> Result<()> {
        let c = work.channels();
        for outer in 0..self.cfg.max_outer {
            let missing: Vec<usize> = (0..self.known.len()).filter(|&i| !self.known[i]).collect();
            if missing.is_empty() {
                return Ok(());
            }
            let current = ImageGrid::new(
                work.width(),
                work.height(),
                c,
                self.work.clone(),
                self.known.iter().map(|&k| !k).collect(),
            )?;
            let graph = build_knn_graph(&current, patch)?;
            let frontier: Vec<usize> = missing
                .iter()
                .copied()
                .filter(|&u| graph.neighbors(u).iter().any(|&(v, _)| self.known[v]))
                .collect();
            if frontier.is_empty() {
                return Err(Error::Stalled { unreachable: missing });
            }
            for (local, nodes) in self.components(&graph, &frontier) {
                self.solve_component(outer, &graph, &current, &local, &nodes)?;
            }
            self.outcome.frontier_sizes.push(frontier.len());
            for x in frontier {
                self.known[x] = true;
            }
        }
        let remaining = self.known.iter().filter(|&&k| !k).count();
        if remaining > 0 {
            return Err(Error::NotConverged {
                context: format!(
                    "inpainting hit the cap of {} outer iterations with {remaining} pixels missing",
                    self.cfg.max_outer
                ),
            });
        }
        Ok(())
    }

    /// Connected components of the frontier under edges that touch it,
    /// each with its known neighbors; nodes ascend by pixel index.
    fn components(&self, graph: &KnnGraph, frontier: &[usize]) -> Vec<(BTreeMap<usize, usize>, Vec<usize>)> {
        let mut in_frontier = vec![false; self.known.len()];
        for &x in frontier {
            in_frontier[x] = true;
        }
        let mut seen = vec![false; self.known.len()];
        let mut out = Vec::new();
        for &start in frontier {
            if seen[start] {
                continue;
            }
            let mut nodes = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < nodes.len() {
                let x = nodes[head];
                head += 1;
                if !in_frontier[x] {
                    continue;
                }
                for &(y, _) in graph.neighbors(x) {
                    if !seen[y] && (in_frontier[y] || self.known[y]) {
                        seen[y] = true;
                        nodes.push(y);
                    }
                }
            }
            // known nodes may be shared between components
            for &x in &nodes {
                if !in_frontier[x] {
                    seen[x] = false;
                }
            }
            nodes.sort_unstable();
            let local = nodes.iter().enumerate().map(|(i, &x)| (x, i)).collect();
            out.push((local, nodes));
        }
        out
    }

    fn solve_component(
        &mut self,
        outer: usize,
        graph: &KnnGraph,
        current: &ImageGrid,
        local: &BTreeMap<usize, usize>,
        nodes: &[usize],
    ) -> Result<()> {
        let mut edges = Vec::new();
        for &x in nodes {
            if self.known[x] {
                continue;
            }
            for &(y, w) in graph.neighbors(x) {
                if let Some(&ly) = local.get(&y) {
                    if self.known[y] || y > x {
                        edges.push((local[&x], ly, w));
                    }
                }
            }
        }
        let sub = WeightedGraph::from_edges(nodes.len(), &edges)?;
        let entries: Vec<(usize, &[f64])> = nodes
            .iter()
            .enumerate()
            .filter(|&(_, &x)| self.known[x])
            .map(|(i, &x)| (i, current.pixel(x)))
            .collect();
        let prob = BoundaryProblem::new(sub, &entries)?;
        let interior_local = prob.interior();
        let interior_global: Vec<usize> = interior_local.iter().map(|&i| nodes[i]).collect();
        self.solve(outer, &prob, &interior_local, &interior_global)
    }

    /// Solves `prob` and copies the values of `interior` (problem indices)
    /// into the working pixels at `targets`.
    fn solve(&mut self, outer: usize, prob: &BoundaryProblem, interior: &[usize], targets: &[usize]) -> Result<()> {
        let (u, stats) = extend(prob, self.cfg)?;
        if self.cfg.export_graphs {
            self.outcome.graphs.push(graph_to_string(prob));
        }
        let c = prob.dim();
        for (&i, &x) in interior.iter().zip(targets) {
            self.work[x * c..(x + 1) * c].copy_from_slice(u.get(i));
        }
        self.outcome.solves.push(SolveStats { outer, ..stats });
        Ok(())
    }

    fn finish(mut self, img: &ImageGrid, transform: Option<&ColorTransform>, failure: Option<Error>) -> (InpaintOutcome, Option<Error>) {
        let c = img.channels();
        let mut pixels = img.pixels().to_vec();
        let mut mask = vec![false; img.pixel_count()];
        for x in 0..img.pixel_count() {
            if !img.is_missing(x) {
                continue;
            }
            if !self.known[x] {
                mask[x] = true;
                self.outcome.unreachable.push(x);
                continue;
            }
            let value = &self.work[x * c..(x + 1) * c];
            let filled = match transform {
                Some(t) => t.backward(value).to_vec(),
                None => value.to_vec(),
            };
            for (dst, v) in pixels[x * c..(x + 1) * c].iter_mut().zip(filled) {
                *dst = v.clamp(0.0, 1.0);
            }
        }
        let depth = img.depth();
        self.outcome.image = ImageGrid::new(img.width(), img.height(), c, pixels, mask)
            .map(|g| g.with_depth(depth))
            .unwrap_or_else(|_| img.clone());
        (self.outcome, failure)
    }
}

fn extend(prob: &BoundaryProblem, cfg: &InpaintConfig) -> Result<(VertexFunction, SolveStats)> {
    let nodes = prob.node_count();
    let interior = prob.interior_count();
    match cfg.method {
        Method::Componentwise => {
            let (u, r) = extend_componentwise(prob, &cfg.iteration)?;
            if !r.converged {
                return Err(Error::NotConverged {
                    context: format!(
                        "infinity-Laplacian iteration on {interior} missing pixels (step {:e} after {} sweeps)",
                        r.final_step_norm, r.iterations
                    ),
                });
            }
            Ok((
                u,
                SolveStats {
                    outer: 0,
                    nodes,
                    interior,
                    iterations: r.iterations,
                    residual: r.residual,
                },
            ))
        }
        Method::Admm { s } => {
            let (u, r) = minimize_is(prob, &AdmmConfig { s, ..cfg.admm })?;
            if !r.converged {
                return Err(Error::NotConverged {
                    context: format!(
                        "ADMM on {interior} missing pixels (primal {:e}, dual {:e} after {} iterations)",
                        r.primal_residual, r.dual_residual, r.iterations
                    ),
                });
            }
            Ok((
                u,
                SolveStats {
                    outer: 0,
                    nodes,
                    interior,
                    iterations: r.iterations,
                    residual: r.primal_residual.max(r.dual_residual),
                },
            ))
        }
    }
}
