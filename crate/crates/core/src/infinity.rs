//! The graph infinity-Laplacian and its explicit fixed-point iteration.
//!
//! For scalar `u`,
//! `Δu(x) = ½ (max_y sqrt(w) (u(y) - u(x))⁺ - max_y sqrt(w) (u(y) - u(x))⁻)`.
//! The iteration `u ← u + τ Δu` on the interior (with `g` held on `U`) is
//! run as a synchronous Jacobi sweep. It converges for `0 < τ < 1`; every
//! iterate stays inside `[min g, max g]` for `0 < τ ≤ 2` when started inside.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BoundaryProblem, VertexFunction};

const PARALLEL_THRESHOLD: usize = 4096;

/// Starting values on the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    Zero,
    #[default]
    BoundaryMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    /// Step size, `0 < tau < 2`.
    pub tau: f64,
    /// Sup-norm step tolerance.
    pub tol: f64,
    pub max_iters: usize,
    pub init: Init,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tau: 0.4,
            tol: 1e-10,
            max_iters: 100_000,
            init: Init::BoundaryMean,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in (0, 2), got {}",
                self.tau
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Convergence is only guaranteed for `tau < 1`.
    pub fn tau_unproven(&self) -> bool {
        self.tau >= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    /// `max |u^{r+1} - u^r|` of the last sweep.
    pub final_step_norm: f64,
    /// `max |Δu(x)|` over the interior of the returned function.
    pub residual: f64,
    pub converged: bool,
    /// Set when `tau ∈ [1, 2)`, where convergence is not guaranteed.
    pub tau_unproven: bool,
}

/// Adjacency with square-rooted weights, shared by all sweeps of one run.
struct SqrtAdjacency {
    lists: Vec<Vec<(usize, f64)>>,
}

impl SqrtAdjacency {
    fn new(prob: &BoundaryProblem) -> Self {
        let g = prob.graph();
        SqrtAdjacency {
            lists: (0..g.node_count())
                .map(|x| g.neighbors(x).iter().map(|&(y, w)| (y, w.sqrt())).collect())
                .collect(),
        }
    }

    fn laplacian(&self, u: &[f64], x: usize) -> f64 {
        let ux = u[x];
        let mut up = 0.0f64;
        let mut down = 0.0f64;
        for &(y, sw) in &self.lists[x] {
            let d = sw * (u[y] - ux);
            if d > up {
                up = d;
            } else if -d > down {
                down = -d;
            }
        }
        0.5 * (up - down)
    }

    /// `u(x) + tau Δu(x)`, kept inside the hull of `u(x)` and its neighbor
    /// values, which holds exactly for `tau <= 2` but can fail by an ulp
    /// once rounded.
    fn updated(&self, u: &[f64], x: usize, tau: f64) -> f64 {
        let ux = u[x];
        let (mut lo, mut hi) = (ux, ux);
        for &(y, _) in &self.lists[x] {
            lo = lo.min(u[y]);
            hi = hi.max(u[y]);
        }
        let v = ux + tau * self.laplacian(u, x);
        if tau <= 2.0 {
            v.clamp(lo, hi)
        } else {
            v
        }
    }
}

fn require_scalar(prob: &BoundaryProblem) -> Result<()> {
    if prob.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: prob.dim(),
        });
    }
    Ok(())
}

/// `Δ_{ω,∞} u(x)` for scalar `u`.
pub fn graph_inf_laplacian(u: &VertexFunction, prob: &BoundaryProblem, x: usize) -> Result<f64> {
    require_scalar(prob)?;
    prob.check_shape(u)?;
    if x >= prob.node_count() {
        return Err(Error::NodeOutOfRange {
            index: x,
            node_count: prob.node_count(),
        });
    }
    Ok(SqrtAdjacency::new(prob).laplacian(u.as_slice(), x))
}

/// `max |Δu(x)|` over the interior.
pub fn laplacian_residual(u: &VertexFunction, prob: &BoundaryProblem) -> Result<f64> {
    require_scalar(prob)?;
    prob.check_shape(u)?;
    let adj = SqrtAdjacency::new(prob);
    Ok(prob
        .interior()
        .iter()
        .map(|&x| adj.laplacian(u.as_slice(), x).abs())
        .fold(0.0, f64::max))
}

/// One synchronous step `next = cur + tau Δcur` on `interior`; returns the sup-norm step.
fn sweep(adj: &SqrtAdjacency, interior: &[usize], tau: f64, cur: &[f64], next: &mut [f64]) -> f64 {
    if interior.len() >= PARALLEL_THRESHOLD {
        let updates: Vec<f64> = interior
            .par_iter()
            .map(|&x| adj.updated(cur, x, tau))
            .collect();
        let mut step = 0.0f64;
        for (&x, v) in interior.iter().zip(updates) {
            step = step.max((v - cur[x]).abs());
            next[x] = v;
        }
        step
    } else {
        let mut step = 0.0f64;
        for &x in interior {
            let v = adj.updated(cur, x, tau);
            step = step.max((v - cur[x]).abs());
            next[x] = v;
        }
        step
    }
}

/// Discrete infinity-harmonic extension of scalar boundary data.
pub fn extend_inf_harmonic(
    prob: &BoundaryProblem,
    cfg: &IterationConfig,
) -> Result<(VertexFunction, IterationReport)> {
    require_scalar(prob)?;
    cfg.validate()?;
    let u0 = initial_guess(prob, cfg.init);
    extend_inf_harmonic_observed(prob, cfg, u0, |_, _| {})
}

pub fn initial_guess(prob: &BoundaryProblem, init: Init) -> VertexFunction {
    match init {
        Init::Zero => prob.filled_with(&vec![0.0; prob.dim()]),
        Init::BoundaryMean => prob.filled_with(&prob.boundary_mean()),
    }
}

/// Runs the iteration from `u0` (boundary values are re-imposed), calling
/// `observe(r, u^r)` for every iterate including `u^0`.
pub fn extend_inf_harmonic_observed(
    prob: &BoundaryProblem,
    cfg: &IterationConfig,
    u0: VertexFunction,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<(VertexFunction, IterationReport)> {
    require_scalar(prob)?;
    cfg.validate()?;
    prob.check_shape(&u0)?;
    let mut cur = u0;
    prob.impose_boundary(&mut cur);
    let interior = prob.interior();
    let adj = SqrtAdjacency::new(prob);
    let mut next = cur.clone();
    observe(0, cur.as_slice());

    let mut iterations = 0;
    let mut step = 0.0;
    let mut converged = interior.is_empty();
    while !converged && iterations < cfg.max_iters {
        step = sweep(&adj, &interior, cfg.tau, cur.as_slice(), next.as_mut_slice());
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        observe(iterations, cur.as_slice());
        if !step.is_finite() {
            break;
        }
        converged = step < cfg.tol;
    }
    let residual = interior
        .iter()
        .map(|&x| adj.laplacian(cur.as_slice(), x).abs())
        .fold(0.0, f64::max);
    Ok((
        cur,
        IterationReport {
            iterations,
            final_step_norm: step,
            residual,
            converged,
            tau_unproven: cfg.tau_unproven(),
        },
    ))
}

/// Applies the scalar iteration to each channel independently.
pub fn extend_componentwise(
    prob: &BoundaryProblem,
    cfg: &IterationConfig,
) -> Result<(VertexFunction, IterationReport)> {
    cfg.validate()?;
    let m = prob.dim();
    let channels: Vec<Result<(VertexFunction, IterationReport)>> = (0..m)
        .into_par_iter()
        .map(|j| extend_inf_harmonic(&prob.component(j), cfg))
        .collect();
    let mut out = VertexFunction::zeros(prob.node_count(), m);
    let mut report = IterationReport {
        iterations: 0,
        final_step_norm: 0.0,
        residual: 0.0,
        converged: true,
        tau_unproven: cfg.tau_unproven(),
    };
    for (j, channel) in channels.into_iter().enumerate() {
        let (u, r) = channel?;
        for (x, &v) in u.as_slice().iter().enumerate() {
            out.get_mut(x)[j] = v;
        }
        report.iterations = report.iterations.max(r.iterations);
        report.final_step_norm = report.final_step_norm.max(r.final_step_norm);
        report.residual = report.residual.max(r.residual);
        report.converged &= r.converged;
    }
    Ok((out, report))
}

/// Iterates with `tau = 2` and returns `u^0, ..., u^steps`.
///
/// On the five-node unit path with zero ends and a unit spike in the middle
/// the iterates oscillate with period two.
pub fn divergence_demo(
    prob: &BoundaryProblem,
    u0: &VertexFunction,
    steps: usize,
) -> Result<Vec<VertexFunction>> {
    require_scalar(prob)?;
    prob.check_extension(u0)?;
    let adj = SqrtAdjacency::new(prob);
    let interior = prob.interior();
    let mut iterates = vec![u0.clone()];
    for _ in 0..steps {
        let cur = iterates.last().unwrap();
        let mut next = cur.clone();
        sweep(&adj, &interior, 2.0, cur.as_slice(), next.as_mut_slice());
        iterates.push(next);
    }
    Ok(iterates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    fn star(values: &[f64]) -> (BoundaryProblem, VertexFunction) {
        let n = values.len() + 1;
        let edges: Vec<_> = (1..n).map(|y| (0, y, 1.0)).collect();
        let g = WeightedGraph::from_edges(n, &edges).unwrap();
        let entries: Vec<_> = values.iter().enumerate().map(|(k, &v)| (k + 1, v)).collect();
        let prob = BoundaryProblem::scalar(g, &entries).unwrap();
        let mut u = vec![0.0];
        u.extend_from_slice(values);
        (prob, VertexFunction::scalar(u))
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let (prob, _) = star(&[3.0, 3.0, 3.0]);
        let u = VertexFunction::scalar(vec![3.0; 4]);
        for x in 0..4 {
            assert_eq!(graph_inf_laplacian(&u, &prob, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplacian_at_star_center() {
        let (prob, u) = star(&[1.0, -1.0]);
        assert_eq!(graph_inf_laplacian(&u, &prob, 0).unwrap(), 0.0);
        let (prob, u) = star(&[4.0, 0.0]);
        assert_eq!(graph_inf_laplacian(&u, &prob, 0).unwrap(), 2.0);
    }

    #[test]
    fn laplacian_rejects_vector_data() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let prob = BoundaryProblem::new(g, &[(0, [0.0, 1.0])]).unwrap();
        let u = VertexFunction::zeros(2, 2);
        assert!(matches!(
            graph_inf_laplacian(&u, &prob, 1),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn path_midpoint() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 0.0), (2, 1.0)]).unwrap();
        let (u, report) = extend_inf_harmonic(&prob, &IterationConfig::default()).unwrap();
        assert!(report.converged);
        assert!((u.get(1)[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_boundary_is_a_fixed_point() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 0.3), (1, 2, 1.0), (2, 3, 0.7), (3, 1, 0.5)])
            .unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 2.5)]).unwrap();
        let (u, report) = extend_inf_harmonic(&prob, &IterationConfig::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(u.as_slice().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn tau_out_of_range_is_rejected() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 0.0)]).unwrap();
        for tau in [0.0, 2.0, -1.0, f64::NAN] {
            let cfg = IterationConfig {
                tau,
                ..Default::default()
            };
            assert!(matches!(
                extend_inf_harmonic(&prob, &cfg),
                Err(Error::InvalidParameter(_))
            ));
        }
        let cfg = IterationConfig {
            tau: 1.5,
            ..Default::default()
        };
        assert!(extend_inf_harmonic(&prob, &cfg).unwrap().1.tau_unproven);
    }

    #[test]
    fn exhausted_budget_is_reported_not_raised() {
        let edges: Vec<_> = (0..19).map(|i| (i, i + 1, 1.0)).collect();
        let g = WeightedGraph::from_edges(20, &edges).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 0.0), (19, 1.0)]).unwrap();
        let cfg = IterationConfig {
            max_iters: 3,
            ..Default::default()
        };
        let (_, report) = extend_inf_harmonic(&prob, &cfg).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 3);
    }

    #[test]
    fn five_path_oscillates_with_tau_two() {
        let edges: Vec<_> = (0..4).map(|i| (i, i + 1, 1.0)).collect();
        let g = WeightedGraph::from_edges(5, &edges).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 0.0), (4, 0.0)]).unwrap();
        let u0 = VertexFunction::scalar(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let it = divergence_demo(&prob, &u0, 4).unwrap();
        let odd = VertexFunction::scalar(vec![0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(it[1], odd);
        assert_eq!(it[2], u0);
        assert_eq!(it[3], odd);
        assert_eq!(it[4], u0);
    }
}
