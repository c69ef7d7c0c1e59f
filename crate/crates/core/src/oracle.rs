//! Brute-force references for tiny instances.
//!
//! The objective oracles ([`brute_force_is`], [`brute_force_prox`]) run a
//! central-cut ellipsoid method over a value box. Both objectives are
//! convex but not smooth, and a shrinking tensor grid can stall for good in
//! their V-shaped valleys, where no grid direction descends at any scale.
//!
//! [`verify_tight`] compares whole profiles, which is not a convex
//! objective, and uses [`grid_search`]: a grid with `grid_resolution`
//! points per free coordinate is laid over a box, the best point becomes the
//! new center, and the box shrinks by a factor 5 for each of the
//! `refinement_rounds` rounds. Within a round the grid is re-centered
//! without shrinking while the best point lies on the grid's edge.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{lipschitz_profile, BoundaryProblem, VertexFunction};
use crate::tight::prox::pow_nonneg;

/// Largest number of free coordinates for [`brute_force_is`] and [`verify_tight`].
pub const MAX_FREE_COORDS: usize = 6;
/// Largest dimension for [`brute_force_prox`].
pub const MAX_PROX_DIM: usize = 4;
/// Entrywise slack of the lexicographic test in [`verify_tight`].
pub const TIGHT_TOL: f64 = 1e-6;

const SHRINK: f64 = 5.0;
const ELLIPSOID_REL_WIDTH: f64 = 1e-11;
const MAX_RECENTER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub grid_resolution: usize,
    pub refinement_rounds: usize,
    /// Per-coordinate search interval; `None` means `[min g - 1, max g + 1]`.
    pub value_box: Option<Vec<(f64, f64)>>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_resolution: 11,
            refinement_rounds: 6,
            value_box: None,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid_resolution must be at least 3, got {}",
                self.grid_resolution
            )));
        }
        if self.refinement_rounds == 0 {
            return Err(Error::InvalidParameter("refinement_rounds must be positive".into()));
        }
        if let Some(b) = &self.value_box {
            if b.iter().any(|&(lo, hi)| !(lo <= hi && lo.is_finite() && hi.is_finite())) {
                return Err(Error::InvalidParameter("value_box intervals must be finite and ordered".into()));
            }
        }
        Ok(())
    }

    fn boxes_for(&self, prob: &BoundaryProblem) -> Result<Vec<(f64, f64)>> {
        let (lo, hi) = prob.value_bounds();
        match &self.value_box {
            None => Ok(lo.iter().zip(&hi).map(|(a, b)| (a - 1.0, b + 1.0)).collect()),
            Some(b) => {
                if b.len() != prob.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: prob.dim(),
                        found: b.len(),
                    });
                }
                for (j, &(a, c)) in b.iter().enumerate() {
                    if lo[j] < a || hi[j] > c {
                        return Err(Error::InvalidParameter(format!(
                            "value_box[{j}] = [{a}, {c}] does not contain the boundary values"
                        )));
                    }
                }
                Ok(b.clone())
            }
        }
    }
}

/// Result of a grid search, with the best key after every round.
#[derive(Debug, Clone)]
pub struct GridResult<K> {
    pub point: Vec<f64>,
    pub key: K,
    pub rounds: Vec<K>,
}

/// Deterministic shrinking grid search for the point minimizing `key`
/// under `cmp`. Ties keep the grid point with the smallest linear index.
pub fn grid_search<K, F, C>(
    center: &[f64],
    half_width: &[f64],
    cfg: &OracleConfig,
    key: F,
    cmp: C,
) -> Result<GridResult<K>>
where
    K: Clone + Send,
    F: Fn(&[f64]) -> K + Sync,
    C: Fn(&K, &K) -> Ordering + Sync,
{
    cfg.validate()?;
    let d = center.len();
    let res = cfg.grid_resolution;
    let mut c = center.to_vec();
    let mut h = half_width.to_vec();
    let mut best_key = key(&c);
    let mut rounds = Vec::with_capacity(cfg.refinement_rounds + 1);

    for round in 0..=cfg.refinement_rounds {
        if round > 0 {
            h.iter_mut().for_each(|v| *v /= SHRINK);
        }
        for _ in 0..MAX_RECENTER {
            let total = res.checked_pow(d as u32).ok_or(Error::OracleTooLarge { dim: d, limit: MAX_FREE_COORDS })?;
            let point_at = |mut idx: usize, out: &mut [f64], digits: &mut [usize]| {
                for j in (0..d).rev() {
                    digits[j] = idx % res;
                    idx /= res;
                    let t = digits[j] as f64 / (res - 1) as f64;
                    out[j] = c[j] - h[j] + 2.0 * h[j] * t;
                }
            };
            let found = (0..total)
                .into_par_iter()
                .fold(
                    || (None::<(usize, K)>, vec![0.0; d], vec![0usize; d]),
                    |(best, mut p, mut digits), idx| {
                        point_at(idx, &mut p, &mut digits);
                        let k = key(&p);
                        let best = match best {
                            Some((bi, bk)) if cmp(&bk, &k) != Ordering::Greater => Some((bi, bk)),
                            _ => Some((idx, k)),
                        };
                        (best, p, digits)
                    },
                )
                .map(|(best, _, _)| best)
                .reduce(
                    || None,
                    |a, b| match (a, b) {
                        (None, x) | (x, None) => x,
                        (Some((ia, ka)), Some((ib, kb))) => match cmp(&ka, &kb) {
                            Ordering::Less => Some((ia, ka)),
                            Ordering::Greater => Some((ib, kb)),
                            Ordering::Equal => Some(if ia <= ib { (ia, ka) } else { (ib, kb) }),
                        },
                    },
                );
            let Some((idx, k)) = found else { break };
            let mut p = vec![0.0; d];
            let mut digits = vec![0usize; d];
            point_at(idx, &mut p, &mut digits);
            if cmp(&k, &best_key) != Ordering::Less {
                break;
            }
            best_key = k;
            c = p;
            let on_edge = digits
                .iter()
                .zip(&h)
                .any(|(&g, &w)| w > 0.0 && (g == 0 || g == res - 1));
            if !on_edge {
                break;
            }
        }
        rounds.push(best_key.clone());
    }
    Ok(GridResult {
        point: c,
        key: best_key,
        rounds,
    })
}

/// Fast evaluation of local Lipschitz constants for candidate interior values.
struct FreeEvaluator {
    dim: usize,
    free: usize,
    /// Per interior node: neighbors as `(Some(slot) | None, fixed value index, √ω)`.
    neighbors: Vec<Vec<(Option<usize>, usize, f64)>>,
    fixed: Vec<f64>,
}

impl FreeEvaluator {
    fn new(prob: &BoundaryProblem) -> Result<Self> {
        let interior = prob.interior();
        let free = interior.len() * prob.dim();
        if free > MAX_FREE_COORDS {
            return Err(Error::OracleTooLarge {
                dim: free,
                limit: MAX_FREE_COORDS,
            });
        }
        if interior.is_empty() {
            return Err(Error::NothingToExtend);
        }
        let mut slot = vec![None; prob.node_count()];
        for (k, &x) in interior.iter().enumerate() {
            slot[x] = Some(k);
        }
        let m = prob.dim();
        let mut fixed = Vec::new();
        let neighbors = interior
            .iter()
            .map(|&x| {
                prob.graph()
                    .neighbors(x)
                    .iter()
                    .map(|&(y, w)| match slot[y] {
                        Some(k) => (Some(k), 0, w.sqrt()),
                        None => {
                            let at = fixed.len() / m;
                            fixed.extend_from_slice(prob.boundary_value(y).expect("boundary node"));
                            (None, at, w.sqrt())
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(FreeEvaluator {
            dim: m,
            free,
            neighbors,
            fixed,
        })
    }

    fn lipschitz(&self, z: &[f64], out: &mut [f64]) {
        let m = self.dim;
        for (i, nb) in self.neighbors.iter().enumerate() {
            let xi = &z[i * m..(i + 1) * m];
            let mut top = 0.0f64;
            for &(slot, at, sw) in nb {
                let y = match slot {
                    Some(k) => &z[k * m..(k + 1) * m],
                    None => &self.fixed[at * m..(at + 1) * m],
                };
                let d2: f64 = xi.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                top = top.max(sw * d2.sqrt());
            }
            out[i] = top;
        }
    }

    /// `Σ (Su / unit)^s` and a subgradient with respect to the free values.
    fn energy_and_subgradient(&self, z: &[f64], s: f64, unit: f64, grad: &mut [f64]) -> f64 {
        let m = self.dim;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for (i, nb) in self.neighbors.iter().enumerate() {
            let xi = &z[i * m..(i + 1) * m];
            let mut top = (0.0f64, None);
            for (e, &(slot, at, sw)) in nb.iter().enumerate() {
                let y = match slot {
                    Some(k) => &z[k * m..(k + 1) * m],
                    None => &self.fixed[at * m..(at + 1) * m],
                };
                let d2: f64 = xi.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                let l = sw * d2.sqrt();
                if l > top.0 {
                    top = (l, Some(e));
                }
            }
            let (l, Some(e)) = top else { continue };
            let a = l / unit;
            total += pow_nonneg(a, s);
            let (slot, at, sw) = nb[e];
            // d/dz_i (l/unit)^s = s a^{s-1} sw (z_i - y) / (|z_i - y| unit)
            let f = s * pow_nonneg(a, s - 1.0) * sw * sw / (l * unit);
            for j in 0..m {
                let y = match slot {
                    Some(k) => z[k * m + j],
                    None => self.fixed[at * m + j],
                };
                let d = f * (z[i * m + j] - y);
                grad[i * m + j] += d;
                if let Some(k) = slot {
                    grad[k * m + j] -= d;
                }
            }
        }
        total
    }

    fn center_and_width(&self, prob: &BoundaryProblem, boxes: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let n = prob.interior_count();
        let mut c = Vec::with_capacity(self.free);
        let mut h = Vec::with_capacity(self.free);
        for _ in 0..n {
            for &(lo, hi) in boxes {
                c.push(0.5 * (lo + hi));
                h.push(0.5 * (hi - lo));
            }
        }
        (c, h)
    }

    fn assemble(&self, prob: &BoundaryProblem, z: &[f64]) -> VertexFunction {
        let m = self.dim;
        let mut u = prob.filled_with(&vec![0.0; m]);
        for (k, x) in prob.interior().into_iter().enumerate() {
            u.set(x, &z[k * m..(k + 1) * m]);
        }
        u
    }
}

/// Deterministic central-cut ellipsoid method for a convex `f` with
/// subgradient oracle `fg(z, grad) -> f(z)`, restricted to a box.
///
/// Stops once every axis of the ellipsoid has shrunk below `rel_width`
/// times its initial length. Returns the best point seen and the best value
/// at `checkpoints` evenly spaced stages.
pub fn ellipsoid_minimize<F>(
    center: &[f64],
    half_width: &[f64],
    rel_width: f64,
    checkpoints: usize,
    fg: F,
) -> (Vec<f64>, f64, Vec<f64>)
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let n = center.len();
    let mut grad = vec![0.0; n];
    let mut c = center.to_vec();
    let mut best = (c.clone(), fg(&c, &mut grad));
    let checkpoints = checkpoints.max(1);
    if n == 0 {
        return (best.0, best.1, vec![best.1; checkpoints]);
    }
    let nf = n as f64;
    let per_step = if n == 1 { 2f64.ln() } else { 1.0 / (2.0 * nf * (nf + 1.0)) };
    let steps = ((1.0 / rel_width).ln() / per_step).ceil() as usize;
    let mut p = vec![0.0; n * n];
    for j in 0..n {
        p[j * n + j] = nf * half_width[j] * half_width[j];
    }
    let mut pg = vec![0.0; n];
    let mut history = Vec::with_capacity(checkpoints);
    for step in 0..steps {
        // stay inside the box; otherwise cut on the objective
        let outside = (0..n).find(|&j| (c[j] - center[j]).abs() > half_width[j]);
        match outside {
            Some(j) => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                grad[j] = (c[j] - center[j]).signum();
            }
            None => {
                let v = fg(&c, &mut grad);
                if v < best.1 {
                    best = (c.clone(), v);
                }
            }
        }
        for i in 0..n {
            pg[i] = (0..n).map(|k| p[i * n + k] * grad[k]).sum();
        }
        let gpg: f64 = grad.iter().zip(&pg).map(|(a, b)| a * b).sum();
        if !(gpg > 0.0 && gpg.is_finite()) {
            break;
        }
        let root = gpg.sqrt();
        if n == 1 {
            c[0] -= 0.5 * pg[0] / root;
            p[0] *= 0.25;
        } else {
            for i in 0..n {
                c[i] -= pg[i] / ((nf + 1.0) * root);
            }
            let a = nf * nf / (nf * nf - 1.0);
            let b = 2.0 / ((nf + 1.0) * gpg);
            for i in 0..n {
                for k in 0..=i {
                    let v = a * (p[i * n + k] - b * pg[i] * pg[k]);
                    p[i * n + k] = v;
                    p[k * n + i] = v;
                }
            }
        }
        if (step + 1) * checkpoints / steps > history.len() {
            history.push(best.1);
        }
    }
    while history.len() < checkpoints {
        history.push(best.1);
    }
    (best.0, best.1, history)
}

/// Minimizer of `I_s` by an ellipsoid search over the value box.
pub fn brute_force_is(prob: &BoundaryProblem, s: f64, cfg: &OracleConfig) -> Result<(VertexFunction, f64)> {
    let (u, objective, _) = brute_force_is_rounds(prob, s, cfg)?;
    Ok((u, objective))
}

/// As [`brute_force_is`], also returning the best objective after each of
/// `refinement_rounds` stages.
pub fn brute_force_is_rounds(
    prob: &BoundaryProblem,
    s: f64,
    cfg: &OracleConfig,
) -> Result<(VertexFunction, f64, Vec<f64>)> {
    cfg.validate()?;
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be finite and at least 1, got {s}")));
    }
    let eval = FreeEvaluator::new(prob)?;
    let boxes = cfg.boxes_for(prob)?;
    let (c, h) = eval.center_and_width(prob, &boxes);
    // normalize so that large s neither overflows nor underflows
    let unit = boxes.iter().map(|(a, b)| b - a).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let energy = |z: &[f64], grad: &mut [f64]| eval.energy_and_subgradient(z, s, unit, grad);
    let (z, best, rounds) = ellipsoid_minimize(&c, &h, ELLIPSOID_REL_WIDTH, cfg.refinement_rounds, energy);
    let scale = pow_nonneg(unit, s);
    let u = eval.assemble(prob, &z);
    Ok((u, best * scale, rounds.iter().map(|v| v * scale).collect()))
}

/// `argmin_z (1/2λ)‖z - x‖² + ‖z‖₂,∞ˢ` for `x` split into groups of `m`,
/// by an ellipsoid search.
///
/// Without an explicit box every coordinate is searched between 0
/// and `x_j`, which contains the minimizer since the prox scales each
/// group by a factor in `[0, 1]`.
pub fn brute_force_prox(x: &[f64], m: usize, s: f64, lambda: f64, cfg: &OracleConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() > MAX_PROX_DIM {
        return Err(Error::OracleTooLarge {
            dim: x.len(),
            limit: MAX_PROX_DIM,
        });
    }
    if m == 0 || x.len() % m != 0 {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: x.len(),
        });
    }
    if !(lambda > 0.0) || !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("need s >= 1 and lambda > 0, got {s}, {lambda}")));
    }
    let boxes: Vec<(f64, f64)> = match &cfg.value_box {
        Some(b) if b.len() == x.len() => b.clone(),
        Some(b) => {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: b.len(),
            })
        }
        None => x.iter().map(|&v| (v.min(0.0), v.max(0.0))).collect(),
    };
    let c: Vec<f64> = boxes.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let h: Vec<f64> = boxes.iter().map(|(a, b)| 0.5 * (b - a)).collect();
    // coordinates with an empty interval are fixed
    let free: Vec<usize> = (0..x.len()).filter(|&j| h[j] > 0.0).collect();
    let expand = |y: &[f64]| {
        let mut z = c.clone();
        for (k, &j) in free.iter().enumerate() {
            z[j] = y[k];
        }
        z
    };
    let objective = |y: &[f64], grad: &mut [f64]| {
        let z = expand(y);
        let (mut top, mut arg) = (0.0f64, 0usize);
        for (g, grp) in z.chunks(m).enumerate() {
            let r = grp.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > top {
                (top, arg) = (r, g);
            }
        }
        let mut full: Vec<f64> = z.iter().zip(x).map(|(a, b)| (a - b) / lambda).collect();
        if top > 0.0 {
            let f = s * pow_nonneg(top, s - 1.0) / top;
            for j in arg * m..(arg + 1) * m {
                full[j] += f * z[j];
            }
        }
        for (k, &j) in free.iter().enumerate() {
            grad[k] = full[j];
        }
        let dist: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        dist / (2.0 * lambda) + pow_nonneg(top, s)
    };
    let yc: Vec<f64> = free.iter().map(|&j| c[j]).collect();
    let yh: Vec<f64> = free.iter().map(|&j| h[j]).collect();
    let (y, _, _) = ellipsoid_minimize(&yc, &yh, ELLIPSOID_REL_WIDTH, cfg.refinement_rounds, objective);
    Ok(expand(&y))
}

fn lex_with_slack(a: &[f64], b: &[f64], slack: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > slack {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Whether no grid candidate has a lexicographically smaller profile than
/// `u` by more than [`TIGHT_TOL`] in the first differing entry.
///
/// The search starts from `u` itself, so `u` is always among the
/// candidates.
pub fn verify_tight(u: &VertexFunction, prob: &BoundaryProblem, cfg: &OracleConfig) -> Result<bool> {
    prob.check_extension(u)?;
    let eval = FreeEvaluator::new(prob)?;
    let boxes = cfg.boxes_for(prob)?;
    let (_, h) = eval.center_and_width(prob, &boxes);
    let start: Vec<f64> = prob.interior().iter().flat_map(|&x| u.get(x).to_vec()).collect();
    let n = prob.interior_count();
    let profile = |z: &[f64]| {
        let mut l = [0.0; MAX_FREE_COORDS];
        eval.lipschitz(z, &mut l[..n]);
        l[..n].sort_unstable_by(|a, b| b.total_cmp(a));
        l
    };
    let found = grid_search(&start, &h, cfg, profile, |a: &[f64; MAX_FREE_COORDS], b: &[f64; MAX_FREE_COORDS]| {
        lex_with_slack(a, b, 1e-13)
    })?;
    let mine = lipschitz_profile(u, prob)?;
    Ok(lex_with_slack(&found.key[..n], mine.sorted(), TIGHT_TOL) != Ordering::Less)
}
