//! Mixed 2-p norms and the proximal operator of `ψ(x) = ‖x‖₂,∞ˢ`.
//!
//! A vector `x ∈ R^{n m}` is read as `n` contiguous groups of length `m`.
//! The prox of `λψ` clips every group to radius `τ`:
//! `z_i = τ x_i / |x_i|` if `|x_i| > τ`, else `z_i = x_i`, where `τ` is the
//! root of `s λ τ^{s-1} + K τ - ‖x_K‖₂,₁` for the active count `K` found by
//! growing `K` over the groups sorted by norm.
//!
//! [`prox_into`] also accepts positive group weights `ω`, replacing the
//! squared distance by `Σ_i ω_i |z_i - x_i|²`. The clipping structure is the
//! same with `K τ - ‖x_K‖₂,₁` replaced by `Σ_K ω_i (τ - |x_i|)`.

use crate::error::{Error, Result};

/// Default relative tolerance of the threshold Newton solve.
pub const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_STEPS: usize = 200;

fn group_norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖x‖₂,p = (Σ |x_i|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
pub fn norm_2p(x: &[f64], m: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return norm_2inf(x, m);
    }
    x.chunks(m)
        .map(|g| group_norm(g).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn norm_2inf(x: &[f64], m: usize) -> f64 {
    x.chunks(m).map(group_norm).fold(0.0, f64::max)
}

pub fn norm_21(x: &[f64], m: usize) -> f64 {
    x.chunks(m).map(group_norm).sum()
}

/// `ψ(x) = ‖x‖₂,∞ˢ`.
pub fn psi(x: &[f64], m: usize, s: f64) -> f64 {
    pow_nonneg(norm_2inf(x, m), s)
}

/// `t^e` for `t ≥ 0`, evaluated through `exp(e ln t)`.
pub(crate) fn pow_nonneg(t: f64, e: f64) -> f64 {
    if t > 0.0 {
        (e * t.ln()).exp()
    } else if e == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// The threshold equation `g(τ) = s λ τ^{s-1} + W τ - S` for one active
/// count `K`, where `W` is the number of active groups (or their total
/// weight) and `S` the sum of their (weighted) norms.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdEquation {
    pub s: f64,
    pub lambda: f64,
    pub active: usize,
    pub weight: f64,
    /// `S = ‖x_K‖₂,₁` for unit weights.
    pub norm_sum: f64,
}

impl ThresholdEquation {
    /// The unweighted equation `s λ τ^{s-1} + K τ - S`.
    pub fn new(s: f64, lambda: f64, active: usize, norm_sum: f64) -> Self {
        ThresholdEquation {
            s,
            lambda,
            active,
            weight: active as f64,
            norm_sum,
        }
    }

    pub fn value(&self, tau: f64) -> f64 {
        self.s * self.lambda * pow_nonneg(tau, self.s - 1.0) + self.weight * tau - self.norm_sum
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        self.s * (self.s - 1.0) * self.lambda * pow_nonneg(tau, self.s - 2.0) + self.weight
    }

    /// Error bound for [`value`](Self::value); `τ^{s-1}` is evaluated as
    /// `exp((s - 1) ln τ)`, whose relative error grows with the exponent.
    fn rounding(&self, tau: f64) -> f64 {
        let e = self.s - 1.0;
        let power = self.s * self.lambda * pow_nonneg(tau, e);
        let spread = if tau > 0.0 { e * tau.ln().abs() + 1.0 } else { 1.0 };
        f64::EPSILON * (4.0 * self.norm_sum.abs() + 2.0 * spread * power)
    }

    /// Both terms of `g + S` are nonnegative and increasing, so the root
    /// lies where the larger of them reaches between `S / 2` and `S`.
    pub fn bracket(&self) -> (f64, f64) {
        let e = 1.0 / (self.s - 1.0);
        let linear = self.norm_sum / self.weight;
        let power = |c: f64| pow_nonneg(c * self.norm_sum / (self.s * self.lambda), e);
        ((0.5 * linear).min(power(0.5)), linear.min(power(1.0)))
    }

    /// Safeguarded Newton iteration inside the bracket, started at the
    /// right end, with bisection whenever a step leaves the bracket.
    pub fn solve(&self, rel_tol: f64) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket();
        let (g_lo, g_hi) = (self.value(lo), self.value(hi));
        if !(g_lo <= self.rounding(lo) && g_hi >= -self.rounding(hi)) {
            return Err(self.failure(lo, hi));
        }
        if g_hi <= 0.0 {
            return Ok(hi);
        }
        if g_lo >= 0.0 {
            return Ok(lo);
        }
        let mut tau = hi;
        let mut last_step = hi - lo;
        for _ in 0..NEWTON_MAX_STEPS {
            let g = self.value(tau);
            if g == 0.0 {
                return Ok(tau);
            }
            if g > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let d = self.derivative(tau);
            let mut next = tau - g / d;
            // bisect when Newton leaves the bracket or stalls
            if !(next > lo && next < hi) || (2.0 * g).abs() > (last_step * d).abs() {
                next = 0.5 * (lo + hi);
            }
            last_step = (next - tau).abs();
            if last_step <= rel_tol * next.abs().max(f64::MIN_POSITIVE) || hi - lo <= rel_tol * hi {
                return Ok(next);
            }
            tau = next;
        }
        Err(self.failure(lo, hi))
    }

    fn failure(&self, lo: f64, hi: f64) -> Error {
        Error::RootFinding {
            active: self.active,
            lo,
            hi,
            value: self.value(0.5 * (lo + hi)),
        }
    }
}

/// Result metadata of one prox evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxOutcome {
    pub tau: f64,
    pub active: usize,
}

/// Reusable buffers for [`prox_into`].
#[derive(Debug, Default, Clone)]
pub struct ProxScratch {
    norms: Vec<f64>,
    order: Vec<usize>,
}

/// `prox_{λψ}(x)` written to `out`, optionally under group weights.
#[allow(clippy::too_many_arguments)]
pub fn prox_into(
    x: &[f64],
    m: usize,
    s: f64,
    lambda: f64,
    weights: Option<&[f64]>,
    newton_tol: f64,
    out: &mut [f64],
    scratch: &mut ProxScratch,
) -> Result<ProxOutcome> {
    let n = x.len() / m;
    scratch.norms.clear();
    scratch.norms.extend(x.chunks(m).map(group_norm));
    scratch.order.clear();
    scratch.order.extend(0..n);
    let norms = &scratch.norms;
    // stable sort keeps index order among equal norms
    scratch.order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let order = &scratch.order;

    let mut active = 0usize;
    let mut tau = 0.0f64;
    let mut weight = 0.0f64;
    let mut norm_sum = 0.0f64;
    loop {
        let above = order.iter().take_while(|&&i| norms[i] > tau).count();
        if above <= active {
            break;
        }
        let i = order[active];
        let omega = weights.map_or(1.0, |w| w[i]);
        weight += omega;
        norm_sum += omega * norms[i];
        active += 1;
        tau = ThresholdEquation {
            s,
            lambda,
            active,
            weight,
            norm_sum,
        }
        .solve(newton_tol)?;
    }

    out.copy_from_slice(x);
    for (i, &r) in norms.iter().enumerate() {
        if r > tau {
            let f = tau / r;
            out[i * m..(i + 1) * m].iter_mut().for_each(|v| *v *= f);
        }
    }
    Ok(ProxOutcome { tau, active })
}

/// `prox_{λψ}(x)` for `n` groups of length `m`.
pub fn prox_group_maxnorm_pow(x: &[f64], m: usize, s: f64, lambda: f64) -> Result<Vec<f64>> {
    check_args(x, m, s, lambda)?;
    let mut out = vec![0.0; x.len()];
    prox_into(x, m, s, lambda, None, NEWTON_TOL, &mut out, &mut ProxScratch::default())?;
    Ok(out)
}

/// Prox of the scaled conjugate `λ ψ*(·/λ)`, evaluated directly as the
/// radial shrinkage `x_i (1 - τ/|x_i|)₊` with the same threshold `τ`.
pub fn prox_conjugate(x: &[f64], m: usize, s: f64, lambda: f64) -> Result<Vec<f64>> {
    check_args(x, m, s, lambda)?;
    let mut clipped = vec![0.0; x.len()];
    let outcome = prox_into(
        x,
        m,
        s,
        lambda,
        None,
        NEWTON_TOL,
        &mut clipped,
        &mut ProxScratch::default(),
    )?;
    let tau = outcome.tau;
    let mut out = vec![0.0; x.len()];
    for (g, o) in x.chunks(m).zip(out.chunks_mut(m)) {
        let r = group_norm(g);
        if r > tau {
            let f = 1.0 - tau / r;
            for (a, b) in o.iter_mut().zip(g) {
                *a = b * f;
            }
        }
    }
    Ok(out)
}

fn check_args(x: &[f64], m: usize, s: f64, lambda: f64) -> Result<()> {
    if m == 0 || x.len() % m != 0 || x.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "prox input of length {} is not a nonempty list of groups of size {m}",
            x.len()
        )));
    }
    if !(s >= 2.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must satisfy 2 <= s < inf, got {s}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_fixed() {
        assert_eq!(prox_group_maxnorm_pow(&[0.0, 0.0, 0.0], 1, 4.0, 1.0).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_scalar_matches_quadratic_prox() {
        // prox of λ|x|² is x / (1 + 2λ)
        let z = prox_group_maxnorm_pow(&[3.0], 1, 2.0, 1.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-14);
        let z = prox_group_maxnorm_pow(&[-5.0], 1, 2.0, 0.5).unwrap();
        assert!((z[0] + 2.5).abs() < 1e-14);
    }

    #[test]
    fn second_group_below_threshold_is_kept() {
        let z = prox_group_maxnorm_pow(&[3.0, 0.5], 1, 2.0, 1.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-14);
        assert_eq!(z[1], 0.5);
    }

    #[test]
    fn equal_groups_share_threshold() {
        // two groups of norm 2 with s = 2, λ = 1: 2τ + 2τ = 4
        let z = prox_group_maxnorm_pow(&[2.0, 0.0, 0.0, -2.0], 2, 2.0, 1.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-14);
        assert!((z[3] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn threshold_solve_checks_bracket() {
        let eq = ThresholdEquation::new(10.0, 0.3, 2, 5.0);
        let tau = eq.solve(NEWTON_TOL).unwrap();
        assert!(eq.value(tau).abs() < 1e-12);
        let bad = ThresholdEquation {
            norm_sum: -1.0,
            ..eq
        };
        assert!(matches!(bad.solve(NEWTON_TOL), Err(Error::RootFinding { .. })));
    }

    #[test]
    fn unit_weights_match_plain_prox() {
        let x = [3.0, -1.0, 0.5, 2.0, 0.25, -2.5];
        let plain = prox_group_maxnorm_pow(&x, 2, 6.0, 0.7).unwrap();
        let mut out = vec![0.0; 6];
        let ones = [1.0; 3];
        prox_into(&x, 2, 6.0, 0.7, Some(&ones), NEWTON_TOL, &mut out, &mut ProxScratch::default()).unwrap();
        assert_eq!(out, plain);
    }

    #[test]
    fn weighted_scalar_prox() {
        // argmin (ω/2λ)(z - 3)² + z², i.e. z = 3ω / (ω + 2λ)
        let mut out = [0.0];
        prox_into(&[3.0], 1, 2.0, 1.0, Some(&[4.0]), NEWTON_TOL, &mut out, &mut ProxScratch::default())
            .unwrap();
        assert!((out[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(prox_group_maxnorm_pow(&[1.0], 1, 1.5, 1.0).is_err());
        assert!(prox_group_maxnorm_pow(&[1.0], 1, 2.0, 0.0).is_err());
        assert!(prox_group_maxnorm_pow(&[1.0, 2.0, 3.0], 2, 2.0, 1.0).is_err());
    }

    #[test]
    fn mixed_norms() {
        let x = [3.0, 4.0, 0.0, 1.0];
        assert_eq!(norm_2inf(&x, 2), 5.0);
        assert_eq!(norm_21(&x, 2), 6.0);
        assert!((norm_2p(&x, 2, 2.0) - 26f64.sqrt()).abs() < 1e-14);
    }
}
