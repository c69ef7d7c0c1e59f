//! The energies `I_s` and the log-sum-exp surrogate.

use crate::error::Result;
use crate::graph::{lipschitz_profile, BoundaryProblem, VertexFunction};
use crate::tight::prox::pow_nonneg;

/// `I_s(u) = Σ_{x ∉ U} S u(x)^s`.
pub fn energy_is(u: &VertexFunction, prob: &BoundaryProblem, s: f64) -> Result<f64> {
    prob.check_extension(u)?;
    let profile = lipschitz_profile(u, prob)?;
    Ok(profile.per_node().iter().map(|&l| pow_nonneg(l, s)).sum())
}

/// `(1/p) log Σ_{x ∉ U} exp(p S u(x))`, shifted by the maximum.
pub fn energy_logexp(u: &VertexFunction, prob: &BoundaryProblem, p: f64) -> Result<f64> {
    prob.check_extension(u)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(crate::Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let profile = lipschitz_profile(u, prob)?;
    if profile.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let top = profile.max();
    let sum: f64 = profile.per_node().iter().map(|&l| (p * (l - top)).exp()).sum();
    Ok(top + sum.ln() / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    fn path() -> BoundaryProblem {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        BoundaryProblem::scalar(g, &[(0, 0.0), (2, 2.0)]).unwrap()
    }

    #[test]
    fn single_interior_node() {
        let prob = path();
        let u = VertexFunction::scalar(vec![0.0, 0.5, 2.0]);
        assert_eq!(energy_is(&u, &prob, 3.0).unwrap(), 1.5f64.powi(3));
        assert!((energy_logexp(&u, &prob, 7.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_must_match() {
        let prob = path();
        let u = VertexFunction::scalar(vec![0.1, 0.5, 2.0]);
        assert!(energy_is(&u, &prob, 2.0).is_err());
        assert!(energy_logexp(&u, &prob, 2.0).is_err());
    }

    #[test]
    fn constant_data_has_zero_energy() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let prob = BoundaryProblem::scalar(g, &[(0, 4.0)]).unwrap();
        let u = VertexFunction::scalar(vec![4.0; 3]);
        assert_eq!(energy_is(&u, &prob, 10.0).unwrap(), 0.0);
    }
}
