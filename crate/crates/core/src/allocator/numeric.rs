//! Numerical solvers for both SIC approaches.
//!
//! Both problems are solved the same way. The outer variable is the rate the
//! far user gets from its dedicated slot, `ρ = log(1 + b_0 P_0) ∈ [ρ_min, R_0]`.
//! Fixing `ρ` fixes the first-phase rate `r = (R_0 - ρ)/M` every selected beam
//! has to support, and the cheapest beam powers for that `r` solve
//!
//! ```text
//! min Σ x_k²   s.t.  l_k ≤ x_k ≤ u_k,   Σ g_k x_k ≥ S,      x_k = √P_k
//! ```
//!
//! with `S² = (e^r - 1)/a_0`. Under Approach II the floors `l_k² = (e^r - 1)/(a_k h_k)`
//! come from the SIC constraints and there are no caps; under Approach I the
//! floors are zero and `u_k² = cap_k`. The KKT point is `x_k = clamp(t g_k, l_k, u_k)`
//! with the scalar `t` found by bisection. The energy of the completed
//! allocation is unimodal in `ρ` (the problem is convex in `P_0` and `ρ` is a
//! monotone reparametrisation), so a golden-section search over `ρ` finds the
//! optimum. Working in `ρ` rather than `P_0` keeps relative precision when the
//! OMA power `(e^{R_0} - 1)/b_0` is many orders of magnitude above the optimum.

use super::search::{bisect_threshold, golden_section};
use super::{AllocationProblem, AllocationResult, Approach};
use crate::{Error, Result};

/// Relative width at which the outer search stops.
const OUTER_REL_TOL: f64 = 1e-12;

/// Minimum-norm amplitudes `x = clamp(t g, lower, upper)` reaching
/// `g·x ≥ target`. When even `upper` falls short, `upper` (with zero-gain
/// entries at their floor) is returned.
pub(crate) fn min_norm_amplitudes(g: &[f64], lower: &[f64], upper: &[f64], target: f64) -> Vec<f64> {
    let clamp = |t: f64| -> Vec<f64> {
        g.iter()
            .zip(lower)
            .zip(upper)
            .map(|((g, l), u)| (t * g).max(*l).min(*u))
            .collect()
    };
    let reach = |x: &[f64]| -> f64 { g.iter().zip(x).filter(|(g, _)| **g > 0.0).map(|(g, x)| g * x).sum() };
    if reach(lower) >= target {
        return lower.to_vec();
    }
    let ceiling = clamp(f64::INFINITY);
    if reach(&ceiling) < target {
        return ceiling;
    }
    let gg: f64 = g.iter().map(|g| g * g).sum();
    let mut hi = target / gg;
    let mut guard = 0;
    while reach(&clamp(hi)) < target && guard < 2100 {
        hi *= 2.0;
        guard += 1;
    }
    let (t, _) = bisect_threshold(|t| reach(&clamp(t)) >= target, 0.0, hi);
    clamp(t)
}

struct Inner<'a> {
    prob: &'a AllocationProblem,
    gains: Vec<f64>,
    caps: Vec<f64>,
    sic: Vec<f64>,
}

impl<'a> Inner<'a> {
    fn new(prob: &'a AllocationProblem) -> Self {
        let p = &prob.params;
        Inner {
            gains: prob.selected.iter().map(|&k| p.far_beam_gain[k]).collect(),
            caps: prob
                .selected
                .iter()
                .map(|&k| match prob.approach {
                    Approach::DecodeOwn => p.caps[k].max(0.0).sqrt(),
                    Approach::DecodeFarFirst => f64::INFINITY,
                })
                .collect(),
            sic: prob.selected.iter().map(|&k| p.sic_gain(k)).collect(),
            prob,
        }
    }

    /// Cheapest beam powers (over all legacy beams) when the final slot
    /// delivers `slot_rate` nats.
    fn beam_powers(&self, slot_rate: f64) -> Vec<f64> {
        let prob = self.prob;
        let mut per_beam = vec![0.0; prob.num_legacy()];
        let r = (prob.far_target - slot_rate) / prob.num_legacy() as f64;
        if r <= 0.0 {
            return per_beam;
        }
        let e = r.exp_m1();
        let target = (e / prob.params.far_inv_interf).sqrt();
        let floors: Vec<f64> = match prob.approach {
            Approach::DecodeOwn => vec![0.0; self.gains.len()],
            Approach::DecodeFarFirst => self.sic.iter().map(|b| (e / b).sqrt()).collect(),
        };
        let x = min_norm_amplitudes(&self.gains, &floors, &self.caps, target);
        for (&k, xk) in prob.selected.iter().zip(x) {
            per_beam[k] = xk * xk;
        }
        per_beam
    }

    /// Lowest final-slot rate for which the beams can still cover the rest.
    fn min_slot_rate(&self) -> f64 {
        let prob = self.prob;
        match prob.approach {
            Approach::DecodeFarFirst => 0.0,
            Approach::DecodeOwn => {
                let reach: f64 = self.gains.iter().zip(&self.caps).map(|(g, u)| g * u).sum();
                let best = (prob.params.far_inv_interf * reach * reach).ln_1p();
                (prob.far_target - prob.num_legacy() as f64 * best).max(0.0)
            }
        }
    }
}

fn solve_numeric(prob: &AllocationProblem) -> Result<AllocationResult> {
    let m = prob.num_legacy();
    if prob.far_target == 0.0 {
        return Ok(prob.finish(vec![0.0; m], 0));
    }
    let oma = prob.finish(vec![0.0; m], 0);
    let inner = Inner::new(prob);
    if inner.gains.iter().all(|g| *g == 0.0) {
        return Ok(oma);
    }
    let lo = inner.min_slot_rate().min(prob.far_target);
    let best = golden_section(
        |rho| prob.completed_energy(&inner.beam_powers(rho)),
        lo,
        prob.far_target,
        OUTER_REL_TOL,
    );
    let result = prob.finish(inner.beam_powers(best.x), best.iterations);
    if !result.is_feasible() {
        return Err(Error::NotConverged {
            residual: result.constraint_residual,
        });
    }
    Ok(if result.total_energy < oma.total_energy {
        result
    } else {
        AllocationResult {
            solver_iterations: best.iterations,
            ..oma
        }
    })
}

/// Approach I: per-beam caps, single coupled rate constraint.
pub fn solve_approach1(prob: &AllocationProblem) -> Result<AllocationResult> {
    if prob.approach != Approach::DecodeOwn {
        return Err(Error::Unsupported {
            method: "solve_approach1",
            requirement: "an Approach I problem".into(),
        });
    }
    if let Some(&k) = prob.selected.iter().find(|&&k| !prob.params.is_qualified(k)) {
        return Err(Error::UnqualifiedBeam {
            index: k,
            cap: prob.params.caps[k],
        });
    }
    solve_numeric(prob)
}

/// Approach II: one SIC constraint per selected beam plus the coupled one.
pub fn solve_approach2(prob: &AllocationProblem) -> Result<AllocationResult> {
    if prob.approach != Approach::DecodeFarFirst {
        return Err(Error::Unsupported {
            method: "solve_approach2",
            requirement: "an Approach II problem".into(),
        });
    }
    solve_numeric(prob)
}
