//! Exhaustive grid search over the selected beam powers, for certifying the
//! solvers on small instances.

use super::{AllocationProblem, AllocationResult, Approach};
use crate::{Error, Result};

/// Largest number of selected beams the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 3;

const ZOOM_ROUNDS: usize = 50;
const ZOOM_POINTS: usize = 9;

/// Grid minimiser of the completed energy.
///
/// Each selected power ranges over `[0, min(cap_m, P_0^OMA / M)]`; anything
/// larger already costs more than serving the far user by OMA alone. The
/// coarse grid has `grid_step` spacing as a fraction of that range, and the
/// best cell is then refined by repeatedly re-gridding a ±2-cell window with
/// half the spacing. `P_0` is always the minimal feasible value for the beam
/// powers at hand.
pub fn brute_force_oracle(prob: &AllocationProblem, grid_step: f64) -> Result<AllocationResult> {
    let dim = prob.num_selected();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::Unsupported {
            method: "brute_force_oracle",
            requirement: format!("at most {ORACLE_MAX_DIM} selected beams, got {dim}"),
        });
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::param(
            "grid_step",
            format!("must lie in (0, 1], got {grid_step}"),
        ));
    }
    let m = prob.num_legacy();
    if prob.far_target == 0.0 {
        return Ok(prob.finish(vec![0.0; m], 0));
    }
    let oma_power = super::min_final_slot_for(&prob.params, prob.far_target, 0.0);
    let upper: Vec<f64> = prob
        .selected
        .iter()
        .map(|&k| {
            let bound = oma_power / m as f64;
            match prob.approach {
                Approach::DecodeOwn => bound.min(prob.params.caps[k]),
                Approach::DecodeFarFirst => bound,
            }
        })
        .collect();

    let eval = |x: &[f64]| -> f64 {
        let mut per_beam = vec![0.0; m];
        for (&k, v) in prob.selected.iter().zip(x) {
            per_beam[k] = *v;
        }
        prob.completed_energy(&per_beam)
    };

    let coarse = (1.0 / grid_step).round() as usize + 1;
    let mut step: Vec<f64> = upper.iter().map(|u| u / (coarse - 1) as f64).collect();
    let axes: Vec<Vec<f64>> = upper
        .iter()
        .zip(&step)
        .map(|(u, h)| (0..coarse).map(|i| (i as f64 * h).min(*u)).collect())
        .collect();
    let (mut best, mut best_e) = grid_min(&axes, &eval);
    let mut evaluations = coarse.pow(dim as u32);

    for _ in 0..ZOOM_ROUNDS {
        let axes: Vec<Vec<f64>> = best
            .iter()
            .zip(&step)
            .zip(&upper)
            .map(|((c, h), u)| {
                let half = ZOOM_POINTS as f64 / 2.0 - 0.5;
                (0..ZOOM_POINTS)
                    .map(|i| (c + (i as f64 - half) * 0.5 * h).clamp(0.0, *u))
                    .collect()
            })
            .collect();
        let (cand, e) = grid_min(&axes, &eval);
        evaluations += ZOOM_POINTS.pow(dim as u32);
        if e < best_e {
            best = cand;
            best_e = e;
        }
        step.iter_mut().for_each(|h| *h *= 0.5);
    }

    let mut per_beam = vec![0.0; m];
    for (&k, v) in prob.selected.iter().zip(&best) {
        per_beam[k] = *v;
    }
    Ok(prob.finish(per_beam, evaluations))
}

/// Minimum of `eval` over the Cartesian product of `axes`.
fn grid_min<F: Fn(&[f64]) -> f64>(axes: &[Vec<f64>], eval: &F) -> (Vec<f64>, f64) {
    let dim = axes.len();
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    let mut best = (point.clone(), eval(&point));
    loop {
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                point[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            point[d] = axes[d][0];
            d += 1;
        }
        if d == dim {
            return best;
        }
        let e = eval(&point);
        if e < best.1 {
            best = (point.clone(), e);
        }
    }
}
