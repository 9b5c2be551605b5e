//! Analytical allocations: the single-legacy-user case and the high-SNR
//! approximation for equal-power beams.

use super::{AllocationResult, Mode, ThresholdRule};
use crate::beamforming::EffectiveParams;
use crate::rates::PowerProfile;
use crate::{Error, Result};

fn oma(params: &EffectiveParams, far_target: f64, slot_duration: f64) -> AllocationResult {
    super::solve_oma_baseline(params, far_target, slot_duration)
}

/// Closed-form optimum for one legacy user (`M = M_x = 1`).
///
/// With `β = min(a_1 h_1, a_0 g_1²)` the KKT point is
/// `P_1 = √(e^{R_0}/(β b_0)) - 1/β`, `P_0 = √(e^{R_0}/(β b_0)) - 1/b_0`,
/// valid while `P_1 ≥ 0`. If `β > b_0` (only reachable with synthetic
/// parameters) the final slot is idle and everything rides on the beam.
pub fn closed_form_two_user(
    params: &EffectiveParams,
    far_target: f64,
    slot_duration: f64,
    rule: ThresholdRule,
) -> Result<AllocationResult> {
    if params.num_legacy() != 1 {
        return Err(Error::Unsupported {
            method: "closed_form_two_user",
            requirement: format!("exactly one legacy user, got {}", params.num_legacy()),
        });
    }
    check_target(far_target)?;
    let beta = params.sic_gain(0).min(params.far_direct_gain(0));
    let b0 = params.far_oma_snr;
    if !(beta > 0.0) || !rule.hybrid(far_target, b0 / beta) {
        return Ok(oma(params, far_target, slot_duration));
    }
    let s = ((far_target - (beta * b0).ln()) / 2.0).exp();
    let (p1, p0, lambda) = if s - 1.0 / b0 < 0.0 {
        (far_target.exp_m1() / beta, 0.0, None)
    } else if s - 1.0 / beta < 0.0 {
        // literal threshold admitted a point with negative beam power
        let r = oma(params, far_target, slot_duration);
        return Ok(AllocationResult {
            mode: Mode::Hybrid,
            ..r
        });
    } else {
        (s - 1.0 / beta, s - 1.0 / b0, Some(s))
    };
    let residual = (beta * p1).ln_1p() + (b0 * p0).ln_1p() - far_target;
    Ok(AllocationResult {
        powers: PowerProfile {
            per_beam: vec![p1],
            final_slot: p0,
            legacy_power: params.budget.legacy_power,
        },
        total_energy: slot_duration * (p1 + p0),
        mode: Mode::Hybrid,
        constraint_residual: residual,
        solver_iterations: 0,
        dual_multiplier: lambda,
        large_m_power: None,
    })
}

/// High-SNR approximation with all `M_x` selected beams at equal power.
///
/// With `c = min(1/P, a_0 (Σ_sel g_k)²)` the per-beam power is
/// `λ/M_x - 1/c` and `P_0 = λ - 1/b_0`, where
/// `λ = (M_x^M e^{R_0} / (c^M b_0))^{1/(M+1)}`. The residual reported is
/// against the approximate constraint `M log(1 + c P) + log(1 + b_0 P_0) ≥ R_0`
/// the formula solves exactly. The large-`M` power
/// `(1/c)((e^{R_0}/(M_x b_0))^{1/(M+1)} - 1)` is attached for comparison.
pub fn high_snr_closed_form(
    params: &EffectiveParams,
    far_target: f64,
    selected: &[usize],
    slot_duration: f64,
    rule: ThresholdRule,
) -> Result<AllocationResult> {
    check_target(far_target)?;
    let m_users = params.num_legacy();
    if selected.is_empty() || selected.len() > m_users || selected.iter().any(|&k| k >= m_users) {
        return Err(Error::param(
            "selected",
            format!("need 1..={m_users} valid beam indices, got {selected:?}"),
        ));
    }
    let m = m_users as f64;
    let mx = selected.len() as f64;
    let b0 = params.far_oma_snr;
    let c = (1.0 / params.budget.legacy_power).min(params.coherent_gain(selected));
    let large_m = ((far_target - (mx * b0).ln()) / (m + 1.0)).exp_m1() / c;
    if !(c > 0.0) || !rule.hybrid(far_target, mx * b0 / c) {
        let mut r = oma(params, far_target, slot_duration);
        r.large_m_power = Some(large_m.max(0.0));
        return Ok(r);
    }
    let lambda = ((m * mx.ln() + far_target - m * c.ln() - b0.ln()) / (m + 1.0)).exp();
    let (per, p0, dual) = if lambda - 1.0 / b0 < 0.0 {
        ((far_target / m).exp_m1() / c, 0.0, None)
    } else if lambda / mx - 1.0 / c < 0.0 {
        let mut r = oma(params, far_target, slot_duration);
        r.mode = Mode::Hybrid;
        r.large_m_power = Some(large_m.max(0.0));
        return Ok(r);
    } else {
        (lambda / mx - 1.0 / c, lambda - 1.0 / b0, Some(lambda))
    };
    let mut per_beam = vec![0.0; m_users];
    for &k in selected {
        per_beam[k] = per;
    }
    let residual = m * (c * per).ln_1p() + (b0 * p0).ln_1p() - far_target;
    Ok(AllocationResult {
        powers: PowerProfile {
            per_beam,
            final_slot: p0,
            legacy_power: params.budget.legacy_power,
        },
        total_energy: slot_duration * (m * mx * per + p0),
        mode: Mode::Hybrid,
        constraint_residual: residual,
        solver_iterations: 0,
        dual_multiplier: dual,
        large_m_power: Some(large_m),
    })
}

fn check_target(far_target: f64) -> Result<()> {
    if far_target.is_finite() && far_target >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "far_target",
            format!("must be non-negative, got {far_target}"),
        ))
    }
}
