//! Minimum-energy power allocation for the far user.
//!
//! All problems minimise `T (M Σ_m P_m + P_0)` subject to the far user's total
//! rate over the `M` legacy slots plus its dedicated slot reaching `R_0`:
//!
//! - Approach I ([`Approach::DecodeOwn`]): one coupled rate constraint plus a
//!   per-beam power cap protecting the legacy rate target;
//! - Approach II ([`Approach::DecodeFarFirst`]): the coupled constraint plus
//!   one SIC constraint per selected beam, no caps.
//!
//! Both are concave programs. [`solve_approach1`] and [`solve_approach2`]
//! solve them numerically; [`closed_form_two_user`] and
//! [`high_snr_closed_form`] give the analytical solutions for the single-user
//! and high-SNR cases; [`brute_force_oracle`] certifies the solvers on small
//! instances.

mod closed_form;
mod numeric;
mod oracle;
pub mod search;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::beamforming::EffectiveParams;
use crate::rates::{self, total_far_rate};
use crate::{csv, Error, Result};

pub use closed_form::{closed_form_two_user, high_snr_closed_form};
pub use numeric::{solve_approach1, solve_approach2};
pub use oracle::{brute_force_oracle, ORACLE_MAX_DIM};
pub use rates::{Approach, PowerProfile};

/// Constraint residual below which an allocation still counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// At least one legacy beam carries far-user power.
    Hybrid,
    /// All legacy beams idle; the far user is served in its own slot only.
    OmaFallback,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Hybrid => "hybrid",
            Mode::OmaFallback => "oma_fallback",
        }
    }
}

/// Form of the hybrid-vs-OMA threshold used by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `e^{R_0} ≥ b_0/β` (two-user) and `e^{R_0} ≥ M_x b_0/c` (high SNR), the
    /// conditions under which the closed-form beam powers are non-negative.
    #[default]
    Exponential,
    /// The same inequalities with `R_0` in place of `e^{R_0}`.
    Literal,
}

impl ThresholdRule {
    fn hybrid(self, far_target: f64, ratio: f64) -> bool {
        match self {
            ThresholdRule::Exponential => far_target >= ratio.ln(),
            ThresholdRule::Literal => far_target >= ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    pub params: EffectiveParams,
    pub approach: Approach,
    /// `R_0`, nats.
    pub far_target: f64,
    /// Beams allowed to carry far-user power.
    pub selected: Vec<usize>,
    /// `T`, seconds.
    pub slot_duration: f64,
    pub threshold_rule: ThresholdRule,
}

impl AllocationProblem {
    pub fn new(params: EffectiveParams, approach: Approach, far_target: f64, selected: Vec<usize>) -> Result<Self> {
        if !(far_target.is_finite() && far_target >= 0.0) {
            return Err(Error::param(
                "far_target",
                format!("must be non-negative, got {far_target}"),
            ));
        }
        let m = params.num_legacy();
        if selected.is_empty() || selected.len() > m {
            return Err(Error::param(
                "selected",
                format!("need between 1 and {m} beams, got {}", selected.len()),
            ));
        }
        let mut seen = vec![false; m];
        for &k in &selected {
            if k >= m || std::mem::replace(&mut seen[k], true) {
                return Err(Error::param(
                    "selected",
                    format!("index {k} is out of range or repeated"),
                ));
            }
            if approach == Approach::DecodeOwn && !params.is_qualified(k) {
                return Err(Error::UnqualifiedBeam {
                    index: k,
                    cap: params.caps[k],
                });
            }
        }
        Ok(AllocationProblem {
            params,
            approach,
            far_target,
            selected,
            slot_duration: 1.0,
            threshold_rule: ThresholdRule::default(),
        })
    }

    /// Problem over the `mx` best beams, as picked by [`qualify_and_select`].
    /// Returns `None` when no beam qualifies.
    pub fn with_best_beams(
        params: EffectiveParams,
        approach: Approach,
        far_target: f64,
        mx: usize,
    ) -> Result<Option<Self>> {
        let selected = qualify_and_select(&params, approach, mx);
        if selected.is_empty() {
            return Ok(None);
        }
        Self::new(params, approach, far_target, selected).map(Some)
    }

    pub fn slot_duration(mut self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::param("slot_duration", format!("must be positive, got {t}")));
        }
        self.slot_duration = t;
        Ok(self)
    }

    pub fn threshold_rule(mut self, rule: ThresholdRule) -> Self {
        self.threshold_rule = rule;
        self
    }

    pub fn num_legacy(&self) -> usize {
        self.params.num_legacy()
    }

    pub fn num_selected(&self) -> usize {
        self.selected.len()
    }

    /// `M Σ_m P_m + P_0`, scaled by `T`.
    pub fn energy(&self, per_beam: &[f64], final_slot: f64) -> f64 {
        self.slot_duration * (self.num_legacy() as f64 * per_beam.iter().sum::<f64>() + final_slot)
    }

    /// `M R_{1,0} + R_0^OMA(P_0) - R_0` for the simplified rates.
    pub fn residual(&self, pp: &PowerProfile) -> f64 {
        total_far_rate(pp, &self.params, self.approach, &self.selected) - self.far_target
    }

    /// Smallest `P_0` completing `per_beam` to a feasible allocation.
    pub fn min_final_slot_power(&self, per_beam: &[f64]) -> f64 {
        let first = rates::first_phase_rate(per_beam, &self.params, self.approach, &self.selected);
        min_final_slot_for(&self.params, self.far_target, self.num_legacy() as f64 * first)
    }

    /// Energy of the cheapest feasible completion of `per_beam`.
    pub fn completed_energy(&self, per_beam: &[f64]) -> f64 {
        self.energy(per_beam, self.min_final_slot_power(per_beam))
    }

    /// Packages `per_beam` (indexed over all legacy beams) into a result,
    /// choosing the minimal feasible `P_0`.
    pub(crate) fn finish(&self, per_beam: Vec<f64>, iterations: usize) -> AllocationResult {
        let final_slot = self.min_final_slot_power(&per_beam);
        let powers = PowerProfile {
            per_beam,
            final_slot,
            legacy_power: self.params.budget.legacy_power,
        };
        let mode = if powers.per_beam.iter().any(|p| *p > 0.0) {
            Mode::Hybrid
        } else {
            Mode::OmaFallback
        };
        let b0 = self.params.far_oma_snr;
        AllocationResult {
            total_energy: self.energy(&powers.per_beam, final_slot),
            constraint_residual: self.residual(&powers),
            dual_multiplier: (final_slot > 0.0).then(|| (1.0 + b0 * final_slot) / b0),
            powers,
            mode,
            solver_iterations: iterations,
            large_m_power: None,
        }
    }
}

/// `P_0` such that `log(1 + b_0 P_0)` covers `R_0 - first_phase_total`.
pub(crate) fn min_final_slot_for(params: &EffectiveParams, far_target: f64, first_phase_total: f64) -> f64 {
    let needed = far_target - first_phase_total;
    if needed <= 0.0 {
        0.0
    } else {
        needed.exp_m1() / params.far_oma_snr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub powers: PowerProfile,
    /// `T (M Σ P_m + P_0)`, Joules.
    pub total_energy: f64,
    pub mode: Mode,
    /// Achieved minus required far-user rate, nats.
    pub constraint_residual: f64,
    pub solver_iterations: usize,
    /// Lagrange multiplier of the rate constraint, when the final slot is active.
    pub dual_multiplier: Option<f64>,
    /// Large-`M` approximation of the per-beam power (high-SNR closed form only).
    pub large_m_power: Option<f64>,
}

pub const RESULT_CSV_HEADER: &str =
    "method,mode,total_energy,p0,powers,constraint_residual,solver_iterations,dual_multiplier";

impl AllocationResult {
    pub fn is_feasible(&self) -> bool {
        self.constraint_residual >= -FEASIBILITY_TOL
    }

    pub fn write_csv_row<W: Write>(&self, method: &str, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            method,
            self.mode.as_str(),
            csv::fmt_f64(self.total_energy),
            csv::fmt_f64(self.powers.final_slot),
            csv::fmt_list(&self.powers.per_beam),
            csv::fmt_f64(self.constraint_residual),
            self.solver_iterations,
            self.dual_multiplier.map(csv::fmt_f64).unwrap_or_default()
        )
    }

    /// Multi-line human-readable summary.
    pub fn report(&self, method: &str) -> String {
        let mut s = format!("[{method}] mode={}\n", self.mode.as_str());
        for (m, p) in self.powers.per_beam.iter().enumerate() {
            s.push_str(&format!("  P{} = {:.6e} W\n", m + 1, p));
        }
        s.push_str(&format!("  P0 = {:.6e} W\n", self.powers.final_slot));
        s.push_str(&format!("  energy = {:.6e} J\n", self.total_energy));
        s.push_str(&format!("  residual = {:.3e} nats\n", self.constraint_residual));
        match self.dual_multiplier {
            Some(l) => s.push_str(&format!("  lambda = {l:.6e}\n")),
            None => s.push_str("  lambda = n/a\n"),
        }
        if let Some(p) = self.large_m_power {
            s.push_str(&format!("  large-M per-beam power = {p:.6e} W\n"));
        }
        s
    }
}

/// Beams ordered by `h_m` (descending, ties to the lower index), keeping only
/// qualified beams (`cap_m > 0`) under Approach I, truncated to `mx`.
/// An empty result means nothing qualified and the caller falls back to OMA.
pub fn qualify_and_select(params: &EffectiveParams, approach: Approach, mx: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..params.num_legacy())
        .filter(|&m| approach == Approach::DecodeFarFirst || params.is_qualified(m))
        .collect();
    order.sort_by(|&i, &j| params.self_gain[j].total_cmp(&params.self_gain[i]));
    order.truncate(mx);
    order
}

/// Pure OMA: all beam powers zero and `P_0 = (e^{R_0} - 1) / b_0`.
pub fn solve_oma_baseline(params: &EffectiveParams, far_target: f64, slot_duration: f64) -> AllocationResult {
    let final_slot = min_final_slot_for(params, far_target, 0.0);
    let b0 = params.far_oma_snr;
    AllocationResult {
        powers: PowerProfile {
            per_beam: vec![0.0; params.num_legacy()],
            final_slot,
            legacy_power: params.budget.legacy_power,
        },
        total_energy: slot_duration * final_slot,
        mode: Mode::OmaFallback,
        constraint_residual: rates::rate_far_oma(final_slot, params) - far_target,
        solver_iterations: 0,
        dual_multiplier: (final_slot > 0.0).then(|| (1.0 + b0 * final_slot) / b0),
        large_m_power: None,
    }
}

/// Hybrid solution for `prob.approach`, checked against the OMA baseline.
///
/// OMA is a feasible point of every hybrid program, so the hybrid energy can
/// never exceed it; a violation beyond rounding is reported as an error.
pub fn best_energy(prob: &AllocationProblem) -> Result<AllocationResult> {
    let hybrid = match prob.approach {
        Approach::DecodeOwn => solve_approach1(prob)?,
        Approach::DecodeFarFirst => solve_approach2(prob)?,
    };
    let oma = solve_oma_baseline(&prob.params, prob.far_target, prob.slot_duration);
    if hybrid.total_energy > oma.total_energy + FEASIBILITY_TOL * oma.total_energy.max(1.0) {
        return Err(Error::DominanceViolated {
            hybrid: hybrid.total_energy,
            oma: oma.total_energy,
        });
    }
    Ok(if hybrid.total_energy <= oma.total_energy {
        hybrid
    } else {
        oma
    })
}
