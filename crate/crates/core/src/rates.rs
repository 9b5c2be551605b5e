//! Achievable rates, in nats.
//!
//! Each hybrid-NOMA rate comes in two forms. The exact form evaluates the
//! full inner products, including interference leaking between imperfectly
//! separated beams. The simplified form assumes the legacy beams are
//! orthogonal and uses only the scalars in [`EffectiveParams`]; all
//! optimization runs on it. Keeping both lets callers measure the residual
//! error of the orthogonality assumption on any layout.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::beamforming::{BeamSet, ChannelSet, EffectiveParams};
use crate::{csv, Error, Result, C64};

/// SIC strategy at the legacy users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    /// Legacy users decode their own signal directly, treating the far
    /// user's signal as interference; far-user power is capped per beam.
    #[serde(rename = "approach1")]
    DecodeOwn,
    /// Legacy users first decode and remove the far user's signal.
    #[serde(rename = "approach2")]
    DecodeFarFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateForm {
    Exact,
    Simplified,
}

/// Far-user powers: `per_beam[m]` on legacy beam `m` during the legacy slots
/// and `final_slot` in the dedicated slot; `legacy_power` is `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub per_beam: Vec<f64>,
    pub final_slot: f64,
    pub legacy_power: f64,
}

impl PowerProfile {
    pub fn new(per_beam: Vec<f64>, final_slot: f64, legacy_power: f64) -> Result<Self> {
        if per_beam
            .iter()
            .chain([&final_slot])
            .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(Error::param("powers", "all powers must be finite and non-negative"));
        }
        Ok(PowerProfile {
            per_beam,
            final_slot,
            legacy_power,
        })
    }

    pub fn zeros(num_beams: usize, legacy_power: f64) -> Self {
        PowerProfile {
            per_beam: vec![0.0; num_beams],
            final_slot: 0.0,
            legacy_power,
        }
    }

    pub fn beam_sum(&self) -> f64 {
        self.per_beam.iter().sum()
    }
}

/// Borrowed view of everything the exact rate expressions need.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub channels: &'a ChannelSet,
    pub beams: &'a BeamSet,
    pub params: &'a EffectiveParams,
}

/// `log(1 + P |h_mᴴ w_m|² / (P Σ_{i≠m} |h_mᴴ w_i|² + σ²))` for every legacy user.
pub fn rate_oma_legacy_exact(ch: &ChannelSet, beams: &BeamSet, legacy_power: f64, noise: f64) -> Vec<f64> {
    let cross = ch.legacy.adjoint() * &beams.legacy;
    (0..cross.nrows())
        .map(|m| {
            let own = cross[(m, m)].norm_sqr();
            let leak: f64 = cross.row(m).iter().map(|z| z.norm_sqr()).sum::<f64>() - own;
            (legacy_power * own / (legacy_power * leak.max(0.0) + noise)).ln_1p()
        })
        .collect()
}

/// Final-slot rate `log(1 + b_0 P_0)`.
pub fn rate_far_oma(final_slot: f64, params: &EffectiveParams) -> f64 {
    (params.far_oma_snr * final_slot).ln_1p()
}

/// `a_0 (Σ_k g_k √P_k)²`, the far user's first-phase SNR.
pub fn far_first_phase_snr(per_beam: &[f64], params: &EffectiveParams) -> f64 {
    let s: f64 = per_beam
        .iter()
        .zip(&params.far_beam_gain)
        .map(|(p, g)| g * p.sqrt())
        .sum();
    params.far_inv_interf * s * s
}

/// Superimposed far-user signal `Σ_k w_k f_k √P_k`, with each `f_k` rotating
/// beam `k`'s contribution so it adds in phase at the far user.
fn far_signal(beams: &BeamSet, ch: &ChannelSet, per_beam: &[f64]) -> DVector<C64> {
    let mut s = DVector::<C64>::zeros(beams.legacy.nrows());
    for (k, p) in per_beam.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let w = beams.legacy.column(k);
        let proj = ch.far.dotc(&w);
        let f = if proj.norm() > 0.0 {
            proj.conj() / proj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        s += w * (f * p.sqrt());
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approach1Rates {
    /// `R_{1,m}^I` per legacy user.
    pub legacy: Vec<f64>,
    /// `R_{1,0}^I`.
    pub far: f64,
}

pub fn rate_approach1(link: Link<'_>, pp: &PowerProfile, form: RateForm) -> Approach1Rates {
    let params = link.params;
    let noise = params.budget.noise;
    let p = pp.legacy_power;
    match form {
        RateForm::Simplified => Approach1Rates {
            legacy: params
                .self_gain
                .iter()
                .zip(&pp.per_beam)
                .map(|(h, pm)| (p * h / (h * pm + noise)).ln_1p())
                .collect(),
            far: far_first_phase_snr(&pp.per_beam, params).ln_1p(),
        },
        RateForm::Exact => {
            let ch = link.channels;
            let cross = ch.legacy.adjoint() * &link.beams.legacy;
            let s = far_signal(link.beams, ch, &pp.per_beam);
            let legacy = (0..cross.nrows())
                .map(|m| {
                    let own = cross[(m, m)].norm_sqr();
                    let leak: f64 = cross.row(m).iter().map(|z| z.norm_sqr()).sum::<f64>() - own;
                    let far_leak = ch.legacy.column(m).dotc(&s).norm_sqr();
                    (p * own / (p * leak.max(0.0) + far_leak + noise)).ln_1p()
                })
                .collect();
            let far_interf: f64 = (link.beams.legacy.adjoint() * &ch.far)
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            let far = (ch.far.dotc(&s).norm_sqr() / (p * far_interf + noise)).ln_1p();
            Approach1Rates { legacy, far }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approach2Rates {
    /// `R_{1,m}^II`: rate at which legacy user `m` can decode the far signal.
    pub decode_far_at_legacy: Vec<f64>,
    /// `min{R_{1,0}^I, R_{1,m}^II : m selected}`.
    pub far_first_phase: f64,
}

/// Only the `selected` beams constrain the far user's first-phase rate; a
/// beam left out of the selection carries no far-user power and its user is
/// not asked to decode the far signal.
pub fn rate_approach2(link: Link<'_>, pp: &PowerProfile, form: RateForm, selected: &[usize]) -> Approach2Rates {
    let params = link.params;
    let noise = params.budget.noise;
    let p = pp.legacy_power;
    let decode_far_at_legacy: Vec<f64> = match form {
        RateForm::Simplified => (0..params.num_legacy())
            .map(|m| (params.sic_gain(m) * pp.per_beam[m]).ln_1p())
            .collect(),
        RateForm::Exact => {
            let ch = link.channels;
            let cross = ch.legacy.adjoint() * &link.beams.legacy;
            let s = far_signal(link.beams, ch, &pp.per_beam);
            (0..cross.nrows())
                .map(|m| {
                    let received: f64 = cross.row(m).iter().map(|z| z.norm_sqr()).sum();
                    let sig = ch.legacy.column(m).dotc(&s).norm_sqr();
                    (sig / (p * received + noise)).ln_1p()
                })
                .collect()
        }
    };
    let direct = rate_approach1(link, pp, form).far;
    let far_first_phase = selected.iter().map(|&m| decode_far_at_legacy[m]).fold(direct, f64::min);
    Approach2Rates {
        decode_far_at_legacy,
        far_first_phase,
    }
}

/// Simplified first-phase rate of the far user under `approach`.
pub fn first_phase_rate(per_beam: &[f64], params: &EffectiveParams, approach: Approach, selected: &[usize]) -> f64 {
    let direct = far_first_phase_snr(per_beam, params).ln_1p();
    match approach {
        Approach::DecodeOwn => direct,
        Approach::DecodeFarFirst => selected
            .iter()
            .map(|&m| (params.sic_gain(m) * per_beam[m]).ln_1p())
            .fold(direct, f64::min),
    }
}

/// `M · R_{1,0} + R_0^OMA(P_0)` (per unit slot duration), simplified form.
/// `M` is the number of legacy users, i.e. the number of legacy slots.
pub fn total_far_rate(pp: &PowerProfile, params: &EffectiveParams, approach: Approach, selected: &[usize]) -> f64 {
    let m = params.num_legacy() as f64;
    m * first_phase_rate(&pp.per_beam, params, approach, selected) + rate_far_oma(pp.final_slot, params)
}

/// Every rate for one power profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub legacy_oma: Vec<f64>,
    pub legacy_approach1: Vec<f64>,
    pub decode_far_at_legacy: Vec<f64>,
    pub far_first_phase: f64,
    pub far_final_slot: f64,
    pub far_total: f64,
}

pub const RATE_REPORT_HEADER: &str =
    "legacy_oma,legacy_approach1,decode_far_at_legacy,far_first_phase,far_final_slot,far_total";

impl RateReport {
    pub fn evaluate(link: Link<'_>, pp: &PowerProfile, approach: Approach, selected: &[usize], form: RateForm) -> Self {
        let a1 = rate_approach1(link, pp, form);
        let a2 = rate_approach2(link, pp, form, selected);
        let far_first_phase = match approach {
            Approach::DecodeOwn => a1.far,
            Approach::DecodeFarFirst => a2.far_first_phase,
        };
        let far_final_slot = rate_far_oma(pp.final_slot, link.params);
        RateReport {
            legacy_oma: rate_oma_legacy_exact(link.channels, link.beams, pp.legacy_power, link.params.budget.noise),
            legacy_approach1: a1.legacy,
            decode_far_at_legacy: a2.decode_far_at_legacy,
            far_first_phase,
            far_final_slot,
            far_total: link.params.num_legacy() as f64 * far_first_phase + far_final_slot,
        }
    }

    pub fn write_csv_row<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            csv::fmt_list(&self.legacy_oma),
            csv::fmt_list(&self.legacy_approach1),
            csv::fmt_list(&self.decode_far_at_legacy),
            csv::fmt_f64(self.far_first_phase),
            csv::fmt_f64(self.far_final_slot),
            csv::fmt_f64(self.far_total)
        )
    }
}
