//! Optimal versus high-SNR allocations on the street layout at two noise
//! levels, with the far-user target fitted to the reference −80 dBm row.

use std::io::Write;

use super::{budget, run_method, LinkInstance, Method, ScenarioSpec};
use crate::allocator::search::golden_section;
use crate::allocator::AllocationResult;
use crate::beamforming::{BeamKind, InterferenceModel};
use crate::{csv, Error, Result};

/// Reference optimal allocation at −80 dBm: `P_1, P_2, P_3, P_0` in W.
pub const TABLE1_TARGET: [f64; 4] = [0.0430, 0.0430, 0.0430, 0.1580];

/// Noise levels of the two row pairs, dBm.
pub const TABLE1_NOISE_DBM: [f64; 2] = [-70.0, -80.0];

const FIT_RANGE: (f64, f64) = (0.5, 30.0);
const FIT_STEP: f64 = 0.25;

/// Focus beams with orthogonal interference, all three beams, Approach II.
pub fn table1_spec() -> ScenarioSpec {
    let mut spec = ScenarioSpec::default();
    spec.link.beams = BeamKind::Focus;
    spec.link.interference = InterferenceModel::Orthogonal;
    spec.solve.mx = 3;
    spec.solve.methods = vec![Method::Approach2, Method::Lemma1];
    spec
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub noise_dbm: f64,
    /// `"optimal"` or `"approx"`.
    pub label: &'static str,
    pub per_beam: Vec<f64>,
    pub final_slot: f64,
}

impl Table1Row {
    fn from_result(noise_dbm: f64, label: &'static str, r: &AllocationResult) -> Self {
        Table1Row {
            noise_dbm,
            label,
            per_beam: r.powers.per_beam.clone(),
            final_slot: r.powers.final_slot,
        }
    }

    /// `P_1, …, P_M, P_0`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut v = self.per_beam.clone();
        v.push(self.final_slot);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Report {
    /// Fitted `R_0`, nats.
    pub far_rate: f64,
    /// Squared distance of the fitted optimum to [`TABLE1_TARGET`].
    pub fit_error: f64,
    /// Optimal and approximate rows, −70 dBm first.
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    fn pair(&self, noise_dbm: f64) -> Option<(&Table1Row, &Table1Row)> {
        let opt = self
            .rows
            .iter()
            .find(|r| r.noise_dbm == noise_dbm && r.label == "optimal")?;
        let apx = self
            .rows
            .iter()
            .find(|r| r.noise_dbm == noise_dbm && r.label == "approx")?;
        Some((opt, apx))
    }

    /// `|optimal − approx|` per coefficient at `noise_dbm`.
    pub fn deviation(&self, noise_dbm: f64) -> Vec<f64> {
        match self.pair(noise_dbm) {
            Some((o, a)) => o
                .coefficients()
                .iter()
                .zip(a.coefficients())
                .map(|(x, y)| (x - y).abs())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "far-user target R0 = {:.6} nats (fit error {:.3e})\n",
            self.far_rate, self.fit_error
        );
        let m = self.rows.first().map_or(0, |r| r.per_beam.len());
        s.push_str(&format!("{:<24}", ""));
        for k in 1..=m {
            s.push_str(&format!("{:>10}", format!("P{k}")));
        }
        s.push_str(&format!("{:>10}\n", "P0"));
        for noise in TABLE1_NOISE_DBM {
            for r in self.rows.iter().filter(|r| r.noise_dbm == noise) {
                s.push_str(&format!("{:<24}", format!("{} ({} dBm)", r.label, r.noise_dbm)));
                for c in r.coefficients() {
                    s.push_str(&format!("{c:>10.4}"));
                }
                s.push('\n');
            }
            s.push_str(&format!("{:<24}", format!("|deviation| ({noise} dBm)")));
            for d in self.deviation(noise) {
                s.push_str(&format!("{d:>10.4}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "noise_dbm,row,far_rate_nats,p0,powers")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                csv::fmt_f64(r.noise_dbm),
                r.label,
                csv::fmt_f64(self.far_rate),
                csv::fmt_f64(r.final_slot),
                csv::fmt_list(&r.per_beam)
            )?;
        }
        Ok(())
    }
}

fn solve_at(
    spec: &ScenarioSpec,
    link: &LinkInstance,
    method: Method,
    noise_dbm: f64,
    far_rate: f64,
) -> Result<AllocationResult> {
    let b = budget(spec.link.legacy_power_dbm, noise_dbm, spec.link.legacy_rate.to_nats())?;
    let params = link.params(spec, b)?;
    run_method(method, &params, far_rate, spec.solve.mx, &spec.solve)
}

/// Fits `R_0` to the reference −80 dBm optimum on a coarse grid refined by
/// golden-section search, then tabulates both noise levels.
pub fn run_table1(spec: &ScenarioSpec) -> Result<Table1Report> {
    spec.validate()?;
    let link = LinkInstance::build(spec, 0)?;
    if link.channels.as_ref().map(|c| c.num_legacy()) != Some(TABLE1_TARGET.len() - 1) {
        return Err(Error::Config(format!(
            "table1 needs a placement with {} legacy users",
            TABLE1_TARGET.len() - 1
        )));
    }
    let fit_noise = TABLE1_NOISE_DBM[1];
    let mismatch = |r0: f64| -> f64 {
        match solve_at(spec, &link, Method::Approach2, fit_noise, r0) {
            Ok(r) => {
                let mut c = r.powers.per_beam.clone();
                c.push(r.powers.final_slot);
                c.iter().zip(TABLE1_TARGET).map(|(x, t)| (x - t).powi(2)).sum()
            }
            Err(_) => f64::INFINITY,
        }
    };
    let n = ((FIT_RANGE.1 - FIT_RANGE.0) / FIT_STEP).round() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| FIT_RANGE.0 + i as f64 * FIT_STEP).collect();
    let errs: Vec<f64> = grid.iter().map(|&r| mismatch(r)).collect();
    let best = (0..n)
        .min_by(|&i, &j| errs[i].total_cmp(&errs[j]))
        .expect("grid is non-empty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(n - 1)];
    let fit = golden_section(mismatch, lo, hi, 1e-10);
    log::info!(
        "fitted far-user target {:.6} nats after {} golden steps",
        fit.x,
        fit.iterations
    );

    let mut rows = Vec::new();
    for noise in TABLE1_NOISE_DBM {
        let opt = solve_at(spec, &link, Method::Approach2, noise, fit.x)?;
        let apx = solve_at(spec, &link, Method::Lemma1, noise, fit.x)?;
        rows.push(Table1Row::from_result(noise, "optimal", &opt));
        rows.push(Table1Row::from_result(noise, "approx", &apx));
    }
    Ok(Table1Report {
        far_rate: fit.x,
        fit_error: fit.value,
        rows,
    })
}
