//! Monte Carlo sweeps over rates, beam counts and link budgets.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use super::{budget, run_method, solve_instance, LinkInstance, Method, ScenarioSpec};
use crate::allocator::AllocationResult;
use crate::{csv, Result};

/// One (trial, sweep point, method) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub trial: usize,
    pub noise_dbm: f64,
    pub legacy_power_dbm: f64,
    /// `R_t`, nats.
    pub legacy_rate: f64,
    /// `R_0`, nats.
    pub far_rate: f64,
    pub mx: usize,
    pub method: Method,
    /// `Err` holds the failure message.
    pub outcome: std::result::Result<AllocationResult, String>,
}

pub const SWEEP_CSV_HEADER: &str = "trial,noise_dbm,legacy_power_dbm,legacy_rate_nats,far_rate_nats,mx,method,\
mode,total_energy,p0,powers,constraint_residual,solver_iterations,error";

impl SweepRecord {
    pub fn energy(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.total_energy)
    }

    pub fn write_csv_row<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(
            out,
            "{},{},{},{},{},{},{},",
            self.trial,
            csv::fmt_f64(self.noise_dbm),
            csv::fmt_f64(self.legacy_power_dbm),
            csv::fmt_f64(self.legacy_rate),
            csv::fmt_f64(self.far_rate),
            self.mx,
            self.method.as_str()
        )?;
        match &self.outcome {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{},",
                r.mode.as_str(),
                csv::fmt_f64(r.total_energy),
                csv::fmt_f64(r.powers.final_slot),
                csv::fmt_list(&r.powers.per_beam),
                csv::fmt_f64(r.constraint_residual),
                r.solver_iterations
            ),
            Err(msg) => writeln!(out, "failed,,,,,,{}", msg.replace([',', '\n'], ";")),
        }
    }
}

/// All records in (trial, noise, power, R_t, M_x, R_0, method) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in &self.records {
            r.write_csv_row(&mut out)?;
        }
        Ok(())
    }
}

/// Runs every method at every sweep point of every trial. Trials run in
/// parallel; a failing solve is recorded and does not abort the sweep, but
/// a trial whose channels or beams cannot be built fails as a whole.
pub fn run_sweep(spec: &ScenarioSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let per_trial: Vec<Result<Vec<SweepRecord>>> = (0..spec.sweep.trials)
        .into_par_iter()
        .map(|trial| run_trial(spec, trial))
        .collect();
    let mut records = Vec::new();
    for r in per_trial {
        records.extend(r?);
    }
    let out = SweepOutput { records };
    let failures = out.failures();
    if failures > 0 {
        log::warn!("{failures} of {} solves failed", out.records.len());
    }
    Ok(out)
}

/// [`solve_instance`] as trial-0 records, one per configured method.
pub fn solve_records(spec: &ScenarioSpec) -> Result<SweepOutput> {
    Ok(instance_records(spec, solve_instance(spec)?))
}

/// Wraps per-method results of one instance as trial-0 records.
pub fn instance_records(spec: &ScenarioSpec, results: Vec<(Method, Result<AllocationResult>)>) -> SweepOutput {
    let records = results
        .into_iter()
        .map(|(method, outcome)| SweepRecord {
            trial: 0,
            noise_dbm: spec.link.noise_dbm,
            legacy_power_dbm: spec.link.legacy_power_dbm,
            legacy_rate: spec.link.legacy_rate.to_nats(),
            far_rate: spec.solve.far_rate.to_nats(),
            mx: spec.solve.mx,
            method,
            outcome: outcome.map_err(|e| e.to_string()),
        })
        .collect();
    SweepOutput { records }
}

fn run_trial(spec: &ScenarioSpec, trial: usize) -> Result<Vec<SweepRecord>> {
    let link = LinkInstance::build(spec, trial)?;
    let mut records = Vec::new();
    for &noise in &spec.noise_values() {
        for &power in &spec.legacy_power_values() {
            for &rt in &spec.legacy_rate_values() {
                let params = link.params(spec, budget(power, noise, rt)?)?;
                for &mx in &spec.mx_values() {
                    for &r0 in &spec.far_rate_values() {
                        for &method in &spec.solve.methods {
                            let outcome = run_method(method, &params, r0, mx, &spec.solve).map_err(|e| e.to_string());
                            records.push(SweepRecord {
                                trial,
                                noise_dbm: noise,
                                legacy_power_dbm: power,
                                legacy_rate: rt,
                                far_rate: r0,
                                mx,
                                method,
                                outcome,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Monte Carlo statistics for one (point, method).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub noise_dbm: f64,
    pub legacy_power_dbm: f64,
    pub legacy_rate: f64,
    pub far_rate: f64,
    pub mx: usize,
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub mean_energy: f64,
    /// Standard error of the mean; zero with fewer than two samples.
    pub stderr_energy: f64,
}

pub const SUMMARY_CSV_HEADER: &str =
    "noise_dbm,legacy_power_dbm,legacy_rate_nats,far_rate_nats,mx,method,trials,failures,mean_energy,stderr_energy";

impl SummaryRow {
    pub fn write_csv_row<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv::fmt_f64(self.noise_dbm),
            csv::fmt_f64(self.legacy_power_dbm),
            csv::fmt_f64(self.legacy_rate),
            csv::fmt_f64(self.far_rate),
            self.mx,
            self.method.as_str(),
            self.trials,
            self.failures,
            csv::fmt_f64(self.mean_energy),
            csv::fmt_f64(self.stderr_energy)
        )
    }
}

/// Groups records by sweep point and method, in first-appearance order.
pub fn summarize(out: &SweepOutput) -> Vec<SummaryRow> {
    type Key = (u64, u64, u64, u64, usize, Method);
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut groups: Vec<(SummaryRow, Vec<f64>)> = Vec::new();
    for r in &out.records {
        let key = (
            r.noise_dbm.to_bits(),
            r.legacy_power_dbm.to_bits(),
            r.legacy_rate.to_bits(),
            r.far_rate.to_bits(),
            r.mx,
            r.method,
        );
        let idx = *index.entry(key).or_insert_with(|| {
            groups.push((
                SummaryRow {
                    noise_dbm: r.noise_dbm,
                    legacy_power_dbm: r.legacy_power_dbm,
                    legacy_rate: r.legacy_rate,
                    far_rate: r.far_rate,
                    mx: r.mx,
                    method: r.method,
                    trials: 0,
                    failures: 0,
                    mean_energy: f64::NAN,
                    stderr_energy: 0.0,
                },
                Vec::new(),
            ));
            groups.len() - 1
        });
        let entry = &mut groups[idx];
        entry.0.trials += 1;
        match r.energy() {
            Some(e) => entry.1.push(e),
            None => entry.0.failures += 1,
        }
    }
    groups
        .into_iter()
        .map(|(mut row, xs)| {
            let n = xs.len() as f64;
            if !xs.is_empty() {
                row.mean_energy = xs.iter().sum::<f64>() / n;
            }
            if xs.len() > 1 {
                let var = xs.iter().map(|x| (x - row.mean_energy).powi(2)).sum::<f64>() / (n - 1.0);
                row.stderr_energy = (var / n).sqrt();
            }
            row
        })
        .collect()
}
