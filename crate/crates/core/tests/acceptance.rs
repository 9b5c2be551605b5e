//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

use nfnoma_core::allocator::{
    best_energy, brute_force_oracle, closed_form_two_user, solve_oma_baseline, AllocationProblem, Approach, Mode,
    ThresholdRule,
};
use nfnoma_core::beamforming::{max_cross_gain_ratio, zf_beams, DEFAULT_MAX_CONDITION};
use nfnoma_core::geometry::{resolution, ArrayGeometry, PolarPoint};
use nfnoma_core::scenarios::{
    budget, load_spec, resolution_map, run_method, run_sweep, run_table1, sample_random_scenario, summarize,
    table1_spec, LinkInstance, Method, PlacementConfig, PlacementKind, ScenarioSpec, SweepOutput, SweepRecord,
    Table1Report,
};
use nfnoma_core::{BeamKind, ChannelSet, EffectiveParams, LinkBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG1A: &str = include_str!("../../../configs/fig1a.toml");
const FIG1B: &str = include_str!("../../../configs/fig1b.toml");
const FIG_RANDOM: &str = include_str!("../../../configs/fig_random.toml");
const FIG_MX: &str = include_str!("../../../configs/fig_mx.toml");
const FIG_POWER_RATE: &str = include_str!("../../../configs/fig_power_rate.toml");
const TABLE1: &str = include_str!("../../../configs/table1.toml");

/// Absolute slack in the dominance checks.
const DOMINANCE_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn config(text: &str, overrides: &[&str]) -> ScenarioSpec {
    let ov: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    load_spec(&ScenarioSpec::default(), Some(text), &ov).expect("shipped config loads")
}

fn table1_report() -> Table1Report {
    let spec = load_spec(&table1_spec(), Some(TABLE1), &[]).expect("table1 config loads");
    run_table1(&spec).expect("table1 harness runs")
}

fn criterion1() -> Verdict {
    let report = table1_report();
    let dev = report.deviation(-80.0);
    let worst = dev.iter().cloned().fold(0.0, f64::max);
    Verdict::new(
        dev.len() == 4 && worst <= 1e-3,
        format!(
            "R0 = {:.4} nats, max |optimal - approx| at -80 dBm = {worst:.2e} W (tol 1e-3)",
            report.far_rate
        ),
    )
}

fn criterion2() -> Verdict {
    let report = table1_report();
    let d70 = report.deviation(-70.0);
    let d80 = report.deviation(-80.0);
    let ratios: Vec<f64> = d70
        .iter()
        .zip(&d80)
        .map(|(a, b)| a / b.max(f64::MIN_POSITIVE))
        .collect();
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Verdict::new(
        d70.len() == 4 && min_ratio >= 10.0,
        format!(
            "deviation at -70 dBm {:?} W, smallest per-coefficient ratio to -80 dBm = {min_ratio:.1} (need >= 10)",
            d70.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    )
}

/// Synthetic single-legacy-user parameters with `β = min(a1 h1, a0 g1²)`.
fn two_user_params(rng: &mut ChaCha8Rng) -> (EffectiveParams, f64, f64) {
    let b0 = 10f64.powf(rng.random_range(-1.0..3.0));
    let beta = b0 * 10f64.powf(rng.random_range(-3.0..-0.001));
    let other = beta * (1.0 + rng.random_range(0.0..5.0));
    let (sic, direct) = if rng.random_bool(0.5) {
        (beta, other)
    } else {
        (other, beta)
    };
    let budget = LinkBudget::new(1.0, 1.0, 0.0).unwrap();
    let p = EffectiveParams::synthetic(vec![sic], vec![1.0], vec![direct.sqrt()], 1.0, b0, budget).unwrap();
    (p, beta, b0)
}

fn criterion3(violations: &mut Vec<String>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_rel = 0.0f64;
    let mut flips_ok = 0;
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..1000 {
        let (p, beta, b0) = two_user_params(&mut rng);
        let r0 = rng.random_range(0.0..30.0);
        let prob = AllocationProblem::new(p.clone(), Approach::DecodeFarFirst, r0, vec![0]).unwrap();
        let num = match best_energy(&prob) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let cf = closed_form_two_user(&p, r0, 1.0, ThresholdRule::Exponential).unwrap();
        let rel = (num.total_energy - cf.total_energy).abs() / cf.total_energy.max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(rel);
        let oma = solve_oma_baseline(&p, r0, 1.0).total_energy;
        for (tag, e) in [("numeric", num.total_energy), ("closed form", cf.total_energy)] {
            if e > oma + DOMINANCE_TOL {
                violations.push(format!("two-user #{i} {tag}: {e} > OMA {oma}"));
            }
        }
        if cf.mode == Mode::Hybrid && !(cf.powers.final_slot > 0.0) {
            violations.push(format!("two-user #{i}: hybrid with P0 = {}", cf.powers.final_slot));
        }
        let edge = (b0 / beta).ln();
        if edge > 1e-9 {
            checked += 1;
            let above = closed_form_two_user(&p, edge + 1e-9, 1.0, ThresholdRule::Exponential).unwrap();
            let below = closed_form_two_user(&p, edge - 1e-9, 1.0, ThresholdRule::Exponential).unwrap();
            if above.mode == Mode::Hybrid && below.mode == Mode::OmaFallback {
                flips_ok += 1;
            }
        }
    }
    Verdict::new(
        failures.is_empty() && worst_rel <= 1e-6 && flips_ok == checked,
        format!(
            "1000 triples, max relative energy gap {worst_rel:.2e} (tol 1e-6), mode flips at threshold +-1e-9: \
             {flips_ok}/{checked}, solver errors {}",
            failures.len()
        ),
    )
}

fn random_params(rng: &mut ChaCha8Rng, physical: bool) -> EffectiveParams {
    if physical {
        let mut spec = ScenarioSpec::default();
        spec.placement.kind = PlacementKind::RandomHalfring;
        spec.placement.legacy_count = 3;
        spec.link.beams = if rng.random_bool(0.5) {
            BeamKind::ZeroForcing
        } else {
            BeamKind::Focus
        };
        let placement = sample_random_scenario(&spec.placement, rng).unwrap();
        spec.placement.kind = PlacementKind::Deterministic;
        spec.placement.legacy = placement
            .legacy
            .iter()
            .map(|p| nfnoma_core::scenarios::PointConfig::new(p.radius(), p.angle()))
            .collect();
        spec.placement.far = nfnoma_core::scenarios::PointConfig::new(placement.far.radius(), placement.far.angle());
        let noise = if rng.random_bool(0.5) { -70.0 } else { -80.0 };
        let rt = rng.random_range(0.5..4.0);
        let link = LinkInstance::build(&spec, 0).unwrap();
        link.params(&spec, budget(10.0, noise, rt).unwrap()).unwrap()
    } else {
        let noise = rng.random_range(0.1..1.0);
        let rt = rng.random_range(0.0..1.5);
        let budget = LinkBudget::new(1.0, noise, rt).unwrap();
        let h: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..5.0)).collect();
        let a: Vec<f64> = h
            .iter()
            .map(|h| 1.0 / (h * (1.0 + rng.random_range(0.0..0.5)) + noise))
            .collect();
        let g: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.5)).collect();
        let a0 = 1.0 / (g.iter().map(|g| g * g).sum::<f64>() + noise);
        let b0 = rng.random_range(1.0..20.0);
        EffectiveParams::synthetic(h, a, g, a0, b0, budget).unwrap()
    }
}

fn criterion4(violations: &mut Vec<String>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    let mut dims = [0usize; 4];
    let mut n = 0;
    while n < 200 {
        let approach = if n % 2 == 0 {
            Approach::DecodeOwn
        } else {
            Approach::DecodeFarFirst
        };
        let mx = 1 + (n / 2) % 3;
        let physical = n % 4 >= 2;
        let params = random_params(&mut rng, physical);
        let r0 = if physical {
            rng.random_range(1.0..25.0)
        } else {
            rng.random_range(0.5..15.0)
        };
        let Some(prob) = AllocationProblem::with_best_beams(params, approach, r0, mx).unwrap() else {
            continue;
        };
        n += 1;
        dims[prob.num_selected()] += 1;
        let solved = best_energy(&prob);
        let oracle = brute_force_oracle(&prob, 0.02);
        match (solved, oracle) {
            (Ok(s), Ok(o)) => {
                let rel = (s.total_energy - o.total_energy).abs() / o.total_energy.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                let oma = solve_oma_baseline(&prob.params, r0, 1.0).total_energy;
                if s.total_energy > oma + DOMINANCE_TOL {
                    violations.push(format!("oracle instance {n}: {} > OMA {oma}", s.total_energy));
                }
                if !s.is_feasible() {
                    errors.push(format!("instance {n}: residual {}", s.constraint_residual));
                }
            }
            (s, o) => errors.push(format!("instance {n}: solver {:?} oracle {:?}", s.err(), o.err())),
        }
    }
    Verdict::new(
        errors.is_empty() && worst <= 1e-3,
        format!(
            "200 instances (selected beams 1/2/3: {}/{}/{}), max relative gap to oracle {worst:.2e} (tol 1e-3), \
             errors {}",
            dims[1],
            dims[2],
            dims[3],
            errors.len()
        ),
    )
}

/// The sweeps shared by criteria 5 and 8.
struct Sweeps {
    random: SweepOutput,
    mx_focus: SweepOutput,
    mx_zf: SweepOutput,
    power_rate: SweepOutput,
    elapsed: Duration,
}

fn run_sweeps() -> Sweeps {
    let t = Instant::now();
    Sweeps {
        random: run_sweep(&config(FIG_RANDOM, &[])).unwrap(),
        mx_focus: run_sweep(&config(FIG_MX, &[])).unwrap(),
        mx_zf: run_sweep(&config(FIG_MX, &["link.beams=zero_forcing"])).unwrap(),
        power_rate: run_sweep(&config(FIG_POWER_RATE, &[])).unwrap(),
        elapsed: t.elapsed(),
    }
}

fn point_key(r: &SweepRecord) -> (usize, u64, u64, u64, u64, usize) {
    (
        r.trial,
        r.noise_dbm.to_bits(),
        r.legacy_power_dbm.to_bits(),
        r.legacy_rate.to_bits(),
        r.far_rate.to_bits(),
        r.mx,
    )
}

fn criterion5(sweeps: &Sweeps, violations: &mut Vec<String>) -> Verdict {
    let mut compared = 0;
    let mut failed = 0;
    for (name, out) in [
        ("random", &sweeps.random),
        ("mx focus", &sweeps.mx_focus),
        ("mx zf", &sweeps.mx_zf),
        ("power/rate", &sweeps.power_rate),
    ] {
        failed += out.failures();
        for r in out.records.iter().filter(|r| r.method != Method::Oma) {
            let oma = out
                .records
                .iter()
                .find(|o| o.method == Method::Oma && point_key(o) == point_key(r))
                .and_then(|o| o.energy());
            if let (Some(e), Some(oma)) = (r.energy(), oma) {
                compared += 1;
                if e > oma + DOMINANCE_TOL {
                    violations.push(format!("{name} sweep {:?}: {e} > OMA {oma}", point_key(r)));
                }
            }
        }
    }
    Verdict::new(
        violations.is_empty() && failed == 0,
        format!(
            "{compared} sweep comparisons plus criteria 3-4 instances, {} violations, {failed} failed solves",
            violations.len()
        ),
    )
}

fn criterion6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let geom = ArrayGeometry::half_wavelength(513, 28e9).unwrap();
    let mut worst_cross = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut errors = 0;
    for _ in 0..100 {
        let mut pl = PlacementConfig::default();
        pl.legacy_count = rng.random_range(1..=40);
        let placement = sample_random_scenario(&pl, &mut rng).unwrap();
        let ch = ChannelSet::from_points(&geom, &placement.legacy, &placement.far).unwrap();
        match zf_beams(&ch, DEFAULT_MAX_CONDITION) {
            Ok(beams) => {
                worst_cross = worst_cross.max(max_cross_gain_ratio(&ch, &beams));
                for col in beams.legacy.column_iter() {
                    worst_norm = worst_norm.max((col.norm() - 1.0).abs());
                }
            }
            Err(_) => errors += 1,
        }
    }
    Verdict::new(
        errors == 0 && worst_cross <= 1e-8 && worst_norm <= 1e-10,
        format!(
            "100 placements, max cross-gain ratio {worst_cross:.2e} (tol 1e-8), max | |w| - 1 | {worst_norm:.2e} \
             (tol 1e-10), errors {errors}"
        ),
    )
}

fn criterion7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let geom = ArrayGeometry::half_wavelength(513, 28e9).unwrap();
    let mut worst_self = 0.0f64;
    for _ in 0..100 {
        let p = PolarPoint::new(
            rng.random_range(1.0..300.0),
            rng.random_range(0.0..std::f64::consts::PI),
        )
        .unwrap();
        worst_self = worst_self.max((resolution(&geom, &p, &p) - 1.0).abs());
    }

    let map_a = resolution_map(&config(FIG1A, &[])).unwrap();
    let (pr, pc, _) = map_a.peak();
    let peak_ok = map_a.radii[pr] == 5.0 && (map_a.angles[pc] - FRAC_PI_4).abs() < 1e-9;

    let map_b = resolution_map(&config(FIG1B, &[])).unwrap();
    let col = map_b
        .angles
        .iter()
        .position(|a| (a - FRAC_PI_4).abs() < 1e-9)
        .expect("grid has the 45 degree column");
    let mut far_rows = 0;
    let mut ridge = 0;
    for (i, &r) in map_b.radii.iter().enumerate().filter(|(_, r)| **r > 100.0) {
        far_rows += 1;
        let v = map_b.get(i, col);
        let mut row: Vec<f64> = (0..map_b.angles.len()).map(|j| map_b.get(i, j)).collect();
        row.sort_by(f64::total_cmp);
        let median = row[row.len() / 2];
        if v > map_b.get(i, col - 1) && v > map_b.get(i, col + 1) && v > median {
            ridge += 1;
        } else {
            eprintln!("  fig1b: no local maximum at r = {r} m");
        }
    }
    Verdict::new(
        worst_self <= 1e-12 && peak_ok && far_rows > 0 && ridge == far_rows,
        format!(
            "max |D(p,p) - 1| {worst_self:.1e}; single-focus peak at ({} m, {:.4} rad); 45 degree column is an \
             angular local maximum above the row median on {ridge}/{far_rows} rows beyond 100 m",
            map_a.radii[pr], map_a.angles[pc]
        ),
    )
}

/// Energies of one curve (fixed everything but `R_0`) in sweep order.
fn curves(out: &SweepOutput) -> Vec<Vec<f64>> {
    let mut map: Vec<((usize, u64, u64, u64, usize, Method), Vec<f64>)> = Vec::new();
    for r in &out.records {
        let key = (
            r.trial,
            r.noise_dbm.to_bits(),
            r.legacy_power_dbm.to_bits(),
            r.legacy_rate.to_bits(),
            r.mx,
            r.method,
        );
        let e = r.energy().unwrap_or(f64::NAN);
        match map.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(e),
            None => map.push((key, vec![e])),
        }
    }
    map.into_iter().map(|(_, v)| v).collect()
}

fn mx_monotone(out: &SweepOutput, method: Method) -> (usize, usize) {
    let mut rates: Vec<f64> = out.records.iter().map(|r| r.far_rate).collect();
    rates.dedup();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let mut ok = 0;
    for &r0 in &rates {
        let e: Vec<f64> = (1..=3)
            .map(|mx| {
                out.records
                    .iter()
                    .find(|r| r.far_rate == r0 && r.mx == mx && r.method == method)
                    .and_then(|r| r.energy())
                    .unwrap_or(f64::NAN)
            })
            .collect();
        if e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)) {
            ok += 1;
        }
    }
    (ok, rates.len())
}

fn criterion8(sweeps: &Sweeps) -> Verdict {
    let t = Instant::now();
    // (a)
    let mut n_curves = 0;
    let mut bad_curves = 0;
    for out in [&sweeps.random, &sweeps.mx_focus, &sweeps.mx_zf, &sweeps.power_rate] {
        for c in curves(out) {
            n_curves += 1;
            if !c.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)) {
                bad_curves += 1;
            }
        }
    }
    let a_ok = bad_curves == 0;

    // (b)
    let (fb, nb) = mx_monotone(&sweeps.mx_focus, Method::Approach2);
    let (zb, _) = mx_monotone(&sweeps.mx_zf, Method::Approach2);
    let b_ok = fb == nb && zb == nb;

    // (c)
    let summary = summarize(&sweeps.random);
    let top = summary.iter().map(|s| s.far_rate).fold(f64::NEG_INFINITY, f64::max);
    let mean = |m: Method| {
        summary
            .iter()
            .find(|s| s.far_rate == top && s.method == m)
            .map(|s| s.mean_energy)
            .unwrap_or(f64::NAN)
    };
    let (hyb, oma) = (mean(Method::Approach2), mean(Method::Oma));
    let c_ok = hyb < oma;

    // (d)
    let spec = load_spec(&table1_spec(), Some(TABLE1), &[]).unwrap();
    let r0 = table1_report().far_rate;
    let link = LinkInstance::build(&spec, 0).unwrap();
    let gaps: Vec<f64> = [-60.0, -70.0, -80.0, -90.0]
        .iter()
        .map(|&noise| {
            let params = link
                .params(&spec, budget(10.0, noise, spec.link.legacy_rate.to_nats()).unwrap())
                .unwrap();
            let opt = run_method(Method::Approach2, &params, r0, 3, &spec.solve)
                .unwrap()
                .total_energy;
            let apx = run_method(Method::Lemma1, &params, r0, 3, &spec.solve)
                .unwrap()
                .total_energy;
            (apx - opt).abs() / opt
        })
        .collect();
    let d_ok = gaps.windows(2).all(|w| w[1] <= w[0]);

    let elapsed = sweeps.elapsed + t.elapsed();
    Verdict::new(
        a_ok && b_ok && c_ok && d_ok && elapsed < Duration::from_secs(600),
        format!(
            "(a) {}/{n_curves} curves non-decreasing in R0; (b) energy non-increasing in Mx at {fb}/{nb} (focus) and \
             {zb}/{nb} (ZF) rates; (c) mean energy at R0 = {top} nats: approach2 {hyb:.3e} vs OMA {oma:.3e}; \
             (d) high-SNR gaps {:?}; {:.1} s",
            n_curves - bad_curves,
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

fn report(id: usize, limit: Option<Duration>, run: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let mut v = run();
    let elapsed = t.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            v.pass = false;
            v.detail.push_str(&format!(
                " [runtime {:.1} s exceeds {} s]",
                elapsed.as_secs_f64(),
                limit.as_secs()
            ));
        }
    }
    println!(
        "criterion {id}: {} ({:.2} s) {}",
        if v.pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        v.detail
    );
    v.pass
}

fn main() {
    let secs = Duration::from_secs;
    let mut violations = Vec::new();
    let mut ok = true;
    ok &= report(1, Some(secs(5)), criterion1);
    ok &= report(2, Some(secs(5)), criterion2);
    ok &= report(3, Some(secs(10)), || criterion3(&mut violations));
    ok &= report(4, Some(secs(120)), || criterion4(&mut violations));
    let sweeps = run_sweeps();
    ok &= report(5, None, || criterion5(&sweeps, &mut violations));
    for v in violations.iter().take(10) {
        println!("  dominance violation: {v}");
    }
    ok &= report(6, None, criterion6);
    ok &= report(7, None, criterion7);
    ok &= report(8, Some(secs(600)), || criterion8(&sweeps));
    if !ok {
        std::process::exit(1);
    }
}
