//! Every shipped scenario file loads and runs on a reduced budget.

use std::path::Path;

use nfnoma_core::scenarios::{
    load_spec, resolution_map, run_sweep, solve_instance, table1_spec, PlacementKind, ScenarioSpec,
};

fn load(name: &str, base: ScenarioSpec, overrides: &[&str]) -> ScenarioSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let ov: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    load_spec(&base, Some(&text), &ov).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn all_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name.ends_with(".toml") {
            let base = if name == "table1.toml" {
                table1_spec()
            } else {
                ScenarioSpec::default()
            };
            load(&name, base, &[]);
            n += 1;
        }
    }
    assert!(n >= 7);
}

#[test]
fn sweep_configs_run_without_failures() {
    for name in ["fig_mx.toml", "fig_power_rate.toml"] {
        let out = run_sweep(&load(name, ScenarioSpec::default(), &[])).unwrap();
        assert_eq!(out.failures(), 0, "{name}");
    }
    let spec = load(
        "fig_random.toml",
        ScenarioSpec::default(),
        &["sweep.trials=2", "placement.legacy_count=8", "solve.mx=8"],
    );
    assert_eq!(spec.placement.kind, PlacementKind::RandomHalfring);
    assert_eq!(run_sweep(&spec).unwrap().failures(), 0);
}

#[test]
fn solve_and_resolution_configs_run() {
    for (method, r) in solve_instance(&load("two_user.toml", ScenarioSpec::default(), &[])).unwrap() {
        assert!(r.is_ok(), "{}", method.as_str());
    }
    let spec = load(
        "fig1b.toml",
        ScenarioSpec::default(),
        &["resolution.radius_m={start = 1.0, stop = 60.0, steps = 12}"],
    );
    let map = resolution_map(&spec).unwrap();
    assert_eq!(map.radii.len(), 12);
    assert_eq!(map.angles.len(), 181);
}
