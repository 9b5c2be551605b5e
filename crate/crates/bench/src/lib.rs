//! Benchmark fixtures: fixed random drops and the street layout.

use nfnoma_core::scenarios::{budget, LinkInstance, PlacementKind, ScenarioSpec};
use nfnoma_core::{BeamKind, ChannelSet, EffectiveParams};

/// Random half-ring drop with `n_legacy` users and zero-forcing beams.
pub fn random_spec(n_legacy: usize, seed: u64) -> ScenarioSpec {
    let mut spec = ScenarioSpec::default();
    spec.placement.kind = PlacementKind::RandomHalfring;
    spec.placement.legacy_count = n_legacy;
    spec.link.beams = BeamKind::ZeroForcing;
    spec.solve.mx = n_legacy;
    spec.sweep.seed = seed;
    spec
}

/// Channels of trial 0 of [`random_spec`].
pub fn random_channels(n_legacy: usize, seed: u64) -> ChannelSet {
    LinkInstance::build(&random_spec(n_legacy, seed), 0)
        .expect("fixture drop is well conditioned")
        .channels
        .expect("random drops have channels")
}

/// Effective parameters of `spec` at its own link budget.
pub fn params_for(spec: &ScenarioSpec) -> EffectiveParams {
    let link = LinkInstance::build(spec, 0).expect("fixture builds");
    let b = budget(
        spec.link.legacy_power_dbm,
        spec.link.noise_dbm,
        spec.link.legacy_rate.to_nats(),
    )
    .expect("fixture budget is valid");
    link.params(spec, b).expect("fixture parameters are valid")
}

/// The street layout with beamfocusing.
pub fn street_params() -> EffectiveParams {
    params_for(&ScenarioSpec::default())
}
