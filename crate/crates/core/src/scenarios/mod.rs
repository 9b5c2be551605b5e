//! Experiment setups: the fixed street layout, random half-ring drops and
//! synthetic parameter sets, plus sweeps and the table reproduction.

mod config;
mod sweep;
mod table1;

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{
    best_energy, closed_form_two_user, high_snr_closed_form, qualify_and_select, solve_oma_baseline, AllocationProblem,
    AllocationResult, Approach, ThresholdRule,
};
use crate::beamforming::{
    focus_beams, zf_beams, BeamKind, BeamSet, ChannelSet, EffectiveParams, FarSnrForm, InterferenceModel, LinkBudget,
    ParamOptions,
};
use crate::geometry::{resolution_grid, ArrayGeometry, LinSpace, PolarGrid, PolarPoint, ResolutionMap};
use crate::units::{dbm_to_watts, Angle, Rate};
use crate::{Error, Result};

pub use config::{apply_override, load_spec};
pub use sweep::{
    instance_records, run_sweep, solve_records, summarize, SummaryRow, SweepOutput, SweepRecord, SUMMARY_CSV_HEADER,
    SWEEP_CSV_HEADER,
};
pub use table1::{run_table1, table1_spec, Table1Report, Table1Row, TABLE1_TARGET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub elements: usize,
    pub carrier_hz: f64,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            elements: 513,
            carrier_hz: 28e9,
            spacing_wavelengths: 0.5,
        }
    }
}

impl ArrayConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::Config(format!(
                "array.carrier_hz must be positive, got {}",
                self.carrier_hz
            )));
        }
        let wavelength = crate::units::SPEED_OF_LIGHT / self.carrier_hz;
        ArrayGeometry::new(self.elements, self.carrier_hz, self.spacing_wavelengths * wavelength)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub legacy_power_dbm: f64,
    pub noise_dbm: f64,
    pub legacy_rate: Rate,
    pub beams: BeamKind,
    pub interference: InterferenceModel,
    pub far_snr: FarSnrForm,
    pub max_condition: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            legacy_power_dbm: 10.0,
            noise_dbm: -70.0,
            legacy_rate: Rate::bpcu(4.0),
            beams: BeamKind::Focus,
            interference: InterferenceModel::Exact,
            far_snr: FarSnrForm::Squared,
            max_condition: crate::beamforming::DEFAULT_MAX_CONDITION,
        }
    }
}

impl LinkConfig {
    pub fn options(&self) -> ParamOptions {
        ParamOptions {
            interference: self.interference,
            far_snr: self.far_snr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    Deterministic,
    RandomHalfring,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub r: f64,
    pub angle: Angle,
}

impl PointConfig {
    pub fn new(r: f64, angle: f64) -> Self {
        PointConfig { r, angle: Angle(angle) }
    }

    pub fn to_point(self) -> Result<PolarPoint> {
        PolarPoint::new(self.r, self.angle.0)
    }
}

/// How a half-ring draws radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialLaw {
    /// Uniform in `r`.
    #[default]
    Uniform,
    /// Uniform over the annulus area (density proportional to `r`).
    Area,
}

/// Annulus sector `inner ≤ r ≤ outer`, `0 ≤ θ < π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub inner_m: f64,
    pub outer_m: f64,
    #[serde(default)]
    pub radial: RadialLaw,
}

impl RingConfig {
    pub fn new(inner_m: f64, outer_m: f64) -> Self {
        RingConfig {
            inner_m,
            outer_m,
            radial: RadialLaw::Uniform,
        }
    }

    /// Radius by [`RadialLaw`], angle uniform in `[0, π)`.
    fn sample(&self, rng: &mut impl Rng) -> Result<PolarPoint> {
        let (a, b) = (self.inner_m, self.outer_m);
        let r = if a == b {
            a
        } else {
            match self.radial {
                RadialLaw::Uniform => rng.random_range(a..=b),
                RadialLaw::Area => (a * a + rng.random::<f64>() * (b * b - a * a)).sqrt(),
            }
        };
        let theta = std::f64::consts::PI * rng.random::<f64>();
        PolarPoint::new(r, theta)
    }
}

/// Effective parameters given directly, bypassing channels and beams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub self_gain: Vec<f64>,
    pub legacy_inv_interf: Vec<f64>,
    pub far_beam_gain: Vec<f64>,
    pub far_inv_interf: f64,
    pub far_oma_snr: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        // β = min(1·1, 1·2²) = 1, b0 = 2
        SyntheticConfig {
            self_gain: vec![1.0],
            legacy_inv_interf: vec![1.0],
            far_beam_gain: vec![2.0],
            far_inv_interf: 1.0,
            far_oma_snr: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    pub kind: PlacementKind,
    /// Legacy users for `deterministic`.
    pub legacy: Vec<PointConfig>,
    /// Far user for `deterministic`.
    pub far: PointConfig,
    /// Number of legacy users for `random_halfring`.
    pub legacy_count: usize,
    pub legacy_ring: RingConfig,
    pub far_ring: RingConfig,
    pub synthetic: SyntheticConfig,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            kind: PlacementKind::Deterministic,
            legacy: [5.0, 10.0, 40.0]
                .iter()
                .map(|r| PointConfig::new(*r, FRAC_PI_4))
                .collect(),
            far: PointConfig::new(200.0, FRAC_PI_4),
            legacy_count: 40,
            legacy_ring: RingConfig::new(5.0, 10.0),
            far_ring: RingConfig::new(150.0, 200.0),
            synthetic: SyntheticConfig::default(),
        }
    }
}

impl PlacementConfig {
    /// Number of legacy users this placement produces.
    pub fn num_legacy(&self) -> usize {
        match self.kind {
            PlacementKind::Deterministic => self.legacy.len(),
            PlacementKind::RandomHalfring => self.legacy_count,
            PlacementKind::Synthetic => self.synthetic.self_gain.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oma,
    Approach1,
    Approach2,
    /// High-SNR closed form.
    Lemma1,
    /// Single-legacy-user closed form.
    Lemma2,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Oma => "oma",
            Method::Approach1 => "approach1",
            Method::Approach2 => "approach2",
            Method::Lemma1 => "lemma1",
            Method::Lemma2 => "lemma2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub far_rate: Rate,
    pub mx: usize,
    /// Selection rule for the closed forms.
    pub approach: Approach,
    pub slot_s: f64,
    pub threshold: ThresholdRule,
    pub methods: Vec<Method>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            far_rate: Rate::nats(10.0),
            mx: 3,
            approach: Approach::DecodeFarFirst,
            slot_s: 1.0,
            threshold: ThresholdRule::Exponential,
            methods: vec![Method::Oma, Method::Approach1, Method::Approach2, Method::Lemma1],
        }
    }
}

/// Axes of a sweep. Empty lists fall back to the single value from
/// `[link]`/`[solve]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub far_rates: Vec<Rate>,
    pub mx: Vec<usize>,
    pub noise_dbm: Vec<f64>,
    pub legacy_power_dbm: Vec<f64>,
    pub legacy_rates: Vec<Rate>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            far_rates: Vec::new(),
            mx: Vec::new(),
            noise_dbm: Vec::new(),
            legacy_power_dbm: Vec::new(),
            legacy_rates: Vec::new(),
            trials: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolutionConfig {
    pub foci: Vec<PointConfig>,
    pub radius_m: LinSpace,
    pub angle_deg: LinSpace,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        ResolutionConfig {
            foci: vec![PointConfig::new(5.0, FRAC_PI_4)],
            radius_m: LinSpace {
                start: 1.0,
                stop: 50.0,
                steps: 50,
            },
            angle_deg: LinSpace {
                start: 0.0,
                stop: 180.0,
                steps: 181,
            },
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub array: ArrayConfig,
    pub link: LinkConfig,
    pub placement: PlacementConfig,
    pub solve: SolveConfig,
    pub sweep: SweepConfig,
    pub resolution: ResolutionConfig,
}

impl ScenarioSpec {
    /// Checks cross-field invariants that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let pl = &self.placement;
        match pl.kind {
            PlacementKind::Deterministic if pl.legacy.is_empty() => {
                return bad("placement.legacy needs at least one user".into())
            }
            PlacementKind::RandomHalfring => {
                if pl.legacy_count == 0 {
                    return bad("placement.legacy_count must be at least 1".into());
                }
                for (name, ring) in [("legacy_ring", pl.legacy_ring), ("far_ring", pl.far_ring)] {
                    if !(ring.inner_m > 0.0 && ring.inner_m <= ring.outer_m && ring.outer_m.is_finite()) {
                        return bad(format!(
                            "placement.{name} needs 0 < inner_m <= outer_m, got {} and {}",
                            ring.inner_m, ring.outer_m
                        ));
                    }
                }
            }
            _ => {}
        }
        if self.sweep.trials == 0 {
            return bad("sweep.trials must be at least 1".into());
        }
        if self.solve.methods.is_empty() {
            return bad("solve.methods must not be empty".into());
        }
        let m = pl.num_legacy();
        if m == 0 {
            return bad("the placement has no legacy users".into());
        }
        if self.solve.methods.contains(&Method::Lemma2) && m != 1 {
            return bad(format!(
                "method lemma2 needs exactly one legacy user, the placement has {m}"
            ));
        }
        for mx in self.mx_values() {
            if mx == 0 || mx > m {
                return bad(format!("mx = {mx} must lie in 1..={m}"));
            }
        }
        if !(self.solve.slot_s.is_finite() && self.solve.slot_s > 0.0) {
            return bad(format!("solve.slot_s must be positive, got {}", self.solve.slot_s));
        }
        Ok(())
    }

    pub fn far_rate_values(&self) -> Vec<f64> {
        or_default(&self.sweep.far_rates, self.solve.far_rate)
            .into_iter()
            .map(Rate::to_nats)
            .collect()
    }

    pub fn mx_values(&self) -> Vec<usize> {
        or_default(&self.sweep.mx, self.solve.mx)
    }

    pub fn noise_values(&self) -> Vec<f64> {
        or_default(&self.sweep.noise_dbm, self.link.noise_dbm)
    }

    pub fn legacy_power_values(&self) -> Vec<f64> {
        or_default(&self.sweep.legacy_power_dbm, self.link.legacy_power_dbm)
    }

    pub fn legacy_rate_values(&self) -> Vec<f64> {
        or_default(&self.sweep.legacy_rates, self.link.legacy_rate)
            .into_iter()
            .map(Rate::to_nats)
            .collect()
    }
}

fn or_default<T: Clone>(list: &[T], single: T) -> Vec<T> {
    if list.is_empty() {
        vec![single]
    } else {
        list.to_vec()
    }
}

/// The street layout: legacy users at 5, 10 and 40 m and the far user at
/// 200 m, all on the 45° ray, in front of a 513-element half-wavelength array.
pub fn build_deterministic_scenario() -> ScenarioSpec {
    ScenarioSpec::default()
}

/// User positions for one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub legacy: Vec<PolarPoint>,
    pub far: PolarPoint,
}

/// Generator for trial `trial`: ChaCha8 keyed by `seed`, on stream `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Draws one random half-ring placement. Legacy users are drawn first, in
/// order, then the far user.
pub fn sample_random_scenario(placement: &PlacementConfig, rng: &mut impl Rng) -> Result<Placement> {
    let legacy = (0..placement.legacy_count)
        .map(|_| placement.legacy_ring.sample(rng))
        .collect::<Result<Vec<_>>>()?;
    let far = placement.far_ring.sample(rng)?;
    Ok(Placement { legacy, far })
}

/// Placement for `trial` (the same for every trial unless random).
pub fn placement_for_trial(spec: &ScenarioSpec, trial: usize) -> Result<Option<Placement>> {
    let pl = &spec.placement;
    match pl.kind {
        PlacementKind::Deterministic => Ok(Some(Placement {
            legacy: pl.legacy.iter().map(|p| p.to_point()).collect::<Result<_>>()?,
            far: pl.far.to_point()?,
        })),
        PlacementKind::RandomHalfring => {
            let mut rng = trial_rng(spec.sweep.seed, trial);
            sample_random_scenario(pl, &mut rng).map(Some)
        }
        PlacementKind::Synthetic => Ok(None),
    }
}

/// Channels and beams for one realisation; absent for synthetic parameters.
#[derive(Debug, Clone)]
pub struct LinkInstance {
    pub placement: Option<Placement>,
    pub channels: Option<ChannelSet>,
    pub beams: Option<BeamSet>,
}

impl LinkInstance {
    pub fn build(spec: &ScenarioSpec, trial: usize) -> Result<Self> {
        let Some(placement) = placement_for_trial(spec, trial)? else {
            return Ok(LinkInstance {
                placement: None,
                channels: None,
                beams: None,
            });
        };
        let geom = spec.array.geometry()?;
        let channels = ChannelSet::from_points(&geom, &placement.legacy, &placement.far)?;
        let beams = match spec.link.beams {
            BeamKind::ZeroForcing => zf_beams(&channels, spec.link.max_condition)?,
            BeamKind::Focus => focus_beams(&geom, &placement.legacy, &placement.far),
        };
        Ok(LinkInstance {
            placement: Some(placement),
            channels: Some(channels),
            beams: Some(beams),
        })
    }

    /// Effective parameters under `budget`.
    pub fn params(&self, spec: &ScenarioSpec, budget: LinkBudget) -> Result<EffectiveParams> {
        match (&self.channels, &self.beams) {
            (Some(ch), Some(beams)) => EffectiveParams::from_link(ch, beams, budget, spec.link.options()),
            _ => {
                let s = &spec.placement.synthetic;
                EffectiveParams::synthetic(
                    s.self_gain.clone(),
                    s.legacy_inv_interf.clone(),
                    s.far_beam_gain.clone(),
                    s.far_inv_interf,
                    s.far_oma_snr,
                    budget,
                )
            }
        }
    }
}

/// Link budget from dBm powers and a legacy rate in nats.
pub fn budget(legacy_power_dbm: f64, noise_dbm: f64, legacy_rate: f64) -> Result<LinkBudget> {
    LinkBudget::new(dbm_to_watts(legacy_power_dbm), dbm_to_watts(noise_dbm), legacy_rate)
}

/// Runs `method` on one parameter set.
///
/// The hybrid methods fall back to the OMA allocation when no beam qualifies.
pub fn run_method(
    method: Method,
    params: &EffectiveParams,
    far_target: f64,
    mx: usize,
    solve: &SolveConfig,
) -> Result<AllocationResult> {
    let t = solve.slot_s;
    let hybrid = |approach: Approach| -> Result<AllocationResult> {
        match AllocationProblem::with_best_beams(params.clone(), approach, far_target, mx)? {
            Some(prob) => best_energy(&prob.slot_duration(t)?.threshold_rule(solve.threshold)),
            None => Ok(solve_oma_baseline(params, far_target, t)),
        }
    };
    match method {
        Method::Oma => Ok(solve_oma_baseline(params, far_target, t)),
        Method::Approach1 => hybrid(Approach::DecodeOwn),
        Method::Approach2 => hybrid(Approach::DecodeFarFirst),
        Method::Lemma1 => {
            let selected = qualify_and_select(params, solve.approach, mx);
            if selected.is_empty() {
                return Ok(solve_oma_baseline(params, far_target, t));
            }
            high_snr_closed_form(params, far_target, &selected, t, solve.threshold)
        }
        Method::Lemma2 => closed_form_two_user(params, far_target, t, solve.threshold),
    }
}

/// Result of every configured method on trial 0 at the first sweep point.
pub fn solve_instance(spec: &ScenarioSpec) -> Result<Vec<(Method, Result<AllocationResult>)>> {
    spec.validate()?;
    let link = LinkInstance::build(spec, 0)?;
    let b = budget(
        spec.link.legacy_power_dbm,
        spec.link.noise_dbm,
        spec.link.legacy_rate.to_nats(),
    )?;
    let params = link.params(spec, b)?;
    let r0 = spec.solve.far_rate.to_nats();
    Ok(spec
        .solve
        .methods
        .iter()
        .map(|&m| (m, run_method(m, &params, r0, spec.solve.mx, &spec.solve)))
        .collect())
}

/// Resolution map for `[resolution]`: plain resolution for one focus, summed
/// beam magnitude for several.
pub fn resolution_map(spec: &ScenarioSpec) -> Result<ResolutionMap> {
    let geom = spec.array.geometry()?;
    let foci = spec
        .resolution
        .foci
        .iter()
        .map(|p| p.to_point())
        .collect::<Result<Vec<_>>>()?;
    let a = &spec.resolution.angle_deg;
    let angles = LinSpace {
        start: a.start.to_radians(),
        stop: a.stop.to_radians(),
        steps: a.steps,
    };
    let grid = PolarGrid::new(spec.resolution.radius_m.samples(), angles.samples())?;
    resolution_grid(&geom, &foci, &grid)
}
