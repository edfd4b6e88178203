//! Monte Carlo detection-probability experiments.
//!
//! Each trial draws fresh UE and scatterer positions (continuous, never
//! grid-snapped; see [`Placement`] for the distribution) and fresh common
//! phases, synthesizes a noisy snapshot, runs the iterative SLAM loop, and
//! matches detections against the ground-truth UE / mirror-image / scatterer
//! positions with a one-to-one rule. Sweeps aggregate success counts per
//! object class over grid resolutions and removal variants.
//!
//! Every draw comes from a substream keyed by `(master_seed, trial, ...)`,
//! so the full statistics table is a pure function of the configuration and
//! trials can run in parallel without changing a single bit of output.

use crate::forward::{synthesize_snapshot, NoiseModel};
use crate::imaging::GridSpec;
use crate::rng::{self, STREAM_PHASE, STREAM_POSITION};
use crate::scene::{mirror_point, Scenario, Vec3};
use crate::slam::{run_slam, run_slam_oracle_removal, Detection, GroundTruth, StopRule};
use crate::Result;
use rand::Rng;
use rayon::prelude::*;

/// Which object class a ground-truth target belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectClass {
    Ue,
    Vue,
    Sp,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 3] = [ObjectClass::Ue, ObjectClass::Vue, ObjectClass::Sp];

    pub fn label(self) -> &'static str {
        match self {
            ObjectClass::Ue => "ue",
            ObjectClass::Vue => "vue",
            ObjectClass::Sp => "sp",
        }
    }
}

/// Estimated vs oracle ("perfect removal") cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Estimated,
    PerfectRemoval,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Estimated => "estimated",
            Variant::PerfectRemoval => "pr",
        }
    }
}

/// Axis-aligned placement region for randomized objects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for PlacementBounds {
    /// The floor footprint covered by the ceiling AP lattice.
    fn default() -> Self {
        Self { x_min: -4.0, x_max: 4.0, y_min: -8.0, y_max: 8.0 }
    }
}

impl PlacementBounds {
    /// Box of half-width `half` centred on `(x, y)`.
    pub fn around(x: f64, y: f64, half: f64) -> Self {
        Self { x_min: x - half, x_max: x + half, y_min: y - half, y_max: y + half }
    }
}

/// How randomized trials draw the UE and scatterer positions.
///
/// The default jitters each object uniformly within +-1 m of its position in
/// the base scenario. This keeps every trial geometrically comparable to the
/// base layout: the mirror image stays inside the default search region and
/// the scatterer keeps its two-leg path loss, so detection statistics probe
/// off-grid sensitivity rather than a changing geometry. `Uniform` draws
/// both objects anywhere in one region instead; with the default search
/// region the mirror image then falls outside the imaged area in most
/// trials, which caps its detection probability accordingly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// One region shared by the UE and every scatterer.
    Uniform(PlacementBounds),
    /// Per-object box of the given half-width around the nominal position.
    JitterAroundNominal { half: f64 },
}

impl Default for Placement {
    fn default() -> Self {
        Self::JitterAroundNominal { half: 1.0 }
    }
}

/// Full description of one Monte Carlo experiment point.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    /// APs, surfaces, and RF parameters are taken from here; the UE and
    /// scatterer positions are re-drawn each trial.
    pub base_scenario: Scenario,
    pub placement: Placement,
    /// Minimum UE-to-scatterer separation, meters.
    pub min_separation: f64,
    pub grid: GridSpec,
    /// A detection within this distance of a truth counts as success.
    pub success_radius: f64,
    pub variant: Variant,
    pub trials: usize,
    pub master_seed: u64,
}

impl TrialConfig {
    pub const DEFAULT_MIN_SEPARATION: f64 = 1.0;
    pub const DEFAULT_SUCCESS_RADIUS: f64 = 0.2;
}

/// What one trial produced, kept for diagnostics output.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial_index: usize,
    /// `(class, truth position, detected)` per ground-truth object.
    pub truths: Vec<(ObjectClass, Vec3, bool)>,
    pub detections: Vec<Detection>,
    /// Populated when the trial failed instead of being silently dropped.
    pub error: Option<String>,
}

/// Aggregated statistics for one (resolution, variant, object) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub resolution: f64,
    pub variant: Variant,
    pub object: ObjectClass,
    pub trials: usize,
    pub successes: usize,
}

impl StatsRow {
    pub fn probability(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the success fraction.
    pub fn std_err(&self) -> f64 {
        let p = self.probability();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Greedy one-to-one matching: repeatedly pair the globally closest
/// (detection, truth) with distance within `radius`, consuming both.
/// Returns one success flag per truth.
pub fn match_detections(detections: &[Vec3], truths: &[Vec3], radius: f64) -> Vec<bool> {
    let mut det_used = vec![false; detections.len()];
    let mut matched = vec![false; truths.len()];
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (di, d) in detections.iter().enumerate() {
            if det_used[di] {
                continue;
            }
            for (ti, t) in truths.iter().enumerate() {
                if matched[ti] {
                    continue;
                }
                let dist = d.distance(*t);
                if dist <= radius && best.map_or(true, |(b, _, _)| dist < b) {
                    best = Some((dist, di, ti));
                }
            }
        }
        match best {
            Some((_, di, ti)) => {
                det_used[di] = true;
                matched[ti] = true;
            }
            None => break,
        }
    }
    matched
}

fn draw_position<R: Rng>(rng: &mut R, b: &PlacementBounds, z: f64) -> Vec3 {
    Vec3::new(
        b.x_min + rng.gen::<f64>() * (b.x_max - b.x_min),
        b.y_min + rng.gen::<f64>() * (b.y_max - b.y_min),
        z,
    )
}

fn object_bounds(placement: &Placement, nominal: Vec3) -> PlacementBounds {
    match placement {
        Placement::Uniform(b) => *b,
        Placement::JitterAroundNominal { half } => {
            PlacementBounds::around(nominal.x, nominal.y, *half)
        }
    }
}

/// Builds the randomized scenario and phases for one trial.
fn randomize_scenario(cfg: &TrialConfig, trial_seed: u64) -> (Scenario, Vec<f64>) {
    let mut scenario = cfg.base_scenario.clone();
    let mut pos_rng = rng::substream(trial_seed, &[STREAM_POSITION]);
    let z = cfg.base_scenario.ue.z;
    let ue_bounds = object_bounds(&cfg.placement, cfg.base_scenario.ue);
    scenario.ue = draw_position(&mut pos_rng, &ue_bounds, z);
    for (sp, nominal) in scenario.scatterers.iter_mut().zip(&cfg.base_scenario.scatterers) {
        let sp_bounds = object_bounds(&cfg.placement, nominal.position);
        loop {
            let p = draw_position(&mut pos_rng, &sp_bounds, z);
            if p.distance(scenario.ue) >= cfg.min_separation {
                sp.position = p;
                break;
            }
        }
    }
    let phases = (0..scenario.num_paths())
        .map(|m| {
            let mut rng = rng::substream(trial_seed, &[STREAM_PHASE, m as u64]);
            rng::uniform_phase(&mut rng)
        })
        .collect();
    (scenario, phases)
}

/// Ground-truth image positions of the trial's objects.
fn truth_positions(s: &Scenario) -> Vec<(ObjectClass, Vec3)> {
    let mut out = vec![(ObjectClass::Ue, s.ue)];
    for surf in &s.surfaces {
        out.push((ObjectClass::Vue, mirror_point(s.ue, surf)));
    }
    for sp in &s.scatterers {
        out.push((ObjectClass::Sp, sp.position));
    }
    out
}

/// Runs a single trial. Bit-reproducible given `(cfg, trial_index)`.
pub fn run_trial(cfg: &TrialConfig, trial_index: usize) -> TrialOutcome {
    let trial_seed = rng::mix(cfg.master_seed, trial_index as u64);
    let (scenario, phases) = randomize_scenario(cfg, trial_seed);
    let truths = truth_positions(&scenario);
    let result: Result<Vec<Detection>> = (|| {
        let y = synthesize_snapshot(&scenario, &phases, NoiseModel::Seeded(trial_seed))?;
        let stop = StopRule::max_targets(scenario.num_paths());
        match cfg.variant {
            Variant::Estimated => {
                run_slam(&y, &cfg.grid, &scenario.aps, scenario.rf.carrier_hz, stop)
            }
            Variant::PerfectRemoval => {
                let truth = GroundTruth::new(scenario.clone(), phases.clone());
                run_slam_oracle_removal(
                    &y,
                    &cfg.grid,
                    &scenario.aps,
                    scenario.rf.carrier_hz,
                    stop,
                    &truth,
                )
            }
        }
    })();
    match result {
        Ok(detections) => {
            let det_pos: Vec<Vec3> = detections.iter().map(|d| d.position).collect();
            let truth_pos: Vec<Vec3> = truths.iter().map(|&(_, p)| p).collect();
            let flags = match_detections(&det_pos, &truth_pos, cfg.success_radius);
            TrialOutcome {
                trial_index,
                truths: truths
                    .iter()
                    .zip(&flags)
                    .map(|(&(c, p), &f)| (c, p, f))
                    .collect(),
                detections,
                error: None,
            }
        }
        Err(e) => TrialOutcome {
            trial_index,
            truths: truths.iter().map(|&(c, p)| (c, p, false)).collect(),
            detections: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs all trials of one experiment point, in parallel, in index order.
pub fn run_trials(cfg: &TrialConfig) -> Vec<TrialOutcome> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect()
}

/// Aggregates per-class success counts out of a batch of trial outcomes.
pub fn aggregate(
    outcomes: &[TrialOutcome],
    resolution: f64,
    variant: Variant,
) -> Vec<StatsRow> {
    ObjectClass::ALL
        .iter()
        .map(|&object| {
            let mut trials = 0usize;
            let mut successes = 0usize;
            for outcome in outcomes {
                for &(class, _, hit) in &outcome.truths {
                    if class == object {
                        trials += 1;
                        if hit {
                            successes += 1;
                        }
                    }
                }
            }
            StatsRow { resolution, variant, object, trials, successes }
        })
        .filter(|row| row.trials > 0)
        .collect()
}

/// Full resolution x variant sweep. The grid keeps the template's bounds and
/// height; only the spacing changes per point.
pub fn sweep(
    template: &TrialConfig,
    resolutions: &[f64],
    variants: &[Variant],
) -> Result<(Vec<StatsRow>, Vec<TrialOutcome>)> {
    let mut stats = Vec::new();
    let mut all_outcomes = Vec::new();
    for &resolution in resolutions {
        let grid = GridSpec::new(
            template.grid.x_min,
            template.grid.x_max,
            template.grid.y_min,
            template.grid.y_max,
            template.grid.z_fixed,
            resolution,
        )?;
        for &variant in variants {
            let cfg = TrialConfig { grid, variant, ..template.clone() };
            let outcomes = run_trials(&cfg);
            stats.extend(aggregate(&outcomes, resolution, variant));
            all_outcomes.extend(outcomes);
        }
    }
    Ok((stats, all_outcomes))
}
