//! Forward signal model.
//!
//! One narrowband pilot symbol travels from the UE to every AP over the LoS
//! path plus one single-bounce path per reflecting surface and per scatterer.
//! The sample collected at AP `n` is
//!
//! ```text
//! y_n = sqrt(E) * sum_m rho_{m,n} e^{j theta_m} e^{-j 2 pi f_c tau_{m,n}} zeta + w_n
//! ```
//!
//! with per-path common phase `theta_m`, per-(path, AP) delay `tau` and gain
//! `rho`, and circularly-symmetric complex noise `w_n` of total variance
//! `N0_eff`. Delays and gains are pure geometry; phases and noise come from
//! explicit seeds, so identical inputs give bit-identical snapshots.

use crate::rng::{self, STREAM_NOISE};
use crate::scene::{mirror_point, RfParams, Scenario, COINCIDENCE_TOL};
use crate::{Error, Result, SPEED_OF_LIGHT};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which propagation mechanism a path uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Direct UE-to-AP path (`m = 0`).
    Los,
    /// Single bounce off `surfaces[index]`.
    Reflection(usize),
    /// Single bounce off `scatterers[index]`.
    Scatter(usize),
}

/// One propagation path: per-AP delays and gain amplitudes plus the common
/// phase shared by all APs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDescriptor {
    pub kind: PathKind,
    /// Propagation delays `tau_{m,n}`, seconds; strictly positive.
    pub delays: Vec<f64>,
    /// Gain amplitudes `rho_{m,n}`, dimensionless; nonnegative.
    pub amplitudes: Vec<f64>,
    /// Common phase `theta_m`, radians in `[0, 2pi)`.
    pub common_phase: f64,
}

/// Noise switch for snapshot synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Exactly zero noise.
    Off,
    /// Per-AP complex Gaussian noise derived from this seed.
    Seeded(u64),
}

/// The stacked length-N observation plus provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub samples: Vec<Complex64>,
    pub meta: SnapshotMeta,
}

/// Enough to tie a snapshot back to the run that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    /// Truncated digest of the scenario this was synthesized from.
    pub scenario_hash: u64,
    /// Noise seed, if noise was on.
    pub seed: Option<u64>,
    pub noise_on: bool,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total energy `sum_n |y_n|^2`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// A bare snapshot with no provenance (e.g. loaded from CSV).
    pub fn from_samples(samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            meta: SnapshotMeta { scenario_hash: 0, seed: None, noise_on: false },
        }
    }
}

/// Carrier wavelength `c / f_c`, meters.
pub fn wavelength(rf: &RfParams) -> f64 {
    SPEED_OF_LIGHT / rf.carrier_hz
}

/// Pilot symbol energy `E = P / delta_f`, joules. Power spread over one
/// symbol duration `1 / delta_f` of the SLAM subcarrier.
pub fn symbol_energy(rf: &RfParams) -> f64 {
    rf.tx_power_w / rf.symbol_bandwidth_hz
}

/// Effective complex noise variance `N0_eff = N0 * 10^(NF/10)`, joules.
pub fn noise_variance(rf: &RfParams) -> f64 {
    rf.noise_psd_w_per_hz * 10f64.powf(rf.noise_figure_db / 10.0)
}

fn check_distance(d: f64, what: &str) -> Result<f64> {
    if d < COINCIDENCE_TOL {
        Err(Error::DegenerateGeometry(format!("{what} distance {d} below tolerance")))
    } else {
        Ok(d)
    }
}

/// Delays and gains for one path, with the common phase left at zero.
///
/// * LoS: `tau = |x - x_ap| / c`, `rho = lambda / (4 pi |x - x_ap|)`.
/// * Reflection: distances taken to the mirror image of the UE,
///   `rho = lambda * Gamma / (4 pi |x_ap - x_vue|)`.
/// * Scatter: two-leg delay, bistatic radar gain `rho = lambda * sqrt(beta) /
///   ((4 pi)^{3/2} |x_ap - x_sp| |x - x_sp|)` with radar cross section `beta`
///   in m^2, so `rho` is dimensionless like the other gains.
pub fn path_geometry(s: &Scenario, kind: PathKind) -> Result<PathDescriptor> {
    let lambda = wavelength(&s.rf);
    let n_aps = s.aps.len();
    let mut delays = Vec::with_capacity(n_aps);
    let mut amplitudes = Vec::with_capacity(n_aps);
    match kind {
        PathKind::Los => {
            for ap in &s.aps {
                let d = check_distance(s.ue.distance(ap.position), "ue-ap")?;
                delays.push(d / SPEED_OF_LIGHT);
                amplitudes.push(lambda / (4.0 * PI * d));
            }
        }
        PathKind::Reflection(i) => {
            let surf = &s.surfaces[i];
            let vue = mirror_point(s.ue, surf);
            for ap in &s.aps {
                let d = check_distance(vue.distance(ap.position), "vue-ap")?;
                delays.push(d / SPEED_OF_LIGHT);
                amplitudes.push(lambda * surf.attenuation() / (4.0 * PI * d));
            }
        }
        PathKind::Scatter(i) => {
            let sp = &s.scatterers[i];
            let d_tx = check_distance(s.ue.distance(sp.position), "ue-sp")?;
            for ap in &s.aps {
                let d_rx = check_distance(sp.position.distance(ap.position), "sp-ap")?;
                delays.push((d_rx + d_tx) / SPEED_OF_LIGHT);
                amplitudes.push(lambda * sp.rcs.sqrt() / ((4.0 * PI).powf(1.5) * d_rx * d_tx));
            }
        }
    }
    Ok(PathDescriptor { kind, delays, amplitudes, common_phase: 0.0 })
}

/// All `M + 1` paths of the scenario in canonical order: LoS first, then one
/// reflection per surface, then one scatter per scatterer. `phases` supplies
/// the common phase of each path in the same order.
pub fn enumerate_paths(s: &Scenario, phases: &[f64]) -> Result<Vec<PathDescriptor>> {
    let expected = s.num_paths();
    if phases.len() != expected {
        return Err(Error::LengthMismatch { expected, actual: phases.len() });
    }
    let mut kinds = vec![PathKind::Los];
    kinds.extend((0..s.surfaces.len()).map(PathKind::Reflection));
    kinds.extend((0..s.scatterers.len()).map(PathKind::Scatter));
    kinds
        .into_iter()
        .zip(phases)
        .map(|(kind, &phase)| {
            let mut p = path_geometry(s, kind)?;
            p.common_phase = phase.rem_euclid(2.0 * PI);
            Ok(p)
        })
        .collect()
}

/// Truncated SHA-256 of the scenario's canonical JSON form.
pub fn scenario_hash(s: &Scenario) -> u64 {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(s).expect("scenario serializes");
    let digest = Sha256::digest(json.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Noiseless superposition of explicit paths; the building block behind
/// [`synthesize_snapshot`] and the oracle-removal SLAM variant.
pub fn path_contribution(rf: &RfParams, path: &PathDescriptor, n_aps: usize) -> Vec<Complex64> {
    let sqrt_e = symbol_energy(rf).sqrt();
    let pilot = Complex64::new(rf.pilot.0, rf.pilot.1);
    (0..n_aps)
        .map(|n| {
            let phase = path.common_phase - 2.0 * PI * rf.carrier_hz * path.delays[n];
            let (s, c) = phase.sin_cos();
            Complex64::new(c, s) * (sqrt_e * path.amplitudes[n]) * pilot
        })
        .collect()
}

/// Synthesizes the stacked snapshot for the given per-path common phases.
///
/// With `NoiseModel::Seeded`, AP `n`'s noise comes from the substream keyed
/// `(seed, NOISE, n)`, so draws are independent of evaluation order.
pub fn synthesize_snapshot(s: &Scenario, phases: &[f64], noise: NoiseModel) -> Result<Snapshot> {
    let paths = enumerate_paths(s, phases)?;
    let n_aps = s.aps.len();
    let mut samples = vec![Complex64::new(0.0, 0.0); n_aps];
    for path in &paths {
        for (sample, term) in samples.iter_mut().zip(path_contribution(&s.rf, path, n_aps)) {
            *sample += term;
        }
    }
    let (seed, noise_on) = match noise {
        NoiseModel::Off => (None, false),
        NoiseModel::Seeded(seed) => {
            let var = noise_variance(&s.rf);
            for (n, sample) in samples.iter_mut().enumerate() {
                let mut stream = rng::substream(seed, &[STREAM_NOISE, n as u64]);
                let (re, im) = rng::complex_gaussian(&mut stream, var);
                *sample += Complex64::new(re, im);
            }
            (Some(seed), true)
        }
    };
    Ok(Snapshot {
        samples,
        meta: SnapshotMeta { scenario_hash: scenario_hash(s), seed, noise_on },
    })
}
