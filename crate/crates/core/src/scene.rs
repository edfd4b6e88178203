//! Geometric scene model.
//!
//! Coordinate convention: Cartesian, meters, origin at the center of the
//! ceiling, z negative downward into the room. A reflecting surface is an
//! infinite plane described by an anchor point and a unit normal; its effect
//! on propagation is captured entirely by the mirror image of the UE across
//! the plane (the "virtual UE").

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Distance below which two scene entities are considered coincident.
/// Well below the 1 cm grid, well above double-precision noise.
pub const COINCIDENCE_TOL: f64 = 1e-6;

/// Position or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, rhs: Self) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, rhs: Self) -> f64 {
        (self - rhs).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// A fixed single-antenna receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    /// Index `n` in `[0, N)`; ids must be unique and contiguous.
    pub id: usize,
    pub position: Vec3,
}

/// Infinite planar reflector, parameterized by an anchor point on the plane,
/// its unit normal, and a reflection attenuation in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectingSurface {
    anchor: Vec3,
    normal: Vec3,
    attenuation: f64,
}

impl ReflectingSurface {
    /// Builds a surface, normalizing `normal`. A zero normal is rejected.
    pub fn new(anchor: Vec3, normal: Vec3, attenuation: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > COINCIDENCE_TOL) {
            return Err(Error::ZeroNormal);
        }
        Ok(Self {
            anchor,
            normal: normal * (1.0 / n),
            attenuation,
        })
    }

    pub fn anchor(&self) -> Vec3 {
        self.anchor
    }

    /// Unit normal.
    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    /// Signed distance from `x` to the plane, positive on the normal side.
    pub fn signed_distance(&self, x: Vec3) -> f64 {
        self.normal.dot(x - self.anchor)
    }
}

/// Point scatterer with radar cross section in m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub position: Vec3,
    /// Radar cross section, m^2.
    pub rcs: f64,
}

/// RF and link-budget parameters, all in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Transmit power, W.
    pub tx_power_w: f64,
    /// Subcarrier spacing used for the SLAM pilot, Hz.
    pub symbol_bandwidth_hz: f64,
    /// Thermal noise density, W/Hz.
    pub noise_psd_w_per_hz: f64,
    /// Receiver noise figure, dB.
    pub noise_figure_db: f64,
    /// Known pilot symbol, unit modulus; `(re, im)`.
    pub pilot: (f64, f64),
}

impl RfParams {
    /// Unit pilot.
    pub const UNIT_PILOT: (f64, f64) = (1.0, 0.0);
}

/// Full scene description: geometry plus RF parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub aps: Vec<AccessPoint>,
    pub ue: Vec3,
    pub surfaces: Vec<ReflectingSurface>,
    pub scatterers: Vec<ScatterPoint>,
    pub rf: RfParams,
}

/// One failed validation rule, carried as data rather than an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Which entity broke the rule, e.g. `"surface[0]"`.
    pub entity: String,
    /// Rule identifier, e.g. `"attenuation-out-of-range"`.
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

impl Scenario {
    pub fn num_aps(&self) -> usize {
        self.aps.len()
    }

    /// Total path count `M + 1`: LoS plus one per surface and scatterer.
    pub fn num_paths(&self) -> usize {
        1 + self.surfaces.len() + self.scatterers.len()
    }

    pub fn ap_positions(&self) -> Vec<Vec3> {
        self.aps.iter().map(|a| a.position).collect()
    }
}

/// Mirror image of `x` across the surface plane: `(I - 2 n n^T) x + 2 n n^T mu`.
pub fn mirror_point(x: Vec3, surface: &ReflectingSurface) -> Vec3 {
    let n = surface.normal();
    x - n * (2.0 * n.dot(x - surface.anchor()))
}

/// Point where the line from `ap` to `vue` crosses the surface plane.
///
/// For `vue = mirror_point(ue, surface)` this is the specular incidence point
/// of the reflected path between `ap` and `ue`.
pub fn incidence_point(ap: Vec3, vue: Vec3, surface: &ReflectingSurface) -> Result<Vec3> {
    let dir = vue - ap;
    let denom = dir.dot(surface.normal());
    if denom.abs() < 1e-12 * dir.norm() {
        return Err(Error::ParallelLine);
    }
    let t = -surface.signed_distance(ap) / denom;
    Ok(ap + dir * t)
}

/// Checks every type invariant and returns the list of violations.
/// An empty list means the scenario is usable everywhere downstream.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: &str, rule: &str| {
        out.push(Violation {
            entity: entity.to_string(),
            rule: rule.to_string(),
        })
    };

    if s.aps.len() < 2 {
        push("aps", "fewer-than-two-aps");
    }
    for (i, ap) in s.aps.iter().enumerate() {
        if ap.id != i {
            push(&format!("ap[{i}]"), "id-not-contiguous");
        }
        if !ap.position.is_finite() {
            push(&format!("ap[{i}]"), "position-not-finite");
        }
    }
    if !s.ue.is_finite() {
        push("ue", "position-not-finite");
    }
    for (i, ap) in s.aps.iter().enumerate() {
        if s.ue.distance(ap.position) <= COINCIDENCE_TOL {
            push(&format!("ap[{i}]"), "ue-coincides-with-ap");
        }
    }
    for (i, surf) in s.surfaces.iter().enumerate() {
        if (surf.normal().norm() - 1.0).abs() > 1e-12 {
            push(&format!("surface[{i}]"), "normal-not-unit");
        }
        if !(0.0..=1.0).contains(&surf.attenuation()) {
            push(&format!("surface[{i}]"), "attenuation-out-of-range");
        }
        if !surf.anchor().is_finite() || !surf.normal().is_finite() {
            push(&format!("surface[{i}]"), "geometry-not-finite");
        }
    }
    for (i, sp) in s.scatterers.iter().enumerate() {
        let ent = format!("scatterer[{i}]");
        if !sp.position.is_finite() {
            push(&ent, "position-not-finite");
        }
        if !(sp.rcs >= 0.0) {
            push(&ent, "rcs-negative");
        }
        if sp.position.distance(s.ue) <= COINCIDENCE_TOL {
            push(&ent, "scatterer-coincides-with-ue");
        }
        for ap in &s.aps {
            if sp.position.distance(ap.position) <= COINCIDENCE_TOL {
                push(&ent, "scatterer-coincides-with-ap");
                break;
            }
        }
    }
    let rf = &s.rf;
    if !(rf.carrier_hz > 0.0) {
        push("rf", "carrier-not-positive");
    }
    if !(rf.tx_power_w > 0.0) {
        push("rf", "tx-power-not-positive");
    }
    if !(rf.symbol_bandwidth_hz > 0.0) {
        push("rf", "symbol-bandwidth-not-positive");
    }
    if !(rf.noise_psd_w_per_hz >= 0.0) {
        push("rf", "noise-psd-negative");
    }
    let pilot_mod = (rf.pilot.0 * rf.pilot.0 + rf.pilot.1 * rf.pilot.1).sqrt();
    if (pilot_mod - 1.0).abs() > 1e-9 {
        push("rf", "pilot-not-unit-modulus");
    }
    out
}
