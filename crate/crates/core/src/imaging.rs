//! Coherent imaging core.
//!
//! The imaging function is a spatial matched filter: for a candidate point
//! `x~` the steering vector `a(x~)` collects the carrier phase each AP would
//! observe from a source there, and the image value is `|a^H y|^2`. Peaks of
//! the image over a dense grid mark the UE and landmark positions.
//!
//! Determinism contract: per-cell values accumulate over APs in a fixed order
//! in double precision, each cell phase is computed directly from the
//! cell-to-AP distance (no incremental phase accumulation across cells), and
//! the grid is partitioned disjointly across threads — so the value array is
//! bit-identical for any thread count.

use crate::forward::Snapshot;
use crate::scene::{AccessPoint, Vec3};
use crate::trig;
use crate::{Error, Result, SPEED_OF_LIGHT};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Hard default ceiling on grid size; prevents accidental memory blowups.
pub const DEFAULT_CELL_CAP: usize = 100_000_000;

/// A fixed-height 2-D search grid.
///
/// Cells are point hypotheses at cell centers: cell `(i, j)` sits at
/// `(x_min + i s, y_min + j s, z_fixed)`. The per-axis count is
/// `floor((max - min) / spacing) + 1` and linearization is row-major with x
/// fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_fixed: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        z_fixed: f64,
        spacing: f64,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be > 0")));
        }
        if !(x_max >= x_min) {
            return Err(Error::InvalidGrid(format!("x_max {x_max} < x_min {x_min}")));
        }
        if !(y_max >= y_min) {
            return Err(Error::InvalidGrid(format!("y_max {y_max} < y_min {y_min}")));
        }
        let g = Self { x_min, x_max, y_min, y_max, z_fixed, spacing };
        if !g.x_min.is_finite() || !g.x_max.is_finite() || !g.y_min.is_finite()
            || !g.y_max.is_finite() || !g.z_fixed.is_finite()
        {
            return Err(Error::InvalidGrid("non-finite bound".into()));
        }
        Ok(g)
    }

    fn axis_cells(min: f64, max: f64, spacing: f64) -> usize {
        // the epsilon keeps exactly-divisible extents from losing their last
        // cell to floating-point rounding
        ((max - min) / spacing + 1e-9).floor() as usize + 1
    }

    pub fn nx(&self) -> usize {
        Self::axis_cells(self.x_min, self.x_max, self.spacing)
    }

    pub fn ny(&self) -> usize {
        Self::axis_cells(self.y_min, self.y_max, self.spacing)
    }

    pub fn num_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> Vec3 {
        Vec3::new(
            self.x_min + i as f64 * self.spacing,
            self.y_min + j as f64 * self.spacing,
            self.z_fixed,
        )
    }

    /// Center of the cell at linear index `idx` (x fastest).
    pub fn position(&self, idx: usize) -> Vec3 {
        let nx = self.nx();
        self.cell_center(idx % nx, idx / nx)
    }

    /// Center of the grid cell nearest to `p` (clamped to the grid).
    pub fn snap(&self, p: Vec3) -> Vec3 {
        let clamp = |v: f64, min: f64, n: usize| {
            let i = ((v - min) / self.spacing).round().clamp(0.0, (n - 1) as f64);
            min + i * self.spacing
        };
        Vec3::new(
            clamp(p.x, self.x_min, self.nx()),
            clamp(p.y, self.y_min, self.ny()),
            self.z_fixed,
        )
    }
}

/// Per-AP unit-modulus phase signature of a candidate location.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
}

/// One nonnegative imaging value per grid cell, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialImage {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// Carrier angular wavenumber `2 pi f_c / c`, rad/m.
#[inline]
fn wavenumber(carrier_hz: f64) -> f64 {
    2.0 * PI * carrier_hz / SPEED_OF_LIGHT
}

/// Carrier phase delay `2 pi f_c d / c` accrued over the AP-to-point range.
#[inline(always)]
fn steering_phase(ap: Vec3, x: Vec3, k: f64) -> f64 {
    let dx = x.x - ap.x;
    let dy = x.y - ap.y;
    let dz = x.z - ap.z;
    k * (dx * dx + dy * dy + dz * dz).sqrt()
}

/// `a(x~)` with entries `e^{-j 2 pi f_c d_n / c}`.
pub fn steering_vector(aps: &[AccessPoint], x: Vec3, carrier_hz: f64) -> SteeringVector {
    let k = wavenumber(carrier_hz);
    let entries = aps
        .iter()
        .map(|ap| {
            let (s, c) = trig::sin_cos(steering_phase(ap.position, x, k));
            Complex64::new(c, -s)
        })
        .collect();
    SteeringVector { entries }
}

/// `a^H y` accumulated over APs in index order.
#[inline(always)]
fn correlate(entries: &[Complex64], samples: &[Complex64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, y) in entries.iter().zip(samples) {
        // conj(a) * y, expanded so the scalar and grid kernels match bitwise
        re += a.re * y.re + a.im * y.im;
        im += a.re * y.im - a.im * y.re;
    }
    Complex64::new(re, im)
}

/// Imaging value `|a^H y|^2`.
pub fn image_value(y: &Snapshot, a: &SteeringVector) -> Result<f64> {
    if y.len() != a.entries.len() {
        return Err(Error::LengthMismatch { expected: a.entries.len(), actual: y.len() });
    }
    Ok(correlate(&a.entries, &y.samples).norm_sqr())
}

/// Evaluates the imaging function over every cell of `grid`.
pub fn compute_image(
    y: &Snapshot,
    grid: &GridSpec,
    aps: &[AccessPoint],
    carrier_hz: f64,
) -> Result<SpatialImage> {
    compute_image_with_cap(y, grid, aps, carrier_hz, DEFAULT_CELL_CAP)
}

/// [`compute_image`] with an explicit cell cap.
pub fn compute_image_with_cap(
    y: &Snapshot,
    grid: &GridSpec,
    aps: &[AccessPoint],
    carrier_hz: f64,
    cell_cap: usize,
) -> Result<SpatialImage> {
    if y.len() != aps.len() {
        return Err(Error::LengthMismatch { expected: aps.len(), actual: y.len() });
    }
    let cells = grid.num_cells();
    if cells > cell_cap {
        return Err(Error::GridTooLarge { cells, cap: cell_cap });
    }
    let nx = grid.nx();
    let k = wavenumber(carrier_hz);
    let samples = &y.samples;
    let mut values = vec![0.0f64; cells];
    // one row per work item; rows are disjoint, so scheduling cannot matter
    values
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| {
            let mut phases = vec![0.0f64; aps.len()];
            for (i, out) in row.iter_mut().enumerate() {
                let cell = grid.cell_center(i, j);
                for (p, ap) in phases.iter_mut().zip(aps) {
                    *p = steering_phase(ap.position, cell, k);
                }
                let mut re = 0.0;
                let mut im = 0.0;
                for (p, yn) in phases.iter().zip(samples) {
                    let (s, c) = trig::sin_cos(*p);
                    // conj(e^{-j p}) * y = (c + j s) * y
                    re += c * yn.re - s * yn.im;
                    im += c * yn.im + s * yn.re;
                }
                *out = re * re + im * im;
            }
        });
    Ok(SpatialImage { grid: *grid, values })
}

/// Normalized spatial ambiguity `|a^H(x~) a(x)| / (N)`, in `[0, 1]`.
pub fn ambiguity(x_hyp: Vec3, x: Vec3, aps: &[AccessPoint], carrier_hz: f64) -> f64 {
    let a = steering_vector(aps, x_hyp, carrier_hz);
    let b = steering_vector(aps, x, carrier_hz);
    let n = aps.len() as f64;
    (correlate(&a.entries, &b.entries).norm() / n).min(1.0)
}

/// Strongest cell: `(linear index, cell center, value)`, lowest index on ties.
pub fn argmax_cell(img: &SpatialImage) -> Result<(usize, Vec3, f64)> {
    if img.values.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut best = 0usize;
    for (idx, &v) in img.values.iter().enumerate() {
        if v > img.values[best] {
            best = idx;
        }
    }
    Ok((best, img.grid.position(best), img.values[best]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{self, NoiseModel, PathKind};
    use crate::scene::{RfParams, Scenario};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn rf() -> RfParams {
        RfParams {
            carrier_hz: 3.0e9,
            tx_power_w: 0.01,
            symbol_bandwidth_hz: 30.0e3,
            noise_psd_w_per_hz: 10f64.powf(-174.0 / 10.0) * 1e-3,
            noise_figure_db: 8.0,
            pilot: RfParams::UNIT_PILOT,
        }
    }

    /// The ceiling lattice used throughout: 5 x 10 APs at 2 m spacing.
    fn ceiling_aps() -> Vec<AccessPoint> {
        let mut aps = Vec::new();
        for j in 0..10 {
            for i in 0..5 {
                aps.push(AccessPoint {
                    id: aps.len(),
                    position: Vec3::new(-4.0 + 2.0 * i as f64, -9.0 + 2.0 * j as f64, 0.0),
                });
            }
        }
        aps
    }

    fn los_scenario(ue: Vec3) -> Scenario {
        Scenario { aps: ceiling_aps(), ue, surfaces: vec![], scatterers: vec![], rf: rf() }
    }

    #[test]
    fn steering_entry_at_ap_is_unity() {
        let aps = ceiling_aps();
        let a = steering_vector(&aps, aps[7].position, 3.0e9);
        assert_abs_diff_eq!((a.entries[7] - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn steering_entries_unit_modulus() {
        let a = steering_vector(&ceiling_aps(), Vec3::new(1.3, -2.7, -1.4), 3.0e9);
        for e in &a.entries {
            assert_abs_diff_eq!(e.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn half_wavelength_offset_flips_phase() {
        let lambda = SPEED_OF_LIGHT / 3.0e9;
        let aps = vec![
            AccessPoint { id: 0, position: Vec3::new(0.0, 0.0, 0.0) },
            AccessPoint { id: 1, position: Vec3::new(0.0, 0.0, 0.0) },
        ];
        let a = steering_vector(&aps, Vec3::new(5.0, 0.0, 0.0), 3.0e9);
        let b = steering_vector(&aps, Vec3::new(5.0 + lambda / 2.0, 0.0, 0.0), 3.0e9);
        let ratio = a.entries[0] * b.entries[0].conj();
        assert_abs_diff_eq!((ratio + Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn image_value_of_aligned_snapshot_is_n_squared() {
        let aps = ceiling_aps();
        let a = steering_vector(&aps, Vec3::new(0.7, 3.1, -1.4), 3.0e9);
        let y = Snapshot::from_samples(a.entries.clone());
        assert_relative_eq!(image_value(&y, &a).unwrap(), (aps.len() as f64).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn image_value_invariant_to_global_phase() {
        let aps = ceiling_aps();
        let a = steering_vector(&aps, Vec3::new(0.7, 3.1, -1.4), 3.0e9);
        let s = los_scenario(Vec3::new(-1.0, 2.0, -1.4));
        let y = forward::synthesize_snapshot(&s, &[1.234], NoiseModel::Off).unwrap();
        let rot = Complex64::from_polar(1.0, 0.77);
        let y_rot = Snapshot::from_samples(y.samples.iter().map(|v| v * rot).collect());
        assert_relative_eq!(
            image_value(&y, &a).unwrap(),
            image_value(&y_rot, &a).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn image_value_at_true_location_closed_form() {
        // single path, evaluated at the truth: |a^H y| = sqrt(E) sum_n rho_n
        let s = los_scenario(Vec3::new(-1.0, 2.0, -1.4));
        let y = forward::synthesize_snapshot(&s, &[0.456], NoiseModel::Off).unwrap();
        let a = steering_vector(&s.aps, s.ue, s.rf.carrier_hz);
        let path = forward::path_geometry(&s, PathKind::Los).unwrap();
        let expected = forward::symbol_energy(&s.rf) * path.amplitudes.iter().sum::<f64>().powi(2);
        assert_relative_eq!(image_value(&y, &a).unwrap(), expected, max_relative = 1e-10);
    }

    #[test]
    fn image_value_length_mismatch() {
        let a = steering_vector(&ceiling_aps(), Vec3::new(0.0, 0.0, -1.4), 3.0e9);
        let y = Snapshot::from_samples(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(image_value(&y, &a), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn grid_counts_and_centers() {
        let g = GridSpec::new(-5.0, 5.0, -10.0, 16.0, -1.4, 0.01).unwrap();
        assert_eq!(g.nx(), 1001);
        assert_eq!(g.ny(), 2601);
        let c = g.cell_center(200, 1500);
        assert_abs_diff_eq!(c.x, -3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.y, 5.0, epsilon = 1e-9);
        // linear index round trip, x fastest
        assert_eq!(g.position(1500 * 1001 + 200), c);
    }

    #[test]
    fn one_dimensional_curves_peak_at_sources() {
        // 1-D slice through a UE at x = 1 and an SP at x = 4
        let mut s = los_scenario(Vec3::new(1.0, 0.0, 0.0));
        s.aps = (0..12)
            .map(|i| AccessPoint {
                id: i,
                position: Vec3::new(-4.0 + 0.8 * i as f64, 6.0, 0.0),
            })
            .collect();
        s.scatterers.push(crate::scene::ScatterPoint {
            position: Vec3::new(4.0, 0.0, 0.0),
            rcs: 10.0,
        });
        let grid = GridSpec::new(0.0, 5.0, 0.0, 0.0, 0.0, 0.01).unwrap();

        let los = forward::path_geometry(&s, PathKind::Los).unwrap();
        let y_ue = Snapshot::from_samples(forward::path_contribution(&s.rf, &los, 12));
        let img = compute_image(&y_ue, &grid, &s.aps, s.rf.carrier_hz).unwrap();
        let (_, pos, _) = argmax_cell(&img).unwrap();
        assert_abs_diff_eq!(pos.x, 1.0, epsilon = 1e-9);

        let sp = forward::path_geometry(&s, PathKind::Scatter(0)).unwrap();
        let y_sp = Snapshot::from_samples(forward::path_contribution(&s.rf, &sp, 12));
        let img = compute_image(&y_sp, &grid, &s.aps, s.rf.carrier_hz).unwrap();
        let (_, pos, _) = argmax_cell(&img).unwrap();
        assert_abs_diff_eq!(pos.x, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn coarse_grid_argmax_matches_brute_force_oracle() {
        let s = los_scenario(Vec3::new(-1.0, 3.0, -1.4));
        let y = forward::synthesize_snapshot(&s, &[2.2], NoiseModel::Off).unwrap();
        let grid = GridSpec::new(-4.0, 4.0, -8.0, 8.0, -1.4, 0.2).unwrap();
        let img = compute_image(&y, &grid, &s.aps, s.rf.carrier_hz).unwrap();
        let (idx, pos, val) = argmax_cell(&img).unwrap();
        // brute-force oracle: direct |a^H y|^2 via num_complex at every cell
        let mut best = (0usize, f64::MIN);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let cell = grid.cell_center(i, j);
                let mut acc = Complex64::new(0.0, 0.0);
                for (ap, yn) in s.aps.iter().zip(&y.samples) {
                    let d = ap.position.distance(cell);
                    let phase = 2.0 * PI * s.rf.carrier_hz * d / SPEED_OF_LIGHT;
                    acc += Complex64::from_polar(1.0, phase) * yn;
                }
                let v = acc.norm_sqr();
                if v > best.1 {
                    best = (j * grid.nx() + i, v);
                }
            }
        }
        assert_eq!(idx, best.0);
        assert_relative_eq!(val, best.1, max_relative = 1e-9);
        assert_abs_diff_eq!(pos.distance(s.ue), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_snapshot_gives_zero_image() {
        let aps = ceiling_aps();
        let y = Snapshot::from_samples(vec![Complex64::new(0.0, 0.0); aps.len()]);
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, -1.4, 0.5).unwrap();
        let img = compute_image(&y, &grid, &aps, 3.0e9).unwrap();
        assert!(img.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_kernel_matches_scalar_path_bitwise() {
        let s = los_scenario(Vec3::new(0.5, -2.5, -1.4));
        let y = forward::synthesize_snapshot(&s, &[0.9], NoiseModel::Seeded(5)).unwrap();
        let grid = GridSpec::new(-2.0, 2.0, -3.0, 3.0, -1.4, 0.37).unwrap();
        let img = compute_image(&y, &grid, &s.aps, s.rf.carrier_hz).unwrap();
        for idx in 0..grid.num_cells() {
            let a = steering_vector(&s.aps, grid.position(idx), s.rf.carrier_hz);
            assert_eq!(img.values[idx], image_value(&y, &a).unwrap(), "cell {idx}");
        }
    }

    #[test]
    fn image_bit_identical_across_thread_counts() {
        let s = los_scenario(Vec3::new(0.5, -2.5, -1.4));
        let y = forward::synthesize_snapshot(&s, &[0.9], NoiseModel::Seeded(5)).unwrap();
        let grid = GridSpec::new(-4.0, 4.0, -6.0, 6.0, -1.4, 0.1).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| compute_image(&y, &grid, &s.aps, s.rf.carrier_hz).unwrap())
        };
        assert_eq!(run(1).values, run(4).values);
    }

    #[test]
    fn grid_cap_enforced() {
        let s = los_scenario(Vec3::new(0.0, 0.0, -1.4));
        let y = forward::synthesize_snapshot(&s, &[0.0], NoiseModel::Off).unwrap();
        let grid = GridSpec::new(-5.0, 5.0, -5.0, 5.0, -1.4, 0.01).unwrap();
        assert!(matches!(
            compute_image_with_cap(&y, &grid, &s.aps, s.rf.carrier_hz, 1000),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn ambiguity_identity_and_symmetry() {
        let aps = ceiling_aps();
        let x = Vec3::new(0.0, 0.0, -1.4);
        let x2 = Vec3::new(0.0, 0.05, -1.4);
        assert_abs_diff_eq!(ambiguity(x, x, &aps, 3.0e9), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            ambiguity(x, x2, &aps, 3.0e9),
            ambiguity(x2, x, &aps, 3.0e9),
            epsilon = 1e-13
        );
    }

    #[test]
    fn ambiguity_frozen_regression_value() {
        // direct evaluation of the normalized steering correlation for the
        // ceiling layout, x = (0,0,-1.4), x~ = (0,0.05,-1.4); frozen constant
        let v = ambiguity(
            Vec3::new(0.0, 0.05, -1.4),
            Vec3::new(0.0, 0.0, -1.4),
            &ceiling_aps(),
            3.0e9,
        );
        assert_abs_diff_eq!(v, AMBIGUITY_REGRESSION, epsilon = 1e-12);
    }

    /// Computed once with an independent complex-arithmetic oracle
    /// (numpy: |vdot(a(x~), a(x))| / (||a(x~)|| ||a(x)||)).
    const AMBIGUITY_REGRESSION: f64 = 0.6005816868995565;

    #[test]
    fn argmax_tie_breaks_to_lowest_index() {
        let grid = GridSpec::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.5).unwrap();
        let img = SpatialImage { grid, values: vec![3.0; grid.num_cells()] };
        let (idx, _, v) = argmax_cell(&img).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(v, 3.0);

        let mut values = vec![0.0; grid.num_cells()];
        values[5] = 9.0;
        let img = SpatialImage { grid, values };
        assert_eq!(argmax_cell(&img).unwrap().0, 5);
    }

    #[test]
    fn empty_image_rejected() {
        let grid = GridSpec::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.5).unwrap();
        let img = SpatialImage { grid, values: vec![] };
        assert!(matches!(argmax_cell(&img), Err(Error::EmptyImage)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ambiguity_bounded(
            x1 in -6.0..6.0f64, y1 in -10.0..16.0f64,
            x2 in -6.0..6.0f64, y2 in -10.0..16.0f64,
        ) {
            let a = ambiguity(
                Vec3::new(x1, y1, -1.4),
                Vec3::new(x2, y2, -1.4),
                &ceiling_aps(),
                3.0e9,
            );
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn additivity_bound(seed in 0u64..1000) {
            let s = los_scenario(Vec3::new(0.5, -2.5, -1.4));
            let y1 = forward::synthesize_snapshot(&s, &[0.4], NoiseModel::Seeded(seed)).unwrap();
            let y2 = forward::synthesize_snapshot(&s, &[2.9], NoiseModel::Seeded(seed + 1)).unwrap();
            let sum = Snapshot::from_samples(
                y1.samples.iter().zip(&y2.samples).map(|(a, b)| a + b).collect(),
            );
            let a = steering_vector(&s.aps, Vec3::new(-1.0, 1.0, -1.4), s.rf.carrier_hz);
            let lhs = image_value(&sum, &a).unwrap();
            let rhs = image_value(&y1, &a).unwrap() + image_value(&y2, &a).unwrap();
            prop_assert!(lhs <= 2.0 * rhs * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn mainlobe_dominates_for_on_grid_los(ix in 0usize..17, iy in 0usize..33) {
            // single LoS path at any 0.5 m lattice point of the covered floor
            let ue = Vec3::new(-4.0 + 0.5 * ix as f64, -8.0 + 0.5 * iy as f64, -1.4);
            let s = los_scenario(ue);
            let y = forward::synthesize_snapshot(&s, &[1.0], NoiseModel::Off).unwrap();
            let grid = GridSpec::new(-5.0, 5.0, -10.0, 16.0, -1.4, 0.5).unwrap();
            let img = compute_image(&y, &grid, &s.aps, s.rf.carrier_hz).unwrap();
            let (_, pos, _) = argmax_cell(&img).unwrap();
            prop_assert!(pos.distance(ue) < 1e-9, "peak {pos:?} truth {ue:?}");
        }
    }
}
