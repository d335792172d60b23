//! Ground array and swarm geometry.
//!
//! The ground station (GS) frame puts the array in the x-z plane with antenna
//! `(0, 0)` at the origin and boresight along +y: antenna `m = i*M_z + j`
//! sits at `[i*d_x, 0, j*d_z]`. Scenario-world coordinates (x east, y ground
//! range, z up, GS mounted at `base_height` and tilted by `elevation_tilt`
//! about the x-axis) are rotated into this frame before any channel math, so
//! the placement algebra stays frame-exact.
//!
//! The environment constants `S_x = lambda*R/d_x` and `S_z = lambda*R/d_z`
//! are the spatial periods of the capacity-maximizing placement lattice; `R`
//! is the mean y-separation of the swarm.

use nalgebra::Vector3;

use crate::{Error, Result};

/// Uniform rectangular ground array plus its scenario pose.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundArray {
    m_x: usize,
    m_z: usize,
    d_x: f64,
    d_z: f64,
    elevation_tilt: f64,
    base_height: f64,
}

impl GroundArray {
    pub fn new(m_x: usize, m_z: usize, d_x: f64, d_z: f64) -> Result<Self> {
        if m_x == 0 || m_z == 0 {
            return Err(Error::InvalidConfig("array dimensions must be positive".into()));
        }
        if d_x <= 0.0 || d_z <= 0.0 {
            return Err(Error::InvalidConfig("antenna spacing must be positive".into()));
        }
        Ok(Self { m_x, m_z, d_x, d_z, elevation_tilt: 0.0, base_height: 0.0 })
    }

    /// Sets the scenario pose (rotation of boresight above horizontal, mount height).
    pub fn with_pose(mut self, elevation_tilt: f64, base_height: f64) -> Self {
        self.elevation_tilt = elevation_tilt;
        self.base_height = base_height;
        self
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_z(&self) -> usize {
        self.m_z
    }

    pub fn d_x(&self) -> f64 {
        self.d_x
    }

    pub fn d_z(&self) -> f64 {
        self.d_z
    }

    pub fn elevation_tilt(&self) -> f64 {
        self.elevation_tilt
    }

    pub fn base_height(&self) -> f64 {
        self.base_height
    }

    /// Total antenna count `M = M_x * M_z`.
    pub fn antennas(&self) -> usize {
        self.m_x * self.m_z
    }

    /// Grid indices `(i, j)` of antenna `m = i*M_z + j`.
    pub fn antenna_grid_index(&self, m: usize) -> (usize, usize) {
        debug_assert!(m < self.antennas());
        (m / self.m_z, m % self.m_z)
    }

    /// Flat index of the antenna at grid `(i, j)`.
    pub fn antenna_flat_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.m_x && j < self.m_z);
        i * self.m_z + j
    }

    /// Position of antenna `m` in the GS frame.
    pub fn antenna_position(&self, m: usize) -> Vector3<f64> {
        let (i, j) = self.antenna_grid_index(m);
        Vector3::new(i as f64 * self.d_x, 0.0, j as f64 * self.d_z)
    }

    pub fn aperture_x(&self) -> f64 {
        self.m_x as f64 * self.d_x
    }

    pub fn aperture_z(&self) -> f64 {
        self.m_z as f64 * self.d_z
    }

    /// Maps a scenario-world point into the GS frame.
    pub fn world_to_frame(&self, p: Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.elevation_tilt.sin_cos();
        let rel = Vector3::new(p.x, p.y, p.z - self.base_height);
        Vector3::new(rel.x, rel.y * c + rel.z * s, -rel.y * s + rel.z * c)
    }

    /// Inverse of [`GroundArray::world_to_frame`].
    pub fn frame_to_world(&self, p: Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.elevation_tilt.sin_cos();
        Vector3::new(p.x, p.y * c - p.z * s, p.y * s + p.z * c + self.base_height)
    }
}

/// Ordered UAV positions in the GS frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SwarmState {
    positions: Vec<Vector3<f64>>,
}

impl SwarmState {
    pub fn new(positions: Vec<Vector3<f64>>) -> Self {
        Self { positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn position(&self, n: usize) -> Vector3<f64> {
        self.positions[n]
    }

    pub fn positions_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.positions
    }

    /// Mean y-separation `R` of the swarm.
    pub fn mean_y(&self) -> Result<f64> {
        if self.positions.is_empty() {
            return Err(Error::EmptySwarm);
        }
        Ok(self.positions.iter().map(|p| p.y).sum::<f64>() / self.n() as f64)
    }

    /// Per-UAV distance to the same UAV in `other`.
    pub fn travel_to(&self, other: &SwarmState) -> Result<Vec<f64>> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: other.n() });
        }
        Ok(self
            .positions
            .iter()
            .zip(&other.positions)
            .map(|(a, b)| (a - b).norm())
            .collect())
    }

    fn check_in_front(&self) -> Result<()> {
        for (index, p) in self.positions.iter().enumerate() {
            if p.y <= 0.0 {
                return Err(Error::BehindArray { index, y: p.y });
            }
        }
        Ok(())
    }
}

/// Environment constants tying wavelength, range, and array spacing together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvConstants {
    wavelength: f64,
    range_r: f64,
    s_x: f64,
    s_z: f64,
}

impl EnvConstants {
    /// Constants for an explicit range `R` (used by sweeps and baselines).
    pub fn for_range(gs: &GroundArray, wavelength: f64, range_r: f64) -> Result<Self> {
        if wavelength <= 0.0 {
            return Err(Error::OutOfRange { what: "wavelength", value: wavelength });
        }
        if range_r <= 0.0 {
            return Err(Error::OutOfRange { what: "range_r", value: range_r });
        }
        Ok(Self {
            wavelength,
            range_r,
            s_x: wavelength * range_r / gs.d_x(),
            s_z: wavelength * range_r / gs.d_z(),
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn range_r(&self) -> f64 {
        self.range_r
    }

    pub fn s_x(&self) -> f64 {
        self.s_x
    }

    pub fn s_z(&self) -> f64 {
        self.s_z
    }

    /// Normalized y-separation `eps = y / R`.
    pub fn eps_of(&self, y: f64) -> f64 {
        y / self.range_r
    }

    /// Per-UAV `eps_n` for a swarm.
    pub fn eps(&self, swarm: &SwarmState) -> Vec<f64> {
        swarm.positions().iter().map(|p| self.eps_of(p.y)).collect()
    }
}

/// Derives the environment constants from a swarm's realized mean range.
pub fn env_constants(gs: &GroundArray, swarm: &SwarmState, wavelength: f64) -> Result<EnvConstants> {
    swarm.check_in_front()?;
    EnvConstants::for_range(gs, wavelength, swarm.mean_y()?)
}

/// Outcome of the far-field check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarFieldReport {
    pub ok: bool,
    pub worst_ratio: f64,
}

/// Checks how deep the swarm sits in the far field of the array.
///
/// The ratios are `|y_n - y_m|/y_n`, `|x_n|/y_n`, `|z_n|/y_n`, and the
/// aperture terms `M_x d_x / y_n`, `M_z d_z / y_n`; the report is `ok` when
/// the largest stays at or below `ratio_threshold`.
pub fn far_field_report(swarm: &SwarmState, gs: &GroundArray, ratio_threshold: f64) -> FarFieldReport {
    let mut worst: f64 = 0.0;
    for p in swarm.positions() {
        let y = p.y;
        worst = worst
            .max(p.x.abs() / y)
            .max(p.z.abs() / y)
            .max(gs.aperture_x() / y)
            .max(gs.aperture_z() / y);
        for q in swarm.positions() {
            worst = worst.max((p.y - q.y).abs() / y);
        }
    }
    FarFieldReport { ok: worst <= ratio_threshold, worst_ratio: worst }
}
