//! Channel generation: exact-distance LOS, Rician fading, shadowing,
//! estimation error, and motion error.
//!
//! The normalized LOS entry for antenna `m` and UAV `n` is
//! `exp(-j*2*pi*||p_n - q_m|| / lambda)`; the path-loss variant scales it by
//! `lambda / (4*pi*||p_n - q_m||)`. Distances are always exact Euclidean —
//! the first-order Taylor expansion lives only inside the optimizers, so
//! tests can measure the approximation error instead of assuming it.
//!
//! The Rician channel is `H = sqrt(K/(K+1)) H_LOS + sqrt(1/(K+1)) H_NLOS`
//! with i.i.d. circularly-symmetric Gaussian NLOS entries power-matched to
//! the LOS component: per-entry variance `||H_LOS||_F^2 / (M*N)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{GroundArray, SwarmState};
use crate::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Entry scaling convention of a channel matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// Unit-modulus LOS entries.
    Normalized,
    /// Entries carry the free-space amplitude `lambda/(4*pi*d)`.
    PathLoss,
}

/// How the matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Los,
    Rician,
    Estimated,
}

/// Complex `M x N` channel between the ground array (rows) and the UAVs (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex<f64>>,
    scaling: Scaling,
    provenance: Provenance,
}

impl ChannelMatrix {
    pub fn from_entries(entries: DMatrix<Complex<f64>>, scaling: Scaling, provenance: Provenance) -> Self {
        Self { entries, scaling, provenance }
    }

    pub fn entries(&self) -> &DMatrix<Complex<f64>> {
        &self.entries
    }

    /// Antenna count (rows).
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    /// Stream count (columns).
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex<f64> {
        self.entries[(m, n)]
    }

    /// Phase of entry `(m, n)` reduced to `[0, 2*pi)`.
    pub fn phase(&self, m: usize, n: usize) -> f64 {
        self.entries[(m, n)].arg().rem_euclid(TWO_PI)
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }
}

/// Builds the exact-distance LOS channel.
pub fn los_channel(
    swarm: &SwarmState,
    gs: &GroundArray,
    wavelength: f64,
    scaling: Scaling,
) -> Result<ChannelMatrix> {
    if swarm.n() == 0 {
        return Err(Error::EmptySwarm);
    }
    if swarm.n() > gs.antennas() {
        return Err(Error::TooManyStreams { n: swarm.n(), m: gs.antennas() });
    }
    if wavelength <= 0.0 {
        return Err(Error::OutOfRange { what: "wavelength", value: wavelength });
    }
    for (index, p) in swarm.positions().iter().enumerate() {
        if p.y <= 0.0 {
            return Err(Error::BehindArray { index, y: p.y });
        }
    }
    let (m, n) = (gs.antennas(), swarm.n());
    let mut entries = DMatrix::zeros(m, n);
    for (col, p) in swarm.positions().iter().enumerate() {
        for row in 0..m {
            let d = (p - gs.antenna_position(row)).norm();
            if d == 0.0 {
                return Err(Error::CoincidentPositions { uav: col, antenna: row });
            }
            let phase = -TWO_PI * d / wavelength;
            let amp = match scaling {
                Scaling::Normalized => 1.0,
                Scaling::PathLoss => wavelength / (4.0 * std::f64::consts::PI * d),
            };
            entries[(row, col)] = Complex::from_polar(amp, phase);
        }
    }
    Ok(ChannelMatrix { entries, scaling, provenance: Provenance::Los })
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<f64> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re * s, im * s)
}

/// Mixes the LOS channel with power-matched NLOS scattering.
///
/// `k_factor` is linear; `f64::INFINITY` returns the input unchanged. Draws
/// are column-major (per UAV, then per antenna), so realizations are
/// reproducible for a given generator state.
pub fn rician_channel<R: Rng + ?Sized>(
    h_los: &ChannelMatrix,
    k_factor: f64,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if h_los.scaling != Scaling::PathLoss {
        return Err(Error::RequiresPathLoss);
    }
    if k_factor < 0.0 || k_factor.is_nan() {
        return Err(Error::NegativeKFactor(k_factor));
    }
    if k_factor.is_infinite() {
        return Ok(h_los.clone());
    }
    let (m, n) = (h_los.m(), h_los.n());
    let variance = h_los.frobenius_norm_squared() / (m * n) as f64;
    let los_w = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos_w = (1.0 / (k_factor + 1.0)).sqrt();
    let mut entries = DMatrix::zeros(m, n);
    for col in 0..n {
        for row in 0..m {
            entries[(row, col)] =
                los_w * h_los.entries[(row, col)] + nlos_w * complex_gaussian(rng, variance);
        }
    }
    Ok(ChannelMatrix { entries, scaling: Scaling::PathLoss, provenance: Provenance::Rician })
}

/// Applies independent log-normal shadowing per UAV: column `n` is scaled by
/// `10^(g_n/20)` with `g_n ~ Normal(0, sigma_db^2)`.
pub fn apply_shadowing<R: Rng + ?Sized>(h: &ChannelMatrix, sigma_db: f64, rng: &mut R) -> ChannelMatrix {
    let mut entries = h.entries.clone();
    if sigma_db > 0.0 {
        for col in 0..h.n() {
            let g: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_db;
            let scale = 10f64.powf(g / 20.0);
            for row in 0..h.m() {
                entries[(row, col)] *= scale;
            }
        }
    }
    ChannelMatrix { entries, scaling: h.scaling, provenance: h.provenance }
}

/// Training-based channel estimate `H_est = H + H_err`.
///
/// The error entries are i.i.d. complex Gaussian with variance
/// `||H||_F^2/(M*N) * 1/(1 + snr*t_tau)`; large `t_tau` makes the estimate
/// exact. `snr` is the per-entry receive SNR of the training symbols.
pub fn estimate_channel<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    snr: f64,
    t_tau: u32,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if snr < 0.0 || snr.is_nan() {
        return Err(Error::NegativeSnr(snr));
    }
    let (m, n) = (h.m(), h.n());
    let variance = h.frobenius_norm_squared() / (m * n) as f64 / (1.0 + snr * t_tau as f64);
    let mut entries = h.entries.clone();
    for col in 0..n {
        for row in 0..m {
            entries[(row, col)] += complex_gaussian(rng, variance);
        }
    }
    Ok(ChannelMatrix { entries, scaling: h.scaling, provenance: Provenance::Estimated })
}

/// Offsets every coordinate of every UAV by `Normal(0, sigma^2)`.
pub fn perturb_positions<R: Rng + ?Sized>(swarm: &SwarmState, sigma: f64, rng: &mut R) -> SwarmState {
    let mut out = swarm.clone();
    if sigma > 0.0 {
        for p in out.positions_mut() {
            for axis in 0..3 {
                p[axis] += rng.sample::<f64, _>(StandardNormal) * sigma;
            }
        }
    }
    out
}

/// Disturbance switches for a simulated link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisturbanceConfig {
    /// Linear Rician K-factor; `f64::INFINITY` disables NLOS scattering.
    pub rician_k: f64,
    /// Log-normal shadowing standard deviation in dB; 0 disables.
    pub shadowing_sigma_db: f64,
    /// Training symbols `T_tau`; 0 means perfect estimation.
    pub est_training_symbols: u32,
    /// Per-axis motion error standard deviation in meters; 0 disables.
    pub motion_sigma: f64,
    /// Base seed for all disturbance streams.
    pub rng_seed: u64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            rician_k: f64::INFINITY,
            shadowing_sigma_db: 0.0,
            est_training_symbols: 0,
            motion_sigma: 0.0,
            rng_seed: 0,
        }
    }
}

impl DisturbanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rician_k < 0.0 || self.rician_k.is_nan() {
            return Err(Error::NegativeKFactor(self.rician_k));
        }
        if self.shadowing_sigma_db < 0.0 {
            return Err(Error::OutOfRange { what: "shadowing_sigma_db", value: self.shadowing_sigma_db });
        }
        if self.motion_sigma < 0.0 {
            return Err(Error::OutOfRange { what: "motion_sigma", value: self.motion_sigma });
        }
        Ok(())
    }

    pub fn ideal(&self) -> bool {
        self.rician_k.is_infinite()
            && self.shadowing_sigma_db == 0.0
            && self.est_training_symbols == 0
            && self.motion_sigma == 0.0
    }
}
