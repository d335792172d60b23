//! Rate metrics and the uplink linear design.
//!
//! Capacity is `log2 det(I + rho * H^H H)`, evaluated through singular values
//! for stability, and is bounded by the single-user sum
//! `sum_n log2(1 + rho * ||h_n||^2)`, attained exactly when the channel
//! columns are mutually orthogonal. The per-stream quality of a placement is
//! therefore summarized by the Gram orthogonality residual
//! `max_{l != k} |G_{l,k}| / mean_l G_{l,l}`.
//!
//! The uplink receiver is the LMMSE combiner
//! `w_n = (N_0 N_f B I + P_T * sum_{i != n} h_i h_i^H)^{-1} h_n`, formed from
//! the estimated channel and scored against the true one. Both the transmit
//! power inside the interference covariance and the `||w_n||^2` noise term in
//! the SINR denominator are kept so the SINR is invariant to combiner
//! scaling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::channel::{ChannelMatrix, Scaling};
use crate::{Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Transmit power and receiver noise description.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    tx_power: f64,
    noise_psd: f64,
    bandwidth: f64,
    noise_figure: f64,
}

impl LinkBudget {
    /// All quantities linear SI: watts, watts/Hz, Hz, ratio.
    pub fn new(tx_power: f64, noise_psd: f64, bandwidth: f64, noise_figure: f64) -> Result<Self> {
        let budget = Self { tx_power, noise_psd, bandwidth, noise_figure };
        if !(budget.tx_power > 0.0 && budget.noise_power() > 0.0) {
            return Err(Error::InvalidBudget);
        }
        Ok(budget)
    }

    /// Convenience constructor from the usual dB units.
    pub fn from_db(tx_power_dbm: f64, noise_psd_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> Result<Self> {
        Self::new(
            dbm_to_watts(tx_power_dbm),
            dbm_to_watts(noise_psd_dbm_hz),
            bandwidth_hz,
            db_to_linear(noise_figure_db),
        )
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn noise_psd(&self) -> f64 {
        self.noise_psd
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn noise_figure(&self) -> f64 {
        self.noise_figure
    }

    /// Noise power `N_0 * B * N_f` in watts.
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth * self.noise_figure
    }

    /// Transmit SNR `rho = P_T / noise_power`.
    pub fn rho(&self) -> f64 {
        self.tx_power / self.noise_power()
    }
}

/// Per-placement rate summary.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub per_stream_sinr: Vec<f64>,
    pub sum_rate: f64,
    pub capacity: f64,
    pub single_user_bound: f64,
    pub gram_residual: f64,
}

fn check_finite(h: &ChannelMatrix) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteEntries)
    }
}

/// `log2 det(I + rho H^H H)` in bits/s/Hz.
pub fn capacity(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_finite(h)?;
    if rho < 0.0 {
        return Err(Error::OutOfRange { what: "rho", value: rho });
    }
    let sv = h.entries().clone().svd(false, false).singular_values;
    Ok(sv.iter().map(|s| (1.0 + rho * s * s).log2()).sum())
}

/// `sum_n log2(1 + rho ||h_n||^2)`, the orthogonal-columns capacity.
pub fn single_user_bound(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_finite(h)?;
    if rho < 0.0 {
        return Err(Error::OutOfRange { what: "rho", value: rho });
    }
    Ok((0..h.n())
        .map(|n| (1.0 + rho * h.entries().column(n).norm_squared()).log2())
        .sum())
}

/// `max_{l != k} |G_{l,k}| / mean_l G_{l,l}` for `G = H^H H`.
pub fn gram_orthogonality_residual(h: &ChannelMatrix) -> Result<f64> {
    check_finite(h)?;
    if h.n() < 2 {
        return Err(Error::NeedTwoStreams(h.n()));
    }
    let g = h.entries().adjoint() * h.entries();
    let diag_mean = (0..h.n()).map(|i| g[(i, i)].re).sum::<f64>() / h.n() as f64;
    let mut worst: f64 = 0.0;
    for l in 0..h.n() {
        for k in 0..h.n() {
            if l != k {
                worst = worst.max(g[(l, k)].norm());
            }
        }
    }
    Ok(worst / diag_mean)
}

/// LMMSE uplink: combiners from `h_est`, SINR scored against `h_true`.
pub fn lmmse_sum_rate(h_true: &ChannelMatrix, h_est: &ChannelMatrix, budget: &LinkBudget) -> Result<RateReport> {
    check_finite(h_true)?;
    check_finite(h_est)?;
    if h_true.scaling() != Scaling::PathLoss || h_est.scaling() != Scaling::PathLoss {
        return Err(Error::RequiresPathLoss);
    }
    if h_true.m() != h_est.m() || h_true.n() != h_est.n() {
        return Err(Error::LengthMismatch { expected: h_true.n(), got: h_est.n() });
    }
    let (m, n) = (h_true.m(), h_true.n());
    let noise = budget.noise_power();
    let p_t = budget.tx_power();

    let mut per_stream_sinr = Vec::with_capacity(n);
    for stream in 0..n {
        // covariance of interference-plus-noise under the estimated channel
        let mut cov = DMatrix::<Complex<f64>>::identity(m, m) * Complex::new(noise, 0.0);
        for other in (0..n).filter(|&i| i != stream) {
            let col = h_est.entries().column(other);
            for r in 0..m {
                for c in 0..m {
                    cov[(r, c)] += p_t * col[r] * col[c].conj();
                }
            }
        }
        let chol = nalgebra::linalg::Cholesky::new(cov).ok_or(Error::InvalidBudget)?;
        let w: DVector<Complex<f64>> = chol.solve(&h_est.entries().column(stream).into_owned());

        let dot = |col: usize| -> Complex<f64> {
            (0..m).map(|r| w[r].conj() * h_true.entries()[(r, col)]).sum()
        };
        let signal = p_t * dot(stream).norm_sqr();
        let mut denom = noise * w.norm_squared();
        for other in (0..n).filter(|&i| i != stream) {
            denom += p_t * dot(other).norm_sqr();
        }
        per_stream_sinr.push(signal / denom);
    }

    let sum_rate = per_stream_sinr.iter().map(|s| (1.0 + s).log2()).sum();
    let rho = budget.rho();
    Ok(RateReport {
        sum_rate,
        capacity: capacity(h_true, rho)?,
        single_user_bound: single_user_bound(h_true, rho)?,
        gram_residual: if n >= 2 { gram_orthogonality_residual(h_true)? } else { 0.0 },
        per_stream_sinr,
    })
}

/// Uplink linear design for an orthogonal channel: full-power diagonal
/// precoder `V = sqrt(P_T) I` and matched-filter combiner `W = H * M / ||H||_F`.
pub fn uplink_linear_design(
    h: &ChannelMatrix,
    budget: &LinkBudget,
) -> Result<(DMatrix<Complex<f64>>, DMatrix<Complex<f64>>)> {
    check_finite(h)?;
    if h.scaling() != Scaling::PathLoss {
        return Err(Error::RequiresPathLoss);
    }
    let norm = h.frobenius_norm_squared().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let v = DMatrix::identity(h.n(), h.n()) * Complex::new(budget.tx_power().sqrt(), 0.0);
    let w = h.entries() * Complex::new(h.m() as f64 / norm, 0.0);
    Ok((v, w))
}
