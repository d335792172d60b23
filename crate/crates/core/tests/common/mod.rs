//! Shared test support: independent oracles and samplers.
//!
//! Everything here is deliberately written from the defining formulas rather
//! than through the library's own channel/optimizer paths, so the tests check
//! two routes against each other.
#![allow(dead_code)]

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use swarm_mimo::geometry::{EnvConstants, GroundArray, SwarmState};
use swarm_mimo::rng::{stream, StreamPurpose};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn gs_6x2() -> GroundArray {
    GroundArray::new(6, 2, 1.0, 3.0).unwrap()
}

pub fn env_2km(gs: &GroundArray) -> EnvConstants {
    EnvConstants::for_range(gs, 0.06, 2000.0).unwrap()
}

pub fn test_rng(tag: u64) -> ChaCha8Rng {
    stream(tag, StreamPurpose::InitialPlacement, 0, 0)
}

/// Normalized channel built from the far-field phase algebra: the Taylor
/// expansion keeping only the antenna-position cross terms
/// `(i*d_x*x + j*d_z*z)/y`. This is the domain where the lattice
/// transformations are exactly invariant (the dropped quadratic antenna
/// terms scale as `d^2/(2y)` and vary only through `1/y`).
pub fn taylor_channel(swarm: &SwarmState, gs: &GroundArray, wavelength: f64) -> DMatrix<Complex<f64>> {
    let m = gs.antennas();
    let n = swarm.n();
    DMatrix::from_fn(m, n, |row, col| {
        let p = swarm.position(col);
        let q = gs.antenna_position(row);
        let d = p.y + (p.x * p.x + p.z * p.z) / (2.0 * p.y) - (q.x * p.x + q.z * p.z) / p.y;
        Complex::from_polar(1.0, -TWO_PI * d / wavelength)
    })
}

pub fn gram_residual_of(h: &DMatrix<Complex<f64>>) -> f64 {
    let g = h.adjoint() * h;
    let n = g.nrows();
    let diag = (0..n).map(|i| g[(i, i)].re).sum::<f64>() / n as f64;
    let mut worst: f64 = 0.0;
    for l in 0..n {
        for k in 0..n {
            if l != k {
                worst = worst.max(g[(l, k)].norm());
            }
        }
    }
    worst / diag
}

/// Closed-form far-field Gram of a uniform scaled grid: the column inner
/// product factors into two geometric sums, `sum_i exp(-j*2*pi*di*i*dx*ex/l)`
/// along each axis. Used to cross-check the Taylor-channel Gram.
pub fn geometric_sum_gram_entry(
    gs: &GroundArray,
    wavelength: f64,
    e_x: f64,
    e_z: f64,
    l: usize,
    k: usize,
) -> f64 {
    let (il, jl) = gs.antenna_grid_index(l);
    let (ik, jk) = gs.antenna_grid_index(k);
    let sum_axis = |count: usize, delta: f64| -> Complex<f64> {
        (0..count)
            .map(|c| Complex::from_polar(1.0, -TWO_PI / wavelength * delta * c as f64))
            .sum()
    };
    let sx = sum_axis(gs.m_x(), (ik as f64 - il as f64) * gs.d_x() * e_x);
    let sz = sum_axis(gs.m_z(), (jk as f64 - jl as f64) * gs.d_z() * e_z);
    (sx * sz).norm()
}

/// Uniformly random swarm in the reference box at 2 km.
pub fn random_box_swarm<R: Rng>(rng: &mut R, n: usize, box_dims: (f64, f64, f64)) -> SwarmState {
    SwarmState::new(
        (0..n)
            .map(|_| {
                Vector3::new(
                    (rng.random::<f64>() - 0.5) * box_dims.0,
                    2000.0 + (rng.random::<f64>() - 0.5) * box_dims.1,
                    (rng.random::<f64>() - 0.5) * box_dims.2,
                )
            })
            .collect(),
    )
}

/// Random member of the placement set constrained to the far field: grid at
/// a mildly spread range, random shift, wrap-minimizing integer jumps, and a
/// random slot permutation.
pub fn random_far_field_member<R: Rng>(
    rng: &mut R,
    gs: &GroundArray,
    env: &EnvConstants,
) -> SwarmState {
    let m = gs.antennas();
    let dx = rng.random::<f64>() - 0.5;
    let dz = rng.random::<f64>() - 0.5;
    let mut positions = Vec::with_capacity(m);
    for slot in 0..m {
        let (i, j) = gs.antenna_grid_index(slot);
        let y = 2000.0 + (rng.random::<f64>() - 0.5) * 80.0;
        let eps = env.eps_of(y);
        let ux = i as f64 / gs.m_x() as f64 + dx;
        let uz = j as f64 / gs.m_z() as f64 + dz;
        // jump to the lattice point nearest the array axis keeps the member
        // inside the far-field set
        let fx = -ux.round();
        let gz = -uz.round();
        positions.push(Vector3::new(
            (ux + fx) * env.s_x() * eps,
            y,
            (uz + gz) * env.s_z() * eps,
        ));
    }
    for k in (1..m).rev() {
        positions.swap(k, rng.random_range(0..=k));
    }
    SwarmState::new(positions)
}

/// Dense-grid + shrinking pattern refinement oracle for the shift
/// subproblem: 201x201 sweep of the box followed by compass descent.
pub fn shift_oracle(objective: &dyn Fn(f64, f64) -> f64) -> ((f64, f64), f64) {
    let mut best = ((0.0, 0.0), f64::INFINITY);
    for i in 0..=200 {
        for j in 0..=200 {
            let d = (-0.5 + i as f64 / 200.0, -0.5 + j as f64 / 200.0);
            let v = objective(d.0, d.1);
            if v < best.1 {
                best = (d, v);
            }
        }
    }
    let mut step = 1.0 / 200.0;
    let (mut cur, mut val) = best;
    while step > 1e-12 {
        let mut improved = false;
        for (sx, sz) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let cand = (
                (cur.0 + sx * step).clamp(-0.5, 0.5),
                (cur.1 + sz * step).clamp(-0.5, 0.5),
            );
            let v = objective(cand.0, cand.1);
            if v < val - 1e-15 {
                cur = cand;
                val = v;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (cur, val)
}
