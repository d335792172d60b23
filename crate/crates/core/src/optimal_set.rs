//! The capacity-maximizing placement set and its transformations.
//!
//! One orthogonalizing placement puts UAV `n = i*M_z + j` at the uniform
//! scaled grid `x = i * S_x * eps_n / M_x`, `z = j * S_z * eps_n / M_z`.
//! Orthogonality is preserved by swarm-wide shifts scaled per UAV
//! (`delta * S * eps_n`), by per-UAV integer lattice jumps (`f_n * S * eps_n`),
//! and by permuting which UAV occupies which grid slot. Membership in the set
//! reduces to fractional arithmetic: `x_n / (S_x eps_n)` must match
//! `i/M_x + delta_x` modulo 1 under some injective slot map.

use nalgebra::Vector3;

use crate::assignment;
use crate::geometry::{EnvConstants, GroundArray, SwarmState};
use crate::{Error, Result};

/// Generating parameters of a placement inside the set.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementParams {
    /// Grid slot `(i, j)` occupied by each UAV (injective).
    pub slots: Vec<(usize, usize)>,
    /// Integer lattice jumps per UAV.
    pub jumps: Vec<(i64, i64)>,
    /// Common shift, canonicalized to `[-1/2, 1/2)`.
    pub shift: (f64, f64),
    /// Normalized y-separation per UAV.
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    pub recovered: Option<PlacementParams>,
}

/// Fractional part in `[0, 1)`.
pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Wraps into `[-1/2, 1/2)`.
pub(crate) fn wrap_half(x: f64) -> f64 {
    let w = x - (x + 0.5).floor();
    if w >= 0.5 {
        -0.5
    } else {
        w
    }
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Places `M` UAVs on the uniform scaled grid at the given y coordinates.
pub fn lemma1_grid(env: &EnvConstants, gs: &GroundArray, y_coords: &[f64]) -> Result<SwarmState> {
    let m = gs.antennas();
    if y_coords.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: y_coords.len() });
    }
    let mut positions = Vec::with_capacity(m);
    for (n, &y) in y_coords.iter().enumerate() {
        if y <= 0.0 {
            return Err(Error::BehindArray { index: n, y });
        }
        let (i, j) = gs.antenna_grid_index(n);
        let eps = env.eps_of(y);
        positions.push(Vector3::new(
            i as f64 * env.s_x() * eps / gs.m_x() as f64,
            y,
            j as f64 * env.s_z() * eps / gs.m_z() as f64,
        ));
    }
    Ok(SwarmState::new(positions))
}

/// Shifts every UAV by `(delta_x * S_x * eps_n, 0, delta_z * S_z * eps_n)`.
pub fn apply_scaled_shift(swarm: &SwarmState, env: &EnvConstants, delta_x: f64, delta_z: f64) -> SwarmState {
    let mut out = swarm.clone();
    for p in out.positions_mut() {
        let eps = env.eps_of(p.y);
        p.x += delta_x * env.s_x() * eps;
        p.z += delta_z * env.s_z() * eps;
    }
    out
}

/// Translates UAV `n` by `(f_n * S_x * eps_n, 0, g_n * S_z * eps_n)`.
pub fn apply_integer_jumps(swarm: &SwarmState, env: &EnvConstants, f: &[i64], g: &[i64]) -> Result<SwarmState> {
    if f.len() != swarm.n() || g.len() != swarm.n() {
        return Err(Error::LengthMismatch { expected: swarm.n(), got: f.len().min(g.len()) });
    }
    let mut out = swarm.clone();
    for (n, p) in out.positions_mut().iter_mut().enumerate() {
        let eps = env.eps_of(p.y);
        p.x += f[n] as f64 * env.s_x() * eps;
        p.z += g[n] as f64 * env.s_z() * eps;
    }
    Ok(out)
}

/// Reconstructs positions from generating parameters (inverse of recovery).
pub fn construct(params: &PlacementParams, env: &EnvConstants, gs: &GroundArray) -> SwarmState {
    let positions = params
        .slots
        .iter()
        .zip(&params.jumps)
        .zip(&params.eps)
        .map(|((&(i, j), &(f, g)), &eps)| {
            let ux = i as f64 / gs.m_x() as f64 + f as f64 + params.shift.0;
            let uz = j as f64 / gs.m_z() as f64 + g as f64 + params.shift.1;
            Vector3::new(ux * env.s_x() * eps, eps * env.range_r(), uz * env.s_z() * eps)
        })
        .collect();
    SwarmState::new(positions)
}

/// Exhaustive minimum-cost injective assignment, used at small array sizes.
fn exhaustive_assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut (Vec<usize>, f64), acc: f64) {
        if acc >= best.1 {
            return;
        }
        if row == cost.len() {
            *best = (cur.clone(), acc);
            return;
        }
        for col in 0..cost[0].len() {
            if !used[col] {
                used[col] = true;
                cur.push(col);
                rec(cost, row + 1, used, cur, best, acc + cost[row][col]);
                cur.pop();
                used[col] = false;
            }
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    rec(cost, 0, &mut vec![false; cost[0].len()], &mut Vec::new(), &mut best, 0.0);
    best
}

/// Tests membership in the capacity-maximizing set and recovers the
/// generating parameters on success.
///
/// A placement is a member when there exist a shift, integer jumps, and an
/// injective slot map making every fractional coordinate match its slot
/// within `tol` (circular distance in lattice units, per axis).
///
/// The shift is only identifiable modulo the slot pitch `1/M` per axis
/// (relabeling slots absorbs whole pitches), so the recovered shift is the
/// canonical representative closest to zero.
pub fn membership_test(swarm: &SwarmState, env: &EnvConstants, gs: &GroundArray, tol: f64) -> MembershipReport {
    let n = swarm.n();
    let m = gs.antennas();
    let not_member = MembershipReport { member: false, recovered: None };
    if n == 0 || n > m {
        return not_member;
    }
    let (m_x, m_z) = (gs.m_x() as f64, gs.m_z() as f64);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    for p in swarm.positions() {
        let e = env.eps_of(p.y);
        if e <= 0.0 {
            return not_member;
        }
        u.push(p.x / (env.s_x() * e));
        v.push(p.z / (env.s_z() * e));
        eps.push(e);
    }
    let a: Vec<f64> = u.iter().map(|&x| frac(x)).collect();
    let b: Vec<f64> = v.iter().map(|&x| frac(x)).collect();

    // Anchor the candidate shift on UAV 0 occupying each possible slot.
    for i0 in 0..gs.m_x() {
        for j0 in 0..gs.m_z() {
            let mut dx = wrap_half(a[0] - i0 as f64 / m_x);
            let mut dz = wrap_half(b[0] - j0 as f64 / m_z);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    (0..m)
                        .map(|slot| {
                            let (i, j) = gs.antenna_grid_index(slot);
                            circ_dist(a[k], i as f64 / m_x + dx) + circ_dist(b[k], j as f64 / m_z + dz)
                        })
                        .collect()
                })
                .collect();
            let slot_of = if m <= 8 {
                exhaustive_assignment(&cost).0
            } else {
                match assignment::solve(&cost) {
                    Ok(sol) => sol.col_of_row,
                    Err(_) => continue,
                }
            };
            // refine the shift with the mean residual over the assignment
            let mean_rx = (0..n)
                .map(|k| wrap_half(a[k] - gs.antenna_grid_index(slot_of[k]).0 as f64 / m_x - dx))
                .sum::<f64>()
                / n as f64;
            let mean_rz = (0..n)
                .map(|k| wrap_half(b[k] - gs.antenna_grid_index(slot_of[k]).1 as f64 / m_z - dz))
                .sum::<f64>()
                / n as f64;
            dx = wrap_half(dx + mean_rx);
            dz = wrap_half(dz + mean_rz);
            let feasible = (0..n).all(|k| {
                let (i, j) = gs.antenna_grid_index(slot_of[k]);
                circ_dist(a[k], i as f64 / m_x + dx) <= tol && circ_dist(b[k], j as f64 / m_z + dz) <= tol
            });
            if !feasible {
                continue;
            }
            // canonicalize: slot labels can absorb multiples of 1/M along
            // each axis, so pick the representative with the smallest shift
            let kx = (dx * m_x).round() as i64;
            let kz = (dz * m_z).round() as i64;
            dx -= kx as f64 / m_x;
            dz -= kz as f64 / m_z;
            let slots: Vec<(usize, usize)> = slot_of
                .iter()
                .map(|&s| {
                    let (i, j) = gs.antenna_grid_index(s);
                    (
                        (i as i64 + kx).rem_euclid(gs.m_x() as i64) as usize,
                        (j as i64 + kz).rem_euclid(gs.m_z() as i64) as usize,
                    )
                })
                .collect();
            let jumps: Vec<(i64, i64)> = (0..n)
                .map(|k| {
                    let f = (u[k] - slots[k].0 as f64 / m_x - dx).round() as i64;
                    let g = (v[k] - slots[k].1 as f64 / m_z - dz).round() as i64;
                    (f, g)
                })
                .collect();
            return MembershipReport {
                member: true,
                recovered: Some(PlacementParams { slots, jumps, shift: (dx, dz), eps }),
            };
        }
    }
    not_member
}

/// Rigid uniform-rectangular baseline: the whole swarm moves to a planar
/// grid at the common range `y = mean(y_n)` with the grid centroid aligned to
/// the initial swarm centroid; UAVs take the nearest slots (exact assignment).
pub fn ura_baseline(init: &SwarmState, env: &EnvConstants, gs: &GroundArray) -> Result<SwarmState> {
    let n = init.n();
    let m = gs.antennas();
    if n == 0 {
        return Err(Error::EmptySwarm);
    }
    if n > m {
        return Err(Error::TooManyStreams { n, m });
    }
    let y_c = init.mean_y()?;
    let eps_c = env.eps_of(y_c);
    let pitch_x = env.s_x() * eps_c / gs.m_x() as f64;
    let pitch_z = env.s_z() * eps_c / gs.m_z() as f64;
    let centroid_x = init.positions().iter().map(|p| p.x).sum::<f64>() / n as f64;
    let centroid_z = init.positions().iter().map(|p| p.z).sum::<f64>() / n as f64;
    let x0 = centroid_x - (gs.m_x() - 1) as f64 / 2.0 * pitch_x;
    let z0 = centroid_z - (gs.m_z() - 1) as f64 / 2.0 * pitch_z;
    let slot_pos = |slot: usize| {
        let (i, j) = gs.antenna_grid_index(slot);
        Vector3::new(x0 + i as f64 * pitch_x, y_c, z0 + j as f64 * pitch_z)
    };
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..m).map(|slot| (init.position(k) - slot_pos(slot)).norm()).collect())
        .collect();
    let sol = assignment::solve(&cost)?;
    Ok(SwarmState::new((0..n).map(|k| slot_pos(sol.col_of_row[k])).collect()))
}
