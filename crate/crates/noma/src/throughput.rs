//! Achievable-rate evaluation for NOMA clusters and the OMA baseline.
//!
//! Downlink NOMA: user `i` decodes after cancelling the (stronger-gain)
//! users 1..i−1, so its interference is the power spent on the weaker
//! users' signals it cannot cancel — scaled by its *own* gain, because
//! everything arrives over the same channel:
//!
//! ```text
//! R̂_i = ωB log₂(1 + P_i γ_i / (γ_i Σ_{j<i} P_j + ω))
//! ```
//!
//! Uplink NOMA: the base station decodes strongest-first, so user `i`
//! sees the still-undecoded weaker users j > i, each arriving over its
//! own channel:
//!
//! ```text
//! R̂_i = ωB log₂(1 + P_i γ_i / (Σ_{j>i} P_j γ_j + ω))
//! ```
//!
//! The `ω` in the denominators is the noise term: gains are normalized
//! per resource block (γ = h/(N₀B)), so ω resource blocks contribute ω
//! units of noise.
//!
//! The OMA baseline splits the cluster's ω resource blocks evenly among
//! its users (fractional shares allowed) and, on the downlink, splits the
//! power budget evenly too. It is deliberately isolated in
//! [`oma_cluster_sum`] so alternative baselines can be swapped in without
//! touching the NOMA side.

use crate::domain::{AllocationReport, Cluster, Direction, PowerAllocation, SystemParams};

/// Downlink achievable rate of user `i` (0-based), bits/s.
///
/// `powers` holds the cluster's transmit powers in user order. The sum
/// over stronger users is empty for `i = 0`: the strongest user cancels
/// everyone and gets an interference-free link.
pub fn dl_user_rate(cluster: &Cluster, powers: &[f64], i: usize, params: &SystemParams) -> f64 {
    let omega = cluster.omega();
    let gamma = cluster.gain(i);
    let interference: f64 = powers[..i].iter().sum::<f64>() * gamma;
    let sinr = powers[i] * gamma / (interference + omega);
    omega * params.rb_bandwidth * (1.0 + sinr).log2()
}

/// Uplink achievable rate of user `i` (0-based), bits/s.
///
/// The sum over weaker users is empty for `i = m − 1`: the weakest user
/// is decoded last and gets an interference-free rate.
pub fn ul_user_rate(cluster: &Cluster, powers: &[f64], i: usize, params: &SystemParams) -> f64 {
    let omega = cluster.omega();
    let interference: f64 = powers[i + 1..]
        .iter()
        .zip(cluster.users()[i + 1..].iter())
        .map(|(p, u)| p * u.gain)
        .sum();
    let sinr = powers[i] * cluster.gain(i) / (interference + omega);
    omega * params.rb_bandwidth * (1.0 + sinr).log2()
}

/// Rate of user `i` under the cluster's own direction.
pub fn user_rate(cluster: &Cluster, powers: &[f64], i: usize, params: &SystemParams) -> f64 {
    match cluster.direction() {
        Direction::Downlink => dl_user_rate(cluster, powers, i, params),
        Direction::Uplink => ul_user_rate(cluster, powers, i, params),
    }
}

/// Sum throughput of the cluster under `powers`, bits/s.
pub fn sum_rate(cluster: &Cluster, powers: &[f64], params: &SystemParams) -> f64 {
    (0..cluster.size())
        .map(|i| user_rate(cluster, powers, i, params))
        .sum()
}

/// Sum throughput of the same users served orthogonally, bits/s.
///
/// Each of the m users gets a bandwidth share of ω/m resource blocks.
/// Downlink power is split evenly (P_t/m per user); uplink users each
/// transmit at the full per-UE budget on their own share. Because gains
/// are normalized per resource block, a user occupying ω/m blocks sees
/// ω/m units of noise, so the per-user SNR simplifies to
/// `P_t γ_i / ω` (downlink) and `P_t′ γ_i m / ω` (uplink).
pub fn oma_cluster_sum(cluster: &Cluster, params: &SystemParams) -> f64 {
    let m = cluster.size() as f64;
    let omega = cluster.omega();
    let share_bw = omega / m * params.rb_bandwidth;
    cluster
        .users()
        .iter()
        .map(|u| {
            let snr = match cluster.direction() {
                Direction::Downlink => cluster.power_budget() * u.gain / omega,
                Direction::Uplink => params.ue_power_budget * u.gain * m / omega,
            };
            share_bw * (1.0 + snr).log2()
        })
        .sum()
}

/// Materializes the full per-cluster outcome for an allocation: per-user
/// rates, their sum, and the OMA baseline sum for the same users.
pub fn report(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> AllocationReport {
    let rates: Vec<f64> = (0..cluster.size())
        .map(|i| user_rate(cluster, &alloc.powers, i, params))
        .collect();
    AllocationReport {
        direction: cluster.direction(),
        user_ids: cluster.users().iter().map(|u| u.user_id).collect(),
        gains: cluster.users().iter().map(|u| u.gain).collect(),
        powers: alloc.powers.clone(),
        rates: rates.clone(),
        noma_sum: rates.iter().sum(),
        oma_sum: oma_cluster_sum(cluster, params),
        signature: alloc.signature.clone(),
    }
}

// ----------------------------------------------------------------------
