//! Cluster-count selection and user grouping.
//!
//! Users are first sorted by descending normalized gain (done by the
//! caller; inputs here are already sorted). The pipeline is:
//!
//! 1. [`classify_alpha`] — estimate α, the number of users whose gains
//!    stand clearly above the rest (the "good channel" class).
//! 2. [`select_num_clusters`] — κ = α when α < N/2, else ⌊N/2⌋, so every
//!    cluster keeps at least two users.
//! 3. [`group_users`] — stride-κ grouping: cluster j takes the sorted
//!    users {j, j+κ, j+2κ, …}, pairing each strong user with evenly
//!    spaced weaker ones. When κ does not divide N the first N mod κ
//!    clusters naturally carry one extra user.
//!
//! [`build_clusters`] then materializes [`Cluster`] values with per-cluster
//! resource blocks (ω = cluster size unless overridden) and, for downlink,
//! the uniform share of the cell power budget.

use crate::domain::{Cluster, Direction, DomainError, SystemParams, UserChannel};
use crate::linear_to_db;
use thiserror::Error;

// ----------------------------------------------------------------------
// Configuration
// ----------------------------------------------------------------------

/// How α (the size of the high-gain class) is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaMode {
    /// Caller fixes α directly; must lie in `[1, N]`.
    Explicit(usize),
    /// α = position of the largest consecutive gain drop of at least
    /// `min_gap_db`; falls back to ⌊N/2⌋ when no drop is that large.
    LargestGap { min_gap_db: f64 },
    /// Target cluster size m ∈ `[2, N]`: α = ⌊N/m⌋, which drives κ to
    /// ⌊N/m⌋ and yields clusters of size m (plus one extra user in the
    /// first N mod κ clusters when κ does not divide N).
    ForcedClusterSize(usize),
}

impl Default for AlphaMode {
    /// 10 dB separates the two visible gain tiers in typical macro-cell
    /// user populations; smaller drops are treated as same-class noise.
    fn default() -> Self {
        AlphaMode::LargestGap { min_gap_db: 10.0 }
    }
}

/// Full clustering configuration: α policy plus link direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringConfig {
    pub alpha_mode: AlphaMode,
    pub direction: Direction,
}

/// Grouping result: per-cluster lists of 0-based indices into the
/// gain-sorted user list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub clusters: Vec<Vec<usize>>,
}

/// Invalid clustering input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusteringError {
    #[error("need at least 2 users to cluster, got {0}")]
    TooFewUsers(usize),

    #[error("explicit alpha {alpha} outside [1, {n}]")]
    AlphaOutOfRange { alpha: usize, n: usize },

    #[error("forced cluster size {m} outside [2, {n}]")]
    ForcedSizeOutOfRange { m: usize, n: usize },

    #[error("minimum gap must be strictly positive, got {0} dB")]
    NonPositiveMinGap(f64),

    #[error("cannot split {n} users into {kappa} clusters of at least 2 users each")]
    TooManyClusters { n: usize, kappa: usize },
}

// ----------------------------------------------------------------------
// Steps
// ----------------------------------------------------------------------

/// Sizes the high-gain user class.
///
/// `gains_sorted_desc` are linear normalized gains, strictly descending.
/// Returns α ∈ `[1, N]` (modes other than `Explicit` stay within
/// `[1, N−1]`).
pub fn classify_alpha(
    gains_sorted_desc: &[f64],
    mode: &AlphaMode,
) -> Result<usize, ClusteringError> {
    let n = gains_sorted_desc.len();
    if n < 2 {
        return Err(ClusteringError::TooFewUsers(n));
    }
    match *mode {
        AlphaMode::Explicit(alpha) => {
            if alpha < 1 || alpha > n {
                return Err(ClusteringError::AlphaOutOfRange { alpha, n });
            }
            Ok(alpha)
        }
        AlphaMode::ForcedClusterSize(m) => {
            if m < 2 || m > n {
                return Err(ClusteringError::ForcedSizeOutOfRange { m, n });
            }
            Ok(n / m)
        }
        AlphaMode::LargestGap { min_gap_db } => {
            if min_gap_db <= 0.0 || min_gap_db.is_nan() {
                return Err(ClusteringError::NonPositiveMinGap(min_gap_db));
            }
            // Largest consecutive drop in the dB domain; first index wins ties.
            let mut best_pos = 0usize; // α candidate: users 1..=best_pos are the high class
            let mut best_gap = f64::NEG_INFINITY;
            for (i, pair) in gains_sorted_desc.windows(2).enumerate() {
                let gap_db = linear_to_db(pair[0] / pair[1]);
                if gap_db > best_gap {
                    best_gap = gap_db;
                    best_pos = i + 1;
                }
            }
            if best_gap >= min_gap_db {
                Ok(best_pos)
            } else {
                // No tier boundary visible: split the population evenly.
                Ok(n / 2)
            }
        }
    }
}

/// Number of clusters κ: α while that leaves every cluster two users,
/// capped at ⌊n/2⌋ otherwise.
pub fn select_num_clusters(alpha: usize, n: usize) -> usize {
    if 2 * alpha < n {
        alpha
    } else {
        n / 2
    }
}

/// Stride-κ grouping of `n` gain-sorted users into κ clusters.
///
/// Cluster j (0-based) receives indices {j, j+κ, j+2κ, …}. The pattern is
/// identical for both directions; `direction` is the seam where an
/// alternative grouping strategy (e.g. strongest-with-weakest pairing)
/// could be introduced per direction.
pub fn group_users(
    n: usize,
    kappa: usize,
    direction: Direction,
) -> Result<ClusterAssignment, ClusteringError> {
    if kappa == 0 || n < 2 * kappa {
        return Err(ClusteringError::TooManyClusters { n, kappa });
    }
    let clusters = match direction {
        Direction::Downlink | Direction::Uplink => (0..kappa)
            .map(|j| (j..n).step_by(kappa).collect::<Vec<usize>>())
            .collect(),
    };
    Ok(ClusterAssignment { clusters })
}

/// Runs the full pipeline on sorted gains: α → κ → assignment.
pub fn plan(
    gains_sorted_desc: &[f64],
    config: &ClusteringConfig,
) -> Result<ClusterAssignment, ClusteringError> {
    let alpha = classify_alpha(gains_sorted_desc, &config.alpha_mode)?;
    let kappa = select_num_clusters(alpha, gains_sorted_desc.len());
    group_users(gains_sorted_desc.len(), kappa, config.direction)
}

/// Materializes clusters from an assignment.
///
/// Each cluster gets ω = its size in resource blocks unless
/// `rbs_override` fixes a common ω; downlink clusters receive the uniform
/// power split P_t = P_T · ω / Ω.
pub fn build_clusters(
    users_sorted: &[UserChannel],
    assignment: &ClusterAssignment,
    direction: Direction,
    rbs_override: Option<u32>,
    params: &SystemParams,
) -> Result<Vec<Cluster>, DomainError> {
    assignment
        .clusters
        .iter()
        .map(|indices| {
            let members: Vec<UserChannel> =
                indices.iter().map(|&i| users_sorted[i].clone()).collect();
            let rbs = rbs_override.unwrap_or(members.len() as u32);
            match direction {
                Direction::Downlink => {
                    Cluster::downlink(members, rbs, params.cluster_power_budget(rbs))
                }
                Direction::Uplink => Cluster::uplink(members, rbs),
            }
        })
        .collect()
}

// ----------------------------------------------------------------------
