//! Shared value types and unit conversions.
//!
//! Everything downstream works in linear units: powers in watts,
//! bandwidths in hertz, rates in bits/s, and channel gains as the
//! dimensionless normalized ratio γ = h/(N₀B) (channel gain over noise
//! power per resource block). The dB/dBm helpers here are the only
//! places logarithmic units appear.
//!
//! All types are immutable value objects and safe to share across
//! threads.

use thiserror::Error;

// ----------------------------------------------------------------------
// Unit conversions
// ----------------------------------------------------------------------

/// Converts a power level in dBm to watts: `10^((p − 30)/10)`.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm. Inverse of [`dbm_to_watts`].
pub fn watts_to_dbm(p_watts: f64) -> f64 {
    10.0 * p_watts.log10() + 30.0
}

/// Converts a dB ratio to a linear ratio: `10^(g/10)`.
pub fn db_to_linear(g_db: f64) -> f64 {
    10f64.powf(g_db / 10.0)
}

/// Converts a linear ratio to dB. Inverse of [`db_to_linear`].
pub fn linear_to_db(g: f64) -> f64 {
    10.0 * g.log10()
}

// ----------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------

/// Validation failure while constructing a domain object.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("system parameter {name} must be strictly positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },

    #[error("cluster needs at least 2 users, got {0}")]
    TooFewUsers(usize),

    #[error("cluster needs at least 1 resource block")]
    NoResourceBlocks,

    #[error("user {user_id}: channel gain must be strictly positive, got {gain}")]
    NonPositiveGain { user_id: u32, gain: f64 },

    #[error("user {user_id}: minimum rate must be strictly positive, got {rate}")]
    NonPositiveRate { user_id: u32, rate: f64 },

    #[error(
        "users must be sorted strictly descending by gain; \
         position {position} has gain {gain} after {previous}"
    )]
    GainsNotDescending {
        position: usize,
        gain: f64,
        previous: f64,
    },

    #[error(
        "users at positions {position} and {} have identical gain {gain}; \
         tied gains are rejected (perturb or deduplicate upstream)",
        position + 1
    )]
    TiedGains { position: usize, gain: f64 },

    #[error("downlink cluster power budget must be strictly positive, got {0}")]
    NonPositiveBudget(f64),
}

// ----------------------------------------------------------------------
// System parameters
// ----------------------------------------------------------------------

/// Cell-level constants shared by every cluster.
///
/// Defaults correspond to an LTE-like macro cell: 46 dBm downlink budget,
/// 24 dBm per-UE uplink budget, 10 dBm SIC detection threshold, 180 kHz
/// resource blocks, 100 resource blocks, 20 MHz effective bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Total downlink transmit power budget of the base station (P_T), watts.
    pub total_dl_power: f64,
    /// Per-UE uplink transmit power budget (P_t′), watts.
    pub ue_power_budget: f64,
    /// Minimum received-power separation the SIC receiver needs between the
    /// signal being decoded and the remaining undecoded signals (P_tol), watts.
    pub sic_tolerance: f64,
    /// Bandwidth of one resource block (B), hertz.
    pub rb_bandwidth: f64,
    /// Number of available resource blocks in the cell (Ω).
    pub total_rbs: u32,
    /// Effective system bandwidth, hertz. Stored as configured; not used in
    /// rate computation (Ω and B are treated as ground truth even when
    /// Ω × B differs from this value, as it does for the defaults).
    pub system_bandwidth: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            total_dl_power: dbm_to_watts(46.0),
            ue_power_budget: dbm_to_watts(24.0),
            sic_tolerance: dbm_to_watts(10.0),
            rb_bandwidth: 180e3,
            total_rbs: 100,
            system_bandwidth: 20e6,
        }
    }
}

impl SystemParams {
    /// Checks that every power and bandwidth field is strictly positive.
    ///
    /// `sic_tolerance` may be zero (SIC separation disabled); everything
    /// else must be > 0.
    pub fn validate(&self) -> Result<(), DomainError> {
        let positive = [
            ("total_dl_power", self.total_dl_power),
            ("ue_power_budget", self.ue_power_budget),
            ("rb_bandwidth", self.rb_bandwidth),
            ("system_bandwidth", self.system_bandwidth),
            ("total_rbs", f64::from(self.total_rbs)),
        ];
        for (name, value) in positive {
            if value <= 0.0 || value.is_nan() {
                return Err(DomainError::NonPositiveParam { name, value });
            }
        }
        if self.sic_tolerance < 0.0 || self.sic_tolerance.is_nan() {
            return Err(DomainError::NonPositiveParam {
                name: "sic_tolerance",
                value: self.sic_tolerance,
            });
        }
        Ok(())
    }

    /// Downlink power budget for a cluster occupying `rbs` resource blocks:
    /// the total budget spread uniformly over the cell's resource blocks,
    /// P_t = P_T · ω / Ω.
    pub fn cluster_power_budget(&self, rbs: u32) -> f64 {
        self.total_dl_power * f64::from(rbs) / f64::from(self.total_rbs)
    }
}

// ----------------------------------------------------------------------
// Users and clusters
// ----------------------------------------------------------------------

/// Link direction of a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Downlink => "downlink",
            Direction::Uplink => "uplink",
        }
    }
}

/// One user's link, as seen by the allocator.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    /// Opaque caller-chosen identifier, carried through to reports.
    pub user_id: u32,
    /// Normalized channel gain γ = h/(N₀B), linear and dimensionless.
    pub gain: f64,
    /// Minimum required rate for this user and direction, bits/s.
    pub min_rate: f64,
}

/// An ordered group of users multiplexed on the same resource blocks.
///
/// Users are kept strictly descending by gain (user 1 is the strongest);
/// the constructors reject unsorted or tied inputs rather than silently
/// reordering. Index convention throughout the crate: slice position `i`
/// holds user `i + 1` of the maths.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    direction: Direction,
    users: Vec<UserChannel>,
    rbs: u32,
    /// Downlink only: cluster transmit power budget P_t, watts.
    power_budget: Option<f64>,
}

impl Cluster {
    /// Builds a downlink cluster with transmit power budget `power_budget` (P_t).
    pub fn downlink(
        users: Vec<UserChannel>,
        rbs: u32,
        power_budget: f64,
    ) -> Result<Self, DomainError> {
        if power_budget <= 0.0 || power_budget.is_nan() {
            return Err(DomainError::NonPositiveBudget(power_budget));
        }
        Self::build(Direction::Downlink, users, rbs, Some(power_budget))
    }

    /// Builds an uplink cluster (each user transmits under the per-UE budget
    /// in [`SystemParams::ue_power_budget`]).
    pub fn uplink(users: Vec<UserChannel>, rbs: u32) -> Result<Self, DomainError> {
        Self::build(Direction::Uplink, users, rbs, None)
    }

    fn build(
        direction: Direction,
        users: Vec<UserChannel>,
        rbs: u32,
        power_budget: Option<f64>,
    ) -> Result<Self, DomainError> {
        if users.len() < 2 {
            return Err(DomainError::TooFewUsers(users.len()));
        }
        if rbs == 0 {
            return Err(DomainError::NoResourceBlocks);
        }
        for user in &users {
            if user.gain <= 0.0 || user.gain.is_nan() {
                return Err(DomainError::NonPositiveGain {
                    user_id: user.user_id,
                    gain: user.gain,
                });
            }
            if user.min_rate <= 0.0 || user.min_rate.is_nan() {
                return Err(DomainError::NonPositiveRate {
                    user_id: user.user_id,
                    rate: user.min_rate,
                });
            }
        }
        for (i, pair) in users.windows(2).enumerate() {
            if pair[0].gain == pair[1].gain {
                return Err(DomainError::TiedGains {
                    position: i,
                    gain: pair[0].gain,
                });
            }
            if pair[1].gain > pair[0].gain {
                return Err(DomainError::GainsNotDescending {
                    position: i + 1,
                    gain: pair[1].gain,
                    previous: pair[0].gain,
                });
            }
        }
        Ok(Cluster {
            direction,
            users,
            rbs,
            power_budget,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Users in strictly descending gain order.
    pub fn users(&self) -> &[UserChannel] {
        &self.users
    }

    /// Cluster size m.
    pub fn size(&self) -> usize {
        self.users.len()
    }

    /// Resource blocks ω occupied by the cluster.
    pub fn rbs(&self) -> u32 {
        self.rbs
    }

    /// ω as a float, for rate formulas.
    pub fn omega(&self) -> f64 {
        f64::from(self.rbs)
    }

    /// Downlink power budget P_t, watts.
    ///
    /// # Panics
    /// If called on an uplink cluster; the constructors make the budget
    /// present exactly for downlink clusters.
    pub fn power_budget(&self) -> f64 {
        self.power_budget
            .expect("power_budget is only defined for downlink clusters")
    }

    /// Gain of user `i` (0-based slice index).
    pub fn gain(&self, i: usize) -> f64 {
        self.users[i].gain
    }

    /// Minimum rate of user `i` (0-based slice index), bits/s.
    pub fn min_rate(&self, i: usize) -> f64 {
        self.users[i].min_rate
    }
}

// ----------------------------------------------------------------------
// Allocations and their provenance
// ----------------------------------------------------------------------

/// Downlink per-user binding choice: at the optimum, for each user
/// i ∈ {2..m} exactly one of its two lower bounds on transmit power holds
/// with equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DlBinding {
    /// The user's minimum-rate constraint holds with equality.
    RateBinding,
    /// The SIC received-power-separation constraint holds with equality.
    SicBinding,
}

/// Uplink candidate solution structure: every user transmits at full
/// budget except, possibly, the weakest one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UlVariant {
    /// No constraint binds; all users transmit at P_t′.
    AllFullPower,
    /// User m−1's minimum-rate constraint binds; user m is power-controlled.
    RateControlled,
    /// User m−1's SIC separation constraint binds; user m is power-controlled.
    SicControlled,
}

impl UlVariant {
    pub const ALL: [UlVariant; 3] = [
        UlVariant::AllFullPower,
        UlVariant::RateControlled,
        UlVariant::SicControlled,
    ];
}

/// Which constraints produced a closed-form allocation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BindingSignature {
    /// One flag per user 2..m, in user order (length m−1). The cluster
    /// power budget is always binding in addition.
    Downlink(Vec<DlBinding>),
    Uplink(UlVariant),
}

impl BindingSignature {
    /// Compact label, e.g. `budget+rate+sic+sic` or `full-power`, used in
    /// reports and CSV output (hence no commas).
    pub fn label(&self) -> String {
        match self {
            BindingSignature::Downlink(flags) => {
                let parts: Vec<&str> = flags
                    .iter()
                    .map(|f| match f {
                        DlBinding::RateBinding => "rate",
                        DlBinding::SicBinding => "sic",
                    })
                    .collect();
                format!("budget+{}", parts.join("+"))
            }
            BindingSignature::Uplink(v) => match v {
                UlVariant::AllFullPower => "full-power".to_string(),
                UlVariant::RateControlled => "rate-controlled".to_string(),
                UlVariant::SicControlled => "sic-controlled".to_string(),
            },
        }
    }
}

/// Transmit powers for one cluster, in user order, plus the signature
/// that produced them.
///
/// Allocations returned by the optimizers are feasible (strictly positive
/// powers, budget respected); raw candidate evaluations may carry
/// non-positive powers and are filtered by the feasibility checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Per-user transmit powers, watts, same order as the cluster's users.
    pub powers: Vec<f64>,
    pub signature: BindingSignature,
}

/// Per-cluster outcome: NOMA rates against the OMA baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    pub direction: Direction,
    /// User identifiers, strongest first.
    pub user_ids: Vec<u32>,
    /// Normalized channel gains, linear.
    pub gains: Vec<f64>,
    /// Allocated transmit powers, watts.
    pub powers: Vec<f64>,
    /// Achieved per-user NOMA rates, bits/s.
    pub rates: Vec<f64>,
    /// Sum of `rates`, bits/s.
    pub noma_sum: f64,
    /// Sum throughput of the same users under the OMA baseline, bits/s.
    pub oma_sum: f64,
    pub signature: BindingSignature,
}

// ----------------------------------------------------------------------
// Feasibility verdicts
// ----------------------------------------------------------------------

/// Relative tolerance for constraints a closed form makes hold with
/// equality. The formulas are exact up to floating rounding, so residuals
/// only carry accumulated round-off — far below this threshold.
pub const EQUALITY_REL_TOL: f64 = 1e-9;

/// Absolute slack allowed on strict inequalities before a candidate is
/// declared infeasible. Kept tiny on purpose: a residual this close to
/// zero means the constraint is effectively binding, and the candidate
/// whose signature claims that binding produces the same point anyway.
pub const STRICT_SLACK: f64 = 1e-12;

/// One violated constraint, with the (signed) residual that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Human-readable constraint name, 1-based user indices.
    pub constraint: String,
    /// Constraint residual; negative slack or equality mismatch.
    pub residual: f64,
}

/// Outcome of checking a candidate allocation against the full
/// constraint set of its direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A candidate signature that failed its feasibility check, kept so an
/// infeasibility error can explain *why* every candidate was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureRejection {
    pub signature: BindingSignature,
    pub verdict: Verdict,
}

// ----------------------------------------------------------------------
