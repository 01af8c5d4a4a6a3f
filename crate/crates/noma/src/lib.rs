//! Dynamic user clustering and closed-form optimal power allocation for
//! power-domain NOMA (non-orthogonal multiple access) cells.
//!
//! A NOMA cluster multiplexes `m` users with strictly descending channel
//! gains onto the same `ω` resource blocks and separates them in the power
//! domain via successive interference cancellation (SIC). Given per-user
//! minimum rate requirements, the sum-throughput-optimal transmit powers
//! have closed forms obtained from the KKT conditions: downlink solutions
//! are selected from 2^(m−1) binding-constraint signatures, uplink
//! solutions from three candidate structures in which at most the weakest
//! user is power-controlled.
//!
//! Module layout:
//!
//! * [`domain`] — unit conversions and shared value types (system
//!   parameters, users, clusters, allocations, verdicts).
//! * [`clustering`] — cluster-count selection and stride grouping of
//!   gain-sorted users.
//! * [`dl_power`] / [`ul_power`] — closed-form per-cluster power
//!   allocation with full feasibility checking.
//! * [`throughput`] — NOMA rate evaluation and the orthogonal-access
//!   (OMA) baseline used for comparisons.
//! * [`oracle`] — independent numerical verification: grid-refined
//!   constrained search plus KKT multiplier recovery.
//!
//! All arithmetic is carried out in linear units (watts, linear gain
//! ratios, hertz, bits/s); dB and dBm appear only at ingestion/emission
//! boundaries.

pub mod clustering;
pub mod dl_power;
pub mod domain;
pub mod oracle;
pub mod throughput;
pub mod ul_power;

pub use domain::{
    db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, AllocationReport, BindingSignature,
    Cluster, Direction, DlBinding, DomainError, PowerAllocation, SignatureRejection, SystemParams,
    UlVariant, UserChannel, Verdict, Violation,
};
