//! Closed-form optimal downlink power allocation.
//!
//! For a downlink cluster the sum throughput is maximized by spending the
//! whole budget (any leftover power can always be added to the weakest
//! user's share, raising its rate without touching anyone's
//! interference), and at the optimum each user i ∈ {2..m} sits on exactly
//! one of its two lower bounds:
//!
//! * **rate-binding** — user i's minimum-rate constraint holds with
//!   equality, or
//! * **SIC-binding** — user i's received-power-separation requirement
//!   (it must arrive `P_tol` above the combined stronger-user signals at
//!   the decoding user) holds with equality.
//!
//! Fixing one choice per user — a [`BindingSignature`] — turns the KKT
//! system into m linear equations with a closed-form solution. In terms
//! of the cumulative powers `Q_i = Σ_{j≤i} P_j` each equality becomes a
//! one-step recurrence,
//!
//! ```text
//! rate-binding:  Q_i = φ_i Q_{i−1} + ω(φ_i − 1)/γ_i      φ_i = 2^(R_i/(ωB))
//! SIC-binding:   Q_i = 2 Q_{i−1} + P_tol/γ_{i−1}
//! ```
//!
//! which, unrolled from `Q_m = P_t` down to `Q_1 = P_1`, reproduces the
//! familiar expanded form: `P_t` divided by a product of φ's (rate) and
//! 2's (SIC), minus one offset term per peeled user. [`dl_optimize`]
//! enumerates all `2^(m−1)` signatures, filters them through the full
//! constraint set, and keeps the feasible one with the best sum
//! throughput — exactly one survives except in degenerate ties.

use crate::domain::{
    BindingSignature, Cluster, DlBinding, PowerAllocation, SignatureRejection, SystemParams,
    Verdict, Violation, EQUALITY_REL_TOL, STRICT_SLACK,
};
use crate::throughput;
use thiserror::Error;

/// No binding signature produced a feasible allocation: the cluster
/// cannot meet its users' rate requirements under the power budget and
/// SIC tolerance.
#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "downlink cluster is infeasible: all {} binding signatures rejected \
     (first failure: {})",
    rejections.len(),
    rejections
        .first()
        .and_then(|r| r.verdict.violations.first())
        .map_or_else(|| "none".to_string(), |v| v.constraint.clone())
)]
pub struct DlInfeasible {
    /// Why each candidate signature failed, in enumeration order.
    pub rejections: Vec<SignatureRejection>,
}

/// Per-user downlink rate factors φ_i = 2^(R_i/(ωB)).
///
/// Note the downlink factor has no “− 1”: it is the multiplicative growth
/// of the cumulative power `Q_i` required to hold user i at its minimum
/// rate. Always > 1 since rates are strictly positive.
pub fn dl_rate_factors(cluster: &Cluster, params: &SystemParams) -> Vec<f64> {
    let omega_b = cluster.omega() * params.rb_bandwidth;
    cluster
        .users()
        .iter()
        .map(|u| (u.min_rate / omega_b).exp2())
        .collect()
}

/// All `2^(m−1)` binding signatures for an m-user cluster, in
/// lexicographic order with `RateBinding` sorting before `SicBinding`
/// (all-rate first, all-SIC last).
pub fn dl_enumerate_candidates(m: usize) -> Vec<Vec<DlBinding>> {
    let flags = m - 1;
    (0..1usize << flags)
        .map(|mask| {
            (0..flags)
                .map(|bit| {
                    if mask & (1 << (flags - 1 - bit)) == 0 {
                        DlBinding::RateBinding
                    } else {
                        DlBinding::SicBinding
                    }
                })
                .collect()
        })
        .collect()
}

/// Evaluates the closed-form candidate allocation for one signature.
///
/// `sig` holds one flag per user 2..m in user order. The returned powers
/// satisfy the signature's equalities and the budget exactly (up to
/// rounding) but may be non-positive or violate the *other* constraints;
/// [`dl_check_feasibility`] decides that separately.
pub fn dl_candidate_powers(
    cluster: &Cluster,
    sig: &[DlBinding],
    params: &SystemParams,
) -> PowerAllocation {
    let m = cluster.size();
    assert_eq!(sig.len(), m - 1, "need one binding flag per user 2..m");
    let omega = cluster.omega();
    let phi = dl_rate_factors(cluster, params);

    // Unroll the cumulative-power recurrence from Q_m = P_t downwards.
    let mut q = vec![0.0; m];
    q[m - 1] = cluster.power_budget();
    for i in (1..m).rev() {
        let (factor, offset) = match sig[i - 1] {
            DlBinding::RateBinding => (phi[i], omega * (phi[i] - 1.0) / cluster.gain(i)),
            DlBinding::SicBinding => (2.0, params.sic_tolerance / cluster.gain(i - 1)),
        };
        q[i - 1] = (q[i] - offset) / factor;
    }

    let mut powers = vec![0.0; m];
    powers[0] = q[0];
    for i in 1..m {
        powers[i] = q[i] - q[i - 1];
    }
    PowerAllocation {
        powers,
        signature: BindingSignature::Downlink(sig.to_vec()),
    }
}

/// Checks a candidate against the full downlink constraint set.
///
/// Feasible means: all powers strictly positive; every user's rate
/// constraint `P_i γ_i − (φ_i − 1)(γ_i Σ_{j<i} P_j + ω) ≥ 0` holds — with
/// equality (to [`EQUALITY_REL_TOL`]) where the signature claims
/// rate-binding, strictly (allowing [`STRICT_SLACK`]) elsewhere,
/// including user 1; every SIC separation
/// `(P_i − Σ_{j<i} P_j) γ_{i−1} − P_tol ≥ 0` for i = 2..m likewise; and
/// the powers sum to the budget.
///
/// # Panics
/// If the allocation does not carry a downlink signature of matching
/// length.
pub fn dl_check_feasibility(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> Verdict {
    let sig = match &alloc.signature {
        BindingSignature::Downlink(flags) => flags.as_slice(),
        BindingSignature::Uplink(_) => panic!("downlink check on an uplink allocation"),
    };
    let m = cluster.size();
    assert_eq!(sig.len(), m - 1, "signature length mismatch");
    assert_eq!(alloc.powers.len(), m, "power vector length mismatch");
    let omega = cluster.omega();
    let phi = dl_rate_factors(cluster, params);
    let p = &alloc.powers;
    let mut violations = Vec::new();

    for (i, &power) in p.iter().enumerate() {
        if power <= 0.0 || power.is_nan() {
            violations.push(Violation {
                constraint: format!("user {} power positivity", i + 1),
                residual: power,
            });
        }
    }

    let mut stronger_sum = 0.0; // Σ_{j<i} P_j as we walk down the users
    for i in 0..m {
        let gamma = cluster.gain(i);
        let achieved = p[i] * gamma;
        let required = (phi[i] - 1.0) * (gamma * stronger_sum + omega);
        let residual = achieved - required;
        let rate_binding = i > 0 && sig[i - 1] == DlBinding::RateBinding;
        if rate_binding {
            let scale = achieved.abs().max(required.abs());
            if residual.abs() > EQUALITY_REL_TOL * scale {
                violations.push(Violation {
                    constraint: format!("user {} minimum-rate equality", i + 1),
                    residual,
                });
            }
        } else if residual < -STRICT_SLACK {
            violations.push(Violation {
                constraint: format!("user {} minimum rate", i + 1),
                residual,
            });
        }

        if i > 0 {
            let separation = (p[i] - stronger_sum) * cluster.gain(i - 1);
            let sic_residual = separation - params.sic_tolerance;
            if sig[i - 1] == DlBinding::SicBinding {
                let scale = separation.abs().max(params.sic_tolerance);
                if sic_residual.abs() > EQUALITY_REL_TOL * scale {
                    violations.push(Violation {
                        constraint: format!("user {} SIC separation equality", i + 1),
                        residual: sic_residual,
                    });
                }
            } else if sic_residual < -STRICT_SLACK {
                violations.push(Violation {
                    constraint: format!("user {} SIC separation", i + 1),
                    residual: sic_residual,
                });
            }
        }
        stronger_sum += p[i];
    }

    let budget = cluster.power_budget();
    let budget_residual = stronger_sum - budget; // stronger_sum is now Σ P_i
    if budget_residual.abs() > EQUALITY_REL_TOL * budget {
        violations.push(Violation {
            constraint: "power budget conservation".to_string(),
            residual: budget_residual,
        });
    }

    Verdict { violations }
}

/// Picks the optimal downlink allocation by enumerating all `2^(m−1)`
/// signatures and keeping the feasible candidate with maximal sum
/// throughput (value ties resolve to the lexicographically earliest
/// signature, so the result is independent of evaluation order).
pub fn dl_optimize(
    cluster: &Cluster,
    params: &SystemParams,
) -> Result<PowerAllocation, DlInfeasible> {
    let mut best: Option<(f64, PowerAllocation)> = None;
    let mut rejections = Vec::new();
    for sig in dl_enumerate_candidates(cluster.size()) {
        let candidate = dl_candidate_powers(cluster, &sig, params);
        let verdict = dl_check_feasibility(cluster, &candidate, params);
        if verdict.feasible() {
            let value = throughput::sum_rate(cluster, &candidate.powers, params);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, candidate));
            }
        } else {
            rejections.push(SignatureRejection {
                signature: candidate.signature,
                verdict,
            });
        }
    }
    match best {
        Some((_, alloc)) => Ok(alloc),
        None => Err(DlInfeasible { rejections }),
    }
}

/// Upper bound on the strongest user's power: `P_t / 2^(m−1)`.
///
/// Each SIC separation at least doubles the cumulative power walking from
/// user 1 to user m, so the strongest user can never hold more than this
/// share of the budget; the bound is attained exactly in the all-SIC
/// signature with `P_tol = 0` and is strict for `P_tol > 0`.
pub fn dl_max_power_bound(m: usize, p_t: f64) -> f64 {
    assert!(m >= 2, "clusters have at least 2 users");
    p_t / 2f64.powi(m as i32 - 1)
}

// ----------------------------------------------------------------------
