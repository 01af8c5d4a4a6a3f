//! Closed-form optimal uplink power allocation.
//!
//! Uplink sum throughput telescopes into a single log of the total
//! received power, `ωB log₂(1 + Σ P_j γ_j / ω)`, so it grows with every
//! user's transmit power and the unconstrained optimum is everyone at the
//! per-UE budget P_t′. Constraints only ever push *down* the weakest
//! user's power: user m is the last to be decoded, so its signal is pure
//! interference for everyone else, while its own rate and SIC position
//! constrain nobody below it. That leaves exactly three candidate
//! structures ([`UlVariant`]):
//!
//! * **AllFullPower** — nothing binds; every user transmits P_t′.
//! * **RateControlled** — user m−1's minimum rate binds; user m backs off
//!   to `P_m = P_t′ γ_{m−1}/(φ_{m−1} γ_m) − ω/γ_m`, with
//!   `φ_i = 2^(R_i′/(ωB)) − 1`.
//! * **SicControlled** — user m−1's SIC separation binds; user m backs
//!   off to `P_m = (P_t′ γ_{m−1} − P_tol)/γ_m`.
//!
//! [`ul_optimize`] evaluates all three and keeps the feasible one with
//! the highest sum throughput (equivalently, the largest admissible P_m).

use crate::domain::{
    BindingSignature, Cluster, PowerAllocation, SignatureRejection, SystemParams, UlVariant,
    Verdict, Violation, EQUALITY_REL_TOL, STRICT_SLACK,
};
use crate::throughput;
use thiserror::Error;

/// None of the three candidate structures satisfies the uplink
/// constraints: the users' rate requirements are unattainable under the
/// per-UE budget and SIC tolerance.
#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "uplink cluster is infeasible: all 3 candidate variants rejected \
     (first failure: {})",
    rejections
        .first()
        .and_then(|r| r.verdict.violations.first())
        .map_or_else(|| "none".to_string(), |v| v.constraint.clone())
)]
pub struct UlInfeasible {
    /// Why each candidate variant failed, in evaluation order.
    pub rejections: Vec<SignatureRejection>,
}

/// Per-user uplink rate factors φ_i = 2^(R_i′/(ωB)) − 1.
///
/// Unlike the downlink factor this one *does* subtract 1: it is the
/// minimum SINR delivering rate R_i′. Always > 0 since rates are
/// strictly positive.
pub fn ul_rate_factors(cluster: &Cluster, params: &SystemParams) -> Vec<f64> {
    let omega_b = cluster.omega() * params.rb_bandwidth;
    cluster
        .users()
        .iter()
        .map(|u| (u.min_rate / omega_b).exp2() - 1.0)
        .collect()
}

/// Evaluates one candidate structure.
///
/// Users 1..m−1 always transmit at the full budget; only the weakest
/// user's power depends on the variant. The returned P_m may be
/// non-positive or exceed P_t′; [`ul_check_feasibility`] decides that
/// separately.
pub fn ul_candidate_powers(
    cluster: &Cluster,
    variant: UlVariant,
    params: &SystemParams,
) -> PowerAllocation {
    let m = cluster.size();
    let budget = params.ue_power_budget;
    let mut powers = vec![budget; m];
    let gamma_prev = cluster.gain(m - 2);
    let gamma_last = cluster.gain(m - 1);
    powers[m - 1] = match variant {
        UlVariant::AllFullPower => budget,
        UlVariant::RateControlled => {
            let phi_prev = ul_rate_factors(cluster, params)[m - 2];
            budget * gamma_prev / (phi_prev * gamma_last) - cluster.omega() / gamma_last
        }
        UlVariant::SicControlled => (budget * gamma_prev - params.sic_tolerance) / gamma_last,
    };
    PowerAllocation {
        powers,
        signature: BindingSignature::Uplink(variant),
    }
}

/// Checks a candidate against the full uplink constraint set.
///
/// Feasible means: every user's rate constraint
/// `P_i γ_i − φ_i(Σ_{j>i} P_j γ_j + ω) ≥ 0` holds — with equality for
/// user m−1 under `RateControlled`, strictly elsewhere; every SIC
/// separation `P_i γ_i − Σ_{j>i} P_j γ_j − P_tol ≥ 0` for i = 1..m−1
/// holds — with equality for user m−1 under `SicControlled`; and every
/// power lies in (0, P_t′].
///
/// # Panics
/// If the allocation does not carry an uplink signature.
pub fn ul_check_feasibility(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> Verdict {
    let variant = match alloc.signature {
        BindingSignature::Uplink(v) => v,
        BindingSignature::Downlink(_) => panic!("uplink check on a downlink allocation"),
    };
    let m = cluster.size();
    assert_eq!(alloc.powers.len(), m, "power vector length mismatch");
    let omega = cluster.omega();
    let phi = ul_rate_factors(cluster, params);
    let p = &alloc.powers;
    let mut violations = Vec::new();

    for (i, &power) in p.iter().enumerate() {
        if power <= 0.0 || power.is_nan() {
            violations.push(Violation {
                constraint: format!("user {} power positivity", i + 1),
                residual: power,
            });
        }
        if params.ue_power_budget - power < -STRICT_SLACK {
            violations.push(Violation {
                constraint: format!("user {} power budget", i + 1),
                residual: params.ue_power_budget - power,
            });
        }
    }

    // Received powers P_j γ_j, and their suffix sums (the interference
    // still undecoded when user i is processed).
    let received: Vec<f64> = (0..m).map(|i| p[i] * cluster.gain(i)).collect();
    let mut weaker_sum = 0.0;
    let mut suffix = vec![0.0; m];
    for i in (0..m).rev() {
        suffix[i] = weaker_sum;
        weaker_sum += received[i];
    }

    for i in 0..m {
        let residual = received[i] - phi[i] * (suffix[i] + omega);
        let rate_binding = variant == UlVariant::RateControlled && i == m - 2;
        if rate_binding {
            let scale = received[i].abs().max((phi[i] * (suffix[i] + omega)).abs());
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

        if i < m - 1 {
            let sic_residual = received[i] - suffix[i] - params.sic_tolerance;
            let sic_binding = variant == UlVariant::SicControlled && i == m - 2;
            if sic_binding {
                let scale = received[i].abs().max(suffix[i] + params.sic_tolerance);
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
    }

    Verdict { violations }
}

/// Picks the optimal uplink allocation among the three candidate
/// structures.
///
/// Feasible candidates are ranked by sum throughput; exact ties prefer
/// `AllFullPower` first and then the candidate with the larger P_m, so
/// the result is deterministic.
pub fn ul_optimize(
    cluster: &Cluster,
    params: &SystemParams,
) -> Result<PowerAllocation, UlInfeasible> {
    let m = cluster.size();
    let mut best: Option<(f64, f64, PowerAllocation)> = None;
    let mut rejections = Vec::new();
    for variant in UlVariant::ALL {
        let candidate = ul_candidate_powers(cluster, variant, params);
        let verdict = ul_check_feasibility(cluster, &candidate, params);
        if verdict.feasible() {
            let value = throughput::sum_rate(cluster, &candidate.powers, params);
            let p_last = candidate.powers[m - 1];
            let better = best
                .as_ref()
                .is_none_or(|(v, pl, _)| value > *v || (value == *v && p_last > *pl));
            if better {
                best = Some((value, p_last, candidate));
            }
        } else {
            rejections.push(SignatureRejection {
                signature: candidate.signature,
                verdict,
            });
        }
    }
    match best {
        Some((_, _, alloc)) => Ok(alloc),
        None => Err(UlInfeasible { rejections }),
    }
}

// ----------------------------------------------------------------------
