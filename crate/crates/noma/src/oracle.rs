//! Independent numerical verification of the closed-form allocators.
//!
//! Two kinds of evidence, both deliberately free of closed-form
//! knowledge:
//!
//! * [`dl_numeric_optimum`] / [`ul_numeric_optimum`] — deterministic grid
//!   search with local refinement over the feasible region. The search
//!   only ever evaluates the constraint residuals and the throughput
//!   objective, so any feasible point it returns is a certified lower
//!   bound on the true optimum; the closed form is validated by landing
//!   within tolerance *above* it.
//! * [`kkt_residuals`] — recovers the Lagrange multipliers of the active
//!   constraints claimed by an allocation's signature (a small dense
//!   linear solve of the stationarity equations) and reports their signs
//!   together with the complementary-slackness residuals.
//!
//! Multipliers are reported for the objective rescaled to natural-log
//! units, `f̃ = f · ln 2 / (ωB)` — i.e. the sum of `ln(1 + SINR)` terms.
//! That makes them O(1) regardless of bandwidth, so sign thresholds like
//! 1e-8 are scale-free.

use crate::dl_power::dl_rate_factors;
use crate::domain::{
    BindingSignature, Cluster, Direction, DlBinding, PowerAllocation, SystemParams, UlVariant,
    STRICT_SLACK,
};
use crate::throughput;
use crate::ul_power::ul_rate_factors;
use thiserror::Error;

/// Failure modes of the numeric verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("numeric search found no feasible allocation")]
    NoFeasiblePoint,
    #[error("stationarity system is singular; the claimed binding signature cannot hold")]
    SingularSystem,
}

// ----------------------------------------------------------------------
// Numeric optima
// ----------------------------------------------------------------------

/// Brute-force downlink optimum by grid search over `(P_1 … P_{m−1})`
/// with `P_m` taking the budget remainder (spending the whole budget is
/// never suboptimal: leftover power added to the weakest user raises its
/// rate and nobody's interference).
///
/// The search runs one full-box pass plus `refinements` rounds that
/// shrink the box tenfold around the incumbent, keeping the global best
/// across rounds. If the first pass finds no feasible point the grid is
/// densified (doubled, twice) before giving up. Deterministic: exact
/// value ties keep the earlier (lexicographically smaller) grid index.
pub fn dl_numeric_optimum(
    cluster: &Cluster,
    params: &SystemParams,
    grid: usize,
    refinements: usize,
) -> Result<(Vec<f64>, f64), OracleError> {
    assert_eq!(cluster.direction(), Direction::Downlink);
    let m = cluster.size();
    assert!(m <= 4, "grid oracle is desk-scale only (m ≤ 4)");
    assert!(grid >= 2);
    let p_t = cluster.power_budget();
    let omega = cluster.omega();
    let phi = dl_rate_factors(cluster, params);
    let dims = m - 1;

    let feasible_value = |p: &[f64]| -> Option<f64> {
        let mut prefix = 0.0;
        for i in 0..m {
            if p[i] <= 0.0 || p[i].is_nan() {
                return None;
            }
            let gamma = cluster.gain(i);
            if p[i] * gamma - (phi[i] - 1.0) * (gamma * prefix + omega) < -STRICT_SLACK {
                return None;
            }
            if i > 0 && (p[i] - prefix) * cluster.gain(i - 1) - params.sic_tolerance < -STRICT_SLACK
            {
                return None;
            }
            prefix += p[i];
        }
        Some(throughput::sum_rate(cluster, p, params))
    };

    // The SIC chain forces Q_i ≥ 2 Q_{i−1}, so P_k ≤ P_t / 2^(m−k) at any
    // feasible point; starting from the tight box buys an 8×4×2 finer
    // effective resolution for m = 4 at identical cost.
    let mut lo = vec![0.0; dims];
    let mut hi: Vec<f64> = (0..dims)
        .map(|k| p_t / 2f64.powi((m - 1 - k) as i32))
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;

    let mut first_pass_grid = grid;
    for _ in 0..3 {
        sweep_box(
            &lo,
            &hi,
            first_pass_grid,
            dims,
            |free| {
                let mut p = free.to_vec();
                p.push(p_t - free.iter().sum::<f64>());
                feasible_value(&p).map(|v| (p, v))
            },
            &mut best,
        );
        if best.is_some() {
            break;
        }
        first_pass_grid *= 2;
    }
    if best.is_none() {
        return Err(OracleError::NoFeasiblePoint);
    }

    for _ in 0..refinements {
        let incumbent = best.as_ref().unwrap().0.clone();
        for k in 0..dims {
            let half = (hi[k] - lo[k]) / 20.0;
            lo[k] = (incumbent[k] - half).max(0.0);
            hi[k] = (incumbent[k] + half).min(p_t);
        }
        sweep_box(
            &lo,
            &hi,
            grid,
            dims,
            |free| {
                let mut p = free.to_vec();
                p.push(p_t - free.iter().sum::<f64>());
                feasible_value(&p).map(|v| (p, v))
            },
            &mut best,
        );
    }

    Ok(best.unwrap())
}

/// Brute-force uplink optimum.
///
/// Runs two passes: a refined 1-D search over `P_m` with everyone else
/// pinned at the per-UE budget (the structure the sum-throughput shape
/// suggests), plus one coarse full-box pass over all m powers to confirm
/// nothing off-structure beats it. Returns the better of the two.
pub fn ul_numeric_optimum(
    cluster: &Cluster,
    params: &SystemParams,
    grid: usize,
    refinements: usize,
) -> Result<(Vec<f64>, f64), OracleError> {
    assert_eq!(cluster.direction(), Direction::Uplink);
    let m = cluster.size();
    assert!(grid >= 2);
    let budget = params.ue_power_budget;
    let omega = cluster.omega();
    let phi = ul_rate_factors(cluster, params);

    let feasible_value = |p: &[f64]| -> Option<f64> {
        let mut suffix = vec![0.0; m];
        let mut weaker = 0.0;
        for i in (0..m).rev() {
            if p[i] <= 0.0 || p[i].is_nan() || budget - p[i] < -STRICT_SLACK {
                return None;
            }
            suffix[i] = weaker;
            weaker += p[i] * cluster.gain(i);
        }
        for i in 0..m {
            let received = p[i] * cluster.gain(i);
            if received - phi[i] * (suffix[i] + omega) < -STRICT_SLACK {
                return None;
            }
            if i < m - 1 && received - suffix[i] - params.sic_tolerance < -STRICT_SLACK {
                return None;
            }
        }
        Some(throughput::sum_rate(cluster, p, params))
    };

    let mut best: Option<(Vec<f64>, f64)> = None;

    // Pass 1: refined 1-D over the weakest user's power.
    let (mut lo, mut hi) = (0.0f64, budget);
    let mut first_pass_grid = grid;
    for round in 0..=refinements {
        sweep_box(
            &[lo],
            &[hi],
            first_pass_grid,
            1,
            |free| {
                let mut p = vec![budget; m];
                p[m - 1] = free[0];
                feasible_value(&p).map(|v| (p, v))
            },
            &mut best,
        );
        if best.is_none() {
            // Densify rather than refine while nothing is feasible yet.
            if first_pass_grid >= grid * 4 {
                break;
            }
            first_pass_grid *= 2;
            continue;
        }
        if round < refinements {
            let center = best.as_ref().unwrap().0[m - 1];
            let half = (hi - lo) / 20.0;
            lo = (center - half).max(0.0);
            hi = (center + half).min(budget);
        }
    }

    // Pass 2: coarse full box, endpoints at the budget included. Kept
    // intentionally cheap — it exists to catch a structurally different
    // optimum, not to resolve it finely.
    let per_dim = (grid / 10).clamp(6, 16).min(if m >= 5 { 6 } else { 16 });
    let lo_full = vec![budget / per_dim as f64; m];
    let hi_full = vec![budget; m];
    sweep_box(
        &lo_full,
        &hi_full,
        per_dim,
        m,
        |free| feasible_value(free).map(|v| (free.to_vec(), v)),
        &mut best,
    );

    best.ok_or(OracleError::NoFeasiblePoint)
}

/// Evaluates every point of an axis-aligned grid (endpoints included)
/// and folds the feasible ones into `best`, keeping strict improvements
/// only so earlier indices win exact ties.
fn sweep_box(
    lo: &[f64],
    hi: &[f64],
    n: usize,
    dims: usize,
    mut eval: impl FnMut(&[f64]) -> Option<(Vec<f64>, f64)>,
    best: &mut Option<(Vec<f64>, f64)>,
) {
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0; dims];
    let steps = (n - 1).max(1) as f64;
    'sweep: loop {
        for k in 0..dims {
            point[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / steps;
        }
        if let Some((p, value)) = eval(&point) {
            if best.as_ref().is_none_or(|(_, b)| value > *b) {
                *best = Some((p, value));
            }
        }
        let mut k = dims;
        while k > 0 {
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                continue 'sweep;
            }
            idx[k] = 0;
        }
        return;
    }
}

// ----------------------------------------------------------------------
// KKT residuals
// ----------------------------------------------------------------------

/// Multipliers and complementary-slackness residuals for the constraints
/// an allocation's signature claims active.
///
/// Multiplier values are with respect to the natural-log-normalized
/// objective (see the module docs); at a true optimum every multiplier is
/// ≥ 0 and every product |multiplier × constraint residual| vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Named active-constraint multipliers recovered from stationarity.
    pub multipliers: Vec<(String, f64)>,
    /// Named |multiplier × residual| products for the same constraints.
    pub comp_slack: Vec<(String, f64)>,
}

impl KktReport {
    pub fn min_multiplier(&self) -> f64 {
        self.multipliers
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_comp_slack(&self) -> f64 {
        self.comp_slack.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    /// True when every multiplier is ≥ −`tol` and every
    /// complementary-slackness product is ≤ `tol`.
    pub fn satisfied(&self, tol: f64) -> bool {
        self.min_multiplier() >= -tol && self.max_comp_slack() <= tol
    }
}

/// Recovers the active-constraint multipliers for `alloc` by solving the
/// m stationarity equations, and reports sign and complementary-slackness
/// evidence.
///
/// The active set is read off the allocation's signature: downlink it is
/// the budget plus one rate-or-SIC equality per user 2..m; uplink it is
/// the per-UE budgets of users 1..m−1 plus, for the controlled variants,
/// user m−1's binding constraint (for `AllFullPower`, user m's budget
/// instead). A point that is *not* the optimum for that signature shows
/// up as nonzero complementary slackness, not as a solve failure — the
/// square system recovers some multipliers regardless.
pub fn kkt_residuals(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> Result<KktReport, OracleError> {
    match (&alloc.signature, cluster.direction()) {
        (BindingSignature::Downlink(sig), Direction::Downlink) => {
            dl_kkt(cluster, alloc, sig, params)
        }
        (BindingSignature::Uplink(variant), Direction::Uplink) => {
            ul_kkt(cluster, alloc, *variant, params)
        }
        _ => panic!("allocation signature does not match cluster direction"),
    }
}

fn dl_kkt(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    sig: &[DlBinding],
    params: &SystemParams,
) -> Result<KktReport, OracleError> {
    let m = cluster.size();
    let omega = cluster.omega();
    let phi = dl_rate_factors(cluster, params);
    let p = &alloc.powers;

    // Objective gradient in nats: with T_i = γ_i Q_i + ω and
    // I_i = γ_i Q_{i−1} + ω (Q = cumulative power),
    // ∂f̃/∂P_n = Σ_{i≥n} γ_i/T_i − Σ_{i>n} γ_i/I_i.
    let mut q = 0.0;
    let mut inv_t = vec![0.0; m];
    let mut inv_i = vec![0.0; m];
    for i in 0..m {
        let gamma = cluster.gain(i);
        inv_i[i] = gamma / (gamma * q + omega);
        q += p[i];
        inv_t[i] = gamma / (gamma * q + omega);
    }
    let mut grad = vec![0.0; m];
    let mut tail_t = 0.0;
    let mut tail_i = 0.0;
    for n in (0..m).rev() {
        tail_t += inv_t[n];
        grad[n] = tail_t - tail_i;
        tail_i += inv_i[n];
    }

    // Active constraints: budget, then one equality per user 2..m.
    let mut names = vec!["budget".to_string()];
    let mut columns = vec![vec![-1.0; m]];
    let mut residuals = vec![cluster.power_budget() - p.iter().sum::<f64>()];
    let mut prefix = vec![0.0; m]; // Σ_{j<i} P_j
    for i in 1..m {
        prefix[i] = prefix[i - 1] + p[i - 1];
    }
    for i in 1..m {
        let gamma = cluster.gain(i);
        let mut column = vec![0.0; m];
        match sig[i - 1] {
            DlBinding::RateBinding => {
                for (n, entry) in column.iter_mut().enumerate() {
                    *entry = if n == i {
                        gamma
                    } else if n < i {
                        -(phi[i] - 1.0) * gamma
                    } else {
                        0.0
                    };
                }
                names.push(format!("user {} rate", i + 1));
                residuals.push(p[i] * gamma - (phi[i] - 1.0) * (gamma * prefix[i] + omega));
            }
            DlBinding::SicBinding => {
                let gamma_prev = cluster.gain(i - 1);
                for (n, entry) in column.iter_mut().enumerate() {
                    *entry = if n == i {
                        gamma_prev
                    } else if n < i {
                        -gamma_prev
                    } else {
                        0.0
                    };
                }
                names.push(format!("user {} SIC", i + 1));
                residuals.push((p[i] - prefix[i]) * gamma_prev - params.sic_tolerance);
            }
        }
        columns.push(column);
    }

    assemble_report(names, columns, residuals, &grad)
}

fn ul_kkt(
    cluster: &Cluster,
    alloc: &PowerAllocation,
    variant: UlVariant,
    params: &SystemParams,
) -> Result<KktReport, OracleError> {
    let m = cluster.size();
    let omega = cluster.omega();
    let phi = ul_rate_factors(cluster, params);
    let p = &alloc.powers;
    let budget = params.ue_power_budget;

    let received: Vec<f64> = (0..m).map(|i| p[i] * cluster.gain(i)).collect();
    let total: f64 = received.iter().sum();
    let u = total + omega;
    let grad: Vec<f64> = (0..m).map(|n| cluster.gain(n) / u).collect();
    let suffix = |i: usize| -> f64 { received[i + 1..].iter().sum() };

    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut residuals = Vec::new();
    let full_power_users = match variant {
        UlVariant::AllFullPower => m,
        _ => m - 1,
    };
    for n in 0..full_power_users {
        let mut column = vec![0.0; m];
        column[n] = -1.0;
        columns.push(column);
        names.push(format!("user {} budget", n + 1));
        residuals.push(budget - p[n]);
    }
    match variant {
        UlVariant::AllFullPower => {}
        UlVariant::RateControlled => {
            let i = m - 2;
            let mut column = vec![0.0; m];
            column[i] = cluster.gain(i);
            column[m - 1] = -phi[i] * cluster.gain(m - 1);
            columns.push(column);
            names.push(format!("user {} rate", i + 1));
            residuals.push(received[i] - phi[i] * (suffix(i) + omega));
        }
        UlVariant::SicControlled => {
            let i = m - 2;
            let mut column = vec![0.0; m];
            column[i] = cluster.gain(i);
            column[m - 1] = -cluster.gain(m - 1);
            columns.push(column);
            names.push(format!("user {} SIC", i + 1));
            residuals.push(received[i] - suffix(i) - params.sic_tolerance);
        }
    }

    assemble_report(names, columns, residuals, &grad)
}

/// Solves `Σ_k x_k ∇g_k = −∇f̃` for the multipliers and pairs them with
/// their complementary-slackness products.
fn assemble_report(
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    grad: &[f64],
) -> Result<KktReport, OracleError> {
    let n = grad.len();
    debug_assert_eq!(columns.len(), n, "square stationarity system expected");
    let mut a = vec![vec![0.0; n]; n];
    for (k, column) in columns.iter().enumerate() {
        for (row, &entry) in column.iter().enumerate() {
            a[row][k] = entry;
        }
    }
    let b: Vec<f64> = grad.iter().map(|g| -g).collect();
    let x = solve_linear(a, b)?;

    let comp_slack = names
        .iter()
        .zip(x.iter().zip(&residuals))
        .map(|(name, (mult, res))| (name.clone(), (mult * res).abs()))
        .collect();
    let multipliers = names.into_iter().zip(x).collect();
    Ok(KktReport {
        multipliers,
        comp_slack,
    })
}

/// Gaussian elimination with partial pivoting. Errors out on a pivot
/// below 1e-12 of the matrix scale instead of dividing through noise.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, OracleError> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 * scale {
            return Err(OracleError::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot = &upper[col];
        for (row, row_vals) in lower.iter_mut().enumerate() {
            let factor = row_vals[col] / pivot[col];
            if factor == 0.0 {
                continue;
            }
            for (entry, &p) in row_vals[col..].iter_mut().zip(&pivot[col..]) {
                *entry -= factor * p;
            }
            b[col + 1 + row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

// ----------------------------------------------------------------------
