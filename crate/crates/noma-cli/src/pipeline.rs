//! Scenario execution: cluster the users, allocate powers, and collect
//! per-cluster results into one [`RunOutcome`], plus the CSV emitter for
//! the `run` subcommand.
//!
//! A run never aborts on an infeasible cluster — the remaining clusters
//! are still solved and the outcome records which ones failed, so a
//! single overloaded cluster does not hide the rest of the cell.

use crate::scenario::Scenario;
use anyhow::{Context, Result};
use noma::clustering::{self, ClusteringConfig};
use noma::oracle;
use noma::{dl_power, throughput, ul_power, watts_to_dbm, AllocationReport, Cluster, Direction};
use std::io::Write;

/// Result of re-deriving one cluster's optimum numerically.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleCheck {
    /// Oracle found an optimum; `rel_gap` is |closed − oracle| / oracle.
    Agreement { oracle_sum_bps: f64, rel_gap: f64 },
    /// Cluster shape outside the oracle's supported range.
    Unsupported(&'static str),
    /// Oracle found no feasible grid point (disagrees with the closed form).
    NoFeasiblePoint,
}

/// One cluster's slice of a run.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    /// 1-based cluster number, in stride order.
    pub index: usize,
    pub cluster: Cluster,
    /// `Some` when a feasible allocation exists.
    pub allocation: Option<AllocationReport>,
    /// Why allocation failed, when it did.
    pub failure: Option<String>,
    /// OMA baseline for this cluster's users, bits/s (always computable).
    pub oma_sum_bps: f64,
    pub oracle: Option<OracleCheck>,
}

/// Whole-cell result of running one scenario.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Number of clusters the users were split into.
    pub kappa: usize,
    pub clusters: Vec<ClusterOutcome>,
    /// Sum throughput over clusters that have an allocation, bits/s.
    pub noma_total_bps: f64,
    /// OMA baseline over *all* clusters, bits/s — the baseline does not
    /// depend on NOMA feasibility, so infeasible clusters still count.
    pub oma_total_bps: f64,
    pub any_infeasible: bool,
}

impl RunOutcome {
    /// `ok` when every cluster solved, `infeasible` when none did,
    /// `partial` otherwise.
    pub fn status(&self) -> &'static str {
        let solved = self
            .clusters
            .iter()
            .filter(|c| c.allocation.is_some())
            .count();
        if solved == self.clusters.len() {
            "ok"
        } else if solved == 0 {
            "infeasible"
        } else {
            "partial"
        }
    }
}

/// Grid budgets for the verification oracle, chosen so a full `verify`
/// pass stays interactive: finer grids for the cheap low-dimensional
/// searches, coarser for the 3-D downlink case.
pub fn oracle_budget(direction: Direction, m: usize) -> (usize, usize) {
    match (direction, m) {
        (Direction::Downlink, 2) => (200, 4),
        (Direction::Downlink, 3) => (100, 4),
        (Direction::Downlink, _) => (50, 4),
        (Direction::Uplink, _) => (200, 4),
    }
}

/// Runs the oracle against one solved cluster.
pub fn oracle_check(
    cluster: &Cluster,
    report: &AllocationReport,
    scenario: &Scenario,
) -> OracleCheck {
    let m = cluster.size();
    if cluster.direction() == Direction::Downlink && m > 4 {
        return OracleCheck::Unsupported(
            "grid oracle supports downlink clusters of at most 4 users",
        );
    }
    let (grid, refinements) = oracle_budget(cluster.direction(), m);
    let solved = match cluster.direction() {
        Direction::Downlink => {
            oracle::dl_numeric_optimum(cluster, &scenario.params, grid, refinements)
        }
        Direction::Uplink => {
            oracle::ul_numeric_optimum(cluster, &scenario.params, grid, refinements)
        }
    };
    match solved {
        Ok((_, oracle_sum_bps)) => OracleCheck::Agreement {
            oracle_sum_bps,
            rel_gap: (report.noma_sum - oracle_sum_bps).abs() / oracle_sum_bps.abs(),
        },
        Err(_) => OracleCheck::NoFeasiblePoint,
    }
}

/// Clusters the scenario's users and solves every cluster.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutcome> {
    let users = scenario.users();
    let gains: Vec<f64> = users.iter().map(|u| u.gain).collect();
    let config = ClusteringConfig {
        alpha_mode: scenario.alpha_mode(),
        direction: scenario.direction,
    };
    let assignment = clustering::plan(&gains, &config).context("clustering failed")?;
    let clusters = clustering::build_clusters(
        &users,
        &assignment,
        scenario.direction,
        scenario.rbs_per_cluster,
        &scenario.params,
    )
    .context("cluster construction failed")?;

    let mut outcome = RunOutcome {
        kappa: clusters.len(),
        clusters: Vec::with_capacity(clusters.len()),
        noma_total_bps: 0.0,
        oma_total_bps: 0.0,
        any_infeasible: false,
    };

    for (i, cluster) in clusters.into_iter().enumerate() {
        let solved = match scenario.direction {
            Direction::Downlink => {
                dl_power::dl_optimize(&cluster, &scenario.params).map_err(|e| e.to_string())
            }
            Direction::Uplink => {
                ul_power::ul_optimize(&cluster, &scenario.params).map_err(|e| e.to_string())
            }
        };
        let oma_sum_bps = throughput::oma_cluster_sum(&cluster, &scenario.params);
        outcome.oma_total_bps += oma_sum_bps;

        let co = match solved {
            Ok(alloc) => {
                let report = throughput::report(&cluster, &alloc, &scenario.params);
                outcome.noma_total_bps += report.noma_sum;
                let oracle = scenario
                    .oracle_check
                    .then(|| oracle_check(&cluster, &report, scenario));
                ClusterOutcome {
                    index: i + 1,
                    cluster,
                    allocation: Some(report),
                    failure: None,
                    oma_sum_bps,
                    oracle,
                }
            }
            Err(why) => {
                outcome.any_infeasible = true;
                ClusterOutcome {
                    index: i + 1,
                    cluster,
                    allocation: None,
                    failure: Some(why),
                    oma_sum_bps,
                    oracle: None,
                }
            }
        };
        outcome.clusters.push(co);
    }
    Ok(outcome)
}

// ----------------------------------------------------------------------
// CSV emission
// ----------------------------------------------------------------------

/// Formats bits/s as Mbit/s with two decimals.
pub fn mbps(bps: f64) -> String {
    format!("{:.2}", bps / 1e6)
}

/// Writes the `run` CSV: one `user` row per user, one `cluster` summary
/// row per cluster, one final `system` row. Fields that do not apply to
/// a record type are left empty rather than repeated, so downstream
/// `grep ^cluster` / `grep ^system` slices are self-contained.
pub fn write_run_csv(scenario: &Scenario, outcome: &RunOutcome, out: &mut dyn Write) -> Result<()> {
    let oma = |bps: f64| -> String {
        if scenario.oma_compare {
            mbps(bps)
        } else {
            String::new()
        }
    };
    let mut header = "record,cluster,user,gain_db,min_rate_kbps,power_dbm,rate_mbps,\
noma_sum_mbps,oma_sum_mbps,signature,status"
        .to_string();
    if scenario.oracle_check {
        header.push_str(",oracle_sum_mbps,oracle_rel_gap");
    }
    writeln!(out, "{header}")?;

    let oracle_cells = |check: &Option<OracleCheck>| -> String {
        if !scenario.oracle_check {
            return String::new();
        }
        match check {
            Some(OracleCheck::Agreement {
                oracle_sum_bps,
                rel_gap,
            }) => {
                format!(",{:.4},{:.2e}", oracle_sum_bps / 1e6, rel_gap)
            }
            Some(OracleCheck::Unsupported(_)) => ",unsupported,".to_string(),
            Some(OracleCheck::NoFeasiblePoint) => ",no-feasible-point,".to_string(),
            None => ",,".to_string(),
        }
    };

    for co in &outcome.clusters {
        let status = if co.allocation.is_some() {
            "ok"
        } else {
            "infeasible"
        };
        for (slot, user) in co.cluster.users().iter().enumerate() {
            let (power, rate) = match &co.allocation {
                Some(report) => (
                    format!("{:.2}", watts_to_dbm(report.powers[slot])),
                    mbps(report.rates[slot]),
                ),
                None => (String::new(), String::new()),
            };
            let tail = if scenario.oracle_check { ",," } else { "" };
            // ids are sorted ranks, so the original dB value (exact, no
            // round trip through linear) sits at id−1 in the scenario.
            let gain_db = scenario.gains_db[(user.user_id - 1) as usize];
            writeln!(
                out,
                "user,{},{},{},{},{},{},,,,{}{}",
                co.index,
                user.user_id,
                gain_db,
                user.min_rate / 1e3,
                power,
                rate,
                status,
                tail,
            )?;
        }
        let (noma_sum, signature) = match &co.allocation {
            Some(report) => (mbps(report.noma_sum), report.signature.label()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "cluster,{},,,,,,{},{},{},{}{}",
            co.index,
            noma_sum,
            oma(co.oma_sum_bps),
            signature,
            status,
            oracle_cells(&co.oracle),
        )?;
    }

    let tail = if scenario.oracle_check { ",," } else { "" };
    writeln!(
        out,
        "system,,,,,,,{},{},,{}{}",
        mbps(outcome.noma_total_bps),
        oma(outcome.oma_total_bps),
        outcome.status(),
        tail,
    )?;
    Ok(())
}

// ----------------------------------------------------------------------
