//! Gain sweeps: re-run one scenario many times while moving a single
//! user's channel gain across a dB range, tracking per-user rates and
//! the NOMA/OMA totals. This is how the throughput-crossover pictures
//! (strong user fixed, weak user's gain on the x-axis) are produced.
//!
//! The swept user keeps its rank: positions are frozen at parse time, so
//! pushing user 2's gain above user 1's does not silently reorder the
//! cluster — the point is marked `order-violation` and skipped instead.

use crate::pipeline::{self, mbps};
use crate::scenario::Scenario;
use anyhow::{ensure, Result};
use std::io::Write;

/// Which user to sweep and over what range.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// 1-based rank of the swept user (1 = strongest).
    pub user: usize,
    pub from_db: f64,
    pub to_db: f64,
    pub step_db: f64,
}

/// Outcome class of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    /// Every cluster solved.
    Ok,
    /// Some clusters solved, some did not.
    Partial,
    /// No cluster solved.
    Infeasible,
    /// Swept gain broke the strict descending order; point not run.
    OrderViolation,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Partial => "partial",
            PointStatus::Infeasible => "infeasible",
            PointStatus::OrderViolation => "order-violation",
        }
    }
}

/// One evaluated point of the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    /// Gain given to the swept user at this point, dB.
    pub gain_db: f64,
    pub status: PointStatus,
    /// Per-user rates indexed by rank − 1; `None` for users in unsolved
    /// clusters (and for every user at an order-violation point).
    pub rates_bps: Vec<Option<f64>>,
    pub noma_sum_bps: f64,
    pub oma_sum_bps: f64,
}

/// Evaluates the sweep. Points are `from`, `from + step`, … up to `to`
/// (a half-ulp of slack absorbs accumulated step rounding so the
/// endpoint is included when it should be).
pub fn sweep_points(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let n = scenario.gains_db.len();
    ensure!(
        (1..=n).contains(&spec.user),
        "swept user must be a rank in 1..={n}, got {}",
        spec.user
    );
    ensure!(
        spec.step_db > 0.0,
        "step must be positive, got {}",
        spec.step_db
    );
    ensure!(
        spec.from_db <= spec.to_db,
        "sweep range is empty: from {} to {}",
        spec.from_db,
        spec.to_db
    );

    let mut rows = Vec::new();
    let mut k = 0u32;
    loop {
        let gain_db = spec.from_db + f64::from(k) * spec.step_db;
        if gain_db > spec.to_db + 1e-9 {
            break;
        }
        rows.push(evaluate_point(scenario, spec.user, gain_db)?);
        k += 1;
    }
    Ok(rows)
}

fn evaluate_point(scenario: &Scenario, user: usize, gain_db: f64) -> Result<SweepRow> {
    let n = scenario.gains_db.len();
    let mut point = scenario.clone();
    point.gains_db[user - 1] = gain_db;

    let ordered = point.gains_db.windows(2).all(|w| w[0] > w[1]);
    if !ordered {
        return Ok(SweepRow {
            gain_db,
            status: PointStatus::OrderViolation,
            rates_bps: vec![None; n],
            noma_sum_bps: 0.0,
            oma_sum_bps: 0.0,
        });
    }

    let outcome = pipeline::run_scenario(&point)?;
    let mut rates_bps = vec![None; n];
    for co in &outcome.clusters {
        if let Some(report) = &co.allocation {
            for (id, rate) in report.user_ids.iter().zip(&report.rates) {
                rates_bps[(*id - 1) as usize] = Some(*rate);
            }
        }
    }
    let status = match outcome.status() {
        "ok" => PointStatus::Ok,
        "partial" => PointStatus::Partial,
        _ => PointStatus::Infeasible,
    };
    Ok(SweepRow {
        gain_db,
        status,
        rates_bps,
        noma_sum_bps: outcome.noma_total_bps,
        oma_sum_bps: outcome.oma_total_bps,
    })
}

/// Writes the sweep CSV: one row per point, one rate column per user.
pub fn write_sweep_csv(
    scenario: &Scenario,
    spec: &SweepSpec,
    rows: &[SweepRow],
    out: &mut dyn Write,
) -> Result<()> {
    let n = scenario.gains_db.len();
    let mut header = String::from("swept_user,swept_gain_db");
    for i in 1..=n {
        header.push_str(&format!(",rate_u{i}_mbps"));
    }
    header.push_str(",noma_sum_mbps,oma_sum_mbps,status");
    writeln!(out, "{header}")?;

    for row in rows {
        let mut line = format!("{},{}", spec.user, row.gain_db);
        for rate in &row.rates_bps {
            match rate {
                Some(bps) => line.push_str(&format!(",{}", mbps(*bps))),
                None => line.push(','),
            }
        }
        if row.status == PointStatus::OrderViolation {
            line.push_str(",,");
        } else {
            line.push_str(&format!(
                ",{},{}",
                mbps(row.noma_sum_bps),
                if scenario.oma_compare {
                    mbps(row.oma_sum_bps)
                } else {
                    String::new()
                }
            ));
        }
        line.push_str(&format!(",{}", row.status.as_str()));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

// ----------------------------------------------------------------------
