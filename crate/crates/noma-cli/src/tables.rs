//! The bundled 12-user benchmark suite: 14 downlink and 14 uplink gain
//! profiles, each solved at every studied cluster size, emitted as one
//! summary CSV. Cases 1–12 grade the weak-user tier upward toward the
//! strong users, case 13 mixes tiers, case 14 is a low-SNR cell.
//!
//! Cluster sizes follow the resource-block convention ω = m, so the OMA
//! baseline gives each user one RB regardless of m and the OMA column is
//! size-independent (it is computed from the 2-user run).

use crate::pipeline::{self, mbps};
use crate::scenario::{Scenario, SizePolicy};
use anyhow::{Context, Result};
use noma::Direction;
use std::io::Write;

/// Name → contents of every scenario shipped inside the binary.
pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
    (
        "downlink/case01",
        include_str!("../scenarios/downlink/case01.scn"),
    ),
    (
        "downlink/case02",
        include_str!("../scenarios/downlink/case02.scn"),
    ),
    (
        "downlink/case03",
        include_str!("../scenarios/downlink/case03.scn"),
    ),
    (
        "downlink/case04",
        include_str!("../scenarios/downlink/case04.scn"),
    ),
    (
        "downlink/case05",
        include_str!("../scenarios/downlink/case05.scn"),
    ),
    (
        "downlink/case06",
        include_str!("../scenarios/downlink/case06.scn"),
    ),
    (
        "downlink/case07",
        include_str!("../scenarios/downlink/case07.scn"),
    ),
    (
        "downlink/case08",
        include_str!("../scenarios/downlink/case08.scn"),
    ),
    (
        "downlink/case09",
        include_str!("../scenarios/downlink/case09.scn"),
    ),
    (
        "downlink/case10",
        include_str!("../scenarios/downlink/case10.scn"),
    ),
    (
        "downlink/case11",
        include_str!("../scenarios/downlink/case11.scn"),
    ),
    (
        "downlink/case12",
        include_str!("../scenarios/downlink/case12.scn"),
    ),
    (
        "downlink/case13",
        include_str!("../scenarios/downlink/case13.scn"),
    ),
    (
        "downlink/case14",
        include_str!("../scenarios/downlink/case14.scn"),
    ),
    (
        "uplink/case01",
        include_str!("../scenarios/uplink/case01.scn"),
    ),
    (
        "uplink/case02",
        include_str!("../scenarios/uplink/case02.scn"),
    ),
    (
        "uplink/case03",
        include_str!("../scenarios/uplink/case03.scn"),
    ),
    (
        "uplink/case04",
        include_str!("../scenarios/uplink/case04.scn"),
    ),
    (
        "uplink/case05",
        include_str!("../scenarios/uplink/case05.scn"),
    ),
    (
        "uplink/case06",
        include_str!("../scenarios/uplink/case06.scn"),
    ),
    (
        "uplink/case07",
        include_str!("../scenarios/uplink/case07.scn"),
    ),
    (
        "uplink/case08",
        include_str!("../scenarios/uplink/case08.scn"),
    ),
    (
        "uplink/case09",
        include_str!("../scenarios/uplink/case09.scn"),
    ),
    (
        "uplink/case10",
        include_str!("../scenarios/uplink/case10.scn"),
    ),
    (
        "uplink/case11",
        include_str!("../scenarios/uplink/case11.scn"),
    ),
    (
        "uplink/case12",
        include_str!("../scenarios/uplink/case12.scn"),
    ),
    (
        "uplink/case13",
        include_str!("../scenarios/uplink/case13.scn"),
    ),
    (
        "uplink/case14",
        include_str!("../scenarios/uplink/case14.scn"),
    ),
];

/// Number of benchmark cases per direction.
pub const CASES: usize = 14;

/// Column layout of the summary table (downlink leaves the 6-user column
/// empty — 6-user SIC chains are not studied on the downlink).
pub const TABLE_SIZES: [usize; 4] = [2, 3, 4, 6];

/// Cluster sizes actually solved for a direction.
pub fn sizes_for(direction: Direction) -> &'static [usize] {
    match direction {
        Direction::Downlink => &[2, 3, 4],
        Direction::Uplink => &[2, 3, 4, 6],
    }
}

/// Bundled scenario text for one direction and 1-based case number.
pub fn scenario_text(direction: Direction, case: usize) -> &'static str {
    let name = format!("{}/case{case:02}", direction.as_str());
    BUNDLED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled scenario named {name}"))
        .1
}

/// One benchmark case solved at every studied cluster size.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub direction: Direction,
    /// 1-based case number.
    pub case: usize,
    /// Cell NOMA throughput per entry of [`TABLE_SIZES`], bits/s; `None`
    /// when the size is not studied or some cluster was infeasible.
    pub noma_bps: [Option<f64>; TABLE_SIZES.len()],
    /// OMA baseline, bits/s (size-independent under ω = m).
    pub oma_bps: f64,
    /// Size with the highest throughput; earliest size wins exact ties.
    pub best_size: Option<usize>,
    /// `ok` when every studied size solved, `partial` otherwise.
    pub status: &'static str,
}

/// Solves all 14 cases of one direction at every studied cluster size.
pub fn table_rows(direction: Direction) -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(CASES);
    for case in 1..=CASES {
        let base = Scenario::parse(scenario_text(direction, case))
            .with_context(|| format!("bundled {}/case{case:02}", direction.as_str()))?;
        let mut noma_bps = [None; TABLE_SIZES.len()];
        let mut oma_bps = 0.0;
        let mut all_ok = true;
        for (slot, &size) in TABLE_SIZES.iter().enumerate() {
            if !sizes_for(direction).contains(&size) {
                continue;
            }
            let mut scenario = base.clone();
            scenario.size_policy = SizePolicy::ForcedClusterSize(size);
            let outcome = pipeline::run_scenario(&scenario)?;
            if outcome.status() == "ok" {
                noma_bps[slot] = Some(outcome.noma_total_bps);
            } else {
                all_ok = false;
            }
            if size == 2 {
                oma_bps = outcome.oma_total_bps;
            }
        }
        let best_size = TABLE_SIZES
            .iter()
            .zip(&noma_bps)
            .filter_map(|(&size, bps)| bps.map(|b| (size, b)))
            .fold(None::<(usize, f64)>, |best, (size, b)| match best {
                Some((_, bb)) if b <= bb => best,
                _ => Some((size, b)),
            })
            .map(|(size, _)| size);
        rows.push(TableRow {
            direction,
            case,
            noma_bps,
            oma_bps,
            best_size,
            status: if all_ok { "ok" } else { "partial" },
        });
    }
    Ok(rows)
}

/// Writes the summary CSV for one or both directions.
pub fn write_tables_csv(rows: &[TableRow], out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "direction,case,noma_2ue_mbps,noma_3ue_mbps,noma_4ue_mbps,noma_6ue_mbps,\
oma_mbps,best_cluster_size,status"
    )?;
    for row in rows {
        let cells: Vec<String> = row
            .noma_bps
            .iter()
            .map(|bps| bps.map(mbps).unwrap_or_default())
            .collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.direction.as_str(),
            row.case,
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            mbps(row.oma_bps),
            row.best_size.map(|s| s.to_string()).unwrap_or_default(),
            row.status,
        )?;
    }
    Ok(())
}

// ----------------------------------------------------------------------
