//! The `noma-scenario v1` input format.
//!
//! A scenario is a small line-oriented text file describing one cell:
//! link direction, the user gains, per-user rate requirements, and any
//! overrides of the cell-level defaults. Example:
//!
//! ```text
//! noma-scenario v1
//! # Two-tier cell: one strong user above a weak crowd.
//! direction = downlink
//! gains_db = 40, 15, 14.5, 14, 13.5, 13, 12.5, 12, 11.5, 11, 10.5, 10
//! min_rate_kbps = 100
//! ```
//!
//! The first line is a version header so the format can evolve without
//! silently misreading old files. After it, every non-blank line is a
//! `key = value` pair; `#` starts a comment anywhere on a line. Unknown
//! and duplicate keys are hard errors, so a typo cannot quietly fall back
//! to a default.
//!
//! Users are ranked strongest-first: the gain list is sorted descending
//! on ingest (ties are rejected — identical gains cannot be ordered for
//! SIC) and user ids 1..N refer to positions in that sorted order.

use anyhow::{bail, ensure, Context, Result};
use noma::clustering::AlphaMode;
use noma::{dbm_to_watts, Direction, SystemParams, UserChannel};
use std::collections::HashSet;

/// Required first line of every scenario file.
pub const HEADER: &str = "noma-scenario v1";

/// How the cluster size is decided for this scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum SizePolicy {
    /// Detect the high-gain class from the largest gain drop of at least
    /// `min_gap_db` (the `min_gap_db` key, default 10 dB).
    Auto { min_gap_db: f64 },
    /// `cluster_size = m`: force clusters of m users.
    ForcedClusterSize(usize),
    /// `alpha = a`: fix the high-gain class size directly.
    ExplicitAlpha(usize),
}

/// One parsed scenario, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub direction: Direction,
    /// Channel gains in dB, sorted strictly descending.
    pub gains_db: Vec<f64>,
    /// Per-user minimum rates in kbit/s, same order as `gains_db`.
    pub min_rates_kbps: Vec<f64>,
    pub size_policy: SizePolicy,
    /// Common ω override; `None` means ω = cluster size.
    pub rbs_per_cluster: Option<u32>,
    pub params: SystemParams,
    /// Include the orthogonal-access baseline column in reports.
    pub oma_compare: bool,
    /// Re-derive each optimum numerically and report the relative gap.
    pub oracle_check: bool,
}

impl Scenario {
    /// Parses scenario text. The header line must come first; everything
    /// else may appear in any order.
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == HEADER => {}
            Some((_, first)) => bail!(
                "first line must be the version header {HEADER:?}, got {:?}",
                first.trim()
            ),
            None => bail!("empty scenario file (missing {HEADER:?} header)"),
        }

        let mut direction = None;
        let mut gains_db: Option<Vec<f64>> = None;
        let mut min_rate_kbps: Option<Vec<f64>> = None;
        let mut cluster_size = None;
        let mut alpha = None;
        let mut min_gap_db = None;
        let mut rbs_per_cluster = None;
        let mut params = SystemParams::default();
        let mut oma_compare = true;
        let mut oracle_check = false;
        let mut seen = HashSet::new();

        for (idx, raw) in lines {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {lineno}: expected `key = value`, got {line:?}"))?;
            let (key, value) = (key.trim(), value.trim());
            ensure!(
                seen.insert(key.to_string()),
                "line {lineno}: duplicate key {key:?}"
            );
            let ctx = || format!("line {lineno}: key {key:?}");

            match key {
                "direction" => {
                    direction = Some(match value {
                        "downlink" => Direction::Downlink,
                        "uplink" => Direction::Uplink,
                        other => bail!("line {lineno}: direction must be `downlink` or `uplink`, got {other:?}"),
                    });
                }
                "gains_db" => gains_db = Some(parse_list(value).with_context(ctx)?),
                "min_rate_kbps" => min_rate_kbps = Some(parse_list(value).with_context(ctx)?),
                "cluster_size" => cluster_size = Some(parse_num::<usize>(value).with_context(ctx)?),
                "alpha" => alpha = Some(parse_num::<usize>(value).with_context(ctx)?),
                "min_gap_db" => min_gap_db = Some(parse_num::<f64>(value).with_context(ctx)?),
                "rbs_per_cluster" => {
                    rbs_per_cluster = Some(parse_num::<u32>(value).with_context(ctx)?)
                }
                "p_total_dbm" => {
                    params.total_dl_power = dbm_to_watts(parse_num(value).with_context(ctx)?)
                }
                "ue_power_dbm" => {
                    params.ue_power_budget = dbm_to_watts(parse_num(value).with_context(ctx)?)
                }
                "p_tol_dbm" => {
                    params.sic_tolerance = dbm_to_watts(parse_num(value).with_context(ctx)?)
                }
                "rb_bandwidth_khz" => {
                    params.rb_bandwidth = parse_num::<f64>(value).with_context(ctx)? * 1e3
                }
                "total_rbs" => params.total_rbs = parse_num(value).with_context(ctx)?,
                "oma_compare" => oma_compare = parse_bool(value).with_context(ctx)?,
                "oracle_check" => oracle_check = parse_bool(value).with_context(ctx)?,
                other => bail!("line {lineno}: unknown key {other:?}"),
            }
        }

        let direction = direction.context("missing required key `direction`")?;
        let mut gains_db = gains_db.context("missing required key `gains_db`")?;
        ensure!(
            gains_db.len() >= 2,
            "gains_db needs at least 2 users, got {}",
            gains_db.len()
        );
        gains_db.sort_by(|a, b| b.total_cmp(a));
        if let Some(pair) = gains_db.windows(2).find(|w| w[0] == w[1]) {
            bail!(
                "gains_db contains a tie ({} dB twice); tied users cannot be SIC-ordered",
                pair[0]
            );
        }

        let n = gains_db.len();
        let min_rates_kbps = match min_rate_kbps {
            None => vec![100.0; n],
            Some(list) if list.len() == 1 => vec![list[0]; n],
            Some(list) if list.len() == n => list,
            Some(list) => bail!(
                "min_rate_kbps must be a single value or one per user ({n}), got {} values",
                list.len()
            ),
        };
        if let Some(bad) = min_rates_kbps.iter().find(|r| **r <= 0.0 || r.is_nan()) {
            bail!("min_rate_kbps entries must be positive, got {bad}");
        }

        let size_policy = match (cluster_size, alpha) {
            (Some(_), Some(_)) => {
                bail!("`cluster_size` and `alpha` are mutually exclusive; give at most one")
            }
            (Some(m), None) => SizePolicy::ForcedClusterSize(m),
            (None, Some(a)) => SizePolicy::ExplicitAlpha(a),
            (None, None) => SizePolicy::Auto {
                min_gap_db: min_gap_db.unwrap_or(10.0),
            },
        };
        if min_gap_db.is_some() && !matches!(size_policy, SizePolicy::Auto { .. }) {
            bail!(
                "`min_gap_db` only applies to automatic sizing; drop it or drop cluster_size/alpha"
            );
        }

        params.validate()?;

        Ok(Scenario {
            direction,
            gains_db,
            min_rates_kbps,
            size_policy,
            rbs_per_cluster,
            params,
            oma_compare,
            oracle_check,
        })
    }

    /// The α-selection mode this scenario's policy maps to.
    pub fn alpha_mode(&self) -> AlphaMode {
        match self.size_policy {
            SizePolicy::Auto { min_gap_db } => AlphaMode::LargestGap { min_gap_db },
            SizePolicy::ForcedClusterSize(m) => AlphaMode::ForcedClusterSize(m),
            SizePolicy::ExplicitAlpha(a) => AlphaMode::Explicit(a),
        }
    }

    /// Users in sorted order, ids 1..N, rates converted to bits/s.
    pub fn users(&self) -> Vec<UserChannel> {
        self.gains_db
            .iter()
            .zip(&self.min_rates_kbps)
            .enumerate()
            .map(|(i, (&g_db, &r_kbps))| UserChannel {
                user_id: (i + 1) as u32,
                gain: noma::db_to_linear(g_db),
                min_rate: r_kbps * 1e3,
            })
            .collect()
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|item| parse_num::<f64>(item.trim()))
        .collect()
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .parse::<T>()
        .with_context(|| format!("cannot parse {value:?} as a number"))
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => bail!("expected `true` or `false`, got {other:?}"),
    }
}

// ----------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(direction: &str) -> String {
        format!("noma-scenario v1\ndirection = {direction}\ngains_db = 40, 15, 10\n")
    }

    #[test]
    fn parses_minimal_downlink_scenario_with_defaults() {
        let s = Scenario::parse(&minimal("downlink")).unwrap();
        assert_eq!(s.direction, Direction::Downlink);
        assert_eq!(s.gains_db, vec![40.0, 15.0, 10.0]);
        assert_eq!(s.min_rates_kbps, vec![100.0; 3], "default rate is 100 kbps");
        assert_eq!(s.size_policy, SizePolicy::Auto { min_gap_db: 10.0 });
        assert_eq!(s.rbs_per_cluster, None);
        assert!(s.oma_compare);
        assert!(!s.oracle_check);
        assert_eq!(s.params, SystemParams::default());
    }

    #[test]
    fn parses_every_key_with_comments_and_blank_lines() {
        let text = "\
noma-scenario v1
# full-keyword exercise
direction = uplink   # trailing comment

gains_db = 40, 31, 22, 13
min_rate_kbps = 100, 200, 100, 50
cluster_size = 4
rbs_per_cluster = 4
p_total_dbm = 43
ue_power_dbm = 20
p_tol_dbm = 7
rb_bandwidth_khz = 360
total_rbs = 50
oma_compare = false
oracle_check = true
";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.direction, Direction::Uplink);
        assert_eq!(s.min_rates_kbps, vec![100.0, 200.0, 100.0, 50.0]);
        assert_eq!(s.size_policy, SizePolicy::ForcedClusterSize(4));
        assert_eq!(s.rbs_per_cluster, Some(4));
        assert_eq!(s.params.ue_power_budget, dbm_to_watts(20.0));
        assert_eq!(s.params.rb_bandwidth, 360e3);
        assert_eq!(s.params.total_rbs, 50);
        assert!(!s.oma_compare);
        assert!(s.oracle_check);
    }

    #[test]
    fn unsorted_gains_are_sorted_descending() {
        let text = "noma-scenario v1\ndirection = downlink\ngains_db = 10, 40, 15\n";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.gains_db, vec![40.0, 15.0, 10.0]);
        let users = s.users();
        assert_eq!(users[0].user_id, 1, "ids follow sorted rank");
        assert!(users[0].gain > users[2].gain);
    }

    #[test]
    fn scalar_rate_broadcasts_and_users_convert_units() {
        let text = "noma-scenario v1\ndirection = uplink\ngains_db = 30, 20\nmin_rate_kbps = 250\n";
        let s = Scenario::parse(text).unwrap();
        let users = s.users();
        assert_eq!(users.len(), 2);
        assert_eq!(users[0].min_rate, 250e3, "kbps becomes bits/s");
        assert_eq!(users[1].gain, noma::db_to_linear(20.0));
    }

    #[test]
    fn rejects_missing_or_wrong_header() {
        let err = Scenario::parse("direction = downlink\n").unwrap_err();
        assert!(err.to_string().contains("version header"), "{err}");
        let err = Scenario::parse("noma-scenario v2\ndirection = downlink\n").unwrap_err();
        assert!(err.to_string().contains("version header"), "{err}");
        assert!(Scenario::parse("").is_err());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let text = format!("{}gains = 1, 2\n", minimal("downlink"));
        let err = Scenario::parse(&text).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");

        let text = format!("{}direction = uplink\n", minimal("downlink"));
        let err = Scenario::parse(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");
    }

    #[test]
    fn rejects_tied_gains() {
        let text = "noma-scenario v1\ndirection = downlink\ngains_db = 40, 15, 15\n";
        let err = Scenario::parse(text).unwrap_err();
        assert!(err.to_string().contains("tie"), "{err}");
    }

    #[test]
    fn rejects_rate_list_of_wrong_length() {
        let text = "noma-scenario v1\ndirection = downlink\ngains_db = 40, 15, 10\nmin_rate_kbps = 100, 200\n";
        let err = Scenario::parse(text).unwrap_err();
        assert!(err.to_string().contains("one per user"), "{err}");
    }

    #[test]
    fn rejects_cluster_size_alpha_conflicts() {
        let text = format!("{}cluster_size = 2\nalpha = 3\n", minimal("downlink"));
        let err = Scenario::parse(&text).unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"), "{err}");

        let text = format!("{}cluster_size = 2\nmin_gap_db = 5\n", minimal("downlink"));
        let err = Scenario::parse(&text).unwrap_err();
        assert!(err.to_string().contains("automatic sizing"), "{err}");
    }

    #[test]
    fn rejects_malformed_values_with_line_numbers() {
        let text = "noma-scenario v1\ndirection = downlink\ngains_db = 40, abc\n";
        let err = format!("{:#}", Scenario::parse(text).unwrap_err());
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("abc"), "{err}");

        let text = "noma-scenario v1\ndirection = sideways\n";
        let err = Scenario::parse(text).unwrap_err();
        assert!(err.to_string().contains("downlink"), "{err}");

        let text = format!("{}oracle_check = yes\n", minimal("uplink"));
        let err = format!("{:#}", Scenario::parse(&text).unwrap_err());
        assert!(err.contains("true"), "{err}");
    }

    #[test]
    fn bundled_scenarios_all_parse() {
        // The 28 benchmark cases shipped with the binary must stay valid.
        for (name, text) in crate::tables::BUNDLED_SCENARIOS {
            let s = Scenario::parse(text)
                .unwrap_or_else(|e| panic!("bundled scenario {name} failed to parse: {e:#}"));
            assert_eq!(s.gains_db.len(), 12, "{name} should describe 12 users");
        }
    }
}
