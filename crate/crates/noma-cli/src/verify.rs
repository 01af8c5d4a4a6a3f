//! Self-verification: random feasible clusters solved twice — once with
//! the closed forms, once with the brute-force numerical oracle — plus a
//! KKT multiplier check on every closed-form optimum.
//!
//! This is the trust anchor for the closed forms: the oracle knows
//! nothing about binding-signature enumeration, it just grid-searches
//! the constrained region, so agreement across random instances is
//! evidence the algebra is right rather than self-consistent.

use crate::pipeline::oracle_budget;
use anyhow::Result;
use noma::{
    dl_power, oracle, throughput, ul_power, Cluster, Direction, PowerAllocation, SystemParams,
    UserChannel,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tunables for one verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random instances per direction × cluster-size combination.
    pub instances: usize,
    /// Maximum allowed |closed − oracle| / oracle.
    pub tolerance: f64,
    /// Maximum allowed KKT residual (negative multiplier magnitude or
    /// complementary-slackness product).
    pub kkt_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            instances: 25,
            tolerance: 1e-4,
            kkt_tolerance: 1e-8,
        }
    }
}

/// Worst-case observations for one direction × cluster size.
#[derive(Debug, Clone)]
pub struct ComboReport {
    pub direction: Direction,
    pub cluster_size: usize,
    pub instances: usize,
    /// Largest relative gap between closed form and oracle.
    pub worst_gap: f64,
    /// Smallest Lagrange multiplier seen (must not be meaningfully negative).
    pub min_multiplier: f64,
    /// Largest complementary-slackness product seen.
    pub max_comp_slack: f64,
    /// Instances where the oracle found no feasible point at all.
    pub oracle_failures: usize,
}

impl ComboReport {
    pub fn pass(&self, config: &VerifyConfig) -> bool {
        self.oracle_failures == 0
            && self.worst_gap <= config.tolerance
            && self.min_multiplier >= -config.kkt_tolerance
            && self.max_comp_slack <= config.kkt_tolerance
    }

    /// One human-readable PASS/FAIL line.
    pub fn summary_line(&self, config: &VerifyConfig) -> String {
        format!(
            "{} {} m={}: {} instances, worst oracle gap {:.2e}, min multiplier {:.2e}, max comp slack {:.2e}{}",
            if self.pass(config) { "PASS" } else { "FAIL" },
            self.direction.as_str(),
            self.cluster_size,
            self.instances,
            self.worst_gap,
            self.min_multiplier,
            self.max_comp_slack,
            if self.oracle_failures > 0 {
                format!(", {} oracle failures", self.oracle_failures)
            } else {
                String::new()
            },
        )
    }
}

/// Draws one cluster whose closed-form problem is feasible, by rejection
/// sampling over two gain/rate regimes: a mainstream macro-cell regime
/// and (30% of draws, downlink only) a stressed low-gain regime where
/// rate constraints bind harder. Panics after 1000 rejected draws — at
/// these parameter ranges that means the generator itself is broken.
pub fn random_feasible_cluster(
    rng: &mut impl Rng,
    direction: Direction,
    m: usize,
    params: &SystemParams,
) -> (Cluster, PowerAllocation) {
    for _ in 0..1000 {
        let cluster = draw_cluster(rng, direction, m, params);
        let solved = match direction {
            Direction::Downlink => dl_power::dl_optimize(&cluster, params).ok(),
            Direction::Uplink => ul_power::ul_optimize(&cluster, params).ok(),
        };
        if let Some(alloc) = solved {
            return (cluster, alloc);
        }
    }
    panic!(
        "no feasible {m}-user {} instance in 1000 draws",
        direction.as_str()
    );
}

fn draw_cluster(
    rng: &mut impl Rng,
    direction: Direction,
    m: usize,
    params: &SystemParams,
) -> Cluster {
    let stressed = direction == Direction::Downlink && rng.random_bool(0.3);
    let (top_db, gap_db, rate_kbps) = match (direction, stressed) {
        (Direction::Downlink, false) => (30.0..42.0, 2.0..7.0, 30.0..250.0),
        (Direction::Downlink, true) => (20.0..30.0, 4.0..8.0, 20.0..120.0),
        (Direction::Uplink, _) => (25.0..42.0, 0.5..6.0, 50.0..1500.0),
    };

    let mut gain_db = rng.random_range(top_db);
    let mut users = Vec::with_capacity(m);
    for i in 0..m {
        users.push(UserChannel {
            user_id: (i + 1) as u32,
            gain: noma::db_to_linear(gain_db),
            min_rate: rng.random_range(rate_kbps.clone()) * 1e3,
        });
        gain_db -= rng.random_range(gap_db.clone());
    }

    let rbs = m as u32;
    match direction {
        Direction::Downlink => {
            Cluster::downlink(users, rbs, params.cluster_power_budget(rbs)).unwrap()
        }
        Direction::Uplink => Cluster::uplink(users, rbs).unwrap(),
    }
}

/// Runs the full verification sweep: both directions, cluster sizes
/// 2–4, `instances` random feasible clusters each.
pub fn run_verify(config: &VerifyConfig) -> Result<Vec<ComboReport>> {
    let params = SystemParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reports = Vec::new();
    for direction in [Direction::Downlink, Direction::Uplink] {
        for m in [2usize, 3, 4] {
            reports.push(verify_combo(&mut rng, direction, m, config, &params)?);
        }
    }
    Ok(reports)
}

fn verify_combo(
    rng: &mut impl Rng,
    direction: Direction,
    m: usize,
    config: &VerifyConfig,
    params: &SystemParams,
) -> Result<ComboReport> {
    let (grid, refinements) = oracle_budget(direction, m);
    let mut report = ComboReport {
        direction,
        cluster_size: m,
        instances: config.instances,
        worst_gap: 0.0,
        min_multiplier: f64::INFINITY,
        max_comp_slack: 0.0,
        oracle_failures: 0,
    };
    for _ in 0..config.instances {
        let (cluster, alloc) = random_feasible_cluster(rng, direction, m, params);
        let closed = throughput::sum_rate(&cluster, &alloc.powers, params);
        let numeric = match direction {
            Direction::Downlink => oracle::dl_numeric_optimum(&cluster, params, grid, refinements),
            Direction::Uplink => oracle::ul_numeric_optimum(&cluster, params, grid, refinements),
        };
        match numeric {
            Ok((_, oracle_sum)) => {
                let gap = (closed - oracle_sum).abs() / oracle_sum.abs();
                report.worst_gap = report.worst_gap.max(gap);
            }
            Err(_) => report.oracle_failures += 1,
        }
        let kkt = oracle::kkt_residuals(&cluster, &alloc, params)?;
        report.min_multiplier = report.min_multiplier.min(kkt.min_multiplier());
        report.max_comp_slack = report.max_comp_slack.max(kkt.max_comp_slack());
    }
    Ok(report)
}

// ----------------------------------------------------------------------
