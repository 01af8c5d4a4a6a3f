//! Whole-cell walkthroughs against the public API only: gains in, clusters
//! out, powers allocated, rates reported, oracle consulted. What a binary
//! embedding this library would do, minus the I/O.

use approx::assert_relative_eq;
use noma::clustering::{self, AlphaMode, ClusteringConfig};
use noma::{
    db_to_linear, dl_power, oracle, throughput, ul_power, Cluster, Direction, SystemParams,
    UserChannel,
};

fn cell_users(gains_db: &[f64]) -> Vec<UserChannel> {
    gains_db
        .iter()
        .enumerate()
        .map(|(i, &g)| UserChannel {
            user_id: (i + 1) as u32,
            gain: db_to_linear(g),
            min_rate: 100e3,
        })
        .collect()
}

const CELL_GAINS_DB: [f64; 8] = [40.0, 35.0, 30.0, 26.0, 22.0, 18.0, 14.0, 10.0];

#[test]
fn downlink_cell_pipeline_from_gains_to_reports() {
    let params = SystemParams::default();
    let users = cell_users(&CELL_GAINS_DB);
    let gains: Vec<f64> = users.iter().map(|u| u.gain).collect();

    let assignment = clustering::plan(
        &gains,
        &ClusteringConfig {
            alpha_mode: AlphaMode::ForcedClusterSize(2),
            direction: Direction::Downlink,
        },
    )
    .unwrap();
    assert_eq!(assignment.clusters.len(), 4);

    let clusters =
        clustering::build_clusters(&users, &assignment, Direction::Downlink, None, &params)
            .unwrap();

    let mut cell_noma = 0.0;
    let mut cell_oma = 0.0;
    for cluster in &clusters {
        let alloc = dl_power::dl_optimize(cluster, &params).expect("default cell is feasible");
        // The whole budget is spent and nobody outranks a weaker user.
        assert_relative_eq!(
            alloc.powers.iter().sum::<f64>(),
            cluster.power_budget(),
            max_relative = 1e-9
        );
        assert!(alloc.powers.windows(2).all(|w| w[0] < w[1]));

        let report = throughput::report(cluster, &alloc, &params);
        for (rate, user) in report.rates.iter().zip(cluster.users()) {
            assert!(
                *rate >= user.min_rate * (1.0 - 1e-9),
                "user {} rate {} below floor {}",
                user.user_id,
                rate,
                user.min_rate
            );
        }
        cell_noma += report.noma_sum;
        cell_oma += report.oma_sum;
    }
    assert!(
        cell_noma > cell_oma,
        "non-orthogonal cell sum {cell_noma} should beat the orthogonal baseline {cell_oma}"
    );
}

#[test]
fn uplink_cell_pipeline_respects_per_user_budgets() {
    let params = SystemParams::default();
    let users = cell_users(&CELL_GAINS_DB);
    let gains: Vec<f64> = users.iter().map(|u| u.gain).collect();

    let assignment = clustering::plan(
        &gains,
        &ClusteringConfig {
            alpha_mode: AlphaMode::ForcedClusterSize(4),
            direction: Direction::Uplink,
        },
    )
    .unwrap();
    assert_eq!(assignment.clusters.len(), 2);

    let clusters =
        clustering::build_clusters(&users, &assignment, Direction::Uplink, None, &params).unwrap();
    for cluster in &clusters {
        let alloc = ul_power::ul_optimize(cluster, &params).expect("default cell is feasible");
        for p in &alloc.powers {
            assert!(*p > 0.0 && *p <= params.ue_power_budget * (1.0 + 1e-12));
        }
        let report = throughput::report(cluster, &alloc, &params);
        for (rate, user) in report.rates.iter().zip(cluster.users()) {
            assert!(*rate >= user.min_rate * (1.0 - 1e-9));
        }
        assert!(report.noma_sum > report.oma_sum);
    }
}

#[test]
fn closed_form_allocation_survives_the_oracle_and_kkt_checks() {
    let params = SystemParams::default();
    let users = cell_users(&[40.0, 28.0, 16.0]);
    let cluster = Cluster::downlink(users, 3, params.cluster_power_budget(3)).unwrap();

    let alloc = dl_power::dl_optimize(&cluster, &params).unwrap();
    let closed_sum = throughput::sum_rate(&cluster, &alloc.powers, &params);

    let (_, oracle_sum) = oracle::dl_numeric_optimum(&cluster, &params, 100, 4).unwrap();
    assert!((closed_sum - oracle_sum).abs() <= 1e-4 * oracle_sum);

    let kkt = oracle::kkt_residuals(&cluster, &alloc, &params).unwrap();
    assert!(kkt.satisfied(1e-8), "{kkt:?}");
}

#[test]
fn impossible_demand_comes_back_as_an_error_not_a_panic() {
    let params = SystemParams::default();
    let mut users = cell_users(&[40.0, 30.0]);
    users[1].min_rate = 1e9; // a gigabit floor no 2-RB cluster can carry

    let cluster = Cluster::downlink(users.clone(), 2, params.cluster_power_budget(2)).unwrap();
    let err = dl_power::dl_optimize(&cluster, &params).unwrap_err();
    assert!(err.to_string().contains("rejected"), "{err}");

    let ul_cluster = Cluster::uplink(users, 2).unwrap();
    let err = ul_power::ul_optimize(&ul_cluster, &params).unwrap_err();
    assert!(err.to_string().contains("rejected"), "{err}");
}
