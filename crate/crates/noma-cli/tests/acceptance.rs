//! Acceptance gate for the workspace: eight end-to-end checks, one test
//! per criterion, each producing a single pass/fail line in the test
//! summary. Together they establish that
//!
//! 1. closed-form optima agree with an independent numerical oracle,
//! 2. the general per-signature recurrences reproduce hand-expanded
//!    small-cluster formulas term for term,
//! 3. the strongest downlink user's power respects the SIC halving bound,
//! 4. closed-form optima satisfy the KKT optimality conditions,
//! 5. the bundled benchmark suite reproduces the reference throughput
//!    tables including every best-cluster-size decision,
//! 6. gain sweeps reproduce the expected NOMA-versus-OMA orderings,
//! 7. stride clustering matches goldens and holds its invariants, and
//! 8. the benchmark table CSV is byte-identical across runs.

use approx::assert_relative_eq;
use noma::clustering::{self, AlphaMode, ClusteringConfig};
use noma::DlBinding::{RateBinding as R, SicBinding as S};
use noma::{
    db_to_linear, dbm_to_watts, dl_power, oracle, ul_power, Cluster, Direction, DlBinding,
    SystemParams, UlVariant, UserChannel,
};
use noma_cli::scenario::Scenario;
use noma_cli::sweep::{self, PointStatus, SweepSpec};
use noma_cli::tables;
use noma_cli::verify::{self, random_feasible_cluster, VerifyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::Instant;

/// Seed shared by the oracle cross-check and the KKT check so both see
/// the exact same random instance stream.
const CROSS_CHECK_SEED: u64 = 20260823;

// ----------------------------------------------------------------------
// Criterion 1 — closed form vs numerical oracle
// ----------------------------------------------------------------------

#[test]
fn closed_form_optima_match_independent_numerical_oracle() {
    let start = Instant::now();
    let config = VerifyConfig {
        seed: CROSS_CHECK_SEED,
        instances: 100,
        ..VerifyConfig::default()
    };
    let reports = verify::run_verify(&config).unwrap();
    assert_eq!(reports.len(), 6, "2 directions x cluster sizes 2..4");
    for r in &reports {
        assert_eq!(r.oracle_failures, 0, "{}", r.summary_line(&config));
        assert!(
            r.worst_gap <= 1e-4,
            "oracle disagreement beyond 1e-4: {}",
            r.summary_line(&config)
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 60.0,
        "600-instance cross-check took {elapsed:.1} s, budget is 60 s"
    );
}

// ----------------------------------------------------------------------
// Criterion 2 — hand-expanded small-cluster formulas
// ----------------------------------------------------------------------

/// Random strictly-descending gains (linear) and per-user rates (bits/s).
fn random_inputs(rng: &mut impl Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut g_db = rng.random_range(25.0..45.0);
    let mut gains = Vec::with_capacity(m);
    let mut rates = Vec::with_capacity(m);
    for _ in 0..m {
        gains.push(db_to_linear(g_db));
        rates.push(rng.random_range(50.0..500.0) * 1e3);
        g_db -= rng.random_range(1.0..8.0);
    }
    (gains, rates)
}

fn cluster_of(
    direction: Direction,
    gains: &[f64],
    rates: &[f64],
    params: &SystemParams,
) -> Cluster {
    let users: Vec<UserChannel> = gains
        .iter()
        .zip(rates)
        .enumerate()
        .map(|(i, (&gain, &min_rate))| UserChannel {
            user_id: (i + 1) as u32,
            gain,
            min_rate,
        })
        .collect();
    let rbs = users.len() as u32;
    match direction {
        Direction::Downlink => {
            Cluster::downlink(users, rbs, params.cluster_power_budget(rbs)).unwrap()
        }
        Direction::Uplink => Cluster::uplink(users, rbs).unwrap(),
    }
}

/// Every downlink binding pattern for m = 2, 3, 4 written out as the
/// fully expanded closed-form expressions (no shared recurrence), to be
/// compared term for term against the implementation.
fn expanded_dl_rows(
    m: usize,
    pt: f64,
    w: f64,
    g: &[f64],
    f: &[f64], // f[i] = 2^(R_{i+1} / (w B)), 1-based user i+1
    ptol: f64,
) -> Vec<(Vec<DlBinding>, Vec<f64>)> {
    let (g1, g2) = (g[0], g[1]);
    match m {
        2 => {
            let f2 = f[1];
            vec![
                (
                    vec![R],
                    vec![
                        pt / f2 - w * (f2 - 1.0) / (f2 * g2),
                        pt * (f2 - 1.0) / f2 + w * (f2 - 1.0) / (f2 * g2),
                    ],
                ),
                (
                    vec![S],
                    vec![pt / 2.0 - ptol / (2.0 * g1), pt / 2.0 + ptol / (2.0 * g1)],
                ),
            ]
        }
        3 => {
            let (f2, f3) = (f[1], f[2]);
            let g3 = g[2];
            vec![
                (
                    vec![R, R],
                    vec![
                        pt / (f2 * f3)
                            - w * (f2 - 1.0) / (f2 * g2)
                            - w * (f3 - 1.0) / (f2 * f3 * g3),
                        pt * (f2 - 1.0) / (f2 * f3) + w * (f2 - 1.0) / (f2 * g2)
                            - w * (f2 - 1.0) * (f3 - 1.0) / (f2 * f3 * g3),
                        pt * (f3 - 1.0) / f3 + w * (f3 - 1.0) / (f3 * g3),
                    ],
                ),
                (
                    vec![R, S],
                    vec![
                        pt / (2.0 * f2) - w * (f2 - 1.0) / (f2 * g2) - ptol / (2.0 * f2 * g2),
                        pt * (f2 - 1.0) / (2.0 * f2) + w * (f2 - 1.0) / (f2 * g2)
                            - ptol * (f2 - 1.0) / (2.0 * f2 * g2),
                        pt / 2.0 + ptol / (2.0 * g2),
                    ],
                ),
                (
                    vec![S, R],
                    vec![
                        pt / (2.0 * f3) - ptol / (2.0 * g1) - w * (f3 - 1.0) / (2.0 * f3 * g3),
                        pt / (2.0 * f3) + ptol / (2.0 * g1) - w * (f3 - 1.0) / (2.0 * f3 * g3),
                        pt * (f3 - 1.0) / f3 + w * (f3 - 1.0) / (f3 * g3),
                    ],
                ),
                (
                    vec![S, S],
                    vec![
                        pt / 4.0 - ptol / (2.0 * g1) - ptol / (4.0 * g2),
                        pt / 4.0 + ptol / (2.0 * g1) - ptol / (4.0 * g2),
                        pt / 2.0 + ptol / (2.0 * g2),
                    ],
                ),
            ]
        }
        4 => {
            let (f2, f3, f4) = (f[1], f[2], f[3]);
            let (g3, g4) = (g[2], g[3]);
            vec![
                (
                    vec![R, R, R],
                    vec![
                        pt / (f2 * f3 * f4)
                            - w * (f2 - 1.0) / (f2 * g2)
                            - w * (f3 - 1.0) / (f2 * f3 * g3)
                            - w * (f4 - 1.0) / (f2 * f3 * f4 * g4),
                        pt * (f2 - 1.0) / (f2 * f3 * f4) + w * (f2 - 1.0) / (f2 * g2)
                            - w * (f2 - 1.0) * (f3 - 1.0) / (f2 * f3 * g3)
                            - w * (f2 - 1.0) * (f4 - 1.0) / (f2 * f3 * f4 * g4),
                        pt * (f3 - 1.0) / (f3 * f4) + w * (f3 - 1.0) / (f3 * g3)
                            - w * (f3 - 1.0) * (f4 - 1.0) / (f3 * f4 * g4),
                        pt * (f4 - 1.0) / f4 + w * (f4 - 1.0) / (f4 * g4),
                    ],
                ),
                (
                    vec![R, R, S],
                    vec![
                        pt / (2.0 * f2 * f3)
                            - w * (f2 - 1.0) / (f2 * g2)
                            - w * (f3 - 1.0) / (f2 * f3 * g3)
                            - ptol / (2.0 * f2 * f3 * g3),
                        pt * (f2 - 1.0) / (2.0 * f2 * f3) + w * (f2 - 1.0) / (f2 * g2)
                            - w * (f2 - 1.0) * (f3 - 1.0) / (f2 * f3 * g3)
                            - ptol * (f2 - 1.0) / (2.0 * f2 * f3 * g3),
                        pt * (f3 - 1.0) / (2.0 * f3) + w * (f3 - 1.0) / (f3 * g3)
                            - ptol * (f3 - 1.0) / (2.0 * f3 * g3),
                        pt / 2.0 + ptol / (2.0 * g3),
                    ],
                ),
                (
                    vec![R, S, R],
                    vec![
                        pt / (2.0 * f2 * f4)
                            - w * (f2 - 1.0) / (f2 * g2)
                            - w * (f4 - 1.0) / (2.0 * f2 * f4 * g4)
                            - ptol / (2.0 * f2 * g2),
                        pt * (f2 - 1.0) / (2.0 * f2 * f4) + w * (f2 - 1.0) / (f2 * g2)
                            - w * (f2 - 1.0) * (f4 - 1.0) / (2.0 * f2 * f4 * g4)
                            - ptol * (f2 - 1.0) / (2.0 * f2 * g2),
                        pt / (2.0 * f4) + ptol / (2.0 * g2) - w * (f4 - 1.0) / (2.0 * f4 * g4),
                        pt * (f4 - 1.0) / f4 + w * (f4 - 1.0) / (f4 * g4),
                    ],
                ),
                (
                    vec![S, R, R],
                    vec![
                        pt / (2.0 * f3 * f4)
                            - ptol / (2.0 * g1)
                            - w * (f3 - 1.0) / (2.0 * f3 * g3)
                            - w * (f4 - 1.0) / (2.0 * f3 * f4 * g4),
                        pt / (2.0 * f3 * f4) + ptol / (2.0 * g1)
                            - w * (f3 - 1.0) / (2.0 * f3 * g3)
                            - w * (f4 - 1.0) / (2.0 * f3 * f4 * g4),
                        pt * (f3 - 1.0) / (f3 * f4) + w * (f3 - 1.0) / (f3 * g3)
                            - w * (f3 - 1.0) * (f4 - 1.0) / (f3 * f4 * g4),
                        pt * (f4 - 1.0) / f4 + w * (f4 - 1.0) / (f4 * g4),
                    ],
                ),
                (
                    vec![R, S, S],
                    vec![
                        pt / (4.0 * f2)
                            - w * (f2 - 1.0) / (f2 * g2)
                            - ptol / (2.0 * f2 * g2)
                            - ptol / (4.0 * f2 * g3),
                        pt * (f2 - 1.0) / (4.0 * f2) + w * (f2 - 1.0) / (f2 * g2)
                            - ptol * (f2 - 1.0) / (2.0 * f2 * g2)
                            - ptol * (f2 - 1.0) / (4.0 * f2 * g3),
                        pt / 4.0 + ptol / (2.0 * g2) - ptol / (4.0 * g3),
                        pt / 2.0 + ptol / (2.0 * g3),
                    ],
                ),
                (
                    vec![S, R, S],
                    vec![
                        pt / (4.0 * f3)
                            - ptol / (2.0 * g1)
                            - w * (f3 - 1.0) / (2.0 * f3 * g3)
                            - ptol / (4.0 * f3 * g3),
                        pt / (4.0 * f3) + ptol / (2.0 * g1)
                            - w * (f3 - 1.0) / (2.0 * f3 * g3)
                            - ptol / (4.0 * f3 * g3),
                        pt * (f3 - 1.0) / (2.0 * f3) + w * (f3 - 1.0) / (f3 * g3)
                            - ptol * (f3 - 1.0) / (2.0 * f3 * g3),
                        pt / 2.0 + ptol / (2.0 * g3),
                    ],
                ),
                (
                    vec![S, S, R],
                    vec![
                        pt / (4.0 * f4)
                            - ptol / (2.0 * g1)
                            - ptol / (4.0 * g2)
                            - w * (f4 - 1.0) / (4.0 * f4 * g4),
                        pt / (4.0 * f4) + ptol / (2.0 * g1)
                            - ptol / (4.0 * g2)
                            - w * (f4 - 1.0) / (4.0 * f4 * g4),
                        pt / (2.0 * f4) + ptol / (2.0 * g2) - w * (f4 - 1.0) / (2.0 * f4 * g4),
                        pt * (f4 - 1.0) / f4 + w * (f4 - 1.0) / (f4 * g4),
                    ],
                ),
                (
                    vec![S, S, S],
                    vec![
                        pt / 8.0 - ptol / (2.0 * g1) - ptol / (4.0 * g2) - ptol / (8.0 * g3),
                        pt / 8.0 + ptol / (2.0 * g1) - ptol / (4.0 * g2) - ptol / (8.0 * g3),
                        pt / 4.0 + ptol / (2.0 * g2) - ptol / (4.0 * g3),
                        pt / 2.0 + ptol / (2.0 * g3),
                    ],
                ),
            ]
        }
        _ => unreachable!(),
    }
}

#[test]
fn small_cluster_power_formulas_match_hand_expanded_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let params = SystemParams {
            sic_tolerance: dbm_to_watts(rng.random_range(5.0..15.0)),
            ..SystemParams::default()
        };
        for m in [2usize, 3, 4] {
            let (gains, rates) = random_inputs(&mut rng, m);
            let w = m as f64;
            let b = params.rb_bandwidth;

            // Downlink: every binding pattern against its expanded form.
            let dl = cluster_of(Direction::Downlink, &gains, &rates, &params);
            let f: Vec<f64> = rates.iter().map(|r| (r / (w * b)).exp2()).collect();
            let rows = expanded_dl_rows(m, dl.power_budget(), w, &gains, &f, params.sic_tolerance);
            assert_eq!(rows.len(), 1 << (m - 1));
            for (sig, expected) in rows {
                let got = dl_power::dl_candidate_powers(&dl, &sig, &params);
                for (a, e) in got.powers.iter().zip(&expected) {
                    assert_relative_eq!(a, e, max_relative = 1e-12);
                }
            }

            // Uplink: the three candidate structures.
            let ul = cluster_of(Direction::Uplink, &gains, &rates, &params);
            let ptu = params.ue_power_budget;
            let fm1 = (rates[m - 2] / (w * b)).exp2() - 1.0;
            let (gm1, gm) = (gains[m - 2], gains[m - 1]);
            let tail = [
                (UlVariant::AllFullPower, ptu),
                (UlVariant::RateControlled, ptu * gm1 / (fm1 * gm) - w / gm),
                (
                    UlVariant::SicControlled,
                    ptu * gm1 / gm - params.sic_tolerance / gm,
                ),
            ];
            for (variant, last) in tail {
                let got = ul_power::ul_candidate_powers(&ul, variant, &params);
                for p in &got.powers[..m - 1] {
                    assert_relative_eq!(p, &ptu, max_relative = 1e-12);
                }
                assert_relative_eq!(got.powers[m - 1], last, max_relative = 1e-12);
            }
        }
    }
}

// ----------------------------------------------------------------------
// Criterion 3 — halving bound on the strongest downlink user
// ----------------------------------------------------------------------

#[test]
fn strongest_user_power_obeys_sic_halving_bound() {
    // The all-SIC signature maximises the strongest user's share, so the
    // bound is checked where it is tight: strict inequality whenever the
    // SIC threshold is positive, exact equality when it is zero.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [2usize, 3, 4] {
        let all_sic = vec![S; m - 1];
        for _ in 0..50 {
            let params = SystemParams {
                sic_tolerance: dbm_to_watts(rng.random_range(0.0..20.0)),
                ..SystemParams::default()
            };
            let (gains, rates) = random_inputs(&mut rng, m);
            let cluster = cluster_of(Direction::Downlink, &gains, &rates, &params);
            let bound = dl_power::dl_max_power_bound(m, cluster.power_budget());
            let candidate = dl_power::dl_candidate_powers(&cluster, &all_sic, &params);
            assert!(
                candidate.powers[0] < bound,
                "m={m}: all-SIC P1 = {} not strictly below {bound}",
                candidate.powers[0]
            );

            let params0 = SystemParams {
                sic_tolerance: 0.0,
                ..params
            };
            let exact = dl_power::dl_candidate_powers(&cluster, &all_sic, &params0);
            assert_relative_eq!(exact.powers[0], bound, max_relative = 1e-12);
        }
    }

    // The bound also caps the optimiser end to end: the chosen
    // allocation never grants the strongest user more.
    let params = SystemParams::default();
    for m in [2usize, 3, 4] {
        for _ in 0..50 {
            let (cluster, alloc) =
                random_feasible_cluster(&mut rng, Direction::Downlink, m, &params);
            let bound = dl_power::dl_max_power_bound(m, cluster.power_budget());
            assert!(
                alloc.powers[0] < bound,
                "m={m}: optimal P1 = {} not below {bound}",
                alloc.powers[0]
            );
        }
    }

    // With a zero threshold and negligible rate floors the all-SIC
    // pattern wins outright and the optimum attains the bound exactly.
    let params0 = SystemParams {
        sic_tolerance: 0.0,
        ..SystemParams::default()
    };
    for m in [2usize, 3, 4] {
        let gains: Vec<f64> = [40.0, 30.0, 20.0, 10.0][..m]
            .iter()
            .copied()
            .map(db_to_linear)
            .collect();
        let rates = vec![1e3; m];
        let cluster = cluster_of(Direction::Downlink, &gains, &rates, &params0);
        let alloc = dl_power::dl_optimize(&cluster, &params0).unwrap();
        let bound = dl_power::dl_max_power_bound(m, cluster.power_budget());
        assert_relative_eq!(alloc.powers[0], bound, max_relative = 1e-12);
    }
}

// ----------------------------------------------------------------------
// Criterion 4 — KKT conditions at the closed-form optima
// ----------------------------------------------------------------------

#[test]
fn closed_form_optima_satisfy_kkt_conditions() {
    // Same seed as the oracle cross-check, so these are the exact same
    // 600 allocations whose values criterion 1 verified.
    let params = SystemParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(CROSS_CHECK_SEED);
    for direction in [Direction::Downlink, Direction::Uplink] {
        for m in [2usize, 3, 4] {
            for i in 0..100 {
                let (cluster, alloc) = random_feasible_cluster(&mut rng, direction, m, &params);
                let kkt = oracle::kkt_residuals(&cluster, &alloc, &params).unwrap();
                assert!(
                    kkt.min_multiplier() >= -1e-8,
                    "{} m={m} instance {i}: negative multiplier {:.3e}",
                    direction.as_str(),
                    kkt.min_multiplier()
                );
                assert!(
                    kkt.max_comp_slack() <= 1e-8,
                    "{} m={m} instance {i}: complementary slackness {:.3e}",
                    direction.as_str(),
                    kkt.max_comp_slack()
                );
            }
        }
    }
}

// ----------------------------------------------------------------------
// Criterion 5 — bundled benchmark suite vs reference throughputs
// ----------------------------------------------------------------------

/// Reference cell throughputs (Mbps) per case: NOMA at each studied
/// cluster size, the OMA baseline, and the winning cluster size.
const DL_REFERENCE: [([f64; 3], f64, usize); 14] = [
    ([10.30, 11.72, 12.78], 8.15, 4),
    ([13.39, 16.13, 18.36], 9.85, 4),
    ([16.38, 20.37, 23.74], 11.51, 4),
    ([19.25, 24.45, 24.08], 13.10, 3),
    ([22.00, 24.62, 24.40], 14.64, 3),
    ([24.65, 24.77, 24.70], 16.13, 3),
    ([24.71, 24.91, 24.89], 17.56, 3),
    ([24.76, 25.04, 25.07], 18.93, 4),
    ([24.81, 25.11, 25.23], 20.25, 4),
    ([24.86, 25.18, 25.32], 21.51, 4),
    ([24.90, 25.24, 25.40], 22.72, 4),
    ([24.93, 25.29, 25.47], 23.86, 4),
    ([20.11, 22.03, 22.84], 14.24, 4),
    ([4.54, 4.46, 4.25], 4.11, 2),
];

const UL_REFERENCE: [([f64; 4], f64, usize); 14] = [
    ([9.17, 10.34, 11.28, 12.90], 7.14, 6),
    ([11.91, 13.86, 15.50, 18.34], 8.93, 6),
    ([14.33, 16.88, 19.05, 18.97], 10.59, 4),
    ([16.42, 19.40, 19.37, 19.59], 12.11, 6),
    ([18.17, 19.58, 19.68, 19.83], 13.48, 6),
    ([19.58, 19.76, 19.98, 20.06], 14.69, 6),
    ([19.65, 19.93, 20.08, 20.17], 15.75, 6),
    ([19.72, 20.09, 20.17, 20.27], 16.64, 6),
    ([19.78, 20.13, 20.25, 20.32], 17.36, 6),
    ([19.84, 20.16, 20.28, 20.36], 17.91, 6),
    ([19.89, 20.19, 20.30, 20.38], 18.29, 6),
    ([19.92, 20.22, 20.32, 20.40], 18.49, 6),
    ([16.93, 17.96, 18.35, 18.65], 12.89, 6),
    ([6.11, 6.33, 6.41, 6.47], 5.23, 6),
];

fn assert_within_10pct(actual_mbps: f64, reference_mbps: f64, what: &str) {
    assert!(
        (actual_mbps - reference_mbps).abs() <= 0.10 * reference_mbps,
        "{what}: {actual_mbps:.3} Mbps vs reference {reference_mbps:.2}"
    );
}

#[test]
fn bundled_benchmark_suite_reproduces_reference_throughputs() {
    let dl = tables::table_rows(Direction::Downlink).unwrap();
    assert_eq!(dl.len(), 14);
    for (row, (noma, oma, best)) in dl.iter().zip(DL_REFERENCE) {
        let case = row.case;
        assert_eq!(row.status, "ok", "downlink case {case}");
        assert_eq!(row.best_size, Some(best), "downlink case {case} winner");
        for (slot, reference) in noma.iter().enumerate() {
            let actual = row.noma_bps[slot].unwrap() / 1e6;
            assert_within_10pct(
                actual,
                *reference,
                &format!("downlink case {case} size {}", tables::TABLE_SIZES[slot]),
            );
        }
        assert!(row.noma_bps[3].is_none(), "downlink has no 6-user column");
        assert_within_10pct(row.oma_bps / 1e6, oma, &format!("downlink case {case} OMA"));
    }

    let ul = tables::table_rows(Direction::Uplink).unwrap();
    assert_eq!(ul.len(), 14);
    for (row, (noma, oma, best)) in ul.iter().zip(UL_REFERENCE) {
        let case = row.case;
        assert_eq!(row.status, "ok", "uplink case {case}");
        assert_eq!(row.best_size, Some(best), "uplink case {case} winner");
        for (slot, reference) in noma.iter().enumerate() {
            let actual = row.noma_bps[slot].unwrap() / 1e6;
            assert_within_10pct(
                actual,
                *reference,
                &format!("uplink case {case} size {}", tables::TABLE_SIZES[slot]),
            );
        }
        assert_within_10pct(row.oma_bps / 1e6, oma, &format!("uplink case {case} OMA"));
    }
}

// ----------------------------------------------------------------------
// Criterion 6 — NOMA vs OMA orderings along gain sweeps
// ----------------------------------------------------------------------

#[test]
fn gain_sweeps_show_expected_noma_vs_oma_ordering() {
    // Downlink pair, 100 kbps floors: NOMA dominates OMA over the whole
    // weak-user range.
    let s = Scenario::parse("noma-scenario v1\ndirection = downlink\ngains_db = 40, 0\n").unwrap();
    let spec = SweepSpec {
        user: 2,
        from_db: 0.0,
        to_db: 39.5,
        step_db: 0.5,
    };
    let rows = sweep::sweep_points(&s, &spec).unwrap();
    assert_eq!(rows.len(), 80);
    for row in &rows {
        assert_eq!(
            row.status,
            PointStatus::Ok,
            "downlink pair at {} dB",
            row.gain_db
        );
        assert!(
            row.noma_sum_bps >= row.oma_sum_bps,
            "downlink pair at {} dB: NOMA {} < OMA {}",
            row.gain_db,
            row.noma_sum_bps,
            row.oma_sum_bps
        );
    }

    // Uplink pair with 1 Mbps floors: once the weak user's gain gets
    // close to the strong user's, the rate floor forces deep power
    // control and OMA overtakes NOMA somewhere in the range.
    let s = Scenario::parse(
        "noma-scenario v1\ndirection = uplink\ngains_db = 40, 17\nmin_rate_kbps = 1000\n",
    )
    .unwrap();
    let spec = SweepSpec {
        user: 2,
        from_db: 17.0,
        to_db: 39.5,
        step_db: 0.5,
    };
    let rows = sweep::sweep_points(&s, &spec).unwrap();
    assert_eq!(rows.len(), 46);
    assert!(rows.iter().all(|r| r.status == PointStatus::Ok));
    assert!(
        rows.iter().any(|r| r.noma_sum_bps < r.oma_sum_bps),
        "expected an OMA-favourable region in the uplink pair sweep"
    );

    // Uplink triple with 1 Mbps floors: with two strong users fixed,
    // NOMA stays on top across the weakest user's range.
    let s = Scenario::parse(
        "noma-scenario v1\ndirection = uplink\ngains_db = 40, 34, 16\nmin_rate_kbps = 1000\n",
    )
    .unwrap();
    let spec = SweepSpec {
        user: 3,
        from_db: 16.0,
        to_db: 33.5,
        step_db: 0.5,
    };
    let rows = sweep::sweep_points(&s, &spec).unwrap();
    assert_eq!(rows.len(), 36);
    for row in &rows {
        assert_eq!(
            row.status,
            PointStatus::Ok,
            "uplink triple at {} dB",
            row.gain_db
        );
        assert!(
            row.noma_sum_bps >= row.oma_sum_bps,
            "uplink triple at {} dB: NOMA {} < OMA {}",
            row.gain_db,
            row.noma_sum_bps,
            row.oma_sum_bps
        );
    }
}

// ----------------------------------------------------------------------
// Criterion 7 — clustering goldens and invariants
// ----------------------------------------------------------------------

#[test]
fn stride_clustering_matches_goldens_and_random_invariants() {
    // Golden assignments for 12 users, every studied cluster count.
    let goldens: [(usize, &[&[usize]]); 4] = [
        (2, &[&[0, 2, 4, 6, 8, 10], &[1, 3, 5, 7, 9, 11]]),
        (3, &[&[0, 3, 6, 9], &[1, 4, 7, 10], &[2, 5, 8, 11]]),
        (4, &[&[0, 4, 8], &[1, 5, 9], &[2, 6, 10], &[3, 7, 11]]),
        (6, &[&[0, 6], &[1, 7], &[2, 8], &[3, 9], &[4, 10], &[5, 11]]),
    ];
    for (kappa, expected) in goldens {
        for direction in [Direction::Downlink, Direction::Uplink] {
            let got = clustering::group_users(12, kappa, direction).unwrap();
            let want: Vec<Vec<usize>> = expected.iter().map(|c| c.to_vec()).collect();
            assert_eq!(got.clusters, want, "kappa {kappa} {}", direction.as_str());
        }
    }

    // Forcing the cluster size drives the same counts through the full
    // alpha → kappa pipeline.
    let gains: Vec<f64> = (0..12)
        .map(|i| db_to_linear(40.0 - 2.0 * i as f64))
        .collect();
    for (m, kappa) in [(6usize, 2usize), (4, 3), (3, 4), (2, 6)] {
        let assignment = clustering::plan(
            &gains,
            &ClusteringConfig {
                alpha_mode: AlphaMode::ForcedClusterSize(m),
                direction: Direction::Downlink,
            },
        )
        .unwrap();
        assert_eq!(assignment.clusters.len(), kappa, "forced size {m}");
    }

    // 1000 random instances: exact partition, stride structure, sizes
    // within one of each other, nobody below two users.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..1000 {
        let n: usize = rng.random_range(4..=40);
        let mut g_db = 45.0;
        let gains: Vec<f64> = (0..n)
            .map(|_| {
                g_db -= rng.random_range(0.1..12.0);
                db_to_linear(g_db)
            })
            .collect();
        let alpha_mode = match rng.random_range(0..3) {
            0 => AlphaMode::Explicit(rng.random_range(1..=n)),
            1 => AlphaMode::ForcedClusterSize(rng.random_range(2..=n)),
            _ => AlphaMode::LargestGap {
                min_gap_db: rng.random_range(3.0..15.0),
            },
        };
        let direction = if rng.random_bool(0.5) {
            Direction::Downlink
        } else {
            Direction::Uplink
        };
        let assignment = clustering::plan(
            &gains,
            &ClusteringConfig {
                alpha_mode: alpha_mode.clone(),
                direction,
            },
        )
        .unwrap_or_else(|e| panic!("trial {trial} n={n} {alpha_mode:?}: {e}"));

        let kappa = assignment.clusters.len();
        assert!(
            kappa >= 1 && n >= 2 * kappa,
            "trial {trial}: kappa {kappa} for n {n}"
        );
        let mut seen = vec![false; n];
        for (j, cluster) in assignment.clusters.iter().enumerate() {
            let expected: Vec<usize> = (j..n).step_by(kappa).collect();
            assert_eq!(cluster, &expected, "trial {trial} cluster {j} not a stride");
            assert!(cluster.len() >= 2, "trial {trial} cluster {j} too small");
            for &idx in cluster {
                assert!(!seen[idx], "trial {trial}: user {idx} assigned twice");
                seen[idx] = true;
            }
        }
        assert!(
            seen.iter().all(|&s| s),
            "trial {trial}: some user unassigned"
        );
        let sizes: Vec<usize> = assignment.clusters.iter().map(Vec::len).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1, "trial {trial}: uneven sizes {sizes:?}");
    }
}

// ----------------------------------------------------------------------
// Criterion 8 — deterministic table emission
// ----------------------------------------------------------------------

#[test]
fn benchmark_table_csv_is_byte_identical_across_runs() {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_noma"))
            .arg("tables")
            .output()
            .expect("binary should spawn");
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        out.stdout
    };
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run(), "second run differed");
    assert_eq!(first, run(), "third run differed");

    // Writing through --output must produce the same bytes as stdout.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tables.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_noma"))
        .args(["tables", "--output", path.to_str().unwrap()])
        .output()
        .expect("binary should spawn");
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(std::fs::read(&path).unwrap(), first);
}
