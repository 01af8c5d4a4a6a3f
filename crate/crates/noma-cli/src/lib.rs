//! Command-line front end for the [`noma`] crate.
//!
//! Four subcommands, all emitting CSV on stdout or `--output`:
//!
//! * `run` — solve one scenario file: cluster the users, allocate
//!   powers, report per-user/per-cluster/system throughput.
//! * `sweep` — re-solve a scenario while one user's gain walks a dB
//!   range, for throughput-versus-gain curves.
//! * `tables` — solve the bundled 28-case benchmark suite at every
//!   studied cluster size.
//! * `verify` — cross-check the closed-form optima against the
//!   brute-force numerical oracle on random feasible instances.
//!
//! The crate side of the binary is a thin library so integration and
//! acceptance tests can drive the exact code paths the CLI uses without
//! spawning processes.

pub mod pipeline;
pub mod scenario;
pub mod sweep;
pub mod tables;
pub mod verify;
