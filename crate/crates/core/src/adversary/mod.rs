//! Attacks on the chain and the statistics used to judge them.
//!
//! Scenarios are plain data. The scheduler weaves them into the honest
//! event order, trials run them under independent seeds, and the oracle
//! gives the exact detection probability to compare against.

pub mod collusion;
pub mod oracle;
pub mod scenario;
pub mod scheduler;
pub mod stats;
pub mod trials;

pub use collusion::{collude, forge_and_present, ForgeryResult};
pub use oracle::detection_oracle;
pub use scenario::{AttackScenario, Channel, CollusionStrategy, KeyComponent, MeasureBasis};
pub use scheduler::{attack_schedule, honest_schedule, inject_out_of_order, run, Event, Resource, Schedule, Step};
pub use stats::{chi_square_uniform, wilson, Breakdown, DetectionStats, Z95};
pub use trials::{collect_observations, run_scheduled, run_trial, run_trials, DataSpec, TrialOutcome};
