//! Experiment orchestration: benchmark runs, leak audits, resolution and
//! sample-size sweeps, human-trial sessions and reports.

mod experiments;
mod human;
pub mod reference;
mod report;
mod session;

pub use experiments::{
    audit_leakage, default_audit_variants, flag_for, load_or_generate, resolution_ablation, run_benchmark,
    run_one, run_one_observed, sample_efficiency, AuditEntry, AuditReport, BenchmarkOutcome, Failure, Flag,
    Labeled, SweepReport, LEAK_THRESHOLD,
};
pub use human::{human_accuracy, HumanCohortStats};
pub use report::{from_csv, render_table, to_csv, ResultRow};
pub use session::{
    AnswerOutcome, SessionParams, SessionRegistry, SessionStatus, Trial, TrialImage, TrialSession,
};
