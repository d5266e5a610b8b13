//! Explicit-state model checking of finite models, and the brute-force
//! simulation oracle.

pub mod compile;
pub mod ctl;
pub mod explore;
pub mod oracle;
pub mod report;

pub use ctl::{check_ctl, replay, At, CtlOutcome, Evidence, TraceStep};
pub use explore::{explore, ExploreOptions, StateSpace, Successors, ELSE_LABEL};
pub use oracle::{oracle_downward_sim, OracleReport, OracleWitness};
pub use report::{
    check_condition, check_refinement, CheckOptions, ConditionReport, Counterexample,
    RefinementReport, Verdict, REPORT_SCHEMA,
};
