//! Exact solvers for minimum-imbalance control-group selection.
//!
//! Given treatment and control samples with nominal covariates, pick a
//! fixed-size subset of the controls whose per-level counts track the
//! treatment group as closely as possible. For two covariates the problem
//! is solved exactly in polynomial time by network flows; [`balance2`]
//! offers a min-cost-flow route and a max-flow route with selection
//! recovery, and [`oracle`] provides an exhaustive baseline for any number
//! of covariates on tiny instances. [`matchbal`] handles the second stage
//! of matching-with-balance: a minimum-distance assignment of selected
//! controls to treatment samples. The `covbal` binary in this crate wraps
//! everything behind a CSV-in / JSON-out command line.

pub mod balance;
pub mod balance2;
pub mod cli;
pub mod matchbal;
pub mod netflow;
pub mod oracle;

pub use balance::{
    imbalance, index_levels, intersection_counts, kappa_expand, materialize, Dataset,
    ImbalanceReport, IntersectionCounts, LevelIndex, Sample, Selection,
};
pub use balance2::{
    build_maxflow_graph, build_mcnf_graph, classify_3type, recover_selection, solve_maxflow2,
    solve_mcnf2, Solve2Result, SolveMethod,
};
pub use matchbal::{assign_controls, Assignment, DistanceMatrix};
pub use netflow::{
    certify_maxflow, certify_mcnf, maxflow_solve, mcnf_solve, Capacity, FlowAssignment,
    FlowNetwork,
};
pub use oracle::{
    exact_min_imbalance, gen_3dm_dataset, random_instance, random_planted_3dm, OracleResult,
    ThreeDMInstance,
};
