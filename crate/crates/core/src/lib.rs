//! Minimum external control sources for target controllability of directed
//! networks.
//!
//! Covering a target node set `S` with vertex-disjoint directed paths and
//! cycles needs one independent input per path (at least one overall). The
//! minimum path count is found as `|S| - maxflow` on a split-node unit
//! network ([`mftp::solve`]), cross-checked against a lower-bounded minimum
//! flow formulation ([`mftp::solve_via_circulation`]) and, for `S = V`,
//! against maximum matching ([`matching::driver_count_mm`]). The resulting
//! allocation can be certified numerically with [`verify`].

pub mod flow;
pub mod graph;
pub mod matching;
pub mod mftp;
pub mod sweep;
pub mod verify;

pub use flow::{BoundedFlowNetwork, Capacity, FlowAssignment, FlowError};
pub use graph::{DiGraph, GraphError, LabelMap, NodeId, TargetSet};
pub use matching::{driver_count_mm, max_bipartite_matching, Matching};
pub use mftp::{
    allocate_drivers, solve, solve_via_circulation, verify_cover, DriverAllocation, PathCover,
    Solution, SolveError,
};
pub use sweep::{run_sweep, SweepResult, SweepRow};
pub use verify::{DenseMatrix, LtiSystem, VerifyError};
