//! Semimetric spaces induced by bilinear tables, epsilon-nets, covering
//! numbers, separated sets and subsequence extraction.

mod audit;
mod nets;
mod sequences;
mod space;

pub use audit::{net_db_approx, NetApprox, NetAudit};
pub(crate) use nets::greedy_cover;
pub use nets::{
    covering_number, exact_covering_number, greedy_net, greedy_net_with, separated_set,
    uncovered_point, CoveringNumber, EXACT_COVER_LIMIT,
};
pub use sequences::{
    cauchy_subsequence, cauchy_subsequence_with, cauchy_tail_excess, diag_subsequence,
    CauchyExtraction,
};
pub use space::{
    induce_semimetrics, induce_semimetrics_with, AxiomReport, BilinearSystem, Semimetric,
    SemimetricSpace,
};
