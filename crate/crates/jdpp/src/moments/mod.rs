//! Closed-form moment machinery: pairings and crossings, cycle traces,
//! determinant sums, Fock correlation measures and quasi-free closed forms.

mod closed;
mod cycle;
mod growth;
mod pairing;
mod report;
mod routes;

pub use closed::{
    j_map, npoint_s, s02_closed, s11_closed, s20_closed, two_point_closed, two_point_t, ClosedFormReport, MAX_NPOINT,
};
pub use cycle::{cycle_trace_moment, cycles, next_permutation, MAX_CYCLE_N};
pub use growth::{growth_bound_check, GrowthReport, GrowthRow, GROWTH_SLACK};
pub use pairing::{
    count_crossings, pair_partitions, quasi_free_by_partitions, quasi_free_expectation, quasi_free_word, PairPartition,
    MAX_PAIRING_LEN,
};
pub use report::{check_moment_caps, moment_report, MomentReport};
pub use routes::{
    correlation_measure, determinant_moment_sum, factorial, pairing_expansion_moment, wick_moment, MAX_DET_N,
    MAX_DET_TUPLES, MAX_FOCK_D, MAX_FOCK_N, MAX_PAIRING_D, MAX_PAIRING_N,
};
