//! SNR sweeps over MC, QMC, RQMC and adaptive IS, method comparison and result files.
//!
//! Word `i` of a cell uses codeword `i` and point `i` of the method's stream. Packs
//! are consecutive blocks of `N` words; the IS methods spend the same `N * N_s`
//! samples across their adaptation rounds. Bits depend only on the seed, so every
//! method in a run sees the same codewords.

mod compare;
mod config;
mod output;
mod run;

pub use compare::{compare_methods, DifferenceRow, DIFFERENCE_COLUMNS};
pub use config::{ExperimentConfig, Method, Modulation, OutputFormat};
pub use output::{
    emit_results, emit_results_to_path, parse_results_csv, read_csv, read_results_path,
    write_records, write_records_to_path, RESULT_COLUMNS,
};
pub use run::{
    bit_seed, estimate_plain, initial_proposal, link_scenario, noise_seed, pack_ranges,
    point_kind, run_cell, run_experiment, run_experiment_logged, CellOutcome, ExperimentOutcome,
    ResultRow, RunLogEntry,
};
