//! Test-case registry, cross-method comparison and file output.

mod cases;
mod config;
mod csv;
mod metrics;
mod run;

pub use cases::{
    Method, Scale, TestCase, TestCaseId, DESK_DT_PROB, DESK_DX, DESK_PARTICLES, PAPER_DT_DET, PAPER_DT_PROB, PAPER_DX,
    PAPER_PARTICLES,
};
pub use config::{resolve_run, ConfigFile, RunSettings, DEFAULT_SEED, SEED_ENV};
pub use csv::{
    export_csv, import_errors, import_snapshots, read_samples, snapshot_file, SnapshotBlock, BANDWIDTHS_FILE,
    DIAGNOSTICS_FILE, ERRORS_FILE,
};
pub use metrics::{attracting_set_check, lp_error, AttractingSetCheck, Norm};
pub use run::{
    comparison_pairs, run_test_case, ErrorRow, MethodDiagnostics, MethodSnapshots, RunReport, ATTRACTING_TOL,
    FREEZE_MARGIN, PLATEAU_TOL,
};
