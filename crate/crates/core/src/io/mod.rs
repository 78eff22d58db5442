//! Files in and out: manifests, CSV traces, run summaries and the
//! reproduction report.

mod manifest;
mod plan;
mod reproduce;
mod simulate;
mod tables;

pub use manifest::{read_json, RunManifest};
pub use plan::cmd_plan;
pub use reproduce::{
    cmd_reproduce_paper, fit_coverage, reproduce, run_shipped_manifest, shipped_experiment, shipped_network, Check, Report,
    EXPERIMENTS, FIG2_MANIFEST, FIG3_MANIFEST, NETWORK_JSON,
};
pub use simulate::{
    cmd_simulate, simulate, Artifacts, CouplingEstimate, ExperimentSummary, LineEstimate, RunSummary, MAX_LINES,
    MIN_LINE_DEPTH, SUMMARY_SCHEMA,
};
pub use tables::{read_trace_csv, write_spectrum_csv, write_trace_csv, TRACE_HEADER};
