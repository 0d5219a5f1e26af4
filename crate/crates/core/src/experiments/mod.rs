//! Datasets, synthetic problems, experiment configuration and batch runs.

mod bench;
mod config;
mod libsvm;
mod plotdata;
mod runner;
mod synthetic;

pub use bench::{bench, spectrum_table, write_spectrum, BenchOutcome, SpectrumTable};
pub use config::{load_config, parse_config, sanitize, ExperimentConfig, ProblemSource, ProblemSpec, Task};
pub use libsvm::{parse_libsvm, parse_libsvm_str, DatasetMatrix, Standardization};
pub use plotdata::{from_long_format, long_format, plotdata, read_run_csv, RunTable};
pub use runner::{
    build_problem, estimate_beta, fmt_f64, reference_minimum, run_experiment, run_experiment_with, run_method, theory_step,
    write_run_csv, write_run_csv_to, BuiltProblem, ExperimentOutcome, FStarSource, RunSummary, CSV_HEADER,
};
pub use synthetic::{synth_regression, Rotation, SyntheticProblem, SyntheticSpectrumSpec};
