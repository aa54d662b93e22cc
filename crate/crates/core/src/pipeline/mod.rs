//! Scenario assembly and the generate / process / validate commands.

mod commands;
mod process;
mod scenario;
mod validate;

pub use commands::{
    cmd_generate, cmd_process, generate_to, load_scenario, run_closed_loop, Artifacts, ClosedLoop, GenerateSummary,
    ProcessSummary, TruthProducts, TRUTH_INTERVAL,
};
pub use process::{ProcessOptions, ProcessResults, Processor};
pub use scenario::{build_scenario, build_scenario_with, Scenario};
pub use validate::{
    cmd_validate, evaluate, Metric, Status, Thresholds, ValidateInputs, ValidationData, ValidationDetail, Verdict,
    VERDICT_HEADER,
};
