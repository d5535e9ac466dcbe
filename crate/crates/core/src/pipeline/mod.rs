//! End-to-end orchestration: configuration, stage execution and the report
//! bundle.

mod config;
pub mod report;
mod run;

pub use config::{
    BinningConfig, FeesConfig, InputPaths, OutputConfig, PipelineConfig, ScheduleConfig,
    SynthConfig, CONFIG_TEMPLATE,
};
pub use run::{
    build_bundle, effective_config, execute, load_corpus, run_pipeline, synth_corpus_files,
    synthesize, write_bundle, Command, Corpus, RunOptions, RunSummary,
};
