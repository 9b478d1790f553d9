//! World generation, benchmark runs, report files and frame rendering on top
//! of the `gridswarm` core.

pub mod experiment;
pub mod frames;
pub mod generate;
pub mod report;

pub use experiment::{load_corpus, ratio_summary, run_experiment, write_csv, write_reports, CorpusEntry};
pub use frames::{emit_frames, emit_state_frames, render_svg, sticky_states};
pub use generate::{generate_world, GenerateError, GeneratedWorld, GeneratorKind, GeneratorSpec, Placement, VascularParams};
pub use report::{replay, run_collect, Algorithm, RunOptions, RunReport, RunStatus};
