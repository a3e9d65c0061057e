//! Simulation harness: synthetic populations, CI construction for a single
//! assignment, the two table-producing experiments, and report emission.

pub mod ci;
pub mod datagen;
pub mod experiment;
pub mod report;

pub use ci::{ci_for_assignment, CiReport};
pub use datagen::{draw_assignment, draw_reveal_order, gen_population};
pub use experiment::{run_experiment1, run_experiment2, Experiment2Cell, ExperimentConfig, TableRow};
pub use report::{rows_to_csv, rows_to_json, OutputFormat};
