//! Experiment driver: configuration, tissue presets, probes and output.

pub mod config;
pub mod materials;
pub mod probe;
pub mod run;
pub mod snapshot;

pub use config::{load_config, parse_config, MeshSpec, OutputSettings, SimulationConfig};
pub use materials::{material_from_water_content, preset, Tissue};
pub use probe::{rmse, ProbeSeries};
pub use run::{run, RunOutput, Simulation};
