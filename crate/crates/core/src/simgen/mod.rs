//! Moving-average data generation, exact population quantities and the
//! seeded Monte-Carlo harness.

pub mod config;
mod experiment;
mod model;
mod population;

pub use experiment::{
    preset, preset_names, replicate, run_experiment, BandwidthRow, Design, ExperimentSummary,
    DEFAULT_MASTER_SEED,
    RejectionRow, SummaryRows, Task,
};
pub use model::{replication_rng, InnovationLaw, MaModelSpec};
pub use population::{
    autocovariances, coefficient_matrix, nu_squared_dense, population_quantities,
    population_sigma, PopulationQuantities,
};
