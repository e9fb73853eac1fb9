//! Two species, each with a co-evolving population of NEAT senders and
//! receivers, share a nine-band soundscape. Senders encode 3-bit messages,
//! receivers decode them and guess which species spoke. The crate runs that
//! simulation, measures how the species spread over the bands, and compares
//! the species-identification pressure (`H1`) against a null model (`H0`).
//!
//! ```
//! use acoustic_niche::{run_simulation, NeatConfig, SimulationConfig};
//!
//! let cfg = SimulationConfig {
//!     generations: 2,
//!     neat: NeatConfig { population_size: 4, ..NeatConfig::default() },
//!     seed: 7,
//!     ..SimulationConfig::default()
//! };
//! let log = run_simulation(&cfg).unwrap();
//! assert_eq!(log.generations.len(), 2);
//! ```

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod files;
pub mod fitness;
pub mod neat;
pub mod network;
pub mod plot;
pub mod rng;
pub mod simulation;
pub mod soundscape;

pub use error::{Error, Result};
pub use fitness::{FitnessMode, ScoreMetrics};
pub use neat::{Genome, NeatConfig, Population};
pub use network::FeedforwardNetwork;
pub use simulation::{run_experiment, run_simulation, ExperimentLog, GenerationLog, LogDetail, RunLog, SimulationConfig};
pub use soundscape::{Message, Signal, Species, TransmissionMode};

/// The guide's code snippets, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/soundscape.md")]
    mod soundscape {}
    #[doc = include_str!("../../../book/src/fitness.md")]
    mod fitness {}
    #[doc = include_str!("../../../book/src/neat.md")]
    mod neat {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
