//! NEAT: genomes with historical markings, structural mutation, crossover,
//! speciation with fitness sharing, and generational reproduction.
//!
//! Every population of the soundscape simulation (senders and receivers of
//! both species) is an independent [`Population`]; genomes never move
//! between them.

mod crossover;
mod genome;
mod innovation;
mod mutation;
mod reproduce;
mod species;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crossover::{compatibility_distance, crossover};
pub use genome::{initial_genome, ConnectionGene, Genome, Innovation, NodeGene, NodeId, NodeKind};
pub use innovation::{InnovationRegistry, Split};
pub use mutation::{mutate, mutate_add_connection, mutate_add_node, mutate_weights};
pub use reproduce::{apportion, champion, offspring_quotas, reproduce};
pub use species::{speciate, update_stagnation, SpeciesCluster};

use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeatConfig {
    pub population_size: usize,
    /// Excess-gene coefficient of the compatibility distance.
    pub c1: f64,
    /// Disjoint-gene coefficient.
    pub c2: f64,
    /// Mean weight difference coefficient.
    pub c3: f64,
    pub compatibility_threshold: f64,
    pub weight_mutate_rate: f64,
    pub weight_perturb_stddev: f64,
    pub weight_replace_rate: f64,
    pub add_connection_rate: f64,
    pub add_node_rate: f64,
    /// Fraction of each cluster (best first) eligible to breed.
    pub survival_fraction: f64,
    /// Clusters larger than this copy their champion unchanged.
    pub elitism_threshold: usize,
    /// Generations without improvement before a cluster stops breeding.
    pub stagnation_limit: u32,
}

impl Default for NeatConfig {
    fn default() -> Self {
        NeatConfig {
            population_size: 50,
            c1: 1.0,
            c2: 1.0,
            c3: 0.4,
            compatibility_threshold: 3.0,
            weight_mutate_rate: 0.8,
            weight_perturb_stddev: 0.5,
            weight_replace_rate: 0.1,
            add_connection_rate: 0.05,
            add_node_rate: 0.03,
            survival_fraction: 0.2,
            elitism_threshold: 5,
            stagnation_limit: 15,
        }
    }
}

impl NeatConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("neat.population_size must be at least 2".into()));
        }
        let probabilities = [
            ("weight_mutate_rate", self.weight_mutate_rate),
            ("weight_replace_rate", self.weight_replace_rate),
            ("add_connection_rate", self.add_connection_rate),
            ("add_node_rate", self.add_node_rate),
            ("survival_fraction", self.survival_fraction),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("neat.{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("compatibility_threshold", self.compatibility_threshold),
            ("weight_perturb_stddev", self.weight_perturb_stddev),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("neat.{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// One evolving population with its own innovation history and niches.
#[derive(Debug, Clone)]
pub struct Population {
    pub genomes: Vec<Genome>,
    pub clusters: Vec<SpeciesCluster>,
    pub registry: InnovationRegistry,
    pub config: NeatConfig,
    rng: SimRng,
}

impl Population {
    /// `init` draws the initial weights; `rng` drives all later evolution.
    pub fn new(n_inputs: usize, n_outputs: usize, config: NeatConfig, init: &mut impl Rng, rng: SimRng) -> Self {
        let genomes = (0..config.population_size)
            .map(|_| initial_genome(n_inputs, n_outputs, init))
            .collect();
        Population {
            genomes,
            clusters: Vec::new(),
            registry: InnovationRegistry::new(n_inputs, n_outputs),
            config,
            rng,
        }
    }

    pub fn champion(&self) -> &Genome {
        &self.genomes[champion(&self.genomes)]
    }

    /// Speciates the evaluated generation and replaces it with offspring.
    /// Fitness must already be assigned to every genome.
    pub fn evolve(&mut self) {
        let mut clusters = speciate(&self.genomes, &self.clusters, &self.config);
        update_stagnation(&mut clusters, &self.genomes);
        let next = reproduce(&self.genomes, &clusters, &self.config, &mut self.registry, &mut self.rng);
        self.clusters = clusters;
        self.genomes = next;
    }
}
