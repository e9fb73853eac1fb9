//! Genome validity, innovation bookkeeping and determinism under long
//! random sequences of NEAT operations.

use std::collections::BTreeSet;

use acoustic_niche::neat::{
    compatibility_distance, crossover, initial_genome, mutate, speciate, Genome, InnovationRegistry, NeatConfig,
    Population,
};
use acoustic_niche::network::{topological_order, FeedforwardNetwork};
use acoustic_niche::rng::{stream, Stream};
use proptest::prelude::*;
use rand::Rng;

fn busy() -> NeatConfig {
    NeatConfig { add_node_rate: 0.3, add_connection_rate: 0.4, ..NeatConfig::default() }
}

fn check_genome(g: &Genome, n_in: usize, n_out: usize) -> Result<(), TestCaseError> {
    prop_assert!(g.validate().is_ok(), "{:?}", g.validate());
    prop_assert_eq!(g.n_inputs(), n_in);
    prop_assert_eq!(g.n_outputs(), n_out);
    prop_assert!(g.connections.windows(2).all(|w| w[0].innovation < w[1].innovation));
    let pairs: BTreeSet<_> = g.connections.iter().map(|c| (c.from, c.to)).collect();
    prop_assert_eq!(pairs.len(), g.connections.len());
    prop_assert!(topological_order(g).is_some());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operations_preserve_validity(seed in 0u64..100_000, steps in 1usize..40) {
        let (n_in, n_out) = (3, 4);
        let cfg = busy();
        let mut rng = stream(seed, Stream::Aux(1));
        let mut reg = InnovationRegistry::new(n_in, n_out);
        let mut pool: Vec<Genome> = (0..6).map(|_| initial_genome(n_in, n_out, &mut rng)).collect();
        for _ in 0..steps {
            let i = rng.random_range(0..pool.len());
            let j = rng.random_range(0..pool.len());
            pool[i].fitness = rng.random();
            pool[j].fitness = rng.random();
            let mut child = crossover(&pool[i], &pool[j], &mut rng);
            mutate(&mut child, &cfg, &mut reg, &mut rng);
            check_genome(&child, n_in, n_out)?;
            let net = FeedforwardNetwork::build(&child, 4.9).unwrap();
            prop_assert_eq!(net.edge_count(), child.enabled_count());
            let k = rng.random_range(0..pool.len());
            pool[k] = child;
        }
        for a in &pool {
            prop_assert_eq!(compatibility_distance(a, a, &cfg), 0.0);
            for b in &pool {
                let d = compatibility_distance(a, b, &cfg);
                prop_assert!(d >= 0.0);
                prop_assert_eq!(d, compatibility_distance(b, a, &cfg));
            }
        }
    }

    #[test]
    fn innovations_identify_structure(seed in 0u64..100_000) {
        // one innovation number always denotes the same (from, to) link
        let mut pop = Population::new(2, 2, busy(), &mut stream(seed, Stream::Init(0)), stream(seed, Stream::Evolve(0)));
        let mut seen = std::collections::BTreeMap::new();
        let mut rng = stream(seed, Stream::Aux(2));
        for _ in 0..15 {
            for g in &mut pop.genomes {
                g.fitness = rng.random();
            }
            pop.evolve();
            prop_assert_eq!(pop.genomes.len(), pop.config.population_size);
            for g in &pop.genomes {
                check_genome(g, 2, 2)?;
                for c in &g.connections {
                    let prev = seen.insert(c.innovation, (c.from, c.to));
                    prop_assert!(prev.is_none_or(|p| p == (c.from, c.to)));
                }
            }
            let clusters = speciate(&pop.genomes, &pop.clusters, &pop.config);
            let mut members: Vec<usize> = clusters.iter().flat_map(|c| c.members.iter().copied()).collect();
            members.sort_unstable();
            prop_assert_eq!(members, (0..pop.genomes.len()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn evolution_is_deterministic_per_seed() {
    let run = |seed: u64| {
        let mut pop = Population::new(3, 9, busy(), &mut stream(seed, Stream::Init(0)), stream(seed, Stream::Evolve(0)));
        for generation in 0..10 {
            for (i, g) in pop.genomes.iter_mut().enumerate() {
                g.fitness = ((i * 7 + generation) % 11) as f64 + g.connections.len() as f64 * 0.01;
            }
            pop.evolve();
        }
        pop.genomes
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn champion_survives_every_generation() {
    let mut pop = Population::new(3, 2, busy(), &mut stream(9, Stream::Init(0)), stream(9, Stream::Evolve(0)));
    let mut rng = stream(9, Stream::Aux(0));
    for _ in 0..20 {
        for g in &mut pop.genomes {
            g.fitness = rng.random_range(0.0..5.0);
        }
        let champion = pop.champion().clone();
        pop.evolve();
        assert!(pop.genomes.iter().any(|g| g.connections == champion.connections && g.nodes == champion.nodes));
    }
}
