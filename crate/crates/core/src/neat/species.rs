use super::crossover::compatibility_distance;
use super::genome::Genome;
use super::NeatConfig;

/// A niche of structurally similar genomes (NEAT speciation, unrelated to the
/// two biological species of the soundscape).
#[derive(Debug, Clone)]
pub struct SpeciesCluster {
    pub representative: Genome,
    /// Indices into the population the cluster was built from.
    pub members: Vec<usize>,
    pub best_fitness_ever: f64,
    pub generations_since_improvement: u32,
}

impl SpeciesCluster {
    pub fn mean_fitness(&self, population: &[Genome]) -> f64 {
        self.members.iter().map(|&i| population[i].fitness).sum::<f64>() / self.members.len() as f64
    }

    pub fn max_fitness(&self, population: &[Genome]) -> f64 {
        self.members.iter().map(|&i| population[i].fitness).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Partitions `population` into clusters.
///
/// Each genome joins the first previous cluster whose representative is
/// within the compatibility threshold; the rest found new clusters in order.
/// Surviving clusters then take as representative the member closest to the
/// old one, so the next call compares against this generation's genomes.
pub fn speciate(population: &[Genome], previous: &[SpeciesCluster], cfg: &NeatConfig) -> Vec<SpeciesCluster> {
    let mut clusters: Vec<SpeciesCluster> = previous
        .iter()
        .map(|c| SpeciesCluster { members: Vec::new(), ..c.clone() })
        .collect();

    for (i, g) in population.iter().enumerate() {
        let home = clusters
            .iter()
            .position(|c| compatibility_distance(g, &c.representative, cfg) < cfg.compatibility_threshold);
        match home {
            Some(k) => clusters[k].members.push(i),
            None => clusters.push(SpeciesCluster {
                representative: g.clone(),
                members: vec![i],
                best_fitness_ever: f64::NEG_INFINITY,
                generations_since_improvement: 0,
            }),
        }
    }

    clusters.retain(|c| !c.members.is_empty());
    for c in &mut clusters {
        let closest = c
            .members
            .iter()
            .map(|&i| (i, compatibility_distance(&population[i], &c.representative, cfg)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
            .expect("non-empty cluster");
        c.representative = population[closest].clone();
    }
    clusters
}

/// Refreshes best-ever fitness and stagnation counters after evaluation.
pub fn update_stagnation(clusters: &mut [SpeciesCluster], population: &[Genome]) {
    for c in clusters {
        let best = c.max_fitness(population);
        if best > c.best_fitness_ever {
            c.best_fitness_ever = best;
            c.generations_since_improvement = 0;
        } else {
            c.generations_since_improvement += 1;
        }
    }
}
