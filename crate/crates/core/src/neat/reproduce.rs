use rand::Rng;

use super::crossover::crossover;
use super::genome::Genome;
use super::innovation::InnovationRegistry;
use super::mutation::mutate;
use super::species::SpeciesCluster;
use super::NeatConfig;

/// Splits `total` slots proportionally to `scores` by largest remainder.
/// Ties on the remainder go to the earlier entry. All-zero scores share equally.
pub fn apportion(total: usize, scores: &[f64]) -> Vec<usize> {
    if scores.is_empty() {
        return Vec::new();
    }
    let sum: f64 = scores.iter().sum();
    let ideal: Vec<f64> = if sum > 0.0 {
        scores.iter().map(|s| total as f64 * s / sum).collect()
    } else {
        vec![total as f64 / scores.len() as f64; scores.len()]
    };
    let mut quota: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (ideal[i] - ideal[i].floor(), ideal[j] - ideal[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        quota[i] += 1;
    }
    quota
}

/// Index of the fittest genome, first on ties.
pub fn champion(population: &[Genome]) -> usize {
    let mut best = 0;
    for (i, g) in population.iter().enumerate() {
        if g.fitness > population[best].fitness {
            best = i;
        }
    }
    best
}

/// Offspring count per cluster, summing to `population_size`.
///
/// Quotas follow each cluster's fitness-shared score (sum of member fitness
/// divided by cluster size). Stagnant clusters get nothing unless they hold
/// the population champion, whose cluster always gets at least one slot.
pub fn offspring_quotas(population: &[Genome], clusters: &[SpeciesCluster], cfg: &NeatConfig) -> Vec<usize> {
    let champ = champion(population);
    let champ_cluster = clusters
        .iter()
        .position(|c| c.members.contains(&champ))
        .expect("champion belongs to a cluster");

    let scores: Vec<f64> = clusters
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let stagnant = c.generations_since_improvement > cfg.stagnation_limit;
            if stagnant && k != champ_cluster {
                0.0
            } else {
                c.mean_fitness(population).max(0.0)
            }
        })
        .collect();
    let mut quotas = if scores.iter().any(|&s| s > 0.0) {
        apportion(cfg.population_size, &scores)
    } else {
        // everything stagnant or fitness-less: the champion's cluster carries on
        let mut q = vec![0; clusters.len()];
        q[champ_cluster] = cfg.population_size;
        q
    };
    if quotas[champ_cluster] == 0 {
        let donor = (0..quotas.len()).max_by_key(|&k| (quotas[k], std::cmp::Reverse(k))).unwrap();
        quotas[donor] -= 1;
        quotas[champ_cluster] += 1;
    }
    quotas
}

/// Produces the next generation from evaluated, speciated genomes. The
/// population champion is always carried over unmodified.
pub fn reproduce<R: Rng + ?Sized>(
    population: &[Genome],
    clusters: &[SpeciesCluster],
    cfg: &NeatConfig,
    reg: &mut InnovationRegistry,
    rng: &mut R,
) -> Vec<Genome> {
    let champ = champion(population);
    let quotas = offspring_quotas(population, clusters, cfg);

    let mut next = Vec::with_capacity(cfg.population_size);
    for (cluster, &quota) in clusters.iter().zip(&quotas) {
        if quota == 0 {
            continue;
        }
        let mut ranked = cluster.members.clone();
        ranked.sort_by(|&i, &j| population[j].fitness.total_cmp(&population[i].fitness));

        let mut produced = 0;
        if cluster.members.contains(&champ) {
            next.push(population[champ].clone());
            produced += 1;
        } else if cluster.members.len() > cfg.elitism_threshold {
            next.push(population[ranked[0]].clone());
            produced += 1;
        }

        let eligible = ((cfg.survival_fraction * ranked.len() as f64).ceil() as usize).clamp(1, ranked.len());
        let parents = &ranked[..eligible];
        while produced < quota {
            let p1 = parents[rng.random_range(0..parents.len())];
            let p2 = parents[rng.random_range(0..parents.len())];
            let mut child = if p1 == p2 {
                population[p1].clone()
            } else {
                crossover(&population[p1], &population[p2], rng)
            };
            mutate(&mut child, cfg, reg, rng);
            child.fitness = 0.0;
            next.push(child);
            produced += 1;
        }
    }
    debug_assert_eq!(next.len(), cfg.population_size);
    next
}
