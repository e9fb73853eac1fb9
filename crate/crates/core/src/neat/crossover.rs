use std::cmp::Ordering;

use rand::Rng;

use super::genome::{ConnectionGene, Genome, NodeKind};
use super::NeatConfig;

/// Genomes smaller than this are not normalized by gene count.
const SMALL_GENOME: usize = 20;

/// Probability that a gene disabled in either parent stays disabled.
const INHERIT_DISABLED: f64 = 0.75;

/// NEAT compatibility distance `c1·E/N + c2·D/N + c3·W̄` over connection genes.
pub fn compatibility_distance(a: &Genome, b: &Genome, cfg: &NeatConfig) -> f64 {
    let (ca, cb) = (&a.connections, &b.connections);
    let max_a = ca.last().map(|c| c.innovation);
    let max_b = cb.last().map(|c| c.innovation);
    let (mut i, mut j) = (0, 0);
    let (mut excess, mut disjoint, mut matching) = (0usize, 0usize, 0usize);
    let mut weight_diff = 0.0;
    let mut unmatched = |innovation, other_max: Option<u64>| {
        if other_max.is_none_or(|m| innovation > m) {
            excess += 1;
        } else {
            disjoint += 1;
        }
    };
    while i < ca.len() || j < cb.len() {
        match (ca.get(i), cb.get(j)) {
            (Some(x), Some(y)) => match x.innovation.cmp(&y.innovation) {
                Ordering::Equal => {
                    matching += 1;
                    weight_diff += (x.weight - y.weight).abs();
                    i += 1;
                    j += 1;
                }
                Ordering::Less => {
                    unmatched(x.innovation, max_b);
                    i += 1;
                }
                Ordering::Greater => {
                    unmatched(y.innovation, max_a);
                    j += 1;
                }
            },
            (Some(x), None) => {
                unmatched(x.innovation, max_b);
                i += 1;
            }
            (None, Some(y)) => {
                unmatched(y.innovation, max_a);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let larger = ca.len().max(cb.len());
    let n = if ca.len() < SMALL_GENOME && cb.len() < SMALL_GENOME { 1.0 } else { larger as f64 };
    let mean_weight_diff = if matching == 0 { 0.0 } else { weight_diff / matching as f64 };
    cfg.c1 * excess as f64 / n + cfg.c2 * disjoint as f64 / n + cfg.c3 * mean_weight_diff
}

/// Child of two parents of the same population.
///
/// Matching genes come from either parent with equal probability; disjoint
/// and excess genes come from the fitter parent (`parent_a` on a tie). Genes
/// that would duplicate a link or close a cycle in the child are dropped.
pub fn crossover<R: Rng + ?Sized>(parent_a: &Genome, parent_b: &Genome, rng: &mut R) -> Genome {
    let a_fitter = parent_a.fitness >= parent_b.fitness;
    let (fit, other) = if a_fitter { (parent_a, parent_b) } else { (parent_b, parent_a) };

    let mut child = Genome::from_parts(fit.n_inputs(), fit.n_outputs(), [], Vec::new())
        .expect("empty genome is valid");

    let mut j = 0;
    for gene in &fit.connections {
        while j < other.connections.len() && other.connections[j].innovation < gene.innovation {
            j += 1;
        }
        let partner = other.connections.get(j).filter(|o| o.innovation == gene.innovation);
        let mut inherited: ConnectionGene = match partner {
            Some(o) => {
                // "from parent_a" must mean parent_a regardless of which is fitter
                let (from_a, from_b) = if a_fitter { (gene, o) } else { (o, gene) };
                if rng.random_bool(0.5) { *from_a } else { *from_b }
            }
            None => *gene,
        };
        let disabled_somewhere = !gene.enabled || partner.is_some_and(|o| !o.enabled);
        inherited.enabled = if disabled_somewhere { !rng.random_bool(INHERIT_DISABLED) } else { true };

        for id in [inherited.from, inherited.to] {
            if !child.has_node(id) {
                let kind = fit.node(id).or_else(|| other.node(id)).map(|n| n.kind);
                debug_assert_eq!(kind, Some(NodeKind::Hidden));
                child.insert_node(super::genome::NodeGene { id, kind: NodeKind::Hidden });
            }
        }
        if child.has_link(inherited.from, inherited.to) || child.creates_cycle(inherited.from, inherited.to) {
            continue;
        }
        child.connections.push(inherited);
    }
    child
}
