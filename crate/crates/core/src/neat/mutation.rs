use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::genome::{ConnectionGene, Genome, NodeGene, NodeKind};
use super::innovation::InnovationRegistry;
use super::NeatConfig;

/// Candidate pairs drawn before `mutate_add_connection` gives up.
const ADD_CONNECTION_ATTEMPTS: usize = 32;

/// Perturbs or replaces connection weights in place. Structure is untouched.
pub fn mutate_weights<R: Rng + ?Sized>(g: &mut Genome, cfg: &NeatConfig, rng: &mut R) {
    let perturb = Normal::new(0.0, cfg.weight_perturb_stddev).expect("stddev validated at config load");
    for c in &mut g.connections {
        if rng.random::<f64>() < cfg.weight_mutate_rate {
            if rng.random::<f64>() < cfg.weight_replace_rate {
                c.weight = rng.random_range(-1.0..=1.0);
            } else {
                c.weight += perturb.sample(rng);
            }
        }
    }
}

/// Adds one new link that keeps the genome feedforward. Returns whether the
/// genome changed.
pub fn mutate_add_connection<R: Rng + ?Sized>(
    g: &mut Genome,
    reg: &mut InnovationRegistry,
    rng: &mut R,
) -> bool {
    let sources: Vec<_> = g.nodes.iter().filter(|n| n.kind != NodeKind::Output).map(|n| n.id).collect();
    let targets: Vec<_> = g
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Hidden | NodeKind::Output))
        .map(|n| n.id)
        .collect();
    for _ in 0..ADD_CONNECTION_ATTEMPTS {
        let from = sources[rng.random_range(0..sources.len())];
        let to = targets[rng.random_range(0..targets.len())];
        if g.has_link(from, to) || g.creates_cycle(from, to) {
            continue;
        }
        let innovation = reg.link(from, to);
        g.insert_connection(ConnectionGene {
            innovation,
            from,
            to,
            weight: rng.random_range(-1.0..=1.0),
            enabled: true,
        });
        return true;
    }
    false
}

/// Splits a uniformly chosen enabled link with a new hidden node. The
/// incoming half gets weight 1.0, the outgoing half inherits the old weight.
pub fn mutate_add_node<R: Rng + ?Sized>(g: &mut Genome, reg: &mut InnovationRegistry, rng: &mut R) -> bool {
    let enabled: Vec<usize> = (0..g.connections.len()).filter(|&i| g.connections[i].enabled).collect();
    if enabled.is_empty() {
        return false;
    }
    let idx = enabled[rng.random_range(0..enabled.len())];
    let old = g.connections[idx];
    let split = reg.split(old.innovation, old.from, old.to);
    // The same link was already split once in this lineage and re-enabled by
    // crossover; splitting again would duplicate the hidden node.
    if g.has_node(split.node) {
        return false;
    }
    g.connections[idx].enabled = false;
    g.insert_node(NodeGene { id: split.node, kind: NodeKind::Hidden });
    g.insert_connection(ConnectionGene {
        innovation: split.incoming,
        from: old.from,
        to: split.node,
        weight: 1.0,
        enabled: true,
    });
    g.insert_connection(ConnectionGene {
        innovation: split.outgoing,
        from: split.node,
        to: old.to,
        weight: old.weight,
        enabled: true,
    });
    true
}

/// Full mutation step applied to every non-elite offspring.
pub fn mutate<R: Rng + ?Sized>(g: &mut Genome, cfg: &NeatConfig, reg: &mut InnovationRegistry, rng: &mut R) {
    if rng.random::<f64>() < cfg.add_node_rate {
        mutate_add_node(g, reg, rng);
    }
    if rng.random::<f64>() < cfg.add_connection_rate {
        mutate_add_connection(g, reg, rng);
    }
    mutate_weights(g, cfg, rng);
}
