use std::collections::HashMap;

use super::genome::{initial_innovation, Innovation, NodeId};

/// Result of splitting a connection: the new hidden node and the
/// innovations of its incoming and outgoing links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub node: NodeId,
    pub incoming: Innovation,
    pub outgoing: Innovation,
}

/// Historical markings for one population.
///
/// Identical structural mutations always map to the same numbers for the
/// lifetime of the registry, so two genomes that independently grow the same
/// link (or split the same link) line up during crossover.
#[derive(Debug, Clone)]
pub struct InnovationRegistry {
    next_innovation: Innovation,
    next_node_id: NodeId,
    links: HashMap<(NodeId, NodeId), Innovation>,
    splits: HashMap<Innovation, Split>,
}

impl InnovationRegistry {
    /// Registry pre-seeded with the links of [`super::initial_genome`].
    pub fn new(n_inputs: usize, n_outputs: usize) -> Self {
        let mut links = HashMap::new();
        for src in 0..=n_inputs {
            for out in 0..n_outputs {
                links.insert(
                    (src as NodeId, (n_inputs + 1 + out) as NodeId),
                    initial_innovation(src, out, n_outputs),
                );
            }
        }
        InnovationRegistry {
            next_innovation: ((n_inputs + 1) * n_outputs) as Innovation,
            next_node_id: (n_inputs + 1 + n_outputs) as NodeId,
            links,
            splits: HashMap::new(),
        }
    }

    pub fn next_innovation(&self) -> Innovation {
        self.next_innovation
    }

    pub fn next_node_id(&self) -> NodeId {
        self.next_node_id
    }

    pub fn link(&mut self, from: NodeId, to: NodeId) -> Innovation {
        let next = &mut self.next_innovation;
        *self.links.entry((from, to)).or_insert_with(|| {
            let n = *next;
            *next += 1;
            n
        })
    }

    pub fn split(&mut self, innovation: Innovation, from: NodeId, to: NodeId) -> Split {
        if let Some(s) = self.splits.get(&innovation) {
            return *s;
        }
        let node = self.next_node_id;
        self.next_node_id += 1;
        let split = Split {
            node,
            incoming: self.link(from, node),
            outgoing: self.link(node, to),
        };
        self.splits.insert(innovation, split);
        split
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_mutations_share_numbers() {
        let mut reg = InnovationRegistry::new(2, 1);
        assert_eq!(reg.next_innovation(), 3);
        assert_eq!(reg.link(0, 3), reg.link(0, 3));
        // initial links are pre-registered
        assert_eq!(reg.link(1, 3), 1);
        let a = reg.split(0, 0, 3);
        let b = reg.split(0, 0, 3);
        assert_eq!(a, b);
        assert_eq!(a.node, 4);
        let c = reg.split(1, 1, 3);
        assert_ne!(a.node, c.node);
        assert!(reg.next_innovation() > c.outgoing);
    }
}
