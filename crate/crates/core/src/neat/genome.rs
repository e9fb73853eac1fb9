use rand::Rng;

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type Innovation = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input,
    Bias,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeGene {
    pub id: NodeId,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionGene {
    pub innovation: Innovation,
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// A NEAT genotype.
///
/// Node ids are laid out as inputs `0..n_inputs`, the bias node at
/// `n_inputs`, outputs immediately after, and hidden nodes above that.
/// `nodes` is kept sorted by id and `connections` by innovation number.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    pub fitness: f64,
    n_inputs: usize,
    n_outputs: usize,
}

/// Innovation number of the initial link from source slot `src` (inputs then
/// bias) to output `out`. Every genome of a population agrees on these.
pub(crate) fn initial_innovation(src: usize, out: usize, n_outputs: usize) -> Innovation {
    (src * n_outputs + out) as Innovation
}

/// A fully connected input/bias → output genome with weights uniform in [-1, 1].
pub fn initial_genome<R: Rng + ?Sized>(n_inputs: usize, n_outputs: usize, rng: &mut R) -> Genome {
    assert!(n_inputs >= 1 && n_outputs >= 1, "genome needs at least one input and one output");
    let mut nodes = Vec::with_capacity(n_inputs + 1 + n_outputs);
    for i in 0..n_inputs {
        nodes.push(NodeGene { id: i as NodeId, kind: NodeKind::Input });
    }
    nodes.push(NodeGene { id: n_inputs as NodeId, kind: NodeKind::Bias });
    for o in 0..n_outputs {
        nodes.push(NodeGene { id: (n_inputs + 1 + o) as NodeId, kind: NodeKind::Output });
    }

    let mut connections = Vec::with_capacity((n_inputs + 1) * n_outputs);
    for src in 0..=n_inputs {
        for out in 0..n_outputs {
            connections.push(ConnectionGene {
                innovation: initial_innovation(src, out, n_outputs),
                from: src as NodeId,
                to: (n_inputs + 1 + out) as NodeId,
                weight: rng.random_range(-1.0..=1.0),
                enabled: true,
            });
        }
    }

    Genome { nodes, connections, fitness: 0.0, n_inputs, n_outputs }
}

impl Genome {
    /// Assembles a genome from raw parts, sorting genes and validating.
    pub fn from_parts(
        n_inputs: usize,
        n_outputs: usize,
        hidden: impl IntoIterator<Item = NodeId>,
        mut connections: Vec<ConnectionGene>,
    ) -> Result<Genome> {
        let mut nodes: Vec<NodeGene> = (0..n_inputs)
            .map(|i| NodeGene { id: i as NodeId, kind: NodeKind::Input })
            .chain(std::iter::once(NodeGene { id: n_inputs as NodeId, kind: NodeKind::Bias }))
            .chain((0..n_outputs).map(|o| NodeGene {
                id: (n_inputs + 1 + o) as NodeId,
                kind: NodeKind::Output,
            }))
            .chain(hidden.into_iter().map(|id| NodeGene { id, kind: NodeKind::Hidden }))
            .collect();
        nodes.sort_by_key(|n| n.id);
        connections.sort_by_key(|c| c.innovation);
        let g = Genome { nodes, connections, fitness: 0.0, n_inputs, n_outputs };
        g.validate()?;
        Ok(g)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// First id available for hidden nodes.
    pub fn first_hidden_id(&self) -> NodeId {
        (self.n_inputs + 1 + self.n_outputs) as NodeId
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    pub fn enabled_count(&self) -> usize {
        self.connections.iter().filter(|c| c.enabled).count()
    }

    pub fn has_link(&self, from: NodeId, to: NodeId) -> bool {
        self.connections.iter().any(|c| c.from == from && c.to == to)
    }

    pub(crate) fn insert_node(&mut self, node: NodeGene) {
        let at = self.nodes.partition_point(|n| n.id < node.id);
        self.nodes.insert(at, node);
    }

    pub(crate) fn insert_connection(&mut self, conn: ConnectionGene) {
        let at = self.connections.partition_point(|c| c.innovation < conn.innovation);
        self.connections.insert(at, conn);
    }

    /// Would adding `from → to` close a cycle over the genome's connections
    /// (enabled or not)? Disabled genes count because crossover may
    /// re-enable them.
    pub fn creates_cycle(&self, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return true;
        }
        let mut stack = vec![to];
        let mut seen = vec![to];
        while let Some(n) = stack.pop() {
            for c in self.connections.iter().filter(|c| c.from == n) {
                if c.to == from {
                    return true;
                }
                if !seen.contains(&c.to) {
                    seen.push(c.to);
                    stack.push(c.to);
                }
            }
        }
        false
    }

    /// Checks every structural invariant a genome must satisfy.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGenome(msg));
        if self.nodes.windows(2).any(|w| w[0].id >= w[1].id) {
            return bad("node ids not unique and sorted".into());
        }
        let fixed = self.n_inputs + 1 + self.n_outputs;
        if self.nodes.len() < fixed {
            return bad("missing fixed input/bias/output nodes".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let expected = if i < self.n_inputs {
                NodeKind::Input
            } else if i == self.n_inputs {
                NodeKind::Bias
            } else if i < fixed {
                NodeKind::Output
            } else {
                NodeKind::Hidden
            };
            if n.kind != expected || (i < fixed && n.id as usize != i) {
                return bad(format!("node {} has unexpected kind {:?}", n.id, n.kind));
            }
        }
        if self.connections.windows(2).any(|w| w[0].innovation >= w[1].innovation) {
            return bad("innovation numbers not unique and sorted".into());
        }
        let mut pairs: Vec<(NodeId, NodeId)> =
            self.connections.iter().map(|c| (c.from, c.to)).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate connection".into());
        }
        for c in &self.connections {
            match (self.node(c.from), self.node(c.to)) {
                (Some(f), Some(t)) => {
                    if matches!(t.kind, NodeKind::Input | NodeKind::Bias) {
                        return bad(format!("connection {} enters an input", c.innovation));
                    }
                    if f.kind == NodeKind::Output {
                        return bad(format!("connection {} leaves an output", c.innovation));
                    }
                }
                _ => return bad(format!("connection {} references a missing node", c.innovation)),
            }
            if !c.weight.is_finite() {
                return bad(format!("connection {} has non-finite weight", c.innovation));
            }
        }
        if crate::network::topological_order(self).is_none() {
            return bad("enabled connections contain a cycle".into());
        }
        Ok(())
    }
}
