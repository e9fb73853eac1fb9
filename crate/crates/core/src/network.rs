//! Compiling genomes into evaluable feedforward networks.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::neat::{Genome, NodeId, NodeKind};

/// Slope of the steepened logistic used by canonical NEAT.
pub const DEFAULT_SLOPE: f64 = 4.9;

#[inline]
pub fn sigmoid(x: f64, slope: f64) -> f64 {
    1.0 / (1.0 + (-slope * x).exp())
}

/// Topological order of all nodes under the enabled connections, or `None`
/// if they contain a cycle. Ready nodes are taken lowest id first.
pub fn topological_order(g: &Genome) -> Option<Vec<NodeId>> {
    let idx = |id: NodeId| g.nodes.binary_search_by_key(&id, |n| n.id).ok();
    let mut indegree = vec![0usize; g.nodes.len()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for c in g.connections.iter().filter(|c| c.enabled) {
        let (f, t) = (idx(c.from)?, idx(c.to)?);
        indegree[t] += 1;
        out[f].push(t);
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..g.nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(g.nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(g.nodes[n].id);
        for &t in &out[n] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    (order.len() == g.nodes.len()).then_some(order)
}

#[derive(Debug, Clone, Copy)]
struct Step {
    slot: u32,
    edges_start: u32,
    edges_end: u32,
}

/// A genome's enabled-connection graph, flattened into evaluation order.
///
/// Slots follow the genome's node order, so inputs occupy `0..n_inputs`, the
/// bias slot is `n_inputs`, and outputs follow it.
#[derive(Debug, Clone)]
pub struct FeedforwardNetwork {
    n_inputs: usize,
    n_outputs: usize,
    n_slots: usize,
    slope: f64,
    steps: Vec<Step>,
    edges: Vec<(u32, f64)>,
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

impl FeedforwardNetwork {
    pub fn build(g: &Genome, slope: f64) -> Result<Self> {
        let order = topological_order(g).ok_or_else(|| Error::InvalidGenome("cycle among enabled connections".into()))?;
        let slot = |id: NodeId| g.nodes.binary_search_by_key(&id, |n| n.id).expect("node exists") as u32;

        let mut incoming: Vec<Vec<(u32, f64)>> = vec![Vec::new(); g.nodes.len()];
        for c in g.connections.iter().filter(|c| c.enabled) {
            incoming[slot(c.to) as usize].push((slot(c.from), c.weight));
        }
        let mut steps = Vec::new();
        let mut edges = Vec::with_capacity(g.enabled_count());
        for id in order {
            let s = slot(id);
            let kind = g.nodes[s as usize].kind;
            if matches!(kind, NodeKind::Input | NodeKind::Bias) {
                continue;
            }
            let start = edges.len() as u32;
            edges.extend_from_slice(&incoming[s as usize]);
            steps.push(Step { slot: s, edges_start: start, edges_end: edges.len() as u32 });
        }
        Ok(FeedforwardNetwork {
            n_inputs: g.n_inputs(),
            n_outputs: g.n_outputs(),
            n_slots: g.nodes.len(),
            slope,
            steps,
            edges,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Evaluates the network, writing output activations into `out`.
    pub fn activate_into(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        if inputs.len() != self.n_inputs {
            return Err(Error::Arity { expected: self.n_inputs, got: inputs.len() });
        }
        if out.len() != self.n_outputs {
            return Err(Error::Arity { expected: self.n_outputs, got: out.len() });
        }
        SCRATCH.with(|cell| {
            let mut values = cell.borrow_mut();
            values.clear();
            values.resize(self.n_slots, 0.0);
            values[..self.n_inputs].copy_from_slice(inputs);
            values[self.n_inputs] = 1.0;
            for step in &self.steps {
                let sum: f64 = self.edges[step.edges_start as usize..step.edges_end as usize]
                    .iter()
                    .map(|&(src, w)| w * values[src as usize])
                    .sum();
                values[step.slot as usize] = sigmoid(sum, self.slope);
            }
            let first_out = self.n_inputs + 1;
            out.copy_from_slice(&values[first_out..first_out + self.n_outputs]);
        });
        Ok(())
    }

    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_outputs];
        self.activate_into(inputs, &mut out)?;
        Ok(out)
    }
}
