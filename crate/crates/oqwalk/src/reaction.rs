//! Reaction graphs and their compiled one-step evolution maps.
//!
//! A [`ReactionGraph`] is the declarative description of a model: node
//! count, time step, initial node, and three edge lists (damping, dephasing,
//! coherent). [`ReactionGraph::compile`] turns it into a [`StepMap`]: the
//! ordered list of per-edge channels for one step together with their
//! composed superoperator.
//!
//! Because the per-edge maps do not commute, the composition order matters
//! at second order in `dt`. The canonical order applies, innermost first:
//!
//! 1. damping edges whose target still has outgoing activity (the
//!    source-pumping exchange), in listed order,
//! 2. coherent edges, in listed order,
//! 3. dephasing edges, in listed order,
//! 4. damping edges into absorbing targets (product formation), in listed
//!    order.
//!
//! For the shipped four-node preset this reproduces the usual split where
//! product formation acts after the coherent exchange. [`ChannelOrder::Reversed`]
//! applies the same list backwards; with step probabilities of order
//! `1e-6` the two orderings agree to well below a part in a thousand, which
//! the test suite checks.

use crate::channels::{
    make_damping, make_dephasing, make_unitary, Channel, CoherentParams, DampingParams,
    DephasingParams,
};
use crate::linalg::{CMatrix, DensityMatrix, Superoperator};
use crate::{Error, Result};

/// Hard cap on graph size; the dense `N^2 x N^2` superoperator algebra is
/// not meant for anything larger.
pub const MAX_NODES: usize = 16;

/// Declarative description of a reaction network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionGraph {
    /// Number of nodes `N`; node indices are `0..N` internally and `1..=N`
    /// in config files and messages.
    pub n_nodes: usize,
    /// Time step in seconds.
    pub dt: f64,
    /// Node the walker starts on (0-based).
    pub initial_node: usize,
    /// One-way population-transfer edges.
    pub damping: Vec<DampingParams>,
    /// Coherence-decay edges.
    pub dephasing: Vec<DephasingParams>,
    /// Coherent (unitary) exchange edges.
    pub coherent: Vec<CoherentParams>,
}

/// A borrowed edge, as yielded by [`ReactionGraph::canonical_edge_order`].
#[derive(Debug, Clone, Copy)]
pub enum EdgeRef<'a> {
    Damping(&'a DampingParams),
    Coherent(&'a CoherentParams),
    Dephasing(&'a DephasingParams),
}

/// Order in which the per-edge channels compose into one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelOrder {
    /// Pumping damping, coherent, dephasing, then product damping.
    #[default]
    Canonical,
    /// The canonical list applied backwards (an order-sensitivity probe).
    Reversed,
}

impl ReactionGraph {
    /// Structural and numeric validation; called by [`compile`](Self::compile).
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_nodes > MAX_NODES {
            return Err(Error::InvalidGraph(format!(
                "node count {} outside 1..={MAX_NODES}",
                self.n_nodes
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGraph(format!(
                "dt {} must be positive",
                self.dt
            )));
        }
        if self.initial_node >= self.n_nodes {
            return Err(Error::InvalidGraph(format!(
                "initial node {} out of range 1..={}",
                self.initial_node + 1,
                self.n_nodes
            )));
        }
        // Building each channel performs the index / rate / probability
        // checks; do it against a scratch copy and drop the results.
        for p in &self.damping {
            if p.rate < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "damping {}<-{}: negative rate {}",
                    p.target + 1,
                    p.source + 1,
                    p.rate
                )));
            }
            make_damping(p, self.n_nodes, self.dt)?;
        }
        for p in &self.dephasing {
            if p.rate < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "dephasing {}~{}: negative rate {}",
                    p.j + 1,
                    p.k + 1,
                    p.rate
                )));
            }
            make_dephasing(p, self.n_nodes, self.dt)?;
        }
        for p in &self.coherent {
            make_unitary(p, self.n_nodes, self.dt)?;
        }
        // Duplicate edges are almost certainly a config mistake.
        for (i, a) in self.damping.iter().enumerate() {
            for b in &self.damping[i + 1..] {
                if a.target == b.target && a.source == b.source {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate damping edge {}<-{}",
                        a.target + 1,
                        a.source + 1
                    )));
                }
            }
        }
        for (i, a) in self.dephasing.iter().enumerate() {
            for b in &self.dephasing[i + 1..] {
                if (a.j, a.k) == (b.j, b.k) || (a.j, a.k) == (b.k, b.j) {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate dephasing edge {}~{}",
                        a.j + 1,
                        a.k + 1
                    )));
                }
            }
        }
        for (i, a) in self.coherent.iter().enumerate() {
            for b in &self.coherent[i + 1..] {
                if (a.j, a.k) == (b.j, b.k) || (a.j, a.k) == (b.k, b.j) {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate coherent edge {}={}",
                        a.j + 1,
                        a.k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Nodes with any outgoing transition (they *source* a damping edge or
    /// sit on a coherent edge). Nodes without one are absorbing.
    fn has_outgoing(&self) -> Vec<bool> {
        let mut out = vec![false; self.n_nodes];
        for p in &self.damping {
            out[p.source] = true;
        }
        for p in &self.coherent {
            out[p.j] = true;
            out[p.k] = true;
        }
        out
    }

    /// Nodes reachable from `start` along damping (directed) and coherent
    /// (undirected) edges with nonzero rate or coupling.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            let push = |next: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            };
            for p in &self.damping {
                if p.source == node && p.rate > 0.0 {
                    push(p.target, &mut seen, &mut stack);
                }
            }
            for p in &self.coherent {
                if p.coupling != 0.0 {
                    if p.j == node {
                        push(p.k, &mut seen, &mut stack);
                    }
                    if p.k == node {
                        push(p.j, &mut seen, &mut stack);
                    }
                }
            }
        }
        seen
    }

    /// The edges in canonical application order (see the module docs):
    /// pumping damping, coherent, dephasing, then absorbing damping.
    pub fn canonical_edge_order(&self) -> Vec<EdgeRef<'_>> {
        let outgoing = self.has_outgoing();
        let mut edges: Vec<EdgeRef<'_>> = Vec::new();
        edges.extend(
            self.damping
                .iter()
                .filter(|p| outgoing[p.target])
                .map(EdgeRef::Damping),
        );
        edges.extend(self.coherent.iter().map(EdgeRef::Coherent));
        edges.extend(self.dephasing.iter().map(EdgeRef::Dephasing));
        edges.extend(
            self.damping
                .iter()
                .filter(|p| !outgoing[p.target])
                .map(EdgeRef::Damping),
        );
        edges
    }

    /// Compile with the canonical channel order.
    pub fn compile(&self) -> Result<StepMap> {
        self.compile_with_order(ChannelOrder::Canonical)
    }

    /// Compile with an explicit channel order.
    pub fn compile_with_order(&self, order: ChannelOrder) -> Result<StepMap> {
        self.validate()?;
        let dim = self.n_nodes;
        let mut edges = self.canonical_edge_order();
        if order == ChannelOrder::Reversed {
            edges.reverse();
        }
        let channels = edges
            .into_iter()
            .map(|e| match e {
                EdgeRef::Damping(p) => make_damping(p, dim, self.dt),
                EdgeRef::Coherent(p) => make_unitary(p, dim, self.dt),
                EdgeRef::Dephasing(p) => make_dephasing(p, dim, self.dt),
            })
            .collect::<Result<Vec<Channel>>>()?;
        let mut superop = Superoperator::identity(dim);
        for ch in &channels {
            superop = ch.superoperator().compose(&superop)?;
        }
        Ok(StepMap {
            dim,
            dt: self.dt,
            channels,
            superop,
        })
    }

    /// `|initial><initial|`.
    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::basis_state(self.n_nodes, self.initial_node)
    }

    /// Replace the time step.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Replace the rate of the dephasing edge on the unordered pair `{a, b}`.
    pub fn with_dephasing_rate(mut self, a: usize, b: usize, rate: f64) -> Result<Self> {
        for p in &mut self.dephasing {
            if (p.j, p.k) == (a, b) || (p.j, p.k) == (b, a) {
                p.rate = rate;
                return Ok(self);
            }
        }
        Err(Error::InvalidGraph(format!(
            "no dephasing edge between nodes {} and {}",
            a + 1,
            b + 1
        )))
    }

    /// Replace the rate of the damping edge `target <- source`.
    pub fn with_damping_rate(mut self, target: usize, source: usize, rate: f64) -> Result<Self> {
        for p in &mut self.damping {
            if p.target == target && p.source == source {
                p.rate = rate;
                return Ok(self);
            }
        }
        Err(Error::InvalidGraph(format!(
            "no damping edge {}<-{}",
            target + 1,
            source + 1
        )))
    }

    /// Replace the on-site level of `node` on every coherent edge touching it.
    pub fn with_level(mut self, node: usize, omega: f64) -> Result<Self> {
        let mut touched = false;
        for p in &mut self.coherent {
            if p.j == node {
                p.omega_j = omega;
                touched = true;
            }
            if p.k == node {
                p.omega_k = omega;
                touched = true;
            }
        }
        if touched {
            Ok(self)
        } else {
            Err(Error::InvalidGraph(format!(
                "no coherent edge touches node {}",
                node + 1
            )))
        }
    }

    /// Per-step dephasing strength `mu = rate * dt` of the edge on the
    /// unordered pair `{a, b}`, if one exists.
    pub fn dephasing_mu(&self, a: usize, b: usize) -> Option<f64> {
        self.dephasing
            .iter()
            .find(|p| (p.j, p.k) == (a, b) || (p.j, p.k) == (b, a))
            .map(|p| p.rate * self.dt)
    }
}

/// The four-node radical-pair model with its published magnitudes.
///
/// Node 1 is the initial electron acceptor, nodes 2 and 3 are the coherently
/// coupled pair, node 4 collects the reaction product irreversibly:
///
/// * pumping `2 <- 1` at `1e8 /s` and back-transfer `1 <- 2` at `1e7 /s`,
/// * product formation `4 <- 2` and `4 <- 3`, both at `3.3e6 /s`,
/// * coherent exchange between 3 and 2 with levels `1.76e7 /s` (node 3) and
///   `0` (node 2) and coupling `4.06e7 /s`,
/// * a dephasing knob on the pair `3 ~ 2`, zero by default,
/// * `dt = 1e-14 s`, walker starting on node 1.
pub fn cryptochrome_preset() -> ReactionGraph {
    ReactionGraph {
        n_nodes: 4,
        dt: 1e-14,
        initial_node: 0,
        damping: vec![
            DampingParams {
                target: 1,
                source: 0,
                rate: 1e8,
            },
            DampingParams {
                target: 0,
                source: 1,
                rate: 1e7,
            },
            DampingParams {
                target: 3,
                source: 1,
                rate: 3.3e6,
            },
            DampingParams {
                target: 3,
                source: 2,
                rate: 3.3e6,
            },
        ],
        dephasing: vec![DephasingParams {
            j: 2,
            k: 1,
            rate: 0.0,
        }],
        coherent: vec![CoherentParams {
            j: 2,
            k: 1,
            omega_j: 1.76e7,
            omega_k: 0.0,
            coupling: 4.06e7,
        }],
    }
}

/// One compiled evolution step: ordered channels plus their composition.
#[derive(Debug, Clone)]
pub struct StepMap {
    dim: usize,
    dt: f64,
    channels: Vec<Channel>,
    superop: Superoperator,
}

impl StepMap {
    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Time step in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// The per-edge channels in application order (first applied first).
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// The composed one-step superoperator.
    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    /// Apply one step through the composed superoperator.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.superop.apply(rho)
    }

    /// Apply one step channel-by-channel with direct Kraus application.
    ///
    /// Slower than [`apply`](Self::apply) but structurally independent of
    /// the superoperator compilation; the two paths are cross-checked in
    /// tests.
    pub fn apply_channels(&self, rho: &CMatrix) -> Result<CMatrix> {
        let mut state = rho.clone();
        for ch in &self.channels {
            state = ch.apply(&state)?;
        }
        Ok(state)
    }
}
