//! Directed acyclic multigraph model with unit-capacity links.
//!
//! Capacities greater than one are represented by parallel edges, so max-flow
//! (and therefore min-cut) reduces to counting edge-disjoint augmenting paths.
//! Graphs are immutable after construction; every query is read-only.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

const GENERATION_RETRIES: u32 = 64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph contains a cycle")]
    Cyclic,
    #[error("layer count must be positive")]
    NoLayers,
    #[error("node id {0} out of range (node count {1})")]
    NodeOutOfRange(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("source node {0} has an incoming edge")]
    SourceHasParent(usize),
    #[error("receivers must be distinct non-source nodes")]
    BadReceivers,
    #[error("min-cut is undefined for the source node")]
    MinCutOfSource,
    #[error("invalid generation parameters: {0}")]
    BadGenParams(String),
    #[error("could not satisfy generation constraints after {0} attempts")]
    GenerationFailed(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Parameters for random network generation.
///
/// `max_in_degree` and `max_min_cut` both default to the layer count, which
/// is how the multicast experiments bound receiver demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub node_count: usize,
    pub receiver_count: usize,
    pub layers: u32,
    pub max_in_degree: u32,
    pub max_min_cut: u32,
}

impl GenParams {
    pub fn new(node_count: usize, receiver_count: usize, layers: u32) -> GenParams {
        GenParams {
            node_count,
            receiver_count,
            layers,
            max_in_degree: layers,
            max_min_cut: layers,
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        if self.node_count < 2 {
            return Err(GraphError::BadGenParams("need at least two nodes".into()));
        }
        if self.receiver_count == 0 || self.receiver_count >= self.node_count {
            return Err(GraphError::BadGenParams(
                "receiver count must be in 1..node_count".into(),
            ));
        }
        if self.layers == 0 || self.max_in_degree == 0 || self.max_min_cut == 0 {
            return Err(GraphError::BadGenParams(
                "layers, max in-degree and max min-cut must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A single-source multicast network: acyclic multigraph, unit-capacity
/// edges, a receiver set, and the number of source layers.
#[derive(Debug, Clone)]
pub struct LayeredDag {
    layers: u32,
    source: NodeId,
    receivers: Vec<NodeId>,
    is_receiver: Vec<bool>,
    edges: Vec<(NodeId, NodeId)>,
    in_adj: Vec<Vec<EdgeId>>,
    out_adj: Vec<Vec<EdgeId>>,
    topo: Vec<NodeId>,
}

impl LayeredDag {
    pub fn new(
        layers: u32,
        node_count: usize,
        source: NodeId,
        receivers: Vec<NodeId>,
        edges: Vec<(NodeId, NodeId)>,
    ) -> Result<LayeredDag, GraphError> {
        if layers == 0 {
            return Err(GraphError::NoLayers);
        }
        if source >= node_count {
            return Err(GraphError::NodeOutOfRange(source, node_count));
        }
        let mut is_receiver = vec![false; node_count];
        for &r in &receivers {
            if r >= node_count {
                return Err(GraphError::NodeOutOfRange(r, node_count));
            }
            if r == source || is_receiver[r] {
                return Err(GraphError::BadReceivers);
            }
            is_receiver[r] = true;
        }
        let mut in_adj = vec![Vec::new(); node_count];
        let mut out_adj = vec![Vec::new(); node_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= node_count {
                return Err(GraphError::NodeOutOfRange(u, node_count));
            }
            if v >= node_count {
                return Err(GraphError::NodeOutOfRange(v, node_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            out_adj[u].push(id);
            in_adj[v].push(id);
        }
        if !in_adj[source].is_empty() {
            return Err(GraphError::SourceHasParent(source));
        }
        let topo = kahn_order(node_count, &edges, &out_adj)?;
        Ok(LayeredDag {
            layers,
            source,
            receivers,
            is_receiver,
            edges,
            in_adj,
            out_adj,
            topo,
        })
    }

    pub fn layers(&self) -> u32 {
        self.layers
    }

    pub fn node_count(&self) -> usize {
        self.in_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn receivers(&self) -> &[NodeId] {
        &self.receivers
    }

    pub fn is_receiver(&self, v: NodeId) -> bool {
        self.is_receiver[v]
    }

    /// Tail and head of an edge.
    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_adj[v]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_adj[v]
    }

    /// Distinct parent nodes, ascending. Parallel edges collapse to one entry.
    pub fn parents(&self, v: NodeId) -> Vec<NodeId> {
        let mut p: Vec<NodeId> = self.in_adj[v].iter().map(|&e| self.edges[e].0).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// Distinct child nodes, ascending.
    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        let mut c: Vec<NodeId> = self.out_adj[v].iter().map(|&e| self.edges[e].1).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Topological order with the smallest node id first among ready nodes.
    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Longest-path distance from the source; `None` for unreachable nodes.
    pub fn levels(&self) -> Vec<Option<u32>> {
        let mut level = vec![None; self.node_count()];
        level[self.source] = Some(0);
        for &v in &self.topo {
            if v == self.source {
                continue;
            }
            let mut best: Option<u32> = None;
            for &e in &self.in_adj[v] {
                if let Some(l) = level[self.edges[e].0] {
                    best = Some(best.map_or(l + 1, |b: u32| b.max(l + 1)));
                }
            }
            level[v] = best;
        }
        level
    }

    /// Maximum number of edge-disjoint source-to-`v` paths.
    pub fn min_cut(&self, v: NodeId) -> Result<u32, GraphError> {
        if v == self.source {
            return Err(GraphError::MinCutOfSource);
        }
        Ok(self.max_flow(v).0)
    }

    /// Min-cut of every node in one sweep; the source entry is 0.
    pub fn min_cuts_from_source(&self) -> Vec<u32> {
        (0..self.node_count())
            .map(|v| {
                if v == self.source {
                    0
                } else {
                    self.max_flow(v).0
                }
            })
            .collect()
    }

    /// The in-edges of `v` used by one maximum set of edge-disjoint paths
    /// from the source. Returns exactly `min_cut(v)` edge ids, deterministic.
    pub fn disjoint_in_edges(&self, v: NodeId) -> Vec<EdgeId> {
        if v == self.source {
            return Vec::new();
        }
        let (_, cap) = self.max_flow(v);
        self.in_adj[v]
            .iter()
            .copied()
            .filter(|&e| cap[e] == 0)
            .collect()
    }

    /// Breadth-first augmenting paths on the unit-capacity residual graph.
    /// Returns the flow value and the residual forward capacities.
    fn max_flow(&self, t: NodeId) -> (u32, Vec<u8>) {
        let n = self.node_count();
        let mut cap: Vec<u8> = vec![1; self.edges.len()];
        let mut flow = 0u32;
        let mut pred: Vec<Option<(EdgeId, bool)>> = vec![None; n];
        loop {
            pred.iter_mut().for_each(|p| *p = None);
            let mut seen = vec![false; n];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.out_adj[u] {
                    let w = self.edges[e].1;
                    if cap[e] == 1 && !seen[w] {
                        seen[w] = true;
                        pred[w] = Some((e, true));
                        if w == t {
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
                for &e in &self.in_adj[u] {
                    let w = self.edges[e].0;
                    if cap[e] == 0 && !seen[w] {
                        seen[w] = true;
                        pred[w] = Some((e, false));
                        queue.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return (flow, cap);
            }
            let mut v = t;
            while v != self.source {
                let (e, forward) = pred[v].expect("predecessor on augmenting path");
                if forward {
                    cap[e] = 0;
                    v = self.edges[e].0;
                } else {
                    cap[e] = 1;
                    v = self.edges[e].1;
                }
            }
            flow += 1;
        }
    }

    /// Random network subject to the generation constraints: every non-source
    /// node draws an in-degree in 1..=max_in_degree from earlier-ranked nodes,
    /// receivers are drawn uniformly among non-source nodes, and the result is
    /// rejected (bounded retries) if any node's min-cut exceeds `max_min_cut`.
    pub fn generate_random(
        params: GenParams,
        rng: &mut impl Rng,
    ) -> Result<LayeredDag, GraphError> {
        params.validate()?;
        let n = params.node_count;
        for _ in 0..GENERATION_RETRIES {
            let mut order: Vec<NodeId> = (0..n).collect();
            order.shuffle(rng);
            let source = order[0];

            let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
            for i in 1..n {
                let v = order[i];
                let want = rng.gen_range(1..=params.max_in_degree) as usize;
                let d = want.min(i);
                let mut ranks = rand::seq::index::sample(rng, i, d).into_vec();
                ranks.sort_unstable();
                for r in ranks {
                    edges.push((order[r], v));
                }
            }

            let candidates: Vec<NodeId> = (0..n).filter(|&v| v != source).collect();
            let mut receivers: Vec<NodeId> =
                rand::seq::index::sample(rng, n - 1, params.receiver_count)
                    .into_iter()
                    .map(|i| candidates[i])
                    .collect();
            receivers.sort_unstable();

            let g = LayeredDag::new(params.layers, n, source, receivers, edges)?;
            let cuts = g.min_cuts_from_source();
            let within_bound = (0..n).all(|v| v == source || cuts[v] <= params.max_min_cut);
            let receivers_reachable = g.receivers.iter().all(|&r| cuts[r] >= 1);
            if within_bound && receivers_reachable {
                return Ok(g);
            }
        }
        Err(GraphError::GenerationFailed(GENERATION_RETRIES))
    }

    /// Canonical line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("layers {}\n", self.layers));
        s.push_str(&format!("nodes {}\n", self.node_count()));
        s.push_str(&format!("source {}\n", self.source));
        s.push_str("receivers");
        for r in &self.receivers {
            s.push_str(&format!(" {r}"));
        }
        s.push('\n');
        for &(u, v) in &self.edges {
            s.push_str(&format!("edge {u} {v}\n"));
        }
        s
    }

    /// Parse the text form. Blank lines and `#` comments are ignored; cycles
    /// and out-of-range ids are rejected.
    pub fn from_text(text: &str) -> Result<LayeredDag, GraphError> {
        let mut layers: Option<u32> = None;
        let mut nodes: Option<usize> = None;
        let mut source: Option<NodeId> = None;
        let mut receivers: Option<Vec<NodeId>> = None;
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

        let parse_err = |line: usize, msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let key = tokens.next().unwrap();
            let rest: Vec<&str> = tokens.collect();
            match key {
                "layers" => {
                    let v = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, "expected `layers L`"))?;
                    layers = Some(v);
                }
                "nodes" => {
                    let v = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, "expected `nodes N`"))?;
                    nodes = Some(v);
                }
                "source" => {
                    let v = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, "expected `source S`"))?;
                    source = Some(v);
                }
                "receivers" => {
                    let mut ids = Vec::with_capacity(rest.len());
                    for t in &rest {
                        ids.push(
                            t.parse()
                                .map_err(|_| parse_err(line_no, "bad receiver id"))?,
                        );
                    }
                    receivers = Some(ids);
                }
                "edge" => {
                    if rest.len() != 2 {
                        return Err(parse_err(line_no, "expected `edge U V`"));
                    }
                    let u = rest[0]
                        .parse()
                        .map_err(|_| parse_err(line_no, "bad edge tail"))?;
                    let v = rest[1]
                        .parse()
                        .map_err(|_| parse_err(line_no, "bad edge head"))?;
                    edges.push((u, v));
                }
                other => {
                    return Err(parse_err(line_no, &format!("unknown keyword `{other}`")));
                }
            }
        }

        let layers = layers.ok_or_else(|| parse_err(0, "missing `layers` line"))?;
        let nodes = nodes.ok_or_else(|| parse_err(0, "missing `nodes` line"))?;
        let source = source.ok_or_else(|| parse_err(0, "missing `source` line"))?;
        let receivers = receivers.ok_or_else(|| parse_err(0, "missing `receivers` line"))?;
        LayeredDag::new(layers, nodes, source, receivers, edges)
    }
}

fn kahn_order(
    n: usize,
    edges: &[(NodeId, NodeId)],
    out_adj: &[Vec<EdgeId>],
) -> Result<Vec<NodeId>, GraphError> {
    let mut indeg = vec![0usize; n];
    for &(_, v) in edges {
        indeg[v] += 1;
    }
    // Min-heap on node id keeps the order deterministic.
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = ready.pop() {
        order.push(v);
        for &e in &out_adj[v] {
            let w = edges[e].1;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(std::cmp::Reverse(w));
            }
        }
    }
    if order.len() != n {
        return Err(GraphError::Cyclic);
    }
    Ok(order)
}
