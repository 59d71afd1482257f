//! Minimum driver allocation for target control via maximum flow.
//!
//! Every node `v` is split into `v_in` (receives the original in-edges) and
//! `v_out` (emits the original out-edges). In the target network a unit of
//! flow leaves the sink `v_t` through a target's out-copy, follows original
//! edges through non-target nodes (whose split arc has unit capacity), and
//! enters the source `v_s` from another target's in-copy. Each unit merges
//! two path ends, so the minimum number of paths covering the targets is
//! `|S| - maxflow(v_t -> v_s)`. The edges whose image carries flow form
//! vertex-disjoint chains and cycles: the cover.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::flow::{
    self, ArcClass, BoundedFlowNetwork, Capacity, FlowAssignment, FlowError,
};
use crate::graph::{DiGraph, GraphError, NodeId, TargetSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("empty target set")]
    EmptyTarget,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("node {node} has {what} {degree} in the flow-carrying edge set")]
    DegreeBound {
        node: NodeId,
        what: &'static str,
        degree: usize,
    },
    #[error("edge set is not a union of disjoint chains and cycles (stuck at node {0})")]
    MalformedEdgeSet(NodeId),
    #[error("internal consistency: {0}")]
    Internal(String),
}

/// The split-node flow network: `v_in = i`, `v_out = n + i`, `v_s = 2n`,
/// `v_t = 2n + 1`, unit capacity everywhere.
#[derive(Debug, Clone)]
pub struct TransformedNetwork {
    pub network: BoundedFlowNetwork,
    graph_nodes: usize,
    /// Original edge for every arc that is the image of one.
    edge_of_arc: Vec<Option<(NodeId, NodeId)>>,
}

impl TransformedNetwork {
    pub fn graph_nodes(&self) -> usize {
        self.graph_nodes
    }

    pub fn in_copy(&self, v: NodeId) -> usize {
        v
    }

    pub fn out_copy(&self, v: NodeId) -> usize {
        self.graph_nodes + v
    }

    pub fn source(&self) -> usize {
        2 * self.graph_nodes
    }

    pub fn sink(&self) -> usize {
        2 * self.graph_nodes + 1
    }

    pub fn arcs_of_class(&self, class: ArcClass) -> usize {
        self.network
            .arcs()
            .iter()
            .filter(|a| a.class == Some(class))
            .count()
    }

    /// Original edge behind arc `k`, if it is a link arc.
    pub fn edge_of_arc(&self, k: usize) -> Option<(NodeId, NodeId)> {
        self.edge_of_arc[k]
    }
}

/// Vertex-disjoint simple paths and cycles. A cycle is listed once without
/// repeating its first node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathCover {
    pub paths: Vec<Vec<NodeId>>,
    pub cycles: Vec<Vec<NodeId>>,
}

impl PathCover {
    /// Edges used by paths and cycles, cycles including the wrap-around edge.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for p in &self.paths {
            out.extend(p.windows(2).map(|w| (w[0], w[1])));
        }
        for c in &self.cycles {
            out.extend(c.windows(2).map(|w| (w[0], w[1])));
            if let (Some(&last), Some(&first)) = (c.last(), c.first()) {
                out.push((last, first));
            }
        }
        out
    }

    pub fn covered(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.paths.iter().chain(&self.cycles).flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub cover: PathCover,
    /// `max(|paths|, 1)`.
    pub min_drivers: usize,
    /// Maximum flow of the target network; `|paths| = |S| - flow_value`.
    pub flow_value: u64,
}

/// Nonzero pattern of the input matrix: `(driver, node)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriverAllocation {
    pub driver_count: usize,
    pub attachments: Vec<(usize, NodeId)>,
}

impl fmt::Display for DriverAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} driver(s):", self.driver_count)?;
        for (d, v) in &self.attachments {
            write!(f, " u{d}->{v}")?;
        }
        Ok(())
    }
}

pub fn build_target_network(
    g: &DiGraph,
    target: &TargetSet,
) -> Result<TransformedNetwork, SolveError> {
    if target.is_empty() {
        return Err(SolveError::EmptyTarget);
    }
    let n = g.node_count();
    if let Some(&v) = target.members().last() {
        if v >= n {
            return Err(GraphError::TargetOutOfRange { node: v, n }.into());
        }
    }
    let (source, sink) = (2 * n, 2 * n + 1);
    let mut net = BoundedFlowNetwork::new(2 * n + 2, source, sink)?;
    let mut edge_of_arc = Vec::with_capacity(2 * target.len() + n + g.edge_count());
    let unit = Capacity::Finite(1);

    for &v in target.members() {
        net.add_arc(sink, n + v, 0, unit, Some(ArcClass::Outlet))?;
        edge_of_arc.push(None);
    }
    for &v in target.members() {
        net.add_arc(v, source, 0, unit, Some(ArcClass::Inlet))?;
        edge_of_arc.push(None);
    }
    let is_target = target.mask(n);
    for v in (0..n).filter(|&v| !is_target[v]) {
        net.add_arc(v, n + v, 0, unit, Some(ArcClass::Split))?;
        edge_of_arc.push(None);
    }
    for &(i, j) in g.edges() {
        net.add_arc(n + i, j, 0, unit, Some(ArcClass::Link))?;
        edge_of_arc.push(Some((i, j)));
    }
    Ok(TransformedNetwork {
        network: net,
        graph_nodes: n,
        edge_of_arc,
    })
}

fn check_unit_degrees(n: usize, edges: &[(NodeId, NodeId)]) -> Result<(), SolveError> {
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    for &(i, j) in edges {
        outdeg[i] += 1;
        indeg[j] += 1;
    }
    for v in 0..n {
        if outdeg[v] > 1 {
            return Err(SolveError::DegreeBound {
                node: v,
                what: "out-degree",
                degree: outdeg[v],
            });
        }
        if indeg[v] > 1 {
            return Err(SolveError::DegreeBound {
                node: v,
                what: "in-degree",
                degree: indeg[v],
            });
        }
    }
    Ok(())
}

/// Original edges whose link arc carries one unit of flow.
pub fn extract_cover_edges(
    tnet: &TransformedNetwork,
    flow: &FlowAssignment,
) -> Result<Vec<(NodeId, NodeId)>, SolveError> {
    let edges: Vec<_> = flow
        .flow
        .iter()
        .enumerate()
        .filter(|&(_, &f)| f > 0)
        .filter_map(|(k, _)| tnet.edge_of_arc(k))
        .collect();
    check_unit_degrees(tnet.graph_nodes, &edges)?;
    Ok(edges)
}

/// Peels an edge set of in/out-degree at most one into paths and cycles.
///
/// Targets touching no edge become single-node paths first. Chains are then
/// peeled from every in-degree-0 node in ascending id order, and the
/// remaining edges are peeled into cycles starting from the smallest node.
pub fn decompose_cover(
    node_count: usize,
    edges: &[(NodeId, NodeId)],
    target: &TargetSet,
) -> Result<PathCover, SolveError> {
    if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= node_count || j >= node_count) {
        return Err(GraphError::NodeOutOfRange {
            tail: i,
            head: j,
            n: node_count,
        }
        .into());
    }
    check_unit_degrees(node_count, edges)?;
    let mut next = vec![None; node_count];
    let mut has_pred = vec![false; node_count];
    for &(i, j) in edges {
        next[i] = Some(j);
        has_pred[j] = true;
    }
    let mut cover = PathCover::default();

    for &v in target.members() {
        if v < node_count && next[v].is_none() && !has_pred[v] {
            cover.paths.push(vec![v]);
        }
    }

    for start in 0..node_count {
        if has_pred[start] || next[start].is_none() {
            continue;
        }
        let mut path = vec![start];
        let mut v = start;
        while let Some(w) = next[v].take() {
            has_pred[w] = false;
            path.push(w);
            v = w;
        }
        cover.paths.push(path);
    }

    for start in 0..node_count {
        if next[start].is_none() {
            continue;
        }
        let mut cycle = vec![start];
        let mut v = start;
        loop {
            let w = next[v].take().ok_or(SolveError::MalformedEdgeSet(v))?;
            has_pred[w] = false;
            if w == start {
                break;
            }
            cycle.push(w);
            v = w;
        }
        cover.cycles.push(cycle);
    }
    Ok(cover)
}

/// Drops cycles that cover no target; they carry flow but control nothing.
fn prune_idle_cycles(cover: &mut PathCover, target: &TargetSet) {
    cover
        .cycles
        .retain(|c| c.iter().any(|&v| target.contains(v)));
}

pub fn solve(g: &DiGraph, target: &TargetSet) -> Result<Solution, SolveError> {
    let tnet = build_target_network(g, target)?;
    let flow = flow::max_flow_dinic(&tnet.network, tnet.sink(), tnet.source())?;
    let edges = extract_cover_edges(&tnet, &flow)?;
    let mut cover = decompose_cover(g.node_count(), &edges, target)?;
    prune_idle_cycles(&mut cover, target);
    let expected_paths = target.len() as i128 - flow.value as i128;
    if cover.paths.len() as i128 != expected_paths {
        return Err(SolveError::Internal(format!(
            "{} paths but |S| - maxflow = {expected_paths}",
            cover.paths.len()
        )));
    }
    Ok(Solution {
        min_drivers: cover.paths.len().max(1),
        flow_value: flow.value,
        cover,
    })
}

/// Full lower-bounded network: source to every in-copy, every out-copy to
/// sink, split arcs with `l = 1` exactly on targets, link arcs for edges.
/// The source is `2n`, the sink `2n + 1`; no return arc is included.
pub fn build_circulation_network(
    g: &DiGraph,
    target: &TargetSet,
) -> Result<TransformedNetwork, SolveError> {
    if target.is_empty() {
        return Err(SolveError::EmptyTarget);
    }
    let n = g.node_count();
    if let Some(&v) = target.members().last() {
        if v >= n {
            return Err(GraphError::TargetOutOfRange { node: v, n }.into());
        }
    }
    let (source, sink) = (2 * n, 2 * n + 1);
    let mut net = BoundedFlowNetwork::new(2 * n + 2, source, sink)?;
    let mut edge_of_arc = Vec::new();
    for v in 0..n {
        net.add_arc(source, v, 0, 1, Some(ArcClass::SourceLink))?;
        edge_of_arc.push(None);
        net.add_arc(n + v, sink, 0, 1, Some(ArcClass::SinkLink))?;
        edge_of_arc.push(None);
    }
    for v in 0..n {
        let lower = u64::from(target.contains(v));
        net.add_arc(v, n + v, lower, 1, Some(ArcClass::Split))?;
        edge_of_arc.push(None);
    }
    for &(i, j) in g.edges() {
        net.add_arc(n + i, j, 0, 1, Some(ArcClass::Link))?;
        edge_of_arc.push(Some((i, j)));
    }
    Ok(TransformedNetwork {
        network: net,
        graph_nodes: n,
        edge_of_arc,
    })
}

/// Same answer as [`solve`], computed as a minimum flow with lower bounds on
/// the full split network instead of the reduced one.
pub fn solve_via_circulation(g: &DiGraph, target: &TargetSet) -> Result<Solution, SolveError> {
    let tnet = build_circulation_network(g, target)?;
    let flow = flow::min_flow_with_bounds(&tnet.network, tnet.source(), tnet.sink())?;
    let edges = extract_cover_edges(&tnet, &flow)?;
    let mut cover = decompose_cover(g.node_count(), &edges, target)?;
    prune_idle_cycles(&mut cover, target);
    if cover.paths.len() as u64 != flow.value {
        return Err(SolveError::Internal(format!(
            "{} paths but minimum flow {}",
            cover.paths.len(),
            flow.value
        )));
    }
    let flow_value = (target.len() as u64).checked_sub(flow.value).ok_or_else(|| {
        SolveError::Internal(format!(
            "minimum flow {} exceeds target count {}",
            flow.value,
            target.len()
        ))
    })?;
    Ok(Solution {
        min_drivers: cover.paths.len().max(1),
        flow_value,
        cover,
    })
}

/// Driver `k` feeds the head of path `k`; every cycle is fed at its smallest
/// node by driver 0.
pub fn allocate_drivers(cover: &PathCover) -> DriverAllocation {
    let mut attachments: Vec<(usize, NodeId)> = cover
        .paths
        .iter()
        .enumerate()
        .filter_map(|(k, p)| p.first().map(|&head| (k, head)))
        .collect();
    for c in &cover.cycles {
        if let Some(&v) = c.iter().min() {
            attachments.push((0, v));
        }
    }
    DriverAllocation {
        driver_count: cover.paths.len().max(1),
        attachments,
    }
}

/// True iff the cover's paths and cycles are simple, pairwise disjoint, use
/// only edges of `g`, and include every target.
pub fn verify_cover(g: &DiGraph, target: &TargetSet, cover: &PathCover) -> bool {
    let n = g.node_count();
    let mut seen = HashSet::new();
    for v in cover.covered() {
        if v >= n || !seen.insert(v) {
            return false;
        }
    }
    if cover.paths.iter().chain(&cover.cycles).any(|p| p.is_empty()) {
        return false;
    }
    if !cover.edges().iter().all(|&(i, j)| g.has_edge(i, j)) {
        return false;
    }
    target.members().iter().all(|v| seen.contains(v))
}
