//! Integer capacity networks with lower and upper arc bounds.
//!
//! [`max_flow_dinic`] solves plain networks. Lower bounds are removed by the
//! associate-graph transform ([`build_associate_graph`]): a super source feeds
//! every node the lower bounds of its in-arcs, a super sink drains the lower
//! bounds of its out-arcs, and every arc keeps `c - l`. A feasible circulation
//! exists iff the super source can saturate all of that supply
//! ([`feasible_circulation`]). [`min_flow_with_bounds`] starts from such a
//! circulation and pushes as much as possible back from sink to source.

mod dinic;

pub use dinic::Residual;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("source and sink are the same node ({0})")]
    SameEndpoints(usize),
    #[error("node {node} is outside 0..{node_count}")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("arc {arc}: lower bound {lower} exceeds capacity {cap}")]
    LowerExceedsCapacity { arc: usize, lower: u64, cap: u64 },
    #[error("arc {0} has a non-zero lower bound; plain max flow needs l = 0")]
    NonZeroLowerBound(usize),
    #[error("no feasible flow")]
    NoFeasibleFlow,
    #[error("flow violates {0}")]
    Violation(String),
}

/// Upper bound of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    fn resolve(self, infinity: u64) -> u64 {
        match self {
            Capacity::Finite(c) => c,
            Capacity::Infinite => infinity,
        }
    }

    fn admits(self, value: u64) -> bool {
        match self {
            Capacity::Finite(c) => value <= c,
            Capacity::Infinite => true,
        }
    }
}

impl From<u64> for Capacity {
    fn from(c: u64) -> Self {
        Capacity::Finite(c)
    }
}

/// Role of an arc inside one of the constructed networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcClass {
    /// Sink to out-copy of a target node.
    Outlet,
    /// In-copy of a target node to source.
    Inlet,
    /// In-copy to out-copy of one node.
    Split,
    /// Image of an original graph edge, out-copy to in-copy.
    Link,
    /// Source to in-copy (full circulation network).
    SourceLink,
    /// Out-copy to sink (full circulation network).
    SinkLink,
    /// Sink back to source.
    Return,
    /// Super source to a node (associate graph).
    Supply,
    /// Node to super sink (associate graph).
    Demand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedArc {
    pub tail: usize,
    pub head: usize,
    pub lower: u64,
    pub cap: Capacity,
    pub class: Option<ArcClass>,
}

/// Capacity network with lower bounds `l(e)` and upper bounds `c(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedFlowNetwork {
    node_count: usize,
    arcs: Vec<BoundedArc>,
    source: usize,
    sink: usize,
}

impl BoundedFlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Result<Self, FlowError> {
        for node in [source, sink] {
            if node >= node_count {
                return Err(FlowError::NodeOutOfRange { node, node_count });
            }
        }
        Ok(Self {
            node_count,
            arcs: Vec::new(),
            source,
            sink,
        })
    }

    pub fn add_arc(
        &mut self,
        tail: usize,
        head: usize,
        lower: u64,
        cap: impl Into<Capacity>,
        class: Option<ArcClass>,
    ) -> Result<usize, FlowError> {
        let cap = cap.into();
        for node in [tail, head] {
            if node >= self.node_count {
                return Err(FlowError::NodeOutOfRange {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        if let Capacity::Finite(c) = cap {
            if lower > c {
                return Err(FlowError::LowerExceedsCapacity {
                    arc: self.arcs.len(),
                    lower,
                    cap: c,
                });
            }
        }
        self.arcs.push(BoundedArc {
            tail,
            head,
            lower,
            cap,
            class,
        });
        Ok(self.arcs.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[BoundedArc] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn lower_bound_total(&self) -> u64 {
        self.arcs.iter().map(|a| a.lower).sum()
    }

    /// Stand-in for an infinite capacity: strictly greater than any flow the
    /// network's finite arcs can carry.
    pub fn infinity(&self) -> u64 {
        let finite: u64 = self
            .arcs
            .iter()
            .map(|a| match a.cap {
                Capacity::Finite(c) => c,
                Capacity::Infinite => 0,
            })
            .sum();
        finite + self.lower_bound_total() + 1
    }

    fn check_node(&self, node: usize) -> Result<(), FlowError> {
        if node >= self.node_count {
            Err(FlowError::NodeOutOfRange {
                node,
                node_count: self.node_count,
            })
        } else {
            Ok(())
        }
    }

    /// Net flow leaving `node` under `flow`.
    pub fn net_outflow(&self, flow: &[u64], node: usize) -> i128 {
        self.arcs
            .iter()
            .zip(flow)
            .map(|(a, &f)| {
                let f = f as i128;
                match (a.tail == node, a.head == node) {
                    (true, false) => f,
                    (false, true) => -f,
                    _ => 0,
                }
            })
            .sum()
    }

    /// Flow from source to sink carried by a circulation: the net outflow of
    /// the source ignoring return arcs (sink, source).
    fn forward_value(&self, flow: &[u64]) -> u64 {
        let value: i128 = self
            .arcs
            .iter()
            .zip(flow)
            .filter(|(a, _)| !(a.tail == self.sink && a.head == self.source))
            .map(|(a, &f)| {
                let f = f as i128;
                match (a.tail == self.source, a.head == self.source) {
                    (true, false) => f,
                    (false, true) => -f,
                    _ => 0,
                }
            })
            .sum();
        value.max(0) as u64
    }
}

/// Integer flow, one entry per arc, with its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    pub flow: Vec<u64>,
    pub value: u64,
}

impl FlowAssignment {
    fn check_bounds(&self, net: &BoundedFlowNetwork) -> Result<(), FlowError> {
        if self.flow.len() != net.arcs.len() {
            return Err(FlowError::Violation(format!(
                "arc count: {} flows for {} arcs",
                self.flow.len(),
                net.arcs.len()
            )));
        }
        for (k, (a, &f)) in net.arcs.iter().zip(&self.flow).enumerate() {
            if f < a.lower || !a.cap.admits(f) {
                return Err(FlowError::Violation(format!(
                    "bounds on arc {k}: flow {f}, lower {}, cap {:?}",
                    a.lower, a.cap
                )));
            }
        }
        Ok(())
    }

    /// Checks bounds on every arc, conservation at every node except `s` and
    /// `t`, and that `value` is the net outflow of `s` and net inflow of `t`.
    pub fn check(&self, net: &BoundedFlowNetwork, s: usize, t: usize) -> Result<(), FlowError> {
        self.check_bounds(net)?;
        for v in 0..net.node_count {
            let out = net.net_outflow(&self.flow, v);
            let expected = if v == s {
                self.value as i128
            } else if v == t {
                -(self.value as i128)
            } else {
                0
            };
            if out != expected {
                return Err(FlowError::Violation(format!(
                    "conservation at node {v}: net outflow {out}, expected {expected}"
                )));
            }
        }
        Ok(())
    }

    /// Checks bounds and conservation at every node.
    pub fn check_circulation(&self, net: &BoundedFlowNetwork) -> Result<(), FlowError> {
        self.check_bounds(net)?;
        for v in 0..net.node_count {
            let out = net.net_outflow(&self.flow, v);
            if out != 0 {
                return Err(FlowError::Violation(format!(
                    "conservation at node {v}: net outflow {out}"
                )));
            }
        }
        Ok(())
    }
}

/// Maximum integer flow from `s` to `t`; every lower bound must be zero.
pub fn max_flow_dinic(
    net: &BoundedFlowNetwork,
    s: usize,
    t: usize,
) -> Result<FlowAssignment, FlowError> {
    net.check_node(s)?;
    net.check_node(t)?;
    if s == t {
        return Err(FlowError::SameEndpoints(s));
    }
    if let Some(k) = net.arcs.iter().position(|a| a.lower != 0) {
        return Err(FlowError::NonZeroLowerBound(k));
    }
    let infinity = net.infinity();
    let mut residual = Residual::with_capacity(net.node_count, net.arcs.len());
    for a in &net.arcs {
        residual.add_arc(a.tail, a.head, a.cap.resolve(infinity), 0);
    }
    let value = residual.max_flow(s, t, u64::MAX);
    let flow = (0..net.arcs.len())
        .map(|k| residual.pushed(k) as u64)
        .collect();
    Ok(FlowAssignment { flow, value })
}

/// Lower-bound-free image of a bounded network.
#[derive(Debug, Clone)]
pub struct AssociateGraph {
    pub network: BoundedFlowNetwork,
    /// `arc_image[k]` is the index in `network` of original arc `k`.
    pub arc_image: Vec<usize>,
    pub super_source: usize,
    pub super_sink: usize,
    /// Sum of all original lower bounds; the super source must saturate it.
    pub required: u64,
}

pub fn build_associate_graph(net: &BoundedFlowNetwork) -> AssociateGraph {
    let n = net.node_count;
    let super_source = n;
    let super_sink = n + 1;
    let mut supply = vec![0u64; n];
    let mut demand = vec![0u64; n];
    for a in &net.arcs {
        supply[a.head] += a.lower;
        demand[a.tail] += a.lower;
    }
    let mut out = BoundedFlowNetwork::new(n + 2, super_source, super_sink)
        .expect("super nodes are in range");
    let mut arc_image = Vec::with_capacity(net.arcs.len());
    for a in &net.arcs {
        let cap = match a.cap {
            Capacity::Finite(c) => Capacity::Finite(c - a.lower),
            Capacity::Infinite => Capacity::Infinite,
        };
        let k = out
            .add_arc(a.tail, a.head, 0, cap, a.class)
            .expect("original arc is valid");
        arc_image.push(k);
    }
    for v in 0..n {
        out.add_arc(super_source, v, 0, supply[v], Some(ArcClass::Supply))
            .expect("valid arc");
        out.add_arc(v, super_sink, 0, demand[v], Some(ArcClass::Demand))
            .expect("valid arc");
    }
    AssociateGraph {
        network: out,
        arc_image,
        super_source,
        super_sink,
        required: net.lower_bound_total(),
    }
}

/// A flow satisfying all bounds and conserving at every node, or `None` when
/// none exists. `value` is the amount carried from source to sink (the flow on
/// any return arcs).
pub fn feasible_circulation(net: &BoundedFlowNetwork) -> Option<FlowAssignment> {
    let assoc = build_associate_graph(net);
    let solved = max_flow_dinic(&assoc.network, assoc.super_source, assoc.super_sink)
        .expect("associate graph has zero lower bounds and distinct super nodes");
    if solved.value != assoc.required {
        return None;
    }
    let flow: Vec<u64> = net
        .arcs
        .iter()
        .zip(&assoc.arc_image)
        .map(|(a, &k)| solved.flow[k] + a.lower)
        .collect();
    let value = net.forward_value(&flow);
    Some(FlowAssignment { flow, value })
}

/// Minimum-value feasible flow from `s` to `t`.
///
/// A return arc `(t, s)` of infinite capacity closes the network, a feasible
/// circulation is found, the return arc is dropped, and the residual network
/// (forward room `c - f`, backward room `f - l`) is maximally drained from `t`
/// to `s`.
pub fn min_flow_with_bounds(
    net: &BoundedFlowNetwork,
    s: usize,
    t: usize,
) -> Result<FlowAssignment, FlowError> {
    net.check_node(s)?;
    net.check_node(t)?;
    if s == t {
        return Err(FlowError::SameEndpoints(s));
    }
    let mut closed = net.clone();
    closed.source = s;
    closed.sink = t;
    let ret = closed.add_arc(t, s, 0, Capacity::Infinite, Some(ArcClass::Return))?;
    let circulation = feasible_circulation(&closed).ok_or(FlowError::NoFeasibleFlow)?;
    let start_value = circulation.flow[ret];

    let infinity = closed.infinity();
    let mut residual = Residual::with_capacity(net.node_count, net.arcs.len());
    for (a, &f) in net.arcs.iter().zip(&circulation.flow) {
        residual.add_arc(a.tail, a.head, a.cap.resolve(infinity) - f, f - a.lower);
    }
    let drained = residual.max_flow(t, s, start_value);
    let flow = net
        .arcs
        .iter()
        .zip(&circulation.flow)
        .enumerate()
        .map(|(k, (_, &f))| (f as i128 + residual.pushed(k)) as u64)
        .collect();
    Ok(FlowAssignment {
        flow,
        value: start_value - drained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(n: usize, s: usize, t: usize, arcs: &[(usize, usize, u64)]) -> BoundedFlowNetwork {
        let mut net = BoundedFlowNetwork::new(n, s, t).unwrap();
        for &(u, v, c) in arcs {
            net.add_arc(u, v, 0, c, None).unwrap();
        }
        net
    }

    #[test]
    fn single_arc() {
        let net = plain(2, 0, 1, &[(0, 1, 1)]);
        let f = max_flow_dinic(&net, 0, 1).unwrap();
        assert_eq!(f.value, 1);
        assert_eq!(f.flow, vec![1]);
        f.check(&net, 0, 1).unwrap();
    }

    #[test]
    fn diamond() {
        let net = plain(4, 0, 3, &[(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]);
        let f = max_flow_dinic(&net, 0, 3).unwrap();
        assert_eq!(f.value, 2);
        f.check(&net, 0, 3).unwrap();
    }

    #[test]
    fn parallel_arcs_and_infinite_capacity() {
        let mut net = plain(3, 0, 2, &[(0, 1, 2), (0, 1, 3)]);
        net.add_arc(1, 2, 0, Capacity::Infinite, None).unwrap();
        let f = max_flow_dinic(&net, 0, 2).unwrap();
        assert_eq!(f.value, 5);
        f.check(&net, 0, 2).unwrap();
    }

    #[test]
    fn max_flow_errors() {
        let net = plain(2, 0, 1, &[(0, 1, 1)]);
        assert_eq!(max_flow_dinic(&net, 0, 0), Err(FlowError::SameEndpoints(0)));
        assert!(matches!(
            max_flow_dinic(&net, 0, 5),
            Err(FlowError::NodeOutOfRange { node: 5, .. })
        ));
        let mut lb = net.clone();
        lb.add_arc(0, 1, 1, 1, None).unwrap();
        assert_eq!(max_flow_dinic(&lb, 0, 1), Err(FlowError::NonZeroLowerBound(1)));
    }

    #[test]
    fn add_arc_validates() {
        let mut net = BoundedFlowNetwork::new(2, 0, 1).unwrap();
        assert!(matches!(
            net.add_arc(0, 1, 2, 1, None),
            Err(FlowError::LowerExceedsCapacity { .. })
        ));
        assert!(net.add_arc(0, 1, 7, Capacity::Infinite, None).is_ok());
        assert!(net.add_arc(0, 2, 0, 1, None).is_err());
    }

    #[test]
    fn associate_graph_without_lower_bounds() {
        let net = plain(3, 0, 2, &[(0, 1, 4), (1, 2, 2)]);
        let assoc = build_associate_graph(&net);
        assert_eq!(assoc.required, 0);
        assert_eq!(assoc.network.node_count(), 5);
        let added: Vec<_> = assoc
            .network
            .arcs()
            .iter()
            .filter(|a| matches!(a.class, Some(ArcClass::Supply | ArcClass::Demand)))
            .collect();
        assert_eq!(added.len(), 6);
        assert!(added.iter().all(|a| a.cap == Capacity::Finite(0)));
    }

    #[test]
    fn associate_graph_single_bounded_arc() {
        // a = 0, b = 1
        let mut net = BoundedFlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        let assoc = build_associate_graph(&net);
        let arcs = assoc.network.arcs();
        assert_eq!(arcs[assoc.arc_image[0]].cap, Capacity::Finite(0));
        let cap_of = |tail, head| {
            arcs.iter()
                .find(|a| a.tail == tail && a.head == head)
                .map(|a| a.cap)
                .unwrap()
        };
        assert_eq!(cap_of(assoc.super_source, 1), Capacity::Finite(1));
        assert_eq!(cap_of(0, assoc.super_sink), Capacity::Finite(1));
        assert_eq!(cap_of(assoc.super_source, 0), Capacity::Finite(0));
        assert_eq!(cap_of(1, assoc.super_sink), Capacity::Finite(0));
    }

    #[test]
    fn zero_circulation_without_lower_bounds() {
        let net = plain(3, 0, 2, &[(0, 1, 4), (1, 2, 2)]);
        let c = feasible_circulation(&net).unwrap();
        assert_eq!(c.flow, vec![0, 0]);
        c.check_circulation(&net).unwrap();
    }

    #[test]
    fn two_node_cycle_circulation() {
        let mut net = BoundedFlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        net.add_arc(1, 0, 0, 1, None).unwrap();
        let c = feasible_circulation(&net).unwrap();
        assert_eq!(c.flow, vec![1, 1]);
        c.check_circulation(&net).unwrap();
    }

    #[test]
    fn infeasible_circulation() {
        let mut net = BoundedFlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        assert_eq!(feasible_circulation(&net), None);
    }

    #[test]
    fn min_flow_without_lower_bounds_is_zero() {
        let net = plain(3, 0, 2, &[(0, 1, 4), (1, 2, 2)]);
        let f = min_flow_with_bounds(&net, 0, 2).unwrap();
        assert_eq!(f.value, 0);
        f.check(&net, 0, 2).unwrap();
    }

    #[test]
    fn min_flow_forced_by_lower_bounds() {
        let mut net = BoundedFlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        net.add_arc(1, 2, 1, 1, None).unwrap();
        let f = min_flow_with_bounds(&net, 0, 2).unwrap();
        assert_eq!(f.value, 1);
        f.check(&net, 0, 2).unwrap();
    }

    #[test]
    fn min_flow_cancels_redundant_units() {
        // two parallel routes, only one forced
        let mut net = BoundedFlowNetwork::new(4, 0, 3).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        net.add_arc(1, 3, 0, 1, None).unwrap();
        net.add_arc(0, 2, 0, 1, None).unwrap();
        net.add_arc(2, 3, 0, 1, None).unwrap();
        net.add_arc(0, 3, 0, Capacity::Infinite, None).unwrap();
        let f = min_flow_with_bounds(&net, 0, 3).unwrap();
        assert_eq!(f.value, 1);
        f.check(&net, 0, 3).unwrap();
    }

    #[test]
    fn min_flow_infeasible() {
        // lower bound on an arc that cannot reach the sink
        let mut net = BoundedFlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 1, 1, None).unwrap();
        assert_eq!(min_flow_with_bounds(&net, 0, 2), Err(FlowError::NoFeasibleFlow));
    }
}
