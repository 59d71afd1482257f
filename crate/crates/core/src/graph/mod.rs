//! Directed network topology: construction, adjacency-matrix conversion,
//! edge-list ingestion and random generators.

mod generate;
mod io;

pub use generate::{generate_er, generate_sf};
pub use io::{parse_edge_list, parse_target_set, write_edge_list, LabelMap};

use std::collections::HashSet;

use thiserror::Error;

/// Dense 0-based node index into a [`DiGraph`].
pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge ({tail}, {head}) references a node outside 0..{n}")]
    NodeOutOfRange { tail: NodeId, head: NodeId, n: usize },
    #[error("adjacency matrix is not square (row {row} has {len} entries, expected {n})")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("target set is empty")]
    EmptyTargetSet,
    #[error("target node {node} is outside 0..{n}")]
    TargetOutOfRange { node: NodeId, n: usize },
    #[error("unknown target label {label} on line {line}")]
    UnknownLabel { label: u64, line: usize },
    #[error("generator precondition violated: {0}")]
    Precondition(String),
    #[error("generator gave up after {attempts} attempts with {placed} of {wanted} edges placed")]
    GenerationFailed {
        attempts: usize,
        placed: usize,
        wanted: usize,
    },
}

/// Unweighted directed graph. Duplicate edges are collapsed on construction;
/// self-loops are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
}

impl DiGraph {
    /// Builds a graph on `n` nodes. Edge order is preserved (first occurrence
    /// wins when an edge is repeated).
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (tail, head) in edges {
            if tail >= n || head >= n {
                return Err(GraphError::NodeOutOfRange { tail, head, n });
            }
            if seen.insert((tail, head)) {
                kept.push((tail, head));
                out_adj[tail].push(head);
                in_adj[head].push(tail);
            }
        }
        Ok(Self {
            n,
            edges: kept,
            out_adj,
            in_adj,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
        }
    }

    /// Edge (j → i) exists iff `matrix[i][j] != 0`: row i of `ẋ = Ax` is fed
    /// by column j.
    pub fn from_adjacency<T>(matrix: &[Vec<T>]) -> Result<Self, GraphError>
    where
        T: Copy + Default + PartialEq,
    {
        let n = matrix.len();
        let zero = T::default();
        let mut edges = Vec::new();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::NonSquare {
                    row: i,
                    len: row.len(),
                    n,
                });
            }
            for (j, &entry) in row.iter().enumerate() {
                if entry != zero {
                    edges.push((j, i));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Inverse of [`DiGraph::from_adjacency`].
    pub fn to_adjacency(&self) -> Vec<Vec<u8>> {
        let mut matrix = vec![vec![0u8; self.n]; self.n];
        for &(tail, head) in &self.edges {
            matrix[head][tail] = 1;
        }
        matrix
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, tail: NodeId, head: NodeId) -> bool {
        tail < self.n && self.out_adj[tail].contains(&head)
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v].len()
    }
}

/// Non-empty, strictly increasing set of target nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetSet {
    members: Vec<NodeId>,
}

impl TargetSet {
    /// Sorts and deduplicates `members`, then checks them against a graph of
    /// `n` nodes.
    pub fn new(n: usize, members: impl IntoIterator<Item = NodeId>) -> Result<Self, GraphError> {
        let mut members: Vec<NodeId> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(GraphError::EmptyTargetSet);
        }
        if let Some(&node) = members.iter().find(|&&v| v >= n) {
            return Err(GraphError::TargetOutOfRange { node, n });
        }
        Ok(Self { members })
    }

    /// Every node of the graph.
    pub fn all(n: usize) -> Result<Self, GraphError> {
        Self::new(n, 0..n)
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Membership bitmap over `0..n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.members {
            mask[v] = true;
        }
        mask
    }
}
