//! Maximum matching on the bipartite double cover of a digraph: each node has
//! an out-copy on the left and an in-copy on the right, and each edge (i, j)
//! joins left i to right j. Unmatched in-copies are the driver nodes of the
//! whole network.

use std::collections::VecDeque;

use crate::graph::{DiGraph, NodeId};

const NIL: usize = usize::MAX;
const INF: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Matched edges as (tail, head), ordered by tail.
    pub pairs: Vec<(NodeId, NodeId)>,
    pub size: usize,
}

struct HopcroftKarp<'g> {
    g: &'g DiGraph,
    match_left: Vec<usize>,
    match_right: Vec<usize>,
    dist: Vec<u32>,
    cursor: Vec<usize>,
}

impl<'g> HopcroftKarp<'g> {
    fn new(g: &'g DiGraph) -> Self {
        let n = g.node_count();
        Self {
            g,
            match_left: vec![NIL; n],
            match_right: vec![NIL; n],
            dist: vec![INF; n],
            cursor: vec![0; n],
        }
    }

    /// Layers free left vertices at 0; true if some free right vertex is
    /// reachable by an alternating path.
    fn bfs(&mut self) -> bool {
        let mut queue = VecDeque::new();
        for u in 0..self.g.node_count() {
            if self.match_left[u] == NIL {
                self.dist[u] = 0;
                queue.push_back(u);
            } else {
                self.dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in self.g.out_neighbors(u) {
                let w = self.match_right[v];
                if w == NIL {
                    found = true;
                } else if self.dist[w] == INF {
                    self.dist[w] = self.dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    }

    /// Iterative layered DFS from free left vertex `root`.
    fn augment_from(&mut self, root: usize) -> bool {
        // stack of left vertices; the right vertex used to reach stack[k+1]
        // is out_neighbors(stack[k])[cursor[stack[k]]]
        let mut stack = vec![root];
        while let Some(&u) = stack.last() {
            let neighbors = self.g.out_neighbors(u);
            if self.cursor[u] >= neighbors.len() {
                self.dist[u] = INF;
                stack.pop();
                if let Some(&parent) = stack.last() {
                    self.cursor[parent] += 1;
                }
                continue;
            }
            let v = neighbors[self.cursor[u]];
            let w = self.match_right[v];
            if w == NIL {
                // flip the alternating path
                for &x in stack.iter().rev() {
                    let y = self.g.out_neighbors(x)[self.cursor[x]];
                    self.match_left[x] = y;
                    self.match_right[y] = x;
                }
                return true;
            }
            if self.dist[w] != INF && self.dist[w] == self.dist[u] + 1 {
                stack.push(w);
            } else {
                self.cursor[u] += 1;
            }
        }
        false
    }

    fn run(mut self) -> Matching {
        while self.bfs() {
            self.cursor.fill(0);
            for u in 0..self.g.node_count() {
                if self.match_left[u] == NIL {
                    self.augment_from(u);
                }
            }
        }
        let pairs: Vec<_> = self
            .match_left
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != NIL)
            .map(|(u, &v)| (u, v))
            .collect();
        Matching {
            size: pairs.len(),
            pairs,
        }
    }
}

pub fn max_bipartite_matching(g: &DiGraph) -> Matching {
    HopcroftKarp::new(g).run()
}

/// Minimum driver count of the whole network, `max(n - |matching|, 1)`.
pub fn driver_count_mm(g: &DiGraph) -> usize {
    (g.node_count() - max_bipartite_matching(g).size).max(1)
}
