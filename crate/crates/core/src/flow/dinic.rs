use std::collections::VecDeque;

const UNREACHED: u32 = u32::MAX;

/// Residual network with paired forward/backward half-arcs: half-arc `2k` is
/// arc `k`, `2k + 1` its reverse. Adjacency lists keep insertion order, so
/// every search breaks ties by ascending arc index.
#[derive(Debug, Clone)]
pub struct Residual {
    head: Vec<usize>,
    residual: Vec<u64>,
    initial: Vec<u64>,
    adj: Vec<Vec<usize>>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl Residual {
    pub fn new(node_count: usize) -> Self {
        Self {
            head: Vec::new(),
            residual: Vec::new(),
            initial: Vec::new(),
            adj: vec![Vec::new(); node_count],
            level: vec![UNREACHED; node_count],
            cursor: vec![0; node_count],
        }
    }

    pub fn with_capacity(node_count: usize, arcs: usize) -> Self {
        let mut r = Self::new(node_count);
        r.head.reserve(2 * arcs);
        r.residual.reserve(2 * arcs);
        r.initial.reserve(arcs);
        r
    }

    /// Adds an arc with `forward` residual capacity and `backward` residual
    /// capacity on its reverse; returns the arc index.
    pub fn add_arc(&mut self, tail: usize, head: usize, forward: u64, backward: u64) -> usize {
        let k = self.initial.len();
        self.head.push(head);
        self.residual.push(forward);
        self.head.push(tail);
        self.residual.push(backward);
        self.initial.push(forward);
        self.adj[tail].push(2 * k);
        self.adj[head].push(2 * k + 1);
        k
    }

    pub fn arc_count(&self) -> usize {
        self.initial.len()
    }

    /// Net amount pushed along arc `k` since construction (negative when flow
    /// was cancelled through the reverse half-arc).
    pub fn pushed(&self, k: usize) -> i128 {
        self.initial[k] as i128 - self.residual[2 * k] as i128
    }

    fn tail_of(&self, half: usize) -> usize {
        self.head[half ^ 1]
    }

    fn build_levels(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(UNREACHED);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if self.residual[e] > 0 && self.level[w] == UNREACHED {
                    self.level[w] = self.level[v] + 1;
                    if w == t {
                        return true;
                    }
                    queue.push_back(w);
                }
            }
        }
        self.level[t] != UNREACHED
    }

    /// Blocking flow on the current level graph, iterative so path length is
    /// not bounded by the call stack.
    fn blocking_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        self.cursor.fill(0);
        let mut total = 0u64;
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        while total < limit {
            if v == t {
                let bottleneck = path
                    .iter()
                    .map(|&e| self.residual[e])
                    .min()
                    .unwrap_or(0)
                    .min(limit - total);
                for &e in &path {
                    self.residual[e] -= bottleneck;
                    self.residual[e ^ 1] += bottleneck;
                }
                total += bottleneck;
                let first_saturated = path
                    .iter()
                    .position(|&e| self.residual[e] == 0)
                    .unwrap_or(path.len());
                path.truncate(first_saturated);
                v = path.last().map_or(s, |&e| self.head[e]);
                continue;
            }
            let mut advanced = false;
            while self.cursor[v] < self.adj[v].len() {
                let e = self.adj[v][self.cursor[v]];
                let w = self.head[e];
                if self.residual[e] > 0 && self.level[w] == self.level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                self.cursor[v] += 1;
            }
            if !advanced {
                if v == s {
                    break;
                }
                // dead end: drop v from the level graph and retreat
                self.level[v] = UNREACHED;
                let e = path.pop().expect("non-source node is reached by a path arc");
                v = self.tail_of(e);
                self.cursor[v] += 1;
            }
        }
        total
    }

    /// Dinic's algorithm from `s` to `t`, stopping once `limit` units are
    /// routed. Returns the amount pushed by this call.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        let mut total = 0u64;
        while total < limit && self.build_levels(s, t) {
            let pushed = self.blocking_flow(s, t, limit - total);
            if pushed == 0 {
                break;
            }
            total += pushed;
        }
        total
    }
}
