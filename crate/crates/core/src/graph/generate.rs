use std::collections::HashSet;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{DiGraph, GraphError};

/// Directed edge count for `n` nodes at mean total (in + out) degree `mu`.
fn target_edge_count(n: usize, mu: f64) -> Result<usize, GraphError> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(GraphError::Precondition(format!(
            "mean degree must be finite and >= 0, got {mu}"
        )));
    }
    Ok((n as f64 * mu / 2.0).round() as usize)
}

/// Erdős–Rényi G(n, L): `round(n·mu/2)` distinct ordered pairs drawn uniformly
/// without replacement, no self-loops.
pub fn generate_er(n: usize, mu: f64, seed: u64) -> Result<DiGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Precondition("n must be >= 1".into()));
    }
    let wanted = target_edge_count(n, mu)?;
    let pairs = n * (n - 1);
    if wanted > pairs {
        return Err(GraphError::Precondition(format!(
            "{wanted} edges requested but only {pairs} ordered pairs exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = rand::seq::index::sample(&mut rng, pairs, wanted)
        .into_iter()
        .map(|k| {
            // k enumerates (tail, head) pairs with the diagonal removed
            let tail = k / (n - 1);
            let r = k % (n - 1);
            let head = if r < tail { r } else { r + 1 };
            (tail, head)
        })
        .collect();
    edges.sort_unstable();
    DiGraph::new(n, edges)
}

/// Static scale-free model: node `i` carries weight `(i+1)^(-1/(gamma-1))`;
/// tails and heads are drawn independently by weight, self-loops and
/// duplicates rejected, until `round(n·mu/2)` edges exist.
pub fn generate_sf(n: usize, mu: f64, gamma: f64, seed: u64) -> Result<DiGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::Precondition("n must be >= 2".into()));
    }
    if !(gamma.is_finite() && gamma > 2.0) {
        return Err(GraphError::Precondition(format!(
            "gamma must be > 2, got {gamma}"
        )));
    }
    let wanted = target_edge_count(n, mu)?;
    if wanted > n * (n - 1) {
        return Err(GraphError::Precondition(format!(
            "{wanted} edges requested but only {} ordered pairs exist",
            n * (n - 1)
        )));
    }
    let alpha = 1.0 / (gamma - 1.0);
    let weights: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-alpha)).collect();
    let dist = WeightedIndex::new(&weights).expect("weights are positive and finite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let budget = 100 * wanted;
    let mut seen = HashSet::with_capacity(wanted);
    let mut edges = Vec::with_capacity(wanted);
    let mut attempts = 0;
    while edges.len() < wanted {
        if attempts >= budget {
            return Err(GraphError::GenerationFailed {
                attempts,
                placed: edges.len(),
                wanted,
            });
        }
        attempts += 1;
        let tail = dist.sample(&mut rng);
        let head = dist.sample(&mut rng);
        if tail != head && seen.insert((tail, head)) {
            edges.push((tail, head));
        }
    }
    edges.sort_unstable();
    DiGraph::new(n, edges)
}
