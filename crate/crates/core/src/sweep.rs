//! Target-fraction sweeps: driver count for random target sets of growing
//! size, normalized by the whole-network driver count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DiGraph, TargetSet};
use crate::matching::driver_count_mm;
use crate::mftp::{self, SolveError};

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("fraction {0} is outside (0, 1]")]
    Fraction(f64),
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("target driver count {target} exceeds whole-network count {whole}")]
    RatioAboveOne { target: usize, whole: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub fraction: f64,
    pub trials: usize,
    /// Mean target driver count n_D over trials.
    pub mean_drivers: f64,
    /// `mean_drivers / N_D`.
    pub ratio: f64,
    /// Sample standard deviation of the per-trial ratio (0 for one trial).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Whole-network driver count N_D.
    pub network_drivers: usize,
    pub rows: Vec<SweepRow>,
}

/// Target-set size for fraction `f` of `n` nodes: `round(f·n)`, at least 1.
pub fn target_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// Random target set for one `(fraction index, trial)` cell. Each cell has
/// its own ChaCha stream, so results do not depend on evaluation order.
pub fn sample_targets(n: usize, size: usize, seed: u64, cell: (usize, usize)) -> TargetSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell.0 as u64) << 32) | cell.1 as u64);
    let picked = rand::seq::index::sample(&mut rng, n, size);
    TargetSet::new(n, picked).expect("sampled indices are in range and non-empty")
}

pub fn run_sweep(
    g: &DiGraph,
    fractions: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepResult, SweepError> {
    let n = g.node_count();
    if n == 0 {
        return Err(SweepError::EmptyGraph);
    }
    if trials == 0 {
        return Err(SweepError::NoTrials);
    }
    if let Some(&f) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(SweepError::Fraction(f));
    }
    let whole = driver_count_mm(g);
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| fractions[a].total_cmp(&fractions[b]));

    let mut rows = Vec::with_capacity(fractions.len());
    for fi in order {
        let fraction = fractions[fi];
        let size = target_size(n, fraction);
        let mut counts = Vec::with_capacity(trials);
        for trial in 0..trials {
            let target = sample_targets(n, size, seed, (fi, trial));
            let drivers = mftp::solve(g, &target)?.min_drivers;
            if drivers > whole {
                return Err(SweepError::RatioAboveOne {
                    target: drivers,
                    whole,
                });
            }
            counts.push(drivers as f64);
        }
        let mean_drivers = counts.iter().sum::<f64>() / trials as f64;
        let ratios: Vec<f64> = counts.iter().map(|c| c / whole as f64).collect();
        let mean_ratio = ratios.iter().sum::<f64>() / trials as f64;
        let std = if trials > 1 {
            (ratios.iter().map(|r| (r - mean_ratio).powi(2)).sum::<f64>() / (trials - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            fraction,
            trials,
            mean_drivers,
            ratio: mean_drivers / whole as f64,
            std,
        });
    }
    Ok(SweepResult {
        network_drivers: whole,
        rows,
    })
}
