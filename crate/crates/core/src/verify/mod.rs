//! Numeric certification of a driver allocation on a weighted realization
//! `ẋ = Ax + Bu, y = Cx` of the network.

mod matrix;

pub use matrix::DenseMatrix;

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DiGraph, TargetSet};
use crate::mftp::DriverAllocation;

/// Relative pivot threshold for the target-rank test.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Largest acceptable pivot ratio of `C W_B Cᵀ`.
pub const CONDITION_LIMIT: f64 = 1e12;
pub const DEFAULT_GRAMIAN_STEPS: usize = 2000;
pub const DEFAULT_SIMULATION_STEPS: usize = 4000;
/// Acceptable `‖y(t_f)‖₂` after steering a unit-norm initial state.
pub const OUTPUT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("attachment ({driver}, {node}) is outside {drivers} drivers x {nodes} nodes")]
    AttachmentOutOfRange {
        driver: usize,
        node: usize,
        drivers: usize,
        nodes: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("not numerically target controllable (C W Cᵀ condition estimate {condition:e})")]
    NotTargetControllable { condition: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
    pub target: TargetSet,
}

impl LtiSystem {
    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }
}

/// Draws `A[i][j]` uniformly from [0.5, 1.5] for every edge `j → i`, sets the
/// attached entries of `B` to 1, and selects target rows with `C`.
pub fn realize_system(
    g: &DiGraph,
    target: &TargetSet,
    alloc: &DriverAllocation,
    seed: u64,
) -> Result<LtiSystem, VerifyError> {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(n, n);
    for &(tail, head) in g.edges() {
        a[(head, tail)] = rng.gen_range(0.5..=1.5);
    }
    let mut b = DenseMatrix::zeros(n, alloc.driver_count);
    for &(driver, node) in &alloc.attachments {
        if driver >= alloc.driver_count || node >= n {
            return Err(VerifyError::AttachmentOutOfRange {
                driver,
                node,
                drivers: alloc.driver_count,
                nodes: n,
            });
        }
        b[(node, driver)] = 1.0;
    }
    let mut c = DenseMatrix::zeros(target.len(), n);
    for (row, &v) in target.members().iter().enumerate() {
        if v >= n {
            return Err(VerifyError::Dimension(format!(
                "target node {v} outside {n} nodes"
            )));
        }
        c[(row, v)] = 1.0;
    }
    Ok(LtiSystem {
        a,
        b,
        c,
        target: target.clone(),
    })
}

/// Numeric rank of `[CB, CAB, …, CA^{n-1}B]`.
pub fn kalman_target_rank(sys: &LtiSystem) -> usize {
    let n = sys.state_dim();
    let m = sys.input_dim();
    let rows = sys.c.rows();
    let mut krylov = DenseMatrix::zeros(rows, n * m);
    let mut power_b = sys.b.clone();
    for k in 0..n {
        let block = sys.c.matmul(&power_b);
        for i in 0..rows {
            for j in 0..m {
                krylov[(i, k * m + j)] = block[(i, j)];
            }
        }
        if k + 1 < n {
            power_b = sys.a.matmul(&power_b);
        }
    }
    krylov.rank(RANK_TOLERANCE)
}

pub fn is_target_controllable(sys: &LtiSystem) -> bool {
    kalman_target_rank(sys) == sys.target.len()
}

fn check_horizon(t_f: f64, steps: usize) -> Result<(), VerifyError> {
    if !(t_f.is_finite() && t_f > 0.0) {
        return Err(VerifyError::InvalidHorizon(format!("t_f = {t_f}")));
    }
    if steps < 2 || steps % 2 != 0 {
        return Err(VerifyError::InvalidHorizon(format!(
            "steps = {steps}, need an even count >= 2"
        )));
    }
    Ok(())
}

/// `W_B = ∫₀^{t_f} e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` by composite Simpson quadrature.
pub fn controllability_gramian(
    sys: &LtiSystem,
    t_f: f64,
    steps: usize,
) -> Result<DenseMatrix, VerifyError> {
    check_horizon(t_f, steps)?;
    let n = sys.state_dim();
    let h = t_f / steps as f64;
    let step = sys.a.scaled(h).expm();
    let mut propagated = sys.b.clone(); // e^{A k h} B
    let mut w = DenseMatrix::zeros(n, n);
    for k in 0..=steps {
        let weight = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let outer = propagated.matmul(&propagated.transpose());
        w.add_scaled(&outer, weight * h / 3.0);
        if k < steps {
            propagated = step.matmul(&propagated);
        }
    }
    if !w.is_finite() {
        return Err(VerifyError::NonFinite("controllability Gramian"));
    }
    Ok(w)
}

/// Input samples on a uniform grid over `[0, t_f]`, one vector per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    pub t_f: f64,
    pub samples: Vec<Vec<f64>>,
}

impl InputSignal {
    pub fn zeros(t_f: f64, steps: usize, inputs: usize) -> Self {
        Self {
            t_f,
            samples: vec![vec![0.0; inputs]; steps + 1],
        }
    }

    /// Linear interpolation between samples, clamped to the horizon.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let intervals = self.samples.len() - 1;
        let pos = (t / self.t_f * intervals as f64).clamp(0.0, intervals as f64);
        let k = (pos.floor() as usize).min(intervals.saturating_sub(1));
        let frac = pos - k as f64;
        if intervals == 0 {
            return self.samples[0].clone();
        }
        self.samples[k]
            .iter()
            .zip(&self.samples[k + 1])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }
}

/// Minimum-energy input steering `y(t_f)` to the origin:
/// `u(t) = -Bᵀ e^{Aᵀ(t_f - t)} Cᵀ (C W_B Cᵀ)⁻¹ C e^{A t_f} x₀`.
pub fn design_input(
    sys: &LtiSystem,
    x0: &[f64],
    t_f: f64,
    steps: usize,
) -> Result<InputSignal, VerifyError> {
    let n = sys.state_dim();
    if x0.len() != n {
        return Err(VerifyError::Dimension(format!(
            "x0 has {} entries for {n} states",
            x0.len()
        )));
    }
    let w = controllability_gramian(sys, t_f, steps)?;
    let reduced = sys.c.matmul(&w).matmul(&sys.c.transpose());
    let free_response = sys.a.scaled(t_f).expm().matvec(x0);
    let rhs = sys.c.matvec(&free_response);
    let (z, condition) = reduced.solve(&rhs);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(VerifyError::NotTargetControllable { condition });
    }
    let costate = sys.c.transpose().matvec(&z);

    let h = t_f / steps as f64;
    let step_t = sys.a.scaled(h).expm().transpose();
    let bt = sys.b.transpose();
    // back[j] = (e^{Aᵀh})^j · costate, so sample k uses back[steps - k]
    let mut back = Vec::with_capacity(steps + 1);
    let mut v = costate;
    for j in 0..=steps {
        back.push(bt.matvec(&v).into_iter().map(|x| -x).collect::<Vec<f64>>());
        if j < steps {
            v = step_t.matvec(&v);
        }
    }
    back.reverse();
    if back.iter().flatten().any(|x| !x.is_finite()) {
        return Err(VerifyError::NonFinite("designed input"));
    }
    Ok(InputSignal {
        t_f,
        samples: back,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `C x(t_f)`.
    pub final_output: Vec<f64>,
}

impl Simulation {
    pub fn final_output_norm(&self) -> f64 {
        self.final_output.iter().map(|y| y * y).sum::<f64>().sqrt()
    }

    /// CSV with columns `t, y_1, …, y_|S|`.
    pub fn output_csv(&self, sys: &LtiSystem) -> String {
        let mut out = String::from("t");
        for k in 1..=sys.c.rows() {
            let _ = write!(out, ",y_{k}");
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for y in sys.c.matvec(x) {
                let _ = write!(out, ",{y}");
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-step classical Runge–Kutta integration of `ẋ = Ax + Bu(t)`.
pub fn simulate(
    sys: &LtiSystem,
    input: &InputSignal,
    x0: &[f64],
    t_f: f64,
    steps: usize,
) -> Result<Simulation, VerifyError> {
    let n = sys.state_dim();
    if x0.len() != n {
        return Err(VerifyError::Dimension(format!(
            "x0 has {} entries for {n} states",
            x0.len()
        )));
    }
    if !(t_f.is_finite() && t_f > 0.0) || steps == 0 {
        return Err(VerifyError::InvalidHorizon(format!(
            "t_f = {t_f}, steps = {steps}"
        )));
    }
    if input.samples.len() < 2 || (input.t_f - t_f).abs() > 1e-12 * t_f {
        return Err(VerifyError::Dimension(
            "input signal must span [0, t_f] with at least two samples".into(),
        ));
    }
    if input.samples.iter().any(|s| s.len() != sys.input_dim()) {
        return Err(VerifyError::Dimension(format!(
            "input samples must have {} entries",
            sys.input_dim()
        )));
    }

    let rhs = |t: f64, x: &[f64]| -> Vec<f64> {
        let mut dx = sys.a.matvec(x);
        let bu = sys.b.matvec(&input.at(t));
        for (d, b) in dx.iter_mut().zip(bu) {
            *d += b;
        }
        dx
    };
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };

    let h = t_f / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + h / 2.0, &axpy(&x, &k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, &axpy(&x, &k2, h / 2.0));
        let k4 = rhs(t + h, &axpy(&x, &k3, h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(VerifyError::NonFinite("state trajectory"));
        }
        times.push((k + 1) as f64 * h);
        states.push(x.clone());
    }
    let final_output = sys.c.matvec(&x);
    Ok(Simulation {
        times,
        states,
        final_output,
    })
}

/// Designs the steering input on a grid twice as fine as the integrator, so
/// every Runge–Kutta stage lands on a sample, then simulates `steps` steps.
pub fn steer(
    sys: &LtiSystem,
    x0: &[f64],
    t_f: f64,
    steps: usize,
) -> Result<(InputSignal, Simulation), VerifyError> {
    let input = design_input(sys, x0, t_f, 2 * steps)?;
    let sim = simulate(sys, &input, x0, t_f, steps)?;
    Ok((input, sim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mftp::{allocate_drivers, solve};
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};

    fn scalar_system(a: f64) -> LtiSystem {
        LtiSystem {
            a: DenseMatrix::from_rows(&[vec![a]]),
            b: DenseMatrix::from_rows(&[vec![1.0]]),
            c: DenseMatrix::from_rows(&[vec![1.0]]),
            target: TargetSet::new(1, [0]).unwrap(),
        }
    }

    fn canonical() -> (DiGraph, TargetSet) {
        let edges = [
            (1, 2),
            (6, 2),
            (2, 3),
            (6, 3),
            (3, 6),
            (3, 4),
            (7, 4),
            (5, 6),
            (9, 6),
            (6, 7),
            (9, 7),
            (6, 9),
            (8, 9),
        ];
        let g = DiGraph::new(9, edges.iter().map(|&(a, b)| (a - 1, b - 1))).unwrap();
        (g, TargetSet::new(9, [1, 2, 6, 8]).unwrap())
    }

    fn canonical_system(seed: u64) -> LtiSystem {
        let (g, s) = canonical();
        let alloc = allocate_drivers(&solve(&g, &s).unwrap().cover);
        realize_system(&g, &s, &alloc, seed).unwrap()
    }

    #[test]
    fn self_loop_realization() {
        let g = DiGraph::new(1, [(0, 0)]).unwrap();
        let s = TargetSet::new(1, [0]).unwrap();
        let alloc = DriverAllocation {
            driver_count: 1,
            attachments: vec![(0, 0)],
        };
        let sys = realize_system(&g, &s, &alloc, 3).unwrap();
        let w = sys.a[(0, 0)];
        assert!((0.5..=1.5).contains(&w));
        assert_eq!(sys.b.as_slice(), &[1.0]);
        assert_eq!(sys.c.as_slice(), &[1.0]);
        assert_eq!(sys, realize_system(&g, &s, &alloc, 3).unwrap());
    }

    #[test]
    fn canonical_input_matrix_pattern() {
        let sys = canonical_system(0);
        let column: Vec<f64> = (0..9).map(|i| sys.b[(i, 0)]).collect();
        assert_eq!(column, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range_attachment() {
        let (g, s) = canonical();
        let alloc = DriverAllocation {
            driver_count: 1,
            attachments: vec![(0, 9)],
        };
        assert!(matches!(
            realize_system(&g, &s, &alloc, 0),
            Err(VerifyError::AttachmentOutOfRange { node: 9, .. })
        ));
    }

    #[test]
    fn scalar_rank() {
        assert_eq!(kalman_target_rank(&scalar_system(0.0)), 1);
    }

    #[test]
    fn unreachable_driver_loses_rank() {
        // driver on node 7 (label) reaches only node 4
        let (g, s) = canonical();
        let alloc = DriverAllocation {
            driver_count: 1,
            attachments: vec![(0, 6)],
        };
        let sys = realize_system(&g, &s, &alloc, 1).unwrap();
        assert_eq!(kalman_target_rank(&sys), 1);
    }

    #[test]
    fn gramian_constant_integrands() {
        let w = controllability_gramian(&scalar_system(0.0), 1.0, 2).unwrap();
        assert!((w[(0, 0)] - 1.0).abs() < 1e-15);
        let sys = LtiSystem {
            a: DenseMatrix::zeros(2, 2),
            b: DenseMatrix::from_column(&[1.0, 0.0]),
            c: DenseMatrix::identity(2),
            target: TargetSet::all(2).unwrap(),
        };
        let w = controllability_gramian(&sys, 2.0, 4).unwrap();
        assert!((w[(0, 0)] - 2.0).abs() < 1e-14);
        assert_eq!((w[(0, 1)], w[(1, 0)], w[(1, 1)]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gramian_scalar_closed_form() {
        // ∫₀¹ e^{2aτ} dτ = (e^{2a} - 1) / 2a
        let a = -0.7;
        let w = controllability_gramian(&scalar_system(a), 1.0, 200).unwrap();
        let exact = ((2.0 * a).exp() - 1.0) / (2.0 * a);
        assert!((w[(0, 0)] - exact).abs() < 1e-10);
    }

    #[test]
    fn gramian_horizon_checks() {
        let sys = scalar_system(0.0);
        assert!(controllability_gramian(&sys, 0.0, 2).is_err());
        assert!(controllability_gramian(&sys, 1.0, 3).is_err());
        assert!(controllability_gramian(&sys, 1.0, 0).is_err());
    }

    #[test]
    fn gramian_quadrature_self_convergence() {
        let sys = canonical_system(5);
        let coarse = controllability_gramian(&sys, 3.0, 2000).unwrap();
        let fine = controllability_gramian(&sys, 3.0, 4000).unwrap();
        for (a, b) in coarse.as_slice().iter().zip(fine.as_slice()) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn gramian_is_symmetric_psd() {
        let w = controllability_gramian(&canonical_system(2), 3.0, 2000).unwrap();
        let scale = w.max_abs();
        for i in 0..9 {
            for j in 0..9 {
                assert!((w[(i, j)] - w[(j, i)]).abs() <= 1e-10 * scale);
            }
        }
        // diagonal of a PSD matrix is non-negative, and x'Wx >= 0 on probes
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q: f64 = x.iter().zip(w.matvec(&x)).map(|(a, b)| a * b).sum();
            assert!(q >= -1e-10 * w.trace());
        }
    }

    #[test]
    fn zero_initial_state_needs_no_input() {
        let sys = canonical_system(0);
        let u = design_input(&sys, &[0.0; 9], 3.0, 200).unwrap();
        assert!(u.samples.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn input_is_linear_in_initial_state() {
        let sys = canonical_system(4);
        let x0: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let x2: Vec<f64> = x0.iter().map(|x| 2.0 * x).collect();
        let u1 = design_input(&sys, &x0, 3.0, 200).unwrap();
        let u2 = design_input(&sys, &x2, 3.0, 200).unwrap();
        for (a, b) in u1.samples.iter().flatten().zip(u2.samples.iter().flatten()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let (g, s) = canonical();
        let alloc = DriverAllocation {
            driver_count: 1,
            attachments: vec![(0, 6)],
        };
        let sys = realize_system(&g, &s, &alloc, 1).unwrap();
        assert!(matches!(
            design_input(&sys, &[1.0; 9], 3.0, 200),
            Err(VerifyError::NotTargetControllable { .. })
        ));
    }

    #[test]
    fn free_system_stays_put() {
        let sys = LtiSystem {
            a: DenseMatrix::zeros(2, 2),
            b: DenseMatrix::from_column(&[1.0, 0.0]),
            c: DenseMatrix::identity(2),
            target: TargetSet::all(2).unwrap(),
        };
        let u = InputSignal::zeros(1.0, 10, 1);
        let sim = simulate(&sys, &u, &[0.3, -0.4], 1.0, 50).unwrap();
        assert_eq!(sim.final_output, vec![0.3, -0.4]);
    }

    #[test]
    fn scalar_decay_matches_exponential() {
        let sys = scalar_system(-1.0);
        let u = InputSignal::zeros(2.0, 2, 1);
        let sim = simulate(&sys, &u, &[1.0], 2.0, 400).unwrap();
        assert!((sim.final_output[0] - (-2f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn canonical_steering_reaches_origin() {
        let sys = canonical_system(11);
        let x0 = [1.0 / 3.0; 9];
        let u = design_input(&sys, &x0, 3.0, DEFAULT_SIMULATION_STEPS).unwrap();
        let sim = simulate(&sys, &u, &x0, 3.0, DEFAULT_SIMULATION_STEPS).unwrap();
        assert!(sim.final_output_norm() <= OUTPUT_TOLERANCE);
        let finer = simulate(&sys, &u, &x0, 3.0, 2 * DEFAULT_SIMULATION_STEPS).unwrap();
        let diff: f64 = sim
            .final_output
            .iter()
            .zip(&finer.final_output)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-6, "step halving moved y(t_f) by {diff}");
    }

    #[test]
    fn output_csv_shape() {
        let sys = scalar_system(0.0);
        let sim = simulate(&sys, &InputSignal::zeros(1.0, 2, 1), &[2.0], 1.0, 4).unwrap();
        let csv = sim.output_csv(&sys);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,y_1");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[5], "1,2");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rank_invariant_under_input_scaling(seed in 0u64..1000, scale in 0.1f64..10.0) {
            let sys = canonical_system(seed);
            let mut scaled = sys.clone();
            scaled.b = sys.b.scaled(scale);
            prop_assert_eq!(kalman_target_rank(&sys), kalman_target_rank(&scaled));
        }
    }
}
