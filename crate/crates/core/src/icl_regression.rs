//! Exact continual learner for linear regression.
//!
//! After `t` tasks the set of common minimizers is the affine set
//! `w_hat + span(K)`, where `K` is an orthonormal basis of the intersection of
//! the null spaces of `X_1, ..., X_t`. Each update restricts task `t`'s least
//! squares to that set (`w = w_hat + K a`), so previous tasks are untouched.
//!
//! The module also carries the verification surface around the learner:
//! violation detection for incompatible tasks, the weighted multitask oracle,
//! the gradient-equation residual and the relaxed, inequality-constrained
//! learner.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Error, Result};
use crate::numerics::{
    ensure_finite_vec, nullspace_basis, nullspace_basis_scaled, pinv_solve_scaled, pinv_solve_tol,
    vconcat, vstack, Matrix, MatrixRecord, OrthonormalBasis, Vector,
};
use crate::tasks::RegressionTask;

/// `(w_hat, K)` plus the minimum loss recorded for every processed task.
#[derive(Clone, Debug, PartialEq)]
pub struct IclState {
    w_hat: Vector,
    k_basis: OrthonormalBasis,
    minima: Vec<f64>,
    t: usize,
}

#[derive(Serialize, Deserialize)]
struct IclSnapshot {
    t: usize,
    w_hat: Vec<f64>,
    k_basis: MatrixRecord,
    minima: Vec<f64>,
}

impl IclState {
    /// Before any task every parameter is admissible: `w_hat = 0`, `K = I`.
    pub fn init(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(config_err("parameter dimension must be positive"));
        }
        Ok(Self {
            w_hat: Vector::zeros(n),
            k_basis: OrthonormalBasis::identity(n),
            minima: Vec::new(),
            t: 0,
        })
    }

    pub fn w_hat(&self) -> &Vector {
        &self.w_hat
    }

    pub fn k_basis(&self) -> &OrthonormalBasis {
        &self.k_basis
    }

    pub fn minima(&self) -> &[f64] {
        &self.minima
    }

    pub fn tasks_seen(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.w_hat.len()
    }

    fn check_task(&self, task: &RegressionTask) -> Result<()> {
        if task.dim() != self.dim() {
            return Err(shape_err(format!(
                "task has {} features but the learner has {}",
                task.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Restricted least squares `min_a ||X (w_hat + K a) - y||^2`, returning
    /// the min-norm `a`, the restricted design `X K` and the rank reference
    /// `||X||_F`. Directions of `X K` below `tol ||X||_F` count as null.
    fn restricted_solve(&self, task: &RegressionTask, tol: f64) -> Result<(Vector, Matrix, f64)> {
        let x_bar = task.x() * self.k_basis.matrix();
        let residual = task.y() - task.x() * &self.w_hat;
        let reference = task.x().norm();
        let a = pinv_solve_scaled(&x_bar, &residual, tol, reference)?;
        Ok((a, x_bar, reference))
    }

    /// Processes one task and returns the new state.
    pub fn update(&self, task: &RegressionTask, tol: f64) -> Result<Self> {
        self.check_task(task)?;
        let (a, x_bar, reference) = self.restricted_solve(task, tol)?;
        let w_hat = &self.w_hat + self.k_basis.matrix() * a;

        let k_basis = if self.k_basis.rank() == 0 {
            self.k_basis.clone()
        } else {
            let inner = nullspace_basis_scaled(&x_bar, tol, reference)?;
            self.k_basis.compose(&inner)?
        };

        let mut minima = self.minima.clone();
        minima.push(task.loss(&w_hat));
        Ok(Self {
            w_hat,
            k_basis,
            minima,
            t: self.t + 1,
        })
    }

    /// Compares the best loss reachable inside the current solution set with
    /// the task's unconstrained minimum.
    pub fn detect_violation(&self, task: &RegressionTask, tol: f64) -> Result<ViolationReport> {
        self.check_task(task)?;
        let (a, _, _) = self.restricted_solve(task, tol)?;
        let constrained_min = task.loss(&(&self.w_hat + self.k_basis.matrix() * a));
        let unconstrained_min = task.minimum(tol)?;
        Ok(ViolationReport {
            task_id: task.task_id(),
            constrained_min,
            unconstrained_min,
            gap: constrained_min - unconstrained_min,
            scale: task.y().norm_squared().max(1.0),
        })
    }

    /// `max_i ||2 X_i^T (X_i w_hat - y_i)||`: how far `w_hat` is from
    /// satisfying every processed task's first-order optimality condition.
    pub fn stationarity_residual(&self, tasks: &[RegressionTask]) -> Result<f64> {
        tasks.iter().try_fold(0.0_f64, |acc, task| {
            self.check_task(task)?;
            Ok(acc.max(task.gradient(&self.w_hat).norm()))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let snap = IclSnapshot {
            t: self.t,
            w_hat: self.w_hat.iter().copied().collect(),
            k_basis: self.k_basis.to_record(),
            minima: self.minima.clone(),
        };
        Ok(serde_json::to_string(&snap)?)
    }

    pub fn from_json(s: &str, tol: f64) -> Result<Self> {
        let snap: IclSnapshot = serde_json::from_str(s)?;
        let w_hat = Vector::from_vec(snap.w_hat);
        ensure_finite_vec(&w_hat)?;
        let k_basis = OrthonormalBasis::new(snap.k_basis.to_matrix()?, tol)?;
        if k_basis.ambient_dim() != w_hat.len() {
            return Err(shape_err("basis and w_hat dimensions differ"));
        }
        if snap.minima.len() != snap.t {
            return Err(shape_err(
                "one recorded minimum per processed task expected",
            ));
        }
        Ok(Self {
            w_hat,
            k_basis,
            minima: snap.minima,
            t: snap.t,
        })
    }
}

/// How far a new task is from being solvable without leaving the current
/// solution set.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub task_id: usize,
    pub constrained_min: f64,
    pub unconstrained_min: f64,
    pub gap: f64,
    /// `max(1, ||y||^2)` of the inspected task.
    pub scale: f64,
}

impl ViolationReport {
    pub fn is_compatible(&self, tol: f64) -> bool {
        self.gap <= tol * self.scale
    }
}

/// Minimizes `sum_i alpha_i ||X_i w - y_i||^2` directly on the stacked,
/// reweighted system; returns the min-norm minimizer and a basis of the
/// stacked null space.
pub fn multitask_oracle(
    tasks: &[RegressionTask],
    alphas: &[f64],
    tol: f64,
) -> Result<(Vector, OrthonormalBasis)> {
    if tasks.is_empty() {
        return Err(config_err("multitask oracle needs at least one task"));
    }
    if alphas.len() != tasks.len() {
        return Err(shape_err("one weight per task expected"));
    }
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(config_err(format!(
            "task weights must be positive, got {bad}"
        )));
    }
    let n = tasks[0].dim();
    if tasks.iter().any(|t| t.dim() != n) {
        return Err(shape_err("tasks have different feature counts"));
    }
    let xs: Vec<Matrix> = tasks
        .iter()
        .zip(alphas)
        .map(|(t, a)| t.x() * a.sqrt())
        .collect();
    let ys: Vec<Vector> = tasks
        .iter()
        .zip(alphas)
        .map(|(t, a)| t.y() * a.sqrt())
        .collect();
    let x = vstack(&xs.iter().collect::<Vec<_>>())?;
    let y = vconcat(&ys.iter().collect::<Vec<_>>());
    let w = pinv_solve_tol(&x, &y, tol)?;
    let k = nullspace_basis(&x, tol)?;
    Ok((w, k))
}

/// Past task kept as an inequality constraint `L_i(w) <= minimum + slack`.
#[derive(Clone, Debug)]
pub struct RelaxedConstraint {
    pub task: RegressionTask,
    pub minimum: f64,
    /// Non-negative; `f64::INFINITY` drops the constraint.
    pub slack: f64,
}

/// Augmented-Lagrangian parameters for [`relaxed_update`].
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSolverConfig {
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub multiplier_cap: f64,
    /// Inner Newton stopping tolerance on the gradient norm, relative to the
    /// problem scale.
    pub inner_tol: f64,
    /// Stationarity and complementarity tolerance, relative to the problem
    /// scale.
    pub kkt_tol: f64,
    /// Allowed constraint overshoot, relative to the problem scale.
    pub feasibility_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub rank_tol: f64,
}

impl Default for RelaxedSolverConfig {
    fn default() -> Self {
        Self {
            initial_penalty: 1.0,
            penalty_growth: 10.0,
            multiplier_cap: 1e12,
            inner_tol: 1e-10,
            kkt_tol: 1e-8,
            feasibility_tol: 1e-9,
            max_outer: 80,
            max_inner: 200,
            rank_tol: 1e-12,
        }
    }
}

struct Bound<'a> {
    task: &'a RegressionTask,
    rhs: f64,
}

impl Bound<'_> {
    fn value(&self, w: &Vector) -> f64 {
        self.task.loss(w) - self.rhs
    }
}

/// Augmented Lagrangian `f + (1/2rho) sum(max(0, lam + rho g)^2 - lam^2)`
/// and the effective multipliers `max(0, lam + rho g)`.
fn augmented(
    current: &RegressionTask,
    bounds: &[Bound<'_>],
    lambda: &[f64],
    rho: f64,
    w: &Vector,
) -> (f64, Vec<f64>) {
    let mut value = current.loss(w);
    let mut mult = Vec::with_capacity(bounds.len());
    for (b, l) in bounds.iter().zip(lambda) {
        let m = (l + rho * b.value(w)).max(0.0);
        value += (m * m - l * l) / (2.0 * rho);
        mult.push(m);
    }
    (value, mult)
}

fn lagrangian_gradient(
    current: &RegressionTask,
    bounds: &[Bound<'_>],
    mult: &[f64],
    w: &Vector,
) -> Vector {
    let mut g = current.gradient(w);
    for (b, m) in bounds.iter().zip(mult) {
        if *m > 0.0 {
            g += b.task.gradient(w) * *m;
        }
    }
    g
}

/// Newton's method on the augmented Lagrangian with Armijo backtracking.
fn minimize_augmented(
    current: &RegressionTask,
    bounds: &[Bound<'_>],
    lambda: &[f64],
    rho: f64,
    mut w: Vector,
    scale: f64,
    cfg: &RelaxedSolverConfig,
) -> Result<Vector> {
    for _ in 0..cfg.max_inner {
        let (value, mult) = augmented(current, bounds, lambda, rho, &w);
        let grad = lagrangian_gradient(current, bounds, &mult, &w);
        if grad.norm() <= cfg.inner_tol * scale {
            break;
        }
        let mut hess = current.x().transpose() * current.x() * 2.0;
        for (b, m) in bounds.iter().zip(&mult) {
            if *m > 0.0 {
                let gi = b.task.gradient(&w);
                hess += b.task.x().transpose() * b.task.x() * (2.0 * m);
                hess += &gi * gi.transpose() * rho;
            }
        }
        let step = -pinv_solve_tol(&hess, &grad, cfg.rank_tol)?;
        let slope = grad.dot(&step);
        if slope >= 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &w + &step * t;
            let (v, _) = augmented(current, bounds, lambda, rho, &trial);
            if v <= value + 1e-4 * t * slope {
                w = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if !w.iter().all(|x| x.is_finite()) {
            return Err(Error::Divergence {
                steps: cfg.max_inner,
            });
        }
    }
    Ok(w)
}

/// Minimizes the current task's loss subject to `L_i(w) <= c_i + slack_i` for
/// every past task, by the method of multipliers with Newton inner solves.
///
/// Returns [`Error::Infeasible`] when the multipliers or the penalty pass the
/// cap while the worst violation is still above tolerance.
pub fn relaxed_update(
    history: &[RelaxedConstraint],
    current: &RegressionTask,
    cfg: &RelaxedSolverConfig,
) -> Result<Vector> {
    let n = current.dim();
    for c in history {
        if c.task.dim() != n {
            return Err(shape_err("constraint task has a different feature count"));
        }
        if c.slack.is_nan() || c.slack < 0.0 {
            return Err(config_err(format!(
                "slack must be non-negative, got {}",
                c.slack
            )));
        }
    }
    let bounds: Vec<Bound<'_>> = history
        .iter()
        .filter(|c| c.slack.is_finite())
        .map(|c| Bound {
            task: &c.task,
            rhs: c.minimum + c.slack,
        })
        .collect();

    let mut w = pinv_solve_tol(current.x(), current.y(), cfg.rank_tol.max(1e-10))?;
    if bounds.is_empty() {
        return Ok(w);
    }

    let scale = 1.0 + current.y().norm_squared() + bounds.iter().map(|b| b.rhs.abs()).sum::<f64>();
    let mut lambda = vec![0.0; bounds.len()];
    let mut rho = cfg.initial_penalty;
    let max_violation = |w: &Vector| {
        bounds
            .iter()
            .map(|b| b.value(w).max(0.0))
            .fold(0.0_f64, f64::max)
    };
    let mut prev_violation = max_violation(&w);

    for _ in 0..cfg.max_outer {
        w = minimize_augmented(current, &bounds, &lambda, rho, w, scale, cfg)?;
        for (l, b) in lambda.iter_mut().zip(&bounds) {
            *l = (*l + rho * b.value(&w)).max(0.0);
        }

        let violation = max_violation(&w);
        let stationarity = lagrangian_gradient(current, &bounds, &lambda, &w).norm();
        let complementarity = bounds
            .iter()
            .zip(&lambda)
            .map(|(b, l)| (l * b.value(&w)).abs())
            .fold(0.0_f64, f64::max);
        let feasible = violation <= cfg.feasibility_tol * scale;
        if feasible && stationarity <= cfg.kkt_tol * scale && complementarity <= cfg.kkt_tol * scale
        {
            return Ok(w);
        }

        let lambda_max = lambda.iter().copied().fold(0.0_f64, f64::max);
        if lambda_max > cfg.multiplier_cap || rho > cfg.multiplier_cap {
            if feasible {
                return Ok(w);
            }
            return Err(Error::Infeasible {
                max_violation: violation,
            });
        }
        if violation > 0.25 * prev_violation {
            rho *= cfg.penalty_growth;
        }
        prev_violation = violation;
    }

    let violation = max_violation(&w);
    if violation <= cfg.feasibility_tol * scale {
        Ok(w)
    } else {
        Err(Error::Infeasible {
            max_violation: violation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{principal_angles, same_subspace, DEFAULT_RANK_TOL};
    use crate::tasks::{gen_parallel_regression, gen_shared_regression, StreamConfig};

    const TOL: f64 = DEFAULT_RANK_TOL;

    fn task(rows: usize, cols: usize, x: &[f64], y: &[f64]) -> RegressionTask {
        RegressionTask::new(
            0,
            Matrix::from_row_slice(rows, cols, x),
            Vector::from_row_slice(y),
        )
        .unwrap()
    }

    fn run(n: usize, tasks: &[RegressionTask]) -> IclState {
        tasks
            .iter()
            .fold(IclState::init(n).unwrap(), |s, t| s.update(t, TOL).unwrap())
    }

    fn shared(seed: u64) -> Vec<RegressionTask> {
        let cfg = StreamConfig {
            n: 50,
            t_count: 10,
            m_per_task: 30,
            rank_per_task: 20,
            seed,
        };
        gen_shared_regression(&cfg).unwrap().1
    }

    #[test]
    fn init_state() {
        let s = IclState::init(3).unwrap();
        assert_eq!(s.k_basis().rank(), 3);
        assert_eq!(s.w_hat(), &Vector::zeros(3));
        assert!(s.minima().is_empty());
        assert!(matches!(IclState::init(0), Err(Error::Config(_))));
    }

    #[test]
    fn full_rank_task_pins_the_solution() {
        let t = task(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]);
        let s = IclState::init(2).unwrap().update(&t, TOL).unwrap();
        assert_eq!(s.k_basis().rank(), 0);
    }

    #[test]
    fn two_axis_tasks_match_stacked_least_squares() {
        let t1 = task(1, 2, &[1.0, 0.0], &[1.0]);
        let t2 = task(1, 2, &[0.0, 1.0], &[2.0]);
        let s1 = IclState::init(2).unwrap().update(&t1, TOL).unwrap();
        assert!((s1.w_hat() - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-15);
        assert_eq!(s1.k_basis().rank(), 1);
        assert!((s1.k_basis().matrix()[(1, 0)].abs() - 1.0).abs() < 1e-15);

        let s2 = s1.update(&t2, TOL).unwrap();
        let stacked = task(2, 2, &[1.0, 0.0, 0.0, 1.0], &[1.0, 2.0]);
        let oracle = pinv_solve_tol(stacked.x(), stacked.y(), TOL).unwrap();
        assert!((s2.w_hat() - oracle).norm() < 1e-14);
        assert_eq!(s2.k_basis().rank(), 0);
    }

    #[test]
    fn repeating_a_task_is_idempotent() {
        let tasks = shared(4);
        let s1 = IclState::init(50).unwrap().update(&tasks[0], TOL).unwrap();
        let s2 = s1.update(&tasks[0], TOL).unwrap();
        assert!(
            (s1.w_hat() - s2.w_hat()).norm() <= 1e-12 * s1.w_hat().norm().max(1.0),
            "{}",
            (s1.w_hat() - s2.w_hat()).norm()
        );
        assert!((s1.k_basis().projector() - s2.k_basis().projector()).norm() <= 1e-12);
    }

    #[test]
    fn solves_every_task_of_a_shared_stream() {
        let tasks = shared(1);
        let s = run(50, &tasks);
        for t in &tasks {
            assert!(t.loss(s.w_hat()) <= 1e-8);
        }
    }

    #[test]
    fn state_invariants_along_the_stream() {
        let tasks = shared(2);
        let mut s = IclState::init(50).unwrap();
        let mut prev_rank = s.k_basis().rank();
        for (i, t) in tasks.iter().enumerate() {
            s = s.update(t, TOL).unwrap();
            assert!(s.k_basis().rank() <= prev_rank);
            prev_rank = s.k_basis().rank();
            assert!(s.k_basis().orthogonality_error() < 1e-10);
            for (j, past) in tasks[..=i].iter().enumerate() {
                let scale = past.y().norm_squared().max(1.0);
                let xk = past.x() * s.k_basis().matrix();
                assert!(crate::numerics::max_abs(&xk) <= 1e-8 * past.x().norm().max(1.0));
                assert!((past.loss(s.w_hat()) - s.minima()[j]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn basis_equals_stacked_null_space() {
        let tasks = shared(3);
        let s = run(50, &tasks[..2]);
        let (_, k) = multitask_oracle(&tasks[..2], &[1.0, 1.0], TOL).unwrap();
        assert!(same_subspace(s.k_basis(), &k, 1e-7).unwrap());
    }

    #[test]
    fn order_of_tasks_does_not_change_the_solution_set() {
        let tasks = shared(5);
        let forward = run(50, &tasks[..2]);
        let reversed: Vec<RegressionTask> = tasks[..2].iter().rev().cloned().collect();
        let backward = run(50, &reversed);
        assert!(same_subspace(forward.k_basis(), backward.k_basis(), 1e-7).unwrap());
        for t in &tasks[..2] {
            assert!(t.loss(backward.w_hat()) <= 1e-8);
        }
    }

    #[test]
    fn violation_gap_on_parallel_tasks() {
        for (offset, expected) in [(1.0, 1.0), (2.0, 4.0)] {
            let tasks = gen_parallel_regression(3, offset, 8).unwrap();
            let s = IclState::init(3).unwrap().update(&tasks[0], TOL).unwrap();
            let report = s.detect_violation(&tasks[1], TOL).unwrap();
            assert!((report.gap - expected).abs() < 1e-10, "{report:?}");
            assert!(!report.is_compatible(1e-10));
        }
    }

    #[test]
    fn violation_gap_is_zero_on_shared_streams() {
        let tasks = shared(6);
        let mut s = IclState::init(50).unwrap();
        for t in &tasks {
            let r = s.detect_violation(t, TOL).unwrap();
            assert!(r.gap <= 1e-10 * r.scale);
            assert!(r.gap >= -1e-9 * r.scale);
            s = s.update(t, TOL).unwrap();
        }
    }

    #[test]
    fn violation_gap_scales_quadratically() {
        let tasks = gen_parallel_regression(4, 1.5, 9).unwrap();
        let s = IclState::init(4).unwrap().update(&tasks[0], TOL).unwrap();
        let base = s.detect_violation(&tasks[1], TOL).unwrap().gap;
        let scaled = s
            .detect_violation(&tasks[1].scaled(3.0).unwrap(), TOL)
            .unwrap()
            .gap;
        assert!(
            (scaled - 9.0 * base).abs() <= 1e-9 * scaled,
            "{scaled} {base}"
        );
    }

    #[test]
    fn multitask_oracle_examples() {
        let tasks = shared(7);
        let (w, _) = multitask_oracle(&tasks[..1], &[1.0], TOL).unwrap();
        let direct = pinv_solve_tol(tasks[0].x(), tasks[0].y(), TOL).unwrap();
        assert!((w - direct).norm() < 1e-12);

        let ones = vec![1.0; tasks.len()];
        let ramp: Vec<f64> = (1..=tasks.len()).map(|i| i as f64).collect();
        let (w1, k1) = multitask_oracle(&tasks, &ones, TOL).unwrap();
        let (w2, k2) = multitask_oracle(&tasks, &ramp, TOL).unwrap();
        assert!(same_subspace(&k1, &k2, 1e-7).unwrap());
        for t in &tasks {
            assert!(t.loss(&w1) <= 1e-8 && t.loss(&w2) <= 1e-8);
        }

        let s = run(50, &tasks);
        assert_eq!(s.k_basis().rank(), k1.rank());
        assert!(principal_angles(s.k_basis(), &k1)
            .unwrap()
            .iter()
            .all(|a| *a <= 1e-7));

        assert!(matches!(
            multitask_oracle(&tasks[..1], &[0.0], TOL),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn stationarity_examples() {
        let tasks = shared(8);
        let s = run(50, &tasks);
        let scale = tasks
            .iter()
            .map(|t| t.y().norm_squared())
            .sum::<f64>()
            .max(1.0);
        assert!(s.stationarity_residual(&tasks).unwrap() <= 1e-7 * scale);

        let single = task(1, 2, &[1.0, 1.0], &[2.0]);
        let s1 = IclState::init(2).unwrap().update(&single, TOL).unwrap();
        assert!(s1.stationarity_residual(&[single]).unwrap() <= 1e-12);

        // Forced update on an incompatible pair: task 2's gradient equation
        // cannot be met inside task 1's solution set.
        let par = gen_parallel_regression(3, 1.0, 2).unwrap();
        let forced = run(3, &par);
        let analytic = par[1].gradient(forced.w_hat()).norm();
        assert!(analytic > 1e-3);
        assert!(
            (forced.stationarity_residual(&par).unwrap() - analytic).abs() < 1e-12,
            "{} {analytic}",
            forced.stationarity_residual(&par).unwrap()
        );
    }

    #[test]
    fn snapshot_round_trip() {
        let tasks = shared(9);
        let s = run(50, &tasks[..2]);
        let json = s.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["t"], 2);
        assert_eq!(v["k_basis"]["rows"], 50);
        let back = IclState::from_json(&json, TOL).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn relaxed_without_constraints_is_least_squares() {
        let tasks = shared(10);
        let hist = vec![RelaxedConstraint {
            task: tasks[0].clone(),
            minimum: 0.0,
            slack: f64::INFINITY,
        }];
        let w = relaxed_update(&hist, &tasks[1], &RelaxedSolverConfig::default()).unwrap();
        let direct = pinv_solve_tol(tasks[1].x(), tasks[1].y(), 1e-10).unwrap();
        assert!((w - direct).norm() < 1e-12);
    }

    #[test]
    fn relaxed_with_zero_slack_matches_exact_learner() {
        let tasks = shared(11);
        let exact = run(50, &tasks[..3]);
        let hist: Vec<RelaxedConstraint> = tasks[..2]
            .iter()
            .zip(exact.minima())
            .map(|(t, c)| RelaxedConstraint {
                task: t.clone(),
                minimum: *c,
                slack: 0.0,
            })
            .collect();
        let w = relaxed_update(&hist, &tasks[2], &RelaxedSolverConfig::default()).unwrap();
        for (i, t) in tasks[..2].iter().enumerate() {
            assert!(t.loss(&w) <= exact.minima()[i] + 1e-6);
        }
        assert!((tasks[2].loss(&w) - exact.minima()[2]).abs() <= 1e-6);
    }

    #[test]
    fn relaxed_half_gap_on_parallel_pair() {
        // min (w2 - 1)^2 s.t. w2^2 <= 1/2  =>  w2 = 1/sqrt(2)
        let x = [0.0, 1.0];
        let t1 = task(1, 2, &x, &[0.0]);
        let t2 = task(1, 2, &x, &[1.0]);
        let hist = vec![RelaxedConstraint {
            task: t1.clone(),
            minimum: 0.0,
            slack: 0.5,
        }];
        let w = relaxed_update(&hist, &t2, &RelaxedSolverConfig::default()).unwrap();
        let analytic = (1.0 - 0.5_f64.sqrt()).powi(2);
        assert!((t2.loss(&w) - analytic).abs() < 1e-8);
        assert!(t1.loss(&w) <= 0.5 + 1e-6);
    }

    #[test]
    fn relaxed_reports_infeasibility() {
        let t1 = task(1, 2, &[1.0, 0.0], &[1.0]);
        let t2 = task(1, 2, &[0.0, 1.0], &[1.0]);
        let hist = vec![RelaxedConstraint {
            task: t1,
            minimum: -1.0,
            slack: 0.0,
        }];
        match relaxed_update(&hist, &t2, &RelaxedSolverConfig::default()) {
            Err(Error::Infeasible { max_violation }) => assert!(max_violation >= 1.0 - 1e-9),
            other => panic!("expected infeasibility, got {other:?}"),
        }
        let bad = vec![RelaxedConstraint {
            task: task(1, 2, &[1.0, 0.0], &[1.0]),
            minimum: 0.0,
            slack: -1.0,
        }];
        assert!(relaxed_update(
            &bad,
            &task(1, 2, &[0.0, 1.0], &[1.0]),
            &RelaxedSolverConfig::default()
        )
        .is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = IclState::init(3).unwrap();
        let t = task(1, 2, &[1.0, 0.0], &[1.0]);
        assert!(matches!(s.update(&t, TOL), Err(Error::Shape(_))));
    }
}
