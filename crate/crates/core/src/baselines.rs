//! Comparison methods for continual regression.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Error, Result};
use crate::numerics::{
    nullspace_basis, pinv_solve_tol, svd_thin, vconcat, vstack, Matrix, OrthonormalBasis, Vector,
};
use crate::seeding::rng_from_seed;
use crate::tasks::RegressionTask;

/// Result of one projected-gradient run.
#[derive(Clone, Debug)]
pub struct OgdRun {
    pub w: Vector,
    pub steps: usize,
    pub gamma: f64,
}

/// `0.9 / lambda_max(2 Xbar^T Xbar)` with `Xbar = X K`; `None` when the
/// projected problem is flat.
pub fn ogd_default_step(k_prev: &OrthonormalBasis, task: &RegressionTask) -> Result<Option<f64>> {
    if k_prev.rank() == 0 {
        return Ok(None);
    }
    let x_bar = task.x() * k_prev.matrix();
    let top = svd_thin(&x_bar)?
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0);
    if top == 0.0 {
        return Ok(None);
    }
    Ok(Some(0.9 / (2.0 * top * top)))
}

/// Gradient descent on task `t` with gradients projected onto `span(K)`:
/// `w <- w - gamma K K^T 2 X^T (X w - y)`. Stops early once the projected
/// gradient is negligible.
pub fn ogd_task(
    w0: &Vector,
    k_prev: &OrthonormalBasis,
    task: &RegressionTask,
    steps: usize,
    gamma: Option<f64>,
) -> Result<OgdRun> {
    if w0.len() != task.dim() || k_prev.ambient_dim() != task.dim() {
        return Err(shape_err(format!(
            "w0 has {} entries, basis {} rows, task {} columns",
            w0.len(),
            k_prev.ambient_dim(),
            task.dim()
        )));
    }
    if steps == 0 {
        return Err(config_err("ogd needs at least one step"));
    }
    let gamma = match gamma {
        Some(g) if g > 0.0 && g.is_finite() => g,
        Some(g) => return Err(config_err(format!("step size must be positive, got {g}"))),
        None => match ogd_default_step(k_prev, task)? {
            Some(g) => g,
            None => {
                return Ok(OgdRun {
                    w: w0.clone(),
                    steps: 0,
                    gamma: 0.0,
                })
            }
        },
    };
    let k = k_prev.matrix();
    // precomputed so one step costs two small products
    let x_bar = task.x() * k;
    let stop = 1e-15 * (1.0 + (x_bar.transpose() * task.y()).norm());
    let mut w = w0.clone();
    for step in 1..=steps {
        let residual = task.x() * &w - task.y();
        let g = x_bar.transpose() * residual * 2.0;
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { steps: step });
        }
        if g.norm() <= stop {
            return Ok(OgdRun {
                w,
                steps: step - 1,
                gamma,
            });
        }
        w -= k * g * gamma;
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { steps: step });
        }
    }
    Ok(OgdRun { w, steps, gamma })
}

/// Euclidean projection onto `G_t = {w : X^T X w = X^T y}`.
pub fn alt_project(w: &Vector, task: &RegressionTask, tol: f64) -> Result<Vector> {
    if w.len() != task.dim() {
        return Err(shape_err(format!(
            "w has {} entries, task {} columns",
            w.len(),
            task.dim()
        )));
    }
    let w_hat = pinv_solve_tol(task.x(), task.y(), tol)?;
    let null = nullspace_basis(task.x(), tol)?;
    Ok(&w_hat + null.project(&(w - &w_hat)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferStrategy {
    FirstK,
    UniformRandom,
    Reservoir,
}

impl BufferStrategy {
    pub const ALL: [BufferStrategy; 3] = [Self::FirstK, Self::UniformRandom, Self::Reservoir];

    pub fn name(self) -> &'static str {
        match self {
            Self::FirstK => "first_k",
            Self::UniformRandom => "uniform_random",
            Self::Reservoir => "reservoir",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Sorted row indices kept out of a stream of `m` rows.
    pub fn select<R: Rng + ?Sized>(self, m: usize, s: usize, rng: &mut R) -> Vec<usize> {
        if s >= m {
            return (0..m).collect();
        }
        let mut idx = match self {
            Self::FirstK => (0..s).collect(),
            Self::UniformRandom => sample(rng, m, s).into_vec(),
            Self::Reservoir => reservoir_indices(m, s, rng),
        };
        idx.sort_unstable();
        idx
    }
}

/// Single pass of Algorithm R over indices `0..m`.
pub fn reservoir_indices<R: Rng + ?Sized>(m: usize, s: usize, rng: &mut R) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..s.min(m)).collect();
    for i in s..m {
        let j = rng.random_range(0..=i);
        if j < s {
            kept[j] = i;
        }
    }
    kept
}

/// Stored rows of one past task.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredTask {
    pub samples: RegressionTask,
    pub capacity: usize,
    /// Rows of the task stream consumed while filling.
    pub stream_position: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayBuffer {
    strategy: BufferStrategy,
    entries: Vec<StoredTask>,
}

impl ReplayBuffer {
    pub fn new(strategy: BufferStrategy) -> Self {
        Self {
            strategy,
            entries: Vec::new(),
        }
    }

    pub fn strategy(&self) -> BufferStrategy {
        self.strategy
    }

    pub fn entries(&self) -> &[StoredTask] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored `(row, response)` pairs in total.
    pub fn stored_samples(&self) -> usize {
        self.entries.iter().map(|e| e.samples.n_samples()).sum()
    }

    /// Adds up to `s` rows of `task`; the selection draws from `seed`.
    pub fn buffer_insert(&self, task: &RegressionTask, s: usize, seed: u64) -> Result<Self> {
        if s == 0 {
            return Err(config_err("buffer capacity must be at least 1"));
        }
        if let Some(first) = self.entries.first() {
            if first.samples.dim() != task.dim() {
                return Err(shape_err(format!(
                    "buffer holds R^{} samples, task is in R^{}",
                    first.samples.dim(),
                    task.dim()
                )));
            }
        }
        let mut rng = rng_from_seed(seed);
        let idx = self.strategy.select(task.n_samples(), s, &mut rng);
        let x = task.x().select_rows(&idx);
        let y = task.y().select_rows(&idx);
        let mut next = self.clone();
        next.entries.push(StoredTask {
            samples: RegressionTask::new(task.task_id(), x, y)?,
            capacity: s,
            stream_position: task.n_samples(),
        });
        Ok(next)
    }
}

/// Minimum-norm minimizer of `(1/m_T) L_T + sum_t (1/s_t) L_t` over the
/// current task and every stored task.
pub fn rehearsal_train(
    buffer: &ReplayBuffer,
    current: Option<&RegressionTask>,
    tol: f64,
) -> Result<Vector> {
    let mut parts: Vec<(&RegressionTask, f64)> = buffer
        .entries()
        .iter()
        .map(|e| (&e.samples, (1.0 / e.samples.n_samples() as f64).sqrt()))
        .collect();
    if let Some(task) = current {
        parts.push((task, (1.0 / task.n_samples() as f64).sqrt()));
    }
    if parts.is_empty() {
        return Err(config_err(
            "rehearsal needs a current task or stored samples",
        ));
    }
    let dim = parts[0].0.dim();
    if let Some((bad, _)) = parts.iter().find(|(t, _)| t.dim() != dim) {
        return Err(shape_err(format!(
            "task {} is in R^{}, expected R^{dim}",
            bad.task_id(),
            bad.dim()
        )));
    }
    let xs: Vec<Matrix> = parts.iter().map(|(t, w)| t.x() * *w).collect();
    let ys: Vec<Vector> = parts.iter().map(|(t, w)| t.y() * *w).collect();
    let x = vstack(&xs.iter().collect::<Vec<_>>())?;
    let y = vconcat(&ys.iter().collect::<Vec<_>>());
    pinv_solve_tol(&x, &y, tol)
}

/// Memoryless reference: the minimum-norm least-squares solution of each
/// task on its own.
pub fn sequential_ls(tasks: &[RegressionTask], tol: f64) -> Result<Vec<Vector>> {
    tasks
        .iter()
        .map(|t| pinv_solve_tol(t.x(), t.y(), tol))
        .collect()
}
