//! Forgetting and memory accounting, the uniform-convergence radius, and the
//! Monte Carlo harnesses for the generalization claims.

use serde::{Deserialize, Serialize};

use crate::baselines::{rehearsal_train, BufferStrategy, ReplayBuffer};
use crate::error::{config_err, shape_err, Result};
use crate::icl_regression::IclState;
use crate::icl_subspace::{DualState, IsvdState, OjaState, PrimalState, SubspaceState};
use crate::numerics::Vector;
use crate::seeding::child_seed;
use crate::tasks::{population_risk, sample_population, PopulationSpec, RegressionTask};

/// Values in `[-FORGETTING_FLOOR, 0)` are rounding noise and reported as 0.
pub const FORGETTING_FLOOR: f64 = 1e-12;

/// Excess loss `L_i(w) - c_i` of every task.
pub fn forgetting_profile(
    w: &Vector,
    tasks: &[RegressionTask],
    minima: &[f64],
) -> Result<Vec<f64>> {
    if tasks.len() != minima.len() {
        return Err(shape_err(format!(
            "{} tasks but {} minima",
            tasks.len(),
            minima.len()
        )));
    }
    tasks
        .iter()
        .zip(minima)
        .map(|(t, c)| {
            if t.dim() != w.len() {
                return Err(shape_err(format!(
                    "task {} is in R^{}, w in R^{}",
                    t.task_id(),
                    t.dim(),
                    w.len()
                )));
            }
            let excess = t.loss(w) - c;
            Ok(if (-FORGETTING_FLOOR..0.0).contains(&excess) {
                0.0
            } else {
                excess
            })
        })
        .collect()
}

/// Constants of the uniform-convergence radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaParams {
    /// Lipschitz constant of the loss.
    pub m_lip: f64,
    /// Norm bound of the hypothesis class.
    pub b: f64,
    pub n: usize,
    /// Leading constant.
    pub c: f64,
}

impl ZetaParams {
    pub fn new(m_lip: f64, b: f64, n: usize, c: f64) -> Result<Self> {
        let p = Self { m_lip, b, n, c };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.m_lip) && positive(self.b) && positive(self.c) && self.n > 0) {
            return Err(config_err(format!(
                "zeta constants must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `C M B sqrt(n ln(m) ln(n / delta)) / sqrt(m)`.
pub fn zeta(m: f64, delta: f64, p: &ZetaParams) -> Result<f64> {
    p.validate()?;
    if !(m >= 2.0 && m.is_finite()) {
        return Err(config_err(format!("zeta needs m >= 2, got {m}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(config_err(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = p.n as f64;
    Ok(p.c * p.m_lip * p.b * (n * m.ln() * (n / delta).ln()).sqrt() / m.sqrt())
}

/// Confidence split across tasks when slacks are assigned one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackSchedule {
    /// Task `t` of an open-ended stream uses `delta / t`.
    Running,
    /// Every task of a stream of known length `T` uses `delta / T`.
    Final,
}

impl SlackSchedule {
    pub fn task_delta(self, delta: f64, t: usize, t_count: usize) -> f64 {
        match self {
            Self::Running => delta / t.max(1) as f64,
            Self::Final => delta / t_count.max(1) as f64,
        }
    }

    /// Slack `zeta(m, delta')` for task `t` (1-based).
    pub fn slack(
        self,
        m: f64,
        delta: f64,
        t: usize,
        t_count: usize,
        p: &ZetaParams,
    ) -> Result<f64> {
        zeta(m, self.task_delta(delta, t, t_count), p)
    }
}

/// Mean and standard error of a sample (`se = 0` for one value).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRateConfig {
    pub m_grid: Vec<usize>,
    /// Largest allowed `meanGap(m_{k+1}) / meanGap(m_k)`.
    pub threshold: f64,
    pub rank_tol: f64,
}

impl Default for BoundRateConfig {
    fn default() -> Self {
        Self {
            m_grid: vec![250, 1000, 4000],
            threshold: 0.7,
            rank_tol: crate::numerics::DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRateReport {
    pub m_grid: Vec<usize>,
    pub mean_gaps: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `mean_gaps[k + 1] / mean_gaps[k]`.
    pub ratios: Vec<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Final state of the exact learner on one sampled stream and its max-task
/// population risk.
pub fn all_task_run(
    spec: &PopulationSpec,
    m: usize,
    seed: u64,
    tol: f64,
) -> Result<(IclState, f64)> {
    let mut state = IclState::init(spec.dim())?;
    for t in 0..spec.task_count() {
        let task = sample_population(spec, t, m, child_seed(seed, t as u64))?;
        state = state.update(&task, tol)?;
    }
    let gap = (0..spec.task_count()).try_fold(0.0_f64, |acc, t| {
        Ok::<_, crate::Error>(acc.max(population_risk(spec, t, state.w_hat())?))
    })?;
    Ok((state, gap))
}

/// Max-task population risk of the exact learner after one sampled stream.
pub fn all_task_gap(spec: &PopulationSpec, m: usize, seed: u64, tol: f64) -> Result<f64> {
    Ok(all_task_run(spec, m, seed, tol)?.1)
}

/// Mean max-task population gap of the exact learner at each sample size,
/// and whether every step of the grid shrinks it by `threshold` or better.
/// Trial `k` draws from `child_seed(seed, k)` at every grid point.
pub fn verify_all_task_bound(
    spec: &PopulationSpec,
    cfg: &BoundRateConfig,
    trials: usize,
    seed: u64,
) -> Result<BoundRateReport> {
    if trials == 0 || cfg.m_grid.is_empty() {
        return Err(config_err("need at least one trial and one sample size"));
    }
    let mut mean_gaps = Vec::with_capacity(cfg.m_grid.len());
    let mut std_errors = Vec::with_capacity(cfg.m_grid.len());
    for &m in &cfg.m_grid {
        let gaps = (0..trials as u64)
            .map(|k| all_task_gap(spec, m, child_seed(seed, k), cfg.rank_tol))
            .collect::<Result<Vec<_>>>()?;
        let (mean, se) = mean_and_se(&gaps);
        mean_gaps.push(mean);
        std_errors.push(se);
    }
    let ratios: Vec<f64> = mean_gaps.windows(2).map(|w| w[1] / w[0]).collect();
    let passed = ratios.iter().all(|r| *r <= cfg.threshold);
    Ok(BoundRateReport {
        m_grid: cfg.m_grid.clone(),
        mean_gaps,
        std_errors,
        ratios,
        threshold: cfg.threshold,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RehearsalCurve {
    pub s_grid: Vec<usize>,
    pub strategy: BufferStrategy,
    pub mean_gaps: Vec<f64>,
    pub std_errors: Vec<f64>,
}

impl RehearsalCurve {
    pub fn strictly_decreasing(&self) -> bool {
        self.mean_gaps.windows(2).all(|w| w[1] < w[0])
    }
}

/// Outcome of rehearsal on the last task of one sampled stream.
#[derive(Clone, Debug)]
pub struct RehearsalRun {
    pub w: Vector,
    pub buffer: ReplayBuffer,
    /// Loss of `w` on the last task.
    pub final_train_loss: f64,
    /// Population risk summed over all tasks.
    pub gap: f64,
}

/// Rehearsal on the last task with `s` stored samples of each earlier task.
pub fn rehearsal_run(
    spec: &PopulationSpec,
    s: usize,
    m: usize,
    strategy: BufferStrategy,
    seed: u64,
    tol: f64,
) -> Result<RehearsalRun> {
    let t_count = spec.task_count();
    let mut buffer = ReplayBuffer::new(strategy);
    let mut last = None;
    for t in 0..t_count {
        let task = sample_population(spec, t, m, child_seed(seed, t as u64))?;
        if t + 1 == t_count {
            last = Some(task);
        } else {
            buffer = buffer.buffer_insert(&task, s, child_seed(seed, 1_000 + t as u64))?;
        }
    }
    let w = rehearsal_train(&buffer, last.as_ref(), tol)?;
    let final_train_loss = last.as_ref().map_or(0.0, |t| t.loss(&w));
    let gap = (0..t_count).try_fold(0.0, |acc, t| {
        Ok::<_, crate::Error>(acc + population_risk(spec, t, &w)?)
    })?;
    Ok(RehearsalRun {
        w,
        buffer,
        final_train_loss,
        gap,
    })
}

/// Summed population risk over all tasks after rehearsal on the last task
/// with `s` stored samples of each earlier task.
pub fn rehearsal_gap(
    spec: &PopulationSpec,
    s: usize,
    m: usize,
    strategy: BufferStrategy,
    seed: u64,
    tol: f64,
) -> Result<f64> {
    Ok(rehearsal_run(spec, s, m, strategy, seed, tol)?.gap)
}

/// Rehearsal gap at each buffer size. Trial `k` uses the same tasks at every
/// grid point, so the curve compares buffer sizes on common draws.
pub fn rehearsal_gap_curve(
    spec: &PopulationSpec,
    s_grid: &[usize],
    m: usize,
    strategy: BufferStrategy,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<RehearsalCurve> {
    if trials == 0 || s_grid.is_empty() {
        return Err(config_err("need at least one trial and one buffer size"));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err("buffer sizes must be increasing"));
    }
    let mut mean_gaps = Vec::with_capacity(s_grid.len());
    let mut std_errors = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let gaps = (0..trials as u64)
            .map(|k| rehearsal_gap(spec, s, m, strategy, child_seed(seed, k), tol))
            .collect::<Result<Vec<_>>>()?;
        let (mean, se) = mean_and_se(&gaps);
        mean_gaps.push(mean);
        std_errors.push(se);
    }
    Ok(RehearsalCurve {
        s_grid: s_grid.to_vec(),
        strategy,
        mean_gaps,
        std_errors,
    })
}

/// Number of floats a learner keeps between tasks.
pub trait MemoryFootprint {
    fn memory_floats(&self) -> usize;
}

impl MemoryFootprint for IclState {
    fn memory_floats(&self) -> usize {
        let n = self.dim();
        n + n * self.k_basis().rank() + self.minima().len()
    }
}

impl MemoryFootprint for PrimalState {
    fn memory_floats(&self) -> usize {
        self.k_basis().ambient_dim() * self.k_basis().rank()
    }
}

impl MemoryFootprint for DualState {
    fn memory_floats(&self) -> usize {
        self.b_basis().ambient_dim() * self.b_basis().rank()
    }
}

impl MemoryFootprint for SubspaceState {
    fn memory_floats(&self) -> usize {
        match self {
            Self::Primal(p) => p.memory_floats(),
            Self::Dual(d) => d.memory_floats(),
        }
    }
}

impl MemoryFootprint for ReplayBuffer {
    fn memory_floats(&self) -> usize {
        self.entries()
            .iter()
            .map(|e| e.samples.n_samples() * (e.samples.dim() + 1))
            .sum()
    }
}

impl MemoryFootprint for IsvdState {
    fn memory_floats(&self) -> usize {
        self.stored_floats()
    }
}

impl MemoryFootprint for OjaState {
    fn memory_floats(&self) -> usize {
        self.basis().ambient_dim() * self.basis().rank()
    }
}

/// One `(scenario, algorithm, task)` measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub algorithm: String,
    pub task_index: usize,
    pub trial: usize,
    pub train_loss: f64,
    /// Excess loss on each earlier task.
    pub excess_losses: Vec<f64>,
    pub max_forgetting: f64,
    /// `None` when the scenario has no population model.
    pub population_risk: Option<f64>,
    pub memory_floats: usize,
    pub wall_micros: u64,
}

impl RunRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: &str,
        algorithm: &str,
        task_index: usize,
        trial: usize,
        train_loss: f64,
        excess_losses: Vec<f64>,
        population_risk: Option<f64>,
        memory_floats: usize,
        wall_micros: u64,
    ) -> Self {
        let max_forgetting = excess_losses.iter().copied().fold(0.0_f64, f64::max);
        Self {
            scenario: scenario.to_owned(),
            algorithm: algorithm.to_owned(),
            task_index,
            trial,
            train_loss,
            excess_losses,
            max_forgetting,
            population_risk,
            memory_floats,
            wall_micros,
        }
    }
}
