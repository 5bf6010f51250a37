//! Task streams for continual regression and continual factorization.
//!
//! Regression tasks are noiseless and realizable: every response is exactly
//! `x^T w_star`, so each task's minimum loss is zero and tasks drawn from one
//! [`PopulationSpec`] always share a global minimizer.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Error, Result};
use crate::numerics::{
    ensure_finite, ensure_finite_vec, from_row_major, orthonormalize_qr, pinv_solve_tol,
    to_row_major, Matrix, OrthonormalBasis, Vector, DEFAULT_RANK_TOL,
};
use crate::seeding::{child_seed, rng_from_seed};

/// One regression task: design matrix `x` (m x n) and responses `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTask {
    task_id: usize,
    x: Matrix,
    y: Vector,
}

#[derive(Serialize, Deserialize)]
struct TaskRecord {
    task_id: usize,
    rows: usize,
    cols: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl RegressionTask {
    pub fn new(task_id: usize, x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidInput(
                "a task needs at least one sample".into(),
            ));
        }
        if x.nrows() != y.len() {
            return Err(shape_err(format!(
                "design has {} rows but {} responses",
                x.nrows(),
                y.len()
            )));
        }
        ensure_finite(&x)?;
        ensure_finite_vec(&y)?;
        Ok(Self { task_id, x, y })
    }

    pub fn task_id(&self) -> usize {
        self.task_id
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// `||x w - y||^2`
    pub fn loss(&self, w: &Vector) -> f64 {
        (&self.x * w - &self.y).norm_squared()
    }

    /// `2 x^T (x w - y)`
    pub fn gradient(&self, w: &Vector) -> Vector {
        self.x.transpose() * (&self.x * w - &self.y) * 2.0
    }

    /// Minimum of the loss over all of `R^n`.
    pub fn minimum(&self, tol: f64) -> Result<f64> {
        let w = pinv_solve_tol(&self.x, &self.y, tol)?;
        Ok(self.loss(&w))
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.task_id, &self.x * s, &self.y * s)
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = TaskRecord {
            task_id: self.task_id,
            rows: self.x.nrows(),
            cols: self.x.ncols(),
            x: to_row_major(&self.x),
            y: self.y.iter().copied().collect(),
        };
        Ok(serde_json::to_string(&rec)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: TaskRecord = serde_json::from_str(s)?;
        let x = from_row_major(rec.rows, rec.cols, &rec.x)?;
        Self::new(rec.task_id, x, Vector::from_vec(rec.y))
    }
}

/// Data matrix `y` (n x m_t) whose columns span the task subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBatch {
    task_id: usize,
    y: Matrix,
}

impl SubspaceBatch {
    pub fn new(task_id: usize, y: Matrix) -> Result<Self> {
        if y.ncols() == 0 {
            return Err(Error::InvalidInput(
                "a batch needs at least one column".into(),
            ));
        }
        ensure_finite(&y)?;
        Ok(Self { task_id, y })
    }

    pub fn task_id(&self) -> usize {
        self.task_id
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn ambient_dim(&self) -> usize {
        self.y.nrows()
    }
}

/// How sample coefficients are drawn inside a task's row space.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingModel {
    /// `x = R_t g` with `g` standard normal.
    Gaussian,
    /// `x = g r_j` with `j` drawn from `weights` and `g` a standard normal
    /// scalar. Heavy-tailed weights leave rare directions unseen for many
    /// samples, keeping tasks underdetermined even when `m` exceeds the rank.
    SparseCoordinates { weights: Vec<f64> },
}

impl SamplingModel {
    /// Normalized weights proportional to `j^-exponent`, `j = 1..=rank`.
    pub fn power_law(rank: usize, exponent: f64) -> Self {
        let raw: Vec<f64> = (1..=rank).map(|j| (j as f64).powf(-exponent)).collect();
        let total: f64 = raw.iter().sum();
        Self::SparseCoordinates {
            weights: raw.into_iter().map(|p| p / total).collect(),
        }
    }

    /// Second moment of each basis coefficient.
    fn coefficient_variances(&self, rank: usize) -> Vec<f64> {
        match self {
            Self::Gaussian => vec![1.0; rank],
            Self::SparseCoordinates { weights } => weights.clone(),
        }
    }
}

/// Ground truth for i.i.d. sampling: shared minimizer and per-task row spaces.
#[derive(Clone, Debug)]
pub struct PopulationSpec {
    w_star: Vector,
    task_row_spaces: Vec<OrthonormalBasis>,
    sample_scale: f64,
    sampling: SamplingModel,
}

impl PopulationSpec {
    pub fn new(
        w_star: Vector,
        task_row_spaces: Vec<OrthonormalBasis>,
        sample_scale: f64,
        sampling: SamplingModel,
    ) -> Result<Self> {
        ensure_finite_vec(&w_star)?;
        let n = w_star.len();
        if task_row_spaces.is_empty() {
            return Err(config_err("population needs at least one task"));
        }
        for (t, r) in task_row_spaces.iter().enumerate() {
            if r.ambient_dim() != n {
                return Err(shape_err(format!("task {t} row space is not in R^{n}")));
            }
            if r.rank() >= n || r.rank() == 0 {
                return Err(config_err(format!(
                    "task {t} row space must be a proper non-trivial subspace (rank {})",
                    r.rank()
                )));
            }
            if let SamplingModel::SparseCoordinates { weights } = &sampling {
                if weights.len() != r.rank() {
                    return Err(config_err(format!(
                        "{} sampling weights for a rank-{} row space",
                        weights.len(),
                        r.rank()
                    )));
                }
            }
        }
        if let SamplingModel::SparseCoordinates { weights } = &sampling {
            if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return Err(config_err("sampling weights must be positive"));
            }
        }
        if !(sample_scale > 0.0 && sample_scale.is_finite()) {
            return Err(config_err("sample scale must be positive"));
        }
        Ok(Self {
            w_star,
            task_row_spaces,
            sample_scale,
            sampling,
        })
    }

    /// Random population: standard-normal `w_star` and independent random
    /// rank-`rank` row spaces, all orthogonal to one common random direction
    /// so the tasks never pin down `w_star` completely.
    pub fn random(
        n: usize,
        t_count: usize,
        rank: usize,
        sampling: SamplingModel,
        seed: u64,
    ) -> Result<Self> {
        if rank == 0 || rank >= n {
            return Err(config_err(format!(
                "need 0 < rank < n, got rank {rank}, n {n}"
            )));
        }
        let mut rng = rng_from_seed(child_seed(seed, 0));
        let w_star = standard_normal_vector(n, &mut rng);
        let free = standard_normal_vector(n, &mut rng).normalize();
        let spaces = (0..t_count)
            .map(|t| {
                let mut g = standard_normal_matrix(
                    n,
                    rank,
                    &mut rng_from_seed(child_seed(seed, 1 + t as u64)),
                );
                let along = free.transpose() * &g;
                g -= &free * along;
                OrthonormalBasis::new(orthonormalize_qr(&g)?, DEFAULT_RANK_TOL)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(w_star, spaces, 1.0, sampling)
    }

    pub fn w_star(&self) -> &Vector {
        &self.w_star
    }

    pub fn task_row_spaces(&self) -> &[OrthonormalBasis] {
        &self.task_row_spaces
    }

    pub fn sample_scale(&self) -> f64 {
        self.sample_scale
    }

    pub fn sampling(&self) -> &SamplingModel {
        &self.sampling
    }

    pub fn task_count(&self) -> usize {
        self.task_row_spaces.len()
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    fn row_space(&self, t: usize) -> Result<&OrthonormalBasis> {
        self.task_row_spaces.get(t).ok_or_else(|| {
            config_err(format!(
                "task index {t} out of range for {} tasks",
                self.task_row_spaces.len()
            ))
        })
    }
}

/// Shape of a shared-minimizer regression stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub n: usize,
    pub t_count: usize,
    pub m_per_task: usize,
    pub rank_per_task: usize,
    pub seed: u64,
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t_count == 0 {
            return Err(config_err("n and t_count must be positive"));
        }
        if self.rank_per_task == 0 || self.rank_per_task >= self.n {
            return Err(config_err(format!(
                "rank_per_task must satisfy 0 < rank < n (rank {}, n {})",
                self.rank_per_task, self.n
            )));
        }
        if self.m_per_task < self.rank_per_task {
            return Err(config_err(format!(
                "m_per_task ({}) must be at least rank_per_task ({})",
                self.m_per_task, self.rank_per_task
            )));
        }
        Ok(())
    }
}

pub(crate) fn standard_normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly distributed `n x r` orthonormal basis (QR of a Gaussian matrix).
pub fn random_orthonormal<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<OrthonormalBasis> {
    if r > n {
        return Err(config_err(format!(
            "cannot draw {r} orthonormal vectors in R^{n}"
        )));
    }
    if r == 0 {
        return Ok(OrthonormalBasis::trivial(n));
    }
    let q = orthonormalize_qr(&standard_normal_matrix(n, r, rng))?;
    OrthonormalBasis::new(q, DEFAULT_RANK_TOL)
}

/// Draws `m` rows inside `basis` according to `sampling`.
fn draw_rows<R: Rng + ?Sized>(
    basis: &OrthonormalBasis,
    sampling: &SamplingModel,
    m: usize,
    scale: f64,
    rng: &mut R,
) -> Result<Matrix> {
    let r = basis.rank();
    let coeffs = match sampling {
        SamplingModel::Gaussian => standard_normal_matrix(m, r, rng),
        SamplingModel::SparseCoordinates { weights } => {
            let pick = WeightedIndex::new(weights)
                .map_err(|e| config_err(format!("bad sampling weights: {e}")))?;
            let mut c = Matrix::zeros(m, r);
            for i in 0..m {
                let j = pick.sample(rng);
                c[(i, j)] = StandardNormal.sample(rng);
            }
            c
        }
    };
    Ok(coeffs * basis.matrix().transpose() * scale)
}

/// Realizable stream: every task's responses are `X_t w_star` exactly.
pub fn gen_shared_regression(cfg: &StreamConfig) -> Result<(PopulationSpec, Vec<RegressionTask>)> {
    cfg.validate()?;
    let spec = PopulationSpec::random(
        cfg.n,
        cfg.t_count,
        cfg.rank_per_task,
        SamplingModel::Gaussian,
        cfg.seed,
    )?;
    let tasks = (0..cfg.t_count)
        .map(|t| {
            sample_population(
                &spec,
                t,
                cfg.m_per_task,
                child_seed(cfg.seed, 1000 + t as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spec, tasks))
}

/// `m` i.i.d. noiseless samples of task `t`.
pub fn sample_population(
    spec: &PopulationSpec,
    t: usize,
    m: usize,
    seed: u64,
) -> Result<RegressionTask> {
    if m == 0 {
        return Err(config_err("sample count must be positive"));
    }
    let basis = spec.row_space(t)?;
    let mut rng = rng_from_seed(seed);
    let x = draw_rows(basis, &spec.sampling, m, spec.sample_scale, &mut rng)?;
    let y = &x * &spec.w_star;
    RegressionTask::new(t, x, y)
}

/// Closed-form `E[(x^T w - x^T w_star)^2]` for task `t`.
pub fn population_risk(spec: &PopulationSpec, t: usize, w: &Vector) -> Result<f64> {
    let basis = spec.row_space(t)?;
    if w.len() != spec.dim() {
        return Err(shape_err(format!(
            "w has length {} but n = {}",
            w.len(),
            spec.dim()
        )));
    }
    let coords = basis.matrix().transpose() * (w - &spec.w_star);
    let variances = spec.sampling.coefficient_variances(basis.rank());
    let weighted: f64 = coords.iter().zip(&variances).map(|(c, v)| v * c * c).sum();
    Ok(spec.sample_scale * spec.sample_scale * weighted)
}

/// Population second-moment matrix `E[x x^T]` of task `t`.
pub fn population_second_moment(spec: &PopulationSpec, t: usize) -> Result<Matrix> {
    let basis = spec.row_space(t)?;
    let variances = spec.sampling.coefficient_variances(basis.rank());
    let mut scaled = basis.matrix().clone();
    for (j, v) in variances.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*v);
    }
    Ok(scaled * basis.matrix().transpose() * spec.sample_scale.powi(2))
}

/// Two tasks with identical designs whose solution sets are parallel affine
/// subspaces at squared residual distance `offset^2`.
///
/// The shared design is a seeded full-row-rank `(n-1) x n` Gaussian matrix;
/// `y_2 = y_1 + offset * u` for a seeded unit vector `u`.
pub fn gen_parallel_regression(n: usize, offset: f64, seed: u64) -> Result<Vec<RegressionTask>> {
    if n < 2 {
        return Err(config_err("parallel tasks need n >= 2"));
    }
    if offset == 0.0 || !offset.is_finite() {
        return Err(config_err("offset must be finite and non-zero"));
    }
    let mut rng = rng_from_seed(seed);
    let m = n - 1;
    let x = standard_normal_matrix(m, n, &mut rng);
    let w1 = standard_normal_vector(n, &mut rng);
    let y1 = &x * &w1;
    let dir = standard_normal_vector(m, &mut rng);
    let y2 = &y1 + dir.normalize() * offset;
    Ok(vec![
        RegressionTask::new(0, x.clone(), y1)?,
        RegressionTask::new(1, x, y2)?,
    ])
}

/// Independent random subspaces of the given dimensions; batch `t` has
/// `dims[t] + 2` columns.
pub fn gen_subspace_stream(n: usize, dims: &[usize], seed: u64) -> Result<Vec<SubspaceBatch>> {
    let total: usize = dims.iter().sum();
    if total >= n {
        return Err(config_err(format!(
            "subspace dimensions sum to {total}, which must be below n = {n}"
        )));
    }
    dims.iter()
        .enumerate()
        .map(|(t, &d)| {
            let mut rng = rng_from_seed(child_seed(seed, t as u64));
            let basis = random_orthonormal(n, d, &mut rng)?;
            let coeffs = standard_normal_matrix(d, d + 2, &mut rng);
            SubspaceBatch::new(t, basis.matrix() * coeffs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{
        hstack, nullspace_basis, numerical_rank, principal_angles, svd_thin, vstack,
    };

    #[test]
    fn tiny_shared_stream_is_realizable() {
        let cfg = StreamConfig {
            n: 2,
            t_count: 1,
            m_per_task: 1,
            rank_per_task: 1,
            seed: 7,
        };
        let (spec, tasks) = gen_shared_regression(&cfg).unwrap();
        assert_eq!(tasks[0].loss(spec.w_star()), 0.0);
    }

    #[test]
    fn shared_stream_stacked_rank_and_zero_loss() {
        let cfg = StreamConfig {
            n: 50,
            t_count: 10,
            m_per_task: 30,
            rank_per_task: 20,
            seed: 1,
        };
        let (spec, tasks) = gen_shared_regression(&cfg).unwrap();
        let xs: Vec<&Matrix> = tasks.iter().map(|t| t.x()).collect();
        let stacked = vstack(&xs).unwrap();
        let rank = numerical_rank(&svd_thin(&stacked).unwrap().singular_values, 1e-10).unwrap();
        assert!(rank <= 49);
        for t in &tasks {
            assert!(t.loss(spec.w_star()) <= 1e-18 * t.y().norm_squared().max(1.0));
        }
    }

    #[test]
    fn shared_stream_is_deterministic() {
        let cfg = StreamConfig {
            n: 8,
            t_count: 3,
            m_per_task: 5,
            rank_per_task: 3,
            seed: 99,
        };
        let (_, a) = gen_shared_regression(&cfg).unwrap();
        let (_, b) = gen_shared_regression(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stream_config_validation() {
        let bad = StreamConfig {
            n: 4,
            t_count: 2,
            m_per_task: 5,
            rank_per_task: 4,
            seed: 0,
        };
        assert!(matches!(gen_shared_regression(&bad), Err(Error::Config(_))));
        let bad = StreamConfig {
            n: 5,
            t_count: 2,
            m_per_task: 2,
            rank_per_task: 3,
            seed: 0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empirical_null_matches_population_null() {
        for seed in 0..5 {
            let cfg = StreamConfig {
                n: 12,
                t_count: 3,
                m_per_task: 6,
                rank_per_task: 5,
                seed,
            };
            let (spec, tasks) = gen_shared_regression(&cfg).unwrap();
            for (t, task) in tasks.iter().enumerate() {
                let empirical = nullspace_basis(task.x(), 1e-10).unwrap();
                let population = spec.task_row_spaces()[t].complement().unwrap();
                assert_eq!(empirical.rank(), population.rank());
                let angles = principal_angles(&empirical, &population).unwrap();
                assert!(angles.iter().all(|a| *a <= 1e-7));
            }
        }
    }

    /// Brute force: parameterize G_1 = w1 + null(X) and scan the minimum of L_2.
    fn brute_force_constrained_residual(tasks: &[RegressionTask]) -> f64 {
        let w1 = pinv_solve_tol(tasks[0].x(), tasks[0].y(), 1e-10).unwrap();
        let null = nullspace_basis(tasks[0].x(), 1e-10).unwrap();
        let mut best = f64::INFINITY;
        for k in -200..=200 {
            let a = k as f64 * 0.05;
            let w = &w1 + null.matrix().column(0) * a;
            best = best.min(tasks[1].loss(&w));
        }
        best
    }

    #[test]
    fn parallel_pair_two_dimensional_instance() {
        let x = Matrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let tasks = vec![
            RegressionTask::new(0, x.clone(), Vector::from_vec(vec![0.0])).unwrap(),
            RegressionTask::new(1, x, Vector::from_vec(vec![1.0])).unwrap(),
        ];
        assert!((brute_force_constrained_residual(&tasks) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_generator_gap_is_offset_squared() {
        for (offset, expected) in [(1.0, 1.0), (2.0, 4.0)] {
            let tasks = gen_parallel_regression(4, offset, 3).unwrap();
            assert_eq!(tasks[0].x(), tasks[1].x());
            let brute = brute_force_constrained_residual(&tasks);
            assert!((brute - expected).abs() < 1e-10, "{brute} vs {expected}");
            assert!(tasks[1].minimum(1e-10).unwrap() < 1e-20);
        }
        assert!(gen_parallel_regression(3, 0.0, 1).is_err());
        assert!(gen_parallel_regression(1, 1.0, 1).is_err());
    }

    #[test]
    fn subspace_stream_ranks() {
        let batches = gen_subspace_stream(3, &[1, 1], 5).unwrap();
        let cat = hstack(&[batches[0].y(), batches[1].y()]).unwrap();
        assert_eq!(svd_thin(&cat).unwrap().rank(1e-10).unwrap(), 2);

        let batches = gen_subspace_stream(20, &[3, 4, 5], 6).unwrap();
        assert_eq!(batches[1].y().ncols(), 6);
        let ys: Vec<&Matrix> = batches.iter().map(|b| b.y()).collect();
        let cat = hstack(&ys).unwrap();
        assert_eq!(svd_thin(&cat).unwrap().rank(1e-10).unwrap(), 12);

        assert!(gen_subspace_stream(5, &[2, 3], 0).is_err());
    }

    #[test]
    fn sample_population_edge_cases() {
        let spec = PopulationSpec::random(5, 2, 1, SamplingModel::Gaussian, 4).unwrap();
        assert!(matches!(
            sample_population(&spec, 0, 0, 1),
            Err(Error::Config(_))
        ));
        assert!(sample_population(&spec, 2, 3, 1).is_err());

        let task = sample_population(&spec, 1, 6, 9).unwrap();
        let b = spec.task_row_spaces()[1].matrix().column(0).clone_owned();
        for i in 0..6 {
            let row = task.x().row(i).transpose();
            let along = row.dot(&b);
            assert!((row - &b * along).norm() < 1e-12);
        }
    }

    #[test]
    fn second_moment_matches_monte_carlo() {
        let spec = PopulationSpec::random(6, 1, 3, SamplingModel::Gaussian, 12).unwrap();
        let task = sample_population(&spec, 0, 100_000, 13).unwrap();
        let empirical = task.x().transpose() * task.x() / 100_000.0;
        let analytic = population_second_moment(&spec, 0).unwrap();
        assert!((empirical - &analytic).norm() <= 0.05 * analytic.norm());
    }

    #[test]
    fn population_risk_examples() {
        let spec = PopulationSpec::random(6, 2, 2, SamplingModel::Gaussian, 20).unwrap();
        assert_eq!(population_risk(&spec, 0, spec.w_star()).unwrap(), 0.0);
        let perp = spec.task_row_spaces()[0].complement().unwrap();
        let w = spec.w_star() + perp.matrix().column(0) * 3.0;
        assert!(population_risk(&spec, 0, &w).unwrap() < 1e-28);
    }

    #[test]
    fn population_risk_matches_monte_carlo() {
        for sampling in [SamplingModel::Gaussian, SamplingModel::power_law(3, 2.0)] {
            let spec = PopulationSpec::random(7, 1, 3, sampling, 30).unwrap();
            let mut rng = rng_from_seed(31);
            let w = standard_normal_vector(7, &mut rng);
            let closed = population_risk(&spec, 0, &w).unwrap();
            let draws = sample_population(&spec, 0, 1_000_000, 32).unwrap();
            let mc = draws.loss(&w) / 1_000_000.0;
            assert!(
                (mc - closed).abs() <= 0.01 * closed,
                "mc {mc} closed {closed}"
            );
        }
    }

    #[test]
    fn task_json_round_trip() {
        let spec = PopulationSpec::random(4, 1, 2, SamplingModel::Gaussian, 2).unwrap();
        let task = sample_population(&spec, 0, 3, 5).unwrap();
        let json = task.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"], 3);
        assert_eq!(v["cols"], 4);
        assert_eq!(RegressionTask::from_json(&json).unwrap(), task);
    }

    #[test]
    fn task_validation() {
        assert!(RegressionTask::new(0, Matrix::zeros(0, 2), Vector::zeros(0)).is_err());
        assert!(matches!(
            RegressionTask::new(0, Matrix::zeros(2, 2), Vector::zeros(3)),
            Err(Error::Shape(_))
        ));
        assert!(SubspaceBatch::new(0, Matrix::zeros(3, 0)).is_err());
    }
}
