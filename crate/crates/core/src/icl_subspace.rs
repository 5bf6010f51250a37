//! Continual matrix factorization.
//!
//! Batch `t` is a data matrix `Y_t` whose columns span a subspace `S_t`. The
//! primal learner keeps an orthonormal basis of `S_1 + ... + S_t` and only
//! ever appends columns for the part of `Y_t` it cannot already represent.
//! The dual learner keeps a basis of the orthogonal complement, which shrinks
//! instead. The two are interchangeable through [`SubspaceState::switch`].
//!
//! Incremental SVD and Oja's rule are the streaming baselines.

use rand::Rng;

use crate::error::{config_err, shape_err, Result};
use crate::numerics::{
    hstack, nullspace_basis, nullspace_basis_scaled, numerical_rank, orthonormalize_qr,
    range_basis, range_basis_scaled, svd_thin, Matrix, OrthonormalBasis,
};
use crate::tasks::{random_orthonormal, SubspaceBatch};

fn check_dim(expected: usize, batch: &SubspaceBatch) -> Result<()> {
    if batch.ambient_dim() != expected {
        return Err(shape_err(format!(
            "batch lives in R^{} but the learner in R^{expected}",
            batch.ambient_dim()
        )));
    }
    Ok(())
}

/// Growing basis `K_t` of the sum of all seen subspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalState {
    k_basis: OrthonormalBasis,
    t: usize,
}

impl PrimalState {
    pub fn init(y1: &SubspaceBatch, tol: f64) -> Result<Self> {
        Ok(Self {
            k_basis: range_basis(y1.y(), tol)?,
            t: 1,
        })
    }

    /// Appends a basis of the residual `(I - K K^T) Y_t`; a batch already
    /// inside `span(K)` adds nothing.
    pub fn update(&self, batch: &SubspaceBatch, tol: f64) -> Result<Self> {
        check_dim(self.k_basis.ambient_dim(), batch)?;
        let k = self.k_basis.matrix();
        let residual = batch.y() - k * (k.transpose() * batch.y());
        let fresh = range_basis_scaled(&residual, tol, batch.y().norm())?;
        let k_basis = if fresh.rank() == 0 {
            self.k_basis.clone()
        } else {
            self.k_basis.extend(&fresh)?
        };
        Ok(Self {
            k_basis,
            t: self.t + 1,
        })
    }

    pub fn k_basis(&self) -> &OrthonormalBasis {
        &self.k_basis
    }

    pub fn batches_seen(&self) -> usize {
        self.t
    }

    /// Optimal coefficients `K^T Y` for a batch; never stored.
    pub fn coefficients(&self, y: &Matrix) -> Matrix {
        self.k_basis.matrix().transpose() * y
    }

    /// `||K K^T Y - Y||_F / ||Y||_F` (zero for a zero batch).
    pub fn relative_residual(&self, y: &Matrix) -> f64 {
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (self.k_basis.matrix() * self.coefficients(y) - y).norm() / norm
    }
}

/// Shrinking basis `B_t` of the intersection of the complements.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    b_basis: OrthonormalBasis,
    t: usize,
}

impl DualState {
    pub fn init(y1: &SubspaceBatch, tol: f64) -> Result<Self> {
        Ok(Self {
            b_basis: nullspace_basis(&y1.y().transpose(), tol)?,
            t: 1,
        })
    }

    /// `B_t = B_{t-1} C` with `C` spanning `null(Y_t^T B_{t-1})`.
    pub fn update(&self, batch: &SubspaceBatch, tol: f64) -> Result<Self> {
        check_dim(self.b_basis.ambient_dim(), batch)?;
        if self.b_basis.rank() == 0 {
            return Ok(Self {
                b_basis: self.b_basis.clone(),
                t: self.t + 1,
            });
        }
        let projected = batch.y().transpose() * self.b_basis.matrix();
        let inner = nullspace_basis_scaled(&projected, tol, batch.y().norm())?;
        Ok(Self {
            b_basis: self.b_basis.compose(&inner)?,
            t: self.t + 1,
        })
    }

    pub fn b_basis(&self) -> &OrthonormalBasis {
        &self.b_basis
    }

    pub fn batches_seen(&self) -> usize {
        self.t
    }

    /// `||Y^T B||_F / ||Y||_F`, equal to the primal residual of the
    /// complementary basis.
    pub fn relative_residual(&self, y: &Matrix) -> f64 {
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (y.transpose() * self.b_basis.matrix()).norm() / norm
    }
}

/// Either representation of the learned subspace.
#[derive(Clone, Debug, PartialEq)]
pub enum SubspaceState {
    Primal(PrimalState),
    Dual(DualState),
}

impl SubspaceState {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Primal(p) => p.k_basis.ambient_dim(),
            Self::Dual(d) => d.b_basis.ambient_dim(),
        }
    }

    /// Dimension of the learned subspace (not of the stored basis).
    pub fn learned_rank(&self) -> usize {
        match self {
            Self::Primal(p) => p.k_basis.rank(),
            Self::Dual(d) => d.b_basis.ambient_dim() - d.b_basis.rank(),
        }
    }

    pub fn update(&self, batch: &SubspaceBatch, tol: f64) -> Result<Self> {
        Ok(match self {
            Self::Primal(p) => Self::Primal(p.update(batch, tol)?),
            Self::Dual(d) => Self::Dual(d.update(batch, tol)?),
        })
    }

    /// The other representation of the same subspace.
    pub fn switch(&self) -> Result<Self> {
        Ok(match self {
            Self::Primal(p) => Self::Dual(DualState {
                b_basis: p.k_basis.complement()?,
                t: p.t,
            }),
            Self::Dual(d) => Self::Primal(PrimalState {
                k_basis: d.b_basis.complement()?,
                t: d.t,
            }),
        })
    }

    /// Stores the dual exactly when the learned rank exceeds half the ambient
    /// dimension.
    pub fn with_smaller_representation(self) -> Result<Self> {
        let n = self.ambient_dim();
        let want_dual = 2 * self.learned_rank() > n;
        match (&self, want_dual) {
            (Self::Primal(_), true) | (Self::Dual(_), false) => self.switch(),
            _ => Ok(self),
        }
    }

    /// Basis of the learned subspace, converting from the dual if needed.
    pub fn primal_basis(&self) -> Result<OrthonormalBasis> {
        match self {
            Self::Primal(p) => Ok(p.k_basis.clone()),
            Self::Dual(d) => d.b_basis.complement(),
        }
    }

    pub fn stored_floats(&self) -> usize {
        match self {
            Self::Primal(p) => p.k_basis.matrix().len(),
            Self::Dual(d) => d.b_basis.matrix().len(),
        }
    }
}

/// SVD of the concatenation of all batches seen so far, updated in place of
/// recomputing it: `[Y_1 ... Y_t] = u diag(sigma) v^T`.
#[derive(Clone, Debug)]
pub struct IsvdState {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
    tol: f64,
}

impl IsvdState {
    pub fn init(y1: &SubspaceBatch, tol: f64) -> Result<Self> {
        let f = svd_thin(y1.y())?;
        let r = numerical_rank(&f.singular_values, tol)?;
        Ok(Self {
            u: f.u.columns(0, r).clone_owned(),
            sigma: f.singular_values[..r].to_vec(),
            v: f.vt.rows(0, r).transpose(),
            tol,
        })
    }

    /// Brand-style update: the residual of `Y_t` outside `span(u)` is
    /// factored by a rank-revealing QR `Q2 R2`, the small middle matrix
    /// `[[diag(sigma), u^T Y], [0, R2]]` is decomposed, and the outer bases
    /// are post-multiplied by its singular vectors.
    pub fn update(&self, batch: &SubspaceBatch) -> Result<Self> {
        check_dim(self.u.nrows(), batch)?;
        let y = batch.y();
        let (n, m) = y.shape();
        let k = self.sigma.len();

        let proj = self.u.transpose() * y;
        let mut residual = y - &self.u * &proj;
        // second pass keeps the residual orthogonal to u in finite precision
        let again = self.u.transpose() * &residual;
        residual -= &self.u * &again;
        let proj = proj + again;

        let scale = self.sigma.first().copied().unwrap_or(0.0).max(y.norm());
        let q2 = if residual.norm() <= self.tol * scale {
            Matrix::zeros(n, 0)
        } else {
            let qr = residual.clone().col_piv_qr();
            let r = qr.r();
            let keep = (0..r.nrows().min(r.ncols()))
                .take_while(|&i| r[(i, i)].abs() > self.tol * scale)
                .count();
            qr.q().columns(0, keep).clone_owned()
        };
        let r2 = q2.transpose() * &residual;
        let p = q2.ncols();

        let mut middle = Matrix::zeros(k + p, k + m);
        for (i, s) in self.sigma.iter().enumerate() {
            middle[(i, i)] = *s;
        }
        middle.view_mut((0, k), (k, m)).copy_from(&proj);
        middle.view_mut((k, k), (p, m)).copy_from(&r2);

        let f = svd_thin(&middle)?;
        let r = numerical_rank(&f.singular_values, self.tol)?;

        let outer_u = hstack(&[&self.u, &q2])?;
        let u = outer_u * f.u.columns(0, r);

        let rows_v = self.v.nrows();
        let mut outer_v = Matrix::zeros(rows_v + m, k + m);
        outer_v.view_mut((0, 0), (rows_v, k)).copy_from(&self.v);
        outer_v.view_mut((rows_v, k), (m, m)).fill_with_identity();
        let v = outer_v * f.vt.rows(0, r).transpose();

        Ok(Self {
            u,
            sigma: f.singular_values[..r].to_vec(),
            v,
            tol: self.tol,
        })
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// `||u^T u - I||_F`
    pub fn orthogonality_drift(&self) -> f64 {
        let r = self.sigma.len();
        (self.u.transpose() * &self.u - Matrix::identity(r, r)).norm()
    }

    pub fn stored_floats(&self) -> usize {
        self.u.len() + self.sigma.len() + self.v.len()
    }
}

/// Oja's subspace rule with a fixed target dimension.
#[derive(Clone, Debug)]
pub struct OjaState {
    u: OrthonormalBasis,
    step_index: usize,
}

impl OjaState {
    /// Random orthonormal `n x r` start.
    pub fn init<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self> {
        if r > n {
            return Err(config_err(format!(
                "target dimension {r} exceeds ambient dimension {n}"
            )));
        }
        Ok(Self {
            u: random_orthonormal(n, r, rng)?,
            step_index: 0,
        })
    }

    pub fn from_basis(u: OrthonormalBasis) -> Self {
        Self { u, step_index: 0 }
    }

    /// `U <- orth(U + gamma Y Y^T U)`
    pub fn update(&self, batch: &SubspaceBatch, gamma: f64) -> Result<Self> {
        check_dim(self.u.ambient_dim(), batch)?;
        let u = self.u.matrix();
        let y = batch.y();
        let moved = u + y * (y.transpose() * u) * gamma;
        let q = orthonormalize_qr(&moved)?;
        Ok(Self {
            u: OrthonormalBasis::new(q, self.u.tol())?,
            step_index: self.step_index + 1,
        })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.u
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn target_dim(&self) -> usize {
        self.u.rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{principal_angles, same_subspace, DEFAULT_RANK_TOL};
    use crate::seeding::rng_from_seed;
    use crate::tasks::{gen_subspace_stream, standard_normal_matrix};

    const TOL: f64 = DEFAULT_RANK_TOL;

    fn axis_batch(n: usize, axes: &[(usize, f64)]) -> SubspaceBatch {
        let mut y = Matrix::zeros(n, axes.len());
        for (j, (i, v)) in axes.iter().enumerate() {
            y[(*i, j)] = *v;
        }
        SubspaceBatch::new(0, y).unwrap()
    }

    fn batch_oracle(batches: &[SubspaceBatch]) -> OrthonormalBasis {
        let ys: Vec<&Matrix> = batches.iter().map(|b| b.y()).collect();
        range_basis(&hstack(&ys).unwrap(), TOL).unwrap()
    }

    #[test]
    fn primal_init_examples() {
        let p = PrimalState::init(&axis_batch(3, &[(0, 1.0)]), TOL).unwrap();
        assert_eq!(p.k_basis().rank(), 1);
        assert!((p.k_basis().matrix()[(0, 0)].abs() - 1.0).abs() < 1e-15);

        let zero = SubspaceBatch::new(0, Matrix::zeros(3, 2)).unwrap();
        assert_eq!(PrimalState::init(&zero, TOL).unwrap().k_basis().rank(), 0);

        let batches = gen_subspace_stream(10, &[3], 4).unwrap();
        let p = PrimalState::init(&batches[0], TOL).unwrap();
        assert_eq!(p.k_basis().rank(), 3);
        assert!((p.k_basis().projector() - batch_oracle(&batches).projector()).norm() <= 1e-9);
    }

    #[test]
    fn primal_update_examples() {
        let b1 = axis_batch(3, &[(0, 1.0)]);
        let p = PrimalState::init(&b1, TOL).unwrap();
        let same = p.update(&b1, TOL).unwrap();
        assert_eq!(same.k_basis(), p.k_basis());

        let p2 = p.update(&axis_batch(3, &[(1, 1.0)]), TOL).unwrap();
        assert_eq!(p2.k_basis().rank(), 2);

        let batches = gen_subspace_stream(20, &[3, 4, 5], 11).unwrap();
        let mut p = PrimalState::init(&batches[0], TOL).unwrap();
        for (t, b) in batches.iter().enumerate().skip(1) {
            let prev = p.k_basis().rank();
            p = p.update(b, TOL).unwrap();
            assert!(p.k_basis().rank() >= prev);
            assert!(same_subspace(p.k_basis(), &batch_oracle(&batches[..=t]), 1e-7).unwrap());
        }
        assert_eq!(p.k_basis().rank(), 12);
        for b in &batches {
            assert!(p.relative_residual(b.y()) <= 1e-8);
        }
    }

    #[test]
    fn dual_examples() {
        let d = DualState::init(&axis_batch(3, &[(0, 1.0)]), TOL).unwrap();
        assert_eq!(d.b_basis().rank(), 2);
        let d = d.update(&axis_batch(3, &[(1, 1.0)]), TOL).unwrap();
        assert_eq!(d.b_basis().rank(), 1);
        assert!((d.b_basis().matrix()[(2, 0)].abs() - 1.0).abs() < 1e-15);
        let d = d.update(&axis_batch(3, &[(2, 2.0)]), TOL).unwrap();
        assert_eq!(d.b_basis().rank(), 0);
        let d = d.update(&axis_batch(3, &[(2, 2.0)]), TOL).unwrap();
        assert_eq!(d.b_basis().rank(), 0);
    }

    #[test]
    fn primal_and_dual_projectors_sum_to_identity() {
        let batches = gen_subspace_stream(15, &[2, 5, 3], 21).unwrap();
        let mut p = PrimalState::init(&batches[0], TOL).unwrap();
        let mut d = DualState::init(&batches[0], TOL).unwrap();
        for b in &batches[1..] {
            p = p.update(b, TOL).unwrap();
            d = d.update(b, TOL).unwrap();
            assert_eq!(p.k_basis().rank() + d.b_basis().rank(), 15);
            let sum = p.k_basis().projector() + d.b_basis().projector();
            assert!((sum - Matrix::identity(15, 15)).norm() <= 1e-8);
        }
        for b in &batches {
            assert!(d.relative_residual(b.y()) <= 1e-8);
        }
    }

    #[test]
    fn batch_order_does_not_change_the_span() {
        let batches = gen_subspace_stream(20, &[3, 4, 5], 31).unwrap();
        let run = |order: &[usize]| {
            let mut p = PrimalState::init(&batches[order[0]], TOL).unwrap();
            for &i in &order[1..] {
                p = p.update(&batches[i], TOL).unwrap();
            }
            p
        };
        let a = run(&[0, 1, 2]);
        let b = run(&[2, 0, 1]);
        assert!(same_subspace(a.k_basis(), b.k_basis(), 1e-7).unwrap());
    }

    #[test]
    fn representation_switching() {
        let zero = SubspaceState::Primal(PrimalState {
            k_basis: OrthonormalBasis::trivial(4),
            t: 0,
        });
        match zero.switch().unwrap() {
            SubspaceState::Dual(d) => assert_eq!(d.b_basis().rank(), 4),
            _ => panic!("expected dual"),
        }

        let batches = gen_subspace_stream(12, &[4, 3], 41).unwrap();
        let mut p = PrimalState::init(&batches[0], TOL).unwrap();
        p = p.update(&batches[1], TOL).unwrap();
        let state = SubspaceState::Primal(p.clone());
        let round = state.switch().unwrap().switch().unwrap();
        assert!(same_subspace(p.k_basis(), &round.primal_basis().unwrap(), 1e-7).unwrap());

        // rank 7 > 12/2: dual is smaller
        let chosen = state.with_smaller_representation().unwrap();
        assert!(matches!(chosen, SubspaceState::Dual(_)));
        assert_eq!(chosen.stored_floats(), 12 * 5);
        assert!(chosen.stored_floats() <= 12 * (12 - 7));
        assert_eq!(chosen.learned_rank(), 7);
    }

    #[test]
    fn isvd_orthogonal_columns() {
        let s = IsvdState::init(&axis_batch(3, &[(0, 3.0)]), TOL).unwrap();
        let s = s.update(&axis_batch(3, &[(1, 4.0)])).unwrap();
        assert_eq!(s.sigma().len(), 2);
        assert!((s.sigma()[0] - 4.0).abs() < 1e-14);
        assert!((s.sigma()[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn isvd_matches_batch_svd() {
        let batches = gen_subspace_stream(20, &[3, 4, 5], 51).unwrap();
        let mut s = IsvdState::init(&batches[0], TOL).unwrap();
        for b in &batches[1..] {
            s = s.update(b).unwrap();
        }
        let ys: Vec<&Matrix> = batches.iter().map(|b| b.y()).collect();
        let cat = hstack(&ys).unwrap();
        let oracle = svd_thin(&cat).unwrap();
        assert_eq!(s.sigma().len(), 12);
        for (a, b) in s.sigma().iter().zip(&oracle.singular_values) {
            assert!((a - b).abs() <= 1e-8);
        }
        assert!((s.reconstruct() - &cat).norm() <= 1e-7 * cat.norm());
    }

    #[test]
    fn isvd_replayed_batch_keeps_rank() {
        let batches = gen_subspace_stream(8, &[2], 52).unwrap();
        let s = IsvdState::init(&batches[0], TOL).unwrap();
        let s = s.update(&batches[0]).unwrap();
        assert_eq!(s.sigma().len(), 2);
        assert_eq!(s.v().nrows(), 8);
    }

    #[test]
    fn isvd_orthogonality_drift_stays_small() {
        // long stream of rank-one columns inside a fixed 6-dim subspace of R^30
        let mut rng = rng_from_seed(61);
        let basis = random_orthonormal(30, 6, &mut rng).unwrap();
        let first =
            SubspaceBatch::new(0, basis.matrix() * standard_normal_matrix(6, 1, &mut rng)).unwrap();
        let mut s = IsvdState::init(&first, TOL).unwrap();
        let mut worst: f64 = 0.0;
        for t in 1..1000 {
            let y = basis.matrix() * standard_normal_matrix(6, 1, &mut rng);
            s = s.update(&SubspaceBatch::new(t, y).unwrap()).unwrap();
            worst = worst.max(s.orthogonality_drift());
        }
        assert!(worst <= 1e-8, "drift {worst}");
        assert_eq!(s.sigma().len(), 6);
    }

    #[test]
    fn oja_examples() {
        let mut rng = rng_from_seed(71);
        let s = OjaState::init(6, 2, &mut rng).unwrap();
        let batch = SubspaceBatch::new(0, standard_normal_matrix(6, 3, &mut rng)).unwrap();
        let still = s.update(&batch, 0.0).unwrap();
        assert!((still.basis().matrix() - s.basis().matrix()).norm() < 1e-12);
        let moved = s.update(&batch, 0.5).unwrap();
        assert!(moved.basis().orthogonality_error() <= 1e-10);
        assert_eq!(moved.step_index(), 1);
        assert!(OjaState::init(3, 4, &mut rng).is_err());
    }

    #[test]
    fn oja_improves_over_passes() {
        let (n, r, batches_per_pass) = (12, 3, 10);
        let mut improved = 0;
        for trial in 0..100u64 {
            let mut rng = rng_from_seed(1000 + trial);
            let truth = random_orthonormal(n, r, &mut rng).unwrap();
            let batches: Vec<SubspaceBatch> = (0..batches_per_pass)
                .map(|t| {
                    SubspaceBatch::new(t, truth.matrix() * standard_normal_matrix(r, 2, &mut rng))
                        .unwrap()
                })
                .collect();
            let ys: Vec<&Matrix> = batches.iter().map(|b| b.y()).collect();
            let oracle = range_basis(&hstack(&ys).unwrap(), TOL).unwrap();
            let mut s = OjaState::init(n, r, &mut rng).unwrap();
            let mut k = 0;
            let mut after_first = 0.0;
            for pass in 0..20 {
                for b in &batches {
                    s = s.update(b, 1.0 / (k as f64 + 10.0)).unwrap();
                    k += 1;
                }
                if pass == 0 {
                    after_first = principal_angles(s.basis(), &oracle)
                        .unwrap()
                        .last()
                        .copied()
                        .unwrap();
                }
            }
            let after_last = principal_angles(s.basis(), &oracle)
                .unwrap()
                .last()
                .copied()
                .unwrap();
            if after_last < after_first {
                improved += 1;
            }
        }
        assert!(improved >= 95, "improved in {improved}/100 trials");
    }
}
