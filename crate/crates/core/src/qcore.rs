//! Pseudoinverse-based geometry for regression adjustment with an
//! unpenalized intercept.
//!
//! For a design block `X_S` (rows = units in a set `S`, columns = covariates)
//! the adjusted mean is a ratio of quadratic forms in a positive semidefinite
//! matrix `Q`:
//!
//! * if the all-ones vector is *not* in the column span of `X_S`, then
//!   `Q = M = I - X X^+` (the annihilator of the column span);
//! * if it *is* in the span (interpolating designs), then `Q = K = (X X^T)^+`.
//!
//! In both cases the intercept is `mu = <1, y>_Q / <1, 1>_Q` and the slope is
//! the minimum-norm least-squares coefficient `beta = X^+ (y - mu 1)`.
//!
//! [`QFactor`] stores a thin SVD of `X_S` so both branches apply `Q` in
//! `O(s r)` time, and [`ArmData`] caches the handful of `Q`-products that the
//! swap-sensitivity formulas consume.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff and branch-selection tolerance. A single
/// knob controls rank decisions, span membership tests, and degeneracy
/// guards so the two code paths can never disagree about which regime a
/// design is in.
pub const DEFAULT_TOL: f64 = 1e-10;

// ======================================================================
// Dense pseudoinverse and Greville rank-one updates
// ======================================================================

/// Moore-Penrose pseudoinverse via SVD with a relative cutoff
/// `sigma_i > tol * sigma_max`.
pub fn pinv(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let cut = tol * smax;
    let mut out = DMatrix::zeros(n, m);
    for k in 0..sv.len() {
        if sv[k] > cut && sv[k] > 0.0 {
            let col_u = u.column(k);
            let row_v = vt.row(k);
            let inv = 1.0 / sv[k];
            for i in 0..n {
                for j in 0..m {
                    out[(i, j)] += row_v[i] * inv * col_u[j];
                }
            }
        }
    }
    out
}

/// Update `A^+` after appending the column `a`: returns `[A a]^+`.
///
/// Uses the classical rank-one recursion: with `d = A^+ a` and
/// `c = a - A d`, the new last row is `b = c^+` when `c != 0` (the appended
/// column enlarges the span) and `b = (1 + d^T d)^{-1} d^T A^+` otherwise.
pub fn greville_append(
    pinv_a: &DMatrix<f64>,
    a_mat: &DMatrix<f64>,
    a_col: &DVector<f64>,
    tol: f64,
) -> DMatrix<f64> {
    let m = a_mat.nrows();
    assert_eq!(pinv_a.ncols(), m, "pinv shape mismatch");
    assert_eq!(a_col.len(), m, "appended column length mismatch");
    let d = pinv_a * a_col;
    let c = a_col - a_mat * &d;
    let b: DMatrix<f64> = if c.norm() > tol * a_col.norm() {
        // c^+ for a nonzero column vector is c^T / ||c||^2.
        let s = 1.0 / c.norm_squared();
        DMatrix::from_fn(1, m, |_, j| c[j] * s)
    } else {
        let scale = 1.0 / (1.0 + d.norm_squared());
        let row = d.transpose() * pinv_a;
        DMatrix::from_fn(1, m, |_, j| row[(0, j)] * scale)
    };
    let k = pinv_a.nrows();
    let mut out = DMatrix::zeros(k + 1, m);
    let top = pinv_a - &d * &b;
    out.view_mut((0, 0), (k, m)).copy_from(&top);
    out.view_mut((k, 0), (1, m)).copy_from(&b);
    out
}

/// Downdate: given `[A a]` and its pseudoinverse, return `A^+` (drop the
/// last column). Writing the given pseudoinverse as `[B; b]` (last row `b`),
/// `A^+ = B + d b` with `d = B (a - b^+)` when `b A = 0`, and
/// `d = (1 - b a)^{-1} B a` otherwise.
pub fn greville_delete(pinv_atilde: &DMatrix<f64>, atilde: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let m = atilde.nrows();
    let kp1 = atilde.ncols();
    assert!(kp1 >= 1, "nothing to delete");
    assert_eq!(pinv_atilde.nrows(), kp1);
    assert_eq!(pinv_atilde.ncols(), m);
    let k = kp1 - 1;
    let a_mat = atilde.view((0, 0), (m, k)).into_owned();
    let a_col: DVector<f64> = atilde.column(k).into_owned();
    let b_block = pinv_atilde.view((0, 0), (k, m)).into_owned();
    let b_row: DVector<f64> = pinv_atilde.row(k).transpose();

    let b_norm2 = b_row.norm_squared();
    if b_norm2 <= tol * tol {
        // Appended column was (numerically) zero: the pseudoinverse of A is
        // just the top block.
        return b_block;
    }
    let ba = a_mat.transpose() * &b_row; // (b A)^T, length k
    let d: DVector<f64> = if ba.norm() <= tol * (b_row.norm() * a_mat.norm()).max(tol) {
        // Span-enlarging case: b = c^+, so b^+ = c = b^T / ||b||^2.
        let b_pinv = &b_row / b_norm2;
        &b_block * (&a_col - b_pinv)
    } else {
        let denom = 1.0 - b_row.dot(&a_col);
        (&b_block * &a_col) / denom
    };
    &b_block + d * b_row.transpose()
}

// ======================================================================
// QFactor
// ======================================================================

/// Which quadratic-form matrix governs the design block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QBranch {
    /// `Q = I - X X^+`: the ones vector is outside the column span.
    MBranch,
    /// `Q = (X X^T)^+`: the ones vector lies inside the column span.
    KBranch,
}

/// Thin-SVD representation of the design block `X_S` (`s x p`) together with
/// the branch decision, supporting `O(s r)` application of `Q` and of `X^+`.
#[derive(Debug, Clone)]
pub struct QFactor {
    branch: QBranch,
    rank: usize,
    rows: usize,
    cols: usize,
    /// Left singular vectors, `s x r`.
    u: DMatrix<f64>,
    /// Nonzero singular values, length `r`.
    sv: DVector<f64>,
    /// Right singular vectors transposed, `r x p`.
    vt: DMatrix<f64>,
    tol: f64,
}

impl QFactor {
    /// Factor the design block and pick the branch by testing whether the
    /// residual of the ones vector against the column span is below
    /// `tol * ||1||`.
    pub fn new(xs: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let (s, p) = xs.shape();
        if s == 0 {
            return Err(Error::invalid("design block must have at least one row"));
        }
        let (u, sv, vt, rank) = if p == 0 {
            (DMatrix::zeros(s, 0), DVector::zeros(0), DMatrix::zeros(0, 0), 0)
        } else {
            let svd = xs.clone().svd(true, true);
            let u_full = svd.u.expect("svd u");
            let vt_full = svd.v_t.expect("svd v_t");
            let sv_full = svd.singular_values;
            let smax = sv_full.iter().cloned().fold(0.0_f64, f64::max);
            let cut = tol * smax;
            let rank = sv_full.iter().filter(|&&v| v > cut && v > 0.0).count();
            // nalgebra returns singular values in descending order, so the
            // retained triplets are the leading ones.
            (
                u_full.columns(0, rank).into_owned(),
                DVector::from_fn(rank, |i, _| sv_full[i]),
                vt_full.rows(0, rank).into_owned(),
                rank,
            )
        };
        let ones = DVector::from_element(s, 1.0);
        let proj_coeff = u.transpose() * &ones;
        let residual = &ones - &u * &proj_coeff;
        let branch = if residual.norm() <= tol * ones.norm() {
            QBranch::KBranch
        } else {
            QBranch::MBranch
        };
        Ok(QFactor { branch, rank, rows: s, cols: p, u, sv, vt, tol })
    }

    pub fn branch(&self) -> QBranch {
        self.branch
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Apply `Q` to a vector.
    pub fn q_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.rows, "q_apply length mismatch");
        let coeff = self.u.transpose() * v;
        match self.branch {
            QBranch::MBranch => v - &self.u * coeff,
            QBranch::KBranch => {
                let scaled = DVector::from_fn(self.rank, |i, _| coeff[i] / (self.sv[i] * self.sv[i]));
                &self.u * scaled
            }
        }
    }

    /// Quadratic form `<a, b>_Q = a^T Q b`.
    pub fn q_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&self.q_apply(b))
    }

    /// Diagonal entry `Q_ii` without forming `Q`.
    pub fn q_diag(&self, i: usize) -> f64 {
        assert!(i < self.rows, "q_diag index out of range");
        match self.branch {
            QBranch::MBranch => {
                let mut row_norm2 = 0.0;
                for k in 0..self.rank {
                    row_norm2 += self.u[(i, k)] * self.u[(i, k)];
                }
                (1.0 - row_norm2).max(0.0)
            }
            QBranch::KBranch => {
                let mut acc = 0.0;
                for k in 0..self.rank {
                    let t = self.u[(i, k)] / self.sv[k];
                    acc += t * t;
                }
                acc
            }
        }
    }

    /// Apply the pseudoinverse `X_S^+` to a length-`s` vector.
    pub fn pinv_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.rows, "pinv_apply length mismatch");
        let mut coeff = self.u.transpose() * v;
        for k in 0..self.rank {
            coeff[k] /= self.sv[k];
        }
        self.vt.transpose() * coeff
    }

    /// Materialize `Q` densely (test/oracle use; `O(s^2 r)`).
    pub fn q_dense(&self) -> DMatrix<f64> {
        let s = self.rows;
        let mut q = DMatrix::zeros(s, s);
        for j in 0..s {
            let e = DVector::from_fn(s, |i, _| if i == j { 1.0 } else { 0.0 });
            q.set_column(j, &self.q_apply(&e));
        }
        q
    }
}

/// Adjusted intercept `mu = <1, y>_Q / <1, 1>_Q`.
pub fn intercept(q: &QFactor, y: &DVector<f64>) -> Result<f64> {
    let s = q.rows();
    if y.len() != s {
        return Err(Error::invalid("outcome length does not match design rows"));
    }
    let ones = DVector::from_element(s, 1.0);
    let q_one = q.q_apply(&ones);
    let denom = ones.dot(&q_one);
    if !(denom > q.tol()) {
        return Err(Error::degenerate(format!("<1,1>_Q = {denom} too small for intercept")));
    }
    Ok(q_one.dot(y) / denom)
}

/// Minimum-norm slope `beta = X_S^+ (y - mu 1)`.
pub fn min_norm_slope(q: &QFactor, y: &DVector<f64>, mu: f64) -> DVector<f64> {
    let centered = DVector::from_fn(y.len(), |i, _| y[i] - mu);
    q.pinv_apply(&centered)
}

// ======================================================================
// ArmData
// ======================================================================

/// A factored arm: the design block and outcomes restricted to one
/// treatment group, with the `Q`-products that downstream sensitivity
/// formulas reuse.
#[derive(Debug, Clone)]
pub struct ArmData {
    pub xs: DMatrix<f64>,
    pub ys: DVector<f64>,
    pub q: QFactor,
    pub mu_hat: f64,
    /// `y - mu 1`.
    pub y_centered: DVector<f64>,
    /// `Q 1`.
    pub q_one: DVector<f64>,
    /// `Q (y - mu 1)`.
    pub q_yc: DVector<f64>,
    /// `<1, 1>_Q`.
    pub one_q_one: f64,
}

impl ArmData {
    pub fn new(xs: DMatrix<f64>, ys: DVector<f64>, tol: f64) -> Result<Self> {
        if xs.nrows() != ys.len() {
            return Err(Error::invalid("arm design and outcome sizes differ"));
        }
        let q = QFactor::new(&xs, tol)?;
        let mu_hat = intercept(&q, &ys)?;
        let s = xs.nrows();
        let ones = DVector::from_element(s, 1.0);
        let q_one = q.q_apply(&ones);
        let one_q_one = ones.dot(&q_one);
        let y_centered = DVector::from_fn(s, |i, _| ys[i] - mu_hat);
        let q_yc = q.q_apply(&y_centered);
        if !mu_hat.is_finite() {
            return Err(Error::NonFinite("arm intercept".into()));
        }
        Ok(ArmData { xs, ys, q, mu_hat, y_centered, q_one, q_yc, one_q_one })
    }

    /// Arm with row `pos` removed.
    pub fn without_row(&self, pos: usize) -> Result<ArmData> {
        let s = self.xs.nrows();
        assert!(pos < s, "row index out of range");
        if s < 2 {
            return Err(Error::invalid("cannot delete from a single-row arm"));
        }
        let xs = self.xs.clone().remove_row(pos);
        let ys = self.ys.clone().remove_row(pos);
        ArmData::new(xs, ys, self.q.tol())
    }

    /// Arm with the row `(x, y)` appended at the end.
    pub fn with_row(&self, x: &DVector<f64>, y: f64) -> Result<ArmData> {
        assert_eq!(x.len(), self.xs.ncols(), "appended covariate length mismatch");
        let s = self.xs.nrows();
        let mut xs = self.xs.clone().insert_row(s, 0.0);
        for j in 0..x.len() {
            xs[(s, j)] = x[j];
        }
        let ys = self.ys.clone().insert_row(s, y);
        ArmData::new(xs, ys, self.q.tol())
    }

    /// Residual scale `R = ||y^c||_Q / ||1||_Q`.
    pub fn residual_scale(&self) -> f64 {
        (self.y_centered.dot(&self.q_yc).max(0.0) / self.one_q_one).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_matrix(rng: &mut impl Rng, m: usize, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| {
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)
        })
    }

    fn check_penrose(a: &DMatrix<f64>, ap: &DMatrix<f64>, tol: f64) {
        let aapa = a * ap * a;
        let apaap = ap * a * ap;
        let aap = a * ap;
        let apa = ap * a;
        assert!((aapa - a).norm() <= tol * (1.0 + a.norm()), "A A+ A != A");
        assert!((apaap - ap).norm() <= tol * (1.0 + ap.norm()), "A+ A A+ != A+");
        assert!((aap.transpose() - &aap).norm() <= tol * (1.0 + aap.norm()), "A A+ not symmetric");
        assert!((apa.transpose() - &apa).norm() <= tol * (1.0 + apa.norm()), "A+ A not symmetric");
    }

    #[test]
    fn pinv_satisfies_penrose_conditions() {
        let mut rng = crate::rng::derive_rng(3, &[1]);
        for trial in 0..120 {
            let m = 1 + (trial % 6);
            let n = 1 + (trial % 5);
            let mut a = random_matrix(&mut rng, m, n);
            if trial % 3 == 0 && n > 1 {
                // Force rank deficiency: duplicate a column.
                let c0 = a.column(0).into_owned();
                a.set_column(n - 1, &c0);
            }
            let ap = pinv(&a, DEFAULT_TOL);
            check_penrose(&a, &ap, 1e-8);
        }
    }

    #[test]
    fn pinv_of_empty_and_zero() {
        let a = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(pinv(&a, DEFAULT_TOL).shape(), (0, 3));
        let z = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(pinv(&z, DEFAULT_TOL), DMatrix::zeros(3, 2));
    }

    #[test]
    fn greville_append_matches_fresh_pinv() {
        let mut rng = crate::rng::derive_rng(5, &[2]);
        for trial in 0..100 {
            let m = 2 + (trial % 5);
            let k = trial % 4;
            let a = random_matrix(&mut rng, m, k);
            let new_col = if trial % 2 == 0 {
                // In-span column: c = 0 branch.
                if k == 0 {
                    DVector::zeros(m)
                } else {
                    &a * random_matrix(&mut rng, k, 1).column(0).into_owned()
                }
            } else {
                random_matrix(&mut rng, m, 1).column(0).into_owned()
            };
            let ap = pinv(&a, DEFAULT_TOL);
            let updated = greville_append(&ap, &a, &new_col, DEFAULT_TOL);
            let atilde = {
                let mut t = a.clone().insert_column(k, 0.0);
                t.set_column(k, &new_col);
                t
            };
            let fresh = pinv(&atilde, DEFAULT_TOL);
            assert!(
                (&updated - &fresh).norm() <= 1e-7 * (1.0 + fresh.norm()),
                "append mismatch at trial {trial}: {}",
                (&updated - &fresh).norm()
            );
        }
    }

    #[test]
    fn greville_delete_matches_fresh_pinv() {
        let mut rng = crate::rng::derive_rng(7, &[3]);
        for trial in 0..100 {
            let m = 2 + (trial % 5);
            let k = 1 + (trial % 4);
            let a = random_matrix(&mut rng, m, k);
            let last = if trial % 2 == 0 && k > 1 {
                let w = random_matrix(&mut rng, k - 1, 1).column(0).into_owned();
                a.columns(0, k - 1) * w
            } else {
                random_matrix(&mut rng, m, 1).column(0).into_owned()
            };
            let atilde = {
                let mut t = a.clone().insert_column(k, 0.0);
                t.set_column(k, &last);
                t
            };
            let ap_tilde = pinv(&atilde, DEFAULT_TOL);
            let downdated = greville_delete(&ap_tilde, &atilde, DEFAULT_TOL);
            let fresh = pinv(&a, DEFAULT_TOL);
            assert!(
                (&downdated - &fresh).norm() <= 1e-7 * (1.0 + fresh.norm()),
                "delete mismatch at trial {trial}: {}",
                (&downdated - &fresh).norm()
            );
        }
    }

    #[test]
    fn append_then_delete_round_trips() {
        let mut rng = crate::rng::derive_rng(9, &[4]);
        for trial in 0..60 {
            let m = 2 + (trial % 4);
            let k = trial % 3;
            let a = random_matrix(&mut rng, m, k);
            let col = random_matrix(&mut rng, m, 1).column(0).into_owned();
            let ap = pinv(&a, DEFAULT_TOL);
            let appended = greville_append(&ap, &a, &col, DEFAULT_TOL);
            let atilde = {
                let mut t = a.clone().insert_column(k, 0.0);
                t.set_column(k, &col);
                t
            };
            let back = greville_delete(&appended, &atilde, DEFAULT_TOL);
            assert!((&back - &ap).norm() <= 1e-7 * (1.0 + ap.norm()));
        }
    }

    #[test]
    fn branch_selection_examples() {
        // Single centered column: ones vector survives Q, M branch.
        let x = DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 0.0]);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        assert_eq!(q.branch(), QBranch::MBranch);

        // Ones column: span contains 1, K branch.
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        assert_eq!(q.branch(), QBranch::KBranch);

        // Zero design: Q = I, M branch, rank 0.
        let x = DMatrix::zeros(4, 2);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        assert_eq!(q.branch(), QBranch::MBranch);
        assert_eq!(q.rank(), 0);
        let v = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!((q.q_apply(&v) - &v).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn q_apply_worked_example() {
        // X = (1,-1,0)^T gives Q = I - x x^T/2; Q(2,0,4) = (1,1,4).
        let x = DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 0.0]);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        let v = DVector::from_column_slice(&[2.0, 0.0, 4.0]);
        let qv = q.q_apply(&v);
        assert_abs_diff_eq!(qv[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qv[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qv[2], 4.0, epsilon = 1e-12);
        let ones = DVector::from_element(3, 1.0);
        assert_abs_diff_eq!(q.q_inner(&ones, &ones), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn q_apply_matches_dense_oracle_both_branches() {
        let mut rng = crate::rng::derive_rng(13, &[5]);
        for trial in 0..80 {
            let s = 2 + (trial % 5);
            // K branch half the time: p >= s makes rows generically independent
            // and the span all of R^s.
            let p = if trial % 2 == 0 { s + 2 } else { 1 + (trial % s.max(2)).min(s - 1) };
            let xs = random_matrix(&mut rng, s, p);
            let q = QFactor::new(&xs, DEFAULT_TOL).unwrap();
            let xp = pinv(&xs, DEFAULT_TOL);
            let dense = match q.branch() {
                QBranch::MBranch => DMatrix::identity(s, s) - &xs * &xp,
                QBranch::KBranch => pinv(&(&xs * xs.transpose()), DEFAULT_TOL),
            };
            let v = random_matrix(&mut rng, s, 1).column(0).into_owned();
            let fast = q.q_apply(&v);
            let slow = &dense * &v;
            assert!((fast - slow).norm() <= 1e-8 * (1.0 + dense.norm() * v.norm()));
            for i in 0..s {
                let scale = 1.0 + dense[(i, i)].abs();
                assert!(
                    (q.q_diag(i) - dense[(i, i)]).abs() <= 1e-8 * scale,
                    "q_diag mismatch at {i}: {} vs {}",
                    q.q_diag(i),
                    dense[(i, i)]
                );
            }
        }
    }

    #[test]
    fn intercept_m_branch_example() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let y = DVector::from_column_slice(&[2.0, 0.0]);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        let mu = intercept(&q, &y).unwrap();
        assert_abs_diff_eq!(mu, 1.0, epsilon = 1e-12);
        let beta = min_norm_slope(&q, &y, mu);
        assert_abs_diff_eq!(beta[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn intercept_k_branch_grid_oracle() {
        // Interpolating design: intercept minimizes ||X^+ (y - mu 1)|| among
        // exact fits. Check against a brute-force grid search over mu.
        let mut rng = crate::rng::derive_rng(17, &[6]);
        for _ in 0..20 {
            let s = 3;
            let p = 6;
            let xs = random_matrix(&mut rng, s, p);
            let y = random_matrix(&mut rng, s, 1).column(0).into_owned();
            let q = QFactor::new(&xs, DEFAULT_TOL).unwrap();
            assert_eq!(q.branch(), QBranch::KBranch);
            let mu = intercept(&q, &y).unwrap();
            let xp = pinv(&xs, DEFAULT_TOL);
            let slope_norm = |m: f64| {
                let centered = DVector::from_fn(s, |i, _| y[i] - m);
                (&xp * centered).norm_squared()
            };
            // Coarse grid, then parabolic refinement around the best point.
            let mut best = (f64::INFINITY, 0.0);
            let lo = mu - 5.0;
            let hi = mu + 5.0;
            let grid = 20_000;
            for g in 0..=grid {
                let m = lo + (hi - lo) * g as f64 / grid as f64;
                let v = slope_norm(m);
                if v < best.0 {
                    best = (v, m);
                }
            }
            assert_abs_diff_eq!(mu, best.1, epsilon = 2e-3);
            assert!(slope_norm(mu) <= best.0 + 1e-9);
        }
    }

    #[test]
    fn intercept_degenerate_design_errors() {
        // Design whose single column is the ones vector scaled: K branch with
        // fine denominator. To get degeneracy, use M branch where Q1 ~ 0 is
        // impossible by construction, so instead check the error path via a
        // K-branch-adjacent M design: column nearly equal to 1.
        let eps = 1e-13;
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0 + eps]);
        let q = QFactor::new(&x, DEFAULT_TOL).unwrap();
        if q.branch() == QBranch::MBranch {
            let y = DVector::from_column_slice(&[1.0, 2.0]);
            assert!(matches!(intercept(&q, &y), Err(Error::DegenerateDesign(_))));
        }
    }

    #[test]
    fn arm_data_caches_are_consistent() {
        let xs = DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 0.0]);
        let ys = DVector::from_column_slice(&[2.0, 0.0, 4.0]);
        let arm = ArmData::new(xs, ys, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(arm.mu_hat, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(arm.one_q_one, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(arm.q_one[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(arm.q_yc[0], -1.0, epsilon = 1e-12);
    }
}
