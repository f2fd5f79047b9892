//! Dense factorizations used by the solvers: thin SVD, leading left singular
//! subspaces, economy QR and pseudo-inverse least squares.
//!
//! QR and Cholesky come from `nalgebra`; the SVD is a QR-preconditioned
//! one-sided Jacobi iteration. This module pins the conventions the solvers
//! rely on (descending singular values, a fixed sign per singular pair,
//! nonnegative `diag(R)`).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Thin SVD `m = u · diag(s) · vᵀ` with `k = min(rows, cols)` triplets.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &sigma) in self.s.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= sigma);
        }
        us.matmul_t(&self.v).expect("conformant factors")
    }
}

#[derive(Clone, Debug)]
pub struct QrResult {
    pub q: Matrix,
    pub r: Matrix,
}

/// Thin SVD with singular values sorted nonincreasing. Each left singular
/// vector is signed so its largest-magnitude entry is nonnegative (first one
/// wins on ties), and the matching right vector is flipped with it.
///
/// Tall inputs are reduced by QR and the square factor is diagonalized with
/// one-sided Jacobi rotations, which stays accurate when trailing singular
/// values are exactly zero. Left vectors for (numerically) zero singular
/// values are completed to an orthonormal set.
pub fn svd(m: &Matrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (mut u, s, mut v) = if m.rows() >= m.cols() {
        tall_svd(m)?
    } else {
        let (u, s, v) = tall_svd(&m.transpose())?;
        (v, s, u)
    };
    for j in 0..s.len() {
        let col = u.col(j);
        let mut pivot = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SvdResult { u, s, v })
}

const MAX_SWEEPS: usize = 80;

fn tall_svd(m: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok((Matrix::zeros(rows, 0), Vec::new(), Matrix::zeros(0, 0)));
    }
    let (q, square) = if rows > cols {
        let qr = economy_qr(m)?;
        (Some(qr.q), qr.r)
    } else {
        (None, m.clone())
    };
    let (w, v) = jacobi_columns(square)?;

    let norms: Vec<f64> = (0..cols).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let floor = norms[order[0]] * f64::EPSILON * cols as f64;

    let mut u = Matrix::zeros(cols, cols);
    let mut v_sorted = Matrix::zeros(cols, cols);
    let mut s = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
        let mut col: Vec<f64> = if sigma > floor {
            w.col(src).iter().map(|x| x / sigma).collect()
        } else {
            vec![0.0; cols]
        };
        if !orthonormalize_against(&mut col, &u, dst, 0.5) {
            col = completion_vector(&u, dst);
        }
        u.col_mut(dst).copy_from_slice(&col);
    }
    let u = match q {
        Some(q) => q.matmul(&u)?,
        None => u,
    };
    Ok((u, s, v_sorted))
}

/// Rotates pairs of columns until they are mutually orthogonal; returns the
/// rotated columns and the accumulated rotation.
fn jacobi_columns(mut w: Matrix) -> Result<(Matrix, Matrix)> {
    let n = w.cols();
    let tol = f64::EPSILON * w.rows() as f64;
    // columns below this squared norm are rounding noise and are left alone
    let negligible = (f64::EPSILON * w.fro_norm()).powi(2);
    let mut v = Matrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(Error::Numerical("Jacobi SVD did not converge".into()))
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let (a, b) = (m.get(i, p), m.get(i, q));
        m.set(i, p, c * a - s * b);
        m.set(i, q, s * a + c * b);
    }
}

/// Two Gram–Schmidt passes against the first `k` columns of `basis`, then
/// normalization. False when less than `keep` of the norm of `col` survives.
fn orthonormalize_against(col: &mut [f64], basis: &Matrix, k: usize, keep: f64) -> bool {
    let before = dot(col, col).sqrt();
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for j in 0..k {
            let b = basis.col(j);
            let c = dot(b, col);
            col.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let after = dot(col, col).sqrt();
    if after == 0.0 || after <= keep * before {
        return false;
    }
    col.iter_mut().for_each(|x| *x /= after);
    true
}

/// Unit vector orthogonal to the first `k` columns of `basis`, built from the
/// coordinate axis with the largest residual.
fn completion_vector(basis: &Matrix, k: usize) -> Vec<f64> {
    let n = basis.rows();
    let mut best = (0, -1.0);
    for i in 0..n {
        let leak: f64 = (0..k).map(|j| basis.get(i, j).powi(2)).sum();
        if 1.0 - leak > best.1 {
            best = (i, 1.0 - leak);
        }
    }
    let mut col = vec![0.0; n];
    col[best.0] = 1.0;
    // the best axis keeps a squared residual of at least (n - k)/n
    let ok = orthonormalize_against(&mut col, basis, k, 0.0);
    debug_assert!(ok);
    col
}

/// Ratio `σ_{r+1}/σ_r` with `0/0 = 0`; a missing `σ_{r+1}` counts as zero.
pub fn gap_ratio(s: &[f64], r: usize) -> f64 {
    assert!(r >= 1);
    let sr = s.get(r - 1).copied().unwrap_or(0.0);
    let next = s.get(r).copied().unwrap_or(0.0);
    if next == 0.0 {
        0.0
    } else if sr == 0.0 {
        f64::INFINITY
    } else {
        next / sr
    }
}

/// Top-`r` left singular vectors of `m` together with `σ_{r+1}/σ_r`.
pub fn leading_left_singular_vectors(m: &Matrix, r: usize) -> Result<(Matrix, f64)> {
    let max = m.rows().min(m.cols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let dec = svd(m)?;
    Ok((dec.u.leading_cols(r), gap_ratio(&dec.s, r)))
}

/// Like [`leading_left_singular_vectors`] but accepts any `r ≤ rows`.
///
/// Wide inputs are first compressed by a QR of `mᵀ` (the left singular
/// vectors of `m` are those of `Rᵀ`), and inputs with fewer than `r` columns
/// are padded with zero columns so the returned basis is completed with
/// directions of zero singular value. Returns the full singular spectrum.
pub fn leading_subspace(m: &Matrix, r: usize) -> Result<(Matrix, Vec<f64>)> {
    let rows = m.rows();
    if r == 0 || r > rows {
        return Err(Error::RankOutOfRange { rank: r, max: rows });
    }
    let compact = if m.cols() > 2 * rows {
        let qr = economy_qr(&m.transpose())?;
        qr.r.transpose()
    } else {
        m.clone()
    };
    let padded = if compact.cols() < r {
        let mut p = compact;
        while p.cols() < r {
            p.push_col(&vec![0.0; rows]);
        }
        p
    } else {
        compact
    };
    let dec = svd(&padded)?;
    Ok((dec.u.leading_cols(r), dec.s))
}

/// Economy QR of a tall matrix with `diag(R) ≥ 0`.
pub fn economy_qr(m: &Matrix) -> Result<QrResult> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::DimensionMismatch(format!(
            "economy QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let dec = m.to_nalgebra().qr();
    let mut q = Matrix::from_nalgebra(&dec.q());
    let mut r = Matrix::from_nalgebra(&dec.r());
    for j in 0..cols {
        if r.get(j, j) < 0.0 {
            q.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            for c in 0..cols {
                r.set(j, c, -r.get(j, c));
            }
        }
    }
    Ok(QrResult { q, r })
}

/// Moore–Penrose pseudo-inverse, dropping singular values below `rel_tol·σ₁`.
pub fn pinv(m: &Matrix, rel_tol: f64) -> Result<Matrix> {
    let dec = svd(m)?;
    let cutoff = dec.s.first().copied().unwrap_or(0.0) * rel_tol;
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for (j, &sigma) in dec.s.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        for c in 0..m.rows() {
            let uc = dec.u.get(c, j) / sigma;
            if uc == 0.0 {
                continue;
            }
            for r in 0..m.cols() {
                out.set(r, c, out.get(r, c) + dec.v.get(r, j) * uc);
            }
        }
    }
    Ok(out)
}

pub const PINV_REL_TOL: f64 = 1e-12;

/// Minimum-norm solution of `min_A ‖A·b − x‖_F`, i.e. `x·bᵀ·(b·bᵀ)†`.
pub fn lsq_via_pinv(x: &Matrix, b: &Matrix) -> Result<Matrix> {
    if x.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "least squares: {} vs {} columns",
            x.cols(),
            b.cols()
        )));
    }
    let gram = b.matmul_t(b)?;
    let xbt = x.matmul_t(b)?;
    xbt.matmul(&pinv(&gram, PINV_REL_TOL)?)
}

/// Solves `g·y = rhs` for a symmetric positive definite `g`.
pub(crate) fn spd_solve(g: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let chol = g
        .to_nalgebra()
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gram matrix is not positive definite".into()))?;
    let b = DMatrix::from_column_slice(rhs.len(), 1, rhs);
    Ok(chol.solve(&b).as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_identity_and_diag() {
        let s = svd(&Matrix::identity(3)).unwrap().s;
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let d = svd(&Matrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        for (got, want) in d.s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_deficient_input_reconstructs() {
        // iterate from a converged completion run whose trailing singular
        // values vanish; a bidiagonal SVD got this one badly wrong
        let vals = [
            1.4858915661573457e1, 1.3762654327492962e0, -5.497537809761786e-1, -4.625762256778093e0,
            -1.0926988442789376e1, 3.2353137087837275e1, -8.76779699887652e0, 4.032230702688086e0,
            -1.0971455183164764e1, -3.3175810430823685e0, -3.244189552193165e-1, -1.0874366447966556e1,
            8.573763579197475e0, 3.326923685714978e0, -1.9345650480534044e1, 7.035863171628692e-1,
            4.580655827871052e0, -5.130866769921158e0, 9.67348808059351e0, 1.4511389817887482e1,
            7.499046045544879e-1, 2.3908236010454935e0, -1.8605001645851844e0, -9.24005888625981e-1,
            3.640787962755916e0, 1.3309882585943975e0, -1.382066333466836e0, 1.2829825547786426e0,
            -2.5731683075558065e0, -3.258277073922826e0, 7.81087987636592e-1, 9.86001509218421e-1,
            -7.50244292998315e-1, -5.149531233605502e-1, 1.075611269623363e0, 1.5819139036108032e0,
            -8.306974566387704e-1, 6.368305779061497e-1, -1.3715647120968764e0, -1.3909059906485235e0,
        ];
        let m = Matrix::new(10, 4, vals.to_vec()).unwrap();
        let d = svd(&m).unwrap();
        assert!(d.reconstruct().sub(&m).unwrap().fro_norm() <= 1e-13 * m.fro_norm());
        assert!(d.u.orthonormality_error() < 1e-13);
        assert!(d.v.orthonormality_error() < 1e-13);
        assert!(d.s[2] < 1e-12 * d.s[0]);
    }

    #[test]
    fn exact_zero_singular_values() {
        let a = Matrix::from_fn(6, 2, |i, j| (i + 2 * j) as f64 - 2.5);
        let b = Matrix::from_fn(2, 5, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -0.5 });
        for m in [a.matmul(&b).unwrap(), a.matmul(&b).unwrap().transpose(), Matrix::zeros(4, 3)] {
            let d = svd(&m).unwrap();
            assert!(d.reconstruct().max_abs_diff(&m) < 1e-12);
            assert!(d.u.orthonormality_error() < 1e-13);
            assert!(d.v.orthonormality_error() < 1e-13);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rejects_nan() {
        let mut m = Matrix::identity(2);
        m.set(0, 1, f64::NAN);
        assert!(matches!(svd(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn sign_convention() {
        let m = Matrix::from_fn(4, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let d = svd(&m).unwrap();
        for j in 0..3 {
            let col = d.u.col(j);
            let big = col.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(big >= 0.0);
        }
        assert!(d.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn leading_vectors_of_diag() {
        let (u, gap) = leading_left_singular_vectors(&Matrix::diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        let expect = Matrix::identity(3).leading_cols(2);
        assert!(u.max_abs_diff(&expect) < 1e-14);
        assert!((gap - 0.5).abs() < 1e-14);
        assert!(leading_left_singular_vectors(&Matrix::identity(2), 3).is_err());
    }

    #[test]
    fn leading_vector_of_rank_one() {
        let u = [1.0, -2.0, 2.0];
        let v = [0.5, 1.0, -1.0, 3.0];
        let m = Matrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let (lead, gap) = leading_left_singular_vectors(&m, 1).unwrap();
        let cos: f64 = lead.col(0).iter().zip(&u).map(|(a, b)| a * b / 3.0).sum();
        assert!((cos.abs() - 1.0).abs() < 1e-12);
        assert!(gap < 1e-12);
    }

    #[test]
    fn gap_ratio_conventions() {
        assert_eq!(gap_ratio(&[1.0, 0.0], 1), 0.0);
        assert_eq!(gap_ratio(&[0.0, 0.0], 1), 0.0);
        assert_eq!(gap_ratio(&[2.0], 1), 0.0);
        assert_eq!(gap_ratio(&[2.0, 1.0], 1), 0.5);
    }

    #[test]
    fn qr_small_cases() {
        let m = Matrix::from_rows(&[&[2.0], &[0.0]]).unwrap();
        let qr = economy_qr(&m).unwrap();
        assert!(qr.q.max_abs_diff(&Matrix::from_rows(&[&[1.0], &[0.0]]).unwrap()) < 1e-15);
        assert!((qr.r.get(0, 0) - 2.0).abs() < 1e-15);
        assert!(economy_qr(&Matrix::zeros(2, 3)).is_err());

        let c = std::f64::consts::FRAC_1_SQRT_2;
        let orth = Matrix::from_rows(&[&[c, -c], &[c, c], &[0.0, 0.0]]).unwrap();
        let qr = economy_qr(&orth).unwrap();
        assert!(qr.r.max_abs_diff(&Matrix::identity(2)) < 1e-14);
        assert!(qr.q.max_abs_diff(&orth) < 1e-14);
    }

    #[test]
    fn lsq_edge_cases() {
        let x = Matrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let got = lsq_via_pinv(&x, &Matrix::identity(4)).unwrap();
        assert!(got.max_abs_diff(&x) < 1e-12);
        let zero = lsq_via_pinv(&x, &Matrix::zeros(2, 4)).unwrap();
        assert_eq!(zero, Matrix::zeros(3, 2));
        assert!(lsq_via_pinv(&x, &Matrix::zeros(2, 5)).is_err());
    }

    #[test]
    fn padded_subspace_completes_basis() {
        let m = Matrix::from_fn(4, 1, |i, _| i as f64 + 1.0);
        let (u, s) = leading_subspace(&m, 3).unwrap();
        assert_eq!(u.shape(), (4, 3));
        assert!(u.orthonormality_error() < 1e-12);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn wide_compression_matches_direct() {
        let m = Matrix::from_fn(3, 20, |i, j| ((i + 1) as f64 * (j as f64 * 0.3).sin()) + (j % 3 == i) as u8 as f64);
        let (u1, s1) = leading_subspace(&m, 2).unwrap();
        let d = svd(&m).unwrap();
        for (a, b) in s1.iter().zip(&d.s) {
            assert!((a - b).abs() < 1e-12);
        }
        let proj = u1.t_matmul(&d.u.leading_cols(2)).unwrap();
        let s = svd(&proj).unwrap().s;
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }
}
