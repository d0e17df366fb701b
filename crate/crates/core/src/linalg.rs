//! Dense complex linear-algebra helpers shared by the physics modules.
//!
//! Everything here works on small matrices (sizes up to a few dozen), so the
//! routines favour robustness and determinism over speed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Relative gap below which two eigenvalues are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |m - m^H|` entrywise.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `max |u^H u - 1|` entrywise.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Multiply a vector by a unit phase so that its largest-magnitude entry is
/// real and positive. Ties (within 1e-8 relative) resolve to the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let phase = phase_factor(v);
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// The unit factor applied by [`fix_phase`].
pub fn phase_factor(v: &CVector) -> C64 {
    let largest = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if largest == 0.0 {
        return ONE;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= largest * (1.0 - 1e-8))
        .unwrap_or(0);
    v[pivot].conj() / v[pivot].norm()
}

/// Eigen-decomposition of a hermitian matrix with a reproducible basis.
///
/// Eigenvalues come back sorted descending. Inside a numerically degenerate
/// cluster the basis is rebuilt by Gram-Schmidt on the cluster projector
/// applied to the unit vectors `e_1, e_2, ...` in order, and every
/// eigenvector gets [`fix_phase`].
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut vectors = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end - 1] - values[end]).abs() < CLUSTER_TOL * scale {
            end += 1;
        }
        if end - start == 1 {
            let mut v: CVector = eig.eigenvectors.column(order[start]).into_owned();
            v /= c(v.norm(), 0.0);
            fix_phase(&mut v);
            vectors.set_column(start, &v);
        } else {
            let cols: Vec<CVector> = order[start..end]
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect();
            let mut projector = CMatrix::zeros(n, n);
            for v in &cols {
                projector += v * v.adjoint();
            }
            let basis = canonical_basis(&projector, end - start);
            for (offset, v) in basis.into_iter().enumerate() {
                vectors.set_column(start + offset, &v);
            }
        }
        start = end;
    }
    (values, vectors)
}

fn canonical_basis(projector: &CMatrix, dim: usize) -> Vec<CVector> {
    let n = projector.nrows();
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    for k in 0..n {
        if basis.len() == dim {
            break;
        }
        let mut v: CVector = projector.column(k).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= c(norm, 0.0);
            fix_phase(&mut v);
            basis.push(v);
        }
    }
    basis
}

/// Full singular value decomposition `m = u * diag(s) * v^H` with singular
/// values sorted descending and a square `v` (the matrix is zero-padded when
/// it has fewer rows than columns, so the kernel is always available).
pub struct FullSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn full_svd(m: &CMatrix) -> FullSvd {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u_sorted = CMatrix::zeros(u.nrows(), k);
    let mut v_sorted = CMatrix::zeros(cols, k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).adjoint());
    }
    if rows < cols {
        u_sorted = u_sorted.rows(0, rows).into_owned();
    }
    FullSvd {
        u: u_sorted,
        singular_values,
        v: v_sorted,
    }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = m.ncols();
    let svd = full_svd(m);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 {
        0
    } else {
        svd.singular_values
            .iter()
            .filter(|&&x| x > rel_tol * top)
            .count()
    };
    svd.v.columns(r, cols - r).into_owned()
}

/// Orthonormal basis (as rows) of the row space of `m`.
pub fn row_space_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let svd = full_svd(m);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 {
        0
    } else {
        svd.singular_values
            .iter()
            .filter(|&&x| x > rel_tol * top)
            .count()
    };
    svd.v.columns(0, r).adjoint()
}

/// Gram-Schmidt on the rows of `m`, keeping the row order. Rows that are
/// linearly dependent on earlier ones (relative 1e-10) are dropped.
pub fn orthonormalize_rows(m: &CMatrix) -> CMatrix {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let mut rows: Vec<CVector> = Vec::new();
    for i in 0..m.nrows() {
        let mut v: CVector = m.row(i).transpose().into_owned();
        for _ in 0..2 {
            for b in &rows {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-10 * scale {
            v /= c(norm, 0.0);
            rows.push(v);
        }
    }
    let mut out = CMatrix::zeros(rows.len(), m.ncols());
    for (i, v) in rows.iter().enumerate() {
        out.set_row(i, &v.transpose());
    }
    out
}

/// Spectral-norm distance between the orthogonal projectors onto the row
/// spaces of `a` and `b` (the sine of the largest principal angle when the
/// dimensions agree, 1 when they do not).
pub fn row_space_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let qa = row_space_basis(a, 1e-10);
    let qb = row_space_basis(b, 1e-10);
    if qa.nrows() != qb.nrows() {
        return 1.0;
    }
    let pa = qa.adjoint() * &qa;
    let pb = qb.adjoint() * &qb;
    singular_values(&(pa - pb)).first().copied().unwrap_or(0.0)
}

/// Nearest unitary matrix in the Frobenius norm (unitary factor of the polar
/// decomposition).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = full_svd(m);
    &svd.u * svd.v.adjoint()
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermitian_eigen_is_descending_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.5, 0.3),
                c(0.0, 0.0),
                c(0.5, -0.3),
                c(-1.0, 0.0),
                c(0.2, 0.0),
                c(0.0, 0.0),
                c(0.2, 0.0),
                c(0.5, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(3, vals.iter().map(|&v| c(v, 0.0))));
        let back = &vecs * diag * vecs.adjoint();
        assert_abs_diff_eq!(max_abs(&(back - &m)), 0.0, epsilon = 1e-12);
        assert!(unitarity_deviation(&vecs) < 1e-12);
    }

    #[test]
    fn degenerate_cluster_gets_canonical_basis() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, vec![1.0, 1.0, -1.0]);
        assert_abs_diff_eq!(max_abs(&(vecs - CMatrix::identity(3, 3))), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn phase_tie_breaks_to_first_index() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::from_vec(vec![c(-s, 0.0), c(s, 0.0)]);
        fix_phase(&mut v);
        assert_abs_diff_eq!(v[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].re, -s, epsilon = 1e-15);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let k = null_space(&m, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-14);
    }

    #[test]
    fn polar_projection_of_scaled_unitary() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, 2.0), ZERO, ZERO, c(3.0, 0.0)]);
        let p = polar_unitary(&u);
        let expected = CMatrix::from_row_slice(2, 2, &[I, ZERO, ZERO, ONE]);
        assert!(max_abs(&(p - expected)) < 1e-14);
    }

    #[test]
    fn general_eigenvalues_of_companion() {
        // p^2 + 1 = 0
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, c(-1.0, 0.0), ZERO]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_abs_diff_eq!(ev[0].im, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1].im, 1.0, epsilon = 1e-14);
    }
}
