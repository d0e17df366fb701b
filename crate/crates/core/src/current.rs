//! Boundary probability current as a hermitian form on the trace vector.
//!
//! The trace vector collects `(-i l d/dx)^n psi_m(0)` for every component `m`
//! and every `n < N_m`. In those variables the current through the boundary
//! is `Psi^H J Psi` with a hermitian matrix `J(l)` assembled from the
//! coefficients of the Hamiltonian.

use crate::error::{Error, Result};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{hermitian_eigen, CMatrix, CVector, C64};

const DEGENERACY_TOL: f64 = 1e-10;

/// Ordering of the trace-vector slots: by derivative order `n`, then by
/// component index `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLayout {
    slots: Vec<(usize, usize)>,
    index: Vec<Vec<usize>>,
}

impl TraceLayout {
    pub fn new(top_orders: &[usize]) -> Self {
        let big_n = top_orders.iter().copied().max().unwrap_or(0);
        let mut slots = Vec::new();
        let mut index = vec![Vec::new(); top_orders.len()];
        for n in 0..big_n {
            for (m, &nm) in top_orders.iter().enumerate() {
                if n < nm {
                    index[m].push(slots.len());
                    slots.push((n, m));
                }
            }
        }
        Self { slots, index }
    }

    /// `(n, m)` pairs in slot order.
    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Slot holding derivative order `n` of component `m`.
    pub fn slot(&self, m: usize, n: usize) -> Option<usize> {
        self.index.get(m).and_then(|v| v.get(n)).copied()
    }

    /// Trace of the plane wave `chi e^{i p x}` at `x = 0`: slot `(n, m)` holds
    /// `(l p)^n chi_m`.
    pub fn plane_wave(&self, p: C64, chi: &CVector, l: f64) -> CVector {
        let lp = p * l;
        CVector::from_iterator(
            self.len(),
            self.slots.iter().map(|&(n, m)| lp.powu(n as u32) * chi[m]),
        )
    }
}

/// Boundary values `(-i l d/dx)^n psi_m(0)` in [`TraceLayout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTraceVector {
    pub values: CVector,
    pub l: f64,
}

impl BoundaryTraceVector {
    pub fn new(values: CVector, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("length scale must be positive, got {l}")));
        }
        Ok(Self { values, l })
    }
}

/// Assemble `J(l)` without checking that it is nondegenerate.
///
/// The block coupling derivative orders `a` (row) and `b` (column) is
/// `h_{a+b+1} / l^{a+b}`, restricted to the components that carry those
/// derivatives.
pub fn assemble_current_matrix(h: &PolyMatrixHamiltonian, l: f64) -> (TraceLayout, CMatrix) {
    let layout = TraceLayout::new(h.top_orders());
    let big_n = h.max_order();
    let coeffs = h.coeffs();
    let j = CMatrix::from_fn(layout.len(), layout.len(), |r, c| {
        let (a, m) = layout.slots[r];
        let (b, mp) = layout.slots[c];
        let order = a + b + 1;
        if order > big_n {
            C64::new(0.0, 0.0)
        } else {
            coeffs[order][(m, mp)] / l.powi((a + b) as i32)
        }
    });
    (layout, j)
}

/// Assemble `J(l)` and check it is nondegenerate.
pub fn build_current_matrix(h: &PolyMatrixHamiltonian, l: f64) -> Result<(TraceLayout, CMatrix)> {
    check_length(l)?;
    let (layout, j) = assemble_current_matrix(h, l);
    let (vals, _) = hermitian_eigen(&equilibrate(&j));
    check_nondegenerate(&vals)?;
    Ok((layout, j))
}

fn check_length(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("length scale must be positive, got {l}")))
    }
}

/// Symmetric diagonal rescaling `S J S` (Ruiz iteration) that brings every
/// row maximum close to one. A congruence, so the inertia is unchanged, while
/// the spread `J(l) = D J(1) D` picks up from powers of `l` is removed.
fn equilibrate(j: &CMatrix) -> CMatrix {
    let n = j.nrows();
    let mut a = j.clone();
    for _ in 0..30 {
        let scale: Vec<f64> = (0..n)
            .map(|r| {
                let m = (0..n).fold(0.0_f64, |acc, c| acc.max(a[(r, c)].norm()));
                if m > 0.0 { 1.0 / m.sqrt() } else { 1.0 }
            })
            .collect();
        if scale.iter().all(|s| (s - 1.0).abs() < 1e-3) {
            break;
        }
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] *= scale[r] * scale[c];
            }
        }
    }
    a
}

fn check_nondegenerate(vals: &[f64]) -> Result<()> {
    let max_abs = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_abs = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if vals.is_empty() || min_abs <= DEGENERACY_TOL * max_abs || max_abs == 0.0 {
        return Err(Error::DegenerateCurrentMatrix { min_abs, max_abs });
    }
    Ok(())
}

/// The sesquilinear current `Psi_a^H J Psi_b`.
pub fn current_form(
    layout: &TraceLayout,
    j: &CMatrix,
    psi_a: &BoundaryTraceVector,
    psi_b: &BoundaryTraceVector,
) -> Result<C64> {
    let n = layout.len();
    if psi_a.values.len() != n || psi_b.values.len() != n || j.nrows() != n || psi_a.l != psi_b.l {
        return Err(Error::LayoutMismatch);
    }
    Ok(psi_a.values.dotc(&(j * &psi_b.values)))
}

/// Eigen-decomposition of `J` split into right movers (positive eigenvalues)
/// and left movers (negative eigenvalues), with the stretched projections
/// `Psi~_+- = sqrt|J_+-| S_+-^H Psi`.
#[derive(Debug, Clone)]
pub struct CurrentDiagonalization {
    pub layout: TraceLayout,
    pub j_matrix: CMatrix,
    pub l: f64,
    /// Descending.
    pub eigvals: Vec<f64>,
    /// Columns are the eigenvectors, positive eigenvalues first.
    pub eigvecs: CMatrix,
    pub n_plus: usize,
    pub n_minus: usize,
    /// `N+ x N` map onto right movers.
    pub t_plus: CMatrix,
    /// `N- x N` map onto left movers.
    pub t_minus: CMatrix,
    hamiltonian: Option<PolyMatrixHamiltonian>,
}

/// Diagonalize a current matrix.
pub fn diagonalize_current(layout: &TraceLayout, j: &CMatrix, l: f64) -> Result<CurrentDiagonalization> {
    check_length(l)?;
    if j.nrows() != layout.len() || j.ncols() != layout.len() {
        return Err(Error::LayoutMismatch);
    }
    let (balanced, _) = hermitian_eigen(&equilibrate(j));
    check_nondegenerate(&balanced)?;
    let (eigvals, eigvecs) = hermitian_eigen(j);
    let n_plus = eigvals.iter().filter(|&&v| v > 0.0).count();
    let balanced_plus = balanced.iter().filter(|&&v| v > 0.0).count();
    if n_plus != balanced_plus || eigvals.iter().any(|&v| v == 0.0) {
        let max_abs = eigvals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let min_abs = eigvals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        return Err(Error::DegenerateCurrentMatrix { min_abs, max_abs });
    }
    let n_minus = eigvals.len() - n_plus;
    let stretched = |k: usize| -> CVector { eigvecs.column(k).conjugate() * C64::new(eigvals[k].abs().sqrt(), 0.0) };
    let mut t_plus = CMatrix::zeros(n_plus, layout.len());
    for k in 0..n_plus {
        t_plus.set_row(k, &stretched(k).transpose());
    }
    let mut t_minus = CMatrix::zeros(n_minus, layout.len());
    for k in 0..n_minus {
        t_minus.set_row(k, &stretched(n_plus + k).transpose());
    }
    Ok(CurrentDiagonalization {
        layout: layout.clone(),
        j_matrix: j.clone(),
        l,
        eigvals,
        eigvecs,
        n_plus,
        n_minus,
        t_plus,
        t_minus,
        hamiltonian: None,
    })
}

impl CurrentDiagonalization {
    /// Build and diagonalize `J(l)` for `h`, keeping `h` attached so that
    /// boundary conditions built on top can be handed to the spectral solvers.
    pub fn for_hamiltonian(h: &PolyMatrixHamiltonian, l: f64) -> Result<Self> {
        let (layout, j) = build_current_matrix(h, l)?;
        let mut diag = diagonalize_current(&layout, &j, l)?;
        diag.hamiltonian = Some(h.clone());
        Ok(diag)
    }

    pub fn hamiltonian(&self) -> Option<&PolyMatrixHamiltonian> {
        self.hamiltonian.as_ref()
    }

    pub fn nc(&self) -> usize {
        self.layout.len()
    }

    /// `(Psi~_+, Psi~_-)` of a trace vector.
    pub fn project(&self, psi: &CVector) -> (CVector, CVector) {
        (&self.t_plus * psi, &self.t_minus * psi)
    }

    /// Inverse of the stacked map `[T_+; T_-]`: `Psi = W (Psi~_+; Psi~_-)`.
    pub fn inverse_stretch(&self) -> CMatrix {
        let n = self.nc();
        let mut w = CMatrix::zeros(n, n);
        for k in 0..n {
            let scale = C64::new(1.0 / self.eigvals[k].abs().sqrt(), 0.0);
            w.set_column(k, &(self.eigvecs.column(k) * scale));
        }
        w
    }

    /// `|| J ||` as the largest eigenvalue magnitude.
    pub fn norm(&self) -> f64 {
        self.eigvals.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

/// Mover counts `(N+, N-)` at each length scale; errors if they differ.
pub fn sign_structure_invariance(h: &PolyMatrixHamiltonian, l_values: &[f64]) -> Result<(usize, usize)> {
    let mut distinct: Vec<f64> = l_values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidParameter("need at least two distinct length scales".into()));
    }
    let mut seen = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let (layout, j) = build_current_matrix(h, l)?;
        let d = diagonalize_current(&layout, &j, l)?;
        seen.push((l, d.n_plus, d.n_minus));
    }
    let first = (seen[0].1, seen[0].2);
    if seen.iter().all(|s| (s.1, s.2) == first) {
        Ok(first)
    } else {
        Err(Error::SignStructureChanged(seen))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs, ONE, ZERO};

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    fn quadratic(h2: f64) -> PolyMatrixHamiltonian {
        PolyMatrixHamiltonian::new(1, vec![2], vec![scalar(0.0), scalar(0.0), scalar(h2)]).unwrap()
    }

    fn linear() -> PolyMatrixHamiltonian {
        let h0 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let h1 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        PolyMatrixHamiltonian::new(2, vec![1, 1], vec![h0, h1]).unwrap()
    }

    #[test]
    fn layout_orders_by_derivative_then_component() {
        let layout = TraceLayout::new(&[1, 2]);
        assert_eq!(layout.slots(), &[(0, 0), (0, 1), (1, 1)]);
        assert_eq!(layout.slot(1, 1), Some(2));
        assert_eq!(layout.slot(0, 1), None);
    }

    #[test]
    fn quadratic_current_matrix() {
        let (_, j) = build_current_matrix(&quadratic(1.5), 1.0).unwrap();
        assert_eq!(j, CMatrix::from_row_slice(2, 2, &[ZERO, c(1.5, 0.0), c(1.5, 0.0), ZERO]));
        let (_, j2) = build_current_matrix(&quadratic(1.5), 3.0).unwrap();
        assert!((j2[(0, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_current_matrix_is_velocity() {
        let (_, j) = build_current_matrix(&linear(), 1.0).unwrap();
        assert_eq!(j, CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]));
    }

    #[test]
    fn mixed_order_current_matrix() {
        let (a, b, cc, d) = (c(0.7, 0.0), c(0.2, 0.3), c(-1.1, 0.0), c(2.0, 0.0));
        let h0 = CMatrix::zeros(2, 2);
        let h1 = CMatrix::from_row_slice(2, 2, &[a, b, b.conj(), cc]);
        let h2 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, d]);
        let h = PolyMatrixHamiltonian::new(2, vec![1, 2], vec![h0, h1, h2]).unwrap();
        let (_, j) = build_current_matrix(&h, 1.0).unwrap();
        let expected = CMatrix::from_row_slice(3, 3, &[a, b, ZERO, b.conj(), cc, d, ZERO, d, ZERO]);
        assert_eq!(j, expected);
    }

    #[test]
    fn current_form_examples() {
        let h = linear();
        let d = CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let right = BoundaryTraceVector::new(CVector::from_vec(vec![ONE, ZERO]), 1.0).unwrap();
        let mixed = BoundaryTraceVector::new(CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]), 1.0).unwrap();
        assert_eq!(current_form(&d.layout, &d.j_matrix, &right, &right).unwrap(), ONE);
        assert!(current_form(&d.layout, &d.j_matrix, &mixed, &mixed).unwrap().norm() < 1e-15);

        let q = CurrentDiagonalization::for_hamiltonian(&quadratic(1.0), 1.0).unwrap();
        let t = BoundaryTraceVector::new(CVector::from_vec(vec![ONE, ONE]), 1.0).unwrap();
        assert_eq!(current_form(&q.layout, &q.j_matrix, &t, &t).unwrap(), c(2.0, 0.0));
        let short = BoundaryTraceVector::new(CVector::from_vec(vec![ONE]), 1.0).unwrap();
        assert_eq!(current_form(&q.layout, &q.j_matrix, &short, &t), Err(Error::LayoutMismatch));
    }

    #[test]
    fn diagonalize_offdiagonal_current() {
        let layout = TraceLayout::new(&[2]);
        let j = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let d = diagonalize_current(&layout, &j, 1.0).unwrap();
        assert_eq!((d.n_plus, d.n_minus), (1, 1));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.eigvals[0] - 1.0).abs() < 1e-15 && (d.eigvals[1] + 1.0).abs() < 1e-15);
        assert!((d.eigvecs[(0, 0)] - c(s, 0.0)).norm() < 1e-15);
        assert!((d.eigvecs[(1, 0)] - c(s, 0.0)).norm() < 1e-15);
        assert!((d.eigvecs[(0, 1)] - c(s, 0.0)).norm() < 1e-15);
        assert!((d.eigvecs[(1, 1)] + c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_currents() {
        let layout = TraceLayout::new(&[1, 1]);
        let j = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let d = diagonalize_current(&layout, &j, 1.0).unwrap();
        assert_eq!(d.eigvecs, CMatrix::identity(2, 2));
        assert_eq!(d.t_plus, CMatrix::from_row_slice(1, 2, &[ONE, ZERO]));
        assert_eq!(d.t_minus, CMatrix::from_row_slice(1, 2, &[ZERO, ONE]));

        let layout3 = TraceLayout::new(&[1, 1, 1]);
        let j3 = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, -ONE]));
        let d3 = diagonalize_current(&layout3, &j3, 1.0).unwrap();
        assert_eq!((d3.n_plus, d3.n_minus), (2, 1));
    }

    #[test]
    fn inverse_stretch_inverts_projections() {
        let d = CurrentDiagonalization::for_hamiltonian(&quadratic(2.0), 0.7).unwrap();
        let mut t = CMatrix::zeros(2, 2);
        t.set_row(0, &d.t_plus.row(0));
        t.set_row(1, &d.t_minus.row(0));
        let prod = t * d.inverse_stretch();
        assert!(max_abs(&(prod - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn sign_structure_examples() {
        let q4 = PolyMatrixHamiltonian::new(
            1,
            vec![4],
            vec![scalar(0.0), scalar(0.0), scalar(1.0), scalar(0.0), scalar(1.0)],
        )
        .unwrap();
        assert_eq!(sign_structure_invariance(&q4, &[0.1, 1.0, 10.0]).unwrap(), (2, 2));
        assert_eq!(sign_structure_invariance(&quadratic(1.0), &[0.5, 2.0]).unwrap(), (1, 1));
        assert_eq!(sign_structure_invariance(&linear(), &[1.0, 7.0]).unwrap(), (1, 1));
        assert!(sign_structure_invariance(&linear(), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn wide_length_scale_spread_is_not_degeneracy() {
        // at l = 1e4 the raw eigenvalues span twelve decades although the top
        // block is a clean 1
        let h = PolyMatrixHamiltonian::new(
            1,
            vec![3],
            vec![scalar(0.0), scalar(0.01), scalar(0.0), scalar(1.0)],
        )
        .unwrap();
        let d = CurrentDiagonalization::for_hamiltonian(&h, 1e4).unwrap();
        assert!(d.eigvals[2].abs() < 1e-10 * d.eigvals[0]);
        assert_eq!((d.n_plus, d.n_minus), (2, 1));
        let (layout, mut j) = assemble_current_matrix(&h, 1.0);
        j[(2, 0)] = ZERO;
        j[(0, 2)] = ZERO;
        j[(1, 1)] = ZERO;
        assert!(matches!(diagonalize_current(&layout, &j, 1.0), Err(Error::DegenerateCurrentMatrix { .. })));
    }
}
