//! Boundary conditions `Psi~_+ = U Psi~_-` and classification of arbitrary
//! linear boundary relations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::current::CurrentDiagonalization;
use crate::error::{Error, Result};
use crate::linalg::{
    c, full_svd, null_space, orthonormalize_rows, polar_unitary, row_space_distance, unitarity_deviation,
    CMatrix, CVector, C64,
};

const UNITARITY_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;
const NULL_FORM_TOL: f64 = 1e-10;
const SUBSPACE_TOL: f64 = 1e-10;

/// An admissible boundary condition: a unitary `U` of size `N/2` relating
/// the outgoing (right-mover) amplitudes to the incoming ones.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    diag: CurrentDiagonalization,
    u: CMatrix,
}

impl BoundaryCondition {
    pub fn diag(&self) -> &CurrentDiagonalization {
        &self.diag
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// Number of relations `N/2`.
    pub fn lambda(&self) -> usize {
        self.u.nrows()
    }

    /// For `N = 2`, the angle `nu` in `[0, 2 pi)` with `U = e^{-i nu}`.
    pub fn angle(&self) -> Option<f64> {
        (self.u.nrows() == 1).then(|| canonical_angle(-self.u[(0, 0)].arg()))
    }

    /// `|| Psi~_+ - U Psi~_- ||` for a trace vector.
    pub fn residual(&self, trace: &CVector) -> f64 {
        let (plus, minus) = self.diag.project(trace);
        (plus - &self.u * minus).norm()
    }
}

/// Reduce an angle to `[0, 2 pi)`.
pub fn canonical_angle(nu: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = nu.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}

/// Validate `U` against the mover structure of `diag`.
pub fn standard_bc(diag: &CurrentDiagonalization, u: CMatrix) -> Result<BoundaryCondition> {
    if diag.n_plus != diag.n_minus {
        return Err(Error::UnequalMoverCounts {
            n_plus: diag.n_plus,
            n_minus: diag.n_minus,
        });
    }
    let lambda = diag.n_plus;
    if u.nrows() != lambda || u.ncols() != lambda {
        return Err(Error::WrongDimension {
            expected: lambda,
            found: if u.nrows() != lambda { u.nrows() } else { u.ncols() },
        });
    }
    let deviation = unitarity_deviation(&u);
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(BoundaryCondition { diag: diag.clone(), u })
}

/// The one-parameter family `U = e^{-i nu}` available when `N = 2`.
pub fn u1_bc_from_angle(diag: &CurrentDiagonalization, nu: f64) -> Result<BoundaryCondition> {
    if diag.nc() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: diag.nc(),
        });
    }
    if !nu.is_finite() {
        return Err(Error::InvalidParameter(format!("angle must be finite, got {nu}")));
    }
    let nu = canonical_angle(nu);
    standard_bc(diag, CMatrix::from_element(1, 1, C64::from_polar(1.0, -nu)))
}

/// `B = T_+ - U T_-` with orthonormal rows, so that `B Psi = 0` exactly when
/// the trace vector satisfies the boundary condition.
pub fn raw_relation_matrix(bc: &BoundaryCondition) -> CMatrix {
    orthonormalize_rows(&(&bc.diag.t_plus - &bc.u * &bc.diag.t_minus))
}

/// Verdict on a set of linear boundary relations.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryClassification {
    /// Too few independent relations on one of the mover sectors to force
    /// the current to vanish.
    Insufficient {
        rank_plus: usize,
        rank_minus: usize,
        n_plus: usize,
        n_minus: usize,
    },
    /// The current does not vanish on the allowed subspace; the witness is a
    /// trace vector satisfying the relations with nonzero current.
    NotCurrentConserving { witness: CVector },
    /// The current vanishes, but the allowed subspace is smaller than half
    /// the degrees of freedom (or the mover counts differ).
    SymmetricOnly { subspace_dim: usize },
    /// Equivalent to `Psi~_+ = U Psi~_-`.
    Admissible { u: CMatrix },
}

/// Classify relations `C_+ Psi~_+ = C_- Psi~_-`.
pub fn classify_relations(
    diag: &CurrentDiagonalization,
    c_plus: &CMatrix,
    c_minus: &CMatrix,
) -> Result<BoundaryClassification> {
    let (np, nm) = (diag.n_plus, diag.n_minus);
    if c_plus.nrows() != c_minus.nrows() || c_plus.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "relation blocks have {} and {} rows",
            c_plus.nrows(),
            c_minus.nrows()
        )));
    }
    if c_plus.ncols() != np || c_minus.ncols() != nm {
        return Err(Error::DimensionMismatch(format!(
            "relation blocks are {}x{} and {}x{}, expected widths {np} and {nm}",
            c_plus.nrows(),
            c_plus.ncols(),
            c_minus.nrows(),
            c_minus.ncols()
        )));
    }
    let rows = c_plus.nrows();
    let mut stacked = CMatrix::zeros(rows, np + nm);
    stacked.view_mut((0, 0), (rows, np)).copy_from(c_plus);
    stacked.view_mut((0, np), (rows, nm)).copy_from(&(-c_minus));

    let scale = full_svd(&stacked).singular_values.first().copied().unwrap_or(0.0);
    let rank_with = |m: &CMatrix| {
        full_svd(m)
            .singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * scale)
            .count()
    };
    let rank_plus = rank_with(c_plus);
    let rank_minus = rank_with(c_minus);
    if scale == 0.0 || rank_plus < np || rank_minus < nm {
        return Ok(BoundaryClassification::Insufficient {
            rank_plus,
            rank_minus,
            n_plus: np,
            n_minus: nm,
        });
    }

    let k = null_space(&stacked, RANK_TOL);
    let dim = k.ncols();
    if dim > 0 {
        let mut g = CMatrix::identity(np + nm, np + nm);
        for i in np..np + nm {
            g[(i, i)] = c(-1.0, 0.0);
        }
        let form = k.adjoint() * g * &k;
        let (vals, vecs) = crate::linalg::hermitian_eigen(&form);
        let (worst, worst_val) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, v)| (i, *v))
            .expect("dim > 0");
        if worst_val.abs() > NULL_FORM_TOL {
            let stretched = &k * vecs.column(worst);
            let witness = diag.inverse_stretch() * stretched;
            return Ok(BoundaryClassification::NotCurrentConserving { witness });
        }
    }
    if np != nm || dim < (np + nm) / 2 {
        return Ok(BoundaryClassification::SymmetricOnly { subspace_dim: dim });
    }
    let top = k.rows(0, np).into_owned();
    let bottom = k.rows(np, nm).into_owned();
    let inv = bottom
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("incoming block of the allowed subspace is singular".into()))?;
    let u = polar_unitary(&(top * inv));
    Ok(BoundaryClassification::Admissible { u })
}

/// Classify relations given directly on the trace vector, `B Psi = 0`.
pub fn classify_trace_relations(diag: &CurrentDiagonalization, b: &CMatrix) -> Result<BoundaryClassification> {
    let (c_plus, c_minus) = split_trace_relations(diag, b)?;
    classify_relations(diag, &c_plus, &c_minus)
}

/// Rewrite `B Psi = 0` as `C_+ Psi~_+ = C_- Psi~_-`.
pub fn split_trace_relations(diag: &CurrentDiagonalization, b: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if b.ncols() != diag.nc() {
        return Err(Error::LayoutMismatch);
    }
    let bw = b * diag.inverse_stretch();
    let c_plus = bw.columns(0, diag.n_plus).into_owned();
    let c_minus = -bw.columns(diag.n_plus, diag.n_minus).into_owned();
    Ok((c_plus, c_minus))
}

/// Canonical current-nullifying relations when the mover counts differ:
/// the first `N_<` amplitudes of the majority sector are tied to the
/// minority sector by `U`, and the remaining majority amplitudes vanish.
/// Returned as `max(N+, N-)` rows acting on the trace vector.
pub fn symmetric_only_bc(diag: &CurrentDiagonalization, u: &CMatrix) -> Result<CMatrix> {
    let (np, nm) = (diag.n_plus, diag.n_minus);
    if np == nm {
        return Err(Error::EqualMoverCounts);
    }
    let (major, minor) = if np > nm {
        (&diag.t_plus, &diag.t_minus)
    } else {
        (&diag.t_minus, &diag.t_plus)
    };
    let small = minor.nrows();
    if u.nrows() != small || u.ncols() != small {
        return Err(Error::WrongDimension {
            expected: small,
            found: u.nrows(),
        });
    }
    let deviation = unitarity_deviation(u);
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NonUnitary { deviation });
    }
    let mut rows = CMatrix::zeros(major.nrows(), diag.nc());
    let tied = major.rows(0, small) - u * minor;
    rows.view_mut((0, 0), (small, diag.nc())).copy_from(&tied);
    let rest = major.nrows() - small;
    rows.view_mut((small, 0), (rest, diag.nc()))
        .copy_from(&major.rows(small, rest));
    Ok(rows)
}

/// Express the same boundary condition with the length scale `l_new`.
///
/// The trace vector rescales slot-wise, `Psi'_(n,m) = (l'/l)^n Psi_(n,m)`, so
/// the relation rows pick up the inverse factor; `U'` is then read off the
/// diagonalization at `l_new` and the row spaces are compared.
pub fn reparameterize_length(bc: &BoundaryCondition, l_new: f64) -> Result<BoundaryCondition> {
    if !(l_new.is_finite() && l_new > 0.0) {
        return Err(Error::InvalidParameter(format!("length scale must be positive, got {l_new}")));
    }
    let h = bc
        .diag
        .hamiltonian()
        .ok_or_else(|| Error::InvalidParameter("boundary condition is not attached to a Hamiltonian".into()))?;
    let new_diag = CurrentDiagonalization::for_hamiltonian(h, l_new)?;
    if new_diag.n_plus != new_diag.n_minus {
        return Err(Error::UnequalMoverCounts {
            n_plus: new_diag.n_plus,
            n_minus: new_diag.n_minus,
        });
    }
    let ratio = bc.diag.l / l_new;
    let mut rescaled = raw_relation_matrix(bc);
    for (col, &(n, _)) in bc.diag.layout.slots().iter().enumerate() {
        let f = ratio.powi(n as i32);
        for row in 0..rescaled.nrows() {
            rescaled[(row, col)] *= f;
        }
    }
    let u = match classify_trace_relations(&new_diag, &rescaled)? {
        BoundaryClassification::Admissible { u } => u,
        _ => return Err(Error::SubspaceMismatch { distance: 1.0 }),
    };
    let new_bc = standard_bc(&new_diag, u)?;
    let distance = row_space_distance(&raw_relation_matrix(&new_bc), &rescaled);
    if distance > SUBSPACE_TOL {
        return Err(Error::SubspaceMismatch { distance });
    }
    Ok(new_bc)
}

/// Haar-distributed unitary matrix, reproducible for a fixed seed.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re * scale, im * scale)
    });
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut out = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            out[(i, j)] *= phase;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::PolyMatrixHamiltonian;
    use crate::linalg::{max_abs, ONE, ZERO};
    use std::f64::consts::PI;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    fn quadratic_diag(l: f64) -> CurrentDiagonalization {
        let h = PolyMatrixHamiltonian::new(1, vec![2], vec![scalar(0.0), scalar(0.0), scalar(1.0)]).unwrap();
        CurrentDiagonalization::for_hamiltonian(&h, l).unwrap()
    }

    fn linear_diag() -> CurrentDiagonalization {
        let h0 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let h1 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let h = PolyMatrixHamiltonian::new(2, vec![1, 1], vec![h0, h1]).unwrap();
        CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap()
    }

    fn three_mode_diag() -> CurrentDiagonalization {
        let h0 = CMatrix::zeros(3, 3);
        let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, -ONE]));
        let h = PolyMatrixHamiltonian::new(3, vec![1, 1, 1], vec![h0, h1]).unwrap();
        CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap()
    }

    #[test]
    fn standard_bc_validation() {
        let d = quadratic_diag(1.0);
        assert!(standard_bc(&d, CMatrix::from_element(1, 1, c(0.0, 1.0))).is_ok());
        let err = standard_bc(&three_mode_diag(), CMatrix::identity(1, 1)).unwrap_err();
        assert_eq!(err, Error::UnequalMoverCounts { n_plus: 2, n_minus: 1 });
        let d2 = linear_diag();
        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(2.0, 0.0)]);
        assert!(matches!(standard_bc(&d2, bad), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn non_unitary_rejected() {
        let h0 = CMatrix::zeros(4, 4);
        let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, -ONE, -ONE]));
        let h = PolyMatrixHamiltonian::new(4, vec![1; 4], vec![h0, h1]).unwrap();
        let d = CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(2.0, 0.0)]);
        assert!(matches!(standard_bc(&d, bad), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn quadratic_raw_relations() {
        let d = quadratic_diag(1.0);
        let b = raw_relation_matrix(&u1_bc_from_angle(&d, -PI / 2.0).unwrap());
        assert!((b[(0, 1)] / b[(0, 0)] - c(0.0, 1.0)).norm() < 1e-14);
        let wall = raw_relation_matrix(&u1_bc_from_angle(&d, PI).unwrap());
        assert!(wall[(0, 1)].norm() < 1e-15);
        let free = raw_relation_matrix(&u1_bc_from_angle(&d, 0.0).unwrap());
        assert!(free[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn linear_raw_relations() {
        let d = linear_diag();
        let nu = 0.7;
        let bc = u1_bc_from_angle(&d, nu).unwrap();
        let b = raw_relation_matrix(&bc);
        assert!((b[(0, 1)] / b[(0, 0)] + C64::from_polar(1.0, -nu)).norm() < 1e-14);
        assert!((bc.angle().unwrap() - nu).abs() < 1e-15);
        assert!((u1_bc_from_angle(&d, -PI / 2.0).unwrap().angle().unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(matches!(u1_bc_from_angle(&three_mode_diag(), 0.0), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn classify_scalar_examples() {
        let d = linear_diag();
        let e = C64::from_polar(1.0, -0.4);
        let one = CMatrix::from_element(1, 1, ONE);
        match classify_relations(&d, &one, &CMatrix::from_element(1, 1, e)).unwrap() {
            BoundaryClassification::Admissible { u } => assert!((u[(0, 0)] - e).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
        let two = CMatrix::from_element(1, 1, c(2.0, 0.0));
        assert!(matches!(
            classify_relations(&d, &one, &two).unwrap(),
            BoundaryClassification::NotCurrentConserving { .. }
        ));
        let zero = CMatrix::from_element(1, 1, ZERO);
        assert!(matches!(
            classify_relations(&d, &one, &zero).unwrap(),
            BoundaryClassification::Insufficient { rank_minus: 0, .. }
        ));
        let cp = CMatrix::from_row_slice(2, 1, &[ONE, ZERO]);
        let cm = CMatrix::from_row_slice(2, 1, &[e, ZERO]);
        match classify_relations(&d, &cp, &cm).unwrap() {
            BoundaryClassification::Admissible { u } => assert!((u[(0, 0)] - e).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn witness_carries_current() {
        let d = linear_diag();
        let one = CMatrix::from_element(1, 1, ONE);
        let two = CMatrix::from_element(1, 1, c(2.0, 0.0));
        let BoundaryClassification::NotCurrentConserving { witness } = classify_relations(&d, &one, &two).unwrap()
        else {
            panic!()
        };
        let j = witness.dotc(&(&d.j_matrix * &witness)).re;
        assert!(j.abs() > 0.1);
        let (p, m) = d.project(&witness);
        assert!((p[0] - m[0] * 2.0).norm() < 1e-12);
    }

    #[test]
    fn symmetric_only_construction() {
        let d = three_mode_diag();
        let rows = symmetric_only_bc(&d, &CMatrix::identity(1, 1)).unwrap();
        assert_eq!(rows.nrows(), 2);
        let expected = CMatrix::from_row_slice(2, 3, &[ONE, ZERO, -ONE, ZERO, ONE, ZERO]);
        assert!(max_abs(&(rows - expected)) < 1e-15);
        let verdict = classify_trace_relations(&d, &symmetric_only_bc(&d, &CMatrix::identity(1, 1)).unwrap());
        assert_eq!(verdict.unwrap(), BoundaryClassification::SymmetricOnly { subspace_dim: 1 });
        assert_eq!(symmetric_only_bc(&linear_diag(), &CMatrix::identity(1, 1)), Err(Error::EqualMoverCounts));
    }

    #[test]
    fn reparameterize_quadratic() {
        let bc = u1_bc_from_angle(&quadratic_diag(1.0), -PI / 2.0).unwrap();
        let moved = reparameterize_length(&bc, 2.0).unwrap();
        let expected = canonical_angle(2.0 * (-2.0_f64).atan());
        assert!((moved.angle().unwrap() - expected).abs() < 1e-12);
        let wall = u1_bc_from_angle(&quadratic_diag(1.0), PI).unwrap();
        assert!((reparameterize_length(&wall, 5.0).unwrap().angle().unwrap() - PI).abs() < 1e-12);
        let lin = u1_bc_from_angle(&linear_diag(), 1.1).unwrap();
        assert!((reparameterize_length(&lin, 9.0).unwrap().angle().unwrap() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn haar_examples() {
        assert!((haar_unitary(1, 3)[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(unitarity_deviation(&haar_unitary(2, 42)) < 1e-12);
        assert_eq!(haar_unitary(3, 1), haar_unitary(3, 1));
        assert!(max_abs(&(haar_unitary(3, 1) - haar_unitary(3, 2))) > 1e-3);
    }
}
