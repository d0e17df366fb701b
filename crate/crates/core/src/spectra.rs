//! Bound states on the half-line and eigenstates on a finite segment.
//!
//! At a fixed energy every solution of the bulk equation is a combination of
//! plane waves `chi e^{i p x}` whose momenta solve `det[H(p) - e] = 0`.
//! Imposing the boundary relations on such a combination gives a small
//! linear system; energies where it becomes singular are the discrete
//! eigenvalues.

use rayon::prelude::*;

use crate::boundary::BoundaryCondition;
use crate::current::{CurrentDiagonalization, TraceLayout};
use crate::error::{Error, Result};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{c, eigenvalues, fix_phase, full_svd, phase_factor, CMatrix, CVector, C64, I, ONE};

const ROOT_CLUSTER_TOL: f64 = 1e-8;
const BAND_TOL: f64 = 1e-8;
const ACCEPT_TOL: f64 = 1e-8;
const SEPARATION_TOL: f64 = 1e-10;
const PERTURBATION: f64 = 1e-7;
const MAX_GOLDEN_ITERS: usize = 300;

/// A plane-wave solution `chi e^{i p x}` of the bulk equation at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticularSolution {
    pub p: C64,
    /// Unit norm, user component ordering.
    pub chi: CVector,
    /// `|| (H(p) - e) chi ||`.
    pub residual: f64,
}

/// Companion matrix acting on `y_(n,m) = p^n chi_m` (slots as in
/// [`TraceLayout`] with unit length scale). The top derivative of each
/// component is eliminated through the bulk equation, which is solvable for
/// it because the leading coefficient blocks are nondegenerate.
fn companion(h: &PolyMatrixHamiltonian, energy: C64) -> Result<CMatrix> {
    let layout = TraceLayout::new(h.top_orders());
    let orders = h.top_orders();
    let coeffs = h.coeffs();
    let m = h.m();
    let nc = layout.len();
    let lead = CMatrix::from_fn(m, m, |r, mp| coeffs[orders[mp]][(r, mp)]);
    let rest = CMatrix::from_fn(m, nc, |r, s| {
        let (n, mp) = layout.slots()[s];
        let mut v = -coeffs[n][(r, mp)];
        if n == 0 && r == mp {
            v += energy;
        }
        v
    });
    let top = lead
        .lu()
        .solve(&rest)
        .ok_or_else(|| Error::InvalidParameter("leading coefficient blocks are singular".into()))?;
    let mut a = CMatrix::zeros(nc, nc);
    for (s, &(n, mm)) in layout.slots().iter().enumerate() {
        if n + 1 < orders[mm] {
            let next = layout.slot(mm, n + 1).expect("slot exists");
            a[(s, next)] = ONE;
        } else {
            a.set_row(s, &top.row(mm));
        }
    }
    Ok(a)
}

fn null_vector(h: &PolyMatrixHamiltonian, p: C64, energy: C64) -> ParticularSolution {
    let mut shifted = h.evaluate(p);
    for i in 0..h.m() {
        shifted[(i, i)] -= energy;
    }
    let svd = full_svd(&shifted);
    let mut chi: CVector = svd.v.column(h.m() - 1).into_owned();
    chi /= c(chi.norm(), 0.0);
    fix_phase(&mut chi);
    let residual = (&shifted * &chi).norm();
    ParticularSolution { p, chi, residual }
}

/// All `N` momentum roots at a (possibly complex) energy, sorted by
/// imaginary part and then real part.
pub fn momentum_roots(h: &PolyMatrixHamiltonian, energy: C64) -> Result<Vec<ParticularSolution>> {
    let a = companion(h, energy)?;
    let mut ps = eigenvalues(&a);
    if ps.len() != h.nc() || ps.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::RootCountMismatch {
            expected: h.nc(),
            found: ps.iter().filter(|p| p.re.is_finite() && p.im.is_finite()).count(),
        });
    }
    ps.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let separation = (ps[i] - ps[j]).norm();
            let scale = 1.0_f64.max(ps[i].norm()).max(ps[j].norm());
            if separation <= ROOT_CLUSTER_TOL * scale {
                return Err(Error::DegenerateRootCluster {
                    energy: energy.re,
                    separation,
                });
            }
        }
    }
    Ok(ps.into_iter().map(|p| null_vector(h, p, energy)).collect())
}

/// The `N/2` solutions decaying into `x > 0` at a gap energy.
pub fn decaying_basis(h: &PolyMatrixHamiltonian, energy: f64) -> Result<Vec<ParticularSolution>> {
    let roots = momentum_roots(h, c(energy, 0.0))?;
    let min_imag = roots.iter().fold(f64::INFINITY, |a, s| a.min(s.p.im.abs()));
    if min_imag < BAND_TOL {
        return Err(Error::EnergyInBand { energy, min_imag });
    }
    let decaying: Vec<ParticularSolution> = roots.into_iter().filter(|s| s.p.im > 0.0).collect();
    if 2 * decaying.len() != h.nc() {
        return Err(Error::UnbalancedRoots {
            decaying: decaying.len(),
            expected: h.nc() / 2,
        });
    }
    Ok(decaying)
}

/// `X(e)` with column `a` equal to `(T_+ - U T_-) Psi^a`, each column divided
/// by the norm of the trace vector `Psi^a`.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    pub matrix: CMatrix,
    /// Trace-vector norms the columns were divided by.
    pub scales: Vec<f64>,
    /// Spectral norm of the relation map, the natural size of a column.
    pub reference_norm: f64,
}

/// The relations restricted to the span of the solution traces. With
/// `traces = Q S V^H` (thin SVD) returns the smallest singular value of
/// `relations * Q` and the coefficients `V S^-1 w` belonging to its right
/// singular vector `w`. Unlike column normalization this stays meaningful
/// where two momentum roots merge and their traces become parallel.
fn restricted_kernel(relations: &CMatrix, traces: &CMatrix) -> (f64, CVector) {
    let k = traces.ncols();
    let t = full_svd(traces);
    let q = t.u.columns(0, k);
    let r = full_svd(&(relations * q));
    let sigma_min = r.singular_values[k - 1];
    let w = r.v.column(k - 1);
    let top = t.singular_values[0];
    let scaled = CVector::from_iterator(
        k,
        (0..k).map(|i| w[i] / c(t.singular_values[i].max(f64::EPSILON * top).max(f64::MIN_POSITIVE), 0.0)),
    );
    let mut coeffs = t.v.columns(0, k) * scaled;
    coeffs /= c(coeffs.norm().max(f64::MIN_POSITIVE), 0.0);
    (sigma_min, coeffs)
}

fn trace_matrix(diag: &CurrentDiagonalization, basis: &[ParticularSolution]) -> CMatrix {
    let mut t = CMatrix::zeros(diag.nc(), basis.len());
    for (a, s) in basis.iter().enumerate() {
        t.set_column(a, &diag.layout.plane_wave(s.p, &s.chi, diag.l));
    }
    t
}

fn spectral_norm(m: &CMatrix) -> f64 {
    full_svd(m).singular_values.first().copied().unwrap_or(0.0)
}

fn relation_rows(bc: &BoundaryCondition) -> CMatrix {
    &bc.diag().t_plus - bc.u() * &bc.diag().t_minus
}

/// Boundary matrix of a decaying basis.
pub fn boundary_matrix(bc: &BoundaryCondition, basis: &[ParticularSolution]) -> Result<BoundaryMatrix> {
    let diag = bc.diag();
    let m = diag.layout.slots().iter().map(|&(_, m)| m + 1).max().unwrap_or(0);
    if basis.len() != bc.lambda() || basis.iter().any(|s| s.chi.len() != m) {
        return Err(Error::LayoutMismatch);
    }
    let rows = relation_rows(bc);
    let mut matrix = CMatrix::zeros(rows.nrows(), basis.len());
    let mut scales = Vec::with_capacity(basis.len());
    for (a, s) in basis.iter().enumerate() {
        let trace = diag.layout.plane_wave(s.p, &s.chi, diag.l);
        let norm = trace.norm();
        let scale = if norm > 0.0 { norm } else { 1.0 };
        matrix.set_column(a, &(&rows * trace / c(scale, 0.0)));
        scales.push(scale);
    }
    Ok(BoundaryMatrix {
        matrix,
        scales,
        reference_norm: spectral_norm(&rows),
    })
}

/// A bound state on the half-line `x >= 0`.
#[derive(Debug, Clone)]
pub struct BoundStateResult {
    pub energy: f64,
    /// Decaying solutions, `Im p > 0`.
    pub solutions: Vec<ParticularSolution>,
    /// Unit-norm coefficients of the solutions.
    pub coeffs: CVector,
    /// `|det X(e)|` of the column-normalized boundary matrix.
    pub det_residual: f64,
    /// Smallest singular value of the relations restricted to the span of
    /// the decaying traces.
    pub sigma_min: f64,
    /// `|| Psi~_+ - U Psi~_- || / || Psi~ ||` of the assembled state.
    pub bc_residual: f64,
    /// `| Psi^H J Psi | / || Psi~ ||^2` of the assembled state.
    pub current_residual: f64,
    /// Largest `|| (H(p) - e) chi ||` over the solutions.
    pub schrodinger_residual: f64,
    /// Factor making `psi` unit-normalized on `[0, inf)`.
    pub norm_constant: f64,
    /// Length scale of the trace vector.
    pub l: f64,
    /// Trace vector of the normalized state.
    pub trace: CVector,
}

/// `int_0^inf conj(chi_a e^{i p_a x}) chi_b e^{i p_b x} dx`.
fn half_line_gram(solutions: &[ParticularSolution]) -> CMatrix {
    let n = solutions.len();
    CMatrix::from_fn(n, n, |a, b| {
        let overlap = solutions[a].chi.dotc(&solutions[b].chi);
        overlap * I / (solutions[b].p - solutions[a].p.conj())
    })
}

fn assemble_half_line(bc: &BoundaryCondition, energy: f64, basis: Vec<ParticularSolution>) -> Result<BoundStateResult> {
    let bm = boundary_matrix(bc, &basis)?;
    let diag = bc.diag();
    let det_residual = bm.matrix.determinant().norm();
    let (sigma_min, mut coeffs) = restricted_kernel(&relation_rows(bc), &trace_matrix(diag, &basis));

    let traces: Vec<CVector> = basis
        .iter()
        .map(|s| diag.layout.plane_wave(s.p, &s.chi, diag.l))
        .collect();
    let combine = |cf: &CVector| {
        let mut t = CVector::zeros(diag.nc());
        for (a, tr) in traces.iter().enumerate() {
            t += tr * cf[a];
        }
        t
    };
    let phase = phase_factor(&combine(&coeffs));
    coeffs *= phase;
    let gram = half_line_gram(&basis);
    let norm_sq = coeffs.dotc(&(&gram * &coeffs)).re;
    let norm_constant = 1.0 / norm_sq.sqrt();
    let trace = combine(&coeffs) * c(norm_constant, 0.0);
    let (bc_residual, current_residual) = admissible_residuals(bc.diag(), bc.u(), &trace, false);
    let schrodinger_residual = basis.iter().fold(0.0_f64, |a, s| a.max(s.residual));
    Ok(BoundStateResult {
        energy,
        solutions: basis,
        coeffs,
        det_residual,
        sigma_min,
        bc_residual,
        current_residual,
        schrodinger_residual,
        norm_constant,
        l: diag.l,
        trace,
    })
}

/// Absolute BC residual, absolute current and stretched size `||Psi~||` of a
/// trace vector. With `outward` set, the roles of the mover sectors are
/// exchanged (boundary at the right end of a segment).
fn admissible_parts(diag: &CurrentDiagonalization, u: &CMatrix, trace: &CVector, outward: bool) -> (f64, f64, f64) {
    let (plus, minus) = diag.project(trace);
    let (out, inc) = if outward { (minus, plus) } else { (plus, minus) };
    let size = (out.norm_squared() + inc.norm_squared()).sqrt();
    let bc = (&out - u * &inc).norm();
    let j = trace.dotc(&(&diag.j_matrix * trace)).re.abs();
    (bc, j, size)
}

/// Relative BC residual and relative current of a trace vector.
fn admissible_residuals(diag: &CurrentDiagonalization, u: &CMatrix, trace: &CVector, outward: bool) -> (f64, f64) {
    let (bc, j, size) = admissible_parts(diag, u, trace, outward);
    let size = size.max(f64::MIN_POSITIVE);
    (bc / size, j / (size * size).max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    sigma_min: f64,
    reference: f64,
}

impl Probe {
    fn ratio(&self) -> f64 {
        self.sigma_min / self.reference
    }

    fn accepted(&self) -> bool {
        self.sigma_min <= ACCEPT_TOL * self.reference
    }
}

fn probe_robust<F>(f: &F, e: f64, scale: f64) -> Result<Probe>
where
    F: Fn(f64) -> Result<Probe>,
{
    match f(e) {
        Err(Error::DegenerateRootCluster { .. }) => {
            let d = PERTURBATION * scale;
            f(e + d).or_else(|_| f(e - d))
        }
        other => other,
    }
}

fn golden_min<G>(mut a: f64, mut b: f64, tol_abs: f64, g: &G) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..MAX_GOLDEN_ITERS {
        let tol = tol_abs.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            if x1 == x2 || x1 <= a {
                break;
            }
            f1 = g(x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            if x2 == x1 || x2 >= b {
                break;
            }
            f2 = g(x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Zeros of `sigma_min(e)` on a window: grid scan, golden-section refinement
/// of every local minimum, and a deflated search next to each accepted root
/// so that near-degenerate pairs are resolved.
fn find_roots<F>(lo: f64, hi: f64, grid_points: usize, f: &F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Probe> + Sync,
{
    let scale = lo.abs().max(hi.abs()).max(hi - lo);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| if i + 1 == grid_points { hi } else { lo + step * i as f64 })
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&e| probe_robust(f, e, scale).map(|p| p.ratio()))
        .collect::<Result<Vec<f64>>>()?;

    let mut minima = Vec::new();
    for i in 0..grid_points {
        let left_ok = i == 0 || values[i] <= values[i - 1];
        let right_ok = i + 1 == grid_points || values[i] <= values[i + 1];
        let plateau = i > 0 && values[i] == values[i - 1];
        if left_ok && right_ok && !plateau {
            minima.push(i);
        }
    }

    // relative termination inside golden_min does the real work; the floor
    // only matters for a root at zero
    let tol_abs = 1e-30 * scale;
    let objective = |e: f64| probe_robust(f, e, scale).map(|p| p.ratio());
    let found: Vec<Vec<f64>> = minima
        .par_iter()
        .map(|&i| -> Result<Vec<f64>> {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(grid_points - 1)];
            let (x, _) = golden_min(a, b, tol_abs, &objective)?;
            let px = probe_robust(f, x, scale)?;
            if !px.accepted() {
                return Ok(Vec::new());
            }
            let mut out = vec![x];
            let sep = SEPARATION_TOL * scale;
            let sides = [(x - step, x - sep), (x + sep, x + step)];
            for (a, b) in sides {
                let (a, b) = (a.max(lo), b.min(hi));
                if b - a <= 0.0 {
                    continue;
                }
                let deflated = |e: f64| objective(e).map(|r| r / (e - x).abs());
                let (y, _) = golden_min(a, b, tol_abs, &deflated)?;
                let py = probe_robust(f, y, scale)?;
                if !py.accepted() || (y - x).abs() <= sep {
                    continue;
                }
                // A genuine second zero is separated from x by a hump.
                let mid = probe_robust(f, 0.5 * (x + y), scale)?;
                if mid.sigma_min > 10.0 * py.sigma_min {
                    out.push(y);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let mut roots: Vec<f64> = found.into_iter().flatten().collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= SEPARATION_TOL * scale);
    Ok(roots)
}

fn check_window(window: (f64, f64), grid_points: usize) -> Result<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("window ({lo}, {hi}) is not a finite interval")));
    }
    if grid_points < 64 {
        return Err(Error::InvalidParameter(format!("need at least 64 grid points, got {grid_points}")));
    }
    Ok(())
}

fn attached_hamiltonian(diag: &CurrentDiagonalization) -> Result<&PolyMatrixHamiltonian> {
    diag.hamiltonian()
        .ok_or_else(|| Error::InvalidParameter("boundary condition is not attached to a Hamiltonian".into()))
}

fn in_gap_basis(h: &PolyMatrixHamiltonian, energy: f64) -> Result<Vec<ParticularSolution>> {
    decaying_basis(h, energy).map_err(|e| match e {
        Error::EnergyInBand { energy, .. } => Error::WindowTouchesBand { energy },
        other => other,
    })
}

/// Bound states of the half-line with boundary condition `bc` whose energies
/// lie in `window`, sorted by energy.
pub fn solve_half_line(bc: &BoundaryCondition, window: (f64, f64), grid_points: usize) -> Result<Vec<BoundStateResult>> {
    check_window(window, grid_points)?;
    let h = attached_hamiltonian(bc.diag())?;
    let rows = relation_rows(bc);
    let reference = spectral_norm(&rows);
    let probe = |e: f64| -> Result<Probe> {
        let basis = in_gap_basis(h, e)?;
        let (sigma_min, _) = restricted_kernel(&rows, &trace_matrix(bc.diag(), &basis));
        Ok(Probe {
            sigma_min,
            reference,
        })
    };
    let roots = find_roots(window.0, window.1, grid_points, &probe)?;
    let scale = window.0.abs().max(window.1.abs()).max(window.1 - window.0);
    roots
        .into_iter()
        .map(|e| {
            let basis = match in_gap_basis(h, e) {
                Err(Error::DegenerateRootCluster { .. }) => in_gap_basis(h, e + PERTURBATION * scale)?,
                other => other?,
            };
            assemble_half_line(bc, e, basis)
        })
        .collect()
}

/// `psi(x)` of a half-line bound state, one column per coordinate.
pub fn wavefunction(result: &BoundStateResult, x_values: &[f64]) -> Result<CMatrix> {
    let m = result.solutions.first().map(|s| s.chi.len()).unwrap_or(0);
    let mut out = CMatrix::zeros(m, x_values.len());
    for (k, &x) in x_values.iter().enumerate() {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeCoordinate(x));
        }
        let mut col = CVector::zeros(m);
        for (a, s) in result.solutions.iter().enumerate() {
            col += &s.chi * (result.coeffs[a] * (I * s.p * x).exp());
        }
        out.set_column(k, &(col * c(result.norm_constant, 0.0)));
    }
    Ok(out)
}

/// Boundary relations at one end of a segment.
#[derive(Debug, Clone)]
pub enum SegmentBoundary {
    /// `Psi~_out = U Psi~_in` with movers labeled by the outward normal.
    Admissible(BoundaryCondition),
    /// Arbitrary rows acting on the trace vector with the given diagonalization's
    /// length scale (the same rows are used at both ends).
    Raw { rows: CMatrix, diag: CurrentDiagonalization },
}

impl SegmentBoundary {
    fn diag(&self) -> &CurrentDiagonalization {
        match self {
            SegmentBoundary::Admissible(bc) => bc.diag(),
            SegmentBoundary::Raw { diag, .. } => diag,
        }
    }

    fn rows(&self, right_end: bool) -> CMatrix {
        match self {
            SegmentBoundary::Admissible(bc) if right_end => &bc.diag().t_minus - bc.u() * &bc.diag().t_plus,
            SegmentBoundary::Admissible(bc) => relation_rows(bc),
            SegmentBoundary::Raw { rows, .. } => rows.clone(),
        }
    }

    /// Absolute BC residual (rows scaled to unit spectral norm), absolute
    /// current and stretched size of the trace at this end.
    fn residual_parts(&self, trace: &CVector, right_end: bool) -> (f64, f64, f64) {
        match self {
            SegmentBoundary::Admissible(bc) => admissible_parts(bc.diag(), bc.u(), trace, right_end),
            SegmentBoundary::Raw { rows, diag } => {
                let (plus, minus) = diag.project(trace);
                let size = (plus.norm_squared() + minus.norm_squared()).sqrt();
                let scale = spectral_norm(rows).max(f64::MIN_POSITIVE);
                let bc = (rows * trace).norm() / scale;
                let j = trace.dotc(&(&diag.j_matrix * trace)).re.abs();
                (bc, j, size)
            }
        }
    }
}

impl From<BoundaryCondition> for SegmentBoundary {
    fn from(bc: BoundaryCondition) -> Self {
        SegmentBoundary::Admissible(bc)
    }
}

/// An eigenstate of the segment `[0, X]`.
#[derive(Debug, Clone)]
pub struct SegmentState {
    pub energy: f64,
    /// All `N` plane-wave solutions at this energy.
    pub solutions: Vec<ParticularSolution>,
    /// Coefficients of `chi_a e^{i p_a (x - r_a)}`, where `r_a` is `X` for
    /// roots growing to the right and `0` otherwise.
    pub coeffs: CVector,
    pub anchors: Vec<f64>,
    pub sigma_min: f64,
    /// End residuals, each relative to the larger of the two end traces.
    pub bc_residual_left: f64,
    pub bc_residual_right: f64,
    pub current_left: f64,
    pub current_right: f64,
    pub schrodinger_residual: f64,
    pub norm_constant: f64,
    pub length: f64,
}

impl SegmentState {
    pub fn bc_residual(&self) -> f64 {
        self.bc_residual_left.max(self.bc_residual_right)
    }

    pub fn current_residual(&self) -> f64 {
        self.current_left.max(self.current_right)
    }
}

struct SegmentSystem {
    relations: CMatrix,
    traces: CMatrix,
    reference: f64,
    solutions: Vec<ParticularSolution>,
    anchors: Vec<f64>,
}

fn anchor(p: C64, length: f64) -> f64 {
    if p.im < 0.0 {
        length
    } else {
        0.0
    }
}

fn segment_traces(
    layout: &TraceLayout,
    l: f64,
    solutions: &[ParticularSolution],
    anchors: &[f64],
    x: f64,
) -> Vec<CVector> {
    solutions
        .iter()
        .zip(anchors)
        .map(|(s, &r)| layout.plane_wave(s.p, &s.chi, l) * (I * s.p * (x - r)).exp())
        .collect()
}

fn segment_system(
    h: &PolyMatrixHamiltonian,
    left: &SegmentBoundary,
    right: &SegmentBoundary,
    length: f64,
    energy: f64,
) -> Result<SegmentSystem> {
    let solutions = momentum_roots(h, c(energy, 0.0))?;
    let anchors: Vec<f64> = solutions.iter().map(|s| anchor(s.p, length)).collect();
    let rows_l = left.rows(false);
    let rows_r = right.rows(true);
    let nl = rows_l.nrows();
    let nr = rows_r.nrows();
    let n = solutions.len();
    let tl = segment_traces(&left.diag().layout, left.diag().l, &solutions, &anchors, 0.0);
    let tr = segment_traces(&right.diag().layout, right.diag().l, &solutions, &anchors, length);
    let nc = left.diag().nc();
    let mut relations = CMatrix::zeros(nl + nr, 2 * nc);
    relations.view_mut((0, 0), (nl, nc)).copy_from(&rows_l);
    relations.view_mut((nl, nc), (nr, nc)).copy_from(&rows_r);
    let mut traces = CMatrix::zeros(2 * nc, n);
    for a in 0..n {
        traces.view_mut((0, a), (nc, 1)).copy_from(&tl[a]);
        traces.view_mut((nc, a), (nc, 1)).copy_from(&tr[a]);
    }
    let reference = spectral_norm(&rows_l).max(spectral_norm(&rows_r));
    Ok(SegmentSystem {
        relations,
        traces,
        reference,
        solutions,
        anchors,
    })
}

/// `int_0^X conj(phi_a) phi_b dx` for `phi_a = chi_a e^{i p_a (x - r_a)}`.
fn segment_gram(solutions: &[ParticularSolution], anchors: &[f64], length: f64) -> CMatrix {
    let n = solutions.len();
    CMatrix::from_fn(n, n, |a, b| {
        let (pa, pb) = (solutions[a].p, solutions[b].p);
        let overlap = solutions[a].chi.dotc(&solutions[b].chi);
        let q = pb - pa.conj();
        let base = I * pa.conj() * anchors[a] - I * pb * anchors[b];
        let z = I * q * length;
        let integral = if z.norm() < 1e-5 {
            base.exp() * length * (ONE + z / 2.0 + z * z / 6.0)
        } else {
            ((base + z).exp() - base.exp()) / (I * q)
        };
        overlap * integral
    })
}

/// Eigenvalues of the segment `[0, length]` inside `window`, sorted.
///
/// Uses every momentum root (real ones included), so the window may overlap
/// the bulk bands. At the right end the movers are labeled by the outward
/// normal: an admissible condition there reads `Psi~_-(X) = U_X Psi~_+(X)`.
pub fn solve_segment(
    h: &PolyMatrixHamiltonian,
    left: &SegmentBoundary,
    right: &SegmentBoundary,
    length: f64,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<SegmentState>> {
    check_window(window, grid_points)?;
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!("segment length must be positive, got {length}")));
    }
    for side in [left, right] {
        let d = side.diag();
        if d.layout.len() != h.nc() {
            return Err(Error::LayoutMismatch);
        }
    }
    let total_rows = left.rows(false).nrows() + right.rows(true).nrows();
    if total_rows < h.nc() {
        return Err(Error::InvalidParameter(format!(
            "{total_rows} boundary relations cannot fix {} coefficients",
            h.nc()
        )));
    }
    let probe = |e: f64| -> Result<Probe> {
        let sys = segment_system(h, left, right, length, e)?;
        Ok(Probe {
            sigma_min: restricted_kernel(&sys.relations, &sys.traces).0,
            reference: sys.reference,
        })
    };
    let roots = find_roots(window.0, window.1, grid_points, &probe)?;
    let scale = window.0.abs().max(window.1.abs()).max(window.1 - window.0);
    roots
        .into_iter()
        .map(|e| {
            let sys = match segment_system(h, left, right, length, e) {
                Err(Error::DegenerateRootCluster { .. }) => {
                    segment_system(h, left, right, length, e + PERTURBATION * scale)?
                }
                other => other?,
            };
            assemble_segment(left, right, length, e, sys)
        })
        .collect()
}

fn assemble_segment(
    left: &SegmentBoundary,
    right: &SegmentBoundary,
    length: f64,
    energy: f64,
    sys: SegmentSystem,
) -> Result<SegmentState> {
    let (sigma_min, mut coeffs) = restricted_kernel(&sys.relations, &sys.traces);

    let combine = |diag: &CurrentDiagonalization, x: f64, cf: &CVector| {
        let traces = segment_traces(&diag.layout, diag.l, &sys.solutions, &sys.anchors, x);
        let mut t = CVector::zeros(diag.nc());
        for (a, tr) in traces.iter().enumerate() {
            t += tr * cf[a];
        }
        t
    };
    let phase = phase_factor(&combine(left.diag(), 0.0, &coeffs));
    coeffs *= phase;
    let gram = segment_gram(&sys.solutions, &sys.anchors, length);
    let norm_sq = coeffs.dotc(&(&gram * &coeffs)).re;
    let norm_constant = 1.0 / norm_sq.sqrt();
    let t0 = combine(left.diag(), 0.0, &coeffs) * c(norm_constant, 0.0);
    let tx = combine(right.diag(), length, &coeffs) * c(norm_constant, 0.0);
    // Both ends are measured against the larger end trace: a state localized
    // at one end has an exponentially small trace at the other, where a
    // relative residual would only measure round-off.
    let (bl, jl, sl) = left.residual_parts(&t0, false);
    let (br, jr, sr) = right.residual_parts(&tx, true);
    let size = sl.max(sr).max(f64::MIN_POSITIVE);
    let size_sq = (size * size).max(f64::MIN_POSITIVE);
    let (bc_residual_left, current_left) = (bl / size, jl / size_sq);
    let (bc_residual_right, current_right) = (br / size, jr / size_sq);
    let schrodinger_residual = sys.solutions.iter().fold(0.0_f64, |a, s| a.max(s.residual));
    Ok(SegmentState {
        energy,
        solutions: sys.solutions,
        coeffs,
        anchors: sys.anchors,
        sigma_min,
        bc_residual_left,
        bc_residual_right,
        current_left,
        current_right,
        schrodinger_residual,
        norm_constant,
        length,
    })
}

/// `psi(x)` of a segment eigenstate for `0 <= x <= X`.
pub fn segment_wavefunction(state: &SegmentState, x_values: &[f64]) -> Result<CMatrix> {
    let m = state.solutions.first().map(|s| s.chi.len()).unwrap_or(0);
    let mut out = CMatrix::zeros(m, x_values.len());
    for (k, &x) in x_values.iter().enumerate() {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeCoordinate(x));
        }
        if x > state.length {
            return Err(Error::InvalidParameter(format!("x = {x} lies beyond the segment end {}", state.length)));
        }
        let mut col = CVector::zeros(m);
        for (a, s) in state.solutions.iter().enumerate() {
            col += &s.chi * (state.coeffs[a] * (I * s.p * (x - state.anchors[a])).exp());
        }
        out.set_column(k, &(col * c(state.norm_constant, 0.0)));
    }
    Ok(out)
}
