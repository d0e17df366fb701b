//! Self-check suites over all modules, with optional fault injection, and a
//! JSON summary for the command-line `verify`.

use std::f64::consts::PI;

use rand::Rng;
use serde_json::{json, Value};

use crate::boundary::{
    classify_trace_relations, haar_unitary, raw_relation_matrix, reparameterize_length, standard_bc,
    symmetric_only_bc, u1_bc_from_angle, BoundaryClassification,
};
use crate::current::{
    assemble_current_matrix, current_form, sign_structure_invariance, BoundaryTraceVector, CurrentDiagonalization,
};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{
    c, hermitian_deviation, hermitian_eigen, max_abs, null_space, row_space_distance, unitarity_deviation, CMatrix,
    CVector,
};
use crate::models::{
    angle_to_length, length_to_angle, linear_bound_state, low_energy_reduction, n4_current_eigenvalues,
    quadratic_bound_energy, quartic_hamiltonian, well_effective_bc, well_exact_spectrum, LinearTwoBandModel,
    PotentialWellModel, QuadraticModel,
};
use crate::random::{random_gapped_quadratic, random_hamiltonian, random_orders, random_trace, rng};
use crate::scan::{default_window, scan_haar};
use crate::spectra::{solve_half_line, solve_segment, SegmentBoundary};

/// Deliberately broken fixtures added to the regular suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Injection {
    #[default]
    None,
    /// A Hamiltonian with a non-hermitian coefficient, built past the
    /// constructor checks. The hermiticity suite must fail.
    NonHermitian,
    /// A second symmetric-only segment (four modes, three right movers).
    /// The empty-spectrum suite must still pass.
    SymmetricOnlySegment,
}

impl Injection {
    pub fn name(self) -> &'static str {
        match self {
            Injection::None => "none",
            Injection::NonHermitian => "non-hermitian",
            Injection::SymmetricOnlySegment => "symmetric-only-segment",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub injection: Injection,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "injection": self.injection.name(),
            "suites": self.suites.iter().map(|s| json!({
                "name": s.name,
                "passed": s.passed,
                "checks": s.checks,
                "detail": s.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Counts checks and keeps the first failure.
#[derive(Default)]
struct Checker {
    checks: usize,
    failure: Option<String>,
}

impl Checker {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(msg());
        }
    }

    fn fail(&mut self, msg: String) {
        self.check(false, || msg);
    }
}

type Suite = fn(&mut Checker, Injection) -> crate::Result<String>;

pub fn run(injection: Injection) -> VerifyReport {
    let suites: [(&'static str, Suite); 14] = [
        ("hamiltonian.hermiticity", hermiticity),
        ("current.trace_identity", trace_identity),
        ("current.degeneracy_theorem", degeneracy_theorem),
        ("current.sign_structure", sign_structure),
        ("current.quartic_closed_form", quartic_closed_form),
        ("boundary.round_trip", round_trip),
        ("boundary.nonredundancy", nonredundancy),
        ("boundary.symmetric_only_partner", symmetric_only_partner),
        ("spectra.linear_oracle", linear_oracle),
        ("spectra.quadratic_oracle", quadratic_oracle),
        ("spectra.box", box_spectrum),
        ("spectra.symmetric_only_segment", symmetric_only_segment),
        ("spectra.conservation", conservation),
        ("models.asymptotics", asymptotics),
    ];
    let suites = suites
        .into_iter()
        .map(|(name, suite)| {
            let mut checker = Checker::default();
            let outcome = suite(&mut checker, injection);
            let (passed, detail) = match (outcome, checker.failure) {
                (Err(e), _) => (false, format!("error: {e}")),
                (Ok(_), Some(f)) => (false, f),
                (Ok(d), None) => (true, d),
            };
            SuiteResult {
                name,
                passed,
                checks: checker.checks,
                detail,
            }
        })
        .collect();
    VerifyReport { injection, suites }
}

/// Three modes, two of them right movers, coupled by `h_0`.
pub fn three_mode_fixture() -> PolyMatrixHamiltonian {
    let z = c(0.0, 0.0);
    let h0 = CMatrix::from_row_slice(
        3,
        3,
        &[z, c(0.5, 0.0), c(0.3, 0.0), c(0.5, 0.0), c(0.2, 0.0), c(0.0, 0.4), c(0.3, 0.0), c(0.0, -0.4), z],
    );
    let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]));
    PolyMatrixHamiltonian::new(3, vec![1, 1, 1], vec![h0, h1]).expect("valid fixture")
}

/// Four modes, three of them right movers, coupled by `h_0`.
pub fn four_mode_fixture() -> PolyMatrixHamiltonian {
    let r = |v: f64| c(v, 0.0);
    let h0 = CMatrix::from_row_slice(
        4,
        4,
        &[
            r(0.0), r(0.5), r(0.3), r(0.2),
            r(0.5), r(0.2), c(0.0, 0.4), r(0.1),
            r(0.3), c(0.0, -0.4), r(0.0), c(0.6, 0.2),
            r(0.2), r(0.1), c(0.6, -0.2), r(-0.3),
        ],
    );
    let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![r(1.0), r(1.0), r(1.0), r(-1.0)]));
    PolyMatrixHamiltonian::new(4, vec![1; 4], vec![h0, h1]).expect("valid fixture")
}

fn hermiticity(ck: &mut Checker, injection: Injection) -> crate::Result<String> {
    let mut r = rng(11);
    let mut models = vec![
        LinearTwoBandModel::new(1.0, 1.0)?.hamiltonian(),
        QuadraticModel::new(1.0, 1.0)?.hamiltonian(),
        quartic_hamiltonian(1.0, 1.0)?,
    ];
    for _ in 0..20 {
        let orders = random_orders(&mut r, 4, 3);
        models.push(random_hamiltonian(&mut r, &orders));
    }
    if injection == Injection::NonHermitian {
        let mut h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        h1[(0, 1)] = c(0.3, 0.0);
        let h0 = CMatrix::zeros(2, 2);
        models.push(PolyMatrixHamiltonian::from_parts_unchecked(2, vec![1, 1], vec![h0, h1])?);
    }
    for (k, h) in models.iter().enumerate() {
        for (n, coeff) in h.coeffs().iter().enumerate() {
            let dev = hermitian_deviation(coeff);
            ck.check(dev <= 1e-12, || format!("model {k}: coefficient {n} deviates by {dev:.3e}"));
        }
        for i in 0..=20 {
            let p = -3.0 + 0.3 * i as f64;
            let dev = hermitian_deviation(&h.evaluate(c(p, 0.0)));
            ck.check(dev <= 1e-12, || format!("model {k}: H({p}) deviates by {dev:.3e}"));
        }
    }
    Ok(format!("{} models", models.len()))
}

fn trace_identity(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(12);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let orders = random_orders(&mut r, 4, 3);
        let h = random_hamiltonian(&mut r, &orders);
        let l = r.random_range(0.5..2.0);
        let d = CurrentDiagonalization::for_hamiltonian(&h, l)?;
        let jn = max_abs(&d.j_matrix);
        for _ in 0..5 {
            let a = random_trace(&mut r, d.nc());
            let b = random_trace(&mut r, d.nc());
            let (plus, minus) = d.project(&a);
            let form = a.dotc(&(&d.j_matrix * &a)).re;
            let diff = (form - (plus.norm_squared() - minus.norm_squared())).abs();
            worst = worst.max(diff / (a.norm_squared() * jn));
            ck.check(diff <= 1e-10 * a.norm_squared() * jn * d.nc() as f64, || {
                format!("orders {orders:?}: identity off by {diff:.3e}")
            });
            let ta = BoundaryTraceVector::new(a.clone(), l)?;
            let tb = BoundaryTraceVector::new(b, l)?;
            let ab = current_form(&d.layout, &d.j_matrix, &ta, &tb)?;
            let ba = current_form(&d.layout, &d.j_matrix, &tb, &ta)?;
            ck.check((ab - ba.conj()).norm() <= 1e-12 * (1.0 + ab.norm()), || {
                format!("orders {orders:?}: form not conjugate symmetric")
            });
        }
        for _ in 0..3 {
            let p = r.random_range(-2.0..2.0);
            let (_, vecs) = hermitian_eigen(&h.evaluate(c(p, 0.0)));
            let chi: CVector = vecs.column(0).into_owned();
            let trace = d.layout.plane_wave(c(p, 0.0), &chi, l);
            let j = trace.dotc(&(&d.j_matrix * &trace)).re;
            let v = chi.dotc(&(h.velocity(c(p, 0.0)) * &chi)).re;
            ck.check((j - v).abs() <= 1e-9 * (1.0 + v.abs()), || {
                format!("orders {orders:?}, p = {p}: plane-wave current {j} vs velocity {v}")
            });
        }
    }
    Ok(format!("worst relative identity error {worst:.2e}"))
}

fn degeneracy_theorem(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(13);
    let ratio = |j: &CMatrix| {
        let (vals, _) = hermitian_eigen(j);
        let max = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let min = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if max > 0.0 { min / max } else { 0.0 }
    };
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let orders = random_orders(&mut r, 4, 3);
        let h = random_hamiltonian(&mut r, &orders);
        let q = ratio(&assemble_current_matrix(&h, 1.0).1);
        worst = worst.min(q);
        ck.check(q > 1e-10, || format!("orders {orders:?}: ratio {q:.3e}"));
    }
    for _ in 0..50 {
        let orders = random_orders(&mut r, 4, 3);
        let h = random_hamiltonian(&mut r, &orders);
        let k = orders[r.random_range(0..orders.len())];
        let idx: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] == k).collect();
        let (vals, vecs) = hermitian_eigen(&h.top_block(k));
        let drop = (0..vals.len()).min_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap_or(0);
        let v = vecs.column(drop);
        let fix = &v * v.adjoint() * c(vals[drop], 0.0);
        let mut coeffs = h.coeffs().to_vec();
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                coeffs[k][(ia, ib)] -= fix[(a, b)];
            }
        }
        let forced = PolyMatrixHamiltonian::from_parts_unchecked(orders.len(), orders.clone(), coeffs)?;
        let q = ratio(&assemble_current_matrix(&forced, 1.0).1);
        ck.check(q <= 1e-10, || format!("orders {orders:?}: forced singular top block, ratio {q:.3e}"));
    }
    Ok(format!("smallest nondegenerate ratio {worst:.2e}"))
}

fn sign_structure(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(14);
    let mut done = 0;
    while done < 50 {
        let orders = random_orders(&mut r, 4, 3);
        if orders.iter().all(|&n| n == orders[0]) {
            continue;
        }
        let h = random_hamiltonian(&mut r, &orders);
        match sign_structure_invariance(&h, &[0.01, 1.0, 100.0]) {
            Ok(_) => ck.check(true, String::new),
            Err(e) => ck.fail(format!("orders {orders:?}: {e}")),
        }
        done += 1;
    }
    Ok("50 mixed-order Hamiltonians".into())
}

fn quartic_closed_form(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(15);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let h2 = r.random_range(-2.0..2.0);
        let h4 = if r.random_bool(0.5) { 1.0 } else { -1.0 } * r.random_range(0.1..2.0);
        let l = r.random_range(0.5..2.0);
        let d = CurrentDiagonalization::for_hamiltonian(&quartic_hamiltonian(h2, h4)?, l)?;
        for (a, b) in d.eigvals.iter().zip(n4_current_eigenvalues(h2, h4, l)) {
            worst = worst.max((a - b).abs());
        }
        ck.check((d.n_plus, d.n_minus) == (2, 2), || format!("h2 = {h2}, h4 = {h4}: sign pattern"));
    }
    ck.check(worst <= 1e-10, || format!("closed form off by {worst:.3e}"));
    Ok(format!("max deviation {worst:.2e}"))
}

fn round_trip(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(16);
    let mut models = vec![
        LinearTwoBandModel::new(1.0, 1.0)?.hamiltonian(),
        QuadraticModel::new(1.0, 1.0)?.hamiltonian(),
        quartic_hamiltonian(1.0, 0.5)?,
    ];
    models.extend((0..3).map(|_| random_gapped_quadratic(&mut r)));
    let mut worst = 0.0_f64;
    for h in &models {
        let d = CurrentDiagonalization::for_hamiltonian(h, 1.0)?;
        for _ in 0..10 {
            let u = haar_unitary(d.n_plus, r.random());
            let bc = standard_bc(&d, u.clone())?;
            let rows = raw_relation_matrix(&bc);
            match classify_trace_relations(&d, &rows)? {
                BoundaryClassification::Admissible { u: back } => {
                    let dev = max_abs(&(&back - &u));
                    worst = worst.max(dev);
                    ck.check(dev <= 1e-10 && unitarity_deviation(&back) <= 1e-10, || {
                        format!("recovered U off by {dev:.3e}")
                    });
                }
                other => ck.fail(format!("standard BC classified as {other:?}")),
            }
            let kernel = null_space(&rows, 1e-10);
            for k in 0..kernel.ncols() {
                let v = kernel.column(k);
                let j = v.dotc(&(&d.j_matrix * v)).norm();
                ck.check(j <= 1e-10 * max_abs(&d.j_matrix), || format!("kernel current {j:.3e}"));
            }
        }
    }
    Ok(format!("max round-trip error {worst:.2e}"))
}

fn nonredundancy(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(17);
    let d = CurrentDiagonalization::for_hamiltonian(&random_gapped_quadratic(&mut r), 1.0)?;
    let mut closest = f64::INFINITY;
    for _ in 0..50 {
        let u1 = haar_unitary(d.n_plus, r.random());
        let u2 = haar_unitary(d.n_plus, r.random());
        if max_abs(&(&u1 - &u2)) <= 1e-6 {
            continue;
        }
        let a = raw_relation_matrix(&standard_bc(&d, u1)?);
        let b = raw_relation_matrix(&standard_bc(&d, u2)?);
        let dist = row_space_distance(&a, &b);
        closest = closest.min(dist);
        ck.check(dist > 1e-8, || format!("distinct unitaries share relations (distance {dist:.3e})"));
    }
    let q = QuadraticModel::new(1.0, 1.0)?.hamiltonian();
    let dq = CurrentDiagonalization::for_hamiltonian(&q, 1.0)?;
    let bc = u1_bc_from_angle(&dq, -1.0)?;
    let moved = reparameterize_length(&bc, 3.0)?;
    let back = reparameterize_length(&moved, 1.0)?;
    let dev = max_abs(&(back.u() - bc.u()));
    ck.check(dev <= 1e-10, || format!("length round trip off by {dev:.3e}"));
    Ok(format!("closest distinct pair {closest:.2e}"))
}

fn symmetric_only_partner(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(18);
    let mut cases = 0;
    for h in [three_mode_fixture(), four_mode_fixture()] {
        let d = CurrentDiagonalization::for_hamiltonian(&h, 1.0)?;
        let small = d.n_plus.min(d.n_minus);
        for _ in 0..5 {
            let rows = symmetric_only_bc(&d, &haar_unitary(small, r.random()))?;
            match classify_trace_relations(&d, &rows)? {
                BoundaryClassification::SymmetricOnly { .. } => ck.check(true, String::new),
                other => ck.fail(format!("classified as {other:?}")),
            }
            let kernel = null_space(&rows, 1e-10);
            let partner = null_space(&(kernel.adjoint() * &d.j_matrix), 1e-10);
            let cross = max_abs(&(kernel.adjoint() * &d.j_matrix * &partner));
            ck.check(cross <= 1e-10 * max_abs(&d.j_matrix), || format!("partner current {cross:.3e}"));
            ck.check(partner.ncols() > kernel.ncols(), || {
                format!("partner dimension {} not above {}", partner.ncols(), kernel.ncols())
            });
            cases += 1;
        }
    }
    Ok(format!("{cases} symmetric-only conditions"))
}

fn linear_oracle(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let model = LinearTwoBandModel::new(1.0, 1.0)?;
    let d = CurrentDiagonalization::for_hamiltonian(&model.hamiltonian(), 1.0)?;
    let mut worst = 0.0_f64;
    for k in 0..64 {
        let nu = -PI * (k as f64 + 0.5) / 64.0;
        let states = solve_half_line(&u1_bc_from_angle(&d, nu)?, (-1.0 + 1e-5, 1.0 - 1e-5), 128)?;
        let (e, _) = linear_bound_state(&model, nu).expect("bound state for negative angle");
        match states.as_slice() {
            [s] => {
                worst = worst.max((s.energy - e).abs());
                ck.check((s.energy - e).abs() <= 1e-8, || format!("nu = {nu}: {} vs {e}", s.energy));
            }
            _ => ck.fail(format!("nu = {nu}: {} states", states.len())),
        }
    }
    Ok(format!("max error {worst:.2e}"))
}

fn quadratic_oracle(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let model = QuadraticModel::new(1.0, 1.0)?;
    let d = CurrentDiagonalization::for_hamiltonian(&model.hamiltonian(), 1.0)?;
    let mut worst = 0.0_f64;
    for k in 0..64 {
        let nu = -PI * (k as f64 + 0.5) / 64.0;
        let e = quadratic_bound_energy(&model, angle_to_length(1.0, nu)).expect("bound state for negative angle");
        let states = solve_half_line(&u1_bc_from_angle(&d, nu)?, (-1e4, -1e-6), 256)?;
        match states.as_slice() {
            [s] => {
                let rel = ((s.energy - e) / e).abs();
                worst = worst.max(rel);
                ck.check(rel <= 1e-8, || format!("nu = {nu}: {} vs {e}", s.energy));
            }
            _ => ck.fail(format!("nu = {nu}: {} states", states.len())),
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn box_spectrum(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let q = QuadraticModel::new(1.0, 1.0)?.hamiltonian();
    let d = CurrentDiagonalization::for_hamiltonian(&q, 1.0)?;
    let wall = SegmentBoundary::Admissible(u1_bc_from_angle(&d, PI)?);
    let states = solve_segment(&q, &wall, &wall, PI, (0.5, 10.0), 256)?;
    let e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    ck.check(e.len() == 3, || format!("energies {e:?}"));
    for (x, y) in e.iter().zip([1.0, 4.0, 9.0]) {
        ck.check((x - y).abs() <= 1e-7, || format!("{x} vs {y}"));
    }
    Ok(format!("energies {e:?}"))
}

fn symmetric_only_segment(ck: &mut Checker, injection: Injection) -> crate::Result<String> {
    let mut fixtures = vec![three_mode_fixture()];
    if injection == Injection::SymmetricOnlySegment {
        fixtures.push(four_mode_fixture());
    }
    for h in &fixtures {
        let d = CurrentDiagonalization::for_hamiltonian(h, 1.0)?;
        let small = d.n_plus.min(d.n_minus);
        let rows = symmetric_only_bc(&d, &CMatrix::identity(small, small))?;
        let side = SegmentBoundary::Raw { rows, diag: d };
        for length in [2.0, 5.0] {
            let states = solve_segment(h, &side, &side, length, (-10.0, 10.0), 512)?;
            ck.check(states.is_empty(), || {
                format!("{} modes, X = {length}: states at {:?}", h.m(), states.iter().map(|s| s.energy).collect::<Vec<_>>())
            });
        }
    }
    Ok(format!("{} fixtures with empty spectrum", fixtures.len()))
}

fn conservation(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let mut r = rng(19);
    let h = random_gapped_quadratic(&mut r);
    let window = default_window(&h, 1.0)?;
    let rows = scan_haar(&h, 1.0, 100, 19, window, 128)?;
    let mut states = 0;
    for row in &rows {
        for s in &row.states {
            states += 1;
            ck.check(s.bc_residual <= 1e-8 && s.current_residual <= 1e-8, || {
                format!("sample {}: residuals {:.3e}, {:.3e}", row.parameter, s.bc_residual, s.current_residual)
            });
        }
    }
    ck.check(states > 0, || "no bound states found".into());
    Ok(format!("{states} states over 100 Haar samples"))
}

fn asymptotics(ck: &mut Checker, _: Injection) -> crate::Result<String> {
    let lin = LinearTwoBandModel::new(1.0, 1.0)?;
    let (h2, l2) = low_energy_reduction(&lin);
    let quad = QuadraticModel::new(h2, l2)?;
    let mut worst = 0.0_f64;
    for k in 1..=10 {
        let nu = -0.02 * k as f64;
        let (e1, _) = linear_bound_state(&lin, nu).expect("negative angle");
        let e2 = quadratic_bound_energy(&quad, angle_to_length(l2, nu)).expect("negative angle");
        let ratio = (e1 - lin.dx - e2).abs() / (lin.dx * nu.powi(4));
        worst = worst.max(ratio);
    }
    ck.check(worst < 1.0, || format!("reduction constant {worst:.3}"));
    let unit = QuadraticModel::new(1.0, 1.0)?;
    for delta in [0.01, 0.02, 0.05, 0.1] {
        let well = PotentialWellModel::new(1.0, 1.0, PI / 2.0 + delta)?;
        let exact = well_exact_spectrum(&well, None).last().copied();
        let approx = quadratic_bound_energy(&unit, well_effective_bc(&well));
        match (exact, approx) {
            (Some(x), Some(a)) => {
                let rel = ((x - a) / x).abs();
                ck.check(rel <= 5.0 * delta, || format!("delta = {delta}: relative error {rel:.3}"));
            }
            _ => ck.fail(format!("delta = {delta}: missing shallow state")),
        }
        let nu = length_to_angle(1.0, well_effective_bc(&well));
        ck.check(nu < 0.0 && nu > -PI, || format!("delta = {delta}: angle {nu} outside (-pi, 0)"));
    }
    Ok(format!("reduction constant {worst:.4}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_non_hermitian_fails_only_hermiticity() {
        let report = run(Injection::NonHermitian);
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        assert_eq!(failed, vec!["hamiltonian.hermiticity"], "{:?}", report.suites);
        assert!(!report.passed());
        assert_eq!(report.to_json()["passed"], json!(false));
    }

    #[test]
    fn four_mode_fixture_is_unbalanced() {
        let d = CurrentDiagonalization::for_hamiltonian(&four_mode_fixture(), 1.0).unwrap();
        assert_eq!((d.n_plus, d.n_minus), (3, 1));
    }

    #[test]
    fn default_and_segment_injection_pass() {
        for injection in [Injection::None, Injection::SymmetricOnlySegment] {
            let report = run(injection);
            assert!(report.passed(), "{:?}", report.suites.iter().filter(|s| !s.passed).collect::<Vec<_>>());
        }
    }
}
