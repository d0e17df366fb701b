use std::f64::consts::PI;

use bcspectra::boundary::{standard_bc, symmetric_only_bc, u1_bc_from_angle};
use bcspectra::current::CurrentDiagonalization;
use bcspectra::linalg::CMatrix;
use bcspectra::models::{
    angle_to_length, length_to_angle, linear_bound_state, quadratic_bound_energy, well_effective_bc,
    well_exact_spectrum, BoundaryLength, LinearTwoBandModel, PotentialWellModel, QuadraticModel,
};
use bcspectra::random::{random_gapped_quadratic, rng};
use bcspectra::scan::{default_window, scan_haar, scan_nu_grid};
use bcspectra::spectra::{segment_wavefunction, solve_half_line, solve_segment, wavefunction, SegmentBoundary};
use bcspectra::verify::{four_mode_fixture, three_mode_fixture};
use bcspectra::Error;

fn linear() -> (LinearTwoBandModel, CurrentDiagonalization) {
    let m = LinearTwoBandModel::new(1.0, 1.0).unwrap();
    let d = CurrentDiagonalization::for_hamiltonian(&m.hamiltonian(), 1.0).unwrap();
    (m, d)
}

fn quadratic() -> (QuadraticModel, CurrentDiagonalization) {
    let m = QuadraticModel::new(1.0, 1.0).unwrap();
    let d = CurrentDiagonalization::for_hamiltonian(&m.hamiltonian(), 1.0).unwrap();
    (m, d)
}

/// Simpson's rule for `int |psi|^2` on an even number of equal intervals.
fn norm_sq(psi: &CMatrix, xs: &[f64]) -> f64 {
    let n = xs.len() - 1;
    assert!(n % 2 == 0);
    let h = (xs[n] - xs[0]) / n as f64;
    let w = |k: usize| if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
    (0..=n).map(|k| w(k) * psi.column(k).norm_squared()).sum::<f64>() * h / 3.0
}

#[test]
fn linear_model_matches_closed_form_on_64_angles() {
    let (m, d) = linear();
    for k in 0..64 {
        let nu = -PI + PI * (k as f64 + 0.5) / 64.0;
        let states = solve_half_line(&u1_bc_from_angle(&d, nu).unwrap(), (-1.0 + 1e-5, 1.0 - 1e-5), 128).unwrap();
        let (e, p) = linear_bound_state(&m, nu).unwrap();
        assert_eq!(states.len(), 1, "nu = {nu}");
        assert!((states[0].energy - e).abs() <= 1e-8);
        assert!((states[0].solutions[0].p - p).norm() <= 1e-8);
    }
}

#[test]
fn linear_model_has_no_state_for_positive_angles() {
    let (_, d) = linear();
    for nu in [0.0, 0.3, 1.5, 3.0, PI] {
        let states = solve_half_line(&u1_bc_from_angle(&d, nu).unwrap(), (-1.0 + 1e-5, 1.0 - 1e-5), 128).unwrap();
        assert!(states.is_empty(), "nu = {nu}");
    }
}

#[test]
fn quadratic_model_matches_closed_form_on_64_angles() {
    let (m, d) = quadratic();
    for k in 0..64 {
        let nu = -PI * (k as f64 + 0.5) / 64.0;
        let e = quadratic_bound_energy(&m, angle_to_length(1.0, nu)).unwrap();
        let states = solve_half_line(&u1_bc_from_angle(&d, nu).unwrap(), (-1e4, -1e-6), 256).unwrap();
        assert_eq!(states.len(), 1, "nu = {nu}");
        assert!(((states[0].energy - e) / e).abs() <= 1e-8);
    }
}

#[test]
fn half_line_states_are_unit_normalized() {
    let (_, d) = quadratic();
    let s = &solve_half_line(&u1_bc_from_angle(&d, -1.0).unwrap(), (-100.0, -1e-6), 128).unwrap()[0];
    let kappa = (-s.energy).sqrt();
    let xs: Vec<f64> = (0..=20000).map(|i| i as f64 * 40.0 / kappa / 20000.0).collect();
    assert!((norm_sq(&wavefunction(s, &xs).unwrap(), &xs) - 1.0).abs() < 1e-9);

    let (_, dl) = linear();
    let s = &solve_half_line(&u1_bc_from_angle(&dl, -2.0).unwrap(), (-0.999, 0.999), 128).unwrap()[0];
    let xs: Vec<f64> = (0..=20000).map(|i| i as f64 * 40.0 / 20000.0).collect();
    assert!((norm_sq(&wavefunction(s, &xs).unwrap(), &xs) - 1.0).abs() < 1e-9);
    assert!(matches!(wavefunction(s, &[-1.0]), Err(Error::NegativeCoordinate(_))));
}

#[test]
fn window_overlapping_band_is_rejected() {
    let (_, d) = quadratic();
    let bc = u1_bc_from_angle(&d, -1.0).unwrap();
    assert!(matches!(solve_half_line(&bc, (-1.0, 1.0), 128), Err(Error::WindowTouchesBand { .. })));
    assert!(solve_half_line(&bc, (-1.0, -2.0), 128).is_err());
    assert!(solve_half_line(&bc, (-2.0, -1.0), 10).is_err());
}

#[test]
fn long_segment_reproduces_both_half_line_states() {
    let (_, d) = linear();
    let left = SegmentBoundary::Admissible(u1_bc_from_angle(&d, -PI / 3.0).unwrap());
    let right = SegmentBoundary::Admissible(u1_bc_from_angle(&d, -2.0 * PI / 3.0).unwrap());
    let h = LinearTwoBandModel::new(1.0, 1.0).unwrap().hamiltonian();
    let states = solve_segment(&h, &left, &right, 30.0, (-0.99, 0.99), 128).unwrap();
    let e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    assert_eq!(e.len(), 2, "{e:?}");
    assert!((e[0] + 0.5).abs() < 1e-8 && (e[1] - 0.5).abs() < 1e-8, "{e:?}");
    for s in &states {
        assert!(s.bc_residual() < 1e-8 && s.current_residual() < 1e-8);
    }
}

#[test]
fn box_states_are_normalized_sines() {
    let (_, d) = quadratic();
    let wall = SegmentBoundary::Admissible(u1_bc_from_angle(&d, PI).unwrap());
    let h = QuadraticModel::new(1.0, 1.0).unwrap().hamiltonian();
    let states = solve_segment(&h, &wall, &wall, PI, (0.5, 10.0), 256).unwrap();
    assert_eq!(states.len(), 3);
    let xs: Vec<f64> = (0..=4000).map(|i| PI * i as f64 / 4000.0).collect();
    for (n, s) in states.iter().enumerate() {
        let psi = segment_wavefunction(s, &xs).unwrap();
        assert!((norm_sq(&psi, &xs) - 1.0).abs() < 1e-9);
        let k = (n + 1) as f64;
        let amp = (2.0 / PI).sqrt();
        for (i, &x) in xs.iter().enumerate().step_by(397) {
            assert!((psi[(0, i)].norm() - amp * (k * x).sin().abs()).abs() < 1e-8);
        }
    }
    assert!(segment_wavefunction(&states[0], &[4.0]).is_err());
}

#[test]
fn segment_doublet_is_resolved() {
    let (_, d) = linear();
    let side = SegmentBoundary::Admissible(u1_bc_from_angle(&d, -PI / 2.0).unwrap());
    let h = LinearTwoBandModel::new(1.0, 1.0).unwrap().hamiltonian();
    let states = solve_segment(&h, &side, &side, 20.0, (-0.99, 0.99), 128).unwrap();
    assert_eq!(states.len(), 2);
    let split = states[1].energy - states[0].energy;
    assert!(split > 0.0 && split < 1e-6, "splitting {split}");
    assert!((states[0].energy + states[1].energy).abs() < 1e-10);
}

#[test]
fn symmetric_only_segments_have_no_spectrum() {
    for h in [three_mode_fixture(), four_mode_fixture()] {
        let d = CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap();
        let small = d.n_plus.min(d.n_minus);
        let rows = symmetric_only_bc(&d, &CMatrix::identity(small, small)).unwrap();
        let side = SegmentBoundary::Raw { rows, diag: d };
        for length in [1.0, 3.0, 8.0] {
            let states = solve_segment(&h, &side, &side, length, (-10.0, 10.0), 512).unwrap();
            assert!(states.is_empty(), "{} modes, X = {length}", h.m());
        }
    }
}

#[test]
fn length_scale_change_keeps_the_energy() {
    let (_, d) = quadratic();
    let d3 = CurrentDiagonalization::for_hamiltonian(&QuadraticModel::new(1.0, 3.0).unwrap().hamiltonian(), 3.0).unwrap();
    for nu in [-0.4, -1.3, -2.6] {
        let length = angle_to_length(1.0, nu);
        let nu3 = length_to_angle(3.0, length);
        let a = solve_half_line(&u1_bc_from_angle(&d, nu).unwrap(), (-1e3, -1e-6), 256).unwrap();
        let b = solve_half_line(&u1_bc_from_angle(&d3, nu3).unwrap(), (-1e3, -1e-6), 256).unwrap();
        assert!((a[0].energy - b[0].energy).abs() < 1e-9);
    }
}

#[test]
fn well_shallow_state_follows_effective_length() {
    for delta in [0.01, 0.02, 0.05, 0.1] {
        let well = PotentialWellModel::new(1.0, 1.0, PI / 2.0 + delta).unwrap();
        let exact = *well_exact_spectrum(&well, None).last().unwrap();
        let BoundaryLength::Finite(l0) = well_effective_bc(&well) else {
            panic!("finite effective length expected")
        };
        let approx = -1.0 / (l0 * l0);
        assert!(((exact - approx) / exact).abs() <= 5.0 * delta, "delta = {delta}");
    }
}

#[test]
fn nu_scan_rows_follow_the_grid() {
    let h = QuadraticModel::new(1.0, 1.0).unwrap().hamiltonian();
    let rows = scan_nu_grid(&h, 1.0, 32, (-1e3, -1e-6), 128).unwrap();
    for row in &rows {
        let nu = row.parameter;
        let expected = usize::from(nu < 0.0 && nu > -PI && nu.tan().abs() > 0.0 && 4.0 * (nu / 2.0).tan().powi(2) < 1e3);
        assert_eq!(row.states.len(), expected, "nu = {nu}");
    }
}

#[test]
fn haar_scan_is_reproducible_and_conserving() {
    let h = random_gapped_quadratic(&mut rng(21));
    let window = default_window(&h, 1.0).unwrap();
    let a = scan_haar(&h, 1.0, 40, 5, window, 128).unwrap();
    let b = scan_haar(&h, 1.0, 40, 5, window, 128).unwrap();
    assert_eq!(a.len(), 40);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.energies(), y.energies());
        assert!(x.max_bc_residual() <= 1e-8 && x.max_current_residual() <= 1e-8);
    }
    let d = CurrentDiagonalization::for_hamiltonian(&h, 1.0).unwrap();
    let bc = standard_bc(&d, a[0].u.clone()).unwrap();
    let again = solve_half_line(&bc, window, 128).unwrap();
    assert_eq!(again.iter().map(|s| s.energy).collect::<Vec<_>>(), a[0].energies());
}
