//! Worked models: closed forms next to the numerical solvers.

use bcspectra::boundary::u1_bc_from_angle;
use bcspectra::current::CurrentDiagonalization;
use bcspectra::models::{
    angle_to_length, length_to_angle, linear_bound_state, low_energy_reduction, n4_current_eigenvalues,
    quadratic_bound_energy, quartic_hamiltonian, well_effective_bc, well_exact_spectrum, BoundaryLength,
    LinearTwoBandModel, PotentialWellModel, QuadraticModel,
};
use bcspectra::scan::scan_nu_grid;
use bcspectra::spectra::solve_half_line;
use bcspectra::Result;
use clap::ValueEnum;

use crate::csv::{Cell, Table};

#[derive(Clone, Copy, ValueEnum)]
pub enum DemoName {
    Quadratic,
    Linear,
    Well,
    Reduction,
    N4,
}

pub fn run(name: DemoName) -> Result<Table> {
    match name {
        DemoName::Quadratic => quadratic(),
        DemoName::Linear => linear(),
        DemoName::Well => well(),
        DemoName::Reduction => reduction(),
        DemoName::N4 => n4(),
    }
}

fn finite(length: BoundaryLength) -> Option<f64> {
    match length {
        BoundaryLength::Finite(v) => Some(v),
        BoundaryLength::Infinite => None,
    }
}

fn linear() -> Result<Table> {
    let model = LinearTwoBandModel::new(1.0, 1.0)?;
    let edge = model.dx * (1.0 - 1e-5);
    let rows = scan_nu_grid(&model.hamiltonian(), 1.0, 64, (-edge, edge), 128)?;
    let mut t = Table::new(["nu", "analytic_energy", "numeric_energy", "abs_error"]);
    for row in rows {
        let analytic = linear_bound_state(&model, row.parameter).map(|(e, _)| e);
        let numeric = row.energies().first().copied();
        let error = analytic.zip(numeric).map(|(a, b)| (a - b).abs());
        t.push(vec![row.parameter.into(), analytic.into(), numeric.into(), error.into()]);
    }
    Ok(t)
}

fn quadratic() -> Result<Table> {
    let model = QuadraticModel::new(1.0, 1.0)?;
    let rows = scan_nu_grid(&model.hamiltonian(), 1.0, 64, (-1e4, -1e-6), 256)?;
    let mut t = Table::new(["nu", "length", "analytic_energy", "numeric_energy", "rel_error"]);
    for row in rows {
        let length = angle_to_length(model.l, row.parameter);
        let analytic = quadratic_bound_energy(&model, length);
        let numeric = row.energies().first().copied();
        let error = analytic.zip(numeric).map(|(a, b)| ((a - b) / a).abs());
        t.push(vec![
            row.parameter.into(),
            finite(length).into(),
            analytic.into(),
            numeric.into(),
            error.into(),
        ]);
    }
    Ok(t)
}

fn well() -> Result<Table> {
    let quad = QuadraticModel::new(1.0, 1.0)?;
    let diag = CurrentDiagonalization::for_hamiltonian(&quad.hamiltonian(), 1.0)?;
    let mut t = Table::new([
        "delta",
        "effective_length",
        "exact_energy",
        "effective_energy",
        "numeric_energy",
        "rel_error",
    ]);
    for delta in [0.1, 0.05, 0.02, 0.01] {
        let well = PotentialWellModel::new(1.0, 1.0, std::f64::consts::FRAC_PI_2 + delta)?;
        let exact = well_exact_spectrum(&well, None).last().copied();
        let length = well_effective_bc(&well);
        let effective = quadratic_bound_energy(&quad, length);
        let bc = u1_bc_from_angle(&diag, length_to_angle(1.0, length))?;
        let numeric = solve_half_line(&bc, (-10.0, -1e-9), 256)?.first().map(|s| s.energy);
        let error = exact.zip(effective).map(|(x, a)| ((x - a) / x).abs());
        t.push(vec![
            delta.into(),
            finite(length).into(),
            exact.into(),
            effective.into(),
            numeric.into(),
            error.into(),
        ]);
    }
    Ok(t)
}

fn reduction() -> Result<Table> {
    let lin = LinearTwoBandModel::new(1.0, 1.0)?;
    let (h2, l2) = low_energy_reduction(&lin);
    let quad = QuadraticModel::new(h2, l2)?;
    let dl = CurrentDiagonalization::for_hamiltonian(&lin.hamiltonian(), 1.0)?;
    let dq = CurrentDiagonalization::for_hamiltonian(&quad.hamiltonian(), l2)?;
    let mut t = Table::new(["nu", "ec1", "dx_plus_ec2", "difference", "constant", "closed_form_constant"]);
    for k in 1..=10 {
        let nu = -0.02 * k as f64;
        let e1 = solve_half_line(&u1_bc_from_angle(&dl, nu)?, (-1.0 + 1e-6, 1.0 - 1e-6), 128)?
            .first()
            .map(|s| s.energy);
        let e2 = solve_half_line(&u1_bc_from_angle(&dq, nu)?, (-10.0, -1e-7), 256)?
            .first()
            .map(|s| lin.dx + s.energy);
        let diff = e1.zip(e2).map(|(a, b)| a - b);
        let scale = lin.dx * nu.powi(4);
        let tan = (nu / 2.0).tan();
        let closed = 2.0 * tan.powi(4) / (1.0 + tan * tan) / nu.powi(4);
        t.push(vec![
            nu.into(),
            e1.into(),
            e2.into(),
            diff.into(),
            diff.map(|d| d / scale).into(),
            closed.into(),
        ]);
    }
    Ok(t)
}

fn n4() -> Result<Table> {
    let mut header: Vec<String> = ["h2", "h4", "l"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=4).map(|k| format!("closed_{k}")));
    header.extend((1..=4).map(|k| format!("numeric_{k}")));
    header.push("max_deviation".into());
    let mut t = Table::new(header);
    for (h2, h4, l) in [(1.0, 1.0, 1.0), (0.0, 1.0, 1.0), (1.0, 1.0, 10.0), (-1.0, 0.5, 2.0), (2.0, -1.0, 0.5)] {
        let closed = n4_current_eigenvalues(h2, h4, l);
        let d = CurrentDiagonalization::for_hamiltonian(&quartic_hamiltonian(h2, h4)?, l)?;
        let dev = closed.iter().zip(&d.eigvals).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        let mut row: Vec<Cell> = vec![h2.into(), h4.into(), l.into()];
        row.extend(closed.iter().map(|&x| Cell::from(x)));
        row.extend(d.eigvals.iter().map(|&x| Cell::from(x)));
        row.push(dev.into());
        t.push(row);
    }
    Ok(t)
}
