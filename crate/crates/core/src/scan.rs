//! Parameter scans over boundary conditions: an angle grid for two degrees
//! of freedom and Haar-random unitaries in general.

use rand::Rng;
use rayon::prelude::*;

use crate::boundary::{haar_unitary, standard_bc, u1_bc_from_angle};
use crate::current::CurrentDiagonalization;
use crate::error::{Error, Result};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::CMatrix;
use crate::random::rng;
use crate::spectra::{solve_half_line, BoundStateResult};

/// Default energy window: the widest sampled gap (momenta up to `10 / l`),
/// with an unbounded side cut off one envelope width beyond the bands and a
/// margin of `1e-6` envelope widths kept from every band edge.
pub fn default_window(h: &PolyMatrixHamiltonian, l: f64) -> Result<(f64, f64)> {
    let report = h.gap_window(10.0 / l, 2001)?;
    let span = (report.envelope.1 - report.envelope.0).max(1.0);
    let (lo, hi) = report
        .widest(span)
        .ok_or_else(|| Error::InvalidParameter("no bulk gap found for the default window".into()))?;
    let margin = 1e-6 * span;
    Ok((lo + margin, hi - margin))
}

/// Bound states found for one boundary condition of a scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    /// Angle for grid scans, sample index for Haar scans.
    pub parameter: f64,
    pub u: CMatrix,
    pub states: Vec<BoundStateResult>,
}

impl ScanRow {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn max_bc_residual(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |a, s| a.max(s.bc_residual))
    }

    pub fn max_current_residual(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |a, s| a.max(s.current_residual))
    }
}

/// The angles `-pi + 2 pi (k + 1) / n`, `k = 0..n`, covering `(-pi, pi]`.
pub fn nu_grid(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (0..n).map(|k| -pi + 2.0 * pi * (k + 1) as f64 / n as f64).collect()
}

/// Half-line spectra for `U = e^{-i nu}` over [`nu_grid`]; rows keep the grid
/// order and report `nu` in `(-pi, pi]`.
pub fn scan_nu_grid(
    h: &PolyMatrixHamiltonian,
    l: f64,
    n: usize,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<ScanRow>> {
    let diag = CurrentDiagonalization::for_hamiltonian(h, l)?;
    nu_grid(n)
        .into_par_iter()
        .map(|nu| {
            let bc = u1_bc_from_angle(&diag, nu)?;
            let states = solve_half_line(&bc, window, grid_points)?;
            Ok(ScanRow {
                parameter: nu,
                u: bc.u().clone(),
                states,
            })
        })
        .collect()
}

/// Half-line spectra for `samples` Haar-random unitaries. Sample `i` uses a
/// seed drawn as the `i`-th value of a generator seeded with `seed`.
pub fn scan_haar(
    h: &PolyMatrixHamiltonian,
    l: f64,
    samples: usize,
    seed: u64,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<ScanRow>> {
    let diag = CurrentDiagonalization::for_hamiltonian(h, l)?;
    if diag.n_plus != diag.n_minus {
        return Err(Error::UnequalMoverCounts {
            n_plus: diag.n_plus,
            n_minus: diag.n_minus,
        });
    }
    let mut master = rng(seed);
    let seeds: Vec<u64> = (0..samples).map(|_| master.random()).collect();
    seeds
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let u = haar_unitary(diag.n_plus, s);
            let bc = standard_bc(&diag, u)?;
            let states = solve_half_line(&bc, window, grid_points)?;
            Ok(ScanRow {
                parameter: i as f64,
                u: bc.u().clone(),
                states,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearTwoBandModel;

    #[test]
    fn grid_covers_half_open_interval() {
        let g = nu_grid(4);
        let pi = std::f64::consts::PI;
        assert_eq!(g, vec![-pi / 2.0, 0.0, pi / 2.0, pi]);
    }

    #[test]
    fn default_window_of_linear_model() {
        let h = LinearTwoBandModel::new(1.0, 1.0).unwrap().hamiltonian();
        let (lo, hi) = default_window(&h, 1.0).unwrap();
        assert!(lo > -1.0 && lo < -0.9999);
        assert!(hi < 1.0 && hi > 0.9999);
    }

    #[test]
    fn small_nu_scan() {
        let h = LinearTwoBandModel::new(1.0, 1.0).unwrap().hamiltonian();
        let rows = scan_nu_grid(&h, 1.0, 8, (-0.999, 0.999), 64).unwrap();
        assert_eq!(rows.len(), 8);
        for r in rows {
            let expected = usize::from(r.parameter < 0.0 && r.parameter > -std::f64::consts::PI && r.parameter.cos() < 0.999);
            assert_eq!(r.states.len(), expected, "nu = {}", r.parameter);
        }
    }

    #[test]
    fn haar_scan_is_deterministic() {
        let h = LinearTwoBandModel::new(1.0, 1.0).unwrap().hamiltonian();
        let a = scan_haar(&h, 1.0, 4, 9, (-0.999, 0.999), 64).unwrap();
        let b = scan_haar(&h, 1.0, 4, 9, (-0.999, 0.999), 64).unwrap();
        assert_eq!(a.iter().map(ScanRow::energies).collect::<Vec<_>>(), b.iter().map(ScanRow::energies).collect::<Vec<_>>());
    }
}
