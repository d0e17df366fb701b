//! Closed-form reference models: a single quadratic band, the two-band
//! linear model, a square well in front of the boundary, and the quartic
//! single-band current matrix.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{c, CMatrix, C64, ZERO};

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn principal_angle(nu: f64) -> f64 {
    let r = (nu + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Extrapolation length of the one-component boundary condition
/// `psi(0) = L psi'(0)`. `Infinite` stands for the pure Neumann case
/// `psi'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryLength {
    Finite(f64),
    Infinite,
}

impl BoundaryLength {
    pub fn finite(self) -> Result<f64> {
        match self {
            BoundaryLength::Finite(v) => Ok(v),
            BoundaryLength::Infinite => Err(Error::SingularAngle),
        }
    }
}

/// `L = l cot(nu / 2)`.
pub fn angle_to_length(l: f64, nu: f64) -> BoundaryLength {
    let half = principal_angle(nu) / 2.0;
    let (s, co) = half.sin_cos();
    if s.abs() <= 1e-12 {
        BoundaryLength::Infinite
    } else if co.abs() <= 1e-15 {
        BoundaryLength::Finite(0.0)
    } else {
        BoundaryLength::Finite(l * co / s)
    }
}

/// Inverse of [`angle_to_length`], with `nu` in `(-pi, pi]`; `L < 0` maps to
/// `(-pi, 0)`.
pub fn length_to_angle(l: f64, length: BoundaryLength) -> f64 {
    match length {
        BoundaryLength::Infinite => 0.0,
        BoundaryLength::Finite(v) if v == 0.0 => PI,
        BoundaryLength::Finite(v) => 2.0 * (l / v).atan(),
    }
}

/// `H(p) = h2 p^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticModel {
    pub h2: f64,
    pub l: f64,
}

impl QuadraticModel {
    pub fn new(h2: f64, l: f64) -> Result<Self> {
        require_positive("h2", h2)?;
        require_positive("l", l)?;
        Ok(Self { h2, l })
    }

    pub fn hamiltonian(&self) -> PolyMatrixHamiltonian {
        let s = |v: f64| CMatrix::from_element(1, 1, c(v, 0.0));
        PolyMatrixHamiltonian::new(1, vec![2], vec![s(0.0), s(0.0), s(self.h2)]).expect("valid by construction")
    }
}

/// `-h2 / L^2` for `L < 0`; no normalizable state otherwise.
pub fn quadratic_bound_energy(model: &QuadraticModel, length: BoundaryLength) -> Option<f64> {
    match length {
        BoundaryLength::Finite(v) if v < 0.0 => Some(-model.h2 / (v * v)),
        _ => None,
    }
}

/// `H(p) = tau_z vz p + tau_x dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTwoBandModel {
    pub vz: f64,
    pub dx: f64,
}

impl LinearTwoBandModel {
    pub fn new(vz: f64, dx: f64) -> Result<Self> {
        require_positive("vz", vz)?;
        require_positive("dx", dx)?;
        Ok(Self { vz, dx })
    }

    pub fn hamiltonian(&self) -> PolyMatrixHamiltonian {
        let d = c(self.dx, 0.0);
        let v = c(self.vz, 0.0);
        let h0 = CMatrix::from_row_slice(2, 2, &[ZERO, d, d, ZERO]);
        let h1 = CMatrix::from_row_slice(2, 2, &[v, ZERO, ZERO, -v]);
        PolyMatrixHamiltonian::new(2, vec![1, 1], vec![h0, h1]).expect("valid by construction")
    }
}

/// Energy `dx cos(nu)` and momentum `-i (dx/vz) sin(nu)` of the single
/// bound state, present only for `-pi < nu < 0`.
pub fn linear_bound_state(model: &LinearTwoBandModel, nu: f64) -> Option<(f64, C64)> {
    let nu = principal_angle(nu);
    if nu > -PI && nu < 0.0 {
        Some((model.dx * nu.cos(), c(0.0, -(model.dx / model.vz) * nu.sin())))
    } else {
        None
    }
}

/// Extrapolation length `sqrt(h2 / V)` produced by a potential step of height
/// `V` at the boundary. It tends to zero (hard wall) as `V` grows.
pub fn wall_effective_bc(h2: f64, v_wall: f64) -> Result<f64> {
    require_positive("h2", h2)?;
    require_positive("wall height", v_wall)?;
    Ok((h2 / v_wall).sqrt())
}

/// Square well of depth `v0` occupying `0 < x < x0` next to a hard wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialWellModel {
    pub h2: f64,
    pub v0: f64,
    pub x0: f64,
}

impl PotentialWellModel {
    pub fn new(h2: f64, v0: f64, x0: f64) -> Result<Self> {
        require_positive("h2", h2)?;
        require_positive("v0", v0)?;
        require_positive("x0", x0)?;
        Ok(Self { h2, v0, x0 })
    }

    /// `k0 = sqrt(v0 / h2)`.
    pub fn k0(&self) -> f64 {
        (self.v0 / self.h2).sqrt()
    }
}

/// Low-energy extrapolation length of the well, `tan(k0 x0) / k0`.
/// `Infinite` when `cos(k0 x0)` vanishes (a state sits exactly at zero energy).
pub fn well_effective_bc(model: &PotentialWellModel) -> BoundaryLength {
    let k0 = model.k0();
    let (s, co) = (k0 * model.x0).sin_cos();
    if co.abs() <= 1e-12 {
        BoundaryLength::Infinite
    } else {
        BoundaryLength::Finite(s / (co * k0))
    }
}

/// Like [`well_effective_bc`], but a resonant width is an error.
pub fn well_effective_length(model: &PotentialWellModel) -> Result<f64> {
    match well_effective_bc(model) {
        BoundaryLength::Finite(v) => Ok(v),
        BoundaryLength::Infinite => Err(Error::ResonantWidth),
    }
}

/// Exact bound states of the well, ascending (deepest first), optionally
/// truncated to the `max_states` deepest.
///
/// Roots of `tan(k x0) = -k / kappa` are found as zeros of the pole-free
/// `g = (kappa / k) sin(k x0) + cos(k x0)`. Writing `theta = k x0`, each
/// interval `((n + 1/2) pi, (n + 1) pi)` holds exactly one root and `g` keeps
/// its sign elsewhere, so those nodes bracket every state.
pub fn well_exact_spectrum(model: &PotentialWellModel, max_states: Option<usize>) -> Vec<f64> {
    let PotentialWellModel { h2, v0, x0 } = *model;
    let energy_of = |theta: f64| (h2 * (theta / x0).powi(2) - v0).min(0.0);
    let g = |e: f64| {
        let k = ((v0 + e) / h2).max(0.0).sqrt();
        let kappa = (-e / h2).max(0.0).sqrt();
        let sinc = if k == 0.0 { x0 } else { (k * x0).sin() / k };
        kappa * sinc + (k * x0).cos()
    };
    let theta_max = model.k0() * x0;
    let mut out = Vec::new();
    let mut n = 0usize;
    loop {
        let a = (n as f64 + 0.5) * PI;
        if a >= theta_max {
            break;
        }
        let b = ((n + 1) as f64 * PI).min(theta_max);
        let (mut lo, mut hi) = (energy_of(a), energy_of(b));
        let (mut glo, ghi) = (g(lo), g(hi));
        if glo != 0.0 && ghi != 0.0 && glo.signum() != ghi.signum() {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if root < 0.0 && root > -v0 {
                out.push(root);
            }
        }
        n += 1;
    }
    out.sort_by(f64::total_cmp);
    if let Some(k) = max_states {
        out.truncate(k);
    }
    out
}

/// Effective quadratic model of the linear two-band model near its band
/// bottom: `h2 = vz^2 / (2 dx)` and length scale `vz / (2 dx)`. The angle of
/// the boundary condition carries over unchanged.
pub fn low_energy_reduction(model: &LinearTwoBandModel) -> (f64, f64) {
    let h2 = model.vz * model.vz / (2.0 * model.dx);
    let l2 = model.vz / (2.0 * model.dx);
    (h2, l2)
}

/// Eigenvalues of the current matrix of `H(p) = h2 p^2 + h4 p^4`,
/// `(+-sqrt(4 J4^2 + J2^2) +- J2) / 2` with `J2 = h2 / l`, `J4 = h4 / l^3`,
/// sorted descending.
pub fn n4_current_eigenvalues(h2: f64, h4: f64, l: f64) -> [f64; 4] {
    let j2 = h2 / l;
    let j4 = h4 / l.powi(3);
    let r = (4.0 * j4 * j4 + j2 * j2).sqrt();
    let mut v = [0.5 * (r + j2), 0.5 * (r - j2), 0.5 * (-r + j2), 0.5 * (-r - j2)];
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `H(p) = h2 p^2 + h4 p^4` as a one-component Hamiltonian.
pub fn quartic_hamiltonian(h2: f64, h4: f64) -> Result<PolyMatrixHamiltonian> {
    let s = |v: f64| CMatrix::from_element(1, 1, c(v, 0.0));
    PolyMatrixHamiltonian::new(1, vec![4], vec![s(0.0), s(0.0), s(h2), s(0.0), s(h4)])
}
