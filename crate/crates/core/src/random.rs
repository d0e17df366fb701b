//! Seeded random fixtures: hermitian matrices, Hamiltonians, trace vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{c, CMatrix, CVector, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// Hermitian matrix with standard-normal entries.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn random_trace<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| gaussian_complex(rng))
}

/// Random Hamiltonian with the given top orders: every coefficient is a
/// random hermitian matrix on the components allowed to carry that order.
/// Draws are repeated until the top blocks are comfortably nondegenerate
/// (smallest to largest singular value above 1e-3).
pub fn random_hamiltonian<R: Rng>(rng: &mut R, top_orders: &[usize]) -> PolyMatrixHamiltonian {
    let m = top_orders.len();
    let big_n = top_orders.iter().copied().max().unwrap_or(1);
    loop {
        let coeffs: Vec<CMatrix> = (0..=big_n)
            .map(|n| {
                let full = random_hermitian(rng, m);
                CMatrix::from_fn(m, m, |r, col| {
                    if top_orders[r] >= n && top_orders[col] >= n {
                        full[(r, col)]
                    } else {
                        c(0.0, 0.0)
                    }
                })
            })
            .collect();
        let Ok(h) = PolyMatrixHamiltonian::new(m, top_orders.to_vec(), coeffs) else {
            continue;
        };
        let comfortable = top_orders.iter().all(|&k| {
            let s = crate::linalg::singular_values(&h.top_block(k));
            s.last().copied().unwrap_or(0.0) > 1e-3 * s[0]
        });
        if comfortable {
            return h;
        }
    }
}

/// Random top orders: `m` in `1..=max_m`, each order in `1..=max_order`.
pub fn random_orders<R: Rng>(rng: &mut R, max_m: usize, max_order: usize) -> Vec<usize> {
    let m = rng.random_range(1..=max_m);
    (0..m).map(|_| rng.random_range(1..=max_order)).collect()
}

/// Two components of top order two with a positive-definite `h_2`, so the
/// bulk spectrum is bounded below and the region under it is a gap.
pub fn random_gapped_quadratic<R: Rng>(rng: &mut R) -> PolyMatrixHamiltonian {
    let g = CMatrix::from_fn(2, 2, |_, _| gaussian_complex(rng));
    let h2 = &g * g.adjoint() + CMatrix::identity(2, 2) * c(0.5, 0.0);
    let h1 = random_hermitian(rng, 2);
    let h0 = random_hermitian(rng, 2);
    PolyMatrixHamiltonian::new(2, vec![2, 2], vec![h0, h1, h2]).expect("positive-definite top block")
}
