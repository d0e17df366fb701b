//! Polynomial matrix Hamiltonians `H(p) = sum_n h_n p^n` and their bulk bands.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, max_abs, singular_values, CMatrix, C64, ONE, ZERO};

const HERMITICITY_TOL: f64 = 1e-12;
const TOP_BLOCK_TOL: f64 = 1e-10;

/// A validated multicomponent Hamiltonian polynomial in momentum.
///
/// Component `m` carries derivatives up to its own top order `N_m`; the
/// coefficient `h_n` may only couple components whose top orders are both at
/// least `n`. Internally the components are also available in a canonical
/// order (ascending `N_m`, stable), which the current and spectra modules use;
/// every user-facing accessor works in the original ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrixHamiltonian {
    m: usize,
    top_orders: Vec<usize>,
    coeffs: Vec<CMatrix>,
    nc: usize,
    perm: Vec<usize>,
}

impl PolyMatrixHamiltonian {
    /// Validate and build. `coeffs[n]` is `h_n` for `n = 0..=max(top_orders)`.
    pub fn new(m: usize, top_orders: Vec<usize>, coeffs: Vec<CMatrix>) -> Result<Self> {
        let h = Self::from_parts_unchecked(m, top_orders, coeffs)?;
        h.check_hermitian()?;
        h.check_block_structure()?;
        h.check_top_blocks()?;
        Ok(h)
    }

    /// Shape checks only: hermiticity, block structure and top-block
    /// nondegeneracy are not enforced. Meant for tests that need to probe
    /// what happens when those invariants are broken.
    #[doc(hidden)]
    pub fn from_parts_unchecked(
        m: usize,
        top_orders: Vec<usize>,
        coeffs: Vec<CMatrix>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::DimensionMismatch("m must be positive".into()));
        }
        if top_orders.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "top_orders has {} entries, expected {m}",
                top_orders.len()
            )));
        }
        if top_orders.iter().any(|&n| n == 0) {
            return Err(Error::DimensionMismatch("top orders must be positive".into()));
        }
        let big_n = *top_orders.iter().max().expect("m > 0");
        if coeffs.len() != big_n + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficient matrices (orders 0..={big_n}), found {}",
                big_n + 1,
                coeffs.len()
            )));
        }
        for (n, h) in coeffs.iter().enumerate() {
            if h.nrows() != m || h.ncols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "h_{n} is {}x{}, expected {m}x{m}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("h_{n} has non-finite entries")));
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        perm.sort_by_key(|&i| top_orders[i]);
        let nc = top_orders.iter().sum();
        Ok(Self {
            m,
            top_orders,
            coeffs,
            nc,
            perm,
        })
    }

    fn check_hermitian(&self) -> Result<()> {
        for (n, h) in self.coeffs.iter().enumerate() {
            let deviation = hermitian_deviation(h);
            if deviation > HERMITICITY_TOL * max_abs(h) {
                return Err(Error::NonHermitianCoefficient { order: n, deviation });
            }
        }
        Ok(())
    }

    fn check_block_structure(&self) -> Result<()> {
        for (n, h) in self.coeffs.iter().enumerate() {
            for row in 0..self.m {
                for col in 0..self.m {
                    let forbidden = self.top_orders[row] < n || self.top_orders[col] < n;
                    if forbidden && h[(row, col)] != ZERO {
                        return Err(Error::BlockStructureViolation { order: n, row, col });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_top_blocks(&self) -> Result<()> {
        let mut classes: Vec<usize> = self.top_orders.clone();
        classes.sort_unstable();
        classes.dedup();
        for k in classes {
            let block = self.top_block(k);
            let s = singular_values(&block);
            let largest = s.first().copied().unwrap_or(0.0);
            let smallest = s.last().copied().unwrap_or(0.0);
            let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
            if ratio <= TOP_BLOCK_TOL {
                return Err(Error::DegenerateTopOrderBlock { order: k, ratio });
            }
        }
        Ok(())
    }

    /// The diagonal block of `h_k` over the components with top order `k`.
    pub fn top_block(&self, k: usize) -> CMatrix {
        let idx: Vec<usize> = (0..self.m).filter(|&i| self.top_orders[i] == k).collect();
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.coeffs[k][(idx[r], idx[c])])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn top_orders(&self) -> &[usize] {
        &self.top_orders
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Degrees of freedom `sum_m N_m`.
    pub fn nc(&self) -> usize {
        self.nc
    }

    /// Highest momentum order `N`.
    pub fn max_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `perm[k]` is the user index of the `k`-th component in canonical order.
    pub fn canonical_perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn canonical_top_orders(&self) -> Vec<usize> {
        self.perm.iter().map(|&i| self.top_orders[i]).collect()
    }

    /// `h_n` with rows and columns in canonical component order.
    pub fn canonical_coeff(&self, n: usize) -> CMatrix {
        let h = &self.coeffs[n];
        CMatrix::from_fn(self.m, self.m, |r, c| h[(self.perm[r], self.perm[c])])
    }

    /// `H(p)` in the user component ordering.
    pub fn evaluate(&self, p: C64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.m, self.m);
        for h in self.coeffs.iter().rev() {
            acc = acc * p + h;
        }
        acc
    }

    /// `dH/dp` at `p`.
    pub fn velocity(&self, p: C64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.m, self.m);
        for (n, h) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * p + h * C64::new(n as f64, 0.0);
        }
        acc
    }

    /// Sorted band energies at each real momentum.
    pub fn bulk_bands(&self, p_values: &[f64]) -> Vec<Vec<f64>> {
        p_values
            .iter()
            .map(|&p| {
                let h = self.evaluate(C64::new(p, 0.0));
                let sym = (&h + h.adjoint()) * (ONE * 0.5);
                let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
                e.sort_by(f64::total_cmp);
                e
            })
            .collect()
    }

    /// Energy intervals free of bulk states, estimated on a uniform momentum
    /// grid over `[-p_max, p_max]`.
    ///
    /// Interior gaps are the complement of the union of sampled band ranges.
    /// The region below the lowest band (above the highest) is reported as an
    /// interval open to `-inf` (`+inf`) only when that band's extreme value is
    /// reached strictly inside the grid; otherwise the band keeps going past
    /// the cutoff and nothing is claimed there.
    pub fn gap_window(&self, p_max: f64, n_samples: usize) -> Result<GapReport> {
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::EmptyRange);
        }
        if n_samples < 101 {
            return Err(Error::InvalidParameter(format!(
                "gap_window needs at least 101 samples, got {n_samples}"
            )));
        }
        let step = 2.0 * p_max / (n_samples - 1) as f64;
        let ps: Vec<f64> = (0..n_samples).map(|i| -p_max + step * i as f64).collect();
        let bands = self.bulk_bands(&ps);
        let nb = self.m;

        let mut ranges: Vec<(f64, f64)> = Vec::with_capacity(nb);
        let mut argmin_lowest = 0;
        let mut argmax_highest = 0;
        let mut resolution = 0.0_f64;
        for b in 0..nb {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (i, e) in bands.iter().enumerate() {
                if e[b] < lo {
                    lo = e[b];
                    if b == 0 {
                        argmin_lowest = i;
                    }
                }
                if e[b] > hi {
                    hi = e[b];
                    if b == nb - 1 {
                        argmax_highest = i;
                    }
                }
                if i > 0 {
                    resolution = resolution.max((e[b] - bands[i - 1][b]).abs());
                }
            }
            ranges.push((lo, hi));
        }
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for r in ranges {
            match merged.last_mut() {
                Some(last) if r.0 <= last.1 => last.1 = last.1.max(r.1),
                _ => merged.push(r),
            }
        }
        let envelope = (merged[0].0, merged.iter().fold(f64::NEG_INFINITY, |a, r| a.max(r.1)));
        let interior = |i: usize| i > 0 && i + 1 < n_samples;
        let mut intervals = Vec::new();
        if interior(argmin_lowest) {
            intervals.push((f64::NEG_INFINITY, envelope.0));
        }
        for w in merged.windows(2) {
            intervals.push((w[0].1, w[1].0));
        }
        if interior(argmax_highest) {
            intervals.push((envelope.1, f64::INFINITY));
        }
        Ok(GapReport {
            intervals,
            envelope,
            resolution,
        })
    }
}

/// Result of [`PolyMatrixHamiltonian::gap_window`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Open energy intervals without sampled bulk states.
    pub intervals: Vec<(f64, f64)>,
    /// Lowest and highest sampled band energies.
    pub envelope: (f64, f64),
    /// Largest energy step between neighbouring samples of one band; gap
    /// edges are only trustworthy to about this accuracy.
    pub resolution: f64,
}

impl GapReport {
    /// Widest interval, with infinite sides clipped to `envelope -/+ pad`.
    pub fn widest(&self, pad: f64) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                let lo = if lo.is_finite() { lo } else { self.envelope.0 - pad };
                let hi = if hi.is_finite() { hi } else { self.envelope.1 + pad };
                (lo, hi)
            })
            .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    fn quadratic() -> PolyMatrixHamiltonian {
        PolyMatrixHamiltonian::new(1, vec![2], vec![scalar(0.0), scalar(0.0), scalar(1.0)]).unwrap()
    }

    fn linear() -> PolyMatrixHamiltonian {
        let h0 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let h1 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        PolyMatrixHamiltonian::new(2, vec![1, 1], vec![h0, h1]).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = PolyMatrixHamiltonian::new(
            1,
            vec![2],
            vec![scalar(0.0), scalar(0.0), CMatrix::from_element(1, 1, c(0.0, 1.0))],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonHermitianCoefficient { order: 2, .. }));
    }

    #[test]
    fn rejects_zero_top_block() {
        let err =
            PolyMatrixHamiltonian::new(1, vec![2], vec![scalar(0.0), scalar(1.0), scalar(0.0)])
                .unwrap_err();
        assert!(matches!(err, Error::DegenerateTopOrderBlock { order: 2, .. }));
    }

    #[test]
    fn rejects_coupling_beyond_top_order() {
        let h0 = CMatrix::zeros(2, 2);
        let h1 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]);
        let h2 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ONE]);
        let err = PolyMatrixHamiltonian::new(2, vec![1, 2], vec![h0, h1, h2]).unwrap_err();
        assert_eq!(err, Error::BlockStructureViolation { order: 2, row: 0, col: 1 });
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(quadratic().evaluate(c(2.0, 0.0))[(0, 0)], c(4.0, 0.0));
        let h = linear();
        let at_zero = h.evaluate(ZERO);
        assert_eq!(at_zero, CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let at_i = h.evaluate(c(0.0, 1.0));
        assert_eq!(at_i, CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), ONE, ONE, c(0.0, -1.0)]));
    }

    #[test]
    fn bands_of_linear_model() {
        let b = linear().bulk_bands(&[0.0, 1.0]);
        assert!((b[0][0] + 1.0).abs() < 1e-14 && (b[0][1] - 1.0).abs() < 1e-14);
        assert!((b[1][0] + 2f64.sqrt()).abs() < 1e-14 && (b[1][1] - 2f64.sqrt()).abs() < 1e-14);
        assert!((quadratic().bulk_bands(&[3.0])[0][0] - 9.0).abs() < 1e-14);
    }

    #[test]
    fn gap_of_linear_model() {
        let g = linear().gap_window(10.0, 201).unwrap();
        assert_eq!(g.intervals.len(), 1);
        let (lo, hi) = g.intervals[0];
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_of_quadratic_model_is_open_below() {
        let g = quadratic().gap_window(10.0, 201).unwrap();
        assert_eq!(g.intervals, vec![(f64::NEG_INFINITY, 0.0)]);
    }

    #[test]
    fn gapless_line_has_no_gap() {
        let h = PolyMatrixHamiltonian::new(1, vec![1], vec![scalar(0.0), scalar(1.0)]).unwrap();
        assert!(h.gap_window(10.0, 101).unwrap().intervals.is_empty());
        assert_eq!(h.gap_window(0.0, 101), Err(Error::EmptyRange));
    }

    #[test]
    fn canonical_order_sorts_by_top_order() {
        let h0 = CMatrix::zeros(2, 2);
        let h1 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(2.0, 0.0)]);
        let h2 = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), ZERO, ZERO, ZERO]);
        let h = PolyMatrixHamiltonian::new(2, vec![2, 1], vec![h0, h1, h2]).unwrap();
        assert_eq!(h.canonical_perm(), &[1, 0]);
        assert_eq!(h.canonical_top_orders(), vec![1, 2]);
        assert_eq!(h.canonical_coeff(2)[(1, 1)], c(3.0, 0.0));
    }
}
