//! Independent spectra for checking the shooting solver: the closed-form
//! constant-potential spectrum and a second-order finite-difference
//! discretization solved by inertia counting.

use crate::spectrum::{BoundaryMode, EigenvalueRecord, Parity, SpectralProblem, Spectrum};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Shift applied when a pivot vanishes exactly.
const BREAKDOWN_SHIFT: f64 = 1e-12;

/// Periodic spectrum of `-d²/dx² - c` on a circle of length `a`:
/// `-c` (simple) and `(2πn/a)² - c` (double) for `1 <= n <= n_max`.
pub fn constant_spectrum(c: f64, a: f64, n_max: usize) -> Result<Spectrum> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "period must be positive, got {a}"
        )));
    }
    let mut records = vec![EigenvalueRecord {
        lambda: -c,
        parity: Parity::Even,
        multiplicity: 1,
        node_count: 0,
        index_j: 1,
    }];
    for n in 1..=n_max {
        let lambda = (2.0 * PI * n as f64 / a).powi(2) - c;
        for j in [2 * n, 2 * n + 1] {
            records.push(EigenvalueRecord {
                lambda,
                parity: Parity::Both,
                multiplicity: 2,
                node_count: 2 * n,
                index_j: j,
            });
        }
    }
    let ceiling = (2.0 * PI * (n_max + 1) as f64 / a).powi(2) - c;
    Ok(Spectrum {
        mode: BoundaryMode::PeriodicSymmetric,
        records,
        lambda_floor: -c,
        lambda_ceiling: ceiling,
        count_below_floor: 0,
        complete: true,
        issues: Vec::new(),
    })
}

/// First `count` eigenvalues of the central-difference discretization of
/// the problem on `n_points` cells of width `h = a / n_points`.
///
/// Periodic problems use the `n_points`-periodic grid with wrap-around
/// coupling. Dirichlet problems use the `n_points - 1` interior points.
pub fn fd_spectrum(problem: &SpectralProblem, n_points: usize, count: usize) -> Result<Vec<f64>> {
    if n_points < 64 {
        return Err(Error::InvalidArgument(format!(
            "n_points must be at least 64, got {n_points}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let matrix = FdMatrix::new(problem, n_points);
    if count > matrix.diag.len() {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {} grid eigenvalues",
            matrix.diag.len()
        )));
    }
    let (lo, hi) = matrix.gershgorin();
    Ok((1..=count).map(|j| matrix.eigenvalue(j, lo, hi)).collect())
}

struct FdMatrix {
    /// Diagonal of the discretized operator.
    diag: Vec<f64>,
    /// Off-diagonal entry `-1/h²`, shared by every coupling.
    off: f64,
    periodic: bool,
}

impl FdMatrix {
    fn new(problem: &SpectralProblem, n: usize) -> Self {
        let a = problem.length();
        let h = a / n as f64;
        let v = problem.potential();
        let (range, periodic) = match problem.mode() {
            BoundaryMode::PeriodicSymmetric => (0..n, true),
            BoundaryMode::Dirichlet => (1..n, false),
        };
        let diag = range
            .map(|i| 2.0 / (h * h) - v.value(i as f64 * h))
            .collect();
        Self {
            diag,
            off: -1.0 / (h * h),
            periodic,
        }
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d - r));
        let hi = self
            .diag
            .iter()
            .fold(f64::NEG_INFINITY, |m, &d| m.max(d + r));
        (lo - 1.0, hi + 1.0)
    }

    /// `j`-th smallest eigenvalue by bisection on the count.
    fn eigenvalue(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalues below `sigma`: negative pivots of `A - σI`.
    fn count_below(&self, sigma: f64) -> usize {
        let mut shift = sigma;
        loop {
            if let Some(c) = self.try_count(shift) {
                return c;
            }
            shift += BREAKDOWN_SHIFT * sigma.abs().max(1.0);
        }
    }

    /// `None` on a zero pivot.
    fn try_count(&self, sigma: f64) -> Option<usize> {
        let e2 = self.off * self.off;
        if !self.periodic {
            let mut negatives = 0;
            let mut d_prev = 0.0;
            for (i, &d) in self.diag.iter().enumerate() {
                let d = if i == 0 {
                    d - sigma
                } else {
                    d - sigma - e2 / d_prev
                };
                if d == 0.0 {
                    return None;
                }
                negatives += usize::from(d < 0.0);
                d_prev = d;
            }
            return Some(negatives);
        }

        // Cyclic matrix: LDLᵀ of the leading tridiagonal block T, then the
        // sign of the Schur complement d - bᵀT⁻¹b of the last row, whose
        // border b couples to rows 0 and n-2.
        let n = self.diag.len();
        let m = n - 1;
        let mut negatives = 0;
        let mut d_prev = 0.0;
        let mut y_prev = 0.0;
        let mut quad = 0.0;
        for i in 0..m {
            let d = if i == 0 {
                self.diag[0] - sigma
            } else {
                self.diag[i] - sigma - e2 / d_prev
            };
            if d == 0.0 {
                return None;
            }
            negatives += usize::from(d < 0.0);
            let b = if i == 0 || i == m - 1 { self.off } else { 0.0 };
            // Forward solve L y = b with L's subdiagonal off / d_prev.
            let y = if i == 0 {
                b
            } else {
                b - self.off / d_prev * y_prev
            };
            quad += y * y / d;
            d_prev = d;
            y_prev = y;
        }
        let schur = self.diag[m] - sigma - quad;
        if schur == 0.0 {
            return None;
        }
        Some(negatives + usize::from(schur < 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{ConstantPotential, FnPotential};
    use std::sync::Arc;

    /// Dense symmetric eigenvalues by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
        let n = m.len();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += m[i][j] * m[i][j];
                    }
                }
            }
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn constant_spectrum_values() {
        let s = constant_spectrum(0.0, 2.0 * PI, 2).unwrap();
        let vals = s.values();
        assert_eq!(vals.len(), 5);
        for (got, want) in vals.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = constant_spectrum(1.0, 2.0 * PI, 0).unwrap();
        assert_eq!(s.values(), vec![-1.0]);
        for r in &constant_spectrum(0.3, 5.0, 10).unwrap().records {
            assert_eq!(r.node_count, r.index_j - r.index_j % 2);
        }
        assert!(constant_spectrum(0.0, 0.0, 1).is_err());
    }

    #[test]
    fn fd_free_matches_discrete_fourier() {
        let n = 512;
        let a = 2.0 * PI;
        let p = SpectralProblem::periodic(Arc::new(ConstantPotential(0.0)), a).unwrap();
        let ev = fd_spectrum(&p, n, 5).unwrap();
        let h = a / n as f64;
        let discrete = |k: f64| 2.0 / (h * h) * (1.0 - (2.0 * PI * k / n as f64).cos());
        let want = [
            0.0,
            discrete(1.0),
            discrete(1.0),
            discrete(2.0),
            discrete(2.0),
        ];
        for (got, want) in ev.iter().zip(want) {
            // Matrix entries are ~2/h² ≈ 1.3e4; inertia counts resolve ~1e-12 of that.
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
        assert!((ev[1] - 1.0).abs() < 2e-4);
    }

    #[test]
    fn fd_dirichlet_free() {
        let p = SpectralProblem::dirichlet(Arc::new(ConstantPotential(0.0)), PI).unwrap();
        let ev = fd_spectrum(&p, 1024, 4).unwrap();
        for (j, l) in ev.iter().enumerate() {
            let j = (j + 1) as f64;
            assert!((l - j * j).abs() < 1e-3 * j * j, "{l}");
        }
    }

    #[test]
    fn inertia_count_matches_dense_eigenvalues() {
        let v = FnPotential::new(|x: f64| 1.0 + 0.7 * x.cos() + 0.2 * (3.0 * x).cos())
            .periodic(2.0 * PI)
            .even();
        let v = Arc::new(v);
        for mode in [BoundaryMode::PeriodicSymmetric, BoundaryMode::Dirichlet] {
            let p = match mode {
                BoundaryMode::PeriodicSymmetric => SpectralProblem::periodic(v.clone(), 2.0 * PI),
                BoundaryMode::Dirichlet => SpectralProblem::dirichlet(v.clone(), 2.0 * PI),
            }
            .unwrap();
            let fd = FdMatrix::new(&p, 64);
            let n = fd.diag.len();
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                dense[i][i] = fd.diag[i];
                if i + 1 < n {
                    dense[i][i + 1] = fd.off;
                    dense[i + 1][i] = fd.off;
                }
            }
            if fd.periodic {
                dense[0][n - 1] = fd.off;
                dense[n - 1][0] = fd.off;
            }
            let want = jacobi_eigenvalues(dense);
            let got = fd_spectrum(&p, 64, 12).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-8 * w.abs().max(1.0),
                    "{mode}: {g} vs {w}"
                );
            }
        }
    }

    #[test]
    fn exact_breakdown_is_shifted() {
        // σ equal to the first diagonal entry zeroes the first pivot.
        let p = SpectralProblem::periodic(Arc::new(ConstantPotential(0.0)), 2.0 * PI).unwrap();
        let fd = FdMatrix::new(&p, 64);
        let sigma = fd.diag[0];
        assert!(fd.try_count(sigma).is_none());
        assert_eq!(fd.count_below(sigma), fd.count_below(sigma + 1e-9));
    }

    #[test]
    fn fd_rejects_bad_arguments() {
        let p = SpectralProblem::periodic(Arc::new(ConstantPotential(0.0)), 1.0).unwrap();
        assert!(fd_spectrum(&p, 32, 1).is_err());
        assert!(fd_spectrum(&p, 64, 0).is_err());
        assert!(fd_spectrum(&p, 64, 65).is_err());
    }
}
