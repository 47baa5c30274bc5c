//! Morse index of a CMC torus of revolution from the spectrum of its
//! one-dimensional operator.
//!
//! Separating variables with `cos(ny)`, `sin(ny)` turns each eigenvalue `λ`
//! of the 1-D operator into the eigenvalues `λ + n²` of the surface
//! operator. A negative `λ` therefore contributes `ℓ(λ) = 1 + 2·#{n >= 1 :
//! λ < -n²}` negative eigenvalues to the index.

use serde::{Deserialize, Serialize};

use crate::spectrum::{EigenvalueRecord, Parity, Spectrum};
use crate::torus::Family;
use crate::{Error, Result};

/// Distance within which a computed eigenvalue is identified with `-1` or `0`.
pub const DEFAULT_SNAP_TOL: f64 = 5e-4;

/// Number of negative surface eigenvalues generated by `lambda`.
pub fn ell(lambda: f64) -> u32 {
    if lambda >= 0.0 {
        return 0;
    }
    let mut count = 1;
    let mut n = 1u32;
    while lambda < -f64::from(n * n) {
        count += 2;
        n += 1;
    }
    count
}

/// How far each exact eigenvalue moved when snapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapReport {
    /// Raw values of the two eigenvalues set to `-1`.
    pub minus_one: [f64; 2],
    /// Raw value of the eigenvalue set to `0`.
    pub zero: f64,
}

impl SnapReport {
    pub fn max_distance(&self) -> f64 {
        (self.minus_one[0] + 1.0)
            .abs()
            .max((self.minus_one[1] + 1.0).abs())
            .max(self.zero.abs())
    }
}

/// Sets the cluster of two eigenvalues near `-1` to exactly `-1` (as one
/// double eigenvalue) and the single eigenvalue near `0` to exactly `0`.
pub fn snap_known(spectrum: &Spectrum, tol: f64) -> Result<(Spectrum, SnapReport)> {
    let near = |target: f64| -> Vec<usize> {
        spectrum
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| (r.lambda - target).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    };
    let cluster = near(-1.0);
    if cluster.len() != 2 {
        return Err(Error::Validation(format!(
            "expected a double eigenvalue within {tol} of -1, found {} eigenvalues there",
            cluster.len()
        )));
    }
    let zero = near(0.0);
    if zero.len() != 1 {
        return Err(Error::Validation(format!(
            "expected one eigenvalue within {tol} of 0, found {}",
            zero.len()
        )));
    }

    let report = SnapReport {
        minus_one: [
            spectrum.records[cluster[0]].lambda,
            spectrum.records[cluster[1]].lambda,
        ],
        zero: spectrum.records[zero[0]].lambda,
    };
    let mut out = spectrum.clone();
    for &i in &cluster {
        let r = &mut out.records[i];
        r.lambda = -1.0;
        r.parity = Parity::Both;
        r.multiplicity = 2;
    }
    out.records[zero[0]].lambda = 0.0;
    Ok((out, report))
}

/// Index and bucket counts of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCounts {
    pub ind: u32,
    /// Eigenvalues below `-4`.
    pub b1: u32,
    /// Eigenvalues in `[-4, -1)`.
    pub b2: u32,
    /// Eigenvalues in `(-1, 0)`.
    pub b3: u32,
}

/// Sum of `ℓ(λ)` over the negative eigenvalues, with multiplicity. The
/// spectrum must be certified complete through zero.
pub fn morse_index(spectrum: &Spectrum) -> Result<IndexCounts> {
    if !spectrum.certifies_nonpositive() {
        return Err(Error::Incomplete(format!(
            "spectrum not certified complete through 0 (ceiling {}, issues: {})",
            spectrum.lambda_ceiling,
            if spectrum.issues.is_empty() {
                "none".to_string()
            } else {
                spectrum.issues.join("; ")
            }
        )));
    }
    let mut c = IndexCounts {
        ind: 0,
        b1: 0,
        b2: 0,
        b3: 0,
    };
    for r in spectrum.records.iter().filter(|r| r.lambda < 0.0) {
        c.ind += ell(r.lambda);
        if r.lambda < -4.0 {
            c.b1 += 1;
        } else if r.lambda < -1.0 {
            c.b2 += 1;
        } else if r.lambda > -1.0 {
            c.b3 += 1;
        }
    }
    Ok(c)
}

/// Known lower bound for the index of a torus with `k` bulges and wrapping
/// number `w`.
pub fn lower_bound(family: Family, k: u32, w: u32) -> u32 {
    let mut bound = 5.max(2 * k + 1);
    match family {
        Family::Nodoidal if k >= 2 => bound = bound.max(11).max(2 * k + 5),
        Family::Unduloidal if w >= 2 => bound = bound.max(6 * w - 1).max(2 * k + 4 * w - 3),
        _ => {}
    }
    bound
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub surface: String,
    pub family: Family,
    pub k: u32,
    pub w: u32,
    /// Snapped nonpositive spectrum.
    pub spectrum: Spectrum,
    pub snap: SnapReport,
    /// Smallest positive eigenvalue found, if any lies below the ceiling.
    pub next_positive: Option<f64>,
    pub ind: u32,
    pub b1: u32,
    pub b2: u32,
    pub b3: u32,
    pub lower_bound: u32,
    /// `ind - lower_bound`.
    pub bound_gap: i64,
}

impl MorseReport {
    /// Snaps `raw`, computes the index and compares with the lower bound.
    pub fn build(
        surface: &str,
        family: Family,
        k: u32,
        w: u32,
        raw: &Spectrum,
        snap_tol: f64,
    ) -> Result<Self> {
        let (snapped, snap) = snap_known(raw, snap_tol)?;
        let counts = morse_index(&snapped)?;
        let bound = lower_bound(family, k, w);
        Ok(Self {
            surface: surface.to_string(),
            family,
            k,
            w,
            next_positive: snapped.first_positive(),
            spectrum: snapped.nonpositive_part(),
            snap,
            ind: counts.ind,
            b1: counts.b1,
            b2: counts.b2,
            b3: counts.b3,
            lower_bound: bound,
            bound_gap: i64::from(counts.ind) - i64::from(bound),
        })
    }

    pub fn buckets(&self) -> [u32; 3] {
        [self.b1, self.b2, self.b3]
    }

    pub fn nonpositive(&self) -> &[EigenvalueRecord] {
        &self.spectrum.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::BoundaryMode;
    use proptest::prelude::*;

    fn spectrum(values: &[(f64, u8)]) -> Spectrum {
        let mut records = Vec::new();
        let mut j = 1;
        for &(lambda, mult) in values {
            for _ in 0..mult {
                records.push(EigenvalueRecord {
                    lambda,
                    parity: if mult == 2 {
                        Parity::Both
                    } else {
                        Parity::Even
                    },
                    multiplicity: mult,
                    node_count: j - j % 2,
                    index_j: j,
                });
                j += 1;
            }
        }
        Spectrum {
            mode: BoundaryMode::PeriodicSymmetric,
            records,
            lambda_floor: -2.0,
            lambda_ceiling: 0.5,
            count_below_floor: 0,
            complete: true,
            issues: Vec::new(),
        }
    }

    /// `ℓ` from the interval form: `2i - 1` on `[-i², -(i-1)²)`.
    fn ell_by_intervals(lambda: f64) -> u32 {
        if lambda >= 0.0 {
            return 0;
        }
        let mut i = 1u32;
        loop {
            let lo = -f64::from(i * i);
            let hi = -f64::from((i - 1) * (i - 1));
            if lambda >= lo && lambda < hi {
                return 2 * i - 1;
            }
            i += 1;
        }
    }

    #[test]
    fn ell_values() {
        assert_eq!(ell(0.0), 0);
        assert_eq!(ell(0.3), 0);
        assert_eq!(ell(-0.25), 1);
        assert_eq!(ell(-1.0), 1);
        assert_eq!(ell(-1.28), 3);
        assert_eq!(ell(-4.0), 3);
        assert_eq!(ell(-4.5), 5);
        assert_eq!(ell(-9.0), 5);
        assert_eq!(ell(-9.01), 7);
    }

    #[test]
    fn u1_index() {
        let s = spectrum(&[(-1.28, 1), (-1.0, 2), (-0.25, 1), (0.0, 1)]);
        let c = morse_index(&s).unwrap();
        assert_eq!(
            c,
            IndexCounts {
                ind: 6,
                b1: 0,
                b2: 1,
                b3: 1
            }
        );
    }

    #[test]
    fn n1_index() {
        let s = spectrum(&[(-1.26, 1), (-1.19, 2), (-1.0, 2), (-0.85, 1), (0.0, 1)]);
        let c = morse_index(&s).unwrap();
        assert_eq!(
            c,
            IndexCounts {
                ind: 12,
                b1: 0,
                b2: 3,
                b3: 1
            }
        );
    }

    #[test]
    fn zero_only() {
        let c = morse_index(&spectrum(&[(0.0, 1)])).unwrap();
        assert_eq!(
            c,
            IndexCounts {
                ind: 0,
                b1: 0,
                b2: 0,
                b3: 0
            }
        );
    }

    #[test]
    fn incomplete_spectrum_refused() {
        let mut s = spectrum(&[(-1.28, 1), (0.0, 1)]);
        s.complete = false;
        assert!(matches!(morse_index(&s), Err(Error::Incomplete(_))));
        let mut s = spectrum(&[(-1.28, 1), (0.0, 1)]);
        s.lambda_ceiling = 0.0;
        assert!(morse_index(&s).is_err());
    }

    #[test]
    fn snapping() {
        let mut s = spectrum(&[
            (-1.28, 1),
            (-1.00002, 1),
            (-0.99997, 1),
            (-0.25, 1),
            (0.00001, 1),
        ]);
        s.records[1].parity = Parity::Even;
        s.records[2].parity = Parity::Odd;
        let (out, rep) = snap_known(&s, DEFAULT_SNAP_TOL).unwrap();
        let vals = out.values();
        assert_eq!(vals, vec![-1.28, -1.0, -1.0, -0.25, 0.0]);
        assert!(out.records[1].multiplicity == 2 && out.records[2].parity == Parity::Both);
        assert_eq!(rep.minus_one, [-1.00002, -0.99997]);
        assert!((rep.max_distance() - 3e-5).abs() < 1e-12);

        let (again, rep) = snap_known(&out, DEFAULT_SNAP_TOL).unwrap();
        assert_eq!(again, out);
        assert_eq!(rep.max_distance(), 0.0);
    }

    #[test]
    fn snapping_failures() {
        let s = spectrum(&[(-1.28, 1), (-1.0, 2), (-0.25, 1), (0.01, 1)]);
        assert!(matches!(
            snap_known(&s, DEFAULT_SNAP_TOL),
            Err(Error::Validation(_))
        ));
        let s = spectrum(&[(-1.28, 1), (-1.0, 1), (-0.25, 1), (0.0, 1)]);
        assert!(snap_known(&s, DEFAULT_SNAP_TOL).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(lower_bound(Family::Unduloidal, 2, 1), 5);
        assert_eq!(lower_bound(Family::Unduloidal, 3, 2), 11);
        assert_eq!(lower_bound(Family::Nodoidal, 3, 1), 11);
        assert_eq!(lower_bound(Family::Nodoidal, 1, 1), 5);
        assert_eq!(lower_bound(Family::Unduloidal, 11, 6), 43);
        assert_eq!(lower_bound(Family::Nodoidal, 11, 3), 27);
    }

    #[test]
    fn report_build() {
        let raw = spectrum(&[(-1.28, 1), (-0.9999, 2), (-0.25, 1), (1e-9, 1), (0.3, 1)]);
        let r = MorseReport::build("U1", Family::Unduloidal, 2, 1, &raw, DEFAULT_SNAP_TOL).unwrap();
        assert_eq!((r.ind, r.lower_bound, r.bound_gap), (6, 5, 1));
        assert_eq!(r.buckets(), [0, 1, 1]);
        assert_eq!(r.next_positive, Some(0.3));
        assert_eq!(r.nonpositive().len(), 5);
    }

    proptest! {
        #[test]
        fn ell_matches_interval_form(lambda in -40.0f64..1.0) {
            prop_assert_eq!(ell(lambda), ell_by_intervals(lambda));
        }

        #[test]
        fn bucket_identity(b2 in 0u8..6, b3 in 0u8..6) {
            // B1 = 0 and λ >= -4: each B2 member gives 3, each B3 member 1,
            // and the -1 pair gives 2.
            let mut v = vec![];
            for i in 0..b2 { v.push((-3.9 + 0.1 * f64::from(i), 1)); }
            v.push((-1.0, 2));
            for i in 0..b3 { v.push((-0.9 + 0.1 * f64::from(i), 1)); }
            v.push((0.0, 1));
            let c = morse_index(&spectrum(&v)).unwrap();
            prop_assert_eq!(c.ind, 3 * c.b2 + c.b3 + 2);
        }
    }
}
