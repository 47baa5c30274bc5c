//! CMC tori of revolution in S³: parameters and the Jacobi potential.
//!
//! A torus is described by `(s, t)` with `0 < |t| < s`, plus the bulge count
//! `k` and wrapping number `w`. The profile potential is
//!
//! ```text
//! V(x) = 2 v² + 32 s² t² / v²,    v = 2t / dn(2 s x, τ),    τ = √(1 - t²/s²)
//! ```
//!
//! which simplifies to `8 (t²/dn² + s² dn²)` and has period `x0 = K(τ)/s`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModulus;
use crate::potential::Potential;
use crate::{Error, Result};

/// Slack on `sin²γ <= 1/2` for parameters rounded to four decimals.
pub const SIN2_GAMMA_SLACK: f64 = 1e-3;

/// Allowed relative mismatch between a supplied domain length and `k·x0`.
pub const PERIOD_MISMATCH_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Unduloidal,
    Nodoidal,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Unduloidal => "unduloidal",
            Family::Nodoidal => "nodoidal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unduloidal" | "unduloid" | "u" => Ok(Family::Unduloidal),
            "nodoidal" | "nodoid" | "n" => Ok(Family::Nodoidal),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Parameter bundle of a CMC torus of revolution. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusParams {
    pub s: f64,
    pub t: f64,
    pub tau: EllipticModulus,
    /// Period of `v` (and of `V`).
    pub x0: f64,
    /// Declared profile period: the catalog value when one was supplied,
    /// otherwise `k·x0`.
    pub a: f64,
    pub k: u32,
    pub w: u32,
    pub sin2_gamma: f64,
    /// Mean curvature `cot 2γ`.
    pub mean_curvature: f64,
    pub family: Family,
}

/// Validates `(s, t, k, w)` and builds the torus parameters.
///
/// `family` is only needed when `st < 0`: surfaces with `st > 0` are always
/// unduloidal, while `st < 0` admits both families.
pub fn derive_params(
    s: f64,
    t: f64,
    k: u32,
    w: u32,
    a_hint: Option<f64>,
    family: Option<Family>,
) -> Result<TorusParams> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Constraint(format!("s must be positive, got {s}")));
    }
    if !t.is_finite() || t == 0.0 {
        return Err(Error::Constraint(format!("t must be nonzero, got {t}")));
    }
    if t.abs() >= s {
        return Err(Error::Constraint(format!(
            "degenerate modulus: |t| = {} must be < s = {s}",
            t.abs()
        )));
    }
    if k == 0 || w == 0 {
        return Err(Error::InvalidArgument(format!(
            "k and w must be positive, got k = {k}, w = {w}"
        )));
    }

    let st = s * t;
    let sin2_gamma = ((s + t).powi(2) - 0.25) / (4.0 * st);
    if !(sin2_gamma > 0.0 && sin2_gamma <= 0.5 + SIN2_GAMMA_SLACK) {
        return Err(Error::Constraint(format!(
            "sin²γ = {sin2_gamma} outside (0, 1/2]"
        )));
    }
    let sin2_gamma_c = sin2_gamma.min(0.5);
    let admissible = if st < 0.0 {
        st > -1.0 / (16.0 * sin2_gamma_c)
    } else {
        st < 1.0 / (16.0 * (1.0 - sin2_gamma_c))
    };
    if !admissible {
        return Err(Error::Constraint(format!(
            "st = {st} outside (-(16 sin²γ)⁻¹, 0) ∪ (0, (16 cos²γ)⁻¹) for sin²γ = {sin2_gamma}"
        )));
    }

    let family = match (st > 0.0, family) {
        (true, None | Some(Family::Unduloidal)) => Family::Unduloidal,
        (true, Some(Family::Nodoidal)) => {
            return Err(Error::Constraint(
                "st > 0 surfaces are unduloidal, not nodoidal".into(),
            ))
        }
        (false, Some(f)) => f,
        (false, None) => {
            return Err(Error::Constraint(
                "st < 0 admits both families; an explicit family is required".into(),
            ))
        }
    };

    let tau = EllipticModulus::from_complement(t.abs() / s)?;
    let x0 = tau.complete_k() / s;
    let kx0 = k as f64 * x0;
    let a = match a_hint {
        Some(a) => {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "period a must be positive, got {a}"
                )));
            }
            let mismatch = (a - kx0).abs() / a;
            if mismatch > PERIOD_MISMATCH_TOL {
                return Err(Error::Constraint(format!(
                    "a = {a} inconsistent with k·x0 = {kx0} (relative mismatch {mismatch:.2e})"
                )));
            }
            a
        }
        None => kx0,
    };

    let gamma = sin2_gamma_c.sqrt().asin().min(FRAC_PI_4);
    let mean_curvature = if gamma >= FRAC_PI_4 {
        0.0
    } else {
        1.0 / (2.0 * gamma).tan()
    };

    Ok(TorusParams {
        s,
        t,
        tau,
        x0,
        a,
        k,
        w,
        sin2_gamma,
        mean_curvature,
        family,
    })
}

impl TorusParams {
    /// `V(x) = 2v² + 32 s² t² v⁻²`.
    pub fn potential(&self, x: f64) -> f64 {
        let dn = self.tau.dn(2.0 * self.s * x);
        let dn2 = dn * dn;
        8.0 * (self.t * self.t / dn2 + self.s * self.s * dn2)
    }

    /// `v(x) = 2t / dn(2sx)`.
    pub fn profile_v(&self, x: f64) -> f64 {
        2.0 * self.t / self.tau.dn(2.0 * self.s * x)
    }

    /// `(16|st|, 8(s² + t²))`: the minimum and maximum of `V`.
    pub fn potential_range(&self) -> (f64, f64) {
        (
            16.0 * (self.s * self.t).abs(),
            8.0 * (self.s * self.s + self.t * self.t),
        )
    }

    /// Domain length used for the periodic spectral problem: exactly `k·x0`,
    /// so that `V` is periodic on it.
    pub fn problem_length(&self) -> f64 {
        self.k as f64 * self.x0
    }

    /// Relative mismatch `(a - k·x0)/a` between the declared and computed
    /// profile period.
    pub fn period_mismatch(&self) -> f64 {
        (self.a - self.problem_length()) / self.a
    }
}

impl Potential for TorusParams {
    fn value(&self, x: f64) -> f64 {
        self.potential(x)
    }
    fn period(&self) -> Option<f64> {
        Some(self.x0)
    }
    fn is_even(&self) -> bool {
        true
    }
    fn range(&self) -> (f64, f64) {
        self.potential_range()
    }
}

/// Free-function form of [`TorusParams::potential`].
pub fn potential(p: &TorusParams, x: f64) -> f64 {
    p.potential(x)
}

/// Free-function form of [`TorusParams::potential_range`].
pub fn potential_range(p: &TorusParams) -> (f64, f64) {
    p.potential_range()
}
