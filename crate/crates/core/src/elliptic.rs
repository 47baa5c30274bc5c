//! Jacobi `dn` and the complete elliptic integral `K`.
//!
//! Both come from one arithmetic-geometric mean table per modulus: `K` from
//! its limit and `dn` from the descending Landen recurrence over the stored
//! `(a_n, c_n)` sequence. The table is built once in [`EllipticModulus::new`]
//! so repeated `dn` evaluations (the integrator calls it several times per
//! step) only pay for the backward recurrence.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Upper bound on AGM iterations. Convergence is quadratic; even τ = 1 - 1e-15
/// needs fewer than 10.
const MAX_AGM_STEPS: usize = 24;

/// Relative termination threshold `|a_n - b_n| < AGM_EPS * a_n`.
const AGM_EPS: f64 = 1e-15;

/// Elliptic modulus τ together with its AGM table.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticModulus {
    tau: f64,
    tau_prime: f64,
    /// `a_0..=a_N`
    a: Vec<f64>,
    /// `c_0..=c_N`, with `c_0 = τ`.
    c: Vec<f64>,
    quarter_period: f64,
}

impl EllipticModulus {
    /// Builds the modulus; `0 <= tau < 1` is required.
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || !(0.0..1.0).contains(&tau) {
            return Err(Error::Domain(format!(
                "elliptic modulus must satisfy 0 <= tau < 1, got {tau}"
            )));
        }
        // (1 - τ)(1 + τ) keeps the complement accurate when τ is close to 1.
        let tau_prime = ((1.0 - tau) * (1.0 + tau)).sqrt();

        let mut a = vec![1.0];
        let mut c = vec![tau];
        let mut an = 1.0_f64;
        let mut bn = tau_prime;
        for _ in 0..MAX_AGM_STEPS {
            if (an - bn).abs() < AGM_EPS * an {
                break;
            }
            let next_a = 0.5 * (an + bn);
            let next_c = 0.5 * (an - bn);
            bn = (an * bn).sqrt();
            an = next_a;
            a.push(an);
            c.push(next_c);
        }
        let quarter_period = FRAC_PI_2 / an;

        Ok(Self {
            tau,
            tau_prime,
            a,
            c,
            quarter_period,
        })
    }

    /// Builds the modulus from its complement `tau_prime = √(1 - τ²)`.
    ///
    /// Useful when τ' is the quantity known to full precision, e.g. `|t|/s`.
    pub fn from_complement(tau_prime: f64) -> Result<Self> {
        if !tau_prime.is_finite() || tau_prime <= 0.0 || tau_prime > 1.0 {
            return Err(Error::Domain(format!(
                "complementary modulus must satisfy 0 < tau' <= 1, got {tau_prime}"
            )));
        }
        let tau = ((1.0 - tau_prime) * (1.0 + tau_prime)).sqrt();
        let mut m = Self::new(tau)?;
        m.tau_prime = tau_prime;
        Ok(m)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau_prime(&self) -> f64 {
        self.tau_prime
    }

    /// Complete elliptic integral of the first kind, `K(τ)`.
    pub fn complete_k(&self) -> f64 {
        self.quarter_period
    }

    /// Jacobi delta amplitude `dn(u, τ)`.
    pub fn dn(&self, u: f64) -> f64 {
        if self.tau == 0.0 {
            return 1.0;
        }
        let k = self.quarter_period;
        // dn is even with period 2K: reduce to [0, K].
        let period = 2.0 * k;
        let mut r = u - period * (u / period).round();
        r = r.abs();
        let (_, _, dn) = self.sn_cn_dn_reduced(r);
        dn
    }

    /// `(sn, cn, dn)` for any argument.
    pub fn sn_cn_dn(&self, u: f64) -> (f64, f64, f64) {
        if self.tau == 0.0 {
            return (u.sin(), u.cos(), 1.0);
        }
        let period = 4.0 * self.quarter_period;
        let r = u - period * (u / period).round();
        self.sn_cn_dn_reduced(r)
    }

    fn sn_cn_dn_reduced(&self, u: f64) -> (f64, f64, f64) {
        let n = self.a.len() - 1;
        let mut phi = (1u64 << n) as f64 * self.a[n] * u;
        for i in (1..=n).rev() {
            phi = 0.5 * (phi + (self.c[i] / self.a[i] * phi.sin()).asin());
        }
        let (sn, cn) = phi.sin_cos();
        // Sum of positive terms; the quotient cn / cos(φ₁ - φ₀) is 0/0 at K.
        let dn = (self.tau_prime * self.tau_prime + self.tau * self.tau * cn * cn).sqrt();
        // Round-off can push dn a hair outside its range.
        (sn, cn, dn.clamp(self.tau_prime, 1.0))
    }
}

/// `K(τ)` for a validated modulus.
pub fn complete_k(m: &EllipticModulus) -> f64 {
    m.complete_k()
}

/// `dn(u, τ)` for a validated modulus.
pub fn dn(u: f64, m: &EllipticModulus) -> f64 {
    m.dn(u)
}
