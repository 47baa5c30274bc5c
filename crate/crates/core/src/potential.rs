//! Potentials `V` for the operator `-d²/dx² - V`.

use std::fmt;
use std::sync::Arc;

/// A real potential on the line.
pub trait Potential: Send + Sync {
    fn value(&self, x: f64) -> f64;

    /// Smallest period of `V`, if it is periodic. Bounds the integrator's
    /// step so no oscillation of `V` is stepped over.
    fn period(&self) -> Option<f64> {
        None
    }

    /// Declared symmetry `V(x) = V(-x)`. Periodic problems verify it.
    fn is_even(&self) -> bool {
        false
    }

    /// `(min V, max V)`. The default samples one period (or `[0, 1]` when the
    /// potential is not periodic); closed forms should override it.
    fn range(&self) -> (f64, f64) {
        let span = self.period().unwrap_or(1.0);
        let n = 4096;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let v = self.value(span * i as f64 / n as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

impl<P: Potential + ?Sized> Potential for Arc<P> {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn period(&self) -> Option<f64> {
        (**self).period()
    }
    fn is_even(&self) -> bool {
        (**self).is_even()
    }
    fn range(&self) -> (f64, f64) {
        (**self).range()
    }
}

impl<P: Potential + ?Sized> Potential for &P {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn period(&self) -> Option<f64> {
        (**self).period()
    }
    fn is_even(&self) -> bool {
        (**self).is_even()
    }
    fn range(&self) -> (f64, f64) {
        (**self).range()
    }
}

/// `V ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPotential(pub f64);

impl Potential for ConstantPotential {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }
    fn is_even(&self) -> bool {
        true
    }
    fn range(&self) -> (f64, f64) {
        (self.0, self.0)
    }
}

/// A closure-backed potential with caller-declared period and symmetry.
pub struct FnPotential<F> {
    f: F,
    period: Option<f64>,
    even: bool,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnPotential<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            period: None,
            even: false,
        }
    }

    pub fn periodic(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn even(mut self) -> Self {
        self.even = true;
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Potential for FnPotential<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn period(&self) -> Option<f64> {
        self.period
    }
    fn is_even(&self) -> bool {
        self.even
    }
}

impl<F> fmt::Debug for FnPotential<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential")
            .field("period", &self.period)
            .field("even", &self.even)
            .finish_non_exhaustive()
    }
}
