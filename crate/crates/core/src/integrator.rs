//! Adaptive initial-value integration of `f'' + (V + λ) f = 0`.
//!
//! The second-order equation is integrated as the system
//! `(f, f')' = (f', -(V + λ) f)` with the Dormand–Prince 5(4) embedded pair.
//! Error is controlled per unit length: a step of size `h` is accepted when
//! its local error estimate is below `tol · h · (1 + |y|)` componentwise.
//!
//! Zeros of `f` are tracked along the way. Each accepted step is scanned for
//! sign changes on a cubic Hermite interpolant at [`SCAN_POINTS`] points;
//! every sign change is then located by bisection on exact Runge–Kutta
//! sub-steps from the start of the step. Zeros are collected on the half-open
//! interval `[0, x_end)`.

use serde::{Deserialize, Serialize};

use crate::potential::Potential;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Interpolant samples per accepted step used to detect sign changes.
pub const SCAN_POINTS: usize = 8;

/// Node locations are refined until the bracket is this narrow.
pub const NODE_TOL: f64 = 1e-10;

/// Relative distance from `x_end` below which a located zero is taken to be
/// the endpoint itself.
const END_EPS: f64 = 1e-9;

const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b5 - b4 for the embedded error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One initial-value shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub lambda: f64,
    pub f0: f64,
    pub df0: f64,
    pub x_end: f64,
    pub f_end: f64,
    pub df_end: f64,
    /// Zeros of `f` in `[0, x_end)`, increasing.
    pub nodes: Vec<f64>,
    /// `f'` at each entry of `nodes`.
    pub node_slopes: Vec<f64>,
    /// Largest `|f|` seen at step boundaries and samples.
    pub max_abs_f: f64,
    /// `(x, f(x))` pairs, present when samples were requested.
    pub samples: Option<Vec<(f64, f64)>>,
    pub steps: usize,
}

/// Transfer matrix of initial data `(f, f')(0) -> (f, f')(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy(pub [[f64; 2]; 2]);

impl Monodromy {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

/// Endpoint state of a shot and the number of sign changes of `f` in
/// `(0, x_end]`. Cheaper than a [`SolutionTrace`]; used by spectral scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEnd {
    pub f: f64,
    pub df: f64,
    pub sign_changes: usize,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub tol: f64,
    /// Upper bound on the step size. `None` uses a sixteenth of the
    /// potential's period (or of the interval when `V` is not periodic).
    pub max_step: Option<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_step: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum NodeMode {
    Count,
    Locate,
}

struct Rhs<'a, P: ?Sized> {
    v: &'a P,
    lambda: f64,
}

impl<P: Potential + ?Sized> Rhs<'_, P> {
    #[inline]
    fn q(&self, x: f64) -> f64 {
        self.v.value(x) + self.lambda
    }

    /// One Dormand–Prince step from `(x, y)` with `q0 = q(x)`.
    /// Returns the 5th-order solution, the error estimate and `q(x + h)`.
    #[inline]
    fn step(&self, x: f64, y: [f64; 2], q0: f64, h: f64) -> ([f64; 2], [f64; 2], f64) {
        let k1 = [y[1], -q0 * y[0]];

        let y2 = [y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]];
        let k2 = [y2[1], -self.q(x + C2 * h) * y2[0]];

        let y3 = [
            y[0] + h * (A31 * k1[0] + A32 * k2[0]),
            y[1] + h * (A31 * k1[1] + A32 * k2[1]),
        ];
        let k3 = [y3[1], -self.q(x + C3 * h) * y3[0]];

        let y4 = [
            y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        ];
        let k4 = [y4[1], -self.q(x + C4 * h) * y4[0]];

        let y5 = [
            y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        ];
        let k5 = [y5[1], -self.q(x + C5 * h) * y5[0]];

        let q_end = self.q(x + h);
        let y6 = [
            y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        ];
        let k6 = [y6[1], -q_end * y6[0]];

        let yn = [
            y[0] + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
            y[1] + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
        ];
        let k7 = [yn[1], -q_end * yn[0]];

        let err = [
            h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
            h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
        ];
        (yn, err, q_end)
    }
}

/// Cubic Hermite interpolant of `f` across a step, from `f` and `f'` at
/// both ends.
#[inline]
fn hermite(theta: f64, h: f64, y0: [f64; 2], y1: [f64; 2]) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0[0] + h10 * h * y0[1] + h01 * y1[0] + h11 * h * y1[1]
}

struct Output {
    y_end: [f64; 2],
    sign_changes: usize,
    nodes: Vec<f64>,
    node_slopes: Vec<f64>,
    max_abs_f: f64,
    samples: Option<Vec<(f64, f64)>>,
    steps: usize,
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_step: None,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    fn validate(&self, y0: [f64; 2], x_end: f64) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(x_end.is_finite() && x_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "x_end must be positive, got {x_end}"
            )));
        }
        if y0 == [0.0, 0.0] || !y0.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "initial data must be finite and not (0, 0)".into(),
            ));
        }
        Ok(())
    }

    fn step_cap<P: Potential + ?Sized>(&self, v: &P, x_end: f64) -> f64 {
        let cap = self
            .max_step
            .unwrap_or_else(|| v.period().unwrap_or(x_end) / 16.0);
        cap.min(x_end)
    }

    /// Full shot with refined node locations.
    pub fn integrate<P: Potential + ?Sized>(
        &self,
        v: &P,
        lambda: f64,
        f0: f64,
        df0: f64,
        x_end: f64,
    ) -> Result<SolutionTrace> {
        self.integrate_sampled(v, lambda, f0, df0, x_end, &[])
    }

    /// Like [`Integrator::integrate`], also recording `f` at the given
    /// increasing positions in `[0, x_end]`.
    pub fn integrate_sampled<P: Potential + ?Sized>(
        &self,
        v: &P,
        lambda: f64,
        f0: f64,
        df0: f64,
        x_end: f64,
        sample_at: &[f64],
    ) -> Result<SolutionTrace> {
        let out = self.run(v, lambda, [f0, df0], x_end, NodeMode::Locate, sample_at)?;
        Ok(SolutionTrace {
            lambda,
            f0,
            df0,
            x_end,
            f_end: out.y_end[0],
            df_end: out.y_end[1],
            nodes: out.nodes,
            node_slopes: out.node_slopes,
            max_abs_f: out.max_abs_f,
            samples: out.samples,
            steps: out.steps,
        })
    }

    /// Endpoint values plus a sign-change count, without node refinement.
    pub fn shoot<P: Potential + ?Sized>(
        &self,
        v: &P,
        lambda: f64,
        y0: [f64; 2],
        x_end: f64,
    ) -> Result<ShotEnd> {
        let out = self.run(v, lambda, y0, x_end, NodeMode::Count, &[])?;
        Ok(ShotEnd {
            f: out.y_end[0],
            df: out.y_end[1],
            sign_changes: out.sign_changes,
        })
    }

    /// Monodromy matrix over `[0, a]`, columns from the shots with initial
    /// data `(1, 0)` and `(0, 1)`.
    pub fn monodromy<P: Potential + ?Sized>(
        &self,
        v: &P,
        lambda: f64,
        a: f64,
    ) -> Result<Monodromy> {
        let c1 = self.shoot(v, lambda, [1.0, 0.0], a)?;
        let c2 = self.shoot(v, lambda, [0.0, 1.0], a)?;
        Ok(Monodromy([[c1.f, c2.f], [c1.df, c2.df]]))
    }

    fn run<P: Potential + ?Sized>(
        &self,
        v: &P,
        lambda: f64,
        y0: [f64; 2],
        x_end: f64,
        mode: NodeMode,
        sample_at: &[f64],
    ) -> Result<Output> {
        self.validate(y0, x_end)?;
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        let rhs = Rhs { v, lambda };
        let cap = self.step_cap(v, x_end);

        let mut x = 0.0;
        let mut y = y0;
        let mut q = rhs.q(0.0);
        let mut h = cap / 8.0;
        let mut steps = 0usize;

        let mut nodes = Vec::new();
        let mut node_slopes = Vec::new();
        let mut sign_changes = 0usize;
        let mut max_abs_f = y0[0].abs();
        // Sign of the most recent nonzero f value; 0 right after an exact zero.
        let mut last_sign = y0[0].signum_or_zero();
        let mut last_theta_x = 0.0;
        if y0[0] == 0.0 {
            nodes.push(0.0);
            node_slopes.push(y0[1]);
        }

        let mut samples = (!sample_at.is_empty()).then(|| Vec::with_capacity(sample_at.len()));
        let mut next_sample = 0usize;
        if let Some(out) = samples.as_mut() {
            while next_sample < sample_at.len() && sample_at[next_sample] <= 0.0 {
                out.push((sample_at[next_sample], y0[0]));
                next_sample += 1;
            }
        }

        while x < x_end {
            if steps >= MAX_STEPS {
                return Err(Error::IntegrationFailure { x, step: h });
            }
            let last = x + h >= x_end;
            if last {
                h = x_end - x;
            }
            let (yn, err, qn) = rhs.step(x, y, q, h);

            let mut norm = 0.0_f64;
            for i in 0..2 {
                let scale = self.tol * h * (1.0 + y[i].abs().max(yn[i].abs()));
                let e = err[i].abs() / scale;
                // f64::max would drop a NaN.
                norm = if e.is_nan() { f64::NAN } else { norm.max(e) };
            }
            if !norm.is_finite() || norm > 1.0 {
                let factor = if norm.is_finite() {
                    (SAFETY * norm.powf(-0.25)).max(MIN_FACTOR)
                } else {
                    MIN_FACTOR
                };
                h *= factor;
                if h < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::IntegrationFailure { x, step: h });
                }
                continue;
            }

            // Accepted: scan the step for sign changes of f.
            let x_next = if last { x_end } else { x + h };
            for i in 1..=SCAN_POINTS {
                let theta = i as f64 / SCAN_POINTS as f64;
                let fv = if i == SCAN_POINTS {
                    yn[0]
                } else {
                    hermite(theta, h, y, yn)
                };
                let xs = x + theta * h;
                let s = fv.signum_or_zero();
                if s == 0.0 {
                    // Exact zero; the step end of the last step is excluded.
                    if !(last && i == SCAN_POINTS) {
                        sign_changes += 1;
                        if mode == NodeMode::Locate {
                            nodes.push(xs);
                            node_slopes.push(if i == SCAN_POINTS {
                                yn[1]
                            } else {
                                rhs.step(x, y, q, theta * h).0[1]
                            });
                        }
                    }
                    last_sign = 0.0;
                } else {
                    if last_sign != 0.0 && s != last_sign {
                        sign_changes += 1;
                        if mode == NodeMode::Locate {
                            let lo = ((last_theta_x - x) / h).max(0.0);
                            let (xn, slope) = refine_node(&rhs, x, y, yn, q, h, lo, theta);
                            nodes.push(xn);
                            node_slopes.push(slope);
                        }
                    }
                    last_sign = s;
                    last_theta_x = xs;
                }
            }

            if let Some(out) = samples.as_mut() {
                while next_sample < sample_at.len() && sample_at[next_sample] <= x_next {
                    let xs = sample_at[next_sample];
                    let theta = ((xs - x) / h).clamp(0.0, 1.0);
                    let fv = if theta >= 1.0 {
                        yn[0]
                    } else {
                        rhs.step(x, y, q, theta * h).0[0]
                    };
                    max_abs_f = max_abs_f.max(fv.abs());
                    out.push((xs, fv));
                    next_sample += 1;
                }
            }

            x = x_next;
            y = yn;
            q = qn;
            steps += 1;
            max_abs_f = max_abs_f.max(y[0].abs());

            let factor = if norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * norm.powf(-0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = (h * factor).min(cap);
        }

        // A zero within round-off of x_end is the endpoint zero, which the
        // half-open convention leaves to the next period.
        let end_eps = END_EPS * x_end.max(1.0);
        while nodes
            .last()
            .is_some_and(|&xn| x_end - xn < end_eps && xn > 0.0)
        {
            nodes.pop();
            node_slopes.pop();
        }

        Ok(Output {
            y_end: y,
            sign_changes,
            nodes,
            node_slopes,
            max_abs_f,
            samples,
            steps,
        })
    }
}

/// Bisection for a zero of `f` between step fractions `lo` and `hi`, using
/// exact sub-steps from the step start. Returns the location and `f'` there.
#[allow(clippy::too_many_arguments)]
fn refine_node<P: Potential + ?Sized>(
    rhs: &Rhs<'_, P>,
    x: f64,
    y: [f64; 2],
    yn: [f64; 2],
    q: f64,
    h: f64,
    mut lo: f64,
    mut hi: f64,
) -> (f64, f64) {
    let eval = |theta: f64| -> [f64; 2] {
        if theta <= 0.0 {
            y
        } else if theta >= 1.0 {
            yn
        } else {
            rhs.step(x, y, q, theta * h).0
        }
    };
    let mut f_lo = eval(lo)[0];
    let f_hi = eval(hi)[0];
    let exact = f_lo.signum() != f_hi.signum() && f_lo != 0.0 && f_hi != 0.0;
    let value = |theta: f64| -> f64 {
        if exact {
            eval(theta)[0]
        } else {
            hermite(theta, h, y, yn)
        }
    };
    if !exact {
        f_lo = hermite(lo, h, y, yn);
    }
    while (hi - lo) * h > NODE_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = value(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (x + theta * h, eval(theta)[1])
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    #[inline]
    fn signum_or_zero(self) -> f64 {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

/// Shot with refined nodes using [`Integrator::new`]`(tol)`.
pub fn integrate<P: Potential + ?Sized>(
    v: &P,
    lambda: f64,
    f0: f64,
    df0: f64,
    x_end: f64,
    tol: f64,
) -> Result<SolutionTrace> {
    Integrator::new(tol).integrate(v, lambda, f0, df0, x_end)
}

/// Monodromy matrix over `[0, a]` using [`Integrator::new`]`(tol)`.
pub fn monodromy<P: Potential + ?Sized>(v: &P, lambda: f64, a: f64, tol: f64) -> Result<Monodromy> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "period must be positive, got {a}"
        )));
    }
    Integrator::new(tol).monodromy(v, lambda, a)
}
