//! Eigenvalues of `-d²/dx² - V` by shooting and node counting.
//!
//! # Periodic problems with even `V`
//!
//! When `V(x) = V(-x)` and `V(x + a) = V(x)`, every periodic eigenspace has a
//! basis of even and odd functions, found by shooting from `(f, f')(0) =
//! (1, 0)` and `(0, 1)`. Symmetry about `a/2` turns periodicity into a
//! half-period condition, so the two scalar discriminants
//!
//! ```text
//! D_even(λ) = f'(a/2)  for (f, f')(0) = (1, 0)
//! D_odd(λ)  = f(a/2)   for (f, f')(0) = (0, 1)
//! ```
//!
//! vanish exactly at the even and odd periodic eigenvalues.
//!
//! The same half-period shots also give the number of even (Neumann) and odd
//! (Dirichlet) eigenvalues below `λ` from the zero count of `f` on
//! `(0, a/2)`. [`find_spectrum`] scans a λ grid, and each cell whose count
//! rises by one holds exactly one discriminant zero, which is polished by
//! bisection. Cells whose count rises by more are subdivided. A root's index
//! `j` in `λ₁ < λ₂ ≤ λ₃ ≤ …` is read off from the node count of its
//! eigenfunction over a full period: `j` nodes when `j` is even, `j - 1`
//! when odd.
//!
//! # Dirichlet problems
//!
//! Eigenvalues are the zeros of `λ ↦ f(a; λ)` with `(f, f')(0) = (0, 1)`,
//! all simple, and the `j`-th eigenfunction has `j + 1` nodes counting both
//! endpoints.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::integrator::{Integrator, Monodromy};
use crate::potential::Potential;
use crate::torus::TorusParams;
use crate::{Error, Result};

pub const DEFAULT_GRID: f64 = 1e-3;
pub const DEFAULT_LAMBDA_MAX: f64 = 0.5;
/// Margin below `-max V` for the default scan start.
pub const DEFAULT_FLOOR_MARGIN: f64 = 0.1;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_MERGE_REL_TOL: f64 = 1e-6;

/// Samples used to verify declared periodicity and symmetry.
const SYMMETRY_SAMPLES: usize = 1000;
const SYMMETRY_TOL: f64 = 1e-10;

/// Zeros within this fraction of the domain length from its right end belong
/// to the next period (or are the Dirichlet endpoint itself).
const END_GUARD: f64 = 1e-6;

/// Subdivision depth for grid cells holding more than one root.
const MAX_REFINE_DEPTH: u32 = 40;

/// Residual bound for [`eigenfunction_samples`].
const EIGENFUNCTION_RESIDUAL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    PeriodicSymmetric,
    Dirichlet,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::PeriodicSymmetric => "periodic_symmetric",
            BoundaryMode::Dirichlet => "dirichlet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Both,
}

impl Parity {
    fn initial_data(self) -> [f64; 2] {
        match self {
            Parity::Even => [1.0, 0.0],
            Parity::Odd | Parity::Both => [0.0, 1.0],
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Both => "both",
        })
    }
}

/// A potential on `[0, a]` (Dirichlet) or the circle of length `a`.
#[derive(Clone)]
pub struct SpectralProblem {
    potential: Arc<dyn Potential>,
    length: f64,
    mode: BoundaryMode,
    integrator: Integrator,
}

impl fmt::Debug for SpectralProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralProblem")
            .field("length", &self.length)
            .field("mode", &self.mode)
            .field("integrator", &self.integrator)
            .finish_non_exhaustive()
    }
}

impl SpectralProblem {
    /// Periodic problem of period `a`. `V` must be declared even and is
    /// spot-checked for `V(x) = V(-x)` and `V(x + a) = V(x)`.
    pub fn periodic(potential: Arc<dyn Potential>, a: f64) -> Result<Self> {
        check_length(a)?;
        if !potential.is_even() {
            return Err(Error::InvalidArgument(
                "periodic shooting requires a potential declared even, V(x) = V(-x)".into(),
            ));
        }
        // Quasi-random points on [-a, a].
        const GOLDEN: f64 = 0.618_033_988_749_894_9;
        for i in 0..SYMMETRY_SAMPLES {
            let x = a * (2.0 * ((i as f64 + 0.5) * GOLDEN).fract() - 1.0);
            let v = potential.value(x);
            let scale = v.abs().max(1.0);
            let sym = (v - potential.value(-x)).abs();
            let per = (v - potential.value(x + a)).abs();
            if sym > SYMMETRY_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "potential is not even: |V({x}) - V(-{x})| = {sym:e}"
                )));
            }
            if per > SYMMETRY_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "potential is not {a}-periodic: |V({x} + a) - V({x})| = {per:e}"
                )));
            }
        }
        Ok(Self {
            potential,
            length: a,
            mode: BoundaryMode::PeriodicSymmetric,
            integrator: Integrator::default(),
        })
    }

    pub fn dirichlet(potential: Arc<dyn Potential>, a: f64) -> Result<Self> {
        check_length(a)?;
        Ok(Self {
            potential,
            length: a,
            mode: BoundaryMode::Dirichlet,
            integrator: Integrator::default(),
        })
    }

    /// Periodic problem for a CMC torus on its exact profile period `k·x0`.
    pub fn for_torus(params: &TorusParams) -> Result<Self> {
        Self::periodic(Arc::new(params.clone()), params.problem_length())
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.integrator.tol = tol;
        self
    }

    pub fn potential(&self) -> &dyn Potential {
        self.potential.as_ref()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn integrator(&self) -> &Integrator {
        &self.integrator
    }

    /// Monodromy matrix over one period at `lambda`.
    pub fn monodromy(&self, lambda: f64) -> Result<Monodromy> {
        self.integrator
            .monodromy(self.potential.as_ref(), lambda, self.length)
    }

    fn require(&self, mode: BoundaryMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::ModeMismatch {
                expected: match mode {
                    BoundaryMode::PeriodicSymmetric => "periodic_symmetric",
                    BoundaryMode::Dirichlet => "dirichlet",
                },
            });
        }
        Ok(())
    }

    /// Discriminant and eigenvalue count of one parity at `lambda`.
    fn half_shot(&self, lambda: f64, parity: Parity) -> Result<HalfShot> {
        let half = 0.5 * self.length;
        let end =
            self.integrator
                .shoot(self.potential.as_ref(), lambda, parity.initial_data(), half)?;
        Ok(match parity {
            Parity::Even => {
                // Prüfer angle θ with f = r sin θ, f' = r cos θ starts at π/2;
                // Neumann eigenvalues sit at θ(a/2) = π/2 + mπ.
                let extra = if end.f == 0.0 {
                    1
                } else {
                    usize::from(end.f * end.df < 0.0)
                };
                HalfShot {
                    d: end.df,
                    below: end.sign_changes + extra,
                }
            }
            _ => HalfShot {
                d: end.f,
                below: end.sign_changes,
            },
        })
    }

    /// Number of Dirichlet eigenvalues strictly below `lambda` and `f(a)`.
    fn dirichlet_shot(&self, lambda: f64) -> Result<HalfShot> {
        let end =
            self.integrator
                .shoot(self.potential.as_ref(), lambda, [0.0, 1.0], self.length)?;
        Ok(HalfShot {
            d: end.f,
            below: end.sign_changes,
        })
    }

    /// Nodes of the eigenfunction with initial data of `parity` over one
    /// period (periodic) or `[0, a]` including both endpoints (Dirichlet).
    fn node_count(&self, lambda: f64, parity: Parity) -> Result<usize> {
        let y0 = parity.initial_data();
        let trace = self.integrator.integrate(
            self.potential.as_ref(),
            lambda,
            y0[0],
            y0[1],
            self.length,
        )?;
        let cutoff = self.length * (1.0 - END_GUARD);
        let interior = trace.nodes.iter().filter(|&&x| x < cutoff).count();
        Ok(match self.mode {
            BoundaryMode::PeriodicSymmetric => interior,
            BoundaryMode::Dirichlet => interior + 1,
        })
    }
}

fn check_length(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "domain length must be positive, got {a}"
        )))
    }
}

#[derive(Debug, Clone, Copy)]
struct HalfShot {
    d: f64,
    below: usize,
}

/// One eigenvalue, repeated once per unit of multiplicity in a [`Spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub lambda: f64,
    pub parity: Parity,
    pub multiplicity: u8,
    /// Nodes in one period (periodic) or in `[0, a]` (Dirichlet).
    pub node_count: usize,
    /// Position in `λ₁ < λ₂ ≤ λ₃ ≤ …`.
    pub index_j: usize,
}

/// Eigenvalues found in `[lambda_floor, lambda_ceiling]`, expanded by
/// multiplicity and sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub mode: BoundaryMode,
    pub records: Vec<EigenvalueRecord>,
    pub lambda_floor: f64,
    /// The search was exhaustive below this value.
    pub lambda_ceiling: f64,
    /// Eigenvalues below `lambda_floor` (counted with multiplicity).
    pub count_below_floor: usize,
    pub complete: bool,
    /// Why `complete` is false, if it is.
    pub issues: Vec<String>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `λ <= 0`.
    pub fn nonpositive(&self) -> Vec<EigenvalueRecord> {
        self.records
            .iter()
            .copied()
            .filter(|r| r.lambda <= 0.0)
            .collect()
    }

    /// Copy keeping only records with `λ <= 0`; the ceiling is kept, so the
    /// result still certifies that nothing else lies at or below zero.
    pub fn nonpositive_part(&self) -> Spectrum {
        Spectrum {
            records: self.nonpositive(),
            ..self.clone()
        }
    }

    /// Smallest eigenvalue found above zero.
    pub fn first_positive(&self) -> Option<f64> {
        self.records.iter().map(|r| r.lambda).find(|&l| l > 0.0)
    }

    /// Complete through zero: every eigenvalue `<= 0` has been found.
    pub fn certifies_nonpositive(&self) -> bool {
        self.complete && self.count_below_floor == 0 && self.lambda_ceiling > 0.0
    }

    /// Record holding index `j`.
    pub fn by_index(&self, j: usize) -> Option<&EigenvalueRecord> {
        self.records.iter().find(|r| r.index_j == j)
    }
}

/// Scan settings for [`find_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid: f64,
    pub root_tol: f64,
    /// Even/odd roots within `merge_rel_tol · max(1, |λ|)` with equal node
    /// counts form one double eigenvalue.
    pub merge_rel_tol: f64,
}

impl ScanOptions {
    /// `[-max V - 0.1, 0.5]` at grid `1e-3`. The lower end is below `λ₁` by
    /// the Rayleigh bound `λ₁ > -max V`.
    pub fn default_for(problem: &SpectralProblem) -> Self {
        let (_, vmax) = problem.potential.range();
        Self {
            lambda_min: -vmax - DEFAULT_FLOOR_MARGIN,
            lambda_max: DEFAULT_LAMBDA_MAX,
            grid: DEFAULT_GRID,
            root_tol: DEFAULT_ROOT_TOL,
            merge_rel_tol: DEFAULT_MERGE_REL_TOL,
        }
    }
}

/// `(D_even, D_odd)` at `lambda`: `f'(a/2)` for the `(1, 0)` shot and
/// `f(a/2)` for the `(0, 1)` shot.
pub fn discriminant(problem: &SpectralProblem, lambda: f64) -> Result<(f64, f64)> {
    problem.require(BoundaryMode::PeriodicSymmetric)?;
    let even = problem.half_shot(lambda, Parity::Even)?;
    let odd = problem.half_shot(lambda, Parity::Odd)?;
    Ok((even.d, odd.d))
}

/// Number of eigenvalues strictly below `lambda`, with multiplicity.
pub fn count_below(problem: &SpectralProblem, lambda: f64) -> Result<usize> {
    match problem.mode {
        BoundaryMode::PeriodicSymmetric => {
            let even = problem.half_shot(lambda, Parity::Even)?;
            let odd = problem.half_shot(lambda, Parity::Odd)?;
            Ok(even.below + odd.below)
        }
        BoundaryMode::Dirichlet => Ok(problem.dirichlet_shot(lambda)?.below),
    }
}

/// Periodic spectrum in `[lambda_min, lambda_max]` with default polishing and
/// merge tolerances.
pub fn find_spectrum(
    problem: &SpectralProblem,
    lambda_min: f64,
    lambda_max: f64,
    grid: f64,
) -> Result<Spectrum> {
    let opts = ScanOptions {
        lambda_min,
        lambda_max,
        grid,
        ..ScanOptions::default_for(problem)
    };
    find_spectrum_with(problem, &opts)
}

#[derive(Debug, Clone, Copy)]
struct Root {
    lambda: f64,
    parity: Parity,
}

pub fn find_spectrum_with(problem: &SpectralProblem, opts: &ScanOptions) -> Result<Spectrum> {
    problem.require(BoundaryMode::PeriodicSymmetric)?;
    if opts.lambda_min.partial_cmp(&opts.lambda_max) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidArgument(format!(
            "lambda_min {} must be below lambda_max {}",
            opts.lambda_min, opts.lambda_max
        )));
    }
    if !(opts.grid > 0.0 && opts.grid.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid must be positive, got {}",
            opts.grid
        )));
    }

    let span = opts.lambda_max - opts.lambda_min;
    let cells = (span / opts.grid).ceil().max(1.0) as usize;
    let lambdas: Vec<f64> = (0..=cells)
        .map(|i| {
            if i == cells {
                opts.lambda_max
            } else {
                opts.lambda_min + span * i as f64 / cells as f64
            }
        })
        .collect();

    let mut roots = Vec::new();
    let mut count_below_floor = 0;
    let mut count_at_ceiling = 0;
    for parity in [Parity::Even, Parity::Odd] {
        let shots: Vec<HalfShot> = lambdas
            .par_iter()
            .map(|&l| problem.half_shot(l, parity))
            .collect::<Result<_>>()?;
        count_below_floor += shots[0].below;
        count_at_ceiling += shots[cells].below;

        let brackets: Vec<(f64, HalfShot, f64, HalfShot)> = (0..cells)
            .filter(|&i| shots[i + 1].below != shots[i].below)
            .map(|i| (lambdas[i], shots[i], lambdas[i + 1], shots[i + 1]))
            .collect();
        let found: Vec<Vec<Root>> = brackets
            .par_iter()
            .map(|&(lo, slo, hi, shi)| isolate(problem, parity, lo, slo, hi, shi, opts.root_tol, 0))
            .collect::<Result<_>>()?;
        roots.extend(found.into_iter().flatten());
    }
    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let node_counts: Vec<usize> = roots
        .par_iter()
        .map(|r| problem.node_count(r.lambda, r.parity))
        .collect::<Result<_>>()?;

    // Pair even/odd roots into double eigenvalues.
    let mut merged: Vec<(f64, Parity, usize)> = Vec::with_capacity(roots.len());
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        if let Some(next) = roots.get(i + 1) {
            let tol = opts.merge_rel_tol * r.lambda.abs().max(1.0);
            if next.parity != r.parity
                && (next.lambda - r.lambda).abs() < tol
                && node_counts[i] == node_counts[i + 1]
            {
                merged.push((0.5 * (r.lambda + next.lambda), Parity::Both, node_counts[i]));
                i += 2;
                continue;
            }
        }
        merged.push((r.lambda, r.parity, node_counts[i]));
        i += 1;
    }

    let mut issues = Vec::new();
    let found_total = roots.len();
    if count_at_ceiling - count_below_floor != found_total {
        issues.push(format!(
            "eigenvalue count {} in range but {} roots located",
            count_at_ceiling - count_below_floor,
            found_total
        ));
    }

    let records = assign_indices(&merged, count_below_floor, &mut issues);

    Ok(Spectrum {
        mode: BoundaryMode::PeriodicSymmetric,
        complete: issues.is_empty(),
        records,
        lambda_floor: opts.lambda_min,
        lambda_ceiling: opts.lambda_max,
        count_below_floor,
        issues,
    })
}

/// Splits `(lo, hi)` until each piece holds one eigenvalue of `parity`, then
/// polishes each by bisection on the discriminant sign.
#[allow(clippy::too_many_arguments)]
fn isolate(
    problem: &SpectralProblem,
    parity: Parity,
    lo: f64,
    slo: HalfShot,
    hi: f64,
    shi: HalfShot,
    root_tol: f64,
    depth: u32,
) -> Result<Vec<Root>> {
    if shi.below == slo.below {
        return Ok(Vec::new());
    }
    if shi.below == slo.below + 1 {
        return polish(problem, parity, lo, slo, hi, root_tol).map(|r| vec![r]);
    }
    if depth >= MAX_REFINE_DEPTH || hi - lo <= root_tol {
        return Err(Error::Tangency {
            lambda: 0.5 * (lo + hi),
        });
    }
    let mid = 0.5 * (lo + hi);
    let smid = problem.half_shot(mid, parity)?;
    if smid.below < slo.below || smid.below > shi.below {
        return Err(Error::Validation(format!(
            "eigenvalue count not monotone near lambda = {mid}"
        )));
    }
    let mut left = isolate(problem, parity, lo, slo, mid, smid, root_tol, depth + 1)?;
    left.extend(isolate(
        problem,
        parity,
        mid,
        smid,
        hi,
        shi,
        root_tol,
        depth + 1,
    )?);
    Ok(left)
}

/// Bisection on one simple zero in `(lo, hi)`. The count of eigenvalues
/// below `λ` changes parity exactly where the discriminant changes sign, so
/// the count comparison is the sign test, robust to exact zeros.
fn polish(
    problem: &SpectralProblem,
    parity: Parity,
    mut lo: f64,
    slo: HalfShot,
    mut hi: f64,
    root_tol: f64,
) -> Result<Root> {
    let base = slo.below;
    if slo.d == 0.0 {
        return Ok(Root { lambda: lo, parity });
    }
    while hi - lo > root_tol {
        let mid = 0.5 * (lo + hi);
        let s = problem.half_shot(mid, parity)?;
        if s.d == 0.0 {
            return Ok(Root {
                lambda: mid,
                parity,
            });
        }
        if s.below > base {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Root {
        lambda: 0.5 * (lo + hi),
        parity,
    })
}

/// Index assignment from node counts: a count of `n` nodes belongs to
/// `λ_n` and `λ_{n+1}` (`λ₁` alone for `n = 0`).
fn assign_indices(
    merged: &[(f64, Parity, usize)],
    offset: usize,
    issues: &mut Vec<String>,
) -> Vec<EigenvalueRecord> {
    let mut records = Vec::new();
    let mut i = 0;
    let mut prev_nodes: Option<usize> = None;
    while i < merged.len() {
        let n = merged[i].2;
        if let Some(p) = prev_nodes {
            if n < p {
                issues.push(format!(
                    "node count decreases from {p} to {n} at lambda = {}",
                    merged[i].0
                ));
            }
        }
        if n % 2 == 1 {
            issues.push(format!(
                "odd node count {n} at lambda = {} on a periodic domain",
                merged[i].0
            ));
        }
        let mut group_end = i;
        while group_end < merged.len() && merged[group_end].2 == n {
            group_end += 1;
        }
        let candidates: Vec<usize> = if n == 0 { vec![1] } else { vec![n, n + 1] };
        let mut slots = candidates.into_iter().filter(|&j| j > offset);
        for &(lambda, parity, nodes) in &merged[i..group_end] {
            let multiplicity = if parity == Parity::Both { 2 } else { 1 };
            for _ in 0..multiplicity {
                match slots.next() {
                    Some(j) => records.push(EigenvalueRecord {
                        lambda,
                        parity,
                        multiplicity,
                        node_count: nodes,
                        index_j: j,
                    }),
                    None => {
                        issues.push(format!(
                            "more eigenvalues with {n} nodes than the node-count law allows (lambda = {lambda})"
                        ));
                        records.push(EigenvalueRecord {
                            lambda,
                            parity,
                            multiplicity,
                            node_count: nodes,
                            index_j: 0,
                        });
                    }
                }
            }
        }
        prev_nodes = Some(n);
        i = group_end;
    }

    for (expected, (k, r)) in (offset + 1..).zip(records.iter().enumerate()) {
        if r.index_j != expected {
            let prev = if k > 0 { records[k - 1].node_count } else { 0 };
            issues.push(format!(
                "index gap: expected j = {expected}, node count {} gives j = {} (node-count jump {prev} -> {}) at lambda = {}",
                r.node_count, r.index_j, r.node_count, r.lambda
            ));
            break;
        }
    }
    records
}

/// First `count` Dirichlet eigenvalues on `[0, a]`.
pub fn find_dirichlet_spectrum(problem: &SpectralProblem, count: usize) -> Result<Spectrum> {
    find_dirichlet_spectrum_with(problem, count, DEFAULT_ROOT_TOL)
}

pub fn find_dirichlet_spectrum_with(
    problem: &SpectralProblem,
    count: usize,
    root_tol: f64,
) -> Result<Spectrum> {
    problem.require(BoundaryMode::Dirichlet)?;
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let a = problem.length;
    let (vmin, vmax) = problem.potential.range();
    // λ_j lies in (-max V + (jπ/a)², -min V + (jπ/a)²).
    let floor = -vmax - 1.0;
    let mut ceiling = -vmin + (count as f64 * std::f64::consts::PI / a).powi(2) + 1.0;
    let base = problem.dirichlet_shot(floor)?;
    let mut top = problem.dirichlet_shot(ceiling)?;
    while top.below < count {
        ceiling = 2.0 * ceiling.abs() + 1.0;
        top = problem.dirichlet_shot(ceiling)?;
    }
    let mut issues = Vec::new();
    if base.below != 0 {
        issues.push(format!(
            "{} eigenvalues below the Rayleigh bound",
            base.below
        ));
    }

    let lambdas: Vec<f64> = (1..=count)
        .into_par_iter()
        .map(|j| {
            // Smallest λ with more than j - 1 eigenvalues below it.
            let (mut lo, mut hi) = (floor, ceiling);
            while hi - lo > root_tol {
                let mid = 0.5 * (lo + hi);
                let s = problem.dirichlet_shot(mid)?;
                if s.d == 0.0 && s.below == j - 1 {
                    return Ok(mid);
                }
                if s.below >= j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<_>>()?;

    let node_counts: Vec<usize> = lambdas
        .par_iter()
        .map(|&l| problem.node_count(l, Parity::Odd))
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(count);
    for (j, (&lambda, &nodes)) in lambdas.iter().zip(&node_counts).enumerate() {
        let index_j = j + 1;
        if nodes != index_j + 1 {
            issues.push(format!(
                "lambda_{index_j} = {lambda} has {nodes} nodes, expected {}",
                index_j + 1
            ));
        }
        records.push(EigenvalueRecord {
            lambda,
            parity: Parity::Odd,
            multiplicity: 1,
            node_count: nodes,
            index_j,
        });
    }

    Ok(Spectrum {
        mode: BoundaryMode::Dirichlet,
        complete: issues.is_empty(),
        records,
        lambda_floor: floor,
        lambda_ceiling: lambdas.last().copied().unwrap_or(floor),
        count_below_floor: 0,
        issues,
    })
}

/// Eigenfunction values on a uniform grid of `[0, a]`, normalized to
/// `max |f| = 1`. Double eigenvalues carry both parity representatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionSamples {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub even: Option<Vec<f64>>,
    pub odd: Option<Vec<f64>>,
}

pub fn eigenfunction_samples(
    problem: &SpectralProblem,
    record: &EigenvalueRecord,
    n_samples: usize,
) -> Result<EigenfunctionSamples> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let a = problem.length;
    let xs: Vec<f64> = (0..n_samples)
        .map(|i| a * i as f64 / (n_samples - 1) as f64)
        .collect();

    let sample = |y0: [f64; 2]| -> Result<Vec<f64>> {
        let trace = problem.integrator.integrate_sampled(
            problem.potential.as_ref(),
            record.lambda,
            y0[0],
            y0[1],
            a,
            &xs,
        )?;
        let max = trace.max_abs_f;
        let residual = match problem.mode {
            BoundaryMode::PeriodicSymmetric => {
                ((trace.f_end - y0[0]).abs() + (trace.df_end - y0[1]).abs()) / max
            }
            BoundaryMode::Dirichlet => trace.f_end.abs() / max,
        };
        if residual.is_nan() || residual > EIGENFUNCTION_RESIDUAL_TOL {
            return Err(Error::NotAnEigenvalue {
                lambda: record.lambda,
                residual,
            });
        }
        let values = trace.samples.unwrap_or_default();
        let peak = values.iter().fold(0.0_f64, |m, &(_, f)| m.max(f.abs()));
        Ok(values.into_iter().map(|(_, f)| f / peak).collect())
    };

    let (even, odd) = match (problem.mode, record.parity) {
        (BoundaryMode::Dirichlet, _) => (None, Some(sample([0.0, 1.0])?)),
        (_, Parity::Even) => (Some(sample([1.0, 0.0])?), None),
        (_, Parity::Odd) => (None, Some(sample([0.0, 1.0])?)),
        (_, Parity::Both) => (Some(sample([1.0, 0.0])?), Some(sample([0.0, 1.0])?)),
    };
    Ok(EigenfunctionSamples {
        lambda: record.lambda,
        x: xs,
        even,
        odd,
    })
}

/// Sign changes of a sampled periodic function whose last sample repeats the
/// first (`x = a ≡ 0`). Exact zeros are skipped; the wrap-around from the
/// last to the first nonzero sample counts.
pub fn periodic_sign_changes(values: &[f64]) -> usize {
    let body = &values[..values.len().saturating_sub(1)];
    let signs: Vec<bool> = body
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    if signs.len() < 2 {
        return 0;
    }
    let mut changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if signs[0] != signs[signs.len() - 1] {
        changes += 1;
    }
    changes
}

/// Nodes of a sampled Dirichlet eigenfunction: both endpoints plus the
/// interior sign changes.
pub fn dirichlet_sampled_nodes(values: &[f64]) -> usize {
    if values.len() < 3 {
        return 2;
    }
    let interior = &values[1..values.len() - 1];
    let signs: Vec<bool> = interior
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    2 + signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Monodromy trace and determinant at one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyCheck {
    pub lambda: f64,
    pub trace: f64,
    pub det: f64,
}

/// Independent check of a periodic spectrum through full-period monodromy:
/// at an eigenvalue `trace(M) = 2`.
pub fn monodromy_checks(
    problem: &SpectralProblem,
    spectrum: &Spectrum,
) -> Result<Vec<MonodromyCheck>> {
    problem.require(BoundaryMode::PeriodicSymmetric)?;
    let mut lambdas: Vec<f64> = spectrum.records.iter().map(|r| r.lambda).collect();
    lambdas.dedup();
    lambdas
        .par_iter()
        .map(|&lambda| {
            let m = problem.monodromy(lambda)?;
            Ok(MonodromyCheck {
                lambda,
                trace: m.trace(),
                det: m.det(),
            })
        })
        .collect()
}
