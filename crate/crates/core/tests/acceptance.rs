//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one `PASS`/`FAIL criterion N` line even when captured.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use cmc_index::analysis::{self, AnalysisOptions, SurfaceAnalysis, TABLE_TOL};
use cmc_index::catalog::{self, SurfaceSpec};
use cmc_index::potential::ConstantPotential;
use cmc_index::spectrum::{find_dirichlet_spectrum, periodic_sign_changes, SpectralProblem};
use cmc_index::torus::Family;

const KNOWN_TOL: f64 = 5e-4;
const CONSTANT_TOL: f64 = 1e-8;
const FD_TOL: f64 = 5e-3;
const DET_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-5;
const PERIOD_REL_TOL: f64 = 5e-3;

fn catalog() -> &'static [SurfaceSpec] {
    static CAT: OnceLock<Vec<SurfaceSpec>> = OnceLock::new();
    CAT.get_or_init(|| catalog::parse_catalog(catalog::DEFAULT_CATALOG, "built-in").unwrap())
}

fn analyses() -> &'static [SurfaceAnalysis] {
    static ALL: OnceLock<Vec<SurfaceAnalysis>> = OnceLock::new();
    ALL.get_or_init(|| {
        analysis::analyze_catalog(catalog(), &AnalysisOptions::default())
            .into_iter()
            .zip(catalog())
            .map(|(r, s)| r.unwrap_or_else(|e| panic!("{}: {e}", s.name)))
            .collect()
    })
}

fn surface(name: &str) -> &'static SurfaceAnalysis {
    analyses().iter().find(|a| a.spec.name == name).unwrap()
}

fn verdict(n: u32, what: &str, failures: &[String]) -> bool {
    if failures.is_empty() {
        println!("PASS criterion {n}: {what}");
    } else {
        println!("FAIL criterion {n}: {what}: {}", failures.join("; "));
    }
    failures.is_empty()
}

fn criterion_1_table_2_spectra() -> bool {
    let mut bad = Vec::new();
    for a in analyses() {
        let c = a.compare();
        if !c.spectrum_matches {
            bad.push(format!(
                "{}: max |delta| {:.4}, {} computed vs {} listed, pattern {}",
                a.spec.name,
                c.spectrum.max_abs_delta,
                c.spectrum.computed_len,
                c.spectrum.expected_len,
                c.spectrum.pattern_matches
            ));
        }
        if !c.next_positive_certified {
            bad.push(format!(
                "{}: next eigenvalue > 0 not certified",
                a.spec.name
            ));
        }
    }
    assert_eq!(analyses().len(), 28);
    verdict(
        1,
        &format!("28 spectra within {TABLE_TOL}, next eigenvalue positive"),
        &bad,
    )
}

fn criterion_2_table_1_indices() -> bool {
    let mut bad = Vec::new();
    for a in analyses() {
        let r = &a.report;
        if r.ind != a.spec.expected_ind || r.buckets() != a.spec.expected_b {
            bad.push(format!(
                "{}: Ind {} B {:?}, listed {} {:?}",
                a.spec.name,
                r.ind,
                r.buckets(),
                a.spec.expected_ind,
                a.spec.expected_b
            ));
        }
    }
    verdict(2, "Ind, B1, B2, B3 exact on 28 rows", &bad)
}

fn criterion_3_known_eigenvalues_before_snapping() -> bool {
    let mut bad = Vec::new();
    for a in analyses() {
        let values = a.raw.values();
        let near = |target: f64| {
            values
                .iter()
                .filter(|l| (*l - target).abs() <= KNOWN_TOL)
                .count()
        };
        let (m1, z) = (near(-1.0), near(0.0));
        if m1 != 2 || z != 1 {
            let closest = values
                .iter()
                .copied()
                .min_by(|x, y| (x + 1.0).abs().total_cmp(&(y + 1.0).abs()))
                .unwrap_or(f64::NAN);
            bad.push(format!(
                "{}: {m1} near -1 (closest {closest:.5}), {z} near 0",
                a.spec.name
            ));
        }
        if !values.first().is_some_and(|l| *l < -1.0 - KNOWN_TOL) {
            bad.push(format!("{}: lambda_1 not below -1", a.spec.name));
        }
    }
    verdict(
        3,
        &format!("raw cluster within {KNOWN_TOL} of -1 (x2) and 0, lambda_1 < -1"),
        &bad,
    )
}

fn criterion_4_lower_bound_gap() -> bool {
    let mut bad = Vec::new();
    let (mut und, mut nod) = (0, 0);
    for a in analyses() {
        let r = &a.report;
        match r.family {
            Family::Unduloidal => {
                und += 1;
                if r.bound_gap != 1 {
                    bad.push(format!("{}: gap {}", r.surface, r.bound_gap));
                }
            }
            Family::Nodoidal => {
                nod += 1;
                if r.lower_bound == 0 || 2 * r.lower_bound <= r.ind {
                    bad.push(format!(
                        "{}: bound {} vs Ind {}",
                        r.surface, r.lower_bound, r.ind
                    ));
                }
            }
        }
    }
    if (und, nod) != (17, 11) {
        bad.push(format!("{und} unduloids, {nod} nodoids"));
    }
    verdict(4, "gap 1 on unduloids, Ind/2 < bound on nodoids", &bad)
}

fn criterion_5_node_law() -> bool {
    let mut bad = Vec::new();
    let mut checked = 0;
    for a in analyses() {
        for r in &a.raw.records {
            checked += 1;
            if r.node_count != r.index_j - r.index_j % 2 {
                bad.push(format!(
                    "{} j={}: {} nodes",
                    a.spec.name, r.index_j, r.node_count
                ));
            }
        }
    }
    let u1 = &surface("U1").params;
    let problems = [
        SpectralProblem::dirichlet(Arc::new(ConstantPotential(0.0)), PI).unwrap(),
        SpectralProblem::dirichlet(Arc::new(ConstantPotential(-3.0)), 5.0).unwrap(),
        SpectralProblem::dirichlet(Arc::new(u1.clone()), u1.problem_length()).unwrap(),
    ];
    for p in &problems {
        let s = find_dirichlet_spectrum(p, 10).unwrap();
        assert_eq!(s.len(), 10);
        for r in &s.records {
            checked += 1;
            if r.node_count != r.index_j + 1 {
                bad.push(format!("Dirichlet j={}: {} nodes", r.index_j, r.node_count));
            }
        }
    }
    verdict(5, &format!("node counts on {checked} eigenvalues"), &bad)
}

fn criterion_6_constant_potential_oracle() -> bool {
    let mut bad = Vec::new();
    for c in [0.0, 1.0, -2.0] {
        for a in [2.0 * PI, 11.7053] {
            match analysis::constant_oracle_discrepancy(c, a, 20) {
                Ok(d) if d <= CONSTANT_TOL => {}
                Ok(d) => bad.push(format!("c={c}, a={a:.4}: {d:.2e}")),
                Err(e) => bad.push(format!("c={c}, a={a:.4}: {e}")),
            }
        }
    }
    verdict(
        6,
        &format!("first 20 eigenvalues within {CONSTANT_TOL:e}"),
        &bad,
    )
}

fn criterion_7_finite_difference_oracle() -> bool {
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for name in ["U1", "N1"] {
        let a = surface(name);
        let fd = analysis::fd_comparison(&a.problem, &a.raw, 4096).unwrap();
        summary.push(format!(
            "{name} {:.1e} ratio {:.2}",
            fd.max_discrepancy, fd.ratio
        ));
        if fd.max_discrepancy > FD_TOL {
            bad.push(format!("{name}: discrepancy {:.2e}", fd.max_discrepancy));
        }
        if !(3.0..=5.0).contains(&fd.ratio) {
            bad.push(format!("{name}: ratio {:.2}", fd.ratio));
        }
    }
    verdict(
        7,
        &format!("fd agreement and O(h^2) ({})", summary.join(", ")),
        &bad,
    )
}

fn criterion_8_structural_invariants() -> bool {
    let mut bad = Vec::new();
    let (mut worst_det, mut worst_trace, mut worst_period) = (0.0f64, 0.0f64, 0.0f64);
    for a in analyses() {
        for m in a.monodromy_checks().unwrap() {
            worst_det = worst_det.max((m.det - 1.0).abs());
            worst_trace = worst_trace.max((m.trace - 2.0).abs());
            if (m.det - 1.0).abs() > DET_TOL || (m.trace - 2.0).abs() > TRACE_TOL {
                bad.push(format!(
                    "{} at {:.6}: det {:.3e}, trace {:.3e}",
                    a.spec.name,
                    m.lambda,
                    m.det - 1.0,
                    m.trace - 2.0
                ));
            }
        }
        let rel = a.params.period_mismatch().abs();
        worst_period = worst_period.max(rel);
        if rel > PERIOD_REL_TOL {
            bad.push(format!("{}: a vs k*x0 {rel:.2e}", a.spec.name));
        }
    }
    verdict(
        8,
        &format!("det {worst_det:.1e}, trace {worst_trace:.1e}, period {worst_period:.1e}"),
        &bad,
    )
}

fn csv_sign_changes(path: &Path) -> Vec<usize> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let columns = lines.next().unwrap().split(',').count() - 1;
    let mut cols = vec![Vec::new(); columns];
    for line in lines {
        for (c, v) in line.split(',').skip(1).enumerate() {
            cols[c].push(v.parse::<f64>().unwrap());
        }
    }
    cols.iter().map(|c| periodic_sign_changes(c)).collect()
}

fn criterion_9_eigenfunction_export() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let mut counts = Vec::new();
    let mut bad = Vec::new();
    // j = 2 is the double at -1; its file carries both eigenfunctions.
    for j in [1, 2, 4, 5] {
        let path = dir.path().join(format!("u1_{j}.csv"));
        let args = [
            "cmc-index",
            "eigenfunction",
            "--surface",
            "U1",
            "--j",
            &j.to_string(),
            "--out",
            path.to_str().unwrap(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cmc_index::cli::run(args, &mut out, &mut err);
        if code != 0 {
            bad.push(format!(
                "j={j}: exit {code}: {}",
                String::from_utf8_lossy(&err)
            ));
            continue;
        }
        counts.extend(csv_sign_changes(&path));
    }
    counts.sort_unstable();
    if counts != [0, 2, 2, 4, 4] {
        bad.push(format!("sign changes {counts:?}"));
    }
    verdict(
        9,
        "U1 eigenfunction files change sign {0, 2, 2, 4, 4} times",
        &bad,
    )
}

fn main() {
    let criteria: [(u32, fn() -> bool); 9] = [
        (1, criterion_1_table_2_spectra),
        (2, criterion_2_table_1_indices),
        (3, criterion_3_known_eigenvalues_before_snapping),
        (4, criterion_4_lower_bound_gap),
        (5, criterion_5_node_law),
        (6, criterion_6_constant_potential_oracle),
        (7, criterion_7_finite_difference_oracle),
        (8, criterion_8_structural_invariants),
        (9, criterion_9_eigenfunction_export),
    ];
    let mut failed = Vec::new();
    for (n, criterion) in criteria {
        match std::panic::catch_unwind(criterion) {
            Ok(true) => {}
            Ok(false) => failed.push(n),
            Err(_) => {
                println!("FAIL criterion {n}: panicked");
                failed.push(n);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
