//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use markov_ci::contingency::{reference_cubes, reference_suite};
use markov_ci::fuzz::{random_instance, random_kernel_triple, run_fuzz, FuzzConfig, FuzzReport};
use markov_ci::gaussian::{
    conditional_kernel_law, discretized_check, gaussian_kernels_independent, TrivariateCovariance,
    DEFAULT_TOLERANCE,
};
use markov_ci::kernel::kernels_cond_independent;
use markov_ci::theorems::{classify, projection_representation, verify_theorem1, verify_theorem4};
use markov_ci::{PropositionTriple, ValueMap};

const SEED: u64 = 42;
const FUZZ_TRIALS: u64 = 100_000;
const REPRESENTATION_TRIALS: u64 = 10_000;
const SPECIALIZATION_TRIALS: u64 = 10_000;

const SUITE_BUDGET: Duration = Duration::from_secs(1);
const FUZZ_BUDGET: Duration = Duration::from_secs(120);
const GAUSSIAN_BUDGET: Duration = Duration::from_secs(60);

const FORMULA_TOL: f64 = 1e-12;
const GRID_EXTENT: f64 = 4.0;
const GRIDS: [usize; 3] = [11, 21, 41];
const CONVERGED_BELOW: f64 = 1e-2;
const DEPENDENT_ABOVE: f64 = 5e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2}s, budget {}s]", o.detail, took.as_secs_f64(), budget.as_secs());
    o.pass &= took < budget;
    o
}

fn worked_cubes() -> Outcome {
    let table = reference_suite().expect("built-in cubes");
    let expected: Vec<PropositionTriple> = reference_cubes().iter().map(|c| c.expected).collect();
    let classified: Vec<PropositionTriple> = table.rows.iter().map(|r| r.classified).collect();
    let counted_agree = table.rows.iter().all(|r| r.counted == r.classified);
    let pass = classified == expected && counted_agree && table.rows.len() == 5;
    outcome(
        pass,
        format!(
            "{}/5 cubes classified as expected, count identities agree: {counted_agree}",
            classified.iter().zip(&expected).filter(|(a, b)| a == b).count()
        ),
    )
}

fn fuzz_invariants(report: &FuzzReport) -> Outcome {
    let mut by_check = std::collections::BTreeMap::<&str, usize>::new();
    for v in &report.violations {
        *by_check.entry(v.check.as_str()).or_default() += 1;
    }
    outcome(
        report.passed() && report.trials_run == FUZZ_TRIALS,
        format!(
            "{} trials, {} violations {:?}",
            report.trials_run,
            report.violations.len(),
            by_check
        ),
    )
}

fn forbidden_patterns(report: &FuzzReport) -> Outcome {
    let forbidden = ["i,ii,!iii", "i,!ii,iii"];
    let forbidden_hits: u64 = forbidden.iter().map(|k| report.pattern_census[*k]).sum();
    let allowed_missing: Vec<String> = report
        .missing_patterns()
        .into_iter()
        .filter(|k| !forbidden.contains(&k.as_str()))
        .collect();
    let witnessed = report
        .pattern_census
        .iter()
        .filter(|(_, &n)| n > 0)
        .all(|(k, _)| report.witnesses.contains_key(k));
    let mut stored = String::new();
    if let Some(dir) = option_env!("CARGO_TARGET_TMPDIR") {
        let path = std::path::Path::new(dir).join("fuzz_seed42_report.json");
        let json = serde_json::to_string_pretty(report).expect("report serializes");
        if std::fs::write(&path, json).is_ok() {
            stored = format!(", witnesses in {}", path.display());
        }
    }
    outcome(
        forbidden_hits == 0 && allowed_missing.is_empty() && witnessed,
        format!(
            "forbidden hits {forbidden_hits}, unwitnessed allowed patterns {allowed_missing:?}, census {:?}{stored}",
            report.pattern_census
        ),
    )
}

fn representation_oracle() -> Outcome {
    let cfg = FuzzConfig {
        seed: SEED,
        ..FuzzConfig::default()
    };
    let mut disagreements = Vec::new();
    let mut positives = 0;
    for k in 0..REPRESENTATION_TRIALS {
        let kt = random_kernel_triple(&cfg, k).expect("valid triple");
        let direct = kernels_cond_independent(&kt);
        let (q, q1, q2, q3) = projection_representation(&kt).expect("representation");
        let represented = classify(&q, &q1, &q2, &q3).expect("classify").p_i;
        positives += direct as u32;
        if direct != represented {
            disagreements.push(k);
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "{REPRESENTATION_TRIALS} triples ({positives} conditionally independent), disagreements at {:?}",
            &disagreements[..disagreements.len().min(10)]
        ),
    )
}

fn correlations(r12: f64, r13: f64, r23: f64) -> TrivariateCovariance {
    TrivariateCovariance::from_correlations(r12, r13, r23).expect("positive definite")
}

fn gaussian() -> Outcome {
    let rhos: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.2).collect();
    let mut verdict_errors = 0;
    let mut formula_err: f64 = 0.0;
    let scales = [2.0, 0.5, 3.0];
    for &r13 in &rhos {
        for &r23 in &rhos {
            // ρ12 = ρ13 ρ23 keeps the matrix positive definite on the whole grid
            let cov = correlations(r13 * r23, r13, r23);
            let independent = gaussian_kernels_independent(&cov, DEFAULT_TOLERANCE).unwrap();
            if independent != (r13 == 0.0 || r23 == 0.0) {
                verdict_errors += 1;
            }
            let scaled = cov.rescaled(scales).unwrap();
            let s = |i: usize, j: usize| scaled.entry(i, j);
            let (sd1, sd2) = (s(0, 0).sqrt(), s(1, 1).sqrt());
            let rho13 = s(0, 2) / (s(0, 0) * s(2, 2)).sqrt();
            let rho23 = s(1, 2) / (s(1, 1) * s(2, 2)).sqrt();
            let law = conditional_kernel_law(&scaled);
            formula_err = formula_err
                .max((law.mean_slope - sd2 * rho23 * rho13 / sd1).abs())
                .max((law.variance - sd2 * sd2 * (1.0 - rho23 * rho23 * rho13 * rho13)).abs());
        }
    }

    let separating = correlations(0.0, 0.7, 0.0);
    let discrepancies: Vec<f64> = GRIDS
        .iter()
        .map(|&n| discretized_check(&separating, n, GRID_EXTENT).expect("grid"))
        .collect();
    let increases = discrepancies.windows(2).filter(|w| w[1] > w[0]).count();
    let last = *discrepancies.last().unwrap();
    let dependent =
        discretized_check(&correlations(0.25, 0.5, 0.5), 41, GRID_EXTENT).expect("grid");

    outcome(
        verdict_errors == 0
            && formula_err <= FORMULA_TOL
            && increases <= 1
            && last < CONVERGED_BELOW
            && dependent > DEPENDENT_ABOVE,
        format!(
            "verdict errors {verdict_errors}/81, formula error {formula_err:.1e}, \
             separating case over grids {GRIDS:?}: {:?}, \
             rho13=rho23=0.5 at grid 41: {dependent:.3e}",
            discrepancies.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn theorem4_specialization() -> Outcome {
    let cfg = FuzzConfig {
        seed: SEED,
        ..FuzzConfig::default()
    };
    let mut mismatches = Vec::new();
    for k in 0..SPECIALIZATION_TRIALS {
        let inst = random_instance(&cfg, k).expect("instance");
        let f = ValueMap::constant(inst.x3.codomain().len());
        let t4 = verify_theorem4(&inst.space, &inst.x1, &inst.x2, &inst.x3, &f).expect("teo4");
        let t1 = verify_theorem1(&inst.space, &inst.x1, &inst.x2, &inst.x3).expect("teo1");
        if t4.triple != t1.triple {
            mismatches.push(k);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{SPECIALIZATION_TRIALS} instances with constant f, mismatches at {:?}",
            &mismatches[..mismatches.len().min(10)]
        ),
    )
}

fn main() -> ExitCode {
    // libtest-style flags such as --nocapture are accepted and ignored
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }

    let mut results = Vec::new();
    results.push(("1 worked cubes", timed(SUITE_BUDGET, worked_cubes)));

    let cfg = FuzzConfig {
        seed: SEED,
        trials: FUZZ_TRIALS,
        ..FuzzConfig::default()
    };
    let start = Instant::now();
    let report = run_fuzz(&cfg).expect("fuzz config is valid");
    let fuzz_time = start.elapsed();
    let mut c2 = fuzz_invariants(&report);
    c2.detail = format!(
        "{} [{:.2}s, budget {}s]",
        c2.detail,
        fuzz_time.as_secs_f64(),
        FUZZ_BUDGET.as_secs()
    );
    c2.pass &= fuzz_time < FUZZ_BUDGET;
    results.push(("2 theorem invariants", c2));
    results.push(("3 forbidden patterns", forbidden_patterns(&report)));
    results.push(("4 representation oracle", representation_oracle()));
    results.push(("5 gaussian criterion", timed(GAUSSIAN_BUDGET, gaussian)));
    results.push(("6 constant-f specialization", theorem4_specialization()));

    let mut all = true;
    for (name, o) in &results {
        println!("acceptance criterion {name}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
