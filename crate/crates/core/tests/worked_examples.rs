use markov_ci::contingency::{
    count_identities, cube_to_space, diagnostics, reference_suite, ContingencyCube,
};
use markov_ci::finite_prob::{distribution, joint_distribution};
use markov_ci::gaussian::{gaussian_kernels_independent, TrivariateCovariance, DEFAULT_TOLERANCE};
use markov_ci::kernel::{dirac_kernel, kernels_cond_independent, kernels_independent, KernelTriple};
use markov_ci::rational::q;
use markov_ci::theorems::{
    classify, condition_on, independent_rvs, marginal_independence_implies_iii, phillips_condition,
    verify_theorem1, verify_theorem3, verify_theorem4,
};
use markov_ci::{FiniteProbSpace, PropositionTriple, RandomVariable, ValueMap};

const III_WITHOUT_II: [u64; 8] = [3000, 200, 1500, 300, 1500, 200, 3000, 300];
const II_WITHOUT_III: [u64; 8] = [4200, 400, 2000, 300, 2000, 200, 1000, 100];
const II_III_WITHOUT_I: [u64; 8] = [1000, 1000, 0, 2000, 0, 2000, 1000, 1000];
const ALL_THREE: [u64; 8] = [1200, 3000, 1200, 3000, 2000, 3200, 2000, 3200];
const I_ALONE: [u64; 8] = [1200, 3000, 1200, 3200, 2000, 3000, 2000, 3200];

const CUBES: [([u64; 8], (bool, bool, bool)); 5] = [
    (III_WITHOUT_II, (false, false, true)),
    (II_WITHOUT_III, (false, true, false)),
    (II_III_WITHOUT_I, (false, true, true)),
    (ALL_THREE, (true, true, true)),
    (I_ALONE, (true, false, false)),
];

type Lifted = (FiniteProbSpace, RandomVariable, RandomVariable, RandomVariable);

fn lift(counts: [u64; 8]) -> Lifted {
    cube_to_space(&ContingencyCube::from_u64(counts).unwrap()).unwrap()
}

#[test]
fn conditioning_variable_margins() {
    let (sp, x1, x2, x3) = lift(III_WITHOUT_II);
    let p3 = distribution(&sp, &x3).unwrap();
    assert_eq!(p3.masses(), &[q(9000, 10000), q(1000, 10000)]);
    let joint = joint_distribution(&sp, &[&x1, &x2]).unwrap();
    assert_eq!(joint.mass("(0,0)"), Some(&q(3200, 10000)));
    let cond = condition_on(&sp, &[&x1], &x3).unwrap();
    assert_eq!(cond.kernels[0].entry(0, 0), &q(4500, 9000));
}

#[test]
fn each_cube_classifies_as_expected() {
    for (counts, (i, ii, iii)) in CUBES {
        let (sp, x1, x2, x3) = lift(counts);
        let expected = PropositionTriple::new(i, ii, iii);
        assert_eq!(classify(&sp, &x1, &x2, &x3).unwrap(), expected, "{counts:?}");
        let cube = ContingencyCube::from_u64(counts).unwrap();
        let counted = count_identities(&cube).unwrap();
        assert_eq!(counted.triple, expected);
        assert!(!counted.fallback);
        assert!(verify_theorem1(&sp, &x1, &x2, &x3).unwrap().theorem_holds);
    }
}

#[test]
fn conditional_kernels_independence_on_two_cubes() {
    for (counts, expected) in [(III_WITHOUT_II, true), (II_WITHOUT_III, false)] {
        let (sp, x1, x2, x3) = lift(counts);
        let cond = condition_on(&sp, &[&x1, &x2], &x3).unwrap();
        let got = kernels_independent(&cond.space, &cond.kernels[0], &cond.kernels[1]).unwrap();
        assert_eq!(got, expected);
        assert_eq!(phillips_condition(&sp, &x1, &x2, &x3).unwrap(), expected);
    }
}

#[test]
fn unconditional_independence_via_dirac_kernels() {
    for (counts, expected) in [(II_WITHOUT_III, true), (III_WITHOUT_II, false)] {
        let (sp, x1, x2, _) = lift(counts);
        assert_eq!(independent_rvs(&sp, &x1, &x2).unwrap(), expected);
        let d1 = dirac_kernel(&sp, &x1).unwrap();
        let d2 = dirac_kernel(&sp, &x2).unwrap();
        assert_eq!(kernels_independent(&sp, &d1, &d2).unwrap(), expected);
    }
}

#[test]
fn dirac_lifts_agree_with_random_variables() {
    for (counts, (i, ii, iii)) in CUBES {
        let (sp, x1, x2, x3) = lift(counts);
        let kt = KernelTriple::dirac(&sp, &x1, &x2, &x3).unwrap();
        let report = verify_theorem3(&kt).unwrap();
        assert_eq!(report.triple, PropositionTriple::new(i, ii, iii));
        assert_eq!(report.representation_agrees, Some(true));
        assert_eq!(kernels_cond_independent(&kt), i);
        assert_eq!(
            markov_ci::kernel::density_check(&sp, &kt.m1, &kt.m2, &kt.m3).unwrap(),
            i
        );
    }
}

#[test]
fn marginal_implication_is_one_way() {
    // In this cube X1 ⊥ X3 but not X2 ⊥ X3; swapping the tests gives (iii)
    // without X1 ⊥ X3.
    let (sp, x1, x2, x3) = lift(III_WITHOUT_II);
    let m = marginal_independence_implies_iii(&sp, &x1, &x2, &x3).unwrap();
    assert!(m.x1_indep_x3 && m.p_iii);
    assert!(!independent_rvs(&sp, &x2, &x3).unwrap());

    let swapped = ContingencyCube::from_u64(III_WITHOUT_II).unwrap().transposed();
    let (sp, x1, x2, x3) = cube_to_space(&swapped).unwrap();
    let m = marginal_independence_implies_iii(&sp, &x1, &x2, &x3).unwrap();
    assert!(!m.x1_indep_x3);
    assert!(m.p_iii);
    assert!(m.holds());
}

#[test]
fn prevalence_of_first_cube() {
    let d = diagnostics(&ContingencyCube::from_u64(III_WITHOUT_II).unwrap()).unwrap();
    assert_eq!(d.prevalence, q(1, 10));
}

#[test]
fn diagnostics_of_all_three_cube() {
    // margins summed by hand: n++0 = 6400, n++1 = 12400, n+00 = 3200, n0+0 = 2400,
    // n+11 = 6200, n1+1 = 6400
    let d = diagnostics(&ContingencyCube::from_u64(ALL_THREE).unwrap()).unwrap();
    assert_eq!(d.prevalence, q(12400, 18800));
    assert_eq!(d.specificity_1, q(3200, 6400));
    assert_eq!(d.specificity_2, q(2400, 6400));
    assert_eq!(d.sensitivity_1, q(6200, 12400));
    assert_eq!(d.sensitivity_2, q(6400, 12400));
}

#[test]
fn suite_rows_all_hold() {
    let table = reference_suite().unwrap();
    assert_eq!(table.rows.len(), 5);
    assert!(table.all_match());
    assert!(table.rows.iter().all(|r| r.theorem_holds));
    assert!(table.rows.iter().all(|r| r.phillips == r.classified.p_iii));
}

#[test]
fn constant_map_reduces_to_unconditional_case() {
    for (counts, _) in CUBES {
        let (sp, x1, x2, x3) = lift(counts);
        let t4 = verify_theorem4(&sp, &x1, &x2, &x3, &ValueMap::constant(2)).unwrap();
        let t1 = verify_theorem1(&sp, &x1, &x2, &x3).unwrap();
        assert_eq!(t4.triple, t1.triple);
    }
}

#[test]
fn separating_gaussian_example() {
    // ρ23 = 0, ρ13 = 0.7: kernels independent although X1 and X3 are correlated
    let cov = TrivariateCovariance::from_correlations(0.0, 0.7, 0.0).unwrap();
    assert!(gaussian_kernels_independent(&cov, DEFAULT_TOLERANCE).unwrap());
    assert!(cov.corr(0, 2).abs() > 0.5);
    let dependent = TrivariateCovariance::from_correlations(0.25, 0.5, 0.5).unwrap();
    assert!(!gaussian_kernels_independent(&dependent, DEFAULT_TOLERANCE).unwrap());
}
