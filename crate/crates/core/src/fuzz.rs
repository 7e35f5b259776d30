//! Seeded random instances and the invariant sweep run over them.
//!
//! Trial `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so
//! any single trial can be regenerated without replaying the ones before it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contingency::{count_identities, cube_to_space, ContingencyCube};
use crate::error::{Error, Result};
use crate::finite_prob::{distribution, FiniteProbSpace, RandomVariable, ValueMap};
use crate::io::{MapDocument, SpaceDocument};
use crate::kernel::{
    conditional_kernel, density_check, kernels_cond_independent, kernels_independent,
    KernelTriple, MarkovKernel,
};
use crate::rational::Rational;
use crate::theorems::{
    classify_kernels, condition_on, marginal_independence_implies_iii,
    mixture_identity_holds, phillips_condition, teo4_representation_check, verify_theorem1,
    verify_theorem3, verify_theorem4, PropositionTriple,
};

/// Kernel triples are kept small: the projection representation has
/// `|Ω1|·|Ω2|·|Ω3|` states.
const MAX_KERNEL_SOURCE: usize = 6;

// Separates the kernel-triple RNG from the instance RNG of the same trial.
const KERNEL_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: u64,
    pub max_states: usize,
    pub max_codomain: usize,
    pub weight_denominator_bound: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            trials: 1000,
            max_states: 12,
            max_codomain: 3,
            weight_denominator_bound: 24,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.max_states == 0 {
            return Err(Error::InvalidConfig("max_states must be at least 1".into()));
        }
        if self.max_codomain == 0 {
            return Err(Error::InvalidConfig("max_codomain must be at least 1".into()));
        }
        if self.weight_denominator_bound == 0 {
            return Err(Error::InvalidConfig(
                "weight_denominator_bound must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Generic,
    /// A 2×2×2 contingency cube with small counts.
    Cube,
    /// `X1 ⊥ X2` by construction.
    Product,
    /// `X1 ⊥ X2 | X3` by construction.
    ConditionallyIndependent,
    /// `X1 ⊥ X3` by construction.
    MarginalX1X3,
}

impl InstanceKind {
    const ALL: [InstanceKind; 5] = [
        InstanceKind::Generic,
        InstanceKind::Cube,
        InstanceKind::Product,
        InstanceKind::ConditionallyIndependent,
        InstanceKind::MarginalX1X3,
    ];

    fn for_trial(index: u64) -> Self {
        Self::ALL[(index % Self::ALL.len() as u64) as usize]
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: InstanceKind,
    pub space: FiniteProbSpace,
    pub x1: RandomVariable,
    pub x2: RandomVariable,
    pub x3: RandomVariable,
    /// Map on the codomain of `X3`, used for `X4 = f ∘ X3`.
    pub f: ValueMap,
    pub cube: Option<ContingencyCube>,
}

/// JSON form of an instance, as stored in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub trial: u64,
    pub kind: InstanceKind,
    pub space: SpaceDocument,
    pub f: MapDocument,
}

impl Instance {
    pub fn document(&self, trial: u64) -> InstanceDocument {
        InstanceDocument {
            trial,
            kind: self.kind,
            space: SpaceDocument::from_space(&self.space, &[&self.x1, &self.x2, &self.x3]),
            f: MapDocument::from_value_map(&self.f),
        }
    }
}

fn trial_rng(seed: u64, salt: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(index);
    rng
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Nonnegative integer weights, zero with elevated probability, at least one
/// positive.
fn draw_weights(rng: &mut ChaCha8Rng, n: usize, bound: u64) -> Vec<u64> {
    let mut w: Vec<u64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                0
            } else {
                rng.random_range(1..=bound)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0) {
        let i = rng.random_range(0..n);
        w[i] = rng.random_range(1..=bound);
    }
    w
}

fn draw_size(rng: &mut ChaCha8Rng, max: usize) -> usize {
    rng.random_range(1..=max)
}

fn draw_map(rng: &mut ChaCha8Rng, domain: usize, codomain: usize) -> Vec<usize> {
    (0..domain).map(|_| rng.random_range(0..codomain)).collect()
}

/// Shrinks the largest factor until the product fits.
fn fit_sizes(sizes: &mut [usize], max_product: usize) {
    while sizes.iter().product::<usize>() > max_product {
        let big = (0..sizes.len()).max_by_key(|&i| sizes[i]).unwrap();
        if sizes[big] == 1 {
            break;
        }
        sizes[big] -= 1;
    }
}

fn space_from_counts(states: Vec<String>, counts: &[u64]) -> Result<FiniteProbSpace> {
    FiniteProbSpace::from_unnormalized(states, counts.iter().map(|&c| Rational::from(c)).collect())
}

fn rv(name: &str, prefix: &str, codomain: usize, map: Vec<usize>) -> Result<RandomVariable> {
    RandomVariable::new(name, labels(prefix, codomain), map)
}

pub fn random_instance(config: &FuzzConfig, index: u64) -> Result<Instance> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, 0, index);
    let kind = InstanceKind::for_trial(index);
    let bound = config.weight_denominator_bound;
    let maxc = config.max_codomain;
    let mut cube = None;

    let (space, x1, x2, x3) = match kind {
        InstanceKind::Generic => {
            let n = draw_size(&mut rng, config.max_states);
            let states = labels("w", n);
            let space = space_from_counts(states, &draw_weights(&mut rng, n, bound))?;
            let (k1, k2, k3) = (draw_size(&mut rng, maxc), draw_size(&mut rng, maxc), draw_size(&mut rng, maxc));
            let x1 = rv("X1", "a", k1, draw_map(&mut rng, n, k1))?;
            let x2 = rv("X2", "b", k2, draw_map(&mut rng, n, k2))?;
            let x3 = rv("X3", "c", k3, draw_map(&mut rng, n, k3))?;
            (space, x1, x2, x3)
        }
        InstanceKind::Cube => {
            let counts: [u64; 8] = draw_weights(&mut rng, 8, bound).try_into().unwrap();
            let c = ContingencyCube::from_u64(counts)?;
            let parts = cube_to_space(&c)?;
            cube = Some(c);
            parts
        }
        InstanceKind::Product | InstanceKind::MarginalX1X3 => {
            // Ω = U × V with product weights; one variable reads U, the other V.
            let mut sizes = [draw_size(&mut rng, maxc + 1), draw_size(&mut rng, maxc + 1)];
            fit_sizes(&mut sizes, config.max_states);
            let [nu, nv] = sizes;
            let pu = draw_weights(&mut rng, nu, bound);
            let pv = draw_weights(&mut rng, nv, bound);
            let mut states = Vec::with_capacity(nu * nv);
            let mut counts = Vec::with_capacity(nu * nv);
            for u in 0..nu {
                for v in 0..nv {
                    states.push(format!("u{u}v{v}"));
                    counts.push(pu[u] * pv[v]);
                }
            }
            let space = space_from_counts(states, &counts)?;
            let (ka, kb, kc) = (draw_size(&mut rng, maxc), draw_size(&mut rng, maxc), draw_size(&mut rng, maxc));
            let gu = draw_map(&mut rng, nu, ka);
            let gv = draw_map(&mut rng, nv, kb);
            let h = draw_map(&mut rng, nu * nv, kc);
            let on_u: Vec<usize> = (0..nu * nv).map(|s| gu[s / nv]).collect();
            let on_v: Vec<usize> = (0..nu * nv).map(|s| gv[s % nv]).collect();
            if kind == InstanceKind::Product {
                let x1 = rv("X1", "a", ka, on_u)?;
                let x2 = rv("X2", "b", kb, on_v)?;
                let x3 = rv("X3", "c", kc, h)?;
                (space, x1, x2, x3)
            } else {
                let x1 = rv("X1", "a", ka, on_u)?;
                let x2 = rv("X2", "b", kc, h)?;
                let x3 = rv("X3", "c", kb, on_v)?;
                (space, x1, x2, x3)
            }
        }
        InstanceKind::ConditionallyIndependent => {
            // Ω = C × U × V with weight p(c) p(u|c) p(v|c).
            let mut sizes = [draw_size(&mut rng, maxc), draw_size(&mut rng, maxc), draw_size(&mut rng, maxc)];
            fit_sizes(&mut sizes, config.max_states);
            let [nc, nu, nv] = sizes;
            let pc = draw_weights(&mut rng, nc, bound);
            let pu: Vec<Vec<u64>> = (0..nc).map(|_| draw_weights(&mut rng, nu, bound)).collect();
            let pv: Vec<Vec<u64>> = (0..nc).map(|_| draw_weights(&mut rng, nv, bound)).collect();
            let mut states = Vec::new();
            let mut counts = Vec::new();
            let (mut m1, mut m2, mut m3) = (Vec::new(), Vec::new(), Vec::new());
            for c in 0..nc {
                for u in 0..nu {
                    for v in 0..nv {
                        states.push(format!("c{c}u{u}v{v}"));
                        counts.push(pc[c] * pu[c][u] * pv[c][v]);
                        m1.push(u);
                        m2.push(v);
                        m3.push(c);
                    }
                }
            }
            let space = space_from_counts(states, &counts)?;
            (
                space,
                rv("X1", "a", nu, m1)?,
                rv("X2", "b", nv, m2)?,
                rv("X3", "c", nc, m3)?,
            )
        }
    };

    let k3 = x3.codomain().len();
    let f = if rng.random_bool(0.2) {
        ValueMap::constant(k3)
    } else {
        let k4 = draw_size(&mut rng, maxc);
        ValueMap::new(labels("d", k4), draw_map(&mut rng, k3, k4))?
    };
    Ok(Instance {
        kind,
        space,
        x1,
        x2,
        x3,
        f,
        cube,
    })
}

fn random_row(rng: &mut ChaCha8Rng, width: usize, bound: u64) -> Vec<Rational> {
    if rng.random_bool(0.3) {
        let hit = rng.random_range(0..width);
        return (0..width)
            .map(|t| if t == hit { Rational::one() } else { Rational::zero() })
            .collect();
    }
    let w = draw_weights(rng, width, bound);
    let total: u64 = w.iter().sum();
    w.iter()
        .map(|&x| Rational::new(x as i64, total as i64).expect("positive total"))
        .collect()
}

fn random_kernel(
    rng: &mut ChaCha8Rng,
    source: &[String],
    prefix: &str,
    max_codomain: usize,
    bound: u64,
) -> Result<MarkovKernel> {
    let width = draw_size(rng, max_codomain);
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(source.len());
    for s in 0..source.len() {
        // repeated rows make the independence predicates hold more often
        let row = if s > 0 && rng.random_bool(0.25) {
            rows[rng.random_range(0..s)].clone()
        } else {
            random_row(rng, width, bound)
        };
        rows.push(row);
    }
    MarkovKernel::new(source.to_vec(), labels(prefix, width), rows)
}

/// A random triple of kernels on a space with at most six states.
pub fn random_kernel_triple(config: &FuzzConfig, index: u64) -> Result<KernelTriple> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, KERNEL_SALT, index);
    let bound = config.weight_denominator_bound;
    let n = draw_size(&mut rng, config.max_states.min(MAX_KERNEL_SOURCE));
    let states = labels("w", n);
    let space = space_from_counts(states.clone(), &draw_weights(&mut rng, n, bound))?;
    let maxc = config.max_codomain;
    let m1 = random_kernel(&mut rng, &states, "a", maxc, bound)?;
    let m2 = random_kernel(&mut rng, &states, "b", maxc, bound)?;
    let m3 = random_kernel(&mut rng, &states, "c", maxc, bound)?;
    KernelTriple::new(space, m1, m2, m3)
}

/// A failed invariant on one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: u64,
    pub check: String,
    pub detail: String,
    /// The random-variable instance, for checks on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDocument>,
    /// The kernel triple, for kernel-level checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_triple: Option<SpaceDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub trials_run: u64,
    pub violations: Vec<Violation>,
    /// Counts of RV-level triples over all random instances, keyed by
    /// pattern such as `"i,!ii,iii"`. All eight keys are present.
    pub pattern_census: BTreeMap<String, u64>,
    /// The first instance exhibiting each observed pattern.
    pub witnesses: BTreeMap<String, InstanceDocument>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Patterns that no random instance hit.
    pub fn missing_patterns(&self) -> Vec<String> {
        self.pattern_census
            .iter()
            .filter(|(_, &n)| n == 0)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

struct TrialOutcome {
    triple: PropositionTriple,
    failures: Vec<(String, String)>,
    /// Failures from this index on concern the kernel triple.
    kernel_from: usize,
}

fn check(failures: &mut Vec<(String, String)>, ok: bool, name: &str, detail: impl FnOnce() -> String) {
    if !ok {
        failures.push((name.to_string(), detail()));
    }
}

/// Same triple computed with every null row of the conditional kernels
/// replaced by a point mass: the predicates may not see rows of measure zero.
fn null_row_insensitive_rv(inst: &Instance, expected_iii: bool) -> Result<bool> {
    let p3 = distribution(&inst.space, &inst.x3)?;
    let cond = condition_on(&inst.space, &[&inst.x1, &inst.x2], &inst.x3)?;
    if cond.kept.len() == p3.len() {
        return Ok(true);
    }
    // (Ω3, P^{X3}) including the null values, with perturbed null rows.
    let full = FiniteProbSpace::new(p3.labels().to_vec(), p3.masses().to_vec())?;
    let mut ks = Vec::new();
    for x in [&inst.x1, &inst.x2] {
        let mut k = crate::finite_prob::conditional_distribution(&inst.space, x, &inst.x3)?;
        for c in 0..p3.len() {
            if p3.masses()[c].is_zero() {
                let width = k.target().len();
                let row = (0..width)
                    .map(|t| if t + 1 == width { Rational::one() } else { Rational::zero() })
                    .collect();
                k = k.with_row(c, row)?;
            }
        }
        ks.push(k);
    }
    Ok(kernels_independent(&full, &ks[0], &ks[1])? == expected_iii)
}

fn null_row_insensitive_kernels(triple: &KernelTriple, expected: PropositionTriple) -> Result<bool> {
    let null: Vec<usize> = (0..triple.space.len())
        .filter(|&s| triple.space.weight(s).is_zero())
        .collect();
    if null.is_empty() {
        return Ok(true);
    }
    let perturb = |m: &MarkovKernel| -> Result<MarkovKernel> {
        let width = m.target().len();
        let mut m = m.clone();
        for &s in &null {
            let row = (0..width).map(|t| if t == 0 { Rational::one() } else { Rational::zero() }).collect();
            m = m.with_row(s, row)?;
        }
        Ok(m)
    };
    let perturbed = KernelTriple::new(
        triple.space.clone(),
        perturb(&triple.m1)?,
        perturb(&triple.m2)?,
        perturb(&triple.m3)?,
    )?;
    Ok(classify_kernels(&perturbed)? == expected)
}

fn run_trial(config: &FuzzConfig, index: u64) -> Result<TrialOutcome> {
    let inst = random_instance(config, index)?;
    let (sp, x1, x2, x3) = (&inst.space, &inst.x1, &inst.x2, &inst.x3);
    let mut failures = Vec::new();

    let t1 = verify_theorem1(sp, x1, x2, x3)?;
    let triple = t1.triple;
    check(&mut failures, t1.theorem_holds, "theorem1", || triple.to_string());

    let phillips = phillips_condition(sp, x1, x2, x3)?;
    check(&mut failures, phillips == triple.p_iii, "phillips_equals_iii", || {
        format!("phillips={phillips} {triple}")
    });

    let marginal = marginal_independence_implies_iii(sp, x1, x2, x3)?;
    check(&mut failures, marginal.holds(), "x1_indep_x3_implies_iii", || {
        format!("{marginal:?}")
    });

    if triple.p_i {
        check(&mut failures, mixture_identity_holds(sp, x1, x2, x3)?, "mixture_identity", String::new);
    }

    check(
        &mut failures,
        null_row_insensitive_rv(&inst, triple.p_iii)?,
        "null_rows_rv",
        String::new,
    );

    // Dirac kernels reduce the kernel predicates to the random-variable ones.
    let dirac = KernelTriple::dirac(sp, x1, x2, x3)?;
    let t3 = verify_theorem3(&dirac)?;
    check(&mut failures, t3.triple == triple, "dirac_bridge", || {
        format!("rv {triple} kernel {}", t3.triple)
    });
    check(&mut failures, t3.representation_agrees == Some(true), "dirac_representation", String::new);
    check(
        &mut failures,
        density_check(&dirac.space, &dirac.m1, &dirac.m2, &dirac.m3)? == triple.p_i,
        "dirac_density",
        String::new,
    );

    let t4 = verify_theorem4(sp, x1, x2, x3, &inst.f)?;
    check(&mut failures, t4.theorem_holds, "theorem4", || t4.triple.to_string());
    check(
        &mut failures,
        teo4_representation_check(sp, x1, x2, x3, &inst.f)?,
        "theorem4_representation",
        String::new,
    );
    if inst.f.codomain().len() == 1 {
        check(&mut failures, t4 == t1, "theorem4_constant_f", || {
            format!("teo4 {} teo1 {}", t4.triple, t1.triple)
        });
    }

    if let Some(cube) = &inst.cube {
        let counted = count_identities(cube)?;
        check(&mut failures, counted.triple == triple, "count_identities", || {
            format!("counted {} classified {triple}", counted.triple)
        });
    }

    let kernel_from = failures.len();
    let kt = random_kernel_triple(config, index)?;
    let k3 = verify_theorem3(&kt)?;
    check(&mut failures, k3.theorem_holds, "theorem3", || k3.triple.to_string());
    check(&mut failures, k3.representation_agrees == Some(true), "theorem3_representation", String::new);
    let by_density = density_check(&kt.space, &kt.m1, &kt.m2, &kt.m3)?;
    check(&mut failures, by_density == kernels_cond_independent(&kt), "density_check", || {
        format!("density={by_density} direct={}", k3.triple.p_i)
    });
    check(
        &mut failures,
        null_row_insensitive_kernels(&kt, k3.triple)?,
        "null_rows_kernel",
        String::new,
    );
    // conditional kernels must be defined regardless of null mass
    conditional_kernel(&kt.space, &kt.m1, &kt.m3)?;

    Ok(TrialOutcome {
        triple,
        failures,
        kernel_from,
    })
}

/// Runs `config.trials` trials in parallel. The report depends only on the
/// config.
pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzReport> {
    config.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|k| run_trial(config, k))
        .collect::<Result<_>>()?;

    let mut census: BTreeMap<String, u64> =
        PropositionTriple::all().map(|t| (t.pattern(), 0)).collect();
    let mut first: BTreeMap<String, u64> = BTreeMap::new();
    let mut violations = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        let k = k as u64;
        let key = o.triple.pattern();
        *census.get_mut(&key).expect("all patterns present") += 1;
        first.entry(key).or_insert(k);
        for (n, (check, detail)) in o.failures.into_iter().enumerate() {
            let (instance, kernel_triple) = if n < o.kernel_from {
                (Some(random_instance(config, k)?.document(k)), None)
            } else {
                (None, Some(SpaceDocument::from_triple(&random_kernel_triple(config, k)?)))
            };
            violations.push(Violation {
                trial: k,
                check,
                detail,
                instance,
                kernel_triple,
            });
        }
    }
    let witnesses = first
        .into_iter()
        .map(|(key, k)| Ok((key, random_instance(config, k)?.document(k))))
        .collect::<Result<_>>()?;

    Ok(FuzzReport {
        config: config.clone(),
        trials_run: config.trials,
        violations,
        pattern_census: census,
        witnesses,
    })
}
