//! Independence predicates for random variables, the three propositions
//!
//! * (i)   `X1 ⊥ X2 | X3`
//! * (ii)  `X1 ⊥ X2`
//! * (iii) `P^{X1|X3} ⊥ P^{X2|X3}` under `P^{X3}`
//!
//! and reports checking that under (i) the other two are equivalent, at the
//! random-variable level, at the kernel level, and for a coarsening
//! `X4 = f ∘ X3` of the conditioning variable.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finite_prob::{
    conditional_distribution, distribution, joint_masses, FiniteProbSpace, RandomVariable,
    ValueMap,
};
use crate::kernel::{
    conditional_kernel, cond_independence_violation, diagonal_product, image,
    independence_violation, CellViolation, KernelTriple, MarkovKernel,
};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PropositionTriple {
    pub p_i: bool,
    pub p_ii: bool,
    pub p_iii: bool,
}

impl PropositionTriple {
    pub fn new(p_i: bool, p_ii: bool, p_iii: bool) -> Self {
        PropositionTriple { p_i, p_ii, p_iii }
    }

    /// Under (i), (ii) and (iii) agree.
    pub fn consistent(&self) -> bool {
        !self.p_i || self.p_ii == self.p_iii
    }

    /// Compact key such as `i,!ii,iii`.
    pub fn pattern(&self) -> String {
        let f = |b: bool, s: &str| if b { s.to_string() } else { format!("!{s}") };
        format!("{},{},{}", f(self.p_i, "i"), f(self.p_ii, "ii"), f(self.p_iii, "iii"))
    }

    /// All eight truth assignments, in lexicographic order with `false < true`.
    pub fn all() -> impl Iterator<Item = PropositionTriple> {
        (0..8u8).map(|b| PropositionTriple::new(b & 4 != 0, b & 2 != 0, b & 1 != 0))
    }
}

impl fmt::Display for PropositionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i={} ii={} iii={}", self.p_i, self.p_ii, self.p_iii)
    }
}

/// The first violated cell of an identity, with labels and exact sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub identity: String,
    pub cell: Vec<String>,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Witness {
    fn from_cell(identity: &str, v: CellViolation, axes: &[&[String]]) -> Self {
        Witness {
            identity: identity.to_string(),
            cell: v
                .cell
                .iter()
                .zip(axes)
                .map(|(&i, labels)| labels[i].clone())
                .collect(),
            lhs: v.lhs,
            rhs: v.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub triple: PropositionTriple,
    pub theorem_holds: bool,
    pub witness: Option<Witness>,
    /// Agreement with the projection representation (kernel-level reports only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation_agrees: Option<bool>,
}

/// First cell `(x1, x2)` where `P(X1=x1, X2=x2) ≠ P(X1=x1) P(X2=x2)`.
pub fn independence_witness(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
) -> Result<Option<Witness>> {
    let p1 = distribution(space, x1)?;
    let p2 = distribution(space, x2)?;
    let joint = joint_masses(space, &[x1, x2]);
    let n2 = x2.codomain().len();
    for (a, m1) in p1.masses().iter().enumerate() {
        for (b, m2) in p2.masses().iter().enumerate() {
            let rhs = m1 * m2;
            if joint[a * n2 + b] != rhs {
                return Ok(Some(Witness {
                    identity: "P(X1,X2) = P(X1) P(X2)".into(),
                    cell: vec![x1.codomain()[a].clone(), x2.codomain()[b].clone()],
                    lhs: joint[a * n2 + b].clone(),
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

/// `X1 ⊥ X2`, checked on every cell of the product of codomains.
pub fn independent_rvs(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
) -> Result<bool> {
    Ok(independence_witness(space, x1, x2)?.is_none())
}

/// First `(x3, x1, x2)` with `P(X3=x3) > 0` where
/// `P(X1=x1, X2=x2 | X3=x3) ≠ P(X1=x1 | X3=x3) P(X2=x2 | X3=x3)`.
pub fn cond_independence_witness(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<Option<Witness>> {
    for x in [x1, x2, x3] {
        x.check_on(space)?;
    }
    let joint = joint_masses(space, &[x3, x1, x2]);
    let (n1, n2) = (x1.codomain().len(), x2.codomain().len());
    for (c, block) in joint.chunks(n1 * n2).enumerate() {
        let total: Rational = block.iter().sum();
        if total.is_zero() {
            continue;
        }
        let row1: Vec<Rational> = block.chunks(n2).map(|r| r.iter().sum()).collect();
        let row2: Vec<Rational> = (0..n2)
            .map(|b| (0..n1).map(|a| &block[a * n2 + b]).sum())
            .collect();
        for a in 0..n1 {
            for b in 0..n2 {
                // P(x1,x2,x3) P(x3) = P(x1,x3) P(x2,x3)
                let lhs = &block[a * n2 + b] / &total;
                let rhs = (&row1[a] / &total) * (&row2[b] / &total);
                if lhs != rhs {
                    return Ok(Some(Witness {
                        identity: "P(X1,X2|X3) = P(X1|X3) P(X2|X3)".into(),
                        cell: vec![
                            x3.codomain()[c].clone(),
                            x1.codomain()[a].clone(),
                            x2.codomain()[b].clone(),
                        ],
                        lhs,
                        rhs,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// `X1 ⊥ X2 | X3`.
pub fn cond_independent_rvs(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<bool> {
    Ok(cond_independence_witness(space, x1, x2, x3)?.is_none())
}

/// The conditioning space `(Ω3, P^{X3})` restricted to values of positive
/// mass, with the conditional kernels `P^{Xi|X3}` restricted to match.
#[derive(Clone, Debug)]
pub struct Conditioned {
    pub space: FiniteProbSpace,
    /// Codomain indices of `X3` that were kept.
    pub kept: Vec<usize>,
    pub kernels: Vec<MarkovKernel>,
}

/// Builds `(Ω3, P^{X3})` on the positive-mass values of `x3` together with
/// `P^{X|X3}` for each `X` in `xs`.
pub fn condition_on(
    space: &FiniteProbSpace,
    xs: &[&RandomVariable],
    x3: &RandomVariable,
) -> Result<Conditioned> {
    let p3 = distribution(space, x3)?;
    let kept: Vec<usize> = (0..p3.len()).filter(|&c| p3.masses()[c].is_positive()).collect();
    let marginal = FiniteProbSpace::new(
        kept.iter().map(|&c| x3.codomain()[c].clone()).collect(),
        kept.iter().map(|&c| p3.masses()[c].clone()).collect(),
    )?;
    let kernels = xs
        .iter()
        .map(|x| Ok(conditional_distribution(space, x, x3)?.restrict_source(&kept)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Conditioned {
        space: marginal,
        kept,
        kernels,
    })
}

fn iii_witness(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<Option<Witness>> {
    let cond = condition_on(space, &[x1, x2], x3)?;
    let v = independence_violation(&cond.space, &cond.kernels[0], &cond.kernels[1])?;
    Ok(v.map(|v| {
        Witness::from_cell(
            "P^{X3}-image of P^{X1|X3} x P^{X2|X3} = product of images",
            v,
            &[x1.codomain(), x2.codomain()],
        )
    }))
}

/// Proposition (iii): `P^{X1|X3}` and `P^{X2|X3}` are `P^{X3}`-independent.
pub fn conditional_kernels_independent(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<bool> {
    Ok(iii_witness(space, x1, x2, x3)?.is_none())
}

pub fn classify(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<PropositionTriple> {
    Ok(PropositionTriple {
        p_i: cond_independent_rvs(space, x1, x2, x3)?,
        p_ii: independent_rvs(space, x1, x2)?,
        p_iii: conditional_kernels_independent(space, x1, x2, x3)?,
    })
}

pub fn verify_theorem1(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<VerificationReport> {
    let triple = classify(space, x1, x2, x3)?;
    let theorem_holds = triple.consistent();
    let witness = match (theorem_holds, triple.p_ii) {
        (true, _) => None,
        (false, true) => iii_witness(space, x1, x2, x3)?,
        (false, false) => independence_witness(space, x1, x2)?,
    };
    Ok(VerificationReport {
        triple,
        theorem_holds,
        witness,
        representation_agrees: None,
    })
}

/// The finite space `(Ω1×Ω2×Ω3, P^{M1×M2×M3})` with its three coordinate
/// projections.
pub fn projection_representation(
    triple: &KernelTriple,
) -> Result<(FiniteProbSpace, RandomVariable, RandomVariable, RandomVariable)> {
    let KernelTriple { space, m1, m2, m3 } = triple;
    let m12 = diagonal_product(m1, m2)?;
    let m123 = diagonal_product(&m12, m3)?;
    let q = image(space, &m123)?;
    let (n1, n2, n3) = (m1.target().len(), m2.target().len(), m3.target().len());
    let product = FiniteProbSpace::new(q.labels().to_vec(), q.masses().to_vec())?;
    let cells = 0..n1 * n2 * n3;
    let q1 = RandomVariable::new("q1", m1.target().to_vec(), cells.clone().map(|c| c / (n2 * n3)).collect())?;
    let q2 = RandomVariable::new("q2", m2.target().to_vec(), cells.clone().map(|c| (c / n3) % n2).collect())?;
    let q3 = RandomVariable::new("q3", m3.target().to_vec(), cells.map(|c| c % n3).collect())?;
    Ok((product, q1, q2, q3))
}

/// The kernel-level triple for `M1, M2` given `M3`.
pub fn classify_kernels(triple: &KernelTriple) -> Result<PropositionTriple> {
    Ok(kernel_triple_with_witness(triple)?.0)
}

fn kernel_triple_with_witness(
    triple: &KernelTriple,
) -> Result<(PropositionTriple, Option<CellViolation>, Option<CellViolation>)> {
    let KernelTriple { space, m1, m2, m3 } = triple;
    let p_i = cond_independence_violation(triple).is_none();
    let ii = independence_violation(space, m1, m2)?;
    let p3 = image(space, m3)?;
    let kept: Vec<usize> = (0..p3.len()).filter(|&c| p3.masses()[c].is_positive()).collect();
    let space3 = FiniteProbSpace::new(
        kept.iter().map(|&c| p3.labels()[c].clone()).collect(),
        kept.iter().map(|&c| p3.masses()[c].clone()).collect(),
    )?;
    let l1 = conditional_kernel(space, m1, m3)?.restrict_source(&kept);
    let l2 = conditional_kernel(space, m2, m3)?.restrict_source(&kept);
    let iii = independence_violation(&space3, &l1, &l2)?;
    Ok((
        PropositionTriple::new(p_i, ii.is_none(), iii.is_none()),
        ii,
        iii,
    ))
}

/// Kernel-level version of the theorem, cross-checked against the projection
/// representation under `P^{M1×M2×M3}`.
pub fn verify_theorem3(triple: &KernelTriple) -> Result<VerificationReport> {
    let (props, ii, iii) = kernel_triple_with_witness(triple)?;
    let (q_space, q1, q2, q3) = projection_representation(triple)?;
    let represented = classify(&q_space, &q1, &q2, &q3)?;
    let theorem_holds = props.consistent();
    let axes = [triple.m1.target(), triple.m2.target()];
    let witness = if theorem_holds {
        None
    } else if props.p_ii {
        iii.map(|v| Witness::from_cell("P^{M3}-image of L1 x L2 = product of images", v, &axes))
    } else {
        ii.map(|v| Witness::from_cell("P^{M1 x M2} = P^{M1} x P^{M2}", v, &axes))
    };
    Ok(VerificationReport {
        triple: props,
        theorem_holds,
        witness,
        representation_agrees: Some(represented == props),
    })
}

/// Propositions for `X4 = f ∘ X3`:
/// (i) `X1 ⊥ X2 | X3`, (ii) `X1 ⊥ X2 | X4`, (iii) `P^{X1|X3} ⊥ P^{X2|X3} | P^{X4|X3}` under `P^{X3}`.
pub fn verify_theorem4(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
    f: &ValueMap,
) -> Result<VerificationReport> {
    let x4 = x3.compose(f, "X4")?;
    let i = cond_independence_witness(space, x1, x2, x3)?;
    let ii = cond_independence_witness(space, x1, x2, &x4)?;
    let cond = condition_on(space, &[x1, x2, &x4], x3)?;
    let mut ks = cond.kernels.into_iter();
    let (m1, m2, m4) = (ks.next().unwrap(), ks.next().unwrap(), ks.next().unwrap());
    let kt = KernelTriple::new(cond.space, m1, m2, m4)?;
    let iii = cond_independence_violation(&kt);
    let triple = PropositionTriple::new(i.is_none(), ii.is_none(), iii.is_none());
    let theorem_holds = triple.consistent();
    let witness = if theorem_holds {
        None
    } else if triple.p_ii {
        iii.map(|v| Witness {
            identity: "Q^{M1 x M2|M4} = Q^{M1|M4} x Q^{M2|M4}".into(),
            cell: vec![
                x4.codomain()[v.cell[0]].clone(),
                x1.codomain()[v.cell[1]].clone(),
                x2.codomain()[v.cell[2]].clone(),
            ],
            lhs: v.lhs,
            rhs: v.rhs,
        })
    } else {
        ii
    };
    Ok(VerificationReport {
        triple,
        theorem_holds,
        witness,
        representation_agrees: None,
    })
}

/// For all cells `F1 = {X1 = a}`, `F2 = {X2 = b}`:
/// `E(E(I_F1|X3) I_F2) = P(F1) P(F2)` and `E(E(I_F2|X3) I_F1) = P(F1) P(F2)`.
pub fn phillips_condition(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<bool> {
    let c1 = conditional_distribution(space, x1, x3)?;
    let c2 = conditional_distribution(space, x2, x3)?;
    let p1 = distribution(space, x1)?;
    let p2 = distribution(space, x2)?;
    for (a, pa) in p1.masses().iter().enumerate() {
        for (b, pb) in p2.masses().iter().enumerate() {
            let target = pa * pb;
            // integrate over Ω state by state
            let mut e12 = Rational::zero();
            let mut e21 = Rational::zero();
            for (s, w) in space.weights().iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let v3 = x3.value(s);
                if x2.value(s) == b {
                    e12 += c1.entry(v3, a) * w;
                }
                if x1.value(s) == a {
                    e21 += c2.entry(v3, b) * w;
                }
            }
            if e12 != target || e21 != target {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The pair `(X1 ⊥ X3, (iii))`; the first implies the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalImplication {
    pub x1_indep_x3: bool,
    pub p_iii: bool,
}

impl MarginalImplication {
    pub fn holds(&self) -> bool {
        !self.x1_indep_x3 || self.p_iii
    }
}

pub fn marginal_independence_implies_iii(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<MarginalImplication> {
    Ok(MarginalImplication {
        x1_indep_x3: independent_rvs(space, x1, x3)?,
        p_iii: conditional_kernels_independent(space, x1, x2, x3)?,
    })
}

/// Checks that the conditional kernels of `P^{Xi|X3}` (and of their diagonal
/// product) given `P^{X4|X3}` under `P^{X3}` coincide with the iterated
/// conditional expectations `E[E(I∘Xi | σ(X3)) | X4]` evaluated as finite
/// sums over `Ω`, on every value of `X4` with positive mass.
pub fn teo4_representation_check(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
    f: &ValueMap,
) -> Result<bool> {
    let x4 = x3.compose(f, "X4")?;
    let cond = condition_on(space, &[x1, x2, &x4], x3)?;
    let (m1, m2, m4) = (&cond.kernels[0], &cond.kernels[1], &cond.kernels[2]);
    let m12 = diagonal_product(m1, m2)?;
    let kernel_side = [
        conditional_kernel(&cond.space, m1, m4)?,
        conditional_kernel(&cond.space, m2, m4)?,
        conditional_kernel(&cond.space, &m12, m4)?,
    ];

    // E(I_a ∘ Xi | σ(X3)) as a function of X3's codomain index
    let c1 = conditional_distribution(space, x1, x3)?;
    let c2 = conditional_distribution(space, x2, x3)?;
    let p4 = distribution(space, &x4)?;
    let (n1, n2) = (x1.codomain().len(), x2.codomain().len());
    let inner: [Box<dyn Fn(usize, usize) -> Rational>; 3] = [
        Box::new(|v3, a| c1.entry(v3, a).clone()),
        Box::new(|v3, b| c2.entry(v3, b).clone()),
        Box::new(|v3, ab| c1.entry(v3, ab / n2) * c2.entry(v3, ab % n2)),
    ];
    let widths = [n1, n2, n1 * n2];

    for (d, mass4) in p4.masses().iter().enumerate() {
        if mass4.is_zero() {
            continue;
        }
        for k in 0..3 {
            for a in 0..widths[k] {
                let mut expectation = Rational::zero();
                for (s, w) in space.weights().iter().enumerate() {
                    if !w.is_zero() && x4.value(s) == d {
                        expectation += inner[k](x3.value(s), a) * w;
                    }
                }
                let expectation = expectation / mass4;
                if *kernel_side[k].entry(d, a) != expectation {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The mixture identity behind the theorem: under (i),
/// `P(X1=a, X2=b) = Σ_c P(X1=a|X3=c) P(X2=b|X3=c) P(X3=c)`.
pub fn mixture_identity_holds(
    space: &FiniteProbSpace,
    x1: &RandomVariable,
    x2: &RandomVariable,
    x3: &RandomVariable,
) -> Result<bool> {
    let c1 = conditional_distribution(space, x1, x3)?;
    let c2 = conditional_distribution(space, x2, x3)?;
    let p3 = distribution(space, x3)?;
    let joint = joint_masses(space, &[x1, x2]);
    let n2 = x2.codomain().len();
    for a in 0..x1.codomain().len() {
        for b in 0..n2 {
            let mix: Rational = p3
                .masses()
                .iter()
                .enumerate()
                .filter(|(_, m)| m.is_positive())
                .map(|(c, m)| c1.entry(c, a) * c2.entry(c, b) * m)
                .sum();
            if mix != joint[a * n2 + b] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
