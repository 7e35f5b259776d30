//! Markov kernels between finite label sets.
//!
//! A kernel is a row-stochastic matrix of exact rationals. The operations
//! here are the diagonal product, the image under a probability, the
//! conditional kernel of one kernel given another, and the two kernel-level
//! independence predicates. Almost-sure equalities are checked only on
//! conditioning values of positive image mass.

use crate::error::{Error, Result};
use crate::finite_prob::{
    check_stochastic, check_unique, product_labels, uniform_row, FiniteProbSpace, ProbVector,
    RandomVariable,
};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovKernel {
    source: Vec<String>,
    target: Vec<String>,
    rows: Vec<Vec<Rational>>,
}

impl MarkovKernel {
    pub fn new(source: Vec<String>, target: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        check_unique(&source, "kernel source")?;
        check_unique(&target, "kernel target")?;
        if rows.len() != source.len() {
            return Err(Error::DimensionMismatch {
                what: "kernel rows".into(),
                expected: source.len(),
                found: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != target.len() {
                return Err(Error::DimensionMismatch {
                    what: format!("kernel row {i}"),
                    expected: target.len(),
                    found: row.len(),
                });
            }
            check_stochastic(row, &format!("kernel row {i}"))?;
        }
        Ok(MarkovKernel {
            source,
            target,
            rows,
        })
    }

    pub(crate) fn from_parts(source: Vec<String>, target: Vec<String>, rows: Vec<Vec<Rational>>) -> Self {
        debug_assert_eq!(source.len(), rows.len());
        debug_assert!(rows.iter().all(|r| r.len() == target.len()));
        MarkovKernel {
            source,
            target,
            rows,
        }
    }

    /// Every row equal to `row`.
    pub fn constant(source: Vec<String>, target: Vec<String>, row: Vec<Rational>) -> Result<Self> {
        let rows = vec![row; source.len()];
        Self::new(source, target, rows)
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn row(&self, source: usize) -> &[Rational] {
        &self.rows[source]
    }

    pub fn entry(&self, source: usize, target: usize) -> &Rational {
        &self.rows[source][target]
    }

    /// The same kernel with row `source` replaced.
    pub fn with_row(&self, source: usize, row: Vec<Rational>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows[source] = row;
        Self::new(self.source.clone(), self.target.clone(), rows)
    }

    /// Keeps only the listed source rows, in the given order.
    pub fn restrict_source(&self, keep: &[usize]) -> Self {
        MarkovKernel {
            source: keep.iter().map(|&i| self.source[i].clone()).collect(),
            target: self.target.clone(),
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    fn check_on(&self, space: &FiniteProbSpace) -> Result<()> {
        if self.source != space.states() {
            return Err(Error::SourceMismatch(
                "kernel source labels differ from the space's states".into(),
            ));
        }
        Ok(())
    }
}

/// The Dirac kernel `δ_X`: row `ω` is the point mass at `X(ω)`.
pub fn dirac_kernel(space: &FiniteProbSpace, x: &RandomVariable) -> Result<MarkovKernel> {
    x.check_on(space)?;
    let n = x.codomain().len();
    let rows = x
        .assignment()
        .iter()
        .map(|&v| {
            let mut row = vec![Rational::zero(); n];
            row[v] = Rational::one();
            row
        })
        .collect();
    Ok(MarkovKernel::from_parts(
        space.states().to_vec(),
        x.codomain().to_vec(),
        rows,
    ))
}

/// `(M1 × M2)(ω, {(a1, a2)}) = M1(ω, {a1}) · M2(ω, {a2})`.
pub fn diagonal_product(m1: &MarkovKernel, m2: &MarkovKernel) -> Result<MarkovKernel> {
    if m1.source != m2.source {
        return Err(Error::SourceMismatch("diagonal product factors".into()));
    }
    let rows = m1
        .rows
        .iter()
        .zip(&m2.rows)
        .map(|(r1, r2)| {
            r1.iter()
                .flat_map(|a| r2.iter().map(move |b| a * b))
                .collect()
        })
        .collect();
    Ok(MarkovKernel::from_parts(
        m1.source.clone(),
        product_labels(&[&m1.target, &m2.target]),
        rows,
    ))
}

fn image_masses(space: &FiniteProbSpace, m: &MarkovKernel) -> Vec<Rational> {
    let mut masses = vec![Rational::zero(); m.target.len()];
    for (w, row) in space.weights().iter().zip(&m.rows) {
        if w.is_zero() {
            continue;
        }
        for (acc, e) in masses.iter_mut().zip(row) {
            if !e.is_zero() {
                *acc += w * e;
            }
        }
    }
    masses
}

/// The image `P^M(A) = Σ_ω M(ω, A) P({ω})`.
pub fn image(space: &FiniteProbSpace, m: &MarkovKernel) -> Result<ProbVector> {
    m.check_on(space)?;
    Ok(ProbVector::from_parts(
        m.target.clone(),
        image_masses(space, m),
    ))
}

/// A version of `P^{M1|M2}`, a kernel from `M2`'s target to `M1`'s target.
/// Rows of `P^{M2}`-null values are uniform.
pub fn conditional_kernel(
    space: &FiniteProbSpace,
    m1: &MarkovKernel,
    m2: &MarkovKernel,
) -> Result<MarkovKernel> {
    m1.check_on(space)?;
    m2.check_on(space)?;
    let n1 = m1.target.len();
    let n2 = m2.target.len();
    // joint[b][a] = Σ_ω M1(ω,{a}) M2(ω,{b}) P({ω})
    let mut joint = vec![vec![Rational::zero(); n1]; n2];
    for ((w, r1), r2) in space.weights().iter().zip(&m1.rows).zip(&m2.rows) {
        if w.is_zero() {
            continue;
        }
        for (b, e2) in r2.iter().enumerate() {
            if e2.is_zero() {
                continue;
            }
            let we2 = w * e2;
            for (a, e1) in r1.iter().enumerate() {
                if !e1.is_zero() {
                    joint[b][a] += &we2 * e1;
                }
            }
        }
    }
    let rows = joint
        .into_iter()
        .map(|row| {
            let total: Rational = row.iter().sum();
            if total.is_zero() {
                uniform_row(n1)
            } else {
                row.iter().map(|v| v / &total).collect()
            }
        })
        .collect();
    Ok(MarkovKernel::from_parts(
        m2.target.clone(),
        m1.target.clone(),
        rows,
    ))
}

/// A cell where two sides of an identity of measures differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellViolation {
    /// Label indices of the cell, outermost coordinate first.
    pub cell: Vec<usize>,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// First cell `(a1, a2)` where `P^{M1×M2} ≠ P^{M1} × P^{M2}`, if any.
pub fn independence_violation(
    space: &FiniteProbSpace,
    m1: &MarkovKernel,
    m2: &MarkovKernel,
) -> Result<Option<CellViolation>> {
    m1.check_on(space)?;
    m2.check_on(space)?;
    let joint = image_masses(space, &diagonal_product(m1, m2)?);
    let p1 = image_masses(space, m1);
    let p2 = image_masses(space, m2);
    let n2 = p2.len();
    for (a1, x1) in p1.iter().enumerate() {
        for (a2, x2) in p2.iter().enumerate() {
            let lhs = &joint[a1 * n2 + a2];
            let rhs = x1 * x2;
            if *lhs != rhs {
                return Ok(Some(CellViolation {
                    cell: vec![a1, a2],
                    lhs: lhs.clone(),
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

/// `M1 ⊥_P M2`: the image of the diagonal product is the product of images.
pub fn kernels_independent(
    space: &FiniteProbSpace,
    m1: &MarkovKernel,
    m2: &MarkovKernel,
) -> Result<bool> {
    Ok(independence_violation(space, m1, m2)?.is_none())
}

/// Three kernels on a common probability space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTriple {
    pub space: FiniteProbSpace,
    pub m1: MarkovKernel,
    pub m2: MarkovKernel,
    pub m3: MarkovKernel,
}

impl KernelTriple {
    pub fn new(
        space: FiniteProbSpace,
        m1: MarkovKernel,
        m2: MarkovKernel,
        m3: MarkovKernel,
    ) -> Result<Self> {
        m1.check_on(&space)?;
        m2.check_on(&space)?;
        m3.check_on(&space)?;
        Ok(KernelTriple { space, m1, m2, m3 })
    }

    /// The triple of Dirac kernels of three random variables.
    pub fn dirac(
        space: &FiniteProbSpace,
        x1: &RandomVariable,
        x2: &RandomVariable,
        x3: &RandomVariable,
    ) -> Result<Self> {
        Ok(KernelTriple {
            space: space.clone(),
            m1: dirac_kernel(space, x1)?,
            m2: dirac_kernel(space, x2)?,
            m3: dirac_kernel(space, x3)?,
        })
    }
}

/// First `(ω3, a1, a2)` with positive `P^{M3}` mass where
/// `P^{M1×M2|M3} ≠ P^{M1|M3} × P^{M2|M3}`.
pub fn cond_independence_violation(triple: &KernelTriple) -> Option<CellViolation> {
    let KernelTriple { space, m1, m2, m3 } = triple;
    let joint = diagonal_product(m1, m2).expect("triple shares a source");
    let l12 = conditional_kernel(space, &joint, m3).expect("validated triple");
    let l1 = conditional_kernel(space, m1, m3).expect("validated triple");
    let l2 = conditional_kernel(space, m2, m3).expect("validated triple");
    let p3 = image_masses(space, m3);
    let n2 = m2.target.len();
    for (c, mass) in p3.iter().enumerate() {
        if mass.is_zero() {
            continue;
        }
        for (a1, x1) in l1.rows[c].iter().enumerate() {
            for (a2, x2) in l2.rows[c].iter().enumerate() {
                let lhs = &l12.rows[c][a1 * n2 + a2];
                let rhs = x1 * x2;
                if *lhs != rhs {
                    return Some(CellViolation {
                        cell: vec![c, a1, a2],
                        lhs: lhs.clone(),
                        rhs,
                    });
                }
            }
        }
    }
    None
}

/// `M1 ⊥_P M2 | M3`.
pub fn kernels_cond_independent(triple: &KernelTriple) -> bool {
    cond_independence_violation(triple).is_none()
}

/// Second, independent evaluation of `M1 ⊥_P M2 | M3` through the density
/// factorization with counting measures as dominating measures, so the
/// densities are the kernel entries themselves.
pub fn density_check(
    space: &FiniteProbSpace,
    m1: &MarkovKernel,
    m2: &MarkovKernel,
    m3: &MarkovKernel,
) -> Result<bool> {
    for m in [m1, m2, m3] {
        m.check_on(space)?;
    }
    let weights = space.weights();
    let integral = |f: &dyn Fn(usize) -> Rational| -> Rational {
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(s, w)| f(s) * w)
            .sum()
    };
    for c in 0..m3.target.len() {
        let phi3 = |s: usize| m3.rows[s][c].clone();
        let norm = integral(&phi3);
        if norm.is_zero() {
            continue;
        }
        let d1: Vec<Rational> = (0..m1.target.len())
            .map(|a| integral(&|s| &m1.rows[s][a] * &m3.rows[s][c]) / &norm)
            .collect();
        let d2: Vec<Rational> = (0..m2.target.len())
            .map(|b| integral(&|s| &m2.rows[s][b] * &m3.rows[s][c]) / &norm)
            .collect();
        for (a, x1) in d1.iter().enumerate() {
            for (b, x2) in d2.iter().enumerate() {
                let d12 =
                    integral(&|s| &m1.rows[s][a] * &m2.rows[s][b] * &m3.rows[s][c]) / &norm;
                if d12 != x1 * x2 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
