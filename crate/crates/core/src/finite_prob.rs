//! Finite probability spaces, random variables on them and their (joint,
//! conditional) distributions. Every event is a subset of the state set, so
//! measures are checked on singletons.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::rational::Rational;

pub(crate) fn check_unique(labels: &[String], what: &'static str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone(), what));
        }
    }
    Ok(())
}

/// Checks that `masses` is a probability vector.
pub(crate) fn check_stochastic(masses: &[Rational], what: &str) -> Result<()> {
    for (i, m) in masses.iter().enumerate() {
        if m.is_negative() {
            return Err(Error::NegativeWeight {
                what: format!("{what}[{i}]"),
                value: m.to_string(),
            });
        }
    }
    let sum: Rational = masses.iter().sum();
    if sum != Rational::one() {
        return Err(Error::NotNormalized {
            what: what.to_string(),
            sum: sum.to_string(),
        });
    }
    Ok(())
}

/// Labels of a product set, ordered lexicographically with the first factor
/// most significant. A single factor keeps its labels unchanged.
pub fn product_labels(factors: &[&[String]]) -> Vec<String> {
    if factors.len() == 1 {
        return factors[0].to_vec();
    }
    let mut out = vec![Vec::<&str>::new()];
    for f in factors {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                f.iter().map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l.as_str());
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|parts| format!("({})", parts.join(",")))
        .collect()
}

/// A finite state set with exact weights summing to one. The sigma-field is
/// the power set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProbSpace {
    states: Vec<String>,
    weights: Vec<Rational>,
}

impl FiniteProbSpace {
    pub fn new(states: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "weights".into(),
                expected: states.len(),
                found: weights.len(),
            });
        }
        check_unique(&states, "states")?;
        check_stochastic(&weights, "weights")?;
        Ok(FiniteProbSpace { states, weights })
    }

    /// Normalizes nonnegative weights by their (positive) total.
    pub fn from_unnormalized(states: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if !total.is_positive() {
            return Err(Error::NotNormalized {
                what: "weights".into(),
                sum: total.to_string(),
            });
        }
        let weights = weights.iter().map(|w| w / &total).collect();
        Self::new(states, weights)
    }

    pub fn uniform(states: Vec<String>) -> Result<Self> {
        let n = states.len().max(1) as i64;
        let w = Rational::new(1, n)?;
        let weights = vec![w; states.len()];
        Self::new(states, weights)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, state: usize) -> &Rational {
        &self.weights[state]
    }
}

/// A map from the states of a space to the labels of a finite codomain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomVariable {
    name: String,
    codomain: Vec<String>,
    assignment: Vec<usize>,
}

impl RandomVariable {
    pub fn new(name: impl Into<String>, codomain: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        let name = name.into();
        check_unique(&codomain, "codomain")?;
        if let Some(&bad) = assignment.iter().find(|&&v| v >= codomain.len()) {
            return Err(Error::IndexOutOfRange {
                what: format!("random variable {name}"),
                index: bad,
                size: codomain.len(),
            });
        }
        Ok(RandomVariable {
            name,
            codomain,
            assignment,
        })
    }

    /// The variable taking the single value `label` on `n_states` states.
    pub fn constant(name: impl Into<String>, label: impl Into<String>, n_states: usize) -> Self {
        RandomVariable {
            name: name.into(),
            codomain: vec![label.into()],
            assignment: vec![0; n_states],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn codomain(&self) -> &[String] {
        &self.codomain
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Codomain index of the value at `state`.
    pub fn value(&self, state: usize) -> usize {
        self.assignment[state]
    }

    pub(crate) fn check_on(&self, space: &FiniteProbSpace) -> Result<()> {
        if self.assignment.len() != space.len() {
            return Err(Error::DimensionMismatch {
                what: format!("random variable {}", self.name),
                expected: space.len(),
                found: self.assignment.len(),
            });
        }
        Ok(())
    }

    /// `f ∘ self`, renamed.
    pub fn compose(&self, f: &ValueMap, name: impl Into<String>) -> Result<RandomVariable> {
        if f.map.len() != self.codomain.len() {
            return Err(Error::DimensionMismatch {
                what: format!("map applied to {}", self.name),
                expected: self.codomain.len(),
                found: f.map.len(),
            });
        }
        RandomVariable::new(
            name,
            f.codomain.clone(),
            self.assignment.iter().map(|&v| f.map[v]).collect(),
        )
    }
}

/// A total function between two finite label sets, given as the codomain and,
/// for each domain index, the index of its image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueMap {
    codomain: Vec<String>,
    map: Vec<usize>,
}

impl ValueMap {
    pub fn new(codomain: Vec<String>, map: Vec<usize>) -> Result<Self> {
        check_unique(&codomain, "map codomain")?;
        if let Some(&bad) = map.iter().find(|&&v| v >= codomain.len()) {
            return Err(Error::IndexOutOfRange {
                what: "value map".into(),
                index: bad,
                size: codomain.len(),
            });
        }
        Ok(ValueMap { codomain, map })
    }

    pub fn constant(domain_size: usize) -> Self {
        ValueMap {
            codomain: vec!["*".into()],
            map: vec![0; domain_size],
        }
    }

    pub fn identity(domain: &[String]) -> Self {
        ValueMap {
            codomain: domain.to_vec(),
            map: (0..domain.len()).collect(),
        }
    }

    pub fn codomain(&self) -> &[String] {
        &self.codomain
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

/// A probability vector over an ordered label set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbVector {
    labels: Vec<String>,
    masses: Vec<Rational>,
}

impl ProbVector {
    pub fn new(labels: Vec<String>, masses: Vec<Rational>) -> Result<Self> {
        if labels.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                what: "masses".into(),
                expected: labels.len(),
                found: masses.len(),
            });
        }
        check_unique(&labels, "labels")?;
        check_stochastic(&masses, "masses")?;
        Ok(ProbVector { labels, masses })
    }

    pub(crate) fn from_parts(labels: Vec<String>, masses: Vec<Rational>) -> Self {
        debug_assert_eq!(labels.len(), masses.len());
        ProbVector { labels, masses }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, label: &str) -> Option<&Rational> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.masses[i])
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Masses of the joint value tuples, indexed in mixed radix (first variable
/// most significant).
pub(crate) fn joint_masses(space: &FiniteProbSpace, xs: &[&RandomVariable]) -> Vec<Rational> {
    let size: usize = xs.iter().map(|x| x.codomain.len()).product();
    let mut masses = vec![Rational::zero(); size];
    for (s, w) in space.weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let idx = xs
            .iter()
            .fold(0, |acc, x| acc * x.codomain.len() + x.assignment[s]);
        masses[idx] += w;
    }
    masses
}

/// The image measure `P^X`.
pub fn distribution(space: &FiniteProbSpace, x: &RandomVariable) -> Result<ProbVector> {
    x.check_on(space)?;
    Ok(ProbVector::from_parts(
        x.codomain.clone(),
        joint_masses(space, &[x]),
    ))
}

/// Distribution of the tuple `(X_1, ..., X_k)` over the lexicographically
/// ordered product of the codomains.
pub fn joint_distribution(space: &FiniteProbSpace, xs: &[&RandomVariable]) -> Result<ProbVector> {
    if xs.is_empty() {
        return Err(Error::EmptyVariableList);
    }
    for x in xs {
        x.check_on(space)?;
    }
    let codomains: Vec<&[String]> = xs.iter().map(|x| x.codomain.as_slice()).collect();
    Ok(ProbVector::from_parts(
        product_labels(&codomains),
        joint_masses(space, xs),
    ))
}

/// A version of `P^{X|Y}`: the kernel from `Y`'s codomain to `X`'s codomain
/// with row `y` equal to `P(X = · | Y = y)`. Rows of null values of `Y` are
/// uniform.
pub fn conditional_distribution(
    space: &FiniteProbSpace,
    x: &RandomVariable,
    y: &RandomVariable,
) -> Result<MarkovKernel> {
    x.check_on(space)?;
    y.check_on(space)?;
    let nx = x.codomain.len();
    let joint = joint_masses(space, &[y, x]);
    let rows = joint
        .chunks(nx)
        .map(|chunk| {
            let total: Rational = chunk.iter().sum();
            if total.is_zero() {
                uniform_row(nx)
            } else {
                chunk.iter().map(|m| m / &total).collect()
            }
        })
        .collect();
    Ok(MarkovKernel::from_parts(
        y.codomain.clone(),
        x.codomain.clone(),
        rows,
    ))
}

pub(crate) fn uniform_row(n: usize) -> Vec<Rational> {
    let w = Rational::new(1, n as i64).expect("nonempty target");
    vec![w; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rejects_bad_weights() {
        let st = labels(&["a", "b"]);
        assert!(matches!(
            FiniteProbSpace::new(st.clone(), vec![q(1, 2), q(1, 3)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            FiniteProbSpace::new(st.clone(), vec![q(3, 2), q(-1, 2)]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            FiniteProbSpace::new(labels(&["a", "a"]), vec![q(1, 2), q(1, 2)]),
            Err(Error::DuplicateLabel(..))
        ));
    }

    #[test]
    fn constant_variable_has_unit_mass() {
        let sp = FiniteProbSpace::uniform(labels(&["a", "b"])).unwrap();
        let x = RandomVariable::new("X", labels(&["0"]), vec![0, 0]).unwrap();
        let d = distribution(&sp, &x).unwrap();
        assert_eq!(d.mass("0"), Some(&q(1, 1)));
    }

    #[test]
    fn distribution_by_summation() {
        let sp = FiniteProbSpace::new(labels(&["a", "b", "c"]), vec![q(1, 6), q(1, 3), q(1, 2)])
            .unwrap();
        let x = RandomVariable::new("X", labels(&["0", "1"]), vec![0, 0, 1]).unwrap();
        let d = distribution(&sp, &x).unwrap();
        assert_eq!(d.masses(), &[q(1, 2), q(1, 2)]);
    }

    #[test]
    fn wrong_space_is_a_dimension_mismatch() {
        let sp = FiniteProbSpace::uniform(labels(&["a", "b", "c"])).unwrap();
        let x = RandomVariable::new("X", labels(&["0", "1"]), vec![0, 1]).unwrap();
        assert!(matches!(
            distribution(&sp, &x),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(joint_distribution(&sp, &[]).is_err());
    }

    #[test]
    fn joint_of_two_coins() {
        let sp = FiniteProbSpace::uniform(labels(&["hh", "ht", "th", "tt"])).unwrap();
        let a = RandomVariable::new("A", labels(&["h", "t"]), vec![0, 0, 1, 1]).unwrap();
        let b = RandomVariable::new("B", labels(&["h", "t"]), vec![0, 1, 0, 1]).unwrap();
        let j = joint_distribution(&sp, &[&a, &b]).unwrap();
        assert_eq!(j.labels(), &labels(&["(h,h)", "(h,t)", "(t,h)", "(t,t)"])[..]);
        assert!(j.masses().iter().all(|m| *m == q(1, 4)));
        assert_eq!(
            joint_distribution(&sp, &[&a]).unwrap(),
            distribution(&sp, &a).unwrap()
        );
    }

    #[test]
    fn conditional_given_constant_is_marginal() {
        let sp = FiniteProbSpace::new(labels(&["a", "b", "c"]), vec![q(1, 6), q(1, 3), q(1, 2)])
            .unwrap();
        let x = RandomVariable::new("X", labels(&["0", "1"]), vec![0, 1, 1]).unwrap();
        let y = RandomVariable::constant("Y", "*", 3);
        let k = conditional_distribution(&sp, &x, &y).unwrap();
        assert_eq!(k.row(0), distribution(&sp, &x).unwrap().masses());
    }

    #[test]
    fn independent_conditioning_reproduces_marginal() {
        let sp = FiniteProbSpace::uniform(labels(&["a", "b", "c", "d"])).unwrap();
        let parity = RandomVariable::new("X", labels(&["even", "odd"]), vec![0, 1, 0, 1]).unwrap();
        let half = RandomVariable::new("Y", labels(&["lo", "hi"]), vec![0, 0, 1, 1]).unwrap();
        let k = conditional_distribution(&sp, &parity, &half).unwrap();
        // enumeration: P(X=even, Y=lo) = 1/4, P(Y=lo) = 1/2
        for r in 0..2 {
            assert_eq!(k.row(r), &[q(1, 2), q(1, 2)]);
        }
    }

    #[test]
    fn null_conditioning_value_gets_uniform_row() {
        let sp = FiniteProbSpace::new(labels(&["a", "b"]), vec![q(1, 1), q(0, 1)]).unwrap();
        let x = RandomVariable::new("X", labels(&["0", "1", "2"]), vec![0, 2]).unwrap();
        let y = RandomVariable::new("Y", labels(&["p", "n"]), vec![0, 1]).unwrap();
        let k = conditional_distribution(&sp, &x, &y).unwrap();
        assert_eq!(k.row(0), &[q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(k.row(1), &[q(1, 3), q(1, 3), q(1, 3)]);
    }

    #[test]
    fn compose_requires_total_map() {
        let x = RandomVariable::new("X", labels(&["0", "1", "2"]), vec![0, 1, 2]).unwrap();
        let short = ValueMap::new(labels(&["a"]), vec![0, 0]).unwrap();
        assert!(x.compose(&short, "Y").is_err());
        assert!(ValueMap::new(labels(&["a"]), vec![0, 1]).is_err());
        let f = ValueMap::new(labels(&["a", "b"]), vec![0, 0, 1]).unwrap();
        assert_eq!(x.compose(&f, "Y").unwrap().assignment(), &[0, 0, 1]);
    }
}
