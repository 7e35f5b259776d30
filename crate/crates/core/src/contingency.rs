//! 2×2×2 contingency cubes `C(n000, n001, n010, n011, n100, n101, n110, n111)`.
//!
//! A cube with cell counts `n_ijk` defines a population split into eight
//! classes and three dichotomous variables reading the indices `i`, `j`, `k`.
//! The independence propositions reduce to polynomial identities in the
//! counts, which [`count_identities`] evaluates directly in integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_prob::{FiniteProbSpace, RandomVariable};
use crate::rational::Rational;
use crate::theorems::{classify, phillips_condition, verify_theorem1, PropositionTriple};

/// Eight nonnegative counts, stored in argument order `n000, n001, ..., n111`
/// (index `4i + 2j + k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContingencyCube {
    counts: [BigUint; 8],
}

impl ContingencyCube {
    pub fn new(counts: [BigUint; 8]) -> Result<Self> {
        if counts.iter().all(Zero::is_zero) {
            return Err(Error::ZeroTotal);
        }
        Ok(ContingencyCube { counts })
    }

    pub fn from_u64(counts: [u64; 8]) -> Result<Self> {
        Self::new(counts.map(BigUint::from))
    }

    pub fn counts(&self) -> &[BigUint; 8] {
        &self.counts
    }

    pub fn n(&self, i: usize, j: usize, k: usize) -> &BigUint {
        &self.counts[4 * i + 2 * j + k]
    }

    /// Plus-notation aggregate: `None` in a position sums over that index,
    /// so `margin(None, Some(0), None)` is `n_{+0+}`.
    pub fn margin(&self, i: Option<usize>, j: Option<usize>, k: Option<usize>) -> BigUint {
        let pick = |fixed: Option<usize>, v: usize| fixed.is_none_or(|f| f == v);
        let mut total = BigUint::zero();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    if pick(i, a) && pick(j, b) && pick(k, c) {
                        total += self.n(a, b, c);
                    }
                }
            }
        }
        total
    }

    pub fn total(&self) -> BigUint {
        self.margin(None, None, None)
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::new(self.counts.clone().map(|c| c * factor))
    }

    /// Exchanges the roles of `X1` and `X2`.
    pub fn transposed(&self) -> Self {
        let mut counts = self.counts.clone();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    counts[4 * j + 2 * i + k] = self.n(i, j, k).clone();
                }
            }
        }
        ContingencyCube { counts }
    }
}

impl FromStr for ContingencyCube {
    type Err = Error;

    /// Comma-separated counts in argument order.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 8 {
            return Err(Error::Parse(format!(
                "counts: expected 8 comma-separated values, found {}",
                parts.len()
            )));
        }
        let mut counts: [BigUint; 8] = Default::default();
        for (slot, p) in counts.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::Parse(format!("counts: {p:?} is not a nonnegative integer")))?;
        }
        Self::new(counts)
    }
}

impl fmt::Display for ContingencyCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "C({})", parts.join(","))
    }
}

impl Serialize for ContingencyCube {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        parts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ContingencyCube {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<String>::deserialize(deserializer)?;
        parts.join(",").parse().map_err(serde::de::Error::custom)
    }
}

/// Parses one cube per line; blank lines and lines starting with `#` are
/// skipped. Errors name the offending line.
pub fn parse_cube_csv(text: &str) -> Result<Vec<ContingencyCube>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            l.parse()
                .map_err(|e: Error| Error::Parse(format!("line {}: {e}", n + 1)))
        })
        .collect()
}

/// The population as an eight-state space with weights `n_ijk / n_+++`,
/// plus the three coordinate indicators.
pub fn cube_to_space(
    cube: &ContingencyCube,
) -> Result<(FiniteProbSpace, RandomVariable, RandomVariable, RandomVariable)> {
    let states: Vec<String> = (0..8).map(|c| format!("{:03b}", c)).collect();
    let weights = cube
        .counts
        .iter()
        .map(|c| Rational::from_bigint(c.clone().into()))
        .collect();
    let space = FiniteProbSpace::from_unnormalized(states, weights)?;
    let bits = || vec!["0".to_string(), "1".to_string()];
    let x1 = RandomVariable::new("X1", bits(), (0..8).map(|c| (c >> 2) & 1).collect())?;
    let x2 = RandomVariable::new("X2", bits(), (0..8).map(|c| (c >> 1) & 1).collect())?;
    let x3 = RandomVariable::new("X3", bits(), (0..8).map(|c| c & 1).collect())?;
    Ok((space, x1, x2, x3))
}

/// Diagnostic-test ratios. `X3` is the disease indicator, `X1` and `X2` the
/// two tests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticSummary {
    pub prevalence: Rational,
    pub sensitivity_1: Rational,
    pub sensitivity_2: Rational,
    pub specificity_1: Rational,
    pub specificity_2: Rational,
}

fn ratio(n: BigUint, d: &BigUint) -> Rational {
    Rational::from_bigints(n.into(), d.clone().into()).expect("nonzero margin")
}

/// The five ratios:
/// prevalence `n++1/n+++`, specificities `n+00/n++0` and `n0+0/n++0`,
/// sensitivities `n+11/n++1` and `n1+1/n++1`.
pub fn diagnostics(cube: &ContingencyCube) -> Result<DiagnosticSummary> {
    let healthy = cube.margin(None, None, Some(0));
    let sick = cube.margin(None, None, Some(1));
    if healthy.is_zero() {
        return Err(Error::ZeroMargin("n++0"));
    }
    if sick.is_zero() {
        return Err(Error::ZeroMargin("n++1"));
    }
    Ok(DiagnosticSummary {
        prevalence: ratio(sick.clone(), &cube.total()),
        // FIXME: sensitivity_1 reads n+11 (X2 positive) and sensitivity_2 reads n1+1
        // (X1 positive); confirm the intended test labelling before swapping them
        sensitivity_1: ratio(cube.margin(None, Some(1), Some(1)), &sick),
        sensitivity_2: ratio(cube.margin(Some(1), None, Some(1)), &sick),
        specificity_1: ratio(cube.margin(None, Some(0), Some(0)), &healthy),
        specificity_2: ratio(cube.margin(Some(0), None, Some(0)), &healthy),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountIdentities {
    pub triple: PropositionTriple,
    /// Set when a conditioning margin `n++0` or `n++1` vanishes and the triple
    /// came from the generic predicates instead.
    pub fallback: bool,
}

/// Evaluates the three families of count identities:
///
/// * (ii)  `n_ij+ · n_+++ = n_i++ · n_+j+`
/// * (iii) `n_i+0 n_+j0 / n_++0 + n_i+1 n_+j1 / n_++1 = n_i++ n_+j+ / n_+++`
/// * (i)   `n_ijk · n_++k = n_i+k · n_+jk`
///
/// for all `i, j, k`. The (iii) family is cleared of denominators before
/// comparing.
pub fn count_identities(cube: &ContingencyCube) -> Result<CountIdentities> {
    let m = |i, j, k| cube.margin(i, j, k);
    let total = cube.total();
    let k0 = m(None, None, Some(0));
    let k1 = m(None, None, Some(1));
    if k0.is_zero() || k1.is_zero() {
        let (space, x1, x2, x3) = cube_to_space(cube)?;
        return Ok(CountIdentities {
            triple: classify(&space, &x1, &x2, &x3)?,
            fallback: true,
        });
    }

    let mut p_ii = true;
    let mut p_iii = true;
    let mut p_i = true;
    for i in 0..2 {
        for j in 0..2 {
            let (i, j) = (Some(i), Some(j));
            let rows = m(i, None, None);
            let cols = m(None, j, None);
            p_ii &= m(i, j, None) * &total == &rows * &cols;

            let lhs = (m(i, None, Some(0)) * m(None, j, Some(0)) * &k1
                + m(i, None, Some(1)) * m(None, j, Some(1)) * &k0)
                * &total;
            let rhs = rows * cols * &k0 * &k1;
            p_iii &= lhs == rhs;

            for k in 0..2 {
                let kk = if k == 0 { &k0 } else { &k1 };
                let k = Some(k);
                p_i &= m(i, j, k) * kk == m(i, None, k) * m(None, j, k);
            }
        }
    }
    Ok(CountIdentities {
        triple: PropositionTriple::new(p_i, p_ii, p_iii),
        fallback: false,
    })
}

/// One of the five worked cubes and its expected classification.
#[derive(Clone, Debug)]
pub struct ReferenceCube {
    pub name: &'static str,
    pub counts: [u64; 8],
    pub expected: PropositionTriple,
}

pub fn reference_cubes() -> Vec<ReferenceCube> {
    let t = PropositionTriple::new;
    vec![
        ReferenceCube {
            name: "iii without ii",
            counts: [3000, 200, 1500, 300, 1500, 200, 3000, 300],
            expected: t(false, false, true),
        },
        ReferenceCube {
            name: "ii without iii",
            counts: [4200, 400, 2000, 300, 2000, 200, 1000, 100],
            expected: t(false, true, false),
        },
        ReferenceCube {
            name: "ii and iii without i",
            counts: [1000, 1000, 0, 2000, 0, 2000, 1000, 1000],
            expected: t(false, true, true),
        },
        ReferenceCube {
            name: "all three",
            counts: [1200, 3000, 1200, 3000, 2000, 3200, 2000, 3200],
            expected: t(true, true, true),
        },
        ReferenceCube {
            name: "i alone",
            counts: [1200, 3000, 1200, 3200, 2000, 3000, 2000, 3200],
            expected: t(true, false, false),
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub name: String,
    pub cube: ContingencyCube,
    pub expected: PropositionTriple,
    pub classified: PropositionTriple,
    pub counted: PropositionTriple,
    pub theorem_holds: bool,
    pub phillips: bool,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteTable {
    pub rows: Vec<SuiteRow>,
}

impl SuiteTable {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }
}

impl fmt::Display for SuiteTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "T" } else { "F" };
        write!(
            f,
            "{:<20} {:<44} {:>3} {:>3} {:>3}  {:<7} {:<8} {:<8} status",
            "instance", "cube", "i", "ii", "iii", "counts", "theorem", "phillips"
        )?;
        for r in &self.rows {
            let c = r.classified;
            write!(
                f,
                "\n{:<20} {:<44} {:>3} {:>3} {:>3}  {:<7} {:<8} {:<8} {}",
                r.name,
                r.cube.to_string(),
                mark(c.p_i),
                mark(c.p_ii),
                mark(c.p_iii),
                if r.counted == c { "agree" } else { "DIFFER" },
                if r.theorem_holds { "holds" } else { "FAILS" },
                mark(r.phillips),
                if r.matches { "ok" } else { "MISMATCH" }
            )?;
        }
        Ok(())
    }
}

/// Classifies the five worked cubes through the generic predicates, the
/// count identities, the theorem report and the Phillips condition.
pub fn reference_suite() -> Result<SuiteTable> {
    let rows = reference_cubes()
        .into_iter()
        .map(|pc| {
            let cube = ContingencyCube::from_u64(pc.counts)?;
            let (space, x1, x2, x3) = cube_to_space(&cube)?;
            let classified = classify(&space, &x1, &x2, &x3)?;
            let counted = count_identities(&cube)?.triple;
            let report = verify_theorem1(&space, &x1, &x2, &x3)?;
            let phillips = phillips_condition(&space, &x1, &x2, &x3)?;
            let matches = classified == pc.expected
                && counted == pc.expected
                && report.theorem_holds
                && phillips == classified.p_iii;
            Ok(SuiteRow {
                name: pc.name.to_string(),
                cube,
                expected: pc.expected,
                classified,
                counted,
                theorem_holds: report.theorem_holds,
                phillips,
                matches,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteTable { rows })
}
