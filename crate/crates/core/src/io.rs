//! JSON documents for spaces, random variables, kernels and value maps.
//!
//! ```json
//! {"states": ["s1", "s2", "s3"], "weights": ["1/2", "1/3", "1/6"],
//!  "rvs": {"X1": {"codomain": ["0", "1"], "map": [0, 1, 0]}},
//!  "kernels": {"M1": {"source": ["s1", "s2", "s3"], "target": ["a", "b"],
//!                     "rows": [["1/2", "1/2"], ["1", "0"], ["0", "1"]]}}}
//! ```
//!
//! Rationals are `"p/q"` or `"n"` strings. Weight sums and row sums are
//! validated when a document is turned into a value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_prob::{FiniteProbSpace, RandomVariable, ValueMap};
use crate::kernel::{KernelTriple, MarkovKernel};
use crate::rational::Rational;

/// A labelled map into a finite codomain: used for random variables (domain
/// = states) and for value maps such as `f` in `X4 = f ∘ X3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDocument {
    pub codomain: Vec<String>,
    pub map: Vec<usize>,
}

impl MapDocument {
    pub fn to_value_map(&self) -> Result<ValueMap> {
        ValueMap::new(self.codomain.clone(), self.map.clone())
    }

    pub fn from_value_map(f: &ValueMap) -> Self {
        MapDocument {
            codomain: f.codomain().to_vec(),
            map: f.map().to_vec(),
        }
    }

    pub fn from_rv(x: &RandomVariable) -> Self {
        MapDocument {
            codomain: x.codomain().to_vec(),
            map: x.assignment().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

impl KernelDocument {
    pub fn to_kernel(&self) -> Result<MarkovKernel> {
        MarkovKernel::new(self.source.clone(), self.target.clone(), self.rows.clone())
    }

    pub fn from_kernel(m: &MarkovKernel) -> Self {
        KernelDocument {
            source: m.source().to_vec(),
            target: m.target().to_vec(),
            rows: m.rows().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub states: Vec<String>,
    pub weights: Vec<Rational>,
    #[serde(default)]
    pub rvs: BTreeMap<String, MapDocument>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kernels: BTreeMap<String, KernelDocument>,
}

impl SpaceDocument {
    pub fn from_space(space: &FiniteProbSpace, rvs: &[&RandomVariable]) -> Self {
        SpaceDocument {
            states: space.states().to_vec(),
            weights: space.weights().to_vec(),
            rvs: rvs
                .iter()
                .map(|x| (x.name().to_string(), MapDocument::from_rv(x)))
                .collect(),
            kernels: BTreeMap::new(),
        }
    }

    pub fn from_triple(triple: &KernelTriple) -> Self {
        let mut doc = Self::from_space(&triple.space, &[]);
        for (name, m) in [("M1", &triple.m1), ("M2", &triple.m2), ("M3", &triple.m3)] {
            doc.kernels.insert(name.into(), KernelDocument::from_kernel(m));
        }
        doc
    }

    pub fn space(&self) -> Result<FiniteProbSpace> {
        FiniteProbSpace::new(self.states.clone(), self.weights.clone())
    }

    pub fn rv(&self, name: &str) -> Result<RandomVariable> {
        let doc = self
            .rvs
            .get(name)
            .ok_or_else(|| Error::Parse(format!("rvs: missing random variable {name:?}")))?;
        if doc.map.len() != self.states.len() {
            return Err(Error::DimensionMismatch {
                what: format!("rvs.{name}.map"),
                expected: self.states.len(),
                found: doc.map.len(),
            });
        }
        RandomVariable::new(name, doc.codomain.clone(), doc.map.clone())
    }

    pub fn kernel(&self, name: &str) -> Result<Option<MarkovKernel>> {
        self.kernels.get(name).map(KernelDocument::to_kernel).transpose()
    }

    /// The kernels `M1, M2, M3` if all three are present, otherwise the Dirac
    /// kernels of `X1, X2, X3`.
    pub fn kernel_triple(&self) -> Result<KernelTriple> {
        let space = self.space()?;
        match (self.kernel("M1")?, self.kernel("M2")?, self.kernel("M3")?) {
            (Some(m1), Some(m2), Some(m3)) => KernelTriple::new(space, m1, m2, m3),
            (None, None, None) => {
                KernelTriple::dirac(&space, &self.rv("X1")?, &self.rv("X2")?, &self.rv("X3")?)
            }
            _ => Err(Error::Parse(
                "kernels: expected all of M1, M2, M3 or none".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"states": ["s1","s2","s3"], "weights": ["1/2","1/3","1/6"],
        "rvs": {"X1": {"codomain": ["0","1"], "map": [0,1,0]}}}"#;

    #[test]
    fn loads_documented_format() {
        let doc: SpaceDocument = serde_json::from_str(DOC).unwrap();
        let sp = doc.space().unwrap();
        assert_eq!(sp.len(), 3);
        let x = doc.rv("X1").unwrap();
        assert_eq!(x.assignment(), &[0, 1, 0]);
        assert!(doc.rv("X2").is_err());
    }

    #[test]
    fn weight_sum_validated_on_load() {
        let bad = DOC.replace("1/6", "1/7");
        let doc: SpaceDocument = serde_json::from_str(&bad).unwrap();
        assert!(matches!(doc.space(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn row_sum_validated_on_load() {
        let k: KernelDocument = serde_json::from_str(
            r#"{"source": ["a"], "target": ["x","y"], "rows": [["1/2","1/3"]]}"#,
        )
        .unwrap();
        assert!(k.to_kernel().is_err());
    }

    #[test]
    fn partial_kernel_set_is_rejected() {
        let mut doc: SpaceDocument = serde_json::from_str(DOC).unwrap();
        doc.kernels.insert(
            "M1".into(),
            KernelDocument {
                source: doc.states.clone(),
                target: vec!["*".into()],
                rows: vec![vec![Rational::one()]; 3],
            },
        );
        assert!(doc.kernel_triple().is_err());
    }

    #[test]
    fn document_round_trip() {
        let doc: SpaceDocument = serde_json::from_str(DOC).unwrap();
        let sp = doc.space().unwrap();
        let x = doc.rv("X1").unwrap();
        let again = SpaceDocument::from_space(&sp, &[&x]);
        assert_eq!(again, doc);
        let text = serde_json::to_string(&again).unwrap();
        assert_eq!(serde_json::from_str::<SpaceDocument>(&text).unwrap(), doc);
    }
}
