//! Exact checks of conditional independence for random variables and Markov
//! kernels on finite probability spaces.
//!
//! All probabilities are exact [`Rational`]s. The three propositions
//!
//! * (i) `X1 ⊥ X2 | X3`
//! * (ii) `X1 ⊥ X2`
//! * (iii) `P^{X1|X3}` and `P^{X2|X3}` are independent under `P^{X3}`
//!
//! satisfy: whenever (i) holds, (ii) and (iii) are equivalent. The
//! [`theorems`] module evaluates the triple for random variables and for
//! kernels, [`contingency`] does the same for 2×2×2 count tables, and
//! [`fuzz`] checks the invariants over seeded random instances.

pub mod contingency;
pub mod error;
pub mod finite_prob;
pub mod fuzz;
pub mod gaussian;
pub mod io;
pub mod kernel;
pub mod rational;
pub mod theorems;

pub use error::{Error, Result};
pub use finite_prob::{FiniteProbSpace, ProbVector, RandomVariable, ValueMap};
pub use kernel::{KernelTriple, MarkovKernel};
pub use rational::Rational;
pub use theorems::{PropositionTriple, VerificationReport, Witness};
