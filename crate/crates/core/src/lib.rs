//! Exact computation of probabilistic degenerate Bernstein polynomials and
//! the surrounding degenerate special numbers, with an identity verifier that
//! certifies polynomial identities by exact evaluation on degree-exceeding
//! grids, and a Monte Carlo layer that checks the probabilistic semantics.

pub mod combinatorics;
pub mod families;
pub mod monte_carlo;
pub mod random_variable;
pub mod rational;
pub mod series;
pub mod verify;

pub use families::{FamilyContext, FamilyError};
pub use random_variable::{Law, LawKind, RandomVariable};
pub use rational::Rational;
pub use series::TruncatedSeries;
