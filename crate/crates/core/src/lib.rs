//! Multi-criteria comparison of classifiers by generalized stochastic
//! dominance.
//!
//! Quality values of several classifiers on several data sets are turned
//! into a preference system. Dominance between two classifiers holds when
//! every normalized utility compatible with that system gives the first at
//! least the expected utility of the second; each check is one linear
//! program.

pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod dominance;
pub mod poset;
pub mod stat_test;
pub mod baselines;
pub mod simulation;

pub use error::{Error, Result};
