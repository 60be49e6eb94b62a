//! Agnostic learning of binary decision rules when the utility function is
//! unknown and can only be probed through k-comparison queries.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithm:
//!
//! - [`instance`]: finite-support problem instances, gap vectors, hypothesis
//!   classes and population utility / excess-risk evaluation.
//! - [`oracle`]: the k-comparison oracle with optional label noise, reduced
//!   coefficient form of queries and the canonical query enumerator.
//! - [`comptron`]: Comptron and Rob-Comptron gap elicitation.
//! - [`learner`]: ERM, plug-in learning, bound audits and a Monte Carlo
//!   Rademacher estimate.
//! - [`adversary`]: hard instance constructions and the indistinguishability
//!   checker.
//! - [`robust`]: the consistent-gap polytope and the minimax robust policy,
//!   solved by a double-oracle loop over exact linear programs.
//!
//! All quantities that enter a decision are exact rationals ([`Rational`]).

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod comptron;
pub mod error;
pub mod game;
pub mod instance;
pub mod learner;
pub mod num;
pub mod oracle;
pub mod rate;
pub mod robust;
pub mod simplex;

pub use error::{Error, Result};
pub use num::Rational;
