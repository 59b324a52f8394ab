//! Suppression-based k-anonymization under diversity and fairness
//! constraints.
//!
//! The crate is organised bottom-up:
//!
//! - [`relation`]: relations with suppressed cells (`★`), counting, the
//!   refinement order and the k-anonymity predicate, CSV I/O;
//! - [`constraint`]: the constraint AST, bound expressions with
//!   multiple-of-k rounding, and the line-oriented constraint DSL;
//! - [`semantics`]: satisfaction checks with per-constraint reports;
//! - [`inference`]: implication, satisfiability and minimal cover of
//!   fixed-bound constraints;
//! - [`anonymizer`]: exhaustive, branch-and-bound and greedy solvers for the
//!   minimum-loss (k, Σ)-anonymization;
//! - [`cli`]: the `anon` command-line front end.
//!
//! ```
//! use divanon::constraint::parse_constraint;
//! use divanon::fixtures;
//! use divanon::semantics::check_diversity;
//!
//! let sigma = parse_constraint(r#"div: 3 <= count(ETH="Asian") <= 6"#).unwrap();
//! assert!(!check_diversity(&fixtures::r1(), &sigma, 3).unwrap().satisfied);
//! assert!(check_diversity(&fixtures::r2(), &sigma, 3).unwrap().satisfied);
//! ```

pub mod anonymizer;
pub mod cli;
pub mod constraint;
pub mod error;
pub mod fixtures;
pub mod inference;
pub mod relation;
pub mod semantics;

pub use error::{Error, Result};
