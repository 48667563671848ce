//! QUBO encodings of permutations and permutation constraints.
//!
//! A permutation of `{1, …, n}` is written as `n` binary numbers and forced
//! to be a permutation by requiring that a compare-exchange network sorts
//! them onto the constant identity. Every gate is a quadratic penalty with
//! auxiliary variables, so the whole instance stays quadratic with
//! `O(log n)` interactions per variable. A one-hot baseline, brute-force
//! verification, an annealer and solver export formats are included.
//!
//! ```
//! use permqubo::encodings::EncodingSpec;
//! use permqubo::verify::{uniformity_check, VerifyOptions};
//!
//! let inst = EncodingSpec::perm(3).with("derangement".parse().unwrap()).build().unwrap();
//! let report = uniformity_check(&inst, &VerifyOptions::default()).unwrap();
//! assert_eq!(report.solutions.len(), 2);
//! assert!(report.uniform);
//! ```

pub mod circuit;
mod dense;
pub mod encodings;
pub mod error;
pub mod format;
pub mod gadgets;
pub mod gates;
pub mod networks;
pub mod oracle;
pub mod pbf;
pub mod perm;
pub mod quadratize;
pub mod solve;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
