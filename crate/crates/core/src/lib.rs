//! Certificates for balanced digit sets: `S(D, n)`, the vectors over `D`
//! using every digit equally often, either contains a `k`-term arithmetic
//! progression in `Z_m^n` for some `n`, or never does.

pub mod bounds;
pub mod constraints;
pub mod error;
pub mod feasex;
pub mod matrix;
pub mod oracle;
pub mod rat;
pub mod reduce;
pub mod search;
mod simplex;
pub mod zmod;

pub use constraints::{build_system, ConstraintSystem, PairScheme};
pub use error::{Error, Result};
pub use feasex::{check_admissible, check_admissible_with, decide_cone, CheckOptions, Certificate, Method, Verdict};
pub use matrix::RatMatrix;
pub use rat::Rat;
pub use reduce::{reduce, InitialMatrix, Outcome, ReductionTrace};
pub use zmod::{DigitSet, Modulus, Progression, ProgressionRule};
