//! Kind inference for datatype declarations.
//!
//! Two inference engines share one unifier over an ordered context:
//!
//! - [`h98`]: the Haskell98 rules — mono kinds, per-group inference,
//!   unconstrained kinds defaulted to `*`.
//! - [`poly`]: the PolyKinds rules — signatures, instantiation, and
//!   generalization of residual variables into `forall` kinds.
//!
//! [`oracle`] is a brute-force declarative checker used as ground truth for
//! soundness, completeness and principality testing, and [`ghc_compat`]
//! runs a data-driven corpus comparing engine behavior against documented
//! GHC outcomes.

pub mod cli;
pub mod deps;
pub mod diag;
pub mod ghc_compat;
pub mod h98;
pub mod kindcore;
pub mod oracle;
pub mod poly;
pub mod surface;
pub mod unify;

#[doc(hidden)]
pub mod testgen;
