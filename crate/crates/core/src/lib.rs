//! Densely valued lattice-ordered groups, computationally.
//!
//! * [`algebra`]: the finite standard structures over `Q`.
//! * [`periodic`]: the model of `2^k`-periodic rational sequences.
//! * [`syntax`]: the two-sorted language, its parser and normal forms.
//! * [`oracle`]: brute-force truth in a finite standard structure.
//! * [`ba`]: quantifier elimination for atomless Boolean algebras.
//! * [`sw`]: elimination of group quantifiers and the sentence decider.
//! * [`selfcheck`]: the randomized acceptance suite, shared with the CLI.

pub mod algebra;
pub mod ba;
pub mod corpus;
pub mod generate;
pub mod oracle;
pub mod periodic;
pub mod rational;
pub mod seed;
pub mod selfcheck;
pub mod sw;
pub mod syntax;
pub mod witness;

pub use rational::Rational;
