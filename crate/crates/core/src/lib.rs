//! Worm calculus for the polymodal provability logic GLP.
//!
//! * [`ordinal`]: Cantor-normal-form notations below ε₀.
//! * [`worm`]: worms, their order values and the orders `<_γ`.
//! * [`formula`]: GLP formulas, demotion/promotion, Q-formulas.
//! * [`rc`]: derivability oracle for strictly positive sequents.
//! * [`reduction`]: bounded verification of reduction-property statements.

pub mod formula;
pub mod ordinal;
pub mod rc;
pub mod reduction;
mod syntax;
pub mod worm;

pub use formula::{GLPFormula, Renaming, SPFormula};
pub use ordinal::Ordinal;
pub use rc::{prove, prove_equiv, ProverConfig, Sequent};
pub use syntax::SyntaxError;
pub use worm::{compare_worms, Worm, WormOrder};
