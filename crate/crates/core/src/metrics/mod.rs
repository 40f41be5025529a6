//! Graph comparison: isomorphism-based equivalence and triple-overlap scores.

pub mod equiv;
pub mod smatch;
pub mod triples;

pub use equiv::{find_isomorphism, strong_equivalent, weak_equivalent, Isomorphism};
pub use smatch::{smatch, smatch_triples, smatch_with, SmatchConfig, SmatchScore};
pub use triples::{to_triples, Mode, Triple, TripleSet, TripleVar, VarKind};
