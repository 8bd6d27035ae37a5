//! Structural causal models over finite ranges and sixteen definitions of
//! actual causation: the twelve sufficiency-based definitions `Def1`–`Def12`,
//! the original, updated and modified Halpern–Pearl definitions, and the
//! strong variant with condition AC2(c).
//!
//! Models are written in a small line-oriented language (see [`dsl`]),
//! evaluated by [`scm`], and queried through [`causation`] and
//! [`sufficiency`]. [`verify`] checks the known relationships between the
//! definitions by brute force over families of small models; [`corpus`]
//! holds the classic examples with their expected verdicts.

pub mod causation;
pub mod corpus;
pub mod dsl;
pub mod scm;
pub mod sufficiency;
pub mod verify;

pub use scm::{CausalFormula, CausalModel, Context, Expr, Intervention, ModelError, PartialSetting, Range, Value, VarId, VarKind, Variable, World};
pub use causation::{Analyzer, DefinitionId, Effect, Evidence, Necessity, Verdict};
pub use sufficiency::{NetworkWitness, SufficiencyKind};
