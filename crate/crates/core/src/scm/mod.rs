//! Finite structural causal models: signatures, equations, solutions,
//! interventions and causal formulas.

mod expr;
mod formula;
mod graph;
mod model;
mod normalize;
mod setting;

pub use expr::Expr;
pub use formula::{holds, CausalFormula};
pub use graph::{ancestors, check_recursive, descendants, parents};
pub use model::{CausalModel, Equation, ModelBuilder, ModelError, Range, Value, VarId, VarKind, Variable};
pub use normalize::{is_normalized, normalize_exogenous, root_variables};
pub use setting::{Context, Intervention, PartialSetting, World};
