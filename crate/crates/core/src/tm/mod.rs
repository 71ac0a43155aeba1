//! Propositional weighted Tsetlin Machine.

mod clause;
mod describe;
mod machine;
mod params;
pub mod persist;

pub use clause::{Clause, EvalMode, Literals, Polarity};
pub use describe::{ClauseRecord, GlobalDescription};
pub use machine::{clip_sum, train_model, ClassTrace, DecisionTrace, TsetlinMachine};
pub use params::HyperParams;
