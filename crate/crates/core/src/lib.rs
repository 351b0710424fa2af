//! Resolution engine for definite logic programs: list-mode SLD and reduced
//! SLD with selection rules, priority-mode derivations with scheduling
//! rules, goal reduction, equality-variant loop checks and a property lab.

pub mod cli;
pub mod engine;
pub mod lab;
pub mod loopcheck;
pub mod priority;
pub mod reduction;
pub mod scheduling;
pub mod syntax;
pub mod term;

pub use engine::{derive, DerivationRecord, DeriveOptions, LineageTag, LoopCheck, Mode, Status};
pub use priority::{Priority, PriorityAtom, PriorityGoal, Shifting};
pub use reduction::{ReductionCertificate, ReductionMode};
pub use scheduling::Rule;
pub use syntax::{parse_clause, parse_goal, parse_priority_goal, parse_program, Program};
pub use term::{Atom, Clause, Renaming, Substitution, Term, Var};
