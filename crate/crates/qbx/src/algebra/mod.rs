//! The textual algebra over cubes: script parsing, typechecking against
//! a cube schema, and the rewrites that reduce every program to roll-up,
//! dice, measure-slice and project operations.

pub mod ast;
pub mod parse;
pub mod typecheck;

pub use ast::{render_program, AlgebraProgram, CondExpr, OpCall, Pos, Statement, SubjectPath};
pub use parse::{parse_condition, parse_program};
pub use typecheck::{
    resolve_program, rewrite_drilldown, rewrite_slice_dim, typecheck, typecheck_with_sources,
    PlanOp, PlanStep, TypedPlan,
};
