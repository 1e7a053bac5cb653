//! SPARQL 1.1 query generation.
//!
//! [`query`] defines the abstract query shape, [`render`] serializes it,
//! [`gen`] turns single OLAP operations into queries over a QB4OLAP graph,
//! [`compile`] chains a whole typed plan into an ordered list of queries
//! over named intermediate datasets, and [`result`] decodes the final
//! observation graph back into a cuboid.

pub mod compile;
pub mod gen;
pub mod query;
pub mod render;
pub mod result;

pub use compile::{compile_plan, CompiledPlan, CompiledStep};
pub use gen::{
    gen_dice_query, gen_rollup_query, gen_slice_query, mint_observation_iri, proc_condition,
    LevelVar, MeasureVar,
};
pub use query::{
    AbstractQuery, FilterExpr, FilterOperand, ObservationBind, PatTerm, QueryType, SelectItem,
    TriplePattern, VarGen,
};
pub use render::render;
pub use result::results_to_cuboid;
