//! Mapping cube models to and from RDF graphs in the QB4OLAP vocabulary.
//!
//! [`model_to_graph`] writes a model out as a graph; [`graph_to_model`]
//! reads cubes back from one, whether it came from this crate or from a
//! foreign QB4OLAP publisher. [`Qb4olapCatalog`] answers structural
//! questions about a graph directly, without loading it into a model —
//! that is what query generation works against.

pub mod catalog;
pub mod emit;
pub mod iris;
pub mod read;
#[cfg(test)]
pub(crate) mod testdata;
pub(crate) mod values;
pub mod vocab;

pub use catalog::Qb4olapCatalog;
pub use emit::model_to_graph;
pub use iris::{decode_name, encode_name, local_name, namespace_of, IriPlan, DEFAULT_BASE};
pub use read::graph_to_model;
