//! Minimal RDF support: terms, graphs, and a Turtle subset.

pub mod term;
pub mod turtle;

pub use term::{Literal, RdfGraph, Term, Triple, RDF_TYPE};
pub use turtle::{parse_turtle, serialize_turtle};
