//! Multidimensional cubes over RDF.
//!
//! This crate models OLAP cubes the classical way — dimension schemas with
//! level hierarchies, cube schemas with measures and aggregate functions,
//! cuboids as partial functions from coordinates to measure tuples — and
//! connects that model to the semantic-web stack:
//!
//! * [`model`] — the data model, validation, and a naive in-memory
//!   evaluator that serves as ground truth for everything else;
//! * [`algebra`] — a small textual algebra (`ROLLUP`, `DRILLDOWN`, `SLICE`,
//!   `DICE`) with a typechecker that rewrites programs into an executable
//!   normal form;
//! * [`rdf`] — just enough RDF: a term model and a Turtle subset
//!   reader/writer with deterministic output;
//! * [`qb4olap`] — mapping cubes to and from RDF graphs in the QB4OLAP
//!   vocabulary;
//! * [`sparql`] — compiling algebra plans into SPARQL 1.1 `CONSTRUCT`
//!   queries over such graphs, and decoding result graphs back to cuboids;
//! * [`endpoint`] — a minimal SPARQL protocol client (query + graph store)
//!   used to run plans against an endpoint.
//!
//! The `qbx` binary wraps all of it into a command-line tool.

pub mod algebra;
pub mod endpoint;
pub mod error;
pub mod model;
pub mod qb4olap;
pub mod rdf;
pub mod sparql;

pub use error::{Error, Result};
