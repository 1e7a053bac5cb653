//! The QB and QB4OLAP vocabularies, plus the companion namespaces the
//! generated graphs use.

/// The RDF Data Cube vocabulary.
pub const QB: &str = "http://purl.org/linked-data/cube#";

/// The QB4OLAP extension vocabulary.
pub const QB4O: &str = "http://purl.org/qb4olap/cubes#";

pub const SDMX_DIMENSION: &str = "http://purl.org/linked-data/sdmx/2009/dimension#";
pub const SDMX_MEASURE: &str = "http://purl.org/linked-data/sdmx/2009/measure#";
pub const SKOS: &str = "http://www.w3.org/2004/02/skos/core#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn qb(local: &str) -> String {
    format!("{QB}{local}")
}

pub fn qb4o(local: &str) -> String {
    format!("{QB4O}{local}")
}

pub fn skos(local: &str) -> String {
    format!("{SKOS}{local}")
}

pub fn rdfs(local: &str) -> String {
    format!("{RDFS}{local}")
}
