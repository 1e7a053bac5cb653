//! Decoding observation graphs back into cuboids.
//!
//! A plan's final `CONSTRUCT` produces a graph of `qb:Observation`s; this
//! module turns such a graph back into a [`Cuboid`] so results can be
//! printed, compared, or fed to the in-memory evaluator. Decoding is driven
//! by the structure definition the compiler registered for the result: its
//! level components say which level each role was left at, and therefore
//! which predicate holds each coordinate.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{CubeSchema, Cuboid, LevelSet, Num};
use crate::qb4olap::values::literal_to_num;
use crate::qb4olap::vocab::qb;
use crate::qb4olap::{decode_name, local_name, Qb4olapCatalog};
use crate::rdf::{RdfGraph, Term};

/// Reads all observations in `g` into a cuboid of `cube`.
///
/// `cuboid_dsd` must describe the observations: its level components are
/// resolved against the catalog to find, per role, the predicate and level
/// name to decode. Coordinates come back as member ids (IRI local names,
/// decoded), measure values as numbers. An observation lacking a coordinate
/// or a measure is an error; two observations at the same coordinates are
/// too. An empty graph yields an empty cuboid.
pub fn results_to_cuboid(
    g: &RdfGraph,
    cuboid_dsd: &str,
    catalog: &Qb4olapCatalog,
    cube: &Arc<CubeSchema>,
) -> Result<Cuboid> {
    // Per role: the level predicate to read and the level's name.
    let mut coord_of: BTreeMap<String, (String, String)> = BTreeMap::new();
    for level in catalog.levels(cuboid_dsd) {
        let Some(dim) = catalog.dimension_of_level(&level) else {
            return Err(Error::Profile {
                subject: level.clone(),
                detail: "level belongs to no hierarchy".into(),
            });
        };
        let name = catalog.name_of(&level);
        coord_of.insert(catalog.name_of(&dim), (level, name));
    }
    let mut levels = LevelSet::new();
    for binding in &cube.dimensions {
        let (_, name) = coord_of.get(&binding.role).ok_or_else(|| Error::MissingComponent {
            subject: cuboid_dsd.to_string(),
            component: binding.role.clone(),
        })?;
        levels.insert(binding.role.clone(), name.clone());
    }
    let mut cuboid = Cuboid::new(Arc::clone(cube), levels)?;

    // Per measure: the property to read. Cuboid structures carry their own
    // measure components; fall back to the cube's if this one has none.
    let mut measure_iris = catalog.measures(cuboid_dsd);
    if measure_iris.is_empty() {
        if let Some(c) = catalog.cube_of(cuboid_dsd) {
            measure_iris = catalog.measures(&c);
        }
    }
    let by_name: BTreeMap<String, String> = measure_iris
        .into_iter()
        .map(|iri| (catalog.name_of(&iri), iri))
        .collect();
    let mut value_of = Vec::with_capacity(cube.measures.len());
    for m in &cube.measures {
        let iri = by_name.get(&m.name).ok_or_else(|| Error::MissingComponent {
            subject: cuboid_dsd.to_string(),
            component: m.name.clone(),
        })?;
        value_of.push(iri.clone());
    }

    let ds_pred = qb("dataSet");
    let observations: std::collections::BTreeSet<&Term> = g
        .iter()
        .filter(|t| t.predicate == ds_pred)
        .map(|t| &t.subject)
        .collect();
    for obs in observations {
        let subject = || match obs {
            Term::Iri(i) => i.clone(),
            other => format!("{other}"),
        };
        let mut key = Vec::with_capacity(cube.dimensions.len());
        for binding in &cube.dimensions {
            let (pred, _) = &coord_of[&binding.role];
            let member = g.object(obs, pred).ok_or_else(|| Error::MissingComponent {
                subject: subject(),
                component: binding.role.clone(),
            })?;
            match member {
                Term::Iri(iri) => key.push(decode_name(local_name(iri))),
                other => {
                    return Err(Error::Profile {
                        subject: subject(),
                        detail: format!("coordinate for `{}` is not an IRI: {other}", binding.role),
                    });
                }
            }
        }
        let mut values = Vec::with_capacity(cube.measures.len());
        for (m, pred) in cube.measures.iter().zip(&value_of) {
            let value = g.object(obs, pred).ok_or_else(|| Error::MissingComponent {
                subject: subject(),
                component: m.name.clone(),
            })?;
            let lit = value.as_literal().ok_or_else(|| Error::Profile {
                subject: subject(),
                detail: format!("value of `{}` is not a literal", m.name),
            })?;
            values.push(literal_to_num(lit)?);
        }
        cuboid.insert_cell(key, values)?;
    }
    Ok(cuboid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qb4olap::testdata::mini_model;
    use crate::qb4olap::{model_to_graph, IriPlan};
    use crate::rdf::Triple;

    const BASE: &str = "http://example.org/mini";

    #[test]
    fn round_trips_emitted_observations() {
        let model = mini_model();
        let graph = model_to_graph(&model, BASE).unwrap();
        let iris = IriPlan::new(&model, BASE);
        let (_, dsd) = iris.dataset("facts");
        let catalog = Qb4olapCatalog::new(graph.clone());

        let decoded = results_to_cuboid(&graph, dsd, &catalog, &model.cube).unwrap();
        let facts = &model.dataset("facts").unwrap().cuboid;
        assert_eq!(decoded.levels, facts.levels);
        assert_eq!(decoded.cells, facts.cells);
    }

    #[test]
    fn empty_graph_is_an_empty_cuboid() {
        let model = mini_model();
        let graph = model_to_graph(&model, BASE).unwrap();
        let iris = IriPlan::new(&model, BASE);
        let (_, dsd) = iris.dataset("facts");
        let catalog = Qb4olapCatalog::new(graph);

        let decoded =
            results_to_cuboid(&RdfGraph::new(), dsd, &catalog, &model.cube).unwrap();
        assert!(decoded.cells.is_empty());
        assert_eq!(decoded.levels, model.dataset("facts").unwrap().cuboid.levels);
    }

    #[test]
    fn missing_measure_is_reported() {
        let model = mini_model();
        let graph = model_to_graph(&model, BASE).unwrap();
        let iris = IriPlan::new(&model, BASE);
        let (_, dsd) = iris.dataset("facts");
        let catalog = Qb4olapCatalog::new(graph.clone());

        let stripped: RdfGraph = RdfGraph {
            triples: graph
                .triples
                .iter()
                .filter(|t| !t.predicate.contains("meas.applications"))
                .cloned()
                .collect::<std::collections::BTreeSet<Triple>>(),
            prefixes: graph.prefixes.clone(),
        };
        let err = results_to_cuboid(&stripped, dsd, &catalog, &model.cube).unwrap_err();
        assert_eq!(err.code(), "E_MISSING_COMPONENT");
        assert!(err.to_string().contains("applications"));
    }
}
