//! A read-only view over a QB4OLAP graph answering the structural questions
//! query generation asks: which levels a cuboid fixes, which rollup property
//! connects two levels, how to climb from one level to another.
//!
//! Everything here works on IRIs, not model names — the catalog exists so
//! queries can be generated against a graph that was never loaded into a
//! [`LoadedModel`](crate::model::LoadedModel).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::rdf::term::{RdfGraph, Term};

use super::read::{component_order, name_of};
use super::vocab::{qb, qb4o};

/// Structural lookups over a QB4OLAP graph.
#[derive(Debug, Clone)]
pub struct Qb4olapCatalog {
    graph: RdfGraph,
}

impl Qb4olapCatalog {
    pub fn new(graph: RdfGraph) -> Qb4olapCatalog {
        Qb4olapCatalog { graph }
    }

    pub fn graph(&self) -> &RdfGraph {
        &self.graph
    }

    /// Mutable access, for callers that extend the graph with derived
    /// structures (the plan compiler registers one per intermediate result).
    pub fn graph_mut(&mut self) -> &mut RdfGraph {
        &mut self.graph
    }

    pub fn into_graph(self) -> RdfGraph {
        self.graph
    }

    /// The components of a structure definition, `qb:order` first and
    /// appearance order for the rest.
    fn components(&self, dsd: &str) -> Vec<Term> {
        let dsd = Term::iri(dsd);
        let mut comps: Vec<(i64, usize, Term)> = self
            .graph
            .objects(&dsd, &qb("component"))
            .into_iter()
            .enumerate()
            .map(|(at, c)| (component_order(&self.graph, c), at, c.clone()))
            .collect();
        comps.sort();
        comps.into_iter().map(|(_, _, c)| c).collect()
    }

    /// The level IRIs a cuboid structure fixes, in component order.
    pub fn levels(&self, dsd: &str) -> Vec<String> {
        self.components(dsd)
            .iter()
            .filter_map(|c| self.graph.object(c, &qb4o("level")))
            .filter_map(Term::as_iri)
            .map(str::to_string)
            .collect()
    }

    /// The dimension property IRIs of a cube structure, in component order.
    pub fn dimensions(&self, dsd: &str) -> Vec<String> {
        self.components(dsd)
            .iter()
            .filter_map(|c| self.graph.object(c, &qb("dimension")))
            .filter_map(Term::as_iri)
            .map(str::to_string)
            .collect()
    }

    /// The measure property IRIs of a structure, in component order.
    pub fn measures(&self, dsd: &str) -> Vec<String> {
        self.components(dsd)
            .iter()
            .filter_map(|c| self.graph.object(c, &qb("measure")))
            .filter_map(Term::as_iri)
            .map(str::to_string)
            .collect()
    }

    /// The level of `dimension` that the cuboid structure `dsd` fixes.
    pub fn get_level(&self, dsd: &str, dimension: &str) -> Result<String> {
        for level in self.levels(dsd) {
            if self.dimension_of_level(&level).as_deref() == Some(dimension) {
                return Ok(level);
            }
        }
        Err(Error::NotFound {
            detail: format!("no level of <{dimension}> in <{dsd}>"),
        })
    }

    /// The aggregate function IRI a structure assigns to a measure.
    pub fn agg_function(&self, measure: &str, dsd: &str) -> Result<String> {
        let measure = Term::iri(measure);
        for comp in self.components(dsd) {
            if self.graph.object(&comp, &qb("measure")) == Some(&measure) {
                if let Some(f) = self
                    .graph
                    .object(&comp, &qb4o("aggregateFunction"))
                    .and_then(Term::as_iri)
                {
                    return Ok(f.to_string());
                }
            }
        }
        Err(Error::NotFound {
            detail: format!("no aggregate function for {measure} in <{dsd}>"),
        })
    }

    /// The rollup property linking two adjacent levels, per the hierarchy
    /// steps. When several steps share the pair, the least IRI wins so the
    /// answer is deterministic.
    pub fn get_rollup(&self, child: &str, parent: &str) -> Result<String> {
        let child = Term::iri(child);
        let parent = Term::iri(parent);
        let mut found: BTreeSet<String> = BTreeSet::new();
        for step in self.steps() {
            if self.graph.object(&step, &qb4o("childLevel")) == Some(&child)
                && self.graph.object(&step, &qb4o("parentLevel")) == Some(&parent)
            {
                if let Some(r) = self
                    .graph
                    .object(&step, &qb4o("rollup"))
                    .and_then(Term::as_iri)
                {
                    found.insert(r.to_string());
                }
            }
        }
        found.into_iter().next().ok_or_else(|| Error::NotFound {
            detail: format!("no rollup property from {child} to {parent}"),
        })
    }

    /// The unique chain of `(child, parent)` level IRI pairs climbing from
    /// `from` to `to` along hierarchy steps. Zero paths and two or more
    /// paths are both errors; `from == to` is the empty chain.
    pub fn levels_path_g(&self, from: &str, to: &str) -> Result<Vec<(String, String)>> {
        if from == to {
            return Ok(Vec::new());
        }
        let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let pairs = self.step_pairs();
        for (child, parent) in &pairs {
            edges.entry(child).or_default().insert(parent);
        }
        let mut found: Vec<Vec<(String, String)>> = Vec::new();
        let mut trail: Vec<(String, String)> = Vec::new();
        collect_paths(&edges, from, to, &mut trail, &mut found);
        match found.len() {
            0 => Err(self.path_error(from, to, false)),
            1 => Ok(found.pop().unwrap_or_default()),
            _ => Err(self.path_error(from, to, true)),
        }
    }

    /// One chain of `(child, parent)` pairs from `from` up to a level with
    /// no parents. Where several hierarchies branch off, the walk takes the
    /// lexicographically least parent, so the route is deterministic even
    /// when [`levels_path_g`](Self::levels_path_g) would call it ambiguous —
    /// dropping a dimension entirely does not care which route it climbs.
    pub fn path_to_top(&self, from: &str) -> Result<Vec<(String, String)>> {
        let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let pairs = self.step_pairs();
        for (child, parent) in &pairs {
            edges.entry(child).or_default().insert(parent);
        }
        let mut chain = Vec::new();
        let mut at = from.to_string();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        while let Some(parents) = edges.get(at.as_str()) {
            if !seen.insert(at.clone()) {
                return Err(Error::Profile {
                    subject: from.to_string(),
                    detail: "hierarchy steps form a cycle".to_string(),
                });
            }
            let parent = parents.iter().next().expect("non-empty parent set");
            chain.push((at.clone(), parent.to_string()));
            at = parent.to_string();
        }
        Ok(chain)
    }

    /// The name an element carries, via `skos:notation` or its IRI.
    pub fn name_of(&self, iri: &str) -> String {
        name_of(&self.graph, &Term::iri(iri))
    }

    /// The dimension property a level belongs to, through its hierarchies.
    pub fn dimension_of_level(&self, level: &str) -> Option<String> {
        let level = Term::iri(level);
        let mut dims: BTreeSet<String> = BTreeSet::new();
        for h in self.graph.subjects_with(&qb4o("hasLevel"), &level) {
            if let Some(d) = self
                .graph
                .object(h, &qb4o("inDimension"))
                .and_then(Term::as_iri)
            {
                dims.insert(d.to_string());
            }
        }
        dims.into_iter().next()
    }

    /// The attribute IRIs declared on a level.
    pub fn attributes(&self, level: &str) -> Vec<String> {
        self.graph
            .objects(&Term::iri(level), &qb4o("hasAttribute"))
            .into_iter()
            .filter_map(Term::as_iri)
            .map(str::to_string)
            .collect()
    }

    /// The structure definition a dataset points at.
    pub fn structure_of(&self, dataset: &str) -> Option<String> {
        self.graph
            .object(&Term::iri(dataset), &qb("structure"))
            .and_then(Term::as_iri)
            .map(str::to_string)
    }

    /// The cube a cuboid structure belongs to, when it declares one.
    pub fn cube_of(&self, dsd: &str) -> Option<String> {
        self.graph
            .object(&Term::iri(dsd), &qb4o("isCuboidOf"))
            .and_then(Term::as_iri)
            .map(str::to_string)
    }

    /// Every hierarchy step in the graph (anything with a child level).
    fn steps(&self) -> Vec<Term> {
        let mut steps: Vec<Term> = self
            .graph
            .iter()
            .filter(|t| t.predicate == qb4o("childLevel"))
            .map(|t| t.subject.clone())
            .collect();
        steps.sort();
        steps.dedup();
        steps
    }

    /// The deduplicated `(child, parent)` level IRI pairs across all steps.
    fn step_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
        for step in self.steps() {
            let child = self
                .graph
                .object(&step, &qb4o("childLevel"))
                .and_then(Term::as_iri);
            let parent = self
                .graph
                .object(&step, &qb4o("parentLevel"))
                .and_then(Term::as_iri);
            if let (Some(c), Some(p)) = (child, parent) {
                pairs.insert((c.to_string(), p.to_string()));
            }
        }
        pairs.into_iter().collect()
    }

    fn path_error(&self, from: &str, to: &str, ambiguous: bool) -> Error {
        let dim = self
            .dimension_of_level(from)
            .map(|d| self.name_of(&d))
            .unwrap_or_else(|| "?".to_string());
        let from = self.name_of(from);
        let to = self.name_of(to);
        if ambiguous {
            Error::AmbiguousPath { dim, from, to }
        } else {
            Error::NoPath { dim, from, to }
        }
    }
}

fn collect_paths(
    edges: &BTreeMap<&str, BTreeSet<&str>>,
    at: &str,
    to: &str,
    trail: &mut Vec<(String, String)>,
    found: &mut Vec<Vec<(String, String)>>,
) {
    if found.len() >= 2 {
        return; // two paths already prove ambiguity
    }
    let Some(parents) = edges.get(at) else { return };
    for parent in parents {
        trail.push((at.to_string(), parent.to_string()));
        if *parent == to {
            found.push(trail.clone());
        } else {
            collect_paths(edges, parent, to, trail, found);
        }
        trail.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qb4olap::emit::model_to_graph;
    use crate::qb4olap::iris::IriPlan;
    use crate::qb4olap::testdata::{citizenship_model, CITIZENSHIP_TTL};
    use crate::rdf::turtle::parse_turtle;

    const SCHEMA: &str = "http://www.fing.edu.uy/inco/cubes/schemas/migr_asyapp#";
    const CITIZEN: &str = "http://eurostat.linked-statistics.org/property#citizen";
    const OBS_VALUE: &str = "http://purl.org/linked-data/sdmx/2009/measure#obsValue";

    fn published() -> Qb4olapCatalog {
        Qb4olapCatalog::new(parse_turtle(CITIZENSHIP_TTL).unwrap())
    }

    #[test]
    fn structures_list_their_parts_in_order() {
        let c = published();
        let cube = format!("{SCHEMA}migrCUBE");
        let bottom = format!("{SCHEMA}migrBOTTOM");
        assert_eq!(c.levels(&bottom), [CITIZEN.to_string()]);
        assert_eq!(c.measures(&cube), [OBS_VALUE.to_string()]);
        assert_eq!(c.dimensions(&cube), [format!("{SCHEMA}citizenshipDim")]);
        assert_eq!(
            c.get_level(&bottom, &format!("{SCHEMA}citizenshipDim"))
                .unwrap(),
            CITIZEN
        );
        assert_eq!(c.agg_function(OBS_VALUE, &cube).unwrap(), qb4o("sum"));
        assert_eq!(
            c.structure_of("http://eurostat.linked-statistics.org/data/migr")
                .as_deref(),
            Some(bottom.as_str())
        );
        assert_eq!(c.cube_of(&bottom).as_deref(), Some(cube.as_str()));
        assert_eq!(c.name_of(&cube), "migrCUBE");
        assert_eq!(c.name_of(CITIZEN), "citizen");
        assert_eq!(
            c.dimension_of_level(CITIZEN).as_deref(),
            Some(format!("{SCHEMA}citizenshipDim").as_str())
        );
        assert_eq!(c.attributes(CITIZEN), [format!("{SCHEMA}countryName")]);
    }

    #[test]
    fn rollup_properties_come_from_the_steps() {
        let c = published();
        assert_eq!(
            c.get_rollup(CITIZEN, &format!("{SCHEMA}continent")).unwrap(),
            format!("{SCHEMA}inContinent")
        );
        assert_eq!(
            c.get_rollup(CITIZEN, &format!("{SCHEMA}governmentType"))
                .unwrap(),
            format!("{SCHEMA}hasGovType")
        );
        let err = c
            .get_rollup(&format!("{SCHEMA}continent"), &format!("{SCHEMA}governmentType"))
            .unwrap_err();
        assert_eq!(err.code(), "E_NOT_FOUND");
    }

    #[test]
    fn paths_climb_the_steps() {
        let c = published();
        let continent = format!("{SCHEMA}continent");
        assert_eq!(
            c.levels_path_g(CITIZEN, &continent).unwrap(),
            [(CITIZEN.to_string(), continent.clone())]
        );
        assert!(c.levels_path_g(CITIZEN, CITIZEN).unwrap().is_empty());
        let err = c.levels_path_g(&continent, CITIZEN).unwrap_err();
        assert_eq!(err.code(), "E_NO_PATH");
    }

    #[test]
    fn path_to_top_picks_one_deterministic_route() {
        // citizen has two parents; the walk takes the lexicographically
        // least one and keeps climbing until nothing is above.
        let model = citizenship_model();
        let base = model.base_iri.clone().unwrap();
        let c = Qb4olapCatalog::new(model_to_graph(&model, &base).unwrap());
        let plan = IriPlan::new(&model, &base);
        let role = &model.cube.dimensions[0].role;
        let chain = c.path_to_top(plan.level(role, "citizen")).unwrap();
        assert_eq!(
            chain,
            [
                (
                    plan.level(role, "citizen").to_string(),
                    plan.level(role, "continent").to_string()
                ),
                (
                    plan.level(role, "continent").to_string(),
                    plan.level(role, "All").to_string()
                ),
            ]
        );
        assert!(c.path_to_top(plan.level(role, "All")).unwrap().is_empty());
    }

    #[test]
    fn graph_and_schema_path_resolution_agree() {
        // citizen climbs to the top through two hierarchies, so the routes
        // must come out ambiguous on both sides — and unique routes must
        // match edge for edge.
        let model = citizenship_model();
        let base = model.base_iri.clone().unwrap();
        let c = Qb4olapCatalog::new(model_to_graph(&model, &base).unwrap());
        let plan = IriPlan::new(&model, &base);
        let binding = &model.cube.dimensions[0];
        let schema = &binding.dimension;
        for from in &schema.levels {
            for to in &schema.levels {
                let by_name = schema.levels_path(&from.name, &to.name, None);
                let by_iri = c.levels_path_g(
                    plan.level(&binding.role, &from.name),
                    plan.level(&binding.role, &to.name),
                );
                match (by_name, by_iri) {
                    (Ok(n), Ok(i)) => {
                        let mapped: Vec<(String, String)> = n
                            .iter()
                            .map(|p| {
                                (
                                    plan.level(&binding.role, &p.child).to_string(),
                                    plan.level(&binding.role, &p.parent).to_string(),
                                )
                            })
                            .collect();
                        assert_eq!(mapped, i);
                    }
                    (Err(n), Err(i)) => assert_eq!(n.code(), i.code()),
                    (n, i) => panic!(
                        "disagreement for {} → {}: {n:?} vs {i:?}",
                        from.name, to.name
                    ),
                }
            }
        }
    }
}
