//! Reconstructing models from QB4OLAP graphs.
//!
//! The reader is pattern-driven: it walks the structure definitions, their
//! components, the dimension hierarchies and steps, and the observations,
//! and tolerates anything else in the graph. Member triples it does not
//! recognize (labels, external links) are kept as extras so a re-export
//! reproduces them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::bundle::{CellDef, DatasetDef, LoadedModel, ModelBundle};
use crate::model::cube::{CubeSchema, LevelSet, Measure, RoleBinding, RoleIris};
use crate::model::instance::{DimensionInstance, Extra, ExtraValue, Member, RollupRelation};
use crate::model::schema::{Attribute, DimensionSchema, Hierarchy, Level, LevelPair, ALL_LEVEL};
use crate::model::value::{AggFn, Num, ScalarType};
use crate::rdf::term::{RdfGraph, Term, RDF_TYPE};

use super::iris::{decode_name, local_name, namespace_of};
use super::values::{literal_to_attr, literal_to_num};
use super::vocab::{qb, qb4o, rdfs, skos};

/// Read every cube a graph describes, with its dimensions, instances, and
/// datasets. A graph without cube structure definitions yields an empty
/// list — not an error.
pub fn graph_to_model(g: &RdfGraph) -> Result<Vec<LoadedModel>> {
    let mut models = Vec::new();
    for dsd in g.of_type(&qb("DataStructureDefinition")) {
        if g.object(dsd, &qb4o("isCuboidOf")).is_some() {
            continue;
        }
        let Term::Iri(iri) = dsd else { continue };
        models.push(read_cube(g, iri)?);
    }
    Ok(models)
}

/// Split a model graph into its schema half (structure definitions,
/// dimensions, members) and its data half (the observations — every triple
/// whose subject carries a `qb:dataSet` link). Queries over a store keep the
/// two in separate named graphs so a compiled step can scope its `FROM` to
/// the schema plus exactly one generation of observations.
pub fn split_observations(g: &RdfGraph) -> (RdfGraph, RdfGraph) {
    let obs: BTreeSet<&Term> = g
        .iter()
        .filter(|t| t.predicate == qb("dataSet"))
        .map(|t| &t.subject)
        .collect();
    let mut schema = RdfGraph::new();
    let mut data = RdfGraph::new();
    schema.prefixes = g.prefixes.clone();
    data.prefixes = g.prefixes.clone();
    for t in g.iter() {
        if obs.contains(&t.subject) {
            data.insert(t.subject.clone(), t.predicate.clone(), t.object.clone());
        } else {
            schema.insert(t.subject.clone(), t.predicate.clone(), t.object.clone());
        }
    }
    (schema, data)
}

/// The name an element declares via `skos:notation`, falling back to its
/// decoded IRI local name.
pub(crate) fn name_of(g: &RdfGraph, term: &Term) -> String {
    if let Some(Term::Literal(l)) = g.object(term, &skos("notation")) {
        return l.value.clone();
    }
    match term {
        Term::Iri(i) => decode_name(local_name(i)),
        Term::Blank(b) => b.clone(),
        Term::Literal(l) => l.value.clone(),
    }
}

/// A component's `qb:order`, or `i64::MAX` when it has none so ordered
/// components come first and the rest keep their appearance order.
pub(crate) fn component_order(g: &RdfGraph, comp: &Term) -> i64 {
    g.object(comp, &qb("order"))
        .and_then(Term::as_literal)
        .and_then(|l| l.value.parse().ok())
        .unwrap_or(i64::MAX)
}

fn profile(subject: &Term, detail: impl Into<String>) -> Error {
    let subject = match subject {
        Term::Iri(i) => i.clone(),
        other => other.to_string(),
    };
    Error::Profile {
        subject,
        detail: detail.into(),
    }
}

fn read_cube(g: &RdfGraph, dsd_iri: &str) -> Result<LoadedModel> {
    let dsd = Term::iri(dsd_iri);
    let name = name_of(g, &dsd);

    let mut dim_comps: Vec<(i64, usize, String)> = Vec::new();
    let mut meas_comps: Vec<(i64, usize, Term, Term)> = Vec::new();
    for (at, comp) in g.objects(&dsd, &qb("component")).into_iter().enumerate() {
        let order = component_order(g, comp);
        if let Some(d) = g.object(comp, &qb("dimension")) {
            let Term::Iri(d) = d else {
                return Err(profile(comp, "qb:dimension must be an IRI"));
            };
            dim_comps.push((order, at, d.clone()));
        } else if let Some(m) = g.object(comp, &qb("measure")) {
            meas_comps.push((order, at, comp.clone(), m.clone()));
        }
        // Components of other kinds (qb:attribute, …) are tolerated.
    }
    dim_comps.sort();
    meas_comps.sort();

    let mut dimensions: Vec<RoleBinding> = Vec::new();
    let mut instances: BTreeMap<String, DimensionInstance> = BTreeMap::new();
    // Level IRI → every (role, level name) that declares it; cuboid
    // components are only unambiguous when this is unique.
    let mut level_owner: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for (_, _, dim_iri) in &dim_comps {
        let piece = read_dimension(g, dim_iri)?;
        if instances.contains_key(&piece.role) {
            return Err(profile(
                &Term::iri(dim_iri.clone()),
                format!("two dimensions of <{dsd_iri}> share the name `{}`", piece.role),
            ));
        }
        for (iri, level) in &piece.level_iris {
            level_owner
                .entry(iri.clone())
                .or_default()
                .push((piece.role.clone(), level.clone()));
        }
        instances.insert(piece.role.clone(), piece.instance);
        dimensions.push(RoleBinding {
            role: piece.role,
            dimension: Arc::new(piece.schema),
            iris: Some(piece.iris),
        });
    }

    let mut measures: Vec<Measure> = Vec::new();
    let mut agg_map: BTreeMap<String, AggFn> = BTreeMap::new();
    // Measures without a declared range get their type from the values.
    let mut inferred: Vec<bool> = Vec::new();
    for (_, _, comp, m) in &meas_comps {
        let Term::Iri(m_iri) = m else {
            return Err(profile(comp, "qb:measure must be an IRI"));
        };
        let m_name = name_of(g, m);
        if measures.iter().any(|x| x.name == m_name) {
            return Err(profile(m, format!("two measures share the name `{m_name}`")));
        }
        let range = g
            .object(m, &rdfs("range"))
            .and_then(Term::as_iri)
            .and_then(scalar_from_xsd);
        inferred.push(range.is_none());
        measures.push(Measure {
            name: m_name.clone(),
            datatype: range.unwrap_or(ScalarType::Decimal),
            iri: Some(m_iri.clone()),
        });
        if let Some(f) = g
            .object(comp, &qb4o("aggregateFunction"))
            .and_then(Term::as_iri)
            .map(local_name)
            .and_then(AggFn::from_qb4o_name)
        {
            agg_map.insert(m_name, f);
        }
    }

    let cuboid_dsds: BTreeSet<&str> = g
        .subjects_with(&qb4o("isCuboidOf"), &dsd)
        .into_iter()
        .filter_map(Term::as_iri)
        .collect();

    let mut datasets: Vec<DatasetDef> = Vec::new();
    let mut all_int = vec![true; measures.len()];
    let mut any_value = vec![false; measures.len()];
    for ds in g.of_type(&qb("DataSet")) {
        let Term::Iri(ds_iri) = ds else { continue };
        let Some(structure) = g.object(ds, &qb("structure")).and_then(Term::as_iri) else {
            continue;
        };
        let levels: LevelSet = if structure == dsd_iri {
            // A dataset structured directly by the cube sits at the bottom.
            dimensions
                .iter()
                .map(|b| Ok((b.role.clone(), b.dimension.bottom()?.to_string())))
                .collect::<Result<_>>()?
        } else if cuboid_dsds.contains(structure) {
            read_cuboid_levels(g, structure, &level_owner, &dimensions)?
        } else {
            continue; // belongs to some other cube in the graph
        };
        let cells = read_observations(
            g,
            ds,
            &levels,
            &dimensions,
            &measures,
            &mut all_int,
            &mut any_value,
        )?;
        datasets.push(DatasetDef {
            name: name_of(g, ds),
            iri: Some(ds_iri.clone()),
            dsd_iri: Some(structure.to_string()),
            levels: Some(levels),
            cells,
        });
    }
    for (j, m) in measures.iter_mut().enumerate() {
        if inferred[j] && any_value[j] && all_int[j] {
            m.datatype = ScalarType::Integer;
        }
    }

    let bundle = ModelBundle {
        base_iri: None,
        cube: CubeSchema {
            name,
            dimensions,
            measures,
            agg_map,
            iri: Some(dsd_iri.to_string()),
        },
        instances,
        datasets,
    };
    bundle.into_model()
}

pub(crate) fn scalar_from_xsd(iri: &str) -> Option<ScalarType> {
    match local_name(iri) {
        "string" => Some(ScalarType::String),
        "integer" | "int" | "long" | "short" | "byte" | "nonNegativeInteger"
        | "positiveInteger" => Some(ScalarType::Integer),
        "decimal" | "double" | "float" => Some(ScalarType::Decimal),
        _ => None,
    }
}

/// One dimension read back: its schema, the IRIs everything was found
/// under, and the instance data hanging off its members.
struct DimPiece {
    role: String,
    schema: DimensionSchema,
    iris: RoleIris,
    instance: DimensionInstance,
    /// Level IRI → level name.
    level_iris: BTreeMap<String, String>,
}

fn read_dimension(g: &RdfGraph, dim_iri: &str) -> Result<DimPiece> {
    let dim = Term::iri(dim_iri.to_string());
    let role = name_of(g, &dim);

    let mut hier_iris: BTreeSet<String> = g
        .objects(&dim, &qb4o("hasHierarchy"))
        .into_iter()
        .filter_map(Term::as_iri)
        .map(str::to_string)
        .collect();
    for h in g.subjects_with(&qb4o("inDimension"), &dim) {
        if let Term::Iri(i) = h {
            hier_iris.insert(i.clone());
        }
    }

    let mut steps: Vec<Term> = Vec::new();
    for h in &hier_iris {
        for s in g.subjects_with(&qb4o("inHierarchy"), &Term::iri(h.clone())) {
            steps.push(s.clone());
        }
    }
    steps.sort();
    steps.dedup();

    let mut level_iri_set: BTreeSet<String> = BTreeSet::new();
    for h in &hier_iris {
        for l in g.objects(&Term::iri(h.clone()), &qb4o("hasLevel")) {
            if let Term::Iri(i) = l {
                level_iri_set.insert(i.clone());
            }
        }
    }
    for s in &steps {
        for prop in ["childLevel", "parentLevel"] {
            if let Some(Term::Iri(i)) = g.object(s, &qb4o(prop)) {
                level_iri_set.insert(i.clone());
            }
        }
    }
    if level_iri_set.is_empty() {
        return Err(profile(&dim, "dimension declares no levels"));
    }

    let mut level_iris: BTreeMap<String, String> = BTreeMap::new();
    let mut level_by_name: BTreeMap<String, String> = BTreeMap::new();
    for iri in &level_iri_set {
        let name = name_of(g, &Term::iri(iri.clone()));
        if let Some(other) = level_by_name.insert(name.clone(), iri.clone()) {
            return Err(profile(
                &dim,
                format!("levels <{other}> and <{iri}> both name `{name}`"),
            ));
        }
        level_iris.insert(iri.clone(), name);
    }

    let mut levels: Vec<Level> = Vec::new();
    let mut attr_iris: BTreeMap<(String, String), String> = BTreeMap::new();
    for (iri, name) in &level_iris {
        let mut attributes: Vec<Attribute> = Vec::new();
        for a in g.objects(&Term::iri(iri.clone()), &qb4o("hasAttribute")) {
            let Term::Iri(a_iri) = a else { continue };
            let a_name = name_of(g, a);
            if attributes.iter().any(|x| x.name == a_name) {
                return Err(profile(
                    a,
                    format!("level <{iri}> has two attributes named `{a_name}`"),
                ));
            }
            let datatype = g
                .object(a, &rdfs("range"))
                .and_then(Term::as_iri)
                .and_then(scalar_from_xsd)
                .unwrap_or(ScalarType::String);
            attr_iris.insert((name.clone(), a_name.clone()), a_iri.clone());
            attributes.push(Attribute {
                name: a_name,
                datatype,
            });
        }
        levels.push(Level {
            name: name.clone(),
            attributes,
        });
    }
    levels.sort_by(|a, b| a.name.cmp(&b.name));

    let mut order_set: BTreeSet<(String, String)> = BTreeSet::new();
    let mut rollups_by_pair: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    for s in &steps {
        let child = step_level(g, s, "childLevel", &level_iris)?;
        let parent = step_level(g, s, "parentLevel", &level_iris)?;
        order_set.insert((child.clone(), parent.clone()));
        let rups = rollups_by_pair.entry((child, parent)).or_default();
        if let Some(r) = g.object(s, &qb4o("rollup")).and_then(Term::as_iri) {
            rups.insert(r.to_string());
        }
    }

    let mut hierarchies: Vec<Hierarchy> = Vec::new();
    let mut hier_by_name: BTreeMap<String, String> = BTreeMap::new();
    for iri in &hier_iris {
        let h = Term::iri(iri.clone());
        let h_name = name_of(g, &h);
        if hier_by_name.contains_key(&h_name) {
            return Err(profile(
                &h,
                format!("two hierarchies of <{dim_iri}> share the name `{h_name}`"),
            ));
        }
        let mut h_levels: Vec<String> = g
            .objects(&h, &qb4o("hasLevel"))
            .into_iter()
            .filter_map(Term::as_iri)
            .filter_map(|i| level_iris.get(i).cloned())
            .collect();
        h_levels.sort();
        h_levels.dedup();
        hier_by_name.insert(h_name.clone(), iri.clone());
        hierarchies.push(Hierarchy {
            name: h_name,
            levels: h_levels,
        });
    }

    // Foreign graphs usually stop at their top concrete levels. Add the
    // implicit top level so the dimension supports slicing and a full
    // lattice: every level without a parent gets an edge into it, and every
    // hierarchy is extended by it.
    if !levels.iter().any(|l| l.name == ALL_LEVEL) {
        let children: BTreeSet<&str> = order_set.iter().map(|(c, _)| c.as_str()).collect();
        let tops: Vec<String> = levels
            .iter()
            .map(|l| l.name.clone())
            .filter(|n| !children.contains(n.as_str()))
            .collect();
        for top in tops {
            order_set.insert((top, ALL_LEVEL.to_string()));
        }
        levels.push(Level {
            name: ALL_LEVEL.to_string(),
            attributes: Vec::new(),
        });
        levels.sort_by(|a, b| a.name.cmp(&b.name));
        for h in &mut hierarchies {
            h.levels.push(ALL_LEVEL.to_string());
            h.levels.sort();
        }
    }

    // Members, their attribute values, and everything else on them.
    let all_rups: BTreeSet<&String> = rollups_by_pair.values().flatten().collect();
    let mut members: BTreeMap<String, Vec<Member>> = BTreeMap::new();
    let mut level_subjects: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut level_member_ns: BTreeMap<String, String> = BTreeMap::new();
    for (l_iri, l_name) in &level_iris {
        let l_term = Term::iri(l_iri.clone());
        let mut subjects: BTreeSet<String> = BTreeSet::new();
        for pred in ["memberOf", "inLevel"] {
            for s in g.subjects_with(&qb4o(pred), &l_term) {
                if let Term::Iri(i) = s {
                    subjects.insert(i.clone());
                }
            }
        }
        let subjects: Vec<String> = subjects.into_iter().collect();
        if let Some(first) = subjects.first() {
            level_member_ns.insert(l_name.clone(), namespace_of(first).to_string());
        }
        let attrs = &levels[levels.binary_search_by(|l| l.name.cmp(l_name)).unwrap()].attributes;
        let mut ms: Vec<Member> = Vec::new();
        for s in &subjects {
            let s_term = Term::iri(s.clone());
            let id = decode_name(local_name(s));
            if ms.iter().any(|m| m.id == id) {
                return Err(profile(
                    &s_term,
                    format!("two members of level `{l_name}` share the id `{id}`"),
                ));
            }
            let mut member = Member::new(id);
            for attr in attrs {
                let a_iri = &attr_iris[&(l_name.clone(), attr.name.clone())];
                match g.object(&s_term, a_iri) {
                    Some(Term::Literal(lit)) => {
                        let value = literal_to_attr(attr.datatype, lit).map_err(|e| {
                            profile(&s_term, format!("attribute `{}`: {e}", attr.name))
                        })?;
                        member.values.insert(attr.name.clone(), value);
                    }
                    Some(_) => {
                        return Err(profile(
                            &s_term,
                            format!("attribute `{}` value must be a literal", attr.name),
                        ));
                    }
                    None => {}
                }
            }
            let attr_iri_set: BTreeSet<&String> = attrs
                .iter()
                .map(|a| &attr_iris[&(l_name.clone(), a.name.clone())])
                .collect();
            for (p, o) in g.about(&s_term) {
                if p == RDF_TYPE || p == qb4o("memberOf") || p == qb4o("inLevel") {
                    continue;
                }
                let p_owned = p.to_string();
                if attr_iri_set.contains(&p_owned) || all_rups.contains(&p_owned) {
                    continue;
                }
                let value = match o {
                    Term::Iri(i) => ExtraValue::Iri { iri: i.clone() },
                    Term::Literal(l) => ExtraValue::Literal {
                        value: l.value.clone(),
                        lang: l.lang.clone(),
                        datatype: l.datatype.clone(),
                    },
                    Term::Blank(_) => continue,
                };
                member.extras.push(Extra {
                    predicate: p_owned,
                    value,
                });
            }
            ms.push(member);
        }
        members.insert(l_name.clone(), ms);
        level_subjects.insert(l_name.clone(), subjects);
    }

    let mut rollup_relations: Vec<RollupRelation> = Vec::new();
    for ((child, parent), rups) in &rollups_by_pair {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(subjects) = level_subjects.get(child) {
            for s in subjects {
                let child_id = decode_name(local_name(s));
                for rup in rups {
                    for o in g.objects(&Term::iri(s.clone()), rup) {
                        if let Term::Iri(p_iri) = o {
                            pairs.push((child_id.clone(), decode_name(local_name(p_iri))));
                        }
                    }
                }
            }
        }
        rollup_relations.push(RollupRelation {
            child_level: child.clone(),
            parent_level: parent.clone(),
            pairs,
        });
    }

    let iris = RoleIris {
        dimension: Some(dim_iri.to_string()),
        levels: level_by_name,
        attributes: attr_iris
            .iter()
            .map(|((l, a), iri)| (format!("{l}.{a}"), iri.clone()))
            .collect(),
        hierarchies: hier_by_name,
        rollups: rollups_by_pair
            .iter()
            .filter_map(|((c, p), rups)| {
                rups.first().map(|r| (format!("{c}->{p}"), r.clone()))
            })
            .collect(),
        member_ns: None,
        level_member_ns,
    };

    Ok(DimPiece {
        schema: DimensionSchema {
            name: role.clone(),
            levels,
            order: order_set
                .into_iter()
                .map(|(c, p)| LevelPair::new(c, p))
                .collect(),
            hierarchies,
        },
        role,
        iris,
        instance: DimensionInstance {
            schema: Arc::default(),
            members,
            rollups: rollup_relations,
        },
        level_iris,
    })
}

fn step_level(
    g: &RdfGraph,
    step: &Term,
    prop: &str,
    level_iris: &BTreeMap<String, String>,
) -> Result<String> {
    let t = g
        .object(step, &qb4o(prop))
        .ok_or_else(|| profile(step, format!("hierarchy step lacks qb4o:{prop}")))?;
    let iri = t
        .as_iri()
        .ok_or_else(|| profile(step, format!("qb4o:{prop} must be an IRI")))?;
    level_iris
        .get(iri)
        .cloned()
        .ok_or_else(|| profile(step, format!("qb4o:{prop} references undeclared level <{iri}>")))
}

fn read_cuboid_levels(
    g: &RdfGraph,
    dsd_iri: &str,
    level_owner: &BTreeMap<String, Vec<(String, String)>>,
    dimensions: &[RoleBinding],
) -> Result<LevelSet> {
    let dsd = Term::iri(dsd_iri.to_string());
    let mut levels = LevelSet::new();
    for comp in g.objects(&dsd, &qb("component")) {
        let Some(l) = g.object(comp, &qb4o("level")) else {
            continue;
        };
        let Term::Iri(l_iri) = l else {
            return Err(profile(comp, "qb4o:level must be an IRI"));
        };
        let owners = level_owner.get(l_iri).ok_or_else(|| {
            profile(&dsd, format!("component references undeclared level <{l_iri}>"))
        })?;
        if owners.len() > 1 {
            return Err(profile(
                &dsd,
                format!("level <{l_iri}> belongs to more than one dimension"),
            ));
        }
        let (role, level) = &owners[0];
        if levels.insert(role.clone(), level.clone()).is_some() {
            return Err(profile(
                &dsd,
                format!("two levels given for dimension `{role}`"),
            ));
        }
    }
    for b in dimensions {
        if !levels.contains_key(&b.role) {
            return Err(profile(
                &dsd,
                format!("no level for dimension `{}`", b.role),
            ));
        }
    }
    Ok(levels)
}

#[allow(clippy::too_many_arguments)]
fn read_observations(
    g: &RdfGraph,
    ds: &Term,
    levels: &LevelSet,
    dimensions: &[RoleBinding],
    measures: &[Measure],
    all_int: &mut [bool],
    any_value: &mut [bool],
) -> Result<Vec<CellDef>> {
    let mut level_iris: Vec<String> = Vec::new();
    for b in dimensions {
        let level = &levels[&b.role];
        let iri = b
            .iris
            .as_ref()
            .and_then(|i| i.levels.get(level))
            .ok_or_else(|| {
                profile(ds, format!("no IRI known for level `{level}` of `{}`", b.role))
            })?;
        level_iris.push(iri.clone());
    }

    let mut cells: Vec<CellDef> = Vec::new();
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    for obs in g.subjects_with(&qb("dataSet"), ds) {
        let mut key: Vec<String> = Vec::new();
        for iri in &level_iris {
            match g.object(obs, iri) {
                Some(Term::Iri(member)) => key.push(decode_name(local_name(member))),
                Some(_) => return Err(profile(obs, format!("<{iri}> must point at a member IRI"))),
                None => {
                    return Err(Error::MissingComponent {
                        subject: subject_string(obs),
                        component: iri.clone(),
                    });
                }
            }
        }
        let mut values: Vec<Num> = Vec::new();
        for (j, m) in measures.iter().enumerate() {
            let m_iri = m.iri.as_deref().unwrap_or_default();
            match g.object(obs, m_iri) {
                Some(Term::Literal(lit)) => {
                    let n = literal_to_num(lit)
                        .map_err(|e| profile(obs, format!("measure `{}`: {e}", m.name)))?;
                    if matches!(n, Num::Dec(_)) {
                        all_int[j] = false;
                    }
                    any_value[j] = true;
                    values.push(n);
                }
                Some(_) => {
                    return Err(profile(obs, format!("measure `{}` must be a literal", m.name)));
                }
                None => {
                    return Err(Error::MissingComponent {
                        subject: subject_string(obs),
                        component: m_iri.to_string(),
                    });
                }
            }
        }
        if !seen.insert(key.clone()) {
            return Err(Error::DupCell {
                coords: key.join(", "),
            });
        }
        cells.push(CellDef { key, values });
    }
    Ok(cells)
}

fn subject_string(t: &Term) -> String {
    match t {
        Term::Iri(i) => i.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::value::AttrValue;
    use crate::qb4olap::emit::model_to_graph;
    use crate::qb4olap::testdata::{citizenship_model, mini_model, CITIZENSHIP_TTL};
    use crate::rdf::turtle::{parse_turtle, serialize_turtle};

    #[test]
    fn empty_graphs_hold_no_cubes() {
        assert!(graph_to_model(&RdfGraph::new()).unwrap().is_empty());
    }

    #[test]
    fn published_listings_read_back() {
        let g = parse_turtle(CITIZENSHIP_TTL).unwrap();
        let models = graph_to_model(&g).unwrap();
        assert_eq!(models.len(), 1);
        let m = &models[0];
        assert_eq!(m.cube.name, "migrCUBE");
        assert_eq!(m.cube.dimensions.len(), 1);

        let binding = &m.cube.dimensions[0];
        assert_eq!(binding.role, "citizenshipDim");
        let schema = &binding.dimension;
        let level_names: Vec<&str> = schema.levels.iter().map(|l| l.name.as_str()).collect();
        // The published levels plus the synthesized top.
        assert_eq!(level_names, ["All", "citizen", "continent", "governmentType"]);
        assert_eq!(schema.hierarchies.len(), 2);
        assert!(schema
            .hierarchies
            .iter()
            .all(|h| h.levels.contains(&ALL_LEVEL.to_string())));
        let pairs: Vec<(&str, &str)> = schema
            .order
            .iter()
            .map(|p| (p.child.as_str(), p.parent.as_str()))
            .collect();
        assert!(pairs.contains(&("citizen", "continent")));
        assert!(pairs.contains(&("citizen", "governmentType")));
        assert!(pairs.contains(&("continent", "All")));
        assert!(pairs.contains(&("governmentType", "All")));

        let inst = &m.instances["citizenshipDim"];
        let citizens = &inst.members["citizen"];
        let ids: Vec<&str> = citizens.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["AD", "ZW"]); // both memberOf and inLevel spellings
        let ad = &citizens[0];
        assert_eq!(ad.values["countryName"], AttrValue::Str("Andorra".into()));
        assert_eq!(ad.extras.len(), 3); // the prefLabels survive as extras
        let rel = inst.rollup("citizen", "continent").unwrap();
        assert_eq!(
            rel.pairs,
            [("AD".into(), "EU".into()), ("ZW".into(), "AF".into())]
        );

        // No declared range: the observed values type the measure.
        assert_eq!(m.cube.measures[0].name, "obsValue");
        assert_eq!(m.cube.measures[0].datatype, ScalarType::Integer);
        assert_eq!(m.cube.agg("obsValue").unwrap(), AggFn::Sum);

        assert_eq!(m.datasets.len(), 1);
        let ds = &m.datasets[0];
        assert_eq!(ds.name, "migr");
        assert_eq!(ds.cuboid.level_of("citizenshipDim").unwrap(), "citizen");
        assert_eq!(ds.cuboid.cells.len(), 2);
        assert_eq!(ds.cuboid.cells[&vec!["AD".to_string()]], [Num::Int(30)]);
        assert_eq!(ds.cuboid.cells[&vec!["ZW".to_string()]], [Num::Int(25)]);
    }

    #[test]
    fn emitted_graphs_read_back_equivalently() {
        for model in [mini_model(), citizenship_model()] {
            let base = model.base_iri.clone().unwrap();
            let g = model_to_graph(&model, &base).unwrap();
            let mut models = graph_to_model(&g).unwrap();
            assert_eq!(models.len(), 1);
            let back = models.remove(0);

            assert_eq!(back.cube.name, model.cube.name);
            assert_eq!(back.cube.measures.len(), model.cube.measures.len());
            for (bm, am) in back.cube.measures.iter().zip(&model.cube.measures) {
                assert_eq!(bm.name, am.name);
                assert_eq!(bm.datatype, am.datatype);
            }
            assert_eq!(back.cube.agg_map, model.cube.agg_map);
            assert_eq!(back.cube.dimensions.len(), model.cube.dimensions.len());
            for (b, a) in back.cube.dimensions.iter().zip(&model.cube.dimensions) {
                assert_eq!(b.role, a.role);
                assert_eq!(b.dimension.levels, a.dimension.levels);
                assert_eq!(b.dimension.order, a.dimension.order);
                assert_eq!(b.dimension.hierarchies, a.dimension.hierarchies);

                let bi = &back.instances[&b.role];
                let ai = &model.instances[&a.role];
                assert_eq!(bi.members, ai.members);
                let key = |r: &RollupRelation| (r.child_level.clone(), r.parent_level.clone());
                let mut brs: Vec<_> = bi.rollups.clone();
                let mut ars: Vec<_> = ai.rollups.clone();
                brs.sort_by_key(key);
                ars.sort_by_key(key);
                for (br, ar) in brs.iter_mut().zip(ars.iter_mut()) {
                    br.pairs.sort();
                    ar.pairs.sort();
                }
                assert_eq!(brs, ars);
            }
            assert_eq!(back.datasets.len(), model.datasets.len());
            for (b, a) in back.datasets.iter().zip(&model.datasets) {
                assert_eq!(b.name, a.name);
                assert_eq!(b.cuboid.levels, a.cuboid.levels);
                assert_eq!(b.cuboid.cells, a.cuboid.cells);
            }
        }
    }

    #[test]
    fn reexporting_a_read_back_model_is_byte_stable() {
        for model in [mini_model(), citizenship_model()] {
            let base = model.base_iri.clone().unwrap();
            let first = serialize_turtle(&model_to_graph(&model, &base).unwrap());
            let back = graph_to_model(&parse_turtle(&first).unwrap())
                .unwrap()
                .remove(0);
            let second = serialize_turtle(&model_to_graph(&back, &base).unwrap());
            assert_eq!(first, second);
        }
    }

    #[test]
    fn cuboids_referencing_unknown_levels_are_rejected() {
        let ttl = format!(
            "{CITIZENSHIP_TTL}
schema:badBOTTOM a qb:DataStructureDefinition ;
    qb4o:isCuboidOf schema:migrCUBE ;
    qb:component [ qb4o:level schema:nowhere ] .
eurostat:bad a qb:DataSet ; qb:structure schema:badBOTTOM .
"
        );
        let err = graph_to_model(&parse_turtle(&ttl).unwrap()).unwrap_err();
        assert_eq!(err.code(), "E_PROFILE");
    }

    #[test]
    fn duplicate_observations_are_rejected() {
        let ttl = format!(
            "{CITIZENSHIP_TTL}
eurostat:cellAD2 a qb:Observation ;
    qb:dataSet eurostat:migr ;
    property:citizen citizen:AD ;
    sdmx-measure:obsValue 7 .
"
        );
        let err = graph_to_model(&parse_turtle(&ttl).unwrap()).unwrap_err();
        assert_eq!(err.code(), "E_DUP_CELL");
    }

    #[test]
    fn observations_must_carry_every_component() {
        let ttl = format!(
            "{CITIZENSHIP_TTL}
eurostat:cellBare a qb:Observation ;
    qb:dataSet eurostat:migr ;
    property:citizen citizen:AD .
"
        );
        let err = graph_to_model(&parse_turtle(&ttl).unwrap()).unwrap_err();
        assert_eq!(err.code(), "E_MISSING_COMPONENT");
    }
}
