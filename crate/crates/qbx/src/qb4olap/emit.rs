//! Rendering a model as a QB4OLAP graph.
//!
//! One call emits everything an endpoint needs to answer the generated
//! queries: the dimension schemas (levels, attributes, hierarchies and
//! their steps), the dimension instances (members, attribute values,
//! rollup links), the cube's structure definition, and per dataset a
//! cuboid structure definition plus one observation per cell.

use crate::error::{Error, Result};
use crate::model::bundle::{Dataset, LoadedModel};
use crate::model::cube::RoleBinding;
use crate::model::instance::ExtraValue;
use crate::rdf::term::{Literal, RdfGraph, Term, RDF_TYPE};

use super::iris::IriPlan;
use super::values::{attr_to_literal, num_to_literal};
use super::vocab::{
    qb, qb4o, rdfs, skos, QB, QB4O, RDFS, SDMX_DIMENSION, SDMX_MEASURE, SKOS, XSD,
};

/// Render the whole model as RDF. Anything the model names explicitly keeps
/// its IRI; the rest is minted deterministically under `base_iri`.
pub fn model_to_graph(model: &LoadedModel, base_iri: &str) -> Result<RdfGraph> {
    let report = model.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidModel {
            detail: format!("{} on {}: {}", v.code, v.subject, v.message),
        });
    }

    let plan = IriPlan::new(model, base_iri);
    let mut g = RdfGraph::new();
    g.declare("qb", QB);
    g.declare("qb4o", QB4O);
    g.declare("sdmx-dimension", SDMX_DIMENSION);
    g.declare("sdmx-measure", SDMX_MEASURE);
    g.declare("skos", SKOS);
    g.declare("rdfs", RDFS);
    g.declare("xsd", XSD);
    g.declare("schema", &plan.schema_ns);
    g.declare("inst", &plan.instance_ns);

    let mut blanks = Blanks::default();
    for binding in &model.cube.dimensions {
        emit_dimension(&mut g, model, &plan, binding, &mut blanks);
    }
    emit_cube(&mut g, model, &plan, &mut blanks)?;
    for ds in &model.datasets {
        emit_dataset(&mut g, model, &plan, ds, &mut blanks)?;
    }
    Ok(g)
}

/// Counter for graph-local blank node labels. The serializer renames all
/// blanks canonically, so only uniqueness matters here.
#[derive(Default)]
struct Blanks(usize);

impl Blanks {
    fn next(&mut self) -> Term {
        self.0 += 1;
        Term::blank(format!("n{}", self.0))
    }
}

fn notation(g: &mut RdfGraph, subject: &Term, name: &str) {
    g.insert(
        subject.clone(),
        skos("notation"),
        Term::lit(Literal::str(name)),
    );
}

fn emit_dimension(
    g: &mut RdfGraph,
    model: &LoadedModel,
    plan: &IriPlan,
    binding: &RoleBinding,
    blanks: &mut Blanks,
) {
    let role = &binding.role;
    let schema = &binding.dimension;
    let dim = Term::iri(plan.dimension(role));
    g.insert(dim.clone(), RDF_TYPE, Term::iri(qb("DimensionProperty")));
    notation(g, &dim, role);

    for level in &schema.levels {
        let l = Term::iri(plan.level(role, &level.name));
        g.insert(l.clone(), RDF_TYPE, Term::iri(qb4o("LevelProperty")));
        notation(g, &l, &level.name);
        for attr in &level.attributes {
            let Some(iri) = plan.attribute(role, &level.name, &attr.name) else {
                continue;
            };
            let a = Term::iri(iri);
            g.insert(l.clone(), qb4o("hasAttribute"), a.clone());
            g.insert(a.clone(), RDF_TYPE, Term::iri(qb4o("LevelAttribute")));
            g.insert(a.clone(), rdfs("range"), Term::iri(attr.datatype.xsd_iri()));
            notation(g, &a, &attr.name);
        }
    }

    for h in &schema.hierarchies {
        let hier = Term::iri(plan.hierarchy(role, &h.name));
        g.insert(dim.clone(), qb4o("hasHierarchy"), hier.clone());
        g.insert(hier.clone(), RDF_TYPE, Term::iri(qb4o("Hierarchy")));
        g.insert(hier.clone(), qb4o("inDimension"), dim.clone());
        notation(g, &hier, &h.name);
        for level in &h.levels {
            g.insert(
                hier.clone(),
                qb4o("hasLevel"),
                Term::iri(plan.level(role, level)),
            );
        }
    }

    // One hierarchy step per order edge and hierarchy containing both of
    // its endpoints. An edge no declared hierarchy covers still needs a
    // step (it is what links the levels), so it goes to the first one.
    for pair in &schema.order {
        let covering: Vec<&str> = schema
            .hierarchies
            .iter()
            .filter(|h| {
                h.levels.iter().any(|l| *l == pair.child)
                    && h.levels.iter().any(|l| *l == pair.parent)
            })
            .map(|h| h.name.as_str())
            .collect();
        let fallback = [schema.hierarchies[0].name.as_str()];
        let in_hierarchies: &[&str] = if covering.is_empty() {
            &fallback
        } else {
            &covering
        };
        let Some(rup) = plan.rollup(role, &pair.child, &pair.parent) else {
            continue;
        };
        let rup = Term::iri(rup);
        g.insert(rup.clone(), RDF_TYPE, Term::iri(qb4o("RollupProperty")));
        for h in in_hierarchies {
            let step = blanks.next();
            g.insert(step.clone(), RDF_TYPE, Term::iri(qb4o("HierarchyStep")));
            g.insert(
                step.clone(),
                qb4o("inHierarchy"),
                Term::iri(plan.hierarchy(role, h)),
            );
            g.insert(
                step.clone(),
                qb4o("childLevel"),
                Term::iri(plan.level(role, &pair.child)),
            );
            g.insert(
                step.clone(),
                qb4o("parentLevel"),
                Term::iri(plan.level(role, &pair.parent)),
            );
            g.insert(
                step.clone(),
                qb4o("pcCardinality"),
                Term::iri(qb4o(step_cardinality(model, role, &pair.child, &pair.parent))),
            );
            g.insert(step.clone(), qb4o("rollup"), rup.clone());
        }
    }

    emit_members(g, model, plan, binding);
}

/// `OneToMany` when every child member has at most one parent under this
/// edge, `ManyToMany` otherwise (a non-strict hierarchy).
fn step_cardinality(model: &LoadedModel, role: &str, child: &str, parent: &str) -> &'static str {
    let functional = model
        .instances
        .get(role)
        .and_then(|inst| inst.rollup(child, parent))
        .is_none_or(|rel| {
            let mut seen = std::collections::BTreeSet::new();
            rel.pairs.iter().all(|(c, _)| seen.insert(c))
        });
    if functional {
        "OneToMany"
    } else {
        "ManyToMany"
    }
}

fn emit_members(g: &mut RdfGraph, model: &LoadedModel, plan: &IriPlan, binding: &RoleBinding) {
    let role = &binding.role;
    let Some(inst) = model.instances.get(role) else {
        return;
    };
    for level in &binding.dimension.levels {
        let l = Term::iri(plan.level(role, &level.name));
        let Some(members) = inst.members.get(&level.name) else {
            continue;
        };
        for m in members {
            let subject = Term::iri(plan.member(role, &level.name, &m.id));
            g.insert(subject.clone(), qb4o("memberOf"), l.clone());
            for (attr, value) in &m.values {
                let Some(iri) = plan.attribute(role, &level.name, attr) else {
                    continue;
                };
                g.insert(subject.clone(), iri, Term::lit(attr_to_literal(value)));
            }
            for extra in &m.extras {
                let object = match &extra.value {
                    ExtraValue::Iri { iri } => Term::iri(iri),
                    ExtraValue::Literal {
                        value,
                        lang,
                        datatype,
                    } => Term::lit(Literal {
                        value: value.clone(),
                        lang: lang.clone(),
                        datatype: datatype.clone(),
                    }),
                };
                g.insert(subject.clone(), extra.predicate.clone(), object);
            }
        }
    }
    for rel in &inst.rollups {
        let Some(rup) = plan.rollup(role, &rel.child_level, &rel.parent_level) else {
            continue;
        };
        let rup = rup.to_string();
        for (child, parent) in &rel.pairs {
            g.insert(
                Term::iri(plan.member(role, &rel.child_level, child)),
                rup.clone(),
                Term::iri(plan.member(role, &rel.parent_level, parent)),
            );
        }
    }
}

/// The cube's structure definition: one component per measure (with its
/// aggregate function) and one per dimension, each carrying `qb:order` so
/// the declaration order survives the graph.
fn emit_cube(
    g: &mut RdfGraph,
    model: &LoadedModel,
    plan: &IriPlan,
    blanks: &mut Blanks,
) -> Result<()> {
    let cube = Term::iri(plan.cube.clone());
    g.insert(
        cube.clone(),
        RDF_TYPE,
        Term::iri(qb("DataStructureDefinition")),
    );
    notation(g, &cube, &model.cube.name);
    emit_measure_components(g, model, plan, &cube, blanks)?;
    for (i, binding) in model.cube.dimensions.iter().enumerate() {
        let comp = blanks.next();
        g.insert(cube.clone(), qb("component"), comp.clone());
        g.insert(
            comp.clone(),
            qb("dimension"),
            Term::iri(plan.dimension(&binding.role)),
        );
        g.insert(
            comp.clone(),
            qb4o("cardinality"),
            Term::iri(qb4o("ManyToOne")),
        );
        g.insert(
            comp.clone(),
            qb("order"),
            Term::lit(Literal::integer(i as i64 + 1)),
        );
    }
    Ok(())
}

fn emit_measure_components(
    g: &mut RdfGraph,
    model: &LoadedModel,
    plan: &IriPlan,
    dsd: &Term,
    blanks: &mut Blanks,
) -> Result<()> {
    for (i, m) in model.cube.measures.iter().enumerate() {
        let agg = model.cube.agg(&m.name)?;
        let measure = Term::iri(plan.measure(&m.name));
        let comp = blanks.next();
        g.insert(dsd.clone(), qb("component"), comp.clone());
        g.insert(comp.clone(), qb("measure"), measure.clone());
        g.insert(
            comp.clone(),
            qb4o("aggregateFunction"),
            Term::iri(qb4o(agg.qb4o_name())),
        );
        g.insert(
            comp.clone(),
            qb("order"),
            Term::lit(Literal::integer(i as i64 + 1)),
        );
        g.insert(measure.clone(), RDF_TYPE, Term::iri(qb("MeasureProperty")));
        g.insert(
            measure.clone(),
            rdfs("range"),
            Term::iri(m.datatype.xsd_iri()),
        );
        notation(g, &measure, &m.name);
    }
    Ok(())
}

/// A dataset: its cuboid structure definition (levels instead of
/// dimensions, linked to the cube via `qb4o:isCuboidOf`), the `qb:DataSet`
/// node, and one observation per cell.
fn emit_dataset(
    g: &mut RdfGraph,
    model: &LoadedModel,
    plan: &IriPlan,
    ds: &Dataset,
    blanks: &mut Blanks,
) -> Result<()> {
    let (ds_iri, dsd_iri) = plan.dataset(&ds.name);
    let dsd = Term::iri(dsd_iri);
    let dataset = Term::iri(ds_iri);

    g.insert(
        dsd.clone(),
        RDF_TYPE,
        Term::iri(qb("DataStructureDefinition")),
    );
    g.insert(dsd.clone(), qb4o("isCuboidOf"), Term::iri(plan.cube.clone()));
    notation(g, &dsd, &ds.name);
    emit_measure_components(g, model, plan, &dsd, blanks)?;
    let mut level_iris = Vec::new();
    for (i, binding) in model.cube.dimensions.iter().enumerate() {
        let level = ds.cuboid.level_of(&binding.role)?;
        let iri = plan.level(&binding.role, level).to_string();
        let comp = blanks.next();
        g.insert(dsd.clone(), qb("component"), comp.clone());
        g.insert(comp.clone(), qb4o("level"), Term::iri(&iri));
        g.insert(
            comp.clone(),
            qb("order"),
            Term::lit(Literal::integer(i as i64 + 1)),
        );
        level_iris.push(iri);
    }

    g.insert(dataset.clone(), RDF_TYPE, Term::iri(qb("DataSet")));
    g.insert(dataset.clone(), qb("structure"), dsd.clone());
    notation(g, &dataset, &ds.name);

    for (key, values) in &ds.cuboid.cells {
        let obs = Term::iri(plan.observation(&ds.name, key));
        g.insert(obs.clone(), RDF_TYPE, Term::iri(qb("Observation")));
        g.insert(obs.clone(), qb("dataSet"), dataset.clone());
        for (i, binding) in model.cube.dimensions.iter().enumerate() {
            let level = ds.cuboid.level_of(&binding.role)?;
            g.insert(
                obs.clone(),
                level_iris[i].clone(),
                Term::iri(plan.member(&binding.role, level, &key[i])),
            );
        }
        for (j, m) in model.cube.measures.iter().enumerate() {
            g.insert(
                obs.clone(),
                plan.measure(&m.name),
                Term::lit(num_to_literal(values[j])),
            );
        }
    }
    Ok(())
}
