//! Compiles a typed plan into an ordered chain of SPARQL queries.
//!
//! Each aggregating operation materializes a new dataset under the base
//! IRI's query namespace, and the next query reads from it. When the cube
//! aggregates with `COUNT` or `AVG`, a multi-level roll-up is split into
//! one query per adjacent level pair — those functions are sensitive to
//! re-aggregation, and level-at-a-time is the defined meaning. The
//! associative functions collapse the climb into a single query.

use std::sync::Arc;

use crate::algebra::{rewrite_drilldown, rewrite_slice_dim, PlanOp, TypedPlan};
use crate::error::{Error, Result};
use crate::model::oracle::{without_measure, without_role};
use crate::model::{AggFn, CubeSchema, LevelPair, LevelSet, LoadedModel};
use crate::qb4olap::vocab::{qb, qb4o};
use crate::qb4olap::{model_to_graph, IriPlan, Qb4olapCatalog};
use crate::rdf::{Literal, Term, RDF_TYPE};

use super::gen::{
    gen_copy_query, gen_dice_query, gen_drop_measure_query, gen_project_query, gen_rollup_query,
};
use super::query::AbstractQuery;

/// One executable step: a query, the dataset it reads, and the dataset it
/// writes. The query's FROM clauses are left empty here — the runner scopes
/// each step to the schema graph plus the previous step's output graph, so
/// a dice (whose kept observations stay in their original dataset) cannot
/// see observations an earlier step already filtered away.
#[derive(Debug, Clone)]
pub struct CompiledStep {
    pub query: AbstractQuery,
    pub in_dataset: String,
    pub out_dataset: String,
}

/// A compiled plan, ready to run against a SPARQL endpoint.
#[derive(Debug)]
pub struct CompiledPlan {
    pub steps: Vec<CompiledStep>,
    /// The structural graph the queries were generated against, including
    /// one synthetic cuboid structure per intermediate dataset.
    pub catalog: Qb4olapCatalog,
    /// Dataset IRI the final step writes (or, for a plan of pure dices, the
    /// source dataset the surviving observations still belong to).
    pub result_dataset: String,
    /// Structure definition IRI describing the final dataset.
    pub result_dsd: String,
    /// Level per surviving role after the last step.
    pub result_levels: LevelSet,
    /// Measures surviving after the last step, in cube order.
    pub result_measures: Vec<String>,
    /// The cube the result conforms to: the plan's cube minus sliced roles
    /// and measures.
    pub result_cube: Arc<CubeSchema>,
}

/// Compiles `plan` against `model`'s QB4OLAP rendering under `base_iri`.
pub fn compile_plan(plan: &TypedPlan, model: &LoadedModel, base_iri: &str) -> Result<CompiledPlan> {
    if plan.cube.name != model.cube.name {
        return Err(Error::SchemaMismatch {
            detail: format!(
                "plan is over cube `{}`, model defines `{}`",
                plan.cube.name, model.cube.name
            ),
        });
    }
    let normalized;
    let plan = if plan.is_normalized() {
        plan
    } else {
        normalized = rewrite_slice_dim(&rewrite_drilldown(plan));
        &normalized
    };

    if !model.datasets.iter().any(|d| d.name == plan.source) {
        return Err(Error::UnknownSource {
            name: plan.source.clone(),
        });
    }
    let iris = IriPlan::new(model, base_iri);
    let mut catalog = Qb4olapCatalog::new(model_to_graph(model, base_iri)?);
    let (ds, dsd) = iris.dataset(&plan.source);
    let mut cur_ds = ds.to_string();
    let mut cur_dsd = dsd.to_string();

    let split = plan
        .cube
        .agg_map
        .values()
        .any(|a| matches!(a, AggFn::Count | AggFn::Avg));

    let mut cur_levels = plan.source_levels.clone();
    let mut cur_measures: Vec<String> =
        model.cube.measures.iter().map(|m| m.name.clone()).collect();
    let mut result_cube = Arc::clone(&plan.cube);
    let mut steps: Vec<CompiledStep> = Vec::new();
    let mut qn = 0usize;

    for step in &plan.steps {
        match &step.op {
            PlanOp::Rollup { role, path } => {
                if path.is_empty() {
                    continue; // roll-up to the level already held
                }
                let segments: Vec<&[LevelPair]> = if split {
                    path.chunks(1).collect()
                } else {
                    vec![&path[..]]
                };
                for seg in segments {
                    qn += 1;
                    let out_ds = format!("{}out{qn}", iris.query_ns);
                    let out_dsd = format!("{}dsd.out{qn}", iris.query_ns);
                    let target = &seg.last().expect("non-empty segment").parent;
                    let query = gen_rollup_query(
                        &cur_dsd,
                        &cur_ds,
                        iris.dimension(role),
                        iris.level(role, target),
                        &catalog,
                        &out_ds,
                    )?;
                    cur_levels.insert(role.clone(), target.clone());
                    register_cuboid(
                        &mut catalog,
                        &iris,
                        &result_cube,
                        &cur_levels,
                        &cur_measures,
                        &out_dsd,
                        qn,
                    )?;
                    steps.push(CompiledStep {
                        query,
                        in_dataset: cur_ds.clone(),
                        out_dataset: out_ds.clone(),
                    });
                    cur_ds = out_ds;
                    cur_dsd = out_dsd;
                }
            }
            PlanOp::Dice { condition } => {
                let query = gen_dice_query(&cur_dsd, &cur_ds, condition, &catalog)?;
                steps.push(CompiledStep {
                    query,
                    in_dataset: cur_ds.clone(),
                    out_dataset: cur_ds.clone(),
                });
            }
            PlanOp::SliceMeasure { measure } => {
                qn += 1;
                let out_ds = format!("{}out{qn}", iris.query_ns);
                let out_dsd = format!("{}dsd.out{qn}", iris.query_ns);
                let query = gen_drop_measure_query(
                    &cur_dsd,
                    &cur_ds,
                    iris.measure(measure),
                    &catalog,
                    &out_ds,
                )?;
                cur_measures.retain(|m| m != measure);
                result_cube = Arc::new(without_measure(&result_cube, measure));
                register_cuboid(
                    &mut catalog,
                    &iris,
                    &result_cube,
                    &cur_levels,
                    &cur_measures,
                    &out_dsd,
                    qn,
                )?;
                steps.push(CompiledStep {
                    query,
                    in_dataset: cur_ds.clone(),
                    out_dataset: out_ds.clone(),
                });
                cur_ds = out_ds;
                cur_dsd = out_dsd;
            }
            PlanOp::ProjectRole { role } => {
                qn += 1;
                let out_ds = format!("{}out{qn}", iris.query_ns);
                let out_dsd = format!("{}dsd.out{qn}", iris.query_ns);
                let query = gen_project_query(
                    &cur_dsd,
                    &cur_ds,
                    iris.dimension(role),
                    &catalog,
                    &out_ds,
                )?;
                cur_levels.remove(role);
                result_cube = Arc::new(without_role(&result_cube, role));
                register_cuboid(
                    &mut catalog,
                    &iris,
                    &result_cube,
                    &cur_levels,
                    &cur_measures,
                    &out_dsd,
                    qn,
                )?;
                steps.push(CompiledStep {
                    query,
                    in_dataset: cur_ds.clone(),
                    out_dataset: out_ds.clone(),
                });
                cur_ds = out_ds;
                cur_dsd = out_dsd;
            }
            PlanOp::Drilldown { .. } | PlanOp::SliceRole { .. } => {
                unreachable!("removed by the normalization rewrites")
            }
        }
    }

    if steps.is_empty() {
        steps.push(CompiledStep {
            query: gen_copy_query(&cur_ds),
            in_dataset: cur_ds.clone(),
            out_dataset: cur_ds.clone(),
        });
    }

    Ok(CompiledPlan {
        steps,
        catalog,
        result_dataset: cur_ds,
        result_dsd: cur_dsd,
        result_levels: cur_levels,
        result_measures: cur_measures,
        result_cube,
    })
}

/// Describes an intermediate dataset in the catalog's graph: a cuboid
/// structure fixing the live level of every surviving role and carrying
/// the surviving measures, so the next query can be generated against it
/// exactly like against a source dataset.
fn register_cuboid(
    catalog: &mut Qb4olapCatalog,
    iris: &IriPlan,
    cube: &CubeSchema,
    levels: &LevelSet,
    measures: &[String],
    dsd: &str,
    qn: usize,
) -> Result<()> {
    let aggs: Vec<AggFn> = measures
        .iter()
        .map(|m| cube.agg(m))
        .collect::<Result<_>>()?;
    let g = catalog.graph_mut();
    let dsd_t = Term::iri(dsd);
    g.insert(
        dsd_t.clone(),
        RDF_TYPE,
        Term::iri(qb("DataStructureDefinition")),
    );
    g.insert(dsd_t.clone(), qb4o("isCuboidOf"), Term::iri(iris.cube.clone()));
    let mut k = 0i64;
    for binding in &cube.dimensions {
        let Some(level) = levels.get(&binding.role) else {
            continue;
        };
        k += 1;
        let comp = Term::blank(format!("synth{qn}c{k}"));
        g.insert(dsd_t.clone(), qb("component"), comp.clone());
        g.insert(
            comp.clone(),
            qb4o("level"),
            Term::iri(iris.level(&binding.role, level)),
        );
        g.insert(comp.clone(), qb("order"), Term::lit(Literal::integer(k)));
    }
    for (j, (m, agg)) in measures.iter().zip(aggs).enumerate() {
        let comp = Term::blank(format!("synth{qn}m{}", j + 1));
        g.insert(dsd_t.clone(), qb("component"), comp.clone());
        g.insert(comp.clone(), qb("measure"), Term::iri(iris.measure(m)));
        g.insert(
            comp.clone(),
            qb4o("aggregateFunction"),
            Term::iri(qb4o(agg.qb4o_name())),
        );
        g.insert(
            comp.clone(),
            qb("order"),
            Term::lit(Literal::integer(j as i64 + 1)),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::algebra::{parse_program, typecheck_with_sources};
    use crate::qb4olap::testdata::{citizenship_model, mini_model};
    use crate::sparql::render::render;

    const BASE: &str = "http://example.org/mini";

    fn plan_for(model: &LoadedModel, text: &str) -> TypedPlan {
        let prog = parse_program(text).unwrap();
        let sources: BTreeMap<String, LevelSet> = model
            .datasets
            .iter()
            .map(|d| (d.name.clone(), d.cuboid.levels.clone()))
            .collect();
        typecheck_with_sources(&prog, &model.cube, &sources).unwrap()
    }

    fn rendered_steps_parse(compiled: &CompiledPlan) {
        for step in &compiled.steps {
            let text = render(&step.query).unwrap();
            oxigraph::sparql::SparqlEvaluator::new()
                .parse_query(&text)
                .expect("compiled step must be valid SPARQL");
        }
    }

    #[test]
    fn associative_aggregates_climb_in_one_query() {
        let model = mini_model();
        let plan = plan_for(&model, "A = ROLLUP(facts, Citizenship, All)\n");
        let compiled = compile_plan(&plan, &model, BASE).unwrap();
        assert_eq!(compiled.steps.len(), 1);
        assert_eq!(
            compiled.result_dataset,
            "http://example.org/mini/queries#out1"
        );
        assert_eq!(compiled.result_levels.get("Citizenship").unwrap(), "All");
        rendered_steps_parse(&compiled);
    }

    #[test]
    fn avg_rollups_materialize_every_level() {
        let mut model = mini_model();
        let mut cube = (*model.cube).clone();
        cube.agg_map.insert("applications".into(), AggFn::Avg);
        model.cube = Arc::new(cube);
        let plan = plan_for(&model, "A = ROLLUP(facts, Citizenship, All)\n");
        let compiled = compile_plan(&plan, &model, BASE).unwrap();
        // Country → Continent and Continent → All each get their own query,
        // because averaging a level at a time is the defined meaning.
        assert_eq!(compiled.steps.len(), 2);
        assert_eq!(
            compiled.steps[0].out_dataset,
            compiled.steps[1].in_dataset
        );
        // the intermediate cuboid is described in the catalog
        let mid_dsd = "http://example.org/mini/queries#dsd.out1";
        let levels = compiled.catalog.levels(mid_dsd);
        assert_eq!(
            compiled.catalog.name_of(&levels[0]),
            "Continent"
        );
        rendered_steps_parse(&compiled);
    }

    #[test]
    fn chains_thread_datasets_and_dice_keeps_its_input() {
        let model = mini_model();
        let plan = plan_for(
            &model,
            "A = ROLLUP(facts, Time, Year)\nB = DICE(A, #applications > 8)\nC = SLICE(B, Citizenship)\n",
        );
        let compiled = compile_plan(&plan, &model, BASE).unwrap();
        // rollup, dice, slice-rollup, projection
        assert_eq!(compiled.steps.len(), 4);
        let out1 = "http://example.org/mini/queries#out1";
        assert_eq!(compiled.steps[0].out_dataset, out1);
        assert_eq!(compiled.steps[1].in_dataset, out1);
        assert_eq!(compiled.steps[1].out_dataset, out1);
        assert_eq!(compiled.steps[2].in_dataset, out1);
        assert_ne!(compiled.steps[3].out_dataset, out1);
        assert_eq!(
            compiled.steps[3].out_dataset,
            compiled.result_dataset
        );
        // the sliced role is gone from the result shape
        assert!(!compiled.result_levels.contains_key("Citizenship"));
        assert_eq!(compiled.result_cube.dimensions.len(), 1);
        assert_eq!(compiled.result_measures, ["applications"]);
        let final_levels = compiled.catalog.levels(&compiled.result_dsd);
        assert_eq!(final_levels.len(), 1);
        assert_eq!(compiled.catalog.name_of(&final_levels[0]), "Year");
        rendered_steps_parse(&compiled);
    }

    #[test]
    fn empty_plans_copy_their_source() {
        let model = mini_model();
        let plan = TypedPlan {
            cube: Arc::clone(&model.cube),
            source: "facts".into(),
            source_levels: model.datasets[0].cuboid.levels.clone(),
            steps: Vec::new(),
        };
        let compiled = compile_plan(&plan, &model, BASE).unwrap();
        assert_eq!(compiled.steps.len(), 1);
        assert_eq!(
            compiled.steps[0].in_dataset,
            compiled.steps[0].out_dataset
        );
        assert_eq!(
            compiled.result_dataset,
            "http://example.org/mini/instances#facts"
        );
        assert_eq!(
            compiled.result_dsd,
            "http://example.org/mini/schemas#cuboid.facts"
        );
        rendered_steps_parse(&compiled);
    }

    #[test]
    fn foreign_plans_and_sources_are_rejected() {
        let mini = mini_model();
        let other = citizenship_model();
        let plan = plan_for(&mini, "A = ROLLUP(facts, Time, Year)\n");
        let err = compile_plan(&plan, &other, BASE).unwrap_err();
        assert_eq!(err.code(), "E_SCHEMA_MISMATCH");

        let plan = TypedPlan {
            cube: Arc::clone(&mini.cube),
            source: "nosuch".into(),
            source_levels: mini.datasets[0].cuboid.levels.clone(),
            steps: Vec::new(),
        };
        let err = compile_plan(&plan, &mini, BASE).unwrap_err();
        assert_eq!(err.code(), "E_UNKNOWN_SOURCE");
    }
}
