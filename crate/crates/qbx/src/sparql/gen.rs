//! Generators turning OLAP operations into abstract queries over a QB4OLAP
//! graph.
//!
//! Roll-up and slice share one two-layer shape: an inner SELECT walks the
//! observations of a dataset, climbs rollup properties to the target level,
//! groups by the surviving coordinates, and aggregates the measures; the
//! outer CONSTRUCT writes each group back out as a fresh observation. Dice
//! instead keeps the matching observations exactly as they are.
//!
//! Everything here works on IRIs through a [`Qb4olapCatalog`], so the same
//! generators serve graphs this crate emitted and graphs published
//! elsewhere.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{
    AggFn, AttrValue, CmpOp, CmpSubject, Comparison, Condition, ScalarType, ID_ATTR,
};
use crate::qb4olap::read::scalar_from_xsd;
use crate::qb4olap::vocab::{qb, qb4o, rdfs};
use crate::qb4olap::{decode_name, encode_name, local_name, namespace_of, Qb4olapCatalog};
use crate::rdf::{Literal, Term, RDF_TYPE};

use super::query::{
    AbstractQuery, FilterExpr, FilterOperand, ObservationBind, PatTerm, QueryType, SelectItem,
    TriplePattern, VarGen,
};

/// The BIND that mints a result observation: the MD5 of the concatenated
/// coordinate terms, appended to `base`. Groups with equal coordinates get
/// equal IRIs, so re-running a query cannot duplicate observations.
pub fn mint_observation_iri(base: &str, ordered_member_vars: &[String]) -> ObservationBind {
    ObservationBind {
        base: base.to_string(),
        vars: ordered_member_vars.to_vec(),
        var: "newObs".to_string(),
    }
}

/// A measure of the cuboid under query: its property IRI, the aggregate
/// function the structure assigns it, and the numeric type it is cast to
/// before aggregating or comparing (published data often leaves observation
/// values as plain literals, which aggregates would otherwise reject).
#[derive(Debug, Clone)]
pub(crate) struct MeasureInfo {
    pub iri: String,
    pub agg: AggFn,
    pub cast: ScalarType,
}

pub(crate) fn measures_of(catalog: &Qb4olapCatalog, dsd: &str) -> Result<Vec<MeasureInfo>> {
    let cube = catalog.cube_of(dsd);
    let mut iris = catalog.measures(dsd);
    if iris.is_empty() {
        if let Some(cube) = &cube {
            iris = catalog.measures(cube);
        }
    }
    let mut out = Vec::new();
    for iri in iris {
        let agg_iri = catalog.agg_function(&iri, dsd).or_else(|e| match &cube {
            Some(c) => catalog.agg_function(&iri, c),
            None => Err(e),
        })?;
        let agg = AggFn::from_qb4o_name(local_name(&agg_iri)).ok_or_else(|| Error::Profile {
            subject: iri.clone(),
            detail: format!("unknown aggregate function <{agg_iri}>"),
        })?;
        // An average of integers is a decimal — and in a stepwise plan the
        // intermediate observations already hold decimals, so casting them
        // back to the measure's integer range would truncate them.
        let cast = if matches!(agg, AggFn::Avg) {
            ScalarType::Decimal
        } else {
            match catalog
                .graph()
                .object(&Term::iri(&iri), &rdfs("range"))
                .and_then(Term::as_iri)
                .and_then(scalar_from_xsd)
            {
                Some(ScalarType::Integer) => ScalarType::Integer,
                _ => ScalarType::Decimal,
            }
        };
        out.push(MeasureInfo { iri, agg, cast });
    }
    Ok(out)
}

/// A roll-up of `dimension` to `target_level`, writing the aggregated
/// observations into `new_dataset`. The climb must be unique; a dimension
/// whose hierarchies offer two routes is reported as ambiguous rather than
/// silently picking one.
pub fn gen_rollup_query(
    cuboid_dsd: &str,
    dataset: &str,
    dimension: &str,
    target_level: &str,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    let base = catalog.get_level(cuboid_dsd, dimension)?;
    let path = catalog.levels_path_g(&base, target_level)?;
    climb_query(cuboid_dsd, dataset, &base, &path, true, catalog, new_dataset)
}

/// A slice: dropping `target` (a dimension or a measure property) from the
/// cuboid entirely. Dropping a dimension aggregates over it, so the member
/// chain still climbs to its top to keep exactly the observations a roll-up
/// would keep; dropping a measure just reshapes.
pub fn gen_slice_query(
    cuboid_dsd: &str,
    dataset: &str,
    target: &str,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    let cube = catalog
        .cube_of(cuboid_dsd)
        .unwrap_or_else(|| cuboid_dsd.to_string());
    if catalog.dimensions(&cube).iter().any(|d| d == target) {
        if catalog.levels(cuboid_dsd).len() <= 1 {
            return Err(Error::LastDim {
                role: catalog.name_of(target),
            });
        }
        let base = catalog.get_level(cuboid_dsd, target)?;
        let path = catalog.path_to_top(&base)?;
        return climb_query(
            cuboid_dsd,
            dataset,
            &base,
            &path,
            false,
            catalog,
            new_dataset,
        );
    }
    let measures = measures_of(catalog, cuboid_dsd)?;
    if measures.iter().any(|m| m.iri == target) {
        if measures.len() <= 1 {
            return Err(Error::LastMeasure {
                measure: catalog.name_of(target),
            });
        }
        return gen_drop_measure_query(cuboid_dsd, dataset, target, catalog, new_dataset);
    }
    Err(Error::NotFound {
        detail: format!("<{target}> is neither a dimension nor a measure of <{cuboid_dsd}>"),
    })
}

/// The shared body of roll-up and dimension slice: climb `path` from
/// `base_level`, group by every other coordinate (plus the landing member
/// when `keep_target`), and aggregate the measures into a new dataset.
fn climb_query(
    cuboid_dsd: &str,
    dataset: &str,
    base_level: &str,
    path: &[(String, String)],
    keep_target: bool,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    let levels = catalog.levels(cuboid_dsd);
    let measures = measures_of(catalog, cuboid_dsd)?;
    let mut vars = VarGen::new();

    let mut inner = AbstractQuery::new(QueryType::Select);
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("obs"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(dataset),
    ));

    // Coordinates the result keeps, in component order. The climbed
    // dimension's slot is filled once the path block below names its
    // landing variable.
    let mut coords: Vec<Option<(String, String)>> = Vec::new();
    let mut base_at = None;
    for level in &levels {
        if level == base_level {
            base_at = Some(coords.len());
            coords.push(None);
            continue;
        }
        let v = vars.fresh(&catalog.name_of(level));
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("obs"),
            PatTerm::iri(level),
            PatTerm::var(&v),
        ));
        coords.push(Some((level.clone(), v)));
    }
    let base_at = base_at.ok_or_else(|| Error::NotFound {
        detail: format!("no level <{base_level}> in <{cuboid_dsd}>"),
    })?;

    let mut measure_vars = Vec::new();
    for m in &measures {
        let v = vars.fresh("m");
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("obs"),
            PatTerm::iri(&m.iri),
            PatTerm::var(&v),
        ));
        measure_vars.push(v);
    }

    // The climb: bind the base member, assert its level, then follow one
    // rollup property per step, asserting membership at every level so a
    // member shared between levels cannot leak across them.
    let mut member = vars.fresh(&catalog.name_of(base_level));
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("obs"),
        PatTerm::iri(base_level),
        PatTerm::var(&member),
    ));
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var(&member),
        PatTerm::iri(qb4o("memberOf")),
        PatTerm::iri(base_level),
    ));
    for (child, parent) in path {
        let rup = catalog
            .get_rollup(child, parent)
            .map_err(|_| Error::NoRollupPred {
                child: catalog.name_of(child),
                parent: catalog.name_of(parent),
            })?;
        let next = vars.fresh(&catalog.name_of(parent));
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var(&member),
            PatTerm::iri(&rup),
            PatTerm::var(&next),
        ));
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var(&next),
            PatTerm::iri(qb4o("memberOf")),
            PatTerm::iri(parent),
        ));
        member = next;
    }
    let target_level = path.last().map(|(_, p)| p.as_str()).unwrap_or(base_level);
    if keep_target {
        coords[base_at] = Some((target_level.to_string(), member));
    } else {
        coords.remove(base_at);
    }
    let coords: Vec<(String, String)> = coords.into_iter().flatten().collect();
    let coord_vars: Vec<String> = coords.iter().map(|(_, v)| v.clone()).collect();

    inner.result_vars.push(SelectItem::Var("newObs".into()));
    for v in &coord_vars {
        inner.result_vars.push(SelectItem::Var(v.clone()));
    }
    let mut agg_aliases = Vec::new();
    for (m, v) in measures.iter().zip(&measure_vars) {
        let alias = vars.fresh("ag");
        inner.result_vars.push(SelectItem::Agg {
            func: m.agg,
            cast: if m.agg == AggFn::Count {
                None
            } else {
                Some(m.cast)
            },
            var: v.clone(),
            alias: alias.clone(),
        });
        agg_aliases.push(alias);
    }
    inner.group_by = std::iter::once("newObs".to_string())
        .chain(coord_vars.iter().cloned())
        .collect();
    inner.binds.push(mint_observation_iri(
        &format!("{new_dataset}~"),
        &coord_vars,
    ));

    let mut outer = AbstractQuery::new(QueryType::Construct);
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("newObs"),
        PatTerm::iri(RDF_TYPE),
        PatTerm::iri(qb("Observation")),
    ));
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("newObs"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(new_dataset),
    ));
    for (level, v) in &coords {
        outer.result_template.push(TriplePattern::new(
            PatTerm::var("newObs"),
            PatTerm::iri(level),
            PatTerm::var(v),
        ));
    }
    for (m, alias) in measures.iter().zip(&agg_aliases) {
        outer.result_template.push(TriplePattern::new(
            PatTerm::var("newObs"),
            PatTerm::iri(&m.iri),
            PatTerm::var(alias),
        ));
    }
    outer.sub_queries.push(inner);
    Ok(outer)
}

/// The variable bound to one level of the diced cuboid, keyed by role name
/// in the map [`proc_condition`] consumes.
pub struct LevelVar {
    /// The level's IRI (also the predicate observations carry it under).
    pub level: String,
    /// The level's name, for matching condition subjects.
    pub name: String,
    pub var: String,
}

/// The variable bound to one measure of the diced cuboid, keyed by measure
/// name.
pub struct MeasureVar {
    pub var: String,
    pub cast: ScalarType,
}

/// A dice: keep exactly the observations satisfying `condition`, unchanged
/// and still in `dataset`. The result is the observations' full subgraph,
/// so repeating the query over its own output is a no-op.
pub fn gen_dice_query(
    cuboid_dsd: &str,
    dataset: &str,
    condition: &Condition,
    catalog: &Qb4olapCatalog,
) -> Result<AbstractQuery> {
    let mut vars = VarGen::new();
    let mut inner = AbstractQuery::new(QueryType::Select);
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::iri(RDF_TYPE),
        PatTerm::iri(qb("Observation")),
    ));
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(dataset),
    ));

    let mut level_vars: BTreeMap<String, LevelVar> = BTreeMap::new();
    for level in catalog.levels(cuboid_dsd) {
        let dim = catalog
            .dimension_of_level(&level)
            .ok_or_else(|| Error::Profile {
                subject: level.clone(),
                detail: "level belongs to no hierarchy".to_string(),
            })?;
        let name = catalog.name_of(&level);
        let v = vars.fresh(&name);
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("o"),
            PatTerm::iri(&level),
            PatTerm::var(&v),
        ));
        level_vars.insert(
            catalog.name_of(&dim),
            LevelVar {
                level,
                name,
                var: v,
            },
        );
    }

    let mut measure_vars: BTreeMap<String, MeasureVar> = BTreeMap::new();
    for m in measures_of(catalog, cuboid_dsd)? {
        let v = vars.fresh("m");
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("o"),
            PatTerm::iri(&m.iri),
            PatTerm::var(&v),
        ));
        measure_vars.insert(
            catalog.name_of(&m.iri),
            MeasureVar {
                var: v,
                cast: m.cast,
            },
        );
    }

    let (bgps, filter) = proc_condition(
        condition,
        "o",
        &level_vars,
        &measure_vars,
        &mut vars,
        catalog,
    )?;
    inner.gr_patterns.extend(bgps);
    // The catch-all comes last so the query reads base-facts-first.
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::var("p"),
        PatTerm::var("v"),
    ));
    inner.filter = filter;
    inner.result_vars = vec![
        SelectItem::Var("o".into()),
        SelectItem::Var("p".into()),
        SelectItem::Var("v".into()),
    ];

    let mut outer = AbstractQuery::new(QueryType::Construct);
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::var("p"),
        PatTerm::var("v"),
    ));
    outer.sub_queries.push(inner);
    Ok(outer)
}

/// An identity query: every observation of `dataset`, unchanged. An empty
/// plan still has to produce its source somewhere.
pub(crate) fn gen_copy_query(dataset: &str) -> AbstractQuery {
    let mut inner = AbstractQuery::new(QueryType::Select);
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::iri(RDF_TYPE),
        PatTerm::iri(qb("Observation")),
    ));
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(dataset),
    ));
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::var("p"),
        PatTerm::var("v"),
    ));
    inner.result_vars = vec![
        SelectItem::Var("o".into()),
        SelectItem::Var("p".into()),
        SelectItem::Var("v".into()),
    ];
    let mut outer = AbstractQuery::new(QueryType::Construct);
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("o"),
        PatTerm::var("p"),
        PatTerm::var("v"),
    ));
    outer.sub_queries.push(inner);
    outer
}

/// Reshapes observations into `new_dataset` without aggregation, minus one
/// measure. Coordinates are untouched, so observation identity carries over
/// one-to-one.
pub(crate) fn gen_drop_measure_query(
    cuboid_dsd: &str,
    dataset: &str,
    measure: &str,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    reshape_query(cuboid_dsd, dataset, None, Some(measure), catalog, new_dataset)
}

/// Reshapes observations into `new_dataset` without aggregation, minus the
/// level `dimension` holds in the cuboid. Meant for a coordinate that no
/// longer distinguishes anything (a dimension already rolled all the way
/// up); dropping a level with several members would collapse distinct cells
/// into one observation IRI.
pub(crate) fn gen_project_query(
    cuboid_dsd: &str,
    dataset: &str,
    dimension: &str,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    let level = catalog.get_level(cuboid_dsd, dimension)?;
    reshape_query(
        cuboid_dsd,
        dataset,
        Some(&level),
        None,
        catalog,
        new_dataset,
    )
}

fn reshape_query(
    cuboid_dsd: &str,
    dataset: &str,
    drop_level: Option<&str>,
    drop_measure: Option<&str>,
    catalog: &Qb4olapCatalog,
    new_dataset: &str,
) -> Result<AbstractQuery> {
    let mut vars = VarGen::new();
    let mut inner = AbstractQuery::new(QueryType::Select);
    inner.gr_patterns.push(TriplePattern::new(
        PatTerm::var("obs"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(dataset),
    ));

    let mut coords = Vec::new();
    for level in catalog.levels(cuboid_dsd) {
        if Some(level.as_str()) == drop_level {
            continue;
        }
        let v = vars.fresh(&catalog.name_of(&level));
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("obs"),
            PatTerm::iri(&level),
            PatTerm::var(&v),
        ));
        coords.push((level, v));
    }
    let mut kept_measures = Vec::new();
    for m in measures_of(catalog, cuboid_dsd)? {
        if Some(m.iri.as_str()) == drop_measure {
            continue;
        }
        let v = vars.fresh("m");
        inner.gr_patterns.push(TriplePattern::new(
            PatTerm::var("obs"),
            PatTerm::iri(&m.iri),
            PatTerm::var(&v),
        ));
        kept_measures.push((m.iri, v));
    }

    let coord_vars: Vec<String> = coords.iter().map(|(_, v)| v.clone()).collect();
    inner.binds.push(mint_observation_iri(
        &format!("{new_dataset}~"),
        &coord_vars,
    ));
    inner.result_vars.push(SelectItem::Var("newObs".into()));
    for v in &coord_vars {
        inner.result_vars.push(SelectItem::Var(v.clone()));
    }
    for (_, v) in &kept_measures {
        inner.result_vars.push(SelectItem::Var(v.clone()));
    }

    let mut outer = AbstractQuery::new(QueryType::Construct);
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("newObs"),
        PatTerm::iri(RDF_TYPE),
        PatTerm::iri(qb("Observation")),
    ));
    outer.result_template.push(TriplePattern::new(
        PatTerm::var("newObs"),
        PatTerm::iri(qb("dataSet")),
        PatTerm::iri(new_dataset),
    ));
    for (level, v) in &coords {
        outer.result_template.push(TriplePattern::new(
            PatTerm::var("newObs"),
            PatTerm::iri(level),
            PatTerm::var(v),
        ));
    }
    for (m, v) in &kept_measures {
        outer.result_template.push(TriplePattern::new(
            PatTerm::var("newObs"),
            PatTerm::iri(m),
            PatTerm::var(v),
        ));
    }
    outer.sub_queries.push(inner);
    Ok(outer)
}

/// Lowers a dice condition into graph patterns plus a filter expression.
///
/// Equalities that BGP matching can decide exactly — string attribute
/// values and member ids — become triple patterns when they sit in a
/// purely conjunctive position, mirroring how such conditions are written
/// by hand. Everything else (numeric comparisons, measures, anything under
/// `or`/`not`) becomes part of the FILTER, where comparison is by value
/// rather than by term.
pub fn proc_condition(
    tree: &Condition,
    obs: &str,
    level_vars: &BTreeMap<String, LevelVar>,
    measure_vars: &BTreeMap<String, MeasureVar>,
    vars: &mut VarGen,
    catalog: &Qb4olapCatalog,
) -> Result<(Vec<TriplePattern>, Option<FilterExpr>)> {
    let mut ctx = CondCx {
        obs,
        level_vars,
        measure_vars,
        vars,
        catalog,
        bgps: Vec::new(),
        attr_vars: BTreeMap::new(),
    };
    let filter = ctx.lower(tree, true)?;
    Ok((ctx.bgps, filter))
}

struct CondCx<'a> {
    obs: &'a str,
    level_vars: &'a BTreeMap<String, LevelVar>,
    measure_vars: &'a BTreeMap<String, MeasureVar>,
    vars: &'a mut VarGen,
    catalog: &'a Qb4olapCatalog,
    bgps: Vec<TriplePattern>,
    /// One attribute pattern per `(member var, attribute)`, shared by every
    /// comparison that mentions it — a range check reads naturally as one
    /// pattern and two filter terms.
    attr_vars: BTreeMap<(String, String), String>,
}

impl CondCx<'_> {
    /// `conjunctive` is true while every ancestor is an `and`: only then may
    /// a leaf hold as a required triple pattern instead of a filter term.
    fn lower(&mut self, tree: &Condition, conjunctive: bool) -> Result<Option<FilterExpr>> {
        match tree {
            Condition::And(a, b) => {
                let fa = self.lower(a, conjunctive)?;
                let fb = self.lower(b, conjunctive)?;
                Ok(match (fa, fb) {
                    (Some(fa), Some(fb)) => Some(fa.and(fb)),
                    (one, None) | (None, one) => one,
                })
            }
            Condition::Or(a, b) => {
                let fa = self
                    .lower(a, false)?
                    .expect("non-conjunctive lowering always yields an expression");
                let fb = self
                    .lower(b, false)?
                    .expect("non-conjunctive lowering always yields an expression");
                Ok(Some(fa.or(fb)))
            }
            Condition::Not(inner) => {
                let f = self
                    .lower(inner, false)?
                    .expect("non-conjunctive lowering always yields an expression");
                Ok(Some(f.not()))
            }
            Condition::Cmp(c) => self.leaf(c, conjunctive),
        }
    }

    fn leaf(&mut self, c: &Comparison, conjunctive: bool) -> Result<Option<FilterExpr>> {
        match &c.subject {
            CmpSubject::Attribute {
                role,
                level,
                attribute,
            } => self.attr_leaf(c, role, level, attribute, conjunctive),
            CmpSubject::MemberId { role, level } => self.member_leaf(c, role, level, conjunctive),
            CmpSubject::Measure { measure } => self.measure_leaf(c, measure),
        }
    }

    fn level_var(&self, role: &str, level: &str, attribute: &str) -> Result<&LevelVar> {
        let lv = self
            .level_vars
            .get(role)
            .ok_or_else(|| Error::UnknownAttr {
                level: level.to_string(),
                attribute: attribute.to_string(),
            })?;
        if lv.name != level {
            return Err(Error::UnknownAttr {
                level: lv.name.clone(),
                attribute: format!("{level}.{attribute}"),
            });
        }
        Ok(lv)
    }

    fn attr_leaf(
        &mut self,
        c: &Comparison,
        role: &str,
        level: &str,
        attribute: &str,
        conjunctive: bool,
    ) -> Result<Option<FilterExpr>> {
        let lv = self.level_var(role, level, attribute)?;
        let attr_iri = self
            .catalog
            .attributes(&lv.level)
            .into_iter()
            .find(|a| self.catalog.name_of(a) == attribute)
            .ok_or_else(|| Error::UnknownAttr {
                level: level.to_string(),
                attribute: attribute.to_string(),
            })?;
        let member_var = lv.var.clone();

        if conjunctive && c.op == CmpOp::Eq {
            if let AttrValue::Str(s) = &c.value {
                self.bgps.push(TriplePattern::new(
                    PatTerm::var(&member_var),
                    PatTerm::iri(&attr_iri),
                    PatTerm::Literal(Literal::str(s.clone())),
                ));
                return Ok(None);
            }
        }

        let key = (member_var.clone(), attr_iri.clone());
        let attr_var = match self.attr_vars.get(&key) {
            Some(v) => v.clone(),
            None => {
                let v = self.vars.fresh(attribute);
                self.bgps.push(TriplePattern::new(
                    PatTerm::var(&member_var),
                    PatTerm::iri(&attr_iri),
                    PatTerm::var(&v),
                ));
                self.attr_vars.insert(key, v.clone());
                v
            }
        };
        let right = match &c.value {
            AttrValue::Num(n) => FilterOperand::Num(*n),
            AttrValue::Str(s) => FilterOperand::Str(s.clone()),
        };
        Ok(Some(FilterExpr::Cmp {
            left: FilterOperand::Var(attr_var),
            op: c.op,
            right,
        }))
    }

    fn member_leaf(
        &mut self,
        c: &Comparison,
        role: &str,
        level: &str,
        conjunctive: bool,
    ) -> Result<Option<FilterExpr>> {
        let lv = self.level_var(role, level, ID_ATTR)?;
        let AttrValue::Str(id) = &c.value else {
            return Err(Error::TypeMismatch {
                detail: format!("member ids of `{level}` are compared against strings"),
            });
        };

        let level_term = Term::iri(&lv.level);
        let g = self.catalog.graph();
        let mut members: BTreeSet<&Term> = g
            .subjects_with(&qb4o("memberOf"), &level_term)
            .into_iter()
            .collect();
        members.extend(g.subjects_with(&qb4o("inLevel"), &level_term));
        let hit = members
            .iter()
            .filter_map(|t| t.as_iri())
            .find(|iri| decode_name(local_name(iri)) == *id);

        if conjunctive && c.op == CmpOp::Eq {
            return match hit {
                Some(member) => {
                    self.bgps.push(TriplePattern::new(
                        PatTerm::var(self.obs),
                        PatTerm::iri(&lv.level),
                        PatTerm::iri(member),
                    ));
                    Ok(None)
                }
                // No such member exists, so no observation can match.
                None => Ok(Some(FilterExpr::Const(false))),
            };
        }

        let Some(ns) = members
            .iter()
            .filter_map(|t| t.as_iri())
            .next()
            .map(namespace_of)
        else {
            // A level without members: the id comparison is decided by the
            // operator alone, and only `!=` can hold.
            return Ok(Some(FilterExpr::Const(c.op == CmpOp::Ne)));
        };
        Ok(Some(FilterExpr::Cmp {
            left: FilterOperand::IdOf {
                var: lv.var.clone(),
                ns: ns.to_string(),
            },
            op: c.op,
            right: FilterOperand::Str(encode_name(id)),
        }))
    }

    fn measure_leaf(&mut self, c: &Comparison, measure: &str) -> Result<Option<FilterExpr>> {
        let mv = self
            .measure_vars
            .get(measure)
            .ok_or_else(|| Error::NotFound {
                detail: format!("no measure `{measure}` in the cuboid"),
            })?;
        let AttrValue::Num(n) = &c.value else {
            return Err(Error::TypeMismatch {
                detail: format!("measure `{measure}` is compared against numbers"),
            });
        };
        Ok(Some(FilterExpr::Cmp {
            left: FilterOperand::Cast {
                datatype: mv.cast,
                var: mv.var.clone(),
            },
            op: c.op,
            right: FilterOperand::Num(*n),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Num, ScalarType};
    use crate::qb4olap::testdata::{citizenship_model, mini_model};
    use crate::qb4olap::{model_to_graph, IriPlan};
    use crate::sparql::render::render;

    struct Fixture {
        catalog: Qb4olapCatalog,
        iris: IriPlan,
        ds: String,
        dsd: String,
        out: String,
    }

    fn fixture(model: crate::model::LoadedModel, dataset: &str) -> Fixture {
        let base = model.base_iri.clone().unwrap();
        let catalog = Qb4olapCatalog::new(model_to_graph(&model, &base).unwrap());
        let iris = IriPlan::new(&model, &base);
        let (ds, dsd) = iris.dataset(dataset);
        let (ds, dsd) = (ds.to_string(), dsd.to_string());
        let out = format!("{}out1", iris.query_ns);
        Fixture {
            catalog,
            iris,
            ds,
            dsd,
            out,
        }
    }

    fn mini() -> Fixture {
        fixture(mini_model(), "facts")
    }

    fn memberships(q: &AbstractQuery) -> usize {
        let member_of = qb4o("memberOf");
        q.gr_patterns
            .iter()
            .filter(|p| matches!(&p.predicate, PatTerm::Iri(i) if *i == member_of))
            .count()
    }

    fn parses(q: &AbstractQuery) -> String {
        let text = render(q).unwrap();
        oxigraph::sparql::SparqlEvaluator::new()
            .parse_query(&text)
            .expect("generated text must be valid SPARQL");
        text
    }

    #[test]
    fn rollup_groups_by_the_surviving_coordinates() {
        let f = mini();
        let q = gen_rollup_query(
            &f.dsd,
            &f.ds,
            f.iris.dimension("Time"),
            f.iris.level("Time", "Year"),
            &f.catalog,
            &f.out,
        )
        .unwrap();
        let inner = &q.sub_queries[0];
        // the minted observation, the untouched country, the landing year
        assert_eq!(inner.group_by.len(), 3);
        let aggs: Vec<_> = inner
            .result_vars
            .iter()
            .filter(|i| matches!(i, SelectItem::Agg { .. }))
            .collect();
        assert_eq!(aggs.len(), 1);
        assert!(matches!(
            aggs[0],
            SelectItem::Agg {
                func: AggFn::Sum,
                cast: Some(ScalarType::Integer),
                ..
            }
        ));
        // membership asserted at both ends of the one-step climb
        assert_eq!(memberships(inner), 2);
        // one step uses the rollup property between the two levels
        let rup = f.iris.rollup("Time", "Month", "Year").unwrap().to_string();
        assert!(inner
            .gr_patterns
            .iter()
            .any(|p| matches!(&p.predicate, PatTerm::Iri(i) if *i == rup)));
        let text = parses(&q);
        assert!(text.contains("GROUP BY ?newObs"));
    }

    #[test]
    fn ambiguous_climbs_are_refused() {
        let f = fixture(citizenship_model(), "migr");
        let err = gen_rollup_query(
            &f.dsd,
            &f.ds,
            f.iris.dimension("citizenship"),
            f.iris.level("citizenship", "All"),
            &f.catalog,
            &f.out,
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_AMBIGUOUS_PATH");
    }

    #[test]
    fn missing_rollup_properties_are_reported_by_name() {
        let model = mini_model();
        let base = model.base_iri.clone().unwrap();
        let mut g = model_to_graph(&model, &base).unwrap();
        g.triples.retain(|t| t.predicate != qb4o("rollup"));
        let catalog = Qb4olapCatalog::new(g);
        let iris = IriPlan::new(&model, &base);
        let (ds, dsd) = iris.dataset("facts");
        let err = gen_rollup_query(
            dsd,
            ds,
            iris.dimension("Time"),
            iris.level("Time", "Year"),
            &catalog,
            "http://example.org/mini/queries#out1",
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_NO_ROLLUP_PRED");
        assert!(err.to_string().contains("Month"));
        assert!(err.to_string().contains("Year"));
    }

    #[test]
    fn dimension_slice_climbs_to_the_top_and_drops_the_column() {
        let f = mini();
        let q = gen_slice_query(&f.dsd, &f.ds, f.iris.dimension("Time"), &f.catalog, &f.out)
            .unwrap();
        let inner = &q.sub_queries[0];
        // only the minted observation and the country coordinate survive
        assert_eq!(inner.group_by.len(), 2);
        // Month, Year, and the top level each assert membership
        assert_eq!(memberships(inner), 3);
        // no time level appears in the template
        for level in ["Month", "Year", "All"] {
            let iri = f.iris.level("Time", level).to_string();
            assert!(!q
                .result_template
                .iter()
                .any(|t| matches!(&t.predicate, PatTerm::Iri(i) if *i == iri)));
        }
        parses(&q);
    }

    #[test]
    fn slicing_the_last_measure_or_dimension_is_refused() {
        let f = mini();
        let err = gen_slice_query(
            &f.dsd,
            &f.ds,
            f.iris.measure("applications"),
            &f.catalog,
            &f.out,
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_LAST_MEASURE");

        let c = fixture(citizenship_model(), "migr");
        let err = gen_slice_query(
            &c.dsd,
            &c.ds,
            c.iris.dimension("citizenship"),
            &c.catalog,
            &c.out,
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_LAST_DIM");

        let err =
            gen_slice_query(&f.dsd, &f.ds, "http://example.org/nothing", &f.catalog, &f.out)
                .unwrap_err();
        assert_eq!(err.code(), "E_NOT_FOUND");
    }

    fn attr_eq(value: &str) -> Condition {
        Condition::Cmp(Comparison {
            subject: CmpSubject::Attribute {
                role: "Citizenship".into(),
                level: "Country".into(),
                attribute: "countryName".into(),
            },
            op: CmpOp::Eq,
            value: AttrValue::Str(value.into()),
        })
    }

    #[test]
    fn dice_matches_strings_as_patterns_and_numbers_as_filters() {
        let f = mini();
        let cond = Condition::and(
            attr_eq("Belgium"),
            Condition::Cmp(Comparison {
                subject: CmpSubject::Measure {
                    measure: "applications".into(),
                },
                op: CmpOp::Gt,
                value: AttrValue::Num(Num::Int(8)),
            }),
        );
        let q = gen_dice_query(&f.dsd, &f.ds, &cond, &f.catalog).unwrap();
        let inner = &q.sub_queries[0];
        assert!(inner
            .gr_patterns
            .iter()
            .any(|p| matches!(&p.object, PatTerm::Literal(l) if l.value == "Belgium")));
        let last = inner.gr_patterns.last().unwrap();
        assert!(matches!(
            (&last.subject, &last.predicate, &last.object),
            (PatTerm::Var(s), PatTerm::Var(p), PatTerm::Var(v))
                if s == "o" && p == "p" && v == "v"
        ));
        let text = parses(&q);
        assert!(text.contains("CONSTRUCT {\n  ?o ?p ?v .\n}"));
        assert!(text.contains("FILTER(xsd:integer(?m"));
        assert!(text.contains("> 8"));
    }

    #[test]
    fn dice_member_equality_uses_the_member_iri() {
        let f = mini();
        let cond = Condition::Cmp(Comparison {
            subject: CmpSubject::MemberId {
                role: "Citizenship".into(),
                level: "Country".into(),
            },
            op: CmpOp::Eq,
            value: AttrValue::Str("BE".into()),
        });
        let q = gen_dice_query(&f.dsd, &f.ds, &cond, &f.catalog).unwrap();
        let inner = &q.sub_queries[0];
        let member = f.iris.member("Citizenship", "Country", "BE");
        let level = f.iris.level("Citizenship", "Country").to_string();
        assert!(inner.gr_patterns.iter().any(|p| matches!(
            (&p.subject, &p.predicate, &p.object),
            (PatTerm::Var(s), PatTerm::Iri(l), PatTerm::Iri(m))
                if s == "o" && *l == level && *m == member
        )));
        assert!(inner.filter.is_none());
        parses(&q);

        // an id no member carries cannot match anything
        let cond = Condition::Cmp(Comparison {
            subject: CmpSubject::MemberId {
                role: "Citizenship".into(),
                level: "Country".into(),
            },
            op: CmpOp::Eq,
            value: AttrValue::Str("XX".into()),
        });
        let q = gen_dice_query(&f.dsd, &f.ds, &cond, &f.catalog).unwrap();
        assert_eq!(q.sub_queries[0].filter, Some(FilterExpr::Const(false)));
    }

    #[test]
    fn dice_shares_one_attribute_pattern_across_comparisons() {
        let f = mini();
        let ge = Condition::Cmp(Comparison {
            subject: CmpSubject::Attribute {
                role: "Citizenship".into(),
                level: "Country".into(),
                attribute: "countryName".into(),
            },
            op: CmpOp::Ge,
            value: AttrValue::Str("A".into()),
        });
        let le = Condition::Cmp(Comparison {
            subject: CmpSubject::Attribute {
                role: "Citizenship".into(),
                level: "Country".into(),
                attribute: "countryName".into(),
            },
            op: CmpOp::Le,
            value: AttrValue::Str("Z".into()),
        });
        let q = gen_dice_query(&f.dsd, &f.ds, &Condition::and(ge, le), &f.catalog).unwrap();
        let inner = &q.sub_queries[0];
        let attr = f
            .iris
            .attribute("Citizenship", "Country", "countryName")
            .unwrap()
            .to_string();
        let attr_patterns = inner
            .gr_patterns
            .iter()
            .filter(|p| matches!(&p.predicate, PatTerm::Iri(i) if *i == attr))
            .count();
        assert_eq!(attr_patterns, 1);
        assert!(matches!(inner.filter, Some(FilterExpr::And(..))));
        parses(&q);
    }

    #[test]
    fn dice_rejects_unknown_attributes_and_type_confusion() {
        let f = mini();
        let cond = Condition::Cmp(Comparison {
            subject: CmpSubject::Attribute {
                role: "Citizenship".into(),
                level: "Country".into(),
                attribute: "population".into(),
            },
            op: CmpOp::Eq,
            value: AttrValue::Str("x".into()),
        });
        let err = gen_dice_query(&f.dsd, &f.ds, &cond, &f.catalog).unwrap_err();
        assert_eq!(err.code(), "E_UNKNOWN_ATTR");

        let cond = Condition::Cmp(Comparison {
            subject: CmpSubject::Measure {
                measure: "applications".into(),
            },
            op: CmpOp::Gt,
            value: AttrValue::Str("many".into()),
        });
        let err = gen_dice_query(&f.dsd, &f.ds, &cond, &f.catalog).unwrap_err();
        assert_eq!(err.code(), "E_TYPE_MISMATCH");
    }

    #[test]
    fn negated_string_equality_falls_back_to_a_filter() {
        let f = mini();
        let q = gen_dice_query(
            &f.dsd,
            &f.ds,
            &Condition::not(attr_eq("Belgium")),
            &f.catalog,
        )
        .unwrap();
        let inner = &q.sub_queries[0];
        // under NOT the equality must not become a required pattern
        assert!(!inner
            .gr_patterns
            .iter()
            .any(|p| matches!(&p.object, PatTerm::Literal(l) if l.value == "Belgium")));
        let text = parses(&q);
        assert!(text.contains("!("));
        assert!(text.contains("= \"Belgium\""));
    }
}
