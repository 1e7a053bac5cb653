//! Typechecking of algebra programs against a cube schema, and the
//! rewrites that normalize a plan to roll-up, dice, measure-slice and
//! project operations only.

use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::ast::{AlgebraProgram, CondExpr, OpCall, SubjectPath};
use crate::error::{Error, Result};
use crate::model::condition::{CmpSubject, Comparison, Condition, ID_ATTR};
use crate::model::cube::{CubeSchema, LevelSet};
use crate::model::cuboid::Cuboid;
use crate::model::instance::RoleInstances;
use crate::model::oracle::{
    aggregate_adjacent, oracle_dice, oracle_slice, slice_hierarchy_hint, SliceTarget,
};
use crate::model::schema::{LevelPair, ALL_LEVEL};

/// One resolved operation. `Drilldown` and `SliceRole` survive only until
/// the rewrite passes; an executable plan contains the other four kinds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum PlanOp {
    /// Aggregate `role` upward, one adjacent level pair at a time.
    Rollup { role: String, path: Vec<LevelPair> },
    /// Return `role` to `target`; `path` re-derives that level from the
    /// role's level at the plan source. Removed by [`rewrite_drilldown`].
    Drilldown {
        role: String,
        target: String,
        path: Vec<LevelPair>,
    },
    /// Keep only the cells satisfying the condition.
    Dice { condition: Condition },
    /// Drop a dimension role; `all_path` is the roll-up to the top level
    /// this implies. Removed by [`rewrite_slice_dim`].
    SliceRole {
        role: String,
        all_path: Vec<LevelPair>,
    },
    /// Drop one measure column.
    SliceMeasure { measure: String },
    /// Remove a role that has been rolled up to the top level.
    ProjectRole { role: String },
}

/// An operation together with the cuboid shape it leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanStep {
    pub op: PlanOp,
    /// Level per role after this step; sliced roles are absent.
    pub levels: LevelSet,
    /// Measures still carried after this step, in cube order.
    pub measures: Vec<String>,
}

/// A typechecked program: a chain of resolved operations from one source
/// dataset. Every roll-up path in it came from the dimension's
/// `levels_path`, so execution cannot hit an unknown level or an
/// ambiguous route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypedPlan {
    #[serde(skip)]
    pub cube: Arc<CubeSchema>,
    /// Name of the dataset or cube the chain starts from.
    pub source: String,
    /// Level per role at the source.
    pub source_levels: LevelSet,
    pub steps: Vec<PlanStep>,
}

impl TypedPlan {
    /// Level set of the plan's result.
    pub fn levels(&self) -> &LevelSet {
        self.steps
            .last()
            .map(|s| &s.levels)
            .unwrap_or(&self.source_levels)
    }

    /// Measures of the plan's result, in cube order.
    pub fn measures(&self) -> Vec<String> {
        match self.steps.last() {
            Some(s) => s.measures.clone(),
            None => self.cube.measures.iter().map(|m| m.name.clone()).collect(),
        }
    }

    /// Whether both rewrite passes have run: no drill-down or
    /// dimension-slice operations remain.
    pub fn is_normalized(&self) -> bool {
        !self.steps.iter().any(|s| {
            matches!(
                s.op,
                PlanOp::Drilldown { .. } | PlanOp::SliceRole { .. }
            )
        })
    }

    /// Evaluate the plan on an in-memory cuboid with the reference
    /// semantics. The cuboid must sit at the plan's source levels.
    pub fn run_oracle(&self, source: &Cuboid, insts: &RoleInstances) -> Result<Cuboid> {
        if source.levels != self.source_levels {
            return Err(Error::SchemaMismatch {
                detail: format!(
                    "cuboid is not at the plan's source levels (expected {:?})",
                    self.source_levels
                ),
            });
        }
        let normalized;
        let plan = if self.is_normalized() {
            self
        } else {
            normalized = rewrite_slice_dim(&rewrite_drilldown(self));
            &normalized
        };
        let mut cur = source.clone();
        for step in &plan.steps {
            cur = match &step.op {
                PlanOp::Rollup { role, path } => {
                    let mut acc = cur;
                    for pair in path {
                        acc = aggregate_adjacent(&acc, role, &pair.parent, insts)?;
                    }
                    acc
                }
                PlanOp::Dice { condition } => oracle_dice(&cur, condition, insts)?,
                PlanOp::SliceMeasure { measure } => {
                    oracle_slice(&cur, SliceTarget::Measure(measure), insts)?
                }
                PlanOp::ProjectRole { role } => {
                    oracle_slice(&cur, SliceTarget::Role(role), insts)?
                }
                PlanOp::Drilldown { .. } | PlanOp::SliceRole { .. } => unreachable!(),
            };
        }
        Ok(cur)
    }
}

/// Typecheck a program against a cube, taking the cube's name as the one
/// available source dataset, sitting at the bottom level set.
pub fn typecheck(prog: &AlgebraProgram, cube: &Arc<CubeSchema>) -> Result<TypedPlan> {
    let mut sources = BTreeMap::new();
    sources.insert(cube.name.clone(), cube.bottom_level_set()?);
    typecheck_with_sources(prog, cube, &sources)
}

/// Typecheck against an explicit set of source datasets (name → level
/// set). The result is normalized: drill-downs and dimension slices are
/// already rewritten.
pub fn typecheck_with_sources(
    prog: &AlgebraProgram,
    cube: &Arc<CubeSchema>,
    sources: &BTreeMap<String, LevelSet>,
) -> Result<TypedPlan> {
    let raw = resolve_program(prog, cube, sources)?;
    Ok(rewrite_slice_dim(&rewrite_drilldown(&raw)))
}

/// Resolve names, levels and paths for every statement without rewriting:
/// the result may still contain `Drilldown` and `SliceRole` operations.
pub fn resolve_program(
    prog: &AlgebraProgram,
    cube: &Arc<CubeSchema>,
    sources: &BTreeMap<String, LevelSet>,
) -> Result<TypedPlan> {
    let mut flows: BTreeMap<String, Flow> = BTreeMap::new();
    let mut last = None;
    for stmt in &prog.statements {
        let src = stmt.op.source();
        let mut flow = match flows.get(src) {
            Some(f) => f.clone(),
            None => match sources.get(src) {
                Some(levels) => Flow::start(cube, src, levels)?,
                None => {
                    return Err(Error::UnknownSource {
                        name: src.to_string(),
                    })
                }
            },
        };
        flow.apply(cube, &stmt.op)?;
        flows.insert(stmt.name.clone(), flow);
        last = Some(&stmt.name);
    }
    let Some(last) = last else {
        return Err(Error::Syntax {
            line: 1,
            col: 1,
            detail: "empty program".to_string(),
        });
    };
    let flow = flows.remove(last).expect("just inserted");
    Ok(TypedPlan {
        cube: Arc::clone(cube),
        source: flow.root,
        source_levels: flow.root_levels,
        steps: flow.steps,
    })
}

/// Remove every `Drilldown` operation. A drill-down cannot undo
/// aggregation, so its replacement re-derives the wanted level set from
/// the plan source: dices and roll-ups on surviving roles are dropped,
/// slices (and the roll-ups feeding them) are kept, and every surviving
/// role is rolled up from its source level to where the drill-down needs
/// it.
pub fn rewrite_drilldown(plan: &TypedPlan) -> TypedPlan {
    let mut ops: Vec<PlanOp> = plan.steps.iter().map(|s| s.op.clone()).collect();
    while let Some(k) = ops
        .iter()
        .position(|o| matches!(o, PlanOp::Drilldown { .. }))
    {
        let PlanOp::Drilldown {
            role: drilled,
            path: dd_path,
            ..
        } = ops[k].clone()
        else {
            unreachable!()
        };
        let post_levels = levels_after(&plan.source_levels, &ops[..=k]);

        let mut replaced = Vec::new();
        // Per surviving role, the roll-up segments dropped from the prefix.
        let mut carried: BTreeMap<&str, Vec<LevelPair>> = BTreeMap::new();
        for op in &ops[..k] {
            match op {
                PlanOp::Rollup { role, path } => {
                    if post_levels.contains_key(role) {
                        carried
                            .entry(role)
                            .or_default()
                            .extend(path.iter().cloned());
                    } else {
                        // Feeds a later slice of that role; keep it.
                        replaced.push(op.clone());
                    }
                }
                PlanOp::Dice { .. } => {}
                PlanOp::SliceRole { .. }
                | PlanOp::SliceMeasure { .. }
                | PlanOp::ProjectRole { .. } => replaced.push(op.clone()),
                // `k` is the first drill-down, so none precede it.
                PlanOp::Drilldown { .. } => unreachable!(),
            }
        }
        // Cube order, matching the reference drill-down's re-derivation.
        for rb in &plan.cube.dimensions {
            let Some(_target) = post_levels.get(&rb.role) else {
                continue;
            };
            let path = if rb.role == drilled {
                dd_path.clone()
            } else {
                carried.remove(rb.role.as_str()).unwrap_or_default()
            };
            if !path.is_empty() {
                replaced.push(PlanOp::Rollup {
                    role: rb.role.clone(),
                    path,
                });
            }
        }
        ops.splice(..=k, replaced);
    }
    restate(plan, ops)
}

/// Rewrite every dimension slice as the roll-up to the top level it
/// implies, followed by a projection of the role.
pub fn rewrite_slice_dim(plan: &TypedPlan) -> TypedPlan {
    let mut ops = Vec::new();
    for step in &plan.steps {
        match &step.op {
            PlanOp::SliceRole { role, all_path } => {
                if !all_path.is_empty() {
                    ops.push(PlanOp::Rollup {
                        role: role.clone(),
                        path: all_path.clone(),
                    });
                }
                ops.push(PlanOp::ProjectRole { role: role.clone() });
            }
            other => ops.push(other.clone()),
        }
    }
    restate(plan, ops)
}

/// Level set after applying `ops` to `start`.
fn levels_after(start: &LevelSet, ops: &[PlanOp]) -> LevelSet {
    let mut levels = start.clone();
    for op in ops {
        match op {
            PlanOp::Rollup { role, path } => {
                if let Some(last) = path.last() {
                    levels.insert(role.clone(), last.parent.clone());
                }
            }
            PlanOp::Drilldown { role, target, .. } => {
                levels.insert(role.clone(), target.clone());
            }
            PlanOp::SliceRole { role, .. } | PlanOp::ProjectRole { role } => {
                levels.remove(role);
            }
            PlanOp::Dice { .. } | PlanOp::SliceMeasure { .. } => {}
        }
    }
    levels
}

/// Rebuild the per-step level sets and measure lists for a new op chain.
fn restate(plan: &TypedPlan, ops: Vec<PlanOp>) -> TypedPlan {
    let mut levels = plan.source_levels.clone();
    let mut measures: Vec<String> = plan.cube.measures.iter().map(|m| m.name.clone()).collect();
    let steps = ops
        .into_iter()
        .map(|op| {
            levels = levels_after(&levels, std::slice::from_ref(&op));
            if let PlanOp::SliceMeasure { measure } = &op {
                measures.retain(|m| m != measure);
            }
            PlanStep {
                op,
                levels: levels.clone(),
                measures: measures.clone(),
            }
        })
        .collect();
    TypedPlan {
        cube: Arc::clone(&plan.cube),
        source: plan.source.clone(),
        source_levels: plan.source_levels.clone(),
        steps,
    }
}

/// The state flowing through one binding chain during resolution.
#[derive(Clone)]
struct Flow {
    root: String,
    root_levels: LevelSet,
    steps: Vec<PlanStep>,
    levels: LevelSet,
    measures: Vec<String>,
    /// Effective roll-up path per role since the root, for drill-down
    /// targets that lie on a route the program already took.
    paths: BTreeMap<String, Vec<LevelPair>>,
}

impl Flow {
    fn start(cube: &CubeSchema, name: &str, levels: &LevelSet) -> Result<Flow> {
        for (role, level) in levels {
            let rb = cube.role(role)?;
            if rb.dimension.level(level).is_none() {
                return Err(Error::UnknownLevel {
                    dim: rb.dimension.name.clone(),
                    level: level.clone(),
                });
            }
        }
        for rb in &cube.dimensions {
            if !levels.contains_key(&rb.role) {
                return Err(Error::SchemaMismatch {
                    detail: format!("source `{name}` has no level for role `{}`", rb.role),
                });
            }
        }
        Ok(Flow {
            root: name.to_string(),
            root_levels: levels.clone(),
            steps: Vec::new(),
            levels: levels.clone(),
            measures: cube.measures.iter().map(|m| m.name.clone()).collect(),
            paths: BTreeMap::new(),
        })
    }

    fn push(&mut self, op: PlanOp) {
        self.steps.push(PlanStep {
            op,
            levels: self.levels.clone(),
            measures: self.measures.clone(),
        });
    }

    /// The level `role` currently sits at; errors if the role was sliced
    /// away (or never existed).
    fn level_of(&self, cube: &CubeSchema, role: &str) -> Result<String> {
        cube.role(role)?;
        self.levels
            .get(role)
            .cloned()
            .ok_or_else(|| Error::UnknownRole {
                cube: cube.name.clone(),
                role: role.to_string(),
            })
    }

    fn apply(&mut self, cube: &CubeSchema, op: &OpCall) -> Result<()> {
        match op {
            OpCall::Rollup {
                role,
                level,
                hierarchy,
                ..
            } => {
                let dim = Arc::clone(&cube.role(role)?.dimension);
                if dim.level(level).is_none() {
                    return Err(Error::UnknownLevel {
                        dim: dim.name.clone(),
                        level: level.clone(),
                    });
                }
                let current = self.level_of(cube, role)?;
                let path = match dim.levels_path(&current, level, hierarchy.as_deref()) {
                    Ok(p) => p,
                    Err(Error::NoPath { .. }) => {
                        return Err(Error::NotReachable {
                            role: role.clone(),
                            from: current,
                            to: level.clone(),
                        })
                    }
                    Err(e) => return Err(e),
                };
                self.levels.insert(role.clone(), level.clone());
                self.paths
                    .entry(role.clone())
                    .or_default()
                    .extend(path.iter().cloned());
                self.push(PlanOp::Rollup {
                    role: role.clone(),
                    path,
                });
            }
            OpCall::Drilldown {
                role,
                level: target,
                hierarchy,
                ..
            } => {
                let dim = Arc::clone(&cube.role(role)?.dimension);
                if dim.level(target).is_none() {
                    return Err(Error::UnknownLevel {
                        dim: dim.name.clone(),
                        level: target.clone(),
                    });
                }
                let current = self.level_of(cube, role)?;
                if !dim.reachable(target, &current) {
                    return Err(Error::NotReachable {
                        role: role.clone(),
                        from: target.clone(),
                        to: current,
                    });
                }
                let base = self.root_levels[role].clone();
                let taken = self.paths.get(role);
                let path = match prefix_to(taken.map_or(&[][..], |p| p), &base, target) {
                    Some(p) => p,
                    None => match dim.levels_path(&base, target, hierarchy.as_deref()) {
                        Ok(p) => p,
                        Err(Error::NoPath { .. }) => {
                            return Err(Error::NotReachable {
                                role: role.clone(),
                                from: base,
                                to: target.clone(),
                            })
                        }
                        Err(e) => return Err(e),
                    },
                };
                self.levels.insert(role.clone(), target.clone());
                self.paths.insert(role.clone(), path.clone());
                self.push(PlanOp::Drilldown {
                    role: role.clone(),
                    target: target.clone(),
                    path,
                });
            }
            OpCall::Dice { condition, .. } => {
                let cond = self.resolve_condition(cube, condition)?;
                cond.check_levels(cube, &self.levels)?;
                self.push(PlanOp::Dice { condition: cond });
            }
            OpCall::Slice { target, sigil, .. } => {
                if !sigil && cube.role(target).is_ok() {
                    let current = self.level_of(cube, target)?;
                    if self.levels.len() == 1 {
                        return Err(Error::LastDim {
                            role: target.clone(),
                        });
                    }
                    let dim = &cube.role(target)?.dimension;
                    let hint = slice_hierarchy_hint(dim, &current)?;
                    let all_path = match dim.levels_path(&current, ALL_LEVEL, hint.as_deref()) {
                        Ok(p) => p,
                        Err(Error::NoPath { .. }) => {
                            return Err(Error::NotReachable {
                                role: target.clone(),
                                from: current,
                                to: ALL_LEVEL.to_string(),
                            })
                        }
                        Err(e) => return Err(e),
                    };
                    self.levels.remove(target);
                    self.paths.remove(target);
                    self.push(PlanOp::SliceRole {
                        role: target.clone(),
                        all_path,
                    });
                } else {
                    let measure = resolve_measure(cube, &self.measures, target)?;
                    if self.measures.len() == 1 {
                        return Err(Error::LastMeasure { measure });
                    }
                    self.measures.retain(|m| *m != measure);
                    self.push(PlanOp::SliceMeasure { measure });
                }
            }
        }
        Ok(())
    }

    /// Turn a parsed condition into a checked one: measure names are
    /// resolved against the live measures, and `role.level.id` addresses
    /// the member itself when the level declares no `id` attribute.
    fn resolve_condition(&self, cube: &CubeSchema, expr: &CondExpr) -> Result<Condition> {
        Ok(match expr {
            CondExpr::And(a, b) => Condition::and(
                self.resolve_condition(cube, a)?,
                self.resolve_condition(cube, b)?,
            ),
            CondExpr::Or(a, b) => Condition::or(
                self.resolve_condition(cube, a)?,
                self.resolve_condition(cube, b)?,
            ),
            CondExpr::Not(a) => Condition::not(self.resolve_condition(cube, a)?),
            CondExpr::Cmp { subject, op, value } => {
                let subject = match subject {
                    SubjectPath::Attr {
                        role,
                        level,
                        attribute,
                    } => {
                        let dim = &cube.role(role)?.dimension;
                        let lv = dim.level(level).ok_or_else(|| Error::UnknownLevel {
                            dim: dim.name.clone(),
                            level: level.clone(),
                        })?;
                        if attribute == ID_ATTR && lv.attribute(ID_ATTR).is_none() {
                            CmpSubject::MemberId {
                                role: role.clone(),
                                level: level.clone(),
                            }
                        } else {
                            CmpSubject::Attribute {
                                role: role.clone(),
                                level: level.clone(),
                                attribute: attribute.clone(),
                            }
                        }
                    }
                    SubjectPath::Measure { name, .. } => CmpSubject::Measure {
                        measure: resolve_measure(cube, &self.measures, name)?,
                    },
                };
                Condition::Cmp(Comparison {
                    subject,
                    op: *op,
                    value: value.clone(),
                })
            }
        })
    }
}

/// The prefix of `taken` that ends at `target`, if the level lies on that
/// path (or is the base itself).
fn prefix_to(taken: &[LevelPair], base: &str, target: &str) -> Option<Vec<LevelPair>> {
    if target == base {
        return Some(Vec::new());
    }
    let end = taken.iter().position(|p| p.parent == target)?;
    Some(taken[..=end].to_vec())
}

/// Find `name` among the live measures, trying the spelled name and the
/// `#`-prefixed form: measure names may carry the sigil themselves, and
/// scripts may write it either way.
fn resolve_measure(cube: &CubeSchema, live: &[String], name: &str) -> Result<String> {
    let hashed = format!("#{name}");
    for cand in [name, hashed.as_str()] {
        if live.iter().any(|m| m == cand) {
            return Ok(cand.to_string());
        }
    }
    Err(Error::UnknownMeasure {
        cube: cube.name.clone(),
        measure: name.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_program;
    use crate::model::schema::{Attribute, DimensionSchema, Hierarchy, Level};
    use crate::model::value::{AggFn, ScalarType};
    use crate::model::{Measure, RoleBinding};

    fn level(name: &str, attrs: &[(&str, ScalarType)]) -> Level {
        Level {
            name: name.into(),
            attributes: attrs
                .iter()
                .map(|(n, t)| Attribute {
                    name: (*n).into(),
                    datatype: *t,
                })
                .collect(),
        }
    }

    fn citizenship() -> DimensionSchema {
        // Country reaches All along two routes.
        DimensionSchema {
            name: "citizenshipDim".into(),
            levels: vec![
                level("Country", &[("countryName", ScalarType::String)]),
                level("Continent", &[]),
                level("GovernmentType", &[]),
                level(ALL_LEVEL, &[]),
            ],
            order: vec![
                LevelPair::new("Country", "Continent"),
                LevelPair::new("Continent", ALL_LEVEL),
                LevelPair::new("Country", "GovernmentType"),
                LevelPair::new("GovernmentType", ALL_LEVEL),
            ],
            hierarchies: vec![
                Hierarchy {
                    name: "Geography".into(),
                    levels: vec!["Country".into(), "Continent".into(), ALL_LEVEL.into()],
                },
                Hierarchy {
                    name: "Government".into(),
                    levels: vec![
                        "Country".into(),
                        "GovernmentType".into(),
                        ALL_LEVEL.into(),
                    ],
                },
            ],
        }
    }

    fn time() -> DimensionSchema {
        DimensionSchema {
            name: "timeDim".into(),
            levels: vec![
                level("Month", &[("yearMonthNum", ScalarType::Integer)]),
                level("Year", &[]),
                level(ALL_LEVEL, &[]),
            ],
            order: vec![
                LevelPair::new("Month", "Year"),
                LevelPair::new("Year", ALL_LEVEL),
            ],
            hierarchies: vec![Hierarchy {
                name: "calendar".into(),
                levels: vec!["Month".into(), "Year".into(), ALL_LEVEL.into()],
            }],
        }
    }

    fn asylum() -> Arc<CubeSchema> {
        Arc::new(CubeSchema {
            name: "Asylum".into(),
            dimensions: vec![
                RoleBinding {
                    role: "Citizenship".into(),
                    dimension: Arc::new(citizenship()),
                    iris: None,
                },
                RoleBinding {
                    role: "Time".into(),
                    dimension: Arc::new(time()),
                    iris: None,
                },
            ],
            measures: vec![
                Measure {
                    name: "#applications".into(),
                    datatype: ScalarType::Integer,
                    iri: None,
                },
                Measure {
                    name: "avgAge".into(),
                    datatype: ScalarType::Decimal,
                    iri: None,
                },
            ],
            agg_map: [
                ("#applications".to_string(), AggFn::Sum),
                ("avgAge".to_string(), AggFn::Avg),
            ]
            .into_iter()
            .collect(),
            iri: None,
        })
    }

    fn plan_for(text: &str) -> Result<TypedPlan> {
        typecheck(&parse_program(text).unwrap(), &asylum())
    }

    #[test]
    fn rollup_resolves_the_level_path() {
        let plan = plan_for("C0 = ROLLUP(Asylum, Citizenship, Continent)\n").unwrap();
        assert_eq!(
            plan.steps[0].op,
            PlanOp::Rollup {
                role: "Citizenship".into(),
                path: vec![LevelPair::new("Country", "Continent")],
            }
        );
        assert_eq!(plan.levels()["Citizenship"], "Continent");
        assert_eq!(plan.levels()["Time"], "Month");
    }

    #[test]
    fn name_resolution_failures() {
        let umbrella = |text: &str| plan_for(text).unwrap_err().code();
        assert_eq!(umbrella("C = ROLLUP(Nope, Time, Year)\n"), "E_UNKNOWN_SOURCE");
        assert_eq!(umbrella("C = ROLLUP(Asylum, Shoe, Year)\n"), "E_UNKNOWN_ROLE");
        assert_eq!(
            umbrella("C = ROLLUP(Asylum, Citizenship, Month)\n"),
            "E_UNKNOWN_LEVEL"
        );
        assert_eq!(
            umbrella("C = ROLLUP(Asylum, Time, Year)\nD = ROLLUP(C, Time, Month)\n"),
            "E_NOT_REACHABLE"
        );
        assert_eq!(
            umbrella("C = ROLLUP(Asylum, Citizenship, All)\n"),
            "E_AMBIGUOUS_PATH"
        );
        assert!(plan_for("C = ROLLUP(Asylum, Citizenship, All, Geography)\n").is_ok());
    }

    #[test]
    fn drilldown_back_to_the_bottom_cancels_the_rollup() {
        let plan =
            plan_for("C = ROLLUP(Asylum, Time, Year)\nD = DRILLDOWN(C, Time, Month)\n").unwrap();
        assert!(plan.is_normalized());
        assert!(plan.steps.is_empty());
        assert_eq!(plan.levels(), &plan.source_levels);
    }

    #[test]
    fn drilldown_keeps_other_roles_rolled_up() {
        let plan = plan_for(
            "A = ROLLUP(Asylum, Citizenship, Continent)\n\
             B = ROLLUP(A, Time, Year)\n\
             C = DRILLDOWN(B, Time, Month)\n",
        )
        .unwrap();
        assert_eq!(
            plan.steps.iter().map(|s| s.op.clone()).collect::<Vec<_>>(),
            vec![PlanOp::Rollup {
                role: "Citizenship".into(),
                path: vec![LevelPair::new("Country", "Continent")],
            }]
        );
        assert_eq!(plan.levels()["Time"], "Month");
        assert_eq!(plan.levels()["Citizenship"], "Continent");
    }

    #[test]
    fn drilldown_to_an_unrelated_branch_is_unreachable() {
        let err = plan_for(
            "A = ROLLUP(Asylum, Citizenship, Continent)\n\
             B = DRILLDOWN(A, Citizenship, GovernmentType)\n",
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_NOT_REACHABLE");
    }

    #[test]
    fn slice_role_becomes_rollup_to_top_plus_project() {
        let plan = plan_for("C = SLICE(Asylum, Citizenship)\n").unwrap();
        assert_eq!(
            plan.steps.iter().map(|s| s.op.clone()).collect::<Vec<_>>(),
            vec![
                PlanOp::Rollup {
                    role: "Citizenship".into(),
                    path: vec![
                        LevelPair::new("Country", "Continent"),
                        LevelPair::new("Continent", ALL_LEVEL),
                    ],
                },
                PlanOp::ProjectRole {
                    role: "Citizenship".into(),
                },
            ]
        );
        assert!(!plan.levels().contains_key("Citizenship"));
    }

    #[test]
    fn slice_measure_and_its_guards() {
        let plan = plan_for("C = SLICE(Asylum, #applications)\n").unwrap();
        assert_eq!(plan.measures(), vec!["avgAge".to_string()]);
        let err = plan_for("C = SLICE(Asylum, #applications)\nD = SLICE(C, avgAge)\n")
            .unwrap_err();
        assert_eq!(err.code(), "E_LAST_MEASURE");
        let err = plan_for("C = SLICE(Asylum, Citizenship)\nD = SLICE(C, Time)\n").unwrap_err();
        assert_eq!(err.code(), "E_LAST_DIM");
    }

    #[test]
    fn dice_binds_attributes_and_measures() {
        let plan = plan_for(
            "C = DICE(Asylum, Citizenship.Country.countryName = \"Belgium\" AND applications > 80)\n",
        )
        .unwrap();
        let PlanOp::Dice { condition } = &plan.steps[0].op else {
            panic!("expected a dice step");
        };
        let subjects: Vec<_> = condition.comparisons();
        assert!(matches!(
            &subjects[0].subject,
            CmpSubject::Attribute { role, level, attribute }
                if role == "Citizenship" && level == "Country" && attribute == "countryName"
        ));
        // The bare name resolved to the sigil-carrying measure.
        assert!(matches!(
            &subjects[1].subject,
            CmpSubject::Measure { measure } if measure == "#applications"
        ));
    }

    #[test]
    fn dice_id_pseudo_attribute_addresses_the_member() {
        let plan =
            plan_for("C = DICE(Asylum, Citizenship.Country.id = \"BE\")\n").unwrap();
        let PlanOp::Dice { condition } = &plan.steps[0].op else {
            panic!("expected a dice step");
        };
        assert!(matches!(
            &condition.comparisons()[0].subject,
            CmpSubject::MemberId { role, level } if role == "Citizenship" && level == "Country"
        ));
    }

    #[test]
    fn dice_rejects_attributes_off_the_current_level() {
        let err = plan_for(
            "A = ROLLUP(Asylum, Citizenship, Continent)\n\
             B = DICE(A, Citizenship.Country.countryName = \"Belgium\")\n",
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_UNKNOWN_ATTR");
        let err = plan_for(
            "A = DICE(Asylum, Citizenship.Country.countryName = 5)\n",
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_TYPE_MISMATCH");
    }
}
