//! Reference evaluation of the algebra, cell by cell, in memory.
//!
//! These functions define what the generated queries must compute. They are
//! deliberately naive — hash maps and loops, no indexes — so they can be
//! trusted as ground truth and diffed against query results.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::condition::Condition;
use crate::model::cube::{CubeSchema, LevelSet};
use crate::model::cuboid::Cuboid;
use crate::model::instance::{DimensionInstance, RoleInstances};
use crate::model::schema::ALL_LEVEL;

fn instance_of<'a>(insts: &'a RoleInstances, role: &str) -> Result<&'a Arc<DimensionInstance>> {
    insts.get(role).ok_or_else(|| Error::InvalidModel {
        detail: format!("no dimension instance bound for role `{role}`"),
    })
}

/// One aggregation step: move `role` from its current level to a direct
/// parent level, grouping cells by the rollup relation and applying each
/// measure's aggregate function to its group.
///
/// A child member with several parents contributes its cells to every
/// parent, exactly like the join in the generated query would.
pub fn aggregate_adjacent(
    c: &Cuboid,
    role: &str,
    parent_level: &str,
    insts: &RoleInstances,
) -> Result<Cuboid> {
    let cube = &c.cube;
    let binding = cube.role(role)?;
    let dim = &binding.dimension;
    let current = c.level_of(role)?.to_string();
    if !dim.is_direct_pair(&current, parent_level) {
        return Err(Error::NotParent {
            dim: dim.name.clone(),
            child: current,
            parent: parent_level.to_string(),
        });
    }
    let inst = instance_of(insts, role)?;
    let rel = inst
        .rollup(&current, parent_level)
        .ok_or_else(|| Error::MissingRup {
            dim: dim.name.clone(),
            child: current.clone(),
            parent: parent_level.to_string(),
        })?;
    let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
    for (child, parent) in &rel.pairs {
        parents.entry(child).or_default().push(parent);
    }

    let idx = cube.role_index(role)?;
    let mut groups: BTreeMap<Vec<String>, Vec<Vec<crate::model::value::Num>>> = BTreeMap::new();
    for (key, values) in &c.cells {
        let ups = parents
            .get(key[idx].as_str())
            .filter(|ps| !ps.is_empty())
            .ok_or_else(|| Error::DanglingChild {
                child: current.clone(),
                parent: parent_level.to_string(),
                member: key[idx].clone(),
            })?;
        for up in ups {
            let mut new_key = key.clone();
            new_key[idx] = up.to_string();
            let group = groups
                .entry(new_key)
                .or_insert_with(|| vec![Vec::new(); cube.measures.len()]);
            for (i, v) in values.iter().enumerate() {
                group[i].push(*v);
            }
        }
    }

    let mut levels = c.levels.clone();
    levels.insert(role.to_string(), parent_level.to_string());
    let mut out = Cuboid::new(Arc::clone(cube), levels)?;
    for (key, columns) in groups {
        let mut cell = Vec::with_capacity(cube.measures.len());
        for (m, column) in cube.measures.iter().zip(columns) {
            let agg = cube.agg(&m.name)?;
            // Groups are built from existing cells, so never empty.
            cell.push(agg.apply(&column).expect("non-empty group"));
        }
        out.cells.insert(key, cell);
    }
    Ok(out)
}

/// Roll a role up to `target_level`, applying [`aggregate_adjacent`] once
/// per edge of the (unique or hierarchy-qualified) path. Aggregation is
/// re-applied at every step, which matters for AVG and COUNT.
pub fn oracle_rollup(
    c: &Cuboid,
    role: &str,
    target_level: &str,
    hierarchy: Option<&str>,
    insts: &RoleInstances,
) -> Result<Cuboid> {
    let dim = &c.cube.role(role)?.dimension;
    let path = dim.levels_path(c.level_of(role)?, target_level, hierarchy)?;
    let mut acc = c.clone();
    for pair in path {
        acc = aggregate_adjacent(&acc, role, &pair.parent, insts)?;
    }
    Ok(acc)
}

/// Drill a role back down to `target_level`. Aggregation cannot be undone,
/// so the finer cells are recomputed from the bottom cuboid: every role is
/// rolled up from the bottom level to where the result needs it.
pub fn oracle_drilldown(
    c: &Cuboid,
    role: &str,
    target_level: &str,
    bottom: &Cuboid,
    insts: &RoleInstances,
) -> Result<Cuboid> {
    let cube = &c.cube;
    let dim = &cube.role(role)?.dimension;
    let current = c.level_of(role)?;
    if !dim.reachable(target_level, current) {
        return Err(Error::NoPath {
            dim: dim.name.clone(),
            from: target_level.to_string(),
            to: current.to_string(),
        });
    }
    let bottom_set = cube.bottom_level_set()?;
    for r in &cube.dimensions {
        let at = bottom.level_of(&r.role)?;
        if at != bottom_set[&r.role] {
            return Err(Error::NotBottom {
                role: r.role.clone(),
                level: at.to_string(),
                bottom: bottom_set[&r.role].clone(),
            });
        }
    }

    let mut want: LevelSet = c.levels.clone();
    want.insert(role.to_string(), target_level.to_string());
    let mut acc = bottom.clone();
    for r in &cube.dimensions {
        let target = &want[&r.role];
        if acc.level_of(&r.role)? != target {
            acc = oracle_rollup(&acc, &r.role, target, None, insts)?;
        }
    }
    Ok(acc)
}

/// Keep only the cells satisfying `cond`; the level set is unchanged.
pub fn oracle_dice(c: &Cuboid, cond: &Condition, insts: &RoleInstances) -> Result<Cuboid> {
    cond.check(c)?;
    let mut out = Cuboid::new(Arc::clone(&c.cube), c.levels.clone())?;
    for (key, values) in &c.cells {
        if cond.eval(&c.cube, key, values, insts)? {
            out.cells.insert(key.clone(), values.clone());
        }
    }
    Ok(out)
}

/// What a slice removes: a whole dimension role, or one measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceTarget<'a> {
    Role(&'a str),
    Measure(&'a str),
}

/// Remove a dimension role (after rolling it up to the top level) or a
/// measure column. The result belongs to a reduced cube schema.
pub fn oracle_slice(c: &Cuboid, target: SliceTarget<'_>, insts: &RoleInstances) -> Result<Cuboid> {
    match target {
        SliceTarget::Role(role) => {
            let cube = &c.cube;
            cube.role(role)?;
            if cube.dimensions.len() == 1 {
                return Err(Error::LastDim {
                    role: role.to_string(),
                });
            }
            let rolled = rollup_to_top(c, role, insts)?;
            let idx = cube.role_index(role)?;
            let reduced = Arc::new(without_role(cube, role));
            let mut levels = rolled.levels.clone();
            levels.remove(role);
            let mut out = Cuboid::new(reduced, levels)?;
            for (key, values) in &rolled.cells {
                let mut new_key = key.clone();
                new_key.remove(idx);
                out.insert_cell(new_key, values.clone())?;
            }
            Ok(out)
        }
        SliceTarget::Measure(measure) => {
            let cube = &c.cube;
            let idx = cube.measure_index(measure)?;
            if cube.measures.len() == 1 {
                return Err(Error::LastMeasure {
                    measure: measure.to_string(),
                });
            }
            let reduced = Arc::new(without_measure(cube, measure));
            let mut out = Cuboid::new(reduced, c.levels.clone())?;
            for (key, values) in &c.cells {
                let mut new_values = values.clone();
                new_values.remove(idx);
                out.cells.insert(key.clone(), new_values);
            }
            Ok(out)
        }
    }
}

/// Roll `role` up to the top level for a slice, following the hierarchy
/// [`slice_hierarchy_hint`] picks when the direct route is ambiguous.
pub fn rollup_to_top(c: &Cuboid, role: &str, insts: &RoleInstances) -> Result<Cuboid> {
    let dim = &c.cube.role(role)?.dimension;
    let hint = slice_hierarchy_hint(dim, c.level_of(role)?)?;
    oracle_rollup(c, role, ALL_LEVEL, hint.as_deref(), insts)
}

/// The hierarchy a slice's implicit roll-up to the top follows. `None` when
/// the unqualified route is already unique; otherwise the first hierarchy in
/// name order with a unique route. Deterministic, so the reference evaluator
/// and query generation make the same choice.
pub fn slice_hierarchy_hint(
    dim: &crate::model::schema::DimensionSchema,
    from: &str,
) -> Result<Option<String>> {
    match dim.levels_path(from, ALL_LEVEL, None) {
        Ok(_) => Ok(None),
        Err(Error::AmbiguousPath { .. }) => {
            let mut names: Vec<&str> = dim.hierarchies.iter().map(|h| h.name.as_str()).collect();
            names.sort_unstable();
            for name in names {
                if dim.levels_path(from, ALL_LEVEL, Some(name)).is_ok() {
                    return Ok(Some(name.to_string()));
                }
            }
            Err(Error::AmbiguousPath {
                dim: dim.name.clone(),
                from: from.to_string(),
                to: ALL_LEVEL.to_string(),
            })
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn without_role(cube: &CubeSchema, role: &str) -> CubeSchema {
    CubeSchema {
        name: cube.name.clone(),
        dimensions: cube
            .dimensions
            .iter()
            .filter(|r| r.role != role)
            .cloned()
            .collect(),
        measures: cube.measures.clone(),
        agg_map: cube.agg_map.clone(),
        iri: None,
    }
}

pub(crate) fn without_measure(cube: &CubeSchema, measure: &str) -> CubeSchema {
    CubeSchema {
        name: cube.name.clone(),
        dimensions: cube.dimensions.clone(),
        measures: cube
            .measures
            .iter()
            .filter(|m| m.name != measure)
            .cloned()
            .collect(),
        agg_map: cube
            .agg_map
            .iter()
            .filter(|(k, _)| k.as_str() != measure)
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        iri: None,
    }
}
