//! Cuboids: partial functions from coordinates to measure tuples, located at
//! one point of the cube's lattice of level sets.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::cube::{CubeSchema, LevelSet};
use crate::model::value::Num;

/// A cuboid of a cube: the level set locating it in the lattice and a cell
/// map from coordinates (one member id per role, in role order) to measure
/// values (in measure order). A missing key is simply an empty cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cuboid {
    #[serde(skip)]
    pub cube: Arc<CubeSchema>,
    pub levels: LevelSet,
    pub cells: BTreeMap<Vec<String>, Vec<Num>>,
}

impl Cuboid {
    pub fn new(cube: Arc<CubeSchema>, levels: LevelSet) -> Result<Self> {
        check_level_set(&cube, &levels)?;
        Ok(Cuboid {
            cube,
            levels,
            cells: BTreeMap::new(),
        })
    }

    /// The level this cuboid holds for `role`.
    pub fn level_of(&self, role: &str) -> Result<&str> {
        self.levels
            .get(role)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::UnknownRole {
                cube: self.cube.name.clone(),
                role: role.to_string(),
            })
    }

    /// Add one cell; coordinates must be fresh and arities must match.
    pub fn insert_cell(&mut self, key: Vec<String>, values: Vec<Num>) -> Result<()> {
        if key.len() != self.cube.dimensions.len() || values.len() != self.cube.measures.len() {
            return Err(Error::SchemaMismatch {
                detail: format!(
                    "cell arity {}/{} does not match cube `{}` ({} roles, {} measures)",
                    key.len(),
                    values.len(),
                    self.cube.name,
                    self.cube.dimensions.len(),
                    self.cube.measures.len()
                ),
            });
        }
        if self.cells.contains_key(&key) {
            return Err(Error::DupCell {
                coords: key.join(", "),
            });
        }
        self.cells.insert(key, values);
        Ok(())
    }
}

impl PartialEq for Cuboid {
    /// Structural equality: same level set and same cell map. The schema
    /// pointer is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels && self.cells == other.cells
    }
}

/// Relative position of two level sets in the cuboid lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CuboidOrd {
    /// Every level of the first is at or below the second's.
    Le,
    /// Every level of the first is at or above the second's.
    Ge,
    /// Incomparable (or mixed directions).
    None,
}

fn check_level_set(cube: &CubeSchema, v: &LevelSet) -> Result<()> {
    for r in &cube.dimensions {
        let level = v.get(&r.role).ok_or_else(|| Error::SchemaMismatch {
            detail: format!("level set has no entry for role `{}`", r.role),
        })?;
        if r.dimension.level(level).is_none() {
            return Err(Error::SchemaMismatch {
                detail: format!(
                    "level `{level}` is not a level of dimension `{}` (role `{}`)",
                    r.dimension.name, r.role
                ),
            });
        }
    }
    if v.len() != cube.dimensions.len() {
        let stray = v
            .keys()
            .find(|k| cube.role(k).is_err())
            .cloned()
            .unwrap_or_default();
        return Err(Error::SchemaMismatch {
            detail: format!("level set names `{stray}`, which is not a role of the cube"),
        });
    }
    Ok(())
}

/// Whether two level sets are lattice neighbours: equal everywhere except
/// one role, where they are joined by a single order edge. Equal level sets
/// are not adjacent.
pub fn adjacent(cube: &CubeSchema, v1: &LevelSet, v2: &LevelSet) -> Result<bool> {
    check_level_set(cube, v1)?;
    check_level_set(cube, v2)?;
    let mut step: Option<bool> = None; // seen exactly one differing role?
    for r in &cube.dimensions {
        let a = &v1[&r.role];
        let b = &v2[&r.role];
        if a == b {
            continue;
        }
        if step.is_some() {
            return Ok(false);
        }
        step = Some(r.dimension.is_direct_pair(a, b) || r.dimension.is_direct_pair(b, a));
    }
    Ok(step.unwrap_or(false))
}

/// Compare two level sets role by role: `Le` when the first is everywhere at
/// or below the second, `Ge` for the reverse, `None` otherwise. Reachability
/// follows the dimension's order edges, so the result is the lattice order.
pub fn cuboid_order(cube: &CubeSchema, v1: &LevelSet, v2: &LevelSet) -> Result<CuboidOrd> {
    check_level_set(cube, v1)?;
    check_level_set(cube, v2)?;
    let mut le = true;
    let mut ge = true;
    for r in &cube.dimensions {
        let a = &v1[&r.role];
        let b = &v2[&r.role];
        le &= r.dimension.reachable(a, b);
        ge &= r.dimension.reachable(b, a);
    }
    Ok(match (le, ge) {
        (true, _) => CuboidOrd::Le,
        (_, true) => CuboidOrd::Ge,
        _ => CuboidOrd::None,
    })
}
