//! Cube schemas: dimension roles, measures, and the aggregation map.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::schema::{DimensionSchema, ALL_LEVEL};
use crate::model::value::{AggFn, ScalarType};

/// A measure of a cube, e.g. the number of applications in an observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub name: String,
    pub datatype: ScalarType,
    /// Measure property IRI; minted from the name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
}

/// Explicit IRIs for the RDF rendering of one dimension role. Every field is
/// optional; anything left out is minted under the export base IRI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RoleIris {
    /// IRI of the dimension property itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<String>,
    /// Level name → level property IRI.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub levels: BTreeMap<String, String>,
    /// "Level.attribute" → attribute property IRI.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
    /// Hierarchy name → hierarchy IRI.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub hierarchies: BTreeMap<String, String>,
    /// "Child->Parent" → rollup property IRI.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub rollups: BTreeMap<String, String>,
    /// Namespace members of this role are minted under.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member_ns: Option<String>,
    /// Level name → namespace, overriding `member_ns` for that level.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub level_member_ns: BTreeMap<String, String>,
}

/// One dimension role of a cube: a role name bound to a dimension schema.
/// Two roles may share a schema (e.g. origin and destination geography).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleBinding {
    pub role: String,
    pub dimension: Arc<DimensionSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iris: Option<RoleIris>,
}

/// A cube schema: named dimension roles, measures, and the map assigning
/// each measure its aggregate function.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CubeSchema {
    pub name: String,
    pub dimensions: Vec<RoleBinding>,
    pub measures: Vec<Measure>,
    pub agg_map: BTreeMap<String, AggFn>,
    /// Cube IRI; minted from the name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
}

/// A point of the cuboid lattice: one level per role.
pub type LevelSet = BTreeMap<String, String>;

impl CubeSchema {
    pub fn role(&self, name: &str) -> Result<&RoleBinding> {
        self.dimensions
            .iter()
            .find(|r| r.role == name)
            .ok_or_else(|| Error::UnknownRole {
                cube: self.name.clone(),
                role: name.to_string(),
            })
    }

    /// Position of a role in the cube's declaration order (= coordinate and
    /// observation-component order).
    pub fn role_index(&self, name: &str) -> Result<usize> {
        self.dimensions
            .iter()
            .position(|r| r.role == name)
            .ok_or_else(|| Error::UnknownRole {
                cube: self.name.clone(),
                role: name.to_string(),
            })
    }

    pub fn measure(&self, name: &str) -> Result<&Measure> {
        self.measures
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMeasure {
                cube: self.name.clone(),
                measure: name.to_string(),
            })
    }

    pub fn measure_index(&self, name: &str) -> Result<usize> {
        self.measures
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMeasure {
                cube: self.name.clone(),
                measure: name.to_string(),
            })
    }

    /// Aggregate function of a measure; `E_NO_AGG` when the aggregation map
    /// has no entry for it.
    pub fn agg(&self, measure: &str) -> Result<AggFn> {
        self.agg_map
            .get(measure)
            .copied()
            .ok_or_else(|| Error::NoAgg {
                measure: measure.to_string(),
            })
    }

    /// The finest-granularity level set: every role at its bottom level.
    pub fn bottom_level_set(&self) -> Result<LevelSet> {
        self.dimensions
            .iter()
            .map(|r| Ok((r.role.clone(), r.dimension.bottom()?.to_string())))
            .collect()
    }

    /// The coarsest level set: every role at the top level.
    pub fn top_level_set(&self) -> LevelSet {
        self.dimensions
            .iter()
            .map(|r| (r.role.clone(), ALL_LEVEL.to_string()))
            .collect()
    }
}

/// Summary of a cube's cuboid lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CubeLatticeInfo {
    pub cuboid_count: u128,
    pub bottom_level_set: LevelSet,
    pub top_level_set: LevelSet,
}

/// Size and extremes of the cuboid lattice. The count is the product over
/// roles of the number of levels of the bound dimension.
pub fn lattice_info(cube: &CubeSchema) -> Result<CubeLatticeInfo> {
    let mut count: u128 = 1;
    for r in &cube.dimensions {
        count = count
            .checked_mul(r.dimension.levels.len() as u128)
            .ok_or_else(|| Error::InvalidModel {
                detail: format!("cuboid count of cube `{}` overflows", cube.name),
            })?;
    }
    Ok(CubeLatticeInfo {
        cuboid_count: count,
        bottom_level_set: cube.bottom_level_set()?,
        top_level_set: cube.top_level_set(),
    })
}
