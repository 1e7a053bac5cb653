//! Dimension instances: the members of each level and the rollup relations
//! between adjacent levels.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::model::schema::{DimensionSchema, ALL_LEVEL, ALL_MEMBER};
use crate::model::value::AttrValue;

/// An RDF value attached to a member beyond its typed attributes — kept so
/// imported graphs (labels in several languages, external links) survive a
/// round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtraValue {
    Iri {
        iri: String,
    },
    Literal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lang: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
}

/// One extra predicate-value pair on a member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extra {
    pub predicate: String,
    pub value: ExtraValue,
}

/// A member of a level, with its attribute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, AttrValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<Extra>,
}

impl Member {
    pub fn new(id: impl Into<String>) -> Self {
        Member {
            id: id.into(),
            values: BTreeMap::new(),
            extras: Vec::new(),
        }
    }

    pub fn with(mut self, attr: impl Into<String>, v: AttrValue) -> Self {
        self.values.insert(attr.into(), v);
        self
    }
}

/// The rollup relation between one (child, parent) level pair: which child
/// members map to which parent members. Not required to be functional — a
/// child may have several parents (a non-strict hierarchy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RollupRelation {
    pub child_level: String,
    pub parent_level: String,
    pub pairs: Vec<(String, String)>,
}

impl RollupRelation {
    /// Parents of one child member, in pair order.
    pub fn parents(&self, child: &str) -> Vec<&str> {
        self.pairs
            .iter()
            .filter(|(c, _)| c == child)
            .map(|(_, p)| p.as_str())
            .collect()
    }
}

/// An instance of a dimension schema: members per level plus the rollup
/// relations along the schema's order edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionInstance {
    #[serde(skip)]
    pub schema: Arc<DimensionSchema>,
    pub members: BTreeMap<String, Vec<Member>>,
    pub rollups: Vec<RollupRelation>,
}

impl DimensionInstance {
    pub fn new(schema: Arc<DimensionSchema>) -> Self {
        DimensionInstance {
            schema,
            members: BTreeMap::new(),
            rollups: Vec::new(),
        }
    }

    pub fn member(&self, level: &str, id: &str) -> Option<&Member> {
        self.members.get(level)?.iter().find(|m| m.id == id)
    }

    pub fn rollup(&self, child_level: &str, parent_level: &str) -> Option<&RollupRelation> {
        self.rollups
            .iter()
            .find(|r| r.child_level == child_level && r.parent_level == parent_level)
    }

    /// Make the top of the dimension explicit: the `All` level gets its
    /// single member and every order edge into `All` gets the total rollup.
    /// Repeated rollup pairs are dropped — RDF triples are a set, and the
    /// reference evaluator must count the way a query join would.
    /// Idempotent; called on every load.
    pub fn normalize(&mut self) {
        for rel in &mut self.rollups {
            let mut seen = BTreeSet::new();
            rel.pairs.retain(|p| seen.insert(p.clone()));
        }
        let schema = Arc::clone(&self.schema);
        if schema.level(ALL_LEVEL).is_some() {
            let all = self.members.entry(ALL_LEVEL.to_string()).or_default();
            if !all.iter().any(|m| m.id == ALL_MEMBER) {
                all.push(Member::new(ALL_MEMBER));
            }
        }
        for pair in &schema.order {
            if pair.parent != ALL_LEVEL {
                continue;
            }
            let ids: Vec<String> = self
                .members
                .get(&pair.child)
                .map(|ms| ms.iter().map(|m| m.id.clone()).collect())
                .unwrap_or_default();
            match self
                .rollups
                .iter_mut()
                .find(|r| r.child_level == pair.child && r.parent_level == ALL_LEVEL)
            {
                Some(rel) => {
                    let covered: BTreeSet<&String> =
                        rel.pairs.iter().map(|(c, _)| c).collect();
                    let missing: Vec<String> = ids
                        .iter()
                        .filter(|id| !covered.contains(id))
                        .cloned()
                        .collect();
                    rel.pairs
                        .extend(missing.into_iter().map(|id| (id, ALL_MEMBER.to_string())));
                }
                None => self.rollups.push(RollupRelation {
                    child_level: pair.child.clone(),
                    parent_level: ALL_LEVEL.to_string(),
                    pairs: ids
                        .into_iter()
                        .map(|id| (id, ALL_MEMBER.to_string()))
                        .collect(),
                }),
            }
        }
    }
}

/// The dimension instances of a cube, keyed by role name.
pub type RoleInstances = BTreeMap<String, Arc<DimensionInstance>>;
