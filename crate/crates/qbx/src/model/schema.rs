//! Dimension schemas: levels, attributes, the roll-up order, hierarchies.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::value::ScalarType;

/// Name of the implicit top level every dimension rolls up to.
pub const ALL_LEVEL: &str = "All";

/// Id of the single member of the top level.
pub const ALL_MEMBER: &str = "all";

/// Name given to the hierarchy synthesized when a dimension declares none.
pub const DEFAULT_HIERARCHY: &str = "default";

/// A typed attribute of a level (e.g. a country's name or a month's number).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub datatype: ScalarType,
}

/// An aggregation level of a dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<Attribute>,
}

impl Level {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// A direct (child, parent) edge of the level order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPair {
    pub child: String,
    pub parent: String,
}

impl LevelPair {
    pub fn new(child: impl Into<String>, parent: impl Into<String>) -> Self {
        LevelPair {
            child: child.into(),
            parent: parent.into(),
        }
    }
}

/// A named subset of levels forming one drill path through the dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub name: String,
    pub levels: Vec<String>,
}

/// A dimension schema: a set of levels partially ordered by (child, parent)
/// edges, with a unique bottom level and the top level [`ALL_LEVEL`], plus
/// the hierarchies that group those levels into drill paths.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DimensionSchema {
    pub name: String,
    pub levels: Vec<Level>,
    pub order: Vec<LevelPair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hierarchies: Vec<Hierarchy>,
}

impl DimensionSchema {
    pub fn level(&self, name: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.name == name)
    }

    pub fn hierarchy(&self, name: &str) -> Option<&Hierarchy> {
        self.hierarchies.iter().find(|h| h.name == name)
    }

    /// Direct parents of `level`, in declaration order of the order edges.
    pub fn parents_of(&self, level: &str) -> Vec<&str> {
        self.order
            .iter()
            .filter(|p| p.child == level)
            .map(|p| p.parent.as_str())
            .collect()
    }

    /// Direct children of `level`.
    pub fn children_of(&self, level: &str) -> Vec<&str> {
        self.order
            .iter()
            .filter(|p| p.parent == level)
            .map(|p| p.child.as_str())
            .collect()
    }

    pub fn is_direct_pair(&self, child: &str, parent: &str) -> bool {
        self.order
            .iter()
            .any(|p| p.child == child && p.parent == parent)
    }

    /// The unique level that is no edge's parent — the finest granularity.
    pub fn bottom(&self) -> Result<&str> {
        let parents: BTreeSet<&str> = self.order.iter().map(|p| p.parent.as_str()).collect();
        let mut minimal = self
            .levels
            .iter()
            .map(|l| l.name.as_str())
            .filter(|n| !parents.contains(n));
        match (minimal.next(), minimal.next()) {
            (Some(b), None) => Ok(b),
            _ => Err(Error::InvalidModel {
                detail: format!("dimension `{}` has no unique bottom level", self.name),
            }),
        }
    }

    /// Whether `to` can be reached from `from` by following order edges
    /// upward (reflexively).
    pub fn reachable(&self, from: &str, to: &str) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(l) = stack.pop() {
            if l == to {
                return true;
            }
            if seen.insert(l) {
                stack.extend(self.parents_of(l));
            }
        }
        false
    }

    /// The unique chain of (child, parent) edges leading from `from` up to
    /// `to`. With `hierarchy` given, only edges between levels of that
    /// hierarchy are followed. Fails with `E_NO_PATH` when no chain exists
    /// and `E_AMBIGUOUS_PATH` when more than one does.
    pub fn levels_path(
        &self,
        from: &str,
        to: &str,
        hierarchy: Option<&str>,
    ) -> Result<Vec<LevelPair>> {
        for l in [from, to] {
            if self.level(l).is_none() {
                return Err(Error::UnknownLevel {
                    dim: self.name.clone(),
                    level: l.to_string(),
                });
            }
        }
        let scope: Option<BTreeSet<&str>> = match hierarchy {
            Some(h) => {
                let h = self.hierarchy(h).ok_or_else(|| Error::NotFound {
                    detail: format!("hierarchy `{h}` in dimension `{}`", self.name),
                })?;
                Some(h.levels.iter().map(|l| l.as_str()).collect())
            }
            None => None,
        };
        let in_scope = |l: &str| scope.as_ref().map_or(true, |s| s.contains(l));
        if !in_scope(from) || !in_scope(to) {
            return Err(Error::NoPath {
                dim: self.name.clone(),
                from: from.to_string(),
                to: to.to_string(),
            });
        }

        // Depth-first enumeration of simple paths; two hits are enough to
        // call the route ambiguous.
        let mut found: Vec<Vec<LevelPair>> = Vec::new();
        let mut trail: Vec<LevelPair> = Vec::new();
        self.collect_paths(from, to, &in_scope, &mut trail, &mut found);
        match found.len() {
            0 => Err(Error::NoPath {
                dim: self.name.clone(),
                from: from.to_string(),
                to: to.to_string(),
            }),
            1 => Ok(found.pop().unwrap()),
            _ => Err(Error::AmbiguousPath {
                dim: self.name.clone(),
                from: from.to_string(),
                to: to.to_string(),
            }),
        }
    }

    fn collect_paths(
        &self,
        at: &str,
        to: &str,
        in_scope: &dyn Fn(&str) -> bool,
        trail: &mut Vec<LevelPair>,
        found: &mut Vec<Vec<LevelPair>>,
    ) {
        if found.len() >= 2 {
            return;
        }
        if at == to {
            found.push(trail.clone());
            return;
        }
        for parent in self.parents_of(at) {
            if !in_scope(parent) {
                continue;
            }
            trail.push(LevelPair::new(at, parent));
            self.collect_paths(parent, to, in_scope, trail, found);
            trail.pop();
        }
    }

    /// Insert the all-levels hierarchy when the dimension declares none.
    /// Returns true when something was added.
    pub fn normalize(&mut self) -> bool {
        if self.hierarchies.is_empty() {
            self.hierarchies.push(Hierarchy {
                name: DEFAULT_HIERARCHY.to_string(),
                levels: self.levels.iter().map(|l| l.name.clone()).collect(),
            });
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> DimensionSchema {
        // Country rolls up to All along two routes.
        DimensionSchema {
            name: "Geo".into(),
            levels: ["Country", "Continent", "GovernmentType", ALL_LEVEL]
                .into_iter()
                .map(|n| Level {
                    name: n.into(),
                    attributes: vec![],
                })
                .collect(),
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

    #[test]
    fn unqualified_diamond_path_is_ambiguous() {
        let d = diamond();
        let err = d.levels_path("Country", ALL_LEVEL, None).unwrap_err();
        assert_eq!(err.code(), "E_AMBIGUOUS_PATH");
    }

    #[test]
    fn hierarchy_hint_disambiguates() {
        let d = diamond();
        let path = d
            .levels_path("Country", ALL_LEVEL, Some("Geography"))
            .unwrap();
        assert_eq!(
            path,
            vec![
                LevelPair::new("Country", "Continent"),
                LevelPair::new("Continent", ALL_LEVEL),
            ]
        );
    }

    #[test]
    fn missing_route_is_no_path() {
        let d = diamond();
        let err = d.levels_path("Continent", "GovernmentType", None).unwrap_err();
        assert_eq!(err.code(), "E_NO_PATH");
    }

    #[test]
    fn bottom_is_the_unique_minimal_level() {
        assert_eq!(diamond().bottom().unwrap(), "Country");
    }
}
