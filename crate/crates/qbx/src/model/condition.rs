//! Boolean conditions over cells, as used by the dice operation.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::cube::{CubeSchema, LevelSet};
use crate::model::cuboid::Cuboid;
use crate::model::instance::RoleInstances;
use crate::model::value::{AttrValue, Num, ScalarType};

/// Pseudo-attribute naming a member's id, usable on any level.
pub const ID_ATTR: &str = "id";

/// What a comparison looks at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CmpSubject {
    /// An attribute of the member a coordinate names.
    Attribute {
        role: String,
        level: String,
        attribute: String,
    },
    /// The member id itself.
    MemberId { role: String, level: String },
    /// A measure value of the cell.
    Measure { measure: String },
}

/// Comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }

    pub fn sparql(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// One comparison: subject, operator, constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub subject: CmpSubject,
    pub op: CmpOp,
    pub value: AttrValue,
}

/// A condition tree over one cell of a cuboid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Condition {
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
    Cmp(Comparison),
}

impl Condition {
    pub fn and(a: Condition, b: Condition) -> Condition {
        Condition::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Condition, b: Condition) -> Condition {
        Condition::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Condition) -> Condition {
        Condition::Not(Box::new(a))
    }

    /// All comparisons of the tree, left to right.
    pub fn comparisons(&self) -> Vec<&Comparison> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a Comparison>) {
        match self {
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.walk(out);
                b.walk(out);
            }
            Condition::Not(a) => a.walk(out),
            Condition::Cmp(c) => out.push(c),
        }
    }

    /// Check the condition is well-formed against a cuboid's level set:
    /// roles/levels/attributes/measures exist, levels match the cuboid, and
    /// the compared types line up.
    pub fn check(&self, cuboid: &Cuboid) -> Result<()> {
        self.check_levels(&cuboid.cube, &cuboid.levels)
    }

    /// [`check`](Self::check) against an explicit level set, for callers that
    /// know where the data sits without having materialized it.
    pub fn check_levels(&self, cube: &CubeSchema, levels: &LevelSet) -> Result<()> {
        let at_level = |role: &str| -> Result<&str> {
            levels
                .get(role)
                .map(|s| s.as_str())
                .ok_or_else(|| Error::UnknownRole {
                    cube: cube.name.clone(),
                    role: role.to_string(),
                })
        };
        for c in self.comparisons() {
            match &c.subject {
                CmpSubject::Attribute {
                    role,
                    level,
                    attribute,
                } => {
                    let dim = &cube.role(role)?.dimension;
                    let lv = dim.level(level).ok_or_else(|| Error::UnknownLevel {
                        dim: dim.name.clone(),
                        level: level.clone(),
                    })?;
                    let at = at_level(role)?;
                    if at != level {
                        return Err(Error::UnknownAttr {
                            level: at.to_string(),
                            attribute: format!("{level}.{attribute}"),
                        });
                    }
                    let attr = lv.attribute(attribute).ok_or_else(|| Error::UnknownAttr {
                        level: level.clone(),
                        attribute: attribute.clone(),
                    })?;
                    check_type(attr.datatype, &c.value, attribute)?;
                }
                CmpSubject::MemberId { role, level } => {
                    let dim = &cube.role(role)?.dimension;
                    if dim.level(level).is_none() {
                        return Err(Error::UnknownLevel {
                            dim: dim.name.clone(),
                            level: level.clone(),
                        });
                    }
                    let at = at_level(role)?;
                    if at != level {
                        return Err(Error::UnknownAttr {
                            level: at.to_string(),
                            attribute: format!("{level}.{ID_ATTR}"),
                        });
                    }
                    if !matches!(c.value, AttrValue::Str(_)) {
                        return Err(Error::TypeMismatch {
                            detail: format!("member ids are strings, got {}", c.value),
                        });
                    }
                }
                CmpSubject::Measure { measure } => {
                    let m = cube.measure(measure)?;
                    check_type(m.datatype, &c.value, measure)?;
                }
            }
        }
        Ok(())
    }

    /// Evaluate against one cell.
    pub fn eval(
        &self,
        cube: &CubeSchema,
        key: &[String],
        values: &[Num],
        insts: &RoleInstances,
    ) -> Result<bool> {
        Ok(match self {
            Condition::And(a, b) => {
                a.eval(cube, key, values, insts)? && b.eval(cube, key, values, insts)?
            }
            Condition::Or(a, b) => {
                a.eval(cube, key, values, insts)? || b.eval(cube, key, values, insts)?
            }
            Condition::Not(a) => !a.eval(cube, key, values, insts)?,
            Condition::Cmp(c) => {
                let subject = match &c.subject {
                    CmpSubject::Attribute {
                        role,
                        level,
                        attribute,
                    } => {
                        let idx = cube.role_index(role)?;
                        let inst = insts.get(role).ok_or_else(|| Error::UnknownRole {
                            cube: cube.name.clone(),
                            role: role.clone(),
                        })?;
                        let member =
                            inst.member(level, &key[idx])
                                .ok_or_else(|| Error::InvalidModel {
                                    detail: format!(
                                        "coordinate `{}` is not a member of level `{level}`",
                                        key[idx]
                                    ),
                                })?;
                        match member.values.get(attribute) {
                            Some(v) => v.clone(),
                            // A member without the attribute never matches,
                            // mirroring an unbound variable in a query.
                            None => return Ok(false),
                        }
                    }
                    CmpSubject::MemberId { role, .. } => {
                        let idx = cube.role_index(role)?;
                        AttrValue::Str(key[idx].clone())
                    }
                    CmpSubject::Measure { measure } => {
                        let idx = cube.measure_index(measure)?;
                        AttrValue::Num(values[idx])
                    }
                };
                c.op.holds(subject.compare(&c.value)?)
            }
        })
    }
}

fn check_type(expected: ScalarType, got: &AttrValue, what: &str) -> Result<()> {
    let ok = match expected {
        ScalarType::String => matches!(got, AttrValue::Str(_)),
        ScalarType::Integer | ScalarType::Decimal => matches!(got, AttrValue::Num(_)),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::TypeMismatch {
            detail: format!("`{what}` expects a {expected:?} value, got {got}"),
        })
    }
}
