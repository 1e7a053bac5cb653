//! Structural validation of schemas, instances, and cell data.
//!
//! Validation never fails fast: every rule violation is collected into a
//! [`ValidationReport`] so a model author sees all problems at once.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use crate::model::cube::CubeSchema;
use crate::model::cuboid::Cuboid;
use crate::model::instance::DimensionInstance;
use crate::model::schema::{DimensionSchema, ALL_LEVEL, ALL_MEMBER};
use crate::model::value::{AttrValue, Num, ScalarType};

/// One finding: a stable code, the offending element, and a sentence.
#[derive(Debug, Clone, Serialize)]
pub struct Issue {
    pub code: String,
    pub subject: String,
    pub message: String,
}

/// Everything validation found. `violations` make the model unusable;
/// `notices` flag defaults applied or benign oddities (e.g. a non-strict
/// hierarchy).
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub notices: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&mut self, code: &str, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Issue {
            code: code.to_string(),
            subject: subject.into(),
            message: message.into(),
        });
    }

    pub fn notice(&mut self, code: &str, subject: impl Into<String>, message: impl Into<String>) {
        self.notices.push(Issue {
            code: code.to_string(),
            subject: subject.into(),
            message: message.into(),
        });
    }

    /// Fold another report in, prefixing its subjects.
    pub fn absorb(&mut self, prefix: &str, other: ValidationReport) {
        let tag = |mut i: Issue| {
            i.subject = if i.subject.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}: {}", i.subject)
            };
            i
        };
        self.violations.extend(other.violations.into_iter().map(tag));
        self.notices.extend(other.notices.into_iter().map(tag));
    }

    /// First violation code, for terse assertions.
    pub fn first_code(&self) -> Option<&str> {
        self.violations.first().map(|i| i.code.as_str())
    }

    pub fn has_violation(&self, code: &str) -> bool {
        self.violations.iter().any(|i| i.code == code)
    }

    pub fn has_notice(&self, code: &str) -> bool {
        self.notices.iter().any(|i| i.code == code)
    }
}

/// Check a dimension schema: well-formed level references, an acyclic order
/// with a unique bottom and the top [`ALL_LEVEL`], and hierarchies that each
/// form a connected drill path from bottom to top covering every level
/// between them.
pub fn validate_dimension_schema(d: &DimensionSchema) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let subject = &d.name;

    let mut names = BTreeSet::new();
    for l in &d.levels {
        if !names.insert(l.name.as_str()) {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{}", l.name),
                "duplicate level name",
            );
        }
        let mut attrs = BTreeSet::new();
        for a in &l.attributes {
            if !attrs.insert(a.name.as_str()) {
                rep.violation(
                    "E_INVALID_MODEL",
                    format!("{subject}.{}.{}", l.name, a.name),
                    "duplicate attribute name",
                );
            }
        }
    }

    let mut order_ok = true;
    for p in &d.order {
        for end in [&p.child, &p.parent] {
            if d.level(end).is_none() {
                order_ok = false;
                rep.violation(
                    "E_INVALID_MODEL",
                    format!("{subject}.order({} -> {})", p.child, p.parent),
                    format!("order edge references unknown level `{end}`"),
                );
            }
        }
        if p.child == p.parent {
            order_ok = false;
            rep.violation(
                "E_CYCLE",
                format!("{subject}.order({} -> {})", p.child, p.parent),
                "self-loop in level order",
            );
        }
    }
    if !order_ok {
        return rep;
    }

    if let Some(cycle) = find_cycle(d) {
        rep.violation(
            "E_CYCLE",
            format!("{subject}.order"),
            format!("level order contains a cycle through `{cycle}`"),
        );
        return rep;
    }

    let parents: BTreeSet<&str> = d.order.iter().map(|p| p.parent.as_str()).collect();
    let children: BTreeSet<&str> = d.order.iter().map(|p| p.child.as_str()).collect();
    let minimal: Vec<&str> = d
        .levels
        .iter()
        .map(|l| l.name.as_str())
        .filter(|n| !parents.contains(n))
        .collect();
    let maximal: Vec<&str> = d
        .levels
        .iter()
        .map(|l| l.name.as_str())
        .filter(|n| !children.contains(n))
        .collect();
    if minimal.len() != 1 {
        rep.violation(
            "E_NO_BOTTOM",
            subject,
            format!(
                "expected one bottom level, found [{}]",
                minimal.join(", ")
            ),
        );
    }
    if maximal.len() != 1 || maximal[0] != ALL_LEVEL {
        rep.violation(
            "E_NO_TOP",
            subject,
            format!(
                "expected `{ALL_LEVEL}` as the single top level, found [{}]",
                maximal.join(", ")
            ),
        );
    }
    if !rep.is_valid() {
        return rep;
    }
    let bottom = minimal[0];

    // Hierarchies. A dimension without any gets the all-levels default; we
    // validate as if it were present and leave the insertion to normalize().
    let default_h;
    let hierarchies: &[_] = if d.hierarchies.is_empty() {
        rep.notice(
            "N_DEFAULT_HIERARCHY",
            subject,
            "no hierarchy declared; the all-levels default applies",
        );
        default_h = [crate::model::schema::Hierarchy {
            name: crate::model::schema::DEFAULT_HIERARCHY.to_string(),
            levels: d.levels.iter().map(|l| l.name.clone()).collect(),
        }];
        &default_h
    } else {
        &d.hierarchies
    };

    let mut hnames = BTreeSet::new();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for h in hierarchies {
        let hsubj = format!("{subject}.{}", h.name);
        if !hnames.insert(h.name.as_str()) {
            rep.violation("E_INVALID_MODEL", &hsubj, "duplicate hierarchy name");
            continue;
        }
        let mut member_set: BTreeSet<&str> = BTreeSet::new();
        let mut ok = true;
        for l in &h.levels {
            if d.level(l).is_none() {
                rep.violation(
                    "E_INVALID_MODEL",
                    &hsubj,
                    format!("hierarchy references unknown level `{l}`"),
                );
                ok = false;
            } else if !member_set.insert(l.as_str()) {
                rep.violation(
                    "E_INVALID_MODEL",
                    &hsubj,
                    format!("hierarchy lists level `{l}` twice"),
                );
            }
        }
        if !ok {
            continue;
        }
        covered.extend(member_set.iter().copied());
        for required in [bottom, ALL_LEVEL] {
            if !member_set.contains(required) {
                rep.violation(
                    "E_INVALID_MODEL",
                    &hsubj,
                    format!("hierarchy must contain `{required}`"),
                );
                ok = false;
            }
        }
        if ok && !connected_within(d, bottom, &member_set) {
            rep.violation(
                "E_INVALID_MODEL",
                &hsubj,
                "hierarchy levels are not connected by order edges from the bottom level",
            );
        }
    }
    for l in &d.levels {
        if !covered.contains(l.name.as_str()) {
            rep.violation(
                "E_ORPHAN_LEVEL",
                format!("{subject}.{}", l.name),
                "level belongs to no hierarchy",
            );
        }
    }

    rep
}

/// Every hierarchy level reachable from `bottom` using only edges whose both
/// ends lie in the hierarchy?
fn connected_within(d: &DimensionSchema, bottom: &str, levels: &BTreeSet<&str>) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![bottom];
    while let Some(l) = stack.pop() {
        if !seen.insert(l) {
            continue;
        }
        for p in d.parents_of(l) {
            if levels.contains(p) {
                stack.push(p);
            }
        }
    }
    levels.iter().all(|l| seen.contains(l))
}

fn find_cycle(d: &DimensionSchema) -> Option<String> {
    // Kahn's algorithm; anything left over sits on a cycle.
    let mut indeg: BTreeMap<&str, usize> =
        d.levels.iter().map(|l| (l.name.as_str(), 0)).collect();
    for p in &d.order {
        *indeg.get_mut(p.parent.as_str()).unwrap() += 1;
    }
    let mut queue: Vec<&str> = indeg
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(l, _)| *l)
        .collect();
    let mut done = 0;
    while let Some(l) = queue.pop() {
        done += 1;
        for p in d.parents_of(l) {
            let n = indeg.get_mut(p).unwrap();
            *n -= 1;
            if *n == 0 {
                queue.push(p);
            }
        }
    }
    if done == indeg.len() {
        None
    } else {
        indeg
            .into_iter()
            .find(|(_, n)| *n > 0)
            .map(|(l, _)| l.to_string())
    }
}

/// Check a cube schema: valid dimensions, unique role and measure names, and
/// an aggregate function for every measure.
pub fn validate_cube_schema(c: &CubeSchema) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let subject = &c.name;

    if c.dimensions.is_empty() {
        rep.violation("E_INVALID_MODEL", subject, "cube has no dimensions");
    }
    if c.measures.is_empty() {
        rep.violation("E_INVALID_MODEL", subject, "cube has no measures");
    }

    let mut roles = BTreeSet::new();
    for r in &c.dimensions {
        if !roles.insert(r.role.as_str()) {
            rep.violation(
                "E_DUP_ROLE",
                format!("{subject}.{}", r.role),
                "duplicate role name",
            );
        }
        rep.absorb(
            &format!("{subject}.{}", r.role),
            validate_dimension_schema(&r.dimension),
        );
    }

    let mut measures = BTreeSet::new();
    for m in &c.measures {
        if !measures.insert(m.name.as_str()) {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{}", m.name),
                "duplicate measure name",
            );
        }
        if m.datatype == ScalarType::String {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{}", m.name),
                "measures must be numeric",
            );
        }
        if !c.agg_map.contains_key(&m.name) {
            rep.violation(
                "E_NO_AGG",
                format!("{subject}.{}", m.name),
                "measure has no aggregate function",
            );
        }
    }
    for m in c.agg_map.keys() {
        if !measures.contains(m.as_str()) {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{m}"),
                "aggregation map entry for unknown measure",
            );
        }
    }

    rep
}

/// Check a dimension instance against its schema: members sit at known
/// levels with declared attribute values, and every order edge carries a
/// total rollup relation over existing members. Children with several
/// parents are legal (non-strict) but noticed as `W_NONSTRICT`.
///
/// Instances are expected to be normalized (see
/// [`DimensionInstance::normalize`]), so the top level's `all` member and
/// the total rollups into it are present like any other.
pub fn validate_instance(inst: &DimensionInstance) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let d = &inst.schema;
    let subject = &d.name;

    for (level, members) in &inst.members {
        let Some(lv) = d.level(level) else {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{level}"),
                "members declared for unknown level",
            );
            continue;
        };
        let mut ids = BTreeSet::new();
        for m in members {
            if !ids.insert(m.id.as_str()) {
                rep.violation(
                    "E_INVALID_MODEL",
                    format!("{subject}.{level}.{}", m.id),
                    "duplicate member id",
                );
            }
            for (attr, value) in &m.values {
                match lv.attribute(attr) {
                    None => rep.violation(
                        "E_UNKNOWN_ATTR",
                        format!("{subject}.{level}.{}", m.id),
                        format!("value for undeclared attribute `{attr}`"),
                    ),
                    Some(a) => {
                        let ok = match a.datatype {
                            ScalarType::String => matches!(value, AttrValue::Str(_)),
                            ScalarType::Integer => {
                                matches!(value, AttrValue::Num(Num::Int(_)))
                            }
                            ScalarType::Decimal => matches!(value, AttrValue::Num(_)),
                        };
                        if !ok {
                            rep.violation(
                                "E_TYPE_MISMATCH",
                                format!("{subject}.{level}.{}.{attr}", m.id),
                                format!("expected a {:?} value, got {value}", a.datatype),
                            );
                        }
                    }
                }
            }
        }
    }
    if let Some(all) = inst.members.get(ALL_LEVEL) {
        if all.len() != 1 || all[0].id != ALL_MEMBER {
            rep.violation(
                "E_INVALID_MODEL",
                format!("{subject}.{ALL_LEVEL}"),
                format!("the top level must hold exactly the member `{ALL_MEMBER}`"),
            );
        }
    }

    for rel in &inst.rollups {
        let rsubj = format!("{subject}.{}->{}", rel.child_level, rel.parent_level);
        if !d.is_direct_pair(&rel.child_level, &rel.parent_level) {
            rep.violation(
                "E_NOT_PARENT",
                &rsubj,
                "rollup relation does not follow an order edge",
            );
            continue;
        }
        let child_ids: BTreeSet<&str> = inst
            .members
            .get(&rel.child_level)
            .map(|ms| ms.iter().map(|m| m.id.as_str()).collect())
            .unwrap_or_default();
        let parent_ids: BTreeSet<&str> = inst
            .members
            .get(&rel.parent_level)
            .map(|ms| ms.iter().map(|m| m.id.as_str()).collect())
            .unwrap_or_default();
        let mut fan_out: BTreeMap<&str, usize> = BTreeMap::new();
        for (c, p) in &rel.pairs {
            if !child_ids.contains(c.as_str()) {
                rep.violation(
                    "E_BAD_MEMBER_REF",
                    &rsubj,
                    format!("`{c}` is not a member of level `{}`", rel.child_level),
                );
            }
            if !parent_ids.contains(p.as_str()) {
                rep.violation(
                    "E_BAD_MEMBER_REF",
                    &rsubj,
                    format!("`{p}` is not a member of level `{}`", rel.parent_level),
                );
            }
            *fan_out.entry(c.as_str()).or_default() += 1;
        }
        for id in &child_ids {
            if !fan_out.contains_key(id) {
                rep.violation(
                    "E_DANGLING_CHILD",
                    &rsubj,
                    format!("member `{id}` has no parent"),
                );
            }
        }
        for (id, n) in fan_out {
            if n > 1 {
                rep.notice(
                    "W_NONSTRICT",
                    &rsubj,
                    format!("member `{id}` has {n} parents"),
                );
            }
        }
    }

    for pair in &d.order {
        if inst.rollup(&pair.child, &pair.parent).is_none() {
            rep.violation(
                "E_MISSING_RUP",
                format!("{subject}.{}->{}", pair.child, pair.parent),
                "order edge has no rollup relation",
            );
        }
    }

    rep
}

/// Check cell data against its cube and level set: coordinates name existing
/// members at the cuboid's levels and measure values fit their datatypes.
pub fn validate_cells(
    cuboid: &Cuboid,
    insts: &crate::model::instance::RoleInstances,
) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let cube = &cuboid.cube;
    for (key, values) in &cuboid.cells {
        let subject = format!("({})", key.join(", "));
        for (i, r) in cube.dimensions.iter().enumerate() {
            let level = match cuboid.levels.get(&r.role) {
                Some(l) => l,
                None => continue,
            };
            let known = insts
                .get(&r.role)
                .map(|inst| inst.member(level, &key[i]).is_some())
                .unwrap_or(false);
            if !known {
                rep.violation(
                    "E_BAD_MEMBER_REF",
                    &subject,
                    format!("`{}` is not a member of level `{level}` (role `{}`)", key[i], r.role),
                );
            }
        }
        for (i, m) in cube.measures.iter().enumerate() {
            if m.datatype == ScalarType::Integer && matches!(values[i], Num::Dec(_)) {
                rep.violation(
                    "E_TYPE_MISMATCH",
                    &subject,
                    format!("measure `{}` is integer but holds {}", m.name, values[i]),
                );
            }
        }
    }
    rep
}
