//! An abstract SPARQL query: the shape the generators build and the renderer
//! serializes. Only the small fragment the compiler needs is modeled —
//! CONSTRUCT/SELECT, basic graph patterns, one level of subquery nesting,
//! aggregate projections, BIND-minted IRIs, and a boolean filter tree.

use crate::model::{AggFn, CmpOp, Num, ScalarType};
use crate::rdf::Literal;

/// What the query produces: a graph or a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryType {
    Select,
    Construct,
}

/// One position in a triple pattern. Variables carry their bare name,
/// without the `?` sigil.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatTerm {
    Var(String),
    Iri(String),
    Literal(Literal),
}

impl PatTerm {
    pub fn var(name: impl Into<String>) -> PatTerm {
        PatTerm::Var(name.into())
    }

    pub fn iri(iri: impl Into<String>) -> PatTerm {
        PatTerm::Iri(iri.into())
    }
}

/// A triple pattern inside a WHERE block or a CONSTRUCT template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatTerm,
    pub predicate: PatTerm,
    pub object: PatTerm,
}

impl TriplePattern {
    pub fn new(subject: PatTerm, predicate: PatTerm, object: PatTerm) -> TriplePattern {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }
}

/// One projected column of a SELECT.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    /// A plain variable, projected as-is.
    Var(String),
    /// An aggregate over a variable, optionally cast first so lexical forms
    /// like `"30"` aggregate numerically: `(SUM(xsd:integer(?m)) AS ?ag)`.
    Agg {
        func: AggFn,
        cast: Option<ScalarType>,
        var: String,
        alias: String,
    },
}

/// One side of a filter comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterOperand {
    /// `?v`
    Var(String),
    /// `xsd:integer(?v)` — cast before comparing.
    Cast { datatype: ScalarType, var: String },
    /// `STRAFTER(STR(?v), "ns")` — the local name of an IRI-valued variable.
    IdOf { var: String, ns: String },
    Num(Num),
    Str(String),
}

/// A boolean filter expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Const(bool),
    Cmp {
        left: FilterOperand,
        op: CmpOp,
        right: FilterOperand,
    },
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

impl FilterExpr {
    pub fn and(self, other: FilterExpr) -> FilterExpr {
        FilterExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: FilterExpr) -> FilterExpr {
        FilterExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn not(self) -> FilterExpr {
        FilterExpr::Not(Box::new(self))
    }
}

/// A BIND that mints a fresh observation IRI from the group's coordinates:
/// `BIND(IRI(CONCAT("{base}", MD5(CONCAT(STR(?a), STR(?b))))) AS ?var)`.
/// Hashing the concatenated coordinate terms keeps the IRI stable for a
/// given cell, so re-running a step is idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationBind {
    /// Prefix the hash is appended to, e.g. `…/queries#out1~`.
    pub base: String,
    /// Coordinate variables, in component order.
    pub vars: Vec<String>,
    /// The variable the IRI is bound to.
    pub var: String,
}

/// An abstract query. `sub_queries` holds braced inner SELECTs; dataset
/// clauses (`FROM`) are only legal on the top level.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractQuery {
    pub query_type: QueryType,
    /// CONSTRUCT template triples (empty for SELECT).
    pub result_template: Vec<TriplePattern>,
    /// SELECT projection (empty for CONSTRUCT).
    pub result_vars: Vec<SelectItem>,
    /// Graphs named in FROM clauses. Top-level queries only.
    pub from_graphs: Vec<String>,
    /// Triple patterns of the WHERE block.
    pub gr_patterns: Vec<TriplePattern>,
    pub binds: Vec<ObservationBind>,
    pub filter: Option<FilterExpr>,
    /// GROUP BY variables, bare names.
    pub group_by: Vec<String>,
    pub sub_queries: Vec<AbstractQuery>,
}

impl AbstractQuery {
    pub fn new(query_type: QueryType) -> AbstractQuery {
        AbstractQuery {
            query_type,
            result_template: Vec::new(),
            result_vars: Vec::new(),
            from_graphs: Vec::new(),
            gr_patterns: Vec::new(),
            binds: Vec::new(),
            filter: None,
            group_by: Vec::new(),
            sub_queries: Vec::new(),
        }
    }
}

/// Hands out fresh variable names. Each name is the sanitized hint plus a
/// global counter, so two calls never collide even with the same hint.
#[derive(Debug, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    /// A fresh variable named after `hint` (e.g. `citizen3`). Characters
    /// outside `[A-Za-z0-9_]` are dropped; a leading digit gets a `v` prefix.
    pub fn fresh(&mut self, hint: &str) -> String {
        let mut name: String = hint
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if name.is_empty() || name.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            name.insert(0, 'v');
        }
        self.next += 1;
        format!("{name}{}", self.next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_vars_are_unique_and_sane() {
        let mut vars = VarGen::new();
        let a = vars.fresh("month");
        let b = vars.fresh("month");
        assert_ne!(a, b);
        assert_eq!(a, "month1");
        assert_eq!(b, "month2");
        // Hostile hints still yield legal variable names.
        assert_eq!(vars.fresh("4 to 17"), "v4to173");
        assert_eq!(vars.fresh("€"), "v4");
    }
}
