//! Surface syntax tree of the OLAP algebra.
//!
//! A program is a sequence of bindings, one per line:
//!
//! ```text
//! # comments start with `#`
//! Cb2 = ROLLUP(Cb1, Citizenship, Continent)
//! Cb3 = ROLLUP(Cb2, Sex, All)
//! Cb4 = DICE(Cb2, Destination.Country.countryName = "Belgium")
//! Cb5 = SLICE(Cb2, Destination)
//! ```
//!
//! The last binding is the program's result. Keywords are case-insensitive;
//! names are not. `ROLLUP` and `DRILLDOWN` take an optional fourth argument
//! naming the hierarchy to follow when several lead to the target level.

use std::fmt;

use crate::model::condition::CmpOp;
use crate::model::value::AttrValue;

/// Source position (1-based), kept for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// What a condition leaf talks about, before name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubjectPath {
    /// `role.level.attribute`
    Attr {
        role: String,
        level: String,
        attribute: String,
    },
    /// A measure, `#name` or bare `name`.
    Measure { name: String, sigil: bool },
}

impl fmt::Display for SubjectPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubjectPath::Attr {
                role,
                level,
                attribute,
            } => write!(f, "{role}.{level}.{attribute}"),
            SubjectPath::Measure { name, sigil } => {
                write!(f, "{}{name}", if *sigil { "#" } else { "" })
            }
        }
    }
}

/// A surface condition tree. Ranges (`a <= x <= b`) are already expanded
/// into conjunctions by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum CondExpr {
    And(Box<CondExpr>, Box<CondExpr>),
    Or(Box<CondExpr>, Box<CondExpr>),
    Not(Box<CondExpr>),
    Cmp {
        subject: SubjectPath,
        op: CmpOp,
        value: AttrValue,
    },
}

impl CondExpr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            CondExpr::Or(..) => 1,
            CondExpr::And(..) => 2,
            CondExpr::Not(..) => 3,
            CondExpr::Cmp { .. } => 4,
        };
        let paren = prec < parent;
        if paren {
            write!(f, "(")?;
        }
        match self {
            CondExpr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " OR ")?;
                b.fmt_prec(f, 2)?;
            }
            CondExpr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " AND ")?;
                b.fmt_prec(f, 3)?;
            }
            CondExpr::Not(a) => {
                write!(f, "NOT ")?;
                a.fmt_prec(f, 3)?;
            }
            CondExpr::Cmp { subject, op, value } => {
                write!(f, "{subject} {} {}", op.sparql(), render_value(value))?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn render_value(v: &AttrValue) -> String {
    match v {
        AttrValue::Num(n) => n.to_string(),
        AttrValue::Str(s) => format!("{s:?}"),
    }
}

/// One operator application.
#[derive(Debug, Clone, PartialEq)]
pub enum OpCall {
    Rollup {
        source: String,
        role: String,
        level: String,
        hierarchy: Option<String>,
    },
    Drilldown {
        source: String,
        role: String,
        level: String,
        hierarchy: Option<String>,
    },
    /// `target` is a role or a measure; which one is settled at typecheck.
    Slice {
        source: String,
        target: String,
        sigil: bool,
    },
    Dice {
        source: String,
        condition: CondExpr,
    },
}

impl OpCall {
    pub fn source(&self) -> &str {
        match self {
            OpCall::Rollup { source, .. }
            | OpCall::Drilldown { source, .. }
            | OpCall::Slice { source, .. }
            | OpCall::Dice { source, .. } => source,
        }
    }
}

/// `name = OP(...)`.
#[derive(Debug, Clone)]
pub struct Statement {
    pub name: String,
    pub op: OpCall,
    pub pos: Pos,
}

impl PartialEq for Statement {
    /// Positions are lexical metadata, so re-parsing a pretty-printed
    /// program compares equal to the original.
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.op == other.op
    }
}

/// A whole program; the last statement is the result.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgebraProgram {
    pub statements: Vec<Statement>,
}

/// Pretty-print a program in the canonical form the parser accepts.
pub fn render_program(prog: &AlgebraProgram) -> String {
    let mut out = String::new();
    for s in &prog.statements {
        out.push_str(&render_statement(s));
        out.push('\n');
    }
    out
}

fn render_statement(s: &Statement) -> String {
    match &s.op {
        OpCall::Rollup {
            source,
            role,
            level,
            hierarchy,
        } => match hierarchy {
            Some(h) => format!("{} = ROLLUP({source}, {role}, {level}, {h})", s.name),
            None => format!("{} = ROLLUP({source}, {role}, {level})", s.name),
        },
        OpCall::Drilldown {
            source,
            role,
            level,
            hierarchy,
        } => match hierarchy {
            Some(h) => format!("{} = DRILLDOWN({source}, {role}, {level}, {h})", s.name),
            None => format!("{} = DRILLDOWN({source}, {role}, {level})", s.name),
        },
        OpCall::Slice {
            source,
            target,
            sigil,
        } => format!(
            "{} = SLICE({source}, {}{target})",
            s.name,
            if *sigil { "#" } else { "" }
        ),
        OpCall::Dice { source, condition } => {
            format!("{} = DICE({source}, {condition})", s.name)
        }
    }
}
