//! Scalar values: measure numbers, attribute values, and aggregate functions.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A numeric value that stays integer-exact as long as it can.
///
/// Integers survive SUM/MIN/MAX/COUNT unchanged; AVG (and any arithmetic on
/// mixed inputs) promotes to a decimal. Equality and ordering are numeric,
/// so `Int(5) == Dec(5.0)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Dec(f64),
}

impl Num {
    pub fn as_f64(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Dec(d) => d,
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => a == b,
            (a, b) => a.as_f64() == b.as_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => a.partial_cmp(b),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(i) => write!(f, "{i}"),
            Num::Dec(d) => write!(f, "{d}"),
        }
    }
}

/// The scalar datatypes attributes and measures can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    String,
    Integer,
    Decimal,
}

impl ScalarType {
    /// The XSD datatype IRI values of this type map to.
    pub fn xsd_iri(self) -> &'static str {
        match self {
            ScalarType::String => "http://www.w3.org/2001/XMLSchema#string",
            ScalarType::Integer => "http://www.w3.org/2001/XMLSchema#integer",
            ScalarType::Decimal => "http://www.w3.org/2001/XMLSchema#decimal",
        }
    }
}

/// An attribute value: a number or a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Num(Num),
    Str(String),
}

impl AttrValue {
    /// Numeric comparison for numbers, lexicographic for strings.
    /// Comparing a number with a string is a type error.
    pub fn compare(&self, other: &AttrValue) -> Result<Ordering> {
        match (self, other) {
            (AttrValue::Num(a), AttrValue::Num(b)) => {
                a.partial_cmp(b).ok_or_else(|| Error::TypeMismatch {
                    detail: format!("cannot order {a} against {b}"),
                })
            }
            (AttrValue::Str(a), AttrValue::Str(b)) => Ok(a.cmp(b)),
            (a, b) => Err(Error::TypeMismatch {
                detail: format!("cannot compare {a} with {b}"),
            }),
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Num(n) => write!(f, "{n}"),
            AttrValue::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// The aggregate functions a cube may attach to a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggFn {
    Sum,
    Count,
    Avg,
    Min,
    Max,
}

impl AggFn {
    /// Aggregate a non-empty slice of inputs; `None` when the slice is empty
    /// (an empty group contributes no cell).
    pub fn apply(self, values: &[Num]) -> Option<Num> {
        if values.is_empty() {
            return None;
        }
        let all_int = values.iter().all(|v| matches!(v, Num::Int(_)));
        Some(match self {
            AggFn::Count => Num::Int(values.len() as i64),
            AggFn::Sum => {
                if all_int {
                    let mut acc: i64 = 0;
                    for v in values {
                        if let Num::Int(i) = v {
                            acc += i;
                        }
                    }
                    Num::Int(acc)
                } else {
                    Num::Dec(values.iter().map(|v| v.as_f64()).sum())
                }
            }
            AggFn::Avg => {
                let sum: f64 = values.iter().map(|v| v.as_f64()).sum();
                Num::Dec(sum / values.len() as f64)
            }
            AggFn::Min => extreme(values, Ordering::Less),
            AggFn::Max => extreme(values, Ordering::Greater),
        })
    }

    /// The qb4o individual naming this function (local name only).
    pub fn qb4o_name(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Count => "count",
            AggFn::Avg => "avg",
            AggFn::Min => "min",
            AggFn::Max => "max",
        }
    }

    /// The SPARQL aggregate keyword.
    pub fn sparql_name(self) -> &'static str {
        match self {
            AggFn::Sum => "SUM",
            AggFn::Count => "COUNT",
            AggFn::Avg => "AVG",
            AggFn::Min => "MIN",
            AggFn::Max => "MAX",
        }
    }

    /// Parse a qb4o individual local name.
    pub fn from_qb4o_name(name: &str) -> Option<AggFn> {
        Some(match name {
            "sum" => AggFn::Sum,
            "count" => AggFn::Count,
            "avg" => AggFn::Avg,
            "min" => AggFn::Min,
            "max" => AggFn::Max,
            _ => return None,
        })
    }
}

fn extreme(values: &[Num], keep: Ordering) -> Num {
    let mut best = values[0];
    for v in &values[1..] {
        if v.partial_cmp(&best) == Some(keep) {
            best = *v;
        }
    }
    best
}
