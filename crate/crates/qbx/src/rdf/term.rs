//! RDF terms, triples, and an in-memory graph with set semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// A literal. A missing datatype means `xsd:string` (or `rdf:langString`
/// when a language tag is present) — plain literals are normalized to that
/// form at parse time, so equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub value: String,
    pub lang: Option<String>,
    pub datatype: Option<String>,
}

impl Literal {
    pub fn str(value: impl Into<String>) -> Literal {
        Literal {
            value: value.into(),
            lang: None,
            datatype: None,
        }
    }

    pub fn lang(value: impl Into<String>, lang: impl Into<String>) -> Literal {
        Literal {
            value: value.into(),
            lang: Some(lang.into()),
            datatype: None,
        }
    }

    pub fn typed(value: impl Into<String>, datatype: impl Into<String>) -> Literal {
        let datatype = datatype.into();
        Literal {
            value: value.into(),
            lang: None,
            datatype: if datatype == XSD_STRING {
                None
            } else {
                Some(datatype)
            },
        }
    }

    pub fn integer(v: i64) -> Literal {
        Literal::typed(v.to_string(), XSD_INTEGER)
    }
}

/// An RDF term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Term {
        Term::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::Blank(label.into())
    }

    pub fn lit(l: Literal) -> Term {
        Term::Literal(l)
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal(l) => {
                write!(f, "{:?}", l.value)?;
                if let Some(lang) = &l.lang {
                    write!(f, "@{lang}")?;
                }
                if let Some(dt) = &l.datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

/// One triple. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

/// An RDF graph: a set of triples plus the prefix table to serialize with.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RdfGraph {
    pub triples: BTreeSet<Triple>,
    /// prefix → namespace IRI.
    pub prefixes: BTreeMap<String, String>,
}

impl RdfGraph {
    pub fn new() -> RdfGraph {
        RdfGraph::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn declare(&mut self, prefix: impl Into<String>, ns: impl Into<String>) {
        self.prefixes.insert(prefix.into(), ns.into());
    }

    pub fn insert(&mut self, subject: Term, predicate: impl Into<String>, object: Term) {
        self.triples.insert(Triple {
            subject,
            predicate: predicate.into(),
            object,
        });
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// All objects of (subject, predicate), in term order.
    pub fn objects(&self, subject: &Term, predicate: &str) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| t.subject == *subject && t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }

    pub fn object(&self, subject: &Term, predicate: &str) -> Option<&Term> {
        self.objects(subject, predicate).into_iter().next()
    }

    /// All subjects carrying (predicate, object), in term order.
    pub fn subjects_with(&self, predicate: &str, object: &Term) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| t.predicate == predicate && t.object == *object)
            .map(|t| &t.subject)
            .collect()
    }

    /// Subjects of rdf:type `class`.
    pub fn of_type(&self, class: &str) -> Vec<&Term> {
        self.subjects_with(RDF_TYPE, &Term::iri(class))
    }

    pub fn has(&self, subject: &Term, predicate: &str, object: &Term) -> bool {
        self.triples.contains(&Triple {
            subject: subject.clone(),
            predicate: predicate.to_string(),
            object: object.clone(),
        })
    }

    /// All (predicate, object) pairs of a subject.
    pub fn about(&self, subject: &Term) -> Vec<(&str, &Term)> {
        self.triples
            .iter()
            .filter(|t| t.subject == *subject)
            .map(|t| (t.predicate.as_str(), &t.object))
            .collect()
    }

    /// Copy every triple (and prefix) of `other` into this graph.
    pub fn merge(&mut self, other: &RdfGraph) {
        for (p, ns) in &other.prefixes {
            self.prefixes.entry(p.clone()).or_insert_with(|| ns.clone());
        }
        self.triples.extend(other.triples.iter().cloned());
    }
}
