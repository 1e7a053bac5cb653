//! A Turtle subset: enough to read and write QB4OLAP graphs.
//!
//! Supported: `@prefix`/`PREFIX` directives, `a`, `;`/`,` lists, labelled
//! and anonymous (`[ … ]`) blank nodes, plain/typed/language-tagged string
//! literals, and bare numeric/boolean literals. Serialization is
//! deterministic: sorted prefixes, sorted subjects, types first, canonical
//! blank labels — the same graph always yields the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rdf::term::{
    Literal, RdfGraph, Term, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER,
};

/// Parse a Turtle document.
pub fn parse_turtle(text: &str) -> Result<RdfGraph> {
    Parser::new(text).document()
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    graph: RdfGraph,
    anon: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            graph: RdfGraph::new(),
            anon: 0,
            _src: src,
        }
    }

    fn fail(&self, detail: impl Into<String>) -> Error {
        Error::Turtle {
            line: self.line,
            col: self.col,
            detail: detail.into(),
        }
    }

    fn err<T>(&self, detail: impl Into<String>) -> Result<T> {
        Err(self.fail(detail))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        if self.eat(want) {
            Ok(())
        } else {
            self.err(format!(
                "expected `{want}`, found {}",
                self.peek()
                    .map_or("end of input".to_string(), |c| format!("`{c}`"))
            ))
        }
    }

    /// Skip whitespace and `#` comments.
    fn skip(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    /// Does the input continue with `word` followed by a non-name char?
    fn at_keyword(&self, word: &str) -> bool {
        let mut i = self.pos;
        for w in word.chars() {
            if self.chars.get(i) != Some(&w) {
                return false;
            }
            i += 1;
        }
        !matches!(self.chars.get(i), Some(c) if is_name_char(*c))
    }

    fn take_keyword(&mut self, word: &str) {
        for _ in word.chars() {
            self.bump();
        }
    }

    fn document(mut self) -> Result<RdfGraph> {
        loop {
            self.skip();
            if self.peek().is_none() {
                return Ok(self.graph);
            }
            if self.at_keyword("@prefix") || self.at_keyword("PREFIX") || self.at_keyword("prefix")
            {
                self.directive()?;
            } else if self.at_keyword("@base") || self.at_keyword("BASE") {
                return self.err("base directives are not supported");
            } else {
                self.triples()?;
            }
        }
    }

    fn directive(&mut self) -> Result<()> {
        let sparql_style = !self.eat('@');
        // consume the keyword itself
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.bump();
        }
        self.skip();
        let prefix = self.pname_prefix()?;
        self.expect(':')?;
        self.skip();
        let ns = self.iri_ref()?;
        self.graph.declare(prefix, ns);
        self.skip();
        if !sparql_style {
            self.expect('.')?;
        } else {
            // SPARQL-style PREFIX takes no dot, but tolerate one.
            self.eat('.');
        }
        Ok(())
    }

    fn triples(&mut self) -> Result<()> {
        let subject = match self.peek() {
            Some('[') => {
                let b = self.blank_property_list()?;
                self.skip();
                // A lone `[ … ] .` is legal; predicates may also follow.
                if self.eat('.') {
                    return Ok(());
                }
                b
            }
            _ => self.subject()?,
        };
        self.predicate_object_list(&subject)?;
        self.skip();
        self.expect('.')
    }

    fn subject(&mut self) -> Result<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') => self.blank_label(),
            Some(c) if is_pname_start(c) || c == ':' => self.pname(),
            _ => self.err("expected a subject"),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<()> {
        loop {
            self.skip();
            let predicate = self.verb()?;
            loop {
                self.skip();
                let object = self.object()?;
                self.graph
                    .insert(subject.clone(), predicate.clone(), object);
                self.skip();
                if !self.eat(',') {
                    break;
                }
            }
            if !self.eat(';') {
                return Ok(());
            }
            self.skip();
            // Trailing `;` before `.` or `]` is legal.
            if matches!(self.peek(), Some('.') | Some(']')) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<String> {
        if self.at_keyword("a") {
            self.take_keyword("a");
            return Ok(RDF_TYPE.to_string());
        }
        match self.peek() {
            Some('<') => self.iri_ref(),
            Some(c) if is_pname_start(c) || c == ':' => match self.pname()? {
                Term::Iri(i) => Ok(i),
                _ => unreachable!(),
            },
            _ => self.err("expected a predicate"),
        }
    }

    fn object(&mut self) -> Result<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('"') => self.string_literal(),
            Some('[') => self.blank_property_list(),
            Some('_') => self.blank_label(),
            Some(c) if c == '+' || c == '-' || c.is_ascii_digit() => self.numeric_literal(),
            Some(_) if self.at_keyword("true") => {
                self.take_keyword("true");
                Ok(Term::lit(Literal::typed("true", XSD_BOOLEAN)))
            }
            Some(_) if self.at_keyword("false") => {
                self.take_keyword("false");
                Ok(Term::lit(Literal::typed("false", XSD_BOOLEAN)))
            }
            Some(c) if is_pname_start(c) || c == ':' => self.pname(),
            _ => self.err("expected an object"),
        }
    }

    fn blank_property_list(&mut self) -> Result<Term> {
        self.expect('[')?;
        let label = format!("anon{}", self.anon);
        self.anon += 1;
        let node = Term::blank(label);
        self.skip();
        if !self.eat(']') {
            self.predicate_object_list(&node)?;
            self.skip();
            self.expect(']')?;
        }
        Ok(node)
    }

    fn blank_label(&mut self) -> Result<Term> {
        self.expect('_')?;
        self.expect(':')?;
        let mut label = String::new();
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            label.push(self.bump().unwrap());
        }
        if label.is_empty() {
            return self.err("empty blank node label");
        }
        Ok(Term::blank(label))
    }

    fn iri_ref(&mut self) -> Result<String> {
        self.expect('<')?;
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(iri),
                Some(c) if c.is_whitespace() => {
                    return self.err("whitespace inside IRI");
                }
                Some(c) => iri.push(c),
                None => return self.err("unterminated IRI"),
            }
        }
    }

    fn pname_prefix(&mut self) -> Result<String> {
        let mut p = String::new();
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            p.push(self.bump().unwrap());
        }
        Ok(p)
    }

    fn pname(&mut self) -> Result<Term> {
        let prefix = self.pname_prefix()?;
        self.expect(':')?;
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                local.push(self.bump().unwrap());
            } else if c == '.' {
                // A dot belongs to the name only when a name char follows;
                // otherwise it terminates the statement.
                if matches!(self.chars.get(self.pos + 1), Some(n) if is_name_char(*n) || *n == '.')
                {
                    local.push(self.bump().unwrap());
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        let ns = self
            .graph
            .prefixes
            .get(&prefix)
            .ok_or(Error::Turtle {
                line: self.line,
                col: self.col,
                detail: format!("undeclared prefix `{prefix}:`"),
            })?
            .clone();
        Ok(Term::Iri(format!("{ns}{local}")))
    }

    fn string_literal(&mut self) -> Result<Term> {
        self.expect('"')?;
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = self.bump().ok_or_else(|| self.fail("unterminated escape"))?;
                    match c {
                        't' => value.push('\t'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        'b' => value.push('\u{8}'),
                        'f' => value.push('\u{c}'),
                        '"' => value.push('"'),
                        '\'' => value.push('\''),
                        '\\' => value.push('\\'),
                        'u' => value.push(self.unicode_escape(4)?),
                        'U' => value.push(self.unicode_escape(8)?),
                        other => return self.err(format!("unknown escape `\\{other}`")),
                    }
                }
                Some('\n') | None => return self.err("unterminated string literal"),
                Some(c) => value.push(c),
            }
        }
        if self.eat('@') {
            let mut lang = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                lang.push(self.bump().unwrap());
            }
            if lang.is_empty() {
                return self.err("empty language tag");
            }
            return Ok(Term::lit(Literal::lang(value, lang)));
        }
        if self.eat('^') {
            self.expect('^')?;
            let dt = match self.peek() {
                Some('<') => self.iri_ref()?,
                _ => match self.pname()? {
                    Term::Iri(i) => i,
                    _ => unreachable!(),
                },
            };
            return Ok(Term::lit(Literal::typed(value, dt)));
        }
        Ok(Term::lit(Literal::str(value)))
    }

    fn unicode_escape(&mut self, digits: usize) -> Result<char> {
        let mut v: u32 = 0;
        for _ in 0..digits {
            let c = self.bump().ok_or_else(|| self.fail("unterminated escape"))?;
            let d = c.to_digit(16).ok_or_else(|| self.fail("bad hex digit in escape"))?;
            v = v * 16 + d;
        }
        char::from_u32(v).map_or_else(|| self.err("invalid code point"), Ok)
    }

    fn numeric_literal(&mut self) -> Result<Term> {
        let mut text = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            text.push(self.bump().unwrap());
        }
        let mut dotted = false;
        let mut exponent = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                text.push(self.bump().unwrap());
            } else if c == '.' && !dotted && !exponent {
                // Only a digit may follow; `30.` ends the statement instead.
                if matches!(self.chars.get(self.pos + 1), Some(n) if n.is_ascii_digit()) {
                    dotted = true;
                    text.push(self.bump().unwrap());
                } else {
                    break;
                }
            } else if (c == 'e' || c == 'E') && !exponent {
                exponent = true;
                text.push(self.bump().unwrap());
                if matches!(self.peek(), Some('+') | Some('-')) {
                    text.push(self.bump().unwrap());
                }
            } else {
                break;
            }
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return self.err("expected digits");
        }
        let dt = if exponent {
            XSD_DOUBLE
        } else if dotted {
            XSD_DECIMAL
        } else {
            XSD_INTEGER
        };
        Ok(Term::lit(Literal::typed(text, dt)))
    }
}

fn is_pname_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Serialize a graph deterministically.
pub fn serialize_turtle(g: &RdfGraph) -> String {
    Writer::new(g).write()
}

struct Writer<'a> {
    g: &'a RdfGraph,
    /// namespace IRI → prefix, longest namespace first on lookup.
    by_ns: Vec<(&'a str, &'a str)>,
    /// original blank label → canonical label.
    renames: BTreeMap<&'a str, String>,
    /// blanks rendered inline at their single use site.
    inline: BTreeSet<&'a str>,
}

impl<'a> Writer<'a> {
    fn new(g: &'a RdfGraph) -> Writer<'a> {
        let mut by_ns: Vec<(&str, &str)> = g
            .prefixes
            .iter()
            .map(|(p, ns)| (ns.as_str(), p.as_str()))
            .collect();
        by_ns.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.cmp(b)));

        // Canonical blank labels: order by a structural signature.
        let mut signatures: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut object_count: BTreeMap<&str, usize> = BTreeMap::new();
        for t in g.iter() {
            if let Term::Blank(b) = &t.subject {
                signatures.entry(b).or_default().push(format!(
                    "S {} {}",
                    t.predicate,
                    blind(&t.object)
                ));
            }
            if let Term::Blank(b) = &t.object {
                signatures
                    .entry(b)
                    .or_default()
                    .push(format!("O {} {}", blind(&t.subject), t.predicate));
                *object_count.entry(b).or_default() += 1;
            }
        }
        let mut ordered: Vec<(&str, Vec<String>)> = signatures
            .into_iter()
            .map(|(b, mut sig)| {
                sig.sort();
                (b, sig)
            })
            .collect();
        ordered.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
        let renames: BTreeMap<&str, String> = ordered
            .iter()
            .enumerate()
            .map(|(i, (b, _))| (*b, format!("b{i}")))
            .collect();
        let inline: BTreeSet<&str> = renames
            .keys()
            .copied()
            .filter(|b| object_count.get(b) == Some(&1))
            .collect();

        Writer {
            g,
            by_ns,
            renames,
            inline,
        }
    }

    fn write(&self) -> String {
        let mut out = String::new();
        let used = self.used_prefixes();
        for (prefix, ns) in &used {
            let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
        }
        if !used.is_empty() {
            out.push('\n');
        }

        // Top-level subjects: IRIs sorted, then non-inlined blanks in
        // canonical order.
        let mut iri_subjects: BTreeSet<&str> = BTreeSet::new();
        let mut blank_subjects: BTreeSet<&str> = BTreeSet::new();
        for t in self.g.iter() {
            match &t.subject {
                Term::Iri(i) => {
                    iri_subjects.insert(i);
                }
                Term::Blank(b) => {
                    if !self.inline.contains(b.as_str()) {
                        blank_subjects.insert(b);
                    }
                }
                Term::Literal(_) => {}
            }
        }
        let mut blanks: Vec<&str> = blank_subjects.into_iter().collect();
        blanks.sort_by_key(|b| &self.renames[b]);

        let mut first = true;
        for s in iri_subjects {
            self.subject_block(&mut out, &Term::iri(s), &mut first);
        }
        for b in blanks {
            self.subject_block(&mut out, &Term::blank(b), &mut first);
        }
        out
    }

    fn used_prefixes(&self) -> Vec<(&'a str, &'a str)> {
        let mut iris: Vec<&str> = Vec::new();
        for t in self.g.iter() {
            if let Term::Iri(i) = &t.subject {
                iris.push(i);
            }
            iris.push(&t.predicate);
            match &t.object {
                Term::Iri(i) => iris.push(i),
                Term::Literal(l) => {
                    if let Some(dt) = &l.datatype {
                        if !bare_numeric(l) {
                            iris.push(dt);
                        }
                    }
                }
                Term::Blank(_) => {}
            }
        }
        let mut used: BTreeSet<(&str, &str)> = BTreeSet::new();
        for iri in iris {
            if let Some((ns, p)) = self.split(iri) {
                used.insert((p, ns));
            }
        }
        used.into_iter().collect()
    }

    /// Longest declared namespace covering `iri` with a name-safe remainder.
    fn split(&self, iri: &str) -> Option<(&'a str, &'a str)> {
        for (ns, p) in &self.by_ns {
            if let Some(local) = iri.strip_prefix(ns) {
                if !local.is_empty() && local.chars().all(is_name_char) {
                    return Some((ns, p));
                }
            }
        }
        None
    }

    fn subject_block(&self, out: &mut String, subject: &Term, first: &mut bool) {
        let mut groups = self.predicate_groups(subject);
        if groups.is_empty() {
            return;
        }
        if !*first {
            out.push('\n');
        }
        *first = false;

        out.push_str(&self.term(subject));
        let last = groups.len() - 1;
        for (i, (pred, objects)) in groups.drain(..).enumerate() {
            if i == 0 {
                out.push(' ');
            } else {
                out.push_str("    ");
            }
            out.push_str(&pred);
            out.push(' ');
            let rendered: Vec<String> = objects.iter().map(|o| self.object(o)).collect();
            out.push_str(&rendered.join(" , "));
            out.push_str(if i == last { " .\n" } else { " ;\n" });
        }
    }

    /// The subject's predicates with their objects: `a` first, the rest by
    /// predicate IRI; objects in term order.
    fn predicate_groups(&self, subject: &Term) -> Vec<(String, Vec<&Term>)> {
        let mut map: BTreeMap<(u8, &str), Vec<&Term>> = BTreeMap::new();
        for t in self.g.iter() {
            if t.subject != *subject {
                continue;
            }
            let rank = u8::from(t.predicate != RDF_TYPE);
            map.entry((rank, &t.predicate)).or_default().push(&t.object);
        }
        map.into_iter()
            .map(|((_, p), os)| {
                let name = if p == RDF_TYPE {
                    "a".to_string()
                } else {
                    self.iri(p)
                };
                (name, os)
            })
            .collect()
    }

    fn object(&self, o: &Term) -> String {
        if let Term::Blank(b) = o {
            if self.inline.contains(b.as_str()) {
                let inner = self.predicate_groups(o);
                if inner.is_empty() {
                    return "[]".to_string();
                }
                let parts: Vec<String> = inner
                    .into_iter()
                    .map(|(p, os)| {
                        let rendered: Vec<String> = os.iter().map(|o| self.object(o)).collect();
                        format!("{p} {}", rendered.join(" , "))
                    })
                    .collect();
                return format!("[ {} ]", parts.join(" ; "));
            }
        }
        self.term(o)
    }

    fn iri(&self, iri: &str) -> String {
        match self.split(iri) {
            Some((ns, p)) => format!("{p}:{}", &iri[ns.len()..]),
            None => format!("<{iri}>"),
        }
    }

    fn term(&self, t: &Term) -> String {
        match t {
            Term::Iri(i) => self.iri(i),
            Term::Blank(b) => match self.renames.get(b.as_str()) {
                Some(canon) => format!("_:{canon}"),
                None => format!("_:{b}"),
            },
            Term::Literal(l) => {
                if bare_numeric(l) {
                    return l.value.clone();
                }
                let mut s = String::from("\"");
                for c in l.value.chars() {
                    match c {
                        '\\' => s.push_str("\\\\"),
                        '"' => s.push_str("\\\""),
                        '\n' => s.push_str("\\n"),
                        '\r' => s.push_str("\\r"),
                        '\t' => s.push_str("\\t"),
                        c => s.push(c),
                    }
                }
                s.push('"');
                if let Some(lang) = &l.lang {
                    let _ = write!(s, "@{lang}");
                } else if let Some(dt) = &l.datatype {
                    let _ = write!(s, "^^{}", self.iri(dt));
                }
                s
            }
        }
    }
}

/// Structural stand-in for terms inside blank signatures.
fn blind(t: &Term) -> String {
    match t {
        Term::Blank(_) => "_".to_string(),
        other => other.to_string(),
    }
}

/// Can this literal be written as a bare token?
fn bare_numeric(l: &Literal) -> bool {
    if l.lang.is_some() {
        return false;
    }
    let Some(dt) = &l.datatype else { return false };
    let v = l.value.as_str();
    let body = v.strip_prefix(['+', '-']).unwrap_or(v);
    match dt.as_str() {
        XSD_INTEGER => !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()),
        XSD_DECIMAL => {
            body.contains('.')
                && body.chars().all(|c| c.is_ascii_digit() || c == '.')
                && body.matches('.').count() == 1
                && !body.starts_with('.')
                && !body.ends_with('.')
        }
        XSD_BOOLEAN => v == "true" || v == "false",
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
@prefix qb: <http://purl.org/linked-data/cube#> .
@prefix ex: <http://example.org/x#> .

ex:ds a qb:DataSet ;
    qb:structure ex:dsd .

ex:dsd qb:component [ qb:measure ex:m ; ex:card 3 ] ;
    ex:label "hello"@en , "27.5"^^<http://www.w3.org/2001/XMLSchema#decimal> .

_:step ex:child ex:l1 ;
    ex:parent ex:l2 .
"#;

    #[test]
    fn parse_counts_triples() {
        let g = parse_turtle(SAMPLE).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.has(
            &Term::iri("http://example.org/x#ds"),
            RDF_TYPE,
            &Term::iri("http://purl.org/linked-data/cube#DataSet")
        ));
    }

    #[test]
    fn serialization_is_stable() {
        let g = parse_turtle(SAMPLE).unwrap();
        let once = serialize_turtle(&g);
        let twice = serialize_turtle(&parse_turtle(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn bare_numbers_round_trip() {
        let g = parse_turtle("@prefix ex: <http://e/> . ex:s ex:p 30 , 27.5 .").unwrap();
        let s = serialize_turtle(&g);
        assert!(s.contains("27.5 , 30"), "{s}");
        let g2 = parse_turtle(&s).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn undeclared_prefix_is_an_error() {
        let err = parse_turtle("ex:s ex:p ex:o .").unwrap_err();
        assert_eq!(err.code(), "E_TURTLE");
    }

    #[test]
    fn positions_are_reported() {
        let err = parse_turtle("@prefix ex: <http://e/> .\nex:s ex:p @ .").unwrap_err();
        match err {
            Error::Turtle { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
