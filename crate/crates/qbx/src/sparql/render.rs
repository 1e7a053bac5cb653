//! Serializes an [`AbstractQuery`] to SPARQL 1.1 text.
//!
//! The renderer also validates the query's structural invariants (projection
//! consistency, GROUP BY coverage, template variables bound somewhere) so a
//! generator bug surfaces as `E_MALFORMED` here instead of as an opaque
//! syntax error from the endpoint.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::Num;
use crate::qb4olap::vocab::{QB, QB4O, XSD};
use crate::rdf::{Literal, RDF_TYPE};

use super::query::{
    AbstractQuery, FilterExpr, FilterOperand, ObservationBind, PatTerm, QueryType, SelectItem,
    TriplePattern,
};

/// Namespaces worth a PREFIX line. Only the ones a query actually uses are
/// declared; everything else stays a full IRI.
const PREFIXES: [(&str, &str); 3] = [("qb", QB), ("qb4o", QB4O), ("xsd", XSD)];

/// Renders the query as executable SPARQL text.
pub fn render(q: &AbstractQuery) -> Result<String> {
    validate(q, true)?;
    let mut used = BTreeSet::new();
    let mut body = String::new();
    render_query(q, 0, &mut used, &mut body)?;

    let mut out = String::new();
    for (prefix, ns) in PREFIXES {
        if used.contains(prefix) {
            let _ = writeln!(out, "PREFIX {prefix}: <{ns}>");
        }
    }
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str(&body);
    Ok(out)
}

fn malformed(detail: impl Into<String>) -> Error {
    Error::Malformed {
        detail: detail.into(),
    }
}

fn valid_var(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn pattern_vars<'a>(patterns: &'a [TriplePattern], into: &mut BTreeSet<&'a str>) {
    for p in patterns {
        for term in [&p.subject, &p.predicate, &p.object] {
            if let PatTerm::Var(v) = term {
                into.insert(v);
            }
        }
    }
}

fn operand_vars<'a>(op: &'a FilterOperand, into: &mut BTreeSet<&'a str>) {
    match op {
        FilterOperand::Var(v)
        | FilterOperand::Cast { var: v, .. }
        | FilterOperand::IdOf { var: v, .. } => {
            into.insert(v);
        }
        FilterOperand::Num(_) | FilterOperand::Str(_) => {}
    }
}

fn filter_vars<'a>(expr: &'a FilterExpr, into: &mut BTreeSet<&'a str>) {
    match expr {
        FilterExpr::Const(_) => {}
        FilterExpr::Cmp { left, right, .. } => {
            operand_vars(left, into);
            operand_vars(right, into);
        }
        FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
            filter_vars(a, into);
            filter_vars(b, into);
        }
        FilterExpr::Not(inner) => filter_vars(inner, into),
    }
}

/// The names a SELECT projects: plain variables and aggregate aliases.
fn projection_names(q: &AbstractQuery) -> Vec<&str> {
    q.result_vars
        .iter()
        .map(|item| match item {
            SelectItem::Var(v) => v.as_str(),
            SelectItem::Agg { alias, .. } => alias.as_str(),
        })
        .collect()
}

fn validate(q: &AbstractQuery, top: bool) -> Result<()> {
    match q.query_type {
        QueryType::Construct => {
            if q.result_template.is_empty() {
                return Err(malformed("CONSTRUCT query with an empty template"));
            }
            if !q.result_vars.is_empty() {
                return Err(malformed("CONSTRUCT query with a SELECT projection"));
            }
        }
        QueryType::Select => {
            if q.result_vars.is_empty() {
                return Err(malformed("SELECT query with an empty projection"));
            }
            if !q.result_template.is_empty() {
                return Err(malformed("SELECT query with a CONSTRUCT template"));
            }
        }
    }
    if !top && !q.from_graphs.is_empty() {
        return Err(malformed("dataset clause on a subquery"));
    }

    let mut all_vars = BTreeSet::new();
    pattern_vars(&q.gr_patterns, &mut all_vars);
    pattern_vars(&q.result_template, &mut all_vars);
    for name in projection_names(q) {
        all_vars.insert(name);
    }
    for item in &q.result_vars {
        if let SelectItem::Agg { var, .. } = item {
            all_vars.insert(var);
        }
    }
    for b in &q.binds {
        all_vars.insert(&b.var);
        for v in &b.vars {
            all_vars.insert(v);
        }
    }
    for g in &q.group_by {
        all_vars.insert(g);
    }
    if let Some(f) = &q.filter {
        filter_vars(f, &mut all_vars);
    }
    for name in all_vars {
        if !valid_var(name) {
            return Err(malformed(format!("invalid variable name `{name}`")));
        }
    }

    let projected = projection_names(q);
    let mut seen = BTreeSet::new();
    for name in &projected {
        if !seen.insert(*name) {
            return Err(malformed(format!("duplicate projection `?{name}`")));
        }
    }

    let has_agg = q
        .result_vars
        .iter()
        .any(|i| matches!(i, SelectItem::Agg { .. }));
    if has_agg || !q.group_by.is_empty() {
        let plain: BTreeSet<&str> = q
            .result_vars
            .iter()
            .filter_map(|i| match i {
                SelectItem::Var(v) => Some(v.as_str()),
                SelectItem::Agg { .. } => None,
            })
            .collect();
        let grouped: BTreeSet<&str> = q.group_by.iter().map(String::as_str).collect();
        if plain != grouped {
            return Err(malformed(
                "GROUP BY must list exactly the plain projected variables",
            ));
        }
    }

    if q.query_type == QueryType::Construct {
        let mut visible = BTreeSet::new();
        pattern_vars(&q.gr_patterns, &mut visible);
        for b in &q.binds {
            visible.insert(b.var.as_str());
        }
        for sq in &q.sub_queries {
            for name in projection_names(sq) {
                visible.insert(name);
            }
        }
        let mut template = BTreeSet::new();
        pattern_vars(&q.result_template, &mut template);
        for v in template {
            if !visible.contains(v) {
                return Err(malformed(format!(
                    "template variable `?{v}` is not bound in the query body"
                )));
            }
        }
    }

    for sq in &q.sub_queries {
        validate(sq, false)?;
    }
    Ok(())
}

/// `true` when `local` can follow a prefix in a prefixed name without
/// escaping. Deliberately narrower than the grammar allows.
fn simple_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn compress(iri: &str, used: &mut BTreeSet<&'static str>) -> String {
    for (prefix, ns) in PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            if simple_local(local) {
                used.insert(prefix);
                return format!("{prefix}:{local}");
            }
        }
    }
    format!("<{iri}>")
}

fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

fn render_literal(l: &Literal, used: &mut BTreeSet<&'static str>) -> String {
    let mut out = format!("\"{}\"", escape_str(&l.value));
    if let Some(lang) = &l.lang {
        let _ = write!(out, "@{lang}");
    } else if let Some(dt) = &l.datatype {
        let _ = write!(out, "^^{}", compress(dt, used));
    }
    out
}

fn render_term(t: &PatTerm, used: &mut BTreeSet<&'static str>) -> String {
    match t {
        PatTerm::Var(v) => format!("?{v}"),
        PatTerm::Iri(i) => compress(i, used),
        PatTerm::Literal(l) => render_literal(l, used),
    }
}

fn render_predicate(t: &PatTerm, used: &mut BTreeSet<&'static str>) -> String {
    if matches!(t, PatTerm::Iri(i) if i == RDF_TYPE) {
        "a".to_string()
    } else {
        render_term(t, used)
    }
}

/// A number as a SPARQL literal token. Integer-valued decimals gain a
/// fraction digit so they parse as `xsd:decimal`; exponent forms parse as
/// `xsd:double`, matching how the same values serialize into graphs.
fn render_num(n: &Num) -> Result<String> {
    match n {
        Num::Int(i) => Ok(i.to_string()),
        Num::Dec(d) => {
            if !d.is_finite() {
                return Err(malformed(format!("`{d}` cannot appear in a query")));
            }
            let mut text = d.to_string();
            if !text.contains(['e', 'E', '.']) {
                text.push_str(".0");
            }
            Ok(text)
        }
    }
}

fn render_operand(op: &FilterOperand, used: &mut BTreeSet<&'static str>) -> Result<String> {
    Ok(match op {
        FilterOperand::Var(v) => format!("?{v}"),
        FilterOperand::Cast { datatype, var } => {
            format!("{}(?{var})", compress(datatype.xsd_iri(), used))
        }
        FilterOperand::IdOf { var, ns } => {
            format!("STRAFTER(STR(?{var}), \"{}\")", escape_str(ns))
        }
        FilterOperand::Num(n) => render_num(n)?,
        FilterOperand::Str(s) => format!("\"{}\"", escape_str(s)),
    })
}

fn expr_prec(e: &FilterExpr) -> u8 {
    match e {
        FilterExpr::Or(..) => 1,
        FilterExpr::And(..) => 2,
        FilterExpr::Const(_) | FilterExpr::Cmp { .. } | FilterExpr::Not(_) => 3,
    }
}

fn render_expr(
    e: &FilterExpr,
    parent_prec: u8,
    used: &mut BTreeSet<&'static str>,
) -> Result<String> {
    let text = match e {
        FilterExpr::Const(b) => b.to_string(),
        FilterExpr::Cmp { left, op, right } => format!(
            "{} {} {}",
            render_operand(left, used)?,
            op.sparql(),
            render_operand(right, used)?
        ),
        FilterExpr::And(a, b) => format!(
            "{} && {}",
            render_expr(a, 2, used)?,
            render_expr(b, 2, used)?
        ),
        FilterExpr::Or(a, b) => format!(
            "{} || {}",
            render_expr(a, 1, used)?,
            render_expr(b, 1, used)?
        ),
        FilterExpr::Not(inner) => format!("!({})", render_expr(inner, 0, used)?),
    };
    if expr_prec(e) < parent_prec {
        Ok(format!("({text})"))
    } else {
        Ok(text)
    }
}

fn render_bind(b: &ObservationBind, used: &mut BTreeSet<&'static str>) -> String {
    let _ = used;
    let inner = match b.vars.len() {
        0 => "\"\"".to_string(),
        1 => format!("STR(?{})", b.vars[0]),
        _ => format!(
            "CONCAT({})",
            b.vars
                .iter()
                .map(|v| format!("STR(?{v})"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    format!(
        "BIND(IRI(CONCAT(\"{}\", MD5({inner}))) AS ?{})",
        escape_str(&b.base),
        b.var
    )
}

fn render_select_item(item: &SelectItem, used: &mut BTreeSet<&'static str>) -> String {
    match item {
        SelectItem::Var(v) => format!("?{v}"),
        SelectItem::Agg {
            func,
            cast,
            var,
            alias,
        } => {
            let arg = match cast {
                Some(ty) => format!("{}(?{var})", compress(ty.xsd_iri(), used)),
                None => format!("?{var}"),
            };
            format!("({}({arg}) AS ?{alias})", func.sparql_name())
        }
    }
}

/// CONSTRUCT template triples, grouped so consecutive triples about the same
/// subject share it with `;` continuations.
fn render_template(
    template: &[TriplePattern],
    depth: usize,
    used: &mut BTreeSet<&'static str>,
    out: &mut String,
) {
    let pad = "  ".repeat(depth);
    let mut i = 0;
    while i < template.len() {
        let subject = &template[i].subject;
        let mut j = i;
        while j < template.len() && template[j].subject == *subject {
            j += 1;
        }
        for (k, t) in template[i..j].iter().enumerate() {
            let head = if k == 0 {
                format!("{pad}{} ", render_term(subject, used))
            } else {
                format!("{pad}  ")
            };
            let tail = if k + 1 == j - i { " ." } else { " ;" };
            let _ = writeln!(
                out,
                "{head}{} {}{tail}",
                render_predicate(&t.predicate, used),
                render_term(&t.object, used)
            );
        }
        i = j;
    }
}

fn render_query(
    q: &AbstractQuery,
    depth: usize,
    used: &mut BTreeSet<&'static str>,
    out: &mut String,
) -> Result<()> {
    let pad = "  ".repeat(depth);
    match q.query_type {
        QueryType::Construct => {
            let _ = writeln!(out, "{pad}CONSTRUCT {{");
            render_template(&q.result_template, depth + 1, used, out);
            let _ = writeln!(out, "{pad}}}");
        }
        QueryType::Select => {
            let items: Vec<String> = q
                .result_vars
                .iter()
                .map(|i| render_select_item(i, used))
                .collect();
            let _ = writeln!(out, "{pad}SELECT {}", items.join(" "));
        }
    }
    for g in &q.from_graphs {
        let _ = writeln!(out, "{pad}FROM <{g}>");
    }
    let _ = writeln!(out, "{pad}WHERE {{");
    let inner_pad = "  ".repeat(depth + 1);
    for sq in &q.sub_queries {
        let _ = writeln!(out, "{inner_pad}{{");
        render_query(sq, depth + 2, used, out)?;
        let _ = writeln!(out, "{inner_pad}}}");
    }
    for p in &q.gr_patterns {
        let _ = writeln!(
            out,
            "{inner_pad}{} {} {} .",
            render_term(&p.subject, used),
            render_predicate(&p.predicate, used),
            render_term(&p.object, used)
        );
    }
    for b in &q.binds {
        let _ = writeln!(out, "{inner_pad}{}", render_bind(b, used));
    }
    if let Some(f) = &q.filter {
        let _ = writeln!(out, "{inner_pad}FILTER({})", render_expr(f, 0, used)?);
    }
    let _ = writeln!(out, "{pad}}}");
    if !q.group_by.is_empty() {
        let names: Vec<String> = q.group_by.iter().map(|v| format!("?{v}")).collect();
        let _ = writeln!(out, "{pad}GROUP BY {}", names.join(" "));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AggFn, CmpOp, ScalarType};
    use crate::sparql::query::VarGen;

    fn tp(s: PatTerm, p: PatTerm, o: PatTerm) -> TriplePattern {
        TriplePattern::new(s, p, o)
    }

    fn qb(local: &str) -> PatTerm {
        PatTerm::iri(format!("{QB}{local}"))
    }

    #[test]
    fn construct_with_aggregating_subquery_renders_and_parses() {
        let mut inner = AbstractQuery::new(QueryType::Select);
        inner.gr_patterns = vec![
            tp(
                PatTerm::var("obs"),
                qb("dataSet"),
                PatTerm::iri("http://x.test/instances#cb1"),
            ),
            tp(
                PatTerm::var("obs"),
                PatTerm::iri("http://x.test/schemas#lvl.time.month"),
                PatTerm::var("month"),
            ),
            tp(
                PatTerm::var("obs"),
                PatTerm::iri("http://x.test/schemas#meas.apps"),
                PatTerm::var("m"),
            ),
        ];
        inner.binds = vec![ObservationBind {
            base: "http://x.test/queries#out1~".into(),
            vars: vec!["month".into()],
            var: "newObs".into(),
        }];
        inner.result_vars = vec![
            SelectItem::Var("newObs".into()),
            SelectItem::Var("month".into()),
            SelectItem::Agg {
                func: AggFn::Sum,
                cast: Some(ScalarType::Integer),
                var: "m".into(),
                alias: "ag".into(),
            },
        ];
        inner.group_by = vec!["newObs".into(), "month".into()];

        let mut outer = AbstractQuery::new(QueryType::Construct);
        outer.result_template = vec![
            tp(PatTerm::var("newObs"), PatTerm::iri(RDF_TYPE), qb("Observation")),
            tp(
                PatTerm::var("newObs"),
                qb("dataSet"),
                PatTerm::iri("http://x.test/queries#out1"),
            ),
            tp(
                PatTerm::var("newObs"),
                PatTerm::iri("http://x.test/schemas#lvl.time.month"),
                PatTerm::var("month"),
            ),
            tp(
                PatTerm::var("newObs"),
                PatTerm::iri("http://x.test/schemas#meas.apps"),
                PatTerm::var("ag"),
            ),
        ];
        outer.from_graphs = vec!["http://x.test/graphs/data".into()];
        outer.sub_queries = vec![inner];

        let text = render(&outer).unwrap();
        assert!(text.starts_with("PREFIX qb: <http://purl.org/linked-data/cube#>\nPREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n\n"));
        assert!(text.contains("CONSTRUCT {\n  ?newObs a qb:Observation ;\n"));
        assert!(text.contains("FROM <http://x.test/graphs/data>"));
        assert!(text.contains("(SUM(xsd:integer(?m)) AS ?ag)"));
        assert!(text.contains("GROUP BY ?newObs ?month"));
        assert!(text.contains("MD5(STR(?month))"));

        oxigraph::sparql::SparqlEvaluator::new()
            .parse_query(&text)
            .expect("generated text must be valid SPARQL");
    }

    #[test]
    fn filters_respect_precedence_and_quote_strings() {
        let mut q = AbstractQuery::new(QueryType::Select);
        q.gr_patterns = vec![tp(PatTerm::var("o"), PatTerm::var("p"), PatTerm::var("v"))];
        q.result_vars = vec![SelectItem::Var("o".into())];
        let ge = FilterExpr::Cmp {
            left: FilterOperand::Var("v".into()),
            op: CmpOp::Ge,
            right: FilterOperand::Num(Num::Int(201303)),
        };
        let eq = FilterExpr::Cmp {
            left: FilterOperand::Var("v".into()),
            op: CmpOp::Eq,
            right: FilterOperand::Str("Bel\"gium".into()),
        };
        let lt = FilterExpr::Cmp {
            left: FilterOperand::Cast {
                datatype: ScalarType::Decimal,
                var: "v".into(),
            },
            op: CmpOp::Lt,
            right: FilterOperand::Num(Num::Dec(5.0)),
        };
        q.filter = Some(ge.or(eq).and(lt.not()));

        let text = render(&q).unwrap();
        assert!(text.contains(
            "FILTER((?v >= 201303 || ?v = \"Bel\\\"gium\") && !(xsd:decimal(?v) < 5.0))"
        ));
        oxigraph::sparql::SparqlEvaluator::new()
            .parse_query(&text)
            .expect("filter query must parse");
    }

    #[test]
    fn structural_mistakes_are_rejected() {
        // A template variable never bound in the body.
        let mut q = AbstractQuery::new(QueryType::Construct);
        q.result_template = vec![tp(
            PatTerm::var("ghost"),
            qb("dataSet"),
            PatTerm::var("o"),
        )];
        q.gr_patterns = vec![tp(PatTerm::var("o"), PatTerm::var("p"), PatTerm::var("v"))];
        let err = render(&q).unwrap_err();
        assert_eq!(err.code(), "E_MALFORMED");
        assert!(err.to_string().contains("ghost"));

        // GROUP BY that misses a projected variable.
        let mut q = AbstractQuery::new(QueryType::Select);
        q.gr_patterns = vec![tp(PatTerm::var("o"), PatTerm::var("p"), PatTerm::var("v"))];
        q.result_vars = vec![
            SelectItem::Var("o".into()),
            SelectItem::Agg {
                func: AggFn::Count,
                cast: None,
                var: "v".into(),
                alias: "n".into(),
            },
        ];
        q.group_by = vec![];
        assert_eq!(render(&q).unwrap_err().code(), "E_MALFORMED");

        // FROM on a subquery.
        let mut inner = AbstractQuery::new(QueryType::Select);
        inner.gr_patterns = vec![tp(PatTerm::var("o"), PatTerm::var("p"), PatTerm::var("v"))];
        inner.result_vars = vec![SelectItem::Var("o".into())];
        inner.from_graphs = vec!["http://x.test/g".into()];
        let mut outer = AbstractQuery::new(QueryType::Select);
        outer.result_vars = vec![SelectItem::Var("o".into())];
        outer.sub_queries = vec![inner];
        let err = render(&outer).unwrap_err();
        assert!(err.to_string().contains("subquery"));
    }

    #[test]
    fn var_gen_hints_survive_rendering() {
        let mut vars = VarGen::new();
        let v = vars.fresh("Application type");
        assert!(valid_var(&v));
    }
}
