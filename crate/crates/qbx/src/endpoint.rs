//! Running compiled plans against a SPARQL endpoint.
//!
//! The pieces here are deliberately small: [`EndpointConfig`] says where an
//! endpoint lives, [`GraphStore`] is the three-operation interface a plan
//! runner needs (query, upload, delete), [`HttpEndpoint`] implements it
//! over the SPARQL protocol and the Graph Store protocol, and [`run_plan`]
//! drives a [`CompiledPlan`] step by step: every query reads `FROM` the
//! model's structural graph plus the previous step's output, so chains stay
//! isolated from each other and from whatever else the store holds.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qb4olap::read::split_observations;
use crate::rdf::{parse_turtle, serialize_turtle, RdfGraph};
use crate::sparql::{render, CompiledPlan};

/// Applied when the endpoint does not set an explicit timeout.
pub const DEFAULT_TIMEOUT_SECS: u64 = 60;

/// Responses larger than this are refused rather than buffered.
const BODY_LIMIT: u64 = 1 << 30;

/// How many times a request is attempted before a transport error sticks.
const ATTEMPTS: u32 = 3;

/// How to reach a SPARQL endpoint.
///
/// In JSON this is either a bare string (a query URL, enough for read-only
/// use) or an object with explicit service URLs. Uploads and deletes go
/// through the Graph Store protocol and need `graphStoreUrl`; without it a
/// plan can be compiled but not executed remotely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", from = "ConfigRepr")]
pub struct EndpointConfig {
    /// SPARQL protocol query service.
    pub query_url: String,
    /// SPARQL update service, when different from the query service.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_url: Option<String>,
    /// Graph Store protocol service (indirect `?graph=` addressing).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_store_url: Option<String>,
    /// Per-request timeout; zero disables the timeout entirely.
    pub timeout_secs: u64,
    /// Graphs passed with every query as `default-graph-uri`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub default_graphs: Vec<String>,
}

impl EndpointConfig {
    pub fn new(query_url: impl Into<String>) -> EndpointConfig {
        EndpointConfig {
            query_url: query_url.into(),
            update_url: None,
            graph_store_url: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            default_graphs: Vec::new(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigRepr {
    Url(String),
    #[serde(rename_all = "camelCase")]
    Full {
        query_url: String,
        #[serde(default)]
        update_url: Option<String>,
        #[serde(default)]
        graph_store_url: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default)]
        default_graphs: Vec<String>,
    },
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

impl From<ConfigRepr> for EndpointConfig {
    fn from(repr: ConfigRepr) -> EndpointConfig {
        match repr {
            ConfigRepr::Url(query_url) => EndpointConfig::new(query_url),
            ConfigRepr::Full {
                query_url,
                update_url,
                graph_store_url,
                timeout_secs,
                default_graphs,
            } => EndpointConfig {
                query_url,
                update_url,
                graph_store_url,
                timeout_secs,
                default_graphs,
            },
        }
    }
}

/// The graph operations a plan runner needs. [`HttpEndpoint`] implements
/// them against a remote store; tests implement them over an embedded one.
pub trait GraphStore {
    /// Runs a `CONSTRUCT` query and returns the resulting graph.
    fn construct(&mut self, query: &str) -> Result<RdfGraph>;
    /// Replaces the named graph's content with `g`.
    fn upload(&mut self, graph_iri: &str, g: &RdfGraph) -> Result<()>;
    /// Removes the named graph. Removing an absent graph is not an error.
    fn delete(&mut self, graph_iri: &str) -> Result<()>;
}

/// A SPARQL endpoint reached over HTTP.
///
/// Queries are `POST`ed as `application/sparql-query` with results
/// requested as Turtle; graph management uses the Graph Store protocol
/// with `?graph=` addressing. All three operations are idempotent, so
/// transient transport failures (broken connections, unreachable hosts)
/// are retried up to two times before the error is reported.
pub struct HttpEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(config: EndpointConfig) -> HttpEndpoint {
        let timeout =
            (config.timeout_secs > 0).then(|| Duration::from_secs(config.timeout_secs));
        let agent = ureq::Agent::new_with_config(
            ureq::config::Config::builder()
                .timeout_global(timeout)
                .http_status_as_error(false)
                .build(),
        );
        HttpEndpoint { config, agent }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn graph_store_url(&self) -> Result<String> {
        self.config
            .graph_store_url
            .clone()
            .ok_or(Error::NoGsp)
    }

    /// Drains a response; non-2xx statuses become [`Error::Http`] unless
    /// listed in `tolerated`.
    fn read_response(
        &self,
        url: &str,
        mut res: ureq::http::Response<ureq::Body>,
        tolerated: &[u16],
    ) -> Result<String> {
        let status = res.status().as_u16();
        let text = res
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| self.transport(url, e))?;
        if (200..300).contains(&status) || tolerated.contains(&status) {
            Ok(text)
        } else {
            Err(Error::Http {
                status,
                detail: first_line(&text),
            })
        }
    }

    fn transport(&self, url: &str, e: ureq::Error) -> Error {
        match e {
            ureq::Error::Timeout(_) => Error::Timeout {
                seconds: self.config.timeout_secs,
            },
            ureq::Error::Io(source) => Error::Io {
                path: url.to_string(),
                source,
            },
            other => Error::Io {
                path: url.to_string(),
                source: std::io::Error::other(other),
            },
        }
    }
}

impl GraphStore for HttpEndpoint {
    fn construct(&mut self, query: &str) -> Result<RdfGraph> {
        let url = self.config.query_url.clone();
        let res = with_retry(|| {
            let mut req = self
                .agent
                .post(&url)
                .header("Content-Type", "application/sparql-query")
                .header("Accept", "text/turtle");
            for g in &self.config.default_graphs {
                req = req.query("default-graph-uri", g);
            }
            req.send(query)
        })
        .map_err(|e| self.transport(&url, e))?;
        let text = self.read_response(&url, res, &[])?;
        parse_turtle(&text).map_err(|e| Error::ParseResponse {
            detail: e.to_string(),
        })
    }

    fn upload(&mut self, graph_iri: &str, g: &RdfGraph) -> Result<()> {
        let url = self.graph_store_url()?;
        let body = serialize_turtle(g);
        let res = with_retry(|| {
            self.agent
                .put(&url)
                .query("graph", graph_iri)
                .header("Content-Type", "text/turtle")
                .send(body.as_str())
        })
        .map_err(|e| self.transport(&url, e))?;
        self.read_response(&url, res, &[])?;
        Ok(())
    }

    fn delete(&mut self, graph_iri: &str) -> Result<()> {
        let url = self.graph_store_url()?;
        let res = with_retry(|| self.agent.delete(&url).query("graph", graph_iri).call())
            .map_err(|e| self.transport(&url, e))?;
        // Deleting what is already gone achieved what was asked.
        self.read_response(&url, res, &[404])?;
        Ok(())
    }
}

fn first_line(body: &str) -> String {
    let line = body.trim().lines().next().unwrap_or("").trim();
    if line.chars().count() > 200 {
        let mut out: String = line.chars().take(200).collect();
        out.push('…');
        out
    } else {
        line.to_string()
    }
}

fn transient(e: &ureq::Error) -> bool {
    matches!(
        e,
        ureq::Error::Io(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound
    )
}

fn with_retry<T>(
    mut op: impl FnMut() -> std::result::Result<T, ureq::Error>,
) -> std::result::Result<T, ureq::Error> {
    let mut left = ATTEMPTS;
    loop {
        left -= 1;
        match op() {
            Err(e) if left > 0 && transient(&e) => continue,
            other => return other,
        }
    }
}

/// Executes a compiled plan on a graph store and returns the final step's
/// output graph.
///
/// The model's structural triples and its source observations are uploaded
/// as two named graphs, then every step runs `FROM` the structural graph
/// plus the previous step's output, which in turn is uploaded for the next
/// one. All graphs live under `{base_iri}/tmp/{run_id}/` — `schema`,
/// `data`, `step1`, `step2`, … — and are deleted afterwards, even on
/// failure, unless `keep` is set.
pub fn run_plan(
    store: &mut dyn GraphStore,
    compiled: &CompiledPlan,
    base_iri: &str,
    run_id: &str,
    keep: bool,
) -> Result<RdfGraph> {
    let tmp = format!("{}/tmp/{}", base_iri.trim_end_matches('/'), run_id);
    let mut uploaded = Vec::new();
    let outcome = run_steps(store, compiled, &tmp, &mut uploaded);
    if !keep {
        for graph in uploaded.iter().rev() {
            // Cleanup is best-effort; the plan's outcome matters more.
            let _ = store.delete(graph);
        }
    }
    outcome
}

fn run_steps(
    store: &mut dyn GraphStore,
    compiled: &CompiledPlan,
    tmp: &str,
    uploaded: &mut Vec<String>,
) -> Result<RdfGraph> {
    let (schema, data) = split_observations(compiled.catalog.graph());
    let schema_graph = format!("{tmp}/schema");
    store.upload(&schema_graph, &schema)?;
    uploaded.push(schema_graph.clone());
    let data_graph = format!("{tmp}/data");
    store.upload(&data_graph, &data)?;
    uploaded.push(data_graph.clone());

    let mut prev = data_graph;
    let mut result = data;
    for (i, step) in compiled.steps.iter().enumerate() {
        let mut query = step.query.clone();
        query.from_graphs = vec![schema_graph.clone(), prev.clone()];
        let text = render(&query)?;
        result = store.construct(&text)?;
        let out = format!("{tmp}/step{}", i + 1);
        store.upload(&out, &result)?;
        uploaded.push(out.clone());
        prev = out;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use oxigraph::model as ox;
    use oxigraph::sparql::{QueryResults, SparqlEvaluator};
    use oxigraph::store::Store;

    use super::*;
    use crate::algebra::{parse_program, typecheck_with_sources};
    use crate::model::{AggFn, LevelSet, LoadedModel};
    use crate::qb4olap::testdata::mini_model;
    use crate::rdf::{Literal, Term};
    use crate::sparql::{compile_plan, results_to_cuboid};

    const BASE: &str = "http://example.org/mini";

    /// [`GraphStore`] over an embedded oxigraph store, one named graph per
    /// uploaded graph, exactly like a remote endpoint would hold them.
    struct MemStore {
        store: Store,
    }

    impl MemStore {
        fn new() -> MemStore {
            MemStore {
                store: Store::new().unwrap(),
            }
        }

        fn graph_count(&self) -> usize {
            self.store.named_graphs().count()
        }
    }

    fn ox_subject(t: &Term) -> ox::NamedOrBlankNode {
        match t {
            Term::Iri(i) => ox::NamedNode::new_unchecked(i).into(),
            Term::Blank(b) => ox::BlankNode::new_unchecked(b.clone()).into(),
            Term::Literal(_) => panic!("literal in subject position"),
        }
    }

    fn ox_term(t: &Term) -> ox::Term {
        match t {
            Term::Iri(i) => ox::NamedNode::new_unchecked(i).into(),
            Term::Blank(b) => ox::BlankNode::new_unchecked(b.clone()).into(),
            Term::Literal(l) => match (&l.lang, &l.datatype) {
                (Some(lang), _) => {
                    ox::Literal::new_language_tagged_literal_unchecked(&l.value, lang).into()
                }
                (None, Some(dt)) => {
                    ox::Literal::new_typed_literal(&l.value, ox::NamedNode::new_unchecked(dt))
                        .into()
                }
                (None, None) => ox::Literal::new_simple_literal(&l.value).into(),
            },
        }
    }

    fn term_back(t: ox::Term) -> Term {
        match t {
            ox::Term::NamedNode(n) => Term::Iri(n.into_string()),
            ox::Term::BlankNode(b) => Term::Blank(b.as_str().to_string()),
            ox::Term::Literal(l) => Term::Literal(match l.language() {
                Some(lang) => Literal::lang(l.value(), lang),
                None => Literal::typed(l.value(), l.datatype().as_str()),
            }),
        }
    }

    fn subject_back(s: ox::NamedOrBlankNode) -> Term {
        match s {
            ox::NamedOrBlankNode::NamedNode(n) => Term::Iri(n.into_string()),
            ox::NamedOrBlankNode::BlankNode(b) => Term::Blank(b.as_str().to_string()),
        }
    }

    impl GraphStore for MemStore {
        fn construct(&mut self, query: &str) -> Result<RdfGraph> {
            let prepared = SparqlEvaluator::new()
                .parse_query(query)
                .unwrap_or_else(|e| panic!("engine rejected query: {e}\n{query}"));
            let results = prepared.on_store(&self.store).execute().unwrap();
            let QueryResults::Graph(triples) = results else {
                panic!("expected a graph result");
            };
            let mut g = RdfGraph::new();
            for t in triples {
                let t = t.unwrap();
                g.insert(
                    subject_back(t.subject),
                    t.predicate.into_string(),
                    term_back(t.object),
                );
            }
            Ok(g)
        }

        fn upload(&mut self, graph_iri: &str, g: &RdfGraph) -> Result<()> {
            let name = ox::NamedNode::new_unchecked(graph_iri);
            self.store.remove_named_graph(name.as_ref()).unwrap();
            for t in g.iter() {
                let quad = ox::Quad::new(
                    ox_subject(&t.subject),
                    ox::NamedNode::new_unchecked(t.predicate.clone()),
                    ox_term(&t.object),
                    name.clone(),
                );
                self.store.insert(&quad).unwrap();
            }
            Ok(())
        }

        fn delete(&mut self, graph_iri: &str) -> Result<()> {
            let name = ox::NamedNode::new_unchecked(graph_iri);
            self.store.remove_named_graph(name.as_ref()).unwrap();
            Ok(())
        }
    }

    fn sources_of(model: &LoadedModel) -> BTreeMap<String, LevelSet> {
        model
            .datasets
            .iter()
            .map(|d| (d.name.clone(), d.cuboid.levels.clone()))
            .collect()
    }

    /// Compiles `script`, runs it on an embedded store, decodes the result,
    /// and requires it to match the in-memory evaluator cell for cell.
    fn check_plan(model: &LoadedModel, script: &str) {
        let prog = parse_program(script).unwrap();
        let plan = typecheck_with_sources(&prog, &model.cube, &sources_of(model)).unwrap();
        let compiled = compile_plan(&plan, model, BASE).unwrap();

        let mut store = MemStore::new();
        let graph = run_plan(&mut store, &compiled, BASE, "t", false).unwrap();
        let got = results_to_cuboid(
            &graph,
            &compiled.result_dsd,
            &compiled.catalog,
            &compiled.result_cube,
        )
        .unwrap();

        let source = &model.dataset(&plan.source).unwrap().cuboid;
        let want = plan.run_oracle(source, &model.instances).unwrap();
        assert_eq!(got.levels, want.levels, "levels differ for:\n{script}");
        assert_eq!(got.cells, want.cells, "cells differ for:\n{script}");
        assert_eq!(store.graph_count(), 0, "run left graphs behind");
    }

    #[test]
    fn rollup_one_hop_matches_oracle() {
        check_plan(&mini_model(), "A = ROLLUP(facts, Time, Year)");
    }

    #[test]
    fn rollup_to_all_matches_oracle() {
        check_plan(&mini_model(), "A = ROLLUP(facts, Citizenship, All)");
    }

    #[test]
    fn avg_rollup_is_stepwise_like_the_oracle() {
        let mut model = mini_model();
        {
            let cube = Arc::make_mut(&mut model.cube);
            cube.agg_map.insert("applications".into(), AggFn::Avg);
        }
        // The datasets still point at the summing cube; rebind them so the
        // evaluator aggregates the same way the compiled queries do.
        for d in &mut model.datasets {
            d.cuboid.cube = Arc::clone(&model.cube);
        }
        check_plan(&model, "A = ROLLUP(facts, Citizenship, All)");
    }

    #[test]
    fn dice_matches_oracle() {
        check_plan(
            &mini_model(),
            "A = DICE(facts, Citizenship.Country.countryName = \"Belgium\" AND #applications > 8)",
        );
    }

    #[test]
    fn dice_with_empty_result_matches_oracle() {
        check_plan(
            &mini_model(),
            "A = DICE(facts, Citizenship.Country.countryName = \"Atlantis\")",
        );
    }

    #[test]
    fn slice_matches_oracle() {
        check_plan(&mini_model(), "A = SLICE(facts, Time)");
    }

    #[test]
    fn chained_plan_matches_oracle() {
        check_plan(
            &mini_model(),
            "A = ROLLUP(facts, Time, Year)\n\
             B = DICE(A, #applications > 8)\n\
             C = SLICE(B, Citizenship)",
        );
    }

    #[test]
    fn keep_leaves_the_intermediate_graphs() {
        let model = mini_model();
        let prog = parse_program("A = ROLLUP(facts, Time, Year)").unwrap();
        let plan = typecheck_with_sources(&prog, &model.cube, &sources_of(&model)).unwrap();
        let compiled = compile_plan(&plan, &model, BASE).unwrap();

        let mut store = MemStore::new();
        run_plan(&mut store, &compiled, BASE, "t", true).unwrap();
        // schema + data + one graph per step
        assert_eq!(store.graph_count(), 2 + compiled.steps.len());
    }

    #[test]
    fn config_accepts_a_bare_url() {
        let cfg: EndpointConfig = serde_json::from_str("\"http://example.org/sparql\"").unwrap();
        assert_eq!(cfg.query_url, "http://example.org/sparql");
        assert_eq!(cfg.timeout_secs, DEFAULT_TIMEOUT_SECS);
        assert!(cfg.graph_store_url.is_none());
    }

    #[test]
    fn config_accepts_the_object_form() {
        let cfg: EndpointConfig = serde_json::from_str(
            r#"{
                "queryUrl": "http://example.org/sparql",
                "graphStoreUrl": "http://example.org/data",
                "timeoutSecs": 5,
                "defaultGraphs": ["http://example.org/g"]
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.query_url, "http://example.org/sparql");
        assert_eq!(cfg.graph_store_url.as_deref(), Some("http://example.org/data"));
        assert_eq!(cfg.timeout_secs, 5);
        assert_eq!(cfg.default_graphs, vec!["http://example.org/g"]);
    }

    #[test]
    fn upload_without_graph_store_url_is_refused() {
        let mut ep = HttpEndpoint::new(EndpointConfig::new("http://example.org/sparql"));
        let err = ep.upload("http://example.org/g", &RdfGraph::new()).unwrap_err();
        assert_eq!(err.code(), "E_NO_GSP");
    }
}
