//! IRI assignment: how model names become IRIs, and how IRIs give their
//! names back.
//!
//! Everything minted here is a pure function of the model's names and the
//! base IRI, so exporting the same model twice yields the same graph. Names
//! are percent-encoded into IRI fragments; the encoding is injective, which
//! keeps distinct names at distinct IRIs and lets the reader recover a name
//! from a local part exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::bundle::LoadedModel;
use crate::model::schema::DimensionSchema;

/// Base IRI used when neither the model nor the caller provides one.
pub const DEFAULT_BASE: &str = "http://example.org/qbx";

/// Percent-encode a name for use as (part of) an IRI fragment. Keeps
/// `[A-Za-z0-9_-]`; everything else — including `.`, `~`, and `%` — is
/// escaped, so the encoded form never contains the separators the minting
/// scheme uses between name parts.
pub fn encode_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for b in name.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_' | b'-' => out.push(b as char),
            _ => {
                let _ = write!(out, "%{b:02X}");
            }
        }
    }
    out
}

/// Inverse of [`encode_name`]. A `%` not followed by two hex digits is kept
/// literally, so arbitrary local names from foreign graphs pass through.
pub fn decode_name(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut at = 0;
    while at < bytes.len() {
        if bytes[at] == b'%' && at + 2 < bytes.len() {
            let hex = |b: u8| (b as char).to_digit(16);
            if let (Some(hi), Some(lo)) = (hex(bytes[at + 1]), hex(bytes[at + 2])) {
                out.push((hi * 16 + lo) as u8);
                at += 3;
                continue;
            }
        }
        out.push(bytes[at]);
        at += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// The part of an IRI after the last `#` or `/`.
pub fn local_name(iri: &str) -> &str {
    match iri.rfind(['#', '/']) {
        Some(i) => &iri[i + 1..],
        None => iri,
    }
}

/// The namespace of an IRI: everything up to and including the last `#` or
/// `/`. Empty when the IRI has neither.
pub fn namespace_of(iri: &str) -> &str {
    match iri.rfind(['#', '/']) {
        Some(i) => &iri[..=i],
        None => "",
    }
}

/// The resolved IRI of every element of one model: explicit per-role IRIs
/// where the model declares them, deterministic mints under the base IRI
/// everywhere else.
#[derive(Debug, Clone)]
pub struct IriPlan {
    /// Namespace of schema elements: `{base}/schemas#`.
    pub schema_ns: String,
    /// Namespace of datasets and observations: `{base}/instances#`.
    pub instance_ns: String,
    /// Namespace compiled queries put derived datasets under: `{base}/queries#`.
    pub query_ns: String,
    pub cube: String,
    dimensions: BTreeMap<String, String>,
    hierarchies: BTreeMap<(String, String), String>,
    levels: BTreeMap<(String, String), String>,
    attributes: BTreeMap<(String, String, String), String>,
    rollups: BTreeMap<(String, String, String), String>,
    member_ns: BTreeMap<(String, String), String>,
    measures: BTreeMap<String, String>,
    /// Dataset name → (dataset IRI, structure definition IRI).
    datasets: BTreeMap<String, (String, String)>,
}

impl IriPlan {
    pub fn new(model: &LoadedModel, base_iri: &str) -> IriPlan {
        let base = base_iri.trim_end_matches('/');
        let schema_ns = format!("{base}/schemas#");
        let instance_ns = format!("{base}/instances#");
        let query_ns = format!("{base}/queries#");
        let cube = &model.cube;

        let mut plan = IriPlan {
            cube: cube
                .iri
                .clone()
                .unwrap_or_else(|| format!("{schema_ns}cube.{}", encode_name(&cube.name))),
            schema_ns,
            instance_ns,
            query_ns,
            dimensions: BTreeMap::new(),
            hierarchies: BTreeMap::new(),
            levels: BTreeMap::new(),
            attributes: BTreeMap::new(),
            rollups: BTreeMap::new(),
            member_ns: BTreeMap::new(),
            measures: BTreeMap::new(),
            datasets: BTreeMap::new(),
        };

        for binding in &cube.dimensions {
            let role = &binding.role;
            let r = encode_name(role);
            let iris = binding.iris.clone().unwrap_or_default();
            let schema: &DimensionSchema = &binding.dimension;

            let dim = iris
                .dimension
                .unwrap_or_else(|| format!("{}dim.{r}", plan.schema_ns));
            plan.dimensions.insert(role.clone(), dim);

            for h in &schema.hierarchies {
                let iri = iris.hierarchies.get(&h.name).cloned().unwrap_or_else(|| {
                    format!("{}hier.{r}.{}", plan.schema_ns, encode_name(&h.name))
                });
                plan.hierarchies.insert((role.clone(), h.name.clone()), iri);
            }
            for l in &schema.levels {
                let iri = iris.levels.get(&l.name).cloned().unwrap_or_else(|| {
                    format!("{}lvl.{r}.{}", plan.schema_ns, encode_name(&l.name))
                });
                plan.levels.insert((role.clone(), l.name.clone()), iri);
                for a in &l.attributes {
                    let key = format!("{}.{}", l.name, a.name);
                    let iri = iris.attributes.get(&key).cloned().unwrap_or_else(|| {
                        format!(
                            "{}attr.{r}.{}.{}",
                            plan.schema_ns,
                            encode_name(&l.name),
                            encode_name(&a.name)
                        )
                    });
                    plan.attributes
                        .insert((role.clone(), l.name.clone(), a.name.clone()), iri);
                }
                let ns = iris
                    .level_member_ns
                    .get(&l.name)
                    .or(iris.member_ns.as_ref())
                    .cloned()
                    .unwrap_or_else(|| format!("{base}/dims/{r}#"));
                plan.member_ns.insert((role.clone(), l.name.clone()), ns);
            }
            for pair in &schema.order {
                let key = format!("{}->{}", pair.child, pair.parent);
                let iri = iris.rollups.get(&key).cloned().unwrap_or_else(|| {
                    format!(
                        "{}rup.{r}.{}.{}",
                        plan.schema_ns,
                        encode_name(&pair.child),
                        encode_name(&pair.parent)
                    )
                });
                plan.rollups
                    .insert((role.clone(), pair.child.clone(), pair.parent.clone()), iri);
            }
        }

        for m in &cube.measures {
            let iri = m
                .iri
                .clone()
                .unwrap_or_else(|| format!("{}meas.{}", plan.schema_ns, encode_name(&m.name)));
            plan.measures.insert(m.name.clone(), iri);
        }

        for ds in &model.datasets {
            let iri = ds
                .iri
                .clone()
                .unwrap_or_else(|| format!("{}{}", plan.instance_ns, encode_name(&ds.name)));
            let dsd = ds
                .dsd_iri
                .clone()
                .unwrap_or_else(|| format!("{}cuboid.{}", plan.schema_ns, encode_name(&ds.name)));
            plan.datasets.insert(ds.name.clone(), (iri, dsd));
        }

        plan
    }

    pub fn dimension(&self, role: &str) -> &str {
        &self.dimensions[role]
    }

    pub fn hierarchy(&self, role: &str, hierarchy: &str) -> &str {
        &self.hierarchies[&(role.to_string(), hierarchy.to_string())]
    }

    pub fn level(&self, role: &str, level: &str) -> &str {
        &self.levels[&(role.to_string(), level.to_string())]
    }

    pub fn attribute(&self, role: &str, level: &str, attr: &str) -> Option<&str> {
        self.attributes
            .get(&(role.to_string(), level.to_string(), attr.to_string()))
            .map(String::as_str)
    }

    pub fn rollup(&self, role: &str, child: &str, parent: &str) -> Option<&str> {
        self.rollups
            .get(&(role.to_string(), child.to_string(), parent.to_string()))
            .map(String::as_str)
    }

    pub fn measure(&self, name: &str) -> &str {
        &self.measures[name]
    }

    pub fn member(&self, role: &str, level: &str, id: &str) -> String {
        let ns = &self.member_ns[&(role.to_string(), level.to_string())];
        format!("{ns}{}", encode_name(id))
    }

    /// (dataset IRI, structure definition IRI) of a dataset.
    pub fn dataset(&self, name: &str) -> (&str, &str) {
        let (ds, dsd) = &self.datasets[name];
        (ds, dsd)
    }

    /// Observation IRI for one cell: the dataset name and the cell's member
    /// ids joined with `~` (which [`encode_name`] never emits, so the
    /// composition stays injective).
    pub fn observation(&self, dataset: &str, key: &[String]) -> String {
        let mut iri = format!("{}{}", self.instance_ns, encode_name(dataset));
        for id in key {
            iri.push('~');
            iri.push_str(&encode_name(id));
        }
        iri
    }
}
