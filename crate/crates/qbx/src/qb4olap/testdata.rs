//! Shared fixtures for the mapping tests: a small two-dimensional model
//! built from JSON, a one-dimensional model pinned to external IRIs, and a
//! hand-written Turtle listing in the style QB4OLAP publishers use.

use serde_json::json;

use crate::model::bundle::{LoadedModel, ModelBundle};

pub(crate) fn model_from_json(v: serde_json::Value) -> LoadedModel {
    let bundle: ModelBundle = serde_json::from_value(v).expect("fixture deserializes");
    bundle.into_model().expect("fixture is a valid model")
}

/// Two dimensions (geography and time), one measure, three facts.
pub(crate) fn mini_model() -> LoadedModel {
    model_from_json(json!({
        "baseIri": "http://example.org/mini",
        "cube": {
            "name": "Facts",
            "dimensions": [
                {
                    "role": "Citizenship",
                    "dimension": {
                        "name": "Citizenship",
                        "levels": [
                            {"name": "All"},
                            {"name": "Continent"},
                            {"name": "Country", "attributes": [
                                {"name": "countryName", "datatype": "string"}
                            ]}
                        ],
                        "order": [
                            {"child": "Continent", "parent": "All"},
                            {"child": "Country", "parent": "Continent"}
                        ],
                        "hierarchies": [
                            {"name": "geo", "levels": ["All", "Continent", "Country"]}
                        ]
                    }
                },
                {
                    "role": "Time",
                    "dimension": {
                        "name": "Time",
                        "levels": [
                            {"name": "All"},
                            {"name": "Month"},
                            {"name": "Year"}
                        ],
                        "order": [
                            {"child": "Month", "parent": "Year"},
                            {"child": "Year", "parent": "All"}
                        ],
                        "hierarchies": [
                            {"name": "calendar", "levels": ["All", "Month", "Year"]}
                        ]
                    }
                }
            ],
            "measures": [
                {"name": "applications", "datatype": "integer"}
            ],
            "aggMap": {"applications": "SUM"}
        },
        "instances": {
            "Citizenship": {
                "members": {
                    "Country": [
                        {"id": "BE", "values": {"countryName": "Belgium"}},
                        {"id": "FR", "values": {"countryName": "France"}}
                    ],
                    "Continent": [{"id": "EU"}]
                },
                "rollups": [
                    {"childLevel": "Country", "parentLevel": "Continent",
                     "pairs": [["BE", "EU"], ["FR", "EU"]]}
                ]
            },
            "Time": {
                "members": {
                    "Month": [{"id": "201301"}, {"id": "201303"}],
                    "Year": [{"id": "2013"}]
                },
                "rollups": [
                    {"childLevel": "Month", "parentLevel": "Year",
                     "pairs": [["201301", "2013"], ["201303", "2013"]]}
                ]
            }
        },
        "datasets": [
            {
                "name": "facts",
                "levels": {"Citizenship": "Country", "Time": "Month"},
                "cells": [
                    {"key": ["BE", "201301"], "values": [5]},
                    {"key": ["FR", "201301"], "values": [10]},
                    {"key": ["BE", "201303"], "values": [30]}
                ]
            }
        ]
    }))
}

/// A one-dimensional cube whose every element is pinned to an external IRI,
/// the way a dataset republished from an existing SPARQL endpoint would be.
pub(crate) fn citizenship_model() -> LoadedModel {
    let schema = "http://www.fing.edu.uy/inco/cubes/schemas/migr_asyapp#";
    let property = "http://eurostat.linked-statistics.org/property#";
    let citizen_ns = "http://eurostat.linked-statistics.org/dic/citizen#";
    let dbpedia = "http://dbpedia.org/resource/";
    let skos = "http://www.w3.org/2004/02/skos/core#";
    model_from_json(json!({
        "baseIri": "http://www.fing.edu.uy/inco/cubes",
        "cube": {
            "name": "migrCUBE",
            "iri": format!("{schema}migrCUBE"),
            "dimensions": [
                {
                    "role": "citizenship",
                    "dimension": {
                        "name": "citizenship",
                        "levels": [
                            {"name": "All"},
                            {"name": "citizen", "attributes": [
                                {"name": "countryName", "datatype": "string"}
                            ]},
                            {"name": "continent"},
                            {"name": "governmentType"}
                        ],
                        "order": [
                            {"child": "citizen", "parent": "continent"},
                            {"child": "citizen", "parent": "governmentType"},
                            {"child": "continent", "parent": "All"},
                            {"child": "governmentType", "parent": "All"}
                        ],
                        "hierarchies": [
                            {"name": "citizenshipGeoHier",
                             "levels": ["All", "citizen", "continent"]},
                            {"name": "citizenshipGovHier",
                             "levels": ["All", "citizen", "governmentType"]}
                        ]
                    },
                    "iris": {
                        "dimension": format!("{schema}citizenshipDim"),
                        "levels": {
                            "citizen": format!("{property}citizen"),
                            "continent": format!("{schema}continent"),
                            "governmentType": format!("{schema}governmentType")
                        },
                        "attributes": {
                            "citizen.countryName": format!("{schema}countryName")
                        },
                        "hierarchies": {
                            "citizenshipGeoHier": format!("{schema}citizenshipGeoHier"),
                            "citizenshipGovHier": format!("{schema}citizenshipGovHier")
                        },
                        "rollups": {
                            "citizen->continent": format!("{schema}inContinent"),
                            "citizen->governmentType": format!("{schema}hasGovType")
                        },
                        "levelMemberNs": {
                            "citizen": citizen_ns,
                            "continent": citizen_ns,
                            "governmentType": dbpedia
                        }
                    }
                }
            ],
            "measures": [
                {"name": "obsValue", "datatype": "integer",
                 "iri": "http://purl.org/linked-data/sdmx/2009/measure#obsValue"}
            ],
            "aggMap": {"obsValue": "SUM"}
        },
        "instances": {
            "citizenship": {
                "members": {
                    "citizen": [
                        {"id": "AD",
                         "values": {"countryName": "Andorra"},
                         "extras": [
                            {"predicate": format!("{skos}prefLabel"),
                             "value": {"value": "Andorra", "lang": "de"}},
                            {"predicate": format!("{skos}prefLabel"),
                             "value": {"value": "Andorra", "lang": "en"}},
                            {"predicate": format!("{skos}prefLabel"),
                             "value": {"value": "Andorre", "lang": "fr"}}
                         ]},
                        {"id": "ZW", "values": {"countryName": "Zimbabwe"}}
                    ],
                    "continent": [{"id": "AF"}, {"id": "EU"}],
                    "governmentType": [{"id": "Unitary_state"}]
                },
                "rollups": [
                    {"childLevel": "citizen", "parentLevel": "continent",
                     "pairs": [["AD", "EU"], ["ZW", "AF"]]},
                    {"childLevel": "citizen", "parentLevel": "governmentType",
                     "pairs": [["AD", "Unitary_state"], ["ZW", "Unitary_state"]]}
                ]
            }
        },
        "datasets": [
            {
                "name": "migr",
                "iri": "http://eurostat.linked-statistics.org/data/migr",
                "dsdIri": format!("{schema}migrBOTTOM"),
                "levels": {"citizenship": "citizen"},
                "cells": [
                    {"key": ["AD"], "values": [30]},
                    {"key": ["ZW"], "values": [25]}
                ]
            }
        ]
    }))
}

/// A cube published the way existing QB4OLAP datasets are: hierarchy steps
/// as blank nodes, members under both `qb4o:memberOf` and `qb4o:inLevel`,
/// labels, no top level, and no `skos:notation` on most elements.
pub(crate) const CITIZENSHIP_TTL: &str = r#"
@prefix qb: <http://purl.org/linked-data/cube#> .
@prefix qb4o: <http://purl.org/qb4olap/cubes#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix skos: <http://www.w3.org/2004/02/skos/core#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix sdmx-measure: <http://purl.org/linked-data/sdmx/2009/measure#> .
@prefix property: <http://eurostat.linked-statistics.org/property#> .
@prefix schema: <http://www.fing.edu.uy/inco/cubes/schemas/migr_asyapp#> .
@prefix citizen: <http://eurostat.linked-statistics.org/dic/citizen#> .
@prefix dbpedia: <http://dbpedia.org/resource/> .
@prefix eurostat: <http://eurostat.linked-statistics.org/data/> .

schema:citizenshipDim a qb:DimensionProperty ;
    rdfs:label "Applicant citizenship dimension"@en ;
    qb4o:hasHierarchy schema:citizenshipGeoHier , schema:citizenshipGovHier .

schema:citizenshipGeoHier a qb4o:Hierarchy ;
    rdfs:label "Applicant citizenship geographical hierarchy"@en ;
    qb4o:inDimension schema:citizenshipDim ;
    qb4o:hasLevel property:citizen , schema:continent .

schema:citizenshipGovHier a qb4o:Hierarchy ;
    rdfs:label "Applicant citizenship government hierarchy"@en ;
    qb4o:inDimension schema:citizenshipDim ;
    qb4o:hasLevel property:citizen , schema:governmentType .

property:citizen a qb4o:LevelProperty ;
    rdfs:label "Applicant citizenship"@en ;
    qb4o:hasAttribute schema:countryName .

schema:continent a qb4o:LevelProperty ;
    rdfs:label "Continent"@en .

schema:governmentType a qb4o:LevelProperty ;
    rdfs:label "Government type"@en .

schema:countryName a qb4o:LevelAttribute ;
    rdfs:label "Country name"@en ;
    rdfs:range xsd:string .

schema:inContinent a qb4o:RollupProperty .
schema:hasGovType a qb4o:RollupProperty .

_:ih43 a qb4o:HierarchyStep ;
    qb4o:inHierarchy schema:citizenshipGeoHier ;
    qb4o:childLevel property:citizen ;
    qb4o:parentLevel schema:continent ;
    qb4o:pcCardinality qb4o:OneToMany ;
    qb4o:rollup schema:inContinent .

_:ih44 a qb4o:HierarchyStep ;
    qb4o:inHierarchy schema:citizenshipGovHier ;
    qb4o:childLevel property:citizen ;
    qb4o:parentLevel schema:governmentType ;
    qb4o:pcCardinality qb4o:OneToMany ;
    qb4o:rollup schema:hasGovType .

citizen:AD qb4o:memberOf property:citizen ;
    schema:countryName "Andorra" ;
    schema:inContinent citizen:EU ;
    schema:hasGovType dbpedia:Unitary_state ;
    skos:prefLabel "Andorra"@de , "Andorra"@en , "Andorre"@fr .

citizen:ZW qb4o:inLevel property:citizen ;
    schema:countryName "Zimbabwe" ;
    schema:inContinent citizen:AF ;
    schema:hasGovType dbpedia:Unitary_state ;
    skos:prefLabel "Zimbabwe"@en .

citizen:EU qb4o:inLevel schema:continent ;
    skos:prefLabel "Europe"@en .

citizen:AF qb4o:inLevel schema:continent ;
    skos:prefLabel "Africa"@en .

dbpedia:Unitary_state qb4o:inLevel schema:governmentType .

schema:migrCUBE a qb:DataStructureDefinition ;
    qb:component [ qb:measure sdmx-measure:obsValue ; qb4o:aggregateFunction qb4o:sum ] ;
    qb:component [ qb:dimension schema:citizenshipDim ; qb4o:cardinality qb4o:ManyToOne ] ;
    skos:notation "migrCUBE" .

schema:migrBOTTOM a qb:DataStructureDefinition ;
    qb4o:isCuboidOf schema:migrCUBE ;
    qb:component [ qb:measure sdmx-measure:obsValue ; qb4o:aggregateFunction qb4o:sum ] ;
    qb:component [ qb4o:level property:citizen ] ;
    skos:notation "migrBOTTOM" .

eurostat:migr a qb:DataSet ;
    qb:structure schema:migrBOTTOM .

eurostat:cellAD a qb:Observation ;
    qb:dataSet eurostat:migr ;
    property:citizen citizen:AD ;
    sdmx-measure:obsValue 30 .

eurostat:cellZW a qb:Observation ;
    qb:dataSet eurostat:migr ;
    property:citizen citizen:ZW ;
    sdmx-measure:obsValue 25 .
"#;
