//! The JSON model bundle: one file holding a cube schema, its dimension
//! instances (keyed by role), and any number of named datasets.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::cube::{CubeSchema, LevelSet};
use crate::model::cuboid::Cuboid;
use crate::model::instance::{DimensionInstance, RoleInstances};
use crate::model::validate::{validate_cells, validate_cube_schema, validate_instance, Issue, ValidationReport};
use crate::model::value::Num;

/// One cell of a dataset as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDef {
    pub key: Vec<String>,
    pub values: Vec<Num>,
}

/// A named dataset: cells at some level set (the bottom one when omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetDef {
    pub name: String,
    /// Dataset IRI; minted from the name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
    /// IRI of the dataset's structure definition; minted when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsd_iri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSet>,
    pub cells: Vec<CellDef>,
}

/// The on-disk shape of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelBundle {
    /// Base IRI for everything minted on export; the CLI flag wins over it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_iri: Option<String>,
    pub cube: CubeSchema,
    /// Role name → instance of the dimension bound to that role.
    pub instances: BTreeMap<String, DimensionInstance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub datasets: Vec<DatasetDef>,
}

/// A dataset wired to its cube.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub iri: Option<String>,
    pub dsd_iri: Option<String>,
    pub cuboid: Cuboid,
}

/// A parsed, normalized, cross-linked model ready for evaluation.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub base_iri: Option<String>,
    pub cube: Arc<CubeSchema>,
    pub instances: RoleInstances,
    pub datasets: Vec<Dataset>,
    /// Notices produced while normalizing (e.g. a default hierarchy).
    pub load_notices: Vec<Issue>,
}

impl LoadedModel {
    pub fn from_json(text: &str) -> Result<LoadedModel> {
        let bundle: ModelBundle = serde_json::from_str(text).map_err(|e| Error::Malformed {
            detail: format!("model JSON: {e}"),
        })?;
        bundle.into_model()
    }

    pub fn dataset(&self, name: &str) -> Result<&Dataset> {
        self.datasets
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::NotFound {
                detail: format!("dataset `{name}`"),
            })
    }

    /// Full structural validation of schema, instances, and datasets.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        rep.notices.extend(self.load_notices.iter().cloned());
        rep.absorb("cube", validate_cube_schema(&self.cube));
        for (role, inst) in &self.instances {
            rep.absorb(&format!("instance {role}"), validate_instance(inst));
        }
        for d in &self.datasets {
            rep.absorb(
                &format!("dataset {}", d.name),
                validate_cells(&d.cuboid, &self.instances),
            );
        }
        rep
    }

    /// Back to the serializable form.
    pub fn to_bundle(&self) -> ModelBundle {
        ModelBundle {
            base_iri: self.base_iri.clone(),
            cube: (*self.cube).clone(),
            instances: self
                .instances
                .iter()
                .map(|(role, inst)| (role.clone(), (**inst).clone()))
                .collect(),
            datasets: self
                .datasets
                .iter()
                .map(|d| DatasetDef {
                    name: d.name.clone(),
                    iri: d.iri.clone(),
                    dsd_iri: d.dsd_iri.clone(),
                    levels: Some(d.cuboid.levels.clone()),
                    cells: d
                        .cuboid
                        .cells
                        .iter()
                        .map(|(key, values)| CellDef {
                            key: key.clone(),
                            values: values.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl ModelBundle {
    /// Normalize and cross-link the bundle: dimensions get their default
    /// hierarchy, instances get the explicit top member and rollups and are
    /// tied to the schema their role binds, datasets become cuboids.
    pub fn into_model(mut self) -> Result<LoadedModel> {
        let mut notices = Vec::new();
        for binding in &mut self.cube.dimensions {
            if Arc::make_mut(&mut binding.dimension).normalize() {
                notices.push(Issue {
                    code: "N_DEFAULT_HIERARCHY".to_string(),
                    subject: format!("{}.{}", self.cube.name, binding.role),
                    message: format!(
                        "dimension `{}` declares no hierarchy; using the all-levels default",
                        binding.dimension.name
                    ),
                });
            }
        }
        let cube = Arc::new(self.cube);

        let mut instances: RoleInstances = BTreeMap::new();
        for (role, mut inst) in self.instances {
            let binding = cube.role(&role).map_err(|_| Error::InvalidModel {
                detail: format!("instance given for unknown role `{role}`"),
            })?;
            inst.schema = Arc::clone(&binding.dimension);
            inst.normalize();
            instances.insert(role, Arc::new(inst));
        }
        for r in &cube.dimensions {
            if !instances.contains_key(&r.role) {
                return Err(Error::InvalidModel {
                    detail: format!("no instance for role `{}`", r.role),
                });
            }
        }

        let mut datasets = Vec::new();
        for def in self.datasets {
            if datasets.iter().any(|d: &Dataset| d.name == def.name) {
                return Err(Error::InvalidModel {
                    detail: format!("duplicate dataset name `{}`", def.name),
                });
            }
            let levels = match def.levels {
                Some(l) => l,
                None => cube.bottom_level_set()?,
            };
            let mut cuboid = Cuboid::new(Arc::clone(&cube), levels)?;
            for cell in def.cells {
                cuboid.insert_cell(cell.key, cell.values)?;
            }
            datasets.push(Dataset {
                name: def.name,
                iri: def.iri,
                dsd_iri: def.dsd_iri,
                cuboid,
            });
        }

        Ok(LoadedModel {
            base_iri: self.base_iri,
            cube,
            instances,
            datasets,
            load_notices: notices,
        })
    }
}
