//! The multidimensional data model: dimension schemas and instances, cube
//! schemas, cuboids, validation, and the in-memory reference evaluator.

pub mod bundle;
pub mod condition;
pub mod cube;
pub mod cuboid;
pub mod instance;
pub mod oracle;
pub mod schema;
pub mod validate;
pub mod value;

pub use bundle::{CellDef, Dataset, DatasetDef, LoadedModel, ModelBundle};
pub use condition::{CmpOp, CmpSubject, Comparison, Condition, ID_ATTR};
pub use cube::{lattice_info, CubeLatticeInfo, CubeSchema, LevelSet, Measure, RoleBinding, RoleIris};
pub use cuboid::{adjacent, cuboid_order, Cuboid, CuboidOrd};
pub use instance::{DimensionInstance, Extra, ExtraValue, Member, RoleInstances, RollupRelation};
pub use oracle::{
    aggregate_adjacent, oracle_dice, oracle_drilldown, oracle_rollup, oracle_slice,
    slice_hierarchy_hint, SliceTarget,
};
pub use schema::{
    Attribute, DimensionSchema, Hierarchy, Level, LevelPair, ALL_LEVEL, ALL_MEMBER,
    DEFAULT_HIERARCHY,
};
pub use validate::{
    validate_cells, validate_cube_schema, validate_dimension_schema, validate_instance, Issue,
    ValidationReport,
};
pub use value::{AggFn, AttrValue, Num, ScalarType};
