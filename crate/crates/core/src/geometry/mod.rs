//! Target manifolds and holomorphic maps.

mod maps;
mod target;

pub use maps::{catalog_map, FactorLift, HolomorphicMapSpec, MapJet, MapName};
pub use target::{
    catalog_target, dehomogenize, dominant_index, fubini_study, insert_one, TargetManifoldSpec,
    TargetName, TargetPoint,
};
