//! Triangle meshes, acceleration structures, contact counting, swept
//! volumes and environment footprint/occupancy extraction.

mod aabb;
pub mod bvh;
pub mod contacts;
pub mod footprint;
pub mod io;
mod mesh;
pub mod occupancy;
pub mod shapes;
pub mod swept;
pub mod tri_tri;

pub use aabb::Aabb;
pub use bvh::{Bvh, Ray, RayHit};
pub use contacts::{count_contacts, count_contacts_exhaustive};
pub use footprint::{extract_footprint, FootprintParams, FootprintPolygon, Rect2};
pub use mesh::{SemanticLabel, TriMesh};
pub use occupancy::{rasterize_occupancy, Cell, OccupancyGrid};
pub use swept::swept_volume;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("empty geometry")]
    EmptyGeometry,
    #[error("empty footprint")]
    EmptyFootprint,
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("triangle {triangle} references vertex {index} but mesh has {vertex_count}")]
    IndexOutOfRange { triangle: usize, index: u32, vertex_count: usize },
    #[error("vertex count differs from the mesh topology")]
    TopologyMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Convenience: build the BVH for a mesh (`empty geometry` on no triangles).
pub fn build_bvh(mesh: &TriMesh) -> Result<Bvh, GeometryError> {
    Bvh::build(mesh)
}
