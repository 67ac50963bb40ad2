use nalgebra::{Isometry3, Point3};
use serde::{Deserialize, Serialize};

use super::{Aabb, GeometryError};

/// Semantic class attached to every mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SemanticLabel {
    Human,
    FlyingObject,
    #[default]
    Environment,
    Robot,
    Other,
}

/// Indexed triangle mesh in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
    pub instance_id: u32,
    pub label: SemanticLabel,
}

impl TriMesh {
    /// Validates indices and coordinates.
    pub fn new(
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[u32; 3]>,
        instance_id: u32,
        label: SemanticLabel,
    ) -> Result<Self, GeometryError> {
        if let Some(v) = vertices.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFinite(v));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index: i,
                    vertex_count: n,
                });
            }
        }
        Ok(Self {
            vertices,
            triangles,
            instance_id,
            label,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_iter(&self) -> impl Iterator<Item = [Point3<f64>; 3]> + '_ {
        (0..self.triangles.len()).map(move |i| self.triangle(i))
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn transformed(&self, pose: &Isometry3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| pose * p).collect(),
            triangles: self.triangles.clone(),
            instance_id: self.instance_id,
            label: self.label,
        }
    }

    pub fn with_instance(mut self, instance_id: u32, label: SemanticLabel) -> Self {
        self.instance_id = instance_id;
        self.label = label;
        self
    }

    /// Replaces vertex positions keeping the topology. Counts must match.
    pub fn with_vertices(&self, vertices: Vec<Point3<f64>>) -> Result<TriMesh, GeometryError> {
        if vertices.len() != self.vertices.len() {
            return Err(GeometryError::TopologyMismatch);
        }
        TriMesh::new(vertices, self.triangles.clone(), self.instance_id, self.label)
    }

    /// Appends another mesh's triangles (soup concatenation, no welding).
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
    }

    /// Concatenates meshes; instance and label come from the first one.
    pub fn concat<'a>(meshes: impl IntoIterator<Item = &'a TriMesh>) -> Result<TriMesh, GeometryError> {
        let mut it = meshes.into_iter();
        let mut out = it.next().ok_or(GeometryError::EmptyGeometry)?.clone();
        for m in it {
            out.append(m);
        }
        Ok(out)
    }
}
