//! Contact counting between meshes.
//!
//! A contact is one intersecting triangle pair `(a_i, b_j)`. The count is
//! symmetric and zero iff the surfaces are disjoint.

use super::bvh::Bvh;
use super::tri_tri::{is_degenerate, tri_tri_intersect};
use super::TriMesh;

/// BVH-accelerated contact count. Empty meshes have no contacts.
pub fn count_contacts(a: &TriMesh, b: &TriMesh) -> usize {
    match (Bvh::build(a), Bvh::build(b)) {
        (Ok(ba), Ok(bb)) => ba.count_contacts(&bb),
        _ => 0,
    }
}

/// Reference count testing every triangle pair.
pub fn count_contacts_exhaustive(a: &TriMesh, b: &TriMesh) -> usize {
    let tb: Vec<_> = b.triangle_iter().filter(|t| !is_degenerate(t)).collect();
    a.triangle_iter()
        .filter(|t| !is_degenerate(t))
        .map(|ta| tb.iter().filter(|t| tri_tri_intersect(&ta, t)).count())
        .sum()
}
