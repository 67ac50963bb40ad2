use super::{GeometryError, TriMesh};
use crate::scene::AnimationTrack;

/// Triangle soup of every keyframe mesh of `track`, in the track's local frame.
///
/// Any point inside any keyframe's mesh intersects the result, which is what
/// conservative placement checks need; the soup is not watertight.
pub fn swept_volume(track: &AnimationTrack) -> Result<TriMesh, GeometryError> {
    if track.keyframe_count() == 0 {
        return Err(GeometryError::EmptyGeometry);
    }
    let frames: Vec<TriMesh> = (0..track.keyframe_count()).map(|i| track.keyframe_mesh(i)).collect();
    let mut soup = TriMesh::concat(&frames)?;
    soup.instance_id = track.base.instance_id;
    soup.label = track.base.label;
    Ok(soup)
}
