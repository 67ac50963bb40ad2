mod common;

use nalgebra::{Point2, Point3, Vector3};
use proptest::prelude::*;
use rand::Rng;

use common::{random_mesh, rect_room, rng};
use grade_forge::geometry::footprint::contains_point;
use grade_forge::geometry::shapes::{cuboid, room};
use grade_forge::geometry::{
    count_contacts, count_contacts_exhaustive, extract_footprint, rasterize_occupancy, swept_volume, Cell, FootprintParams, TriMesh,
};
use grade_forge::pose::pose_from_xyz_yaw;
use grade_forge::scene::walking_proxy;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bvh_contacts_match_exhaustive_and_are_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_mesh(&mut r, 1);
        let b = random_mesh(&mut r, 2);
        prop_assume!(a.triangles().len() + b.triangles().len() <= 2000);
        let brute = count_contacts_exhaustive(&a, &b);
        prop_assert_eq!(count_contacts(&a, &b), brute);
        prop_assert_eq!(count_contacts(&b, &a), brute);
        prop_assert_eq!(count_contacts_exhaustive(&b, &a), brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn swept_volume_touches_iff_a_keyframe_does(
        frames in 2usize..4,
        walk in 0.2f64..1.5,
        x in -0.5f64..2.0,
        y in -0.6f64..0.6,
        z in 0.0f64..2.0,
        half in 0.05f64..0.4,
    ) {
        let track = walking_proxy("p", frames, walk, 1.6, 3);
        let soup = swept_volume(&track).unwrap();
        prop_assume!(soup.triangles().len() <= 500);
        let probe = cuboid(Point3::new(x - half, y - half, z - half), Point3::new(x + half, y + half, z + half));
        let any_frame = (0..track.keyframe_count()).any(|i| count_contacts_exhaustive(&track.keyframe_mesh(i), &probe) > 0);
        prop_assert_eq!(count_contacts_exhaustive(&soup, &probe) > 0, any_frame);
    }

    #[test]
    fn footprint_contains_every_slab_vertex(
        w in 2.0f64..12.0,
        d in 2.0f64..12.0,
        notch in prop::option::of((0.2f64..0.8, 0.2f64..0.8)),
        yaw in 0.0f64..6.3,
        shift in (-5.0f64..5.0, -5.0f64..5.0),
    ) {
        let outline: Vec<[f64; 2]> = match notch {
            None => vec![[0.0, 0.0], [w, 0.0], [w, d], [0.0, d]],
            Some((fx, fy)) => vec![[0.0, 0.0], [w, 0.0], [w, fy * d], [fx * w, fy * d], [fx * w, d], [0.0, d]],
        };
        let env = room(&outline, 2.5, 3).transformed(&pose_from_xyz_yaw(Vector3::new(shift.0, shift.1, 0.0), yaw));
        let params = FootprintParams::default();
        let fp = extract_footprint(&env, &params).unwrap();
        let (lo, hi) = (params.slice_height - params.slab_half_width, params.slice_height + params.slab_half_width);
        for p in env.vertices().iter().filter(|p| p.z >= lo && p.z <= hi) {
            prop_assert!(contains_point(&fp.polygon, &Point2::new(p.x, p.y), 1e-6), "{:?} outside {:?}", p, fp.polygon);
        }
    }

    #[test]
    fn occupancy_has_no_false_negatives(seed in any::<u64>(), res in prop::sample::select(vec![0.1f64, 0.25, 0.5])) {
        let mut r = rng(seed);
        let mut env = rect_room(r.random_range(3.0..8.0), r.random_range(3.0..8.0));
        for _ in 0..r.random_range(0..4) {
            let c = Vector3::new(r.random_range(0.5..2.5), r.random_range(0.5..2.5), r.random_range(0.0..1.5));
            let h = Vector3::from_fn(|_, _| r.random_range(0.05..0.6));
            env.append(&cuboid(Point3::from(c - h), Point3::from(c + h)));
        }
        let slab = (0.1, 2.0);
        let grid = rasterize_occupancy(&env, res, slab).unwrap();
        let mut checked = 0;
        for t in env.triangle_iter() {
            for _ in 0..20 {
                let (mut u, mut v) = (r.random::<f64>(), r.random::<f64>());
                if u + v > 1.0 {
                    (u, v) = (1.0 - u, 1.0 - v);
                }
                let p = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
                if p.z < slab.0 || p.z > slab.1 {
                    continue;
                }
                let gx = (p.x - grid.origin.x) / res;
                let gy = (p.y - grid.origin.y) / res;
                let interior = |g: f64| (g - g.round()).abs() > 1e-6;
                if gx < 0.0 || gy < 0.0 || !interior(gx) || !interior(gy) {
                    continue;
                }
                let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
                if ix >= grid.width || iy >= grid.height {
                    continue;
                }
                prop_assert_eq!(grid.get(ix, iy), Cell::Occupied, "point {:?} in cell ({}, {})", p, ix, iy);
                checked += 1;
            }
        }
        prop_assert!(checked > 0);
    }
}

#[test]
fn empty_mesh_has_no_contacts() {
    let empty = TriMesh::new(Vec::new(), Vec::new(), 0, grade_forge::geometry::SemanticLabel::Other).unwrap();
    let cube = cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
    assert_eq!(count_contacts(&empty, &cube), 0);
}
