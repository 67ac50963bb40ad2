//! 2D occupancy grid rasterized from environment triangles.
//!
//! Each triangle is clipped to the z-slab, projected to the plane, and tested
//! exactly (separating axes) against the open interior of every cell in its
//! bounding range. A face lying exactly on a grid line touches no open cell;
//! it is assigned to the cell behind it (opposite its normal), so thin walls
//! on grid lines still rasterize and solid blocks do not bleed outward.
//! Free pockets cut off from the largest free region (the inside of pillars
//! and other closed furniture) are optionally filled as occupied.

use nalgebra::{Point2, Point3, Vector2};
use std::io::Write;

use super::footprint::{contains_point, extract_footprint, FootprintParams, FootprintPolygon};
use super::{GeometryError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Occupied,
    Free,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub origin: Point2<f64>,
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at `origin.y`.
    pub cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn get(&self, ix: usize, iy: usize) -> Cell {
        self.cells[iy * self.width + ix]
    }

    pub fn count(&self, kind: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == kind).count()
    }

    pub fn cell_bounds(&self, ix: usize, iy: usize) -> (Point2<f64>, Point2<f64>) {
        let lo = Point2::new(
            self.origin.x + ix as f64 * self.resolution,
            self.origin.y + iy as f64 * self.resolution,
        );
        (lo, lo + Vector2::repeat(self.resolution))
    }

    /// Binary PGM (P5): 0 occupied, 255 free, 127 unknown; top row is max y.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let mut row = vec![0u8; self.width];
        for iy in (0..self.height).rev() {
            for (ix, px) in row.iter_mut().enumerate() {
                *px = match self.get(ix, iy) {
                    Cell::Occupied => 0,
                    Cell::Free => 255,
                    Cell::Unknown => 127,
                };
            }
            w.write_all(&row)?;
        }
        Ok(())
    }
}

const OPEN_EPS: f64 = 1e-9;
const TIE_SHIFT: f64 = 1e-6;

/// Sutherland–Hodgman clip of a polygon to `z ∈ [z_min, z_max]`.
fn clip_slab(poly: &[Point3<f64>], z_min: f64, z_max: f64) -> Vec<Point3<f64>> {
    let clip = |input: Vec<Point3<f64>>, keep: &dyn Fn(&Point3<f64>) -> f64| {
        let mut out = Vec::with_capacity(input.len() + 2);
        for i in 0..input.len() {
            let a = input[i];
            let b = input[(i + 1) % input.len()];
            let (da, db) = (keep(&a), keep(&b));
            if da >= 0.0 {
                out.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                let s = da / (da - db);
                out.push(a + (b - a) * s);
            }
        }
        out
    };
    let lo = clip(poly.to_vec(), &|p| p.z - z_min);
    if lo.is_empty() {
        return lo;
    }
    clip(lo, &|p| z_max - p.z)
}

/// True iff convex polygon `poly` meets the open box `(lo, hi)` by more than `OPEN_EPS`.
fn meets_open_cell(poly: &[Point2<f64>], lo: &Point2<f64>, hi: &Point2<f64>) -> bool {
    let (px0, px1) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (py0, py1) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    if px1 <= lo.x + OPEN_EPS || px0 >= hi.x - OPEN_EPS || py1 <= lo.y + OPEN_EPS || py0 >= hi.y - OPEN_EPS {
        return false;
    }
    let corners = [*lo, Point2::new(hi.x, lo.y), *hi, Point2::new(lo.x, hi.y)];
    let n = poly.len();
    for i in 0..n {
        let e = poly[(i + 1) % n] - poly[i];
        if e.norm_squared() == 0.0 {
            continue;
        }
        let axis = Vector2::new(-e.y, e.x).normalize();
        let (a0, a1) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            let s = axis.dot(&p.coords);
            (a.min(s), b.max(s))
        });
        let (b0, b1) = corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            let s = axis.dot(&p.coords);
            (a.min(s), b.max(s))
        });
        if a1 <= b0 + OPEN_EPS || b1 <= a0 + OPEN_EPS {
            return false;
        }
    }
    true
}

fn hull2(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let h = super::footprint::convex_hull(points);
    if h.is_empty() {
        points.iter().take(1).copied().collect()
    } else {
        h
    }
}

/// Rasterizes using the default footprint for the free/unknown split.
pub fn rasterize_occupancy(env: &TriMesh, resolution: f64, slab: (f64, f64)) -> Result<OccupancyGrid, GeometryError> {
    let fp = extract_footprint(env, &FootprintParams::default())?;
    rasterize_occupancy_with_footprint(env, &fp, resolution, slab, true)
}

pub fn rasterize_occupancy_with_footprint(
    env: &TriMesh,
    footprint: &FootprintPolygon,
    resolution: f64,
    slab: (f64, f64),
    fill_enclosed: bool,
) -> Result<OccupancyGrid, GeometryError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("resolution {resolution}")));
    }
    if !(slab.0 < slab.1) {
        return Err(GeometryError::InvalidParameter(format!("slab {:?}", slab)));
    }
    let rect = footprint.circumscribed_rect;
    let width = ((rect.width() / resolution).ceil() as usize).max(1);
    let height = ((rect.height() / resolution).ceil() as usize).max(1);
    let origin = Point2::new(rect.min_x, rect.min_y);
    let mut occupied = vec![false; width * height];

    let cell_range = |v: f64, o: f64, n: usize| -> usize { (((v - o) / resolution).floor().max(0.0) as usize).min(n - 1) };

    for tri in env.triangle_iter() {
        let clipped = clip_slab(&tri, slab.0, slab.1);
        if clipped.is_empty() {
            continue;
        }
        let flat: Vec<Point2<f64>> = clipped.iter().map(|p| Point2::new(p.x, p.y)).collect();
        let poly = hull2(&flat);
        let mut marked = mark_cells(&poly, origin, resolution, width, height, &cell_range, &mut occupied);
        if !marked {
            // face on a grid line: nudge it behind its normal and retry
            let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
            let n2 = Vector2::new(n.x, n.y);
            if n2.norm() > 0.0 {
                let shift = -n2.normalize() * TIE_SHIFT;
                let moved: Vec<Point2<f64>> = poly.iter().map(|p| p + shift).collect();
                marked = mark_cells(&moved, origin, resolution, width, height, &cell_range, &mut occupied);
            }
            if !marked {
                // outside the grid after the nudge (rect boundary): clamp into the edge cell
                let c = poly[0];
                let ix = cell_range(c.x, origin.x, width);
                let iy = cell_range(c.y, origin.y, height);
                occupied[iy * width + ix] = true;
            }
        }
    }

    let mut cells: Vec<Cell> = (0..width * height)
        .map(|k| {
            if occupied[k] {
                return Cell::Occupied;
            }
            let (ix, iy) = (k % width, k / width);
            let c = Point2::new(
                origin.x + (ix as f64 + 0.5) * resolution,
                origin.y + (iy as f64 + 0.5) * resolution,
            );
            if contains_point(&footprint.polygon, &c, 1e-6) {
                Cell::Free
            } else {
                Cell::Unknown
            }
        })
        .collect();
    if fill_enclosed {
        fill_pockets(&mut cells, width, height);
    }
    Ok(OccupancyGrid {
        resolution,
        origin,
        width,
        height,
        cells,
    })
}

/// Marks every free 4-connected component except the largest as occupied.
fn fill_pockets(cells: &mut [Cell], width: usize, height: usize) {
    let mut label = vec![usize::MAX; cells.len()];
    let mut sizes = Vec::new();
    for start in 0..cells.len() {
        if cells[start] != Cell::Free || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut stack = vec![start];
        label[start] = id;
        while let Some(k) = stack.pop() {
            size += 1;
            let (x, y) = (k % width, k / width);
            let mut visit = |n: usize| {
                if cells[n] == Cell::Free && label[n] == usize::MAX {
                    label[n] = id;
                    stack.push(n);
                }
            };
            if x > 0 {
                visit(k - 1);
            }
            if x + 1 < width {
                visit(k + 1);
            }
            if y > 0 {
                visit(k - width);
            }
            if y + 1 < height {
                visit(k + width);
            }
        }
        sizes.push(size);
    }
    // ties keep the lowest component id
    let Some(main) = (0..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))) else {
        return;
    };
    for (c, &l) in cells.iter_mut().zip(&label) {
        if l != usize::MAX && l != main {
            *c = Cell::Occupied;
        }
    }
}

fn mark_cells(
    poly: &[Point2<f64>],
    origin: Point2<f64>,
    resolution: f64,
    width: usize,
    height: usize,
    cell_range: &dyn Fn(f64, f64, usize) -> usize,
    occupied: &mut [bool],
) -> bool {
    let (x0, x1) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (y0, y1) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let (ix0, ix1) = (cell_range(x0, origin.x, width), cell_range(x1, origin.x, width));
    let (iy0, iy1) = (cell_range(y0, origin.y, height), cell_range(y1, origin.y, height));
    let mut any = false;
    for iy in iy0..=iy1 {
        for ix in ix0..=ix1 {
            let lo = Point2::new(origin.x + ix as f64 * resolution, origin.y + iy as f64 * resolution);
            let hi = lo + Vector2::repeat(resolution);
            // outer cells extend to infinity so geometry on the rect boundary lands in them
            let lo = Point2::new(
                if ix == 0 { f64::NEG_INFINITY } else { lo.x },
                if iy == 0 { f64::NEG_INFINITY } else { lo.y },
            );
            let hi = Point2::new(
                if ix == width - 1 { f64::INFINITY } else { hi.x },
                if iy == height - 1 { f64::INFINITY } else { hi.y },
            );
            if meets_open_cell(poly, &finite(lo, -1e9), &finite(hi, 1e9)) {
                occupied[iy * width + ix] = true;
                any = true;
            }
        }
    }
    any
}

fn finite(p: Point2<f64>, fill: f64) -> Point2<f64> {
    Point2::new(
        if p.x.is_finite() { p.x } else { fill },
        if p.y.is_finite() { p.y } else { fill },
    )
}
