#![allow(dead_code)]

use sylvangen_core::forest::{SpeciesTable, TreeInstance};
use sylvangen_core::geom::Vec3;
use sylvangen_core::render::{CameraPose, Scene};
use sylvangen_core::terrain::TerrainGrid;

pub const NEAR: f64 = 0.05;

pub fn tree(id: u32, x: f64, y: f64, dbh: f64, trunk_height: f64) -> TreeInstance {
    TreeInstance {
        id,
        base_position: Vec3::new(x, y, 0.0),
        species: 0,
        trunk_height,
        dbh,
        lean_axis: [1.0, 0.0],
        lean_angle: 0.0,
        crown_radius: 1.5,
        crown_height: 0.4 * trunk_height,
        color_variation: 0.5,
    }
}

/// Flat ground at z = 0, 40 m square; the camera looks along +x from (10, 20).
pub fn flat_scene(trees: Vec<TreeInstance>, draw_terrain: bool) -> Scene {
    let grid = TerrainGrid::flat(40.0, 1.0, 0.0).unwrap();
    if draw_terrain {
        Scene::new(grid, trees, Vec::new(), SpeciesTable::default()).unwrap()
    } else {
        Scene::without_terrain_geometry(grid, trees, Vec::new(), SpeciesTable::default()).unwrap()
    }
}

pub fn camera(width: u32, height: u32, vertical_fov: f64) -> CameraPose {
    CameraPose {
        position: Vec3::new(10.0, 20.0, 1.8),
        yaw: 0.0,
        pitch: 0.0,
        vertical_fov,
        width,
        height,
    }
}

/// Möller-Trumbore; returns the ray parameter of the hit.
fn intersect(origin: Vec3, dir: Vec3, tri: [Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(q) * inv)
}

/// Per-pixel `(instance id, distance)` from casting the pixel-center ray
/// against every scene triangle. Rays have unit forward component, so the ray
/// parameter is the view depth.
pub fn ray_cast(scene: &Scene, cam: &CameraPose) -> Vec<(u32, f64)> {
    let basis = cam.basis();
    let tris: Vec<([Vec3; 3], u32)> = scene.world_triangles().map(|(c, t)| (c, t.instance_id)).collect();
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let ray = cam.ray_through(&basis, x as f64 + 0.5, y as f64 + 0.5);
            let mut best = (0u32, f64::INFINITY);
            for (c, id) in &tris {
                if let Some(t) = intersect(cam.position, ray, *c) {
                    if t >= NEAR && (t < best.1 || (t == best.1 && *id < best.0)) {
                        best = (*id, t);
                    }
                }
            }
            out.push((best.0, best.1 * ray.length()));
        }
    }
    out
}
