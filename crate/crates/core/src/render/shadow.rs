//! Orthographic hard shadow map rendered from the sun.

use super::raster::{rasterize, ScreenVertex};
use super::scene::Scene;
use crate::geom::Vec3;

pub(crate) struct ShadowMap {
    size: usize,
    half_extent: f64,
    center: Vec3,
    u: Vec3,
    v: Vec3,
    /// Direction the light travels (away from the sun).
    dir: Vec3,
    depth: Vec<f64>,
}

impl ShadowMap {
    pub fn texel(&self) -> f64 {
        2.0 * self.half_extent / self.size as f64
    }

    /// Renders every batch within `half_extent` of `center` (measured across
    /// the light direction). Returns `None` when the sun is at or below the horizon.
    pub fn build(scene: &Scene, center: Vec3, sun_direction: Vec3, size: usize, half_extent: f64) -> Option<Self> {
        if sun_direction.z <= 0.0 || size == 0 {
            return None;
        }
        let dir = -sun_direction.normalized();
        let u = dir.cross(Vec3::Z).normalized();
        let v = u.cross(dir);
        let mut map = ShadowMap {
            size,
            half_extent,
            center,
            u,
            v,
            dir,
            depth: vec![f64::INFINITY; size * size],
        };
        let scale = size as f64 / (2.0 * half_extent);
        let mut verts: Vec<ScreenVertex> = Vec::new();
        for batch in &scene.batches {
            let d = batch.center - center;
            if d.dot(u).abs() > half_extent + batch.radius || d.dot(v).abs() > half_extent + batch.radius {
                continue;
            }
            verts.clear();
            verts.extend(batch.positions.iter().map(|&p| {
                let d = p - center;
                ScreenVertex {
                    x: (d.dot(u) + half_extent) * scale,
                    y: (half_extent - d.dot(v)) * scale,
                    q: d.dot(dir),
                }
            }));
            for tri in &batch.triangles {
                let [a, b, c] = tri.indices.map(|i| verts[i as usize]);
                let depth = &mut map.depth;
                rasterize([a, b, c], size, size, |x, y, q| {
                    let k = y * size + x;
                    if q < depth[k] {
                        depth[k] = q;
                    }
                });
            }
        }
        Some(map)
    }

    /// 1.0 if `p` is lit, 0.0 if something sits between it and the sun.
    /// `n_dot_l` scales the depth bias for grazing surfaces.
    pub fn visibility(&self, p: Vec3, n_dot_l: f64) -> f64 {
        let d = p - self.center;
        let scale = self.size as f64 / (2.0 * self.half_extent);
        let x = (d.dot(self.u) + self.half_extent) * scale;
        let y = (self.half_extent - d.dot(self.v)) * scale;
        if !(x >= 0.0 && y >= 0.0 && x < self.size as f64 && y < self.size as f64) {
            return 1.0;
        }
        let stored = self.depth[y as usize * self.size + x as usize];
        let bias = 0.04 + 1.5 * self.texel() / n_dot_l.max(0.15);
        if d.dot(self.dir) <= stored + bias {
            1.0
        } else {
            0.0
        }
    }
}
