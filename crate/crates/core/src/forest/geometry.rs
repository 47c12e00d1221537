//! Procedural meshes for trees and understorey props.

use std::f64::consts::{PI, TAU};

use super::{CrownForm, PropInstance, PropKind, SpeciesTable, TreeInstance};
use crate::geom::Vec3;
use crate::seed::{hash_keys, unit_f64};

pub const TRUNK_SEGMENTS: usize = 12;
pub const TRUNK_RINGS: usize = 8;
/// Depth the trunk extends below its base so it meets sloped ground.
pub const TRUNK_SINK: f64 = 0.3;

const LOBE_SLICES: usize = 8;
const LOBE_STACKS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SurfaceKind {
    Sky = 0,
    Terrain = 1,
    Prop = 2,
    Trunk = 3,
    Crown = 4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub indices: [u32; 3],
    pub kind: SurfaceKind,
    pub instance_id: u32,
    pub color: [f32; 3],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<Triangle>,
}

impl Mesh {
    pub fn vertex(&self, tri: &Triangle, k: usize) -> Vec3 {
        self.positions[tri.indices[k] as usize]
    }

    pub fn append(&mut self, other: &Mesh) {
        let offset = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.triangles.extend(other.triangles.iter().map(|t| Triangle {
            indices: t.indices.map(|i| i + offset),
            ..*t
        }));
    }

    /// Center and radius of a sphere enclosing every vertex.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        if self.positions.is_empty() {
            return (Vec3::ZERO, 0.0);
        }
        let (mut lo, mut hi) = (self.positions[0], self.positions[0]);
        for p in &self.positions {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let center = (lo + hi) * 0.5;
        let radius = self
            .positions
            .iter()
            .map(|p| p.distance(center))
            .fold(0.0, f64::max);
        (center, radius)
    }

    fn push_vertex(&mut self, p: Vec3) -> u32 {
        self.positions.push(p);
        (self.positions.len() - 1) as u32
    }

    fn push_tri(&mut self, indices: [u32; 3], kind: SurfaceKind, instance_id: u32, color: [f32; 3]) {
        self.triangles.push(Triangle {
            indices,
            kind,
            instance_id,
            color,
        });
    }

    /// Closed UV ellipsoid mapped through `place`.
    #[allow(clippy::too_many_arguments)]
    fn push_ellipsoid(
        &mut self,
        slices: usize,
        stacks: usize,
        radii: Vec3,
        place: impl Fn(Vec3) -> Vec3,
        kind: SurfaceKind,
        instance_id: u32,
        color: [f32; 3],
    ) {
        let top = self.push_vertex(place(Vec3::new(0.0, 0.0, radii.z)));
        let mut rings = Vec::with_capacity(stacks - 1);
        for s in 1..stacks {
            let theta = PI * s as f64 / stacks as f64;
            let ring: Vec<u32> = (0..slices)
                .map(|k| {
                    let phi = TAU * k as f64 / slices as f64;
                    let local = Vec3::new(
                        radii.x * theta.sin() * phi.cos(),
                        radii.y * theta.sin() * phi.sin(),
                        radii.z * theta.cos(),
                    );
                    self.push_vertex(place(local))
                })
                .collect();
            rings.push(ring);
        }
        let bottom = self.push_vertex(place(Vec3::new(0.0, 0.0, -radii.z)));
        for k in 0..slices {
            let k1 = (k + 1) % slices;
            self.push_tri([top, rings[0][k], rings[0][k1]], kind, instance_id, color);
            for s in 0..rings.len() - 1 {
                let (a, b) = (&rings[s], &rings[s + 1]);
                self.push_tri([a[k], b[k], b[k1]], kind, instance_id, color);
                self.push_tri([a[k], b[k1], a[k1]], kind, instance_id, color);
            }
            let last = &rings[rings.len() - 1];
            self.push_tri([bottom, last[k1], last[k]], kind, instance_id, color);
        }
    }
}

fn tint(c: [f32; 3], factor: f64) -> [f32; 3] {
    c.map(|v| (v as f64 * factor).clamp(0.0, 1.0) as f32)
}

/// Tapered trunk (12 segments x 8 rings) plus 3-6 ellipsoidal crown lobes,
/// all tilted by the tree's lean. Every triangle carries the tree id.
pub fn build_tree_geometry(tree: &TreeInstance, species: &SpeciesTable) -> Mesh {
    let template = species.get(tree.species);
    let mut mesh = Mesh::default();
    let brightness = 0.85 + 0.3 * tree.color_variation;
    let bark = tint(template.bark_color, brightness);
    let foliage = tint(template.foliage_color, brightness);

    let bottom = -TRUNK_SINK;
    let mut rings = Vec::with_capacity(TRUNK_RINGS + 1);
    for r in 0..=TRUNK_RINGS {
        let h = bottom + (tree.trunk_height - bottom) * r as f64 / TRUNK_RINGS as f64;
        let radius = tree.trunk_radius(h);
        let ring: Vec<u32> = (0..TRUNK_SEGMENTS)
            .map(|k| {
                let phi = TAU * k as f64 / TRUNK_SEGMENTS as f64;
                let local = Vec3::new(radius * phi.cos(), radius * phi.sin(), h);
                mesh.push_vertex(tree.to_world(local))
            })
            .collect();
        rings.push(ring);
    }
    for r in 0..TRUNK_RINGS {
        let (a, b) = (&rings[r], &rings[r + 1]);
        for k in 0..TRUNK_SEGMENTS {
            let k1 = (k + 1) % TRUNK_SEGMENTS;
            let t1 = [a[k], a[k1], b[k1]];
            let t2 = [a[k], b[k1], b[k]];
            mesh.push_tri(t1, SurfaceKind::Trunk, tree.id, bark);
            mesh.push_tri(t2, SurfaceKind::Trunk, tree.id, bark);
        }
    }

    let lobes = template.lobes as usize;
    let crown_base = tree.trunk_height - tree.crown_height;
    let jitter = |k: usize, salt: i64| {
        unit_f64(hash_keys(tree.id as u64, &[k as i64, salt, tree.species as i64]))
    };
    for k in 0..lobes {
        let shade = 0.85 + 0.3 * jitter(k, 0);
        let color = tint(foliage, shade);
        let (center, radii) = match template.crown_form {
            CrownForm::Conifer => {
                let t = (k as f64 + 0.5) / lobes as f64;
                let slab = tree.crown_height / lobes as f64;
                let horizontal = tree.crown_radius * (1.05 - 0.8 * t) * (0.9 + 0.2 * jitter(k, 1));
                (
                    Vec3::new(0.0, 0.0, crown_base + t * tree.crown_height),
                    Vec3::new(horizontal, horizontal, 0.75 * slab + 0.2),
                )
            }
            CrownForm::Broadleaf => {
                if k == 0 {
                    (
                        Vec3::new(0.0, 0.0, crown_base + 0.55 * tree.crown_height),
                        Vec3::new(
                            0.75 * tree.crown_radius,
                            0.75 * tree.crown_radius,
                            0.45 * tree.crown_height,
                        ),
                    )
                } else {
                    let phi = TAU * (k as f64 - 1.0 + jitter(k, 2)) / (lobes - 1) as f64;
                    let reach = tree.crown_radius * (0.35 + 0.2 * jitter(k, 3));
                    let r = tree.crown_radius * (0.5 + 0.15 * jitter(k, 4));
                    (
                        Vec3::new(
                            reach * phi.cos(),
                            reach * phi.sin(),
                            crown_base + (0.35 + 0.35 * jitter(k, 5)) * tree.crown_height,
                        ),
                        Vec3::new(r, r, 0.3 * tree.crown_height),
                    )
                }
            }
        };
        mesh.push_ellipsoid(
            LOBE_SLICES,
            LOBE_STACKS,
            radii,
            |p| tree.to_world(center + p),
            SurfaceKind::Crown,
            tree.id,
            color,
        );
    }
    mesh
}

pub fn build_prop_geometry(prop: &PropInstance) -> Mesh {
    let mut mesh = Mesh::default();
    let (sy, cy) = prop.yaw.sin_cos();
    let s = prop.scale;
    let place = |p: Vec3| {
        prop.position + Vec3::new(cy * p.x - sy * p.y, sy * p.x + cy * p.y, p.z)
    };
    match prop.kind {
        PropKind::Grass => {
            let color = [0.28, 0.42, 0.16];
            let (w, h) = (0.25 * s, 0.45 * s);
            // three crossed blades
            for k in 0..3 {
                let a = PI * k as f64 / 3.0;
                let d = Vec3::new(a.cos() * w, a.sin() * w, 0.0);
                let v0 = mesh.push_vertex(place(-d));
                let v1 = mesh.push_vertex(place(d));
                let v2 = mesh.push_vertex(place(d * 0.4 + Vec3::new(0.0, 0.0, h)));
                let v3 = mesh.push_vertex(place(-d * 0.4 + Vec3::new(0.0, 0.0, h)));
                mesh.push_tri([v0, v1, v2], SurfaceKind::Prop, 0, color);
                mesh.push_tri([v0, v2, v3], SurfaceKind::Prop, 0, color);
            }
        }
        PropKind::Stump => {
            let color = [0.42, 0.33, 0.22];
            let (r, h) = (0.28 * s, 0.35 * s);
            let n = 8;
            let lower: Vec<u32> = (0..n)
                .map(|k| {
                    let a = TAU * k as f64 / n as f64;
                    mesh.push_vertex(place(Vec3::new(r * a.cos(), r * a.sin(), -0.2)))
                })
                .collect();
            let upper: Vec<u32> = (0..n)
                .map(|k| {
                    let a = TAU * k as f64 / n as f64;
                    mesh.push_vertex(place(Vec3::new(0.9 * r * a.cos(), 0.9 * r * a.sin(), h)))
                })
                .collect();
            let center = mesh.push_vertex(place(Vec3::new(0.0, 0.0, h)));
            for k in 0..n {
                let k1 = (k + 1) % n;
                mesh.push_tri([lower[k], lower[k1], upper[k1]], SurfaceKind::Prop, 0, color);
                mesh.push_tri([lower[k], upper[k1], upper[k]], SurfaceKind::Prop, 0, color);
                mesh.push_tri([center, upper[k], upper[k1]], SurfaceKind::Prop, 0, [0.62, 0.5, 0.34]);
            }
        }
        PropKind::Scrub => {
            let radii = Vec3::new(0.6 * s, 0.5 * s, 0.45 * s);
            mesh.push_ellipsoid(
                6,
                4,
                radii,
                |p| place(p + Vec3::new(0.0, 0.0, 0.3 * s)),
                SurfaceKind::Prop,
                0,
                [0.16, 0.3, 0.12],
            );
        }
        PropKind::Branch => {
            let color = [0.36, 0.28, 0.2];
            let (l, r) = (0.8 * s, 0.05 * s);
            let corners: Vec<u32> = [(-l, -r), (l, -r), (l, r), (-l, r)]
                .iter()
                .flat_map(|&(x, y)| [(x, y, 0.0), (x, y, 2.0 * r)])
                .map(|(x, y, z)| mesh.push_vertex(place(Vec3::new(x, y, z))))
                .collect();
            // corners[2k] bottom, corners[2k+1] top, k around the box
            for k in 0..4 {
                let k1 = (k + 1) % 4;
                let (b0, t0, b1, t1) = (corners[2 * k], corners[2 * k + 1], corners[2 * k1], corners[2 * k1 + 1]);
                mesh.push_tri([b0, b1, t1], SurfaceKind::Prop, 0, color);
                mesh.push_tri([b0, t1, t0], SurfaceKind::Prop, 0, color);
            }
            let top = [corners[1], corners[3], corners[5], corners[7]];
            mesh.push_tri([top[0], top[1], top[2]], SurfaceKind::Prop, 0, color);
            mesh.push_tri([top[0], top[2], top[3]], SurfaceKind::Prop, 0, color);
        }
    }
    mesh
}
