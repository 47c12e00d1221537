use super::camera::CameraPose;
use super::conditions::{Conditions, Lighting};
use super::raster::{rasterize, ScreenVertex};
use super::scene::Scene;
use super::shadow::ShadowMap;
use super::weather::apply_weather;
use crate::error::Result;
use crate::forest::SurfaceKind;
use crate::geom::Vec3;

/// One rendered frame. Buffers are row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub width: u32,
    pub height: u32,
    /// 8-bit RGB, 3 bytes per pixel.
    pub rgb: Vec<u8>,
    /// Distance along the pixel-center ray to the visible surface; +inf for sky.
    pub depth_m: Vec<f64>,
    /// Owning tree id; 0 for terrain, props and sky.
    pub instance_id: Vec<u32>,
    /// Kind of the visible surface per pixel.
    pub surface: Vec<SurfaceKind>,
    pub camera: CameraPose,
    pub conditions: Conditions,
}

impl FrameBundle {
    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width as usize + x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub shadow_map_size: usize,
    /// Half side of the square shadow-map footprint around the camera, meters.
    pub shadow_half_extent: f64,
    pub near_plane: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            shadow_map_size: 1024,
            shadow_half_extent: 40.0,
            near_plane: 0.05,
        }
    }
}

pub fn render_frame(
    scene: &Scene,
    camera: &CameraPose,
    conditions: &Conditions,
    frame_seed: u64,
) -> Result<FrameBundle> {
    let lighting = Lighting::preset(conditions.time_of_day);
    render_frame_with(scene, camera, conditions, &lighting, frame_seed, &RenderOptions::default())
}

const NO_TRIANGLE: u64 = u64::MAX;

/// Renders with explicit lighting and options.
pub fn render_frame_with(
    scene: &Scene,
    camera: &CameraPose,
    conditions: &Conditions,
    lighting: &Lighting,
    frame_seed: u64,
    options: &RenderOptions,
) -> Result<FrameBundle> {
    camera.validate()?;
    conditions.validate()?;
    let (w, h) = (camera.width as usize, camera.height as usize);
    let basis = camera.basis();
    let f = camera.focal_length();
    let (cx, cy) = camera.principal_point();

    // Visibility: nearest view-space z per pixel; lower instance id wins exact ties.
    let mut zbuf = vec![f64::INFINITY; w * h];
    let mut ids = vec![0u32; w * h];
    let mut owner = vec![NO_TRIANGLE; w * h];
    let frustum = Frustum::new(camera, f);
    let mut view: Vec<Vec3> = Vec::new();
    for (b, batch) in scene.batches.iter().enumerate() {
        let center = camera.to_view(&basis, batch.center);
        if !frustum.may_contain(center, batch.radius, options.near_plane) {
            continue;
        }
        view.clear();
        view.extend(batch.positions.iter().map(|&p| camera.to_view(&basis, p)));
        for (t, tri) in batch.triangles.iter().enumerate() {
            let corners = tri.indices.map(|i| view[i as usize]);
            let key = ((b as u64) << 32) | t as u64;
            let id = tri.instance_id;
            let mut draw = |sv: [ScreenVertex; 3]| {
                rasterize(sv, w, h, |x, y, q| {
                    let z = 1.0 / q;
                    let k = y * w + x;
                    if z < zbuf[k] || (z == zbuf[k] && id < ids[k]) {
                        zbuf[k] = z;
                        ids[k] = id;
                        owner[k] = key;
                    }
                });
            };
            let project = |p: Vec3| ScreenVertex {
                x: cx + f * p.x / p.z,
                y: cy - f * p.y / p.z,
                q: 1.0 / p.z,
            };
            let near = options.near_plane;
            if corners.iter().all(|p| p.z >= near) {
                draw(corners.map(project));
            } else if corners.iter().any(|p| p.z >= near) {
                let poly = clip_near(corners, near);
                for k in 1..poly.len() - 1 {
                    draw([project(poly[0]), project(poly[k]), project(poly[k + 1])]);
                }
            }
        }
    }

    let shadow = if lighting.sun_intensity > 0.0 {
        let ground = Vec3::new(camera.position.x, camera.position.y, camera.position.z - 2.0);
        ShadowMap::build(
            scene,
            ground,
            lighting.sun_direction,
            options.shadow_map_size,
            options.shadow_half_extent,
        )
    } else {
        None
    };

    let mut rgb = vec![0u8; w * h * 3];
    let mut depth_m = vec![f64::INFINITY; w * h];
    let mut surface = vec![SurfaceKind::Sky; w * h];
    let shade = Shader {
        lighting,
        conditions,
        shadow: shadow.as_ref(),
    };
    for y in 0..h {
        for x in 0..w {
            let k = y * w + x;
            let ray = camera.ray_through(&basis, x as f64 + 0.5, y as f64 + 0.5);
            let color = if owner[k] == NO_TRIANGLE {
                shade.sky(ray)
            } else {
                let z = zbuf[k];
                depth_m[k] = z * ray.length();
                let batch = &scene.batches[(owner[k] >> 32) as usize];
                let t = (owner[k] & 0xFFFF_FFFF) as usize;
                let tri = &batch.triangles[t];
                surface[k] = tri.kind;
                let point = camera.position + ray * z;
                let mut normal = batch.normals[t];
                if normal.dot(ray) > 0.0 {
                    normal = -normal;
                }
                shade.surface(tri.color, tri.kind, point, normal)
            };
            rgb[k * 3..k * 3 + 3].copy_from_slice(&color);
        }
    }

    let rgb = apply_weather(&rgb, &depth_m, w, conditions, frame_seed);
    Ok(FrameBundle {
        width: camera.width,
        height: camera.height,
        rgb,
        depth_m,
        instance_id: ids,
        surface,
        camera: *camera,
        conditions: *conditions,
    })
}

struct Shader<'a> {
    lighting: &'a Lighting,
    conditions: &'a Conditions,
    shadow: Option<&'a ShadowMap>,
}

#[inline]
fn to_byte(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

impl Shader<'_> {
    fn sky(&self, ray: Vec3) -> [u8; 3] {
        let elevation = (ray.z / ray.length()).asin();
        let t = (elevation / 0.6).clamp(0.0, 1.0);
        let l = self.lighting;
        [0, 1, 2].map(|k| to_byte(l.sky_horizon[k] * (1.0 - t) + l.sky_zenith[k] * t))
    }

    fn surface(&self, color: [f32; 3], kind: SurfaceKind, point: Vec3, normal: Vec3) -> [u8; 3] {
        let c = self.conditions;
        let l = self.lighting;
        let mut albedo = color.map(|v| v as f64);
        if c.wet {
            albedo = albedo.map(|v| v * 0.7);
        }
        if c.snow_cover > 0.0 && matches!(kind, SurfaceKind::Terrain | SurfaceKind::Crown | SurfaceKind::Prop) {
            let s = c.snow_cover * ((normal.z - 0.3) / 0.5).clamp(0.0, 1.0);
            albedo = albedo.map(|v| v * (1.0 - s) + 0.92 * s);
        }
        let n_dot_l = normal.dot(l.sun_direction).max(0.0);
        let direct = if n_dot_l > 0.0 && l.sun_intensity > 0.0 {
            let lit = self.shadow.map_or(1.0, |m| m.visibility(point, n_dot_l));
            l.sun_intensity * n_dot_l * lit
        } else {
            0.0
        };
        [0, 1, 2].map(|k| to_byte(albedo[k] * (l.ambient[k] + l.sun_color[k] * direct)))
    }
}

/// Side planes of the view frustum in view space.
struct Frustum {
    planes: [Vec3; 4],
}

impl Frustum {
    fn new(camera: &CameraPose, f: f64) -> Self {
        let (hw, hh) = (camera.width as f64 / 2.0, camera.height as f64 / 2.0);
        Frustum {
            planes: [
                Vec3::new(f, 0.0, -hw).normalized(),
                Vec3::new(-f, 0.0, -hw).normalized(),
                Vec3::new(0.0, f, -hh).normalized(),
                Vec3::new(0.0, -f, -hh).normalized(),
            ],
        }
    }

    fn may_contain(&self, center: Vec3, radius: f64, near: f64) -> bool {
        center.z + radius >= near && self.planes.iter().all(|n| n.dot(center) <= radius)
    }
}

/// Sutherland-Hodgman clip of a view-space triangle against `z >= near`.
fn clip_near(tri: [Vec3; 3], near: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let (ina, inb) = (a.z >= near, b.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.z) / (b.z - a.z);
            let mut p = a + (b - a) * t;
            p.z = near;
            out.push(p);
        }
    }
    out
}
