use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed;
use crate::terrain::TerrainGrid;

/// Pinhole camera. Yaw is the heading measured counter-clockwise from +x,
/// pitch is positive upward. The principal point is the image center and
/// pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

/// Orthonormal camera frame in world space.
#[derive(Debug, Clone, Copy)]
pub struct CameraBasis {
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
}

impl CameraPose {
    pub fn validate(&self) -> Result<()> {
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(Error::Parameter(format!(
                "vertical_fov {} outside (0, pi)",
                self.vertical_fov
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Parameter("camera resolution must be positive".into()));
        }
        Ok(())
    }

    /// Focal length in pixels.
    #[inline]
    pub fn focal_length(&self) -> f64 {
        self.height as f64 / (2.0 * (self.vertical_fov / 2.0).tan())
    }

    #[inline]
    pub fn principal_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn basis(&self) -> CameraBasis {
        let (sy, cy) = self.yaw.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let forward = Vec3::new(cp * cy, cp * sy, sp);
        let right = Vec3::new(sy, -cy, 0.0);
        let up = right.cross(forward);
        CameraBasis { forward, right, up }
    }

    /// View-space coordinates: x right, y up, z along the optical axis.
    #[inline]
    pub fn to_view(&self, basis: &CameraBasis, p: Vec3) -> Vec3 {
        let d = p - self.position;
        Vec3::new(d.dot(basis.right), d.dot(basis.up), d.dot(basis.forward))
    }

    /// Pixel coordinates and view depth of a world point in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64, f64)> {
        let v = self.to_view(&self.basis(), p);
        if v.z <= 0.0 {
            return None;
        }
        let f = self.focal_length();
        let (cx, cy) = self.principal_point();
        Some((cx + f * v.x / v.z, cy - f * v.y / v.z, v.z))
    }

    /// World-space ray direction through continuous pixel coordinates
    /// `(u, v)`, scaled so its component along the optical axis is 1.
    pub fn ray_through(&self, basis: &CameraBasis, u: f64, v: f64) -> Vec3 {
        let f = self.focal_length();
        let (cx, cy) = self.principal_point();
        basis.forward + basis.right * ((u - cx) / f) + basis.up * ((cy - v) / f)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    /// Eye height above the terrain, meters.
    pub height_range: [f64; 2],
    pub pitch_range: [f64; 2],
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            height_range: [1.6, 2.6],
            pitch_range: [-0.2, 0.05],
            vertical_fov: 1.2,
            width: 800,
            height: 800,
        }
    }
}

fn uniform(rng: &mut impl Rng, r: [f64; 2]) -> f64 {
    if r[0] >= r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..r[1])
    }
}

/// Random pose over the central half of the terrain.
pub fn place_camera(grid: &TerrainGrid, rng_seed: u64, config: &CameraConfig) -> Result<CameraPose> {
    let mut rng = seed::rng(rng_seed);
    let (ex, ey) = (grid.extent_x(), grid.extent_y());
    let x = rng.gen_range(0.25 * ex..=0.75 * ex);
    let y = rng.gen_range(0.25 * ey..=0.75 * ey);
    let eye = uniform(&mut rng, config.height_range);
    let yaw = rng.gen_range(0.0..TAU);
    let pitch = uniform(&mut rng, config.pitch_range);
    let pose = CameraPose {
        position: Vec3::new(x, y, grid.sample_height(x, y)? + eye),
        yaw,
        pitch,
        vertical_fov: config.vertical_fov,
        width: config.width,
        height: config.height,
    };
    pose.validate()?;
    Ok(pose)
}
