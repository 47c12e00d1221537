//! Tree and understorey placement, tree meshes, and felling keypoints.

mod geometry;
mod placement;
mod species;

pub use geometry::{build_prop_geometry, build_tree_geometry, Mesh, SurfaceKind, Triangle};
pub use placement::{place_trees, place_understorey, UnderstoreyDensity};
pub use species::{CrownForm, SpeciesTable, SpeciesTemplate, SPECIES_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Height of the felling cut above the tree base, meters.
pub const FELLING_CUT_HEIGHT: f64 = 0.10;

/// Upper bound on tree lean, radians.
pub const MAX_LEAN: f64 = 0.25;

pub const KEYPOINT_COUNT: usize = 5;

/// Canonical keypoint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeypointKind {
    FellingCut = 0,
    DiameterLeft = 1,
    DiameterRight = 2,
    Middle = 3,
    Top = 4,
}

impl KeypointKind {
    pub const ALL: [KeypointKind; KEYPOINT_COUNT] = [
        KeypointKind::FellingCut,
        KeypointKind::DiameterLeft,
        KeypointKind::DiameterRight,
        KeypointKind::Middle,
        KeypointKind::Top,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KeypointKind::FellingCut => "felling_cut",
            KeypointKind::DiameterLeft => "diameter_left",
            KeypointKind::DiameterRight => "diameter_right",
            KeypointKind::Middle => "middle",
            KeypointKind::Top => "top",
        }
    }

    /// Keypoints that lie on the trunk axis (as opposed to the trunk surface).
    pub fn on_axis(self) -> bool {
        !matches!(self, KeypointKind::DiameterLeft | KeypointKind::DiameterRight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeInstance {
    /// Instance id, unique within a scene and never 0.
    pub id: u32,
    pub base_position: Vec3,
    pub species: usize,
    pub trunk_height: f64,
    /// Trunk diameter at felling-cut height.
    pub dbh: f64,
    /// Horizontal unit direction the tree leans toward.
    pub lean_axis: [f64; 2],
    pub lean_angle: f64,
    pub crown_radius: f64,
    pub crown_height: f64,
    pub color_variation: f64,
}

impl TreeInstance {
    /// Unit trunk axis, base to top.
    pub fn axis(&self) -> Vec3 {
        let (s, c) = self.lean_angle.sin_cos();
        Vec3::new(s * self.lean_axis[0], s * self.lean_axis[1], c)
    }

    /// Maps a tree-local point (z along the unleaned trunk) to world space by
    /// tilting it about the base.
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        let theta = self.lean_angle;
        if theta == 0.0 {
            return self.base_position + local;
        }
        // Rodrigues rotation about the horizontal axis perpendicular to the lean.
        let k = Vec3::new(-self.lean_axis[1], self.lean_axis[0], 0.0);
        let (s, c) = theta.sin_cos();
        let rotated = local * c + k.cross(local) * s + k * (k.dot(local) * (1.0 - c));
        self.base_position + rotated
    }

    /// Trunk-axis point at height `h` above the base.
    pub fn axis_point(&self, h: f64) -> Vec3 {
        self.to_world(Vec3::new(0.0, 0.0, h))
    }

    /// Trunk radius at height `h`: `dbh/2` at the felling cut, tapering linearly
    /// to `dbh/6` at the top.
    pub fn trunk_radius(&self, h: f64) -> f64 {
        let r_cut = self.dbh / 2.0;
        let r_top = self.dbh / 6.0;
        r_cut + (r_top - r_cut) * (h - FELLING_CUT_HEIGHT) / (self.trunk_height - FELLING_CUT_HEIGHT)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id == 0 {
            return Err(Error::Parameter("tree id 0 is reserved".into()));
        }
        if !(self.trunk_height > FELLING_CUT_HEIGHT && self.dbh > 0.0) {
            return Err(Error::Parameter(format!("tree {}: non-positive size", self.id)));
        }
        if !(0.0..=MAX_LEAN).contains(&self.lean_angle) {
            return Err(Error::Parameter(format!("tree {}: lean out of range", self.id)));
        }
        let norm = self.lean_axis[0].hypot(self.lean_axis[1]);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("tree {}: lean_axis not unit", self.id)));
        }
        Ok(())
    }
}

/// The five keypoints in canonical order. Diameter points sit on the trunk
/// silhouette at cut height, perpendicular to the horizontal viewing direction.
pub fn tree_keypoints_3d(tree: &TreeInstance, view_dir: Vec3) -> Result<[Vec3; KEYPOINT_COUNT]> {
    let horizontal = view_dir.horizontal_length();
    if !(horizontal > 1e-9) {
        return Err(Error::Domain(
            "view direction has no horizontal component".into(),
        ));
    }
    let (dx, dy) = (view_dir.x / horizontal, view_dir.y / horizontal);
    // screen-right for a camera looking along (dx, dy) with z up
    let right = Vec3::new(dy, -dx, 0.0);
    let cut = tree.axis_point(FELLING_CUT_HEIGHT);
    let half = tree.dbh / 2.0;
    Ok([
        cut,
        cut - right * half,
        cut + right * half,
        tree.axis_point(tree.trunk_height / 2.0),
        tree.axis_point(tree.trunk_height),
    ])
}

/// Angle of `top - cut` from vertical.
pub fn inclination(cut: Vec3, top: Vec3) -> f64 {
    let d = top - cut;
    d.horizontal_length().atan2(d.z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PropKind {
    Grass,
    Stump,
    Scrub,
    Branch,
}

impl PropKind {
    pub const ALL: [PropKind; 4] = [PropKind::Grass, PropKind::Stump, PropKind::Scrub, PropKind::Branch];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropInstance {
    pub kind: PropKind,
    pub position: Vec3,
    pub scale: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpawnRules {
    pub altitude_range: [f64; 2],
    pub max_slope: f64,
    pub neighbor_radius: f64,
    pub max_neighbors: u32,
    /// Trees per hectare.
    pub target_density: f64,
    pub min_spacing: f64,
}

impl Default for SpawnRules {
    fn default() -> Self {
        SpawnRules {
            altitude_range: [-1.0e4, 1.0e4],
            max_slope: 0.6,
            neighbor_radius: 4.0,
            max_neighbors: 6,
            target_density: 500.0,
            min_spacing: 1.2,
        }
    }
}

impl SpawnRules {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_spacing > 0.0 && self.min_spacing.is_finite()) {
            return Err(Error::Parameter("min_spacing must be positive".into()));
        }
        if !(self.altitude_range[0] <= self.altitude_range[1]) {
            return Err(Error::Parameter("altitude_range must be ordered".into()));
        }
        if !(self.target_density >= 0.0 && self.target_density.is_finite()) {
            return Err(Error::Parameter("target_density must be non-negative".into()));
        }
        if !(self.neighbor_radius >= 0.0 && self.max_slope >= 0.0) {
            return Err(Error::Parameter("neighbor_radius and max_slope must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(lean: f64, lean_axis: [f64; 2]) -> TreeInstance {
        TreeInstance {
            id: 1,
            base_position: Vec3::new(3.0, 4.0, 1.5),
            species: 0,
            trunk_height: 18.0,
            dbh: 0.4,
            lean_axis,
            lean_angle: lean,
            crown_radius: 2.0,
            crown_height: 9.0,
            color_variation: 0.5,
        }
    }

    #[test]
    fn diameter_points_straddle_cut() {
        let t = tree(0.0, [1.0, 0.0]);
        let kp = tree_keypoints_3d(&t, Vec3::new(0.6, 0.8, -0.2)).unwrap();
        let (l, r) = (kp[1], kp[2]);
        assert!(((r - l).length() - 0.4).abs() < 1e-15);
        assert_eq!(l.z, t.base_position.z + FELLING_CUT_HEIGHT);
        assert_eq!(r.z, l.z);
        let mid = (l + r) * 0.5;
        assert!((mid - kp[0]).length() < 1e-15);
        let view = Vec3::new(0.6, 0.8, 0.0);
        assert!((r - l).dot(view).abs() <= 1e-12);
        // left is on the negative screen-x side
        let right = Vec3::new(0.8, -0.6, 0.0);
        assert!((l - kp[0]).dot(right) < 0.0);
    }

    #[test]
    fn unleaning_tree_is_vertical() {
        let t = tree(0.0, [0.0, 1.0]);
        let kp = tree_keypoints_3d(&t, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(inclination(kp[0], kp[4]), 0.0);
        assert_eq!(kp[4].x, t.base_position.x);
        assert_eq!(kp[4].y, t.base_position.y);
    }

    #[test]
    fn lean_recovered_from_keypoints() {
        for &axis in &[[1.0, 0.0], [0.0, -1.0], [0.6, 0.8], [-(0.5f64.sqrt()), 0.5f64.sqrt()]] {
            let t = tree(0.1, axis);
            let kp = tree_keypoints_3d(&t, Vec3::new(1.0, 1.0, 0.0)).unwrap();
            let got = inclination(kp[0], kp[4]);
            assert!((got - 0.1).abs() < 1e-12, "{got}");
            // leans toward lean_axis
            let d = kp[4] - kp[0];
            assert!(d.x * axis[0] + d.y * axis[1] > 0.0);
        }
    }

    #[test]
    fn vertical_view_is_domain_error() {
        let t = tree(0.0, [1.0, 0.0]);
        let err = tree_keypoints_3d(&t, Vec3::new(0.0, 0.0, -1.0)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn taper() {
        let t = tree(0.0, [1.0, 0.0]);
        assert!((t.trunk_radius(FELLING_CUT_HEIGHT) - 0.2).abs() < 1e-15);
        assert!((t.trunk_radius(18.0) - 0.4 / 6.0).abs() < 1e-15);
    }
}
