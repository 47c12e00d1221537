//! Ground-truth annotations for trees near the camera: tight boxes, RLE
//! masks from the instance-id buffer, and five projected keypoints.

mod rle;

pub use rle::{mask_to_rle, rle_decode, rle_from_fn, rle_intersection, Rle};

use std::collections::BTreeMap;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forest::{tree_keypoints_3d, SurfaceKind, TreeInstance, KEYPOINT_COUNT};
use crate::render::{CameraPose, FrameBundle, Scene};

pub const TREE_CATEGORY_ID: u32 = 1;

/// Keypoint in continuous pixel coordinates. `v`: 0 outside the image,
/// 1 inside but occluded, 2 visible.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub v: u8,
}

/// The five keypoints, serialized COCO-style as a flat `[x, y, v] * 5` list.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoints(pub [Keypoint; KEYPOINT_COUNT]);

impl Keypoints {
    pub fn labeled(&self) -> u32 {
        self.0.iter().filter(|k| k.v > 0).count() as u32
    }
}

impl Serialize for Keypoints {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3 * KEYPOINT_COUNT))?;
        for k in &self.0 {
            seq.serialize_element(&k.x)?;
            seq.serialize_element(&k.y)?;
            seq.serialize_element(&k.v)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Keypoints {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct FlatVisitor;

        impl<'de> Visitor<'de> for FlatVisitor {
            type Value = Keypoints;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a flat list of {} numbers", 3 * KEYPOINT_COUNT)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Keypoints, A::Error> {
                let mut out = [Keypoint::default(); KEYPOINT_COUNT];
                for (k, kp) in out.iter_mut().enumerate() {
                    let mut next = |i: usize| -> std::result::Result<f64, A::Error> {
                        seq.next_element::<f64>()?
                            .ok_or_else(|| de::Error::invalid_length(3 * k + i, &self))
                    };
                    kp.x = next(0)?;
                    kp.y = next(1)?;
                    let v = next(2)?;
                    if !(v == 0.0 || v == 1.0 || v == 2.0) {
                        return Err(de::Error::custom(format!("keypoint visibility {v} not in {{0,1,2}}")));
                    }
                    kp.v = v as u8;
                }
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3 * KEYPOINT_COUNT + 1, &self));
                }
                Ok(Keypoints(out))
            }
        }

        deserializer.deserialize_seq(FlatVisitor)
    }
}

/// One annotated tree in one image, in COCO field layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(rename = "id")]
    pub annotation_id: u64,
    pub image_id: u64,
    pub category_id: u32,
    pub instance_id: u32,
    /// Tight `[x, y, w, h]` of the mask.
    pub bbox: [f64; 4],
    /// Mask pixel count.
    pub area: u64,
    pub segmentation: Rle,
    pub iscrowd: u8,
    pub keypoints: Keypoints,
    pub num_keypoints: u32,
    /// Camera to tree base, meters.
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotateConfig {
    pub radius_m: f64,
    pub min_pixels: u64,
    /// Restrict masks to trunk pixels.
    pub trunk_only: bool,
    /// Slack on the keypoint depth test, meters.
    pub occlusion_tolerance: f64,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            radius_m: 10.0,
            min_pixels: 50,
            trunk_only: false,
            occlusion_tolerance: 0.15,
        }
    }
}

/// Annotations for every tree within `radius_m` of the camera showing at
/// least `min_pixels` mask pixels, ordered by instance id. Annotation ids are
/// left at 0 for the exporter to assign.
pub fn extract_instances(
    frame: &FrameBundle,
    scene: &Scene,
    image_id: u64,
    config: &AnnotateConfig,
) -> Result<Vec<Annotation>> {
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut census: BTreeMap<u32, u64> = BTreeMap::new();
    for (&id, &kind) in frame.instance_id.iter().zip(&frame.surface) {
        if id != 0 && (!config.trunk_only || kind == SurfaceKind::Trunk) {
            *census.entry(id).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for (&id, &pixels) in &census {
        let tree = scene.tree(id).ok_or_else(|| {
            Error::Consistency(format!("instance id {id} in frame but not in scene"))
        })?;
        let distance = tree.base_position.distance(frame.camera.position);
        if distance > config.radius_m || pixels < config.min_pixels {
            continue;
        }
        let rle = rle_from_fn(h, w, |r, c| {
            let k = r * w + c;
            frame.instance_id[k] == id && (!config.trunk_only || frame.surface[k] == SurfaceKind::Trunk)
        });
        let [x, y, bw, bh] = rle.bbox().expect("census guarantees a non-empty mask");
        let keypoints = project_keypoints(tree, &frame.camera, frame, config.occlusion_tolerance)?;
        out.push(Annotation {
            annotation_id: 0,
            image_id,
            category_id: TREE_CATEGORY_ID,
            instance_id: id,
            bbox: [x as f64, y as f64, bw as f64, bh as f64],
            area: rle.area(),
            segmentation: rle,
            iscrowd: 0,
            num_keypoints: keypoints.labeled(),
            keypoints,
            distance_m: distance,
        });
    }
    Ok(out)
}

/// Projects the tree's keypoints, viewed from the camera's horizontal
/// direction to the base. A keypoint landing on a pixel owned by its own tree
/// is visible; otherwise it is visible when no surface lies more than
/// `tolerance` in front of it.
pub fn project_keypoints(
    tree: &TreeInstance,
    camera: &CameraPose,
    frame: &FrameBundle,
    tolerance: f64,
) -> Result<Keypoints> {
    let view_dir = tree.base_position - camera.position;
    let points = tree_keypoints_3d(tree, view_dir)?;
    let (w, h) = (frame.width as f64, frame.height as f64);
    let mut out = [Keypoint::default(); KEYPOINT_COUNT];
    for (kp, p) in out.iter_mut().zip(points) {
        let Some((u, v, _)) = camera.project(p) else {
            continue;
        };
        if !(u >= 0.0 && v >= 0.0 && u < w && v < h) {
            continue;
        }
        let k = frame.index(u as usize, v as usize);
        let own = frame.instance_id[k] == tree.id;
        let visible = own || p.distance(camera.position) <= frame.depth_m[k] + tolerance;
        *kp = Keypoint {
            x: u,
            y: v,
            v: if visible { 2 } else { 1 },
        };
    }
    Ok(Keypoints(out))
}
