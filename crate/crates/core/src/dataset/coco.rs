use std::collections::HashSet;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use super::json::write_json_file;
use super::Split;
use crate::annotate::{Annotation, TREE_CATEGORY_ID};
use crate::error::{Error, Result};
use crate::forest::KeypointKind;
use crate::render::{encode_depth, FrameBundle};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    /// RGB image path relative to the dataset root.
    pub file_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_file_name: Option<String>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
    pub keypoints: Vec<String>,
    /// 1-based keypoint index pairs.
    pub skeleton: Vec<[u32; 2]>,
}

/// The single "tree" category with its five keypoints.
pub fn tree_category() -> CocoCategory {
    CocoCategory {
        id: TREE_CATEGORY_ID,
        name: "tree".into(),
        keypoints: KeypointKind::ALL.iter().map(|k| k.name().to_string()).collect(),
        skeleton: vec![[1, 4], [4, 5], [2, 3]],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDocument {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<Annotation>,
    pub categories: Vec<CocoCategory>,
}

impl Default for CocoDocument {
    fn default() -> Self {
        CocoDocument::new(Vec::new(), Vec::new())
    }
}

impl CocoDocument {
    pub fn new(images: Vec<CocoImage>, annotations: Vec<Annotation>) -> Self {
        CocoDocument {
            images,
            annotations,
            categories: vec![tree_category()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.len() != 1 || self.categories[0].id != TREE_CATEGORY_ID {
            return Err(Error::Consistency("expected exactly one category with id 1".into()));
        }
        let mut image_ids = HashSet::with_capacity(self.images.len());
        for img in &self.images {
            if !image_ids.insert(img.id) {
                return Err(Error::Consistency(format!("duplicate image id {}", img.id)));
            }
        }
        let mut ann_ids = HashSet::with_capacity(self.annotations.len());
        for ann in &self.annotations {
            if !ann_ids.insert(ann.annotation_id) {
                return Err(Error::Consistency(format!(
                    "duplicate annotation id {}",
                    ann.annotation_id
                )));
            }
            let Some(img) = self.image(ann.image_id) else {
                return Err(Error::Consistency(format!(
                    "annotation {} references missing image {}",
                    ann.annotation_id, ann.image_id
                )));
            };
            if ann.category_id != TREE_CATEGORY_ID {
                return Err(Error::Consistency(format!(
                    "annotation {} has category {}",
                    ann.annotation_id, ann.category_id
                )));
            }
            ann.segmentation.validate()?;
            if ann.segmentation.size != [img.height, img.width] {
                return Err(Error::Consistency(format!(
                    "annotation {} mask size {:?} differs from image {}x{}",
                    ann.annotation_id, ann.segmentation.size, img.width, img.height
                )));
            }
        }
        Ok(())
    }

    pub fn image(&self, id: u64) -> Option<&CocoImage> {
        self.images.iter().find(|i| i.id == id)
    }

    pub fn annotations_for(&self, image_id: u64) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(move |a| a.image_id == image_id)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: CocoDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("COCO document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// One exported image with its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub image: CocoImage,
    pub annotations: Vec<Annotation>,
}

pub fn annotations_path(out_dir: &Path, split: Split) -> PathBuf {
    out_dir.join(format!("annotations_{}.json", split.as_str()))
}

/// Writes `annotations_{split}.json` for already-written frame images.
pub fn export_coco(records: &[FrameRecord], out_dir: &Path, split: Split) -> Result<CocoDocument> {
    let doc = CocoDocument::new(
        records.iter().map(|r| r.image.clone()).collect(),
        records.iter().flat_map(|r| r.annotations.iter().cloned()).collect(),
    );
    doc.validate()?;
    write_json_file(&annotations_path(out_dir, split), &doc)?;
    Ok(doc)
}

/// Writes `{split}/{frame_id:06}_rgb.png` and `_depth.png` (optionally a
/// 16-bit `_ids.png`) and returns the image record.
pub fn write_frame_images(
    out_dir: &Path,
    split: Split,
    frame_id: u64,
    frame: &FrameBundle,
    d_max: f64,
    write_ids: bool,
) -> Result<CocoImage> {
    let dir = out_dir.join(split.as_str());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let rgb_name = format!("{}/{frame_id:06}_rgb.png", split.as_str());
    let depth_name = format!("{}/{frame_id:06}_depth.png", split.as_str());
    let (w, h) = (frame.width, frame.height);

    let rgb_path = out_dir.join(&rgb_name);
    image::save_buffer(&rgb_path, &frame.rgb, w, h, image::ColorType::Rgb8)
        .map_err(|e| Error::image(&rgb_path, e))?;
    let depth_path = out_dir.join(&depth_name);
    let gray = encode_depth(&frame.depth_m, d_max);
    image::save_buffer(&depth_path, &gray, w, h, image::ColorType::L8)
        .map_err(|e| Error::image(&depth_path, e))?;
    if write_ids {
        let ids_path = out_dir.join(format!("{}/{frame_id:06}_ids.png", split.as_str()));
        let ids: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
            w,
            h,
            frame.instance_id.iter().map(|&i| i.min(u16::MAX as u32) as u16).collect(),
        )
        .expect("buffer sized from frame");
        ids.save(&ids_path).map_err(|e| Error::image(&ids_path, e))?;
    }
    Ok(CocoImage {
        id: frame_id,
        file_name: rgb_name,
        depth_file_name: Some(depth_name),
        width: w,
        height: h,
    })
}
