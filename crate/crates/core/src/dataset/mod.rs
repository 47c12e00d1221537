//! COCO export, scene-atomic splits, the dataset manifest and prediction
//! files.

mod coco;
pub mod json;
mod manifest;
mod predictions;
mod split;

pub use coco::{
    annotations_path, export_coco, tree_category, write_frame_images, CocoCategory, CocoDocument,
    CocoImage, FrameRecord,
};
pub use manifest::{DatasetManifest, SceneEntry, FRAMES_PER_SCENE_RANGE};
pub use predictions::{
    load_predictions, parse_predictions, predictions_from_ground_truth, write_predictions,
    DetectionResult,
};
pub use split::{split_dataset, Split, SplitCounts, SPLIT_RATIO};
