use std::fmt::Write as _;

use serde::Serialize;
use sylvangen_core::dataset::CocoDocument;
use sylvangen_core::forest::{KeypointKind, KEYPOINT_COUNT};

/// Width of a `distance_m` histogram bin, meters.
const DISTANCE_BIN_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityRates {
    pub keypoint: &'static str,
    /// Fractions of annotations with v = 2, 1 and 0.
    pub visible: f64,
    pub occluded: f64,
    pub outside: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub images: u64,
    pub annotations: u64,
    pub annotations_per_image: f64,
    pub visibility: Vec<VisibilityRates>,
    pub distance_bin_m: f64,
    /// Annotation counts per `distance_bin_m` bin starting at 0.
    pub distance_histogram: Vec<u64>,
}

impl DatasetStats {
    pub fn compute(doc: &CocoDocument) -> Self {
        let n = doc.annotations.len() as u64;
        let mut tallies = [[0u64; 3]; KEYPOINT_COUNT];
        let mut hist: Vec<u64> = Vec::new();
        for a in &doc.annotations {
            for (k, kp) in a.keypoints.0.iter().enumerate() {
                tallies[k][kp.v.min(2) as usize] += 1;
            }
            let bin = (a.distance_m.max(0.0) / DISTANCE_BIN_M) as usize;
            if hist.len() <= bin {
                hist.resize(bin + 1, 0);
            }
            hist[bin] += 1;
        }
        let rate = |c: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        let visibility = KeypointKind::ALL
            .iter()
            .zip(tallies)
            .map(|(kind, t)| VisibilityRates {
                keypoint: kind.name(),
                visible: rate(t[2]),
                occluded: rate(t[1]),
                outside: rate(t[0]),
            })
            .collect();
        let images = doc.images.len() as u64;
        DatasetStats {
            images,
            annotations: n,
            annotations_per_image: if images == 0 { 0.0 } else { n as f64 / images as f64 },
            visibility,
            distance_bin_m: DISTANCE_BIN_M,
            distance_histogram: hist,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "images: {}", self.images);
        let _ = writeln!(out, "annotations: {}", self.annotations);
        let _ = writeln!(out, "annotations per image: {:.2}", self.annotations_per_image);
        let _ = writeln!(out, "keypoint visibility (visible / occluded / outside):");
        for v in &self.visibility {
            let _ = writeln!(
                out,
                "  {:>15}: {:.3} / {:.3} / {:.3}",
                v.keypoint, v.visible, v.occluded, v.outside
            );
        }
        let _ = writeln!(out, "distance_m histogram:");
        for (k, c) in self.distance_histogram.iter().enumerate() {
            let lo = k as f64 * self.distance_bin_m;
            let _ = writeln!(out, "  [{lo:>4.1}, {:>4.1}) {c}", lo + self.distance_bin_m);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sylvangen_core::annotate::{rle_from_fn, Annotation, Keypoint, Keypoints};
    use sylvangen_core::dataset::CocoImage;

    fn ann(id: u64, distance: f64, vis: [u8; 5]) -> Annotation {
        let rle = rle_from_fn(4, 4, |r, c| r < 2 && c < 2);
        Annotation {
            annotation_id: id,
            image_id: 1,
            category_id: 1,
            instance_id: id as u32,
            bbox: [0.0, 0.0, 2.0, 2.0],
            area: 4,
            segmentation: rle,
            iscrowd: 0,
            keypoints: Keypoints(vis.map(|v| Keypoint { x: 1.0, y: 1.0, v })),
            num_keypoints: vis.iter().filter(|v| **v > 0).count() as u32,
            distance_m: distance,
        }
    }

    #[test]
    fn empty_dataset() {
        let s = DatasetStats::compute(&CocoDocument::default());
        assert_eq!((s.images, s.annotations), (0, 0));
        assert!(s.distance_histogram.is_empty());
        assert!(s.visibility.iter().all(|v| v.visible == 0.0 && v.outside == 0.0));
    }

    #[test]
    fn counts_and_rates() {
        let img = CocoImage {
            id: 1,
            file_name: "a.png".into(),
            depth_file_name: None,
            width: 4,
            height: 4,
        };
        let doc = CocoDocument::new(
            vec![img],
            vec![ann(1, 2.5, [2, 2, 1, 0, 2]), ann(2, 9.9, [2, 1, 1, 2, 0])],
        );
        let s = DatasetStats::compute(&doc);
        assert_eq!(s.annotations, 2);
        assert_eq!(s.visibility[0].visible, 1.0);
        assert_eq!(s.visibility[1].occluded, 0.5);
        assert_eq!(s.visibility[3].outside, 0.5);
        for v in &s.visibility {
            assert!((v.visible + v.occluded + v.outside - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.distance_histogram.len(), 10);
        assert_eq!(s.distance_histogram[2] + s.distance_histogram[9], 2);
        assert!(s.to_text().contains("annotations: 2"));
    }
}
