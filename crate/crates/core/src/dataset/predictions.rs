use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::coco::CocoDocument;
use super::json::write_json_file;
use crate::annotate::{Keypoints, Rle};
use crate::error::{Error, Result};

/// One entry of a COCO results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub image_id: u64,
    #[serde(default = "default_category")]
    pub category_id: u32,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<Rle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<Keypoints>,
}

fn default_category() -> u32 {
    crate::annotate::TREE_CATEGORY_ID
}

impl DetectionResult {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::Format(format!("score {} outside [0, 1]", self.score)));
        }
        if self.bbox.is_none() && self.segmentation.is_none() && self.keypoints.is_none() {
            return Err(Error::Format("no bbox, segmentation or keypoints".into()));
        }
        if let Some(b) = &self.bbox {
            if b.iter().any(|v| !v.is_finite()) || b[2] < 0.0 || b[3] < 0.0 {
                return Err(Error::Format(format!("invalid bbox {b:?}")));
            }
        }
        if let Some(r) = &self.segmentation {
            r.validate()?;
        }
        Ok(())
    }
}

/// 1-based line on which each top-level array element starts.
fn element_lines(text: &str) -> Vec<usize> {
    let mut lines = Vec::new();
    let (mut line, mut depth) = (1usize, 0i32);
    let (mut in_string, mut escaped, mut expecting) = (false, false, false);
    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
        }
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            continue;
        }
        if depth == 1 && expecting && !ch.is_whitespace() && ch != ']' {
            lines.push(line);
            expecting = false;
        }
        match ch {
            '"' => in_string = true,
            '[' | '{' => {
                depth += 1;
                if depth == 1 {
                    expecting = true;
                }
            }
            ']' | '}' => depth -= 1,
            ',' if depth == 1 => expecting = true,
            _ => {}
        }
    }
    lines
}

/// Parses and validates a results file. With `gt`, every image id must exist
/// in it. Errors name the offending entry and its line.
pub fn parse_predictions(text: &str, gt: Option<&CocoDocument>) -> Result<Vec<DetectionResult>> {
    let preds: Vec<DetectionResult> =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("predictions: {e}")))?;
    let lines = element_lines(text);
    let known: Option<HashSet<u64>> = gt.map(|d| d.images.iter().map(|i| i.id).collect());
    for (k, p) in preds.iter().enumerate() {
        let at = || format!("prediction {k} (line {})", lines.get(k).copied().unwrap_or(0));
        p.validate().map_err(|e| Error::Format(format!("{}: {e}", at())))?;
        if let Some(known) = &known {
            if !known.contains(&p.image_id) {
                return Err(Error::Format(format!("{}: unknown image_id {}", at(), p.image_id)));
            }
        }
        if let (Some(gt), Some(seg)) = (gt, &p.segmentation) {
            if let Some(img) = gt.image(p.image_id) {
                if seg.size != [img.height, img.width] {
                    return Err(Error::Format(format!(
                        "{}: mask size {:?} differs from image {}x{}",
                        at(),
                        seg.size,
                        img.width,
                        img.height
                    )));
                }
            }
        }
    }
    Ok(preds)
}

pub fn load_predictions(path: &Path, gt: Option<&CocoDocument>) -> Result<Vec<DetectionResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text, gt).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_predictions(path: &Path, preds: &[DetectionResult]) -> Result<()> {
    write_json_file(path, &preds)
}

/// Every ground-truth annotation as a prediction with the given score.
pub fn predictions_from_ground_truth(doc: &CocoDocument, score: f64) -> Vec<DetectionResult> {
    doc.annotations
        .iter()
        .map(|a| DetectionResult {
            image_id: a.image_id,
            category_id: a.category_id,
            score,
            bbox: Some(a.bbox),
            segmentation: Some(a.segmentation.clone()),
            keypoints: Some(a.keypoints),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::coco::CocoImage;

    fn gt() -> CocoDocument {
        CocoDocument::new(
            vec![CocoImage {
                id: 3,
                file_name: "train/000003_rgb.png".into(),
                depth_file_name: None,
                width: 4,
                height: 2,
            }],
            Vec::new(),
        )
    }

    #[test]
    fn empty_list() {
        assert!(parse_predictions("[]", Some(&gt())).unwrap().is_empty());
    }

    #[test]
    fn unknown_image_reports_line() {
        let text = "[\n {\"image_id\": 3, \"score\": 0.5, \"bbox\": [0,0,1,1]},\n {\"image_id\": 9999, \"score\": 0.5, \"bbox\": [0,0,1,1]}\n]";
        let err = parse_predictions(text, Some(&gt())).unwrap_err().to_string();
        assert!(err.contains("9999") && err.contains("line 3"), "{err}");
        assert!(parse_predictions(text, None).is_ok());
    }

    #[test]
    fn score_range_and_payload() {
        let bad = r#"[{"image_id": 3, "score": 1.5, "bbox": [0,0,1,1]}]"#;
        assert!(matches!(parse_predictions(bad, None), Err(Error::Format(_))));
        let empty = r#"[{"image_id": 3, "score": 0.5}]"#;
        assert!(matches!(parse_predictions(empty, None), Err(Error::Format(_))));
        let malformed = "[{\"image_id\": 3,";
        assert!(matches!(parse_predictions(malformed, None), Err(Error::Format(_))));
    }

    #[test]
    fn element_lines_skip_nested_and_strings() {
        let text = "[\n{\"a\": [1, 2], \"s\": \"x,]{\"},\n\n{}\n]";
        assert_eq!(element_lines(text), vec![2, 4]);
        assert!(element_lines("[]").is_empty());
    }
}
