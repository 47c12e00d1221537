//! COCO-style detection metrics for boxes, masks and keypoints, and keypoint
//! pixel-error statistics.

mod keypoint_stats;
mod kernels;
mod matching;
mod report;

pub use keypoint_stats::{
    keypoint_error_stats, DensityHistogram, DiameterError, KeypointErrorStats, KeypointStat,
    HIST_BINS, HIST_MIN,
};
pub use kernels::{iou_bbox, iou_mask, oks, DEFAULT_OKS_SIGMA};
pub use matching::{average_precision, match_and_score, thresholds, ImageMatches, ScoredOutcome};
pub use report::EvalReport;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{Annotation, Keypoints};
use crate::dataset::{CocoDocument, DetectionResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Bbox,
    Segm,
    Keypoints,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Bbox, Task::Segm, Task::Keypoints];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Bbox => "bbox",
            Task::Segm => "segm",
            Task::Keypoints => "keypoints",
        }
    }

    fn accepts(self, p: &DetectionResult) -> bool {
        match self {
            Task::Bbox => p.bbox.is_some(),
            Task::Segm => p.segmentation.is_some(),
            Task::Keypoints => p.keypoints.is_some(),
        }
    }

    fn includes_gt(self, a: &Annotation) -> bool {
        a.iscrowd == 0 && (self != Task::Keypoints || a.keypoints.labeled() > 0)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bbox" => Ok(Task::Bbox),
            "segm" | "mask" => Ok(Task::Segm),
            "keypoints" | "kp" => Ok(Task::Keypoints),
            other => Err(Error::Parameter(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    /// Highest-scored predictions kept per image.
    pub max_dets: usize,
    pub oks_sigma: f64,
    /// Box IoU needed to pair instances for keypoint error statistics.
    pub keypoint_match_iou: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            max_dets: 100,
            oks_sigma: DEFAULT_OKS_SIGMA,
            keypoint_match_iou: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScores {
    pub task: Task,
    /// Mean over thresholds 0.50:0.05:0.95, percent. `None` without ground truth.
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub per_threshold: Vec<Option<f64>>,
    pub n_gt: u64,
    pub n_pred: u64,
}

/// Ground truths and score-sorted, truncated predictions of one image.
struct ImageSet<'a> {
    image_id: u64,
    gts: Vec<&'a Annotation>,
    preds: Vec<(usize, &'a DetectionResult)>,
}

fn group<'a>(
    gt: &'a CocoDocument,
    preds: &'a [DetectionResult],
    gt_filter: impl Fn(&Annotation) -> bool,
    pred_filter: impl Fn(&DetectionResult) -> bool,
    max_dets: usize,
) -> Result<Vec<ImageSet<'a>>> {
    let mut by_image: BTreeMap<u64, ImageSet<'a>> = gt
        .images
        .iter()
        .map(|img| {
            (
                img.id,
                ImageSet {
                    image_id: img.id,
                    gts: Vec::new(),
                    preds: Vec::new(),
                },
            )
        })
        .collect();
    for a in gt.annotations.iter().filter(|a| gt_filter(a)) {
        by_image
            .get_mut(&a.image_id)
            .ok_or_else(|| Error::Consistency(format!("annotation for unknown image {}", a.image_id)))?
            .gts
            .push(a);
    }
    for (k, p) in preds.iter().enumerate() {
        if !pred_filter(p) {
            continue;
        }
        by_image
            .get_mut(&p.image_id)
            .ok_or_else(|| Error::Consistency(format!("prediction {k} for unknown image {}", p.image_id)))?
            .preds
            .push((k, p));
    }
    let mut sets: Vec<ImageSet<'a>> = by_image.into_values().collect();
    for s in &mut sets {
        // stable: equal scores keep input order
        s.preds
            .sort_by(|a, b| b.1.score.partial_cmp(&a.1.score).unwrap_or(Ordering::Equal));
        s.preds.truncate(max_dets);
    }
    Ok(sets)
}

fn kernel_row(task: Task, p: &DetectionResult, gts: &[&Annotation], sigma: f64) -> Result<Vec<f64>> {
    gts.iter()
        .map(|g| match task {
            Task::Bbox => Ok(iou_bbox(p.bbox.as_ref().expect("filtered"), &g.bbox)),
            Task::Segm => iou_mask(p.segmentation.as_ref().expect("filtered"), &g.segmentation),
            Task::Keypoints => Ok(oks(
                p.keypoints.as_ref().expect("filtered"),
                &g.keypoints,
                g.area as f64,
                sigma,
            )
            .unwrap_or(0.0)),
        })
        .collect()
}

/// AP and AP50 for one task over all images of `gt`.
pub fn evaluate(
    gt: &CocoDocument,
    preds: &[DetectionResult],
    task: Task,
    params: &EvalParams,
) -> Result<TaskScores> {
    let sets = group(
        gt,
        preds,
        |a| task.includes_gt(a),
        |p| task.accepts(p),
        params.max_dets,
    )?;
    let kernels: Vec<Vec<Vec<f64>>> = sets
        .par_iter()
        .map(|s| {
            s.preds
                .iter()
                .map(|(_, p)| kernel_row(task, p, &s.gts, params.oks_sigma))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n_gt: usize = sets.iter().map(|s| s.gts.len()).sum();
    let n_pred: usize = sets.iter().map(|s| s.preds.len()).sum();

    let per_threshold: Vec<Option<f64>> = thresholds()
        .iter()
        .map(|&t| {
            let mut outcomes = Vec::with_capacity(n_pred);
            for (s, kernel) in sets.iter().zip(&kernels) {
                let m = match_and_score(kernel, s.gts.len(), t);
                for ((k, p), hit) in s.preds.iter().zip(&m.pred_to_gt) {
                    outcomes.push(ScoredOutcome {
                        score: p.score,
                        image_id: s.image_id,
                        pred_index: *k,
                        true_positive: hit.is_some(),
                    });
                }
            }
            average_precision(&outcomes, n_gt)
        })
        .collect();
    let ap = per_threshold
        .iter()
        .copied()
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64);
    Ok(TaskScores {
        task,
        ap,
        ap50: per_threshold[0],
        ap75: per_threshold[5],
        per_threshold,
        n_gt: n_gt as u64,
        n_pred: n_pred as u64,
    })
}

/// `(ground truth, prediction)` keypoint pairs from greedy box matching at
/// `params.keypoint_match_iou`. Predictions need both a box and keypoints.
pub fn match_keypoint_pairs(
    gt: &CocoDocument,
    preds: &[DetectionResult],
    params: &EvalParams,
) -> Result<Vec<(Keypoints, Keypoints)>> {
    let sets = group(
        gt,
        preds,
        |a| a.iscrowd == 0,
        |p| p.bbox.is_some() && p.keypoints.is_some(),
        params.max_dets,
    )?;
    let mut pairs = Vec::new();
    for s in &sets {
        let kernel: Vec<Vec<f64>> = s
            .preds
            .iter()
            .map(|(_, p)| kernel_row(Task::Bbox, p, &s.gts, params.oks_sigma))
            .collect::<Result<_>>()?;
        let m = match_and_score(&kernel, s.gts.len(), params.keypoint_match_iou);
        for ((_, p), hit) in s.preds.iter().zip(&m.pred_to_gt) {
            if let Some(g) = hit {
                pairs.push((s.gts[*g].keypoints, p.keypoints.expect("filtered")));
            }
        }
    }
    Ok(pairs)
}

/// Scores every task that has at least one matching prediction, plus keypoint
/// error statistics when keypoints are predicted.
pub fn evaluate_all(
    gt: &CocoDocument,
    preds: &[DetectionResult],
    tasks: &[Task],
    params: &EvalParams,
) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    for &task in tasks {
        let scores = evaluate(gt, preds, task, params)?;
        match task {
            Task::Bbox => report.bbox = Some(scores),
            Task::Segm => report.segm = Some(scores),
            Task::Keypoints => report.keypoints = Some(scores),
        }
    }
    if tasks.contains(&Task::Keypoints) {
        let pairs = match_keypoint_pairs(gt, preds, params)?;
        report.keypoint_stats = Some(keypoint_error_stats(&pairs));
    }
    Ok(report)
}
