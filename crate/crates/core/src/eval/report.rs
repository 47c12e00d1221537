use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{KeypointErrorStats, TaskScores};
use crate::dataset::json::write_json_file;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bbox: Option<TaskScores>,
    pub segm: Option<TaskScores>,
    pub keypoints: Option<TaskScores>,
    pub keypoint_stats: Option<KeypointErrorStats>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

fn ap(s: &Option<TaskScores>) -> Option<f64> {
    s.as_ref().and_then(|s| s.ap)
}

fn ap50(s: &Option<TaskScores>) -> Option<f64> {
    s.as_ref().and_then(|s| s.ap50)
}

impl EvalReport {
    /// Row label naming the evaluated heads, e.g. `keypoint & mask`.
    fn task_label(&self) -> &'static str {
        match (self.segm.is_some(), self.keypoints.is_some()) {
            (true, true) => "keypoint & mask",
            (true, false) => "mask-only",
            (false, true) => "keypoint-only",
            (false, false) => "bbox-only",
        }
    }

    /// Plain-text tables: box/mask AP with AP50, the per-task layout, and
    /// keypoint error statistics when present.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>10} | {:>8} | {:>8} | {:>8} | {:>8}", "", "AP-bb", "AP-mask", "AP50-bb", "AP50-mask");
        let _ = writeln!(
            out,
            "{:>10} | {:>8} | {:>8} | {:>8} | {:>8}",
            "this run",
            cell(ap(&self.bbox)),
            cell(ap(&self.segm)),
            cell(ap50(&self.bbox)),
            cell(ap50(&self.segm))
        );
        out.push('\n');
        let _ = writeln!(out, "{:>16} | {:>8} | {:>8} | {:>8}", "Tasks", "AP-bb", "AP-mask", "AP-kp");
        let _ = writeln!(
            out,
            "{:>16} | {:>8} | {:>8} | {:>8}",
            self.task_label(),
            cell(ap(&self.bbox)),
            cell(ap(&self.segm)),
            cell(ap(&self.keypoints))
        );
        if let Some(stats) = &self.keypoint_stats {
            out.push('\n');
            if stats.is_empty() {
                out.push_str("keypoint errors: no box-matched instances\n");
            } else {
                let _ = writeln!(out, "keypoint errors over {} matched instances (px)", stats.matched_instances);
                let _ = writeln!(
                    out,
                    "{:>15} | {:>6} | {:>8} | {:>8} | {:>8} | {:>8} | {:>8}",
                    "keypoint", "n", "mean dx", "mean dy", "sigma x", "sigma y", "mean |d|"
                );
                for k in &stats.per_keypoint {
                    let _ = writeln!(
                        out,
                        "{:>15} | {:>6} | {:>8.2} | {:>8.2} | {:>8.2} | {:>8.2} | {:>8.2}",
                        k.name, k.count, k.mean_dx, k.mean_dy, k.sigma_x, k.sigma_y, k.mean_euclidean
                    );
                }
                let _ = writeln!(
                    out,
                    "diameter error: mean {:.2} px, sigma {:.2} px over {} instances",
                    stats.diameter.mean, stats.diameter.sigma, stats.diameter.count
                );
            }
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json_file(path, self)
    }

    /// One `{keypoint}_density.csv` per keypoint into `dir`.
    pub fn write_density_csv(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let Some(stats) = &self.keypoint_stats else {
            return Ok(Vec::new());
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        stats
            .density
            .iter()
            .map(|h| {
                let path = dir.join(format!("{}_density.csv", h.name));
                std::fs::write(&path, h.to_csv()).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Task;

    #[test]
    fn text_marks_missing_tasks() {
        let report = EvalReport {
            bbox: Some(TaskScores {
                task: Task::Bbox,
                ap: Some(55.2),
                ap50: Some(87.74),
                ap75: None,
                per_threshold: vec![],
                n_gt: 1,
                n_pred: 1,
            }),
            ..Default::default()
        };
        let text = report.to_text();
        assert!(text.contains("55.20") && text.contains("87.74"));
        assert!(text.contains("bbox-only"));
        assert!(text.lines().nth(1).unwrap().contains('-'));
    }
}
