//! Matching kernels: box IoU, mask IoU and object keypoint similarity.

use crate::annotate::{rle_intersection, Keypoints, Rle};
use crate::error::{Error, Result};

/// Per-keypoint OKS falloff constant.
pub const DEFAULT_OKS_SIGMA: f64 = 0.05;

/// IoU of two `[x, y, w, h]` boxes; 0 when the union is empty.
pub fn iou_bbox(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let iw = ((a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0])).max(0.0);
    let ih = ((a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1])).max(0.0);
    let inter = iw * ih;
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// IoU of two masks on the same canvas, from their runs.
pub fn iou_mask(a: &Rle, b: &Rle) -> Result<f64> {
    if a.size != b.size {
        return Err(Error::Domain(format!(
            "mask canvases differ: {:?} vs {:?}",
            a.size, b.size
        )));
    }
    let inter = rle_intersection(a, b);
    let union = a.area() + b.area() - inter;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// Object keypoint similarity against a ground truth of `gt_area` pixels.
/// `None` when the ground truth has no labeled keypoint.
pub fn oks(pred: &Keypoints, gt: &Keypoints, gt_area: f64, sigma: f64) -> Option<f64> {
    let denom = 2.0 * gt_area * sigma * sigma;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, g) in pred.0.iter().zip(&gt.0) {
        if g.v == 0 {
            continue;
        }
        let d2 = (p.x - g.x).powi(2) + (p.y - g.y).powi(2);
        sum += if denom > 0.0 {
            (-d2 / denom).exp()
        } else if d2 == 0.0 {
            1.0
        } else {
            0.0
        };
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{mask_to_rle, Keypoint};

    #[test]
    fn box_cases() {
        let a = [0.0, 0.0, 10.0, 10.0];
        assert_eq!(iou_bbox(&a, &a), 1.0);
        assert_eq!(iou_bbox(&a, &[20.0, 0.0, 5.0, 5.0]), 0.0);
        assert_eq!(iou_bbox(&a, &[5.0, 0.0, 10.0, 10.0]), 50.0 / 150.0);
        assert_eq!(iou_bbox(&[1.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn mask_cases() {
        let m: Vec<bool> = (0..12).map(|k| k % 3 == 0).collect();
        let inv: Vec<bool> = m.iter().map(|v| !v).collect();
        let a = mask_to_rle(&m, 3, 4);
        let b = mask_to_rle(&inv, 3, 4);
        assert_eq!(iou_mask(&a, &a).unwrap(), 1.0);
        assert_eq!(iou_mask(&a, &b).unwrap(), 0.0);
        let c = mask_to_rle(&m, 4, 3);
        assert!(matches!(iou_mask(&a, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn oks_cases() {
        let mut gt = Keypoints::default();
        gt.0[3] = Keypoint { x: 10.0, y: 10.0, v: 2 };
        assert_eq!(oks(&gt, &gt, 400.0, 0.05), Some(1.0));
        let s = 400f64.sqrt();
        let mut pred = gt;
        pred.0[3].x += s * 0.05;
        let v = oks(&pred, &gt, 400.0, 0.05).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        pred.0[3].x = 1e9;
        assert_eq!(oks(&pred, &gt, 400.0, 0.05), Some(0.0));
        assert_eq!(oks(&gt, &Keypoints::default(), 400.0, 0.05), None);
    }
}
