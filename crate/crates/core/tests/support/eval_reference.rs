//! Brute-force COCO-style evaluation used as an oracle: masks are decoded to
//! bitmaps, matching walks predictions one at a time, and interpolated
//! precision is taken literally as the best precision at or beyond each
//! recall level. Also builds randomized fixtures.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sylvangen_core::annotate::{mask_to_rle, rle_decode, Annotation, Keypoint, Keypoints};
use sylvangen_core::dataset::{CocoDocument, CocoImage, DetectionResult};
use sylvangen_core::eval::Task;

pub const CANVAS: (usize, usize) = (48, 64);

/// Pixel-set IoU of two integer boxes.
pub fn box_iou_pixels(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let cells = |r: &[f64; 4]| {
        let mut v = Vec::new();
        for y in r[1] as i64..(r[1] + r[3]) as i64 {
            for x in r[0] as i64..(r[0] + r[2]) as i64 {
                v.push((x, y));
            }
        }
        v
    };
    let (ca, cb) = (cells(a), cells(b));
    let inter = ca.iter().filter(|p| cb.contains(p)).count();
    let union = ca.len() + cb.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn mask_iou_bitmap(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn oks_literal(pred: &Keypoints, gt: &Keypoints, area: f64, k: f64) -> f64 {
    let s = area.sqrt();
    let mut terms = Vec::new();
    for i in 0..5 {
        if gt.0[i].v > 0 {
            let dx = pred.0[i].x - gt.0[i].x;
            let dy = pred.0[i].y - gt.0[i].y;
            terms.push((-(dx * dx + dy * dy) / (2.0 * s * s * k * k)).exp());
        }
    }
    if terms.is_empty() {
        0.0
    } else {
        terms.iter().sum::<f64>() / terms.len() as f64
    }
}

/// Greedy assignment; returns the gt index taken by each prediction.
pub fn greedy(kernel: &[Vec<f64>], n_gt: usize, thr: f64) -> Vec<Option<usize>> {
    let mut taken = vec![false; n_gt];
    let mut out = Vec::new();
    for row in kernel {
        let mut pick: Option<usize> = None;
        for g in 0..n_gt {
            if taken[g] || row[g] < thr {
                continue;
            }
            match pick {
                None => pick = Some(g),
                Some(p) if row[g] > row[p] => pick = Some(g),
                _ => {}
            }
        }
        if let Some(g) = pick {
            taken[g] = true;
        }
        out.push(pick);
    }
    out
}

/// Returns `order` sorted by descending score, keeping input order on ties,
/// by repeated selection of the best remaining entry.
fn selection_order(scores: &[f64]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..scores.len()).collect();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        for k in 1..left.len() {
            if scores[left[k]] > scores[left[best]] {
                best = k;
            }
        }
        out.push(left.remove(best));
    }
    out
}

fn ap_literal(mut dets: Vec<(f64, u64, usize, bool)>, n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    // bubble sort by (score desc, image asc, index asc)
    let before = |a: &(f64, u64, usize, bool), b: &(f64, u64, usize, bool)| {
        a.0 > b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)))
    };
    for i in 0..dets.len() {
        for j in 0..dets.len() - 1 - i {
            if before(&dets[j + 1], &dets[j]) {
                dets.swap(j, j + 1);
            }
        }
    }
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0.0, 0.0);
    for d in &dets {
        if d.3 {
            tp += 1.0;
        } else {
            fp += 1.0;
        }
        points.push((tp / n_gt as f64, tp / (tp + fp)));
    }
    let mut sum = 0.0;
    for r in 0..=100 {
        let level = r as f64 / 100.0;
        let best = points
            .iter()
            .filter(|(rec, _)| *rec >= level)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
        sum += best;
    }
    Some(sum / 101.0 * 100.0)
}

pub struct ReferenceScores {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
}

pub fn reference_evaluate(gt: &CocoDocument, preds: &[DetectionResult], task: Task, oks_k: f64) -> ReferenceScores {
    let mut per_thr = Vec::new();
    let mut n_gt_total = 0;
    for t in 0..10 {
        let thr = (50 + 5 * t) as f64 / 100.0;
        let mut dets = Vec::new();
        let mut n_gt = 0;
        for img in &gt.images {
            let gts: Vec<&Annotation> = gt
                .annotations
                .iter()
                .filter(|a| a.image_id == img.id)
                .filter(|a| task != Task::Keypoints || a.keypoints.0.iter().any(|k| k.v > 0))
                .collect();
            n_gt += gts.len();
            let cand: Vec<(usize, &DetectionResult)> = preds
                .iter()
                .enumerate()
                .filter(|(_, p)| p.image_id == img.id)
                .filter(|(_, p)| match task {
                    Task::Bbox => p.bbox.is_some(),
                    Task::Segm => p.segmentation.is_some(),
                    Task::Keypoints => p.keypoints.is_some(),
                })
                .collect();
            let scores: Vec<f64> = cand.iter().map(|(_, p)| p.score).collect();
            let order: Vec<usize> = selection_order(&scores).into_iter().take(100).collect();
            let kernel: Vec<Vec<f64>> = order
                .iter()
                .map(|&o| {
                    let p = cand[o].1;
                    gts.iter()
                        .map(|g| match task {
                            Task::Bbox => box_iou_pixels(p.bbox.as_ref().unwrap(), &g.bbox),
                            Task::Segm => mask_iou_bitmap(
                                &rle_decode(p.segmentation.as_ref().unwrap()).unwrap(),
                                &rle_decode(&g.segmentation).unwrap(),
                            ),
                            Task::Keypoints => oks_literal(p.keypoints.as_ref().unwrap(), &g.keypoints, g.area as f64, oks_k),
                        })
                        .collect()
                })
                .collect();
            let m = greedy(&kernel, gts.len(), thr);
            for (k, &o) in order.iter().enumerate() {
                dets.push((cand[o].1.score, img.id, cand[o].0, m[k].is_some()));
            }
        }
        n_gt_total = n_gt;
        per_thr.push(ap_literal(dets, n_gt));
    }
    let ap = if n_gt_total == 0 {
        None
    } else {
        Some(per_thr.iter().map(|v| v.unwrap()).sum::<f64>() / 10.0)
    };
    ReferenceScores { ap, ap50: per_thr[0] }
}

fn random_box(rng: &mut ChaCha8Rng) -> [usize; 4] {
    let (h, w) = CANVAS;
    let bw = rng.gen_range(3..20);
    let bh = rng.gen_range(3..24);
    [rng.gen_range(0..w - bw), rng.gen_range(0..h - bh), bw, bh]
}

/// Blob inside a box: rows of varying extent so masks are not rectangles.
fn blob(rng: &mut ChaCha8Rng, b: [usize; 4]) -> Vec<bool> {
    let (h, w) = CANVAS;
    let mut m = vec![false; h * w];
    for y in b[1]..b[1] + b[3] {
        let lo = b[0] + rng.gen_range(0..=b[2] / 3);
        let hi = b[0] + b[2] - rng.gen_range(0..=b[2] / 3);
        for x in lo..hi.max(lo + 1) {
            m[y * w + x] = true;
        }
    }
    m
}

fn tight_box(m: &[bool]) -> Option<[f64; 4]> {
    let (h, w) = CANVAS;
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if m[y * w + x] {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    (x0 != usize::MAX).then(|| [x0 as f64, y0 as f64, (x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64])
}

fn random_keypoints(rng: &mut ChaCha8Rng, b: &[f64; 4]) -> Keypoints {
    Keypoints(std::array::from_fn(|_| {
        let v = [0u8, 1, 2, 2][rng.gen_range(0..4)];
        if v == 0 {
            Keypoint::default()
        } else {
            Keypoint {
                x: b[0] + rng.gen_range(0.0..b[2]),
                y: b[1] + rng.gen_range(0.0..b[3]),
                v,
            }
        }
    }))
}

/// Ten images of randomized ground truth plus jittered, duplicated and
/// spurious predictions with tied scores.
pub fn random_fixture(rng: &mut ChaCha8Rng, n_images: u64) -> (CocoDocument, Vec<DetectionResult>) {
    let (h, w) = CANVAS;
    let mut images = Vec::new();
    let mut anns = Vec::new();
    let mut preds = Vec::new();
    let mut next_id = 1;
    for image_id in 1..=n_images {
        images.push(CocoImage {
            id: image_id,
            file_name: format!("{image_id}.png"),
            depth_file_name: None,
            width: w as u32,
            height: h as u32,
        });
        for _ in 0..rng.gen_range(0..6) {
            let b0 = random_box(rng);
            let mask = blob(rng, b0);
            let bbox = tight_box(&mask).unwrap();
            let rle = mask_to_rle(&mask, h, w);
            let kp = random_keypoints(rng, &bbox);
            anns.push(Annotation {
                annotation_id: next_id,
                image_id,
                category_id: 1,
                instance_id: next_id as u32,
                bbox,
                area: rle.area(),
                segmentation: rle,
                iscrowd: 0,
                num_keypoints: kp.labeled(),
                keypoints: kp,
                distance_m: 5.0,
            });
            next_id += 1;
            // jittered copies of the ground truth
            for _ in 0..rng.gen_range(0..3) {
                let (dx, dy) = (rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3));
                let mut shifted = vec![false; h * w];
                for y in 0..h as i64 {
                    for x in 0..w as i64 {
                        let (sx, sy) = (x - dx, y - dy);
                        if sx >= 0 && sy >= 0 && sx < w as i64 && sy < h as i64 {
                            shifted[(y as usize) * w + x as usize] = mask[sy as usize * w + sx as usize];
                        }
                    }
                }
                let Some(b) = tight_box(&shifted) else { continue };
                let mut kp = kp;
                for k in &mut kp.0 {
                    k.x += rng.gen_range(-2.0..2.0);
                    k.y += rng.gen_range(-2.0..2.0);
                    k.v = 2;
                }
                preds.push(DetectionResult {
                    image_id,
                    category_id: 1,
                    score: rng.gen_range(0..=10) as f64 / 10.0,
                    bbox: Some(b),
                    segmentation: Some(mask_to_rle(&shifted, h, w)),
                    keypoints: Some(kp),
                });
            }
        }
        for _ in 0..rng.gen_range(0..3) {
            let b0 = random_box(rng);
            let mask = blob(rng, b0);
            let b = tight_box(&mask).unwrap();
            let kp = random_keypoints(rng, &b);
            preds.push(DetectionResult {
                image_id,
                category_id: 1,
                score: rng.gen_range(0..=10) as f64 / 10.0,
                bbox: Some(b),
                segmentation: Some(mask_to_rle(&mask, h, w)),
                keypoints: Some(kp),
            });
        }
    }
    // keep a stable but not image-sorted prediction order
    let n = preds.len();
    for i in (1..n).rev() {
        preds.swap(i, rng.gen_range(0..=i));
    }
    (CocoDocument::new(images, anns), preds)
}

/// Random row-major masks: sparse noise, dense noise, or blobs.
pub fn random_mask(rng: &mut ChaCha8Rng) -> (usize, usize, Vec<bool>) {
    let h = rng.gen_range(1..24);
    let w = rng.gen_range(1..24);
    let mode = rng.gen_range(0..3);
    let p = rng.gen_range(0.0..1.0);
    let m = (0..h * w)
        .map(|k| match mode {
            0 => rng.gen_bool(p),
            1 => rng.gen_bool(0.5),
            _ => {
                let (y, x) = (k / w, k % w);
                ((x as f64 - w as f64 * p).powi(2) + (y as f64 - h as f64 / 2.0).powi(2)) < (w.min(h) as f64 * p).powi(2)
            }
        })
        .collect();
    (h, w, m)
}
