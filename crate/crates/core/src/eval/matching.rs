//! Greedy per-image matching and the 101-point interpolated AP.

use std::cmp::Ordering;

/// IoU / OKS thresholds 0.50, 0.55, ..., 0.95.
pub fn thresholds() -> [f64; 10] {
    std::array::from_fn(|k| (50 + 5 * k) as f64 / 100.0)
}

/// Result of matching one image's score-sorted predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMatches {
    /// Ground-truth index matched by each prediction, `None` for a false positive.
    pub pred_to_gt: Vec<Option<usize>>,
    pub gt_matched: Vec<bool>,
}

impl ImageMatches {
    pub fn true_positives(&self) -> usize {
        self.pred_to_gt.iter().filter(|m| m.is_some()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.pred_to_gt.len() - self.true_positives()
    }

    pub fn false_negatives(&self) -> usize {
        self.gt_matched.iter().filter(|m| !**m).count()
    }
}

/// Greedy matching. `kernel[p][g]` is the similarity of prediction `p` (already
/// in descending score order) to ground truth `g`. Each prediction takes the
/// unmatched ground truth with the highest kernel value at or above
/// `threshold`; ties go to the lower ground-truth index.
pub fn match_and_score(kernel: &[Vec<f64>], n_gt: usize, threshold: f64) -> ImageMatches {
    let mut gt_matched = vec![false; n_gt];
    let pred_to_gt = kernel
        .iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &k) in row.iter().enumerate() {
                if gt_matched[g] || !(k >= threshold) {
                    continue;
                }
                if best.is_none_or(|(_, b)| k > b) {
                    best = Some((g, k));
                }
            }
            let (g, _) = best?;
            gt_matched[g] = true;
            Some(g)
        })
        .collect();
    ImageMatches {
        pred_to_gt,
        gt_matched,
    }
}

/// One scored prediction outcome entering the precision/recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredOutcome {
    pub score: f64,
    pub image_id: u64,
    pub pred_index: usize,
    pub true_positive: bool,
}

/// Interpolated AP in percent over recall points `0, 0.01, ..., 1`. `None`
/// when there is no ground truth.
pub fn average_precision(outcomes: &[ScoredOutcome], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    let mut order: Vec<&ScoredOutcome> = outcomes.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.image_id.cmp(&b.image_id))
            .then(a.pred_index.cmp(&b.pred_index))
    });
    let mut recall = Vec::with_capacity(order.len());
    let mut precision = Vec::with_capacity(order.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for o in &order {
        if o.true_positive {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for i in (1..precision.len()).rev() {
        if precision[i] > precision[i - 1] {
            precision[i - 1] = precision[i];
        }
    }
    let total: f64 = (0..=100)
        .map(|k| {
            let r = k as f64 / 100.0;
            let i = recall.partition_point(|&x| x < r);
            precision.get(i).copied().unwrap_or(0.0)
        })
        .sum();
    Some(100.0 * total / 101.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(score: f64, tp: bool) -> ScoredOutcome {
        ScoredOutcome {
            score,
            image_id: 1,
            pred_index: 0,
            true_positive: tp,
        }
    }

    #[test]
    fn thresholds_are_decimal() {
        let t = thresholds();
        assert_eq!(t[0], 0.5);
        assert_eq!(t[1], 0.55);
        assert_eq!(t[9], 0.95);
    }

    #[test]
    fn single_match() {
        let m = match_and_score(&[vec![0.8]], 1, 0.5);
        assert_eq!((m.true_positives(), m.false_positives(), m.false_negatives()), (1, 0, 0));
    }

    #[test]
    fn duplicate_prediction_is_false_positive() {
        let m = match_and_score(&[vec![0.7], vec![0.9]], 1, 0.5);
        assert_eq!(m.pred_to_gt, vec![Some(0), None]);
    }

    #[test]
    fn best_unmatched_and_ties() {
        let m = match_and_score(&[vec![0.6, 0.9, 0.9], vec![0.6, 0.95, 0.4]], 3, 0.5);
        assert_eq!(m.pred_to_gt, vec![Some(1), Some(0)]);
        let below = match_and_score(&[vec![0.49]], 1, 0.5);
        assert_eq!(below.pred_to_gt, vec![None]);
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&[outcome(1.0, true)], 1), Some(100.0));
        assert_eq!(average_precision(&[], 3), Some(0.0));
        assert_eq!(average_precision(&[], 0), None);
        let half = average_precision(&[outcome(1.0, true)], 2).unwrap();
        assert!((half - 51.0 / 101.0 * 100.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_envelope() {
        // TP, FP, TP over 2 gts: precision 1, 0.5, 0.667 -> envelope 1, 0.667, 0.667
        let o = [outcome(0.9, true), outcome(0.8, false), outcome(0.7, true)];
        let ap = average_precision(&o, 2).unwrap();
        let expect = (51.0 * 1.0 + 50.0 * (2.0 / 3.0)) / 101.0 * 100.0;
        assert!((ap - expect).abs() < 1e-12, "{ap} vs {expect}");
    }
}
