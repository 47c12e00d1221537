//! Pixel-error statistics for keypoints of box-matched instances.

use serde::{Deserialize, Serialize};

use crate::annotate::Keypoints;
use crate::forest::{KeypointKind, KEYPOINT_COUNT};

/// Histogram bins per axis; bins are 1 px wide over `[-50, 50)`.
pub const HIST_BINS: usize = 100;
pub const HIST_MIN: f64 = -50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointStat {
    pub name: String,
    pub count: u64,
    pub mean_dx: f64,
    pub mean_dy: f64,
    /// Population standard deviations.
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub mean_euclidean: f64,
}

/// 2-D histogram of `(dx, dy)`. Out-of-range errors are clamped into the
/// edge bins so the total mass equals the number of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub name: String,
    pub min: f64,
    pub bin_width: f64,
    pub bins: usize,
    /// Row-major, rows indexed by `dy`, columns by `dx`.
    pub counts: Vec<u64>,
}

impl DensityHistogram {
    fn new(name: &str) -> Self {
        DensityHistogram {
            name: name.to_string(),
            min: HIST_MIN,
            bin_width: 1.0,
            bins: HIST_BINS,
            counts: vec![0; HIST_BINS * HIST_BINS],
        }
    }

    fn bin(&self, d: f64) -> usize {
        let k = ((d - self.min) / self.bin_width).floor();
        k.clamp(0.0, (self.bins - 1) as f64) as usize
    }

    pub fn add(&mut self, dx: f64, dy: f64) {
        let (i, j) = (self.bin(dx), self.bin(dy));
        self.counts[j * self.bins + i] += 1;
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// CSV with one `dx_lo,dy_lo,count` line per non-empty bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dx_lo,dy_lo,count\n");
        for j in 0..self.bins {
            for i in 0..self.bins {
                let c = self.counts[j * self.bins + i];
                if c > 0 {
                    let x = self.min + i as f64 * self.bin_width;
                    let y = self.min + j as f64 * self.bin_width;
                    out.push_str(&format!("{x},{y},{c}\n"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterError {
    pub count: u64,
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointErrorStats {
    pub matched_instances: u64,
    pub per_keypoint: Vec<KeypointStat>,
    pub density: Vec<DensityHistogram>,
    /// Absolute difference of the left-right keypoint distance, pixels.
    pub diameter: DiameterError,
}

impl KeypointErrorStats {
    pub fn is_empty(&self) -> bool {
        self.matched_instances == 0
    }
}

/// Welford running mean and variance.
#[derive(Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sigma(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).max(0.0).sqrt()
        }
    }
}

/// Statistics over `(ground truth, prediction)` pairs. Only keypoints labeled
/// in the ground truth contribute.
pub fn keypoint_error_stats(pairs: &[(Keypoints, Keypoints)]) -> KeypointErrorStats {
    let mut dx: Vec<Moments> = (0..KEYPOINT_COUNT).map(|_| Moments::default()).collect();
    let mut dy: Vec<Moments> = (0..KEYPOINT_COUNT).map(|_| Moments::default()).collect();
    let mut dist: Vec<Moments> = (0..KEYPOINT_COUNT).map(|_| Moments::default()).collect();
    let mut density: Vec<DensityHistogram> =
        KeypointKind::ALL.iter().map(|k| DensityHistogram::new(k.name())).collect();
    let mut diameter = Moments::default();
    let (l, r) = (KeypointKind::DiameterLeft as usize, KeypointKind::DiameterRight as usize);

    for (gt, pred) in pairs {
        for k in 0..KEYPOINT_COUNT {
            let (g, p) = (gt.0[k], pred.0[k]);
            if g.v == 0 {
                continue;
            }
            let (ex, ey) = (p.x - g.x, p.y - g.y);
            dx[k].push(ex);
            dy[k].push(ey);
            dist[k].push(ex.hypot(ey));
            density[k].add(ex, ey);
        }
        if gt.0[l].v > 0 && gt.0[r].v > 0 {
            let width = |kp: &Keypoints| (kp.0[r].x - kp.0[l].x).hypot(kp.0[r].y - kp.0[l].y);
            diameter.push((width(pred) - width(gt)).abs());
        }
    }

    let per_keypoint = KeypointKind::ALL
        .iter()
        .enumerate()
        .map(|(k, kind)| KeypointStat {
            name: kind.name().to_string(),
            count: dx[k].n,
            mean_dx: dx[k].mean(),
            mean_dy: dy[k].mean(),
            sigma_x: dx[k].sigma(),
            sigma_y: dy[k].sigma(),
            mean_euclidean: dist[k].mean(),
        })
        .collect();
    KeypointErrorStats {
        matched_instances: pairs.len() as u64,
        per_keypoint,
        density,
        diameter: DiameterError {
            count: diameter.n,
            mean: diameter.mean(),
            sigma: diameter.sigma(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::Keypoint;

    fn kps(offset: (f64, f64)) -> Keypoints {
        Keypoints(std::array::from_fn(|k| Keypoint {
            x: 100.0 + 7.0 * k as f64 + offset.0,
            y: 200.0 - 13.0 * k as f64 + offset.1,
            v: 2,
        }))
    }

    #[test]
    fn identical_is_zero() {
        let s = keypoint_error_stats(&[(kps((0.0, 0.0)), kps((0.0, 0.0))); 4]);
        for k in &s.per_keypoint {
            assert_eq!((k.mean_dx, k.mean_dy, k.sigma_x, k.sigma_y, k.mean_euclidean), (0.0, 0.0, 0.0, 0.0, 0.0));
            assert_eq!(k.count, 4);
        }
        assert_eq!(s.diameter.mean, 0.0);
    }

    #[test]
    fn constant_offset() {
        let s = keypoint_error_stats(&[(kps((0.0, 0.0)), kps((3.0, -4.0))); 10]);
        for k in &s.per_keypoint {
            assert!((k.mean_dx - 3.0).abs() < 1e-12 && (k.mean_dy + 4.0).abs() < 1e-12);
            assert!(k.sigma_x < 1e-6 && k.sigma_y < 1e-6);
            assert!((k.mean_euclidean - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_conserves_mass() {
        let mut pairs = vec![(kps((0.0, 0.0)), kps((80.0, -120.0)))];
        pairs.push((kps((0.0, 0.0)), kps((0.5, 0.5))));
        let mut hidden = kps((0.0, 0.0));
        hidden.0[2].v = 0;
        pairs.push((hidden, kps((1.0, 1.0))));
        let s = keypoint_error_stats(&pairs);
        assert_eq!(s.density[0].mass(), 3);
        assert_eq!(s.density[2].mass(), 2);
        // clamped into the corner bin dx=+49, dy=-50
        assert_eq!(s.density[0].counts[99], 1);
        assert_eq!(s.diameter.count, 2);
        assert!(s.density[0].to_csv().starts_with("dx_lo,dy_lo,count\n"));
    }

    #[test]
    fn empty_input() {
        let s = keypoint_error_stats(&[]);
        assert!(s.is_empty());
        assert!(s.per_keypoint.iter().all(|k| k.count == 0));
    }
}
