use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// Train : val : test proportions.
pub const SPLIT_RATIO: [u64; 3] = [40, 1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: u64,
    pub val: u64,
    pub test: u64,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> u64 {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }

    fn add(&mut self, split: Split, n: u64) {
        match split {
            Split::Train => self.train += n,
            Split::Val => self.val += n,
            Split::Test => self.test += n,
        }
    }

    pub fn total(&self) -> u64 {
        self.train + self.val + self.test
    }

    pub fn tally(frame_counts: &[u64], splits: &[Split]) -> Self {
        let mut c = SplitCounts::default();
        for (&n, &s) in frame_counts.iter().zip(splits) {
            c.add(s, n);
        }
        c
    }
}

/// Assigns whole scenes to splits. Each scene, in order, goes to the split
/// furthest below its 40:1:2 share of the total frame count (ties go to the
/// earlier split).
pub fn split_dataset(frame_counts: &[u64]) -> Result<Vec<Split>> {
    let total: u64 = frame_counts.iter().sum();
    let parts: u64 = SPLIT_RATIO.iter().sum();
    if total < parts {
        return Err(Error::Configuration(format!(
            "need at least {parts} frames to split 40:1:2, got {total}"
        )));
    }
    // deficits are compared in units of 1/parts frames to stay in integers
    let mut assigned = [0u64; 3];
    let mut out = Vec::with_capacity(frame_counts.len());
    for &n in frame_counts {
        let deficit = |k: usize| (total * SPLIT_RATIO[k]) as i128 - (assigned[k] * parts) as i128;
        let mut best = 0;
        for k in 1..3 {
            if deficit(k) > deficit(best) {
                best = k;
            }
        }
        assigned[best] += n;
        out.push(Split::ALL[best]);
    }
    if let Some(k) = (0..3).find(|&k| assigned[k] == 0) {
        return Err(Error::Configuration(format!(
            "{} scenes cannot fill the {} split",
            frame_counts.len(),
            Split::ALL[k].as_str()
        )));
    }
    Ok(out)
}
