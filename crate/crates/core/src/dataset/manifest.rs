use std::path::Path;

use serde::{Deserialize, Serialize};

use super::json::write_json_file;
use super::split::{Split, SplitCounts};
use crate::error::{Error, Result};

/// Allowed frames per scene.
pub const FRAMES_PER_SCENE_RANGE: [u64; 2] = [200, 1000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub index: u64,
    pub scene_seed: u64,
    pub frame_count: u64,
    /// Image id of the scene's first frame; the rest follow contiguously.
    pub first_frame_id: u64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub generator_version: String,
    pub master_seed: u64,
    /// `[width, height]`.
    pub resolution: [u32; 2],
    /// Bounds the scene frame counts were checked against.
    pub frames_per_scene_range: [u64; 2],
    pub scenes: Vec<SceneEntry>,
    pub split_counts: SplitCounts,
}

impl DatasetManifest {
    pub fn total_frames(&self) -> u64 {
        self.scenes.iter().map(|s| s.frame_count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.frames_per_scene_range;
        if lo == 0 || lo > hi {
            return Err(Error::Configuration(format!(
                "invalid frames_per_scene_range [{lo}, {hi}]"
            )));
        }
        let mut next_id = self.scenes.first().map_or(0, |s| s.first_frame_id);
        for s in &self.scenes {
            if !(lo..=hi).contains(&s.frame_count) {
                return Err(Error::Consistency(format!(
                    "scene {} has {} frames, outside [{lo}, {hi}]",
                    s.index, s.frame_count
                )));
            }
            if s.first_frame_id != next_id {
                return Err(Error::Consistency(format!(
                    "scene {} frame ids are not contiguous",
                    s.index
                )));
            }
            next_id += s.frame_count;
        }
        let counts: Vec<u64> = self.scenes.iter().map(|s| s.frame_count).collect();
        let splits: Vec<Split> = self.scenes.iter().map(|s| s.split).collect();
        if SplitCounts::tally(&counts, &splits) != self.split_counts {
            return Err(Error::Consistency("split_counts do not match scene splits".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        m.validate()?;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json_file(path, self)
    }
}
