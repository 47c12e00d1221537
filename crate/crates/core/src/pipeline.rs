//! End-to-end dataset generation: scenes, frames, annotations, splits and the
//! manifest, driven by one configuration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{extract_instances, AnnotateConfig, Annotation};
use crate::dataset::{
    export_coco, split_dataset, write_frame_images, DatasetManifest, FrameRecord, SceneEntry, Split,
    SplitCounts, FRAMES_PER_SCENE_RANGE,
};
use crate::error::{Error, Result};
use crate::forest::SpeciesTable;
use crate::render::{place_camera, render_frame, CameraConfig, CameraPose, ConditionWeights, Scene, SceneConfig};
use crate::seed::{derive_seed, rng};
use crate::GENERATOR_VERSION;

/// Sub-stream of a scene seed from which frame counts are drawn.
const FRAME_COUNT_STREAM: u64 = 3;
/// Sub-stream of a scene seed under which frame seeds live.
const FRAME_STREAM: u64 = 4;
const CAMERA_ATTEMPTS: u64 = 32;
/// Minimum horizontal clearance between the camera and a trunk surface, meters.
const CAMERA_CLEARANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub master_seed: u64,
    pub n_scenes: u64,
    /// Inclusive bounds; each scene draws its frame count uniformly.
    pub frames_per_scene_range: [u64; 2],
    /// `[width, height]` in pixels.
    pub resolution: [u32; 2],
    /// Depth mapped to gray level 0, meters.
    pub d_max: f64,
    pub annotation: AnnotateConfig,
    pub camera: CameraConfig,
    pub scene: SceneConfig,
    pub weights: ConditionWeights,
    pub output_dir: PathBuf,
    /// TOML species table; the built-in table when absent.
    pub species_file: Option<PathBuf>,
    /// Also write a 16-bit instance-id PNG per frame.
    pub write_instance_ids: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            master_seed: 0,
            n_scenes: 43,
            frames_per_scene_range: FRAMES_PER_SCENE_RANGE,
            resolution: [800, 800],
            d_max: 30.0,
            annotation: AnnotateConfig::default(),
            camera: CameraConfig::default(),
            scene: SceneConfig::default(),
            weights: ConditionWeights::default(),
            output_dir: PathBuf::from("dataset"),
            species_file: None,
            write_instance_ids: false,
        }
    }
}

impl GenerateConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.frames_per_scene_range;
        if lo == 0 || lo > hi {
            return Err(Error::Configuration(format!(
                "frames_per_scene_range [{lo}, {hi}] must be non-empty and positive"
            )));
        }
        if self.n_scenes == 0 {
            return Err(Error::Configuration("n_scenes must be positive".into()));
        }
        if self.resolution[0] == 0 || self.resolution[1] == 0 {
            return Err(Error::Configuration("resolution must be positive".into()));
        }
        if !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(Error::Configuration("d_max must be positive".into()));
        }
        if !(self.annotation.radius_m > 0.0) {
            return Err(Error::Configuration("annotation radius must be positive".into()));
        }
        for r in [self.camera.height_range, self.camera.pitch_range] {
            if !(r[0] <= r[1]) {
                return Err(Error::Configuration("camera ranges must be ordered".into()));
            }
        }
        self.weights.validate()?;
        self.scene.spawn.validate()?;
        Ok(())
    }

    fn camera_config(&self) -> CameraConfig {
        CameraConfig {
            width: self.resolution[0],
            height: self.resolution[1],
            ..self.camera.clone()
        }
    }

    fn species(&self) -> Result<SpeciesTable> {
        match &self.species_file {
            Some(p) => SpeciesTable::load(p),
            None => Ok(SpeciesTable::default()),
        }
    }
}

pub fn scene_seed(master_seed: u64, scene_index: u64) -> u64 {
    derive_seed(master_seed, scene_index)
}

pub fn frame_seed(scene_seed: u64, frame_index: u64) -> u64 {
    derive_seed(derive_seed(scene_seed, FRAME_STREAM), frame_index)
}

/// Frame count of one scene, drawn from its own seed.
pub fn scene_frame_count(scene_seed: u64, range: [u64; 2]) -> u64 {
    rng(derive_seed(scene_seed, FRAME_COUNT_STREAM)).gen_range(range[0]..=range[1])
}

/// Camera for one frame, redrawn (up to a fixed number of attempts) while it
/// stands too close to a trunk.
pub fn frame_camera(scene: &Scene, frame_seed: u64, config: &CameraConfig) -> Result<CameraPose> {
    let mut pose = place_camera(&scene.grid, derive_seed(frame_seed, 0), config)?;
    for attempt in 1..CAMERA_ATTEMPTS {
        let clear = scene.trees.iter().all(|t| {
            t.base_position.horizontal_distance(pose.position) >= CAMERA_CLEARANCE + t.dbh / 2.0
        });
        if clear {
            break;
        }
        pose = place_camera(&scene.grid, derive_seed(frame_seed, attempt), config)?;
    }
    Ok(pose)
}

/// Renders and annotates one frame. A pure function of the scene, the frame
/// seed and the configuration.
pub fn generate_frame(
    scene: &Scene,
    frame_seed: u64,
    image_id: u64,
    config: &GenerateConfig,
) -> Result<(crate::render::FrameBundle, Vec<Annotation>)> {
    let camera = frame_camera(scene, frame_seed, &config.camera_config())?;
    let conditions = config.weights.sample(&mut rng(derive_seed(frame_seed, CAMERA_ATTEMPTS)));
    let frame = render_frame(scene, &camera, &conditions, derive_seed(frame_seed, CAMERA_ATTEMPTS + 1))?;
    let annotations = extract_instances(&frame, scene, image_id, &config.annotation)?;
    Ok((frame, annotations))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub frames: u64,
    pub annotations: u64,
    pub split_counts: SplitCounts,
    pub elapsed_s: f64,
    pub output_dir: PathBuf,
    /// Set when too few scenes were available for a 40:1:2 split and every
    /// scene went to train.
    pub all_train: bool,
}

impl GenerateSummary {
    pub fn frames_per_minute(&self) -> f64 {
        if self.elapsed_s > 0.0 {
            60.0 * self.frames as f64 / self.elapsed_s
        } else {
            f64::INFINITY
        }
    }
}

/// Worker count from `SYLVANGEN_THREADS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("SYLVANGEN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Generates the full dataset into `config.output_dir` using `workers` threads.
/// Output bytes do not depend on the worker count.
pub fn generate(config: &GenerateConfig, workers: usize) -> Result<GenerateSummary> {
    generate_with_progress(config, workers, |_, _| {})
}

/// Like [`generate`], calling `progress(frames_done, frames_total)` after each scene.
pub fn generate_with_progress(
    config: &GenerateConfig,
    workers: usize,
    mut progress: impl FnMut(u64, u64),
) -> Result<GenerateSummary> {
    config.validate()?;
    let species = config.species()?;
    let start = Instant::now();
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let seeds: Vec<u64> = (0..config.n_scenes).map(|k| scene_seed(config.master_seed, k)).collect();
    let counts: Vec<u64> = seeds
        .iter()
        .map(|&s| scene_frame_count(s, config.frames_per_scene_range))
        .collect();
    let (splits, all_train) = match split_dataset(&counts) {
        Ok(s) => (s, false),
        Err(Error::Configuration(_)) => (vec![Split::Train; counts.len()], true),
        Err(e) => return Err(e),
    };
    let total: u64 = counts.iter().sum();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;

    let mut records: [Vec<FrameRecord>; 3] = Default::default();
    let mut scenes = Vec::with_capacity(seeds.len());
    let mut next_id = 1u64;
    for (k, (&seed, (&count, &split))) in seeds.iter().zip(counts.iter().zip(&splits)).enumerate() {
        let scene = pool.install(|| Scene::generate(seed, &config.scene, species.clone()))?;
        let first = next_id;
        let frames: Vec<FrameRecord> = pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|f| {
                    let image_id = first + f;
                    let (frame, annotations) = generate_frame(&scene, frame_seed(seed, f), image_id, config)?;
                    let image =
                        write_frame_images(out, split, image_id, &frame, config.d_max, config.write_instance_ids)?;
                    Ok(FrameRecord { image, annotations })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        records[split as usize].extend(frames);
        scenes.push(SceneEntry {
            index: k as u64,
            scene_seed: seed,
            frame_count: count,
            first_frame_id: first,
            split,
        });
        next_id += count;
        progress(next_id - 1, total);
    }

    let mut ann_id = 1u64;
    let mut n_annotations = 0u64;
    for split in Split::ALL {
        let recs = &mut records[split as usize];
        for r in recs.iter_mut() {
            for a in &mut r.annotations {
                a.annotation_id = ann_id;
                ann_id += 1;
            }
            n_annotations += r.annotations.len() as u64;
        }
        export_coco(recs, out, split)?;
    }

    let manifest = DatasetManifest {
        generator_version: GENERATOR_VERSION.to_string(),
        master_seed: config.master_seed,
        resolution: config.resolution,
        frames_per_scene_range: config.frames_per_scene_range,
        split_counts: SplitCounts::tally(&counts, &splits),
        scenes,
    };
    manifest.validate()?;
    manifest.write(&out.join("manifest.json"))?;

    Ok(GenerateSummary {
        frames: total,
        annotations: n_annotations,
        split_counts: manifest.split_counts,
        elapsed_s: start.elapsed().as_secs_f64(),
        output_dir: out.clone(),
        all_train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let c = GenerateConfig::default();
        let text = c.to_toml_string();
        assert_eq!(GenerateConfig::from_toml_str(&text).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let c = GenerateConfig::from_toml_str("master_seed = 9\n[annotation]\nradius_m = 8.0\n").unwrap();
        assert_eq!(c.master_seed, 9);
        assert_eq!(c.annotation.radius_m, 8.0);
        assert_eq!(c.annotation.min_pixels, AnnotateConfig::default().min_pixels);
        assert_eq!(c.resolution, [800, 800]);
    }

    #[test]
    fn unknown_keys_and_bad_ranges_rejected() {
        assert!(matches!(
            GenerateConfig::from_toml_str("master_sede = 1"),
            Err(Error::Configuration(_))
        ));
        let c = GenerateConfig {
            frames_per_scene_range: [10, 5],
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Configuration(_))));
        let mut c = GenerateConfig::default();
        c.weights.weather = [0.0; 4];
        assert!(matches!(c.validate(), Err(Error::Configuration(_))));
    }

    #[test]
    fn seeds_and_counts_are_stable() {
        let s = scene_seed(7, 0);
        assert_eq!(s, scene_seed(7, 0));
        assert_ne!(frame_seed(s, 0), frame_seed(s, 1));
        for k in 0..50 {
            let n = scene_frame_count(scene_seed(7, k), [200, 1000]);
            assert!((200..=1000).contains(&n));
        }
        assert_eq!(scene_frame_count(s, [5, 5]), 5);
    }
}
