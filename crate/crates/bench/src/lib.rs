//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sylvangen_core::dataset::{predictions_from_ground_truth, CocoImage};
use sylvangen_core::pipeline::{frame_seed, generate_frame, scene_seed, GenerateConfig};
use sylvangen_core::{CocoDocument, DetectionResult, Result, Scene, SpeciesTable};

pub fn bench_config(width: u32, height: u32) -> GenerateConfig {
    GenerateConfig {
        resolution: [width, height],
        ..GenerateConfig::default()
    }
}

pub fn bench_scene(config: &GenerateConfig) -> Result<Scene> {
    Scene::generate(scene_seed(config.master_seed, 0), &config.scene, SpeciesTable::default())
}

/// Ground truth from `frames` rendered frames of one scene.
pub fn generated_document(config: &GenerateConfig, frames: u64) -> Result<CocoDocument> {
    let scene = bench_scene(config)?;
    let s = scene_seed(config.master_seed, 0);
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    for f in 0..frames {
        let id = f + 1;
        let (_, mut anns) = generate_frame(&scene, frame_seed(s, f), id, config)?;
        for a in &mut anns {
            a.annotation_id = annotations.len() as u64 + 1;
            annotations.push(a.clone());
        }
        images.push(CocoImage {
            id,
            file_name: format!("{id:06}_rgb.png"),
            depth_file_name: None,
            width: config.resolution[0],
            height: config.resolution[1],
        });
    }
    Ok(CocoDocument::new(images, annotations))
}

/// Ground-truth copies with jittered boxes and keypoints and random scores.
pub fn noisy_predictions(doc: &CocoDocument, seed: u64) -> Vec<DetectionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preds = predictions_from_ground_truth(doc, 1.0);
    for p in &mut preds {
        p.score = rng.gen_range(0.05..1.0);
        if let Some(b) = &mut p.bbox {
            b[0] += rng.gen_range(-4.0..4.0);
            b[1] += rng.gen_range(-4.0..4.0);
        }
        if let Some(kp) = &mut p.keypoints {
            for k in &mut kp.0 {
                k.x += rng.gen_range(-3.0..3.0);
                k.y += rng.gen_range(-3.0..3.0);
            }
        }
    }
    preds
}

/// Row-major random blob masks of the given size.
pub fn random_masks(n: usize, height: usize, width: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (cx, cy) = (rng.gen_range(0.0..width as f64), rng.gen_range(0.0..height as f64));
            let r = rng.gen_range(4.0..width.min(height) as f64 / 2.0);
            (0..height * width)
                .map(|k| {
                    let (x, y) = ((k % width) as f64, (k / width) as f64);
                    (x - cx).powi(2) + ((y - cy) / 3.0).powi(2) < r * r
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_nonempty() {
        let doc = generated_document(&bench_config(96, 72), 3).unwrap();
        assert_eq!(doc.images.len(), 3);
        assert_eq!(noisy_predictions(&doc, 1).len(), doc.annotations.len());
        assert!(random_masks(4, 40, 30, 2).iter().all(|m| m.len() == 1200));
    }
}
