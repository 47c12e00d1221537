mod inspect;
mod stats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sylvangen_core::dataset::{load_predictions, CocoDocument};
use sylvangen_core::eval::{evaluate_all, EvalParams, Task};
use sylvangen_core::pipeline::{default_workers, generate_with_progress, GenerateConfig};
use sylvangen_core::terrain::{generate_heightmap, HeightmapParams};

#[derive(Parser)]
#[command(name = "sylvangen", version, about = "Synthetic forest dataset generator and evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render and annotate a dataset.
    Generate {
        /// TOML configuration; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        scenes: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Image size as WxH.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<[u32; 2]>,
        /// Fixed number of frames per scene.
        #[arg(long)]
        frames: Option<u64>,
        /// Worker threads.
        #[arg(long, env = "SYLVANGEN_THREADS")]
        workers: Option<usize>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value_t = TaskArg::All)]
        task: TaskArg,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write keypoint error histograms as CSV into this directory.
        #[arg(long)]
        hist_dir: Option<PathBuf>,
        #[arg(long, default_value_t = EvalParams::default().oks_sigma)]
        oks_sigma: f64,
    },
    /// Summarize a COCO annotation file.
    Stats {
        #[arg(long)]
        gt: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Draw one image's annotations over its RGB frame.
    Inspect {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        image_id: u64,
        #[arg(long)]
        out: PathBuf,
        /// Dataset root that image paths are relative to; the annotation
        /// file's directory by default.
        #[arg(long)]
        root: Option<PathBuf>,
    },
    /// Export a scene's terrain as a 16-bit heightmap PNG.
    Heightmap {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = HeightmapParams::default().size_m)]
        size: f64,
        #[arg(long, default_value_t = HeightmapParams::default().cell_size)]
        cell: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Bbox,
    Segm,
    Keypoints,
    All,
}

impl TaskArg {
    fn tasks(self) -> Vec<Task> {
        match self {
            TaskArg::Bbox => vec![Task::Bbox],
            TaskArg::Segm => vec![Task::Segm],
            TaskArg::Keypoints => vec![Task::Keypoints],
            TaskArg::All => Task::ALL.to_vec(),
        }
    }
}

fn parse_resolution(s: &str) -> Result<[u32; 2], String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    let (w, h) = (parse(w)?, parse(h)?);
    if w == 0 || h == 0 {
        return Err("resolution must be positive".into());
    }
    Ok([w, h])
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    config: Option<PathBuf>,
    seed: Option<u64>,
    scenes: Option<u64>,
    out: Option<PathBuf>,
    resolution: Option<[u32; 2]>,
    frames: Option<u64>,
    workers: Option<usize>,
    print_config: bool,
) -> Result<()> {
    let mut cfg = match &config {
        Some(p) => GenerateConfig::load(p)?,
        None => GenerateConfig::default(),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(n) = scenes {
        cfg.n_scenes = n;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if let Some(r) = resolution {
        cfg.resolution = r;
    }
    if let Some(f) = frames {
        cfg.frames_per_scene_range = [f, f];
    }
    if print_config {
        print!("{}", cfg.to_toml_string());
        return Ok(());
    }
    let workers = workers.filter(|&n| n > 0).unwrap_or_else(default_workers);
    eprintln!(
        "generating {} scenes into {} with {workers} workers",
        cfg.n_scenes,
        cfg.output_dir.display()
    );
    let summary = generate_with_progress(&cfg, workers, |done, total| {
        eprintln!("  {done}/{total} frames");
    })
    .with_context(|| {
        format!(
            "generation failed; {} may hold partial output and can be deleted",
            cfg.output_dir.display()
        )
    })?;
    if summary.all_train {
        println!("note: too few scenes for a 40:1:2 split; all frames are in train");
    }
    println!(
        "frames: {}  annotations: {}  train/val/test frames: {}/{}/{}",
        summary.frames,
        summary.annotations,
        summary.split_counts.train,
        summary.split_counts.val,
        summary.split_counts.test
    );
    println!(
        "elapsed: {:.1} s  throughput: {:.1} frames/min",
        summary.elapsed_s,
        summary.frames_per_minute()
    );
    Ok(())
}

fn cmd_eval(
    gt: &Path,
    pred: &Path,
    task: TaskArg,
    json: Option<PathBuf>,
    hist_dir: Option<PathBuf>,
    oks_sigma: f64,
) -> Result<()> {
    let gt_doc = CocoDocument::load(gt)?;
    let preds = load_predictions(pred, Some(&gt_doc))?;
    let params = EvalParams {
        oks_sigma,
        ..EvalParams::default()
    };
    let report = evaluate_all(&gt_doc, &preds, &task.tasks(), &params)?;
    print!("{}", report.to_text());
    if let Some(p) = json {
        report.write_json(&p)?;
    }
    if let Some(dir) = hist_dir {
        report.write_density_csv(&dir)?;
    }
    Ok(())
}

fn cmd_heightmap(seed: u64, out: &Path, size: f64, cell: f64) -> Result<()> {
    let params = HeightmapParams {
        size_m: size,
        cell_size: cell,
        ..HeightmapParams::default()
    };
    let grid = generate_heightmap(seed, &params)?;
    grid.heightmap_png16()
        .save(out)
        .with_context(|| format!("writing {}", out.display()))?;
    let (lo, hi) = grid.height_range();
    println!(
        "{}x{} nodes, heights {lo:.3} .. {hi:.3} m",
        grid.width_cells, grid.height_cells
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            seed,
            scenes,
            out,
            resolution,
            frames,
            workers,
            print_config,
        } => cmd_generate(config, seed, scenes, out, resolution, frames, workers, print_config),
        Command::Eval {
            gt,
            pred,
            task,
            json,
            hist_dir,
            oks_sigma,
        } => {
            if oks_sigma.is_nan() || oks_sigma <= 0.0 {
                bail!("--oks-sigma must be positive");
            }
            cmd_eval(&gt, &pred, task, json, hist_dir, oks_sigma)
        }
        Command::Stats { gt, json } => {
            let doc = CocoDocument::load(&gt)?;
            let s = stats::DatasetStats::compute(&doc);
            if json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                print!("{}", s.to_text());
            }
            Ok(())
        }
        Command::Inspect {
            gt,
            image_id,
            out,
            root,
        } => {
            let doc = CocoDocument::load(&gt)?;
            let root = root.unwrap_or_else(|| gt.parent().map(Path::to_path_buf).unwrap_or_default());
            let n = inspect::inspect(&doc, &root, image_id, &out)?;
            println!("drew {n} annotations to {}", out.display());
            Ok(())
        }
        Command::Heightmap { seed, out, size, cell } => cmd_heightmap(seed, &out, size, cell),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("800x600"), Ok([800, 600]));
        assert_eq!(parse_resolution("64X64"), Ok([64, 64]));
        assert!(parse_resolution("800").is_err());
        assert!(parse_resolution("0x10").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
