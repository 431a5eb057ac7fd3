use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use depthrl_core::agent::{load_model, rollout_greedy, save_model, train_with_progress};
use depthrl_core::comfort::{fit_model, load_calibration_csv, ComfortModelFile};
use depthrl_core::disparity::{generate_scene, save_csv, save_pfm, save_pgm16, warp_view, GrayImage, Quantization};
use depthrl_core::oracle::{grid_search, regret};
use depthrl_core::{env::write_trajectory_csv, Error, FeatureVector, RunConfig, SceneSpec};

use crate::manifest::RunManifest;
use crate::scenes::{list_scenes, load_scene, scene_name, sidecar_path};
use crate::{AdjustArgs, Cli, Command, EvaluateArgs, FitArgs, GenerateArgs, MapFormat, ScoreArgs, TrainArgs};

/// Regret at or below this counts as matching the oracle.
pub const REGRET_TOLERANCE: f64 = 0.05;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Score(args) => score(cli, args),
        Command::Train(args) => train(cli, args),
        Command::Adjust(args) => adjust(cli, args),
        Command::Evaluate(args) => evaluate(cli, args),
        Command::Fit(args) => fit(cli, args),
        Command::Config(args) => {
            let text = if args.print_default {
                RunConfig::default().to_toml_string()
            } else {
                load_config(cli)?.0.to_toml_string()
            };
            print!("{text}");
            Ok(())
        }
    }
}

/// 2 for unreadable or malformed inputs, 3 for invalid configuration,
/// 4 for a model trained under different features, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io { .. } | Error::Format(_) | Error::EmptyMap => 2,
                Error::ShapeMismatch { .. } | Error::LengthMismatch { .. } => 2,
                Error::Config(_) | Error::Spec(_) | Error::ConfigMismatch(_) => 3,
                Error::FingerprintMismatch { .. } => 4,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

/// The error chain on one line, skipping causes already quoted by their parent.
pub fn describe(err: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !text.contains(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}

/// The run configuration and the bytes its hash is taken over.
fn load_config(cli: &Cli) -> Result<(RunConfig, Vec<u8>)> {
    let (mut cfg, bytes) = match &cli.config {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
            (RunConfig::from_toml_str(&text)?, bytes)
        }
        None => {
            let cfg = RunConfig::default();
            let bytes = cfg.to_toml_string().into_bytes();
            (cfg, bytes)
        }
    };
    if let Some(seed) = cli.seed {
        cfg.agent.seed = seed;
    }
    Ok((cfg, bytes))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io {
            path: dir.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let (spec, bytes) = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            (SceneSpec::from_toml_str(&text)?, text.into_bytes())
        }
        None => {
            let spec = SceneSpec::default();
            let text = spec.to_toml_string();
            (spec, text.into_bytes())
        }
    };
    let seed = cli.seed.unwrap_or(0);
    let mut manifest = RunManifest::new("generate", &bytes, Some(seed));
    if let Some(p) = &args.spec {
        manifest.input(p);
    }
    manifest.phase("generate");
    create_dir(&args.out)?;
    let quant = Quantization::pgm_default();
    for i in 0..args.count {
        let map = generate_scene(&spec, seed.wrapping_add(i as u64))?;
        let path = args.out.join(format!("scene_{i:04}.pgm"));
        save_pgm16(&map, &path, quant)?;
        quant.write_sidecar(&sidecar_path(&path))?;
        manifest.output(&path);
        manifest.output(sidecar_path(&path));
    }
    if !cli.quiet {
        eprintln!("wrote {} scenes to {}", args.count, args.out.display());
    }
    manifest.write(&args.out)
}

fn score(cli: &Cli, args: &ScoreArgs) -> Result<()> {
    let (cfg, bytes) = load_config(cli)?;
    let mut manifest = RunManifest::new("score", &bytes, None);
    manifest.input(&args.scene);
    manifest.phase("score");
    let map = load_scene(&args.scene)?;
    let (features, score) = cfg.env.evaluate(&map, 1.0)?;
    let joined = join(features.as_slice());
    println!("vc {}", score.vc);
    println!("depth {}", score.depth);
    println!("features {joined}");

    if let Some(csv) = &args.csv {
        let mut out = String::new();
        if !csv.exists() {
            let names = FeatureVector::column_names(cfg.env.features.bins);
            writeln!(out, "scene,vc,depth,{}", names.join(",")).unwrap();
        }
        writeln!(out, "{},{},{},{joined}", args.scene.display(), score.vc, score.depth).unwrap();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(csv)
            .map_err(|e| Error::Io {
                path: csv.clone(),
                source: e,
            })?;
        file.write_all(out.as_bytes()).map_err(|e| Error::Io {
            path: csv.clone(),
            source: e,
        })?;
        manifest.output(csv);
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
    }
    manifest.emit(args.out.as_deref(), cli.quiet)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let (cfg, bytes) = load_config(cli)?;
    let mut manifest = RunManifest::new("train", &bytes, Some(cfg.agent.seed));
    if let Some(p) = &cli.config {
        manifest.input(p);
    }
    manifest.phase("load");
    let paths = list_scenes(&args.scenes)?;
    if paths.is_empty() {
        return Err(Error::Format(format!("no scene files in {}", args.scenes.display())).into());
    }
    let scenes = paths
        .iter()
        .map(|p| load_scene(p))
        .collect::<depthrl_core::Result<Vec<_>>>()?;
    for p in &paths {
        manifest.input(p);
    }

    manifest.phase("train");
    let stride = args.progress_every.max(1);
    let total = cfg.agent.episodes;
    let quiet = cli.quiet;
    let (net, log) = train_with_progress(&scenes, &cfg.env, &cfg.agent, |rec| {
        if !quiet && (rec.episode + 1).is_multiple_of(stride) {
            eprintln!(
                "episode {}/{total} return {:.4} final_vc {:.4} ratio {} eps {:.3}",
                rec.episode + 1,
                rec.ret,
                rec.final_vc,
                rec.final_ratio,
                rec.epsilon
            );
        }
    })?;

    manifest.phase("write");
    create_dir(&args.out)?;
    let model = args.out.join("model.json");
    let episodes = args.out.join("episodes.csv");
    let losses = args.out.join("losses.csv");
    let config = args.out.join("config.toml");
    save_model(&net, &cfg.env, &model)?;
    log.write_csvs(&episodes, &losses)?;
    write_text(&config, &cfg.to_toml_string())?;
    for p in [model, episodes, losses, config] {
        manifest.output(p);
    }
    manifest.write(&args.out)
}

fn adjust(cli: &Cli, args: &AdjustArgs) -> Result<()> {
    let (cfg, bytes) = load_config(cli)?;
    let mut manifest = RunManifest::new("adjust", &bytes, None);
    manifest.phase("load");
    let net = load_model(&args.model, &cfg.env)?;
    let scene = load_scene(&args.scene)?;
    let image = args.image.as_deref().map(GrayImage::load_pgm).transpose()?;
    manifest.input(&args.scene);
    manifest.input(&args.model);

    manifest.phase("rollout");
    let (trajectory, adjusted) = rollout_greedy(&net, &scene, &cfg.env)?;
    let last = &trajectory.last().expect("rollout has a transition").next_state;
    let warped = image
        .as_ref()
        .map(|img| warp_view(img, &scene, last.camera.ratio))
        .transpose()?;

    manifest.phase("write");
    create_dir(&args.out)?;
    let traj_path = args.out.join("trajectory.csv");
    write_trajectory_csv(&traj_path, 0, &trajectory, false)?;
    manifest.output(&traj_path);
    let map_path = match args.format {
        MapFormat::Csv => {
            let p = args.out.join("adjusted.csv");
            save_csv(&adjusted, &p)?;
            p
        }
        MapFormat::Pfm => {
            let p = args.out.join("adjusted.pfm");
            save_pfm(&adjusted, &p)?;
            p
        }
        MapFormat::Pgm => {
            let p = args.out.join("adjusted.pgm");
            let quant = Quantization::pgm_default();
            save_pgm16(&adjusted, &p, quant)?;
            quant.write_sidecar(&sidecar_path(&p))?;
            manifest.output(sidecar_path(&p));
            p
        }
    };
    manifest.output(&map_path);
    if let (Some(view), Some(src)) = (warped, &args.image) {
        let p = args.out.join("warped.pgm");
        view.save_pgm(&p)?;
        manifest.input(src);
        manifest.output(p);
    }
    if !cli.quiet {
        let first = &trajectory[0].state;
        println!(
            "ratio {} vc {} -> {} steps {}",
            last.camera.ratio,
            first.score.vc,
            last.score.vc,
            trajectory.len()
        );
    }
    manifest.write(&args.out)
}

#[derive(Debug, Clone, Serialize)]
struct SceneRow {
    scene: String,
    vc_before: f64,
    vc_after: f64,
    final_ratio: f64,
    steps: usize,
    best_ratio: f64,
    best_vc: f64,
    regret: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    scenes: usize,
    mean_vc_before: f64,
    mean_vc_after: f64,
    mean_delta_vc: f64,
    mean_regret: f64,
    fraction_within_tolerance: f64,
    tolerance: f64,
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    let (cfg, bytes) = load_config(cli)?;
    let mut manifest = RunManifest::new("evaluate", &bytes, None);
    manifest.phase("load");
    let net = load_model(&args.model, &cfg.env)?;
    manifest.input(&args.model);
    let paths = list_scenes(&args.scenes)?;
    if paths.is_empty() {
        return Err(Error::Format(format!("no scene files in {}", args.scenes.display())).into());
    }

    manifest.phase("evaluate");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("starting worker pool")?;
    let rows = pool.install(|| {
        paths
            .par_iter()
            .map(|path| -> depthrl_core::Result<SceneRow> {
                let scene = load_scene(path)?;
                let (trajectory, _) = rollout_greedy(&net, &scene, &cfg.env)?;
                let oracle = grid_search(&scene, &cfg.env)?;
                let last = &trajectory.last().expect("rollout has a transition").next_state;
                Ok(SceneRow {
                    scene: scene_name(path),
                    vc_before: trajectory[0].state.score.vc,
                    vc_after: last.score.vc,
                    final_ratio: last.camera.ratio,
                    steps: trajectory.len(),
                    best_ratio: oracle.best_ratio,
                    best_vc: oracle.best_vc,
                    regret: regret(&trajectory, &oracle)?,
                })
            })
            .collect::<depthrl_core::Result<Vec<_>>>()
    })?;
    for p in &paths {
        manifest.input(p);
    }

    manifest.phase("write");
    let summary = summarize(&rows);
    create_dir(&args.out)?;
    let csv_path = args.out.join("evaluation.csv");
    let mut csv =
        String::from("scene,vc_before,vc_after,final_ratio,steps,best_ratio,best_vc,regret,within_tolerance\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.scene,
            r.vc_before,
            r.vc_after,
            r.final_ratio,
            r.steps,
            r.best_ratio,
            r.best_vc,
            r.regret,
            r.regret <= REGRET_TOLERANCE
        )
        .unwrap();
    }
    write_text(&csv_path, &csv)?;
    let summary_path = args.out.join("summary.json");
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_text(&summary_path, &(summary_text.clone() + "\n"))?;
    if !cli.quiet {
        println!("{summary_text}");
    }
    manifest.output(csv_path);
    manifest.output(summary_path);
    manifest.write(&args.out)
}

fn summarize(rows: &[SceneRow]) -> Summary {
    let n = rows.len() as f64;
    let mean = |f: fn(&SceneRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Summary {
        scenes: rows.len(),
        mean_vc_before: mean(|r| r.vc_before),
        mean_vc_after: mean(|r| r.vc_after),
        mean_delta_vc: mean(|r| r.vc_after - r.vc_before),
        mean_regret: mean(|r| r.regret),
        fraction_within_tolerance: rows.iter().filter(|r| r.regret <= REGRET_TOLERANCE).count() as f64 / n,
        tolerance: REGRET_TOLERANCE,
    }
}

fn fit(cli: &Cli, args: &FitArgs) -> Result<()> {
    let (cfg, bytes) = load_config(cli)?;
    let mut manifest = RunManifest::new("fit", &bytes, None);
    manifest.input(&args.samples);
    manifest.phase("fit");
    let samples = load_calibration_csv(&args.samples)?;
    if let Some(s) = samples.iter().find(|s| s.features.len() != cfg.env.features.len()) {
        return Err(Error::LengthMismatch {
            expected: cfg.env.features.len(),
            got: s.features.len(),
        }
        .into());
    }
    let model = fit_model(&samples, args.lambda)?;
    create_dir(&args.out)?;
    let path: PathBuf = args.out.join("comfort_model.json");
    ComfortModelFile::new(&cfg.env.features, &model).save(&path)?;
    if !cli.quiet {
        println!("bias {}", model.bias);
        println!("weights {}", join(&model.weights));
    }
    manifest.output(path);
    manifest.write(&args.out)
}
